//! NetPBM PGM encoding of synthetic images, 16-bit, with a JSON sidecar
//! carrying the geometry and run parameters an extraction needs.

use super::{CameraGeometry, FlightPath, SyntheticImage};
use crate::constants::ConstantsTable;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_GRAY: u16 = 65535;

/// Quantized grayscale raster, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub columns: usize,
    pub rows: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// P2, whitespace-separated decimal samples.
    Ascii,
    /// P5, big-endian binary samples.
    Binary,
}

/// Everything the `extract` side needs to interpret a PGM raster. The true
/// order weights are deliberately not part of the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub geometry: CameraGeometry,
    pub flight: FlightPath,
    pub constants: ConstantsTable,
    /// Transverse velocity spread used for the synthesis, m/s.
    pub sigma_v: f64,
    pub seed: u64,
    pub atom_count: usize,
    pub in_field: usize,
    pub out_of_field: usize,
    /// Column density represented by one gray level.
    pub atoms_per_gray: f64,
}

/// Scales a density raster to the full 16-bit gray range. Returns the
/// quantized image and the density one gray level stands for.
pub fn quantize(image: &SyntheticImage) -> (PgmImage, f64) {
    let max = image.max_pixel();
    let atoms_per_gray = if max > 0.0 {
        max / f64::from(MAX_GRAY)
    } else {
        1.0
    };
    let samples = image
        .pixels
        .iter()
        .map(|&px| {
            (px / atoms_per_gray)
                .round()
                .clamp(0.0, f64::from(MAX_GRAY)) as u16
        })
        .collect();
    (
        PgmImage {
            columns: image.geometry.columns,
            rows: image.geometry.rows,
            maxval: MAX_GRAY,
            samples,
        },
        atoms_per_gray,
    )
}

/// Rebuilds a density raster from a quantized image and its sidecar.
pub fn to_synthetic(pgm: &PgmImage, sidecar: &ImageSidecar) -> Result<SyntheticImage> {
    if pgm.columns != sidecar.geometry.columns || pgm.rows != sidecar.geometry.rows {
        return Err(Error::contract(format!(
            "raster is {}x{} but the sidecar geometry says {}x{}",
            pgm.columns, pgm.rows, sidecar.geometry.columns, sidecar.geometry.rows
        )));
    }
    let pixels: Vec<f64> = pgm
        .samples
        .iter()
        .map(|&s| f64::from(s) * sidecar.atoms_per_gray)
        .collect();
    Ok(SyntheticImage {
        pixels,
        geometry: sidecar.geometry,
        atom_count: sidecar.atom_count,
        in_field: sidecar.in_field,
        out_of_field: sidecar.out_of_field,
        seed: sidecar.seed,
    })
}

pub fn encode(pgm: &PgmImage, format: PgmFormat) -> Result<Vec<u8>> {
    if pgm.columns == 0 || pgm.rows == 0 {
        return Err(Error::contract("raster must not be empty"));
    }
    if pgm.samples.len() != pgm.columns * pgm.rows {
        return Err(Error::contract(format!(
            "raster holds {} samples for {}x{} pixels",
            pgm.samples.len(),
            pgm.columns,
            pgm.rows
        )));
    }
    if pgm.maxval == 0 {
        return Err(Error::contract("maxval must be at least 1"));
    }
    if let Some(&bad) = pgm.samples.iter().find(|&&s| s > pgm.maxval) {
        return Err(Error::contract(format!(
            "sample {bad} exceeds maxval {}",
            pgm.maxval
        )));
    }
    let magic = match format {
        PgmFormat::Ascii => "P2",
        PgmFormat::Binary => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n{}\n", pgm.columns, pgm.rows, pgm.maxval).into_bytes();
    match format {
        PgmFormat::Ascii => {
            // NetPBM keeps text lines short; a dozen five-digit samples fit
            for chunk in pgm.samples.chunks(12) {
                let line: Vec<String> = chunk.iter().map(u16::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        PgmFormat::Binary => {
            if pgm.maxval > 255 {
                for &s in &pgm.samples {
                    out.extend_from_slice(&s.to_be_bytes());
                }
            } else {
                out.extend(pgm.samples.iter().map(|&s| s as u8));
            }
        }
    }
    Ok(out)
}

struct Tokenizer<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(data: &'a [u8]) -> Self {
        Tokenizer { data, pos: 0 }
    }

    /// Next whitespace-delimited token, skipping `#` comments to end of line.
    fn token(&mut self) -> Result<&'a str> {
        loop {
            while self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.data.len() && self.data[self.pos] == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::contract("truncated PGM header"));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .map_err(|_| Error::contract("PGM header is not ASCII"))
    }

    fn number(&mut self) -> Result<usize> {
        let token = self.token()?;
        token.parse().map_err(|_| {
            Error::contract(format!(
                "expected a number in the PGM header, got {token:?}"
            ))
        })
    }
}

pub fn decode(data: &[u8]) -> Result<PgmImage> {
    let mut tokens = Tokenizer::new(data);
    let magic = tokens.token()?;
    let binary = match magic {
        "P2" => false,
        "P5" => true,
        other => {
            return Err(Error::contract(format!(
                "expected a PGM magic number P2 or P5, got {other:?}"
            )))
        }
    };
    let columns = tokens.number()?;
    let rows = tokens.number()?;
    let maxval = tokens.number()?;
    if columns == 0 || rows == 0 {
        return Err(Error::contract("raster must not be empty"));
    }
    if maxval == 0 || maxval > usize::from(MAX_GRAY) {
        return Err(Error::contract(format!(
            "maxval {maxval} outside 1..=65535"
        )));
    }
    let maxval = maxval as u16;
    let count = columns * rows;
    let mut samples = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = tokens.pos + 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let raster = data
            .get(start..start + need)
            .ok_or_else(|| Error::contract("truncated PGM raster"))?;
        if wide {
            for pair in raster.chunks_exact(2) {
                samples.push(u16::from_be_bytes([pair[0], pair[1]]));
            }
        } else {
            samples.extend(raster.iter().map(|&b| u16::from(b)));
        }
    } else {
        for _ in 0..count {
            let value = tokens.number()?;
            if value > usize::from(MAX_GRAY) {
                return Err(Error::contract(format!("sample {value} exceeds 16 bits")));
            }
            samples.push(value as u16);
        }
    }
    if let Some(&bad) = samples.iter().find(|&&s| s > maxval) {
        return Err(Error::contract(format!(
            "sample {bad} exceeds maxval {maxval}"
        )));
    }
    Ok(PgmImage {
        columns,
        rows,
        maxval,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toy_pgm() -> PgmImage {
        PgmImage {
            columns: 3,
            rows: 2,
            maxval: MAX_GRAY,
            samples: vec![0, 700, 65535, 12, 9, 301],
        }
    }

    #[test]
    fn binary_round_trip_preserves_samples() {
        let pgm = toy_pgm();
        let bytes = encode(&pgm, PgmFormat::Binary).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n65535\n"));
        assert_eq!(decode(&bytes).unwrap(), pgm);
    }

    #[test]
    fn ascii_round_trip_preserves_samples() {
        let pgm = toy_pgm();
        let bytes = encode(&pgm, PgmFormat::Ascii).unwrap();
        assert!(bytes.starts_with(b"P2\n"));
        assert_eq!(decode(&bytes).unwrap(), pgm);
    }

    #[test]
    fn narrow_rasters_use_single_bytes() {
        let pgm = PgmImage {
            columns: 2,
            rows: 1,
            maxval: 255,
            samples: vec![7, 255],
        };
        let bytes = encode(&pgm, PgmFormat::Binary).unwrap();
        assert_eq!(&bytes[bytes.len() - 2..], &[7, 255]);
        assert_eq!(decode(&bytes).unwrap(), pgm);
    }

    #[test]
    fn comments_in_headers_are_skipped() {
        let text = b"P2 # creator\n# full line comment\n2 1\n10\n3 10\n";
        let pgm = decode(text).unwrap();
        assert_eq!(pgm.samples, vec![3, 10]);
        assert_eq!(pgm.maxval, 10);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(decode(b"P3\n1 1\n255\n0\n").is_err());
        assert!(decode(b"P2\n2 2\n255\n1 2 3\n").is_err());
        assert!(decode(b"P2\n1 1\n70000\n0\n").is_err());
        assert!(decode(b"P2\n1 1\n10\n11\n").is_err());
        let mut truncated = encode(&toy_pgm(), PgmFormat::Binary).unwrap();
        truncated.pop();
        assert!(decode(&truncated).is_err());
        let bad = PgmImage {
            columns: 2,
            rows: 1,
            maxval: 10,
            samples: vec![11, 0],
        };
        assert!(encode(&bad, PgmFormat::Binary).is_err());
    }

    #[test]
    fn quantization_keeps_relative_density() {
        let camera = CameraGeometry::new(5.5e-4, 4.4e-4, 5.5e-5).unwrap();
        let mut image = SyntheticImage {
            pixels: vec![0.0; camera.columns * camera.rows],
            geometry: camera,
            atom_count: 900,
            in_field: 900,
            out_of_field: 0,
            seed: 1,
        };
        image.pixels[0] = 600.0;
        image.pixels[5] = 300.0;
        let (pgm, atoms_per_gray) = quantize(&image);
        assert_eq!(pgm.samples[0], MAX_GRAY);
        assert_abs_diff_eq!(atoms_per_gray, 600.0 / 65535.0, epsilon = 1e-12);
        let sidecar = ImageSidecar {
            geometry: camera,
            flight: FlightPath {
                drop_height: 3.6e-3,
                fall_time: 27e-3,
                bounce_time: 27e-3,
                horizontal_velocity: 0.0,
                mod_frequency: 500e3,
            },
            constants: ConstantsTable::default(),
            sigma_v: 0.0,
            seed: 1,
            atom_count: 900,
            in_field: 900,
            out_of_field: 0,
            atoms_per_gray,
        };
        let back = to_synthetic(&pgm, &sidecar).unwrap();
        assert_abs_diff_eq!(back.pixels[0], 600.0, epsilon = 600.0 / 65535.0);
        assert_abs_diff_eq!(back.pixels[5], 300.0, epsilon = 600.0 / 65535.0);
        assert_abs_diff_eq!(back.pixels[1], 0.0);
        let wrong = PgmImage {
            columns: 3,
            rows: 2,
            maxval: MAX_GRAY,
            samples: vec![0; 6],
        };
        assert!(to_synthetic(&wrong, &sidecar).is_err());
    }

    #[test]
    fn sidecar_json_round_trips() {
        let sidecar = ImageSidecar {
            geometry: CameraGeometry::default(),
            flight: FlightPath {
                drop_height: 3.6e-3,
                fall_time: 27e-3,
                bounce_time: 27e-3,
                horizontal_velocity: 30e-3,
                mod_frequency: 500e3,
            },
            constants: ConstantsTable::default(),
            sigma_v: 0.0388,
            seed: 11,
            atom_count: 1000,
            in_field: 990,
            out_of_field: 10,
            atoms_per_gray: 0.01,
        };
        let text = serde_json::to_string_pretty(&sidecar).unwrap();
        let back: ImageSidecar = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sidecar);
    }
}
