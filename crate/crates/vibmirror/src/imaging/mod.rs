//! Monte-Carlo synthesis of post-bounce absorption images and the
//! ring-integration procedure that recovers order weights from an image.
//!
//! After the bounce every atom moves ballistically, so at flight time t the
//! cloud sits on a sphere of radius v_n t around the free-fall image of the
//! bounce point. Projected along the line of sight, an atom with transverse
//! velocity v_y lands at radius t sqrt(v_n^2 - v_y^2) from the projected
//! sphere centre: at most v_n t, with a one-sided tail towards smaller radii.
//! Weight recovery integrates the image over concentric annuli around that
//! centre and then unfolds the one-sided tails analytically.

pub mod pgm;

use crate::constants::ConstantsTable;
use crate::diffraction::SidebandSpectrum;
use crate::error::{Error, Result};
use crate::kinematics::{impact_state, sideband_velocity};
use crate::params::ExperimentParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Ballistic inputs of an imaging run, decoupled from the mirror drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightPath {
    /// Release height above the mirror surface, m.
    pub drop_height: f64,
    /// Free-fall time from release to the mirror, s.
    pub fall_time: f64,
    /// Flight time from the bounce to detection, s.
    pub bounce_time: f64,
    /// Horizontal drift velocity along x, m/s.
    pub horizontal_velocity: f64,
    /// Mirror drive frequency, Hz.
    pub mod_frequency: f64,
}

impl FlightPath {
    pub fn from_experiment(params: &ExperimentParams) -> Self {
        FlightPath {
            drop_height: params.drop_height,
            fall_time: params.fall_time,
            bounce_time: params.bounce_time,
            horizontal_velocity: params.horizontal_velocity,
            mod_frequency: params.modulation.mod_frequency,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value, positive) in [
            ("drop height", self.drop_height, true),
            ("fall time", self.fall_time, true),
            ("bounce time", self.bounce_time, true),
            ("drive frequency", self.mod_frequency, true),
            ("horizontal velocity", self.horizontal_velocity, false),
        ] {
            if !value.is_finite() || (positive && value <= 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.mod_frequency
    }
}

/// One atom right after the bounce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSample {
    /// Diffraction order the atom scattered into.
    pub order: i32,
    /// Velocity (vx, vy, vz) at the bounce instant, m/s; |v| = v_n exactly.
    pub velocity: [f64; 3],
    /// Bounce location (x, y) on the mirror plane, m.
    pub position: [f64; 2],
}

/// Sampled ensemble plus its bookkeeping.
#[derive(Debug, Clone)]
pub struct EnsembleSample {
    pub atoms: Vec<AtomSample>,
    /// Velocity draws rejected (and repeated) per requested atom.
    pub redraw_fraction: f64,
    pub seed: u64,
}

/// Camera looking along y, with z measured up from the mirror surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraGeometry {
    /// Field of view along x, m.
    pub width: f64,
    /// Field of view along z, m.
    pub height: f64,
    /// Pixel pitch, m.
    pub pitch: f64,
    /// Pixel count along x.
    pub columns: usize,
    /// Pixel count along z.
    pub rows: usize,
    /// Left edge of the field, m.
    pub x_min: f64,
    /// Bottom edge of the field (the mirror surface), m.
    pub z_min: f64,
}

impl CameraGeometry {
    pub fn new(width: f64, height: f64, pitch: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && pitch > 0.0)
            || !(width.is_finite() && height.is_finite() && pitch.is_finite())
        {
            return Err(Error::domain(format!(
                "camera field and pitch must be positive, got {width} x {height} at {pitch}"
            )));
        }
        let columns = width / pitch;
        let rows = height / pitch;
        // the field must tile into whole pixels
        if (columns - columns.round()).abs() > 1e-6 * columns
            || (rows - rows.round()).abs() > 1e-6 * rows
        {
            return Err(Error::domain(format!(
                "pixel pitch {pitch} does not divide the field {width} x {height}"
            )));
        }
        Ok(CameraGeometry {
            width,
            height,
            pitch,
            columns: columns.round() as usize,
            rows: rows.round() as usize,
            x_min: -width / 2.0,
            z_min: 0.0,
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.width
    }

    pub fn z_max(&self) -> f64 {
        self.z_min + self.height
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        x >= self.x_min && x < self.x_max() && z >= self.z_min && z < self.z_max()
    }

    /// Row-major index from the top-left pixel, if (x, z) is inside the field.
    pub fn pixel_index(&self, x: f64, z: f64) -> Option<usize> {
        if !self.contains(x, z) {
            return None;
        }
        let col = ((x - self.x_min) / self.pitch) as usize;
        let from_bottom = ((z - self.z_min) / self.pitch) as usize;
        let col = col.min(self.columns - 1);
        let row = self.rows - 1 - from_bottom.min(self.rows - 1);
        Some(row * self.columns + col)
    }

    /// Centre of the pixel at (row, col).
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let x = self.x_min + (col as f64 + 0.5) * self.pitch;
        let z = self.z_min + (self.rows - 1 - row) as f64 * self.pitch + 0.5 * self.pitch;
        (x, z)
    }
}

impl Default for CameraGeometry {
    fn default() -> Self {
        CameraGeometry::new(5.5e-3, 4.4e-3, 2.75e-5).expect("default camera tiles")
    }
}

/// Column-density raster, one unit per atom before any noise layer.
#[derive(Debug, Clone)]
pub struct SyntheticImage {
    /// Row-major from the top-left pixel.
    pub pixels: Vec<f64>,
    pub geometry: CameraGeometry,
    /// Atoms handed to the synthesis, in-field or not.
    pub atom_count: usize,
    pub in_field: usize,
    pub out_of_field: usize,
    pub seed: u64,
}

impl SyntheticImage {
    pub fn total_density(&self) -> f64 {
        self.pixels.iter().sum()
    }

    pub fn max_pixel(&self) -> f64 {
        self.pixels.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// SplitMix64 step; the standard stream used to derive partition seeds.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Atoms per independently seeded sampling partition. Partitions make the
/// draw order irrelevant, so the ensemble is reproducible even if partitions
/// are one day farmed out to worker threads.
const SAMPLE_PARTITION: usize = 4096;

/// Draws `count` atoms from the order weights and puts them on the elastic
/// sphere of their order: transverse velocities are Gaussian with spread
/// `sigma_v` (x also carries the drift), and vz makes the speed exactly v_n.
/// Draws whose transverse speed exceeds v_n are rejected and repeated; the
/// run aborts if more than 10% of draws are rejected.
pub fn sample_ensemble(
    spectrum: &SidebandSpectrum,
    flight: &FlightPath,
    constants: &ConstantsTable,
    sigma_v: f64,
    count: usize,
    seed: u64,
) -> Result<EnsembleSample> {
    flight.validate()?;
    if count == 0 {
        return Err(Error::contract("ensemble needs at least one atom"));
    }
    if !sigma_v.is_finite() || sigma_v < 0.0 {
        return Err(Error::domain(format!(
            "velocity spread must be non-negative, got {sigma_v}"
        )));
    }
    let total = spectrum.total();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::contract(format!(
            "order weights must be normalized, total is {total}"
        )));
    }

    let impact = impact_state(flight.drop_height, constants)?;
    let omega = flight.omega();
    // closed channels carry no outgoing wave; drop them from the draw table
    let mut channels: Vec<(i32, f64, f64)> = Vec::new();
    let mut cumulative = 0.0;
    for &(order, weight) in &spectrum.orders {
        if let Ok(speed) = sideband_velocity(impact.speed, order, omega, constants) {
            cumulative += weight;
            channels.push((order, cumulative, speed));
        }
    }
    if channels.is_empty() || cumulative <= 0.0 {
        return Err(Error::domain("no open diffraction channel carries weight"));
    }

    let bounce_point = [flight.horizontal_velocity * flight.fall_time, 0.0];
    let drift = flight.horizontal_velocity;
    let redraw_budget = count / 10 + 1000;
    let mut redraws: usize = 0;
    let mut atoms = Vec::with_capacity(count);
    let mut seed_state = seed;
    let mut remaining = count;
    while remaining > 0 {
        let chunk = remaining.min(SAMPLE_PARTITION);
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(&mut seed_state));
        for _ in 0..chunk {
            let pick = rng.gen::<f64>() * cumulative;
            let &(order, _, v_n) = channels
                .iter()
                .find(|&&(_, edge, _)| pick < edge)
                .unwrap_or(channels.last().expect("channels non-empty"));
            let velocity = loop {
                let vx = drift + sigma_v * rng.sample::<f64, _>(StandardNormal);
                let vy = sigma_v * rng.sample::<f64, _>(StandardNormal);
                let vz_sq = v_n * v_n - vx * vx - vy * vy;
                if vz_sq > 0.0 {
                    break [vx, vy, vz_sq.sqrt()];
                }
                redraws += 1;
                if redraws > redraw_budget {
                    return Err(Error::domain(format!(
                        "transverse spread {sigma_v} rejects more than 10% of draws \
                         against the channel speeds"
                    )));
                }
            };
            atoms.push(AtomSample {
                order,
                velocity,
                position: bounce_point,
            });
        }
        remaining -= chunk;
    }

    let redraw_fraction = redraws as f64 / count as f64;
    if redraw_fraction > 0.10 {
        return Err(Error::domain(format!(
            "redraw fraction {redraw_fraction:.4} exceeds the 10% budget"
        )));
    }
    Ok(EnsembleSample {
        atoms,
        redraw_fraction,
        seed,
    })
}

/// Flies every atom for the bounce-to-detection time under gravity and bins
/// the projection along y into camera pixels. Atoms outside the field are
/// counted, not dropped from the bookkeeping.
pub fn synthesize_image(
    ensemble: &EnsembleSample,
    flight: &FlightPath,
    constants: &ConstantsTable,
    camera: &CameraGeometry,
) -> Result<SyntheticImage> {
    flight.validate()?;
    constants.validate()?;
    let t = flight.bounce_time;
    let fall = 0.5 * constants.g * t * t;
    let mut pixels = vec![0.0; camera.columns * camera.rows];
    let mut in_field = 0usize;
    for atom in &ensemble.atoms {
        let x = atom.position[0] + atom.velocity[0] * t;
        let z = atom.velocity[2] * t - fall;
        if let Some(index) = camera.pixel_index(x, z) {
            pixels[index] += 1.0;
            in_field += 1;
        }
    }
    Ok(SyntheticImage {
        pixels,
        geometry: *camera,
        atom_count: ensemble.atoms.len(),
        in_field,
        out_of_field: ensemble.atoms.len() - in_field,
        seed: ensemble.seed,
    })
}

/// Replaces every pixel by a Poisson draw with the pixel value as mean,
/// emulating atom shot noise in the column density.
pub fn apply_shot_noise(image: &mut SyntheticImage, seed: u64) -> Result<()> {
    use rand_distr::Distribution;
    let mut state = seed ^ 0x5045_4C4C_4554_5321;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(&mut state));
    for px in &mut image.pixels {
        if *px > 0.0 {
            let poisson = rand_distr::Poisson::new(*px)
                .map_err(|e| Error::domain(format!("shot noise mean {px}: {e}")))?;
            *px = poisson.sample(&mut rng);
        }
    }
    Ok(())
}

/// Radial histogram of the density a single order owns.
#[derive(Debug, Clone)]
pub struct OrderProfile {
    pub order: i32,
    /// Centre the radii are measured from, (x, z) in metres.
    pub center: [f64; 2],
    /// Radial bin width, m.
    pub bin_width: f64,
    pub bins: Vec<f64>,
}

impl OrderProfile {
    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Integrates the image over annuli of fixed radial width around each
/// order's centre. Every in-field pixel is assigned to the nearest centre,
/// so the profiles partition the in-field density exactly.
pub fn annular_profile(
    image: &SyntheticImage,
    centers: &[(i32, [f64; 2])],
    bin_width: f64,
) -> Result<Vec<OrderProfile>> {
    if centers.is_empty() {
        return Err(Error::contract("annular profiles need at least one centre"));
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::domain(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let geometry = &image.geometry;
    for (i, &(order, [x, z])) in centers.iter().enumerate() {
        if !geometry.contains(x, z) {
            return Err(Error::contract(format!(
                "centre of order {order} at ({x}, {z}) lies outside the field"
            )));
        }
        for &(other, [x2, z2]) in &centers[..i] {
            if other == order {
                return Err(Error::contract(format!("order {order} listed twice")));
            }
            if (x - x2).hypot(z - z2) < bin_width {
                return Err(Error::contract(format!(
                    "centres of orders {other} and {order} are degenerate"
                )));
            }
        }
    }

    // cover at least half the closest inter-centre distance up front
    let initial_bins = if centers.len() >= 2 {
        let mut closest = f64::INFINITY;
        for (i, &(_, [x, z])) in centers.iter().enumerate() {
            for &(_, [x2, z2]) in &centers[..i] {
                closest = closest.min((x - x2).hypot(z - z2));
            }
        }
        (closest / 2.0 / bin_width).ceil() as usize + 1
    } else {
        let (x, z) = (centers[0].1[0], centers[0].1[1]);
        let dx = (x - geometry.x_min).max(geometry.x_max() - x);
        let dz = (z - geometry.z_min).max(geometry.z_max() - z);
        (dx.hypot(dz) / bin_width).ceil() as usize + 1
    };
    let mut profiles: Vec<OrderProfile> = centers
        .iter()
        .map(|&(order, center)| OrderProfile {
            order,
            center,
            bin_width,
            bins: vec![0.0; initial_bins],
        })
        .collect();

    for row in 0..geometry.rows {
        for col in 0..geometry.columns {
            let mass = image.pixels[row * geometry.columns + col];
            if mass == 0.0 {
                continue;
            }
            let (x, z) = geometry.pixel_center(row, col);
            let (owner, radius) = profiles
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (x - p.center[0]).hypot(z - p.center[1])))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("profiles non-empty");
            let bin = (radius / bin_width) as usize;
            let bins = &mut profiles[owner].bins;
            if bin >= bins.len() {
                bins.resize(bin + 1, 0.0);
            }
            bins[bin] += mass;
        }
    }
    Ok(profiles)
}

/// Relative weight per order: each profile's integral over the grand total.
pub fn extract_weights(profiles: &[OrderProfile]) -> Result<SidebandSpectrum> {
    if profiles.is_empty() {
        return Err(Error::contract("no profiles to extract weights from"));
    }
    let totals: Vec<(i32, f64)> = profiles.iter().map(|p| (p.order, p.total())).collect();
    let grand: f64 = totals.iter().map(|&(_, t)| t).sum();
    if grand <= 0.0 || grand.is_nan() {
        return Err(Error::domain("profiles carry no density"));
    }
    SidebandSpectrum::from_weights(totals)
}

/// Weight recovery from the concentric-ring structure of an image.
#[derive(Debug, Clone)]
pub struct RingExtraction {
    /// Unfolded, renormalized weights.
    pub spectrum: SidebandSpectrum,
    /// Annulus mass fractions before unfolding.
    pub raw: Vec<(i32, f64)>,
    /// Projected sphere centre (x, z), m.
    pub center: [f64; 2],
    /// Nominal ring radius v_n t per order, m.
    pub radii: Vec<(i32, f64)>,
    /// Ring radii measured from the unfolded radial moments, m; rings with
    /// too little recovered mass fall back to their nominal radius.
    pub measured_radii: Vec<(i32, f64)>,
    /// Mean z of the density inside each order's annulus, when it has mass.
    pub centroids: Vec<(i32, Option<f64>)>,
    /// Share of the in-field density inside the analysis annuli.
    pub window_fraction: f64,
}

/// Tail fraction of an order's mass lying more than `drop` below its nominal
/// radius. The projected radius deficit is t vy^2 / (2 v_n) for transverse
/// velocity vy, so the tail is erfc(sqrt(drop / (2 s))) with s = t sigma^2 / (2 v_n).
fn radial_tail(drop: f64, scale: f64) -> f64 {
    if drop <= 0.0 {
        1.0
    } else if scale <= 0.0 {
        0.0
    } else {
        libm::erfc((drop / (2.0 * scale)).sqrt())
    }
}

/// Mean radius deficit restricted to deficits up to `drop`: with the deficit
/// distributed as scale * chi-squared(1), this is
/// s erf(sqrt(d/2s)) - sqrt(2 d s / pi) exp(-d/2s), rising from 0 to s.
fn radial_deficit_moment(drop: f64, scale: f64) -> f64 {
    if drop <= 0.0 || scale <= 0.0 {
        0.0
    } else {
        let u = drop / (2.0 * scale);
        scale * libm::erf(u.sqrt())
            - (2.0 * drop * scale / std::f64::consts::PI).sqrt() * (-u).exp()
    }
}

/// Integrates concentric annuli around the projected sphere centre, one per
/// open order, and unfolds the one-sided radial tails to recover the order
/// weights. Boundaries sit midway between neighbouring ring radii.
pub fn recover_weights(
    image: &SyntheticImage,
    flight: &FlightPath,
    constants: &ConstantsTable,
    sigma_v: f64,
    n_orders: u32,
) -> Result<RingExtraction> {
    flight.validate()?;
    constants.validate()?;
    if !(1..=8).contains(&n_orders) {
        return Err(Error::contract(format!(
            "ring extraction supports 1..=8 orders, got {n_orders}"
        )));
    }
    if !sigma_v.is_finite() || sigma_v < 0.0 {
        return Err(Error::domain(format!(
            "velocity spread must be non-negative, got {sigma_v}"
        )));
    }
    let in_field_total = image.total_density();
    if in_field_total <= 0.0 || in_field_total.is_nan() {
        return Err(Error::domain("image carries no density"));
    }

    let impact = impact_state(flight.drop_height, constants)?;
    let omega = flight.omega();
    let t = flight.bounce_time;
    let center = [
        flight.horizontal_velocity * flight.fall_time,
        -0.5 * constants.g * t * t,
    ];

    let span = n_orders as i32;
    let mut orders: Vec<(i32, f64)> = Vec::new();
    for order in -span..=span {
        if let Ok(speed) = sideband_velocity(impact.speed, order, omega, constants) {
            orders.push((order, speed * t));
        }
    }
    if orders.is_empty() {
        return Err(Error::domain("no open diffraction channel to extract"));
    }
    let count = orders.len();

    // annulus boundaries: midpoints between rings, half a gap above the top
    // ring, two gaps of floor below the bottom ring to catch its tail
    let margin = if count >= 2 {
        (orders[count - 1].1 - orders[0].1) / (count - 1) as f64
    } else {
        (8.0 * t * sigma_v * sigma_v / (2.0 * impact.speed)).max(8.0 * image.geometry.pitch)
    };
    let mut upper = vec![0.0; count];
    for i in 0..count {
        upper[i] = if i + 1 < count {
            (orders[i].1 + orders[i + 1].1) / 2.0
        } else {
            orders[i].1 + margin / 2.0
        };
    }
    let floor = (orders[0].1 - 2.0 * margin).max(0.0);

    let geometry = &image.geometry;
    let mut masses = vec![0.0; count];
    let mut z_moment = vec![0.0; count];
    let mut r_moment = vec![0.0; count];
    for row in 0..geometry.rows {
        for col in 0..geometry.columns {
            let mass = image.pixels[row * geometry.columns + col];
            if mass == 0.0 {
                continue;
            }
            let (x, z) = geometry.pixel_center(row, col);
            let radius = (x - center[0]).hypot(z - center[1]);
            if radius <= floor || radius > upper[count - 1] {
                continue;
            }
            let annulus = upper.partition_point(|&edge| edge < radius);
            masses[annulus] += mass;
            z_moment[annulus] += mass * z;
            r_moment[annulus] += mass * radius;
        }
    }
    let window: f64 = masses.iter().sum();
    if window <= 0.0 || window.is_nan() {
        return Err(Error::domain("no density inside the analysis annuli"));
    }

    // response matrix: share of order j's mass landing in annulus i <= j
    let scales: Vec<f64> = orders
        .iter()
        .map(|&(_, radius)| t * sigma_v * sigma_v / (2.0 * (radius / t)))
        .collect();
    let mut response = vec![vec![0.0; count]; count];
    for (j, &(_, radius)) in orders.iter().enumerate() {
        for i in 0..=j {
            let below = if i == 0 { floor } else { upper[i - 1] };
            response[i][j] =
                radial_tail(radius - upper[i], scales[j]) - radial_tail(radius - below, scales[j]);
        }
    }

    // unfold top-down: the highest ring receives no tail from above
    let mut weights = vec![0.0; count];
    for j in (0..count).rev() {
        let mut acc = masses[j];
        for l in j + 1..count {
            acc -= response[j][l] * weights[l];
        }
        if response[j][j] <= 1e-6 {
            return Err(Error::domain(format!(
                "annulus of order {} captures none of its ring",
                orders[j].0
            )));
        }
        weights[j] = (acc / response[j][j]).max(0.0);
    }

    // unfold first radial moments the same way to measure the ring radii:
    // sum_j (W_j T_ij) r_j = R_i + sum_j W_j H_ij, with H the share of the
    // deficit moment each window sees; unbiased because the annulus centroid
    // alone is dragged toward whichever neighbour leaks the most mass in
    let mut deficit = vec![vec![0.0; count]; count];
    for (j, &(_, radius)) in orders.iter().enumerate() {
        for i in 0..=j {
            let below = if i == 0 { floor } else { upper[i - 1] };
            deficit[i][j] = radial_deficit_moment(radius - below, scales[j])
                - radial_deficit_moment(radius - upper[i], scales[j]);
        }
    }
    let mut measured = vec![0.0; count];
    for j in (0..count).rev() {
        let own = weights[j] * response[j][j];
        if own <= 1e-9 * window {
            // too little mass to place this ring; report its nominal radius
            measured[j] = orders[j].1;
            continue;
        }
        let mut acc = r_moment[j];
        for l in 0..count {
            acc += weights[l] * deficit[j][l];
        }
        for l in j + 1..count {
            acc -= weights[l] * response[j][l] * measured[l];
        }
        measured[j] = acc / own;
        if !measured[j].is_finite() {
            measured[j] = orders[j].1;
        }
    }

    let spectrum = SidebandSpectrum::from_weights(
        orders
            .iter()
            .zip(&weights)
            .map(|(&(order, _), &w)| (order, w))
            .collect(),
    )?;
    let raw: Vec<(i32, f64)> = orders
        .iter()
        .zip(&masses)
        .map(|(&(order, _), &m)| (order, m / window))
        .collect();
    let centroids: Vec<(i32, Option<f64>)> = orders
        .iter()
        .zip(masses.iter().zip(&z_moment))
        .map(|(&(order, _), (&m, &zm))| (order, (m > 0.0).then(|| zm / m)))
        .collect();
    let measured_radii: Vec<(i32, f64)> = orders
        .iter()
        .zip(&measured)
        .map(|(&(order, _), &r)| (order, r))
        .collect();
    Ok(RingExtraction {
        spectrum,
        raw,
        center,
        radii: orders,
        measured_radii,
        centroids,
        window_fraction: window / in_field_total,
    })
}
