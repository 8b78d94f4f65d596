//! Deterministic artifact rendering: fixed-precision number formatting,
//! CSV tables with unit-annotated headers, and atomic file replacement.
//!
//! All numbers in artifacts pass through [`sig6`], so a rerun with the same
//! inputs reproduces every output byte for byte.

use std::fs;
use std::path::Path;

use crate::error::Result;

/// Formats a number with six significant digits, switching to scientific
/// notation outside the range where fixed point stays that precise.
/// Trailing zeros are trimmed, so the output is also the shortest spelling
/// at that precision.
pub fn sig6(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    // round to six significant digits first; the exponent below reflects
    // the rounded value, so 999999.5 lands in the scientific branch as 1e6
    let sci = format!("{value:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("LowerExp output");
    let exp: i32 = exp.parse().expect("LowerExp exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 6);
    let body = if (-4..6).contains(&exp) {
        if exp >= 0 {
            let split = (exp + 1) as usize;
            let (whole, frac) = digits.split_at(split);
            trim_fraction(whole, frac)
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            trim_fraction("0", &format!("{zeros}{digits}"))
        }
    } else {
        let (lead, frac) = digits.split_at(1);
        format!("{}e{exp}", trim_fraction(lead, frac))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_fraction(whole: &str, frac: &str) -> String {
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        whole.to_string()
    } else {
        format!("{whole}.{frac}")
    }
}

/// A rectangular table rendered as RFC 4180 style CSV with LF line endings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) {
        let row: Vec<String> = cells.into_iter().map(Into::into).collect();
        assert_eq!(
            row.len(),
            self.headers.len(),
            "row arity must match the header"
        );
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&render_line(&self.headers));
        for row in &self.rows {
            out.push_str(&render_line(row));
        }
        out
    }
}

fn render_line(cells: &[String]) -> String {
    let escaped: Vec<String> = cells.iter().map(|c| escape_csv(c)).collect();
    format!("{}\n", escaped.join(","))
}

fn escape_csv(cell: &str) -> String {
    if cell.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// A table rendered as a Markdown pipe table, for the report artifact.
pub fn markdown_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", headers.join(" | ")));
    let rule: Vec<&str> = headers.iter().map(|_| "---").collect();
    out.push_str(&format!("| {} |\n", rule.join(" | ")));
    for row in rows {
        assert_eq!(row.len(), headers.len(), "row arity must match the header");
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}

/// Writes a file through a temporary sibling plus rename, so an interrupted
/// or failed run never leaves a partial artifact at the destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".to_string());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    if let Err(error) = fs::write(&tmp, bytes) {
        let _ = fs::remove_file(&tmp);
        return Err(error.into());
    }
    if let Err(error) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(error.into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_covers_fixed_scientific_and_edge_roundings() {
        for (value, expected) in [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (27.0, "27"),
            (1234.5678, "1234.57"),
            (-1234.5678, "-1234.57"),
            (0.027, "0.027"),
            (0.000123456789, "0.000123457"),
            (123456.4, "123456"),
            (999999.4, "999999"),
            // rounds up across the fixed-point cutoff
            (999999.5, "1e6"),
            (1.23456789e8, "1.23457e8"),
            (1e-7, "1e-7"),
            (-9.87654321e-12, "-9.87654e-12"),
            (2.8785714285714286e-9, "2.87857e-9"),
            (-9.9999999, "-10"),
            (0.061_904_761_904_761_91, "0.0619048"),
        ] {
            assert_eq!(sig6(value), expected, "value {value}");
        }
        assert_eq!(sig6(f64::NAN), "NaN");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn sig6_reparses_to_six_digit_accuracy() {
        for &value in &[
            1.0_f64,
            -3.5,
            9.81,
            1.44316e-25,
            780.24e-9,
            363_696_460.187_989_1,
            0.061_904_761_904_761_91,
            -482.683_609_865_091_7,
        ] {
            let rendered = sig6(value);
            let back: f64 = rendered.parse().unwrap();
            let rel = ((back - value) / value).abs();
            assert!(rel < 5e-6, "{value} -> {rendered} -> {back}");
        }
    }

    #[test]
    fn csv_escapes_and_keeps_shape() {
        let mut table = CsvTable::new(["order", "note"]);
        table.push_row(["0", "plain"]);
        table.push_row(["1", "has,comma"]);
        table.push_row(["2", "say \"hi\""]);
        assert_eq!(
            table.render(),
            "order,note\n0,plain\n1,\"has,comma\"\n2,\"say \"\"hi\"\"\"\n"
        );
    }

    #[test]
    #[should_panic(expected = "arity")]
    fn csv_rejects_ragged_rows() {
        let mut table = CsvTable::new(["a", "b"]);
        table.push_row(["only one"]);
    }

    #[test]
    fn markdown_table_renders_rule_line() {
        let text = markdown_table(&["order", "weight"], &[vec!["0".into(), "0.366430".into()]]);
        assert_eq!(
            text,
            "| order | weight |\n| --- | --- |\n| 0 | 0.366430 |\n"
        );
    }

    #[test]
    fn write_atomic_replaces_and_creates_directories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"first\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"first\n");
        write_atomic(&path, b"second\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second\n");
        // no stray temporaries left behind
        let entries: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries.len(), 1);
    }
}
