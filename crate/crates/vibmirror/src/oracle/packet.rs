//! Initial Gaussian wave packet.

use num_complex::Complex;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Gaussian packet exp(-(z - center)^2 / (4 sigma_z^2) + i momentum z),
/// normalized so sum |psi|^2 dz = 1. The density std is sigma_z and the
/// momentum std is 1 / (2 sigma_z).
pub fn incident_packet(
    grid: &Grid,
    center: f64,
    sigma_z: f64,
    momentum: f64,
) -> Result<Vec<Complex<f64>>> {
    if !(sigma_z.is_finite() && sigma_z > 0.0) {
        return Err(Error::domain(format!(
            "packet width must be positive, got {sigma_z}"
        )));
    }
    if !(center.is_finite() && momentum.is_finite()) {
        return Err(Error::domain("packet center and momentum must be finite"));
    }
    let quarter_var = 4.0 * sigma_z * sigma_z;
    let mut psi: Vec<Complex<f64>> = (0..grid.len())
        .map(|i| {
            let z = grid.z(i);
            let envelope = (-(z - center) * (z - center) / quarter_var).exp();
            Complex::from_polar(envelope, momentum * z)
        })
        .collect();
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::domain(
            "packet does not overlap the grid; check center and width",
        ));
    }
    let scale = 1.0 / norm.sqrt();
    for c in &mut psi {
        *c *= scale;
    }
    Ok(psi)
}

/// Discrete norm sum |psi|^2 dz.
pub fn norm(grid: &Grid, psi: &[Complex<f64>]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing()
}

/// Position expectation sum z |psi|^2 dz / norm.
pub fn mean_position(grid: &Grid, psi: &[Complex<f64>]) -> f64 {
    let mut weighted = 0.0;
    let mut total = 0.0;
    for (i, c) in psi.iter().enumerate() {
        let w = c.norm_sqr();
        weighted += grid.z(i) * w;
        total += w;
    }
    weighted / total
}

/// Position spread sqrt(<z^2> - <z>^2).
pub fn position_std(grid: &Grid, psi: &[Complex<f64>]) -> f64 {
    let mean = mean_position(grid, psi);
    let mut weighted = 0.0;
    let mut total = 0.0;
    for (i, c) in psi.iter().enumerate() {
        let w = c.norm_sqr();
        let d = grid.z(i) - mean;
        weighted += d * d * w;
        total += w;
    }
    (weighted / total).sqrt()
}
