//! Uniform periodic position grid for the split-operator integrator.

use crate::error::{Error, Result};

/// Periodic grid of `n` points on [z_min, z_max); z_max itself is the wrap
/// point and carries no sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    z_min: f64,
    dz: f64,
}

impl Grid {
    pub fn new(z_min: f64, z_max: f64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(Error::domain(format!(
                "grid size must be a power of two of at least 16, got {n}"
            )));
        }
        if !(z_min.is_finite() && z_max.is_finite() && z_max > z_min) {
            return Err(Error::domain(format!(
                "grid bounds must be finite with z_max > z_min, got [{z_min}, {z_max}]"
            )));
        }
        Ok(Grid {
            n,
            z_min,
            dz: (z_max - z_min) / n as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.dz
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    /// Total periodic length n * dz.
    pub fn length(&self) -> f64 {
        self.dz * self.n as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + self.dz * i as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.z(i)).collect()
    }

    /// Largest representable wavenumber pi / dz.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dz
    }

    /// Momentum-space sample spacing 2 pi / L.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length()
    }

    /// Wavenumbers in FFT bin order: 0, dk, .., nyquist, -nyquist + dk, .., -dk.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.n)
            .map(|j| {
                if j < self.n / 2 {
                    dk * j as f64
                } else {
                    dk * (j as f64 - self.n as f64)
                }
            })
            .collect()
    }
}
