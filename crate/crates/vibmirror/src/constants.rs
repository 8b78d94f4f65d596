//! Physical constants for a Rb-87 atom falling onto an evanescent-wave
//! mirror. All values are SI. Interfaces that accept frequencies take
//! linear frequencies in Hz and convert to angular internally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s (CODATA 2018 exact).
pub const HBAR: f64 = 1.054571817e-34;
/// Rb-87 atomic mass, kg.
pub const RB87_MASS: f64 = 1.44316e-25;
/// Local gravitational acceleration, m s^-2. Single source of truth for a run.
pub const STANDARD_GRAVITY: f64 = 9.81;
/// D2 line wavelength of Rb-87, m.
pub const D2_WAVELENGTH: f64 = 780.24e-9;

/// Run-wide constants table. Defaults are the compiled-in values above;
/// a config file may override mass and wavelength for other species.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    /// Atomic mass, kg.
    pub atom_mass: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Gravitational acceleration, m s^-2.
    pub g: f64,
    /// Imaging/mirror transition wavelength, m.
    pub d2_wavelength: f64,
}

impl Default for ConstantsTable {
    fn default() -> Self {
        ConstantsTable {
            atom_mass: RB87_MASS,
            hbar: HBAR,
            g: STANDARD_GRAVITY,
            d2_wavelength: D2_WAVELENGTH,
        }
    }
}

impl ConstantsTable {
    /// Every entry must be finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        let entries = [
            ("atom_mass", self.atom_mass),
            ("hbar", self.hbar),
            ("g", self.g),
            ("d2_wavelength", self.d2_wavelength),
        ];
        for (name, v) in entries {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!(
                    "constant {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Photon recoil velocity hbar k_L / M for the stored wavelength.
    pub fn recoil_velocity(&self) -> f64 {
        let k_l = 2.0 * std::f64::consts::PI / self.d2_wavelength;
        self.hbar * k_l / self.atom_mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_are_positive_and_validate() {
        let c = ConstantsTable::default();
        c.validate().unwrap();
    }

    #[test]
    fn default_mass_is_rb87() {
        let c = ConstantsTable::default();
        assert!((c.atom_mass - 1.4432e-25).abs() / 1.4432e-25 < 1e-3);
    }

    #[test]
    fn recoil_velocity_matches_reference() {
        // reference computed independently at 50-digit precision:
        // hbar * (2 pi / 780.24 nm) / M = 5.8845510513016242e-3 m/s
        let c = ConstantsTable::default();
        assert_relative_eq!(
            c.recoil_velocity(),
            5.884_551_051_301_624e-3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn recoil_velocity_scales_inversely_with_mass() {
        let c = ConstantsTable::default();
        let heavy = ConstantsTable {
            atom_mass: 2.0 * c.atom_mass,
            ..c.clone()
        };
        assert_relative_eq!(
            heavy.recoil_velocity(),
            c.recoil_velocity() / 2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn rejects_nonpositive_entries() {
        let c = ConstantsTable {
            g: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ConstantsTable {
            hbar: f64::NAN,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
