//! Mirror and drive parameters. The evanescent-wave potential is
//! U(z, t) = U0 [1 + eps sin(Omega t)] exp(-2 kappa z); the drive depth
//! eps combines a laser power swing and a detuning swing, and sets the
//! equivalent mechanical vibration amplitude z_M = eps / (2 kappa).

use serde::{Deserialize, Serialize};

use crate::constants::ConstantsTable;
use crate::error::{Error, Result};

/// Sinusoidal drive of the mirror potential via laser power and detuning.
///
/// Detunings are signed linear frequencies in Hz (positive = blue side);
/// `mod_frequency` is the drive frequency in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationSettings {
    /// Mean evanescent-wave power P0, W.
    pub base_power: f64,
    /// Power swing amplitude dP, W.
    pub power_swing: f64,
    /// Mean detuning delta0 from the D2 line, Hz (signed).
    pub base_detuning: f64,
    /// Detuning swing amplitude d_delta, Hz.
    pub detuning_swing: f64,
    /// Drive frequency Omega / 2 pi, Hz.
    pub mod_frequency: f64,
}

impl ModulationSettings {
    pub fn new(
        base_power: f64,
        power_swing: f64,
        base_detuning: f64,
        detuning_swing: f64,
        mod_frequency: f64,
    ) -> Result<Self> {
        if !(base_power.is_finite() && base_power > 0.0) {
            return Err(Error::domain(format!(
                "base power must be positive, got {base_power}"
            )));
        }
        if !(base_detuning.is_finite() && base_detuning != 0.0) {
            return Err(Error::domain("base detuning must be nonzero"));
        }
        if !(mod_frequency.is_finite() && mod_frequency > 0.0) {
            return Err(Error::domain(format!(
                "modulation frequency must be positive, got {mod_frequency}"
            )));
        }
        if !power_swing.is_finite() || !detuning_swing.is_finite() {
            return Err(Error::domain("modulation swings must be finite"));
        }
        let s = ModulationSettings {
            base_power,
            power_swing,
            base_detuning,
            detuning_swing,
            mod_frequency,
        };
        if s.depth() >= 1.0 {
            return Err(Error::domain(format!(
                "combined modulation depth {:.4} must stay below 1",
                s.depth()
            )));
        }
        Ok(s)
    }

    /// Power contribution eps_P = dP / P0.
    pub fn eps_power(&self) -> f64 {
        self.power_swing / self.base_power
    }

    /// Detuning contribution eps_delta = -d_delta / delta0.
    pub fn eps_detuning(&self) -> f64 {
        -self.detuning_swing / self.base_detuning
    }

    /// Combined depth |eps_P + eps_delta| of the potential modulation.
    pub fn depth(&self) -> f64 {
        (self.eps_power() + self.eps_detuning()).abs()
    }

    /// Angular drive frequency Omega, rad/s.
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.mod_frequency
    }
}

/// Combined depth |eps_P + eps_delta| for a drive setting.
pub fn modulation_depth(settings: &ModulationSettings) -> f64 {
    settings.depth()
}

/// Equivalent mechanical amplitude z_M = depth / (2 kappa) of the vibrating
/// mirror surface, m.
pub fn mirror_amplitude(depth: f64, kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::domain(format!(
            "decay constant kappa must be positive, got {kappa}"
        )));
    }
    if !(0.0..1.0).contains(&depth) {
        return Err(Error::domain(format!(
            "modulation depth must lie in [0, 1), got {depth}"
        )));
    }
    Ok(depth / (2.0 * kappa))
}

/// Static shape and drive state of the exponential mirror potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorModel {
    /// Inverse decay length kappa of the evanescent field, m^-1.
    pub kappa: f64,
    /// Barrier prefactor U0, J.
    pub barrier_height: f64,
    /// Angular drive frequency Omega, rad/s.
    pub omega: f64,
    /// Combined modulation depth eps.
    pub mod_depth: f64,
    /// Equivalent vibration amplitude z_M = eps / (2 kappa), m.
    pub vib_amplitude: f64,
}

impl MirrorModel {
    pub fn new(kappa: f64, barrier_height: f64, modulation: &ModulationSettings) -> Result<Self> {
        if !(barrier_height.is_finite() && barrier_height > 0.0) {
            return Err(Error::domain(format!(
                "barrier height must be positive, got {barrier_height}"
            )));
        }
        let mod_depth = modulation.depth();
        let vib_amplitude = mirror_amplitude(mod_depth, kappa)?;
        Ok(MirrorModel {
            kappa,
            barrier_height,
            omega: modulation.omega(),
            mod_depth,
            vib_amplitude,
        })
    }
}

/// Full description of one drop-and-bounce run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// Release height above the mirror surface, m.
    pub drop_height: f64,
    /// Free-fall time from release to the mirror, s.
    pub fall_time: f64,
    /// Flight time from the bounce to detection, s.
    pub bounce_time: f64,
    /// Horizontal drift velocity along x, m/s.
    pub horizontal_velocity: f64,
    pub modulation: ModulationSettings,
    pub mirror: MirrorModel,
}

impl ExperimentParams {
    pub fn new(
        drop_height: f64,
        fall_time: f64,
        bounce_time: f64,
        horizontal_velocity: f64,
        modulation: ModulationSettings,
        mirror: MirrorModel,
    ) -> Result<Self> {
        for (name, v) in [
            ("drop height", drop_height),
            ("fall time", fall_time),
            ("bounce time", bounce_time),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !horizontal_velocity.is_finite() {
            return Err(Error::domain("horizontal velocity must be finite"));
        }
        Ok(ExperimentParams {
            drop_height,
            fall_time,
            bounce_time,
            horizontal_velocity,
            modulation,
            mirror,
        })
    }

    /// Non-fatal consistency warnings: the stated fall time should match
    /// free fall from the drop height within 2 percent.
    pub fn consistency_warnings(&self, constants: &ConstantsTable) -> Vec<String> {
        let mut warnings = Vec::new();
        let t_free = (2.0 * self.drop_height / constants.g).sqrt();
        let rel = (self.fall_time - t_free).abs() / t_free;
        if rel > 0.02 {
            warnings.push(format!(
                "fall time {:.4} ms deviates {:.1}% from free fall over {:.3} mm ({:.4} ms)",
                self.fall_time * 1e3,
                rel * 100.0,
                self.drop_height * 1e3,
                t_free * 1e3
            ));
        }
        warnings
    }
}
