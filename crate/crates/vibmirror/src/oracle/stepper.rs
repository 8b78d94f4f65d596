//! Symmetric split-operator integration of the 1D Schroedinger equation
//! (hbar = M = 1) under the driven exponential barrier
//! V(z, t) = u0 (1 + eps sin(omega t)) exp(-2 z).
//!
//! One step applies half a kinetic evolution in momentum space, the full
//! potential phase evaluated at the step midpoint, and the second kinetic
//! half; the local error is O(dt^3). The grid is periodic, so mass reaching
//! either edge silently wraps: audits abort instead of letting wraparound
//! corrupt the run.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Driven barrier parameters, decay constant fixed at 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialDrive {
    /// Barrier prefactor u0 >= 0; 0 gives free propagation.
    pub u0: f64,
    /// Drive depth eps, |eps| < 1.
    pub epsilon: f64,
    /// Angular drive frequency.
    pub omega: f64,
}

impl PotentialDrive {
    fn validate(&self) -> Result<()> {
        if !(self.u0.is_finite() && self.u0 >= 0.0) {
            return Err(Error::domain(format!(
                "barrier prefactor must be >= 0, got {}",
                self.u0
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon.abs() < 1.0) {
            return Err(Error::domain(format!(
                "drive depth must satisfy |eps| < 1, got {}",
                self.epsilon
            )));
        }
        if !self.omega.is_finite() || (self.epsilon != 0.0 && self.omega <= 0.0) {
            return Err(Error::domain(format!(
                "drive frequency must be positive when eps != 0, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Cosine-ramp absorbing strip at the top edge of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorberSettings {
    /// Fraction of the grid covered by the ramp, from the top edge down.
    pub width_fraction: f64,
    /// Peak damping rate; the mask is exp(-strength w dt), w in [0, 1].
    pub strength: f64,
}

/// Mass-location guards checked at every audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGuard {
    /// Abort if the relative mass below this height exceeds the threshold
    /// (the barrier should keep this region empty).
    pub bottom_limit: Option<f64>,
    /// Fraction of the grid counted as the top strip.
    pub top_fraction: f64,
    /// Relative mass allowed in either strip.
    pub threshold: f64,
}

impl Default for EdgeGuard {
    fn default() -> Self {
        EdgeGuard {
            bottom_limit: None,
            top_fraction: 0.02,
            threshold: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionSettings {
    pub dt: f64,
    pub steps: usize,
    /// Drive phase reference: the run covers [start_time, start_time + steps dt].
    pub start_time: f64,
    /// Steps between numeric audits; the final step is always audited.
    pub audit_interval: usize,
    pub absorber: Option<AbsorberSettings>,
    pub guard: EdgeGuard,
}

impl EvolutionSettings {
    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::domain(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.steps == 0 {
            return Err(Error::domain("evolution needs at least one step"));
        }
        if self.audit_interval == 0 {
            return Err(Error::domain("audit interval must be at least 1"));
        }
        if let Some(a) = &self.absorber {
            if !(a.width_fraction > 0.0 && a.width_fraction < 0.5) {
                return Err(Error::domain(format!(
                    "absorber width fraction must lie in (0, 0.5), got {}",
                    a.width_fraction
                )));
            }
            if !(a.strength.is_finite() && a.strength > 0.0) {
                return Err(Error::domain(format!(
                    "absorber strength must be positive, got {}",
                    a.strength
                )));
            }
        }
        if !(self.guard.top_fraction > 0.0 && self.guard.top_fraction < 0.5) {
            return Err(Error::domain(format!(
                "guard top fraction must lie in (0, 0.5), got {}",
                self.guard.top_fraction
            )));
        }
        Ok(())
    }
}

/// Bookkeeping from a completed evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionOutcome {
    pub final_norm: f64,
    /// Norm removed by the absorbing strip over the whole run.
    pub absorbed_norm: f64,
    /// Largest |norm - (initial - absorbed)| seen at any audit.
    pub max_norm_drift: f64,
}

struct KineticHalf {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// cis(-k^2 dt / 4) / n; the 1/n undoes the unnormalized transform pair.
    phase: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl KineticHalf {
    fn new(grid: &Grid, dt: f64) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let inv_n = 1.0 / n as f64;
        let phase = grid
            .wavenumbers()
            .iter()
            .map(|k| Complex::cis(-k * k * dt / 4.0) * inv_n)
            .collect();
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        KineticHalf {
            forward,
            inverse,
            phase,
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    fn apply(&mut self, psi: &mut [Complex<f64>]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        for (c, p) in psi.iter_mut().zip(&self.phase) {
            *c *= p;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }
}

fn discrete_norm(grid: &Grid, psi: &[Complex<f64>]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing()
}

/// Evolve `psi` in place. Fails on non-finite amplitudes, norm drift, or
/// mass piling up at either grid edge.
pub fn evolve(
    grid: &Grid,
    psi: &mut [Complex<f64>],
    drive: &PotentialDrive,
    settings: &EvolutionSettings,
) -> Result<EvolutionOutcome> {
    drive.validate()?;
    settings.validate()?;
    if psi.len() != grid.len() {
        return Err(Error::contract(format!(
            "state length {} does not match grid size {}",
            psi.len(),
            grid.len()
        )));
    }

    let n = grid.len();
    let mut kinetic = KineticHalf::new(grid, settings.dt);
    let shape: Vec<f64> = (0..n).map(|i| (-2.0 * grid.z(i)).exp()).collect();

    let absorber_mask: Option<Vec<f64>> = settings.absorber.map(|a| {
        let first = ((1.0 - a.width_fraction) * n as f64).floor() as usize;
        (0..n)
            .map(|i| {
                if i < first {
                    1.0
                } else {
                    let xi = (i - first) as f64 / (n - 1 - first).max(1) as f64;
                    let w = 0.5 * (1.0 - (std::f64::consts::PI * xi).cos());
                    (-a.strength * w * settings.dt).exp()
                }
            })
            .collect()
    });

    let top_start = ((1.0 - settings.guard.top_fraction) * n as f64).floor() as usize;
    let bottom_end = settings
        .guard
        .bottom_limit
        .map(|limit| (0..n).take_while(|&i| grid.z(i) < limit).count())
        .unwrap_or(0);

    let initial_norm = discrete_norm(grid, psi);
    let mut absorbed = 0.0_f64;
    let mut max_drift = 0.0_f64;

    let audit =
        |psi: &[Complex<f64>], step: usize, absorbed: f64, max_drift: &mut f64| -> Result<()> {
            if psi.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::domain(format!(
                    "non-finite amplitude at step {step}; the integration diverged"
                )));
            }
            let norm = discrete_norm(grid, psi);
            let drift = (norm - (initial_norm - absorbed)).abs();
            *max_drift = max_drift.max(drift);
            if drift > 1e-6 * initial_norm {
                return Err(Error::domain(format!(
                    "norm drifted by {drift:.3e} at step {step}; unitarity lost"
                )));
            }
            let strip = |range: std::ops::Range<usize>| -> f64 {
                psi[range].iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing() / norm
            };
            let top_mass = strip(top_start..n);
            if top_mass > settings.guard.threshold {
                return Err(Error::domain(format!(
                    "relative mass {top_mass:.3e} reached the top edge at step {step}; \
                 the domain is too short for this evolution time"
                )));
            }
            if bottom_end > 0 {
                let bottom_mass = strip(0..bottom_end);
                if bottom_mass > settings.guard.threshold {
                    return Err(Error::domain(format!(
                        "relative mass {bottom_mass:.3e} leaked below the barrier at step {step}"
                    )));
                }
            }
            Ok(())
        };

    for step in 0..settings.steps {
        kinetic.apply(psi);
        if drive.u0 > 0.0 {
            let t_mid = settings.start_time + (step as f64 + 0.5) * settings.dt;
            let strength =
                drive.u0 * (1.0 + drive.epsilon * (drive.omega * t_mid).sin()) * settings.dt;
            for (c, s) in psi.iter_mut().zip(&shape) {
                *c *= Complex::cis(-s * strength);
            }
        }
        kinetic.apply(psi);

        if let Some(mask) = &absorber_mask {
            let before = discrete_norm(grid, psi);
            for (c, m) in psi.iter_mut().zip(mask) {
                *c *= m;
            }
            absorbed += before - discrete_norm(grid, psi);
        }

        if (step + 1) % settings.audit_interval == 0 || step + 1 == settings.steps {
            audit(psi, step + 1, absorbed, &mut max_drift)?;
        }
    }

    if absorbed > 1e-3 * initial_norm {
        return Err(Error::domain(format!(
            "absorber removed {absorbed:.3e} of the norm; results would be biased"
        )));
    }

    Ok(EvolutionOutcome {
        final_norm: discrete_norm(grid, psi),
        absorbed_norm: absorbed,
        max_norm_drift: max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::packet::{incident_packet, norm, position_std};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn free_drive() -> PotentialDrive {
        PotentialDrive {
            u0: 0.0,
            epsilon: 0.0,
            omega: 0.0,
        }
    }

    fn settings(dt: f64, steps: usize) -> EvolutionSettings {
        EvolutionSettings {
            dt,
            steps,
            start_time: 0.0,
            audit_interval: 64,
            absorber: None,
            guard: EdgeGuard::default(),
        }
    }

    #[test]
    fn free_packet_spreads_like_the_analytic_gaussian() {
        let g = Grid::new(-40.0, 40.0, 1024).unwrap();
        let sigma0 = 1.2;
        let mut psi = incident_packet(&g, 0.0, sigma0, 0.0).unwrap();
        let t = 6.0;
        let steps = 600;
        evolve(
            &g,
            &mut psi,
            &free_drive(),
            &settings(t / steps as f64, steps),
        )
        .unwrap();
        // sigma(t)^2 = sigma0^2 + (t / (2 sigma0))^2
        let expected = (sigma0 * sigma0 + (t / (2.0 * sigma0)).powi(2)).sqrt();
        assert_relative_eq!(position_std(&g, &psi), expected, max_relative = 5e-3);
        assert_relative_eq!(norm(&g, &psi), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn static_barrier_reflects_without_loss() {
        let g = Grid::new(-1.0, 60.0, 1024).unwrap();
        let k = 8.0;
        let drive = PotentialDrive {
            u0: 4.0 * k * k / 2.0,
            epsilon: 0.0,
            omega: 0.0,
        };
        let mut psi = incident_packet(&g, 16.0, 2.0, -k).unwrap();
        let mut s = settings(2e-4, 25_000);
        s.guard.bottom_limit = Some((4.0_f64).ln() / 2.0 - 1.0);
        let out = evolve(&g, &mut psi, &drive, &s).unwrap();
        assert_relative_eq!(out.final_norm, 1.0, max_relative = 1e-9);
        // packet went up: mean momentum is now +k
        use rustfft::FftPlanner;
        let mut tilde = psi.clone();
        FftPlanner::new().plan_fft_forward(1024).process(&mut tilde);
        let ks = g.wavenumbers();
        let mut weighted = 0.0;
        let mut total = 0.0;
        for (i, c) in tilde.iter().enumerate() {
            weighted += ks[i] * c.norm_sqr();
            total += c.norm_sqr();
        }
        assert_abs_diff_eq!(weighted / total, k, epsilon = 0.05);
    }

    #[test]
    fn conjugation_reverses_a_static_evolution() {
        let g = Grid::new(-1.0, 40.0, 512).unwrap();
        let k = 6.0;
        let drive = PotentialDrive {
            u0: 2.0 * k * k,
            epsilon: 0.0,
            omega: 0.0,
        };
        let psi0 = incident_packet(&g, 10.0, 1.5, -k).unwrap();
        let mut psi = psi0.clone();
        let s = settings(3e-4, 4_000);
        evolve(&g, &mut psi, &drive, &s).unwrap();
        for c in &mut psi {
            *c = c.conj();
        }
        evolve(&g, &mut psi, &drive, &s).unwrap();
        for c in &mut psi {
            *c = c.conj();
        }
        let overlap: num_complex::Complex<f64> = psi0
            .iter()
            .zip(&psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<num_complex::Complex<f64>>()
            * g.spacing();
        assert!(overlap.norm() >= 1.0 - 1e-10, "fidelity {}", overlap.norm());
    }

    #[test]
    fn top_edge_guard_aborts_runaway_packets() {
        let g = Grid::new(-10.0, 10.0, 256).unwrap();
        let mut psi = incident_packet(&g, 0.0, 1.0, 5.0).unwrap();
        // moving up at speed 5, hits the top edge near t = 2
        let err = evolve(&g, &mut psi, &free_drive(), &settings(1e-3, 4_000)).unwrap_err();
        assert!(err.to_string().contains("top edge"), "{err}");
    }

    #[test]
    fn bottom_guard_aborts_when_the_barrier_is_too_weak() {
        let g = Grid::new(-10.0, 30.0, 512).unwrap();
        let k = 6.0;
        // barrier peak far below the kinetic energy: the packet rolls through
        let drive = PotentialDrive {
            u0: 0.05 * k * k / 2.0,
            epsilon: 0.0,
            omega: 0.0,
        };
        let mut psi = incident_packet(&g, 12.0, 1.5, -k).unwrap();
        let mut s = settings(4e-4, 8_000);
        s.guard.bottom_limit = Some(-2.0);
        let err = evolve(&g, &mut psi, &drive, &s).unwrap_err();
        assert!(err.to_string().contains("below the barrier"), "{err}");
    }

    #[test]
    fn absorber_removes_mass_and_reports_it() {
        let g = Grid::new(-20.0, 20.0, 512).unwrap();
        let mut psi = incident_packet(&g, -5.0, 1.0, 3.0).unwrap();
        let mut s = settings(1e-3, 6_000);
        // strong enough to eat the packet well before the top edge, so the
        // budget check is what fires, not the edge guard
        s.absorber = Some(AbsorberSettings {
            width_fraction: 0.25,
            strength: 40.0,
        });
        let err = evolve(&g, &mut psi, &free_drive(), &s).unwrap_err();
        assert!(err.to_string().contains("absorber removed"), "{err}");
    }

    #[test]
    fn distant_absorber_stays_within_budget() {
        let g = Grid::new(-30.0, 30.0, 512).unwrap();
        let mut psi = incident_packet(&g, 0.0, 1.5, 0.0).unwrap();
        let mut s = settings(1e-3, 500);
        s.absorber = Some(AbsorberSettings {
            width_fraction: 0.1,
            strength: 0.2,
        });
        let out = evolve(&g, &mut psi, &free_drive(), &s).unwrap();
        assert!(out.absorbed_norm.abs() < 1e-6);
        assert!(out.final_norm > 1.0 - 1e-6);
    }

    #[test]
    fn rejects_invalid_settings() {
        let g = Grid::new(-10.0, 10.0, 256).unwrap();
        let mut psi = incident_packet(&g, 0.0, 1.0, 0.0).unwrap();
        assert!(evolve(&g, &mut psi, &free_drive(), &settings(0.0, 10)).is_err());
        assert!(evolve(&g, &mut psi, &free_drive(), &settings(1e-3, 0)).is_err());
        let bad_drive = PotentialDrive {
            u0: 1.0,
            epsilon: 1.5,
            omega: 1.0,
        };
        assert!(evolve(&g, &mut psi, &bad_drive, &settings(1e-3, 10)).is_err());
        let mut short = psi.clone();
        short.pop();
        assert!(evolve(&g, &mut short, &free_drive(), &settings(1e-3, 10)).is_err());
    }
}
