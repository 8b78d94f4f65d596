//! Sideband weights for reflection off the vibrating mirror.
//!
//! A packet with wavenumber k reflecting off the exponential potential with
//! vibration amplitude z_M picks up a phase modulation of index
//! A = 2 k z_M beta(Q), where the softness factor beta(Q) < 1 accounts for
//! the finite interaction time on a potential of decay constant kappa and
//! Q compares the drive period to the traversal time. The weight of the
//! n-th sideband is P(n) = J_n(A)^2.

pub mod bessel;

use serde::{Deserialize, Serialize};

pub use bessel::{bessel_j, bessel_j_array};

use crate::constants::ConstantsTable;
use crate::error::{Error, Result};
use crate::kinematics::impact_state;
use crate::params::ExperimentParams;

/// First positive zero of J_0; the carrier vanishes when the modulation
/// index reaches it.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

const BETA_SERIES_THRESHOLD: f64 = 1e-4;

/// Softness factor beta(x) = (pi x / 2) / sinh(pi x / 2).
///
/// Even in x, equal to 1 at x = 0, decaying exponentially for large x.
pub fn beta(x: f64) -> f64 {
    let u = std::f64::consts::FRAC_PI_2 * x.abs();
    if x.abs() < BETA_SERIES_THRESHOLD {
        // u/sinh(u) = 1 - u^2/6 + 7u^4/360 - ...
        let u2 = u * u;
        1.0 - u2 / 6.0 + 7.0 * u2 * u2 / 360.0
    } else if u > 30.0 {
        // 2u e^-u / (1 - e^-2u); the correction is below 1e-26 here
        2.0 * u * (-u).exp()
    } else {
        u / u.sinh()
    }
}

/// Drive-speed ratio Q = Omega M / (hbar k kappa): drive angular frequency
/// over (incident velocity times decay constant).
pub fn q_parameter(omega: f64, wavenumber: f64, kappa: f64, atom_mass: f64, hbar: f64) -> f64 {
    omega * atom_mass / (hbar * wavenumber * kappa)
}

/// Inputs of the sideband-weight model, in any consistent unit system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionInput {
    /// Incident wavenumber k at the mirror.
    pub wavenumber: f64,
    /// Vibration amplitude z_M of the mirror surface.
    pub mirror_amplitude: f64,
    /// Decay constant kappa of the potential.
    pub kappa: f64,
    /// Angular drive frequency Omega.
    pub omega: f64,
    pub atom_mass: f64,
    pub hbar: f64,
}

impl DiffractionInput {
    /// Inputs for a physical run: the wavenumber comes from free fall over
    /// the drop height, everything else from the mirror model.
    pub fn from_experiment(params: &ExperimentParams, constants: &ConstantsTable) -> Result<Self> {
        let impact = impact_state(params.drop_height, constants)?;
        let input = DiffractionInput {
            wavenumber: impact.wavenumber,
            mirror_amplitude: params.mirror.vib_amplitude,
            kappa: params.mirror.kappa,
            omega: params.mirror.omega,
            atom_mass: constants.atom_mass,
            hbar: constants.hbar,
        };
        input.validate()?;
        Ok(input)
    }

    /// Dimensionless inputs (hbar = M = kappa = 1) from the three dials
    /// k/kappa, Q and the drive depth eps; z_M = eps / 2.
    pub fn dimensionless(k_over_kappa: f64, q: f64, epsilon: f64) -> Result<Self> {
        let input = DiffractionInput {
            wavenumber: k_over_kappa,
            mirror_amplitude: epsilon / 2.0,
            kappa: 1.0,
            omega: q * k_over_kappa,
            atom_mass: 1.0,
            hbar: 1.0,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavenumber", self.wavenumber),
            ("decay constant", self.kappa),
            ("drive frequency", self.omega),
            ("atom mass", self.atom_mass),
            ("hbar", self.hbar),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mirror_amplitude.is_finite() && self.mirror_amplitude >= 0.0) {
            return Err(Error::domain(format!(
                "mirror amplitude must be nonnegative, got {}",
                self.mirror_amplitude
            )));
        }
        Ok(())
    }

    /// Drive-speed ratio Q for these inputs.
    pub fn q(&self) -> f64 {
        q_parameter(
            self.omega,
            self.wavenumber,
            self.kappa,
            self.atom_mass,
            self.hbar,
        )
    }

    /// Modulation index A = 2 k z_M beta(Q).
    pub fn modulation_index(&self) -> f64 {
        2.0 * self.wavenumber * self.mirror_amplitude * beta(self.q())
    }
}

/// Sideband weights P(n) together with the model intermediates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandSpectrum {
    /// (order, weight) for orders -n_max ..= n_max.
    pub orders: Vec<(i32, f64)>,
    /// Phase modulation index A.
    pub modulation_index: f64,
    /// Softness factor beta(Q).
    pub beta: f64,
    /// Drive-speed ratio Q.
    pub q: f64,
}

impl SidebandSpectrum {
    /// Weight of one order, if inside the computed span.
    pub fn weight(&self, order: i32) -> Option<f64> {
        self.orders
            .iter()
            .find(|(n, _)| *n == order)
            .map(|(_, w)| *w)
    }

    /// Sum of all computed weights; 1 up to the truncated tail.
    pub fn total(&self) -> f64 {
        self.orders.iter().map(|(_, w)| w).sum()
    }

    /// Largest computed order.
    pub fn max_order(&self) -> i32 {
        self.orders.last().map_or(0, |(n, _)| *n)
    }

    /// Builds a spectrum from bare (order, weight) pairs, renormalizing to
    /// unit total. The modulation metadata is zeroed; weights measured from
    /// an image or supplied by hand have no single modulation index.
    pub fn from_weights(mut orders: Vec<(i32, f64)>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::contract("a spectrum needs at least one order"));
        }
        orders.sort_by_key(|&(n, _)| n);
        for pair in orders.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::contract(format!("order {} listed twice", pair[0].0)));
            }
        }
        let mut total = 0.0;
        for &(order, weight) in &orders {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::domain(format!(
                    "weight of order {order} must be finite and non-negative, got {weight}"
                )));
            }
            total += weight;
        }
        if total <= 0.0 {
            return Err(Error::domain("weights sum to zero"));
        }
        for (_, weight) in &mut orders {
            *weight /= total;
        }
        Ok(SidebandSpectrum {
            orders,
            modulation_index: 0.0,
            beta: 0.0,
            q: 0.0,
        })
    }
}

// order span covering the spectrum to well below 1e-6 tail weight
fn default_span(modulation_index: f64) -> usize {
    modulation_index.ceil() as usize + 15
}

fn minimum_span(modulation_index: f64) -> usize {
    modulation_index.ceil() as usize + 10
}

fn spectrum_from_index(
    modulation_index: f64,
    beta: f64,
    q: f64,
    n_max: Option<usize>,
) -> Result<SidebandSpectrum> {
    let span = n_max.unwrap_or_else(|| default_span(modulation_index));
    let floor = minimum_span(modulation_index);
    if span < floor {
        return Err(Error::contract(format!(
            "order span {span} too small for modulation index {modulation_index:.3}; \
             need at least {floor}"
        )));
    }
    let j = bessel_j_array(span, modulation_index)?;
    let mut orders = Vec::with_capacity(2 * span + 1);
    for n in -(span as i32)..=span as i32 {
        let jn = j[n.unsigned_abs() as usize];
        orders.push((n, jn * jn));
    }
    Ok(SidebandSpectrum {
        orders,
        modulation_index,
        beta,
        q,
    })
}

/// Sideband weights P(n) = J_n(A)^2 with A = 2 k z_M beta(Q).
///
/// `n_max` overrides the computed order span (default ceil(A) + 15, at
/// least ceil(A) + 10, enough for the neglected tail to fall below 1e-6).
pub fn sideband_weights(
    input: &DiffractionInput,
    n_max: Option<usize>,
) -> Result<SidebandSpectrum> {
    input.validate()?;
    let q = input.q();
    let b = beta(q);
    spectrum_from_index(input.modulation_index(), b, q, n_max)
}

/// Weights in the instantaneous-mirror limit: A = 2 k z_M, no softness
/// reduction. The model converges to this as Q tends to 0.
pub fn hard_mirror_weights(
    wavenumber: f64,
    mirror_amplitude: f64,
    n_max: Option<usize>,
) -> Result<SidebandSpectrum> {
    if !(wavenumber.is_finite() && wavenumber > 0.0) {
        return Err(Error::domain(format!(
            "wavenumber must be positive, got {wavenumber}"
        )));
    }
    if !(mirror_amplitude.is_finite() && mirror_amplitude >= 0.0) {
        return Err(Error::domain(format!(
            "mirror amplitude must be nonnegative, got {mirror_amplitude}"
        )));
    }
    spectrum_from_index(2.0 * wavenumber * mirror_amplitude, 1.0, 0.0, n_max)
}

/// One row of a drive-depth sweep: weights of orders 0..=6 at depth `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub depth: f64,
    pub modulation_index: f64,
    pub weights: [f64; 7],
}

/// Sweep the drive depth from 0 to `depth_max` in `steps` equal intervals
/// (steps + 1 rows), holding k, kappa and Omega fixed; z_M = eps / (2 kappa).
pub fn weight_sweep(
    input: &DiffractionInput,
    depth_max: f64,
    steps: usize,
) -> Result<Vec<SweepRow>> {
    input.validate()?;
    if !(depth_max.is_finite() && depth_max > 0.0) {
        return Err(Error::domain(format!(
            "sweep depth must be positive, got {depth_max}"
        )));
    }
    if steps == 0 {
        return Err(Error::domain("sweep needs at least one step"));
    }
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let depth = depth_max * i as f64 / steps as f64;
        let at = DiffractionInput {
            mirror_amplitude: depth / (2.0 * input.kappa),
            ..*input
        };
        let spectrum = sideband_weights(&at, None)?;
        let mut weights = [0.0_f64; 7];
        for (n, w) in weights.iter_mut().enumerate() {
            *w = spectrum.weight(n as i32).unwrap_or(0.0);
        }
        rows.push(SweepRow {
            depth,
            modulation_index: spectrum.modulation_index,
            weights,
        });
    }
    Ok(rows)
}

/// Drive depth at which the carrier weight vanishes: the modulation index
/// A = (k/kappa) beta(Q) eps reaches the first zero of J_0, so
/// eps* = j_01 kappa / (k beta(Q)).
pub fn carrier_null_depth(input: &DiffractionInput) -> Result<f64> {
    input.validate()?;
    let slope = input.wavenumber * beta(input.q()) / input.kappa;
    if slope <= 0.0 || !slope.is_finite() {
        return Err(Error::domain(format!(
            "carrier null undefined: index-per-depth slope is {slope}"
        )));
    }
    Ok(J0_FIRST_ZERO / slope)
}
