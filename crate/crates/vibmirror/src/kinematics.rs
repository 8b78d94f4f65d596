//! Classical drop-bounce-detect kinematics and the sideband ladder.
//!
//! An atom released from height z0 hits the mirror at speed v = sqrt(2 g z0).
//! The vibrating mirror transfers energy in quanta of hbar * Omega, so the
//! n-th sideband leaves with v_n = sqrt(v^2 + 2 n hbar Omega / M) and arrives
//! at detection displaced by (v_n - v) * t relative to the unshifted bounce.

use serde::{Deserialize, Serialize};

use crate::constants::ConstantsTable;
use crate::error::{Error, Result};
use crate::params::ExperimentParams;

/// State of the falling packet at the moment it reaches the mirror.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactState {
    /// Vertical speed at the mirror, m/s.
    pub speed: f64,
    /// Matter-wave wavenumber k = M v / hbar, m^-1.
    pub wavenumber: f64,
    /// de Broglie wavelength 2 pi / k, m.
    pub de_broglie_wavelength: f64,
    /// Vertical kinetic energy M v^2 / 2, J.
    pub kinetic_energy: f64,
}

/// Impact state after free fall from `drop_height`.
pub fn impact_state(drop_height: f64, constants: &ConstantsTable) -> Result<ImpactState> {
    if !(drop_height.is_finite() && drop_height > 0.0) {
        return Err(Error::domain(format!(
            "drop height must be positive, got {drop_height}"
        )));
    }
    let speed = (2.0 * constants.g * drop_height).sqrt();
    let wavenumber = constants.atom_mass * speed / constants.hbar;
    Ok(ImpactState {
        speed,
        wavenumber,
        de_broglie_wavelength: 2.0 * std::f64::consts::PI / wavenumber,
        kinetic_energy: 0.5 * constants.atom_mass * speed * speed,
    })
}

/// Exact post-bounce speed of sideband `order`: sqrt(v^2 + 2 n hbar Omega / M).
///
/// Errors if the energy loss for a negative order exceeds the incident
/// kinetic energy (closed channel).
pub fn sideband_velocity(
    speed: f64,
    order: i32,
    omega: f64,
    constants: &ConstantsTable,
) -> Result<f64> {
    let radicand =
        speed * speed + 2.0 * f64::from(order) * constants.hbar * omega / constants.atom_mass;
    if radicand <= 0.0 {
        return Err(Error::domain(format!(
            "sideband {order} is closed: energy shift exceeds incident kinetic energy"
        )));
    }
    Ok(radicand.sqrt())
}

/// First-order expansion k_n = k + n Omega M / (hbar k), valid while the
/// energy shift stays small against the incident energy.
///
/// Errors once |n| hbar Omega exceeds half the incident kinetic energy,
/// where the linear form is no longer a controlled approximation.
pub fn sideband_wavenumber_linearized(
    wavenumber: f64,
    order: i32,
    omega: f64,
    constants: &ConstantsTable,
) -> Result<f64> {
    let kinetic =
        constants.hbar * constants.hbar * wavenumber * wavenumber / (2.0 * constants.atom_mass);
    let shift = f64::from(order).abs() * constants.hbar * omega;
    if shift >= 0.5 * kinetic {
        return Err(Error::contract(format!(
            "linearized wavenumber needs |n| hbar Omega < E/2; order {order} shifts {:.3e} J \
             against E = {kinetic:.3e} J",
            shift
        )));
    }
    Ok(wavenumber + f64::from(order) * omega * constants.atom_mass / (constants.hbar * wavenumber))
}

/// Kinematic summary of one sideband order at detection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandKinematics {
    pub order: i32,
    /// Energy transfer n hbar Omega, J.
    pub energy_shift: f64,
    /// Post-bounce speed v_n, m/s.
    pub velocity: f64,
    /// Exact wavenumber M v_n / hbar, m^-1.
    pub wavenumber: f64,
    /// Vertical offset (v_n - v) * t_bounce from the unshifted order at
    /// detection, m.
    pub rel_position: f64,
}

/// Kinematics of the orders `-n_orders ..= +n_orders` at the detection time,
/// skipping closed channels.
pub fn detection_positions(
    params: &ExperimentParams,
    constants: &ConstantsTable,
    n_orders: u32,
) -> Result<Vec<SidebandKinematics>> {
    let impact = impact_state(params.drop_height, constants)?;
    let omega = params.mirror.omega;
    let n = i32::try_from(n_orders)
        .map_err(|_| Error::domain(format!("order span {n_orders} out of range")))?;
    let mut rows = Vec::with_capacity(2 * n_orders as usize + 1);
    for order in -n..=n {
        let velocity = match sideband_velocity(impact.speed, order, omega, constants) {
            Ok(v) => v,
            Err(_) => continue,
        };
        rows.push(SidebandKinematics {
            order,
            energy_shift: f64::from(order) * constants.hbar * omega,
            velocity,
            wavenumber: constants.atom_mass * velocity / constants.hbar,
            rel_position: (velocity - impact.speed) * params.bounce_time,
        });
    }
    Ok(rows)
}
