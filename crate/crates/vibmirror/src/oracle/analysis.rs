//! Momentum-space analysis of the final state: spectrum and per-order
//! populations.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Momentum distribution with ascending wavenumbers; weights sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumSpectrum {
    pub wavenumbers: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MomentumSpectrum {
    pub fn dk(&self) -> f64 {
        self.wavenumbers[1] - self.wavenumbers[0]
    }
}

/// |FFT psi|^2, reordered to ascending wavenumbers and normalized.
pub fn momentum_spectrum(grid: &Grid, psi: &[Complex<f64>]) -> Result<MomentumSpectrum> {
    if psi.len() != grid.len() {
        return Err(Error::contract(format!(
            "state length {} does not match grid size {}",
            psi.len(),
            grid.len()
        )));
    }
    let n = grid.len();
    let mut tilde = psi.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut tilde);
    let raw: Vec<f64> = tilde.iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = raw.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::domain("momentum spectrum is empty or non-finite"));
    }
    let ks = grid.wavenumbers();
    // FFT order puts negative wavenumbers in the upper half; rotate them first
    let mut wavenumbers = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for j in (n / 2..n).chain(0..n / 2) {
        wavenumbers.push(ks[j]);
        weights.push(raw[j] / total);
    }
    Ok(MomentumSpectrum {
        wavenumbers,
        weights,
    })
}

/// Populations of the sideband orders after reflection.
#[derive(Clone, Debug, PartialEq)]
pub struct Populations {
    /// (order, weight), normalized to the reflected (k > 0) mass.
    pub orders: Vec<(i32, f64)>,
    /// Reflected mass not falling in any order bin.
    pub unassigned: f64,
    /// Fraction of the total mass moving upward.
    pub reflected_fraction: f64,
}

impl Populations {
    pub fn weight(&self, order: i32) -> Option<f64> {
        self.orders
            .iter()
            .find(|(n, _)| *n == order)
            .map(|(_, w)| *w)
    }
}

/// Integrate the spectrum over one bin per sideband order.
///
/// The n-th order exits with wavenumber k_n = sqrt(k_inc^2 + 2 n omega)
/// (hbar = M = 1); bins meet at midpoints between adjacent open orders.
/// Closed orders (negative radicand) are skipped. Each reported bin must
/// span at least four spectrum samples, otherwise the run is too coarse
/// to attribute mass to orders.
pub fn extract_populations(
    spectrum: &MomentumSpectrum,
    k_inc: f64,
    omega: f64,
    n_orders: u32,
) -> Result<Populations> {
    if !(k_inc.is_finite() && k_inc > 0.0) {
        return Err(Error::domain(format!(
            "incident wavenumber must be positive, got {k_inc}"
        )));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::domain(format!(
            "drive frequency must be positive, got {omega}"
        )));
    }
    let span = i32::try_from(n_orders)
        .map_err(|_| Error::domain(format!("order span {n_orders} out of range")))?;

    // ladder with one extra order on each side to place the outer boundaries
    let ladder: Vec<(i32, f64)> = (-(span + 1)..=span + 1)
        .filter_map(|n| {
            let radicand = k_inc * k_inc + 2.0 * f64::from(n) * omega;
            (radicand > 0.0).then(|| (n, radicand.sqrt()))
        })
        .collect();

    let reflected: f64 = spectrum
        .wavenumbers
        .iter()
        .zip(&spectrum.weights)
        .filter(|(k, _)| **k > 0.0)
        .map(|(_, w)| w)
        .sum();
    if reflected < 0.5 {
        return Err(Error::domain(format!(
            "only {reflected:.3} of the mass is moving upward; the state is not \
             a reflected packet"
        )));
    }

    let dk = spectrum.dk();
    let mut orders = Vec::new();
    let mut assigned = 0.0_f64;
    for (i, &(n, k_n)) in ladder.iter().enumerate() {
        if n.abs() > span {
            continue;
        }
        let above = ladder.get(i + 1).map(|&(_, k)| 0.5 * (k_n + k));
        let below = (i > 0).then(|| 0.5 * (ladder[i - 1].1 + k_n));
        // mirror the available half-gap when a neighbor is closed or outside
        let (lo, hi) = match (below, above) {
            (Some(lo), Some(hi)) => (lo, hi),
            (None, Some(hi)) => ((2.0 * k_n - hi).max(dk / 2.0), hi),
            (Some(lo), None) => (lo, 2.0 * k_n - lo),
            (None, None) => {
                return Err(Error::contract(
                    "cannot bin a single isolated order; widen the order span",
                ));
            }
        };
        if hi - lo < 4.0 * dk {
            return Err(Error::contract(format!(
                "momentum bin for order {n} spans {:.3e}, less than four spectral \
                 samples of {dk:.3e}; enlarge the domain or the packet width",
                hi - lo
            )));
        }
        let mass: f64 = spectrum
            .wavenumbers
            .iter()
            .zip(&spectrum.weights)
            .filter(|(k, _)| **k > lo && **k <= hi)
            .map(|(_, w)| w)
            .sum();
        assigned += mass;
        orders.push((n, mass / reflected));
    }

    Ok(Populations {
        orders,
        unassigned: (reflected - assigned).max(0.0) / reflected,
        reflected_fraction: reflected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::packet::incident_packet;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn spectrum_of_a_plane_like_packet_peaks_at_its_momentum() {
        let g = Grid::new(-40.0, 40.0, 1024).unwrap();
        let psi = incident_packet(&g, 0.0, 3.0, 5.0).unwrap();
        let spectrum = momentum_spectrum(&g, &psi).unwrap();
        assert_relative_eq!(
            spectrum.weights.iter().sum::<f64>(),
            1.0,
            max_relative = 1e-12
        );
        let peak = spectrum
            .weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_abs_diff_eq!(spectrum.wavenumbers[peak], 5.0, epsilon = spectrum.dk());
        // ascending wavenumbers
        assert!(spectrum.wavenumbers.windows(2).all(|w| w[1] > w[0]));
    }

    // superpose packets at the exact ladder wavenumbers with known weights
    // and check they are recovered
    #[test]
    fn populations_recover_a_synthetic_ladder() {
        let g = Grid::new(-60.0, 60.0, 2048).unwrap();
        let k_inc = 12.0;
        let omega = 12.0; // Q = 1 ladder: spacing ~ 1 near the carrier
        let weights: [(i32, f64); 4] = [(-1, 0.2), (0, 0.5), (1, 0.25), (2, 0.05)];
        let mut psi = vec![num_complex::Complex::new(0.0, 0.0); g.len()];
        for (n, w) in weights {
            let k_n = (k_inc * k_inc + 2.0 * f64::from(n) * omega).sqrt();
            let part = incident_packet(&g, 0.0, 4.0, k_n).unwrap();
            for (a, b) in psi.iter_mut().zip(part) {
                // incoherent orders in practice separate in k; coherent
                // superposition works here because the bins are disjoint
                *a += b * w.sqrt();
            }
        }
        let spectrum = momentum_spectrum(&g, &psi).unwrap();
        let pops = extract_populations(&spectrum, k_inc, omega, 2).unwrap();
        for (n, w) in weights {
            assert_abs_diff_eq!(pops.weight(n).unwrap(), w, epsilon = 2e-3);
        }
        // the only unassigned mass is the top packet's tail past the last bin
        assert!(pops.unassigned < 1e-4, "unassigned {}", pops.unassigned);
        assert!(pops.reflected_fraction > 1.0 - 1e-9);
    }

    #[test]
    fn closed_orders_are_skipped() {
        let g = Grid::new(-60.0, 60.0, 2048).unwrap();
        let k_inc = 5.0;
        let omega = 6.0; // k^2 = 25 < 3 * 2 omega: order -3 and below closed
                         // narrow momentum spread so the carrier bin captures everything
        let psi = incident_packet(&g, 0.0, 6.0, k_inc).unwrap();
        let spectrum = momentum_spectrum(&g, &psi).unwrap();
        let pops = extract_populations(&spectrum, k_inc, omega, 3).unwrap();
        let orders: Vec<i32> = pops.orders.iter().map(|(n, _)| *n).collect();
        assert_eq!(orders, vec![-2, -1, 0, 1, 2, 3]);
        assert_abs_diff_eq!(pops.weight(0).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn downward_mass_is_rejected() {
        let g = Grid::new(-40.0, 40.0, 1024).unwrap();
        let psi = incident_packet(&g, 0.0, 3.0, -5.0).unwrap();
        let spectrum = momentum_spectrum(&g, &psi).unwrap();
        assert!(extract_populations(&spectrum, 5.0, 5.0, 1).is_err());
    }

    #[test]
    fn coarse_spectra_are_rejected() {
        // tiny domain: dk too coarse for the requested ladder
        let g = Grid::new(-3.0, 3.0, 64).unwrap();
        let psi = incident_packet(&g, 0.0, 0.8, 10.0).unwrap();
        let spectrum = momentum_spectrum(&g, &psi).unwrap();
        let err = extract_populations(&spectrum, 10.0, 2.0, 1).unwrap_err();
        assert!(err.to_string().contains("four spectral samples"), "{err}");
    }
}
