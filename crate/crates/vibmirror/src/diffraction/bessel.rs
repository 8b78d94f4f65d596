//! Bessel functions of the first kind, integer order, by Miller's
//! backward recurrence with sum normalization.
//!
//! Accuracy is guaranteed to 1e-10 relative on 0 <= x <= 50, 0 <= n <= 60;
//! arguments outside that envelope are rejected. A power-series branch
//! covers x below 1e-6 where the recurrence span would be wasteful.

use crate::error::{Error, Result};

/// Largest argument accepted.
pub const MAX_ARGUMENT: f64 = 50.0;
/// Largest order accepted.
pub const MAX_ORDER: usize = 60;

const SERIES_THRESHOLD: f64 = 1e-6;
const RESCALE_THRESHOLD: f64 = 1e250;
const RESCALE_FACTOR: f64 = 1e-250;
const MILLER_SEED: f64 = 1e-30;
// start-offset coefficient; sqrt(ACC * n) extra orders keep the seeded
// contamination below the 1e-10 target across the envelope
const ACC: f64 = 160.0;

fn check_envelope(n_max: usize, x: f64) -> Result<()> {
    if !x.is_finite() || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::domain(format!(
            "Bessel argument must lie in [0, {MAX_ARGUMENT}], got {x}"
        )));
    }
    if n_max > MAX_ORDER {
        return Err(Error::domain(format!(
            "Bessel order must not exceed {MAX_ORDER}, got {n_max}"
        )));
    }
    Ok(())
}

/// J_0(x) .. J_n_max(x) for x in the supported envelope.
pub fn bessel_j_array(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_envelope(n_max, x)?;
    if x < SERIES_THRESHOLD {
        return Ok(series_array(n_max, x));
    }

    let n_eff = n_max.max(x.ceil() as usize);
    let extra = ((ACC * n_eff as f64).sqrt().ceil() as usize).max(16);
    let mut start = n_eff + extra;
    if start % 2 == 1 {
        start += 1;
    }

    let mut out = vec![0.0_f64; n_max + 1];
    let mut j_up = 0.0_f64; // J_{k+1}, unnormalized
    let mut j = MILLER_SEED; // J_k, unnormalized
    let mut norm = 0.0_f64; // J_0 + 2 sum_{k even > 0} J_k
    let mut k = start;
    loop {
        if k <= n_max {
            out[k] = j;
        }
        if k.is_multiple_of(2) {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == 0 {
            break;
        }
        let j_down = (2.0 * k as f64) / x * j - j_up;
        j_up = j;
        j = j_down;
        k -= 1;
        if j.abs() > RESCALE_THRESHOLD {
            j *= RESCALE_FACTOR;
            j_up *= RESCALE_FACTOR;
            norm *= RESCALE_FACTOR;
            for v in &mut out {
                *v *= RESCALE_FACTOR;
            }
        }
    }

    if !(norm.is_finite() && norm != 0.0) {
        return Err(Error::domain(format!(
            "Bessel normalization failed at x = {x} (sum = {norm})"
        )));
    }
    let scale = 1.0 / norm;
    for v in &mut out {
        *v *= scale;
    }
    Ok(out)
}

// leading series terms; enough for full precision below SERIES_THRESHOLD
fn series_array(n_max: usize, x: f64) -> Vec<f64> {
    let half = 0.5 * x;
    let h2 = half * half;
    let mut lead = 1.0_f64; // (x/2)^n / n!
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            lead *= half / n as f64;
        }
        out.push(lead * (1.0 - h2 / (n as f64 + 1.0)));
    }
    out
}

/// J_n(x) for any signed order and argument inside the envelope, using
/// J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    let n = order.unsigned_abs() as usize;
    let mut sign = 1.0;
    if order < 0 && n % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && n % 2 == 1 {
        sign = -sign;
    }
    let values = bessel_j_array(n, x.abs())?;
    Ok(sign * values[n])
}
