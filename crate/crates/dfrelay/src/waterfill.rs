//! Water-filling over parallel scalar channels. One primitive serves three
//! masters: source power, relay power, and the adversarial RSI budget (whose
//! update has the same [tau - 1/g]+ shape).

use crate::error::{Error, Result};

/// Default relative tolerance on the budget residual for the bisection.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A water-filling solution: per-stream powers, the water level that produced
/// them, and the budget they exhaust.
#[derive(Debug, Clone)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    pub water_level: f64,
    pub budget: f64,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

fn spent(gains: &[f64], tau: f64) -> f64 {
    gains
        .iter()
        .filter(|g| **g > 0.0)
        .map(|g| (tau - 1.0 / g).max(0.0))
        .sum()
}

/// Maximizes sum log2(1 + g_i p_i) subject to sum p_i <= budget, p >= 0.
///
/// Zero gains are carried through with zero power so callers can pass
/// truncated/padded singular-value vectors unchanged. The water level is found
/// by bisection on the monotone budget residual; `tol` is relative to the
/// budget (see [`DEFAULT_TOL`]).
pub fn waterfill(gains: &[f64], budget: f64, tol: f64) -> Result<PowerAllocation> {
    if !(budget > 0.0) {
        return Err(Error::InvalidInput(format!("budget {budget} must be > 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol {tol} must be > 0")));
    }
    if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::InvalidInput("gains must be finite and >= 0".into()));
    }
    let positive: Vec<f64> = gains.iter().copied().filter(|g| *g > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::AllGainsZero);
    }
    let inv: Vec<f64> = positive.iter().map(|g| 1.0 / g).collect();
    let mut lo = inv.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = inv.iter().cloned().fold(0.0, f64::max) + budget;
    // residual(lo) <= -budget < 0 and residual(hi) >= budget > 0
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = spent(gains, mid) - budget;
        if r.abs() <= tol * budget {
            lo = mid;
            hi = mid;
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let powers: Vec<f64> = gains
        .iter()
        .map(|g| if *g > 0.0 { (tau - 1.0 / g).max(0.0) } else { 0.0 })
        .collect();
    Ok(PowerAllocation {
        powers,
        water_level: tau,
        budget,
    })
}

/// Evaluates sum log2(1 + g_i p_i) for a given allocation.
pub fn waterfill_rate(gains: &[f64], alloc: &PowerAllocation) -> Result<f64> {
    if gains.len() != alloc.powers.len() {
        return Err(Error::LengthMismatch {
            expected: gains.len(),
            got: alloc.powers.len(),
        });
    }
    Ok(rate_of(gains, &alloc.powers))
}

/// Rate of an arbitrary power vector over the same gains (plumbing shared with
/// the robust module and tests).
pub fn rate_of(gains: &[f64], powers: &[f64]) -> f64 {
    gains
        .iter()
        .zip(powers)
        .map(|(g, p)| (1.0 + g * p).log2())
        .sum()
}
