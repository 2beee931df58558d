//! Achievable-rate formulas for both duplex modes, in matrix (log-det) and
//! per-stream scalar form, plus the closed-form half-duplex design.
//!
//! Everything is in bits per channel use with unit-variance noise, so power
//! budgets double as SNRs.

use nalgebra::{Complex, DMatrix, DVector};

use crate::channel::{covariance_from_modes, svd, ComplexMatrix, SvdTriple};
use crate::error::{Error, Result};
use crate::waterfill::{rate_of, waterfill, PowerAllocation, DEFAULT_TOL};

/// Eigenvalues of a covariance down to this are treated as decomposition noise
/// and clamped to zero; anything lower is genuinely indefinite and rejected.
const PSD_TOL: f64 = 1e-9;

/// Link rates plus the end-to-end bottleneck for one duplex mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    /// Source-to-relay link rate.
    pub r_sr: f64,
    /// Relay-to-destination link rate.
    pub r_rd: f64,
    /// Decode-and-forward end-to-end rate.
    pub r_end2end: f64,
}

impl RatePair {
    /// Full duplex: both hops run simultaneously, the bottleneck passes through.
    pub fn full_duplex(r_sr: f64, r_rd: f64) -> Self {
        Self {
            r_sr,
            r_rd,
            r_end2end: r_sr.min(r_rd),
        }
    }

    /// Half duplex: the hops time-share the channel, halving the bottleneck.
    pub fn half_duplex(r_sr: f64, r_rd: f64) -> Self {
        Self {
            r_sr,
            r_rd,
            r_end2end: 0.5 * r_sr.min(r_rd),
        }
    }
}

/// The closed-form half-duplex optimum: each hop water-fills independently in
/// its own right singular basis, since nothing couples the two links.
#[derive(Debug, Clone)]
pub struct HdDesign {
    pub q_src: ComplexMatrix,
    pub q_relay: ComplexMatrix,
    pub alloc_src: PowerAllocation,
    pub alloc_relay: PowerAllocation,
    pub rate: RatePair,
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

/// Validates a covariance and returns its PSD-clamped Hermitian part.
fn psd_clamp(q: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_finite(q)?;
    if !q.is_square() {
        return Err(Error::InvalidInput(format!(
            "covariance must be square, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    if q.nrows() == 0 {
        return Ok(q.clone());
    }
    let qh = hermitian_part(q);
    let se = qh.clone().symmetric_eigen();
    let min_eig = se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_TOL {
        return Err(Error::NotPsd { min_eig });
    }
    if min_eig >= 0.0 {
        return Ok(qh);
    }
    let clamped = DVector::from_iterator(
        se.eigenvalues.len(),
        se.eigenvalues.iter().map(|l| Complex::new(l.max(0.0), 0.0)),
    );
    Ok(&se.eigenvectors * DMatrix::from_diagonal(&clamped) * se.eigenvectors.adjoint())
}

/// log2 det(I + S) for Hermitian PSD S, via its eigenvalues.
fn logdet_i_plus(s: &ComplexMatrix) -> f64 {
    if s.nrows() == 0 {
        return 0.0;
    }
    hermitian_part(s)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|l| (1.0 + l.max(0.0)).log2())
        .sum()
}

/// Clean MIMO link rate log2 det(I + H Q H^H).
pub fn logdet_rate(h: &ComplexMatrix, q: &ComplexMatrix) -> Result<f64> {
    check_finite(h)?;
    let q = psd_clamp(q)?;
    if h.ncols() != q.nrows() {
        return Err(Error::InvalidInput(format!(
            "channel is {}x{} but covariance is {}x{}",
            h.nrows(),
            h.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    let s = h * q * h.adjoint();
    Ok(logdet_i_plus(&s))
}

/// Source-relay rate with residual self-interference treated as noise:
/// log2 |I + A + B| - log2 |I + B| where A is the signal Gram matrix and B the
/// interference Gram matrix. The determinant ratio avoids forming the noise
/// whitening inverse explicitly.
pub fn fd_sr_rate(
    h1: &ComplexMatrix,
    q_src: &ComplexMatrix,
    h_rsi: &ComplexMatrix,
    q_relay: &ComplexMatrix,
) -> Result<f64> {
    check_finite(h1)?;
    check_finite(h_rsi)?;
    let qs = psd_clamp(q_src)?;
    let qr = psd_clamp(q_relay)?;
    if h1.ncols() != qs.nrows() {
        return Err(Error::InvalidInput(format!(
            "source channel is {}x{} but source covariance is {}x{}",
            h1.nrows(),
            h1.ncols(),
            qs.nrows(),
            qs.ncols()
        )));
    }
    if h_rsi.ncols() != qr.nrows() {
        return Err(Error::InvalidInput(format!(
            "interference channel is {}x{} but relay covariance is {}x{}",
            h_rsi.nrows(),
            h_rsi.ncols(),
            qr.nrows(),
            qr.ncols()
        )));
    }
    if h_rsi.nrows() != h1.nrows() {
        return Err(Error::InvalidInput(format!(
            "interference lands on {} antennas but the source link has {}",
            h_rsi.nrows(),
            h1.nrows()
        )));
    }
    let a = h1 * qs * h1.adjoint();
    let b = h_rsi * qr * h_rsi.adjoint();
    Ok((logdet_i_plus(&(&a + &b)) - logdet_i_plus(&b)).max(0.0))
}

/// Relay-destination rate log2 det(I + H_2 Q_r H_2^H).
pub fn fd_rd_rate(h2: &ComplexMatrix, q_relay: &ComplexMatrix) -> Result<f64> {
    logdet_rate(h2, q_relay)
}

/// Per-stream source-relay rate when signal, interference, and allocation are
/// all aligned to the channel singular bases:
/// sum_i log2(1 + s1_i g_i / (1 + r_i t_i)).
///
/// Vectors of different lengths are zero-padded on the right, so callers can
/// pass each link's natural degree-of-freedom count unpadded.
pub fn scalar_fd_sr_rate(
    sig1_sq: &[f64],
    gamma_s: &[f64],
    gamma_r: &[f64],
    sigr_sq: &[f64],
) -> Result<f64> {
    for v in [sig1_sq, gamma_s, gamma_r, sigr_sq] {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if v.iter().any(|x| *x < 0.0) {
            return Err(Error::InvalidInput(
                "rate vectors must be non-negative".into(),
            ));
        }
    }
    let n = sig1_sq
        .len()
        .max(gamma_s.len())
        .max(gamma_r.len())
        .max(sigr_sq.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    Ok((0..n)
        .map(|i| {
            let signal = at(sig1_sq, i) * at(gamma_s, i);
            let noise = 1.0 + at(gamma_r, i) * at(sigr_sq, i);
            (1.0 + signal / noise).log2()
        })
        .sum())
}

/// Builds the self-interference matrix whose modes each point at one
/// source-relay receive direction while drawing from one relay-destination
/// transmit direction: L_1 diag(sigma_r) R_2^H on the first `sigma_r.len()`
/// shared modes. This is the alignment the worst case adopts.
pub fn aligned_rsi(
    t_sr: &SvdTriple,
    t_rd: &SvdTriple,
    sigma_r: &[f64],
) -> Result<ComplexMatrix> {
    if sigma_r.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidInput(
            "interference amplitudes must be finite and non-negative".into(),
        ));
    }
    let shared = t_sr.left.ncols().min(t_rd.right.ncols());
    if sigma_r.len() > shared {
        return Err(Error::LengthMismatch {
            expected: shared,
            got: sigma_r.len(),
        });
    }
    let mut out = DMatrix::zeros(t_sr.left.nrows(), t_rd.right.nrows());
    for (i, s) in sigma_r.iter().enumerate() {
        out += t_sr.left.column(i) * t_rd.right.column(i).adjoint() * Complex::new(*s, 0.0);
    }
    Ok(out)
}

/// Optimal half-duplex design: independent water-filling per hop.
///
/// A dead hop (all singular values zero) is not an error; it simply carries no
/// power and the end-to-end rate is zero.
pub fn hd_optimal(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    p_src: f64,
    p_relay: f64,
) -> Result<HdDesign> {
    if !(p_src > 0.0) || !(p_relay > 0.0) {
        return Err(Error::InvalidInput(format!(
            "power budgets must be > 0, got {p_src} and {p_relay}"
        )));
    }
    let t1 = svd(h1)?;
    let t2 = svd(h2)?;
    let g1 = t1.gains();
    let g2 = t2.gains();
    let alloc_src = alloc_or_silent(&g1, p_src)?;
    let alloc_relay = alloc_or_silent(&g2, p_relay)?;
    let q_src = covariance_from_modes(&t1.right, &alloc_src.powers)?;
    let q_relay = covariance_from_modes(&t2.right, &alloc_relay.powers)?;
    let rate = RatePair::half_duplex(
        rate_of(&g1, &alloc_src.powers),
        rate_of(&g2, &alloc_relay.powers),
    );
    Ok(HdDesign {
        q_src,
        q_relay,
        alloc_src,
        alloc_relay,
        rate,
    })
}

// Water level 0 here is a placeholder on a channel that cannot carry power.
fn alloc_or_silent(gains: &[f64], budget: f64) -> Result<PowerAllocation> {
    match waterfill(gains, budget, DEFAULT_TOL) {
        Err(Error::AllGainsZero) => Ok(PowerAllocation {
            powers: vec![0.0; gains.len()],
            water_level: 0.0,
            budget,
        }),
        other => other,
    }
}
