//! Complex-matrix primitives: SVD scalarization, random channel draws, and
//! mode-aligned covariance construction. Everything downstream (rates, the
//! robust design, the Monte-Carlo harness) works on the outputs of this module.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Dense complex matrix; channels, covariances, and unitary factors all use this.
pub type ComplexMatrix = DMatrix<Complex<f64>>;

/// Relay duplexing mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplexMode {
    HalfDuplex,
    FullDuplex,
}

/// Antenna counts, power budgets, and the RSI uncertainty bound for one link setup.
///
/// Dimension convention: the source-relay channel H1 is `k_rx x m_src` and the
/// relay-destination channel H2 is `n_dst x k_tx`, so that the received vectors
/// live in the receive-antenna spaces. Budgets are linear SNRs (unit-variance
/// noise); `t_bound` bounds the trace of the residual self-interference Gram
/// matrix, i.e. the sum of its squared singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub m_src: usize,
    pub k_tx: usize,
    pub k_rx: usize,
    pub n_dst: usize,
    pub p_src: f64,
    pub p_relay: f64,
    pub t_bound: f64,
    pub mode: DuplexMode,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_src == 0 || self.k_tx == 0 || self.k_rx == 0 || self.n_dst == 0 {
            return Err(Error::InvalidInput("antenna counts must be >= 1".into()));
        }
        if !(self.p_src > 0.0) || !(self.p_relay > 0.0) {
            return Err(Error::InvalidInput("power budgets must be > 0".into()));
        }
        if !(self.t_bound >= 0.0) {
            return Err(Error::InvalidInput("t_bound must be >= 0".into()));
        }
        Ok(())
    }

    /// Source-relay spatial degrees of freedom.
    pub fn dof_sr(&self) -> usize {
        self.m_src.min(self.k_rx)
    }

    /// Relay-destination spatial degrees of freedom.
    pub fn dof_rd(&self) -> usize {
        self.k_tx.min(self.n_dst)
    }
}

/// Thin SVD of a channel matrix, singular values sorted descending.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    /// Left singular vectors, `rows x k` with orthonormal columns.
    pub left: ComplexMatrix,
    /// Non-negative singular values, non-increasing, length `k = min(rows, cols)`.
    pub singular_values: DVector<f64>,
    /// Right singular vectors, `cols x k` with orthonormal columns.
    pub right: ComplexMatrix,
}

impl SvdTriple {
    /// Squared singular values (per-stream power gains).
    pub fn gains(&self) -> Vec<f64> {
        self.singular_values.iter().map(|s| s * s).collect()
    }
}

fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Thin SVD with descending singular values.
pub fn svd(h: &ComplexMatrix) -> Result<SvdTriple> {
    if !all_finite(h) {
        return Err(Error::NonFinite);
    }
    let svd = h.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    // nalgebra returns descending singular values; keep a defensive sort since
    // everything downstream indexes streams strongest-first.
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let sv = DVector::from_iterator(k, order.iter().map(|&i| svd.singular_values[i]));
    let left = ComplexMatrix::from_columns(
        &order.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>(),
    );
    let right_full = v_t.adjoint();
    let right = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&i| right_full.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(SvdTriple {
        left,
        singular_values: sv,
        right,
    })
}

/// Draws a `rows x cols` matrix with i.i.d. CN(0,1) entries
/// (real and imaginary parts each N(0, 1/2)).
pub fn sample_channel<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re * scale, im * scale)
    })
}

/// Builds Q = basis · diag(powers) · basis^H from orthonormal transmit modes.
///
/// `powers` may be shorter than the number of basis columns; missing modes get
/// zero power. The result is Hermitian PSD with trace equal to the power sum.
pub fn covariance_from_modes(basis: &ComplexMatrix, powers: &[f64]) -> Result<ComplexMatrix> {
    if powers.len() > basis.ncols() {
        return Err(Error::InvalidInput(format!(
            "{} powers for {} basis columns",
            powers.len(),
            basis.ncols()
        )));
    }
    if let Some(p) = powers.iter().find(|p| **p < 0.0) {
        return Err(Error::InvalidInput(format!("negative power entry {p}")));
    }
    let n = basis.nrows();
    let mut q = ComplexMatrix::zeros(n, n);
    for (k, &p) in powers.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let col = basis.column(k);
        // q += p * col * col^H
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] += Complex::new(p, 0.0) * col[i] * col[j].conj();
            }
        }
    }
    Ok(q)
}
