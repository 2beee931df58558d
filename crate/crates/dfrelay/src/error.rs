use thiserror::Error;

/// Errors surfaced by the design and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("covariance is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("all channel gains are zero; no stream can carry power")]
    AllGainsZero,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("brute-force oracle supports at most 3 streams, got {streams}")]
    UnsupportedSize { streams: usize },

    #[error(
        "no HD/FD crossing in [{t_lo}, {t_hi}]: FD({t_lo}) = {rate_lo:.6}, FD({t_hi}) = {rate_hi:.6}, HD = {rate_hd:.6}"
    )]
    NoCrossing {
        t_lo: f64,
        t_hi: f64,
        rate_lo: f64,
        rate_hi: f64,
        rate_hd: f64,
    },

    #[error("antenna split {k_tx}+{k_rx} does not sum to {total}")]
    SplitMismatch { k_tx: usize, k_rx: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
