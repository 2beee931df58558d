//! Transceiver design and rate analysis for a MIMO decode-and-forward relay
//! that can operate half duplex or full duplex. The full-duplex side carries
//! residual self-interference known only through a power bound, so its design
//! is robust: rates are guaranteed for the worst interference the bound
//! allows.

pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod rates;
pub mod robust;
pub mod waterfill;

pub use channel::{
    covariance_from_modes, sample_channel, svd, ComplexMatrix, DuplexMode, SvdTriple,
    SystemConfig,
};
pub use error::{Error, Result};
pub use montecarlo::{
    antenna_split_study, child_seed, find_threshold, run_trials, sweep_t, SweepReport, TrialRecord,
};
pub use rates::{
    aligned_rsi, fd_rd_rate, fd_sr_rate, hd_optimal, logdet_rate, scalar_fd_sr_rate, HdDesign,
    RatePair,
};
pub use robust::{
    brute_force_worst_case, known_rsi_upper_bound, robust_design, worst_case_inner, OuterRecord,
    RobustDesignResult, WorstCaseSolution, DEFAULT_INNER_TOL, DEFAULT_MAX_INNER, DEFAULT_MAX_OUTER,
    DEFAULT_OUTER_TOL, DEFAULT_SHRINK,
};
pub use waterfill::{rate_of, waterfill, waterfill_rate, PowerAllocation, DEFAULT_TOL};
