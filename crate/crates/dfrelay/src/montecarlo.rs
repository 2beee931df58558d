//! Seeded Monte-Carlo harness: average rates over random channel draws,
//! uncertainty sweeps, antenna-split studies, and the HD/FD switching
//! threshold.
//!
//! # Power convention
//!
//! `p_src` and `p_relay` are average budgets per end-to-end channel use. A
//! half-duplex node is active in only half of the uses, so its transmissions
//! run at twice the average budget; the full-duplex comparison is made at
//! equal transmit power. Both design layers therefore receive `2 * p_src`
//! and `2 * p_relay`, while the interference bound stays relative to the
//! configured nominal budget: `t_bound = (T/P) * p_src`.
//!
//! # Seeding
//!
//! Trial k draws from `ChaCha8Rng` seeded with
//! `splitmix64(master_seed + (k + 1) * 0x9E3779B97F4A7C15)` (wrapping
//! arithmetic). Child streams never depend on worker count or execution
//! order, and every record stores its own seed so a single trial can be
//! replayed in isolation.

use crate::channel::{sample_channel, DuplexMode, SystemConfig};
use crate::error::{Error, Result};
use crate::rates::hd_optimal;
use crate::robust::{
    robust_design, DEFAULT_INNER_TOL, DEFAULT_MAX_OUTER, DEFAULT_OUTER_TOL, DEFAULT_SHRINK,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One channel realization: both duplex modes evaluated on the same pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    /// Child seed of this trial's random stream.
    pub seed: u64,
    pub r_hd: f64,
    /// Guaranteed full-duplex rate under the worst interference in budget.
    pub r_fd_worst: f64,
}

/// Aggregated sweep results, one entry per uncertainty value.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub config: SystemConfig,
    pub t_over_p_values: Vec<f64>,
    pub l_trials: usize,
    pub master_seed: u64,
    /// HD does not face interference, so these entries are identical; kept
    /// per point so rows serialize uniformly.
    pub mean_rates_hd: Vec<f64>,
    pub mean_rates_fd: Vec<f64>,
    pub std_errors_hd: Vec<f64>,
    pub std_errors_fd: Vec<f64>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed; independent of worker count and ordering.
pub fn child_seed(master_seed: u64, trial_index: usize) -> u64 {
    splitmix64(master_seed.wrapping_add((trial_index as u64 + 1).wrapping_mul(GOLDEN)))
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Channels for trial k plus its child seed.
fn draw_channels(
    cfg: &SystemConfig,
    master_seed: u64,
    k: usize,
) -> (u64, crate::channel::ComplexMatrix, crate::channel::ComplexMatrix) {
    let seed = child_seed(master_seed, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h1 = sample_channel(cfg.k_rx, cfg.m_src, &mut rng);
    let h2 = sample_channel(cfg.n_dst, cfg.k_tx, &mut rng);
    (seed, h1, h2)
}

fn design_config(cfg: &SystemConfig, t_bound: f64) -> SystemConfig {
    SystemConfig {
        p_src: 2.0 * cfg.p_src,
        p_relay: 2.0 * cfg.p_relay,
        t_bound,
        mode: DuplexMode::FullDuplex,
        ..*cfg
    }
}

/// Evaluates both duplex modes on `l_trials` independent channel pairs.
/// `cfg.t_bound` is the absolute interference budget for the FD design.
pub fn run_trials(cfg: &SystemConfig, l_trials: usize, master_seed: u64) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    if l_trials == 0 {
        return Err(Error::InvalidInput("l_trials must be >= 1".into()));
    }
    let fd_cfg = design_config(cfg, cfg.t_bound);
    (0..l_trials)
        .into_par_iter()
        .map(|k| {
            let (seed, h1, h2) = draw_channels(cfg, master_seed, k);
            let hd = hd_optimal(&h1, &h2, fd_cfg.p_src, fd_cfg.p_relay)?;
            let fd = robust_design(
                &h1,
                &h2,
                &fd_cfg,
                DEFAULT_SHRINK,
                DEFAULT_OUTER_TOL,
                DEFAULT_INNER_TOL,
                DEFAULT_MAX_OUTER,
            )?;
            Ok(TrialRecord {
                trial_index: k,
                seed,
                r_hd: hd.rate.r_end2end,
                r_fd_worst: fd.rates.r_end2end,
            })
        })
        .collect()
}

/// Sweeps the uncertainty budget with common random numbers: every T value
/// sees the same `l_trials` channel pairs, so per-trial monotonicity in T
/// carries over to the averaged curve and HD means are exactly T-invariant.
pub fn sweep_t(
    cfg: &SystemConfig,
    t_over_p: &[f64],
    l_trials: usize,
    master_seed: u64,
) -> Result<SweepReport> {
    cfg.validate()?;
    if l_trials == 0 {
        return Err(Error::InvalidInput("l_trials must be >= 1".into()));
    }
    if t_over_p.is_empty() {
        // degenerate but legal: a report with no rows
        return Ok(SweepReport {
            config: cfg.clone(),
            t_over_p_values: Vec::new(),
            l_trials,
            master_seed,
            mean_rates_hd: Vec::new(),
            mean_rates_fd: Vec::new(),
            std_errors_hd: Vec::new(),
            std_errors_fd: Vec::new(),
        });
    }
    if t_over_p.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidInput("t_over_p must be non-negative".into()));
    }
    if t_over_p.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("t_over_p must be ascending".into()));
    }

    // per trial: (r_hd, r_fd at each T)
    let rows: Vec<(f64, Vec<f64>)> = (0..l_trials)
        .into_par_iter()
        .map(|k| {
            let (_, h1, h2) = draw_channels(cfg, master_seed, k);
            let base = design_config(cfg, 0.0);
            let hd = hd_optimal(&h1, &h2, base.p_src, base.p_relay)?;
            let fds = t_over_p
                .iter()
                .map(|t| {
                    let fd_cfg = design_config(cfg, t * cfg.p_src);
                    Ok(robust_design(
                        &h1,
                        &h2,
                        &fd_cfg,
                        DEFAULT_SHRINK,
                        DEFAULT_OUTER_TOL,
                        DEFAULT_INNER_TOL,
                        DEFAULT_MAX_OUTER,
                    )?
                    .rates
                    .r_end2end)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((hd.rate.r_end2end, fds))
        })
        .collect::<Result<Vec<_>>>()?;

    let hd_col: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (hd_mean, hd_se) = mean_and_se(&hd_col);
    let mut mean_fd = Vec::with_capacity(t_over_p.len());
    let mut se_fd = Vec::with_capacity(t_over_p.len());
    for ti in 0..t_over_p.len() {
        let col: Vec<f64> = rows.iter().map(|r| r.1[ti]).collect();
        let (m, s) = mean_and_se(&col);
        mean_fd.push(m);
        se_fd.push(s);
    }
    Ok(SweepReport {
        config: cfg.clone(),
        t_over_p_values: t_over_p.to_vec(),
        l_trials,
        master_seed,
        mean_rates_hd: vec![hd_mean; t_over_p.len()],
        mean_rates_fd: mean_fd,
        std_errors_hd: vec![hd_se; t_over_p.len()],
        std_errors_fd: se_fd,
    })
}

/// Bisection for the uncertainty level T*/P at which the average worst-case
/// FD rate crosses the average HD rate, under common random numbers.
///
/// Requires a bracket: FD above HD at `t_lo`, below at `t_hi`. Stops when
/// the rate gap at the midpoint is within `tol` bits or the interval is
/// narrower than `tol` (in T/P units, i.e. a T window of `tol * p_src`).
pub fn find_threshold(
    cfg: &SystemConfig,
    t_lo: f64,
    t_hi: f64,
    l_trials: usize,
    master_seed: u64,
    tol: f64,
) -> Result<f64> {
    cfg.validate()?;
    if l_trials == 0 {
        return Err(Error::InvalidInput("l_trials must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be > 0".into()));
    }
    if !(t_lo >= 0.0) || !(t_hi > t_lo) {
        return Err(Error::InvalidInput(format!(
            "need 0 <= t_lo < t_hi, got [{t_lo}, {t_hi}]"
        )));
    }

    let pairs: Vec<_> = (0..l_trials)
        .map(|k| {
            let (_, h1, h2) = draw_channels(cfg, master_seed, k);
            (h1, h2)
        })
        .collect();
    let base = design_config(cfg, 0.0);
    let hd_mean = pairs
        .par_iter()
        .map(|(h1, h2)| Ok(hd_optimal(h1, h2, base.p_src, base.p_relay)?.rate.r_end2end))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>()
        / l_trials as f64;
    let fd_mean = |t: f64| -> Result<f64> {
        let fd_cfg = design_config(cfg, t * cfg.p_src);
        let sum = pairs
            .par_iter()
            .map(|(h1, h2)| {
                Ok(robust_design(
                    h1,
                    h2,
                    &fd_cfg,
                    DEFAULT_SHRINK,
                    DEFAULT_OUTER_TOL,
                    DEFAULT_INNER_TOL,
                    DEFAULT_MAX_OUTER,
                )?
                .rates
                .r_end2end)
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum::<f64>();
        Ok(sum / l_trials as f64)
    };

    let rate_lo = fd_mean(t_lo)?;
    let rate_hi = fd_mean(t_hi)?;
    if !(rate_lo > hd_mean && rate_hi < hd_mean) {
        return Err(Error::NoCrossing {
            t_lo,
            t_hi,
            rate_lo,
            rate_hi,
            rate_hd: hd_mean,
        });
    }
    let (mut lo, mut hi) = (t_lo, t_hi);
    loop {
        let mid = 0.5 * (lo + hi);
        let r = fd_mean(mid)?;
        if (r - hd_mean).abs() <= tol || (hi - lo) < tol {
            return Ok(mid);
        }
        if r > hd_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Runs one uncertainty sweep per relay antenna split (K_t transmit, K_r
/// receive), all from the same master seed.
#[allow(clippy::too_many_arguments)]
pub fn antenna_split_study(
    m: usize,
    n: usize,
    total_relay_antennas: usize,
    splits: &[(usize, usize)],
    t_over_p: &[f64],
    p_src: f64,
    p_relay: f64,
    l_trials: usize,
    master_seed: u64,
) -> Result<Vec<SweepReport>> {
    splits
        .iter()
        .map(|&(k_tx, k_rx)| {
            if k_tx + k_rx != total_relay_antennas {
                return Err(Error::SplitMismatch {
                    k_tx,
                    k_rx,
                    total: total_relay_antennas,
                });
            }
            let cfg = SystemConfig {
                m_src: m,
                k_tx,
                k_rx,
                n_dst: n,
                p_src,
                p_relay,
                t_bound: 0.0,
                mode: DuplexMode::FullDuplex,
            };
            sweep_t(&cfg, t_over_p, l_trials, master_seed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(t_bound: f64) -> SystemConfig {
        SystemConfig {
            m_src: 2,
            k_tx: 2,
            k_rx: 3,
            n_dst: 3,
            p_src: 5.0,
            p_relay: 5.0,
            t_bound,
            mode: DuplexMode::FullDuplex,
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = small_cfg(0.5);
        let a = run_trials(&cfg, 24, 7).unwrap();
        let b = run_trials(&cfg, 24, 7).unwrap();
        assert_eq!(a, b);
        // different master seed shifts every child stream
        let c = run_trials(&cfg, 24, 8).unwrap();
        assert!(a.iter().zip(&c).all(|(x, y)| x.r_hd != y.r_hd));
    }

    #[test]
    fn child_seeds_are_distinct_and_stable() {
        let s: Vec<u64> = (0..100).map(|k| child_seed(42, k)).collect();
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_eq!(s[0], child_seed(42, 0));
        // record carries its own child seed
        let cfg = small_cfg(0.0);
        let recs = run_trials(&cfg, 3, 42).unwrap();
        for (k, r) in recs.iter().enumerate() {
            assert_eq!(r.seed, child_seed(42, k));
            assert_eq!(r.trial_index, k);
        }
    }

    /// With no interference budget the FD link is clean and exactly doubles
    /// the HD rate, trial by trial, to machine precision.
    #[test]
    fn zero_uncertainty_doubles_hd_per_trial() {
        let cfg = small_cfg(0.0);
        let report = sweep_t(&cfg, &[0.0], 60, 11).unwrap();
        assert_eq!(report.mean_rates_fd.len(), 1);
        let recs = run_trials(&cfg, 60, 11).unwrap();
        for r in &recs {
            assert!(
                (r.r_fd_worst - 2.0 * r.r_hd).abs() <= 1e-12 * r.r_fd_worst.max(1.0),
                "trial {}: FD {} vs 2*HD {}",
                r.trial_index,
                r.r_fd_worst,
                2.0 * r.r_hd
            );
        }
        assert!((report.mean_rates_fd[0] - 2.0 * report.mean_rates_hd[0]).abs() < 1e-12);
    }

    #[test]
    fn sweep_fd_means_non_increasing_and_hd_invariant() {
        let cfg = small_cfg(0.0);
        let ts = [0.0, 0.04, 0.2, 0.6, 1.2, 2.4];
        let report = sweep_t(&cfg, &ts, 40, 13).unwrap();
        for w in report.mean_rates_fd.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "fd mean rose along sweep: {w:?}");
        }
        for w in report.mean_rates_hd.windows(2) {
            assert_eq!(w[0], w[1]);
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let cfg = small_cfg(0.0);
        let empty = sweep_t(&cfg, &[], 10, 1).unwrap();
        assert!(empty.t_over_p_values.is_empty() && empty.mean_rates_fd.is_empty());
        assert!(sweep_t(&cfg, &[0.2, 0.1], 10, 1).is_err());
        assert!(sweep_t(&cfg, &[0.1, 0.1], 10, 1).is_err());
        assert!(sweep_t(&cfg, &[-0.1, 0.1], 10, 1).is_err());
        assert!(sweep_t(&cfg, &[0.0], 0, 1).is_err());
    }

    /// Sample standard errors shrink like 1/sqrt(L); quadrupling L should
    /// halve them to within 20%.
    #[test]
    fn standard_error_scaling() {
        let cfg = small_cfg(0.0);
        let se = |l: usize| sweep_t(&cfg, &[0.0], l, 17).unwrap().std_errors_fd[0];
        let (s500, s2000, s8000) = (se(500), se(2000), se(8000));
        for ratio in [s500 / s2000, s2000 / s8000] {
            assert!(
                (ratio - 2.0).abs() <= 0.4,
                "SE ratio {ratio} departs from sqrt(4)"
            );
        }
    }

    #[test]
    fn threshold_requires_bracket() {
        let cfg = small_cfg(0.0);
        // FD is already below HD at t_lo = 30: no crossing inside [30, 40]
        let err = find_threshold(&cfg, 30.0, 40.0, 12, 19, 0.02).unwrap_err();
        match err {
            Error::NoCrossing { rate_lo, rate_hd, .. } => {
                assert!(rate_lo < rate_hd);
            }
            other => panic!("expected NoCrossing, got {other:?}"),
        }
    }

    #[test]
    fn threshold_finds_crossing_on_small_run() {
        let cfg = small_cfg(0.0);
        let t = find_threshold(&cfg, 0.2, 8.0, 40, 23, 0.05).unwrap();
        assert!((0.2..8.0).contains(&t), "threshold {t} outside bracket");
        // at the threshold the two modes are close
        let report = sweep_t(&cfg, &[t], 40, 23).unwrap();
        assert!((report.mean_rates_fd[0] - report.mean_rates_hd[0]).abs() < 0.2);
    }

    #[test]
    fn split_study_shares_seed_and_checks_sums() {
        let r = antenna_split_study(2, 3, 5, &[(2, 3), (3, 2)], &[0.04], 5.0, 5.0, 8, 29).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].master_seed, r[1].master_seed);
        assert_eq!(r[0].config.k_tx, 2);
        assert_eq!(r[1].config.k_tx, 3);
        let bad = antenna_split_study(2, 3, 5, &[(2, 2)], &[0.04], 5.0, 5.0, 8, 29);
        assert!(matches!(bad, Err(Error::SplitMismatch { .. })));
    }
}
