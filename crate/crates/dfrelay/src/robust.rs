//! Worst-case self-interference and the robust full-duplex design.
//!
//! The design problem is a max-min: choose source and relay stream powers so
//! the rate guaranteed under the most damaging residual self-interference
//! (RSI) inside a trace budget T is as large as possible. The inner
//! minimization alternates best responses between the adversary (which pours
//! its budget onto the streams hurting the source link most) and the source
//! (which water-fills against the resulting interference floor). The outer
//! loop trades relay power for interference: it repeatedly shrinks the relay
//! budget, re-solves the inner game, and keeps whichever iterate guaranteed
//! the best end-to-end rate.
//!
//! The alternation is a heuristic, not an exact minimizer; `brute_force_worst_case`
//! is the independent oracle that quantifies its gap, and the design loop
//! additionally screens a deterministic family of adversary candidates so the
//! guarantee it reports never ignores a known-worse feasible interference
//! profile.

use crate::channel::{svd, ComplexMatrix, DuplexMode, SystemConfig};
use crate::error::{Error, Result};
use crate::rates::{scalar_fd_sr_rate, RatePair};
use crate::waterfill::{rate_of, waterfill, PowerAllocation, DEFAULT_TOL};

/// Relay budget shrink factor per outer iteration.
pub const DEFAULT_SHRINK: f64 = 0.95;
/// Outer loop stops when the end-to-end rate moves less than this (bits/use).
pub const DEFAULT_OUTER_TOL: f64 = 1e-4;
/// Inner loop stops when the RSI singular-value vector moves less than this
/// in Euclidean norm.
pub const DEFAULT_INNER_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_OUTER: usize = 200;
pub const DEFAULT_MAX_INNER: usize = 500;

/// Directions screened per design iterate in addition to the alternation
/// result: single-stream vertices, the uniform split, and a coarse sweep of
/// two-stream mixes. Keeps the reported guarantee from sitting above a
/// feasible interference profile the alternation happened to miss.
const SCREEN_MIX_STEPS: usize = 64;

/// Outcome of the inner worst-case problem for a fixed relay design.
#[derive(Debug, Clone)]
pub struct WorstCaseSolution {
    /// Worst-case RSI squared singular values, one per source stream.
    pub sigr_sq: Vec<f64>,
    /// Water level of the adversary's final budget allocation. 0 when the
    /// adversary never allocates (T = 0) or when the returned profile is a
    /// screened candidate rather than a water-filling-form iterate.
    pub water_level_si: f64,
    /// Source powers: the exact water-filling response to `sigr_sq`.
    pub gamma_s: Vec<f64>,
    /// Guaranteed source-relay rate at (`gamma_s`, `sigr_sq`).
    pub rate_sr: f64,
    /// False when the alternation hit its iteration cap; the returned state is
    /// then the most adversarial iterate visited rather than a fixed point.
    pub converged: bool,
}

/// One outer iteration of the design loop.
#[derive(Debug, Clone, Copy)]
pub struct OuterRecord {
    pub iteration: usize,
    pub relay_budget: f64,
    pub r_sr: f64,
    pub r_rd: f64,
    pub r_min: f64,
}

/// The committed robust design: stream powers, the worst case they were
/// sized against, and the full outer trace for diagnostics.
#[derive(Debug, Clone)]
pub struct RobustDesignResult {
    pub gamma_s: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub sigr_sq: Vec<f64>,
    /// Relay power actually spent (≤ the budget; back-off is the point).
    pub relay_budget_used: f64,
    pub rates: RatePair,
    pub trace: Vec<OuterRecord>,
    /// True when the relay-destination link has fewer streams than the
    /// source-relay link; the scalarized adversary then cannot express every
    /// interference direction and the guarantee is a lower bound on damage.
    pub adversary_is_lower_bound: bool,
}

/// A candidate adversary state: an RSI profile with the source's exact
/// water-filling response to it, and the rate that pairing yields.
#[derive(Debug, Clone)]
struct Candidate {
    rate: f64,
    sigr_sq: Vec<f64>,
    gamma_s: Vec<f64>,
    tau_si: f64,
}

fn check_vec(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if v.iter().any(|x| *x < 0.0) {
        return Err(Error::InvalidInput(format!("{name} must be non-negative")));
    }
    Ok(())
}

/// Water-fills, treating an all-dead gain vector as a silent allocation.
fn wf_or_silent(gains: &[f64], budget: f64) -> Result<PowerAllocation> {
    match waterfill(gains, budget, DEFAULT_TOL) {
        Err(Error::AllGainsZero) => Ok(PowerAllocation {
            powers: vec![0.0; gains.len()],
            water_level: 0.0,
            budget,
        }),
        other => other,
    }
}

/// Source best response to an interference profile: water-fill the effective
/// gains s1_i / (1 + lev_i * sigr_sq_i), then evaluate the pairing.
fn respond(
    sig1_sq: &[f64],
    lev: &[f64],
    p_src: f64,
    sigr_sq: Vec<f64>,
    tau_si: f64,
) -> Result<Candidate> {
    let v: Vec<f64> = sig1_sq
        .iter()
        .zip(lev)
        .zip(&sigr_sq)
        .map(|((s, l), t)| s / (1.0 + l * t))
        .collect();
    let gamma_s = wf_or_silent(&v, p_src)?.powers;
    let rate = scalar_fd_sr_rate(sig1_sq, &gamma_s, lev, &sigr_sq)?;
    Ok(Candidate {
        rate,
        sigr_sq,
        gamma_s,
        tau_si,
    })
}

/// Adversary best-response form: pour the budget onto the streams with the
/// largest damage potential u_i = s1_i * gs_i / lev_i via the water-filling
/// shape [tau - 1/u]+. Streams with zero leverage or zero source power
/// attract nothing. Returns the profile and its water level.
fn adversary_response(
    sig1_sq: &[f64],
    lev: &[f64],
    gamma_s: &[f64],
    t_bound: f64,
) -> Result<(Vec<f64>, f64)> {
    let u: Vec<f64> = sig1_sq
        .iter()
        .zip(lev)
        .zip(gamma_s)
        .map(|((s, l), g)| if *l > 0.0 && *g > 0.0 { s * g / l } else { 0.0 })
        .collect();
    if u.iter().all(|x| *x <= 0.0) {
        return Ok((vec![0.0; u.len()], 0.0));
    }
    let alloc = waterfill(&u, t_bound, DEFAULT_TOL)?;
    Ok((alloc.powers, alloc.water_level))
}

fn amplitudes(sq: &[f64]) -> Vec<f64> {
    sq.iter().map(|x| x.max(0.0).sqrt()).collect()
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Worst-case RSI for a fixed coupled relay allocation `gamma_r_bar`.
///
/// Alternates the adversary's water-filling-form update with the source's
/// exact water-filling response until the RSI singular values move less than
/// `tol`, or `max_iter` is hit. Every candidate pairs an RSI profile with the
/// source's exact response to it, so the reported rate is always achievable
/// by the adversary.
///
/// The alternation's update is a water-filling form, not the exact
/// minimizer, and its fixed points can sit on a simplex vertex while the
/// true worst case is interior. A deterministic screen of full-budget
/// profiles (vertices, uniform, two-stream mixes) therefore competes with
/// the alternation result, and the harshest candidate wins; `converged`
/// reports the alternation's own stopping status. On a non-converged
/// alternation the most adversarial iterate visited enters the screen
/// instead of a fixed point.
///
/// Only the first `sig_r_coupled_count` streams can attract interference;
/// `gamma_r_bar` entries beyond that (or missing ones) count as zero leverage.
/// `t_bound` = 0 short-circuits to interference-free water-filling.
pub fn worst_case_inner(
    sig1_sq: &[f64],
    sig_r_coupled_count: usize,
    gamma_r_bar: &[f64],
    p_src: f64,
    t_bound: f64,
    tol: f64,
    max_iter: usize,
) -> Result<WorstCaseSolution> {
    check_vec("sig1_sq", sig1_sq)?;
    check_vec("gamma_r_bar", gamma_r_bar)?;
    if !(p_src > 0.0) {
        return Err(Error::InvalidInput(format!(
            "source budget {p_src} must be > 0"
        )));
    }
    if !(t_bound >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "interference budget {t_bound} must be >= 0"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol {tol} must be > 0")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be >= 1".into()));
    }
    let d = sig1_sq.len();
    if gamma_r_bar.len() > d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: gamma_r_bar.len(),
        });
    }
    let lev: Vec<f64> = (0..d)
        .map(|i| {
            if i < sig_r_coupled_count {
                gamma_r_bar.get(i).copied().unwrap_or(0.0)
            } else {
                0.0
            }
        })
        .collect();

    let clean = wf_or_silent(sig1_sq, p_src)?;
    if t_bound <= 0.0 || lev.iter().all(|l| *l <= 0.0) {
        let rate = scalar_fd_sr_rate(sig1_sq, &clean.powers, &lev, &vec![0.0; d])?;
        return Ok(WorstCaseSolution {
            sigr_sq: vec![0.0; d],
            water_level_si: 0.0,
            gamma_s: clean.powers,
            rate_sr: rate,
            converged: true,
        });
    }

    let mut gamma_s = clean.powers;
    let mut sr_prev = vec![0.0; d];
    let mut last: Option<Candidate> = None;
    let mut best: Option<Candidate> = None;
    let mut converged = false;
    for _ in 0..max_iter {
        let (sigr_sq, tau_si) = adversary_response(sig1_sq, &lev, &gamma_s, t_bound)?;
        let cand = respond(sig1_sq, &lev, p_src, sigr_sq, tau_si)?;
        gamma_s = cand.gamma_s.clone();
        let sr = amplitudes(&cand.sigr_sq);
        let step = l2_dist(&sr, &sr_prev);
        if best.as_ref().is_none_or(|b| cand.rate < b.rate) {
            best = Some(cand.clone());
        }
        last = Some(cand);
        if step <= tol {
            converged = true;
            break;
        }
        sr_prev = sr;
    }
    // converged: the fixed point itself; otherwise the harshest iterate seen
    let mut pick = if converged { last } else { best }.expect("max_iter >= 1");
    for profile in screening_profiles(d, sig_r_coupled_count, &lev, t_bound) {
        let cand = respond(sig1_sq, &lev, p_src, profile, 0.0)?;
        if cand.rate < pick.rate {
            pick = cand;
        }
    }
    Ok(WorstCaseSolution {
        sigr_sq: pick.sigr_sq,
        water_level_si: pick.tau_si,
        gamma_s: pick.gamma_s,
        rate_sr: pick.rate,
        converged,
    })
}

/// Exhaustive grid oracle for the worst case, tractable up to 3 streams.
///
/// Enumerates RSI profiles on the full-budget face (the objective only falls
/// as any sigma_r grows, so the minimum spends everything) and lets the
/// source water-fill against each profile. `water_level_si` is reported as 0:
/// a grid point is not a water-filling response, so no level is associated.
pub fn brute_force_worst_case(
    sig1_sq: &[f64],
    gamma_r_bar: &[f64],
    p_src: f64,
    t_bound: f64,
    grid_points: usize,
) -> Result<WorstCaseSolution> {
    check_vec("sig1_sq", sig1_sq)?;
    check_vec("gamma_r_bar", gamma_r_bar)?;
    if !(p_src > 0.0) {
        return Err(Error::InvalidInput(format!(
            "source budget {p_src} must be > 0"
        )));
    }
    if !(t_bound >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "interference budget {t_bound} must be >= 0"
        )));
    }
    let d = sig1_sq.len();
    if d > 3 {
        return Err(Error::UnsupportedSize { streams: d });
    }
    if d == 0 {
        return Err(Error::InvalidInput("need at least one stream".into()));
    }
    if grid_points < 100 {
        return Err(Error::InvalidInput(format!(
            "grid_points {grid_points} must be >= 100"
        )));
    }
    let mut lev = vec![0.0; d];
    if gamma_r_bar.len() > d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: gamma_r_bar.len(),
        });
    }
    lev[..gamma_r_bar.len()].copy_from_slice(gamma_r_bar);

    let mut best: Option<Candidate> = None;
    let mut consider = |sigr_sq: Vec<f64>| -> Result<()> {
        let cand = respond(sig1_sq, &lev, p_src, sigr_sq, 0.0)?;
        if best.as_ref().is_none_or(|b| cand.rate < b.rate) {
            best = Some(cand);
        }
        Ok(())
    };

    if t_bound <= 0.0 {
        consider(vec![0.0; d])?;
    } else {
        match d {
            1 => consider(vec![t_bound])?,
            2 => {
                let n = grid_points - 1;
                for i in 0..=n {
                    let a = t_bound * i as f64 / n as f64;
                    consider(vec![a, t_bound - a])?;
                }
            }
            _ => {
                // largest per-edge resolution whose triangular grid stays
                // within the requested point count
                let mut n = 1usize;
                while (n + 2) * (n + 3) / 2 <= grid_points {
                    n += 1;
                }
                for i in 0..=n {
                    for j in 0..=(n - i) {
                        let a = t_bound * i as f64 / n as f64;
                        let b = t_bound * j as f64 / n as f64;
                        // rounding can push the dependent coordinate barely
                        // below zero on the far edge
                        consider(vec![a, b, (t_bound - a - b).max(0.0)])?;
                    }
                }
            }
        }
    }
    let pick = best.expect("grid is never empty");
    Ok(WorstCaseSolution {
        sigr_sq: pick.sigr_sq,
        water_level_si: 0.0,
        gamma_s: pick.gamma_s,
        rate_sr: pick.rate,
        converged: true,
    })
}

/// Deterministic adversary candidates screened at each design iterate:
/// full-budget vertices, the uniform split, and coarse two-stream mixes on
/// the strongest pair of coupled streams.
fn screening_profiles(d: usize, coupled: usize, lev: &[f64], t_bound: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if t_bound <= 0.0 {
        return out;
    }
    let active: Vec<usize> = (0..coupled.min(d)).filter(|&i| lev[i] > 0.0).collect();
    if active.is_empty() {
        return out;
    }
    for &j in &active {
        let mut v = vec![0.0; d];
        v[j] = t_bound;
        out.push(v);
    }
    if active.len() > 1 {
        let share = t_bound / active.len() as f64;
        let mut v = vec![0.0; d];
        for &j in &active {
            v[j] = share;
        }
        out.push(v);
        let (a, b) = (active[0], active[1]);
        for i in 1..SCREEN_MIX_STEPS {
            let f = i as f64 / SCREEN_MIX_STEPS as f64;
            let mut v = vec![0.0; d];
            v[a] = t_bound * f;
            v[b] = t_bound * (1.0 - f);
            out.push(v);
        }
    }
    out
}

/// Full robust design: relay budget back-off around the worst-case inner game.
///
/// Per iterate l the relay water-fills its current budget, the coupled
/// leverage is the power of its dominant transmit mode replicated across the
/// streams both links share, and the inner game plus a deterministic
/// candidate screen determine the guaranteed source-relay rate. The iterate
/// maximizing min(R_sr, R_rd) over the whole trace is returned.
pub fn robust_design(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    cfg: &SystemConfig,
    shrink_c: f64,
    outer_tol: f64,
    inner_tol: f64,
    max_outer: usize,
) -> Result<RobustDesignResult> {
    cfg.validate()?;
    if cfg.mode != DuplexMode::FullDuplex {
        return Err(Error::InvalidInput(
            "robust_design requires full-duplex mode".into(),
        ));
    }
    if !(0.9..1.0).contains(&shrink_c) {
        return Err(Error::InvalidInput(format!(
            "shrink factor {shrink_c} must lie in [0.9, 1)"
        )));
    }
    if !(outer_tol > 0.0) || !(inner_tol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be > 0".into()));
    }
    if max_outer == 0 {
        return Err(Error::InvalidInput("max_outer must be >= 1".into()));
    }
    if h1.nrows() != cfg.k_rx || h1.ncols() != cfg.m_src {
        return Err(Error::InvalidInput(format!(
            "h1 is {}x{}, expected {}x{}",
            h1.nrows(),
            h1.ncols(),
            cfg.k_rx,
            cfg.m_src
        )));
    }
    if h2.nrows() != cfg.n_dst || h2.ncols() != cfg.k_tx {
        return Err(Error::InvalidInput(format!(
            "h2 is {}x{}, expected {}x{}",
            h2.nrows(),
            h2.ncols(),
            cfg.n_dst,
            cfg.k_tx
        )));
    }

    let t1 = svd(h1)?;
    let t2 = svd(h2)?;
    let sig1_sq = t1.gains();
    let sig2_sq = t2.gains();
    let dof_sr = sig1_sq.len();
    let dof_rd = sig2_sq.len();
    let coupled = cfg.m_src.min(cfg.k_tx).min(dof_sr).min(dof_rd);

    struct BestIterate {
        r_min: f64,
        r_sr: f64,
        r_rd: f64,
        gamma_s: Vec<f64>,
        gamma_r: Vec<f64>,
        sigr_sq: Vec<f64>,
        budget: f64,
    }

    let mut trace = Vec::new();
    let mut best: Option<BestIterate> = None;
    let mut budget = cfg.p_relay;
    let mut r_prev: Option<f64> = None;
    for l in 0..max_outer {
        let gamma_r = wf_or_silent(&sig2_sq, budget)?.powers;
        // Worst-case coupling: a rank-one interferer can point the relay's
        // dominant-mode power at every source stream at once, so each coupled
        // stream faces the dominant power, not its index-matched share.
        let lead = gamma_r.first().copied().unwrap_or(0.0);
        let lev: Vec<f64> = (0..dof_sr)
            .map(|i| if i < coupled { lead } else { 0.0 })
            .collect();
        let gamma_r_bar: Vec<f64> = lev[..coupled].to_vec();
        let worst = worst_case_inner(
            &sig1_sq,
            coupled,
            &gamma_r_bar,
            cfg.p_src,
            cfg.t_bound,
            inner_tol,
            DEFAULT_MAX_INNER,
        )?;
        let r_sr = worst.rate_sr;
        let r_rd = rate_of(&sig2_sq, &gamma_r);
        let r_min = r_sr.min(r_rd);
        trace.push(OuterRecord {
            iteration: l,
            relay_budget: budget,
            r_sr,
            r_rd,
            r_min,
        });
        if best.as_ref().is_none_or(|b| r_min > b.r_min) {
            best = Some(BestIterate {
                r_min,
                r_sr,
                r_rd,
                gamma_s: worst.gamma_s,
                gamma_r,
                sigr_sq: worst.sigr_sq,
                budget,
            });
        }
        if let Some(prev) = r_prev {
            if (r_min - prev).abs() <= outer_tol {
                break;
            }
        }
        r_prev = Some(r_min);
        budget *= shrink_c;
    }

    let b = best.expect("max_outer >= 1");
    Ok(RobustDesignResult {
        gamma_s: b.gamma_s,
        gamma_r: b.gamma_r,
        sigr_sq: b.sigr_sq,
        relay_budget_used: b.budget,
        rates: RatePair::full_duplex(b.r_sr, b.r_rd),
        trace,
        adversary_is_lower_bound: dof_rd < dof_sr,
    })
}

/// Genie-aided upper bound: the end-to-end rate attainable when the RSI
/// realization is revealed to the transmitters before they allocate power.
///
/// The interference takes the canonical aligned form (receive directions of
/// the source link, transmit directions of the relay link) with singular
/// values `sqrt(sigr_sq)`. The relay sweeps the same geometric budget
/// back-off ladder the robust design uses; the source whitens the known
/// interference and water-fills the effective channel. Since the informed
/// source can only do better than one designed against the whole budget
/// ball, the robust guarantee never exceeds this bound at equal `sigr_sq`.
pub fn known_rsi_upper_bound(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    cfg: &SystemConfig,
    sigr_sq: &[f64],
) -> Result<f64> {
    use nalgebra::Complex;
    cfg.validate()?;
    check_vec("sigr_sq", sigr_sq)?;
    let t1 = svd(h1)?;
    let t2 = svd(h2)?;
    if sigr_sq.len() > t1.singular_values.len().min(t2.singular_values.len()) {
        return Err(Error::LengthMismatch {
            expected: t1.singular_values.len().min(t2.singular_values.len()),
            got: sigr_sq.len(),
        });
    }
    let sig2_sq = t2.gains();
    let sigma_r: Vec<f64> = sigr_sq.iter().map(|x| x.sqrt()).collect();
    let hbar = crate::rates::aligned_rsi(&t1, &t2, &sigma_r)?;

    let mut best = f64::NEG_INFINITY;
    let mut budget = cfg.p_relay;
    for _ in 0..DEFAULT_MAX_OUTER {
        let gamma_r = wf_or_silent(&sig2_sq, budget)?.powers;
        let q_r = crate::channel::covariance_from_modes(&t2.right, &gamma_r)?;
        // whiten the known interference, then water-fill what remains
        let c = &hbar * &q_r * hbar.adjoint();
        let n = c.nrows();
        let herm = (&c + c.adjoint()) * Complex::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let mut c_inv_sqrt = ComplexMatrix::zeros(n, n);
        for (i, lam) in eig.eigenvalues.iter().enumerate() {
            let scale = Complex::new(1.0 / (1.0 + lam.max(0.0)).sqrt(), 0.0);
            let col = eig.eigenvectors.column(i);
            c_inv_sqrt += &col * col.adjoint() * scale;
        }
        let effective = &c_inv_sqrt * h1;
        let te = svd(&effective)?;
        let alloc = wf_or_silent(&te.gains(), cfg.p_src)?;
        let q_s = crate::channel::covariance_from_modes(&te.right, &alloc.powers)?;
        let r_sr = crate::rates::fd_sr_rate(h1, &q_s, &hbar, &q_r)?;
        let r_rd = rate_of(&sig2_sq, &gamma_r);
        best = best.max(r_sr.min(r_rd));
        budget *= DEFAULT_SHRINK;
    }
    Ok(best)
}
