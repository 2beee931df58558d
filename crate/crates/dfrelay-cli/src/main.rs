//! Command-line front end: single designs, Monte-Carlo sweeps, threshold
//! search, antenna-split studies, and oracle cross-checks.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or config), 2 numerical
//! failure (missing HD/FD crossing, oracle gap beyond the gate).

mod config;
mod output;

use clap::{Parser, Subcommand};
use config::FileConfig;
use dfrelay::{
    brute_force_worst_case, child_seed, find_threshold, hd_optimal, known_rsi_upper_bound,
    robust_design, sample_channel, svd, sweep_t, worst_case_inner, antenna_split_study,
    DuplexMode, Error as LibError, SystemConfig,
};
use rand::{RngExt as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "dfrelay",
    version,
    about = "Robust transceiver design for a MIMO decode-and-forward relay",
    after_help = "Config files are flat `key = value` lines; `#` starts a comment line.\n\
    Recognized keys: m_src, k_tx, k_rx, n_dst, p_src, p_relay, t_bound, t_over_p\n\
    (comma-separated list), shrink_c, outer_tol, inner_tol, max_outer.\n\
    All randomness flows from --seed; every command requires it."
)]
struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    /// Results are identical for any worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Half-duplex water-filling design on one seeded channel draw.
    Hd {
        /// Config file with antenna counts and budgets.
        #[arg(long)]
        config: PathBuf,
        /// Master seed; the channel pair is trial 0 of this stream.
        #[arg(long)]
        seed: u64,
    },
    /// Robust full-duplex design on one seeded channel draw. With --out and
    /// a t_over_p list in the config, writes the per-channel guarantee curve
    /// and its genie upper bound as CSV (columns t_over_p,rate_wc,rate_ub).
    FdRobust {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Override the interference budget as a fraction of p_src.
        #[arg(long)]
        t_over_p: Option<f64>,
        /// Write the uncertainty curve here instead of printing one design.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo uncertainty sweep; emits CSV with columns
    /// t_over_p,mean_hd,se_hd,mean_fd,se_fd.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bisection for the uncertainty level where average FD falls to the
    /// average HD rate; prints T*/P.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        /// Lower bracket, as T/P. Mean FD here must exceed mean HD.
        #[arg(long)]
        tlo: f64,
        /// Upper bracket, as T/P. Mean FD here must fall below mean HD.
        #[arg(long)]
        thi: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Stop when the rate gap or the bracket width drops below this.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
    },
    /// One sweep per relay antenna split (fixed source/destination arrays).
    SplitStudy {
        /// Source antennas.
        #[arg(long)]
        m: usize,
        /// Destination antennas.
        #[arg(long)]
        n: usize,
        /// Total relay antennas each split must sum to.
        #[arg(long)]
        total: usize,
        /// Comma-separated K_t:K_r pairs, e.g. 4:8,6:6,8:4.
        #[arg(long)]
        splits: String,
        /// Comma-separated T/P values.
        #[arg(long)]
        t_over_p: String,
        #[arg(long, default_value_t = 5.0)]
        p_src: f64,
        #[arg(long, default_value_t = 5.0)]
        p_relay: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// CSV per split is written to <out-prefix>_kt<K_t>_kr<K_r>.csv.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Compare the iterative worst-case solver against the exhaustive grid
    /// oracle on random instances; exits 2 if any relative gap exceeds 5%.
    OracleCheck {
        /// Streams per instance (the oracle supports 2 or 3).
        #[arg(long, default_value_t = 2)]
        streams: usize,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        /// Simplex grid points for the oracle.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{e}");
            return 1;
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("--workers must be >= 1");
            return 1;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("failed to size worker pool: {e}");
            return 1;
        }
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(CmdError::Usage(msg)) => {
            eprintln!("{msg}");
            1
        }
        Err(CmdError::Numerical(msg)) => {
            eprintln!("{msg}");
            2
        }
    }
}

enum CmdError {
    Usage(String),
    Numerical(String),
}

impl From<LibError> for CmdError {
    fn from(e: LibError) -> Self {
        CmdError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Numerical(format!("i/o error: {e}"))
    }
}

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

/// The channel pair every single-design command works on: trial 0 of the
/// master stream, identical to the Monte-Carlo harness's first draw.
fn draw_pair(
    cfg: &SystemConfig,
    seed: u64,
) -> (dfrelay::ComplexMatrix, dfrelay::ComplexMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0));
    let h1 = sample_channel(cfg.k_rx, cfg.m_src, &mut rng);
    let h2 = sample_channel(cfg.n_dst, cfg.k_tx, &mut rng);
    (h1, h2)
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", items.join(", "))
}

fn dispatch(cmd: Command) -> Result<(), CmdError> {
    match cmd {
        Command::Hd { config, seed } => {
            let fc = FileConfig::load(&config).map_err(usage)?;
            let cfg = fc.system_config(DuplexMode::HalfDuplex).map_err(usage)?;
            let (h1, h2) = draw_pair(&cfg, seed);
            let d = hd_optimal(&h1, &h2, cfg.p_src, cfg.p_relay)?;
            println!("r_hd = {:.12}", d.rate.r_end2end);
            println!("alloc_src = {}", fmt_vec(&d.alloc_src.powers));
            println!("alloc_relay = {}", fmt_vec(&d.alloc_relay.powers));
            Ok(())
        }
        Command::FdRobust {
            config,
            seed,
            t_over_p,
            out,
        } => {
            let fc = FileConfig::load(&config).map_err(usage)?;
            let mut cfg = fc.system_config(DuplexMode::FullDuplex).map_err(usage)?;
            if let Some(t) = t_over_p {
                if !(t >= 0.0) {
                    return Err(usage(format!("--t-over-p {t} must be >= 0")));
                }
                cfg.t_bound = t * cfg.p_src;
            }
            let knobs = fc.knobs().map_err(usage)?;
            let (h1, h2) = draw_pair(&cfg, seed);
            match out {
                Some(path) => {
                    let ts = fc.t_over_p_list().map_err(usage)?;
                    let mut rows = Vec::with_capacity(ts.len());
                    for t in &ts {
                        let mut c = cfg.clone();
                        c.t_bound = t * c.p_src;
                        let wc = robust_design(
                            &h1,
                            &h2,
                            &c,
                            knobs.shrink_c,
                            knobs.outer_tol,
                            knobs.inner_tol,
                            knobs.max_outer,
                        )?;
                        let ub = known_rsi_upper_bound(&h1, &h2, &c, &wc.sigr_sq)?;
                        rows.push((*t, wc.rates.r_end2end, ub));
                    }
                    output::write_curve_csv(&path, &cfg, seed, &rows)?;
                    println!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => {
                    let wc = robust_design(
                        &h1,
                        &h2,
                        &cfg,
                        knobs.shrink_c,
                        knobs.outer_tol,
                        knobs.inner_tol,
                        knobs.max_outer,
                    )?;
                    println!("r_worst_case = {:.12}", wc.rates.r_end2end);
                    println!("r_sr = {:.12}", wc.rates.r_sr);
                    println!("r_rd = {:.12}", wc.rates.r_rd);
                    println!("relay_budget_used = {:.12}", wc.relay_budget_used);
                    println!("gamma_s = {}", fmt_vec(&wc.gamma_s));
                    println!("gamma_r = {}", fmt_vec(&wc.gamma_r));
                    println!("sigr_sq = {}", fmt_vec(&wc.sigr_sq));
                    println!("outer_iterations = {}", wc.trace.len());
                    if wc.adversary_is_lower_bound {
                        println!("note: fewer relay-destination streams than source-relay streams; the guarantee bounds adversarial damage from below");
                    }
                }
            }
            Ok(())
        }
        Command::Sweep {
            config,
            trials,
            seed,
            out,
        } => {
            let fc = FileConfig::load(&config).map_err(usage)?;
            let cfg = fc.system_config(DuplexMode::FullDuplex).map_err(usage)?;
            let ts = fc.t_over_p_list().map_err(usage)?;
            let report = sweep_t(&cfg, &ts, trials, seed)?;
            output::write_sweep_csv(&out, &report)?;
            println!("wrote {} rows to {}", ts.len(), out.display());
            Ok(())
        }
        Command::Threshold {
            config,
            tlo,
            thi,
            trials,
            seed,
            tol,
        } => {
            let fc = FileConfig::load(&config).map_err(usage)?;
            let cfg = fc.system_config(DuplexMode::FullDuplex).map_err(usage)?;
            let t = find_threshold(&cfg, tlo, thi, trials, seed, tol)?;
            println!("{t:.12}");
            Ok(())
        }
        Command::SplitStudy {
            m,
            n,
            total,
            splits,
            t_over_p,
            p_src,
            p_relay,
            trials,
            seed,
            out_prefix,
        } => {
            let splits = parse_splits(&splits).map_err(usage)?;
            let ts = config::parse_float_list(&t_over_p)
                .map_err(|e| usage(format!("--t-over-p: {e}")))?;
            let reports =
                antenna_split_study(m, n, total, &splits, &ts, p_src, p_relay, trials, seed)?;
            for report in &reports {
                let path = PathBuf::from(format!(
                    "{}_kt{}_kr{}.csv",
                    out_prefix.display(),
                    report.config.k_tx,
                    report.config.k_rx
                ));
                output::write_sweep_csv(&path, report)?;
                let hd = report.mean_rates_hd.first().copied().unwrap_or(f64::NAN);
                println!(
                    "split K_t={} K_r={}: mean_hd = {:.6}, fd at first point = {:.6} -> {}",
                    report.config.k_tx,
                    report.config.k_rx,
                    hd,
                    report.mean_rates_fd.first().copied().unwrap_or(f64::NAN),
                    path.display()
                );
            }
            Ok(())
        }
        Command::OracleCheck {
            streams,
            instances,
            grid,
            seed,
        } => oracle_check(streams, instances, grid, seed),
    }
}

fn parse_splits(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| format!("split '{pair}' is not K_t:K_r"))?;
            let kt = a.trim().parse::<usize>().map_err(|e| format!("'{a}': {e}"))?;
            let kr = b.trim().parse::<usize>().map_err(|e| format!("'{b}': {e}"))?;
            Ok((kt, kr))
        })
        .collect()
}

/// Random worst-case instances for the solver-vs-oracle comparison. Each
/// instance is reconstructible from its printed child seed: channel gains
/// from a (streams+1) x streams draw, one shared leverage level, and a
/// budget pair drawn log-uniform-ish over practical scales.
fn oracle_check(
    streams: usize,
    instances: usize,
    grid: usize,
    seed: u64,
) -> Result<(), CmdError> {
    if !(2..=3).contains(&streams) {
        return Err(usage(format!("--streams {streams} must be 2 or 3")));
    }
    if instances == 0 {
        return Err(usage("--instances must be >= 1"));
    }
    println!("instance           child_seed  algorithm_rate     oracle_rate   rel_gap");
    let mut worst: f64 = 0.0;
    let mut excess = 0usize;
    for i in 0..instances {
        let child = child_seed(seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(child);
        let h = sample_channel(streams + 1, streams, &mut rng);
        let sig1_sq = svd(&h)?.gains();
        let x: f64 = rng.random_range(0.2..3.0);
        let lev = vec![x; streams];
        let p_src: f64 = rng.random_range(2.0..20.0);
        let t_bound: f64 = rng.random_range(0.02..0.6) * p_src;
        let inner = worst_case_inner(&sig1_sq, streams, &lev, p_src, t_bound, 1e-6, 500)?;
        let oracle = brute_force_worst_case(&sig1_sq, &lev, p_src, t_bound, grid)?;
        let gap = (inner.rate_sr - oracle.rate_sr).abs() / oracle.rate_sr.max(1e-12);
        worst = worst.max(gap);
        if gap > 0.05 {
            excess += 1;
        }
        println!(
            "{i:>8} {child:>20} {:>15.9} {:>15.9} {:>8.4}%",
            inner.rate_sr,
            oracle.rate_sr,
            100.0 * gap
        );
    }
    println!(
        "worst relative gap {:.4}% over {instances} instances ({streams} streams, {grid}-point grid)",
        100.0 * worst
    );
    if excess > 0 {
        return Err(CmdError::Numerical(format!(
            "{excess} instance(s) exceed the 5% oracle gate"
        )));
    }
    Ok(())
}
