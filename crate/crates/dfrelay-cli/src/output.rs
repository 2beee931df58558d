//! CSV emission. Every file opens with one comment line carrying the config,
//! trial count, master seed, child-seed scheme, and code version, so a file
//! is self-describing and two runs with identical inputs are byte-identical.

use dfrelay::{SweepReport, SystemConfig};
use std::io;
use std::path::Path;

const SEED_SCHEME: &str = "chacha8(splitmix64(master+(k+1)*0x9E3779B97F4A7C15))";

fn header_comment(cfg: &SystemConfig, trials: usize, seed: u64) -> String {
    format!(
        "# dfrelay v{} | m_src={} k_tx={} k_rx={} n_dst={} p_src={} p_relay={} | trials={} | seed={} | child_seed={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.m_src,
        cfg.k_tx,
        cfg.k_rx,
        cfg.n_dst,
        cfg.p_src,
        cfg.p_relay,
        trials,
        seed,
        SEED_SCHEME
    )
}

pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> io::Result<()> {
    let mut s = header_comment(&report.config, report.l_trials, report.master_seed);
    s.push_str("t_over_p,mean_hd,se_hd,mean_fd,se_fd\n");
    for (i, t) in report.t_over_p_values.iter().enumerate() {
        s.push_str(&format!(
            "{:.12},{:.12},{:.12},{:.12},{:.12}\n",
            t,
            report.mean_rates_hd[i],
            report.std_errors_hd[i],
            report.mean_rates_fd[i],
            report.std_errors_fd[i]
        ));
    }
    std::fs::write(path, s)
}

/// Per-channel guarantee curve with its genie upper bound (one realization,
/// not an average): rows of (t_over_p, worst-case rate, known-RSI bound).
pub fn write_curve_csv(
    path: &Path,
    cfg: &SystemConfig,
    seed: u64,
    rows: &[(f64, f64, f64)],
) -> io::Result<()> {
    let mut s = header_comment(cfg, 1, seed);
    s.push_str("t_over_p,rate_wc,rate_ub\n");
    for (t, wc, ub) in rows {
        s.push_str(&format!("{t:.12},{wc:.12},{ub:.12}\n"));
    }
    std::fs::write(path, s)
}
