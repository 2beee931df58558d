//! Flat `key = value` config files. `#` starts a comment line, blank lines
//! are skipped, keys may appear once. Keys mirror the library's system
//! config plus the design knobs; `t_over_p` holds a comma-separated list.

use dfrelay::{
    DuplexMode, SystemConfig, DEFAULT_INNER_TOL, DEFAULT_MAX_OUTER, DEFAULT_OUTER_TOL,
    DEFAULT_SHRINK,
};
use std::collections::HashMap;
use std::path::Path;

const KNOWN_KEYS: &[&str] = &[
    "m_src", "k_tx", "k_rx", "n_dst", "p_src", "p_relay", "t_bound", "t_over_p", "shrink_c",
    "outer_tol", "inner_tol", "max_outer",
];

pub struct FileConfig {
    values: HashMap<String, String>,
}

/// Design-loop knobs with library defaults filled in.
pub struct Knobs {
    pub shrink_c: f64,
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub max_outer: usize,
}

pub fn parse_float_list(s: &str) -> Result<Vec<f64>, String> {
    let body = s.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>().map_err(|e| format!("'{x}': {e}"))
        })
        .collect()
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", lineno + 1));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key '{key}'", lineno + 1));
            }
        }
        Ok(FileConfig { values })
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self
            .values
            .get(key)
            .ok_or_else(|| format!("config key '{key}' is required"))?;
        raw.parse()
            .map_err(|e| format!("config key '{key}' = '{raw}': {e}"))
    }

    fn optional<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|e| format!("config key '{key}' = '{raw}': {e}")),
        }
    }

    pub fn system_config(&self, mode: DuplexMode) -> Result<SystemConfig, String> {
        let cfg = SystemConfig {
            m_src: self.required("m_src")?,
            k_tx: self.required("k_tx")?,
            k_rx: self.required("k_rx")?,
            n_dst: self.required("n_dst")?,
            p_src: self.required("p_src")?,
            p_relay: self.required("p_relay")?,
            t_bound: self.optional("t_bound", 0.0)?,
            mode,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn t_over_p_list(&self) -> Result<Vec<f64>, String> {
        let raw = self
            .values
            .get("t_over_p")
            .ok_or("config key 't_over_p' is required for this command")?;
        parse_float_list(raw).map_err(|e| format!("config key 't_over_p': {e}"))
    }

    pub fn knobs(&self) -> Result<Knobs, String> {
        Ok(Knobs {
            shrink_c: self.optional("shrink_c", DEFAULT_SHRINK)?,
            outer_tol: self.optional("outer_tol", DEFAULT_OUTER_TOL)?,
            inner_tol: self.optional("inner_tol", DEFAULT_INNER_TOL)?,
            max_outer: self.optional("max_outer", DEFAULT_MAX_OUTER)?,
        })
    }
}
