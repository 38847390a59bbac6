//! Flat `key=value` run configuration.
//!
//! Precedence, lowest first: built-in defaults, config file, `THRESIM_SEED`,
//! command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use thresim_core::{InitPolicy, MarketParams};

pub const SEED_ENV: &str = "THRESIM_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct StatsOptions {
    pub period_len: usize,
    pub max_lag: usize,
    pub vol_window: usize,
    pub bins: usize,
    pub emit_density: bool,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions { period_len: 10_000, max_lag: 200, vol_window: 500, bins: 101, emit_density: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: MarketParams,
    pub init: InitPolicy,
    pub output_dir: PathBuf,
    pub emit_signals: bool,
    pub stats: StatsOptions,
    pub replicates: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: MarketParams::two_asset_reference(),
            init: InitPolicy::default(),
            output_dir: PathBuf::from("thresim-out"),
            emit_signals: true,
            stats: StatsOptions::default(),
            replicates: 1,
        }
    }
}

/// Short names accepted in place of the canonical keys.
const ALIASES: &[(&str, &str)] = &[
    ("n", "n_agents"),
    ("D", "noise_std"),
    ("lambda", "market_depth"),
    ("s", "update_prob"),
    ("beta", "choice_intensity"),
    ("assets", "n_assets"),
    ("T", "horizon"),
];

pub fn canonical_key(key: &str) -> &str {
    ALIASES.iter().find(|(a, _)| *a == key).map_or(key, |(_, k)| k)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| anyhow::anyhow!("invalid value `{value}` for `{key}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("invalid value `{value}` for `{key}`: expected true or false"),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let p = &mut self.params;
        match canonical_key(key.trim()) {
            "n_agents" => p.n_agents = parse("n_agents", value)?,
            "noise_std" => p.noise_std = parse("noise_std", value)?,
            "market_depth" => p.market_depth = parse("market_depth", value)?,
            "update_prob" => p.update_prob = parse("update_prob", value)?,
            "choice_intensity" => p.choice_intensity = parse("choice_intensity", value)?,
            "n_assets" => p.n_assets = parse("n_assets", value)?,
            "horizon" => p.horizon = parse("horizon", value)?,
            "burn_in" => p.burn_in = parse("burn_in", value)?,
            "seed" => p.seed = parse("seed", value)?,
            "coupling" => p.coupling = parse("coupling", value)?,
            "threshold_init" => self.init.thresholds = parse("threshold_init", value)?,
            "asset_init" => self.init.assets = parse("asset_init", value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "emit_signals" => self.emit_signals = parse_bool("emit_signals", value)?,
            "period_len" => self.stats.period_len = parse("period_len", value)?,
            "max_lag" => self.stats.max_lag = parse("max_lag", value)?,
            "vol_window" => self.stats.vol_window = parse("vol_window", value)?,
            "bins" => self.stats.bins = parse("bins", value)?,
            "emit_density" => self.stats.emit_density = parse_bool("emit_density", value)?,
            "replicates" => self.replicates = parse("replicates", value)?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("{origin}:{}: expected key=value", i + 1))?;
            self.set(k, v).with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.set("seed", &v).with_context(|| format!("from {SEED_ENV}"))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.init.validate()?;
        let s = &self.stats;
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        if s.period_len < 4 {
            bail!("period_len must be at least 4");
        }
        if s.vol_window < 2 {
            bail!("vol_window must be at least 2");
        }
        if s.bins < 2 {
            bail!("bins must be at least 2");
        }
        Ok(())
    }

    /// Canonical `key=value` echo; feeding it back through `apply_text`
    /// reproduces this configuration.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let s = &self.stats;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("n_agents", p.n_agents.to_string());
        line("noise_std", p.noise_std.to_string());
        line("market_depth", p.market_depth.to_string());
        line("update_prob", p.update_prob.to_string());
        line("choice_intensity", p.choice_intensity.to_string());
        line("n_assets", p.n_assets.to_string());
        line("horizon", p.horizon.to_string());
        line("burn_in", p.burn_in.to_string());
        line("seed", p.seed.to_string());
        line("coupling", p.coupling.to_string());
        line("threshold_init", self.init.thresholds.to_string());
        line("asset_init", self.init.assets.to_string());
        line("output_dir", self.output_dir.display().to_string());
        line("emit_signals", self.emit_signals.to_string());
        line("period_len", s.period_len.to_string());
        line("max_lag", s.max_lag.to_string());
        line("vol_window", s.vol_window.to_string());
        line("bins", s.bins.to_string());
        line("emit_density", s.emit_density.to_string());
        line("replicates", self.replicates.to_string());
        out
    }
}
