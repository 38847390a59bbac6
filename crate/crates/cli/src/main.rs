//! `thresim`: run, sweep, verify and re-analyse threshold-agent markets.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 verification
//! failure.

mod config;
mod output;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thresim_core::rng::replicate_seed;
use thresim_core::stats::{acf, default_fit_range, fit_exponential_decay, kurtosis_range, period_correlation, periodized_stats};
use thresim_core::theory::{regime_check, RegimeVerdict, DEFAULT_REGIME_FACTOR};
use thresim_core::{run, ReturnsSeries};

use config::{canonical_key, RunConfig};
use output::{fmt_opt, CsvFile};

#[derive(Parser)]
#[command(name = "thresim", version, about = "Threshold-agent market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write returns, statistics and a manifest.
    Run(ConfigArgs),
    /// Repeat `run` over a list of values for one parameter.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// One of s, beta, n, D, lambda.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; the beta axis accepts `inf`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Check the simulator against its analytic oracles and exact identities.
    Verify(ConfigArgs),
    /// Recompute statistics from an existing returns.csv.
    Stats {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long = "out", value_name = "DIR")]
    output_dir: Option<String>,
    #[arg(long, visible_alias = "n")]
    n_agents: Option<String>,
    #[arg(long, visible_alias = "D")]
    noise_std: Option<String>,
    #[arg(long, visible_alias = "lambda")]
    market_depth: Option<String>,
    #[arg(long, visible_alias = "s")]
    update_prob: Option<String>,
    #[arg(long, visible_alias = "beta")]
    choice_intensity: Option<String>,
    #[arg(long, visible_alias = "assets")]
    n_assets: Option<String>,
    #[arg(long, visible_alias = "T")]
    horizon: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// coupled | independent
    #[arg(long)]
    coupling: Option<String>,
    /// zero | const:C | uniform | uniform:A:B
    #[arg(long)]
    threshold_init: Option<String>,
    /// independent | identical
    #[arg(long)]
    asset_init: Option<String>,
    #[arg(long)]
    emit_signals: Option<String>,
    #[arg(long)]
    period_len: Option<String>,
    #[arg(long)]
    max_lag: Option<String>,
    #[arg(long)]
    vol_window: Option<String>,
    #[arg(long)]
    bins: Option<String>,
    #[arg(long)]
    emit_density: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    /// Any config key, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_seed_env()?;
        let flags = [
            ("output_dir", &self.output_dir),
            ("n_agents", &self.n_agents),
            ("noise_std", &self.noise_std),
            ("market_depth", &self.market_depth),
            ("update_prob", &self.update_prob),
            ("choice_intensity", &self.choice_intensity),
            ("n_assets", &self.n_assets),
            ("horizon", &self.horizon),
            ("burn_in", &self.burn_in),
            ("seed", &self.seed),
            ("coupling", &self.coupling),
            ("threshold_init", &self.threshold_init),
            ("asset_init", &self.asset_init),
            ("emit_signals", &self.emit_signals),
            ("period_len", &self.period_len),
            ("max_lag", &self.max_lag),
            ("vol_window", &self.vol_window),
            ("bins", &self.bins),
            ("emit_density", &self.emit_density),
            ("replicates", &self.replicates),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.sets {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set `{kv}`: expected KEY=VALUE"))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn warn_regime(cfg: &RunConfig) {
    let r = regime_check(&cfg.params, DEFAULT_REGIME_FACTOR);
    if r.verdict != RegimeVerdict::Realistic {
        eprintln!(
            "warning: parameter regime {} (D/g(1/n) = {}, g(1)/D = {}, factor {})",
            r.verdict, r.lower_ratio, r.upper_ratio, DEFAULT_REGIME_FACTOR
        );
    }
}

/// Simulates `cfg` into `cfg.output_dir` and returns the series.
fn execute(cfg: &RunConfig) -> Result<ReturnsSeries> {
    let start = Instant::now();
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let series = run(&cfg.params, &cfg.init)?;
    let mut files = vec![output::write_returns(dir, &series, cfg.emit_signals)?];
    files.extend(output::write_analysis(dir, &series.returns, &cfg.stats)?);
    output::write_manifest(dir, cfg, start.elapsed(), &files)?;
    Ok(series)
}

/// Replicate `k` of `cfg`: replicate 0 keeps the configured seed.
fn replicate(cfg: &RunConfig, k: usize, dir: PathBuf) -> RunConfig {
    let mut c = cfg.clone();
    if k > 0 {
        c.params.seed = replicate_seed(cfg.params.seed, k as u64);
    }
    c.replicates = 1;
    c.output_dir = dir;
    c
}

fn cmd_run(cfg: RunConfig) -> Result<()> {
    warn_regime(&cfg);
    if cfg.replicates == 1 {
        execute(&cfg)?;
    } else {
        let runs: Vec<RunConfig> = (0..cfg.replicates)
            .map(|k| replicate(&cfg, k, cfg.output_dir.join(format!("rep{k}"))))
            .collect();
        runs.par_iter().map(execute).collect::<Result<Vec<_>>>()?;
    }
    println!("wrote {}", cfg.output_dir.display());
    Ok(())
}

const SWEEP_AXES: [&str; 5] = ["s", "beta", "n", "D", "lambda"];

struct SweepRow {
    value: String,
    replicate: usize,
    seed: u64,
    kurtosis_range: Vec<Option<f64>>,
    tau: Vec<Option<f64>>,
    mean_abs_v: Option<f64>,
    corr: Vec<Option<f64>>,
}

fn abs_return_tau(r: &[f64], s: f64) -> Option<f64> {
    if !(s > 0.0) {
        return None;
    }
    let (lo, hi) = default_fit_range(s);
    let abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    let a = acf(&abs, hi).ok()?;
    fit_exponential_decay(&a, lo, hi).ok().map(|f| f.tau)
}

fn summarize(value: &str, k: usize, cfg: &RunConfig, series: &ReturnsSeries) -> SweepRow {
    let period = cfg.stats.period_len;
    let kurtosis_range = series
        .returns
        .iter()
        .map(|r| periodized_stats(r, period).ok().and_then(|p| kurtosis_range(&p)))
        .collect();
    let tau = series.returns.iter().map(|r| abs_return_tau(r, cfg.params.update_prob)).collect();
    let (mean_abs_v, corr) = if series.returns.len() == 2 && !series.is_empty() {
        let corr = period_correlation(&series.returns[0], &series.returns[1], period).unwrap_or_default();
        (Some(series.mean_abs_fitness()), corr)
    } else {
        (None, Vec::new())
    };
    SweepRow { value: value.to_string(), replicate: k, seed: cfg.params.seed, kurtosis_range, tau, mean_abs_v, corr }
}

fn cmd_sweep(base: RunConfig, axis: &str, values: &[String]) -> Result<()> {
    if !SWEEP_AXES.contains(&axis) {
        bail!("unknown sweep axis `{axis}` (expected one of {})", SWEEP_AXES.join(", "));
    }
    let mut jobs = Vec::new();
    for value in values {
        let mut cfg = base.clone();
        cfg.set(canonical_key(axis), value)?;
        cfg.validate().with_context(|| format!("{axis}={value}"))?;
        warn_regime(&cfg);
        for k in 0..base.replicates {
            let dir = base.output_dir.join(format!("{axis}={value}")).join(format!("rep{k}"));
            jobs.push((value.clone(), k, replicate(&cfg, k, dir)));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(value, k, cfg)| execute(cfg).map(|s| summarize(value, *k, cfg, &s)))
        .collect::<Result<Vec<_>>>()?;

    let n_assets = base.params.n_assets;
    let n_periods = if n_assets == 2 { base.params.horizon / base.stats.period_len } else { 0 };
    let mut cols: Vec<String> = ["axis", "value", "replicate", "seed"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=n_assets).map(|a| format!("kurtosis_range_r{a}")));
    cols.extend((1..=n_assets).map(|a| format!("tau_abs_r{a}")));
    cols.push("mean_abs_v".into());
    cols.extend((1..=n_periods).map(|p| format!("corr_p{p}")));
    let mut f = CsvFile::create(&base.output_dir, "sweep_summary.csv", &cols)?;
    for r in rows {
        let mut row = vec![axis.to_string(), r.value, r.replicate.to_string(), r.seed.to_string()];
        row.extend(r.kurtosis_range.into_iter().map(fmt_opt));
        row.extend(r.tau.into_iter().map(fmt_opt));
        row.push(fmt_opt(r.mean_abs_v));
        row.extend((0..n_periods).map(|p| fmt_opt(r.corr.get(p).copied().flatten())));
        f.row(&row)?;
    }
    let path = f.finish()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_verify(cfg: RunConfig) -> Result<ExitCode> {
    let checks = verify::run_checks(&cfg)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut report = String::new();
    for c in &checks {
        report.push_str(&format!("{c}\n"));
    }
    report.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;
    let path = cfg.output_dir.join("verify_report.txt");
    fs::write(&path, &report).with_context(|| format!("cannot write {}", path.display()))?;
    print!("{report}");
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_stats(args: &ConfigArgs, input: &Path) -> Result<()> {
    let cfg = args.resolve()?;
    let dir = match &args.output_dir {
        Some(d) => PathBuf::from(d),
        None => input.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    let returns = output::read_returns(input)?;
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    output::write_analysis(&dir, &returns, &cfg.stats)?;
    println!("wrote statistics for {} steps to {}", returns[0].len(), dir.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => cmd_run(args.resolve()?)?,
        Command::Sweep { cfg, axis, values } => cmd_sweep(cfg.resolve()?, &axis, &values)?,
        Command::Verify(args) => return cmd_verify(args.resolve()?),
        Command::Stats { cfg, input } => cmd_stats(&cfg, &input)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
