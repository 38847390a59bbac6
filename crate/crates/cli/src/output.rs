//! CSV emission and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use thresim_core::rng::RNG_ALGORITHM;
use thresim_core::stats::*;
use thresim_core::ReturnsSeries;

use crate::config::{RunConfig, StatsOptions};

pub const MANIFEST: &str = "manifest.txt";

/// Shortest round-trip decimal; undefined values become empty cells.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f64)
}

pub struct CsvFile {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, header: &[String]) -> Result<Self> {
        let path = dir.join(name);
        let writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        let mut f = CsvFile { path, writer };
        f.row(header)?;
        Ok(f)
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, cells: &[S]) -> Result<()> {
        self.writer
            .write_record(cells)
            .with_context(|| format!("writing {}", self.path.display()))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().with_context(|| format!("writing {}", self.path.display()))?;
        Ok(self.path)
    }
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn per_asset(prefix: &str, n_assets: usize) -> Vec<String> {
    (1..=n_assets).map(|a| format!("{prefix}{a}")).collect()
}

/// `t, r1[, r2][, eps]` with `t` counting recorded steps from 1.
pub fn write_returns(dir: &Path, series: &ReturnsSeries, emit_signals: bool) -> Result<PathBuf> {
    let mut cols = vec!["t".to_string()];
    cols.extend(per_asset("r", series.returns.len()));
    let signals = series.signals.as_ref().filter(|_| emit_signals);
    if signals.is_some() {
        cols.push("eps".into());
    }
    let mut f = CsvFile::create(dir, "returns.csv", &cols)?;
    for t in 0..series.len() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(series.returns.iter().map(|r| fmt_f64(r[t])));
        if let Some(eps) = signals {
            row.push(fmt_f64(eps[t]));
        }
        f.row(&row)?;
    }
    f.finish()
}

/// Reads back the return columns `r1..` of a returns CSV.
pub fn read_returns(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.len() > 1 && h.starts_with('r') && h[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();
    anyhow::ensure!(!cols.is_empty(), "{}: no return columns (r1, r2, ...)", path.display());
    let mut out = vec![Vec::new(); cols.len()];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), line + 2))?;
        for (a, &c) in cols.iter().enumerate() {
            let cell = rec.get(c).unwrap_or("");
            let v: f64 = cell
                .parse()
                .with_context(|| format!("{}: row {}: bad value `{cell}`", path.display(), line + 2))?;
            out[a].push(v);
        }
    }
    Ok(out)
}

/// Writes stats.csv, acf.csv, vol.csv, corr.csv (and density.csv when
/// requested) for the given return columns.
pub fn write_analysis(dir: &Path, returns: &[Vec<f64>], opts: &StatsOptions) -> Result<Vec<PathBuf>> {
    let n_assets = returns.len();
    let mut files = Vec::new();

    let mut f = CsvFile::create(
        dir,
        "stats.csv",
        &header(&["asset", "period", "n_obs", "mean", "std", "skew", "kurtosis", "max", "min"]),
    )?;
    for (a, r) in returns.iter().enumerate() {
        let mut rows: Vec<(String, SummaryStats)> = Vec::new();
        if r.len() >= opts.period_len {
            for (i, s) in periodized_stats(r, opts.period_len)?.into_iter().enumerate() {
                rows.push(((i + 1).to_string(), s));
            }
        }
        if let Ok(s) = summary_stats(r) {
            rows.push(("all".into(), s));
        }
        for (period, s) in rows {
            f.row(&[
                (a + 1).to_string(),
                period,
                s.n_obs.to_string(),
                fmt_f64(s.mean),
                fmt_f64(s.std),
                fmt_opt(s.skew),
                fmt_opt(s.kurtosis),
                fmt_f64(s.max),
                fmt_f64(s.min),
            ])?;
        }
    }
    files.push(f.finish()?);

    let mut cols = vec!["lag".to_string()];
    cols.extend(per_asset("rho_r", n_assets));
    cols.extend(per_asset("rho_abs_r", n_assets));
    let mut f = CsvFile::create(dir, "acf.csv", &cols)?;
    let len = returns.first().map_or(0, Vec::len);
    let max_lag = opts.max_lag.min(len.saturating_sub(1) / 2);
    if max_lag > 0 {
        let abs: Vec<Vec<f64>> = returns.iter().map(|r| r.iter().map(|v| v.abs()).collect()).collect();
        let acfs: Vec<Option<AcfResult>> =
            returns.iter().chain(&abs).map(|x| acf(x, max_lag).ok()).collect();
        for k in 0..=max_lag {
            let mut row = vec![k.to_string()];
            row.extend(acfs.iter().map(|a| fmt_opt(a.as_ref().map(|a| a.values[k]))));
            f.row(&row)?;
        }
    }
    files.push(f.finish()?);

    let mut cols = vec!["t".to_string()];
    cols.extend(per_asset("v", n_assets));
    let mut f = CsvFile::create(dir, "vol.csv", &cols)?;
    if len >= opts.vol_window {
        let factor = ANNUALIZATION_DAYS.sqrt();
        let vols = returns
            .iter()
            .map(|r| rolling_annualized_vol(r, opts.vol_window, factor))
            .collect::<Result<Vec<_>, _>>()?;
        for i in 0..vols[0].len() {
            let mut row = vec![(i + opts.vol_window).to_string()];
            row.extend(vols.iter().map(|v| fmt_f64(v[i])));
            f.row(&row)?;
        }
    }
    files.push(f.finish()?);

    let mut f = CsvFile::create(dir, "corr.csv", &header(&["period", "rho"]))?;
    if n_assets == 2 && len >= opts.period_len {
        for (i, c) in period_correlation(&returns[0], &returns[1], opts.period_len)?.into_iter().enumerate() {
            f.row(&[(i + 1).to_string(), fmt_opt(c)])?;
        }
    }
    files.push(f.finish()?);

    if opts.emit_density {
        let mut f = CsvFile::create(
            dir,
            "density.csv",
            &header(&["asset", "center", "density", "gaussian"]),
        )?;
        for (a, r) in returns.iter().enumerate() {
            let Ok(d) = empirical_density(r, opts.bins) else { continue };
            let g = fitted_gaussian(r, &d)?;
            for ((c, y), gy) in d.centers.iter().zip(&d.densities).zip(&g) {
                f.row(&[(a + 1).to_string(), fmt_f64(*c), fmt_f64(*y), fmt_f64(*gy)])?;
            }
        }
        files.push(f.finish()?);
    }
    Ok(files)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Config echo as plain `key=value` lines (re-loadable with `--config`),
/// provenance and checksums as `#` comments.
pub fn write_manifest(dir: &Path, cfg: &RunConfig, elapsed: Duration, files: &[PathBuf]) -> Result<PathBuf> {
    let mut text = String::new();
    text.push_str("# thresim run manifest\n");
    text.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# rng: {RNG_ALGORITHM}\n"));
    text.push_str(&format!("# duration_secs: {}\n", elapsed.as_secs_f64()));
    for path in files {
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        text.push_str(&format!("# sha256 {name}: {}\n", sha256_file(path)?));
    }
    text.push_str(&cfg.to_text());
    let path = dir.join(MANIFEST);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
