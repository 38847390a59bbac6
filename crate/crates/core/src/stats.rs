//! Return-series diagnostics.
//!
//! Moment conventions: `std` uses the `N-1` normalization; skewness and
//! kurtosis use population central moments, and kurtosis is Pearson
//! (non-excess, Gaussian = 3). The ACF is the biased estimator with a single
//! global mean and the lag-0 sum of squares as denominator.

use crate::error::StatsError;

/// Trading days per year used for annualization.
pub const ANNUALIZATION_DAYS: f64 = 250.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    /// `None` for a zero-variance series.
    pub skew: Option<f64>,
    /// Pearson kurtosis; `None` for a zero-variance series.
    pub kurtosis: Option<f64>,
    pub max: f64,
    pub min: f64,
    pub n_obs: usize,
}

/// Central moments `(mean, m2, m3, m4)` with `1/N` normalization.
///
/// Deviations are taken from the first element before averaging so that a
/// constant series yields exactly zero moments.
fn central_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let shift = x[0];
    let shifted_mean = x.iter().map(|v| v - shift).sum::<f64>() / n;
    let mean = shift + shifted_mean;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = (v - shift) - shifted_mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

pub fn summary_stats(series: &[f64]) -> Result<SummaryStats, StatsError> {
    if series.len() < 4 {
        return Err(StatsError::TooShort { needed: 4, got: series.len() });
    }
    let n = series.len();
    let (mean, m2, m3, m4) = central_moments(series);
    let std = (m2 * n as f64 / (n - 1) as f64).sqrt();
    let (skew, kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SummaryStats { mean, std, skew, kurtosis, max, min, n_obs: n })
}

/// Summary statistics over consecutive non-overlapping windows of
/// `period_len`; a trailing partial window is dropped.
pub fn periodized_stats(series: &[f64], period_len: usize) -> Result<Vec<SummaryStats>, StatsError> {
    if period_len < 4 {
        return Err(StatsError::Argument(format!("period_len must be >= 4 (got {period_len})")));
    }
    series.chunks_exact(period_len).map(summary_stats).collect()
}

/// Range `max - min` of the defined per-period kurtoses.
pub fn kurtosis_range(periods: &[SummaryStats]) -> Option<f64> {
    let k: Vec<f64> = periods.iter().filter_map(|p| p.kurtosis).collect();
    if k.is_empty() {
        return None;
    }
    let hi = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = k.iter().copied().fold(f64::INFINITY, f64::min);
    Some(hi - lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcfResult {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    /// White-noise band `1.96 / √N`.
    pub ci_band: f64,
}

impl AcfResult {
    /// Fraction of lags in `lo..=hi` whose value lies inside `±ci_band`.
    pub fn fraction_inside_band(&self, lo: usize, hi: usize) -> f64 {
        let vals = &self.values[lo..=hi];
        vals.iter().filter(|v| v.abs() <= self.ci_band).count() as f64 / vals.len() as f64
    }
}

pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfResult, StatsError> {
    let n = series.len();
    if n < 2 || 2 * max_lag >= n {
        return Err(StatsError::Argument(format!(
            "max_lag {max_lag} must be < length/2 (length {n})"
        )));
    }
    let (mean, ..) = central_moments(series);
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let values = (0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / denom
            }
        })
        .collect();
    Ok(AcfResult {
        lags: (0..=max_lag).collect(),
        values,
        ci_band: 1.96 / (n as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Characteristic time in steps.
    pub tau: f64,
    pub amplitude: f64,
    pub fit_range: (usize, usize),
    /// RMS residual of the log-linear fit.
    pub rms_residual: f64,
}

/// Least-squares fit of `ln ρ(k) = ln A - k/τ` over lags `lag_lo..=lag_hi`.
pub fn fit_exponential_decay(acf: &AcfResult, lag_lo: usize, lag_hi: usize) -> Result<DecayFit, StatsError> {
    if lag_hi <= lag_lo || lag_hi >= acf.values.len() {
        return Err(StatsError::Argument(format!(
            "fit range {lag_lo}..={lag_hi} invalid for {} lags",
            acf.values.len()
        )));
    }
    let mut xs = Vec::with_capacity(lag_hi - lag_lo + 1);
    let mut ys = Vec::with_capacity(lag_hi - lag_lo + 1);
    for k in lag_lo..=lag_hi {
        let v = acf.values[k];
        if !(v > 0.0) {
            return Err(StatsError::FitDomain { lag: k, value: v });
        }
        xs.push(acf.lags[k] as f64);
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Ok(DecayFit {
        tau: -1.0 / slope,
        amplitude: intercept.exp(),
        fit_range: (lag_lo, lag_hi),
        rms_residual: (rss / n).sqrt(),
    })
}

/// Default fit range `1..=⌈1/s⌉` for the initial ACF decay.
pub fn default_fit_range(update_prob: f64) -> (usize, usize) {
    (1, (1.0 / update_prob).ceil() as usize)
}

fn sample_std(x: &[f64]) -> f64 {
    let (_, m2, ..) = central_moments(x);
    (m2 * x.len() as f64 / (x.len() - 1) as f64).sqrt()
}

/// Trailing-window sample standard deviation times `factor`, one value per
/// full window (output length `len - window + 1`).
pub fn rolling_annualized_vol(series: &[f64], window: usize, factor: f64) -> Result<Vec<f64>, StatsError> {
    if window < 2 {
        return Err(StatsError::Argument(format!("window must be >= 2 (got {window})")));
    }
    if window > series.len() {
        return Err(StatsError::TooShort { needed: window, got: series.len() });
    }
    Ok(series.windows(window).map(|w| sample_std(w) * factor).collect())
}

/// Pearson correlation; `None` if either input has zero variance.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "correlation inputs must have equal length");
    if x.len() < 2 {
        return None;
    }
    let (mx, vx, ..) = central_moments(x);
    let (my, vy, ..) = central_moments(y);
    if vx <= 0.0 || vy <= 0.0 {
        return None;
    }
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.len() as f64;
    Some((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Return correlation per consecutive window; `None` marks a window where
/// one of the assets had zero variance.
pub fn period_correlation(r1: &[f64], r2: &[f64], period_len: usize) -> Result<Vec<Option<f64>>, StatsError> {
    if r1.len() != r2.len() {
        return Err(StatsError::Argument(format!(
            "series lengths differ ({} vs {})",
            r1.len(),
            r2.len()
        )));
    }
    if period_len < 2 {
        return Err(StatsError::Argument(format!("period_len must be >= 2 (got {period_len})")));
    }
    Ok(r1
        .chunks_exact(period_len)
        .zip(r2.chunks_exact(period_len))
        .map(|(a, b)| pearson_correlation(a, b))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub bin_width: f64,
}

/// Equal-width histogram over the sample range, normalized to unit integral.
pub fn empirical_density(series: &[f64], n_bins: usize) -> Result<Density, StatsError> {
    if n_bins < 2 {
        return Err(StatsError::Argument(format!("n_bins must be >= 2 (got {n_bins})")));
    }
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if series.is_empty() || !(hi > lo) {
        return Err(StatsError::Argument("degenerate data range".into()));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in series {
        let b = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let norm = series.len() as f64 * width;
    Ok(Density {
        centers: (0..n_bins).map(|b| lo + (b as f64 + 0.5) * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / norm).collect(),
        bin_width: width,
    })
}

/// Gaussian density with the given moments evaluated at `points`.
pub fn gaussian_density(points: &[f64], mean: f64, std: f64) -> Vec<f64> {
    let norm = 1.0 / (std * (2.0 * std::f64::consts::PI).sqrt());
    points
        .iter()
        .map(|x| {
            let z = (x - mean) / std;
            norm * (-0.5 * z * z).exp()
        })
        .collect()
}

/// Gaussian fitted by sample mean and std, evaluated at the density's bin centers.
pub fn fitted_gaussian(series: &[f64], density: &Density) -> Result<Vec<f64>, StatsError> {
    let s = summary_stats(series)?;
    if s.std <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(gaussian_density(&density.centers, s.mean, s.std))
}
