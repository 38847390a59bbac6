//! Definitional re-implementations used as oracles for the estimators and
//! the threshold distribution. Deliberately naive: plain textbook formulas,
//! no shifting, no shared helpers with the library.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

pub const REL_TOL: f64 = 1e-10;

/// `|a - b| <= tol * max(|a|, |b|, scale)`.
pub fn rel_close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(scale)
}

pub fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

pub struct NaiveMoments {
    pub mean: f64,
    pub std: f64,
    pub skew: f64,
    pub kurtosis: f64,
    pub max: f64,
    pub min: f64,
}

pub fn naive_moments(x: &[f64]) -> NaiveMoments {
    let n = x.len() as f64;
    let m = mean(x);
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for v in x {
        m2 += (v - m).powi(2);
        m3 += (v - m).powi(3);
        m4 += (v - m).powi(4);
    }
    let (m2n, m3n, m4n) = (m2 / n, m3 / n, m4 / n);
    let mut max = x[0];
    let mut min = x[0];
    for &v in x {
        if v > max {
            max = v;
        }
        if v < min {
            min = v;
        }
    }
    NaiveMoments {
        mean: m,
        std: (m2 / (n - 1.0)).sqrt(),
        skew: m3n / m2n.sqrt().powi(3),
        kurtosis: m4n / m2n.powi(2),
        max,
        min,
    }
}

pub fn naive_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let m = mean(x);
    let mut c0 = 0.0;
    for t in 0..n {
        c0 += (x[t] - m) * (x[t] - m);
    }
    let mut out = Vec::new();
    for k in 0..=max_lag {
        let mut ck = 0.0;
        for t in 0..n - k {
            ck += (x[t] - m) * (x[t + k] - m);
        }
        out.push(ck / c0);
    }
    out
}

/// Ordinary least squares `y = a + b x` via the normal equations.
pub fn naive_line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = (sy - b * sx) / n;
    (a, b)
}

pub fn naive_rolling_std(x: &[f64], window: usize, factor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for end in window..=x.len() {
        let w = &x[end - window..end];
        let m = mean(w);
        let mut ss = 0.0;
        for v in w {
            ss += (v - m) * (v - m);
        }
        out.push((ss / (window as f64 - 1.0)).sqrt() * factor);
    }
    out
}

pub fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Histogram by explicit bin-membership tests.
pub fn naive_histogram(x: &[f64], n_bins: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w = (hi - lo) / n_bins as f64;
    let mut centers = Vec::new();
    let mut dens = Vec::new();
    for b in 0..n_bins {
        let count = x
            .iter()
            .filter(|&&v| {
                let idx = ((v - lo) / w).floor();
                let idx = if idx >= n_bins as f64 { (n_bins - 1) as f64 } else { idx };
                idx == b as f64
            })
            .count();
        centers.push(lo + (b as f64 + 0.5) * w);
        dens.push(count as f64 / (x.len() as f64 * w));
    }
    (centers, dens)
}

/// Mixture weights of the closed-form threshold distribution, built by
/// summing each past step's contribution into a list of (location, mass).
pub fn naive_mixture(s: f64, abs_history: &[f64]) -> (f64, Vec<(f64, f64)>) {
    let t = abs_history.len();
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut weight = s;
    for j in 1..=t {
        let loc = abs_history[t - j];
        match atoms.iter_mut().find(|(l, _)| *l == loc) {
            Some(a) => a.1 += weight,
            None => atoms.push((loc, weight)),
        }
        weight *= 1.0 - s;
    }
    ((1.0 - s).powi(t as i32), atoms)
}

/// Random test series: Gaussian, heavy-tailed, and a clustered-volatility
/// toy process.
pub fn random_series(kind: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind % 3 {
        0 => (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                0.01 * z + 0.001
            })
            .collect::<Vec<f64>>(),
        1 => {
            let t = StudentT::new(3.0).unwrap();
            (0..n).map(|_| 0.02 * t.sample(&mut rng)).collect()
        }
        _ => {
            let mut vol: f64 = 0.01;
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    vol = (0.9 * vol + 0.1 * 0.01 * (1.0 + z.abs())).max(1e-4);
                    vol * z
                })
                .collect()
        }
    }
}
