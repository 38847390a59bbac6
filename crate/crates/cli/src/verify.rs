//! Self-checks bundled behind `thresim verify`.

use std::fmt;

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thresim_core::rng::replicate_seed;
use thresim_core::stats::*;
use thresim_core::theory::{sampling_tv, threshold_oracle_trajectory};
use thresim_core::*;

use crate::config::RunConfig;

/// Steps at which the threshold histogram is compared with the closed form.
pub const ORACLE_CHECKPOINTS: [usize; 3] = [500, 2000, 5000];
const ORACLE_SEEDS: u64 = 5;
const FLOOR_DRAWS: usize = 4;
/// Allowed excess of the simulated TV over the iid sampling floor.
const FLOOR_SLACK: f64 = 1.15;
const ESTIMATOR_TOL: f64 = 1e-10;

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub observed: String,
    pub bound: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: observed {}; bound {}", self.name, self.observed, self.bound)
    }
}

pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let mut checks = threshold_oracle(cfg)?;
    checks.push(beta_zero_reduction(cfg)?);
    checks.push(d_eff_scaling(cfg)?);
    checks.extend(estimator_cross_checks(cfg)?);
    Ok(checks)
}

fn threshold_oracle(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n_assets = cfg.params.n_assets;
    let k = ORACLE_CHECKPOINTS.len();
    let mut tv = vec![vec![0.0; n_assets]; k];
    let mut floor = vec![vec![0.0; n_assets]; k];
    for i in 0..ORACLE_SEEDS {
        let seed = replicate_seed(cfg.params.seed, i);
        let p = MarketParams { seed, ..cfg.params.clone() };
        let cps = threshold_oracle_trajectory(&p, &cfg.init, &ORACLE_CHECKPOINTS)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (c, cp) in cps.iter().enumerate() {
            for a in 0..n_assets {
                tv[c][a] += cp.tv[a] / ORACLE_SEEDS as f64;
                for _ in 0..FLOOR_DRAWS {
                    floor[c][a] += sampling_tv(&cp.analytic[a], p.n_agents, &mut rng)
                        / (ORACLE_SEEDS as usize * FLOOR_DRAWS) as f64;
                }
            }
        }
    }
    let mut out = Vec::new();
    for (c, t) in ORACLE_CHECKPOINTS.iter().enumerate() {
        for a in 0..n_assets {
            let bound = FLOOR_SLACK * floor[c][a] + 1e-12;
            out.push(Check {
                name: format!("threshold oracle t={t} asset {}", a + 1),
                pass: tv[c][a] <= bound,
                observed: format!("mean TV {:.5} over {ORACLE_SEEDS} seeds", tv[c][a]),
                bound: format!("<= {FLOOR_SLACK} x iid sampling floor {:.5}", floor[c][a]),
            });
        }
    }
    Ok(out)
}

/// Two assets at β=0 with identical initial thresholds must reproduce the
/// single-asset market at twice the depth, step for step.
fn beta_zero_reduction(cfg: &RunConfig) -> Result<Check> {
    let two = MarketParams {
        n_assets: 2,
        choice_intensity: ChoiceIntensity::Finite(0.0),
        horizon: 10_000,
        burn_in: 0,
        ..cfg.params.clone()
    };
    let one = MarketParams { n_assets: 1, market_depth: 2.0 * two.market_depth, ..two.clone() };
    let init = InitPolicy { assets: AssetInit::Identical, ..cfg.init };
    let a = run(&two, &init)?;
    let b = run(&one, &init)?;
    let bad = (0..a.len())
        .filter(|&t| a.returns[0][t] != b.returns[0][t] || a.returns[1][t] != b.returns[0][t])
        .count();
    Ok(Check {
        name: format!("beta-zero reduction ({} draws)", two.coupling),
        pass: bad == 0,
        observed: format!("{bad} of {} steps differ", a.len()),
        bound: "0 (bit-exact)".into(),
    })
}

/// `(D, λ, β) -> (D/2, 2λ, 2β)` keeps `D·λ` and halves every return exactly.
fn d_eff_scaling(cfg: &RunConfig) -> Result<Check> {
    let base = MarketParams { horizon: 5000, burn_in: 0, ..cfg.params.clone() };
    let beta = match base.choice_intensity {
        ChoiceIntensity::Finite(b) => ChoiceIntensity::Finite(2.0 * b),
        ChoiceIntensity::Infinite => ChoiceIntensity::Infinite,
    };
    let init = match cfg.init.thresholds {
        // Absolute threshold levels do not rescale with D.
        ThresholdInit::Constant(_) | ThresholdInit::UniformOn(..) => {
            InitPolicy { thresholds: ThresholdInit::UniformNoise, ..cfg.init }
        }
        _ => cfg.init,
    };
    let scaled = MarketParams {
        noise_std: base.noise_std / 2.0,
        market_depth: base.market_depth * 2.0,
        choice_intensity: beta,
        ..base.clone()
    };
    let a = run(&base, &init)?;
    let b = run(&scaled, &init)?;
    let bad: usize = a
        .returns
        .iter()
        .zip(&b.returns)
        .map(|(x, y)| x.iter().zip(y).filter(|(u, v)| **u / 2.0 != **v).count())
        .sum();
    Ok(Check {
        name: "d_eff scaling c=2".into(),
        pass: bad == 0,
        observed: format!("{bad} of {} returns differ from r/2", a.len() * a.returns.len()),
        bound: "0 (bit-exact)".into(),
    })
}

fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    let d = a.abs().max(b.abs()).max(scale);
    if d == 0.0 {
        0.0
    } else {
        (a - b).abs() / d
    }
}

fn direct_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Library estimators against direct formulas on a simulated series.
fn estimator_cross_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let p = MarketParams { horizon: 2000, ..cfg.params.clone() };
    let series = run(&p, &cfg.init)?;
    let x = series.asset(0);
    let y: Vec<f64> = match series.returns.get(1) {
        Some(r) => r.clone(),
        None => x.iter().map(|v| v.abs()).collect(),
    };
    let n = x.len() as f64;
    let m = direct_mean(x);
    let mut mom = [0.0; 5];
    for v in x {
        for (k, slot) in mom.iter_mut().enumerate() {
            *slot += (v - m).powi(k as i32) / n;
        }
    }
    let mut checks = Vec::new();
    let mut push = |name: &str, err: f64| {
        checks.push(Check {
            name: format!("estimator {name}"),
            pass: err <= ESTIMATOR_TOL,
            observed: format!("relative error {err:.3e}"),
            bound: format!("<= {ESTIMATOR_TOL:e}"),
        });
    };

    match summary_stats(x) {
        Ok(s) if mom[2] > 0.0 => {
            let sd = (mom[2] * n / (n - 1.0)).sqrt();
            let e = [
                rel_err(s.mean, m, sd),
                rel_err(s.std, sd, 0.0),
                rel_err(s.skew.unwrap_or(f64::NAN), mom[3] / mom[2].powf(1.5), 1.0),
                rel_err(s.kurtosis.unwrap_or(f64::NAN), mom[4] / (mom[2] * mom[2]), 1.0),
            ];
            push("moments", e.iter().cloned().fold(0.0, f64::max));

            let lags = 100;
            let a = acf(x, lags)?;
            let mut worst: f64 = 0.0;
            for k in 0..=lags {
                let ck: f64 = (0..x.len() - k).map(|t| (x[t] - m) * (x[t + k] - m)).sum();
                worst = worst.max(rel_err(a.values[k], ck / (mom[2] * n), 1.0));
            }
            push("acf", worst);

            let w = 500;
            let vols = rolling_annualized_vol(x, w, ANNUALIZATION_DAYS.sqrt())?;
            let mut worst: f64 = 0.0;
            for (i, v) in vols.iter().enumerate() {
                let win = &x[i..i + w];
                let wm = direct_mean(win);
                let ss: f64 = win.iter().map(|u| (u - wm) * (u - wm)).sum();
                let want = (ss / (w - 1) as f64).sqrt() * ANNUALIZATION_DAYS.sqrt();
                worst = worst.max(rel_err(*v, want, 0.0));
            }
            push("rolling volatility", worst);

            let my = direct_mean(&y);
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - m) * (b - my)).sum();
            let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
            let want = sxy / (mom[2] * n * syy).sqrt();
            let got = pearson_correlation(x, &y).unwrap_or(f64::NAN);
            push("correlation", rel_err(got, want, 1.0));
        }
        _ => push("moments (degenerate series)", f64::INFINITY),
    }
    Ok(checks)
}
