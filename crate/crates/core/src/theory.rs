//! Closed-form threshold distribution and parameter-regime diagnostics.
//!
//! With asynchronous updating, the population threshold distribution obeys
//! `f_{t+1} = (1-s) f_t + s δ(|r_t|)`, whose solution is
//!
//! ```text
//! f_t = (1-s)^t f_0 + Σ_{j=1..t} s (1-s)^{j-1} δ(|r_{t-j}|)
//! ```
//!
//! i.e. a remnant of the initial distribution plus point masses at recent
//! absolute returns. The simulator's empirical threshold histogram is checked
//! against this mixture in total variation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ConfigError, StatsError};
use crate::model::{init_market, run_observed, LinearImpact, MarketState, PriceImpact};
use crate::params::{InitPolicy, MarketParams};

/// Tolerance on total mass for a measure to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Finite point-mass measure, atoms sorted by location with distinct locations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointMeasure {
    pub atoms: Vec<Atom>,
}

impl PointMeasure {
    /// Builds a measure, merging atoms at bit-identical locations and
    /// dropping zero-mass atoms.
    pub fn from_atoms(mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.location == a.location => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        merged.retain(|a| a.mass != 0.0);
        PointMeasure { atoms: merged }
    }

    /// Empirical measure of `samples`, each with mass `1/len`.
    pub fn empirical(samples: &[f64]) -> Self {
        let w = 1.0 / samples.len() as f64;
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut atoms: Vec<Atom> = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            atoms.push(Atom { location: sorted[i], mass: (j - i) as f64 * w });
            i = j;
        }
        PointMeasure { atoms }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn mass_at(&self, location: f64) -> f64 {
        self.atoms
            .binary_search_by(|a| a.location.total_cmp(&location))
            .map_or(0.0, |i| self.atoms[i].mass)
    }

    fn check_normalized(&self) -> Result<(), StatsError> {
        let m = self.total_mass();
        if (m - 1.0).abs() > NORMALIZATION_TOL {
            Err(StatsError::NotNormalized(m))
        } else {
            Ok(())
        }
    }
}

/// `(1-s)^t f_0` remnant plus point masses at past absolute returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMixture {
    pub initial_weight: f64,
    pub atoms: PointMeasure,
}

impl ThresholdMixture {
    /// The `t = 0` mixture: all mass on `f_0`.
    pub fn initial() -> Self {
        ThresholdMixture { initial_weight: 1.0, atoms: PointMeasure::default() }
    }

    pub fn total_mass(&self) -> f64 {
        self.initial_weight + self.atoms.total_mass()
    }

    /// One application of the master equation after a step with return `|r|`.
    pub fn advance(&self, abs_return: f64, update_prob: f64) -> Self {
        let keep = 1.0 - update_prob;
        let mut atoms: Vec<Atom> = self
            .atoms
            .atoms
            .iter()
            .map(|a| Atom { location: a.location, mass: keep * a.mass })
            .collect();
        atoms.push(Atom { location: abs_return.abs(), mass: update_prob });
        ThresholdMixture {
            initial_weight: keep * self.initial_weight,
            atoms: PointMeasure::from_atoms(atoms),
        }
    }

    /// Replaces the abstract `f_0` remnant by a concrete initial measure.
    pub fn resolve(&self, initial: &PointMeasure) -> PointMeasure {
        let mut atoms = self.atoms.atoms.clone();
        atoms.extend(initial.atoms.iter().map(|a| Atom {
            location: a.location,
            mass: a.mass * self.initial_weight,
        }));
        PointMeasure::from_atoms(atoms)
    }
}

/// Closed-form threshold distribution after `t` steps.
///
/// `abs_return_history[k]` is `|r_k|`, the return produced by the `(k+1)`-th
/// step; atom `j` sits at `|r_{t-j}|` with mass `s(1-s)^{j-1}`.
pub fn analytic_threshold_distribution(
    update_prob: f64,
    t: usize,
    abs_return_history: &[f64],
) -> Result<ThresholdMixture, StatsError> {
    if !(0.0..=1.0).contains(&update_prob) {
        return Err(StatsError::Argument(format!(
            "update probability must lie in [0, 1] (got {update_prob})"
        )));
    }
    if abs_return_history.len() < t {
        return Err(StatsError::TooShort { needed: t, got: abs_return_history.len() });
    }
    let keep = 1.0 - update_prob;
    let atoms = (1..=t)
        .map(|j| Atom {
            location: abs_return_history[t - j].abs(),
            mass: update_prob * keep.powi(j as i32 - 1),
        })
        .collect();
    Ok(ThresholdMixture {
        initial_weight: keep.powi(t as i32),
        atoms: PointMeasure::from_atoms(atoms),
    })
}

/// Exact histogram of the agents' current thresholds on `asset`.
pub fn empirical_threshold_distribution(state: &MarketState, asset: usize) -> PointMeasure {
    PointMeasure::empirical(&state.thresholds[asset])
}

/// Total-variation distance, half the L1 distance between two point
/// measures with atoms matched by exact location.
pub fn tv_distance(a: &PointMeasure, b: &PointMeasure) -> Result<f64, StatsError> {
    a.check_normalized()?;
    b.check_normalized()?;
    let (xa, xb) = (&a.atoms, &b.atoms);
    let (mut i, mut j) = (0, 0);
    let mut l1 = 0.0;
    while i < xa.len() || j < xb.len() {
        let ord = match (xa.get(i), xb.get(j)) {
            (Some(p), Some(q)) => p.location.total_cmp(&q.location),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                l1 += xa[i].mass;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                l1 += xb[j].mass;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                l1 += (xa[i].mass - xb[j].mass).abs();
                i += 1;
                j += 1;
            }
        }
    }
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// Empirical-vs-closed-form comparison at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckpoint {
    /// Steps simulated (warm-up included).
    pub t: usize,
    /// One TV distance per asset.
    pub tv: Vec<f64>,
    /// Closed-form mixture per asset with `f_0` resolved to the initial thresholds.
    pub analytic: Vec<PointMeasure>,
    pub empirical: Vec<PointMeasure>,
}

/// Simulates `params` from `t = 0` and compares each asset's threshold
/// histogram with the closed-form mixture at every checkpoint. The run stops
/// after the last checkpoint; `params.horizon` and `params.burn_in` are
/// ignored.
pub fn threshold_oracle_trajectory(
    params: &MarketParams,
    init: &InitPolicy,
    checkpoints: &[usize],
) -> Result<Vec<OracleCheckpoint>, ConfigError> {
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    let p = MarketParams { horizon: last, burn_in: 0, ..params.clone() };
    let initial: Vec<PointMeasure> = init_market(&p, init)?
        .thresholds
        .iter()
        .map(|row| PointMeasure::empirical(row))
        .collect();
    let mut history: Vec<Vec<f64>> = vec![Vec::with_capacity(last); p.n_assets];
    let mut out = Vec::new();
    if checkpoints.contains(&0) {
        out.push(OracleCheckpoint {
            t: 0,
            tv: vec![0.0; p.n_assets],
            analytic: initial.clone(),
            empirical: initial.clone(),
        });
    }
    run_observed(&p, init, false, |state, rec| {
        for (h, r) in history.iter_mut().zip(&rec.returns) {
            h.push(r.abs());
        }
        let t = state.time as usize;
        if !checkpoints.contains(&t) {
            return;
        }
        let mut cp = OracleCheckpoint { t, tv: Vec::new(), analytic: Vec::new(), empirical: Vec::new() };
        for a in 0..state.n_assets() {
            let analytic = analytic_threshold_distribution(p.update_prob, t, &history[a])
                .expect("history covers t")
                .resolve(&initial[a]);
            let empirical = empirical_threshold_distribution(state, a);
            cp.tv.push(tv_distance(&analytic, &empirical).expect("both normalized"));
            cp.analytic.push(analytic);
            cp.empirical.push(empirical);
        }
        out.push(cp);
    })?;
    Ok(out)
}

/// TV distance between `measure` and the empirical measure of `n` iid
/// draws from it: the sampling noise floor for an `n`-agent histogram.
pub fn sampling_tv(measure: &PointMeasure, n: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut cdf = Vec::with_capacity(measure.atoms.len());
    let mut acc = 0.0;
    for a in &measure.atoms {
        acc += a.mass;
        cdf.push(acc);
    }
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            measure.atoms[i].location
        })
        .collect();
    let sample = PointMeasure::empirical(&draws);
    let normalized = PointMeasure::from_atoms(
        measure
            .atoms
            .iter()
            .map(|a| Atom { location: a.location, mass: a.mass / acc })
            .collect(),
    );
    tv_distance(&normalized, &sample).expect("both normalized")
}

/// Single-asset order flow implied by the threshold distribution:
/// `sign(ε) · F(|ε|)` with `F` the fraction of thresholds strictly below `|ε|`.
pub fn cdf_order_flow(thresholds: &[f64], signal: f64) -> f64 {
    let below = thresholds.iter().filter(|&&th| th < signal.abs()).count();
    signal.signum() * below as f64 / thresholds.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeVerdict {
    Realistic,
    NoiseDominated,
    ImpactDominated,
    Marginal,
}

impl std::fmt::Display for RegimeVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeVerdict::Realistic => "REALISTIC",
            RegimeVerdict::NoiseDominated => "NOISE_DOMINATED",
            RegimeVerdict::ImpactDominated => "IMPACT_DOMINATED",
            RegimeVerdict::Marginal => "MARGINAL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub g_inv_n: f64,
    pub g_one: f64,
    pub d_eff: f64,
    /// `D / g(1/n)`
    pub lower_ratio: f64,
    /// `g(1) / D`
    pub upper_ratio: f64,
    pub verdict: RegimeVerdict,
}

pub const DEFAULT_REGIME_FACTOR: f64 = 3.0;

/// Checks `g(1/n) << D << g(1)`, reading `<<` as "at least `factor` times".
pub fn regime_check(params: &MarketParams, factor: f64) -> RegimeReport {
    let g = LinearImpact { depth: params.market_depth };
    let d = params.noise_std;
    let g_inv_n = g.apply(1.0 / params.n_agents as f64);
    let g_one = g.apply(1.0);
    let lower_ratio = d / g_inv_n;
    let upper_ratio = g_one / d;
    let verdict = if upper_ratio < 1.0 {
        RegimeVerdict::NoiseDominated
    } else if lower_ratio < 1.0 {
        RegimeVerdict::ImpactDominated
    } else if lower_ratio >= factor && upper_ratio >= factor {
        RegimeVerdict::Realistic
    } else {
        RegimeVerdict::Marginal
    };
    RegimeReport {
        g_inv_n,
        g_one,
        d_eff: params.d_eff(),
        lower_ratio,
        upper_ratio,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(location: f64, mass: f64) -> Atom {
        Atom { location, mass }
    }

    #[test]
    fn zero_time_is_all_initial() {
        let m = analytic_threshold_distribution(0.3, 0, &[]).unwrap();
        assert_eq!(m.initial_weight, 1.0);
        assert!(m.atoms.atoms.is_empty());
    }

    #[test]
    fn two_step_substitution() {
        // history: |r_0| = 0.2, |r_1| = 0.1
        let m = analytic_threshold_distribution(0.5, 2, &[0.2, 0.1]).unwrap();
        assert_eq!(m.initial_weight, 0.25);
        assert_eq!(m.atoms.atoms, vec![atom(0.1, 0.5), atom(0.2, 0.25)]);
    }

    #[test]
    fn full_update_collapses_to_last_return() {
        let hist = [0.3, 0.1, 0.7, 0.05];
        for t in 1..=4 {
            let m = analytic_threshold_distribution(1.0, t, &hist).unwrap();
            assert_eq!(m.initial_weight, 0.0);
            assert_eq!(m.atoms.atoms, vec![atom(hist[t - 1], 1.0)]);
        }
    }

    #[test]
    fn coincident_returns_merge() {
        let m = analytic_threshold_distribution(0.5, 3, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.atoms.atoms.len(), 1);
        assert!((m.atoms.atoms[0].mass - 0.875).abs() < 1e-15);
    }

    #[test]
    fn short_history_is_an_error() {
        assert!(matches!(
            analytic_threshold_distribution(0.1, 3, &[0.1, 0.2]),
            Err(StatsError::TooShort { needed: 3, got: 2 })
        ));
        assert!(analytic_threshold_distribution(1.5, 0, &[]).is_err());
    }

    #[test]
    fn empirical_histogram_counts() {
        let m = PointMeasure::empirical(&[0.1, 0.2, 0.1, 0.3]);
        assert_eq!(m.atoms, vec![atom(0.1, 0.5), atom(0.2, 0.25), atom(0.3, 0.25)]);
        let m = PointMeasure::empirical(&[0.4; 7]);
        assert_eq!(m.atoms.len(), 1);
        assert!((m.atoms[0].mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tv_examples() {
        let a = PointMeasure::from_atoms(vec![atom(0.1, 0.5), atom(0.2, 0.5)]);
        let b = PointMeasure::from_atoms(vec![atom(0.1, 1.0)]);
        let c = PointMeasure::from_atoms(vec![atom(0.7, 1.0)]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&b, &c).unwrap(), 1.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 0.5);
        assert_eq!(tv_distance(&b, &a).unwrap(), 0.5);
        let bad = PointMeasure::from_atoms(vec![atom(0.1, 0.7)]);
        assert!(matches!(tv_distance(&a, &bad), Err(StatsError::NotNormalized(_))));
    }

    #[test]
    fn master_equation_matches_closed_form() {
        let s = 0.015;
        let hist: Vec<f64> = (0..400).map(|k| ((k * 37) % 23) as f64 * 1e-3).collect();
        let mut rec = ThresholdMixture::initial();
        for (t, &r) in hist.iter().enumerate() {
            let closed = analytic_threshold_distribution(s, t, &hist).unwrap();
            assert!((rec.initial_weight - closed.initial_weight).abs() < 1e-12);
            assert_eq!(rec.atoms.atoms.len(), closed.atoms.atoms.len());
            for (x, y) in rec.atoms.atoms.iter().zip(&closed.atoms.atoms) {
                assert_eq!(x.location, y.location);
                assert!((x.mass - y.mass).abs() < 1e-12);
            }
            rec = rec.advance(r, s);
        }
    }

    #[test]
    fn resolve_adds_initial_remnant() {
        let m = analytic_threshold_distribution(0.5, 1, &[0.3]).unwrap();
        let f0 = PointMeasure::empirical(&[0.1, 0.2]);
        let r = m.resolve(&f0);
        assert_eq!(r.atoms, vec![atom(0.1, 0.25), atom(0.2, 0.25), atom(0.3, 0.5)]);
    }

    #[test]
    fn cdf_flow_counts_strictly_below() {
        let th = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(cdf_order_flow(&th, 0.25), 0.5);
        assert_eq!(cdf_order_flow(&th, -0.25), -0.5);
        assert_eq!(cdf_order_flow(&th, 0.2), 0.25);
    }

    #[test]
    fn regime_reference_is_realistic() {
        let p = MarketParams::two_asset_reference();
        let r = regime_check(&p, DEFAULT_REGIME_FACTOR);
        assert_eq!(r.lower_ratio, 3.0);
        assert_eq!(r.upper_ratio, 500.0);
        assert_eq!(r.d_eff, 0.002);
        assert!((r.g_inv_n - 3.333_333_333_333_333e-4).abs() < 1e-18);
        assert_eq!(r.g_one, 0.5);
        assert_eq!(r.verdict, RegimeVerdict::Realistic);
    }

    #[test]
    fn regime_branches() {
        let base = MarketParams::two_asset_reference();
        let at_boundary = MarketParams { noise_std: 1.0 / 1500.0 / 2.0, ..base.clone() };
        let r = regime_check(&at_boundary, 3.0);
        assert_eq!(r.lower_ratio, 1.0);
        assert_eq!(r.verdict, RegimeVerdict::Marginal);
        let noisy = MarketParams { noise_std: 1.0, ..base.clone() };
        let r = regime_check(&noisy, 3.0);
        assert_eq!(r.upper_ratio, 0.5);
        assert_eq!(r.verdict, RegimeVerdict::NoiseDominated);
        let quiet = MarketParams { noise_std: 1e-5, ..base };
        assert_eq!(regime_check(&quiet, 3.0).verdict, RegimeVerdict::ImpactDominated);
    }
}
