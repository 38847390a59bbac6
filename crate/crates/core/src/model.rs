//! Agent population and market dynamics.
//!
//! One step of the market:
//!
//! 1. a common Gaussian signal `ε ~ N(0, D²)` is drawn;
//! 2. every agent compares `ε` with its threshold on each asset and places
//!    an order `ω·φ` with `φ ∈ {-1, 0, +1}`;
//! 3. each asset's return is the impact of its mean order flow;
//! 4. each agent refreshes its thresholds to the current `|r|` with
//!    probability `s`;
//! 5. (two assets) each agent independently refreshes its weights with
//!    probability `s` using the logit rule on `V = |r₂| - |r₁|`.
//!
//! Updated weights take effect on the next step.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::ConfigError;
use crate::params::{
    AssetInit, ChoiceIntensity, InitPolicy, MarketParams, ThresholdInit, UpdateCoupling,
};
use crate::rng::{substream, Stream};

/// Beyond this `|β·V|` the logit weight is saturated to its limit value.
pub const EXP_OVERFLOW_GUARD: f64 = 700.0;

/// Maps normalized excess demand to a log-return.
pub trait PriceImpact {
    fn apply(&self, excess_demand: f64) -> f64;
}

/// `g(x) = x / λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearImpact {
    pub depth: f64,
}

impl PriceImpact for LinearImpact {
    #[inline]
    fn apply(&self, excess_demand: f64) -> f64 {
        price_impact(excess_demand, self.depth)
    }
}

impl<F: Fn(f64) -> f64> PriceImpact for F {
    fn apply(&self, excess_demand: f64) -> f64 {
        self(excess_demand)
    }
}

#[inline]
pub fn price_impact(order_flow: f64, depth: f64) -> f64 {
    order_flow / depth
}

/// Order of a threshold agent: `+1` if `signal > threshold`, `-1` if
/// `signal < -threshold`, `0` otherwise (the boundary is inactive).
#[inline]
pub fn agent_order(signal: f64, threshold: f64) -> i8 {
    (signal > threshold) as i8 - (signal < -threshold) as i8
}

/// Logit allocation `(ω₁, ω₂)` given fitness `V = |r₂| - |r₁|`.
pub fn update_weights(fitness: f64, beta: ChoiceIntensity) -> (f64, f64) {
    let w1 = match beta {
        ChoiceIntensity::Infinite => {
            if fitness < 0.0 {
                1.0
            } else if fitness > 0.0 {
                0.0
            } else {
                0.5
            }
        }
        ChoiceIntensity::Finite(b) => {
            let x = b * fitness;
            if x > EXP_OVERFLOW_GUARD {
                0.0
            } else if x < -EXP_OVERFLOW_GUARD {
                1.0
            } else {
                1.0 / (1.0 + x.exp())
            }
        }
    };
    (w1, 1.0 - w1)
}

/// Outputs of one market step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub signal: f64,
    /// Mean weighted order per asset, `Σᵢ ωᵢφᵢ / n`.
    pub order_flow: Vec<f64>,
    pub returns: Vec<f64>,
    /// `|r₂| - |r₁|`; zero for a single asset.
    pub fitness: f64,
    pub threshold_updates: usize,
    pub weight_updates: usize,
}

/// Mutable population state. Rows are assets, columns agents.
#[derive(Debug, Clone)]
pub struct MarketState {
    pub thresholds: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub log_prices: Vec<f64>,
    pub time: u64,
    signal_rng: ChaCha8Rng,
    threshold_gate_rng: ChaCha8Rng,
    weight_gate_rng: ChaCha8Rng,
}

pub fn init_market(params: &MarketParams, init: &InitPolicy) -> Result<MarketState, ConfigError> {
    params.validate()?;
    init.validate()?;
    let n = params.n_agents;
    let mut init_rng = substream(params.seed, Stream::Init);
    let draw_row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        match init.thresholds {
            ThresholdInit::AllZero => vec![0.0; n],
            ThresholdInit::Constant(c) => vec![c; n],
            ThresholdInit::UniformOn(lo, hi) => {
                (0..n).map(|_| rng.random_range(lo..hi)).collect()
            }
            ThresholdInit::UniformNoise => (0..n)
                .map(|_| rng.random::<f64>() * params.noise_std)
                .collect(),
        }
    };
    let first = draw_row(&mut init_rng);
    let mut thresholds = vec![first];
    if params.n_assets == 2 {
        let second = match init.assets {
            AssetInit::Identical => thresholds[0].clone(),
            AssetInit::Independent => draw_row(&mut init_rng),
        };
        thresholds.push(second);
    }
    let w0 = 1.0 / params.n_assets as f64;
    Ok(MarketState {
        thresholds,
        weights: vec![vec![w0; n]; params.n_assets],
        log_prices: vec![0.0; params.n_assets],
        time: 0,
        signal_rng: substream(params.seed, Stream::Signal),
        threshold_gate_rng: substream(params.seed, Stream::ThresholdGate),
        weight_gate_rng: substream(params.seed, Stream::WeightGate),
    })
}

impl MarketState {
    pub fn n_assets(&self) -> usize {
        self.thresholds.len()
    }

    pub fn n_agents(&self) -> usize {
        self.thresholds[0].len()
    }

    /// One draw from `N(0, D²)`, shared by every agent and asset.
    pub fn draw_signal(&mut self, noise_std: f64) -> f64 {
        let normal = Normal::new(0.0, noise_std).expect("noise_std validated > 0");
        normal.sample(&mut self.signal_rng)
    }

    fn gate(rng: &mut ChaCha8Rng, prob: f64) -> bool {
        rng.random::<f64>() < prob
    }
}

/// Single-asset step with linear impact.
pub fn step_single(state: &mut MarketState, params: &MarketParams) -> StepRecord {
    step_single_with(state, params, &LinearImpact { depth: params.market_depth })
}

pub fn step_single_with<G: PriceImpact>(
    state: &mut MarketState,
    params: &MarketParams,
    impact: &G,
) -> StepRecord {
    debug_assert_eq!(state.n_assets(), 1);
    let n = state.n_agents();
    let eps = state.draw_signal(params.noise_std);
    let net: i64 = state.thresholds[0]
        .iter()
        .map(|&th| agent_order(eps, th) as i64)
        .sum();
    let flow = net as f64 / n as f64;
    let r = impact.apply(flow);
    state.log_prices[0] += r;

    let abs_r = r.abs();
    let mut updates = 0;
    for th in state.thresholds[0].iter_mut() {
        if MarketState::gate(&mut state.threshold_gate_rng, params.update_prob) {
            *th = abs_r;
            updates += 1;
        }
    }
    state.time += 1;
    StepRecord {
        signal: eps,
        order_flow: vec![flow],
        returns: vec![r],
        fitness: 0.0,
        threshold_updates: updates,
        weight_updates: 0,
    }
}

/// Two-asset step with linear impact on both assets.
pub fn step_two(state: &mut MarketState, params: &MarketParams) -> StepRecord {
    step_two_with(state, params, &LinearImpact { depth: params.market_depth })
}

pub fn step_two_with<G: PriceImpact>(
    state: &mut MarketState,
    params: &MarketParams,
    impact: &G,
) -> StepRecord {
    debug_assert_eq!(state.n_assets(), 2);
    let n = state.n_agents();
    let eps = state.draw_signal(params.noise_std);

    let (mut sum1, mut sum2) = (0.0f64, 0.0f64);
    {
        let (th1, th2) = (&state.thresholds[0], &state.thresholds[1]);
        let (w1, w2) = (&state.weights[0], &state.weights[1]);
        for i in 0..n {
            sum1 += w1[i] * agent_order(eps, th1[i]) as f64;
            sum2 += w2[i] * agent_order(eps, th2[i]) as f64;
        }
    }
    let flow1 = sum1 / n as f64;
    let flow2 = sum2 / n as f64;
    let r1 = impact.apply(flow1);
    let r2 = impact.apply(flow2);
    state.log_prices[0] += r1;
    state.log_prices[1] += r2;

    let (a1, a2) = (r1.abs(), r2.abs());
    let mut threshold_updates = 0;
    let (th1, rest) = state.thresholds.split_at_mut(1);
    let (th1, th2) = (&mut th1[0], &mut rest[0]);
    match params.coupling {
        UpdateCoupling::Coupled => {
            for i in 0..n {
                if MarketState::gate(&mut state.threshold_gate_rng, params.update_prob) {
                    th1[i] = a1;
                    th2[i] = a2;
                    threshold_updates += 1;
                }
            }
        }
        UpdateCoupling::Independent => {
            for i in 0..n {
                let u1 = MarketState::gate(&mut state.threshold_gate_rng, params.update_prob);
                let u2 = MarketState::gate(&mut state.threshold_gate_rng, params.update_prob);
                if u1 {
                    th1[i] = a1;
                }
                if u2 {
                    th2[i] = a2;
                }
                if u1 || u2 {
                    threshold_updates += 1;
                }
            }
        }
    }

    let fitness = a2 - a1;
    let (new_w1, new_w2) = update_weights(fitness, params.choice_intensity);
    let mut weight_updates = 0;
    let (w1, rest) = state.weights.split_at_mut(1);
    let (w1, w2) = (&mut w1[0], &mut rest[0]);
    for i in 0..n {
        if MarketState::gate(&mut state.weight_gate_rng, params.update_prob) {
            w1[i] = new_w1;
            w2[i] = new_w2;
            weight_updates += 1;
        }
    }

    state.time += 1;
    StepRecord {
        signal: eps,
        order_flow: vec![flow1, flow2],
        returns: vec![r1, r2],
        fitness,
        threshold_updates,
        weight_updates,
    }
}

/// A market bundled with its parameters, stepping one period at a time.
#[derive(Debug, Clone)]
pub struct Market {
    params: MarketParams,
    init: InitPolicy,
    state: MarketState,
}

impl Market {
    pub fn new(params: MarketParams, init: InitPolicy) -> Result<Self, ConfigError> {
        let state = init_market(&params, &init)?;
        Ok(Market { params, init, state })
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn init_policy(&self) -> &InitPolicy {
        &self.init
    }

    pub fn state(&self) -> &MarketState {
        &self.state
    }

    pub fn step(&mut self) -> StepRecord {
        if self.params.n_assets == 1 {
            step_single(&mut self.state, &self.params)
        } else {
            step_two(&mut self.state, &self.params)
        }
    }
}

/// Return paths of one run. `returns[a][t]` is asset `a`'s return at step `t+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsSeries {
    pub params: MarketParams,
    pub init: InitPolicy,
    pub returns: Vec<Vec<f64>>,
    pub signals: Option<Vec<f64>>,
}

impl ReturnsSeries {
    pub fn len(&self) -> usize {
        self.returns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn asset(&self, a: usize) -> &[f64] {
        &self.returns[a]
    }

    /// Mean of `| |r₂| - |r₁| |`; zero for a single asset.
    pub fn mean_abs_fitness(&self) -> f64 {
        if self.returns.len() < 2 || self.is_empty() {
            return 0.0;
        }
        let s: f64 = self.returns[0]
            .iter()
            .zip(&self.returns[1])
            .map(|(a, b)| (b.abs() - a.abs()).abs())
            .sum();
        s / self.len() as f64
    }
}

pub fn run(params: &MarketParams, init: &InitPolicy) -> Result<ReturnsSeries, ConfigError> {
    run_observed(params, init, true, |_, _| {})
}

/// Runs `params.burn_in` unrecorded warm-up steps followed by
/// `params.horizon` recorded steps. `observe` sees every step, warm-up
/// included, with the post-step state (`state.time` counts all steps).
pub fn run_observed<F>(
    params: &MarketParams,
    init: &InitPolicy,
    keep_signals: bool,
    mut observe: F,
) -> Result<ReturnsSeries, ConfigError>
where
    F: FnMut(&MarketState, &StepRecord),
{
    let mut market = Market::new(params.clone(), *init)?;
    for _ in 0..params.burn_in {
        let rec = market.step();
        observe(market.state(), &rec);
    }
    let horizon = params.horizon;
    let mut returns = vec![Vec::with_capacity(horizon); params.n_assets];
    let mut signals = keep_signals.then(|| Vec::with_capacity(horizon));
    for _ in 0..horizon {
        let rec = market.step();
        for (series, r) in returns.iter_mut().zip(&rec.returns) {
            series.push(*r);
        }
        if let Some(sig) = signals.as_mut() {
            sig.push(rec.signal);
        }
        observe(market.state(), &rec);
    }
    Ok(ReturnsSeries {
        params: params.clone(),
        init: *init,
        returns,
        signals,
    })
}
