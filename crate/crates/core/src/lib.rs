//! Discrete-time threshold-agent market simulator.
//!
//! Agents receive a common Gaussian news signal, trade only when the signal
//! exceeds a personal threshold, and asynchronously reset their thresholds to
//! the latest absolute return. The two-asset extension adds a logit
//! allocation of each agent's order between the assets, driven by the
//! difference of their absolute returns.
//!
//! - [`model`]: population state and the one-step dynamics
//! - [`theory`]: closed-form threshold distribution and the parameter-regime check
//! - [`stats`]: return diagnostics (moments, ACF, decay fits, rolling volatility, correlations)

pub mod error;
pub mod model;
pub mod params;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::{ConfigError, StatsError};
pub use model::{
    agent_order, init_market, price_impact, run, run_observed, step_single, step_two,
    update_weights, LinearImpact, Market, MarketState, PriceImpact, ReturnsSeries, StepRecord,
};
pub use params::{AssetInit, ChoiceIntensity, InitPolicy, MarketParams, ThresholdInit, UpdateCoupling};
