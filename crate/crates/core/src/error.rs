use thiserror::Error;

/// Invalid model configuration. The message names the violated bound.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("n_agents must be >= 1 (got {0})")]
    NoAgents(usize),
    #[error("noise_std must be finite and > 0 (got {0})")]
    NoiseStd(f64),
    #[error("market_depth must be finite and > 0 (got {0})")]
    MarketDepth(f64),
    #[error("update_prob must lie in [0, 1] (got {0})")]
    UpdateProb(f64),
    #[error("choice_intensity must be >= 0 or inf (got {0})")]
    ChoiceIntensity(f64),
    #[error("n_assets must be 1 or 2 (got {0})")]
    AssetCount(usize),
    #[error("invalid threshold init: {0}")]
    ThresholdInit(String),
    #[error("cannot parse {0}")]
    Parse(String),
}

/// Bad input to a statistical estimator or analytic oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("series too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("non-positive autocorrelation {value} at lag {lag}; narrow the fit range")]
    FitDomain { lag: usize, value: f64 },
    #[error("measure is not normalized (total mass {0})")]
    NotNormalized(f64),
}
