//! Model constants and initial-condition policies.

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;

/// Logit intensity of choice. `Infinite` is the radical-choice limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChoiceIntensity {
    Finite(f64),
    Infinite,
}

impl ChoiceIntensity {
    pub fn is_valid(&self) -> bool {
        match *self {
            ChoiceIntensity::Finite(b) => b >= 0.0 && b.is_finite(),
            ChoiceIntensity::Infinite => true,
        }
    }
}

impl fmt::Display for ChoiceIntensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChoiceIntensity::Finite(b) => write!(f, "{b}"),
            ChoiceIntensity::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ChoiceIntensity {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
            return Ok(ChoiceIntensity::Infinite);
        }
        let b: f64 = t
            .parse()
            .map_err(|_| ConfigError::Parse(format!("choice intensity `{t}`")))?;
        if b == f64::INFINITY {
            return Ok(ChoiceIntensity::Infinite);
        }
        let beta = ChoiceIntensity::Finite(b);
        if beta.is_valid() {
            Ok(beta)
        } else {
            Err(ConfigError::ChoiceIntensity(b))
        }
    }
}

/// How the per-agent Bernoulli(s) draws gate the two thresholds of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateCoupling {
    /// One draw refreshes both thresholds together.
    #[default]
    Coupled,
    /// Each asset's threshold gets its own draw.
    Independent,
}

impl fmt::Display for UpdateCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateCoupling::Coupled => "coupled",
            UpdateCoupling::Independent => "independent",
        })
    }
}

impl FromStr for UpdateCoupling {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "coupled" => Ok(UpdateCoupling::Coupled),
            "independent" => Ok(UpdateCoupling::Independent),
            other => Err(ConfigError::Parse(format!(
                "coupling `{other}` (expected coupled|independent)"
            ))),
        }
    }
}

/// All constants of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    pub n_agents: usize,
    /// Standard deviation `D` of the common news signal.
    pub noise_std: f64,
    /// Linear impact denominator `λ`.
    pub market_depth: f64,
    /// Per-step probability `s` that an agent refreshes its rule.
    pub update_prob: f64,
    /// Ignored for single-asset markets.
    pub choice_intensity: ChoiceIntensity,
    pub n_assets: usize,
    /// Number of recorded steps `T`.
    pub horizon: usize,
    /// Warm-up steps simulated before recording starts.
    pub burn_in: usize,
    pub seed: u64,
    pub coupling: UpdateCoupling,
}

/// Warm-up long enough for the initial threshold remnant `(1-s)^t` to vanish
/// at the reference `s = 0.015` (about 7e-14 after 2000 steps).
pub const DEFAULT_BURN_IN: usize = 2000;

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams::two_asset_reference()
    }
}

impl MarketParams {
    /// Two-asset reference configuration: n=1500, D=0.001, λ=2, s=0.015, β=1000.
    pub fn two_asset_reference() -> Self {
        MarketParams {
            n_agents: 1500,
            noise_std: 0.001,
            market_depth: 2.0,
            update_prob: 0.015,
            choice_intensity: ChoiceIntensity::Finite(1000.0),
            n_assets: 2,
            horizon: 50_000,
            burn_in: DEFAULT_BURN_IN,
            seed: 0,
            coupling: UpdateCoupling::Coupled,
        }
    }

    /// Single-asset baseline: n=1500, D=0.001, λ=10, s=0.015.
    pub fn single_asset_reference() -> Self {
        MarketParams {
            market_depth: 10.0,
            n_assets: 1,
            ..MarketParams::two_asset_reference()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_agents < 1 {
            return Err(ConfigError::NoAgents(self.n_agents));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(ConfigError::NoiseStd(self.noise_std));
        }
        if !(self.market_depth > 0.0 && self.market_depth.is_finite()) {
            return Err(ConfigError::MarketDepth(self.market_depth));
        }
        if !(0.0..=1.0).contains(&self.update_prob) {
            return Err(ConfigError::UpdateProb(self.update_prob));
        }
        if !self.choice_intensity.is_valid() {
            let ChoiceIntensity::Finite(b) = self.choice_intensity else {
                unreachable!()
            };
            return Err(ConfigError::ChoiceIntensity(b));
        }
        if !(1..=2).contains(&self.n_assets) {
            return Err(ConfigError::AssetCount(self.n_assets));
        }
        Ok(())
    }

    /// Effective noise `D·λ` under linear impact.
    pub fn d_eff(&self) -> f64 {
        self.noise_std * self.market_depth
    }
}

/// Initial threshold distribution `f₀`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ThresholdInit {
    AllZero,
    Constant(f64),
    /// Uniform on `[lo, hi)`.
    UniformOn(f64, f64),
    /// Uniform on `[0, D)` where `D` is the run's noise level.
    #[default]
    UniformNoise,
}

impl ThresholdInit {
    fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            ThresholdInit::Constant(c) if !(c >= 0.0 && c.is_finite()) => Err(
                ConfigError::ThresholdInit(format!("constant threshold {c} must be >= 0")),
            ),
            ThresholdInit::UniformOn(lo, hi) if !(lo >= 0.0 && hi > lo && hi.is_finite()) => {
                Err(ConfigError::ThresholdInit(format!(
                    "uniform range [{lo}, {hi}) must satisfy 0 <= lo < hi"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ThresholdInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdInit::AllZero => f.write_str("zero"),
            ThresholdInit::Constant(c) => write!(f, "const:{c}"),
            ThresholdInit::UniformOn(a, b) => write!(f, "uniform:{a}:{b}"),
            ThresholdInit::UniformNoise => f.write_str("uniform"),
        }
    }
}

impl FromStr for ThresholdInit {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::ThresholdInit(format!("cannot parse `{s}`"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
        let init = match parts.as_slice() {
            ["zero"] => ThresholdInit::AllZero,
            ["uniform"] => ThresholdInit::UniformNoise,
            ["const", c] => ThresholdInit::Constant(num(c)?),
            ["uniform", a, b] => ThresholdInit::UniformOn(num(a)?, num(b)?),
            _ => return Err(bad()),
        };
        init.validate()?;
        Ok(init)
    }
}

/// Whether the two assets start from the same threshold draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssetInit {
    /// Each asset draws its own thresholds (breaks the symmetry between assets).
    #[default]
    Independent,
    /// Asset 2 copies asset 1's draws.
    Identical,
}

impl fmt::Display for AssetInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssetInit::Independent => "independent",
            AssetInit::Identical => "identical",
        })
    }
}

impl FromStr for AssetInit {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "independent" => Ok(AssetInit::Independent),
            "identical" => Ok(AssetInit::Identical),
            other => Err(ConfigError::Parse(format!(
                "asset init `{other}` (expected independent|identical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitPolicy {
    pub thresholds: ThresholdInit,
    pub assets: AssetInit,
}

impl InitPolicy {
    pub fn new(thresholds: ThresholdInit, assets: AssetInit) -> Self {
        InitPolicy { thresholds, assets }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate()
    }
}
