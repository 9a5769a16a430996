//! Serializable description of a complete run: source, fading model,
//! optimizer settings, test channel and protocol parameters.
//!
//! The types are format-agnostic; the command-line tool reads them from
//! TOML. Every section has defaults except the source.

use serde::{Deserialize, Serialize};

use crate::crcap::{cr_capacity, AuxChannel, OptimizerOptions};
use crate::error::{Error, Result};
use crate::fading::{FadingSpec, GainDistribution};
use crate::protocol::ProtocolConfig;
use crate::source::JointSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SourceConfig {
    /// Doubly symmetric binary source with crossover `dsbs`.
    Dsbs { dsbs: f64 },
    /// Joint pmf as rows over `X`; normalized on load.
    Joint { joint: Vec<Vec<f64>> },
}

impl SourceConfig {
    pub fn build(&self) -> Result<JointSource> {
        match self {
            SourceConfig::Dsbs { dsbs } => JointSource::dsbs(*dsbs),
            SourceConfig::Joint { joint } => {
                let rows = joint.len();
                let cols = joint.first().map_or(0, Vec::len);
                if rows == 0 || cols == 0 || joint.iter().any(|r| r.len() != cols) {
                    return Err(Error::DimensionMismatch("joint must be a non-empty rectangle".into()));
                }
                JointSource::normalized(joint.concat(), rows, cols)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GainConfig {
    Constant {
        g0: f64,
    },
    /// Rayleigh magnitude; the scale defaults to unit mean power.
    Rayleigh {
        #[serde(default = "unit_power_scale")]
        scale: f64,
    },
    /// Gain magnitudes listed inline or, via `path`, one per line in a text
    /// file. A path is resolved into `samples` before building.
    Empirical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
}

fn unit_power_scale() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

impl GainConfig {
    pub fn build(&self) -> Result<GainDistribution> {
        match self {
            GainConfig::Constant { g0 } => GainDistribution::constant(*g0),
            GainConfig::Rayleigh { scale } => GainDistribution::rayleigh(*scale),
            GainConfig::Empirical { samples: Some(s), .. } => GainDistribution::empirical(s.clone()),
            GainConfig::Empirical { samples: None, .. } => {
                Err(Error::param("gain", "empirical gain samples were not loaded"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingConfig {
    pub gain: GainConfig,
    pub power: f64,
    pub noise_var: f64,
    pub eta: f64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            gain: GainConfig::Rayleigh {
                scale: unit_power_scale(),
            },
            power: 10.0,
            noise_var: 1.0,
            eta: 0.1,
        }
    }
}

impl FadingConfig {
    pub fn build(&self) -> Result<FadingSpec> {
        FadingSpec::new(self.gain.build()?, self.power, self.noise_var, self.eta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    /// Explicit budget `C` in bits; otherwise `budget_fraction · C_η(P)`.
    pub budget_bits: Option<f64>,
    pub budget_fraction: f64,
    pub optimizer: OptimizerOptions,
    /// Oracle grid levels per simplex coordinate.
    pub grid_steps: usize,
    /// Oracle `|U|`; defaults to `|X| + 1`.
    pub oracle_card_u: Option<usize>,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            budget_bits: None,
            budget_fraction: 1.0,
            optimizer: OptimizerOptions::default(),
            grid_steps: 21,
            oracle_card_u: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxConfig {
    /// `w[u][x]`, one row per `U` symbol.
    pub w: Vec<Vec<f64>>,
}

impl AuxConfig {
    pub fn build(&self) -> Result<AuxChannel> {
        let card_u = self.w.len();
        let card_x = self.w.first().map_or(0, Vec::len);
        if self.w.iter().any(|r| r.len() != card_x) {
            return Err(Error::DimensionMismatch("w must be rectangular".into()));
        }
        AuxChannel::new(self.w.concat(), card_u, card_x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; overrides the seeds of the optimizer and the protocol.
    pub seed: Option<u64>,
    pub source: Option<SourceConfig>,
    pub fading: FadingConfig,
    pub capacity: CapacityConfig,
    /// Fixed test channel for simulations; chosen by the optimizer if absent.
    pub aux: Option<AuxConfig>,
    pub protocol: ProtocolConfig,
}

impl Config {
    /// Pushes the master seed into the sections that consume randomness.
    pub fn resolve_seed(&mut self) {
        if let Some(seed) = self.seed {
            self.capacity.optimizer.seed = seed;
            self.protocol.seed = seed;
        }
    }

    pub fn source(&self) -> Result<JointSource> {
        self.source
            .as_ref()
            .ok_or_else(|| Error::param("source", "missing [source] section"))?
            .build()
    }

    /// The explicit budget, or the configured fraction of `C_η(P)`.
    pub fn budget(&self) -> Result<f64> {
        match self.capacity.budget_bits {
            Some(b) => Ok(b),
            None => {
                if !(self.capacity.budget_fraction >= 0.0 && self.capacity.budget_fraction.is_finite()) {
                    return Err(Error::param("budget_fraction", "must be finite and >= 0"));
                }
                Ok(self.capacity.budget_fraction * self.fading.build()?.outage_capacity()?)
            }
        }
    }

    /// The configured test channel, or the optimizer's maximizer at
    /// [`budget`](Self::budget).
    pub fn aux(&self, src: &JointSource) -> Result<AuxChannel> {
        match &self.aux {
            Some(a) => a.build(),
            None => Ok(cr_capacity(src, self.budget()?, &self.capacity.optimizer)?.argmax),
        }
    }
}
