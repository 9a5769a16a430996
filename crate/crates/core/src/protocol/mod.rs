//! The binning protocol over a slow-fading channel, simulated end to end.
//!
//! Terminal X quantizes `xⁿ` to the first codeword jointly typical with it
//! and sends only its bin index. Terminal Y decodes the bin from the channel
//! output and picks the unique word of that bin jointly typical with `yⁿ`.
//! `K` and `L` are the two chosen words, with the fallback word `u0` used
//! whenever a side finds nothing usable.
//!
//! Small codebooks are stored and searched explicitly. Larger ones are
//! simulated through [`SimulationMode::Ensemble`], which samples a fresh
//! codebook from the same random ensemble for every trial without storing
//! it.

mod channel;
mod codebook;
mod ensemble;


use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use channel::{Backend, BinChannel};
pub use codebook::{
    codebook_sizes, codebook_sizes_from_info, fallback_word, CodebookSet, CodebookSizes, Codeword,
    DEFAULT_MAX_LOG2_SIZE,
};

use crate::crcap::AuxChannel;
use crate::error::{Error, Result};
use crate::fading::{FadingSpec, GainDistribution};
use crate::rng::{derive_seed, rng_from_seed, stream, Rng as TrialRng};
use crate::source::JointSource;
use crate::typicality::{quantize_to_type, TypicalityParams};
use ensemble::Ensemble;

/// How the gain of each block is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainStates {
    /// Stratified draws from the fading law: trial `t` falls in equal-mass
    /// bucket `t mod buckets` and its gain is drawn within that bucket.
    Sampled { buckets: usize },
    /// Fixed gains visited round-robin, each its own state.
    List(Vec<f64>),
}

impl Default for GainStates {
    fn default() -> Self {
        GainStates::Sampled { buckets: 25 }
    }
}

/// Stored codebook or per-trial ensemble sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SimulationMode {
    /// Materialized when the codebook fits `max_codebook_symbols`.
    #[default]
    Auto,
    Materialized,
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Source block length.
    pub n: usize,
    /// Rate slack in bits.
    pub delta: f64,
    /// Typicality slack; `None` picks [`TypicalityParams::default_for`].
    pub epsilon: Option<f64>,
    /// Target conditional disagreement probability.
    pub alpha: f64,
    pub seed: u64,
    pub trials: usize,
    pub backend: Backend,
    /// Idealized backend only: bits below capacity required for success.
    pub margin: f64,
    /// Channel uses per block; defaults to `n`.
    pub channel_uses: Option<usize>,
    pub gain_states: GainStates,
    pub mode: SimulationMode,
    pub max_codebook_symbols: f64,
    pub max_channel_symbols: f64,
    pub max_log2_size: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n: 200,
            delta: 0.1,
            epsilon: None,
            alpha: 0.1,
            seed: 0,
            trials: 500,
            backend: Backend::Idealized,
            margin: 0.1,
            channel_uses: None,
            gain_states: GainStates::default(),
            mode: SimulationMode::Auto,
            max_codebook_symbols: (1u64 << 24) as f64,
            max_channel_symbols: (1u64 << 24) as f64,
            max_log2_size: DEFAULT_MAX_LOG2_SIZE,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "block length must be positive"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::param("delta", format!("must be > 0, got {}", self.delta)));
        }
        if let Some(e) = self.epsilon {
            TypicalityParams::new(e)?;
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::param("margin", format!("must be >= 0, got {}", self.margin)));
        }
        if self.channel_uses == Some(0) {
            return Err(Error::param("channel_uses", "must be positive"));
        }
        match &self.gain_states {
            GainStates::Sampled { buckets: 0 } => return Err(Error::param("gain_states", "need at least one bucket")),
            GainStates::List(gs) if gs.is_empty() => return Err(Error::param("gain_states", "empty gain list")),
            GainStates::List(gs) if gs.iter().any(|g| !(g.is_finite() && *g >= 0.0)) => {
                return Err(Error::param("gain_states", "gains must be finite and >= 0"))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn typicality(&self) -> TypicalityParams {
        self.epsilon
            .map_or_else(|| TypicalityParams::default_for(self.n), |epsilon| TypicalityParams { epsilon })
    }

    pub fn channel_uses(&self) -> usize {
        self.channel_uses.unwrap_or(self.n)
    }
}

/// What the two terminals ended up with in one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exchange {
    pub k: Codeword,
    pub l: Codeword,
    /// Sent bin `i*`, 1-based; `N1 + 1` is the fallback bin.
    pub bin_sent: usize,
    /// Decoded bin `ĩ*`.
    pub bin_decoded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    pub g: f64,
    pub agreed: bool,
    /// The encoder found no typical word.
    pub encoder_fallback: bool,
    /// The decoded bin differs from the sent one.
    pub channel_error: bool,
    /// Explicit indices; present for stored codebooks only.
    pub exchange: Option<Exchange>,
}

/// Aggregates for one gain state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateStats {
    pub g_lo: f64,
    pub g_hi: f64,
    pub trials: usize,
    pub errors: usize,
    pub channel_errors: usize,
    /// Disagreements on blocks whose bin arrived intact.
    pub source_errors: usize,
    pub encoder_fallbacks: usize,
    pub error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub per_state: Vec<StateStats>,
    /// Trial mass of states whose error rate exceeds `α`.
    pub outage_fraction: f64,
    /// `log2(N1 N2 + 1) / n`.
    pub empirical_rate: f64,
    #[serde(flatten)]
    pub sizes: CodebookSizes,
    /// `log2 |K| ≤ 2 (H(X) + 1) n`.
    pub cardinality_bound_ok: bool,
    pub mode: SimulationMode,
    pub i_ux: f64,
    pub i_uy: f64,
    pub trials: usize,
    pub errors: usize,
    pub mean_error: f64,
    pub fallback_fraction: f64,
}

enum Engine {
    Stored(CodebookSet),
    Ensemble(Ensemble),
}

/// Ready-to-run protocol instance: sizes, codebook or ensemble, channel.
pub struct Simulator {
    config: ProtocolConfig,
    src: JointSource,
    spec: FadingSpec,
    sizes: CodebookSizes,
    info: (f64, f64),
    params: TypicalityParams,
    engine: Engine,
    channel: BinChannel,
}

impl Simulator {
    pub fn new(config: &ProtocolConfig, aux: &AuxChannel, src: &JointSource, spec: &FadingSpec) -> Result<Self> {
        config.validate()?;
        spec.validate()?;
        let info = aux.info_pair(src)?;
        let sizes = codebook_sizes_from_info(info.0, info.1, config.n, config.delta, config.max_log2_size)?;
        let params = config.typicality();
        let stored_symbols = sizes.n1 * sizes.n2 * config.n as f64;
        let materialize = match config.mode {
            SimulationMode::Materialized => true,
            SimulationMode::Ensemble => false,
            SimulationMode::Auto => stored_symbols <= config.max_codebook_symbols,
        };
        let engine = if materialize {
            Engine::Stored(CodebookSet::generate(aux, src, config.n, &sizes, config.seed, config.max_codebook_symbols)?)
        } else {
            let word_type = quantize_to_type(&aux.marginal_u(src)?, config.n)?;
            // The fallback word must exist even if it is never stored.
            fallback_word(&word_type)?;
            Engine::Ensemble(Ensemble::new(word_type, aux.joint_ux(src)?, aux.joint_uy(src)?, &sizes, params))
        };
        let channel = Self::channel(config, &sizes, spec)?;
        Ok(Self {
            config: config.clone(),
            src: src.clone(),
            spec: spec.clone(),
            sizes,
            info,
            params,
            engine,
            channel,
        })
    }

    /// Runs over a given codebook instead of a generated one.
    pub fn with_codebook(config: &ProtocolConfig, codebook: CodebookSet, aux: &AuxChannel, src: &JointSource, spec: &FadingSpec) -> Result<Self> {
        config.validate()?;
        spec.validate()?;
        if codebook.block_length() != config.n {
            return Err(Error::LengthMismatch {
                left: codebook.block_length(),
                right: config.n,
            });
        }
        let (n1, n2) = (codebook.n1() as f64, codebook.n2() as f64);
        let sizes = CodebookSizes {
            n1,
            n2,
            log2_n1: n1.log2(),
            log2_n2: n2.log2(),
        };
        let channel = Self::channel(config, &sizes, spec)?;
        Ok(Self {
            config: config.clone(),
            src: src.clone(),
            spec: spec.clone(),
            sizes,
            info: aux.info_pair(src)?,
            params: config.typicality(),
            engine: Engine::Stored(codebook),
            channel,
        })
    }

    fn channel(config: &ProtocolConfig, sizes: &CodebookSizes, spec: &FadingSpec) -> Result<BinChannel> {
        let uses = config.channel_uses();
        match config.backend {
            Backend::Idealized => BinChannel::idealized(sizes.n1, uses, spec, config.margin),
            Backend::Gaussian => {
                let messages = sizes.n1 + 1.0;
                if messages * uses as f64 > config.max_channel_symbols {
                    return Err(Error::ResourceCap {
                        what: "channel code symbols",
                        needed: messages * uses as f64,
                        limit: config.max_channel_symbols,
                    });
                }
                BinChannel::gaussian(messages as usize, uses, spec, config.seed, config.max_channel_symbols)
            }
        }
    }

    pub fn sizes(&self) -> &CodebookSizes {
        &self.sizes
    }

    pub fn codebook(&self) -> Option<&CodebookSet> {
        match &self.engine {
            Engine::Stored(c) => Some(c),
            Engine::Ensemble(_) => None,
        }
    }

    pub fn mode(&self) -> SimulationMode {
        match self.engine {
            Engine::Stored(_) => SimulationMode::Materialized,
            Engine::Ensemble(_) => SimulationMode::Ensemble,
        }
    }

    pub fn channel_model(&self) -> &BinChannel {
        &self.channel
    }

    /// Number of gain states and the `(g_lo, g_hi)` range of each.
    pub fn states(&self) -> Result<Vec<(f64, f64)>> {
        match &self.config.gain_states {
            GainStates::List(gs) => Ok(gs.iter().map(|&g| (g, g)).collect()),
            GainStates::Sampled { .. } if matches!(self.spec.gain, GainDistribution::Constant { .. }) => {
                let g = self.spec.gain.support_max();
                Ok(vec![(g, g)])
            }
            GainStates::Sampled { buckets } => {
                let b = *buckets as f64;
                (0..*buckets)
                    .map(|k| {
                        let lo = self.spec.gain.quantile(k as f64 / b)?;
                        let hi = if k + 1 == *buckets {
                            self.spec.gain.support_max()
                        } else {
                            self.spec.gain.quantile((k + 1) as f64 / b)?
                        };
                        Ok((lo, hi))
                    })
                    .collect()
            }
        }
    }

    /// State index and gain of trial `t`.
    fn gain(&self, t: usize, states: usize) -> Result<(usize, f64)> {
        let state = t % states;
        let g = match &self.config.gain_states {
            GainStates::List(gs) => gs[state],
            GainStates::Sampled { .. } if states == 1 => {
                let mut rng = rng_from_seed(derive_seed(self.config.seed, stream::GAIN, t as u64));
                self.spec.gain.quantile(rng.random::<f64>())?
            }
            GainStates::Sampled { .. } => {
                let mut rng = rng_from_seed(derive_seed(self.config.seed, stream::GAIN, t as u64));
                let level = (state as f64 + rng.random::<f64>()) / states as f64;
                self.spec.gain.quantile(level.min(1.0 - f64::EPSILON))?
            }
        };
        Ok((state, g))
    }

    /// One block at gain `g` with generator `rng`.
    pub fn block(&self, g: f64, rng: &mut TrialRng) -> Result<TrialResult> {
        let (x, y) = self.src.sample_with(self.config.n, rng);
        match &self.engine {
            Engine::Stored(book) => {
                let (k, bin_sent) = book.encode(&x, self.params)?;
                let bin_decoded = self.channel.transmit(bin_sent, g, rng)?;
                let l = book.decode(&y, bin_decoded, self.params)?;
                Ok(TrialResult {
                    g,
                    agreed: k == l,
                    encoder_fallback: k == Codeword::Fallback,
                    channel_error: bin_sent != bin_decoded,
                    exchange: Some(Exchange {
                        k,
                        l,
                        bin_sent,
                        bin_decoded,
                    }),
                })
            }
            Engine::Ensemble(ens) => {
                let draw = ens.trial(&x, &y, g, &self.channel, rng)?;
                Ok(TrialResult {
                    g,
                    agreed: draw.agreed,
                    encoder_fallback: draw.fallback,
                    channel_error: draw.channel_error,
                    exchange: None,
                })
            }
        }
    }

    /// Trial `t` of the run, reproducible on its own.
    pub fn trial(&self, t: usize) -> Result<TrialResult> {
        let states = self.states()?.len();
        let (_, g) = self.gain(t, states)?;
        self.block(g, &mut rng_from_seed(derive_seed(self.config.seed, stream::TRIAL, t as u64)))
    }

    pub fn run(&self) -> Result<RunStats> {
        let ranges = self.states()?;
        let outcomes: Vec<(usize, TrialResult)> = (0..self.config.trials)
            .into_par_iter()
            .map(|t| {
                let (state, g) = self.gain(t, ranges.len())?;
                let mut rng = rng_from_seed(derive_seed(self.config.seed, stream::TRIAL, t as u64));
                Ok((state, self.block(g, &mut rng)?))
            })
            .collect::<Result<_>>()?;

        let mut per_state: Vec<StateStats> = ranges
            .iter()
            .map(|&(g_lo, g_hi)| StateStats {
                g_lo,
                g_hi,
                trials: 0,
                errors: 0,
                channel_errors: 0,
                source_errors: 0,
                encoder_fallbacks: 0,
                error_rate: 0.0,
            })
            .collect();
        for (state, r) in &outcomes {
            let s = &mut per_state[*state];
            s.trials += 1;
            s.errors += usize::from(!r.agreed);
            s.channel_errors += usize::from(r.channel_error);
            s.source_errors += usize::from(!r.agreed && !r.channel_error);
            s.encoder_fallbacks += usize::from(r.encoder_fallback);
        }
        for s in &mut per_state {
            s.error_rate = if s.trials == 0 { 0.0 } else { s.errors as f64 / s.trials as f64 };
        }
        let trials = self.config.trials;
        let in_outage: usize = per_state
            .iter()
            .filter(|s| s.error_rate > self.config.alpha)
            .map(|s| s.trials)
            .sum();
        let errors: usize = per_state.iter().map(|s| s.errors).sum();
        let fallbacks: usize = per_state.iter().map(|s| s.encoder_fallbacks).sum();
        let log2_alphabet = self.sizes.log2_alphabet();
        let n = self.config.n as f64;
        Ok(RunStats {
            outage_fraction: in_outage as f64 / trials as f64,
            empirical_rate: log2_alphabet / n,
            sizes: self.sizes,
            cardinality_bound_ok: log2_alphabet <= 2.0 * (self.src.entropy_x() + 1.0) * n,
            mode: self.mode(),
            i_ux: self.info.0,
            i_uy: self.info.1,
            trials,
            errors,
            mean_error: errors as f64 / trials as f64,
            fallback_fraction: fallbacks as f64 / trials as f64,
            per_state,
        })
    }
}

/// Builds a [`Simulator`] and runs it.
pub fn run(config: &ProtocolConfig, aux: &AuxChannel, src: &JointSource, spec: &FadingSpec) -> Result<RunStats> {
    Simulator::new(config, aux, src, spec)?.run()
}
