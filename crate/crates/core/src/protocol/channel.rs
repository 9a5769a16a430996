//! Carrying the bin index over one slow-fading block.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::FadingSpec;
use crate::rng::{derive_seed, rng_from_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Success exactly when the rate is below the instantaneous capacity
    /// minus a margin.
    #[default]
    Idealized,
    /// Random Gaussian code with minimum-distance decoding.
    Gaussian,
}

/// Random complex codebook, every codeword scaled to average power `P`.
#[derive(Debug, Clone)]
struct GaussianCode {
    symbols: Vec<Complex64>,
    uses: usize,
}

impl GaussianCode {
    fn new(messages: usize, uses: usize, power: f64, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut symbols = Vec::with_capacity(messages * uses);
        for _ in 0..messages {
            let start = symbols.len();
            symbols.extend((0..uses).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))));
            let word = &mut symbols[start..];
            let energy: f64 = word.iter().map(|c| c.norm_sqr()).sum();
            let scale = (power * uses as f64 / energy).sqrt();
            word.iter_mut().for_each(|c| *c *= scale);
        }
        Self { symbols, uses }
    }

    fn codeword(&self, m: usize) -> &[Complex64] {
        &self.symbols[m * self.uses..(m + 1) * self.uses]
    }

    fn messages(&self) -> usize {
        self.symbols.len() / self.uses
    }

    /// Sends message `m` (0-based) through `z = g t + ξ` and decodes by
    /// minimum distance with `g` known at the receiver.
    fn transmit<R: Rng + ?Sized>(&self, m: usize, g: f64, noise_var: f64, rng: &mut R) -> usize {
        let sd = (noise_var / 2.0).sqrt();
        let z: Vec<Complex64> = self
            .codeword(m)
            .iter()
            .map(|&t| t * g + Complex64::new(sd * rng.sample::<f64, _>(StandardNormal), sd * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let mut best = (f64::INFINITY, 0);
        for k in 0..self.messages() {
            let d: f64 = self.codeword(k).iter().zip(&z).map(|(&t, &zt)| (zt - t * g).norm_sqr()).sum();
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }
}

/// Channel for the bin index `i* ∈ {1, …, N1 + 1}` over `n_c` channel uses.
#[derive(Debug, Clone)]
pub struct BinChannel {
    log2_messages: f64,
    messages: Option<usize>,
    uses: usize,
    power: f64,
    noise_var: f64,
    margin: f64,
    code: Option<GaussianCode>,
}

impl BinChannel {
    /// Idealized channel for the `N1 + 1` bin indices.
    pub fn idealized(n1: f64, uses: usize, spec: &FadingSpec, margin: f64) -> Result<Self> {
        if uses == 0 {
            return Err(Error::param("channel_uses", "must be positive"));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::param("margin", format!("must be >= 0, got {margin}")));
        }
        let messages = n1 + 1.0;
        Ok(Self {
            log2_messages: messages.log2(),
            messages: (messages <= (1u64 << 53) as f64).then_some(messages as usize),
            uses,
            power: spec.power,
            noise_var: spec.noise_var,
            margin,
            code: None,
        })
    }

    /// Gaussian-code channel for `messages` messages; the code is drawn from
    /// the channel-code stream of `seed`.
    pub fn gaussian(messages: usize, uses: usize, spec: &FadingSpec, seed: u64, max_symbols: f64) -> Result<Self> {
        if uses == 0 || messages == 0 {
            return Err(Error::param("channel_uses", "need at least one use and one message"));
        }
        let needed = messages as f64 * uses as f64;
        if needed > max_symbols {
            return Err(Error::ResourceCap {
                what: "channel code symbols",
                needed,
                limit: max_symbols,
            });
        }
        let code = GaussianCode::new(messages, uses, spec.power, derive_seed(seed, stream::CHANNEL_CODE, 0));
        Ok(Self {
            log2_messages: (messages as f64).log2(),
            messages: Some(messages),
            uses,
            power: spec.power,
            noise_var: spec.noise_var,
            margin: 0.0,
            code: Some(code),
        })
    }

    /// Bits per channel use, `log2(N1 + 1) / n_c`.
    pub fn rate(&self) -> f64 {
        self.log2_messages / self.uses as f64
    }

    /// Idealized success rule at gain `g`.
    pub fn supports(&self, g: f64) -> bool {
        let capacity = (g * g * self.power / self.noise_var).ln_1p() / std::f64::consts::LN_2;
        self.rate() <= capacity - self.margin
    }

    /// Decoded bin for the sent 1-based `bin`. On an idealized failure the
    /// result is uniform over the other bins.
    pub fn transmit<R: Rng + ?Sized>(&self, bin: usize, g: f64, rng: &mut R) -> Result<usize> {
        let messages = self
            .messages
            .ok_or_else(|| Error::param("bin", "too many bins to index explicitly"))?;
        if bin == 0 || bin > messages {
            return Err(Error::param("bin", format!("{bin} outside 1..={messages}")));
        }
        Ok(match &self.code {
            Some(code) => code.transmit(bin - 1, g, self.noise_var, rng) + 1,
            None if self.supports(g) => bin,
            None if messages == 1 => bin,
            None => {
                let other = rng.random_range(1..messages);
                if other >= bin {
                    other + 1
                } else {
                    other
                }
            }
        })
    }

    pub(crate) fn is_idealized(&self) -> bool {
        self.code.is_none()
    }

    pub(crate) fn messages(&self) -> Option<usize> {
        self.messages
    }
}
