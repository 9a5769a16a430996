//! Binned codebooks, the typicality encoder and the bin decoder.

use serde::{Deserialize, Serialize};

use crate::crcap::AuxChannel;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::source::JointSource;
use crate::typicality::{is_jointly_typical, quantize_to_type, type_of, TypeClass, TypicalityParams};

/// Default ceiling on `log2 N1`, `log2 N2` and `log2 (N1 N2)`.
pub const DEFAULT_MAX_LOG2_SIZE: f64 = 900.0;

/// Exponents this close to an integer are treated as that integer, so that
/// exact powers of two are not pushed up by rounding noise in the mutual
/// informations.
const EXPONENT_SNAP: f64 = 1e-9;

/// Bin count `N1` and bin size `N2`.
///
/// Both are integers but may exceed every machine integer type, so they are
/// kept as `f64` together with their base-2 logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookSizes {
    #[serde(rename = "N1")]
    pub n1: f64,
    #[serde(rename = "N2")]
    pub n2: f64,
    pub log2_n1: f64,
    pub log2_n2: f64,
}

impl CodebookSizes {
    /// `log2 (N1 N2 + 1)`, the size of the common alphabet of `K` and `L`.
    pub fn log2_alphabet(&self) -> f64 {
        let words = self.log2_n1 + self.log2_n2;
        words + (-words).exp2().ln_1p() / std::f64::consts::LN_2
    }

    /// `log2 (N1 + 1)`, the number of bits the channel carries.
    pub fn log2_messages(&self) -> f64 {
        self.log2_n1 + (-self.log2_n1).exp2().ln_1p() / std::f64::consts::LN_2
    }

    /// `(N1, N2)` as machine integers when both fit.
    pub fn exact(&self) -> Option<(usize, usize)> {
        let limit = (1u64 << 53) as f64;
        (self.n1 <= limit && self.n2 <= limit).then_some((self.n1 as usize, self.n2 as usize))
    }
}

fn ceil_pow2(exponent: f64) -> (f64, f64) {
    let nearest = exponent.round();
    let e = if (exponent - nearest).abs() <= EXPONENT_SNAP {
        nearest
    } else {
        exponent
    };
    let value = e.exp2().ceil().max(1.0);
    (value, value.log2())
}

/// `N1 = ⌈2^{n(I(U;X) - I(U;Y) + 3δ)}⌉` and `N2 = ⌈2^{n(I(U;Y) - 2δ)}⌉`.
///
/// Exponents above `max_log2` are rejected rather than saturated.
pub fn codebook_sizes_from_info(i_ux: f64, i_uy: f64, n: usize, delta: f64, max_log2: f64) -> Result<CodebookSizes> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be > 0, got {delta}")));
    }
    if n == 0 {
        return Err(Error::param("n", "block length must be positive"));
    }
    let n_f = n as f64;
    let e1 = n_f * (i_ux - i_uy + 3.0 * delta);
    let e2 = n_f * (i_uy - 2.0 * delta);
    for (what, e) in [("log2 N1", e1), ("log2 N2", e2), ("log2 N1N2", e1.max(0.0) + e2.max(0.0))] {
        if !e.is_finite() || e > max_log2 {
            return Err(Error::ResourceCap {
                what,
                needed: e,
                limit: max_log2,
            });
        }
    }
    let (n1, log2_n1) = ceil_pow2(e1);
    let (n2, log2_n2) = ceil_pow2(e2);
    Ok(CodebookSizes {
        n1,
        n2,
        log2_n1,
        log2_n2,
    })
}

/// Codebook sizes for the test channel `aux` on `src`.
pub fn codebook_sizes(aux: &AuxChannel, src: &JointSource, n: usize, delta: f64) -> Result<CodebookSizes> {
    let (i_ux, i_uy) = aux.info_pair(src)?;
    codebook_sizes_from_info(i_ux, i_uy, n, delta, DEFAULT_MAX_LOG2_SIZE)
}

/// A value of `K` or `L`: a codeword, addressed by 1-based bin and slot, or
/// the fallback word `u0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Codeword {
    Word { bin: usize, slot: usize },
    Fallback,
}

/// The fallback word: all zeros unless that sequence has type `t`, then
/// `0…01`.
pub fn fallback_word(t: &TypeClass) -> Result<Vec<usize>> {
    if t.alphabet_size() < 2 {
        return Err(Error::param("card_u", "fallback word needs at least two symbols"));
    }
    let mut u0 = vec![0; t.n()];
    if t.is_constant_first_symbol() {
        u0[t.n() - 1] = 1;
    }
    Ok(u0)
}

/// `N1` bins of `N2` words of a common type, the fallback word, and the joint
/// laws the encoder and decoder test against.
#[derive(Debug, Clone)]
pub struct CodebookSet {
    n1: usize,
    n2: usize,
    n: usize,
    words: Vec<usize>,
    u0: Vec<usize>,
    word_type: TypeClass,
    joint_ux: JointSource,
    joint_uy: JointSource,
}

impl CodebookSet {
    /// Random codebook: every word drawn uniformly from the type class of
    /// the quantized `P_U`.
    pub fn generate(
        aux: &AuxChannel,
        src: &JointSource,
        n: usize,
        sizes: &CodebookSizes,
        seed: u64,
        max_symbols: f64,
    ) -> Result<Self> {
        let needed = sizes.n1 * sizes.n2 * n as f64;
        let (n1, n2) = match sizes.exact() {
            Some(nn) if needed <= max_symbols => nn,
            _ => {
                return Err(Error::ResourceCap {
                    what: "codebook symbols",
                    needed,
                    limit: max_symbols,
                })
            }
        };
        let word_type = quantize_to_type(&aux.marginal_u(src)?, n)?;
        let u0 = fallback_word(&word_type)?;
        let mut rng = rng_from_seed(derive_seed(seed, stream::CODEBOOK, 0));
        let mut words = Vec::with_capacity(n1 * n2 * n);
        for _ in 0..n1 * n2 {
            words.extend(crate::typicality::sample_from_type_with(&word_type, &mut rng));
        }
        Ok(Self {
            n1,
            n2,
            n,
            words,
            u0,
            word_type,
            joint_ux: aux.joint_ux(src)?,
            joint_uy: aux.joint_uy(src)?,
        })
    }

    /// Codebook with explicit words `bins[i][j]`, for constructed scenarios.
    ///
    /// All words must share one type; `u0` must differ from every word.
    pub fn from_words(bins: Vec<Vec<Vec<usize>>>, u0: Vec<usize>, aux: &AuxChannel, src: &JointSource) -> Result<Self> {
        let n1 = bins.len();
        let n2 = bins.first().map_or(0, Vec::len);
        if n1 == 0 || n2 == 0 || bins.iter().any(|b| b.len() != n2) {
            return Err(Error::DimensionMismatch("bins must be a non-empty rectangle".into()));
        }
        let n = u0.len();
        let card_u = aux.card_u();
        let word_type = type_of(&bins[0][0], card_u)?;
        let mut words = Vec::with_capacity(n1 * n2 * n);
        for word in bins.iter().flatten() {
            if word.len() != n {
                return Err(Error::LengthMismatch {
                    left: word.len(),
                    right: n,
                });
            }
            if type_of(word, card_u)? != word_type {
                return Err(Error::param("bins", "words must share one type"));
            }
            if *word == u0 {
                return Err(Error::param("u0", "fallback word collides with a codeword"));
            }
            words.extend_from_slice(word);
        }
        Ok(Self {
            n1,
            n2,
            n,
            words,
            u0,
            word_type,
            joint_ux: aux.joint_ux(src)?,
            joint_uy: aux.joint_uy(src)?,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn word_type(&self) -> &TypeClass {
        &self.word_type
    }

    pub fn u0(&self) -> &[usize] {
        &self.u0
    }

    /// Word at 1-based `(bin, slot)`.
    pub fn word(&self, bin: usize, slot: usize) -> &[usize] {
        assert!((1..=self.n1).contains(&bin) && (1..=self.n2).contains(&slot));
        let start = ((bin - 1) * self.n2 + slot - 1) * self.n;
        &self.words[start..start + self.n]
    }

    /// The sequence a [`Codeword`] stands for.
    pub fn sequence(&self, c: Codeword) -> &[usize] {
        match c {
            Codeword::Word { bin, slot } => self.word(bin, slot),
            Codeword::Fallback => &self.u0,
        }
    }

    /// Index of the fallback bin, `N1 + 1`.
    pub fn fallback_bin(&self) -> usize {
        self.n1 + 1
    }

    /// First word in row-major order jointly typical with `x` under `P_UX`,
    /// with its bin; `(u0, N1 + 1)` when there is none.
    pub fn encode(&self, x: &[usize], params: TypicalityParams) -> Result<(Codeword, usize)> {
        self.check_len(x)?;
        for bin in 1..=self.n1 {
            for slot in 1..=self.n2 {
                if is_jointly_typical(self.word(bin, slot), x, &self.joint_ux, params)? {
                    return Ok((Codeword::Word { bin, slot }, bin));
                }
            }
        }
        Ok((Codeword::Fallback, self.fallback_bin()))
    }

    /// The unique word of bin `bin` jointly typical with `y` under `P_UY`;
    /// `u0` when there is none, several, or `bin = N1 + 1`.
    pub fn decode(&self, y: &[usize], bin: usize, params: TypicalityParams) -> Result<Codeword> {
        self.check_len(y)?;
        if bin == 0 || bin > self.fallback_bin() {
            return Err(Error::param("bin", format!("{bin} outside 1..={}", self.fallback_bin())));
        }
        if bin == self.fallback_bin() {
            return Ok(Codeword::Fallback);
        }
        let mut found = None;
        for slot in 1..=self.n2 {
            if is_jointly_typical(self.word(bin, slot), y, &self.joint_uy, params)? {
                if found.is_some() {
                    return Ok(Codeword::Fallback);
                }
                found = Some(Codeword::Word { bin, slot });
            }
        }
        Ok(found.unwrap_or(Codeword::Fallback))
    }

    fn check_len(&self, seq: &[usize]) -> Result<()> {
        if seq.len() != self.n {
            return Err(Error::LengthMismatch {
                left: seq.len(),
                right: self.n,
            });
        }
        Ok(())
    }
}
