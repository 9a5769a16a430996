//! Types and strong typicality over finite alphabets.
//!
//! Typicality uses an absolute per-symbol slack: a sequence is typical for
//! `P` when every empirical frequency is within `ε` of `P(a)` and symbols
//! with `P(a) = 0` never occur.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Real;
use crate::source::JointSource;

/// Empirical counts of a length-`n` sequence, indexed by symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeClass {
    counts: Vec<usize>,
    n: usize,
}

impl TypeClass {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::param("counts", "type of an empty sequence"));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, symbol: usize) -> usize {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    pub fn frequencies<T: Real>(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.n);
        self.counts.iter().map(|&c| T::from_usize_lossy(c) / n).collect()
    }

    /// The constant sequence of symbol 0 belongs to this type.
    pub fn is_constant_first_symbol(&self) -> bool {
        self.count(0) == self.n
    }
}

/// Exact empirical counts of `seq` over `0..alphabet_size`.
pub fn type_of(seq: &[usize], alphabet_size: usize) -> Result<TypeClass> {
    if seq.is_empty() {
        return Err(Error::param("seq", "type of an empty sequence"));
    }
    let mut counts = vec![0; alphabet_size];
    for &s in seq {
        match counts.get_mut(s) {
            Some(c) => *c += 1,
            None => {
                return Err(Error::param(
                    "seq",
                    format!("symbol {s} outside alphabet of size {alphabet_size}"),
                ))
            }
        }
    }
    TypeClass::new(counts)
}

/// Type with denominator `n` closest to `p` in total variation.
///
/// Largest-remainder rounding: floors first, then the leftover units go to
/// the largest fractional parts, ties broken by symbol order.
pub fn quantize_to_type<T: Real>(p: &[T], n: usize) -> Result<TypeClass> {
    if n == 0 {
        return Err(Error::param("n", "block length must be at least 1"));
    }
    if p.is_empty() {
        return Err(Error::param("p", "empty distribution"));
    }
    let total: f64 = p.iter().map(|v| v.as_f64()).sum();
    if !(total > 0.0 && p.iter().all(|v| v.as_f64() >= 0.0)) {
        return Err(Error::param("p", "not a probability vector"));
    }
    let scaled: Vec<f64> = p.iter().map(|v| v.as_f64() / total * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..p.len()).filter(|&a| scaled[a] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    if assigned > n {
        // floors can only overshoot through rounding of n * p; trim from the
        // smallest remainders
        let mut excess = assigned - n;
        for &a in order.iter().rev() {
            if excess == 0 {
                break;
            }
            if counts[a] > 0 {
                counts[a] -= 1;
                excess -= 1;
            }
        }
    } else {
        for &a in order.iter().cycle().take(n - assigned) {
            counts[a] += 1;
        }
    }
    TypeClass::new(counts)
}

/// Slack on empirical frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams<T = f64> {
    pub epsilon: T,
}

impl<T: Real> TypicalityParams<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= T::zero()) {
            return Err(Error::param("epsilon", format!("must be >= 0, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    /// `0.05` up to `n = 200`, then shrinking like `n^(-1/3)`.
    pub fn default_for(n: usize) -> Self {
        let base = T::lit(0.05);
        let epsilon = if n <= 200 {
            base
        } else {
            base * (T::lit(200.0) / T::from_usize_lossy(n)).cbrt()
        };
        Self { epsilon }
    }
}

/// Guards `ε = 0` comparisons against representation error in `P`.
const FREQ_ROUNDING: f64 = 8.0 * f64::EPSILON;

/// Shared per-cell test: `count / n` within `ε` of `p`, and `count = 0` when
/// `p = 0`.
#[inline]
pub(crate) fn cell_is_typical(count: usize, n: usize, p: f64, epsilon: f64) -> bool {
    if p <= 0.0 {
        return count == 0;
    }
    (count as f64 / n as f64 - p).abs() <= epsilon + FREQ_ROUNDING
}

fn counts_typical<T: Real>(counts: &[usize], n: usize, p: &[T], epsilon: T) -> bool {
    let eps = epsilon.as_f64();
    if counts.len() > p.len() && counts[p.len()..].iter().any(|&c| c > 0) {
        return false;
    }
    p.iter()
        .enumerate()
        .all(|(a, &pa)| cell_is_typical(counts.get(a).copied().unwrap_or(0), n, pa.as_f64(), eps))
}

/// Strong typicality of `seq` for the distribution `p`.
pub fn is_typical<T: Real>(seq: &[usize], p: &[T], params: TypicalityParams<T>) -> bool {
    if seq.is_empty() {
        return false;
    }
    let mut counts = vec![0usize; p.len()];
    for &s in seq {
        match counts.get_mut(s) {
            Some(c) => *c += 1,
            None => return false,
        }
    }
    counts_typical(&counts, seq.len(), p, params.epsilon)
}

/// Pair counts `N(a, b)` of two equal-length sequences, row-major over `a`.
pub fn pair_counts(seq_a: &[usize], seq_b: &[usize], rows: usize, cols: usize) -> Result<Option<Vec<usize>>> {
    if seq_a.len() != seq_b.len() {
        return Err(Error::LengthMismatch {
            left: seq_a.len(),
            right: seq_b.len(),
        });
    }
    let mut counts = vec![0usize; rows * cols];
    for (&a, &b) in seq_a.iter().zip(seq_b) {
        if a >= rows || b >= cols {
            return Ok(None);
        }
        counts[a * cols + b] += 1;
    }
    Ok(Some(counts))
}

/// Strong joint typicality of `(seq_a, seq_b)` for the joint law `joint`
/// (rows indexed by symbols of `seq_a`).
pub fn is_jointly_typical<T: Real>(
    seq_a: &[usize],
    seq_b: &[usize],
    joint: &JointSource<T>,
    params: TypicalityParams<T>,
) -> Result<bool> {
    let Some(counts) = pair_counts(seq_a, seq_b, joint.x_size(), joint.y_size())? else {
        return Ok(false);
    };
    if seq_a.is_empty() {
        return Ok(false);
    }
    Ok(counts_typical(&counts, seq_a.len(), joint.joint(), params.epsilon))
}

/// Uniformly random sequence of type `t`, reproducible from `seed`.
pub fn sample_from_type(t: &TypeClass, seed: u64) -> Vec<usize> {
    sample_from_type_with(t, &mut rng_from_seed(seed))
}

pub(crate) fn sample_from_type_with<R: rand::Rng>(t: &TypeClass, rng: &mut R) -> Vec<usize> {
    let mut seq = Vec::with_capacity(t.n());
    for (symbol, &c) in t.counts().iter().enumerate() {
        seq.extend(std::iter::repeat_n(symbol, c));
    }
    seq.shuffle(rng);
    seq
}
