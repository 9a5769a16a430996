//! Trial sampler over the random-codebook ensemble.
//!
//! When `N1 N2` words cannot be stored, a trial is simulated by drawing only
//! the parts of a fresh random codebook that the encoder and decoder look
//! at. Every word is uniform on the type class `T_U`, so for a fixed `x` the
//! chance that a word is jointly typical with it is
//!
//! ```text
//! p(x) = Σ_M  Π_a multinomial(N_x(a); M(·, a)) / |T_U|
//! ```
//!
//! summed over the typical joint count matrices `M` with row sums equal to
//! the word type and column sums equal to the counts of `x`. The index of the
//! first typical word is then geometric, and the typical word itself is drawn
//! by picking `M` in proportion to its weight and shuffling within each
//! symbol class of `x`.
//!
//! The decoder needs, for the other words of the relevant bin, the chance of
//! being typical with `y`. Words scanned before the encoder's hit are known
//! not to be typical with `x`; that dependence is bounded rather than
//! computed, always in the direction of more decoding errors.

use rand::seq::SliceRandom;
use rand::Rng;

use super::channel::BinChannel;
use super::codebook::CodebookSizes;
use crate::error::{Error, Result};
use crate::source::JointSource;
use crate::typicality::{cell_is_typical, is_jointly_typical, TypeClass, TypicalityParams};

/// Ceiling on search nodes when enumerating joint types for one sequence.
pub(crate) const MAX_NODES: usize = 5_000_000;

/// Outcome of one ensemble trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Draw {
    pub fallback: bool,
    pub channel_error: bool,
    pub agreed: bool,
}

struct JointTypes {
    cols: usize,
    matrices: Vec<usize>,
    ln_weights: Vec<f64>,
    ln_total: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Ensemble {
    n: usize,
    card_u: usize,
    word_type: TypeClass,
    ln_fact: Vec<f64>,
    ln_class: f64,
    joint_ux: JointSource,
    joint_uy: JointSource,
    params: TypicalityParams,
    n1: f64,
    n2: f64,
}

impl Ensemble {
    pub fn new(
        word_type: TypeClass,
        joint_ux: JointSource,
        joint_uy: JointSource,
        sizes: &CodebookSizes,
        params: TypicalityParams,
    ) -> Self {
        let n = word_type.n();
        let mut ln_fact = Vec::with_capacity(n + 1);
        ln_fact.push(0.0);
        for k in 1..=n {
            ln_fact.push(ln_fact[k - 1] + (k as f64).ln());
        }
        let ln_class = ln_fact[n] - word_type.counts().iter().map(|&c| ln_fact[c]).sum::<f64>();
        Self {
            n,
            card_u: word_type.alphabet_size(),
            word_type,
            ln_fact,
            ln_class,
            joint_ux,
            joint_uy,
            params,
            n1: sizes.n1,
            n2: sizes.n2,
        }
    }

    /// Typical joint count matrices `M[u][c]` against a sequence with symbol
    /// counts `seq_counts`, and their weights.
    fn joint_types(&self, seq_counts: &[usize], joint: &JointSource, keep: bool) -> Result<JointTypes> {
        let cols = seq_counts.len();
        let mut out = JointTypes {
            cols,
            matrices: Vec::new(),
            ln_weights: Vec::new(),
            ln_total: f64::NEG_INFINITY,
        };
        let mut cell = vec![0usize; self.card_u * cols];
        let mut row_rem = self.word_type.counts().to_vec();
        let mut col_rem = seq_counts.to_vec();
        let mut nodes = 0usize;
        let mut weights = Vec::new();
        self.fill(0, joint, &mut cell, &mut row_rem, &mut col_rem, &mut nodes, &mut |m: &[usize]| {
            let ln_w: f64 = (0..cols)
                .map(|c| self.ln_fact[seq_counts[c]] - (0..self.card_u).map(|u| self.ln_fact[m[u * cols + c]]).sum::<f64>())
                .sum();
            weights.push(ln_w);
            if keep {
                out.matrices.extend_from_slice(m);
            }
        })?;
        if let Some(max) = weights.iter().copied().reduce(f64::max) {
            out.ln_total = max + weights.iter().map(|w| (w - max).exp()).sum::<f64>().ln();
        }
        out.ln_weights = weights;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn fill(
        &self,
        k: usize,
        joint: &JointSource,
        cell: &mut [usize],
        row_rem: &mut [usize],
        col_rem: &mut [usize],
        nodes: &mut usize,
        leaf: &mut dyn FnMut(&[usize]),
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > MAX_NODES {
            return Err(Error::ResourceCap {
                what: "joint type enumeration nodes",
                needed: *nodes as f64,
                limit: MAX_NODES as f64,
            });
        }
        let cols = col_rem.len();
        if k == cell.len() {
            leaf(cell);
            return Ok(());
        }
        let (u, c) = (k / cols, k % cols);
        let last_col = c + 1 == cols;
        let last_row = u + 1 == self.card_u;
        let (lo, hi) = if last_col {
            if row_rem[u] > col_rem[c] || (last_row && row_rem[u] != col_rem[c]) {
                return Ok(());
            }
            (row_rem[u], row_rem[u])
        } else if last_row {
            if col_rem[c] > row_rem[u] {
                return Ok(());
            }
            (col_rem[c], col_rem[c])
        } else {
            let p = joint.p(u, c);
            let top = row_rem[u].min(col_rem[c]);
            if p <= 0.0 {
                (0, 0)
            } else {
                let n = self.n as f64;
                let slack = self.params.epsilon + 1e-9;
                let lo = ((p - slack) * n).floor().max(0.0) as usize;
                let hi = (((p + slack) * n).ceil() as usize).min(top);
                (lo, hi)
            }
        };
        for v in lo..=hi {
            if !cell_is_typical(v, self.n, joint.p(u, c), self.params.epsilon) {
                continue;
            }
            cell[k] = v;
            row_rem[u] -= v;
            col_rem[c] -= v;
            let r = self.fill(k + 1, joint, cell, row_rem, col_rem, nodes, leaf);
            row_rem[u] += v;
            col_rem[c] += v;
            r?;
        }
        cell[k] = 0;
        Ok(())
    }

    fn counts(seq: &[usize], size: usize) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; size];
        for &s in seq {
            *counts
                .get_mut(s)
                .ok_or_else(|| Error::param("sequence", format!("symbol {s} outside alphabet of {size}")))? += 1;
        }
        Ok(counts)
    }

    /// Probability that one word of the ensemble is typical with a sequence
    /// having these joint types.
    fn prob(&self, t: &JointTypes) -> f64 {
        (t.ln_total - self.ln_class).exp().min(1.0)
    }

    /// A word uniform over those of type `T_U` jointly typical with `x`.
    fn typical_word<R: Rng + ?Sized>(&self, x: &[usize], t: &JointTypes, rng: &mut R) -> Vec<usize> {
        let target = rng.random::<f64>();
        let mut acc = 0.0;
        let mut pick = t.ln_weights.len() - 1;
        for (i, w) in t.ln_weights.iter().enumerate() {
            acc += (w - t.ln_total).exp();
            if target < acc {
                pick = i;
                break;
            }
        }
        let m = &t.matrices[pick * self.card_u * t.cols..(pick + 1) * self.card_u * t.cols];
        let mut word = vec![0usize; x.len()];
        for c in 0..t.cols {
            let mut symbols: Vec<usize> = (0..self.card_u)
                .flat_map(|u| std::iter::repeat_n(u, m[u * t.cols + c]))
                .collect();
            symbols.shuffle(rng);
            let slots = x.iter().enumerate().filter(|&(_, &s)| s == c).map(|(i, _)| i);
            for (i, s) in slots.zip(symbols) {
                word[i] = s;
            }
        }
        word
    }

    pub fn trial<R: Rng + ?Sized>(&self, x: &[usize], y: &[usize], g: f64, channel: &BinChannel, rng: &mut R) -> Result<Draw> {
        let hits_x = self.joint_types(&Self::counts(x, self.joint_ux.y_size())?, &self.joint_ux, true)?;
        let hits_y = self.joint_types(&Self::counts(y, self.joint_uy.y_size())?, &self.joint_uy, false)?;
        let p = self.prob(&hits_x);
        let q = self.prob(&hits_y);
        let ln_miss = (-p).ln_1p();
        let words = self.n1 * self.n2;
        let p_fallback = if p == 0.0 { 1.0 } else { (words * ln_miss).exp() };
        let fallback = rng.random::<f64>() < p_fallback;

        if fallback {
            let delivered = match channel.messages().filter(|_| !channel.is_idealized()) {
                Some(m) => channel.transmit(m, g, rng)? == m,
                None => channel.supports(g),
            };
            if delivered {
                return Ok(Draw {
                    fallback,
                    channel_error: false,
                    agreed: true,
                });
            }
            // The wrong bin holds `N2` words, none typical with `x`; the
            // decoder disagrees only if exactly one is typical with `y`.
            let lo = (q - p).max(0.0) / (1.0 - p);
            let hi = (q / (1.0 - p)).min(1.0);
            let peak = (1.0 / self.n2).clamp(lo, hi);
            let one = exactly_one(self.n2, peak);
            return Ok(Draw {
                fallback,
                channel_error: true,
                agreed: rng.random::<f64>() >= one,
            });
        }

        let bin_hit = -(self.n2 * ln_miss).exp_m1();
        let delivered = match channel.messages().filter(|_| !channel.is_idealized()) {
            Some(m) => {
                let bin = 1 + truncated_geometric(bin_hit, (m - 1) as f64, rng) as usize;
                channel.transmit(bin, g, rng)? == bin
            }
            None => channel.supports(g),
        };
        let slot = truncated_geometric(p, self.n2, rng);
        let word = self.typical_word(x, &hits_x, rng);
        if !delivered {
            return Ok(Draw {
                fallback,
                channel_error: true,
                agreed: false,
            });
        }
        if !is_jointly_typical(&word, y, &self.joint_uy, self.params)? {
            return Ok(Draw {
                fallback,
                channel_error: false,
                agreed: false,
            });
        }
        let q_before = if p < 1.0 { (q / (1.0 - p)).min(1.0) } else { 1.0 };
        let mut ln_clear = (self.n2 - 1.0 - slot) * (-q).ln_1p();
        if slot > 0.0 {
            ln_clear += slot * (-q_before).ln_1p();
        }
        Ok(Draw {
            fallback,
            channel_error: false,
            agreed: rng.random::<f64>() < ln_clear.exp(),
        })
    }
}

/// `P[Binomial(n, q) = 1]`.
fn exactly_one(n: f64, q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return if n == 1.0 { 1.0 } else { 0.0 };
    }
    (n.ln() + q.ln() + (n - 1.0) * (-q).ln_1p()).exp()
}

/// Index of the first success among `len` Bernoulli(`p`) trials, given that
/// there is one.
fn truncated_geometric<R: Rng + ?Sized>(p: f64, len: f64, rng: &mut R) -> f64 {
    let v: f64 = rng.random();
    if p >= 1.0 || len <= 1.0 {
        return 0.0;
    }
    let ln_miss = (-p).ln_1p();
    let any = -(len * ln_miss).exp_m1();
    ((-(v * any)).ln_1p() / ln_miss).floor().clamp(0.0, len - 1.0)
}
