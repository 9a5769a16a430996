//! Multi-start boundary-tracking search.
//!
//! Both `I(U;X)` and the excess `I(U;X|Y)` are convex in the test channel, so
//! the feasible set is convex and the maximum sits on its boundary whenever
//! `U = X` is infeasible. Each raw candidate `w` is mapped onto the feasible
//! set by mixing it toward the channel that outputs `U` independently of `X`
//! with the same `P_U`; along that segment the excess is convex and vanishes
//! at the far end, so the first feasible mixing weight is found by bracketing.
//! A pattern search over mass transfers inside each column then climbs the
//! resulting objective.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aux::{column_entropy, AuxChannel, InfoEval};
use super::{check_budget, default_card_u, CapacityResult};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scalar::Real;
use crate::source::JointSource;

/// Settings for [`cr_capacity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub seed: u64,
    /// Random starts on top of the deterministic ones.
    pub random_starts: usize,
    /// Auxiliary alphabet size; `None` means `|X| + 1`.
    pub card_u: Option<usize>,
    /// A pass that improves the objective by less than this ends a step level.
    pub tol: f64,
    /// Pattern search stops once the transfer step falls below this.
    pub min_step: f64,
    pub max_passes: usize,
    /// Fan starts out over the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            random_starts: 12,
            card_u: None,
            tol: 1e-9,
            min_step: 1e-9,
            max_passes: 20_000,
            parallel: true,
        }
    }
}

/// Maximizes `I(U;X)` over `P(U|X)` with `I(U;X) - I(U;Y) ≤ budget`.
///
/// Deterministic for a fixed `opts.seed`.
pub fn cr_capacity<T: Real>(
    src: &JointSource<T>,
    budget: T,
    opts: &OptimizerOptions,
) -> Result<CapacityResult<T>> {
    check_budget(budget)?;
    let card_x = src.x_size();
    let card_u = opts.card_u.unwrap_or_else(|| default_card_u(card_x));
    if card_u == 0 {
        return Err(Error::param("card_u", "must be positive"));
    }

    // U = X attains H(X), the unconstrained maximum, whenever it fits.
    if card_u >= card_x && src.conditional_entropy_x_given_y() <= budget + T::round_tol() {
        let argmax = AuxChannel::identity(card_x, card_u)?;
        let (value, i_uy) = argmax.info_pair(src)?;
        return Ok(CapacityResult {
            value,
            excess: (value - i_uy).max(T::zero()),
            argmax,
            budget,
            iterations: 0,
        });
    }

    let starts = starting_points::<T>(card_x, card_u, src, opts);
    let search = |start: &Vec<Vec<T>>| {
        let mut local = LocalSearch::new(src, card_u, budget, opts);
        local.run(start.clone())
    };
    let outcomes: Vec<Outcome<T>> = if opts.parallel {
        starts.par_iter().map(search).collect()
    } else {
        starts.iter().map(search).collect()
    };

    let iterations = outcomes.iter().map(|o| o.evaluations).sum();
    let best = outcomes
        .into_iter()
        .reduce(|best, o| if o.value > best.value { o } else { best })
        .expect("at least one start");
    Ok(CapacityResult {
        value: best.value,
        argmax: AuxChannel::from_columns(&best.cols),
        excess: best.excess,
        budget,
        iterations,
    })
}

struct Outcome<T> {
    value: T,
    excess: T,
    cols: Vec<Vec<T>>,
    evaluations: usize,
}

/// Restricted-growth strings: one representative per partition of `X` into
/// at most `card_u` cells.
fn partitions(card_x: usize, card_u: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max_used: usize, card_x: usize, card_u: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == card_x {
            out.push(prefix.clone());
            return;
        }
        let limit = (max_used + 2).min(card_u);
        for s in 0..limit {
            prefix.push(s);
            rec(prefix, max_used.max(s), card_x, card_u, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if card_x == 0 {
        return out;
    }
    let mut prefix = vec![0];
    rec(&mut prefix, 0, card_x, card_u, &mut out);
    out
}

const MAX_PARTITION_STARTS: usize = 64;

fn starting_points<T: Real>(
    card_x: usize,
    card_u: usize,
    src: &JointSource<T>,
    opts: &OptimizerOptions,
) -> Vec<Vec<Vec<T>>> {
    let deterministic = |map: &[usize]| -> Vec<Vec<T>> {
        map.iter()
            .map(|&u| {
                let mut col = vec![T::zero(); card_u];
                col[u] = T::one();
                col
            })
            .collect()
    };
    let mut starts = Vec::new();

    // Finest partition first: with the boundary repair this is the family of
    // mixtures between U = X and an independent U.
    let mut parts = partitions(card_x, card_u);
    parts.reverse();
    parts.truncate(MAX_PARTITION_STARTS);
    starts.extend(parts.iter().map(|m| deterministic(m)));

    // Source-aware start: U = X blurred toward the X marginal.
    if card_u >= card_x {
        let px = src.marginal_x();
        starts.push(
            (0..card_x)
                .map(|x| {
                    let mut col = vec![T::zero(); card_u];
                    for (u, &p) in px.iter().enumerate() {
                        col[u] = T::lit(0.5) * p;
                    }
                    col[x] = col[x] + T::lit(0.5);
                    col
                })
                .collect(),
        );
    }

    for i in 0..opts.random_starts {
        let mut rng = rng_from_seed(derive_seed(opts.seed, stream::OPTIMIZER, i as u64));
        starts.push(
            (0..card_x)
                .map(|_| {
                    // flat Dirichlet via normalized exponentials
                    let e: Vec<f64> = (0..card_u)
                        .map(|_| -(1.0 - rng.random::<f64>()).ln())
                        .collect();
                    let s: f64 = e.iter().sum();
                    e.iter().map(|v| T::lit(v / s)).collect()
                })
                .collect(),
        );
    }
    starts
}

struct LocalSearch<'a, T> {
    eval: InfoEval<T>,
    budget: T,
    opts: &'a OptimizerOptions,
    card_u: usize,
    evaluations: usize,
    mix: Vec<Vec<T>>,
    h_mix: Vec<T>,
}

impl<'a, T: Real> LocalSearch<'a, T> {
    fn new(src: &JointSource<T>, card_u: usize, budget: T, opts: &'a OptimizerOptions) -> Self {
        let card_x = src.x_size();
        Self {
            eval: InfoEval::new(src, card_u),
            budget,
            opts,
            card_u,
            evaluations: 0,
            mix: vec![vec![T::zero(); card_u]; card_x],
            h_mix: vec![T::zero(); card_x],
        }
    }

    fn eval_raw(&mut self, cols: &[Vec<T>]) -> (T, T) {
        self.evaluations += 1;
        for (h, c) in self.h_mix.iter_mut().zip(cols) {
            *h = column_entropy(c);
        }
        let refs: Vec<&[T]> = cols.iter().map(|c| c.as_slice()).collect();
        let h = self.h_mix.clone();
        self.eval.eval_with_col_entropy(&refs, &h)
    }

    fn set_mix(&mut self, cols: &[Vec<T>], center: &[T], t: T) {
        let keep = T::one() - t;
        for (m, c) in self.mix.iter_mut().zip(cols) {
            for ((mv, &cv), &r) in m.iter_mut().zip(c).zip(center) {
                *mv = keep * cv + t * r;
            }
        }
    }

    fn eval_mix(&mut self, cols: &[Vec<T>], center: &[T], t: T) -> (T, T) {
        self.set_mix(cols, center, t);
        let mix = std::mem::take(&mut self.mix);
        let out = self.eval_raw(&mix);
        self.mix = mix;
        out
    }

    /// Objective at the feasible point associated with `cols`; returns
    /// `(I(U;X), excess, mixing weight)`.
    fn objective(&mut self, cols: &[Vec<T>]) -> (T, T, T) {
        let (iux, excess) = self.eval_raw(cols);
        let budget = self.budget + T::round_tol();
        if excess <= budget {
            return (iux, excess, T::zero());
        }
        let px = self.eval.px().to_vec();
        let center: Vec<T> = (0..self.card_u)
            .map(|u| cols.iter().zip(&px).map(|(c, &p)| c[u] * p).sum())
            .collect();
        // Illinois false position on g(t) = excess(t) - budget, convex and
        // decreasing on [0, 1] with g(0) > 0 >= g(1).
        let (mut lo, mut g_lo) = (T::zero(), excess - budget);
        let (mut hi, mut g_hi) = (T::one(), -budget);
        let (mut best_iux, mut best_exc) = (T::zero(), T::zero());
        let mut side = 0i8;
        let tol = T::lit(1e-15);
        let mut found_hi = false;
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mut t = if g_lo - g_hi > T::zero() {
                lo + (hi - lo) * g_lo / (g_lo - g_hi)
            } else {
                lo + (hi - lo) / T::lit(2.0)
            };
            if !(t > lo && t < hi) {
                t = lo + (hi - lo) / T::lit(2.0);
                if !(t > lo && t < hi) {
                    break;
                }
            }
            let (i_t, e_t) = self.eval_mix(cols, &center, t);
            let g_t = e_t - budget;
            if g_t <= T::zero() {
                hi = t;
                g_hi = g_t;
                best_iux = i_t;
                best_exc = e_t;
                found_hi = true;
                if side == -1 {
                    g_lo = g_lo / T::lit(2.0);
                }
                side = -1;
                if g_t >= -T::lit(1e-13) {
                    break;
                }
            } else {
                lo = t;
                g_lo = g_t;
                if side == 1 {
                    g_hi = g_hi / T::lit(2.0);
                }
                side = 1;
            }
        }
        if !found_hi {
            let (i_t, e_t) = self.eval_mix(cols, &center, hi);
            best_iux = i_t;
            best_exc = e_t;
        }
        (best_iux, best_exc, hi)
    }

    fn run(&mut self, start: Vec<Vec<T>>) -> Outcome<T> {
        let mut cols = start;
        let (mut value, _, _) = self.objective(&cols);
        let card_u = self.card_u;
        let card_x = cols.len();
        let mut step = T::lit(0.5);
        let min_step = T::lit(self.opts.min_step);
        let tol = T::lit(self.opts.tol);
        let mut passes = 0;
        let mut trial = cols.clone();
        while passes < self.opts.max_passes {
            passes += 1;
            let before = value;
            for x in 0..card_x {
                for from in 0..card_u {
                    for to in 0..card_u {
                        if from == to || cols[x][from] <= T::zero() {
                            continue;
                        }
                        let amount = step.min(cols[x][from]);
                        trial[x].copy_from_slice(&cols[x]);
                        trial[x][from] = trial[x][from] - amount;
                        trial[x][to] = trial[x][to] + amount;
                        let (v, _, _) = self.objective(&trial);
                        if v > value {
                            value = v;
                            cols[x].copy_from_slice(&trial[x]);
                        } else {
                            trial[x].copy_from_slice(&cols[x]);
                        }
                    }
                }
            }
            if value - before < tol {
                if step <= min_step {
                    break;
                }
                step = step / T::lit(2.0);
            }
        }
        let (value, excess, t) = self.objective(&cols);
        let px = self.eval.px().to_vec();
        let center: Vec<T> = (0..card_u)
            .map(|u| cols.iter().zip(&px).map(|(c, &p)| c[u] * p).sum())
            .collect();
        self.set_mix(&cols, &center, t);
        let mut feasible = self.mix.clone();
        for col in &mut feasible {
            let s: T = col.iter().copied().sum();
            col.iter_mut().for_each(|v| *v = *v / s);
        }
        Outcome {
            value,
            excess,
            cols: feasible,
            evaluations: self.evaluations,
        }
    }
}
