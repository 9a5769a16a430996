//! Exhaustive grid search for the capacity maximization.
//!
//! Every column `w[·][x]` ranges over the simplex lattice with step
//! `1 / (grid_steps - 1)`. The search is single-threaded and deterministic;
//! it shares nothing with the main optimizer beyond the information
//! evaluator.
//!
//! Both information terms are invariant under relabeling of `U`, so the
//! first column only visits non-increasing lattice points. Every other
//! point is a relabeling of one that is visited.

use super::aux::{column_entropy, AuxChannel};
use super::{check_budget, CapacityResult};
use crate::error::{Error, Result};
use crate::scalar::{neg_plog2p, Real};
use crate::source::JointSource;

/// Default ceiling on the number of lattice points visited.
pub const DEFAULT_MAX_POINTS: f64 = 2.0e8;

const TABLE_LIMIT: f64 = (1u64 << 24) as f64;

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(total - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of lattice points for the given grid, before the relabeling
/// reduction.
pub fn lattice_size(card_x: usize, card_u: usize, grid_steps: usize) -> f64 {
    let per_column = binomial(grid_steps - 1 + card_u - 1, card_u - 1);
    per_column.powi(card_x as i32)
}

/// Grid-search maximum of `I(U;X)` subject to `I(U;X) - I(U;Y) ≤ budget`,
/// with the default enumeration cap.
pub fn brute_force_cr_capacity<T: Real>(
    src: &JointSource<T>,
    budget: T,
    grid_steps: usize,
    card_u: usize,
) -> Result<CapacityResult<T>> {
    brute_force_cr_capacity_capped(src, budget, grid_steps, card_u, DEFAULT_MAX_POINTS)
}

pub fn brute_force_cr_capacity_capped<T: Real>(
    src: &JointSource<T>,
    budget: T,
    grid_steps: usize,
    card_u: usize,
    max_points: f64,
) -> Result<CapacityResult<T>> {
    check_budget(budget)?;
    if grid_steps < 2 {
        return Err(Error::param("grid_steps", "need at least 2 levels"));
    }
    if card_u == 0 {
        return Err(Error::param("card_u", "must be positive"));
    }
    let card_x = src.x_size();
    let per_column = binomial(grid_steps - 1 + card_u - 1, card_u - 1);
    if per_column > max_points {
        return Err(Error::ResourceCap {
            what: "oracle lattice points",
            needed: per_column,
            limit: max_points,
        });
    }
    let levels = grid_steps - 1;
    let stride = grid_steps;
    let table_len = (stride as f64).powi(card_x as i32);
    if table_len > TABLE_LIMIT {
        return Err(Error::ResourceCap {
            what: "oracle entropy table entries",
            needed: table_len,
            limit: TABLE_LIMIT,
        });
    }

    let mut raw = Vec::new();
    compositions(levels, card_u, &mut Vec::with_capacity(card_u), &mut raw);
    let denom = T::from_usize_lossy(levels);
    let col_h: Vec<T> = raw
        .iter()
        .map(|c| column_entropy(&c.iter().map(|&k| T::from_usize_lossy(k) / denom).collect::<Vec<_>>()))
        .collect();
    let canonical: Vec<usize> = (0..raw.len())
        .filter(|&i| raw[i].windows(2).all(|w| w[0] >= w[1]))
        .collect();
    let all: Vec<usize> = (0..raw.len()).collect();
    let points = canonical.len() as f64 * (all.len() as f64).powi(card_x as i32 - 1);
    if points > max_points {
        return Err(Error::ResourceCap {
            what: "oracle lattice points",
            needed: points,
            limit: max_points,
        });
    }

    // Entry `idx = Σ_x k_x·stride^(last - x)` holds the contributions of a
    // `U` symbol whose column weights are `k_x / levels`: `-p log p` of its
    // mass and the sum of `-p log p` over its `Y` row. The last column is
    // the fastest digit, so the inner sweep reads the table in order.
    let px = src.marginal_x();
    let ny = src.y_size();
    let last = card_x - 1;
    let table: Vec<[T; 2]> = {
        let len = table_len as usize;
        let mut t = Vec::with_capacity(len);
        let mut digits = vec![0usize; card_x];
        for _ in 0..len {
            let weight = |x: usize| T::from_usize_lossy(digits[x]) / denom;
            let mass: T = (0..card_x).map(|x| weight(x) * px[x]).sum();
            let row: T = (0..ny)
                .map(|y| neg_plog2p((0..card_x).map(|x| weight(x) * src.p(x, y)).sum()))
                .sum();
            t.push([neg_plog2p(mass), row]);
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < stride {
                    break;
                }
                *d = 0;
            }
        }
        t
    };
    let h_y = src.entropy_y();

    // Columns `0..last` form an odometer; the last column is swept in the
    // inner loop. The first column is restricted to canonical points.
    let choices = |x: usize| if x == 0 { &canonical } else { &all };
    let inner = choices(last);
    let inner_weights: Vec<usize> = inner.iter().flat_map(|&c| raw[c].iter().copied()).collect();
    let inner_h: Vec<T> = inner.iter().map(|&c| px[last] * col_h[c]).collect();
    let limit = budget + T::round_tol();
    let mut odometer = vec![0usize; last];
    let mut best = (T::neg_infinity(), T::zero(), Vec::new());
    let mut visited = 0usize;
    let mut base = vec![0usize; card_u];
    loop {
        base.iter_mut().for_each(|b| *b = 0);
        let mut cond_prefix = T::zero();
        let mut scale = stride.pow(last as u32);
        for (x, &k) in odometer.iter().enumerate() {
            let c = choices(x)[k];
            cond_prefix = cond_prefix + px[x] * col_h[c];
            for (b, &w) in base.iter_mut().zip(&raw[c]) {
                *b += w * scale;
            }
            scale /= stride;
        }
        let mut found = None;
        for (k, (ws, &h_last)) in inner_weights.chunks_exact(card_u).zip(&inner_h).enumerate() {
            let mut h_u = T::zero();
            let mut h_uy = T::zero();
            for (b, &w) in base.iter().zip(ws) {
                let [eu, euy] = table[b + w];
                h_u = h_u + eu;
                h_uy = h_uy + euy;
            }
            let cond = cond_prefix + h_last;
            let iux = h_u - cond;
            if iux > best.0 && h_uy - h_y - cond <= limit {
                best.0 = iux;
                best.1 = h_uy - h_y - cond;
                found = Some(k);
            }
        }
        if let Some(k) = found {
            best.2 = odometer.clone();
            best.2.push(k);
        }
        visited += inner.len();

        let mut pos = 0;
        loop {
            if pos == last {
                let (value, excess, idx) = best;
                let (value, excess) = (value.max(T::zero()), excess.max(T::zero()));
                let cols: Vec<Vec<T>> = idx
                    .iter()
                    .enumerate()
                    .map(|(x, &k)| {
                        raw[choices(x)[k]].iter().map(|&v| T::from_usize_lossy(v) / denom).collect()
                    })
                    .collect();
                return Ok(CapacityResult {
                    value,
                    argmax: AuxChannel::from_columns(&cols),
                    excess,
                    budget,
                    iterations: visited,
                });
            }
            odometer[pos] += 1;
            if odometer[pos] < choices(pos).len() {
                break;
            }
            odometer[pos] = 0;
            pos += 1;
        }
    }
}
