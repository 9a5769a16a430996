use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{entropy, neg_plog2p, Real};
use crate::source::JointSource;

/// Test channel `w[u][x] = P(U = u | X = x)`, row-major over `u`.
///
/// The joint law `P(u, x, y) = P_XY(x, y) w[u][x]` makes `U - X - Y` a Markov
/// chain by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxChannel<T = f64> {
    w: Vec<T>,
    card_u: usize,
    card_x: usize,
}

impl<T: Real> AuxChannel<T> {
    pub fn new(w: Vec<T>, card_u: usize, card_x: usize) -> Result<Self> {
        if card_u == 0 || card_x == 0 || w.len() != card_u * card_x {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {card_u}x{card_x} test channel",
                w.len()
            )));
        }
        for (index, &v) in w.iter().enumerate() {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidEntry {
                    index,
                    value: v.as_f64(),
                });
            }
        }
        for x in 0..card_x {
            let s: T = (0..card_u).map(|u| w[u * card_x + x]).sum();
            if (s - T::one()).abs() > T::prob_tol() {
                return Err(Error::NotNormalized { sum: s.as_f64() });
            }
        }
        Ok(Self { w, card_u, card_x })
    }

    /// Builds from columns `cols[x][u]`, the representation the optimizers use.
    pub(crate) fn from_columns(cols: &[Vec<T>]) -> Self {
        let card_x = cols.len();
        let card_u = cols[0].len();
        let mut w = vec![T::zero(); card_u * card_x];
        for (x, col) in cols.iter().enumerate() {
            for (u, &v) in col.iter().enumerate() {
                w[u * card_x + x] = v;
            }
        }
        Self { w, card_u, card_x }
    }

    /// `U = X`, padded with unused symbols up to `card_u`.
    pub fn identity(card_x: usize, card_u: usize) -> Result<Self> {
        if card_u < card_x {
            return Err(Error::param("card_u", "identity needs card_u >= card_x"));
        }
        Self::deterministic(&(0..card_x).collect::<Vec<_>>(), card_u)
    }

    /// `U` constant (always symbol 0).
    pub fn constant(card_x: usize, card_u: usize) -> Result<Self> {
        Self::deterministic(&vec![0; card_x], card_u)
    }

    /// `U = f(X)` for the map `f[x]`.
    pub fn deterministic(map: &[usize], card_u: usize) -> Result<Self> {
        if map.iter().any(|&u| u >= card_u) {
            return Err(Error::param("map", "symbol outside the U alphabet"));
        }
        let card_x = map.len();
        let mut w = vec![T::zero(); card_u * card_x];
        for (x, &u) in map.iter().enumerate() {
            w[u * card_x + x] = T::one();
        }
        Self::new(w, card_u, card_x)
    }

    pub fn card_u(&self) -> usize {
        self.card_u
    }

    pub fn card_x(&self) -> usize {
        self.card_x
    }

    pub fn weights(&self) -> &[T] {
        &self.w
    }

    #[inline]
    pub fn w(&self, u: usize, x: usize) -> T {
        self.w[u * self.card_x + x]
    }

    pub(crate) fn columns(&self) -> Vec<Vec<T>> {
        (0..self.card_x)
            .map(|x| (0..self.card_u).map(|u| self.w(u, x)).collect())
            .collect()
    }

    fn check_dims(&self, src: &JointSource<T>) -> Result<()> {
        if src.x_size() != self.card_x {
            return Err(Error::DimensionMismatch(format!(
                "test channel expects |X| = {}, source has {}",
                self.card_x,
                src.x_size()
            )));
        }
        Ok(())
    }

    /// `P_U` induced by the source's `X` marginal.
    pub fn marginal_u(&self, src: &JointSource<T>) -> Result<Vec<T>> {
        self.check_dims(src)?;
        let px = src.marginal_x();
        Ok((0..self.card_u)
            .map(|u| (0..self.card_x).map(|x| self.w(u, x) * px[x]).sum())
            .collect())
    }

    /// `P_UX` as a joint matrix with rows over `U`.
    pub fn joint_ux(&self, src: &JointSource<T>) -> Result<JointSource<T>> {
        self.check_dims(src)?;
        let px = src.marginal_x();
        let joint = (0..self.card_u)
            .flat_map(|u| (0..self.card_x).map(move |x| (u, x)))
            .map(|(u, x)| self.w(u, x) * px[x])
            .collect();
        JointSource::normalized(joint, self.card_u, self.card_x)
    }

    /// `P_UY(u, y) = Σ_x w[u][x] P_XY(x, y)`, rows over `U`.
    pub fn joint_uy(&self, src: &JointSource<T>) -> Result<JointSource<T>> {
        self.check_dims(src)?;
        let ny = src.y_size();
        let mut joint = vec![T::zero(); self.card_u * ny];
        for u in 0..self.card_u {
            for x in 0..self.card_x {
                let wux = self.w(u, x);
                if wux == T::zero() {
                    continue;
                }
                for y in 0..ny {
                    joint[u * ny + y] = joint[u * ny + y] + wux * src.p(x, y);
                }
            }
        }
        JointSource::normalized(joint, self.card_u, ny)
    }

    /// `(I(U;X), I(U;Y))` in bits.
    pub fn info_pair(&self, src: &JointSource<T>) -> Result<(T, T)> {
        self.check_dims(src)?;
        let mut eval = InfoEval::new(src, self.card_u);
        let (iux, excess) = eval.eval_columns(&self.columns());
        Ok((iux, (iux - excess).max(T::zero())))
    }
}

/// Allocation-free evaluator of `(I(U;X), I(U;X) - I(U;Y))` for a fixed source.
///
/// Uses `I(U;X) = H(U) - Σ_x p(x) H(w_x)` and
/// `I(U;X) - I(U;Y) = H(U,Y) - H(Y) - Σ_x p(x) H(w_x)`.
#[derive(Debug, Clone)]
pub(crate) struct InfoEval<T> {
    px: Vec<T>,
    pxy: Vec<T>,
    h_y: T,
    ny: usize,
    pu: Vec<T>,
    puy: Vec<T>,
}

impl<T: Real> InfoEval<T> {
    pub fn new(src: &JointSource<T>, card_u: usize) -> Self {
        Self {
            px: src.marginal_x(),
            pxy: src.joint().to_vec(),
            h_y: src.entropy_y(),
            ny: src.y_size(),
            pu: vec![T::zero(); card_u],
            puy: vec![T::zero(); card_u * src.y_size()],
        }
    }

    pub fn px(&self) -> &[T] {
        &self.px
    }

    /// Evaluates with precomputed column entropies `h_cols[x] = H(w_x)`.
    pub fn eval_with_col_entropy(&mut self, cols: &[&[T]], h_cols: &[T]) -> (T, T) {
        let ny = self.ny;
        self.pu.iter_mut().for_each(|v| *v = T::zero());
        self.puy.iter_mut().for_each(|v| *v = T::zero());
        let mut cond = T::zero();
        for (x, col) in cols.iter().enumerate() {
            let px = self.px[x];
            cond = cond + px * h_cols[x];
            let row = &self.pxy[x * ny..(x + 1) * ny];
            for (u, &w) in col.iter().enumerate() {
                if w == T::zero() {
                    continue;
                }
                self.pu[u] = self.pu[u] + w * px;
                let dst = &mut self.puy[u * ny..(u + 1) * ny];
                for (d, &p) in dst.iter_mut().zip(row) {
                    *d = *d + w * p;
                }
            }
        }
        let h_u = entropy(&self.pu);
        let h_uy = entropy(&self.puy);
        let iux = (h_u - cond).max(T::zero());
        let excess = (h_uy - self.h_y - cond).max(T::zero());
        (iux, excess)
    }

    pub fn eval_columns<C: AsRef<[T]>>(&mut self, cols: &[C]) -> (T, T) {
        debug_assert_eq!(cols.len(), self.px.len());
        let h: Vec<T> = cols.iter().map(|c| column_entropy(c.as_ref())).collect();
        let refs: Vec<&[T]> = cols.iter().map(|c| c.as_ref()).collect();
        self.eval_with_col_entropy(&refs, &h)
    }
}

pub(crate) fn column_entropy<T: Real>(col: &[T]) -> T {
    col.iter().map(|&v| neg_plog2p(v)).sum()
}
