//! Finite two-component memoryless sources `P_XY`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::{entropy, Real};

/// Joint probability matrix `p[x][y]`, stored row-major.
///
/// Immutable once built; every constructor checks nonnegativity and that the
/// entries sum to one within [`Real::prob_tol`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointSource<T = f64> {
    joint: Vec<T>,
    x_size: usize,
    y_size: usize,
}

/// Sequences `(x^n, y^n)` drawn from a [`JointSource`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSample {
    pub x_seq: Vec<usize>,
    pub y_seq: Vec<usize>,
    pub seed: u64,
}

impl SourceSample {
    pub fn len(&self) -> usize {
        self.x_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_seq.is_empty()
    }
}

fn check_entries<T: Real>(joint: &[T], x_size: usize, y_size: usize) -> Result<()> {
    if x_size == 0 || y_size == 0 {
        return Err(Error::DimensionMismatch(format!(
            "alphabet sizes must be positive, got {x_size}x{y_size}"
        )));
    }
    if joint.len() != x_size * y_size {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for a {x_size}x{y_size} matrix",
            joint.len()
        )));
    }
    for (index, &v) in joint.iter().enumerate() {
        if !v.is_finite() || v < T::zero() {
            return Err(Error::InvalidEntry {
                index,
                value: v.as_f64(),
            });
        }
    }
    Ok(())
}

impl<T: Real> JointSource<T> {
    /// Row-major matrix with `x_size` rows and `y_size` columns.
    pub fn new(joint: Vec<T>, x_size: usize, y_size: usize) -> Result<Self> {
        check_entries(&joint, x_size, y_size)?;
        let sum: T = joint.iter().copied().sum();
        if (sum - T::one()).abs() > T::prob_tol() {
            return Err(Error::NotNormalized { sum: sum.as_f64() });
        }
        Ok(Self {
            joint,
            x_size,
            y_size,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let x_size = rows.len();
        let y_size = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != y_size) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.concat(), x_size, y_size)
    }

    /// Accepts arbitrary nonnegative weights and rescales them to sum to one.
    pub fn normalized(weights: Vec<T>, x_size: usize, y_size: usize) -> Result<Self> {
        check_entries(&weights, x_size, y_size)?;
        let sum: T = weights.iter().copied().sum();
        if sum <= T::zero() {
            return Err(Error::NotNormalized { sum: sum.as_f64() });
        }
        let joint = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self {
            joint,
            x_size,
            y_size,
        })
    }

    /// Doubly symmetric binary source: uniform `X`, `Y = X` flipped with
    /// probability `p`.
    pub fn dsbs(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidProbability { value: p.as_f64() });
        }
        let half = T::lit(0.5);
        let same = half * (T::one() - p);
        let flip = half * p;
        Self::new(vec![same, flip, flip, same], 2, 2)
    }

    /// `X` and `Y` independent with the given marginals.
    pub fn independent(px: &[T], py: &[T]) -> Result<Self> {
        let joint = px
            .iter()
            .flat_map(|&a| py.iter().map(move |&b| a * b))
            .collect();
        Self::new(joint, px.len(), py.len())
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn joint(&self) -> &[T] {
        &self.joint
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> T {
        self.joint[x * self.y_size + y]
    }

    pub fn marginal_x(&self) -> Vec<T> {
        self.joint
            .chunks(self.y_size)
            .map(|row| row.iter().copied().sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.y_size];
        for row in self.joint.chunks(self.y_size) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o = *o + v;
            }
        }
        out
    }

    pub fn entropy_x(&self) -> T {
        entropy(&self.marginal_x())
    }

    pub fn entropy_y(&self) -> T {
        entropy(&self.marginal_y())
    }

    pub fn joint_entropy(&self) -> T {
        entropy(&self.joint)
    }

    /// `H(X|Y) = H(X,Y) - H(Y)`, clamped at zero against rounding.
    pub fn conditional_entropy_x_given_y(&self) -> T {
        (self.joint_entropy() - self.entropy_y()).max(T::zero())
    }

    /// `I(X;Y) = H(X) - H(X|Y)`, clamped at zero against rounding.
    pub fn mutual_info_xy(&self) -> T {
        (self.entropy_x() - self.conditional_entropy_x_given_y()).max(T::zero())
    }

    /// `n` i.i.d. pairs. The same seed always yields the same sequences.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SourceSample> {
        if n == 0 {
            return Err(Error::param("n", "sample length must be at least 1"));
        }
        let mut rng = rng_from_seed(seed);
        let (x_seq, y_seq) = self.sample_with(n, &mut rng);
        Ok(SourceSample { x_seq, y_seq, seed })
    }

    pub(crate) fn sample_with<R: rand::Rng>(&self, n: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
        let mut cumulative = Vec::with_capacity(self.joint.len());
        let mut acc = 0.0f64;
        for &v in &self.joint {
            acc += v.as_f64();
            cumulative.push(acc);
        }
        let total = acc;
        let last_nonzero = self
            .joint
            .iter()
            .rposition(|&v| v > T::zero())
            .expect("normalized source has a positive entry");
        let mut x_seq = Vec::with_capacity(n);
        let mut y_seq = Vec::with_capacity(n);
        for _ in 0..n {
            let u = rng.random::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
            x_seq.push(idx / self.y_size);
            y_seq.push(idx % self.y_size);
        }
        (x_seq, y_seq)
    }

    /// Converts the scalar type, renormalizing to absorb rounding.
    pub fn cast<U: Real>(&self) -> JointSource<U> {
        let w: Vec<U> = self.joint.iter().map(|v| U::lit(v.as_f64())).collect();
        JointSource::normalized(w, self.x_size, self.y_size).expect("valid source stays valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const H2_01: f64 = 0.468_995_593_589_281_2;

    #[test]
    fn entropy_examples() {
        let uniform = JointSource::independent(&[0.5, 0.5], &[1.0]).unwrap();
        assert_abs_diff_eq!(uniform.entropy_x(), 1.0, epsilon = 1e-15);
        let point = JointSource::independent(&[1.0, 0.0], &[1.0]).unwrap();
        assert_eq!(point.entropy_x(), 0.0);
        let skew = JointSource::independent(&[0.1, 0.9], &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(skew.entropy_x(), 0.468996, epsilon = 1e-6);
    }

    #[test]
    fn conditional_entropy_examples() {
        let same = JointSource::dsbs(0.0).unwrap();
        assert_abs_diff_eq!(same.conditional_entropy_x_given_y(), 0.0, epsilon = 1e-15);
        let indep = JointSource::independent(&[0.3, 0.7], &[0.6, 0.4]).unwrap();
        assert_abs_diff_eq!(
            indep.conditional_entropy_x_given_y(),
            indep.entropy_x(),
            epsilon = 1e-12
        );
        let d = JointSource::dsbs(0.1).unwrap();
        assert_abs_diff_eq!(d.conditional_entropy_x_given_y(), H2_01, epsilon = 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointSource::dsbs(0.5).unwrap();
        assert_abs_diff_eq!(indep.mutual_info_xy(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(JointSource::dsbs(0.0).unwrap().mutual_info_xy(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            JointSource::dsbs(0.1).unwrap().mutual_info_xy(),
            0.531004,
            epsilon = 1e-6
        );
    }

    #[test]
    fn dsbs_construction() {
        assert_eq!(JointSource::dsbs(0.0).unwrap().joint(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(JointSource::dsbs(0.5).unwrap().joint(), &[0.25; 4]);
        let d = JointSource::dsbs(0.1).unwrap();
        for (got, want) in d.joint().iter().zip([0.45, 0.05, 0.05, 0.45]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert!(JointSource::dsbs(-0.1).is_err());
        assert!(JointSource::dsbs(1.5).is_err());
        assert!(JointSource::dsbs(f64::NAN).is_err());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            JointSource::new(vec![0.5, 0.6], 1, 2),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            JointSource::new(vec![1.5, -0.5], 1, 2),
            Err(Error::InvalidEntry { index: 1, .. })
        ));
        assert!(JointSource::new(vec![1.0], 0, 1).is_err());
        assert!(JointSource::<f64>::new(vec![0.5, 0.5], 2, 2).is_err());
        let n = JointSource::normalized(vec![1.0, 3.0], 2, 1).unwrap();
        assert_eq!(n.joint(), &[0.25, 0.75]);
    }

    #[test]
    fn sampling_examples() {
        let same = JointSource::dsbs(0.0).unwrap();
        let s = same.sample(4, 99).unwrap();
        assert_eq!(s.x_seq, s.y_seq);

        let point = JointSource::new(vec![0.0, 0.0, 1.0, 0.0], 2, 2).unwrap();
        let s = point.sample(17, 3).unwrap();
        assert!(s.x_seq.iter().all(|&x| x == 1));
        assert!(s.y_seq.iter().all(|&y| y == 0));

        let d = JointSource::dsbs(0.1).unwrap();
        let s = d.sample(100_000, 2024).unwrap();
        let flips = s.x_seq.iter().zip(&s.y_seq).filter(|(a, b)| a != b).count();
        assert!((flips as f64 / 1e5 - 0.1).abs() < 0.01);

        assert_eq!(d.sample(64, 5).unwrap(), d.sample(64, 5).unwrap());
        assert!(d.sample(0, 5).is_err());
    }

    #[test]
    fn different_seeds_differ() {
        let d = JointSource::dsbs(0.3).unwrap();
        let base = d.sample(32, 0).unwrap();
        for seed in 1..50 {
            assert_ne!(d.sample(32, seed).unwrap().x_seq, base.x_seq);
        }
    }

    #[test]
    fn f32_source() {
        let d = JointSource::<f32>::dsbs(0.1).unwrap();
        assert!((d.mutual_info_xy() - 0.531004).abs() < 1e-5);
        let back: JointSource<f64> = d.cast();
        assert_abs_diff_eq!(back.mutual_info_xy(), 0.531004, epsilon = 1e-5);
    }
}
