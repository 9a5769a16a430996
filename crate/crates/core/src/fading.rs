//! Slow-fading gain models, the outage quantile `γ₀` and the outage capacity
//! `log2(1 + P γ₀² / σ²)`.
//!
//! The primitive is the strict-inequality CDF `P[|G| < γ]`. With it the
//! quantile `γ₀ = sup{γ : P[|G| < γ] ≤ η}` is attained (the event `{|G| < γ}`
//! is left-continuous in `γ`), which matters for models with atoms.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

/// Ascending, nonempty list of nonnegative gain magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortedSamples<T>(Vec<T>);

impl<T: Real> SortedSamples<T> {
    pub fn new(mut samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("samples", "empirical gain list is empty"));
        }
        if let Some((index, &v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < T::zero())
        {
            return Err(Error::InvalidEntry {
                index,
                value: v.as_f64(),
            });
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Self(samples))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Number of samples strictly below `gamma`.
    fn count_below(&self, gamma: T) -> usize {
        self.0.partition_point(|&v| v < gamma)
    }

    fn fraction(&self, count: usize) -> T {
        T::from_usize_lossy(count) / T::from_usize_lossy(self.0.len())
    }
}

/// Distribution of the gain magnitude `|G|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GainDistribution<T = f64> {
    /// Deterministic gain `g0 ≥ 0`.
    Constant { g0: T },
    /// `|G|` Rayleigh with scale `σ_r`, i.e. `|G|²` exponential with mean `2σ_r²`.
    Rayleigh { scale: T },
    /// Uniform over the listed magnitudes (with multiplicity).
    Empirical(SortedSamples<T>),
}

impl<T: Real> GainDistribution<T> {
    pub fn constant(g0: T) -> Result<Self> {
        let d = GainDistribution::Constant { g0 };
        d.validate()?;
        Ok(d)
    }

    pub fn rayleigh(scale: T) -> Result<Self> {
        let d = GainDistribution::Rayleigh { scale };
        d.validate()?;
        Ok(d)
    }

    /// Rayleigh model with `E|G|² = 1`.
    pub fn rayleigh_unit_power() -> Self {
        GainDistribution::Rayleigh {
            scale: T::FRAC_1_SQRT_2(),
        }
    }

    pub fn empirical(samples: Vec<T>) -> Result<Self> {
        Ok(GainDistribution::Empirical(SortedSamples::new(samples)?))
    }

    /// Empirical model from complex gain observations; only magnitudes are kept.
    pub fn empirical_from_complex(gains: &[Complex<T>]) -> Result<Self> {
        Self::empirical(gains.iter().map(|g| g.norm()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GainDistribution::Constant { g0 } => {
                if !(g0.is_finite() && g0 >= T::zero()) {
                    return Err(Error::param("g0", format!("must be finite and >= 0, got {g0}")));
                }
            }
            GainDistribution::Rayleigh { scale } => {
                if !(scale.is_finite() && scale > T::zero()) {
                    return Err(Error::param("scale", format!("must be finite and > 0, got {scale}")));
                }
            }
            GainDistribution::Empirical(_) => {}
        }
        Ok(())
    }

    /// `P[|G| < γ]`, atoms at `γ` excluded.
    pub fn cdf_below(&self, gamma: T) -> T {
        match self {
            GainDistribution::Constant { g0 } => {
                if *g0 < gamma {
                    T::one()
                } else {
                    T::zero()
                }
            }
            GainDistribution::Rayleigh { scale } => {
                if gamma <= T::zero() {
                    return T::zero();
                }
                let two = T::lit(2.0);
                -(-(gamma * gamma) / (two * *scale * *scale)).exp_m1()
            }
            GainDistribution::Empirical(s) => s.fraction(s.count_below(gamma)),
        }
    }

    /// `γ₀ = sup{γ : P[|G| < γ] ≤ η}`, which is attained.
    ///
    /// Rayleigh uses the closed-form inverse. Step CDFs are resolved exactly:
    /// `γ₀` is the largest sample `v` with `#{samples < v}/m ≤ η`.
    pub fn gamma0(&self, eta: T) -> Result<T> {
        check_eta(eta)?;
        Ok(match self {
            GainDistribution::Constant { g0 } => *g0,
            GainDistribution::Rayleigh { scale } => {
                let two = T::lit(2.0);
                *scale * (-two * (-eta).ln_1p()).sqrt()
            }
            GainDistribution::Empirical(s) => {
                let v = s.as_slice();
                // The fraction below v[k] is nondecreasing in k, so the
                // admissible samples form a prefix.
                let admissible = v.partition_point(|&g| s.fraction(s.count_below(g)) <= eta);
                v[admissible - 1]
            }
        })
    }

    /// Quantile by bisection on [`cdf_below`](Self::cdf_below), to absolute
    /// tolerance `1e-12` in `f64`. Model-agnostic cross-check for
    /// [`gamma0`](Self::gamma0).
    pub fn gamma0_by_bisection(&self, eta: T) -> Result<T> {
        check_eta(eta)?;
        let tol = if std::mem::size_of::<T>() >= 8 { T::lit(1e-12) } else { T::lit(1e-6) };
        let mut lo = T::zero();
        let mut hi = T::one();
        while self.cdf_below(hi) <= eta {
            lo = hi;
            hi = hi * T::lit(2.0);
            if !hi.is_finite() {
                return Err(Error::param("eta", "quantile search diverged"));
            }
        }
        while hi - lo > tol {
            let mid = lo + (hi - lo) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf_below(mid) <= eta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// `count` i.i.d. magnitudes, reproducible from `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<T>> {
        if count == 0 {
            return Err(Error::param("count", "must be at least 1"));
        }
        let mut rng = rng_from_seed(seed);
        Ok((0..count).map(|_| self.sample_one(&mut rng)).collect())
    }

    pub(crate) fn sample_one<R: rand::Rng>(&self, rng: &mut R) -> T {
        match self {
            GainDistribution::Constant { g0 } => *g0,
            GainDistribution::Rayleigh { scale } => {
                let u: f64 = rng.random();
                // 1 - u lies in (0, 1]
                let e = -(-u).ln_1p();
                *scale * T::lit((2.0 * e).sqrt())
            }
            GainDistribution::Empirical(s) => {
                let v = s.as_slice();
                v[rng.random_range(0..v.len())]
            }
        }
    }

    /// Least upper bound of the support; infinite for Rayleigh.
    pub fn support_max(&self) -> T {
        match self {
            GainDistribution::Constant { g0 } => *g0,
            GainDistribution::Rayleigh { .. } => T::infinity(),
            GainDistribution::Empirical(s) => *s.as_slice().last().expect("validated non-empty"),
        }
    }

    /// Inverse of the strict CDF at `η`, for `η` in `[0, 1)`. Used to place
    /// equal-mass gain buckets.
    pub fn quantile(&self, eta: T) -> Result<T> {
        self.gamma0(eta)
    }
}

fn check_eta<T: Real>(eta: T) -> Result<()> {
    if !(eta >= T::zero() && eta < T::one()) {
        return Err(Error::param("eta", format!("must lie in [0, 1), got {eta}")));
    }
    Ok(())
}

/// Gain model plus power budget, noise variance and outage level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FadingSpec<T = f64> {
    pub gain: GainDistribution<T>,
    pub power: T,
    pub noise_var: T,
    pub eta: T,
}

impl<T: Real> FadingSpec<T> {
    pub fn new(gain: GainDistribution<T>, power: T, noise_var: T, eta: T) -> Result<Self> {
        let spec = Self {
            gain,
            power,
            noise_var,
            eta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.gain.validate()?;
        if !(self.power.is_finite() && self.power >= T::zero()) {
            return Err(Error::param("power", format!("must be >= 0, got {}", self.power)));
        }
        if !(self.noise_var.is_finite() && self.noise_var > T::zero()) {
            return Err(Error::param(
                "noise_var",
                format!("must be > 0, got {}", self.noise_var),
            ));
        }
        check_eta(self.eta)
    }

    pub fn snr(&self) -> T {
        self.power / self.noise_var
    }

    /// `log2(1 + g² P / σ²)` for a realized gain magnitude.
    pub fn instantaneous_capacity(&self, g: T) -> T {
        (g * g * self.snr()).ln_1p() / T::LN_2()
    }

    pub fn gamma0(&self) -> Result<T> {
        self.gain.gamma0(self.eta)
    }

    /// η-outage capacity in bits per channel use.
    pub fn outage_capacity(&self) -> Result<T> {
        Ok(self.instantaneous_capacity(self.gamma0()?))
    }
}
