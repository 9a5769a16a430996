//! Outage capacity of slow-fading AWGN channels and the outage
//! common-randomness capacity of correlated sources that communicate over
//! them, plus a Monte Carlo simulator of the binning protocol that achieves
//! it.
//!
//! * [`source`]: finite joint sources `P_XY` and their entropies.
//! * [`fading`]: gain models, the outage quantile `γ₀`, `C_η(P)`.
//! * [`crcap`]: `max I(U;X)` subject to `I(U;X) - I(U;Y) ≤ C`, with a
//!   brute-force oracle.
//! * [`typicality`]: types, type classes and strong typicality tests.
//! * [`protocol`]: codebooks, binning, joint-typicality decoding, and the
//!   end-to-end simulator.
//! * [`config`]: the structured configuration file format.
//!
//! The math modules are generic over [`Real`]; the aliases below fix the
//! scalar type for the common cases.

pub mod config;
pub mod crcap;
pub mod error;
pub mod fading;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod source;
pub mod typicality;

pub use crcap::{
    brute_force_cr_capacity, converse_bound_check, cr_capacity, AuxChannel, CapacityResult,
    OptimizerOptions,
};
pub use error::{Error, Result};
pub use fading::{FadingSpec, GainDistribution};
pub use scalar::Real;
pub use source::{JointSource, SourceSample};
pub use typicality::{TypeClass, TypicalityParams};

pub type JointSourceF64 = JointSource<f64>;
pub type JointSourceF32 = JointSource<f32>;
pub type GainDistributionF64 = GainDistribution<f64>;
pub type GainDistributionF32 = GainDistribution<f32>;
pub type FadingSpecF64 = FadingSpec<f64>;
pub type FadingSpecF32 = FadingSpec<f32>;
pub type AuxChannelF64 = AuxChannel<f64>;
pub type AuxChannelF32 = AuxChannel<f32>;
pub type CapacityResultF64 = CapacityResult<f64>;
pub type CapacityResultF32 = CapacityResult<f32>;
pub type TypicalityParamsF64 = TypicalityParams<f64>;
