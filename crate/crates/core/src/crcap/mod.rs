//! Outage common-randomness capacity: maximize `I(U;X)` over test channels
//! `P(U|X)` subject to `I(U;X) - I(U;Y) ≤ C`, where `C` is the channel's
//! outage capacity (or any explicit budget).
//!
//! [`cr_capacity`] is the production solver; [`brute_force_cr_capacity`] is
//! an exhaustive lattice search kept as an independent oracle.

mod aux;
mod optimizer;
mod oracle;

use serde::Serialize;

pub use aux::AuxChannel;
pub use optimizer::{cr_capacity, OptimizerOptions};
pub use oracle::{
    brute_force_cr_capacity, brute_force_cr_capacity_capped, lattice_size, DEFAULT_MAX_POINTS,
};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::source::JointSource;

/// Slack allowed on the budget constraint of a reported result.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Outcome of a capacity maximization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult<T = f64> {
    /// Maximized `I(U;X)` in bits.
    pub value: T,
    pub argmax: AuxChannel<T>,
    /// `I(U;X) - I(U;Y)` at the argmax.
    pub excess: T,
    pub budget: T,
    pub iterations: usize,
}

pub(crate) fn check_budget<T: Real>(budget: T) -> Result<()> {
    if !(budget.is_finite() && budget >= T::zero()) {
        return Err(Error::param(
            "budget",
            format!("must be finite and >= 0, got {budget}"),
        ));
    }
    Ok(())
}

/// Default auxiliary alphabet size `|X| + 1`.
pub fn default_card_u(card_x: usize) -> usize {
    card_x + 1
}

/// Checks the two facts any achievable scheme must satisfy: the rate does
/// not exceed `H(X)` and the communication cost fits the budget.
pub fn converse_bound_check<T: Real>(result: &CapacityResult<T>, src: &JointSource<T>, budget: T) -> bool {
    let h_x = src.entropy_x();
    result.value <= h_x + T::lit(1e-9)
        && result.value >= -T::lit(1e-9)
        && result.excess <= budget + T::lit(FEASIBILITY_TOL)
}

#[cfg(test)]
mod tests;
