//! Certified two-sided bounds on how far the `p`-th moment of a sum of
//! independent random variables sits from the matching Gaussian moment.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation over immutable inputs:
//!
//! * [`distmodel`] describes single variables (family or raw moments).
//! * [`combinatorics`] holds the multi-index algebra and symmetric sums.
//! * [`exactmoments`] computes Gaussian norms and exact even moments of sums.
//! * [`charfn`] evaluates characteristic functions, checks the cosine and
//!   product inequalities, and turns the Haagerup integral into a numerical
//!   engine for fractional moments with `2 < p < 4`.
//! * [`bounds`] computes the head length `m`, the growth constant `C`, the
//!   cutoff indices and emits [`bounds::BoundReport`]s.
//!
//! Monte Carlo oracles, threading, configuration files and the command line
//! live in the `moment-cert` companion crate.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form used for parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod charfn;
pub mod combinatorics;
pub mod distmodel;
mod error;
pub mod exactmoments;
pub mod quadrature;
pub mod special;

pub use bounds::{
    AbsMomentEngine, AnalyticEngine, Assumption, BoundReport, Constants, Estimate, Provenance,
    Quantity, SequenceSpec, Statement,
};
pub use charfn::{CharFunction, IntegralResult};
pub use combinatorics::MultiIndex;
pub use distmodel::{MomentProfile, VariableSpec};
pub use error::{Error, Result};
pub use exactmoments::WeightVector;
