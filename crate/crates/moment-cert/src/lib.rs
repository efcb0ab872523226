//! Oracles, batch runner and file formats on top of `moment-cert-core`.
//!
//! * [`oracle`]: exact atom convolution, seeded Monte Carlo, and report
//!   verification against either.
//! * [`lemmas`]: randomized checks of the supporting inequalities.
//! * [`config`], [`report`], [`run`]: the JSON configuration, the JSON/CSV
//!   report documents and command execution behind the `moment-cert` binary.

// `!(x > 0.0)` is the NaN-rejecting form used for parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod lemmas;
pub mod oracle;
pub mod random;
pub mod report;
pub mod run;

pub use error::{Error, Result};
pub use moment_cert_core as core;
