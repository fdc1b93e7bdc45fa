//! Monte Carlo construction and verification of complete and deleting-item
//! (incomplete) partial-sum, polygonal, empirical and sequential empirical
//! processes against their Gaussian limits.
//!
//! Modules, bottom-up:
//!
//! * [`sampling`]: seeded i.i.d. draws from a small law catalog.
//! * [`deletion`]: deletion schedules `k*(m)` and per-time deleted index sets.
//! * [`processes`]: path, empirical-df and sequential-field builders.
//! * [`oracles`]: analytic limit laws and covariance kernels.
//! * [`stats`]: KS tests, covariance estimation, functional checks.
//! * [`harness`]: config-driven experiment runner and report emission.

pub mod deletion;
pub mod error;
pub mod harness;
pub mod oracles;
pub mod processes;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
