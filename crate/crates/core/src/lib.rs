//! Online solvers for mixed packing/covering linear programs and for
//! capacity-constrained facility location with fixed charges.
//!
//! The crate is organised by subsystem:
//!
//! * [`penalty`]: packing/covering data types and the log-sum-exp penalty
//!   primitives (smooth maximum, rates, step sizes).
//! * [`mpc`]: the multiplicative-update online solver for mixed packing and
//!   covering, its Γ-doubling driver and dual certificates.
//! * [`adversary`]: lower-bound instance generators that play against any
//!   monotone online algorithm.
//! * [`ccfl`]: the fractional facility-location solver, randomized rounding
//!   and the Z-doubling epoch driver, plus the machine-scheduling adapter.
//! * [`oracle`]: a dense revised simplex and brute-force baselines used as
//!   offline optima.
//! * [`harness`]: instance formats, seeded generators, experiments and
//!   reports.
//! * [`rng`]: seeded ChaCha8 streams.

pub mod adversary;
pub mod ccfl;
pub mod error;
pub mod harness;
pub mod mpc;
pub mod oracle;
pub mod penalty;
pub mod rng;

pub use error::{Error, Result};

/// Covering rows with `(Cx)_i >= 1 - SATISFACTION_SLACK` count as satisfied.
pub const SATISFACTION_SLACK: f64 = 1e-12;
