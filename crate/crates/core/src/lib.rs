//! Monte Carlo laboratory for joint extremes of complete and incomplete
//! stationary Gaussian samples.
//!
//! A stationary Gaussian sequence is simulated, thinned through a missingness
//! mechanism, and the four extremes per replicate (observed maximum/minimum,
//! complete maximum/minimum) are compared against the limiting law: an
//! expectation over the limiting observed fraction P of Gumbel factors.
//! Supporting pieces are weak-dependence diagnostics for the correlation
//! models, an exact finite-n oracle for independent data, and a replicate
//! engine whose output is a pure function of (configuration, seed).

pub mod dependence;
pub mod engine;
pub mod error;
pub mod extremal;
pub mod genpath;
pub mod limitlaw;
pub mod missing;
pub mod normal;
pub mod quad;
pub mod seeding;

mod exec;

pub use error::{Error, Result};
