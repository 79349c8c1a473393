//! Constrained mixed-variable blackbox optimization with surrogate-based
//! categorical neighborhoods.
//!
//! The crate builds Gaussian-process surrogates of the objective and
//! constraint functions over mixed categorical/integer/continuous domains,
//! derives problem-specific categorical distances from the fitted kernels,
//! orders categorical components with a dominance-based ranking, and uses the
//! resulting neighborhoods inside a MADS-style direct-search solver with
//! progressive-barrier constraint handling. A benchmarking module computes
//! tau-convergence tests and data profiles from solver history logs.

pub mod bench;
pub mod distances;
pub mod domain;
pub mod error;
pub mod kernels;
pub mod neighborhood;
pub mod problems;
pub mod solver;
pub mod surrogate;

pub use domain::{Domain, Evaluation, Point, VariableSpec};
pub use error::{Error, Result};
pub use problems::Problem;
pub use solver::{run, SolverConfig};
