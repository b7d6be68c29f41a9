//! Online learning of a student perceptron supervised by a moving teacher
//! that itself learns from a fixed nonmonotonic true teacher.
//!
//! - [`gaussmath`]: Gaussian density, tail function, adaptive quadrature
//! - [`model`]: parameters, order parameters, update rules
//! - [`generalization`]: generalization error as a function of a direction cosine
//! - [`averages`]: the nine Gaussian averages and their Monte Carlo oracle
//! - [`theory`]: order-parameter ODEs and their RK4 integration
//! - [`simulator`]: finite-N simulation of the actual learning rules
//! - [`cli`]: configuration parsing and the experiment runner

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averages;
pub mod cli;
pub mod error;
pub mod gaussmath;
pub mod generalization;
pub mod model;
pub mod rng;
pub mod simulator;
pub mod theory;

pub use averages::{compute_all, oracle_all, oracle_average, AveragesSet, OracleEstimate};
pub use error::{Error, Result};
pub use gaussmath::QuadratureSpec;
pub use generalization::{gen_error, gen_error_curve, optimal_r, GenErrorResult, OptimalR};
pub use model::{MacroState, ModelParams};
pub use simulator::{run_simulation, MicroState, SimConfig, SimulationResult};
pub use theory::{integrate, rhs, standard_init, Record, TheoryConfig, Trajectory};
