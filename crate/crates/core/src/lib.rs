//! Simulation and verification toolkit for two-dimensional random fields.
//!
//! * [`model`] and [`law`]: marginal laws with exact tails and truncated
//!   moments, dependence structures, reproducible sampling.
//! * [`dyadic`]: dyadic index arithmetic, truncation ladders, prefix tables and
//!   the telescoping decomposition of rectangular partial sums with its
//!   pathwise bound.
//! * [`ineq`]: weight schemes and both sides of Rosenthal-type maximal
//!   inequalities; exact brute force of the `H_2q` moment condition.
//! * [`harness`]: Monte Carlo checks of complete convergence, strong and weak
//!   laws, and `L_p` convergence for fields.
//! * [`varying`]: slowly varying functions, de Bruijn conjugates, stochastic
//!   domination and uniform integrability.
//! * [`runner`]: declarative scenarios, CSV/JSON artifacts and run manifests.

// `!(x > 0.0)` style checks are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dyadic;
pub mod error;
pub mod harness;
pub mod ineq;
pub mod law;
pub mod model;
pub mod quad;
pub mod rng;
pub mod runner;
pub mod varying;

pub use error::{Error, Result};
pub use law::{CellLaw, MarginalKind, MarginalSpec, Part, TailTable};
pub use model::{dominator_model, sample_field, DependenceSpec, FieldModel, FieldSample, Modulation, Sampler};
