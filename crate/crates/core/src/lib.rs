//! Stochastic greedy selection for weak-submodular objectives.
//!
//! The crate is organised bottom-up:
//!
//! - [`ground`]: ground sets, additive costs, the [`SetFunction`] oracle
//!   contract, seeded sampling streams and selection traces.
//! - [`algorithms`]: modified greedy, MRG, DRG, Top-K, SSA and Random-WSSA,
//!   exhaustive reference solvers, the weak-submodularity constant estimator,
//!   the η diagnostic and the approximation-bound evaluators.
//! - [`objectives`]: coverage, MSE-reduction and synthetic oracles together
//!   with the truncation / averaging / normalisation combinators.
//! - [`orbitsim`]: Walker-Delta constellations, circular propagation, conical
//!   field-of-view tests and the spherical Earth grid.
//! - [`dynest`]: Lorenz-63 truth simulation and unscented Kalman filtering.
//! - [`experiments`]: scenario configuration, the three constellation
//!   experiments and CSV report emission.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod dynest;
pub mod error;
pub mod experiments;
pub mod ground;
pub mod objectives;
pub mod orbitsim;

pub use error::{Error, Result};
pub use ground::{CostModel, Element, GroundSet, RngStream, SelectionTrace, SetFunction};
