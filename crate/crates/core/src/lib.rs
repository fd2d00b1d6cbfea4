//! Solvers and Monte Carlo cross-validation for the parabolic, discounted,
//! and ergodic systems of quasi-variational inequalities that arise from
//! robust switching control.
//!
//! The crate is organized around the pipeline:
//!
//! * [`model`] — model definition, analytic presets, assumption audits;
//! * [`discretization`] — grid, value fields, monotone discrete operators;
//! * [`parabolic`] — explicit time marching of the forward system and the
//!   long-run average `V(T)/T`;
//! * [`elliptic`] — penalized discounted system driven to its obstacle
//!   limit along an increasing penalty schedule;
//! * [`ergodic`] — vanishing-discount extraction of the ergodic constant
//!   and corrector, with residual diagnostics;
//! * [`dual_game`] — jump-diffusion simulation of the randomized game that
//!   cross-validates the PDE values.

pub mod discretization;
pub mod dual_game;
pub mod elliptic;
pub mod ergodic;
pub mod error;
pub mod model;
pub mod parabolic;
pub mod tabulated;

pub use error::{Error, Result};
