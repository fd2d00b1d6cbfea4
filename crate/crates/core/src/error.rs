//! Error type shared by all solver stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A model coefficient evaluated to NaN or infinity.
    #[error("non-finite {what} at x = {x}, regime {regime}, control index {control}")]
    NonFiniteCoefficient {
        what: &'static str,
        x: f64,
        regime: usize,
        control: usize,
    },

    /// A field blew up during a time march.
    #[error("non-finite field value at time {time} (step {step}); scheme unstable or model ill-posed")]
    NonFiniteField { time: f64, step: usize },

    /// Obstacle projection sweeps failed to settle.
    #[error("no-free-loop violated numerically: obstacle projection did not terminate in {sweeps} sweeps")]
    ProjectionDiverged { sweeps: usize },

    /// Fixed-point iteration hit its cap before reaching the tolerance.
    #[error("iteration cap {cap} exceeded (beta = {beta}, n = {n_penalty}); last residual {residual:.3e}")]
    IterationCap {
        cap: usize,
        beta: f64,
        n_penalty: f64,
        residual: f64,
    },

    /// Successive penalty levels decreased beyond the allowed slack.
    #[error("penalty monotonicity violated: level n = {n_penalty} dipped {dip:.3e} below the previous level (allowed {allowed:.3e})")]
    MonotonicityViolated {
        n_penalty: f64,
        dip: f64,
        allowed: f64,
    },

    /// Time step above the stability bound.
    #[error("dt = {dt} exceeds the CFL bound {bound}")]
    CflViolated { dt: f64, bound: f64 },

    /// Monte Carlo horizon too short for the requested discount tail.
    #[error("horizon {horizon} leaves a discounted tail {tail:.3e} above the tolerance {tol:.3e}")]
    TailBound { horizon: f64, tail: f64, tol: f64 },

    /// An intensity policy stepped outside its declared bounds.
    #[error("intensity policy out of bounds: {0}")]
    PolicyBound(String),

    /// Monte Carlo path produced a non-finite state.
    #[error("non-finite state in path {path} at step {step}")]
    NonFiniteState { path: u64, step: usize },

    /// Config file problem (CLI front-end).
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
