//! Discounted system solved through its penalized form.
//!
//! The obstacle constraint is replaced by the penalty
//! `n * sum_j [V(x,j) - V(x,i) - c(x,i,j)]+` and each penalty level is
//! solved by a damped pseudo-time fixed point. The damping
//! `0.9 / (beta + n m + 1/cfl)` keeps the update a sup-norm contraction
//! with factor `1 - dtau beta`, so the iteration converges from any start;
//! warm-starting each level at the previous one makes the sweep cheap and
//! keeps the iterates increasing across levels.

use crate::discretization::{switching_obstacle_with, DiscreteOperator, Grid, ValueField};
use crate::error::{Error, Result};
use crate::model::SwitchingModel;

/// Residual tolerance used when callers do not pick one.
///
/// Sized so that the obstacle gap left by the largest default penalty level
/// stays inside the `10 * tol` slacks of the estimate checks.
pub const DEFAULT_TOL: f64 = 3e-4;

/// Geometric penalty schedule `1, 2, 4, ..., 2^12`.
pub fn default_n_schedule() -> Vec<f64> {
    (0..=12).map(|k| (1u64 << k) as f64).collect()
}

/// Converged solve of one penalty level.
#[derive(Debug, Clone)]
pub struct PenalizedSolve {
    pub beta: f64,
    pub n_penalty: f64,
    pub field: ValueField,
    /// Sup-norm of the discrete penalized equation over the inner nodes.
    pub residual: f64,
    pub iterations: usize,
}

/// Per-level statistics of a penalty sweep.
#[derive(Debug, Clone, Copy)]
pub struct LevelRecord {
    pub n_penalty: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Sup-norm gap to the previous level (0 for the first level).
    pub gap: f64,
}

/// Result of driving the penalty to its obstacle limit.
#[derive(Debug)]
pub struct EllipticSolve {
    pub beta: f64,
    pub field: ValueField,
    pub levels: Vec<LevelRecord>,
    pub cauchy_gaps: Vec<f64>,
    /// `sup (MV - V)+` of the final field.
    pub obstacle_residual: f64,
    /// Whether the Cauchy stop fired before the schedule ran out.
    pub converged: bool,
    pub tol: f64,
}

/// Penalty term `n * sum_j [V(x,j) - V(x,i) - c(x,i,j)]+`, laid out like a
/// value field (node-major).
pub fn penalty_term(
    field: &ValueField,
    model: &SwitchingModel,
    grid: &Grid,
    n: f64,
) -> Result<Vec<f64>> {
    if n < 0.0 {
        return Err(Error::InvalidArgument(format!("penalty level must be >= 0 (got {n})")));
    }
    let op = DiscreteOperator::new(model, grid)?;
    let mut out = vec![0.0; grid.n_nodes * model.m];
    for k in 0..grid.n_nodes {
        for i in 0..model.m {
            out[k * model.m + i] = penalty_at(&op, field, k, i, n);
        }
    }
    Ok(out)
}

#[inline]
fn penalty_at(op: &DiscreteOperator, field: &ValueField, k: usize, i: usize, n: f64) -> f64 {
    let mut acc = 0.0;
    let vi = field.get(k, i);
    for j in 0..op.m {
        let excess = field.get(k, j) - vi - op.cost_at(i, j, k);
        if excess > 0.0 {
            acc += excess;
        }
    }
    n * acc
}

/// Solves the penalized discounted system at one penalty level by the
/// damped fixed point `V <- V + dtau (-beta V + H(V) + P(V))`, stopping when
/// the inner-node residual drops below `tol`.
pub fn solve_penalized(
    model: &SwitchingModel,
    grid: &Grid,
    beta: f64,
    n: f64,
    warm_start: Option<&ValueField>,
    tol: f64,
) -> Result<PenalizedSolve> {
    let op = DiscreteOperator::new(model, grid)?;
    solve_penalized_with(&op, grid, beta, n, warm_start, tol)
}

fn solve_penalized_with(
    op: &DiscreteOperator,
    grid: &Grid,
    beta: f64,
    n: f64,
    warm_start: Option<&ValueField>,
    tol: f64,
) -> Result<PenalizedSolve> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive (got {beta})")));
    }
    if n < 0.0 {
        return Err(Error::InvalidArgument(format!("penalty level must be >= 0 (got {n})")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive (got {tol})")));
    }
    let (nn, m) = (op.n_nodes, op.m);
    let dtau = 0.9 / (beta + n * m as f64 + op.stiffness);
    let (k_lo, k_hi) = grid.inner_range();

    let mut field = match warm_start {
        Some(w) => {
            if w.n_nodes != nn || w.m != m {
                return Err(Error::InvalidArgument("warm start shape mismatch".into()));
            }
            w.clone()
        }
        None => ValueField::zeros(nn, m),
    };

    let mut ham = vec![0.0; nn * m];
    let mut rhs = vec![0.0; nn * m];
    let mut cap: usize = 0;
    let mut iterations: usize = 0;
    let mut residual: f64;

    loop {
        for i in 0..m {
            op.hamiltonian_into(&field, i, &mut ham[i * nn..(i + 1) * nn]);
        }
        // Jacobi pass: every right-hand side is read from the same field
        // before anything is written.
        residual = 0.0;
        let mut worst_update: f64 = 0.0;
        for k in 0..nn {
            for i in 0..m {
                let r = -beta * field.get(k, i) + ham[i * nn + k]
                    + if m > 1 { penalty_at(op, &field, k, i, n) } else { 0.0 };
                rhs[k * m + i] = r;
                if k >= k_lo && k <= k_hi {
                    residual = residual.max(r.abs());
                }
                worst_update = worst_update.max(r.abs());
            }
        }
        if residual <= tol {
            break;
        }
        if cap == 0 {
            // Contraction factor per iteration is 1 - dtau beta; budget three
            // times the implied count plus a floor.
            let reduction = (worst_update.max(10.0 * tol) / tol).ln();
            cap = (3.0 * reduction / (dtau * beta)).ceil() as usize + 50_000;
        }
        iterations += 1;
        if iterations > cap {
            return Err(Error::IterationCap { cap, beta, n_penalty: n, residual });
        }
        for k in 0..nn {
            for i in 0..m {
                field.set(k, i, field.get(k, i) + dtau * rhs[k * m + i]);
            }
        }
        if iterations % 1024 == 0 && !field.is_finite() {
            return Err(Error::NonFiniteField { time: iterations as f64 * dtau, step: iterations });
        }
    }

    Ok(PenalizedSolve { beta, n_penalty: n, field, residual, iterations })
}

/// Runs the penalty schedule with warm starts, stopping once consecutive
/// levels are within `tol` of each other in sup norm. Levels must increase;
/// a decrease of any entry beyond `10 tol` between consecutive levels
/// signals a discretization fault and is an error.
pub fn solve_elliptic(
    model: &SwitchingModel,
    grid: &Grid,
    beta: f64,
    n_schedule: &[f64],
    tol: f64,
) -> Result<EllipticSolve> {
    solve_elliptic_warm(model, grid, beta, n_schedule, tol, None)
}

/// [`solve_elliptic`] with an explicit starting field (used by the
/// vanishing-discount sweep to reuse the previous solution).
pub fn solve_elliptic_warm(
    model: &SwitchingModel,
    grid: &Grid,
    beta: f64,
    n_schedule: &[f64],
    tol: f64,
    warm_start: Option<&ValueField>,
) -> Result<EllipticSolve> {
    if n_schedule.is_empty() {
        return Err(Error::InvalidArgument("penalty schedule must be nonempty".into()));
    }
    if n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("penalty schedule must be strictly increasing".into()));
    }
    let op = DiscreteOperator::new(model, grid)?;

    let mut levels: Vec<LevelRecord> = Vec::with_capacity(n_schedule.len());
    let mut cauchy_gaps = Vec::new();
    let mut previous: Option<ValueField> = warm_start.cloned();
    let mut converged = false;

    for (idx, &n) in n_schedule.iter().enumerate() {
        let solve = solve_penalized_with(&op, grid, beta, n, previous.as_ref(), tol)?;
        let gap = match &previous {
            Some(prev) if idx > 0 => {
                let dip = solve.field.worst_decrease(prev);
                if dip > 10.0 * tol {
                    return Err(Error::MonotonicityViolated {
                        n_penalty: n,
                        dip,
                        allowed: 10.0 * tol,
                    });
                }
                solve.field.sup_distance(prev)
            }
            _ => 0.0,
        };
        levels.push(LevelRecord { n_penalty: n, residual: solve.residual, iterations: solve.iterations, gap });
        if idx > 0 {
            cauchy_gaps.push(gap);
        }
        previous = Some(solve.field);
        if idx > 0 && gap <= tol {
            converged = true;
            break;
        }
    }

    let field = previous.expect("schedule nonempty");
    let mv = switching_obstacle_with(&op, &field);
    let mut obstacle_residual: f64 = 0.0;
    if op.m > 1 {
        for k in 0..op.n_nodes {
            for i in 0..op.m {
                obstacle_residual = obstacle_residual.max(mv.get(k, i) - field.get(k, i));
            }
        }
    }

    Ok(EllipticSolve { beta, field, levels, cauchy_gaps, obstacle_residual, converged, tol })
}

/// Largest one-sided slope per regime over adjacent node pairs inside the
/// central 60% of the domain.
pub fn estimate_lipschitz(field: &ValueField, grid: &Grid) -> Vec<f64> {
    let (k_lo, k_hi) = grid.inner_range();
    (0..field.m)
        .map(|i| {
            let mut worst: f64 = 0.0;
            for k in k_lo..k_hi {
                worst = worst.max((field.get(k + 1, i) - field.get(k, i)).abs() / grid.h);
            }
            worst
        })
        .collect()
}
