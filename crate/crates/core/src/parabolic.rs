//! Explicit time marching of the forward switching system and the long-run
//! average `V(T, x0, i0) / T`.
//!
//! Each step is a monotone explicit Euler update with the control
//! Hamiltonian followed by the switching-obstacle projection (operator
//! splitting). The step size sits below the diagonal-dominance bound of the
//! scheme, so monotonicity holds by construction.

use crate::discretization::{
    project_obstacle_with, switching_obstacle_with, DiscreteOperator, Grid, ValueField,
};
use crate::error::{Error, Result};
use crate::model::SwitchingModel;

/// One forward run: value snapshots and the running averages at the probe.
#[derive(Debug)]
pub struct ParabolicRun {
    /// `(T, V(T, ., .))` at each requested snapshot time, increasing in `T`.
    pub snapshots: Vec<(f64, ValueField)>,
    /// `(T, V(T, x0, i0) / T)` at the same times.
    pub averages: Vec<(f64, f64)>,
    /// Largest step actually taken.
    pub dt: f64,
    pub cfl_bound: f64,
    pub probe_node: usize,
    pub probe_regime: usize,
    /// True when projecting the terminal reward moved it, i.e. the model
    /// violates the terminal consistency condition.
    pub initial_projection_changed: bool,
}

/// Stability bound `dt_max = 1 / max_{node,i,u} (sigma^2/h^2 + |b|/h)`.
pub fn cfl_bound(model: &SwitchingModel, grid: &Grid) -> Result<f64> {
    let op = DiscreteOperator::new(model, grid)?;
    Ok(stiffness_to_bound(op.stiffness))
}

fn stiffness_to_bound(stiffness: f64) -> f64 {
    if stiffness > 0.0 {
        1.0 / stiffness
    } else {
        f64::INFINITY
    }
}

/// One explicit Euler step of length `dt` followed by the obstacle
/// projection. Errors when `dt` exceeds the stability bound.
pub fn step_parabolic(
    field: &ValueField,
    dt: f64,
    model: &SwitchingModel,
    grid: &Grid,
) -> Result<ValueField> {
    let op = DiscreteOperator::new(model, grid)?;
    let bound = stiffness_to_bound(op.stiffness);
    if dt > bound {
        return Err(Error::CflViolated { dt, bound });
    }
    let mut scratch = vec![0.0; grid.n_nodes];
    step_with(&op, field, dt, &mut scratch)
}

pub(crate) fn step_with(
    op: &DiscreteOperator,
    field: &ValueField,
    dt: f64,
    scratch: &mut [f64],
) -> Result<ValueField> {
    let mut next = field.clone();
    for i in 0..op.m {
        op.hamiltonian_into(field, i, scratch);
        for k in 0..op.n_nodes {
            next.set(k, i, field.get(k, i) + dt * scratch[k]);
        }
    }
    project_obstacle_with(op, &next)
}

/// Marches from the projected terminal reward up to `t_max`, recording the
/// field and the probe average at every requested snapshot time. Snapshot
/// times are hit exactly by rounding the step count per segment.
pub fn solve_parabolic(
    model: &SwitchingModel,
    grid: &Grid,
    t_max: f64,
    snapshot_times: &[f64],
    x0: f64,
    i0: usize,
) -> Result<ParabolicRun> {
    model.well_formed()?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be positive (got {t_max})")));
    }
    if i0 >= model.m {
        return Err(Error::InvalidArgument(format!(
            "probe regime {} out of range (m = {})",
            i0 + 1,
            model.m
        )));
    }
    let mut times: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|t| *t > 0.0 && *t <= t_max + 1e-12)
        .collect();
    times.push(t_max);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let op = DiscreteOperator::new(model, grid)?;
    let bound = stiffness_to_bound(op.stiffness);
    let probe_node = grid.nearest_node(x0);

    let g = ValueField::from_fn(grid, model.m, |x, i| model.terminal_at(x, i));
    let mut field = project_obstacle_with(&op, &g)?;
    let initial_projection_changed = field.sup_distance(&g) > 0.0;

    let mut scratch = vec![0.0; grid.n_nodes];
    let mut snapshots = Vec::with_capacity(times.len());
    let mut averages = Vec::with_capacity(times.len());
    let mut dt_used: f64 = 0.0;
    let mut t = 0.0;
    let mut step_count: usize = 0;

    for &target in &times {
        let span = target - t;
        if span <= 0.0 {
            continue;
        }
        let dt_cap = if bound.is_finite() { 0.9 * bound } else { span };
        let n_steps = (span / dt_cap).ceil().max(1.0) as usize;
        let dt = span / n_steps as f64;
        dt_used = dt_used.max(dt);
        for _ in 0..n_steps {
            field = step_with(&op, &field, dt, &mut scratch)?;
            step_count += 1;
            if !field.is_finite() {
                return Err(Error::NonFiniteField { time: t, step: step_count });
            }
            t += dt;
        }
        t = target;
        snapshots.push((target, field.clone()));
        averages.push((target, field.get(probe_node, i0) / target));
    }

    Ok(ParabolicRun {
        snapshots,
        averages,
        dt: dt_used,
        cfl_bound: bound,
        probe_node,
        probe_regime: i0,
        initial_projection_changed,
    })
}

/// Post-step obstacle admissibility: largest `(MV - V)+` entry.
pub fn obstacle_excess(op: &DiscreteOperator, field: &ValueField) -> f64 {
    let mv = switching_obstacle_with(op, field);
    let mut worst: f64 = 0.0;
    if op.m == 1 {
        return 0.0;
    }
    for k in 0..op.n_nodes {
        for i in 0..op.m {
            worst = worst.max(mv.get(k, i) - field.get(k, i));
        }
    }
    worst
}
