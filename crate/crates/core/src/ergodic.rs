//! Vanishing-discount extraction of the ergodic constant and corrector,
//! residual diagnostics, and the confrontation with the parabolic long-run
//! average.

use crate::discretization::{switching_obstacle_with, DiscreteOperator, Grid, ValueField};
use crate::elliptic::{default_n_schedule, solve_elliptic, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::SwitchingModel;
use crate::parabolic::solve_parabolic;
use rayon::prelude::*;

/// Residual envelope constant, calibrated on the quadratic benchmark where
/// the inner-band residual is close to `beta x^2 / (beta + 2)`.
pub const RESIDUAL_ENVELOPE: f64 = 4.0;

/// Ergodic pair extracted from a discount schedule.
#[derive(Debug)]
pub struct ErgodicEstimate {
    /// Raw estimate `beta V^beta(x0, i0)` at the smallest discount.
    pub lambda: f64,
    /// Least-squares extrapolation of `beta V^beta` to `beta = 0`, assuming
    /// first-order dependence on `beta`.
    pub richardson_lambda: f64,
    /// `(beta, beta V^beta(x0, i0))` along the schedule.
    pub lambda_per_beta: Vec<(f64, f64)>,
    /// Spread of `beta V^beta` over [`standard_probes`], one per schedule
    /// entry; shrinks with `beta`.
    pub probe_spreads: Vec<f64>,
    /// Corrector candidate `V^beta - V^beta(x0, i0)` at the smallest
    /// discount; exactly zero at the reference point.
    pub phi: ValueField,
    pub beta_schedule: Vec<f64>,
    /// Ergodic residual of `(richardson_lambda, phi)` over the inner band.
    pub residual: f64,
    pub probe_node: usize,
    pub probe_regime: usize,
}

/// Solves the discounted system along a decreasing `beta` schedule and
/// assembles the ergodic estimate. The per-beta solves are independent and
/// run in parallel.
pub fn extract_ergodic(
    model: &SwitchingModel,
    grid: &Grid,
    beta_schedule: &[f64],
    x0: f64,
    i0: usize,
) -> Result<ErgodicEstimate> {
    model.well_formed()?;
    if beta_schedule.is_empty() {
        return Err(Error::InvalidArgument("beta schedule must be nonempty".into()));
    }
    if beta_schedule.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::InvalidArgument("beta schedule entries must be positive".into()));
    }
    if beta_schedule.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidArgument("beta schedule must be strictly decreasing".into()));
    }
    if i0 >= model.m {
        return Err(Error::InvalidArgument(format!(
            "reference regime {} out of range (m = {})",
            i0 + 1,
            model.m
        )));
    }
    let probe_node = grid.nearest_node(x0);
    let schedule = default_n_schedule();

    let solves: Vec<_> = beta_schedule
        .par_iter()
        .map(|&beta| solve_elliptic(model, grid, beta, &schedule, DEFAULT_TOL))
        .collect::<Result<_>>()?;

    let lambda_per_beta: Vec<(f64, f64)> = beta_schedule
        .iter()
        .zip(&solves)
        .map(|(&beta, solve)| (beta, beta * solve.field.get(probe_node, i0)))
        .collect();

    let probes = standard_probes(grid, model.m);
    let probe_spreads: Vec<f64> = beta_schedule
        .iter()
        .zip(&solves)
        .map(|(&beta, solve)| {
            let values = probes.iter().map(|&(k, i)| beta * solve.field.get(k, i));
            let lo = values.clone().fold(f64::INFINITY, f64::min);
            let hi = values.fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .collect();

    let richardson_lambda = affine_intercept(&lambda_per_beta);
    let lambda = lambda_per_beta.last().unwrap().1;

    let smallest = solves.last().unwrap();
    let reference = smallest.field.get(probe_node, i0);
    let mut phi = smallest.field.clone();
    for k in 0..phi.n_nodes {
        for i in 0..phi.m {
            phi.set(k, i, phi.get(k, i) - reference);
        }
    }
    // Pin the normalization exactly despite rounding.
    phi.set(probe_node, i0, 0.0);

    let residual = ergodic_residual(richardson_lambda, &phi, model, grid)?;

    Ok(ErgodicEstimate {
        lambda,
        richardson_lambda,
        lambda_per_beta,
        probe_spreads,
        phi,
        beta_schedule: beta_schedule.to_vec(),
        residual,
        probe_node,
        probe_regime: i0,
    })
}

/// Default probe set for spread diagnostics: five evenly spaced inner
/// nodes crossed with every regime.
pub fn standard_probes(grid: &Grid, m: usize) -> Vec<(usize, usize)> {
    let (k_lo, k_hi) = grid.inner_range();
    let mut probes = Vec::with_capacity(5 * m);
    for q in 0..5 {
        let k = k_lo + (k_hi - k_lo) * q / 4;
        for i in 0..m {
            probes.push((k, i));
        }
    }
    probes
}

/// Least-squares intercept of `y ~ intercept + slope * beta`. A single
/// point degenerates to the point itself.
fn affine_intercept(points: &[(f64, f64)]) -> f64 {
    if points.len() == 1 {
        return points[0].1;
    }
    let n = points.len() as f64;
    let mean_b = points.iter().map(|(b, _)| b).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (b, y) in points {
        num += (b - mean_b) * (y - mean_y);
        den += (b - mean_b) * (b - mean_b);
    }
    let slope = num / den;
    mean_y - slope * mean_b
}

/// Sup over inner nodes and regimes of
/// `|min(lambda - H(phi), phi - M phi)|`, the discrete ergodic equation
/// residual. With a single regime the obstacle branch is inactive.
pub fn ergodic_residual(
    lambda: f64,
    phi: &ValueField,
    model: &SwitchingModel,
    grid: &Grid,
) -> Result<f64> {
    let op = DiscreteOperator::new(model, grid)?;
    if phi.n_nodes != grid.n_nodes || phi.m != model.m {
        return Err(Error::InvalidArgument("phi shape mismatch".into()));
    }
    let (k_lo, k_hi) = grid.inner_range();
    let obstacle = switching_obstacle_with(&op, phi);
    let mut ham = vec![0.0; grid.n_nodes];
    let mut worst: f64 = 0.0;
    for i in 0..model.m {
        op.hamiltonian_into(phi, i, &mut ham);
        for k in k_lo..=k_hi {
            let branch_pde = lambda - ham[k];
            let branch_obs = phi.get(k, i) - obstacle.get(k, i);
            worst = worst.max(branch_pde.min(branch_obs).abs());
        }
    }
    Ok(worst)
}

/// Spread `max - min` of `beta V^beta` over a probe set of `(node, regime)`
/// pairs; shrinks with `beta` since the scaled value flattens.
pub fn lambda_probe_spread(
    model: &SwitchingModel,
    grid: &Grid,
    beta: f64,
    probes: &[(usize, usize)],
) -> Result<f64> {
    if probes.len() < 2 {
        return Err(Error::InvalidArgument("need at least two probes".into()));
    }
    for &(k, i) in probes {
        if k >= grid.n_nodes || i >= model.m {
            return Err(Error::InvalidArgument(format!("probe ({k}, {i}) out of range")));
        }
    }
    let solve = solve_elliptic(model, grid, beta, &default_n_schedule(), DEFAULT_TOL)?;
    let values: Vec<f64> = probes.iter().map(|&(k, i)| beta * solve.field.get(k, i)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo)
}

/// Gap `|V(T_max, x0, i0)/T_max - lambda|` between the parabolic long-run
/// average and a candidate ergodic constant.
pub fn compare_parabolic(
    model: &SwitchingModel,
    grid: &Grid,
    lambda: f64,
    t_max: f64,
    x0: f64,
    i0: usize,
) -> Result<f64> {
    let run = solve_parabolic(model, grid, t_max, &[], x0, i0)?;
    let (_, avg) = *run.averages.last().unwrap();
    Ok((avg - lambda).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, BoundaryMode};
    use crate::model::preset;

    fn grid121() -> Grid {
        build_grid(-6.0, 6.0, 121, BoundaryMode::NeumannZeroSlope).unwrap()
    }

    #[test]
    fn ou_lambda_sequence_and_richardson() {
        // Closed form: beta V^beta(0) = 1/(beta + 2).
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-6.0, 6.0, 241, BoundaryMode::NeumannZeroSlope).unwrap();
        let est = extract_ergodic(&model, &grid, &[0.5, 0.2, 0.1, 0.05], 0.0, 0).unwrap();
        for (beta, lam) in &est.lambda_per_beta {
            // The upwind bias contributes about h/(beta+2) * E|X| here.
            let oracle = 1.0 / (beta + 2.0);
            assert!((lam - oracle).abs() < 0.02, "beta {beta}: {lam} vs {oracle}");
        }
        assert!((est.richardson_lambda - 0.5).abs() < 0.02, "richardson {}", est.richardson_lambda);
        assert!((est.lambda - 1.0 / 2.05).abs() < 0.03);
    }

    #[test]
    fn two_regime_richardson_is_exact_for_affine_sequence() {
        // beta V^beta(., 1) = 1 - 0.1 beta is affine, so the fit recovers 1.
        let model = preset("two_regime_flat").unwrap();
        let grid = grid121();
        let est = extract_ergodic(&model, &grid, &[0.5, 0.2, 0.1, 0.05], 0.0, 0).unwrap();
        assert!((est.richardson_lambda - 1.0).abs() < 5e-3, "richardson {}", est.richardson_lambda);
        for (beta, lam) in &est.lambda_per_beta {
            assert!((lam - (1.0 - 0.1 * beta)).abs() < 5e-3);
        }
    }

    #[test]
    fn constant_reward_gives_flat_lambda() {
        let mut model = preset("ou_quadratic").unwrap();
        model.running_reward = Box::new(|_x, _i, _u| 0.7);
        model.lipschitz_f = 0.0;
        let grid = grid121();
        let est = extract_ergodic(&model, &grid, &[0.5, 0.1], 0.0, 0).unwrap();
        for (_, lam) in &est.lambda_per_beta {
            assert!((lam - 0.7).abs() < 1e-3, "lambda {lam}");
        }
    }

    #[test]
    fn phi_normalization_and_regime_gap() {
        let model = preset("two_regime_flat").unwrap();
        let grid = grid121();
        let est = extract_ergodic(&model, &grid, &[0.2, 0.1], 0.0, 0).unwrap();
        assert_eq!(est.phi.get(est.probe_node, est.probe_regime), 0.0);
        let mut gap: f64 = 0.0;
        for k in 0..est.phi.n_nodes {
            gap = gap.max((est.phi.get(k, 0) - est.phi.get(k, 1)).abs());
        }
        assert!(gap <= model.max_switch_cost() + 10.0 * DEFAULT_TOL, "gap {gap}");
    }

    #[test]
    fn residual_of_true_ou_pair_is_grid_small() {
        // (lambda, phi) = (1/2, x^2/2) solves the ergodic equation exactly;
        // sampling it on the grid leaves only the upwind bias |x| h / 2.
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-6.0, 6.0, 241, BoundaryMode::NeumannZeroSlope).unwrap();
        let phi = ValueField::from_fn(&grid, 1, |x, _| 0.5 * x * x);
        let res = ergodic_residual(0.5, &phi, &model, &grid).unwrap();
        let bias = 3.6 * grid.h / 2.0;
        assert!(res <= bias + 1e-9, "residual {res} vs bias {bias}");
        assert!(res > 0.0);
    }

    #[test]
    fn residual_two_regime_hand_pair_is_zero() {
        let model = preset("two_regime_flat").unwrap();
        let grid = grid121();
        let phi = ValueField::from_fn(&grid, 2, |_x, i| if i == 0 { -0.1 } else { 0.0 });
        let res = ergodic_residual(1.0, &phi, &model, &grid).unwrap();
        assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn residual_tracks_lambda_perturbation() {
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-6.0, 6.0, 241, BoundaryMode::NeumannZeroSlope).unwrap();
        let phi = ValueField::from_fn(&grid, 1, |x, _| 0.5 * x * x);
        let delta = 0.3;
        let res = ergodic_residual(0.5 + delta, &phi, &model, &grid).unwrap();
        assert!((res - delta).abs() <= 0.1, "residual {res} vs delta {delta}");
    }

    #[test]
    fn residual_envelope_hold_across_presets() {
        let grid = grid121();
        for name in crate::model::PRESET_NAMES {
            let model = preset(name).unwrap();
            let est = extract_ergodic(&model, &grid, &[0.2, 0.1, 0.05], 0.0, 0).unwrap();
            let bound = RESIDUAL_ENVELOPE * (grid.h + 0.05);
            assert!(est.residual <= bound, "{name}: residual {} vs {bound}", est.residual);
        }
    }

    #[test]
    fn lambda_envelope_of_reward() {
        let grid = grid121();
        let (k_lo, k_hi) = grid.inner_range();
        for name in crate::model::PRESET_NAMES {
            let model = preset(name).unwrap();
            let est = extract_ergodic(&model, &grid, &[0.2, 0.05], 0.0, 0).unwrap();
            let mut f_lo = f64::INFINITY;
            let mut f_hi = f64::NEG_INFINITY;
            for k in k_lo..=k_hi {
                let x = grid.node(k);
                for i in 0..model.m {
                    for u in 0..model.controls.len() {
                        let f = model.reward_at(x, i, u);
                        f_lo = f_lo.min(f);
                        f_hi = f_hi.max(f);
                    }
                }
            }
            for (_, lam) in &est.lambda_per_beta {
                assert!(*lam >= f_lo - 0.1 && *lam <= f_hi + 0.1, "{name}: lambda {lam}");
            }
        }
    }

    #[test]
    fn probe_spread_two_regime() {
        let model = preset("two_regime_flat").unwrap();
        let grid = grid121();
        let mid = grid.nearest_node(0.0);
        let spread = lambda_probe_spread(&model, &grid, 0.1, &[(mid, 0), (mid, 1)]).unwrap();
        assert!((spread - 0.01).abs() < 1e-3, "spread {spread}");
    }

    #[test]
    fn probe_spread_single_regime_duplicate_is_zero() {
        let model = preset("ou_quadratic").unwrap();
        let grid = grid121();
        let mid = grid.nearest_node(0.0);
        let spread = lambda_probe_spread(&model, &grid, 0.2, &[(mid, 0), (mid, 0)]).unwrap();
        assert_eq!(spread, 0.0);
    }

    #[test]
    fn probe_spread_ou_two_points() {
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-6.0, 6.0, 241, BoundaryMode::NeumannZeroSlope).unwrap();
        let spread = lambda_probe_spread(
            &model,
            &grid,
            0.1,
            &[(grid.nearest_node(0.0), 0), (grid.nearest_node(1.0), 0)],
        )
        .unwrap();
        // Closed form: 0.1 * (1/(0.1 + 2)) = 0.047619...
        assert!((spread - 0.1 / 2.1).abs() < 2e-3, "spread {spread}");
    }

    #[test]
    fn compare_parabolic_cases() {
        let model = preset("two_regime_flat").unwrap();
        let grid = build_grid(-5.0, 5.0, 11, BoundaryMode::NeumannZeroSlope).unwrap();
        let gap = compare_parabolic(&model, &grid, 1.0, 10.0, 0.0, 0).unwrap();
        assert!((gap - 0.01).abs() < 1e-6, "gap {gap}");

        let mut constant = preset("ou_quadratic").unwrap();
        constant.running_reward = Box::new(|_x, _i, _u| 0.7);
        let gap = compare_parabolic(&constant, &grid, 0.7, 5.0, 0.0, 0).unwrap();
        assert!(gap < 1e-9, "gap {gap}");
    }

    #[test]
    fn schedule_validation() {
        let model = preset("ou_quadratic").unwrap();
        let grid = grid121();
        assert!(extract_ergodic(&model, &grid, &[], 0.0, 0).is_err());
        assert!(extract_ergodic(&model, &grid, &[0.1, 0.2], 0.0, 0).is_err());
        assert!(extract_ergodic(&model, &grid, &[0.2, -0.1], 0.0, 0).is_err());
        assert!(extract_ergodic(&model, &grid, &[0.2, 0.1], 0.0, 5).is_err());
    }

    #[test]
    fn truncation_radius_is_wide_enough() {
        // Doubling the domain at fixed spacing moves the ergodic estimate
        // by far less than the acceptance tolerance, so the default
        // truncation is not the binding error source.
        let model = preset("ou_quadratic").unwrap();
        let base = grid121();
        let doubled = build_grid(-12.0, 12.0, 241, BoundaryMode::NeumannZeroSlope).unwrap();
        let a = extract_ergodic(&model, &base, &[0.1], 0.0, 0).unwrap();
        let b = extract_ergodic(&model, &doubled, &[0.1], 0.0, 0).unwrap();
        let shift = (a.lambda - b.lambda).abs();
        assert!(shift < 0.01, "lambda shift {shift} under domain doubling");
    }
}
