//! Truncated spatial grid, value fields, and the monotone discrete
//! operators: the upwind generator, the control Hamiltonian, and the
//! switching obstacle.
//!
//! The generator uses forward differences where the drift is positive and
//! backward differences where it is negative, plus a central second
//! difference, so every off-diagonal stencil weight is nonnegative under
//! the zero-slope boundary rule.

use crate::error::{Error, Result};
use crate::model::SwitchingModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Ghost nodes copy the boundary value (zero slope past the edge).
    NeumannZeroSlope,
    /// Ghost nodes extrapolate linearly (zero curvature at the edge).
    DirichletExtrapolate,
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann_zero_slope" => Ok(BoundaryMode::NeumannZeroSlope),
            "dirichlet_extrapolate" => Ok(BoundaryMode::DirichletExtrapolate),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary mode '{other}' (expected neumann_zero_slope or dirichlet_extrapolate)"
            ))),
        }
    }
}

/// Equispaced grid on `[x_min, x_max]`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_nodes: usize,
    pub h: f64,
    pub boundary_mode: BoundaryMode,
}

impl Grid {
    pub fn node(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.h
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.h).round();
        (k.max(0.0) as usize).min(self.n_nodes - 1)
    }

    /// Index range (inclusive) of the central 60% of the domain. Boundary
    /// truncation error is confined outside this band for dissipative
    /// drifts, so estimates and residuals are read here.
    pub fn inner_range(&self) -> (usize, usize) {
        let span = self.x_max - self.x_min;
        let lo = self.x_min + 0.2 * span;
        let hi = self.x_max - 0.2 * span;
        let mut k_lo = self.n_nodes - 1;
        let mut k_hi = 0;
        for k in 0..self.n_nodes {
            let x = self.node(k);
            if x >= lo - 1e-12 && x <= hi + 1e-12 {
                k_lo = k_lo.min(k);
                k_hi = k_hi.max(k);
            }
        }
        (k_lo, k_hi)
    }
}

pub fn build_grid(x_min: f64, x_max: f64, n_nodes: usize, boundary_mode: BoundaryMode) -> Result<Grid> {
    if !(x_min < x_max) {
        return Err(Error::InvalidArgument(format!(
            "grid needs x_min < x_max (got {x_min}, {x_max})"
        )));
    }
    if n_nodes < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 3 nodes (got {n_nodes})"
        )));
    }
    if !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidArgument("grid bounds must be finite".into()));
    }
    Ok(Grid {
        x_min,
        x_max,
        n_nodes,
        h: (x_max - x_min) / (n_nodes - 1) as f64,
        boundary_mode,
    })
}

/// Real array indexed by `(grid node, regime)`, stored row-major by node.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    pub n_nodes: usize,
    pub m: usize,
    values: Vec<f64>,
}

impl ValueField {
    pub fn constant(n_nodes: usize, m: usize, value: f64) -> Self {
        ValueField { n_nodes, m, values: vec![value; n_nodes * m] }
    }

    pub fn zeros(n_nodes: usize, m: usize) -> Self {
        Self::constant(n_nodes, m, 0.0)
    }

    /// Samples a function of `(x, regime)` on the grid.
    pub fn from_fn(grid: &Grid, m: usize, f: impl Fn(f64, usize) -> f64) -> Self {
        let mut field = Self::zeros(grid.n_nodes, m);
        for k in 0..grid.n_nodes {
            for i in 0..m {
                field.set(k, i, f(grid.node(k), i));
            }
        }
        field
    }

    #[inline]
    pub fn get(&self, node: usize, regime: usize) -> f64 {
        self.values[node * self.m + regime]
    }

    #[inline]
    pub fn set(&mut self, node: usize, regime: usize, v: f64) {
        self.values[node * self.m + regime] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry difference against `other`.
    pub fn sup_distance(&self, other: &ValueField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Most negative entry of `self - other`; 0 when `self >= other`.
    pub fn worst_decrease(&self, other: &ValueField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
    }

    /// Writes the columnar text form: `x,regime_1,...,regime_m`, one row per
    /// node, full double precision (17 significant digits round-trip).
    pub fn write_csv<W: std::io::Write>(&self, grid: &Grid, out: &mut W) -> Result<()> {
        let mut header = String::from("x");
        for i in 1..=self.m {
            header.push_str(&format!(",regime_{i}"));
        }
        writeln!(out, "{header}")?;
        for k in 0..self.n_nodes {
            let mut row = format!("{:.16e}", grid.node(k));
            for i in 0..self.m {
                row.push_str(&format!(",{:.16e}", self.get(k, i)));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// Per-(regime, control) tridiagonal stencil of the discrete generator plus
/// tabulated rewards; built once per (model, grid) and reused across
/// iterations so the hot loops never touch the coefficient closures.
pub struct DiscreteOperator {
    pub n_nodes: usize,
    pub m: usize,
    pub n_controls: usize,
    /// Stencil weights, indexed `[(i * n_controls + u) * n_nodes + k]`.
    lo: Vec<f64>,
    diag: Vec<f64>,
    up: Vec<f64>,
    /// Running reward table, same indexing.
    reward: Vec<f64>,
    /// Switch costs, indexed `[(i * m + j) * n_nodes + k]`.
    cost: Vec<f64>,
    /// `1 / cfl_bound`: max over (node, i, u) of `sigma^2/h^2 + |b|/h`.
    pub stiffness: f64,
}

impl DiscreteOperator {
    pub fn new(model: &SwitchingModel, grid: &Grid) -> Result<Self> {
        model.well_formed()?;
        let (n, m, p) = (grid.n_nodes, model.m, model.controls.len());
        let h = grid.h;
        let mut lo = vec![0.0; m * p * n];
        let mut diag = vec![0.0; m * p * n];
        let mut up = vec![0.0; m * p * n];
        let mut reward = vec![0.0; m * p * n];
        let mut stiffness: f64 = 0.0;

        for i in 0..m {
            for u in 0..p {
                let base = (i * p + u) * n;
                for k in 0..n {
                    let x = grid.node(k);
                    let b = model.drift_at(x, i, u);
                    let sig = model.diffusion_at(x, i, u);
                    let f = model.reward_at(x, i, u);
                    if !b.is_finite() || !sig.is_finite() || !f.is_finite() {
                        let what = if !b.is_finite() {
                            "drift"
                        } else if !sig.is_finite() {
                            "diffusion"
                        } else {
                            "running reward"
                        };
                        return Err(Error::NonFiniteCoefficient { what, x, regime: i, control: u });
                    }
                    reward[base + k] = f;
                    stiffness = stiffness.max(sig * sig / (h * h) + b.abs() / h);

                    let s = 0.5 * sig * sig / (h * h);
                    let (mut w_lo, mut w_diag, mut w_up) = (0.0, 0.0, 0.0);
                    // Upwind drift.
                    if b > 0.0 {
                        w_up += b / h;
                        w_diag -= b / h;
                    } else if b < 0.0 {
                        w_lo += -b / h;
                        w_diag -= -b / h;
                    }
                    // Central diffusion.
                    w_lo += s;
                    w_up += s;
                    w_diag -= 2.0 * s;

                    // Fold ghost nodes into the boundary rows.
                    if k == 0 {
                        match grid.boundary_mode {
                            BoundaryMode::NeumannZeroSlope => {
                                // Ghost value equals the boundary value.
                                w_diag += w_lo;
                            }
                            BoundaryMode::DirichletExtrapolate => {
                                // Ghost value 2 V[0] - V[1].
                                w_diag += 2.0 * w_lo;
                                w_up -= w_lo;
                            }
                        }
                        w_lo = 0.0;
                    }
                    if k == n - 1 {
                        match grid.boundary_mode {
                            BoundaryMode::NeumannZeroSlope => {
                                w_diag += w_up;
                            }
                            BoundaryMode::DirichletExtrapolate => {
                                w_diag += 2.0 * w_up;
                                w_lo -= w_up;
                            }
                        }
                        w_up = 0.0;
                    }
                    lo[base + k] = w_lo;
                    diag[base + k] = w_diag;
                    up[base + k] = w_up;
                }
            }
        }

        let mut cost = vec![0.0; m * m * n];
        for i in 0..m {
            for j in 0..m {
                let base = (i * m + j) * n;
                for k in 0..n {
                    let x = grid.node(k);
                    let c = model.cost_at(x, i, j);
                    if !c.is_finite() {
                        return Err(Error::NonFiniteCoefficient { what: "switch cost", x, regime: i, control: j });
                    }
                    cost[base + k] = c;
                }
            }
        }

        Ok(DiscreteOperator { n_nodes: n, m, n_controls: p, lo, diag, up, reward, cost, stiffness })
    }

    /// Stencil row of `L^{i,u}` at a node: `(lo, diag, up)` weights.
    pub fn stencil(&self, i: usize, u: usize, k: usize) -> (f64, f64, f64) {
        let idx = (i * self.n_controls + u) * self.n_nodes + k;
        (self.lo[idx], self.diag[idx], self.up[idx])
    }

    pub fn reward_at(&self, i: usize, u: usize, k: usize) -> f64 {
        self.reward[(i * self.n_controls + u) * self.n_nodes + k]
    }

    pub fn cost_at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cost[(i * self.m + j) * self.n_nodes + k]
    }

    /// `L^{i,u} V` for one regime/control pair.
    pub fn generator_into(&self, field: &ValueField, i: usize, u: usize, out: &mut [f64]) {
        let n = self.n_nodes;
        let base = (i * self.n_controls + u) * n;
        for k in 0..n {
            let mut acc = self.diag[base + k] * field.get(k, i);
            if k > 0 {
                acc += self.lo[base + k] * field.get(k - 1, i);
            }
            if k + 1 < n {
                acc += self.up[base + k] * field.get(k + 1, i);
            }
            out[k] = acc;
        }
    }

    /// `inf_u [L^{i,u} V + f(., i, u)]` for one regime, ties broken by the
    /// lowest control index.
    pub fn hamiltonian_into(&self, field: &ValueField, i: usize, out: &mut [f64]) {
        let n = self.n_nodes;
        for k in 0..n {
            let v_lo = if k > 0 { field.get(k - 1, i) } else { 0.0 };
            let v_up = if k + 1 < n { field.get(k + 1, i) } else { 0.0 };
            let v_mid = field.get(k, i);
            let mut best = f64::INFINITY;
            for u in 0..self.n_controls {
                let idx = (i * self.n_controls + u) * n + k;
                let val = self.lo[idx] * v_lo + self.diag[idx] * v_mid + self.up[idx] * v_up
                    + self.reward[idx];
                if val < best {
                    best = val;
                }
            }
            out[k] = best;
        }
    }
}

/// Discrete `L^{i,u} V` over all nodes.
pub fn apply_generator(
    field: &ValueField,
    model: &SwitchingModel,
    grid: &Grid,
    i: usize,
    u_idx: usize,
) -> Result<Vec<f64>> {
    let op = DiscreteOperator::new(model, grid)?;
    let mut out = vec![0.0; grid.n_nodes];
    op.generator_into(field, i, u_idx, &mut out);
    Ok(out)
}

/// Pointwise `inf_u [L^{i,u} V + f]` over all nodes.
pub fn hamiltonian(field: &ValueField, model: &SwitchingModel, grid: &Grid, i: usize) -> Result<Vec<f64>> {
    let op = DiscreteOperator::new(model, grid)?;
    let mut out = vec![0.0; grid.n_nodes];
    op.hamiltonian_into(field, i, &mut out);
    Ok(out)
}

/// Switching obstacle `(MV)(x,i) = max_{j != i} [V(x,j) - c(x,i,j)]`.
///
/// For a single regime the obstacle is inactive and every entry is the
/// `-inf` sentinel.
pub fn switching_obstacle(field: &ValueField, model: &SwitchingModel, grid: &Grid) -> Result<ValueField> {
    let op = DiscreteOperator::new(model, grid)?;
    Ok(switching_obstacle_with(&op, field))
}

pub(crate) fn switching_obstacle_with(op: &DiscreteOperator, field: &ValueField) -> ValueField {
    let (n, m) = (op.n_nodes, op.m);
    let mut out = ValueField::constant(n, m, f64::NEG_INFINITY);
    if m == 1 {
        return out;
    }
    for k in 0..n {
        for i in 0..m {
            let mut best = f64::NEG_INFINITY;
            for j in 0..m {
                if j != i {
                    best = best.max(field.get(k, j) - op.cost_at(i, j, k));
                }
            }
            out.set(k, i, best);
        }
    }
    out
}

/// Smallest field `W >= V` with `W >= MW`, computed by Gauss-Seidel sweeps.
///
/// The no-free-loop property bounds the sweep count by `m`; if the sweeps
/// keep changing past that, the cost structure admits a free loop and an
/// error is raised.
pub fn project_obstacle(field: &ValueField, model: &SwitchingModel, grid: &Grid) -> Result<ValueField> {
    let op = DiscreteOperator::new(model, grid)?;
    project_obstacle_with(&op, field)
}

pub(crate) fn project_obstacle_with(op: &DiscreteOperator, field: &ValueField) -> Result<ValueField> {
    let (n, m) = (op.n_nodes, op.m);
    let mut w = field.clone();
    if m == 1 {
        return Ok(w);
    }
    let mut changing_sweeps = 0;
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..m {
                let mut best = w.get(k, i);
                for j in 0..m {
                    if j != i {
                        let candidate = w.get(k, j) - op.cost_at(i, j, k);
                        if candidate > best {
                            best = candidate;
                        }
                    }
                }
                if best > w.get(k, i) {
                    w.set(k, i, best);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(w);
        }
        changing_sweeps += 1;
        if changing_sweeps > m {
            return Err(Error::ProjectionDiverged { sweeps: changing_sweeps });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;

    #[test]
    fn grid_spacing_and_errors() {
        let g = build_grid(-5.0, 5.0, 201, BoundaryMode::NeumannZeroSlope).unwrap();
        assert!((g.h - 0.05).abs() < 1e-15);

        let g = build_grid(0.0, 1.0, 3, BoundaryMode::NeumannZeroSlope).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(1), 0.5);
        assert_eq!(g.node(2), 1.0);

        assert!(build_grid(1.0, 1.0, 10, BoundaryMode::NeumannZeroSlope).is_err());
        assert!(build_grid(0.0, 1.0, 2, BoundaryMode::NeumannZeroSlope).is_err());
    }

    #[test]
    fn inner_range_covers_central_band() {
        let g = build_grid(-6.0, 6.0, 241, BoundaryMode::NeumannZeroSlope).unwrap();
        let (lo, hi) = g.inner_range();
        assert!((g.node(lo) - -3.6).abs() < 1e-12);
        assert!((g.node(hi) - 3.6).abs() < 1e-12);
    }

    #[test]
    fn generator_annihilates_constants() {
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-5.0, 5.0, 101, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::constant(grid.n_nodes, 1, 3.7);
        let out = apply_generator(&field, &model, &grid, 0, 0).unwrap();
        let worst = out.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!(worst <= 1e-12, "worst {worst}");
    }

    #[test]
    fn generator_quadratic_field_matches_hand_calculus() {
        // For b = -x, sigma = 1, V = x^2 the discrete value is
        // 1 - 2x^2 + |x| h at interior nodes (upwind bias |x| h).
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-5.0, 5.0, 101, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::from_fn(&grid, 1, |x, _| x * x);
        let out = apply_generator(&field, &model, &grid, 0, 0).unwrap();
        for k in 1..grid.n_nodes - 1 {
            let x = grid.node(k);
            let expected = 1.0 - 2.0 * x * x + x.abs() * grid.h;
            assert!(
                (out[k] - expected).abs() < 1e-9,
                "node {k}: got {} expected {expected}",
                out[k]
            );
        }
        // At x = 0 the drift vanishes and the value is exactly the diffusion term.
        let mid = grid.nearest_node(0.0);
        assert!((out[mid] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn generator_exact_on_linear_fields_with_constant_drift() {
        let mut model = preset("ou_quadratic").unwrap();
        model.drift = Box::new(|_x, _i, _u| 2.0);
        model.diffusion = Box::new(|_x, _i, _u| 0.0);
        let grid = build_grid(-1.0, 1.0, 21, BoundaryMode::NeumannZeroSlope).unwrap();
        let slope = -0.75;
        let field = ValueField::from_fn(&grid, 1, |x, _| slope * x + 0.3);
        let out = apply_generator(&field, &model, &grid, 0, 0).unwrap();
        // Upwind differences are exact on linear data away from the fold.
        for k in 0..grid.n_nodes - 1 {
            assert!((out[k] - 2.0 * slope).abs() < 1e-12, "node {k}: {}", out[k]);
        }
    }

    #[test]
    fn stencil_off_diagonals_nonnegative() {
        // Monotone scheme audit under the default boundary rule.
        for name in crate::model::PRESET_NAMES {
            let model = preset(name).unwrap();
            let grid = build_grid(-6.0, 6.0, 61, BoundaryMode::NeumannZeroSlope).unwrap();
            let op = DiscreteOperator::new(&model, &grid).unwrap();
            for i in 0..model.m {
                for u in 0..model.controls.len() {
                    for k in 0..grid.n_nodes {
                        let (lo, _diag, up) = op.stencil(i, u, k);
                        assert!(lo >= 0.0 && up >= 0.0, "{name} ({i},{u},{k}): {lo} {up}");
                    }
                }
            }
        }
    }

    #[test]
    fn hamiltonian_constant_field_reduces_to_reward_min() {
        let model = preset("robust_drift").unwrap();
        let grid = build_grid(-2.0, 2.0, 41, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::constant(grid.n_nodes, 2, 5.0);
        // Regime 1 (index 0): f = x u over u in [-1, 1] has minimum -|x|.
        let out = hamiltonian(&field, &model, &grid, 0).unwrap();
        for k in 0..grid.n_nodes {
            let x = grid.node(k);
            assert!((out[k] - (-x.abs())).abs() < 1e-12, "x = {x}: {}", out[k]);
        }
    }

    #[test]
    fn hamiltonian_quadratic_ou() {
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-5.0, 5.0, 101, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::from_fn(&grid, 1, |x, _| x * x);
        let out = hamiltonian(&field, &model, &grid, 0).unwrap();
        for k in 1..grid.n_nodes - 1 {
            let x = grid.node(k);
            let expected = 1.0 - x * x + x.abs() * grid.h;
            assert!((out[k] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn obstacle_two_regime_values() {
        let model = preset("two_regime_flat").unwrap();
        let grid = build_grid(-1.0, 1.0, 5, BoundaryMode::NeumannZeroSlope).unwrap();
        let mut field = ValueField::zeros(grid.n_nodes, 2);
        for k in 0..grid.n_nodes {
            field.set(k, 0, 9.9);
            field.set(k, 1, 10.0);
        }
        let mv = switching_obstacle(&field, &model, &grid).unwrap();
        for k in 0..grid.n_nodes {
            assert!((mv.get(k, 0) - 9.9).abs() < 1e-15);
            assert!((mv.get(k, 1) - 9.8).abs() < 1e-15);
        }
    }

    #[test]
    fn obstacle_single_regime_is_sentinel() {
        let model = preset("ou_quadratic").unwrap();
        let grid = build_grid(-1.0, 1.0, 5, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::zeros(grid.n_nodes, 1);
        let mv = switching_obstacle(&field, &model, &grid).unwrap();
        assert!(mv.as_slice().iter().all(|v| *v == f64::NEG_INFINITY));
    }

    #[test]
    fn obstacle_zero_cost_equal_regimes() {
        let mut model = preset("two_regime_flat").unwrap();
        model.switch_cost = Box::new(|_x, _i, _j| 0.0);
        let grid = build_grid(-1.0, 1.0, 5, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::from_fn(&grid, 2, |x, _| x + 2.0);
        let mv = switching_obstacle(&field, &model, &grid).unwrap();
        assert_eq!(mv, field);
    }

    #[test]
    fn projection_one_sweep_case() {
        let model = preset("two_regime_flat").unwrap();
        let grid = build_grid(-1.0, 1.0, 5, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::from_fn(&grid, 2, |_x, i| if i == 0 { 0.4 } else { 0.6 });
        let w = project_obstacle(&field, &model, &grid).unwrap();
        for k in 0..grid.n_nodes {
            assert!((w.get(k, 0) - 0.5).abs() < 1e-15);
            assert!((w.get(k, 1) - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_fixed_point_and_terminal_reward() {
        let model = preset("two_regime_flat").unwrap();
        let grid = build_grid(-1.0, 1.0, 5, BoundaryMode::NeumannZeroSlope).unwrap();
        // Already admissible: stays put.
        let field = ValueField::from_fn(&grid, 2, |_x, i| if i == 0 { 0.55 } else { 0.6 });
        let w = project_obstacle(&field, &model, &grid).unwrap();
        assert_eq!(w, field);

        // Terminal rewards of presets are already consistent.
        for name in crate::model::PRESET_NAMES {
            let model = preset(name).unwrap();
            let g = ValueField::from_fn(&grid, model.m, |x, i| model.terminal_at(x, i));
            let w = project_obstacle(&g, &model, &grid).unwrap();
            assert_eq!(w, g, "{name}");
        }
    }

    #[test]
    fn projection_detects_free_loop() {
        let mut model = preset("two_regime_flat").unwrap();
        model.switch_cost = Box::new(|_x, i, j| if i == j { 0.0 } else { -0.05 });
        let grid = build_grid(-1.0, 1.0, 5, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::zeros(grid.n_nodes, 2);
        let err = project_obstacle(&field, &model, &grid).unwrap_err();
        assert!(matches!(err, Error::ProjectionDiverged { .. }));
    }

    #[test]
    fn value_field_csv_round_trip_format() {
        let grid = build_grid(0.0, 1.0, 3, BoundaryMode::NeumannZeroSlope).unwrap();
        let field = ValueField::from_fn(&grid, 2, |x, i| x + i as f64);
        let mut buf = Vec::new();
        field.write_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,regime_1,regime_2");
        assert_eq!(lines.count(), 3);
    }
}
