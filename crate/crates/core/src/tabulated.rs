//! Expression-free model construction from a columnar coefficient table.
//!
//! The table is comma-separated with a header naming each column:
//!
//! ```text
//! x,b:1:1,sigma:1:1,f:1:1,b:2:1,sigma:2:1,f:2:1,g:1,g:2,c:1:2,c:2:1
//! ```
//!
//! `b:i:u`, `sigma:i:u`, `f:i:u` carry the drift, diffusion, and running
//! reward for regime `i` and control index `u` (both 1-based); `g:i` the
//! terminal reward; `c:i:j` the switch cost from `i` to `j`. Regime and
//! control counts are inferred from the header; every combination must be
//! present. Rows are sampled at strictly increasing `x` and evaluated by
//! linear interpolation, clamped beyond the table ends.
//!
//! The resulting coefficient maps resolve a control point back to its index
//! by exact value comparison, which holds because the solvers and the
//! simulator only ever pass points taken from `model.controls` itself.

use crate::error::{Error, Result};
use crate::model::SwitchingModel;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Column {
    X,
    Drift(usize, usize),
    Diffusion(usize, usize),
    Reward(usize, usize),
    Terminal(usize),
    Cost(usize, usize),
}

fn parse_header(header: &str) -> Result<Vec<Column>> {
    let mut columns = Vec::new();
    for (pos, token) in header.split(',').enumerate() {
        let token = token.trim();
        let column = if token == "x" {
            Column::X
        } else {
            let parts: Vec<&str> = token.split(':').collect();
            let idx = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad index '{s}' in column '{token}'"))
                })?;
                if v == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "indices in column '{token}' are 1-based"
                    )));
                }
                Ok(v - 1)
            };
            match parts.as_slice() {
                ["b", i, u] => Column::Drift(idx(i)?, idx(u)?),
                ["sigma", i, u] => Column::Diffusion(idx(i)?, idx(u)?),
                ["f", i, u] => Column::Reward(idx(i)?, idx(u)?),
                ["g", i] => Column::Terminal(idx(i)?),
                ["c", i, j] => Column::Cost(idx(i)?, idx(j)?),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "unrecognized column '{token}' at position {pos}"
                    )))
                }
            }
        };
        columns.push(column);
    }
    if columns.first() != Some(&Column::X) {
        return Err(Error::InvalidArgument("first table column must be 'x'".into()));
    }
    Ok(columns)
}

/// Piecewise-linear lookup table over a shared x axis.
#[derive(Debug, Clone)]
struct Curve {
    xs: Arc<Vec<f64>>,
    ys: Vec<f64>,
}

impl Curve {
    fn eval(&self, x: f64) -> f64 {
        let xs = &self.xs;
        if x <= xs[0] {
            return self.ys[0];
        }
        if x >= xs[xs.len() - 1] {
            return self.ys[xs.len() - 1];
        }
        let hi = xs.partition_point(|v| *v < x).max(1);
        let (x0, x1) = (xs[hi - 1], xs[hi]);
        let w = (x - x0) / (x1 - x0);
        self.ys[hi - 1] * (1.0 - w) + self.ys[hi] * w
    }
}

/// Builds a model from tabulated coefficients. `controls` supplies the
/// control points matching the table's 1-based control indices.
pub fn model_from_table(
    text: &str,
    name: &str,
    controls: Vec<Vec<f64>>,
    gamma: f64,
    lipschitz_f: f64,
    cost_constant_in_x: bool,
) -> Result<SwitchingModel> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("coefficient table is empty".into()))?;
    let columns = parse_header(header)?;

    let m = columns
        .iter()
        .map(|c| match c {
            Column::Drift(i, _) | Column::Diffusion(i, _) | Column::Reward(i, _) | Column::Terminal(i) => i + 1,
            Column::Cost(i, j) => (i + 1).max(j + 1),
            Column::X => 0,
        })
        .max()
        .unwrap_or(0);
    let p = columns
        .iter()
        .map(|c| match c {
            Column::Drift(_, u) | Column::Diffusion(_, u) | Column::Reward(_, u) => u + 1,
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    if m == 0 || p == 0 {
        return Err(Error::InvalidArgument("table declares no coefficient columns".into()));
    }
    if controls.len() != p {
        return Err(Error::InvalidArgument(format!(
            "table uses {p} control indices but {} control points were given",
            controls.len()
        )));
    }

    let mut xs: Vec<f64> = Vec::new();
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for (row_idx, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row {} has {} cells, expected {}",
                row_idx + 2,
                cells.len(),
                columns.len()
            )));
        }
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("bad number '{}' in row {}", cell.trim(), row_idx + 2))
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value in row {}",
                    row_idx + 2
                )));
            }
            if c == 0 {
                xs.push(v);
            } else {
                data[c].push(v);
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("table needs at least two rows".into()));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("table x column must be strictly increasing".into()));
    }
    let xs = Arc::new(xs);

    let find = |want: Column| -> Result<Curve> {
        let pos = columns
            .iter()
            .position(|c| *c == want)
            .ok_or_else(|| Error::InvalidArgument(format!("missing table column {want:?}")))?;
        Ok(Curve { xs: xs.clone(), ys: data[pos].clone() })
    };

    let mut drift_curves = Vec::with_capacity(m * p);
    let mut diffusion_curves = Vec::with_capacity(m * p);
    let mut reward_curves = Vec::with_capacity(m * p);
    for i in 0..m {
        for u in 0..p {
            drift_curves.push(find(Column::Drift(i, u))?);
            diffusion_curves.push(find(Column::Diffusion(i, u))?);
            reward_curves.push(find(Column::Reward(i, u))?);
        }
    }
    let mut terminal_curves = Vec::with_capacity(m);
    for i in 0..m {
        terminal_curves.push(find(Column::Terminal(i))?);
    }
    let mut cost_curves: Vec<Option<Curve>> = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            cost_curves.push(if i == j { None } else { Some(find(Column::Cost(i, j))?) });
        }
    }

    let control_index = {
        let controls = controls.clone();
        move |u: &[f64]| -> usize {
            controls
                .iter()
                .position(|c| c.as_slice() == u)
                .expect("control point not in the model's control set")
        }
    };

    let drift = {
        let control_index = control_index.clone();
        move |x: f64, i: usize, u: &[f64]| drift_curves[i * p + control_index(u)].eval(x)
    };
    let diffusion = {
        let control_index = control_index.clone();
        move |x: f64, i: usize, u: &[f64]| diffusion_curves[i * p + control_index(u)].eval(x)
    };
    let reward = {
        let control_index = control_index.clone();
        move |x: f64, i: usize, u: &[f64]| reward_curves[i * p + control_index(u)].eval(x)
    };
    let cost = move |x: f64, i: usize, j: usize| match &cost_curves[i * m + j] {
        Some(curve) => curve.eval(x),
        None => 0.0,
    };
    let terminal = move |x: f64, i: usize| terminal_curves[i].eval(x);

    let model = SwitchingModel {
        name: name.to_string(),
        dim: 1,
        m,
        controls,
        drift: Box::new(drift),
        diffusion: Box::new(diffusion),
        running_reward: Box::new(reward),
        switch_cost: Box::new(cost),
        cost_constant_in_x,
        terminal_reward: Box::new(terminal),
        gamma,
        lipschitz_f,
    };
    model.well_formed()?;
    Ok(model)
}
