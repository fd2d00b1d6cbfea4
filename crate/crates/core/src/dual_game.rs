//! Monte Carlo simulation of the randomized forward system `(X, I, Gamma)`
//! and the sup-inf search over jump-intensity tilts.
//!
//! Regime and control revisions are pure-jump processes: per step of length
//! `dt`, a jump toward target `j` fires with probability `1 - exp(-rate_j
//! dt)` (Bernoulli thinning), at most one firing is applied, ties broken
//! uniformly. Tilted measures are realized by simulating directly at the
//! tilted intensities instead of reweighting paths, which keeps the
//! estimator variance flat in the tilt size. Every step consumes a fixed
//! number of random draws whatever happens, so two runs with the same seed
//! coincide bit for bit even across policies.

use crate::error::{Error, Result};
use crate::model::{SwitchingModel, ValidationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::sync::Arc;

/// Regime-jump intensity map `(x, current regime, out[j] = rate toward j)`.
pub type XiMap = Arc<dyn Fn(f64, usize, &mut [f64]) + Send + Sync>;
/// Control-jump tilt map `(x, out[l] = tilt of control point l)`.
pub type NuMap = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// One regime-intensity component, valued in `(0, n_bound]`.
#[derive(Clone)]
pub struct XiPolicy {
    pub map: XiMap,
    pub n_bound: f64,
}

impl XiPolicy {
    pub fn from_fn(map: impl Fn(f64, usize, &mut [f64]) + Send + Sync + 'static, n_bound: f64) -> Self {
        XiPolicy { map: Arc::new(map), n_bound }
    }

    /// State-independent intensities, one level per target regime.
    pub fn constant(levels: Vec<f64>) -> Self {
        let n_bound = levels.iter().copied().fold(0.0_f64, f64::max);
        XiPolicy::from_fn(
            move |_x, _i, out| {
                out.copy_from_slice(&levels);
            },
            n_bound,
        )
    }

    /// Pushes toward one target regime at `level`, keeping a small positive
    /// background rate toward everything else.
    pub fn target(m: usize, target: usize, level: f64, background: f64) -> Self {
        let mut levels = vec![background; m];
        levels[target] = level;
        XiPolicy::constant(levels)
    }
}

/// One control-tilt component, valued in `[1, k_bound + 1]`.
#[derive(Clone)]
pub struct NuPolicy {
    pub map: NuMap,
    pub k_bound: f64,
}

impl NuPolicy {
    pub fn from_fn(map: impl Fn(f64, &mut [f64]) + Send + Sync + 'static, k_bound: f64) -> Self {
        NuPolicy { map: Arc::new(map), k_bound }
    }

    /// State-independent uniform tilt.
    pub fn constant(level: f64) -> Self {
        NuPolicy::from_fn(
            move |_x, out| {
                for v in out.iter_mut() {
                    *v = level;
                }
            },
            (level - 1.0).max(0.0),
        )
    }
}

/// Feedback intensity pair driving one simulation.
#[derive(Clone)]
pub struct IntensityPolicy {
    pub xi: XiMap,
    pub nu: NuMap,
    pub n_bound: f64,
    pub k_bound: f64,
}

impl IntensityPolicy {
    pub fn compose(xi: &XiPolicy, nu: &NuPolicy) -> Self {
        IntensityPolicy {
            xi: xi.map.clone(),
            nu: nu.map.clone(),
            n_bound: xi.n_bound,
            k_bound: nu.k_bound,
        }
    }

    /// Constant levels on both clocks.
    pub fn constant(xi_levels: Vec<f64>, nu_level: f64) -> Self {
        IntensityPolicy::compose(&XiPolicy::constant(xi_levels), &NuPolicy::constant(nu_level))
    }
}

/// Simulation configuration. `theta_mu_weights` discretizes the control
/// clock's base measure over the model's control points; every point keeps
/// positive weight so the whole control set stays reachable.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub theta_mu_weights: Vec<f64>,
    /// Permitted discounted tail `e^{-beta horizon} sup|f| / beta`.
    pub tail_tol: f64,
}

impl McConfig {
    /// Uniform control weights for `model`.
    pub fn uniform(model: &SwitchingModel, n_paths: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        let p = model.controls.len();
        McConfig {
            n_paths,
            dt,
            horizon,
            seed,
            theta_mu_weights: vec![1.0 / p as f64; p],
            tail_tol: 0.01,
        }
    }

    fn validate(&self, model: &SwitchingModel) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive (got {})", self.dt)));
        }
        if self.dt > self.horizon {
            return Err(Error::InvalidArgument("dt must not exceed the horizon".into()));
        }
        if self.theta_mu_weights.len() != model.controls.len() {
            return Err(Error::InvalidArgument(format!(
                "theta_mu_weights has {} entries for {} control points",
                self.theta_mu_weights.len(),
                model.controls.len()
            )));
        }
        if self.theta_mu_weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument("theta_mu_weights must be nonnegative".into()));
        }
        let sum: f64 = self.theta_mu_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "theta_mu_weights must sum to 1 (got {sum})"
            )));
        }
        Ok(())
    }

    /// Discounted-tail audit against the reward envelope around `x0`.
    fn check_tail(&self, model: &SwitchingModel, beta: f64, x0: f64) -> Result<()> {
        let env = reward_envelope(model, x0);
        let tail = (-beta * self.horizon).exp() * env / beta;
        if tail > self.tail_tol {
            return Err(Error::TailBound { horizon: self.horizon, tail, tol: self.tail_tol });
        }
        Ok(())
    }
}

/// Sup of `|f|` over the audit domain (widened to cover the start point)
/// and all regime/control pairs.
fn reward_envelope(model: &SwitchingModel, x0: f64) -> f64 {
    let lo = crate::model::DEFAULT_AUDIT_DOMAIN.0.min(x0 - 2.0);
    let hi = crate::model::DEFAULT_AUDIT_DOMAIN.1.max(x0 + 2.0);
    let mut env: f64 = 0.0;
    for k in 0..=120 {
        let x = lo + (hi - lo) * k as f64 / 120.0;
        for i in 0..model.m {
            for u in 0..model.controls.len() {
                env = env.max(model.reward_at(x, i, u).abs());
            }
        }
    }
    env
}

/// Sample mean of the discounted dual payoff with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Saddle candidate from the finite sup-inf search.
#[derive(Debug)]
pub struct SupInfResult {
    pub best_xi: usize,
    pub worst_nu: usize,
    pub estimate: McEstimate,
    /// Every evaluated `(xi index, nu index, estimate)` row.
    pub table: Vec<(usize, usize, McEstimate)>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-path seed: the parallel schedule never changes streams.
pub fn path_seed(master: u64, path_index: u64) -> u64 {
    splitmix64(master ^ path_index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct PathScratch {
    xi: Vec<f64>,
    nu: Vec<f64>,
    fired: Vec<usize>,
}

impl PathScratch {
    fn new(m: usize, p: usize) -> Self {
        PathScratch { xi: vec![0.0; m], nu: vec![0.0; p], fired: Vec::with_capacity(m.max(p)) }
    }
}

struct PathState {
    x: f64,
    regime: usize,
    control: usize,
}

/// Advances the state one step. Returns `Some(cost)` when a regime jump was
/// applied at the end of the step (zero for a self-jump). The number of
/// random draws per call is fixed: one normal, then `m + 1` and `p + 1`
/// uniforms.
fn advance(
    model: &SwitchingModel,
    policy: &IntensityPolicy,
    weights: &[f64],
    dt: f64,
    sqrt_dt: f64,
    rng: &mut ChaCha8Rng,
    state: &mut PathState,
    scratch: &mut PathScratch,
) -> Result<Option<f64>> {
    let b = model.drift_at(state.x, state.regime, state.control);
    let sig = model.diffusion_at(state.x, state.regime, state.control);
    let z: f64 = rng.sample(StandardNormal);
    state.x += b * dt + sig * sqrt_dt * z;

    // Regime clock.
    (policy.xi)(state.x, state.regime, &mut scratch.xi);
    scratch.fired.clear();
    for (j, &rate) in scratch.xi.iter().enumerate() {
        if !(rate > 0.0 && rate <= policy.n_bound) {
            return Err(Error::PolicyBound(format!(
                "xi({j}) = {rate} outside (0, {}]",
                policy.n_bound
            )));
        }
        let u: f64 = rng.gen();
        if u < 1.0 - (-rate * dt).exp() {
            scratch.fired.push(j);
        }
    }
    let tie: f64 = rng.gen();
    let mut jump_cost = None;
    if !scratch.fired.is_empty() {
        let pick = ((tie * scratch.fired.len() as f64) as usize).min(scratch.fired.len() - 1);
        let target = scratch.fired[pick];
        jump_cost = Some(model.cost_at(state.x, state.regime, target));
        state.regime = target;
    }

    // Control clock.
    (policy.nu)(state.x, &mut scratch.nu);
    scratch.fired.clear();
    for (l, &tilt) in scratch.nu.iter().enumerate() {
        if !(tilt >= 1.0 && tilt <= policy.k_bound + 1.0) {
            return Err(Error::PolicyBound(format!(
                "nu({l}) = {tilt} outside [1, {}]",
                policy.k_bound + 1.0
            )));
        }
        let u: f64 = rng.gen();
        if u < 1.0 - (-tilt * weights[l] * dt).exp() {
            scratch.fired.push(l);
        }
    }
    let tie: f64 = rng.gen();
    if !scratch.fired.is_empty() {
        let pick = ((tie * scratch.fired.len() as f64) as usize).min(scratch.fired.len() - 1);
        state.control = scratch.fired[pick];
    }

    Ok(jump_cost)
}

fn simulate_payoff_inner(
    model: &SwitchingModel,
    x: f64,
    i: usize,
    u_idx: usize,
    policy: &IntensityPolicy,
    beta: f64,
    cfg: &McConfig,
    seed: u64,
) -> Result<f64> {
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let n_steps = (cfg.horizon / dt).round().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PathState { x, regime: i, control: u_idx };
    let mut scratch = PathScratch::new(model.m, model.controls.len());
    let mut payoff = 0.0;

    for step in 0..n_steps {
        let t = step as f64 * dt;
        let disc = (-beta * t).exp();
        payoff += disc * model.reward_at(state.x, state.regime, state.control) * dt;
        let cost = advance(model, policy, &cfg.theta_mu_weights, dt, sqrt_dt, &mut rng, &mut state, &mut scratch)?;
        if !state.x.is_finite() {
            return Err(Error::NonFiniteState { path: seed, step });
        }
        if let Some(c) = cost {
            payoff -= (-beta * (t + dt)).exp() * c;
        }
    }
    Ok(payoff)
}

/// Discounted payoff of a single path: left-endpoint quadrature of the
/// running reward minus the discounted switch costs, truncated at the
/// horizon.
pub fn simulate_path(
    model: &SwitchingModel,
    x: f64,
    i: usize,
    u_idx: usize,
    policy: &IntensityPolicy,
    beta: f64,
    cfg: &McConfig,
    seed: u64,
) -> Result<f64> {
    model.well_formed()?;
    cfg.validate(model)?;
    check_start(model, i, u_idx)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive (got {beta})")));
    }
    cfg.check_tail(model, beta, x)?;
    simulate_payoff_inner(model, x, i, u_idx, policy, beta, cfg, seed)
}

fn check_start(model: &SwitchingModel, i: usize, u_idx: usize) -> Result<()> {
    if i >= model.m {
        return Err(Error::InvalidArgument(format!("start regime {} out of range", i + 1)));
    }
    if u_idx >= model.controls.len() {
        return Err(Error::InvalidArgument(format!("control index {u_idx} out of range")));
    }
    Ok(())
}

/// Sample mean and standard error over independent paths with counter-based
/// seeds. The reduction runs in path order, so results are bit-identical
/// regardless of the parallel schedule.
pub fn estimate_payoff(
    model: &SwitchingModel,
    x: f64,
    i: usize,
    u_idx: usize,
    policy: &IntensityPolicy,
    beta: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    model.well_formed()?;
    cfg.validate(model)?;
    check_start(model, i, u_idx)?;
    if cfg.n_paths < 2 {
        return Err(Error::InvalidArgument("need at least 2 paths".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive (got {beta})")));
    }
    cfg.check_tail(model, beta, x)?;

    let payoffs: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|p| simulate_payoff_inner(model, x, i, u_idx, policy, beta, cfg, path_seed(cfg.seed, p)))
        .collect::<Result<_>>()?;

    let n = payoffs.len() as f64;
    let mean = payoffs.iter().sum::<f64>() / n;
    let var = payoffs.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
    Ok(McEstimate { mean, stderr: (var / n).sqrt(), n_paths: cfg.n_paths, seed: cfg.seed })
}

/// Evaluates every `(xi, nu)` pair under common random numbers and returns
/// the argmax-over-xi of the argmin-over-nu. The families are finite and
/// hand declared, so the result approximates the saddle from below in xi
/// and from above in nu rather than bounding it.
pub fn sup_inf_search(
    model: &SwitchingModel,
    x: f64,
    i: usize,
    u_idx: usize,
    beta: f64,
    xi_family: &[XiPolicy],
    nu_family: &[NuPolicy],
    cfg: &McConfig,
) -> Result<SupInfResult> {
    if xi_family.is_empty() || nu_family.is_empty() {
        return Err(Error::InvalidArgument("policy families must be nonempty".into()));
    }
    let mut table = Vec::with_capacity(xi_family.len() * nu_family.len());
    let mut best: Option<(usize, usize, McEstimate)> = None;
    for (xi_id, xi) in xi_family.iter().enumerate() {
        let mut inner: Option<(usize, McEstimate)> = None;
        for (nu_id, nu) in nu_family.iter().enumerate() {
            let policy = IntensityPolicy::compose(xi, nu);
            let estimate = estimate_payoff(model, x, i, u_idx, &policy, beta, cfg)?;
            table.push((xi_id, nu_id, estimate));
            let replace = match &inner {
                Some((_, cur)) => estimate.mean < cur.mean,
                None => true,
            };
            if replace {
                inner = Some((nu_id, estimate));
            }
        }
        let (worst_nu, estimate) = inner.expect("nu family nonempty");
        let replace = match &best {
            Some((_, _, cur)) => estimate.mean > cur.mean,
            None => true,
        };
        if replace {
            best = Some((xi_id, worst_nu, estimate));
        }
    }
    let (best_xi, worst_nu, estimate) = best.expect("xi family nonempty");
    Ok(SupInfResult { best_xi, worst_nu, estimate, table })
}

/// Estimates `E |X_t|^2` on the ladder `t in {1, 2, 4, 8}` (clipped to the
/// horizon) and checks the estimates stay below four times the `t = 1`
/// level, the non-explosion signature of a dissipative drift.
pub fn check_moment_bound(
    model: &SwitchingModel,
    x: f64,
    i: usize,
    u_idx: usize,
    policy: &IntensityPolicy,
    cfg: &McConfig,
) -> Result<ValidationReport> {
    model.well_formed()?;
    cfg.validate(model)?;
    check_start(model, i, u_idx)?;
    if cfg.n_paths < 2 {
        return Err(Error::InvalidArgument("need at least 2 paths".into()));
    }
    let ladder: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
        .into_iter()
        .filter(|t| *t <= cfg.horizon + 1e-9)
        .collect();
    if ladder.len() < 2 {
        return Err(Error::InvalidArgument("moment check needs a horizon of at least 2".into()));
    }
    let snap_steps: Vec<usize> = ladder.iter().map(|t| (t / cfg.dt).round() as usize).collect();
    let last_step = *snap_steps.last().unwrap();

    let per_path: Vec<Vec<f64>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|p| -> Result<Vec<f64>> {
            let seed = path_seed(cfg.seed, p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = PathState { x, regime: i, control: u_idx };
            let mut scratch = PathScratch::new(model.m, model.controls.len());
            let sqrt_dt = cfg.dt.sqrt();
            let mut snaps = Vec::with_capacity(snap_steps.len());
            for step in 0..=last_step {
                if snap_steps.contains(&step) {
                    snaps.push(state.x * state.x);
                }
                if step < last_step {
                    advance(model, policy, &cfg.theta_mu_weights, cfg.dt, sqrt_dt, &mut rng, &mut state, &mut scratch)?;
                    if !state.x.is_finite() {
                        return Err(Error::NonFiniteState { path: seed, step });
                    }
                }
            }
            Ok(snaps)
        })
        .collect::<Result<_>>()?;

    let n = per_path.len() as f64;
    let estimates: Vec<f64> = (0..ladder.len())
        .map(|s| per_path.iter().map(|snaps| snaps[s]).sum::<f64>() / n)
        .collect();

    let fitted_cap = 4.0 * estimates[0];
    let worst = estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max) - fitted_cap;
    let witnesses = ladder
        .iter()
        .zip(&estimates)
        .map(|(t, e)| format!("E|X_{t}|^2 = {e:.6}"))
        .collect();
    Ok(ValidationReport {
        check: "moment_bound".into(),
        passed: worst <= 0.0,
        worst_violation: worst,
        tolerance: 0.0,
        witnesses,
    })
}
