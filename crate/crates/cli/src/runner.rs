//! Stage orchestration: validators, solver runs, CSV artifacts, and the
//! summary report.

use crate::config::{regime_index, ExperimentConfig};
use qvi_core::discretization::Grid;
use qvi_core::dual_game::{sup_inf_search, McConfig, NuPolicy, SupInfResult, XiPolicy};
use qvi_core::elliptic::solve_elliptic;
use qvi_core::ergodic::{extract_ergodic, ErgodicEstimate};
use qvi_core::error::{Error, Result};
use qvi_core::model::{
    check_dissipativity_in, check_no_free_loop, check_terminal_consistency, SwitchingModel,
    ValidationReport,
};
use qvi_core::parabolic::solve_parabolic;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parabolic,
    Elliptic,
    Ergodic,
    DualGame,
    All,
}

impl std::str::FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parabolic" => Ok(Stage::Parabolic),
            "elliptic" => Ok(Stage::Elliptic),
            "ergodic" => Ok(Stage::Ergodic),
            "dualgame" => Ok(Stage::DualGame),
            "all" => Ok(Stage::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown stage '{other}' (expected parabolic, elliptic, ergodic, dualgame, or all)"
            ))),
        }
    }
}

impl Stage {
    fn wants(self, s: Stage) -> bool {
        self == Stage::All || self == s
    }
}

/// Runs the three structural audits and prints their reports.
pub fn validate(model: &SwitchingModel, grid: &Grid) -> Result<Vec<ValidationReport>> {
    let reports = vec![
        check_dissipativity_in(model, (grid.x_min, grid.x_max), 256, 0x5eed)?,
        check_no_free_loop(model, 33)?,
        check_terminal_consistency(model, grid)?,
    ];
    Ok(reports)
}

pub fn print_reports(reports: &[ValidationReport]) -> bool {
    let mut all_ok = true;
    for report in reports {
        println!("{report}");
        all_ok &= report.passed;
    }
    all_ok
}

fn missing_section(stage: &str, section: &str) -> Error {
    Error::Config {
        line: 0,
        message: format!("stage '{stage}' requires a [{section}] section"),
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

struct SummaryInputs {
    lambda_parabolic: Option<(f64, f64)>,
    ergodic: Option<ErgodicEstimate>,
    saddle: Option<SupInfResult>,
}

/// Executes the requested stage(s) and writes every artifact into
/// `out_dir`. Returns the number of artifacts written.
pub fn run(
    cfg: &ExperimentConfig,
    model: &SwitchingModel,
    grid: &Grid,
    stage: Stage,
    seed_override: Option<u64>,
    out_dir: &Path,
) -> Result<usize> {
    let mut written = 0;
    let mut summary = SummaryInputs { lambda_parabolic: None, ergodic: None, saddle: None };

    if stage.wants(Stage::Parabolic) {
        let section = cfg
            .parabolic
            .as_ref()
            .ok_or_else(|| missing_section("parabolic", "parabolic"))?;
        let i0 = regime_index(section.probe_regime, model.m)?;
        let run = solve_parabolic(model, grid, section.t_max, &section.snapshots, section.probe_x, i0)?;
        if run.initial_projection_changed {
            eprintln!("warning: terminal reward violated the switching constraint; projected");
        }
        let mut csv = String::from("T,lambda_T,probe_value\n");
        for ((t, lambda), (_, field)) in run.averages.iter().zip(&run.snapshots) {
            let probe = field.get(run.probe_node, run.probe_regime);
            let _ = writeln!(csv, "{},{},{}", fmt_f(*t), fmt_f(*lambda), fmt_f(probe));
        }
        write_file(out_dir, "parabolic.csv", &csv)?;
        written += 1;
        for (t, field) in &run.snapshots {
            let mut buf = Vec::new();
            field.write_csv(grid, &mut buf)?;
            write_file(
                out_dir,
                &format!("parabolic_field_T{t}.csv"),
                &String::from_utf8(buf).expect("csv is utf8"),
            )?;
            written += 1;
        }
        summary.lambda_parabolic = run.averages.last().copied();
    }

    if stage.wants(Stage::Elliptic) {
        let section = cfg
            .elliptic
            .as_ref()
            .ok_or_else(|| missing_section("elliptic", "elliptic"))?;
        let schedule: Vec<f64> = (0..=section.n_max_exponent).map(|k| (1u64 << k) as f64).collect();
        let mut csv = String::from("beta,n,residual,iterations,sup_gap\n");
        for &beta in &section.betas {
            let solve = solve_elliptic(model, grid, beta, &schedule, section.tol)?;
            for level in &solve.levels {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    fmt_f(beta),
                    fmt_f(level.n_penalty),
                    fmt_f(level.residual),
                    level.iterations,
                    fmt_f(level.gap)
                );
            }
            let mut buf = Vec::new();
            solve.field.write_csv(grid, &mut buf)?;
            write_file(
                out_dir,
                &format!("elliptic_field_beta{beta}.csv"),
                &String::from_utf8(buf).expect("csv is utf8"),
            )?;
            written += 1;
        }
        write_file(out_dir, "elliptic.csv", &csv)?;
        written += 1;
    }

    if stage.wants(Stage::Ergodic) {
        let section = cfg.ergodic.as_ref().ok_or_else(|| missing_section("ergodic", "ergodic"))?;
        let i0 = regime_index(section.probe_regime, model.m)?;
        let estimate = extract_ergodic(model, grid, &section.betas, section.probe_x, i0)?;
        let mut csv = String::from("beta,lambda_beta,probe_spread\n");
        for ((beta, lambda), spread) in estimate.lambda_per_beta.iter().zip(&estimate.probe_spreads) {
            let _ = writeln!(csv, "{},{},{}", fmt_f(*beta), fmt_f(*lambda), fmt_f(*spread));
        }
        write_file(out_dir, "ergodic.csv", &csv)?;
        written += 1;
        let mut buf = Vec::new();
        estimate.phi.write_csv(grid, &mut buf)?;
        write_file(out_dir, "ergodic_phi.csv", &String::from_utf8(buf).expect("csv is utf8"))?;
        written += 1;
        summary.ergodic = Some(estimate);
    }

    if stage.wants(Stage::DualGame) {
        let section = cfg.mc.as_ref().ok_or_else(|| missing_section("dualgame", "mc"))?;
        let i0 = regime_index(section.regime, model.m)?;
        if section.control == 0 || section.control > model.controls.len() {
            return Err(Error::InvalidArgument(format!(
                "control {} out of range 1..={}",
                section.control,
                model.controls.len()
            )));
        }
        let mc = McConfig {
            seed: seed_override.unwrap_or(section.seed),
            tail_tol: section.tail_tol,
            ..McConfig::uniform(model, section.n_paths, section.dt, section.horizon, section.seed)
        };
        // Each xi level pushes toward one target regime, with a small
        // positive background rate elsewhere; a uniform level toward every
        // regime would ping-pong and burn switch cost.
        let target = if section.xi_target == 0 { model.m } else { section.xi_target };
        if target > model.m {
            return Err(Error::InvalidArgument(format!(
                "xi_target {target} out of range 1..={}",
                model.m
            )));
        }
        let xi_family: Vec<XiPolicy> = section
            .xi_levels
            .iter()
            .map(|&level| XiPolicy::target(model.m, target - 1, level, level.min(1e-3)))
            .collect();
        let nu_family: Vec<NuPolicy> =
            section.nu_levels.iter().map(|&level| NuPolicy::constant(level)).collect();
        let result = sup_inf_search(
            model,
            section.x0,
            i0,
            section.control - 1,
            section.beta,
            &xi_family,
            &nu_family,
            &mc,
        )?;
        let mut csv = String::from("xi_id,nu_id,mean,stderr,n_paths\n");
        for (xi_id, nu_id, est) in &result.table {
            let _ = writeln!(csv, "{xi_id},{nu_id},{},{},{}", fmt_f(est.mean), fmt_f(est.stderr), est.n_paths);
        }
        // Saddle summary row: the winning pair repeated as the last line.
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            result.best_xi,
            result.worst_nu,
            fmt_f(result.estimate.mean),
            fmt_f(result.estimate.stderr),
            result.estimate.n_paths
        );
        write_file(out_dir, "dualgame.csv", &csv)?;
        written += 1;
        summary.saddle = Some(result);
    }

    let mut text = String::new();
    let _ = writeln!(text, "model = {}", model.name);
    let _ = writeln!(
        text,
        "grid = [{}, {}] with {} nodes",
        grid.x_min, grid.x_max, grid.n_nodes
    );
    if let Some(est) = &summary.ergodic {
        let (beta_min, lambda_beta) = *est.lambda_per_beta.last().unwrap();
        let _ = writeln!(text, "lambda_beta_smallest = {} (beta = {beta_min})", fmt_f(lambda_beta));
        let _ = writeln!(text, "lambda_richardson = {}", fmt_f(est.richardson_lambda));
        let _ = writeln!(text, "ergodic_residual = {}", fmt_f(est.residual));
    }
    if let Some((t, lambda)) = summary.lambda_parabolic {
        let _ = writeln!(text, "lambda_parabolic = {} (T = {t})", fmt_f(lambda));
    }
    if let (Some(est), Some((_, lam_t))) = (&summary.ergodic, summary.lambda_parabolic) {
        let lam_b = est.lambda_per_beta.last().unwrap().1;
        let lam_r = est.richardson_lambda;
        let _ = writeln!(text, "gap_beta_vs_richardson = {}", fmt_f((lam_b - lam_r).abs()));
        let _ = writeln!(text, "gap_beta_vs_parabolic = {}", fmt_f((lam_b - lam_t).abs()));
        let _ = writeln!(text, "gap_richardson_vs_parabolic = {}", fmt_f((lam_r - lam_t).abs()));
    }
    if let Some(saddle) = &summary.saddle {
        let _ = writeln!(
            text,
            "dualgame_saddle = {} (xi {}, nu {}, stderr {})",
            fmt_f(saddle.estimate.mean),
            saddle.best_xi,
            saddle.worst_nu,
            fmt_f(saddle.estimate.stderr)
        );
    }
    write_file(out_dir, "summary.txt", &text)?;
    written += 1;

    Ok(written)
}
