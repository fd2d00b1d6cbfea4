use qvi_cli::config::ExperimentConfig;
use qvi_cli::runner::{print_reports, run, validate, Stage};
use qvi_core::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const USAGE: &str = "\
usage:
  qvi validate <config>
  qvi run <config> --stage <parabolic|elliptic|ergodic|dualgame|all> \\
      [--seed N] [--out DIR] [--force]

exit codes: 0 success, 1 solver or validation failure, 2 usage or config error";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = dispatch(&args);
    ExitCode::from(code)
}

fn usage_error(message: &str) -> u8 {
    eprintln!("error: {message}\n{USAGE}");
    2
}

fn dispatch(args: &[String]) -> u8 {
    match args.first().map(String::as_str) {
        Some("validate") => {
            if args.len() != 2 {
                return usage_error("validate takes exactly one config path");
            }
            cmd_validate(Path::new(&args[1]))
        }
        Some("run") => cmd_run(&args[1..]),
        Some(other) => usage_error(&format!("unknown command '{other}'")),
        None => usage_error("missing command"),
    }
}

type Loaded = (ExperimentConfig, qvi_core::model::SwitchingModel, qvi_core::discretization::Grid);

fn load(path: &Path) -> Result<Loaded, u8> {
    let cfg = match ExperimentConfig::from_path(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return Err(2);
        }
    };
    let model = match cfg.build_model() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("config error: {e}");
            return Err(2);
        }
    };
    let grid = match cfg.build_grid() {
        Ok(g) => g,
        Err(e) => {
            eprintln!("config error: {e}");
            return Err(2);
        }
    };
    Ok((cfg, model, grid))
}

fn cmd_validate(path: &Path) -> u8 {
    let (_cfg, model, grid) = match load(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    match validate(&model, &grid) {
        Ok(reports) => {
            if print_reports(&reports) {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("validation error: {e}");
            1
        }
    }
}

fn cmd_run(args: &[String]) -> u8 {
    let mut config_path: Option<PathBuf> = None;
    let mut stage: Option<Stage> = None;
    let mut seed: Option<u64> = None;
    let mut out: Option<PathBuf> = None;
    let mut force = false;

    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--stage" => match it.next() {
                Some(s) => match s.parse() {
                    Ok(s) => stage = Some(s),
                    Err(e) => return usage_error(&e.to_string()),
                },
                None => return usage_error("--stage needs a value"),
            },
            "--seed" => match it.next().map(|s| s.parse::<u64>()) {
                Some(Ok(v)) => seed = Some(v),
                _ => return usage_error("--seed needs an integer"),
            },
            "--out" => match it.next() {
                Some(dir) => out = Some(PathBuf::from(dir)),
                None => return usage_error("--out needs a directory"),
            },
            "--force" => force = true,
            other if other.starts_with("--") => {
                return usage_error(&format!("unknown flag '{other}'"))
            }
            other => {
                if config_path.is_some() {
                    return usage_error("more than one config path given");
                }
                config_path = Some(PathBuf::from(other));
            }
        }
    }
    let config_path = match config_path {
        Some(p) => p,
        None => return usage_error("run needs a config path"),
    };
    let stage = match stage {
        Some(s) => s,
        None => return usage_error("run needs --stage"),
    };

    let (cfg, model, grid) = match load(&config_path) {
        Ok(v) => v,
        Err(code) => return code,
    };

    match validate(&model, &grid) {
        Ok(reports) => {
            if !print_reports(&reports) {
                if force {
                    eprintln!("warning: validation failed; continuing under --force");
                } else {
                    eprintln!("validation failed; rerun with --force to override");
                    return 1;
                }
            }
        }
        Err(e) => {
            eprintln!("validation error: {e}");
            return 1;
        }
    }

    let out_dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    match run(&cfg, &model, &grid, stage, seed, &out_dir) {
        Ok(written) => {
            println!("wrote {written} artifact(s) to {}", out_dir.display());
            0
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("config error: {e}");
            2
        }
        Err(e) => {
            eprintln!("stage failed: {e}");
            1
        }
    }
}
