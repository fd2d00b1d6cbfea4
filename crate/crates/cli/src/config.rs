//! Experiment configuration: named sections of `key = value` lines.
//!
//! ```text
//! [model]
//! preset = two_regime_flat
//!
//! [grid]
//! x_min = -6.0
//! x_max = 6.0
//! n_nodes = 241
//! boundary = neumann_zero_slope
//! ```
//!
//! `#` starts a comment. Lists are comma separated. Unknown sections or
//! keys are config errors with the offending line number, as are missing
//! referenced files.

use qvi_core::discretization::{build_grid, BoundaryMode, Grid};
use qvi_core::error::{Error, Result};
use qvi_core::model::{preset, SwitchingModel};
use qvi_core::tabulated::model_from_table;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub enum ModelSection {
    Preset(String),
    Table {
        path: PathBuf,
        controls: Vec<f64>,
        gamma: f64,
        lipschitz_f: f64,
        cost_constant_in_x: bool,
    },
}

#[derive(Debug, Clone)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_nodes: usize,
    pub boundary: BoundaryMode,
}

#[derive(Debug, Clone)]
pub struct ParabolicSection {
    pub t_max: f64,
    pub snapshots: Vec<f64>,
    pub probe_x: f64,
    /// 1-based regime, as written in config files.
    pub probe_regime: usize,
}

#[derive(Debug, Clone)]
pub struct EllipticSection {
    pub betas: Vec<f64>,
    pub n_max_exponent: u32,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct ErgodicSection {
    pub betas: Vec<f64>,
    pub probe_x: f64,
    pub probe_regime: usize,
}

#[derive(Debug, Clone)]
pub struct McSection {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub beta: f64,
    pub x0: f64,
    pub regime: usize,
    pub control: usize,
    /// 1-based regime the xi family pushes toward; 0 means "last regime".
    pub xi_target: usize,
    pub xi_levels: Vec<f64>,
    pub nu_levels: Vec<f64>,
    pub tail_tol: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub parabolic: Option<ParabolicSection>,
    pub elliptic: Option<EllipticSection>,
    pub ergodic: Option<ErgodicSection>,
    pub mc: Option<McSection>,
    pub output_dir: PathBuf,
}

struct Entry {
    line: usize,
    value: String,
    consumed: bool,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| config_err(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if sections.contains_key(&name) {
                return Err(config_err(line_no, format!("duplicate section [{name}]")));
            }
            sections.insert(name.clone(), Section { line: line_no, entries: BTreeMap::new() });
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(line_no, "expected 'key = value'"))?;
        let section = current
            .as_ref()
            .ok_or_else(|| config_err(line_no, "key outside of any [section]"))?;
        let entries = &mut sections.get_mut(section).unwrap().entries;
        let key = key.trim().to_string();
        if entries.contains_key(&key) {
            return Err(config_err(line_no, format!("duplicate key '{key}'")));
        }
        entries.insert(key, Entry { line: line_no, value: value.trim().to_string(), consumed: false });
    }
    Ok(sections)
}

struct SectionReader<'a> {
    name: &'a str,
    section: &'a mut Section,
}

impl<'a> SectionReader<'a> {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.section.entries.get_mut(key).map(|e| {
            e.consumed = true;
            (e.line, e.value.clone())
        })
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| {
            config_err(self.section.line, format!("[{}] is missing key '{key}'", self.name))
        })
    }

    fn finish(&self) -> Result<()> {
        for (key, entry) in &self.section.entries {
            if !entry.consumed {
                return Err(config_err(
                    entry.line,
                    format!("unknown key '{key}' in [{}]", self.name),
                ));
            }
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("'{key}' expects a number, got '{value}'")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("'{key}' expects a nonnegative integer, got '{value}'")))
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("'{key}' expects an integer, got '{value}'")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(config_err(line, format!("'{key}' expects true or false, got '{value}'"))),
    }
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|cell| parse_f64(line, key, cell.trim()))
        .collect()
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            config_err(0, format!("cannot read config '{}': {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut sections = parse_sections(text)?;
        for name in sections.keys() {
            if !["model", "grid", "parabolic", "elliptic", "ergodic", "mc", "output"]
                .contains(&name.as_str())
            {
                let line = sections[name].line;
                return Err(config_err(line, format!("unknown section [{name}]")));
            }
        }

        let model = {
            let section = sections
                .get_mut("model")
                .ok_or_else(|| config_err(0, "missing [model] section"))?;
            let mut r = SectionReader { name: "model", section };
            let model = match (r.take("preset"), r.take("table")) {
                (Some((_, name)), None) => ModelSection::Preset(name),
                (None, Some((line, rel))) => {
                    let path = base_dir.join(rel);
                    if !path.exists() {
                        return Err(config_err(
                            line,
                            format!("coefficient table '{}' does not exist", path.display()),
                        ));
                    }
                    let (cl, cv) = r.require("controls")?;
                    let (gl, gv) = r.require("gamma")?;
                    let (ll, lv) = r.require("lipschitz_f")?;
                    let constant = match r.take("cost_constant_in_x") {
                        Some((bl, bv)) => parse_bool(bl, "cost_constant_in_x", &bv)?,
                        None => true,
                    };
                    ModelSection::Table {
                        path,
                        controls: parse_list(cl, "controls", &cv)?,
                        gamma: parse_f64(gl, "gamma", &gv)?,
                        lipschitz_f: parse_f64(ll, "lipschitz_f", &lv)?,
                        cost_constant_in_x: constant,
                    }
                }
                (Some(_), Some((line, _))) => {
                    return Err(config_err(line, "give either 'preset' or 'table', not both"))
                }
                (None, None) => {
                    return Err(config_err(r.section.line, "[model] needs 'preset' or 'table'"))
                }
            };
            r.finish()?;
            model
        };

        let grid = {
            let section = sections
                .get_mut("grid")
                .ok_or_else(|| config_err(0, "missing [grid] section"))?;
            let mut r = SectionReader { name: "grid", section };
            let (l1, v1) = r.require("x_min")?;
            let (l2, v2) = r.require("x_max")?;
            let (l3, v3) = r.require("n_nodes")?;
            let boundary = match r.take("boundary") {
                Some((line, v)) => v
                    .parse::<BoundaryMode>()
                    .map_err(|e| config_err(line, e.to_string()))?,
                None => BoundaryMode::NeumannZeroSlope,
            };
            let grid = GridSection {
                x_min: parse_f64(l1, "x_min", &v1)?,
                x_max: parse_f64(l2, "x_max", &v2)?,
                n_nodes: parse_usize(l3, "n_nodes", &v3)?,
                boundary,
            };
            r.finish()?;
            grid
        };

        let parabolic = match sections.get_mut("parabolic") {
            Some(section) => {
                let mut r = SectionReader { name: "parabolic", section };
                let (l, v) = r.require("t_max")?;
                let t_max = parse_f64(l, "t_max", &v)?;
                let snapshots = match r.take("snapshots") {
                    Some((line, v)) => parse_list(line, "snapshots", &v)?,
                    None => Vec::new(),
                };
                let probe_x = match r.take("probe_x") {
                    Some((line, v)) => parse_f64(line, "probe_x", &v)?,
                    None => 0.0,
                };
                let probe_regime = match r.take("probe_regime") {
                    Some((line, v)) => parse_usize(line, "probe_regime", &v)?,
                    None => 1,
                };
                r.finish()?;
                Some(ParabolicSection { t_max, snapshots, probe_x, probe_regime })
            }
            None => None,
        };

        let elliptic = match sections.get_mut("elliptic") {
            Some(section) => {
                let mut r = SectionReader { name: "elliptic", section };
                let (l, v) = r.require("betas")?;
                let betas = parse_list(l, "betas", &v)?;
                let n_max_exponent = match r.take("n_max_exponent") {
                    Some((line, v)) => parse_usize(line, "n_max_exponent", &v)? as u32,
                    None => 12,
                };
                let tol = match r.take("tol") {
                    Some((line, v)) => parse_f64(line, "tol", &v)?,
                    None => qvi_core::elliptic::DEFAULT_TOL,
                };
                r.finish()?;
                Some(EllipticSection { betas, n_max_exponent, tol })
            }
            None => None,
        };

        let ergodic = match sections.get_mut("ergodic") {
            Some(section) => {
                let mut r = SectionReader { name: "ergodic", section };
                let (l, v) = r.require("betas")?;
                let betas = parse_list(l, "betas", &v)?;
                let probe_x = match r.take("probe_x") {
                    Some((line, v)) => parse_f64(line, "probe_x", &v)?,
                    None => 0.0,
                };
                let probe_regime = match r.take("probe_regime") {
                    Some((line, v)) => parse_usize(line, "probe_regime", &v)?,
                    None => 1,
                };
                r.finish()?;
                Some(ErgodicSection { betas, probe_x, probe_regime })
            }
            None => None,
        };

        let mc = match sections.get_mut("mc") {
            Some(section) => {
                let mut r = SectionReader { name: "mc", section };
                let (l1, v1) = r.require("n_paths")?;
                let (l2, v2) = r.require("dt")?;
                let (l3, v3) = r.require("horizon")?;
                let (l4, v4) = r.require("beta")?;
                let seed = match r.take("seed") {
                    Some((line, v)) => parse_u64(line, "seed", &v)?,
                    None => 0,
                };
                let x0 = match r.take("x0") {
                    Some((line, v)) => parse_f64(line, "x0", &v)?,
                    None => 0.0,
                };
                let regime = match r.take("regime") {
                    Some((line, v)) => parse_usize(line, "regime", &v)?,
                    None => 1,
                };
                let control = match r.take("control") {
                    Some((line, v)) => parse_usize(line, "control", &v)?,
                    None => 1,
                };
                let xi_target = match r.take("xi_target") {
                    Some((line, v)) => parse_usize(line, "xi_target", &v)?,
                    None => 0,
                };
                let xi_levels = match r.take("xi_levels") {
                    Some((line, v)) => parse_list(line, "xi_levels", &v)?,
                    None => vec![1e-3],
                };
                let nu_levels = match r.take("nu_levels") {
                    Some((line, v)) => parse_list(line, "nu_levels", &v)?,
                    None => vec![1.0],
                };
                let tail_tol = match r.take("tail_tol") {
                    Some((line, v)) => parse_f64(line, "tail_tol", &v)?,
                    None => 0.01,
                };
                r.finish()?;
                Some(McSection {
                    n_paths: parse_usize(l1, "n_paths", &v1)?,
                    dt: parse_f64(l2, "dt", &v2)?,
                    horizon: parse_f64(l3, "horizon", &v3)?,
                    seed,
                    beta: parse_f64(l4, "beta", &v4)?,
                    x0,
                    regime,
                    control,
                    xi_target,
                    xi_levels,
                    nu_levels,
                    tail_tol,
                })
            }
            None => None,
        };

        let output_dir = match sections.get_mut("output") {
            Some(section) => {
                let mut r = SectionReader { name: "output", section };
                let dir = match r.take("dir") {
                    Some((_, v)) => base_dir.join(v),
                    None => base_dir.join("out"),
                };
                r.finish()?;
                dir
            }
            None => base_dir.join("out"),
        };

        Ok(ExperimentConfig { model, grid, parabolic, elliptic, ergodic, mc, output_dir })
    }

    pub fn build_model(&self) -> Result<SwitchingModel> {
        match &self.model {
            ModelSection::Preset(name) => preset(name),
            ModelSection::Table { path, controls, gamma, lipschitz_f, cost_constant_in_x } => {
                let text = std::fs::read_to_string(path)?;
                let points = controls.iter().map(|u| vec![*u]).collect();
                model_from_table(
                    &text,
                    &format!("table:{}", path.display()),
                    points,
                    *gamma,
                    *lipschitz_f,
                    *cost_constant_in_x,
                )
            }
        }
    }

    pub fn build_grid(&self) -> Result<Grid> {
        build_grid(self.grid.x_min, self.grid.x_max, self.grid.n_nodes, self.grid.boundary)
    }
}

/// Converts a 1-based regime from a config file into the internal index.
pub fn regime_index(regime_1based: usize, m: usize) -> Result<usize> {
    if regime_1based == 0 || regime_1based > m {
        return Err(Error::InvalidArgument(format!(
            "regime {regime_1based} out of range 1..={m}"
        )));
    }
    Ok(regime_1based - 1)
}
