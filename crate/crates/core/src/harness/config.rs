//! `key = value` suite configuration.
//!
//! Blank lines and `#` comments are ignored; list values are comma
//! separated; unknown keys are errors.
//!
//! ```text
//! families = logreg, quad, lse, maxcut
//! solvers = alg1, alg2, gd, nagd
//! seed = 42
//! max_iter = 2000
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::HarnessError;
use crate::linesearch::LinesearchConfig;
use crate::problems::{Family, ProblemSpec};
use crate::randgen::{RngState, NOISE_SD};
use crate::solvers::{AccelStart, SolverKind, SolverOptions};

pub const DESK_DIM: usize = 100;
pub const DESK_MAXCUT_DIM: usize = 50;
pub const PAPER_DIM: usize = 200;
pub const PAPER_MAXCUT_DIM: usize = 100;

/// Output flavour of per-run traces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

/// Problem families, sizes, hyperparameter sweeps, solvers and run options.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub families: Vec<Family>,
    /// `None` means the desk-scale or `paper_scale` default.
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub maxcut_dim: Option<usize>,
    pub paper_scale: bool,
    /// Master seed.
    pub seed: u64,
    /// Instances per family; replicate `r` uses the seed of job stream `r`.
    pub replicates: usize,
    /// Explicit problem seeds; override `replicates`.
    pub seeds: Vec<u64>,
    pub gamma: Option<f64>,
    pub eta: Vec<f64>,
    pub epsilon: f64,
    pub cubic_m: Vec<f64>,
    pub radius: f64,
    pub noise_sd: f64,
    pub binarize_labels: bool,
    pub solvers: Vec<SolverKind>,
    pub max_iter: usize,
    pub composite_max_iter: usize,
    pub tol: f64,
    pub ls: LinesearchConfig,
    pub c1: f64,
    pub accel_start: AccelStart,
    pub reference_budget: usize,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            families: vec![Family::Logreg, Family::Quad, Family::Lse, Family::Maxcut],
            dim: None,
            samples: None,
            maxcut_dim: None,
            paper_scale: false,
            seed: 0,
            replicates: 1,
            seeds: Vec::new(),
            gamma: None,
            eta: vec![0.01],
            epsilon: 1e-5,
            cubic_m: vec![5.0],
            radius: 1.0,
            noise_sd: NOISE_SD,
            binarize_labels: false,
            solvers: SolverKind::ALL.to_vec(),
            max_iter: 2000,
            composite_max_iter: 5000,
            tol: 1e-10,
            ls: LinesearchConfig::default(),
            c1: 1e-4,
            accel_start: AccelStart::Previous,
            reference_budget: 10_000,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, HarnessError>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| HarnessError::usage(format!("{key}: {e}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, HarnessError> {
    v.trim().parse::<T>().map_err(|_| HarnessError::usage(format!("{key}: cannot parse {v:?}")))
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = SuiteConfig::default();
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::usage(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if seen.insert(key.to_string(), n).is_some() {
                return Err(HarnessError::usage(format!("line {}: duplicate key {key}", n + 1)));
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets one key; the same names are used by the config file.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), HarnessError> {
        match key {
            "families" => {
                self.families = v
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<Family>().map_err(|_| HarnessError::usage(format!("families: unknown family {t:?}"))))
                    .collect::<Result<_, _>>()?
            }
            "dim" => self.dim = Some(parse_one(key, v)?),
            "samples" => self.samples = Some(parse_one(key, v)?),
            "maxcut_dim" => self.maxcut_dim = Some(parse_one(key, v)?),
            "paper_scale" => self.paper_scale = parse_one(key, v)?,
            "seed" => self.seed = parse_one(key, v)?,
            "replicates" => self.replicates = parse_one(key, v)?,
            "seeds" => self.seeds = parse_list(key, v)?,
            "gamma" => self.gamma = Some(parse_one(key, v)?),
            "eta" => self.eta = parse_list(key, v)?,
            "epsilon" => self.epsilon = parse_one(key, v)?,
            "cubic_m" => self.cubic_m = parse_list(key, v)?,
            "radius" => self.radius = parse_one(key, v)?,
            "noise_sd" => self.noise_sd = parse_one(key, v)?,
            "binarize_labels" => self.binarize_labels = parse_one(key, v)?,
            "solvers" => self.solvers = parse_list(key, v)?,
            "max_iter" => self.max_iter = parse_one(key, v)?,
            "composite_max_iter" => self.composite_max_iter = parse_one(key, v)?,
            "tol" => self.tol = parse_one(key, v)?,
            "ls_factor" => self.ls.factor = parse_one(key, v)?,
            "lambda_init" => self.ls.lambda_init = parse_one(key, v)?,
            "max_backtracks" => self.ls.max_backtracks = parse_one(key, v)?,
            "c1" => self.c1 = parse_one(key, v)?,
            "accel_start" => {
                self.accel_start = match v {
                    "previous" => AccelStart::Previous,
                    "warm_clamped" => AccelStart::WarmClamped,
                    _ => return Err(HarnessError::usage(format!("accel_start: unknown value {v:?}"))),
                }
            }
            "reference_budget" => self.reference_budget = parse_one(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "format" => self.format = v.parse().map_err(HarnessError::usage)?,
            _ => return Err(HarnessError::usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.families.is_empty() {
            return Err(HarnessError::usage("families: empty list"));
        }
        if self.solvers.is_empty() {
            return Err(HarnessError::usage("solvers: empty list"));
        }
        if self.replicates == 0 && self.seeds.is_empty() {
            return Err(HarnessError::usage("replicates must be at least 1"));
        }
        if self.eta.is_empty() || self.cubic_m.is_empty() {
            return Err(HarnessError::usage("eta and cubic_m need at least one value"));
        }
        self.solver_options(false).validate().map_err(|e| HarnessError::usage(e.to_string()))?;
        Ok(())
    }

    fn default_dim(&self) -> usize {
        if self.paper_scale {
            PAPER_DIM
        } else {
            DESK_DIM
        }
    }

    pub fn resolved_dim(&self, family: Family) -> usize {
        if family == Family::Maxcut {
            self.maxcut_dim.unwrap_or(if self.paper_scale { PAPER_MAXCUT_DIM } else { DESK_MAXCUT_DIM })
        } else {
            self.dim.unwrap_or_else(|| self.default_dim())
        }
    }

    /// Problem seeds: explicit ones, else one per replicate from the master seed.
    pub fn problem_seeds(&self) -> Vec<u64> {
        if !self.seeds.is_empty() {
            return self.seeds.clone();
        }
        (0..self.replicates as u64).map(|r| RngState::for_job(self.seed, r).next_u64()).collect()
    }

    /// Every problem recipe, in a fixed order.
    pub fn problem_specs(&self) -> Vec<ProblemSpec> {
        let mut out = Vec::new();
        for &family in &self.families {
            for seed in self.problem_seeds() {
                let dim = self.resolved_dim(family);
                let mut base = ProblemSpec::new(family, dim, seed);
                base.samples = if family == Family::Maxcut { dim } else { self.samples.unwrap_or(dim) };
                base.gamma = self.gamma;
                base.epsilon = self.epsilon;
                base.radius = self.radius;
                base.noise_sd = self.noise_sd;
                base.binarize_labels = self.binarize_labels;
                match family {
                    Family::Maxcut => out.extend(self.eta.iter().map(|&eta| ProblemSpec { eta, ..base.clone() })),
                    Family::Cubic => {
                        out.extend(self.cubic_m.iter().map(|&cubic_m| ProblemSpec { cubic_m, ..base.clone() }))
                    }
                    _ => out.push(base),
                }
            }
        }
        out
    }

    pub fn solver_options(&self, composite: bool) -> SolverOptions {
        SolverOptions {
            max_iter: if composite { self.composite_max_iter } else { self.max_iter },
            tol: self.tol,
            ls: self.ls,
            c1: self.c1,
            accel_start: self.accel_start,
            ..Default::default()
        }
    }
}
