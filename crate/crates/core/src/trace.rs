//! Per-iteration run logs and their CSV/JSON forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::numkit::DenseVector;

pub const CSV_HEADER: &str = "iter,f_value,gap,stepsize,grad_evals,f_evals,prox_evals,elapsed";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    /// `F` at the primary iterate (`y` for accelerated methods).
    pub f_value: f64,
    /// `f_value − f_star`; `None` when no reference optimum is known.
    pub gap: Option<f64>,
    /// Stepsize that produced this iterate; 0 on the initial row.
    pub stepsize: f64,
    pub grad_evals: u64,
    pub f_evals: u64,
    pub prox_evals: u64,
    pub elapsed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    /// No stepsize accepted at iteration `iter` (counted from 0).
    LinesearchFail { iter: usize },
    /// The iterate or its objective became non-finite at iteration `iter`.
    Diverged { iter: usize },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::LinesearchFail { .. } => "linesearch_fail",
            Termination::Diverged { .. } => "diverged",
        }
    }
}

/// Iterates behind one record, kept only when asked for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterSnapshot {
    /// The recorded point (`y_{k+1}` for accelerated methods).
    pub primary: DenseVector,
    /// Extrapolated point `x_{k+1}` of accelerated methods.
    pub aux: Option<DenseVector>,
    /// `β_k` and `β_{k+1}` of accelerated methods.
    pub beta: Option<(f64, f64)>,
    /// `‖G‖²` of the step that produced this point.
    pub step_g_norm_sq: f64,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub solver: String,
    pub problem: String,
    pub seed: Option<u64>,
    pub options: serde_json::Value,
    /// Smoothness constant behind constant-step rules.
    pub l_used: f64,
    pub l_estimate: f64,
    pub l_paper: Option<f64>,
    pub f_star: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<IterRecord>,
    pub termination: Termination,
    /// Same length as `records` when iterates were recorded, else empty.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub snapshots: Vec<IterSnapshot>,
    /// Final primary iterate.
    pub x_final: DenseVector,
}

impl Trace {
    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("traces always hold the initial row")
    }

    pub fn iterations(&self) -> usize {
        self.last().iter
    }

    pub fn stepsizes(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().skip(1).map(|r| r.stepsize)
    }

    pub fn to_csv(&self) -> String {
        records_to_csv(&self.records)
    }

    /// CSV without the wall-clock column, for byte comparisons.
    pub fn to_csv_without_elapsed(&self) -> String {
        let csv = self.to_csv();
        csv.lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
            .fold(String::new(), |mut acc, l| {
                acc.push_str(l);
                acc.push('\n');
                acc
            })
    }

    /// The records as a JSON array.
    pub fn records_json(&self) -> String {
        serde_json::to_string_pretty(&self.records).expect("records serialize")
    }

    pub fn meta_json(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            #[serde(flatten)]
            meta: &'a TraceMeta,
            termination: &'a Termination,
            iterations: usize,
        }
        serde_json::to_string_pretty(&Meta { meta: &self.meta, termination: &self.termination, iterations: self.iterations() })
            .expect("metadata serializes")
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn records_to_csv(records: &[IterRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let gap = r.gap.map(fmt_num).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iter,
            fmt_num(r.f_value),
            gap,
            fmt_num(r.stepsize),
            r.grad_evals,
            r.f_evals,
            r.prox_evals,
            fmt_num(r.elapsed)
        );
    }
    out
}
