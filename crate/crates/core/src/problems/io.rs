//! Plain-text problem files.
//!
//! ```text
//! zols-problem v1
//! kind quadratic
//! spec.family quad
//! spec.dim 3
//! ...
//! l_estimate 1.0
//! prox zero
//! matrix hessian 3 3
//! <one row per line>
//! vector linear 3
//! <all entries on one line>
//! vector x0 3
//! ...
//! end
//! ```
//!
//! Header lines are `key value` pairs. Numbers are written in shortest
//! round-trip form, so reading a file back reproduces the data bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{CompositeProblem, Family, ProblemSpec, SmoothKind};
use crate::error::ProblemError;
use crate::numkit::{DenseMatrix, DenseVector};
use crate::prox::ProxTerm;

pub const MAGIC: &str = "zols-problem v1";
pub const FILE_EXTENSION: &str = "zprob";

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} {value}");
}

fn push_vector(out: &mut String, name: &str, v: &DenseVector) {
    let _ = writeln!(out, "vector {name} {}", v.len());
    let line: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    let _ = writeln!(out, "{}", line.join(" "));
}

fn push_matrix(out: &mut String, name: &str, m: &DenseMatrix) {
    let _ = writeln!(out, "matrix {name} {} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

/// Serializes a problem, including its recipe when it has one.
pub fn problem_to_string(p: &CompositeProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    push_kv(&mut out, "kind", p.kind().name());
    if let Some(s) = p.spec() {
        push_kv(&mut out, "spec.family", s.family);
        push_kv(&mut out, "spec.dim", s.dim);
        push_kv(&mut out, "spec.samples", s.samples);
        push_kv(&mut out, "spec.seed", s.seed);
        if let Some(g) = s.gamma {
            push_kv(&mut out, "spec.gamma", fmt_f64(g));
        }
        push_kv(&mut out, "spec.eta", fmt_f64(s.eta));
        push_kv(&mut out, "spec.epsilon", fmt_f64(s.epsilon));
        push_kv(&mut out, "spec.cubic_m", fmt_f64(s.cubic_m));
        push_kv(&mut out, "spec.radius", fmt_f64(s.radius));
        push_kv(&mut out, "spec.noise_sd", fmt_f64(s.noise_sd));
        push_kv(&mut out, "spec.binarize_labels", s.binarize_labels);
        push_kv(&mut out, "spec.uniform_scale", fmt_f64(s.uniform_scale));
    }
    push_kv(&mut out, "l_estimate", fmt_f64(p.l_estimate()));
    if let Some(l) = p.l_paper() {
        push_kv(&mut out, "l_paper", fmt_f64(l));
    }
    if let Some(f) = p.f_star() {
        push_kv(&mut out, "f_star", fmt_f64(f));
    }
    match *p.prox_term() {
        ProxTerm::Zero => push_kv(&mut out, "prox", "zero"),
        ProxTerm::L1 { gamma } => push_kv(&mut out, "prox", format!("l1 {}", fmt_f64(gamma))),
        ProxTerm::L1Ball { radius } => push_kv(&mut out, "prox", format!("l1_ball {}", fmt_f64(radius))),
    }
    match p.kind() {
        SmoothKind::Logistic { a, b, gamma } | SmoothKind::LogSumExp { a, b, gamma } => {
            push_kv(&mut out, "data.gamma", fmt_f64(*gamma));
            push_matrix(&mut out, "a", a);
            push_vector(&mut out, "b", b);
        }
        SmoothKind::Quadratic { hessian, linear } => {
            push_matrix(&mut out, "hessian", hessian);
            push_vector(&mut out, "linear", linear);
        }
        SmoothKind::MaxCut { c, epsilon, eta } => {
            push_kv(&mut out, "data.epsilon", fmt_f64(*epsilon));
            push_kv(&mut out, "data.eta", fmt_f64(*eta));
            push_matrix(&mut out, "c", c);
        }
        SmoothKind::LeastSquares { a, b } => {
            push_matrix(&mut out, "a", a);
            push_vector(&mut out, "b", b);
        }
        SmoothKind::Cubic { h, g, m } => {
            push_kv(&mut out, "data.m", fmt_f64(*m));
            push_matrix(&mut out, "h", h);
            push_vector(&mut out, "g", g);
        }
    }
    push_vector(&mut out, "x0", p.x0());
    out.push_str("end\n");
    out
}

fn format_err(msg: impl Into<String>) -> ProblemError {
    ProblemError::Format(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, ProblemError> {
    s.parse::<f64>().map_err(|_| format_err(format!("bad number {s:?} in {what}")))
}

struct Parsed {
    header: BTreeMap<String, String>,
    matrices: BTreeMap<String, DenseMatrix>,
    vectors: BTreeMap<String, DenseVector>,
}

impl Parsed {
    fn scalar(&self, key: &str) -> Result<f64, ProblemError> {
        let v = self.header.get(key).ok_or_else(|| format_err(format!("missing key {key}")))?;
        parse_f64(v, key)
    }

    fn opt_scalar(&self, key: &str) -> Result<Option<f64>, ProblemError> {
        self.header.get(key).map(|v| parse_f64(v, key)).transpose()
    }

    fn matrix(&mut self, name: &str) -> Result<DenseMatrix, ProblemError> {
        self.matrices.remove(name).ok_or_else(|| format_err(format!("missing matrix {name}")))
    }

    fn vector(&mut self, name: &str) -> Result<DenseVector, ProblemError> {
        self.vectors.remove(name).ok_or_else(|| format_err(format!("missing vector {name}")))
    }

    fn parse_key<T: std::str::FromStr>(&self, key: &str) -> Result<T, ProblemError> {
        let v = self.header.get(key).ok_or_else(|| format_err(format!("missing key {key}")))?;
        v.parse().map_err(|_| format_err(format!("bad value {v:?} for {key}")))
    }
}

fn parse_numbers(line: Option<&str>, n: usize, what: &str) -> Result<Vec<f64>, ProblemError> {
    let line = line.ok_or_else(|| format_err(format!("truncated block {what}")))?;
    let vals = line.split_whitespace().map(|t| parse_f64(t, what)).collect::<Result<Vec<_>, _>>()?;
    if vals.len() != n {
        return Err(format_err(format!("{what}: expected {n} values, found {}", vals.len())));
    }
    Ok(vals)
}

fn parse_blocks(text: &str) -> Result<Parsed, ProblemError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(format_err(format!("missing `{MAGIC}` header")));
    }
    let mut parsed = Parsed { header: BTreeMap::new(), matrices: BTreeMap::new(), vectors: BTreeMap::new() };
    let mut ended = false;
    while let Some(line) = lines.next() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap_or_default();
        match head {
            "end" => {
                ended = true;
                break;
            }
            "matrix" => {
                let (name, r, c) = match (toks.next(), toks.next(), toks.next()) {
                    (Some(n), Some(r), Some(c)) => (n.to_string(), r, c),
                    _ => return Err(format_err(format!("bad matrix line {line:?}"))),
                };
                let rows: usize = r.parse().map_err(|_| format_err(format!("bad row count {r:?}")))?;
                let cols: usize = c.parse().map_err(|_| format_err(format!("bad column count {c:?}")))?;
                let mut data = Vec::with_capacity(rows * cols);
                for _ in 0..rows {
                    data.extend(parse_numbers(lines.next(), cols, &name)?);
                }
                let m = DenseMatrix::from_row_major(rows, cols, data)?;
                parsed.matrices.insert(name, m);
            }
            "vector" => {
                let (name, n) = match (toks.next(), toks.next()) {
                    (Some(name), Some(n)) => (name.to_string(), n),
                    _ => return Err(format_err(format!("bad vector line {line:?}"))),
                };
                let n: usize = n.parse().map_err(|_| format_err(format!("bad length {n:?}")))?;
                let vals = if n == 0 { Vec::new() } else { parse_numbers(lines.next(), n, &name)? };
                parsed.vectors.insert(name, vals.into());
            }
            key => {
                let value = toks.collect::<Vec<_>>().join(" ");
                if parsed.header.insert(key.to_string(), value).is_some() {
                    return Err(format_err(format!("duplicate key {key}")));
                }
            }
        }
    }
    if !ended {
        return Err(format_err("missing `end` line"));
    }
    Ok(parsed)
}

/// Inverse of [`problem_to_string`].
pub fn problem_from_str(text: &str) -> Result<CompositeProblem, ProblemError> {
    let mut p = parse_blocks(text)?;
    let kind_name: String = p.parse_key("kind")?;
    let kind = match kind_name.as_str() {
        "logistic" => SmoothKind::Logistic { a: p.matrix("a")?, b: p.vector("b")?, gamma: p.scalar("data.gamma")? },
        "log_sum_exp" => {
            SmoothKind::LogSumExp { a: p.matrix("a")?, b: p.vector("b")?, gamma: p.scalar("data.gamma")? }
        }
        "quadratic" => SmoothKind::Quadratic { hessian: p.matrix("hessian")?, linear: p.vector("linear")? },
        "maxcut" => {
            SmoothKind::MaxCut { c: p.matrix("c")?, epsilon: p.scalar("data.epsilon")?, eta: p.scalar("data.eta")? }
        }
        "least_squares" => SmoothKind::LeastSquares { a: p.matrix("a")?, b: p.vector("b")? },
        "cubic" => SmoothKind::Cubic { h: p.matrix("h")?, g: p.vector("g")?, m: p.scalar("data.m")? },
        other => return Err(format_err(format!("unknown kind {other:?}"))),
    };
    let prox_line: String = p.parse_key("prox")?;
    let mut prox_toks = prox_line.split_whitespace();
    let prox = match (prox_toks.next(), prox_toks.next()) {
        (Some("zero"), None) => ProxTerm::Zero,
        (Some("l1"), Some(g)) => ProxTerm::l1(parse_f64(g, "prox")?).ok_or_else(|| format_err("bad l1 weight"))?,
        (Some("l1_ball"), Some(r)) => {
            ProxTerm::l1_ball(parse_f64(r, "prox")?).ok_or_else(|| format_err("bad l1 ball radius"))?
        }
        _ => return Err(format_err(format!("bad prox line {prox_line:?}"))),
    };
    let spec = if p.header.contains_key("spec.family") {
        let family: Family = p.parse_key("spec.family")?;
        Some(ProblemSpec {
            family,
            dim: p.parse_key("spec.dim")?,
            samples: p.parse_key("spec.samples")?,
            seed: p.parse_key("spec.seed")?,
            gamma: p.opt_scalar("spec.gamma")?,
            eta: p.scalar("spec.eta")?,
            epsilon: p.scalar("spec.epsilon")?,
            cubic_m: p.scalar("spec.cubic_m")?,
            radius: p.scalar("spec.radius")?,
            noise_sd: p.scalar("spec.noise_sd")?,
            binarize_labels: p.parse_key("spec.binarize_labels")?,
            uniform_scale: p.scalar("spec.uniform_scale")?,
        })
    } else {
        None
    };
    let x0 = p.vector("x0")?;
    if x0.len() != kind.dim() {
        return Err(format_err(format!("x0 has length {}, data has dimension {}", x0.len(), kind.dim())));
    }
    let l_estimate = p.scalar("l_estimate")?;
    if !(l_estimate > 0.0) {
        return Err(format_err("l_estimate must be positive"));
    }
    let l_paper = p.opt_scalar("l_paper")?;
    let f_star = p.opt_scalar("f_star")?;
    Ok(CompositeProblem::from_parts(spec, kind, prox, x0, l_estimate, l_paper).with_f_star(f_star))
}

pub fn write_problem(path: &Path, p: &CompositeProblem) -> Result<(), ProblemError> {
    std::fs::write(path, problem_to_string(p))?;
    Ok(())
}

pub fn read_problem(path: &Path) -> Result<CompositeProblem, ProblemError> {
    let text = std::fs::read_to_string(path)?;
    problem_from_str(&text)
}
