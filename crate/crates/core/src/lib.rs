//! Proximal-gradient solvers with a zero-order linesearch, baseline
//! first-order methods, benchmark problem generators and a CLI harness.
//!
//! ```
//! use zols::{build_problem, solve, Family, ProblemSpec, SolverKind, SolverOptions};
//!
//! let problem = build_problem(&ProblemSpec::new(Family::Quad, 10, 1)).unwrap();
//! let trace = solve(SolverKind::Alg1, &problem, problem.x0(), &SolverOptions::default()).unwrap();
//! assert!(trace.records.last().unwrap().f_value < trace.records[0].f_value);
//! ```

pub mod error;
pub mod harness;
pub mod linesearch;
pub mod numkit;
pub mod problems;
pub mod prox;
pub mod randgen;
pub mod solvers;
pub mod trace;

pub use error::{NumError, ProblemError};
pub use linesearch::{backtrack, warm_start_lambda, zo_condition, LinesearchConfig, LinesearchOutcome};
pub use numkit::{DenseMatrix, DenseVector};
pub use problems::{build_problem, CompositeProblem, Family, ProblemSpec, SmoothKind};
pub use prox::{gradient_mapping, ProxOperator, ProxTerm};
pub use randgen::RngState;
pub use solvers::{solve, SolveError, SolverKind, SolverOptions};
pub use trace::{IterRecord, Termination, Trace};
