use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zols::harness::{
    cmd_check, cmd_describe, cmd_generate, cmd_reference, cmd_run, cmd_suite, AuditOptions, HarnessError, OutputFormat,
    SuiteConfig, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE,
};
use zols::problems::Family;
use zols::{SolverKind, SolverOptions};

#[derive(Parser)]
#[command(name = "zols", version, about = "Zero-order linesearch solvers and benchmark harness")]
struct Cli {
    /// Master seed (suite/generate) or audit seed (check).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// d = N = 200 and max-cut n = 100 instead of 100 and 50.
    #[arg(long, global = true)]
    paper_scale: bool,
    #[command(flatten)]
    ls: LsFlags,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct LsFlags {
    /// Backtracking factor C.
    #[arg(long, global = true)]
    ls_factor: Option<f64>,
    #[arg(long, global = true)]
    lambda_init: Option<f64>,
    #[arg(long, global = true)]
    max_backtracks: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write problem files.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's families.
        #[arg(long, value_delimiter = ',')]
        family: Vec<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Problem seed; without it the master seed picks one.
        #[arg(long)]
        problem_seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        cubic_m: Vec<f64>,
    },
    /// Compute a reference optimum and store it in the problem file.
    Reference {
        problem: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Run one solver on one problem.
    Run {
        problem: PathBuf,
        #[arg(long)]
        solver: String,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        l_override: Option<f64>,
        #[arg(long)]
        f_star: Option<f64>,
    },
    /// Problems x solvers from a config file.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Invariant audit of problem files.
    Check {
        problems: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        run_iters: usize,
    },
    /// Print a problem summary.
    Describe { problem: PathBuf },
}

impl Cli {
    fn format(&self) -> OutputFormat {
        match self.format.as_deref() {
            Some("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn config(&self, path: Option<&PathBuf>) -> Result<SuiteConfig, HarnessError> {
        let mut cfg = match path {
            Some(p) => SuiteConfig::from_file(p)?,
            None => SuiteConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if self.format.is_some() {
            cfg.format = self.format();
        }
        cfg.paper_scale |= self.paper_scale;
        self.apply_ls(&mut cfg.ls);
        Ok(cfg)
    }

    fn apply_ls(&self, ls: &mut zols::LinesearchConfig) {
        if let Some(c) = self.ls.ls_factor {
            ls.factor = c;
        }
        if let Some(l) = self.ls.lambda_init {
            ls.lambda_init = l;
        }
        if let Some(m) = self.ls.max_backtracks {
            ls.max_backtracks = m;
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, HarnessError> {
    match &cli.cmd {
        Command::Generate { config, family, dim, samples, problem_seed, eta, epsilon, cubic_m } => {
            let mut cfg = cli.config(config.as_ref())?;
            if !family.is_empty() {
                cfg.families = family
                    .iter()
                    .map(|f| f.parse::<Family>().map_err(|_| HarnessError::usage(format!("family: unknown family {f:?}"))))
                    .collect::<Result<_, _>>()?;
            }
            if dim.is_some() {
                cfg.dim = *dim;
                cfg.maxcut_dim = *dim;
            }
            if samples.is_some() {
                cfg.samples = *samples;
            }
            if let Some(s) = problem_seed {
                cfg.seeds = vec![*s];
            }
            if !eta.is_empty() {
                cfg.eta = eta.clone();
            }
            if let Some(e) = epsilon {
                cfg.epsilon = *e;
            }
            if !cubic_m.is_empty() {
                cfg.cubic_m = cubic_m.clone();
            }
            for p in cmd_generate(&cfg)? {
                println!("{}", p.display());
            }
            Ok(EXIT_OK)
        }
        Command::Reference { problem, budget } => {
            let rec = cmd_reference(problem, *budget)?;
            println!("{}", serde_json::to_string_pretty(&rec).expect("record serializes"));
            if rec.warning {
                eprintln!("warning: reference not converged within the budget");
            }
            Ok(EXIT_OK)
        }
        Command::Run { problem, solver, max_iter, tol, c1, l_override, f_star } => {
            let kind: SolverKind = solver.parse().map_err(HarnessError::usage)?;
            let mut opts =
                SolverOptions { max_iter: *max_iter, tol: *tol, l_override: *l_override, f_star_hint: *f_star, ..Default::default() };
            if let Some(c) = c1 {
                opts.c1 = *c;
            }
            cli.apply_ls(&mut opts.ls);
            let out = cmd_run(problem, kind, &opts, &cli.out_dir(), cli.format())?;
            println!("{}", out.trace_path.display());
            eprintln!("{} after {} iterations", out.trace.termination.name(), out.trace.iterations());
            Ok(EXIT_OK)
        }
        Command::Suite { config } => {
            let cfg = cli.config(config.as_ref())?;
            let report = cmd_suite(&cfg)?;
            println!("{}", report.summary_path.display());
            if report.failures() > 0 {
                eprintln!("{} runs failed; see the error column", report.failures());
            }
            Ok(EXIT_OK)
        }
        Command::Check { problems, samples, run_iters } => {
            let opts = AuditOptions { samples: *samples, run_iters: *run_iters, seed: cli.seed.unwrap_or(0) };
            let report = cmd_check(problems, &opts)?;
            print!("{}", report.to_text());
            Ok(if report.passed() { EXIT_OK } else { EXIT_INVARIANT })
        }
        Command::Describe { problem } => {
            print!("{}", cmd_describe(problem)?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
