//! A small suite described in the key-value config format.

use zols::harness::{cmd_suite, SuiteConfig};

const CONFIG: &str = "
# two families, two seeds
families = logreg, l1ls
dim = 30
samples = 60
replicates = 2
solvers = alg1, alg2, fista, gd
max_iter = 300
reference_budget = 2000
";

fn main() {
    let mut cfg = SuiteConfig::parse(CONFIG).expect("valid config");
    cfg.out_dir = std::env::temp_dir().join("zols-suite-example");
    let report = cmd_suite(&cfg).expect("suite runs");
    print!("{}", report.summary_csv());
    println!("written to {}", report.summary_path.display());
}
