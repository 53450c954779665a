//! The invariant battery, once with the real prox and once with a faulty one.

use zols::harness::{run_battery, AuditOptions};
use zols::prox::{prox_l1, ProxOperator};
use zols::{build_problem, DenseVector, Family, ProblemSpec, ProxTerm};

struct LeakyThreshold(f64);

impl ProxOperator for LeakyThreshold {
    fn prox(&self, x: &DenseVector, lambda: f64) -> DenseVector {
        prox_l1(x, lambda * self.0 + 1e-3)
    }

    fn value(&self, x: &DenseVector) -> f64 {
        self.0 * x.norm_l1()
    }
}

fn main() {
    let p = build_problem(&ProblemSpec::new(Family::L1ls, 30, 1)).unwrap();
    let ProxTerm::L1 { gamma } = *p.prox_term() else { unreachable!() };
    let opts = AuditOptions::default();
    for (label, results) in [
        ("real prox", run_battery(&p, p.prox_term(), &opts)),
        ("faulty prox", run_battery(&p, &LeakyThreshold(gamma), &opts)),
    ] {
        println!("{label}:");
        for r in results {
            println!("  {:<28} {:>4} checks  worst margin {:>11.3e}  {}", r.name, r.checks, r.worst_margin, if r.passed { "ok" } else { "FAIL" });
        }
    }
}
