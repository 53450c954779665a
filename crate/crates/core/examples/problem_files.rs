//! Problem files: write, reference, read back, describe.

use zols::harness::{describe_problem, reference_problem, write_reference};
use zols::problems::io::{read_problem, write_problem};
use zols::{build_problem, Family, ProblemSpec};

fn main() {
    let dir = std::env::temp_dir().join("zols-files-example");
    std::fs::create_dir_all(&dir).unwrap();
    let spec = ProblemSpec::new(Family::Cubic, 20, 4);
    let path = dir.join(format!("{}.zprob", spec.stem()));

    write_problem(&path, &build_problem(&spec).unwrap()).unwrap();
    let loaded = read_problem(&path).unwrap();
    let rec = reference_problem(&loaded, 5000).unwrap();
    write_reference(&path, &loaded, &rec).unwrap();

    let stored = read_problem(&path).unwrap();
    println!("{}", path.display());
    print!("{}", describe_problem(&stored));
    println!("reference by {} after {} iterations, warning: {}", rec.solver, rec.iterations, rec.warning);
}
