//! The generator's uniforms, normals and per-job streams.

use zols::RngState;

fn main() {
    let mut rng = RngState::new(42);
    let u: Vec<f64> = (0..3).map(|_| rng.next_uniform()).collect();
    println!("seed 42 uniforms: {u:?}");

    let mut rng = RngState::new(42);
    let z: Vec<f64> = (0..3).map(|_| rng.next_gaussian()).collect();
    println!("seed 42 normals:  {z:?}");

    for job in 0..3 {
        let mut s = RngState::for_job(42, job);
        println!("job {job}: {:#018x}", s.next_u64());
    }
}
