//! Matérn interpolation on the unit sphere over Fibonacci node families and
//! the fitted log-log convergence rate of the L² error.
//!
//! Usage: `interpolation_rates [tau] [out.csv]`

use std::path::Path;
use std::time::Instant;

use picnn::constructions::{interpolation_rate_study, uniform_sphere, MaternKernel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> picnn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let tau: f64 = args.get(1).map_or(Ok(2.5), |s| s.parse()).expect("tau must be a number");
    let kernel = MaternKernel::new(tau, 3)?;
    let mc = uniform_sphere(2000, &mut ChaCha8Rng::seed_from_u64(1));
    let f = |x: &[f64; 3]| x[0].exp() * (2.0 * x[1]).sin() + x[2] * x[2];

    let start = Instant::now();
    let study = interpolation_rate_study(&kernel, f, &[100, 200, 400, 800], &mc)?;
    for (n, e) in study.ns.iter().zip(&study.errors) {
        println!("N = {n:4}  L2 error {e:.4e}");
    }
    println!(
        "tau = {tau}: fitted slope {:.3} (theory {:.3}), {:.1} s",
        study.slope,
        -(tau - 0.5) / 2.0,
        start.elapsed().as_secs_f64()
    );
    if let Some(path) = args.get(2) {
        study.write_csv(Path::new(path))?;
    }
    Ok(())
}
