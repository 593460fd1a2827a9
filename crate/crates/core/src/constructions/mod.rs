//! Explicit approximation-theoretic building blocks: exact ReQU product
//! networks, B-spline cutoffs, Matérn kernels with their series
//! decomposition and truncated approximants, degree-2 ridge decompositions,
//! the exact multichannel inner-product CNN, and Matérn interpolation on the
//! sphere with empirical rate studies.

mod cutoff;
mod interpolation;
mod matern;
mod multichannel;
mod requ;
mod ridge;

pub use cutoff::{bspline_cutoff, integrated_bspline, CutoffSpec};
pub use interpolation::{
    fibonacci_sphere, gram_matrix, interpolation_rate_study, kernel_interpolate, uniform_sphere,
    KernelInterpolant, RateStudy, SpherePoint,
};
pub use matern::{bessel_k, gamma, MaternKernel, TruncatedApproximant, MAX_SERIES_DEGREE, NEAR_INTEGER_TOL};
pub use multichannel::{
    depth_for, multichannel_inner_product_net, nonzero_count_per_feature, ConvWeights, InnerProductNet,
};
pub use requ::{product_error_scale, requ, requ_product, requ_product_network, DenseLayer, LayerActivation, ProductNetwork};
pub use ridge::{ridge_decompose_quadratic, ridge_decompose_sqdist, AmbientVec, FeatureBank, RidgeDecomposition};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// Outcome of one self-check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, err: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: err <= tol,
        detail: format!("max error {err:.3e} (tolerance {tol:.0e})"),
    }
}

/// Runs the exactness checks of every construction on seeded random inputs.
/// The rate study is excluded; see [`interpolation_rate_study`].
pub fn verify_all(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut err = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=6);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let want: f64 = xs.iter().product();
        err = err.max((requ_product(&xs)? - want).abs() / product_error_scale(&xs));
    }
    out.push(check("requ product", err, 1e-12));

    out.push(check(
        "B-spline cutoff midpoint",
        (bspline_cutoff(CutoffSpec { p: 2 }, 1.5) - 0.5).abs(),
        1e-14,
    ));

    let k = MaternKernel::new(2.0, 3)?;
    let mut err = 0.0f64;
    for i in 0..=290 {
        let r = 0.1 + 0.01 * i as f64;
        let want = (std::f64::consts::PI / 2.0).sqrt() * (-r).exp();
        err = err.max((k.reconstruct(r, 30)? - want).abs() / want);
    }
    out.push(check("Matérn decomposition", err, 1e-10));

    let mut err = 0.0f64;
    for _ in 0..1000 {
        let x: AmbientVec = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let y: AmbientVec = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let want: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        err = err.max((ridge_decompose_sqdist(&y).eval(&x) - want).abs());
    }
    out.push(check("ridge decomposition", err, 1e-12));

    let (d, s) = (9, 3);
    let feats: Vec<Vec<f64>> = (0..6)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.into_iter().map(|a| a / n).collect()
        })
        .collect();
    let net = multichannel_inner_product_net(&feats, d, s, 1.0)?;
    let mut err = 0.0f64;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for (o, xi) in net.eval(&x)?.iter().zip(&feats) {
            let want: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
            err = err.max((o - want).abs());
        }
    }
    out.push(check("multichannel inner products", err, 1e-12));

    let nodes = fibonacci_sphere(300);
    let f: Vec<f64> = nodes.iter().map(|p| p[0] * p[1] + p[2]).collect();
    let interp = kernel_interpolate(&nodes, &f, &MaternKernel::new(2.5, 3)?)?;
    let err = nodes
        .iter()
        .zip(&f)
        .map(|(p, v)| (interp.eval(p) - v).abs())
        .fold(0.0, f64::max);
    out.push(check("kernel interpolation", err, 1e-8));
    Ok(out)
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::verify_all(7).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
