//! Matérn kernel interpolation on the unit sphere and empirical convergence
//! rates over Fibonacci node families.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::matern::MaternKernel;
use crate::error::{Error, Result};
use crate::harness::slope_fit;

pub type SpherePoint = [f64; 3];

fn dist(a: &SpherePoint, b: &SpherePoint) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `n` quasi-uniform points on the unit sphere (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<SpherePoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

pub fn gram_matrix(kernel: &MaternKernel, nodes: &[SpherePoint]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut g = DMatrix::zeros(n, n);
    let diag = kernel.value_at_zero();
    for i in 0..n {
        g[(i, i)] = diag;
        for j in 0..i {
            let v = kernel.eval(dist(&nodes[i], &nodes[j]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

#[derive(Clone, Debug)]
pub struct KernelInterpolant {
    pub kernel: MaternKernel,
    pub nodes: Vec<SpherePoint>,
    pub coeffs: Vec<f64>,
}

impl KernelInterpolant {
    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.nodes
            .iter()
            .zip(&self.coeffs)
            .map(|(p, c)| c * self.kernel.eval(dist(x, p)))
            .sum()
    }
}

/// Solves `K(X) c = f(X)` by Cholesky; a non-positive pivot is an error.
pub fn kernel_interpolate(nodes: &[SpherePoint], fvals: &[f64], kernel: &MaternKernel) -> Result<KernelInterpolant> {
    if nodes.len() != fvals.len() {
        return Err(Error::Shape(format!("{} nodes but {} values", nodes.len(), fvals.len())));
    }
    if nodes.is_empty() {
        return Err(Error::Precondition("no interpolation nodes".into()));
    }
    let chol = gram_matrix(kernel, nodes)
        .cholesky()
        .ok_or_else(|| Error::Factorization(format!("Gram matrix of {} nodes is not positive definite", nodes.len())))?;
    let c = chol.solve(&DVector::from_column_slice(fvals));
    Ok(KernelInterpolant {
        kernel: *kernel,
        nodes: nodes.to_vec(),
        coeffs: c.as_slice().to_vec(),
    })
}

/// Uniform points on the unit sphere (normalized Gaussians).
pub fn uniform_sphere<R: Rng>(n: usize, rng: &mut R) -> Vec<SpherePoint> {
    (0..n)
        .map(|_| {
            let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            [v[0] / r, v[1] / r, v[2] / r]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateStudy {
    pub ns: Vec<usize>,
    /// Root-mean-square error over the Monte-Carlo points, per `N`.
    pub errors: Vec<f64>,
    /// Least-squares slope of `log2 error` against `log2 N`.
    pub slope: f64,
}

impl RateStudy {
    /// Number of grid steps where the error fails to decrease.
    pub fn inversions(&self) -> usize {
        self.errors.windows(2).filter(|w| w[1] >= w[0]).count()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut body = String::from("N,error,fitted_slope\n");
        for (n, e) in self.ns.iter().zip(&self.errors) {
            body.push_str(&format!("{n},{e:e},{:e}\n", self.slope));
        }
        f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

pub fn interpolation_rate_study<F>(
    kernel: &MaternKernel,
    f: F,
    ns: &[usize],
    mc_points: &[SpherePoint],
) -> Result<RateStudy>
where
    F: Fn(&SpherePoint) -> f64 + Sync,
{
    let exact: Vec<f64> = mc_points.iter().map(&f).collect();
    let errors = ns
        .par_iter()
        .map(|&n| {
            let nodes = fibonacci_sphere(n);
            let fvals: Vec<f64> = nodes.iter().map(&f).collect();
            let interp = kernel_interpolate(&nodes, &fvals, kernel)?;
            let mse = mc_points
                .iter()
                .zip(&exact)
                .map(|(x, fx)| (interp.eval(x) - fx).powi(2))
                .sum::<f64>()
                / mc_points.len() as f64;
            Ok(mse.sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (_, alpha) = slope_fit(&errors, ns)?;
    Ok(RateStudy {
        ns: ns.to_vec(),
        errors,
        slope: -alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kernel() -> MaternKernel {
        MaternKernel::new(2.5, 3).unwrap()
    }

    fn smooth(x: &SpherePoint) -> f64 {
        x[0].exp() * (2.0 * x[1]).sin() + x[2] * x[2]
    }

    #[test]
    fn fibonacci_points_are_unit_and_distinct() {
        let pts = fibonacci_sphere(500);
        for p in &pts {
            assert!((p.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-14);
        }
        let sep = (0..pts.len())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| dist(&pts[i], &pts[j]))
            .fold(f64::INFINITY, f64::min);
        assert!(sep > 0.05, "{sep}");
    }

    #[test]
    fn single_node() {
        let k = kernel();
        let i = kernel_interpolate(&[[0.0, 0.0, 1.0]], &[3.0], &k).unwrap();
        let want = 3.0 / k.value_at_zero();
        assert!((i.coeffs[0] - want).abs() < 1e-14 * want);
    }

    #[test]
    fn interpolation_property_and_residual() {
        let k = kernel();
        let nodes = fibonacci_sphere(200);
        let f: Vec<f64> = nodes.iter().map(smooth).collect();
        let i = kernel_interpolate(&nodes, &f, &k).unwrap();
        let fmax = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let g = gram_matrix(&k, &nodes);
        let r = &g * DVector::from_column_slice(&i.coeffs) - DVector::from_column_slice(&f);
        assert!(r.amax() <= 1e-8 * fmax);
        for (x, fx) in nodes.iter().zip(&f) {
            assert!((i.eval(x) - fx).abs() <= 1e-8);
        }
    }

    #[test]
    fn kernel_translate_gives_unit_coefficients() {
        let k = kernel();
        let nodes = fibonacci_sphere(60);
        let f: Vec<f64> = nodes.iter().map(|x| k.eval(dist(x, &nodes[0]))).collect();
        let i = kernel_interpolate(&nodes, &f, &k).unwrap();
        for (j, c) in i.coeffs.iter().enumerate() {
            let want = if j == 0 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-8, "c[{j}] = {c}");
        }
    }

    #[test]
    fn gram_is_symmetric_and_positive_definite() {
        let k = kernel();
        for n in [10, 500, 2000] {
            let g = gram_matrix(&k, &fibonacci_sphere(n));
            assert_eq!(g, g.transpose());
            assert!(g.diagonal().iter().all(|d| *d == k.value_at_zero()));
            let l = g.cholesky().expect("positive definite").l();
            assert!(l.diagonal().iter().all(|d| *d > 0.0));
        }
    }

    #[test]
    fn duplicate_nodes_fail_to_factor() {
        let k = kernel();
        let p = [0.0, 0.0, 1.0];
        assert!(matches!(
            kernel_interpolate(&[p, p], &[1.0, 1.0], &k),
            Err(Error::Factorization(_))
        ));
    }

    #[test]
    fn constant_function_errors_decrease() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mc = uniform_sphere(400, &mut rng);
        let s = interpolation_rate_study(&kernel(), |_| 1.0, &[25, 50, 100, 200], &mc).unwrap();
        assert_eq!(s.inversions(), 0, "{:?}", s.errors);
    }
}
