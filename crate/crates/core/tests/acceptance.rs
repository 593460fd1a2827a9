//! Acceptance suite: one pass/fail line per criterion on stderr, then the
//! assertion. The two training criteria share one set of Sobolev runs.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use picnn::autodiff::grad_params;
use picnn::constructions::{
    bspline_cutoff, interpolation_rate_study, multichannel_inner_product_net, product_error_scale,
    requ_product, uniform_sphere, CutoffSpec, MaternKernel,
};
use picnn::geometry::{
    apply_elliptic_operator, chart_embed, exact_solution_jet, laplace_beltrami, sample_interior, source_term,
    ChartPoint, Manifold, ManifoldKind,
};
use picnn::harness::{slope_fit, sweep, ExperimentConfig, RunReport};
use picnn::network::{init, Architecture, ConvActivation, ConvSpec, MlpActivation, MlpSpec, Padding};
use picnn::spectral::{fft_real, sobolev_penalty};
use picnn::training::{total_loss_generic, BoundaryMode, TrainConfig, TrainingData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "acceptance [{tag}] {name}: {detail}");
}

#[test]
fn spectral_penalty_exactness() {
    let start = Instant::now();
    let m = 256;
    let mut worst_mode = 0.0f64;
    for k0 in [1.0f64, 2.0, 4.0] {
        let e: Vec<f64> = (0..m).map(|j| (k0 * TAU * j as f64 / m as f64).cos()).collect();
        let got = sobolev_penalty(&e, TAU, 1.0, m / 2).unwrap();
        let want = (1.0 + k0 * k0).powf(1.5) / 2.0;
        worst_mode = worst_mode.max((got - want).abs() / want);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let spec = fft_real(&e).unwrap();
    let mut worst_dft = 0.0f64;
    for k in 0..m {
        let direct: Complex64 = e
            .iter()
            .enumerate()
            .map(|(j, &v)| Complex64::from_polar(v, -TAU * (j * k % m) as f64 / m as f64))
            .sum::<Complex64>()
            / m as f64;
        worst_dft = worst_dft.max((spec.coeffs[k] - direct).norm());
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = worst_mode <= 1e-10 && worst_dft <= 1e-12 && secs < 1.0;
    report(
        "spectral penalty exactness",
        passed,
        &format!("pure-mode rel err {worst_mode:.2e}, FFT vs DFT {worst_dft:.2e}, {secs:.3} s"),
    );
    assert!(passed);
}

/// `-div((2+z) grad u) + u` for `u = xyz` by nested central differences
/// of the embedding, with the metric also taken from differences.
fn fd_operator(m: &Manifold, p: ChartPoint, laplace_only: bool) -> f64 {
    let h = 1e-4;
    let x = |t: f64, f: f64| m.embed_generic(t, f);
    let dx = |t: f64, f: f64, dir: usize| -> [f64; 3] {
        let (a, b) = if dir == 0 {
            (x(t + h, f), x(t - h, f))
        } else {
            (x(t, f + h), x(t, f - h))
        };
        [0, 1, 2].map(|i| (a[i] - b[i]) / (2.0 * h))
    };
    let norm2 = |v: [f64; 3]| v.iter().map(|a| a * a).sum::<f64>();
    let u = |t: f64, f: f64| {
        let q = x(t, f);
        q[0] * q[1] * q[2]
    };
    let coef = |t: f64, f: f64| if laplace_only { 1.0 } else { 2.0 + x(t, f)[2] };
    let sqrt_g = |t: f64, f: f64| (norm2(dx(t, f, 0)) * norm2(dx(t, f, 1))).sqrt();
    let flux = |t: f64, f: f64, dir: usize| {
        let du = if dir == 0 {
            (u(t + h, f) - u(t - h, f)) / (2.0 * h)
        } else {
            (u(t, f + h) - u(t, f - h)) / (2.0 * h)
        };
        sqrt_g(t, f) * coef(t, f) * du / norm2(dx(t, f, dir))
    };
    let (t, f) = (p.theta, p.phi);
    let div = (flux(t + h, f, 0) - flux(t - h, f, 0)) / (2.0 * h) + (flux(t, f + h, 1) - flux(t, f - h, 1)) / (2.0 * h);
    let reaction = if laplace_only { 0.0 } else { u(t, f) };
    -div / sqrt_g(t, f) + reaction
}

#[test]
fn geometry_operator_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_residual = 0.0f64;
    let mut worst_closed = 0.0f64;
    let mut worst_eigen = 0.0f64;
    let mut worst_fd = 0.0f64;
    for m in [Manifold::hemisphere(), Manifold::from_kind(ManifoldKind::HalfTorus)] {
        let pts = sample_interior(&m, 10_000, &mut rng).unwrap();
        for (i, (p, q)) in pts.iter().enumerate() {
            let u = exact_solution_jet(&m, *p);
            let lu = apply_elliptic_operator(&u, &m, *p).unwrap();
            worst_residual = worst_residual.max((lu - source_term(&m, *p).unwrap()).abs());
            if m.kind == ManifoldKind::Hemisphere {
                let (x, y, z) = (q.x, q.y, q.z);
                // a Lap u - grad a . grad u + u on the unit sphere
                let closed = (2.0 + z) * 12.0 * x * y * z - x * y * (1.0 - 3.0 * z * z) + x * y * z;
                worst_closed = worst_closed.max((lu - closed).abs());
                let lap = laplace_beltrami(&u, &m, *p).unwrap();
                let want = 12.0 * x * y * z;
                if want.abs() > 1e-3 {
                    worst_eigen = worst_eigen.max((lap - want).abs() / want.abs());
                }
            }
            if i % 50 == 0 {
                for laplace_only in [false, true] {
                    let got = if laplace_only {
                        laplace_beltrami(&u, &m, *p).unwrap()
                    } else {
                        lu
                    };
                    let fd = fd_operator(&m, *p, laplace_only);
                    worst_fd = worst_fd.max((got - fd).abs() / fd.abs().max(1.0));
                }
            }
        }
    }
    let q = chart_embed(&Manifold::hemisphere(), ChartPoint { theta: 0.7, phi: 1.1 }).unwrap();
    assert!(q.z > 0.0);
    let secs = start.elapsed().as_secs_f64();
    let passed = worst_residual <= 1e-11
        && worst_closed <= 1e-11
        && worst_eigen <= 1e-10
        && worst_fd <= 1e-5
        && secs < 10.0;
    report(
        "geometry/operator correctness",
        passed,
        &format!(
            "residual {worst_residual:.2e}, closed form {worst_closed:.2e}, Lap(xyz)=12xyz rel {worst_eigen:.2e}, \
             FD rel {worst_fd:.2e}, {secs:.2} s"
        ),
    );
    assert!(passed);
}

#[test]
fn autodiff_gradient_vs_finite_differences() {
    let start = Instant::now();
    let arch = Architecture {
        conv: ConvSpec {
            layers: 2,
            channels: 4,
            kernel_size: 3,
            padding: Padding::OneSidedZero,
            activation: ConvActivation::Gelu,
        },
        mlp: MlpSpec {
            widths: vec![4],
            activation: MlpActivation::Gelu2,
        },
    };
    let n_params = arch.param_count();
    let mut worst = 0.0f64;
    for (kind, mode) in [
        (ManifoldKind::Hemisphere, BoundaryMode::Sobolev),
        (ManifoldKind::HalfTorus, BoundaryMode::Sobolev),
    ] {
        let data = TrainingData::assemble(&Manifold::from_kind(kind), 8, 8, 8, 5).unwrap();
        let cfg = TrainConfig {
            bnd_mode: mode,
            ..TrainConfig::default()
        };
        let p = init(&arch, 4).flat;
        let (_, g) = grad_params(&p, |leaves| total_loss_generic(&arch, leaves, &data, &cfg)).unwrap();
        for i in 0..p.len() {
            let h = 1e-5 * p[i].abs().max(1.0);
            let f = |d: f64| {
                let mut q = p.clone();
                q[i] += d;
                total_loss_generic(&arch, &q, &data, &cfg).unwrap()
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            worst = worst.max((g[i] - fd).abs() / fd.abs().max(1e-3));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = n_params <= 200 && worst <= 1e-4 && secs < 30.0;
    report(
        "autodiff correctness",
        passed,
        &format!("{n_params} params, worst rel err {worst:.2e}, {secs:.2} s"),
    );
    assert!(passed);
}

fn desk_config(mode: BoundaryMode) -> ExperimentConfig {
    ExperimentConfig {
        manifold: ManifoldKind::Hemisphere,
        bnd_mode: mode,
        n_list: vec![512],
        m: 256,
        n_test: 5120,
        trials: 3,
        base_seed: 0,
        ..ExperimentConfig::default()
    }
}

fn sobolev_runs() -> &'static RunReport {
    static RUNS: OnceLock<RunReport> = OnceLock::new();
    RUNS.get_or_init(|| sweep(&desk_config(BoundaryMode::Sobolev)).unwrap())
}

#[test]
fn desk_scale_training_reproduction() {
    let r = sobolev_runs();
    let s = &r.per_n[0];
    assert_eq!(s.trials, 3);
    let passed = s.mean_rel_l2 <= 0.02 && s.mean_rel_h2 <= 0.03 && r.wall_clock_s <= 900.0;
    let per: Vec<String> = r.trials.iter().map(|t| format!("{:.4}", t.rel_l2)).collect();
    report(
        "desk-scale training reproduction",
        passed,
        &format!(
            "mean rel L2 {:.4} (trials {}), mean rel H2 {:.4}, {:.0} s",
            s.mean_rel_l2,
            per.join(", "),
            s.mean_rel_h2,
            r.wall_clock_s
        ),
    );
    assert!(passed);
}

#[test]
fn sobolev_penalty_beats_l2_penalty() {
    let sob = sobolev_runs().per_n[0].mean_rel_l2;
    let l2_report = sweep(&desk_config(BoundaryMode::L2)).unwrap();
    let l2 = l2_report.per_n[0].mean_rel_l2;
    let passed = sob < l2;
    report(
        "penalty comparison trend",
        passed,
        &format!("mean rel L2: Sobolev {sob:.4} vs L2 {l2:.4}"),
    );
    assert!(passed);
}

#[test]
fn slope_fit_on_published_means() {
    let ns = [128usize, 256, 512, 1024, 2048, 4096];
    let means = [0.013400, 0.015420, 0.007014, 0.003877, 0.003638, 0.003826];
    let (a, alpha) = slope_fit(&means, &ns).unwrap();
    // independent oracle: least squares on the design matrix [1, log2 N] by QR
    let design = DMatrix::from_fn(ns.len(), 2, |i, j| if j == 0 { 1.0 } else { (ns[i] as f64).log2() });
    let rhs = DVector::from_iterator(ns.len(), means.iter().map(|e| e.log2()));
    let qr = design.qr();
    let sol = qr.r().solve_upper_triangular(&(qr.q().transpose() * rhs)).unwrap();
    let (a_ref, alpha_ref) = (sol[0], -sol[1]);
    let err = (a - a_ref).abs().max((alpha - alpha_ref).abs());
    let passed = err <= 1e-12 && alpha > 0.2 && alpha < 0.8;
    report(
        "slope fit on published means",
        passed,
        &format!("alpha {alpha:.6}, a {a:.6}, oracle difference {err:.2e}"),
    );
    assert!(passed);
}

#[test]
fn constructions_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut prod_err = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=6);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let want: f64 = xs.iter().product();
        prod_err = prod_err.max((requ_product(&xs).unwrap() - want).abs() / product_error_scale(&xs));
    }
    let (d, s, m) = (10, 3, 4);
    let feats: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.into_iter().map(|a| a / n).collect()
        })
        .collect();
    let net = multichannel_inner_product_net(&feats, d, s, 1.0).unwrap();
    let mut ip_err = 0.0f64;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for (o, xi) in net.eval(&x).unwrap().iter().zip(&feats) {
            let want: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
            ip_err = ip_err.max((o - want).abs());
        }
    }
    let chi = bspline_cutoff(CutoffSpec { p: 2 }, 1.5);
    let k = MaternKernel::new(2.0, 3).unwrap();
    let mut matern_err = 0.0f64;
    for i in 0..=290 {
        let r = 0.1 + 0.01 * i as f64;
        let want = (PI / 2.0).sqrt() * (-r).exp();
        matern_err = matern_err.max((k.reconstruct(r, 30).unwrap() - want).abs() / want);
    }
    let passed = prod_err <= 1e-12 && ip_err <= 1e-12 && (chi - 0.5).abs() <= 1e-15 && matern_err <= 1e-10;
    report(
        "constructions exactness",
        passed,
        &format!(
            "product {prod_err:.2e}, inner product {ip_err:.2e}, chi_2(1.5) = {chi}, Matérn nu=1/2 {matern_err:.2e}"
        ),
    );
    assert!(passed);
}

#[test]
fn interpolation_rate() {
    let start = Instant::now();
    let kernel = MaternKernel::new(2.5, 3).unwrap();
    let mc = uniform_sphere(2000, &mut ChaCha8Rng::seed_from_u64(4));
    let f = |x: &[f64; 3]| x[0].exp() * (2.0 * x[1]).sin() + x[2] * x[2];
    let study = interpolation_rate_study(&kernel, f, &[100, 200, 400, 800], &mc).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let passed = study.slope <= -0.7 && study.inversions() <= 1 && secs < 120.0;
    let errs: Vec<String> = study.errors.iter().map(|e| format!("{e:.3e}")).collect();
    report(
        "interpolation rate",
        passed,
        &format!("slope {:.3}, errors [{}], {secs:.1} s", study.slope, errs.join(", ")),
    );
    assert!(passed);
}
