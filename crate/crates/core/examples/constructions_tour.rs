//! The explicit approximation constructions: ReQU products, the B-spline
//! cutoff, the Matérn series split, ridge features, the multichannel
//! inner-product network and kernel interpolation on the sphere.
//!
//! cargo run --release --example constructions_tour

use picnn::constructions::{
    bspline_cutoff, fibonacci_sphere, kernel_interpolate, multichannel_inner_product_net, requ_product,
    requ_product_network, ridge_decompose_sqdist, verify_all, CutoffSpec, MaternKernel,
};

fn main() -> picnn::Result<()> {
    let xs = [1.5, -0.25, 3.0, 0.8, -2.0];
    let net = requ_product_network(xs.len())?;
    println!(
        "ReQU product of {xs:?}: {:.15} (exact {:.15}), ReQU depth {}",
        requ_product(&xs)?,
        xs.iter().product::<f64>(),
        net.requ_depth()
    );

    let spec = CutoffSpec { p: 3 };
    let samples: Vec<String> = [0.5, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5]
        .iter()
        .map(|&t| format!("{:.4}", bspline_cutoff(spec, t)))
        .collect();
    println!("cutoff (p = 3) at 0.5, 1, 1.25, 1.5, 1.75, 2, 2.5: {}", samples.join(" "));

    let kernel = MaternKernel::new(3.2, 3)?;
    for r in [0.05, 0.5, 2.0] {
        println!(
            "nu = {:.1}, r = {r}: r^nu K_nu(r) = {:.12}, series A + r^(2 nu) B = {:.12}, phi = {:.6}",
            kernel.nu,
            kernel.scaled_bessel(r),
            kernel.reconstruct(r, 12)?,
            kernel.eval(r)
        );
    }

    let y = [0.3, -1.2, 0.5];
    let x = [1.0, 0.4, -0.7];
    let want: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
    println!("ridge |x - y|^2: {:.12} (exact {want:.12})", ridge_decompose_sqdist(&y).eval(&x));

    let feats = vec![vec![0.6, 0.8, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0, 0.0]];
    let ip = multichannel_inner_product_net(&feats, 5, 3, 1.0)?;
    println!(
        "multichannel net: depth {}, {} nonzero filter entries, <xi, x> = {:?}",
        ip.depth(),
        ip.nonzero_filter_entries(),
        ip.eval(&[0.5, -0.5, 0.25, 0.1, 0.0])?
    );

    let nodes = fibonacci_sphere(200);
    let f = |p: &[f64; 3]| -> f64 { (p[0] + 2.0 * p[1] * p[2]).exp() };
    let fvals: Vec<f64> = nodes.iter().map(f).collect();
    let interp = kernel_interpolate(&nodes, &fvals, &MaternKernel::new(3.0, 3)?)?;
    let probe = [0.36, 0.48, 0.8];
    println!("interpolant at {probe:?}: {:.6} (exact {:.6})", interp.eval(&probe), f(&probe));

    for c in verify_all(7)? {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
