//! Sobolev boundary penalty on a circle: pure Fourier modes recover their
//! weights, and a rough residual is charged far more than its mean square.
//!
//! cargo run --release --example spectral_penalty -- [M] [K]

use std::f64::consts::{PI, TAU};

use picnn::spectral::{fft_real, sobolev_penalty, trace_order};

fn main() -> picnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(256);
    let k_max: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(m / 2);
    let length = TAU;
    let sigma = trace_order(1.0);

    println!("M = {m}, K = {k_max}, L = 2 pi, sigma = {sigma}");
    println!("{:>4}  {:>14}  {:>14}  {:>10}", "k", "penalty", "(1+k^2)^s / 2", "rel err");
    for k in [0usize, 1, 2, 4, 8, 16, 32] {
        let e: Vec<f64> = (0..m)
            .map(|j| (2.0 * PI * (k * j) as f64 / m as f64).cos())
            .collect();
        let p = sobolev_penalty(&e, length, 1.0, k_max)?;
        let lambda = (k as f64).powi(2);
        let want = if k == 0 { 1.0 } else { 0.5 * (1.0 + lambda).powf(sigma) };
        println!("{k:>4}  {p:>14.6e}  {want:>14.6e}  {:>10.2e}", (p - want).abs() / want);
    }

    // smooth plus high-frequency wiggle of equal mean square
    let smooth: Vec<f64> = (0..m).map(|j| (TAU * j as f64 / m as f64).sin()).collect();
    let rough: Vec<f64> = (0..m)
        .map(|j| (TAU * 24.0 * j as f64 / m as f64).sin())
        .collect();
    let ms = |e: &[f64]| e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64;
    for (name, e) in [("smooth", &smooth), ("rough", &rough)] {
        let spec = fft_real(e)?;
        println!(
            "{name:>6}: mean square {:.4}, |e_1| {:.4}, |e_24| {:.4}, penalty {:.4e}",
            ms(e),
            spec.at(1).norm(),
            spec.at(24).norm(),
            sobolev_penalty(e, length, 1.0, k_max)?
        );
    }
    Ok(())
}
