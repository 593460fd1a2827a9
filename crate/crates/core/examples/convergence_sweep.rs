//! A small sample-size sweep through the experiment harness, writing
//! cells.csv, epochs.csv and report.json and fitting the empirical rate.
//!
//! cargo run --release --example convergence_sweep -- [out_dir] [epochs]

use std::path::PathBuf;

use picnn::geometry::ManifoldKind;
use picnn::harness::{emit_reports, sweep, ExperimentConfig};
use picnn::training::BoundaryMode;

fn main() -> picnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map(String::as_str).unwrap_or("out/convergence_sweep"));
    let epochs: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(60);

    let mut cfg = ExperimentConfig {
        manifold: ManifoldKind::Hemisphere,
        bnd_mode: BoundaryMode::Sobolev,
        n_list: vec![64, 128, 256],
        m: 128,
        n_test: 2048,
        trials: 2,
        output_dir: out.clone(),
        ..ExperimentConfig::default()
    };
    cfg.train.epochs = epochs;
    let report = sweep(&cfg)?;
    emit_reports(&report, &out)?;
    for s in &report.per_n {
        println!(
            "N = {:4}: rel L2 {:.4e} ± {:.1e}, rel H2 {:.4e} ± {:.1e}",
            s.n, s.mean_rel_l2, s.std_rel_l2, s.mean_rel_h2, s.std_rel_h2
        );
    }
    if let Some(fit) = report.fit_rel_l2 {
        println!("fitted rate alpha = {:.3} (intercept {:.3})", fit.alpha, fit.a);
    }
    println!("reports in {}", out.display());
    Ok(())
}
