//! Trains the same network with the plain L2 and the Sobolev boundary
//! penalty on identical data and seeds, then compares test errors.
//!
//! cargo run --release --example boundary_comparison -- [hemisphere|half-torus] [N] [epochs] [trials]

use picnn::geometry::{Manifold, ManifoldKind};
use picnn::harness::mean_std;
use picnn::network::Architecture;
use picnn::training::{train_network, BoundaryMode, TrainConfig, TrainingData};

fn main() -> picnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: ManifoldKind = args.first().map(|s| s.parse()).transpose()?.unwrap_or(ManifoldKind::Hemisphere);
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let trials: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2);

    let manifold = Manifold::from_kind(kind);
    for mode in [BoundaryMode::L2, BoundaryMode::Sobolev] {
        let mut l2 = Vec::new();
        let mut h2 = Vec::new();
        for seed in 0..trials {
            let data = TrainingData::assemble(&manifold, n, 256, 2048, seed)?;
            let cfg = TrainConfig {
                epochs,
                bnd_mode: mode,
                seed,
                ..TrainConfig::default()
            };
            let (_, errors, _) = train_network(&Architecture::default(), &data, &cfg)?;
            l2.push(errors.rel_l2);
            h2.push(errors.rel_h2);
        }
        let (ml2, sl2) = mean_std(&l2);
        let (mh2, sh2) = mean_std(&h2);
        println!("{kind} {mode:>8}: rel L2 {ml2:.4e} ± {sl2:.1e}  rel H2 {mh2:.4e} ± {sh2:.1e}");
    }
    Ok(())
}
