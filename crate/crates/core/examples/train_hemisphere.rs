//! Trains the default network on the hemisphere benchmark and reports the
//! relative L2 and H2 errors of the best parameters.
//!
//! cargo run --release --example train_hemisphere -- [sobolev|l2|plugin] [seed] [epochs]

use std::time::Instant;

use picnn::geometry::Manifold;
use picnn::network::Architecture;
use picnn::training::{train_network, BoundaryMode, TrainConfig, TrainingData};

fn main() -> picnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode: BoundaryMode = args.first().map(|s| s.parse()).transpose()?.unwrap_or(BoundaryMode::Sobolev);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);

    let manifold = Manifold::hemisphere();
    let data = TrainingData::assemble(&manifold, 512, 256, 5120, seed)?;
    let cfg = TrainConfig {
        epochs,
        bnd_mode: mode,
        seed,
        trace_every: 25,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let (_, errors, outcome) = train_network(&Architecture::default(), &data, &cfg)?;
    for r in outcome.trace.iter().filter(|r| r.rel_l2.is_some()) {
        println!(
            "epoch {:>4}  lr {:.2e}  loss {:.4e}  rel L2 {:.4e}  rel H2 {:.4e}",
            r.epoch + 1,
            r.lr,
            r.total_loss,
            r.rel_l2.unwrap_or(f64::NAN),
            r.rel_h2.unwrap_or(f64::NAN)
        );
    }
    println!(
        "{mode}: best epoch {:?}, rel L2 {:.5}, rel H2 {:.5} ({:.1} s)",
        outcome.best_epoch.map(|e| e + 1),
        errors.rel_l2,
        errors.rel_h2,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
