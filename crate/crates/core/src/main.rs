use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use picnn::constructions::verify_all;
use picnn::geometry::ManifoldKind;
use picnn::harness::{emit_reports, rates_from_cells, read_cells, sweep, ExperimentConfig, RunReport};
use picnn::training::BoundaryMode;

#[derive(Parser)]
#[command(name = "picnn", version, about = "Physics-informed CNN experiments on surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckSet {
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample-size sweep with per-N trial statistics.
    Sweep {
        #[arg(long, default_value = "hemisphere")]
        manifold: ManifoldKind,
        #[arg(long, default_value = "sobolev")]
        bnd: BoundaryMode,
        #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024,2048,4096")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 256)]
        m: usize,
        #[arg(long, default_value_t = 5120)]
        n_test: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Per-N means, standard deviations and fitted rates from a cells.csv.
    Rates {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Verify the explicit network and kernel constructions.
    Construct {
        #[arg(long, value_enum, default_value = "all")]
        check: CheckSet,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn print_summary(report: &RunReport) {
    for s in &report.per_n {
        println!(
            "N = {:5}  rel L2 {:.4e} ± {:.2e}  rel H2 {:.4e} ± {:.2e}  ({} trials)",
            s.n, s.mean_rel_l2, s.std_rel_l2, s.mean_rel_h2, s.std_rel_h2, s.trials
        );
    }
    if let (Some(l2), Some(h2)) = (report.fit_rel_l2, report.fit_rel_h2) {
        println!("rate: rel L2 alpha = {:.3}, rel H2 alpha = {:.3}", l2.alpha, h2.alpha);
    }
    println!("wall clock {:.1} s", report.wall_clock_s);
}

fn run_sweep(cfg: &ExperimentConfig) -> picnn::Result<()> {
    let report = sweep(cfg)?;
    emit_reports(&report, &cfg.output_dir)?;
    print_summary(&report);
    println!("reports written to {}", cfg.output_dir.display());
    Ok(())
}

fn run(cli: Cli) -> picnn::Result<bool> {
    match cli.command {
        Command::Run { config } => run_sweep(&ExperimentConfig::load(&config)?)?,
        Command::Sweep {
            manifold,
            bnd,
            n,
            m,
            n_test,
            trials,
            epochs,
            seed,
            out,
        } => {
            let mut cfg = ExperimentConfig {
                manifold,
                bnd_mode: bnd,
                n_list: n,
                m,
                n_test,
                trials,
                base_seed: seed,
                output_dir: out,
                ..ExperimentConfig::default()
            };
            cfg.train.epochs = epochs;
            run_sweep(&cfg)?;
        }
        Command::Rates { input } => {
            for g in rates_from_cells(&read_cells(&input)?) {
                println!("{} / {}", g.manifold, g.bnd_mode);
                for s in &g.per_n {
                    println!(
                        "  N = {:5}  rel L2 {:.4e} ± {:.2e}  rel H2 {:.4e} ± {:.2e}",
                        s.n, s.mean_rel_l2, s.std_rel_l2, s.mean_rel_h2, s.std_rel_h2
                    );
                }
                match (g.fit_rel_l2, g.fit_rel_h2) {
                    (Some(l2), Some(h2)) => println!(
                        "  alpha (rel L2) = {:.4}, a = {:.4}; alpha (rel H2) = {:.4}, a = {:.4}",
                        l2.alpha, l2.a, h2.alpha, h2.a
                    ),
                    _ => println!("  fewer than two distinct N, no rate fitted"),
                }
            }
        }
        Command::Construct { check: CheckSet::All, seed } => {
            let mut ok = true;
            for c in verify_all(seed)? {
                println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
