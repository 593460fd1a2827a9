//! End-to-end harness runs at smoke scale: determinism, report files and
//! error propagation.

use std::fs;
use std::time::Instant;

use picnn::geometry::ManifoldKind;
use picnn::harness::{
    emit_reports, read_cells, read_report, run_cell, sweep, ExperimentConfig, RunReport,
};
use picnn::network::{Architecture, ConvActivation, ConvSpec, MlpActivation, MlpSpec, Padding};
use picnn::training::{BoundaryMode, TrainConfig};
use picnn::Error;

fn smoke_config(manifold: ManifoldKind, mode: BoundaryMode) -> ExperimentConfig {
    ExperimentConfig {
        manifold,
        bnd_mode: mode,
        n_list: vec![8, 16],
        m: 16,
        n_test: 32,
        trials: 2,
        base_seed: 7,
        net: Architecture {
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
        },
        train: TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

#[test]
fn equal_seeds_give_identical_records() {
    let cfg = smoke_config(ManifoldKind::Hemisphere, BoundaryMode::Sobolev);
    let start = Instant::now();
    let a = run_cell(&cfg, 8, 1).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    let b = run_cell(&cfg, 8, 1).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!((a.rel_l2, a.rel_h2, a.seed), (b.rel_l2, b.rel_h2, b.seed));
    assert!(a.rel_l2.is_finite() && a.rel_l2 >= 0.0);
    assert_ne!(run_cell(&cfg, 8, 0).unwrap().seed, a.seed);
}

#[test]
fn reports_are_byte_stable_and_round_trip() {
    for (manifold, mode) in [
        (ManifoldKind::Hemisphere, BoundaryMode::L2),
        (ManifoldKind::HalfTorus, BoundaryMode::Sobolev),
    ] {
        let cfg = smoke_config(manifold, mode);
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut reports = Vec::new();
        for d in &dirs {
            let r = sweep(&cfg).unwrap();
            emit_reports(&r, d.path()).unwrap();
            reports.push(r);
        }
        let json = |i: usize| fs::read(dirs[i].path().join("report.json")).unwrap();
        assert_eq!(json(0), json(1));

        let mut back = read_report(&dirs[0].path().join("report.json")).unwrap();
        let mut orig = reports[0].clone();
        orig.wall_clock_s = 0.0;
        for t in &mut orig.trials {
            t.wall_s = 0.0;
        }
        back.wall_clock_s = 0.0;
        assert_eq!(back, orig);

        let cells = read_cells(&dirs[0].path().join("cells.csv")).unwrap();
        assert_eq!(cells.len(), cfg.n_list.len() * cfg.trials);
        assert_eq!(cells[0].manifold, manifold.to_string());
        assert_eq!(cells[0].bnd_mode, mode.to_string());
        let epochs = fs::read_to_string(dirs[0].path().join("epochs.csv")).unwrap();
        assert!(epochs.starts_with("cell_id,epoch,lr,total_loss,rel_l2,rel_h2\n"));
        assert_eq!(epochs.lines().count(), 1 + cells.len() * cfg.train.epochs);
    }
}

#[test]
fn empty_report_writes_headers_only() {
    let report = RunReport {
        config: ExperimentConfig::default(),
        trials: vec![],
        per_n: vec![],
        fit_rel_l2: None,
        fit_rel_h2: None,
        wall_clock_s: 0.0,
    };
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&report, dir.path()).unwrap();
    assert_eq!(
        fs::read_to_string(dir.path().join("cells.csv")).unwrap(),
        "manifold,bnd_mode,N,trial,seed,rel_l2,rel_h2,wall_s\n"
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("epochs.csv")).unwrap(),
        "cell_id,epoch,lr,total_loss,rel_l2,rel_h2\n"
    );
}

#[test]
fn divergent_training_reports_the_cell() {
    let mut cfg = smoke_config(ManifoldKind::Hemisphere, BoundaryMode::Sobolev);
    cfg.train.lr_eta = 1e300;
    cfg.train.epochs = 5;
    match run_cell(&cfg, 16, 1) {
        Err(Error::Cell { n: 16, trial: 1, source }) => {
            assert!(matches!(*source, Error::NonFinite { .. }), "{source}");
        }
        other => panic!("expected a cell error, got {other:?}"),
    }
}

#[test]
fn unwritable_output_names_the_path() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let report = RunReport {
        config: ExperimentConfig::default(),
        trials: vec![],
        per_n: vec![],
        fit_rel_l2: None,
        fit_rel_h2: None,
        wall_clock_s: 0.0,
    };
    let err = emit_reports(&report, &file.path().join("sub")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains(&file.path().display().to_string()));
}
