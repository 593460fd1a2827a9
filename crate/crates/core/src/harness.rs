//! Experiment orchestration: per-cell seeded training runs, sample-size
//! sweeps with multi-trial statistics, log-log slope fits and CSV/JSON
//! reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldKind};
use crate::network::Architecture;
use crate::training::{train_network, BoundaryMode, EpochRecord, TrainConfig, TrainingData};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldKind,
    /// Overrides `train.bnd_mode`.
    pub bnd_mode: BoundaryMode,
    pub n_list: Vec<usize>,
    pub m: usize,
    pub n_test: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub net: Architecture,
    /// `train.seed` is replaced by the per-cell seed.
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            manifold: ManifoldKind::Hemisphere,
            bnd_mode: BoundaryMode::Sobolev,
            n_list: vec![128, 256, 512, 1024, 2048, 4096],
            m: 256,
            n_test: 5120,
            trials: 10,
            base_seed: 7,
            output_dir: PathBuf::from("out"),
            net: Architecture::default(),
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Precondition("trials must be >= 1".into()));
        }
        if self.n_test == 0 {
            return Err(Error::Precondition("n_test must be >= 1".into()));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::Precondition("n_list must be nonempty with all N >= 1".into()));
        }
        self.net.validate()?;
        self.train.validate()
    }

    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            bnd_mode: self.bnd_mode,
            seed,
            ..self.train.clone()
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `base_seed + splitmix64(N, trial)`, so cells are independent of
/// scheduling order.
pub fn cell_seed(base_seed: u64, n: usize, trial: usize) -> u64 {
    base_seed.wrapping_add(splitmix64(((n as u64) << 32) ^ trial as u64))
}

pub fn cell_id(manifold: ManifoldKind, mode: BoundaryMode, n: usize, trial: usize) -> String {
    format!("{manifold}-{mode}-N{n}-t{trial}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub manifold: ManifoldKind,
    pub bnd_mode: BoundaryMode,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub rel_l2: f64,
    pub rel_h2: f64,
    pub best_epoch: Option<usize>,
    pub trace: Vec<EpochRecord>,
    /// Not serialized, so reports are byte-stable.
    #[serde(skip)]
    pub wall_s: f64,
}

impl TrialRecord {
    pub fn cell_id(&self) -> String {
        cell_id(self.manifold, self.bnd_mode, self.n, self.trial)
    }
}

/// Samples data, trains from the cell's seed and evaluates on the test set.
pub fn run_cell(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<TrialRecord> {
    let wrap = |e: Error| Error::Cell {
        n,
        trial,
        source: Box::new(e),
    };
    let start = Instant::now();
    let seed = cell_seed(cfg.base_seed, n, trial);
    let manifold = Manifold::from_kind(cfg.manifold);
    let data = TrainingData::assemble(&manifold, n, cfg.m, cfg.n_test, seed).map_err(wrap)?;
    let (_, errors, outcome) = train_network(&cfg.net, &data, &cfg.train_config(seed)).map_err(wrap)?;
    Ok(TrialRecord {
        manifold: cfg.manifold,
        bnd_mode: cfg.bnd_mode,
        n,
        trial,
        seed,
        rel_l2: errors.rel_l2,
        rel_h2: errors.rel_h2,
        best_epoch: outcome.best_epoch,
        trace: outcome.trace,
        wall_s: start.elapsed().as_secs_f64(),
    })
}

/// Least-squares fit `log2 e = a - alpha log2 N`; returns `(a, alpha)`.
pub fn slope_fit(means: &[f64], ns: &[usize]) -> Result<(f64, f64)> {
    if means.len() != ns.len() {
        return Err(Error::Shape(format!("{} means for {} sample sizes", means.len(), ns.len())));
    }
    if let Some(e) = means.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::Precondition(format!("slope fit needs positive errors, got {e}")));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).log2()).collect();
    let ys: Vec<f64> = means.iter().map(|e| e.log2()).collect();
    let k = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Precondition("slope fit needs at least two distinct N".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    Ok((ym - slope * xm, -slope))
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NStats {
    pub n: usize,
    pub trials: usize,
    pub mean_rel_l2: f64,
    pub std_rel_l2: f64,
    pub mean_rel_h2: f64,
    pub std_rel_h2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub a: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub per_n: Vec<NStats>,
    pub fit_rel_l2: Option<SlopeFit>,
    pub fit_rel_h2: Option<SlopeFit>,
    #[serde(skip)]
    pub wall_clock_s: f64,
}

/// Per-`N` aggregates (ascending `N`) and slope fits over them.
pub fn aggregate(trials: &[(usize, f64, f64)]) -> (Vec<NStats>, Option<SlopeFit>, Option<SlopeFit>) {
    let mut by_n: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &(n, l2, h2) in trials {
        let e = by_n.entry(n).or_default();
        e.0.push(l2);
        e.1.push(h2);
    }
    let per_n: Vec<NStats> = by_n
        .into_iter()
        .map(|(n, (l2, h2))| {
            let (mean_rel_l2, std_rel_l2) = mean_std(&l2);
            let (mean_rel_h2, std_rel_h2) = mean_std(&h2);
            NStats {
                n,
                trials: l2.len(),
                mean_rel_l2,
                std_rel_l2,
                mean_rel_h2,
                std_rel_h2,
            }
        })
        .collect();
    let ns: Vec<usize> = per_n.iter().map(|s| s.n).collect();
    let fit = |means: Vec<f64>| slope_fit(&means, &ns).ok().map(|(a, alpha)| SlopeFit { a, alpha });
    let fit_l2 = fit(per_n.iter().map(|s| s.mean_rel_l2).collect());
    let fit_h2 = fit(per_n.iter().map(|s| s.mean_rel_h2).collect());
    (per_n, fit_l2, fit_h2)
}

/// Runs every `(N, trial)` cell in parallel and aggregates.
pub fn sweep(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let cells: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let trials = cells
        .par_iter()
        .map(|&(n, t)| run_cell(cfg, n, t))
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<(usize, f64, f64)> = trials.iter().map(|t| (t.n, t.rel_l2, t.rel_h2)).collect();
    let (per_n, fit_rel_l2, fit_rel_h2) = aggregate(&raw);
    Ok(RunReport {
        config: cfg.clone(),
        trials,
        per_n,
        fit_rel_l2,
        fit_rel_h2,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// One row of `cells.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub manifold: String,
    pub bnd_mode: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub rel_l2: f64,
    pub rel_h2: f64,
    pub wall_s: f64,
}

#[derive(Serialize)]
struct EpochRow<'a> {
    cell_id: &'a str,
    epoch: usize,
    lr: f64,
    total_loss: f64,
    rel_l2: Option<f64>,
    rel_h2: Option<f64>,
}

const CELLS_HEADER: [&str; 8] = ["manifold", "bnd_mode", "N", "trial", "seed", "rel_l2", "rel_h2", "wall_s"];
const EPOCHS_HEADER: [&str; 6] = ["cell_id", "epoch", "lr", "total_loss", "rel_l2", "rel_h2"];

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl Iterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `cells.csv`, `epochs.csv` and `report.json` into `dir`.
pub fn emit_reports(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cells = dir.join("cells.csv");
    write_csv(
        &cells,
        &CELLS_HEADER,
        report.trials.iter().map(|t| CellRow {
            manifold: t.manifold.to_string(),
            bnd_mode: t.bnd_mode.to_string(),
            n: t.n,
            trial: t.trial,
            seed: t.seed,
            rel_l2: t.rel_l2,
            rel_h2: t.rel_h2,
            wall_s: t.wall_s,
        }),
    )?;
    let ids: Vec<String> = report.trials.iter().map(TrialRecord::cell_id).collect();
    let epochs = dir.join("epochs.csv");
    write_csv(
        &epochs,
        &EPOCHS_HEADER,
        report.trials.iter().zip(&ids).flat_map(|(t, id)| {
            t.trace.iter().map(move |e| EpochRow {
                cell_id: id,
                epoch: e.epoch,
                lr: e.lr,
                total_loss: e.total_loss,
                rel_l2: e.rel_l2,
                rel_h2: e.rel_h2,
            })
        }),
    )?;
    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&s).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_cells(path: &Path) -> Result<Vec<CellRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<CellRow>, _>>()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Aggregates and slope fits for one `(manifold, bnd_mode)` group of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSummary {
    pub manifold: String,
    pub bnd_mode: String,
    pub per_n: Vec<NStats>,
    pub fit_rel_l2: Option<SlopeFit>,
    pub fit_rel_h2: Option<SlopeFit>,
}

pub fn rates_from_cells(rows: &[CellRow]) -> Vec<RateSummary> {
    let mut groups: BTreeMap<(String, String), Vec<(usize, f64, f64)>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.manifold.clone(), r.bnd_mode.clone()))
            .or_default()
            .push((r.n, r.rel_l2, r.rel_h2));
    }
    groups
        .into_iter()
        .map(|((manifold, bnd_mode), raw)| {
            let (per_n, fit_rel_l2, fit_rel_h2) = aggregate(&raw);
            RateSummary {
                manifold,
                bnd_mode,
                per_n,
                fit_rel_l2,
                fit_rel_h2,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_and_constant() {
        let ns = [128, 256, 512, 1024];
        let e: Vec<f64> = ns.iter().map(|&n| 4.0 / n as f64).collect();
        let (a, alpha) = slope_fit(&e, &ns).unwrap();
        assert!((alpha - 1.0).abs() < 1e-12 && (a - 2.0).abs() < 1e-12);
        let (_, alpha) = slope_fit(&[0.3; 4], &ns).unwrap();
        assert!(alpha.abs() < 1e-12);
    }

    #[test]
    fn slope_fit_rejects_degenerate_input() {
        assert!(slope_fit(&[0.1, 0.2], &[64, 64]).is_err());
        assert!(slope_fit(&[0.1], &[64]).is_err());
        assert!(slope_fit(&[0.1, 0.0], &[64, 128]).is_err());
        assert!(slope_fit(&[0.1, 0.2], &[64]).is_err());
    }

    #[test]
    fn seeds_are_distinct_per_cell() {
        let mut seen = std::collections::HashSet::new();
        for n in [128, 256, 512] {
            for t in 0..10 {
                assert!(seen.insert(cell_seed(7, n, t)));
            }
        }
        assert_eq!(cell_seed(7, 128, 3), cell_seed(7, 128, 3));
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml_str(
            "manifold = \"half-torus\"\nbnd_mode = \"l2\"\nn_list = [8, 16]\ntrials = 2\n\n[train]\nepochs = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.manifold, ManifoldKind::HalfTorus);
        assert_eq!(cfg.bnd_mode, BoundaryMode::L2);
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.m, 256);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        assert!(ExperimentConfig::from_toml_str("trials = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }
}
