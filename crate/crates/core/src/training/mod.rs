//! Loss assembly, optimisation and test metrics.
//!
//! Each Adam step uses a minibatch of interior points and the full boundary
//! sample set. After every epoch the total loss is re-evaluated on the whole
//! training set and the best parameters seen so far are kept.

mod data;
mod loss;
mod model;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use data::{boundary_sets, test_set, BoundarySet, InteriorSet, TestSet, TrainingData};
pub use loss::{
    boundary_loss, boundary_residuals, loss_and_grad, physics_loss, rel_errors, total_loss,
    total_loss_generic, BoundaryMode, BoundaryPenalty, LossParts, RelErrors,
};
pub use model::{ExactField, Model, ModelField, MonomialModel, NetworkModel, TrialField};

use crate::error::{Error, Result};
use crate::network::{init, Architecture, BatchInput, NetworkParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr_eta: f64,
    pub steplr_gamma: f64,
    pub steplr_period: usize,
    pub lambda_bnd: f64,
    pub bnd_mode: BoundaryMode,
    /// Half the PDE order; the boundary penalty has order `2s - 1/2`.
    pub s_order: f64,
    /// Frequency cutoff `K`; `None` keeps the full spectrum `M/2`.
    pub truncation_k: Option<usize>,
    pub include_plain_l2_term: bool,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Interior points per Adam step; `batch_size >= n` is full-batch.
    pub batch_size: usize,
    /// Test metrics every this many epochs (0: final epoch only).
    pub trace_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            lr_eta: 1e-3,
            steplr_gamma: 0.5,
            steplr_period: 50,
            lambda_bnd: 10.0,
            bnd_mode: BoundaryMode::Sobolev,
            s_order: 1.0,
            truncation_k: None,
            include_plain_l2_term: false,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 32,
            trace_every: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if !(self.lr_eta > 0.0) {
            return bad(format!("lr_eta must be > 0, got {}", self.lr_eta));
        }
        if !(self.steplr_gamma > 0.0 && self.steplr_gamma <= 1.0) {
            return bad(format!("steplr_gamma must lie in (0, 1], got {}", self.steplr_gamma));
        }
        if self.steplr_period == 0 {
            return bad("steplr_period must be >= 1".into());
        }
        if !(self.lambda_bnd >= 0.0) {
            return bad(format!("lambda_bnd must be >= 0, got {}", self.lambda_bnd));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        Ok(())
    }

    /// Step decay: `eta * gamma^floor(epoch / period)` (epochs counted from 0).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr_eta * self.steplr_gamma.powi((epoch / self.steplr_period) as i32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(n: usize, cfg: &TrainConfig) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_eps,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Total loss on the full training sets after the epoch's updates.
    pub total_loss: f64,
    pub rel_l2: Option<f64>,
    pub rel_h2: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub best_params: Vec<f64>,
    pub best_loss: LossParts,
    /// `None` when no epoch improved on the initial parameters.
    pub best_epoch: Option<usize>,
    pub final_params: Vec<f64>,
    pub trace: Vec<EpochRecord>,
}

fn check_finite(parts: &LossParts, grad: Option<&[f64]>, epoch: usize, step: usize) -> Result<()> {
    if !parts.is_finite() {
        return Err(Error::NonFinite {
            epoch,
            step,
            detail: format!("{parts:?}"),
        });
    }
    if let Some(i) = grad.and_then(|g| g.iter().position(|v| !v.is_finite())) {
        return Err(Error::NonFinite {
            epoch,
            step,
            detail: format!("gradient entry {i} is not finite"),
        });
    }
    Ok(())
}

/// Minimises the total loss from `params` and returns the best parameters
/// by full training-set loss.
pub fn train<M: Model>(model: &M, data: &TrainingData, cfg: &TrainConfig, params: Vec<f64>) -> Result<TrainOutcome> {
    cfg.validate()?;
    if params.len() != model.param_len() {
        return Err(Error::LayoutMismatch {
            expected: model.param_len(),
            got: params.len(),
        });
    }
    let penalty = BoundaryPenalty::new(&data.boundary, cfg)?;
    let boundary: Vec<(BatchInput, &BoundarySet)> = data
        .boundary
        .iter()
        .map(|b| (BatchInput::from_values(&b.points), b))
        .collect();
    let mut rng = data::seeded(cfg.seed, data::stream::SHUFFLE);
    let mut order: Vec<usize> = (0..data.interior.len()).collect();
    let mut params = params;
    let mut adam = Adam::new(params.len(), cfg);

    let field_loss = |p: &[f64]| total_loss(&ModelField { model, params: p }, data, &penalty);
    let mut best_loss = field_loss(&params)?;
    check_finite(&best_loss, None, 0, 0)?;
    let mut best_params = params.clone();
    let mut best_epoch = None;
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        order.shuffle(&mut rng);
        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            let (parts, grad) = loss_and_grad(model, &params, &data.interior, batch, &boundary, &penalty)?;
            check_finite(&parts, Some(&grad), epoch, step)?;
            adam.step(&mut params, &grad, lr);
        }
        let loss = field_loss(&params)?;
        check_finite(&loss, None, epoch, usize::MAX)?;
        if loss.total < best_loss.total {
            best_loss = loss;
            best_params.clone_from(&params);
            best_epoch = Some(epoch);
        }
        let last = epoch + 1 == cfg.epochs;
        let traced = last || (cfg.trace_every > 0 && (epoch + 1) % cfg.trace_every == 0);
        let metrics = if traced {
            Some(rel_errors(&ModelField { model, params: &params }, &data.test)?)
        } else {
            None
        };
        trace.push(EpochRecord {
            epoch,
            lr,
            total_loss: loss.total,
            rel_l2: metrics.map(|m| m.rel_l2),
            rel_h2: metrics.map(|m| m.rel_h2),
        });
    }
    Ok(TrainOutcome {
        best_params,
        best_loss,
        best_epoch,
        final_params: params,
        trace,
    })
}

/// Glorot-initialised network trained on `data`; returns the best
/// parameters and their test errors.
pub fn train_network(
    arch: &Architecture,
    data: &TrainingData,
    cfg: &TrainConfig,
) -> Result<(NetworkParams, RelErrors, TrainOutcome)> {
    arch.validate()?;
    let model = NetworkModel { arch: arch.clone() };
    let start = init(arch, cfg.seed);
    let outcome = train(&model, data, cfg, start.flat)?;
    let errors = rel_errors(
        &ModelField {
            model: &model,
            params: &outcome.best_params,
        },
        &data.test,
    )?;
    let params = NetworkParams::from_flat(arch, outcome.best_params.clone())?;
    Ok((params, errors, outcome))
}
