use serde::{Deserialize, Serialize};

use super::data::{BoundarySet, InteriorSet, TestSet, TrainingData};
use super::model::{Model, TrialField};
use super::TrainConfig;
use crate::autodiff::{Jet, Real};
use crate::error::{Error, Result};
use crate::geometry::apply_coeffs;
use crate::network::{forward, Architecture, BatchInput, INPUT_LEN, JET_COMPS};
use crate::spectral::{
    circle_eigenbasis, penalty_and_grad, penalty_matrix_for, trace_order, SpectralWeightTable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// Mean squared boundary residual.
    L2,
    /// FFT penalty with weights `(1 + lambda_k)^(2s - 1/2)`, summed over components.
    Sobolev,
    /// Eigenbasis plug-in estimator with weights `lambda_k^(2s - 1/2)`.
    Plugin,
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(BoundaryMode::L2),
            "sobolev" => Ok(BoundaryMode::Sobolev),
            "plugin" => Ok(BoundaryMode::Plugin),
            other => Err(Error::Parse(format!(
                "unknown boundary mode {other:?} (expected l2, sobolev or plugin)"
            ))),
        }
    }
}

impl std::fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryMode::L2 => "l2",
            BoundaryMode::Sobolev => "sobolev",
            BoundaryMode::Plugin => "plugin",
        })
    }
}

#[derive(Clone, Debug)]
enum ComponentPenalty {
    MeanSquare,
    Fft(SpectralWeightTable),
    Plugin {
        psi: Vec<Vec<f64>>,
        lambda: Vec<f64>,
    },
}

/// Boundary penalty prepared for a fixed set of boundary curves.
#[derive(Clone, Debug)]
pub struct BoundaryPenalty {
    parts: Vec<ComponentPenalty>,
    total_samples: usize,
    s_order: f64,
    lambda_bnd: f64,
    plain_l2: bool,
}

/// Loss value broken into its terms; `total = physics + lambda * boundary
/// (+ plain_l2 when enabled)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub physics: f64,
    pub boundary: f64,
    pub plain_l2: f64,
    pub total: f64,
}

impl LossParts {
    pub fn is_finite(&self) -> bool {
        self.physics.is_finite() && self.boundary.is_finite() && self.total.is_finite()
    }
}

fn check_samples(b: &BoundarySet) -> Result<usize> {
    if b.points.len() != b.target.len() {
        return Err(Error::Shape(format!(
            "boundary component {:?}: {} points, {} targets",
            b.label,
            b.points.len(),
            b.target.len()
        )));
    }
    Ok(b.points.len())
}

impl BoundaryPenalty {
    pub fn new(boundary: &[BoundarySet], cfg: &TrainConfig) -> Result<Self> {
        let sigma = trace_order(cfg.s_order);
        let mut parts = Vec::with_capacity(boundary.len());
        let mut total_samples = 0;
        for b in boundary {
            let m = check_samples(b)?;
            total_samples += m;
            let k = cfg.truncation_k.unwrap_or(m / 2);
            parts.push(match cfg.bnd_mode {
                BoundaryMode::L2 => ComponentPenalty::MeanSquare,
                BoundaryMode::Sobolev => {
                    if k > m / 2 {
                        return Err(Error::Truncation { k, half: m / 2 });
                    }
                    ComponentPenalty::Fft(SpectralWeightTable::new(b.length, sigma, k))
                }
                BoundaryMode::Plugin => {
                    let (psi, lambda) = circle_eigenbasis(m, b.length, k)?;
                    ComponentPenalty::Plugin { psi, lambda }
                }
            });
        }
        if total_samples == 0 {
            return Err(Error::Precondition("no boundary samples".into()));
        }
        Ok(BoundaryPenalty {
            parts,
            total_samples,
            s_order: cfg.s_order,
            lambda_bnd: cfg.lambda_bnd,
            plain_l2: cfg.include_plain_l2_term,
        })
    }

    /// `(boundary, plain_l2, d total / d e)` for per-component residuals.
    pub fn terms(&self, residuals: &[Vec<f64>]) -> Result<(f64, f64, Vec<Vec<f64>>)> {
        if residuals.len() != self.parts.len() {
            return Err(Error::Shape(format!(
                "{} residual vectors for {} boundary components",
                residuals.len(),
                self.parts.len()
            )));
        }
        let inv_m = 1.0 / self.total_samples as f64;
        let mut bnd = 0.0;
        let mut plain = 0.0;
        let mut grads = Vec::with_capacity(residuals.len());
        let sigma = trace_order(self.s_order);
        for (part, e) in self.parts.iter().zip(residuals) {
            let (value, mut g) = match part {
                ComponentPenalty::MeanSquare => (
                    e.iter().map(|v| v * v).sum::<f64>() * inv_m,
                    e.iter().map(|v| 2.0 * v * inv_m).collect(),
                ),
                ComponentPenalty::Fft(table) => penalty_and_grad(e, table)?,
                ComponentPenalty::Plugin { psi, lambda } => {
                    let m = e.len() as f64;
                    let mut value = 0.0;
                    let mut g = vec![0.0; e.len()];
                    for (row, &l) in psi.iter().zip(lambda) {
                        let w = l.powf(sigma);
                        let c: f64 = row.iter().zip(e).map(|(p, r)| p * r).sum::<f64>() / m;
                        value += w * c * c;
                        for (gj, p) in g.iter_mut().zip(row) {
                            *gj += 2.0 * w * c * p / m;
                        }
                    }
                    (value, g)
                }
            };
            bnd += value;
            for gj in &mut g {
                *gj *= self.lambda_bnd;
            }
            if self.plain_l2 {
                plain += e.iter().map(|v| v * v).sum::<f64>() * inv_m;
                for (gj, v) in g.iter_mut().zip(e) {
                    *gj += 2.0 * v * inv_m;
                }
            }
            grads.push(g);
        }
        Ok((bnd, plain, grads))
    }

    pub fn combine(&self, physics: f64, boundary: f64, plain_l2: f64) -> LossParts {
        LossParts {
            physics,
            boundary,
            plain_l2,
            total: physics + self.lambda_bnd * boundary + if self.plain_l2 { plain_l2 } else { 0.0 },
        }
    }
}

/// `(1/n) sum_i (L u(x_i) - f(x_i))^2`.
pub fn physics_loss(field: &dyn TrialField, interior: &InteriorSet) -> Result<f64> {
    if interior.is_empty() {
        return Err(Error::Precondition("physics loss needs at least one interior sample".into()));
    }
    let jets = field.jets(&interior.inputs)?;
    let sum: f64 = jets
        .iter()
        .zip(&interior.coeffs)
        .zip(&interior.source)
        .map(|((u, c), f)| (apply_coeffs(c, u) - f).powi(2))
        .sum();
    Ok(sum / interior.len() as f64)
}

pub fn boundary_residuals(field: &dyn TrialField, boundary: &[BoundarySet]) -> Result<Vec<Vec<f64>>> {
    boundary
        .iter()
        .map(|b| {
            let u = field.values(&b.points)?;
            Ok(u.iter().zip(&b.target).map(|(u, g)| u - g).collect())
        })
        .collect()
}

pub fn boundary_loss(field: &dyn TrialField, boundary: &[BoundarySet], penalty: &BoundaryPenalty) -> Result<f64> {
    Ok(penalty.terms(&boundary_residuals(field, boundary)?)?.0)
}

/// Total loss of `field` on the full training sets.
pub fn total_loss(field: &dyn TrialField, data: &TrainingData, penalty: &BoundaryPenalty) -> Result<LossParts> {
    let physics = physics_loss(field, &data.interior)?;
    let (bnd, plain, _) = penalty.terms(&boundary_residuals(field, &data.boundary)?)?;
    Ok(penalty.combine(physics, bnd, plain))
}

/// Loss on the interior points `batch` plus the full boundary, and its
/// gradient with respect to the model parameters.
pub fn loss_and_grad<M: Model>(
    model: &M,
    params: &[f64],
    interior: &InteriorSet,
    batch: &[usize],
    boundary: &[(BatchInput, &BoundarySet)],
    penalty: &BoundaryPenalty,
) -> Result<(LossParts, Vec<f64>)> {
    let mut grad = vec![0.0; model.param_len()];
    let pts: Vec<[crate::autodiff::Jet2; INPUT_LEN]> = batch.iter().map(|&i| interior.inputs[i]).collect();
    let (out, cache) = model.forward(params, &BatchInput::from_jets(&pts))?;
    let inv_n = 1.0 / batch.len() as f64;
    let mut physics = 0.0;
    let mut d_out = vec![0.0; out.len()];
    for (s, &i) in batch.iter().enumerate() {
        let c = &interior.coeffs[i];
        let u = &out[s * JET_COMPS..(s + 1) * JET_COMPS];
        let r = c.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() - interior.source[i];
        physics += r * r;
        for k in 0..JET_COMPS {
            d_out[s * JET_COMPS + k] = 2.0 * r * c[k] * inv_n;
        }
    }
    physics *= inv_n;
    model.backward(params, &cache, &d_out, &mut grad)?;

    let mut residuals = Vec::with_capacity(boundary.len());
    let mut caches = Vec::with_capacity(boundary.len());
    for (input, set) in boundary {
        let (u, cache) = model.forward(params, input)?;
        residuals.push(u.iter().zip(&set.target).map(|(u, g)| u - g).collect::<Vec<f64>>());
        caches.push(cache);
    }
    let (bnd, plain, d_e) = penalty.terms(&residuals)?;
    for (cache, d) in caches.iter().zip(&d_e) {
        model.backward(params, cache, d, &mut grad)?;
    }
    Ok((penalty.combine(physics, bnd, plain), grad))
}

/// Relative errors of a field on the test set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelErrors {
    pub rel_l2: f64,
    pub rel_h2: f64,
}

/// `||u - u*|| / ||u*||` and `||Delta u - Delta u*|| / ||Delta u*||` as
/// discrete root-mean-square ratios over the test points.
pub fn rel_errors(field: &dyn TrialField, test: &TestSet) -> Result<RelErrors> {
    if test.inputs.is_empty() {
        return Err(Error::Precondition("empty test set".into()));
    }
    let jets = field.jets(&test.inputs)?;
    let (mut num0, mut den0, mut num2, mut den2) = (0.0, 0.0, 0.0, 0.0);
    for (((u, c), us), ls) in jets
        .iter()
        .zip(&test.laplace_coeffs)
        .zip(&test.u_exact)
        .zip(&test.laplace_exact)
    {
        num0 += (u.val - us).powi(2);
        den0 += us * us;
        num2 += (apply_coeffs(c, u) - ls).powi(2);
        den2 += ls * ls;
    }
    if den0 == 0.0 || den2 == 0.0 {
        return Err(Error::Domain("exact solution vanishes on the test set".into()));
    }
    Ok(RelErrors {
        rel_l2: (num0 / den0).sqrt(),
        rel_h2: (num2 / den2).sqrt(),
    })
}

/// The total loss of the network written once, generically over the scalar
/// type, with the boundary penalty as an explicit quadratic form. With tape
/// variables this gives parameter gradients independently of the batched
/// engine; it is quadratic in the boundary size and meant for small checks.
pub fn total_loss_generic<T: Real>(
    arch: &Architecture,
    params: &[T],
    data: &TrainingData,
    cfg: &TrainConfig,
) -> Result<T> {
    let lifted: Vec<Jet<T>> = params.iter().map(|&p| Jet::constant(p)).collect();
    let interior = &data.interior;
    let mut physics = T::zero();
    for ((q, c), f) in interior.inputs.iter().zip(&interior.coeffs).zip(&interior.source) {
        let qt = q.map(|j| Jet::from_components(j.components().map(T::cst)));
        let u = forward(arch, &lifted, qt)?;
        let mut lu = T::cst(-f);
        for (a, comp) in c.iter().zip(u.components()) {
            lu = lu + comp * *a;
        }
        physics = physics + lu * lu;
    }
    physics = physics * (1.0 / interior.len() as f64);

    let sigma = trace_order(cfg.s_order);
    let total_m: usize = data.boundary.iter().map(|b| b.points.len()).sum();
    let mut bnd = T::zero();
    let mut plain = T::zero();
    for b in &data.boundary {
        let m = b.points.len();
        let e: Vec<T> = b
            .points
            .iter()
            .zip(&b.target)
            .map(|(q, g)| Ok(forward(arch, params, q.map(T::cst))? + (-g)))
            .collect::<Result<_>>()?;
        let sq = e.iter().fold(T::zero(), |acc, &v| acc + v * v) * (1.0 / total_m as f64);
        plain = plain + sq;
        let k = cfg.truncation_k.unwrap_or(m / 2);
        bnd = bnd
            + match cfg.bnd_mode {
                BoundaryMode::L2 => sq,
                BoundaryMode::Sobolev => {
                    let a = penalty_matrix_for(m, &SpectralWeightTable::new(b.length, sigma, k))?;
                    let mut acc = T::zero();
                    for j in 0..m {
                        let mut row = T::zero();
                        for l in 0..m {
                            row = row + e[l] * a[(j, l)];
                        }
                        acc = acc + e[j] * row;
                    }
                    acc
                }
                BoundaryMode::Plugin => {
                    let (psi, lambda) = circle_eigenbasis(m, b.length, k)?;
                    let mut acc = T::zero();
                    for (row, l) in psi.iter().zip(lambda) {
                        let c = row
                            .iter()
                            .zip(&e)
                            .fold(T::zero(), |acc, (&p, &v)| acc + v * p)
                            * (1.0 / m as f64);
                        acc = acc + c * c * l.powf(sigma);
                    }
                    acc
                }
            };
    }
    let mut total = physics + bnd * cfg.lambda_bnd;
    if cfg.include_plain_l2_term {
        total = total + plain;
    }
    Ok(total)
}
