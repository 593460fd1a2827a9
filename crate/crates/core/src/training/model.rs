use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::network::{Architecture, BatchCache, BatchInput, BatchNet, INPUT_LEN, JET_COMPS};

/// A trainable function of the ambient coordinates with a batched reverse
/// pass. Outputs are sample-major with `input.comps()` entries per sample.
pub trait Model: Sync {
    type Cache;

    fn param_len(&self) -> usize;

    fn forward(&self, params: &[f64], input: &BatchInput) -> Result<(Vec<f64>, Self::Cache)>;

    /// Accumulates `sum_r d_out[r] * d out[r] / d params` into `grad`.
    fn backward(&self, params: &[f64], cache: &Self::Cache, d_out: &[f64], grad: &mut [f64]) -> Result<()>;
}

/// The CNN + MLP network.
#[derive(Clone, Debug)]
pub struct NetworkModel {
    pub arch: Architecture,
}

impl Model for NetworkModel {
    type Cache = BatchCache;

    fn param_len(&self) -> usize {
        self.arch.param_count()
    }

    fn forward(&self, params: &[f64], input: &BatchInput) -> Result<(Vec<f64>, BatchCache)> {
        let cache = BatchNet::new(&self.arch, params)?.forward(input);
        Ok((cache.output.clone(), cache))
    }

    fn backward(&self, params: &[f64], cache: &BatchCache, d_out: &[f64], grad: &mut [f64]) -> Result<()> {
        BatchNet::new(&self.arch, params)?.backward(cache, d_out, grad)
    }
}

/// `u(q) = sum_i theta_i q^{a_i}` over fixed monomials of the ambient
/// coordinates. Linear in its parameters, so losses are convex quadratics.
#[derive(Clone, Debug)]
pub struct MonomialModel {
    pub exponents: Vec<[u32; INPUT_LEN]>,
}

impl MonomialModel {
    /// All monomials of total degree `<= degree`.
    pub fn up_to_degree(degree: u32) -> Self {
        let mut exponents = Vec::new();
        for a in 0..=degree {
            for b in 0..=degree - a {
                for c in 0..=degree - a - b {
                    exponents.push([a, b, c]);
                }
            }
        }
        MonomialModel { exponents }
    }

    fn features(&self, q: &[Jet2; INPUT_LEN]) -> Vec<Jet2> {
        self.exponents
            .iter()
            .map(|e| {
                let mut acc = Jet2::constant(1.0);
                for (x, &k) in q.iter().zip(e) {
                    for _ in 0..k {
                        acc = acc * *x;
                    }
                }
                acc
            })
            .collect()
    }
}

impl Model for MonomialModel {
    /// Feature components per output row.
    type Cache = (usize, Vec<Vec<f64>>);

    fn param_len(&self) -> usize {
        self.exponents.len()
    }

    fn forward(&self, params: &[f64], input: &BatchInput) -> Result<(Vec<f64>, Self::Cache)> {
        if params.len() != self.param_len() {
            return Err(Error::LayoutMismatch {
                expected: self.param_len(),
                got: params.len(),
            });
        }
        let comps = input.comps();
        let mut rows = Vec::with_capacity(input.samples() * comps);
        for s in 0..input.samples() {
            let feats = self.features(&input.point(s));
            for c in 0..comps {
                rows.push(feats.iter().map(|f| f.components()[c]).collect::<Vec<f64>>());
            }
        }
        let out = rows
            .iter()
            .map(|r| r.iter().zip(params).map(|(a, b)| a * b).sum())
            .collect();
        Ok((out, (comps, rows)))
    }

    fn backward(&self, _params: &[f64], cache: &Self::Cache, d_out: &[f64], grad: &mut [f64]) -> Result<()> {
        for (row, &d) in cache.1.iter().zip(d_out) {
            for (g, f) in grad.iter_mut().zip(row) {
                *g += d * f;
            }
        }
        Ok(())
    }
}

/// A field that can be evaluated on jets and values (for losses and metrics).
pub trait TrialField {
    fn jets(&self, inputs: &[[Jet2; INPUT_LEN]]) -> Result<Vec<Jet2>>;
    fn values(&self, points: &[[f64; INPUT_LEN]]) -> Result<Vec<f64>>;
}

const EVAL_CHUNK: usize = 512;

/// A model frozen at a parameter vector.
pub struct ModelField<'a, M: Model> {
    pub model: &'a M,
    pub params: &'a [f64],
}

impl<M: Model> TrialField for ModelField<'_, M> {
    fn jets(&self, inputs: &[[Jet2; INPUT_LEN]]) -> Result<Vec<Jet2>> {
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(EVAL_CHUNK) {
            let (o, _) = self.model.forward(self.params, &BatchInput::from_jets(chunk))?;
            out.extend(
                o.chunks_exact(JET_COMPS)
                    .map(|c| Jet2::from_components(std::array::from_fn(|i| c[i]))),
            );
        }
        Ok(out)
    }

    fn values(&self, points: &[[f64; INPUT_LEN]]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(EVAL_CHUNK) {
            out.extend(self.model.forward(self.params, &BatchInput::from_values(chunk))?.0);
        }
        Ok(out)
    }
}

/// `scale * xyz`, the exact solution up to a factor; used to check losses
/// and metrics against known values.
#[derive(Clone, Copy, Debug)]
pub struct ExactField {
    pub scale: f64,
}

impl TrialField for ExactField {
    fn jets(&self, inputs: &[[Jet2; INPUT_LEN]]) -> Result<Vec<Jet2>> {
        Ok(inputs.iter().map(|[x, y, z]| *x * *y * *z * self.scale).collect())
    }

    fn values(&self, points: &[[f64; INPUT_LEN]]) -> Result<Vec<f64>> {
        Ok(points.iter().map(|[x, y, z]| x * y * z * self.scale).collect())
    }
}
