//! Batched evaluation of the CNN + MLP network on jet payloads, with a
//! hand-written reverse pass.
//!
//! Activations are stored as matrices whose rows are `(sample, component)`
//! pairs and whose columns are channels; the convolution keeps one such
//! matrix per sequence position. With `comps = 6` a row block holds the jet
//! components `(val, gx, gy, hxx, hxy, hyy)` of one sample; with `comps = 1`
//! only values are carried. Every layer is linear in the jet except the
//! activations, so affine maps become GEMMs and biases touch only value rows.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, Axis};

use super::arch::{Architecture, ConvActivation, MlpActivation, SliceKind, INPUT_LEN};
use crate::autodiff::{gelu2_derivs, gelu_derivs, relu_derivs, requ_derivs, Jet2};
use crate::error::{Error, Result};

pub const JET_COMPS: usize = 6;

type Derivs = fn(f64) -> [f64; 4];

fn conv_derivs(a: ConvActivation) -> Derivs {
    match a {
        ConvActivation::Relu => relu_derivs,
        ConvActivation::Gelu => gelu_derivs,
    }
}

fn mlp_derivs(a: MlpActivation) -> Derivs {
    match a {
        MlpActivation::Requ => requ_derivs,
        MlpActivation::Gelu2 => gelu2_derivs,
    }
}

/// Network inputs for a batch: one `(rows, 1)` matrix per sequence position.
#[derive(Clone, Debug)]
pub struct BatchInput {
    comps: usize,
    samples: usize,
    positions: [Array2<f64>; INPUT_LEN],
}

impl BatchInput {
    /// Ambient-coordinate jets (in chart variables) for each sample.
    pub fn from_jets(points: &[[Jet2; INPUT_LEN]]) -> Self {
        let rows = points.len() * JET_COMPS;
        let positions = std::array::from_fn(|i| {
            Array2::from_shape_fn((rows, 1), |(r, _)| {
                points[r / JET_COMPS][i].components()[r % JET_COMPS]
            })
        });
        BatchInput {
            comps: JET_COMPS,
            samples: points.len(),
            positions,
        }
    }

    pub fn from_values(points: &[[f64; INPUT_LEN]]) -> Self {
        let positions =
            std::array::from_fn(|i| Array2::from_shape_fn((points.len(), 1), |(r, _)| points[r][i]));
        BatchInput {
            comps: 1,
            samples: points.len(),
            positions,
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    /// Input coordinates of sample `s` as jets (constant jets for a value batch).
    pub fn point(&self, s: usize) -> [Jet2; INPUT_LEN] {
        std::array::from_fn(|i| {
            let col = &self.positions[i];
            if self.comps == 1 {
                Jet2::constant(col[[s, 0]])
            } else {
                Jet2::from_components(std::array::from_fn(|c| col[[s * JET_COMPS + c, 0]]))
            }
        })
    }
}

/// Intermediate values retained for the reverse pass.
pub struct BatchCache {
    comps: usize,
    conv_in: Vec<[Array2<f64>; INPUT_LEN]>,
    conv_pre: Vec<[Array2<f64>; INPUT_LEN]>,
    dense_in: Vec<Array2<f64>>,
    dense_pre: Vec<Array2<f64>>,
    head_in: Array2<f64>,
    /// Output, `samples * comps` entries, sample-major.
    pub output: Vec<f64>,
}

impl BatchCache {
    /// Output jet of sample `s` (requires a jet batch).
    pub fn jet(&self, s: usize) -> Jet2 {
        debug_assert_eq!(self.comps, JET_COMPS);
        let o = &self.output[s * JET_COMPS..(s + 1) * JET_COMPS];
        Jet2::from_components(std::array::from_fn(|c| o[c]))
    }
}

/// Batched forward and reverse passes for one parameter vector.
pub struct BatchNet<'a> {
    arch: &'a Architecture,
    params: &'a [f64],
    layout: super::arch::Layout,
}

fn add_bias_to_values(m: &mut Array2<f64>, bias: &[f64], comps: usize) {
    for mut row in m.axis_iter_mut(Axis(0)).step_by(comps) {
        for (v, b) in row.iter_mut().zip(bias) {
            *v += b;
        }
    }
}

fn bias_grad(d: &Array2<f64>, comps: usize, out: &mut [f64]) {
    for row in d.axis_iter(Axis(0)).step_by(comps) {
        for (g, v) in out.iter_mut().zip(row) {
            *g += v;
        }
    }
}

/// Jet-wise activation. For `comps = 1` this is plain elementwise `f`.
fn act_forward(pre: &Array2<f64>, comps: usize, f: Derivs) -> Array2<f64> {
    let mut out = Array2::zeros(pre.raw_dim());
    let cols = pre.ncols();
    let p = pre.as_slice().expect("standard layout");
    let o = out.as_slice_mut().expect("standard layout");
    if comps == 1 {
        for (y, &x) in o.iter_mut().zip(p) {
            *y = f(x)[0];
        }
        return out;
    }
    for (pb, ob) in p.chunks_exact(comps * cols).zip(o.chunks_exact_mut(comps * cols)) {
        for j in 0..cols {
            let [v, g0, g1, h00, h01, h11] = std::array::from_fn(|c| pb[c * cols + j]);
            let [f0, f1, f2, _] = f(v);
            ob[j] = f0;
            ob[cols + j] = f1 * g0;
            ob[2 * cols + j] = f1 * g1;
            ob[3 * cols + j] = f2 * g0 * g0 + f1 * h00;
            ob[4 * cols + j] = f2 * g0 * g1 + f1 * h01;
            ob[5 * cols + j] = f2 * g1 * g1 + f1 * h11;
        }
    }
    out
}

/// Adjoint of [`act_forward`]: maps output adjoints to pre-activation adjoints.
fn act_backward(pre: &Array2<f64>, d_out: &Array2<f64>, comps: usize, f: Derivs) -> Array2<f64> {
    let mut d_pre = Array2::zeros(pre.raw_dim());
    let cols = pre.ncols();
    let p = pre.as_slice().expect("standard layout");
    let a = d_out.as_slice().expect("standard layout");
    let d = d_pre.as_slice_mut().expect("standard layout");
    if comps == 1 {
        for ((dv, &x), &av) in d.iter_mut().zip(p).zip(a) {
            *dv = av * f(x)[1];
        }
        return d_pre;
    }
    let block = comps * cols;
    for ((pb, ab), db) in p
        .chunks_exact(block)
        .zip(a.chunks_exact(block))
        .zip(d.chunks_exact_mut(block))
    {
        for j in 0..cols {
            let [v, g0, g1, h00, h01, h11] = std::array::from_fn(|c| pb[c * cols + j]);
            let [av, ag0, ag1, a00, a01, a11] = std::array::from_fn(|c| ab[c * cols + j]);
            let [_, f1, f2, f3] = f(v);
            db[j] = av * f1
                + f2 * (ag0 * g0 + ag1 * g1)
                + f3 * (a00 * g0 * g0 + a01 * g0 * g1 + a11 * g1 * g1)
                + f2 * (a00 * h00 + a01 * h01 + a11 * h11);
            db[cols + j] = ag0 * f1 + f2 * (2.0 * a00 * g0 + a01 * g1);
            db[2 * cols + j] = ag1 * f1 + f2 * (a01 * g0 + 2.0 * a11 * g1);
            db[3 * cols + j] = a00 * f1;
            db[4 * cols + j] = a01 * f1;
            db[5 * cols + j] = a11 * f1;
        }
    }
    d_pre
}

impl<'a> BatchNet<'a> {
    pub fn new(arch: &'a Architecture, params: &'a [f64]) -> Result<Self> {
        let layout = arch.layout();
        if params.len() != layout.total_len() {
            return Err(Error::LayoutMismatch {
                expected: layout.total_len(),
                got: params.len(),
            });
        }
        Ok(BatchNet {
            arch,
            params,
            layout,
        })
    }

    fn slice(&self, kind: SliceKind) -> &'a [f64] {
        &self.params[self.layout.find(kind).range()]
    }

    fn matrix(&self, kind: SliceKind, k: usize) -> ArrayView2<'a, f64> {
        let sl = self.layout.find(kind);
        let (rows, cols) = match sl.shape.as_slice() {
            [_, o, i] => (*o, *i),
            [o, i] => (*o, *i),
            _ => unreachable!("weight slices are 2-D or 3-D"),
        };
        let start = sl.offset + k * rows * cols;
        ArrayView2::from_shape((rows, cols), &self.params[start..start + rows * cols])
            .expect("slice length matches shape")
    }

    pub fn forward(&self, input: &BatchInput) -> BatchCache {
        let comps = input.comps;
        let rows = input.samples * comps;
        let c = &self.arch.conv;
        let f_conv = conv_derivs(c.activation);
        let mut conv_in = Vec::with_capacity(c.layers);
        let mut conv_pre = Vec::with_capacity(c.layers);
        let mut h = input.positions.clone();
        for layer in 0..c.layers {
            let bias = self.slice(SliceKind::ConvBias { layer });
            let mut pre: [Array2<f64>; INPUT_LEN] =
                std::array::from_fn(|_| Array2::zeros((rows, c.channels)));
            for (i, out) in pre.iter_mut().enumerate() {
                for k in 0..c.kernel_size.min(INPUT_LEN - i) {
                    let w = self.matrix(SliceKind::ConvFilter { layer }, k);
                    general_mat_mul(1.0, &h[i + k], &w.t(), 1.0, out);
                }
                add_bias_to_values(out, bias, comps);
            }
            let next = std::array::from_fn(|i| act_forward(&pre[i], comps, f_conv));
            conv_in.push(std::mem::replace(&mut h, next));
            conv_pre.push(pre);
        }

        let mut feat = (&h[0] + &h[1] + &h[2]) * (1.0 / INPUT_LEN as f64);
        let f_mlp = mlp_derivs(self.arch.mlp.activation);
        let mut dense_in = Vec::new();
        let mut dense_pre = Vec::new();
        for layer in 0..self.arch.mlp.widths.len() {
            let w = self.matrix(SliceKind::DenseWeight { layer }, 0);
            let mut pre = Array2::zeros((rows, w.nrows()));
            general_mat_mul(1.0, &feat, &w.t(), 0.0, &mut pre);
            add_bias_to_values(&mut pre, self.slice(SliceKind::DenseBias { layer }), comps);
            let next = act_forward(&pre, comps, f_mlp);
            dense_in.push(std::mem::replace(&mut feat, next));
            dense_pre.push(pre);
        }
        let w = self.matrix(SliceKind::OutputWeight, 0);
        let mut out = Array2::zeros((rows, 1));
        general_mat_mul(1.0, &feat, &w.t(), 0.0, &mut out);
        add_bias_to_values(&mut out, self.slice(SliceKind::OutputBias), comps);

        BatchCache {
            comps,
            conv_in,
            conv_pre,
            dense_in,
            dense_pre,
            head_in: feat,
            output: out.into_raw_vec_and_offset().0,
        }
    }

    /// Accumulates `sum_r d_out[r] * d output[r] / d params` into `grad`.
    pub fn backward(&self, cache: &BatchCache, d_out: &[f64], grad: &mut [f64]) -> Result<()> {
        let comps = cache.comps;
        let rows = cache.output.len();
        if d_out.len() != rows || grad.len() != self.params.len() {
            return Err(Error::Shape(format!(
                "backward: {} adjoints for {rows} outputs, {} gradient slots for {} params",
                d_out.len(),
                grad.len(),
                self.params.len()
            )));
        }
        let d_out = ArrayView2::from_shape((rows, 1), d_out).expect("column vector");
        let layout = &self.layout;
        let mut grad_slice = |kind: SliceKind, k: usize, g: &Array2<f64>| {
            let sl = layout.find(kind);
            let n = g.len();
            let start = sl.offset + k * n;
            for (dst, v) in grad[start..start + n].iter_mut().zip(g.iter()) {
                *dst += v;
            }
        };

        // output affine
        let w = self.matrix(SliceKind::OutputWeight, 0);
        let mut gw = Array2::zeros(w.raw_dim());
        general_mat_mul(1.0, &d_out.t(), &cache.head_in, 0.0, &mut gw);
        grad_slice(SliceKind::OutputWeight, 0, &gw);
        let mut gb = [0.0];
        bias_grad(&d_out.to_owned(), comps, &mut gb);
        grad_slice(SliceKind::OutputBias, 0, &Array2::from_elem((1, 1), gb[0]));
        let mut d_feat = Array2::zeros(cache.head_in.raw_dim());
        general_mat_mul(1.0, &d_out, &w, 0.0, &mut d_feat);

        let f_mlp = mlp_derivs(self.arch.mlp.activation);
        for layer in (0..self.arch.mlp.widths.len()).rev() {
            let d_pre = act_backward(&cache.dense_pre[layer], &d_feat, comps, f_mlp);
            let w = self.matrix(SliceKind::DenseWeight { layer }, 0);
            let mut gw = Array2::zeros(w.raw_dim());
            general_mat_mul(1.0, &d_pre.t(), &cache.dense_in[layer], 0.0, &mut gw);
            grad_slice(SliceKind::DenseWeight { layer }, 0, &gw);
            let mut gb = vec![0.0; w.nrows()];
            bias_grad(&d_pre, comps, &mut gb);
            grad_slice(
                SliceKind::DenseBias { layer },
                0,
                &Array2::from_shape_vec((1, gb.len()), gb).expect("row"),
            );
            let mut d_in = Array2::zeros(cache.dense_in[layer].raw_dim());
            general_mat_mul(1.0, &d_pre, &w, 0.0, &mut d_in);
            d_feat = d_in;
        }

        // average pooling
        let pooled = d_feat * (1.0 / INPUT_LEN as f64);
        let mut d_h: [Array2<f64>; INPUT_LEN] = std::array::from_fn(|_| pooled.clone());
        let c = &self.arch.conv;
        let f_conv = conv_derivs(c.activation);
        for layer in (0..c.layers).rev() {
            let d_pre: [Array2<f64>; INPUT_LEN] = std::array::from_fn(|i| {
                act_backward(&cache.conv_pre[layer][i], &d_h[i], comps, f_conv)
            });
            let x = &cache.conv_in[layer];
            let mut gb = vec![0.0; c.channels];
            for d in &d_pre {
                bias_grad(d, comps, &mut gb);
            }
            grad_slice(
                SliceKind::ConvBias { layer },
                0,
                &Array2::from_shape_vec((1, gb.len()), gb).expect("row"),
            );
            let mut d_x: [Array2<f64>; INPUT_LEN] =
                std::array::from_fn(|_| Array2::zeros(x[0].raw_dim()));
            for k in 0..c.kernel_size.min(INPUT_LEN) {
                let w = self.matrix(SliceKind::ConvFilter { layer }, k);
                let mut gw = Array2::zeros(w.raw_dim());
                for i in 0..INPUT_LEN - k {
                    general_mat_mul(1.0, &d_pre[i].t(), &x[i + k], 1.0, &mut gw);
                    if layer > 0 {
                        general_mat_mul(1.0, &d_pre[i], &w, 1.0, &mut d_x[i + k]);
                    }
                }
                grad_slice(SliceKind::ConvFilter { layer }, k, &gw);
            }
            d_h = d_x;
        }
        Ok(())
    }

    /// Output jets for many samples, evaluated in chunks to bound memory.
    pub fn eval_jets(&self, points: &[[Jet2; INPUT_LEN]]) -> Vec<Jet2> {
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(EVAL_CHUNK) {
            let cache = self.forward(&BatchInput::from_jets(chunk));
            out.extend((0..chunk.len()).map(|s| cache.jet(s)));
        }
        out
    }

    pub fn eval_values(&self, points: &[[f64; INPUT_LEN]]) -> Vec<f64> {
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(EVAL_CHUNK) {
            out.extend(self.forward(&BatchInput::from_values(chunk)).output);
        }
        out
    }
}

const EVAL_CHUNK: usize = 512;
