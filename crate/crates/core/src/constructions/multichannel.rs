//! An exact ReLU CNN computing inner products `<xi_r, x>` for a bank of
//! directions. Feature `r` owns three channels: the positive and negative
//! parts of a running sum, and a tail channel that shifts `x + B` left by
//! `S - 1` positions per layer so that every coordinate reaches position 0.
//! Depth is `L = ceil((D - 1)/(S - 1))`.

use crate::error::{Error, Result};
use crate::network::forward::conv_layer;

/// One convolution layer; `filter` is indexed `[k][out][in]`, activation ReLU.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvWeights {
    pub in_ch: usize,
    pub out_ch: usize,
    pub filter: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvWeights {
    fn zeros(kernel: usize, in_ch: usize, out_ch: usize) -> Self {
        ConvWeights {
            in_ch,
            out_ch,
            filter: vec![0.0; kernel * out_ch * in_ch],
            bias: vec![0.0; out_ch],
        }
    }

    fn set(&mut self, k: usize, out: usize, inp: usize, w: f64) {
        self.filter[(k * self.out_ch + out) * self.in_ch + inp] = w;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerProductNet {
    pub dim: usize,
    pub kernel: usize,
    pub input_bound: f64,
    pub layers: Vec<ConvWeights>,
    /// Output `r` reads `h[pos] - h[neg]` at position 0 of the last layer.
    pub readout: Vec<(usize, usize)>,
}

impl InnerProductNet {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn nonzero_filter_entries(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.filter.iter().filter(|w| **w != 0.0).count())
            .sum()
    }

    /// Exact for `max |x_t| <= input_bound`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!("expected {} inputs, got {}", self.dim, x.len())));
        }
        let mut h: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        for l in &self.layers {
            h = conv_layer(&h, &l.filter, &l.bias, self.kernel, l.out_ch);
            for v in h.iter_mut().flatten() {
                *v = v.max(0.0);
            }
        }
        Ok(self.readout.iter().map(|&(p, n)| h[0][p] - h[0][n]).collect())
    }
}

pub fn depth_for(dim: usize, kernel: usize) -> usize {
    (dim - 1).div_ceil(kernel - 1)
}

/// `5L + 2D - 4` filter entries per feature with all coordinates nonzero.
pub fn nonzero_count_per_feature(dim: usize, kernel: usize) -> usize {
    5 * depth_for(dim, kernel) + 2 * dim - 4
}

pub fn multichannel_inner_product_net(
    features: &[Vec<f64>],
    dim: usize,
    kernel: usize,
    input_bound: f64,
) -> Result<InnerProductNet> {
    if features.is_empty() {
        return Err(Error::Precondition("feature bank is empty".into()));
    }
    if dim < 2 || kernel < 2 || kernel > dim {
        return Err(Error::Precondition(format!(
            "filter size {kernel} must lie in [2, {dim}] with D >= 2"
        )));
    }
    if let Some(f) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::Shape(format!("feature of length {} in dimension {dim}", f.len())));
    }
    if !(input_bound >= 0.0) {
        return Err(Error::Precondition(format!("input bound {input_bound} must be >= 0")));
    }
    let m = features.len();
    let depth = depth_for(dim, kernel);
    let ch = 3 * m;
    let b = input_bound;
    let mut layers = Vec::with_capacity(depth);

    let mut first = ConvWeights::zeros(kernel, 1, ch);
    for (r, xi) in features.iter().enumerate() {
        let (pos, neg, tail) = (3 * r, 3 * r + 1, 3 * r + 2);
        for k in 0..kernel {
            first.set(k, pos, 0, xi[k]);
            first.set(k, neg, 0, -xi[k]);
        }
        first.set(kernel - 1, tail, 0, 1.0);
        first.bias[tail] = b;
    }
    layers.push(first);

    for l in 1..depth {
        let mut w = ConvWeights::zeros(kernel, ch, ch);
        for (r, xi) in features.iter().enumerate() {
            let (pos, neg, tail) = (3 * r, 3 * r + 1, 3 * r + 2);
            w.set(0, pos, pos, 1.0);
            w.set(0, pos, neg, -1.0);
            w.set(0, neg, pos, -1.0);
            w.set(0, neg, neg, 1.0);
            let mut shift = 0.0;
            for k in 1..kernel {
                let t = l * (kernel - 1) + k;
                if t < dim {
                    w.set(k, pos, tail, xi[t]);
                    w.set(k, neg, tail, -xi[t]);
                    shift += xi[t] * b;
                }
            }
            w.bias[pos] = -shift;
            w.bias[neg] = shift;
            w.set(kernel - 1, tail, tail, 1.0);
        }
        layers.push(w);
    }

    Ok(InnerProductNet {
        dim,
        kernel,
        input_bound,
        layers,
        readout: (0..m).map(|r| (3 * r, 3 * r + 1)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / n).collect()
    }

    #[test]
    fn single_coordinate_feature() {
        let net = multichannel_inner_product_net(&[vec![1.0, 0.0, 0.0]], 3, 2, 1.0).unwrap();
        assert_eq!(net.depth(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!((net.eval(&x).unwrap()[0] - x[0]).abs() < 1e-15);
        }
        assert_eq!(net.eval(&[0.0; 3]).unwrap(), vec![0.0]);
    }

    #[test]
    fn random_banks_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(d, s) in &[(2, 2), (3, 2), (3, 3), (7, 3), (10, 4), (9, 9)] {
            let feats: Vec<Vec<f64>> = (0..5).map(|_| random_unit(&mut rng, d)).collect();
            let net = multichannel_inner_product_net(&feats, d, s, 1.0).unwrap();
            assert_eq!(net.depth(), depth_for(d, s));
            for _ in 0..200 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let out = net.eval(&x).unwrap();
                for (o, xi) in out.iter().zip(&feats) {
                    let want: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
                    assert!((o - want).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn nonzero_count_is_linear_in_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(d, s) in &[(3, 2), (8, 3), (12, 5)] {
            for m in 1..=6 {
                let feats: Vec<Vec<f64>> = (0..m).map(|_| random_unit(&mut rng, d)).collect();
                let net = multichannel_inner_product_net(&feats, d, s, 1.0).unwrap();
                assert_eq!(net.nonzero_filter_entries(), m * nonzero_count_per_feature(d, s));
            }
        }
    }

    #[test]
    fn rejects_bad_filter_sizes() {
        let f = vec![vec![1.0, 0.0, 0.0]];
        assert!(multichannel_inner_product_net(&f, 3, 1, 1.0).is_err());
        assert!(multichannel_inner_product_net(&f, 3, 4, 1.0).is_err());
        assert!(multichannel_inner_product_net(&[], 3, 2, 1.0).is_err());
    }
}
