//! Exact products by ReQU networks: `xy = (s(x+y) + s(-x-y) - s(x-y) - s(-x+y)) / 4`
//! with `s(t) = max(t, 0)^2`, arranged as a binary tree of depth `ceil(log2 n)`.

use crate::error::{Error, Result};

pub fn requ(t: f64) -> f64 {
    let r = t.max(0.0);
    r * r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerActivation {
    Requ,
    Identity,
}

/// Affine map `y = W x + b` followed by an activation; `weights` is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: LayerActivation,
}

impl DenseLayer {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                let pre = self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                match self.activation {
                    LayerActivation::Requ => requ(pre),
                    LayerActivation::Identity => pre,
                }
            })
            .collect()
    }
}

/// An explicit ReQU network description.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductNetwork {
    pub inputs: usize,
    pub layers: Vec<DenseLayer>,
}

impl ProductNetwork {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.inputs {
            return Err(Error::Shape(format!(
                "product network takes {} inputs, got {}",
                self.inputs,
                x.len()
            )));
        }
        let mut h = x.to_vec();
        for layer in &self.layers {
            h = layer.apply(&h);
        }
        Ok(h[0])
    }

    pub fn requ_depth(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.activation == LayerActivation::Requ)
            .count()
    }
}

/// One tree level: `k` values to `ceil(k/2)` pairwise products. An odd
/// trailing value is multiplied by the constant 1 supplied through the bias.
fn product_level(k: usize) -> (DenseLayer, DenseLayer) {
    let pairs = k.div_ceil(2);
    let hidden = 4 * pairs;
    let mut w = vec![0.0; hidden * k];
    let mut b = vec![0.0; hidden];
    const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    for p in 0..pairs {
        let (i, j) = (2 * p, 2 * p + 1);
        for (g, &(sx, sy)) in SIGNS.iter().enumerate() {
            let row = 4 * p + g;
            w[row * k + i] = sx;
            if j < k {
                w[row * k + j] = sy;
            } else {
                b[row] = sy;
            }
        }
    }
    let expand = DenseLayer {
        inputs: k,
        outputs: hidden,
        weights: w,
        bias: b,
        activation: LayerActivation::Requ,
    };
    let mut c = vec![0.0; pairs * hidden];
    for p in 0..pairs {
        for (g, coef) in [0.25, 0.25, -0.25, -0.25].into_iter().enumerate() {
            c[p * hidden + 4 * p + g] = coef;
        }
    }
    let combine = DenseLayer {
        inputs: hidden,
        outputs: pairs,
        weights: c,
        bias: vec![0.0; pairs],
        activation: LayerActivation::Identity,
    };
    (expand, combine)
}

pub fn requ_product_network(n: usize) -> Result<ProductNetwork> {
    if n < 2 {
        return Err(Error::Precondition(format!("product network needs n >= 2 inputs, got {n}")));
    }
    let mut layers = Vec::new();
    let mut k = n;
    while k > 1 {
        let (expand, combine) = product_level(k);
        k = combine.outputs;
        layers.push(expand);
        layers.push(combine);
    }
    Ok(ProductNetwork { inputs: n, layers })
}

/// `prod max(|x_i|, 1)`: the scale of the rounding error of a product tree.
/// Each gadget loses `eps * max(|x|, |y|)^2` to cancellation, so errors are
/// bounded relative to this rather than to `|prod x_i|`.
pub fn product_error_scale(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x.abs().max(1.0)).product()
}

pub fn requ_product(xs: &[f64]) -> Result<f64> {
    requ_product_network(xs.len())?.eval(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        assert_eq!(requ_product(&[2.0, 3.0]).unwrap(), 6.0);
        assert!((requ_product(&[1.5, -2.0, 4.0]).unwrap() + 12.0).abs() < 1e-12);
        assert_eq!(requ_product(&[1.0, 0.0, 7.0, -3.0]).unwrap(), 0.0);
        assert!(requ_product(&[1.0]).is_err());
    }

    #[test]
    fn depth_is_ceil_log2() {
        for (n, d) in [(2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)] {
            assert_eq!(requ_product_network(n).unwrap().requ_depth(), d);
        }
    }

    #[test]
    fn random_products_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(2..=7);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let want: f64 = xs.iter().product();
            let got = requ_product(&xs).unwrap();
            assert!((got - want).abs() <= 1e-12 * product_error_scale(&xs), "{xs:?}");
        }
    }
}
