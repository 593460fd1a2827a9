//! Degree-2 ridge decompositions: a quadratic in `x` written as
//! `sum_i p_i(xi_i . x)` over a fixed bank of unit directions.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub type AmbientVec = [f64; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBank {
    pub xi: Vec<AmbientVec>,
}

impl FeatureBank {
    pub fn new(xi: Vec<AmbientVec>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::Precondition("feature bank is empty".into()));
        }
        for v in &xi {
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!("feature {v:?} has norm {n}")));
            }
        }
        Ok(FeatureBank { xi })
    }

    /// `{e1, e2, e3, (e1+e2)/sqrt2, (e1+e3)/sqrt2, (e2+e3)/sqrt2}`.
    pub fn quadratic_bank() -> Self {
        let s = FRAC_1_SQRT_2;
        FeatureBank {
            xi: vec![
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [s, s, 0.0],
                [s, 0.0, s],
                [0.0, s, s],
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `p_i(t) = c0 + c1 t + c2 t^2` per feature.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeDecomposition {
    pub bank: FeatureBank,
    pub coeffs: Vec<[f64; 3]>,
}

impl RidgeDecomposition {
    pub fn eval(&self, x: &AmbientVec) -> f64 {
        self.bank
            .xi
            .iter()
            .zip(&self.coeffs)
            .map(|(xi, c)| {
                let t: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
                c[0] + c[1] * t + c[2] * t * t
            })
            .sum()
    }
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Decomposes `x^T Q x + b . x + c` (`Q` symmetric) over the quadratic bank,
/// using `x_i x_j = (xi_ij . x)^2 - (x_i^2 + x_j^2) / 2`.
pub fn ridge_decompose_quadratic(q: &[[f64; 3]; 3], b: &AmbientVec, c: f64) -> RidgeDecomposition {
    let mut coeffs = vec![[0.0; 3]; 6];
    for i in 0..3 {
        coeffs[i][2] = q[i][i];
        coeffs[i][1] = b[i];
    }
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        let cross = q[i][j] + q[j][i];
        coeffs[3 + p][2] = cross;
        coeffs[i][2] -= cross / 2.0;
        coeffs[j][2] -= cross / 2.0;
    }
    coeffs[0][0] = c;
    RidgeDecomposition {
        bank: FeatureBank::quadratic_bank(),
        coeffs,
    }
}

/// `||x - y||^2 = ||x||^2 - 2 y . x + ||y||^2`.
pub fn ridge_decompose_sqdist(y: &AmbientVec) -> RidgeDecomposition {
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let b = [-2.0 * y[0], -2.0 * y[1], -2.0 * y[2]];
    ridge_decompose_quadratic(&id, &b, y.iter().map(|v| v * v).sum())
}
