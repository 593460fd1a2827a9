use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Scalar field abstraction shared by plain floats, jets and tape variables.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(x: f64) -> Self;

    /// The plain value carried by this scalar.
    fn value(&self) -> f64;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn erf(self) -> Self;
    fn powf(self, p: f64) -> Self;

    /// `max(t, 0)` with derivative 0 at the kink.
    fn relu(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn square(self) -> Self {
        self * self
    }

    /// `t * Phi(t)` with `Phi` the standard normal CDF.
    fn gelu(self) -> Self {
        let phi = ((self * FRAC_1_SQRT_2).erf() + 1.0) * 0.5;
        self * phi
    }

    fn gelu2(self) -> Self {
        self.gelu().square()
    }

    /// ReQU `(t_+)^2`.
    fn requ(self) -> Self {
        self.relu().square()
    }
}

impl Real for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn erf(self) -> Self {
        libm::erf(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    fn gelu(self) -> Self {
        self * normal_cdf(self)
    }
}

pub fn normal_cdf(t: f64) -> f64 {
    0.5 * (1.0 + libm::erf(t * FRAC_1_SQRT_2))
}

pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// GeLU and its first three derivatives at `t`.
pub fn gelu_derivs(t: f64) -> [f64; 4] {
    let cdf = normal_cdf(t);
    let pdf = normal_pdf(t);
    [
        t * cdf,
        cdf + t * pdf,
        (2.0 - t * t) * pdf,
        (t * t * t - 4.0 * t) * pdf,
    ]
}

/// GeLU² and its first three derivatives at `t`.
pub fn gelu2_derivs(t: f64) -> [f64; 4] {
    let [g, g1, g2, g3] = gelu_derivs(t);
    [
        g * g,
        2.0 * g * g1,
        2.0 * (g1 * g1 + g * g2),
        6.0 * g1 * g2 + 2.0 * g * g3,
    ]
}

pub fn relu_derivs(t: f64) -> [f64; 4] {
    if t > 0.0 {
        [t, 1.0, 0.0, 0.0]
    } else {
        [0.0; 4]
    }
}

pub fn requ_derivs(t: f64) -> [f64; 4] {
    if t > 0.0 {
        [t * t, 2.0 * t, 2.0, 0.0]
    } else {
        [0.0; 4]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, t: f64) -> f64 {
        let h = 1e-5 * t.abs().max(1.0);
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    #[test]
    fn activation_derivative_tables_match_finite_differences() {
        let tables: [fn(f64) -> [f64; 4]; 2] = [gelu_derivs, gelu2_derivs];
        for table in tables {
            for &t in &[-2.3, -0.7, 0.0, 0.4, 1.9] {
                let d = table(t);
                for order in 0..3 {
                    let fd = central(|x| table(x)[order], t);
                    assert!(
                        (fd - d[order + 1]).abs() <= 1e-6 * d[order + 1].abs().max(1.0),
                        "order {} at {t}: fd {fd} vs {}",
                        order + 1,
                        d[order + 1]
                    );
                }
            }
        }
    }

    #[test]
    fn requ_second_derivative_convention() {
        assert_eq!(requ_derivs(0.0), [0.0; 4]);
        assert_eq!(requ_derivs(1.5), [2.25, 3.0, 2.0, 0.0]);
        assert_eq!(relu_derivs(0.0)[1], 0.0);
    }

    #[test]
    fn default_gelu_matches_specialised() {
        for &t in &[-1.0, 0.0, 0.5, 3.0] {
            let generic = ((Real::erf(t * FRAC_1_SQRT_2) + 1.0) * 0.5) * t;
            assert!((Real::gelu(t) - generic).abs() < 1e-15);
        }
    }
}
