use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::real::Real;
use crate::error::{Error, Result};
use crate::geometry::ChartPoint;

/// Second-order truncated Taylor expansion in two chart directions.
///
/// The Hessian is stored once as `[h_xx, h_xy, h_yy]`, so it is symmetric by
/// construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub val: T,
    pub grad: [T; 2],
    pub hess: [T; 3],
}

pub type Jet2 = Jet<f64>;

impl<T: Real> Jet<T> {
    pub fn constant(val: T) -> Self {
        let z = T::zero();
        Jet {
            val,
            grad: [z, z],
            hess: [z, z, z],
        }
    }

    /// Coordinate jet for direction `dir` (0 or 1).
    pub fn variable(val: T, dir: usize) -> Self {
        let mut j = Self::constant(val);
        j.grad[dir] = T::cst(1.0);
        j
    }

    pub fn hess_matrix(&self) -> [[T; 2]; 2] {
        [[self.hess[0], self.hess[1]], [self.hess[1], self.hess[2]]]
    }

    /// Components in the order `val, g_x, g_y, h_xx, h_xy, h_yy`.
    pub fn components(&self) -> [T; 6] {
        [
            self.val,
            self.grad[0],
            self.grad[1],
            self.hess[0],
            self.hess[1],
            self.hess[2],
        ]
    }

    pub fn from_components(c: [T; 6]) -> Self {
        Jet {
            val: c[0],
            grad: [c[1], c[2]],
            hess: [c[3], c[4], c[5]],
        }
    }

    /// Faà di Bruno to second order: `f(self)` given `f`, `f'`, `f''` at the value.
    pub fn chain(self, f0: T, f1: T, f2: T) -> Self {
        let [gx, gy] = self.grad;
        Jet {
            val: f0,
            grad: [f1 * gx, f1 * gy],
            hess: [
                f2 * gx * gx + f1 * self.hess[0],
                f2 * gx * gy + f1 * self.hess[1],
                f2 * gy * gy + f1 * self.hess[2],
            ],
        }
    }

    fn recip(self) -> Self {
        let inv = T::cst(1.0) / self.val;
        let inv2 = inv * inv;
        self.chain(inv, -inv2, inv2 * inv * 2.0)
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Jet {
            val: self.val + o.val,
            grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]],
            hess: [
                self.hess[0] + o.hess[0],
                self.hess[1] + o.hess[1],
                self.hess[2] + o.hess[2],
            ],
        }
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet {
            val: -self.val,
            grad: [-self.grad[0], -self.grad[1]],
            hess: [-self.hess[0], -self.hess[1], -self.hess[2]],
        }
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self, o);
        Jet {
            val: a.val * b.val,
            grad: [
                a.val * b.grad[0] + b.val * a.grad[0],
                a.val * b.grad[1] + b.val * a.grad[1],
            ],
            hess: [
                a.val * b.hess[0] + b.val * a.hess[0] + a.grad[0] * b.grad[0] * 2.0,
                a.val * b.hess[1] + b.val * a.hess[1] + a.grad[0] * b.grad[1] + a.grad[1] * b.grad[0],
                a.val * b.hess[2] + b.val * a.hess[2] + a.grad[1] * b.grad[1] * 2.0,
            ],
        }
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real> Add<f64> for Jet<T> {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.val = self.val + c;
        self
    }
}

impl<T: Real> Mul<f64> for Jet<T> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Jet {
            val: self.val * c,
            grad: [self.grad[0] * c, self.grad[1] * c],
            hess: [self.hess[0] * c, self.hess[1] * c, self.hess[2] * c],
        }
    }
}

impl<T: Real> Real for Jet<T> {
    fn cst(x: f64) -> Self {
        Jet::constant(T::cst(x))
    }

    fn value(&self) -> f64 {
        self.val.value()
    }

    fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let inv = T::cst(1.0) / self.val;
        self.chain(self.val.ln(), inv, -(inv * inv))
    }

    fn sin(self) -> Self {
        let (s, c) = (self.val.sin(), self.val.cos());
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = (self.val.sin(), self.val.cos());
        self.chain(c, -s, -c)
    }

    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        let d1 = T::cst(0.5) / r;
        self.chain(r, d1, -(d1 / self.val) * 0.5)
    }

    fn erf(self) -> Self {
        // erf' = 2/sqrt(pi) exp(-t^2), erf'' = -2t erf'
        let d1 = (-(self.val * self.val)).exp() * (2.0 / PI.sqrt());
        self.chain(self.val.erf(), d1, -(self.val * d1) * 2.0)
    }

    fn powf(self, p: f64) -> Self {
        let v = self.val;
        self.chain(
            v.powf(p),
            v.powf(p - 1.0) * p,
            v.powf(p - 2.0) * (p * (p - 1.0)),
        )
    }

    fn relu(self) -> Self {
        if self.val.value() > 0.0 {
            self
        } else {
            Jet::constant(T::zero())
        }
    }

    fn gelu(self) -> Self {
        // Phi' = pdf, pdf' = -t pdf
        let t = self.val;
        let cdf = ((t * FRAC_1_SQRT_2).erf() + 1.0) * 0.5;
        let pdf = (-(t * t) * 0.5).exp() * (1.0 / (2.0 * PI).sqrt());
        self.chain(t * cdf, cdf + t * pdf, (T::cst(2.0) - t * t) * pdf)
    }
}

/// Seed jets for the chart coordinates `(theta, phi)`.
pub fn jet_lift_chart(p: ChartPoint) -> [Jet2; 2] {
    [Jet::variable(p.theta, 0), Jet::variable(p.phi, 1)]
}

/// Elementary functions accepted by [`jet_apply`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    Add,
    Sub,
    Mul,
    Div,
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Erf,
    PowConst(f64),
    Relu,
    Gelu,
}

impl Elementary {
    pub fn arity(self) -> usize {
        match self {
            Elementary::Add | Elementary::Sub | Elementary::Mul | Elementary::Div => 2,
            _ => 1,
        }
    }
}

const DOMAIN_FLOOR: f64 = 1e-300;

/// Checked application of an elementary function to jet arguments.
pub fn jet_apply(f: Elementary, args: &[Jet2]) -> Result<Jet2> {
    if args.len() != f.arity() {
        return Err(Error::Shape(format!(
            "{f:?} takes {} argument(s), got {}",
            f.arity(),
            args.len()
        )));
    }
    let a = args[0];
    Ok(match f {
        Elementary::Add => a + args[1],
        Elementary::Sub => a - args[1],
        Elementary::Mul => a * args[1],
        Elementary::Div => {
            if args[1].val.abs() < DOMAIN_FLOOR {
                return Err(Error::Domain("division by zero".into()));
            }
            a / args[1]
        }
        Elementary::Exp => a.exp(),
        Elementary::Ln => {
            if a.val < DOMAIN_FLOOR {
                return Err(Error::Domain(format!("ln of non-positive value {}", a.val)));
            }
            a.ln()
        }
        Elementary::Sin => a.sin(),
        Elementary::Cos => a.cos(),
        Elementary::Sqrt => {
            if a.val < DOMAIN_FLOOR {
                return Err(Error::Domain(format!("sqrt needs a positive value, got {}", a.val)));
            }
            a.sqrt()
        }
        Elementary::Erf => a.erf(),
        Elementary::PowConst(p) => {
            if a.val <= 0.0 && p.fract() != 0.0 {
                return Err(Error::Domain(format!(
                    "non-integer power {p} of non-positive value {}",
                    a.val
                )));
            }
            a.powf(p)
        }
        Elementary::Relu => a.relu(),
        Elementary::Gelu => a.gelu(),
    })
}
