//! Matérn kernels `phi(r) = 2^(1-tau)/Gamma(tau) r^nu K_nu(r)`, `nu = tau - D/2`,
//! their series decomposition `r^nu K_nu(r) = A(r^2) + r^(2 nu) B(r^2)` and
//! the truncated approximant that replaces `u^nu` near the origin by a
//! Taylor patch blended in with a B-spline cutoff.

use std::f64::consts::PI;

use super::cutoff::{bspline_cutoff, CutoffSpec};
use crate::error::{Error, Result};

/// Distance to the nearest integer below which the decomposition is refused.
pub const NEAR_INTEGER_TOL: f64 = 1e-3;
pub const MAX_SERIES_DEGREE: usize = 60;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Power-series coefficients of `1/Gamma(z) = sum_k C[k-1] z^k`.
const RECIP_GAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary values for `|mu| <= 1/2`:
/// `gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu)`, `gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2`,
/// `1/G(1+mu)`, `1/G(1-mu)`; series form, no cancellation at `mu -> 0`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/G(1+x) = sum_k C[k] x^k with C shifted by one
    let (mut gam1, mut gam2) = (0.0, 0.0);
    for (k, &c) in RECIP_GAMMA.iter().enumerate().rev() {
        // term c x^k of 1/G(1+x): even k -> gam2, odd k -> -gam1 (divided by x)
        if k % 2 == 0 {
            gam2 = gam2 * mu * mu + c;
        } else {
            gam1 = gam1 * mu * mu - c;
        }
    }
    // gam1 above accumulates -sum_{odd k} c_k mu^(k-1)
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

/// Modified Bessel function of the second kind `K_nu(x)`, `nu >= 0`, `x > 0`.
///
/// Temme's series for `x < 2`, Steed's continued fraction otherwise, then
/// upward recurrence in the order.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0 && nu >= 0.0, "bessel_k needs x > 0, nu >= 0");
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut k_mu, mut k_mu1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * p - fi * del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        k_mu = sum;
        k_mu1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let (mut q1, mut q2) = (0.0, 1.0);
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    k_mu
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaternKernel {
    pub tau: f64,
    pub ambient_dim: usize,
    pub nu: f64,
}

impl MaternKernel {
    pub fn new(tau: f64, ambient_dim: usize) -> Result<Self> {
        let nu = tau - ambient_dim as f64 / 2.0;
        if !(nu > 0.0) {
            return Err(Error::Precondition(format!(
                "Matérn smoothness tau = {tau} must exceed D/2 = {}",
                ambient_dim as f64 / 2.0
            )));
        }
        Ok(MaternKernel {
            tau,
            ambient_dim,
            nu,
        })
    }

    /// `2^(1 - tau) / Gamma(tau)`.
    pub fn prefactor(&self) -> f64 {
        2f64.powf(1.0 - self.tau) / gamma(self.tau)
    }

    /// `r^nu K_nu(r)`, with its limit `2^(nu-1) Gamma(nu)` at `r = 0`.
    pub fn scaled_bessel(&self, r: f64) -> f64 {
        let nu = self.nu;
        let closed = |poly: f64| (PI / 2.0).sqrt() * (-r).exp() * poly;
        if nu == 0.5 {
            return closed(1.0);
        }
        if nu == 1.5 {
            return closed(1.0 + r);
        }
        if nu == 2.5 {
            return closed(r * r + 3.0 * r + 3.0);
        }
        if r == 0.0 {
            return 2f64.powf(nu - 1.0) * gamma(nu);
        }
        r.powf(nu) * bessel_k(nu, r)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.prefactor() * self.scaled_bessel(r.abs())
    }

    pub fn value_at_zero(&self) -> f64 {
        self.prefactor() * 2f64.powf(self.nu - 1.0) * gamma(self.nu)
    }

    fn check_decomposable(&self, degree: usize) -> Result<()> {
        let dist = (self.nu - self.nu.round()).abs();
        if dist < NEAR_INTEGER_TOL {
            return Err(Error::NearInteger {
                nu: self.nu,
                tol: NEAR_INTEGER_TOL,
            });
        }
        if degree > MAX_SERIES_DEGREE {
            return Err(Error::Precondition(format!(
                "series degree {degree} exceeds {MAX_SERIES_DEGREE}"
            )));
        }
        Ok(())
    }

    /// Truncated series `(A_N(u), B_N(u))` with
    /// `r^nu K_nu(r) ~ A_N(r^2) + r^(2 nu) B_N(r^2)`.
    pub fn decompose(&self, u: f64, degree: usize) -> Result<(f64, f64)> {
        self.check_decomposable(degree)?;
        let nu = self.nu;
        let pref = PI / (2.0 * (PI * nu).sin());
        let mut ta = 2f64.powf(nu) / gamma(1.0 - nu);
        let mut tb = 2f64.powf(-nu) / gamma(1.0 + nu);
        let (mut a, mut b) = (ta, tb);
        for m in 1..=degree {
            let fm = m as f64;
            ta *= u / (4.0 * fm * (fm - nu));
            tb *= u / (4.0 * fm * (fm + nu));
            a += ta;
            b += tb;
        }
        Ok((pref * a, -pref * b))
    }

    /// `A_N(r^2) + r^(2 nu) B_N(r^2)`.
    pub fn reconstruct(&self, r: f64, degree: usize) -> Result<f64> {
        let (a, b) = self.decompose(r * r, degree)?;
        Ok(a + r.powf(2.0 * self.nu) * b)
    }
}

/// `phi~(u) = c (P_A(u) + u~^nu(u) P_B(u))` with
/// `u~^nu = chi_p(u/eta) Q_{eta,m}(u) + (1 - chi_p(u/eta)) u^nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedApproximant {
    pub eta: f64,
    pub degree: usize,
    pub cutoff: CutoffSpec,
    pub taylor_degree: usize,
}

impl TruncatedApproximant {
    pub fn new(eta: f64, degree: usize, cutoff: CutoffSpec, taylor_degree: usize) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Precondition(format!("eta must lie in (0, 1), got {eta}")));
        }
        Ok(TruncatedApproximant {
            eta,
            degree,
            cutoff,
            taylor_degree,
        })
    }

    /// Degree-`m` Taylor polynomial of `u^nu` at `eta`.
    pub fn taylor_patch(&self, nu: f64, u: f64) -> f64 {
        let h = u - self.eta;
        let mut binom = 1.0;
        let mut sum = 0.0;
        let mut hp = 1.0;
        for i in 0..=self.taylor_degree {
            if i > 0 {
                binom *= (nu - (i - 1) as f64) / i as f64;
                hp *= h;
            }
            sum += binom * self.eta.powf(nu - i as f64) * hp;
        }
        sum
    }

    pub fn blended_power(&self, nu: f64, u: f64) -> f64 {
        let chi = bspline_cutoff(self.cutoff, u / self.eta);
        let direct = if chi == 1.0 { 0.0 } else { u.powf(nu) };
        let patch = if chi == 0.0 { 0.0 } else { self.taylor_patch(nu, u) };
        chi * patch + (1.0 - chi) * direct
    }

    pub fn eval(&self, k: &MaternKernel, u: f64) -> Result<f64> {
        let (a, b) = k.decompose(u, self.degree)?;
        Ok(k.prefactor() * (a + self.blended_power(k.nu, u) * b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bessel_k_half_integer_closed_forms() {
        for &x in &[1e-6, 0.01, 0.5, 1.0, 1.9, 2.0, 2.1, 5.0, 20.0] {
            let k12 = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x), k12) < 1e-13, "x = {x}");
            assert!(rel(bessel_k(1.5, x), k12 * (1.0 + 1.0 / x)) < 1e-13);
            assert!(rel(bessel_k(2.5, x), k12 * (1.0 + 3.0 / x + 3.0 / (x * x))) < 1e-13);
        }
    }

    #[test]
    fn bessel_k_integer_orders() {
        // reference values K_0(1), K_1(1), K_1(2.5), K_2(0.3)
        assert!(rel(bessel_k(0.0, 1.0), 0.421_024_438_240_708_3) < 1e-13);
        assert!(rel(bessel_k(1.0, 1.0), 0.601_907_230_197_234_6) < 1e-13);
        assert!(rel(bessel_k(1.0, 2.5), 0.073_890_816_347_747_01) < 1e-12);
        assert!(rel(bessel_k(2.0, 0.3), 21.745_740_283_593_13) < 1e-12);
    }

    #[test]
    fn matern_half_integer_values() {
        let k = MaternKernel::new(2.0, 3).unwrap();
        assert_eq!(k.nu, 0.5);
        assert!(rel(k.eval(0.0), (PI / 8.0).sqrt()) < 1e-15);
        assert!(rel(k.eval(0.0), 0.62666) < 1e-5);
        assert!(rel(k.value_at_zero(), k.eval(0.0)) < 1e-14);
        let k = MaternKernel::new(3.0, 3).unwrap();
        let mut prev = k.eval(0.0);
        for i in 1..=1000 {
            let v = k.eval(i as f64 * 0.01);
            assert!(v < prev);
            prev = v;
        }
        assert!(MaternKernel::new(1.5, 3).is_err());
    }

    #[test]
    fn general_nu_limit_at_zero() {
        // the correction to the limit is relative O(r^(2 nu)); nu >= 1/2 here
        for tau in [2.1, 2.5, 2.9, 3.7] {
            let k = MaternKernel::new(tau, 3).unwrap();
            assert!(rel(k.eval(1e-8), k.value_at_zero()) < 1e-6, "tau = {tau}");
        }
    }

    #[test]
    fn decomposition_examples() {
        let k = MaternKernel::new(2.0, 3).unwrap();
        let (a0, _) = k.decompose(0.0, 30).unwrap();
        assert!(rel(a0, (PI / 2.0).sqrt()) < 1e-14);
        let v = k.reconstruct(1.0, 30).unwrap();
        assert!(rel(v, (PI / 2.0).sqrt() * (-1f64).exp()) < 1e-10);
        assert!(rel(v, 0.46108) < 5e-5);

        let near = MaternKernel::new(2.5 + 5e-4, 3).unwrap();
        assert!(matches!(near.decompose(0.5, 10), Err(Error::NearInteger { .. })));
        assert!(k.decompose(0.5, 61).is_err());
    }

    #[test]
    fn decomposition_matches_bessel_for_general_nu() {
        let k = MaternKernel::new(1.5 + 1.6, 3).unwrap();
        for i in 1..=30 {
            let r = 0.1 * i as f64;
            let want = k.scaled_bessel(r);
            assert!(rel(k.reconstruct(r, 40).unwrap(), want) < 1e-10, "r = {r}");
        }
    }

    fn max_reconstruction_error(k: &MaternKernel, degree: usize) -> f64 {
        (0..=290)
            .map(|i| {
                let r = 0.1 + 0.01 * i as f64;
                (k.reconstruct(r, degree).unwrap() - k.scaled_bessel(r)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn decomposition_converges_geometrically() {
        let k = MaternKernel::new(1.5 + 1.5 + 0.1, 3).unwrap();
        let errs: Vec<f64> = [5, 10, 15, 20].iter().map(|&n| max_reconstruction_error(&k, n)).collect();
        // stop once the previous error has reached rounding level
        for w in errs.windows(2).filter(|w| w[0] > 1e-12) {
            assert!(w[1] <= 0.5 * w[0], "{errs:?}");
        }
    }

    #[test]
    fn reconstruction_error_grows_near_integers() {
        let err = |nu: f64| {
            let k = MaternKernel::new(nu + 1.5, 3).unwrap();
            (0..=290)
                .map(|i| {
                    let r = 0.1 + 0.01 * i as f64;
                    (k.reconstruct(r, 30).unwrap() - k.scaled_bessel(r)).abs() / k.scaled_bessel(r)
                })
                .fold(0.0, f64::max)
        };
        assert!(err(1.5 + 1e-2) >= err(1.5 + 1e-1));
        assert!(err(1.0 + 1e-2) >= err(1.0 + 1e-1));
        assert!(err(2.0 - 1e-2) >= err(2.0 - 1e-1));
    }

    #[test]
    fn truncated_kernel_plateaus() {
        let k = MaternKernel::new(1.5 + 1.5 - 0.01, 3).unwrap();
        let t = TruncatedApproximant::new(0.01, 40, CutoffSpec { p: 2 }, 4).unwrap();
        // beyond 2 eta the cutoff vanishes and u^nu is evaluated directly
        let mut worst = 0.0f64;
        let r0 = (2.0 * t.eta).sqrt();
        for i in 0..=400 {
            let r = r0 + (2.0 - r0) * i as f64 / 400.0;
            let err = (t.eval(&k, r * r).unwrap() - k.eval(r)).abs();
            worst = worst.max(err);
        }
        assert!(worst <= 1e-6, "{worst}");
        // below eta the patch alone is used
        let u = 0.5 * t.eta;
        let (a, b) = k.decompose(u, 40).unwrap();
        let want = k.prefactor() * (a + t.taylor_patch(k.nu, u) * b);
        assert_eq!(t.eval(&k, u).unwrap(), want);
    }

    #[test]
    fn near_origin_error_mass_shrinks_with_eta() {
        let k = MaternKernel::new(1.5 + 1.5 - 0.01, 3).unwrap();
        let mass = |eta: f64| {
            let t = TruncatedApproximant::new(eta, 40, CutoffSpec { p: 2 }, 2).unwrap();
            let top = (2.0 * eta).sqrt();
            let n = 2000;
            let h = top / n as f64;
            (0..n)
                .map(|i| {
                    let r = (i as f64 + 0.5) * h;
                    let d = t.eval(&k, r * r).unwrap() - k.eval(r);
                    d * d * r * r * h
                })
                .sum::<f64>()
        };
        let m: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&e| mass(e)).collect();
        assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");
    }
}
