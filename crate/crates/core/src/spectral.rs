//! Fractional Sobolev penalties for boundary residuals sampled on closed
//! curves.
//!
//! A residual `e` sampled at `M` equidistant arclength points of a curve of
//! length `L` is transformed with a `1/M`-normalised FFT, and the penalty is
//! `sum_{|k| <= K} w_k |e_k|^2` with `w_k = (1 + lambda_k)^sigma`,
//! `lambda_k = (2 pi k / L)^2`. For a second-order problem (`s = 1`) the
//! trace order is `sigma = 2s - 1/2 = 3/2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Trace exponent `2s - 1/2` for a PDE of order `2s`.
pub fn trace_order(s: f64) -> f64 {
    2.0 * s - 0.5
}

fn check_len(m: usize) -> Result<()> {
    if m < 4 || !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    Ok(())
}

/// In-place iterative radix-2 decimation-in-time transform,
/// `X_k = sum_j x_j exp(-2 pi i jk / n)` (no normalisation).
fn fft_in_place(x: &mut [Complex64]) {
    let n = x.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            x.swap(i, j);
        }
    }
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let t = twiddles[k * stride] * x[start + k + len / 2];
                let u = x[start + k];
                x[start + k] = u + t;
                x[start + k + len / 2] = u - t;
            }
        }
        len *= 2;
    }
}

/// Normalised Fourier coefficients of a real sample vector.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpectrum {
    /// `coeffs[k]` for `k = 0..M`; index `M - k` holds frequency `-k`.
    pub coeffs: Vec<Complex64>,
}

impl BoundarySpectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at signed frequency `k`, `|k| <= M/2`.
    pub fn at(&self, k: i64) -> Complex64 {
        let m = self.coeffs.len() as i64;
        self.coeffs[k.rem_euclid(m) as usize]
    }
}

/// `e_k = (1/M) sum_j e_j exp(-2 pi i jk/M)` by radix-2 FFT.
pub fn fft_real(e: &[f64]) -> Result<BoundarySpectrum> {
    check_len(e.len())?;
    let mut x: Vec<Complex64> = e.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut x);
    let scale = 1.0 / e.len() as f64;
    for c in &mut x {
        *c *= scale;
    }
    Ok(BoundarySpectrum { coeffs: x })
}

/// Which eigenvalue law a weight table uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightLaw {
    /// `(1 + lambda_k)^sigma`; `w_0 = 1`.
    Shifted,
    /// `lambda_k^sigma`; `w_0 = 0`. Matches the eigenbasis plug-in estimator.
    Plain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralWeightTable {
    pub length: f64,
    pub sigma: f64,
    pub truncation: usize,
    /// `weights[k]` for `k = 0..=K`; `w_{-k} = w_k`.
    pub weights: Vec<f64>,
}

impl SpectralWeightTable {
    pub fn new(length: f64, sigma: f64, truncation: usize) -> Self {
        Self::with_law(length, sigma, truncation, WeightLaw::Shifted)
    }

    pub fn with_law(length: f64, sigma: f64, truncation: usize, law: WeightLaw) -> Self {
        let weights = (0..=truncation)
            .map(|k| {
                let lambda = (2.0 * PI * k as f64 / length).powi(2);
                match law {
                    WeightLaw::Shifted => (1.0 + lambda).powf(sigma),
                    WeightLaw::Plain if k == 0 => 0.0,
                    WeightLaw::Plain => lambda.powf(sigma),
                }
            })
            .collect();
        SpectralWeightTable {
            length,
            sigma,
            truncation,
            weights,
        }
    }

    pub fn weight(&self, k: i64) -> f64 {
        self.weights[k.unsigned_abs() as usize]
    }

    fn check_grid(&self, m: usize) -> Result<()> {
        check_len(m)?;
        if self.truncation > m / 2 {
            return Err(Error::Truncation {
                k: self.truncation,
                half: m / 2,
            });
        }
        Ok(())
    }

    /// Signed frequencies in the truncated set, Nyquist listed once.
    fn frequencies(&self, m: usize) -> impl Iterator<Item = i64> {
        let k = self.truncation as i64;
        let half = (m / 2) as i64;
        (-k..=k).filter(move |&f| f != -half)
    }
}

/// `sum_{|k| <= K} w_k |e_k|^2` for a precomputed table.
pub fn penalty_with_table(e: &[f64], table: &SpectralWeightTable) -> Result<f64> {
    table.check_grid(e.len())?;
    let spec = fft_real(e)?;
    Ok(table
        .frequencies(e.len())
        .map(|k| table.weight(k) * spec.at(k).norm_sqr())
        .sum())
}

/// Penalty and its gradient `2 A e` with respect to the samples.
///
/// The gradient is `(2/M) Re sum_k w_k e_k exp(2 pi i jk/M)`, obtained with a
/// second FFT.
pub fn penalty_and_grad(e: &[f64], table: &SpectralWeightTable) -> Result<(f64, Vec<f64>)> {
    table.check_grid(e.len())?;
    let m = e.len();
    let spec = fft_real(e)?;
    let mut weighted = vec![Complex64::new(0.0, 0.0); m];
    let mut value = 0.0;
    for k in table.frequencies(m) {
        let c = spec.at(k);
        let w = table.weight(k);
        value += w * c.norm_sqr();
        // inverse transform through the conjugate of a forward transform
        weighted[k.rem_euclid(m as i64) as usize] = (w * c).conj();
    }
    fft_in_place(&mut weighted);
    let scale = 2.0 / m as f64;
    Ok((value, weighted.iter().map(|c| scale * c.re).collect()))
}

/// Sobolev penalty of `e` sampled at `tau_j = jL/M`, order `2s - 1/2`.
pub fn sobolev_penalty(e: &[f64], length: f64, s: f64, truncation: usize) -> Result<f64> {
    penalty_with_table(e, &SpectralWeightTable::new(length, trace_order(s), truncation))
}

/// Dense matrix `A` with `e^T A e = sobolev_penalty(e)`; real, symmetric,
/// circulant and positive semidefinite.
pub fn penalty_matrix(m: usize, length: f64, s: f64, truncation: usize) -> Result<DMatrix<f64>> {
    let table = SpectralWeightTable::new(length, trace_order(s), truncation);
    penalty_matrix_for(m, &table)
}

pub fn penalty_matrix_for(m: usize, table: &SpectralWeightTable) -> Result<DMatrix<f64>> {
    table.check_grid(m)?;
    // first row of the circulant: c_d = (1/M^2) sum_k w_k cos(2 pi k d / M)
    let row: Vec<f64> = (0..m)
        .map(|d| {
            let d = d.min(m - d);
            table
                .frequencies(m)
                .map(|k| table.weight(k) * (2.0 * PI * (k * d as i64) as f64 / m as f64).cos())
                .sum::<f64>()
                / (m * m) as f64
        })
        .collect();
    Ok(DMatrix::from_fn(m, m, |j, l| row[(j + m - l) % m]))
}

/// Discrete circle eigenfunctions `sqrt(2) cos, sqrt(2) sin` of frequency
/// `k = 1..=K` at `tau_j = jL/M`, with eigenvalues `(2 pi k/L)^2`.
///
/// Rows satisfy `sum_j psi_k psi_l = M delta_kl`. At the Nyquist frequency
/// only the (unit-amplitude) cosine is kept.
pub fn circle_eigenbasis(m: usize, length: f64, truncation: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_len(m)?;
    if truncation > m / 2 {
        return Err(Error::Truncation {
            k: truncation,
            half: m / 2,
        });
    }
    let mut psi = Vec::new();
    let mut lambda = Vec::new();
    for k in 1..=truncation {
        let lk = (2.0 * PI * k as f64 / length).powi(2);
        let angle = |j: usize| 2.0 * PI * (k * j) as f64 / m as f64;
        if 2 * k == m {
            psi.push((0..m).map(|j| angle(j).cos()).collect());
            lambda.push(lk);
            continue;
        }
        psi.push((0..m).map(|j| 2f64.sqrt() * angle(j).cos()).collect());
        psi.push((0..m).map(|j| 2f64.sqrt() * angle(j).sin()).collect());
        lambda.extend([lk, lk]);
    }
    Ok((psi, lambda))
}

/// `sum_k lambda_k^(2s - 1/2) |(1/m) sum_j r_j psi_k(y_j)|^2`.
pub fn plugin_penalty(residuals: &[f64], psi: &[Vec<f64>], eigenvalues: &[f64], s: f64) -> Result<f64> {
    if psi.len() != eigenvalues.len() {
        return Err(Error::Shape(format!(
            "{} eigenfunctions but {} eigenvalues",
            psi.len(),
            eigenvalues.len()
        )));
    }
    let m = residuals.len() as f64;
    let sigma = trace_order(s);
    let mut total = 0.0;
    for (row, &lambda) in psi.iter().zip(eigenvalues) {
        if row.len() != residuals.len() {
            return Err(Error::Shape(format!(
                "eigenfunction table has {} samples, residual has {}",
                row.len(),
                residuals.len()
            )));
        }
        let coeff: f64 = row.iter().zip(residuals).map(|(p, r)| p * r).sum::<f64>() / m;
        total += lambda.powf(sigma) * coeff * coeff;
    }
    Ok(total)
}

/// Trapezoidal Slobodeckij energy on a circle of length `L`:
/// `sum_{j != l} |e_j - e_l|^2 / rho^(1 + 2 sigma) h^2 + sum_j e_j^2 h`,
/// with `rho = (L/pi) |sin(pi (j - l)/M)|` the chordal distance.
pub fn slobodeckij_oracle(e: &[f64], length: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Precondition(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    let m = e.len();
    let h = length / m as f64;
    // kernel depends only on the cyclic offset
    let kernel: Vec<f64> = (0..m)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                let rho = length / PI * (PI * d as f64 / m as f64).sin().abs();
                rho.powf(-(1.0 + 2.0 * sigma))
            }
        })
        .collect();
    let mut semi = 0.0;
    for j in 0..m {
        for l in 0..m {
            if j != l {
                let diff = e[j] - e[l];
                semi += diff * diff * kernel[(j + m - l) % m];
            }
        }
    }
    let l2: f64 = e.iter().map(|v| v * v).sum::<f64>() * h;
    Ok(semi * h * h + l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_dft(e: &[f64]) -> Vec<Complex64> {
        let m = e.len();
        (0..m)
            .map(|k| {
                e.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        v * Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % m) as f64 / m as f64)
                    })
                    .sum::<Complex64>()
                    / m as f64
            })
            .collect()
    }

    fn random_vec(m: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn mode(m: usize, k: usize) -> Vec<f64> {
        (0..m).map(|j| (2.0 * PI * (k * j) as f64 / m as f64).cos()).collect()
    }

    #[test]
    fn fft_examples() {
        let spec = fft_real(&[1.0; 8]).unwrap();
        assert!((spec.at(0).re - 1.0).abs() < 1e-15);
        assert!(spec.coeffs[1..].iter().all(|c| c.norm() < 1e-15));

        let spec = fft_real(&mode(16, 1)).unwrap();
        for k in -8..8i64 {
            let want = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((spec.at(k) - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
        assert!(matches!(fft_real(&[0.0; 6]), Err(Error::NotPowerOfTwo(6))));
        assert!(fft_real(&[0.0; 2]).is_err());
    }

    #[test]
    fn fft_matches_direct_dft_and_parseval() {
        for p in 2..=10 {
            let m = 1 << p;
            let e = random_vec(m, p as u64);
            let fast = fft_real(&e).unwrap();
            for (a, b) in fast.coeffs.iter().zip(direct_dft(&e)) {
                assert!((a - b).norm() < 1e-12);
            }
            let lhs: f64 = fast.coeffs.iter().map(|c| c.norm_sqr()).sum();
            let rhs: f64 = e.iter().map(|v| v * v).sum::<f64>() / m as f64;
            assert!((lhs - rhs).abs() < 1e-12);
            for k in 1..m as i64 / 2 {
                assert!((fast.at(-k) - fast.at(k).conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn penalty_examples() {
        let tau = 2.0 * PI;
        assert!((sobolev_penalty(&[0.7; 32], tau, 1.0, 16).unwrap() - 0.49).abs() < 1e-14);
        let got = sobolev_penalty(&mode(64, 2), tau, 1.0, 32).unwrap();
        assert!((got - 5f64.powf(1.5) / 2.0).abs() < 1e-12);
        assert!((got - 5.59017).abs() < 1e-5);
        // sigma = 0 is Parseval
        let e = random_vec(64, 3);
        let zero = penalty_with_table(&e, &SpectralWeightTable::new(tau, 0.0, 32)).unwrap();
        let ms: f64 = e.iter().map(|v| v * v).sum::<f64>() / 64.0;
        assert!((zero - ms).abs() < 1e-14);
        assert!(matches!(
            sobolev_penalty(&e, tau, 1.0, 33),
            Err(Error::Truncation { k: 33, half: 32 })
        ));
    }

    #[test]
    fn penalty_gradient_matches_matrix() {
        let m = 32;
        let table = SpectralWeightTable::new(5.0, 1.5, 12);
        let a = penalty_matrix_for(m, &table).unwrap();
        let e = random_vec(m, 8);
        let (v, g) = penalty_and_grad(&e, &table).unwrap();
        let ev = nalgebra::DVector::from_vec(e.clone());
        let ae = &a * &ev;
        assert!((ev.dot(&ae) - v).abs() < 1e-10 * v);
        for (gj, aej) in g.iter().zip(ae.iter()) {
            assert!((gj - 2.0 * aej).abs() < 1e-10 * (1.0 + gj.abs()));
        }
    }

    #[test]
    fn matrix_quadratic_form_and_eigenvalues() {
        let m = 64;
        let a = penalty_matrix(m, 2.0 * PI, 1.0, 32).unwrap();
        for seed in 0..100 {
            let e = random_vec(m, seed);
            let ev = nalgebra::DVector::from_vec(e.clone());
            let q = ev.dot(&(&a * &ev));
            let p = sobolev_penalty(&e, 2.0 * PI, 1.0, 32).unwrap();
            assert!((q - p).abs() < 1e-10 * (1.0 + p));
        }
        assert!((a.transpose() - &a).amax() < 1e-15);

        let table = SpectralWeightTable::new(2.0 * PI, 1.5, 2);
        let small = penalty_matrix_for(8, &table).unwrap();
        let mut eig: Vec<f64> = small.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let mut want = vec![0.0, 0.0, 0.0];
        want.push(table.weights[0] / 8.0);
        want.extend([table.weights[1] / 8.0; 2]);
        want.extend([table.weights[2] / 8.0; 2]);
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{eig:?} vs {want:?}");
        }
    }

    #[test]
    fn plugin_matches_plain_weight_fft() {
        let (m, len, s) = (64, 3.0, 1.0);
        let (psi, lambda) = circle_eigenbasis(m, len, 32).unwrap();
        for row in &psi {
            let norm: f64 = row.iter().map(|v| v * v).sum();
            assert!((norm - m as f64).abs() < 1e-9);
        }
        let table = SpectralWeightTable::with_law(len, trace_order(s), 32, WeightLaw::Plain);
        for seed in 0..10 {
            let e = random_vec(m, seed);
            let a = plugin_penalty(&e, &psi, &lambda, s).unwrap();
            let b = penalty_with_table(&e, &table).unwrap();
            assert!((a - b).abs() < 1e-10 * b);
        }
        assert_eq!(plugin_penalty(&[0.0; 64], &psi, &lambda, s).unwrap(), 0.0);
        let single = plugin_penalty(&psi[0], &psi, &lambda, s).unwrap();
        assert!((single - lambda[0].powf(1.5)).abs() < 1e-10);
        assert!(plugin_penalty(&[0.0; 63], &psi, &lambda, s).is_err());
    }

    #[test]
    fn slobodeckij_comparable_to_spectral_energy() {
        let m = 512;
        let len = 2.0 * PI;
        let table = SpectralWeightTable::new(len, 0.5, m / 2);
        let ratios: Vec<f64> = [1, 2, 4, 8]
            .iter()
            .map(|&k| {
                let e = mode(m, k);
                slobodeckij_oracle(&e, len, 0.5).unwrap() / penalty_with_table(&e, &table).unwrap()
            })
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 1.5, "{ratios:?}");

        let c = vec![0.3; 64];
        let v = slobodeckij_oracle(&c, len, 0.5).unwrap();
        assert!((v - 0.09 * len).abs() < 1e-12);
        let e = random_vec(64, 1);
        let e2: Vec<f64> = e.iter().map(|v| 2.0 * v).collect();
        let (a, b) = (
            slobodeckij_oracle(&e, len, 0.3).unwrap(),
            slobodeckij_oracle(&e2, len, 0.3).unwrap(),
        );
        assert!((b - 4.0 * a).abs() < 1e-10 * b);
        assert!(slobodeckij_oracle(&e, len, 1.0).is_err());
    }
}
