//! Smooth cutoffs `chi_p(t) = 1 - beta_p((p + 1)(t - 1))` built from the
//! integrated cardinal B-spline, equal to 1 on `t <= 1` and 0 on `t >= 2`.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutoffSpec {
    pub p: u32,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `beta_p(t) = 1/(p+1)! sum_j (-1)^j C(p+1, j) (t - j)_+^(p+1)`, the
/// integral of the cardinal B-spline of order `p + 1` supported on `[0, p+1]`.
pub fn integrated_bspline(p: u32, t: f64) -> f64 {
    let q = p + 1;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= q as f64 {
        return 1.0;
    }
    let fact: f64 = (1..=q).map(f64::from).product();
    let mut sum = 0.0;
    for j in 0..=q {
        let d = t - j as f64;
        if d <= 0.0 {
            break;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(q, j) * d.powi(q as i32);
    }
    sum / fact
}

pub fn bspline_cutoff(spec: CutoffSpec, t: f64) -> f64 {
    assert!(spec.p >= 1, "cutoff order must be >= 1");
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    1.0 - integrated_bspline(spec.p, (spec.p + 1) as f64 * (t - 1.0))
}
