//! Benchmark surfaces, their charts and the elliptic operators of the model
//! problem `-div((2+z) grad u) + u = f` with exact solution `u* = xyz`.
//!
//! Both surfaces use a chart `(theta, phi)` with a diagonal metric that
//! depends on `theta` only:
//!
//! * hemisphere: `(sin t cos p, sin t sin p, cos t)`, `g = diag(1, sin^2 t)`
//! * half-torus: `((R + r cos t) cos p, (R + r cos t) sin p, r sin t)`,
//!   `g = diag(r^2, (R + r cos t)^2)`, `t` in `[0, pi]`
//!
//! Operators take the chart 2-jet of `u` and are expanded by the product
//! rule, so they are exact linear functionals of the jet.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet2, Real};
use crate::error::{Error, Result};

const DEGENERATE_DET: f64 = 1e-12;
const MAX_REJECTION_DRAWS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    Hemisphere,
    HalfTorus,
}

impl std::fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ManifoldKind::Hemisphere => "hemisphere",
            ManifoldKind::HalfTorus => "half-torus",
        })
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hemisphere" => Ok(ManifoldKind::Hemisphere),
            "half-torus" => Ok(ManifoldKind::HalfTorus),
            other => Err(Error::Parse(format!(
                "unknown manifold {other:?} (expected hemisphere or half-torus)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifold {
    pub kind: ManifoldKind,
    pub torus_major_r: f64,
    pub torus_minor_r: f64,
    pub pole_exclusion_eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AmbientPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        AmbientPoint { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryLabel {
    Equator,
    TorusOuter,
    TorusInner,
}

/// A closed boundary curve with unit-speed parametrization over `[0, L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryComponent {
    pub label: BoundaryLabel,
    pub length: f64,
    radius: f64,
}

impl BoundaryComponent {
    pub fn parametrize(&self, tau: f64) -> AmbientPoint {
        let angle = tau / self.radius;
        AmbientPoint::new(self.radius * angle.cos(), self.radius * angle.sin(), 0.0)
    }
}

/// Equidistant samples of one boundary component.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySamples {
    pub component: BoundaryComponent,
    pub points: Vec<AmbientPoint>,
}

/// Coefficients of a second-order operator acting on a chart jet, in the
/// component order `val, u_t, u_p, u_tt, u_tp, u_pp`.
pub type OperatorCoeffs = [f64; 6];

impl Manifold {
    pub fn hemisphere() -> Self {
        Manifold {
            kind: ManifoldKind::Hemisphere,
            torus_major_r: 2.0,
            torus_minor_r: 1.0,
            pole_exclusion_eps: 1e-3,
        }
    }

    pub fn half_torus(major: f64, minor: f64) -> Result<Self> {
        let m = Manifold {
            kind: ManifoldKind::HalfTorus,
            torus_major_r: major,
            torus_minor_r: minor,
            pole_exclusion_eps: 1e-3,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_kind(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Hemisphere => Self::hemisphere(),
            ManifoldKind::HalfTorus => Manifold {
                kind,
                ..Self::hemisphere()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pole_exclusion_eps > 0.0 && self.pole_exclusion_eps <= FRAC_PI_8) {
            return Err(Error::Precondition(format!(
                "pole exclusion {} outside (0, pi/8]",
                self.pole_exclusion_eps
            )));
        }
        if self.kind == ManifoldKind::HalfTorus
            && !(0.0 < self.torus_minor_r && self.torus_minor_r < self.torus_major_r)
        {
            return Err(Error::Precondition(format!(
                "half-torus needs 0 < r < R, got r = {}, R = {}",
                self.torus_minor_r, self.torus_major_r
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: ChartPoint) -> bool {
        let t = p.theta;
        let phi_ok = (0.0..TAU).contains(&p.phi);
        match self.kind {
            ManifoldKind::Hemisphere => phi_ok && t >= 0.0 && t <= FRAC_PI_2,
            ManifoldKind::HalfTorus => phi_ok && (0.0..=PI).contains(&t),
        }
    }

    fn check_chart(&self, p: ChartPoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{p:?} outside the chart of {:?}", self.kind)))
        }
    }

    pub fn boundary_components(&self) -> Vec<BoundaryComponent> {
        match self.kind {
            ManifoldKind::Hemisphere => vec![BoundaryComponent {
                label: BoundaryLabel::Equator,
                length: TAU,
                radius: 1.0,
            }],
            ManifoldKind::HalfTorus => {
                let (big, small) = (self.torus_major_r, self.torus_minor_r);
                vec![
                    BoundaryComponent {
                        label: BoundaryLabel::TorusOuter,
                        length: TAU * (big + small),
                        radius: big + small,
                    },
                    BoundaryComponent {
                        label: BoundaryLabel::TorusInner,
                        length: TAU * (big - small),
                        radius: big - small,
                    },
                ]
            }
        }
    }

    /// Embedding evaluated on any scalar type, so jets of the chart coordinates
    /// yield jets of the ambient coordinates.
    pub fn embed_generic<T: Real>(&self, theta: T, phi: T) -> [T; 3] {
        let (cp, sp) = (phi.cos(), phi.sin());
        match self.kind {
            ManifoldKind::Hemisphere => {
                let st = theta.sin();
                [st * cp, st * sp, theta.cos()]
            }
            ManifoldKind::HalfTorus => {
                let ring = theta.cos() * self.torus_minor_r + self.torus_major_r;
                [ring * cp, ring * sp, theta.sin() * self.torus_minor_r]
            }
        }
    }

    /// Metric entries `(g_tt, g_pp)` as functions of theta.
    fn metric_diag(&self, theta: f64) -> (f64, f64) {
        match self.kind {
            ManifoldKind::Hemisphere => (1.0, theta.sin().powi(2)),
            ManifoldKind::HalfTorus => {
                let ring = self.torus_major_r + self.torus_minor_r * theta.cos();
                (self.torus_minor_r.powi(2), ring * ring)
            }
        }
    }

    /// `(S/g_tt, d/dt (S/g_tt), S/g_pp)` with `S = sqrt(det g)`.
    fn flux_factors(&self, theta: f64) -> (f64, f64, f64) {
        match self.kind {
            ManifoldKind::Hemisphere => (theta.sin(), theta.cos(), 1.0 / theta.sin()),
            ManifoldKind::HalfTorus => {
                let (big, small) = (self.torus_major_r, self.torus_minor_r);
                let ring = big + small * theta.cos();
                (ring / small, -theta.sin(), small / ring)
            }
        }
    }

    fn sqrt_det(&self, theta: f64) -> f64 {
        match self.kind {
            ManifoldKind::Hemisphere => theta.sin(),
            ManifoldKind::HalfTorus => {
                self.torus_minor_r * (self.torus_major_r + self.torus_minor_r * theta.cos())
            }
        }
    }

    /// `z(theta)` and its theta-derivative; `z` does not depend on phi.
    fn height(&self, theta: f64) -> (f64, f64) {
        match self.kind {
            ManifoldKind::Hemisphere => (theta.cos(), -theta.sin()),
            ManifoldKind::HalfTorus => (
                self.torus_minor_r * theta.sin(),
                self.torus_minor_r * theta.cos(),
            ),
        }
    }

    /// Jet coefficients of `-div(a grad u) + c u` with `a = 2 + z` (or 1).
    fn divergence_coeffs(&self, p: ChartPoint, variable: bool, reaction: f64) -> Result<OperatorCoeffs> {
        self.check_chart(p)?;
        let det = self.metric_det(p.theta);
        if det < DEGENERATE_DET {
            return Err(Error::DegenerateMetric { det, theta: p.theta });
        }
        let (z, dz) = self.height(p.theta);
        let (a, da) = if variable { (2.0 + z, dz) } else { (1.0, 0.0) };
        let (s_t, ds_t, s_p) = self.flux_factors(p.theta);
        let inv_s = 1.0 / self.sqrt_det(p.theta);
        Ok([
            reaction,
            -inv_s * (da * s_t + a * ds_t),
            0.0,
            -inv_s * a * s_t,
            0.0,
            -inv_s * a * s_p,
        ])
    }

    fn metric_det(&self, theta: f64) -> f64 {
        let (g1, g2) = self.metric_diag(theta);
        g1 * g2
    }

    /// Coefficients of the model operator `-div((2+z) grad u) + u`.
    pub fn elliptic_coeffs(&self, p: ChartPoint) -> Result<OperatorCoeffs> {
        self.divergence_coeffs(p, true, 1.0)
    }

    /// Coefficients of the positive Laplace-Beltrami operator `-div grad u`.
    pub fn laplace_coeffs(&self, p: ChartPoint) -> Result<OperatorCoeffs> {
        self.divergence_coeffs(p, false, 0.0)
    }

    fn draw_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChartPoint> {
        let phi = rng.gen_range(0.0..TAU);
        match self.kind {
            ManifoldKind::Hemisphere => {
                // Archimedes: z is uniform under the area measure
                let z_max = self.pole_exclusion_eps.cos();
                let z: f64 = rng.gen_range(0.0..z_max);
                Ok(ChartPoint { theta: z.acos(), phi })
            }
            ManifoldKind::HalfTorus => {
                let (big, small) = (self.torus_major_r, self.torus_minor_r);
                for _ in 0..MAX_REJECTION_DRAWS {
                    let theta = rng.gen_range(0.0..=PI);
                    let accept: f64 = rng.gen();
                    if accept * (big + small) <= big + small * theta.cos() {
                        return Ok(ChartPoint { theta, phi });
                    }
                }
                Err(Error::Internal("rejection sampler exceeded its draw cap".into()))
            }
        }
    }
}

pub fn chart_embed(m: &Manifold, p: ChartPoint) -> Result<AmbientPoint> {
    m.check_chart(p)?;
    let [x, y, z] = m.embed_generic(p.theta, p.phi);
    Ok(AmbientPoint { x, y, z })
}

/// First fundamental form of the chart.
pub fn metric(m: &Manifold, p: ChartPoint) -> Result<[[f64; 2]; 2]> {
    m.check_chart(p)?;
    let (g1, g2) = m.metric_diag(p.theta);
    if g1 * g2 < DEGENERATE_DET {
        return Err(Error::DegenerateMetric {
            det: g1 * g2,
            theta: p.theta,
        });
    }
    Ok([[g1, 0.0], [0.0, g2]])
}

/// I.i.d. interior points, uniform with respect to surface area.
pub fn sample_interior<R: Rng + ?Sized>(
    m: &Manifold,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(ChartPoint, AmbientPoint)>> {
    if n == 0 {
        return Err(Error::Precondition("interior sample count must be >= 1".into()));
    }
    m.validate()?;
    (0..n)
        .map(|_| {
            let p = m.draw_interior(rng)?;
            Ok((p, chart_embed(m, p)?))
        })
        .collect()
}

/// `m_per_component` equidistant arclength samples on every boundary curve.
pub fn sample_boundary(m: &Manifold, m_per_component: usize) -> Result<Vec<BoundarySamples>> {
    if m_per_component < 4 || !m_per_component.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m_per_component));
    }
    Ok(m.boundary_components()
        .into_iter()
        .map(|component| BoundarySamples {
            component,
            points: (0..m_per_component)
                .map(|j| component.parametrize(j as f64 * component.length / m_per_component as f64))
                .collect(),
        })
        .collect())
}

pub fn exact_solution(q: AmbientPoint) -> f64 {
    q.x * q.y * q.z
}

/// Chart jet of `u* o embed` at `p`, computed by exact jet arithmetic.
pub fn exact_solution_jet(m: &Manifold, p: ChartPoint) -> Jet2 {
    let [x, y, z] = m.embed_generic(Jet2::variable(p.theta, 0), Jet2::variable(p.phi, 1));
    x * y * z
}

pub fn apply_coeffs(c: &OperatorCoeffs, u: &Jet2) -> f64 {
    c.iter().zip(u.components()).map(|(a, b)| a * b).sum()
}

/// `-div((2+z) grad u) + u` at `p`, given the chart jet of `u`.
pub fn apply_elliptic_operator(u: &Jet2, m: &Manifold, p: ChartPoint) -> Result<f64> {
    Ok(apply_coeffs(&m.elliptic_coeffs(p)?, u))
}

/// Positive Laplace-Beltrami operator `-div grad u` at `p`.
pub fn laplace_beltrami(u: &Jet2, m: &Manifold, p: ChartPoint) -> Result<f64> {
    Ok(apply_coeffs(&m.laplace_coeffs(p)?, u))
}

/// Source term `f = L u*` from exact jet differentiation of the solution.
pub fn source_term(m: &Manifold, p: ChartPoint) -> Result<f64> {
    apply_elliptic_operator(&exact_solution_jet(m, p), m, p)
}

pub fn boundary_data(q: AmbientPoint) -> f64 {
    exact_solution(q)
}
