use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{jet_lift_chart, Jet2};
use crate::error::Result;
use crate::geometry::{
    boundary_data, exact_solution_jet, sample_boundary, sample_interior, source_term, BoundaryLabel,
    ChartPoint, Manifold, OperatorCoeffs,
};
use crate::network::INPUT_LEN;

/// Random streams derived from one seed, kept apart so that changing, say,
/// the test-set size does not move the training samples.
pub(crate) mod stream {
    pub const INTERIOR: u64 = 1;
    pub const TEST: u64 = 2;
    pub const SHUFFLE: u64 = 3;
}

pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Interior collocation points with the operator and source precomputed.
#[derive(Clone, Debug)]
pub struct InteriorSet {
    pub chart: Vec<ChartPoint>,
    /// Ambient coordinates as jets in the chart variables.
    pub inputs: Vec<[Jet2; INPUT_LEN]>,
    pub coeffs: Vec<OperatorCoeffs>,
    pub source: Vec<f64>,
}

impl InteriorSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Builds the set from chart points, using `coeffs_of` for the operator.
    pub fn from_chart<F>(m: &Manifold, chart: Vec<ChartPoint>, coeffs_of: F) -> Result<Self>
    where
        F: Fn(ChartPoint) -> Result<OperatorCoeffs>,
    {
        let inputs = chart
            .iter()
            .map(|&p| {
                let [t, f] = jet_lift_chart(p);
                m.embed_generic(t, f)
            })
            .collect();
        let coeffs = chart.iter().map(|&p| coeffs_of(p)).collect::<Result<_>>()?;
        let source = chart.iter().map(|&p| source_term(m, p)).collect::<Result<_>>()?;
        Ok(InteriorSet {
            chart,
            inputs,
            coeffs,
            source,
        })
    }

    /// Copy restricted to the given indices (order preserved, repeats allowed).
    pub fn select(&self, idx: &[usize]) -> InteriorSet {
        InteriorSet {
            chart: idx.iter().map(|&i| self.chart[i]).collect(),
            inputs: idx.iter().map(|&i| self.inputs[i]).collect(),
            coeffs: idx.iter().map(|&i| self.coeffs[i]).collect(),
            source: idx.iter().map(|&i| self.source[i]).collect(),
        }
    }
}

/// Equidistant samples on one boundary curve.
#[derive(Clone, Debug)]
pub struct BoundarySet {
    pub label: BoundaryLabel,
    pub length: f64,
    pub points: Vec<[f64; INPUT_LEN]>,
    pub target: Vec<f64>,
}

/// Test points with exact values and exact Laplace-Beltrami values.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub inputs: Vec<[Jet2; INPUT_LEN]>,
    pub laplace_coeffs: Vec<OperatorCoeffs>,
    pub u_exact: Vec<f64>,
    pub laplace_exact: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainingData {
    pub interior: InteriorSet,
    pub boundary: Vec<BoundarySet>,
    pub test: TestSet,
}

impl TrainingData {
    /// `n` interior points, `m` boundary points per component and `n_test`
    /// test points, all drawn from `seed`.
    pub fn assemble(manifold: &Manifold, n: usize, m: usize, n_test: usize, seed: u64) -> Result<Self> {
        let chart: Vec<ChartPoint> = sample_interior(manifold, n, &mut seeded(seed, stream::INTERIOR))?
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        let interior = InteriorSet::from_chart(manifold, chart, |p| manifold.elliptic_coeffs(p))?;
        let boundary = boundary_sets(manifold, m)?;
        let test = test_set(manifold, n_test, seed)?;
        Ok(TrainingData {
            interior,
            boundary,
            test,
        })
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary.iter().map(|b| b.points.len()).sum()
    }
}

pub fn boundary_sets(manifold: &Manifold, m: usize) -> Result<Vec<BoundarySet>> {
    Ok(sample_boundary(manifold, m)?
        .into_iter()
        .map(|b| BoundarySet {
            label: b.component.label,
            length: b.component.length,
            points: b.points.iter().map(|q| q.to_array()).collect(),
            target: b.points.iter().map(|&q| boundary_data(q)).collect(),
        })
        .collect())
}

pub fn test_set(manifold: &Manifold, n_test: usize, seed: u64) -> Result<TestSet> {
    let pts = sample_interior(manifold, n_test, &mut seeded(seed, stream::TEST))?;
    let mut set = TestSet {
        inputs: Vec::with_capacity(n_test),
        laplace_coeffs: Vec::with_capacity(n_test),
        u_exact: Vec::with_capacity(n_test),
        laplace_exact: Vec::with_capacity(n_test),
    };
    for (p, _) in pts {
        let [t, f] = jet_lift_chart(p);
        set.inputs.push(manifold.embed_generic(t, f));
        let c = manifold.laplace_coeffs(p)?;
        let u = exact_solution_jet(manifold, p);
        set.u_exact.push(u.val);
        set.laplace_exact
            .push(c.iter().zip(u.components()).map(|(a, b)| a * b).sum());
        set.laplace_coeffs.push(c);
    }
    Ok(set)
}
