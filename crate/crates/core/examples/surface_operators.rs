//! Chart geometry of the two benchmark surfaces: embedding, metric,
//! boundary curves, and the operator applied to the exact solution.
//!
//! cargo run --release --example surface_operators

use picnn::geometry::{
    apply_elliptic_operator, chart_embed, exact_solution_jet, laplace_beltrami, metric, source_term,
    ChartPoint, Manifold,
};

fn main() -> picnn::Result<()> {
    for m in [Manifold::hemisphere(), Manifold::half_torus(2.0, 1.0)?] {
        println!("{}", m.kind);
        for c in m.boundary_components() {
            println!("  boundary {:?}: length {:.6}", c.label, c.length);
        }
        for (theta, phi) in [(0.3, 0.7), (0.9, 2.0), (1.4, 4.5)] {
            let p = ChartPoint { theta, phi };
            let q = chart_embed(&m, p)?;
            let g = metric(&m, p)?;
            let u = exact_solution_jet(&m, p);
            println!(
                "  (theta, phi) = ({theta:.1}, {phi:.1})  x = ({:+.4}, {:+.4}, {:+.4})  det g = {:.4}",
                q.x,
                q.y,
                q.z,
                g[0][0] * g[1][1] - g[0][1] * g[1][0]
            );
            println!(
                "    u = {:+.6}  -Lap u = {:+.6}  Lu = {:+.6}  f = {:+.6}",
                u.val,
                laplace_beltrami(&u, &m, p)?,
                apply_elliptic_operator(&u, &m, p)?,
                source_term(&m, p)?
            );
        }
    }
    Ok(())
}
