//! Second-order jets through the network, and parameter gradients of a
//! jet-valued loss by reverse accumulation, each checked against central
//! differences.
//!
//! cargo run --release --example jet_autodiff -- [seed]

use picnn::autodiff::{grad_params, jet_lift_chart, Jet, Var};
use picnn::geometry::{ChartPoint, Manifold};
use picnn::network::{forward, init, Architecture, ConvActivation, ConvSpec, MlpActivation, MlpSpec, Padding};

fn main() -> picnn::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let arch = Architecture {
        conv: ConvSpec {
            layers: 2,
            channels: 4,
            kernel_size: 3,
            padding: Padding::OneSidedZero,
            activation: ConvActivation::Gelu,
        },
        mlp: MlpSpec {
            widths: vec![6],
            activation: MlpActivation::Gelu2,
        },
    };
    let params = init(&arch, seed).flat;
    let m = Manifold::hemisphere();
    let p = ChartPoint { theta: 0.8, phi: 1.3 };

    let u = |theta: f64, phi: f64| forward(&arch, &params, m.embed_generic(theta, phi));
    let [t, f] = jet_lift_chart(p);
    let pj: Vec<_> = params.iter().map(|&v| Jet::constant(v)).collect();
    let jet = forward(&arch, &pj, m.embed_generic(t, f))?;

    let h = 1e-4;
    let (a, b) = (p.theta, p.phi);
    let fd = [
        u(a, b)?,
        (u(a + h, b)? - u(a - h, b)?) / (2.0 * h),
        (u(a, b + h)? - u(a, b - h)?) / (2.0 * h),
        (u(a + h, b)? - 2.0 * u(a, b)? + u(a - h, b)?) / (h * h),
        (u(a + h, b + h)? - u(a + h, b - h)? - u(a - h, b + h)? + u(a - h, b - h)?) / (4.0 * h * h),
        (u(a, b + h)? - 2.0 * u(a, b)? + u(a, b - h)?) / (h * h),
    ];
    println!("{} parameters; chart jet at (theta, phi) = ({a}, {b})", params.len());
    for (name, (j, d)) in ["u", "u_t", "u_p", "u_tt", "u_tp", "u_pp"].iter().zip(jet.components().iter().zip(fd)) {
        println!("  {name:>4}  jet {j:+.10}  fd {d:+.10}  diff {:.1e}", (j - d).abs());
    }

    // loss = (u_tt + u_pp)^2 at the point, differentiated in the parameters
    let (value, grad) = grad_params(&params, |leaves: &[Var<'_>]| {
        let pj: Vec<Jet<Var<'_>>> = leaves.iter().map(|&v| Jet::constant(v)).collect();
        let q = m
            .embed_generic(t, f)
            .map(|j| Jet::from_components(j.components().map(Var::constant)));
        let out = forward(&arch, &pj, q)?;
        let s = out.hess[0] + out.hess[2];
        Ok(s * s)
    })?;
    let plain = |theta: &[f64]| -> picnn::Result<f64> {
        let pj: Vec<_> = theta.iter().map(|&v| Jet::constant(v)).collect();
        let out = forward(&arch, &pj, m.embed_generic(t, f))?;
        Ok((out.hess[0] + out.hess[2]).powi(2))
    };
    let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let mut worst = 0.0f64;
    for i in (0..params.len()).step_by(7) {
        let mut up = params.clone();
        let mut dn = params.clone();
        up[i] += 1e-6;
        dn[i] -= 1e-6;
        let fd = (plain(&up)? - plain(&dn)?) / 2e-6;
        worst = worst.max((fd - grad[i]).abs() / scale);
    }
    println!("loss {value:.6e}; largest gradient gap vs fd, relative to max |grad|, {worst:.2e}");
    Ok(())
}
