//! Total geodesic curvature and length of `∂Σ_t` on coordinate spheres.
//!
//! For `u = x/w` on Schwarzschild, `∮κ = 2π(1 − m/r + m t²/r³) + O(r⁻²)` and
//! the parameter length is `θ₀ = 2π(1 + m/2r)`.

use std::f64::consts::PI;

use masslab::levelset::{geodesic_curvature_total, BoundarySurface, Side};
use masslab::{AnalyticField, MetricSpec};

fn main() -> masslab::Result<()> {
    let m = 1.0;
    let spec = MetricSpec::schwarzschild(m);
    let axis = [1.0, 0.0, 0.0];
    let u = AnalyticField::harmonic_linear(spec, axis);
    println!("{:>5} {:>6} {:>12} {:>12} {:>10} {:>8}", "r", "t", "∮κ", "asymptotic", "error", "margin");
    for r in [8.0, 16.0, 32.0] {
        let surface = BoundarySurface::Sphere { radius: r, side: Side::Inside };
        for t in [0.0, r / 2.0] {
            let c = geodesic_curvature_total(&spec, &u, &surface, axis, t, 256)?;
            let expected = 2.0 * PI * (1.0 - m / r + m * t * t / r.powi(3));
            println!(
                "{r:>5} {t:>6} {:>12.6} {expected:>12.6} {:>10.2e} {:>8.3}",
                c.total_kappa,
                c.total_kappa - expected,
                c.min_margin
            );
        }
        let c = geodesic_curvature_total(&spec, &u, &surface, axis, 0.0, 256)?;
        println!("      θ₀ = {:.8}, 2π(1 + m/2r) = {:.8}", c.theta0, 2.0 * PI * (1.0 + m / (2.0 * r)));
    }
    Ok(())
}
