//! Boundary terms of the integrated identity on coordinate cylinders of
//! half-length `L`, for Schwarzschild in harmonic coordinates where `u = X¹`
//! is exactly harmonic. `combined/8π` approaches `m` like `1/L`.

use std::f64::consts::PI;

use masslab::mass::{cylinder_boundary_terms, CylinderSettings};
use masslab::{AnalyticField, MetricSpec};

fn main() -> masslab::Result<()> {
    let spec = MetricSpec::schwarzschild_harmonic(1.0);
    let axis = [1.0, 0.0, 0.0];
    let u = AnalyticField::harmonic_linear(spec, axis);
    let mut previous: Option<f64> = None;
    for l in [8.0, 16.0, 32.0] {
        let t = cylinder_boundary_terms(&spec, &u, l, axis, &CylinderSettings::default())?;
        let err = t.combined / (8.0 * PI) - 1.0;
        let ratio = previous.map(|p| p / err).unwrap_or(f64::NAN);
        println!(
            "L = {l:>4}: metric terms {:>9.4} {:>9.4}, ∫∂|∇u| {:>9.4}, ∫∫κ {:>9.4}, combined/8π − 1 = {err:>8.4} (ratio {ratio:.2})",
            t.flux_from_metric, t.kappa_from_metric, t.gradnorm_flux, t.kappa_integral
        );
        previous = Some(err);
    }
    Ok(())
}
