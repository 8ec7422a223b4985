//! `∫_{S_r} ∂_ν|∇u|` for the harmonic function `x/w` on Schwarzschild tends
//! to `(16π/3) m`, both for the closed form and for a solved potential.

use std::f64::consts::PI;

use masslab::discretization::GridDomain;
use masslab::harmonic::{solve_harmonic, BoundaryData, CgSettings, DirichletData, ExcisionMode};
use masslab::mass::gradnorm_report;
use masslab::{AnalyticField, MetricSpec};

fn main() -> masslab::Result<()> {
    let spec = MetricSpec::schwarzschild(1.0);
    let target = 16.0 * PI / 3.0;

    let exact = AnalyticField::harmonic_linear(spec, [1.0, 0.0, 0.0]);
    let rep = gradnorm_report(&spec, &exact, &[8.0, 16.0, 32.0])?;
    println!("closed form: {:.4?} -> {:.4} (16π/3 = {target:.4})", rep.values, rep.limit());

    let domain = GridDomain::cube(16.0, 0.5)?.with_excision(1.0)?;
    let data = DirichletData::Asymptotic(BoundaryData::new([1.0, 0.0, 0.0], 1.0, 0.0));
    let sol = solve_harmonic(&spec, domain, data, ExcisionMode::Neumann, &CgSettings::default())?;
    let rep = gradnorm_report(&spec, &sol.potential(), &[4.0, 6.0, 8.0])?;
    println!("solved, L = 16, h = 0.5: {:.4?} -> {:.4}", rep.values, rep.limit());
    Ok(())
}
