//! Solve for the asymptotically linear harmonic function on a smeared-mass
//! metric (superharmonic conformal factor, `R ≥ 0`) and compare the Stern
//! bound `B` with the mass at two resolutions.

use masslab::discretization::GridDomain;
use masslab::harmonic::{solve_harmonic, BoundaryData, CgSettings, DirichletData, ExcisionMode};
use masslab::mass::{sphere_mass, stern_bound, SternReport, SternSettings};
use masslab::MetricSpec;

fn main() -> masslab::Result<()> {
    let spec = MetricSpec::smeared_mass(1.0, 1.0);
    let mass = sphere_mass(&spec, &[8.0, 16.0, 32.0])?.limit();
    let data = DirichletData::Asymptotic(BoundaryData::new([1.0, 0.0, 0.0], 1.0, 0.0));
    let mut bounds = Vec::new();
    for h in [1.0, 0.5] {
        let domain = GridDomain::cube(16.0, h)?;
        let sol = solve_harmonic(&spec, domain, data, ExcisionMode::Neumann, &CgSettings::default())?;
        let b = stern_bound(&spec, &sol.u, &SternSettings::default())?;
        println!(
            "h = {h}: {} CG iterations, B = {:.5} (ε/4: {:.5}), max principle {}",
            sol.iterations, b.bound, b.bound_quarter_epsilon, sol.max_principle.holds
        );
        bounds.push(b);
    }
    let budget = (bounds[1].bound - bounds[0].bound).abs();
    let rep = SternReport::new(bounds[1], mass, budget);
    println!("m̂ = {mass:.5}, m̂ − B = {:.5}, budget {budget:.5}, holds: {}", rep.margin, rep.holds);
    Ok(())
}
