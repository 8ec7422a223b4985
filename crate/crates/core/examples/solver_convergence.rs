//! Solver against the closed form: Dirichlet data of `x/w` on the box and
//! on an excised ball, maximum nodal error under refinement.

use masslab::discretization::GridDomain;
use masslab::fit::convergence_order;
use masslab::harmonic::{solve_harmonic, CgSettings, DirichletData, ExcisionMode};
use masslab::runner::max_nodal_error;
use masslab::{AnalyticField, MetricSpec};

fn main() -> masslab::Result<()> {
    let spec = MetricSpec::schwarzschild(1.0);
    let exact = AnalyticField::harmonic_linear(spec, [1.0, 0.0, 0.0]);
    let spacings = [0.5, 0.25, 0.125];
    let mut errors = Vec::new();
    for h in spacings {
        let domain = GridDomain::cube(8.0, h)?.with_excision(2.0)?;
        let sol = solve_harmonic(
            &spec,
            domain,
            DirichletData::Exact(exact),
            ExcisionMode::Dirichlet,
            &CgSettings::default(),
        )?;
        let e = max_nodal_error(&sol.u, &exact)?;
        println!(
            "h = {h:<6} max error {e:.3e}  iterations {}  max principle {}",
            sol.iterations, sol.max_principle.holds
        );
        errors.push(e);
    }
    println!("order {:.3}", convergence_order(&spacings, &errors));
    Ok(())
}
