//! Flat space: the mass, the bound and every identity residual vanish.
//!
//!     cargo run --release --example flat_null

use masslab::discretization::{GridDomain, Surface};
use masslab::harmonic::{solve_harmonic, BoundaryData, CgSettings, DirichletData, ExcisionMode};
use masslab::identities::{convergence_study, IdentityTag, StudySettings};
use masslab::mass::{adm_flux, stern_bound, SternSettings};
use masslab::{AnalyticField, MetricSpec};

fn main() -> masslab::Result<()> {
    let flat = MetricSpec::flat();
    let domain = GridDomain::cube(8.0, 0.25)?;
    let data = DirichletData::Asymptotic(BoundaryData::new([1.0, 0.0, 0.0], 0.0, 0.0));
    let sol = solve_harmonic(&flat, domain, data, ExcisionMode::Neumann, &CgSettings::default())?;
    println!("solve: {} nodes, {} iterations, residual {:.2e}", domain.len(), sol.iterations, sol.residual);

    let flux = adm_flux(&flat, &Surface::Sphere { radius: 6.0 })?;
    let bound = stern_bound(&flat, &sol.u, &SternSettings::default())?;
    println!("ADM flux {:.2e}, Stern bound {:.2e}", flux.value, bound.bound);

    let u = AnalyticField::linear([1.0, 0.0, 0.0]);
    let settings = StudySettings { samples: 50, ..Default::default() };
    for tag in IdentityTag::ALL {
        let r = convergence_study(tag, &flat, &u, &AnalyticField::Saddle, &[0.5, 0.25, 0.125], &settings)?;
        let res: Vec<String> = r.max_residuals.iter().map(|x| format!("{x:.1e}")).collect();
        println!("{tag:?}: max residuals {res:?} -> {:?}", r.status);
    }
    Ok(())
}
