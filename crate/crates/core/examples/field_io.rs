//! Solved fields round-trip through the binary field format, so expensive
//! solves can be reused by later analyses.

use masslab::discretization::GridDomain;
use masslab::harmonic::io::{read_field, write_field};
use masslab::harmonic::{solve_harmonic, BoundaryData, CgSettings, DirichletData, ExcisionMode};
use masslab::mass::{stern_bound, SternSettings};
use masslab::MetricSpec;

fn main() -> masslab::Result<()> {
    let spec = MetricSpec::smeared_mass(1.0, 1.0);
    let domain = GridDomain::cube(8.0, 0.5)?;
    let data = DirichletData::Asymptotic(BoundaryData::new([0.0, 0.0, 1.0], 1.0, 0.0));
    let sol = solve_harmonic(&spec, domain, data, ExcisionMode::Neumann, &CgSettings::default())?;

    let path = std::env::temp_dir().join("masslab-example.field");
    write_field(&path, &sol.u)?;
    let back = read_field(&path)?;
    assert_eq!(back, sol.u);
    let b = stern_bound(&spec, &back, &SternSettings::default())?;
    println!("{} bytes, B from the reloaded field {:.6}", std::fs::metadata(&path)?.len(), b.bound);
    Ok(())
}
