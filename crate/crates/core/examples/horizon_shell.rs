//! `∫∫K` on the Schwarzschild exterior between the horizon and `r = 16`,
//! for the closed-form harmonic function with zero normal derivative on the
//! horizon. Levels with `|t| < 1/2` cross the horizon and are annuli.
//!
//! The lattice is graded (sinh spacing) so the horizon is resolved without
//! a fine global grid.

use masslab::discretization::Region;
use masslab::levelset::Lattice;
use masslab::mass::{gauss_integral_over_levels, LevelSettings};
use masslab::{AnalyticField, MetricSpec, Potential};

fn main() -> masslab::Result<()> {
    let m = 1.0;
    let spec = MetricSpec::schwarzschild(m);
    let axis = [1.0, 0.0, 0.0];
    let u = AnalyticField::neumann_exterior(m, axis);
    let lattice = Lattice::graded(16.5, 96, 3.0)?;
    let values: Vec<f64> = (0..lattice.len())
        .map(|n| {
            let p = lattice.point(n);
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r < 0.3 {
                f64::NAN
            } else {
                u.value(p.into()).unwrap_or(f64::NAN)
            }
        })
        .collect();
    let settings = LevelSettings { breakpoints: vec![-0.5 * m, 0.5 * m], ..Default::default() };
    let region = Region::Shell { inner: m / 2.0, outer: 16.0 };
    let rep = gauss_integral_over_levels(&spec, &u, &lattice, &values, &region, axis, &settings)?;
    let annuli = rep.rows.iter().filter(|r| r.inner_loops > 0).count();
    println!("{} levels, {annuli} crossing the horizon", rep.rows.len());
    println!(
        "∫∫K: direct {:.5}, Gauss–Bonnet {:.5} (relative gap {:.1e}); (8π/3)m = {:.5}",
        rep.direct, rep.gauss_bonnet, rep.route_difference, rep.proof_bound
    );
    Ok(())
}
