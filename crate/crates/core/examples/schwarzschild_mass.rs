//! ADM mass of Schwarzschild through sphere and cylinder fluxes.
//!
//! With the Euclidean normal and area element the sphere flux is exactly
//! `m (1 + m/2r)^3`; both routes extrapolate to `m` in `1/r`.

use masslab::mass::{cylinder_mass, sphere_mass};
use masslab::MetricSpec;

fn main() -> masslab::Result<()> {
    let m = 1.0;
    let spec = MetricSpec::schwarzschild(m);
    let radii = [8.0, 16.0, 32.0];

    let sphere = sphere_mass(&spec, &radii)?;
    for (r, v) in radii.iter().zip(&sphere.values) {
        let closed = m * (1.0 + m / (2.0 * r)).powi(3);
        println!("r = {r:>4}: flux {v:.8}  closed form {closed:.8}");
    }
    println!("sphere route   -> {:.5} (fit residual {:.1e})", sphere.limit(), sphere.extrapolation.residual);

    let cyl = cylinder_mass(&spec, &radii, [0.0, 0.0, 1.0])?;
    println!("cylinder route -> {:.5}", cyl.limit());

    let harmonic = cylinder_mass(&MetricSpec::schwarzschild_harmonic(m), &radii, [1.0, 0.0, 0.0])?;
    println!("harmonic chart -> {:.5}", harmonic.limit());
    Ok(())
}
