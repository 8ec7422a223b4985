//! Flux integrals at large radius: the ADM mass and `∫∂_υ|∇u| dA`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discretization::quadrature::{
    surface_integral, surface_integral_from, AreaElement, Surface, SurfaceIntegral,
};
use crate::field::Potential;
use crate::fit::{self, Extrapolation};
use crate::geometry::PointGeometry;
use crate::linalg;
use crate::metric::MetricSpec;
use crate::Result;

/// `(1/16π) ∫ Σ_ij (g_ij,i − g_ii,j) n^j dA` with the Euclidean normal and
/// Euclidean area element.
pub fn adm_flux(spec: &MetricSpec, surface: &Surface) -> Result<SurfaceIntegral> {
    let mut out = surface_integral(surface, AreaElement::Euclidean, spec, |s| {
        let jet = spec.metric_jet(s.point)?;
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += (jet.dg[i][j][i] - jet.dg[i][i][j]) * s.normal[j];
            }
        }
        Ok(acc)
    })?;
    out.value /= 16.0 * PI;
    Ok(out)
}

/// `∫ ∂_υ|∇u| dA_g` with the metric unit normal and induced area element,
/// `∂_k|∇u| = ∇²u(∇u, ∂_k)/|∇u|`.
pub fn gradnorm_flux(spec: &MetricSpec, u: &dyn Potential, surface: &Surface) -> Result<SurfaceIntegral> {
    gradnorm_flux_from(spec, u, surface, crate::discretization::quadrature::DEFAULT_RESOLUTION)
}

pub fn gradnorm_flux_from(
    spec: &MetricSpec,
    u: &dyn Potential,
    surface: &Surface,
    start: (usize, usize),
) -> Result<SurfaceIntegral> {
    // υ^k dA_g = g^{kj} n_j √det g dA_δ
    surface_integral_from(surface, AreaElement::Euclidean, spec, start, |s| {
        let geo = PointGeometry::new(spec, s.point, &u.jet(s.point)?)?;
        Ok(linalg::dot(geo.d_norm, linalg::mat_vec(&geo.ginv, s.normal)) * geo.sqrt_det)
    })
}

/// Flux values at increasing radii (or half-lengths) and their `f∞ + c/r`
/// extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub route: String,
    pub parameters: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolation: Extrapolation,
}

impl FluxReport {
    pub fn new(route: impl Into<String>, parameters: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let extrapolation = fit::extrapolate_inverse(&parameters, &values)?;
        Ok(Self { route: route.into(), parameters, values, extrapolation })
    }

    pub fn limit(&self) -> f64 {
        self.extrapolation.limit
    }
}

/// ADM flux through spheres of the given radii, extrapolated.
pub fn sphere_mass(spec: &MetricSpec, radii: &[f64]) -> Result<FluxReport> {
    let values =
        radii.iter().map(|&r| Ok(adm_flux(spec, &Surface::Sphere { radius: r })?.value)).collect::<Result<_>>()?;
    FluxReport::new("sphere", radii.to_vec(), values)
}

/// ADM flux through cylinders `C_L` about `axis`, extrapolated.
pub fn cylinder_mass(spec: &MetricSpec, half_lengths: &[f64], axis: [f64; 3]) -> Result<FluxReport> {
    let values = half_lengths
        .iter()
        .map(|&l| Ok(adm_flux(spec, &Surface::Cylinder { half_length: l, axis })?.value))
        .collect::<Result<_>>()?;
    FluxReport::new("cylinder", half_lengths.to_vec(), values)
}

/// Gradient-norm fluxes through spheres, extrapolated.
pub fn gradnorm_report(spec: &MetricSpec, u: &dyn Potential, radii: &[f64]) -> Result<FluxReport> {
    let values = radii
        .iter()
        .map(|&r| Ok(gradnorm_flux(spec, u, &Surface::Sphere { radius: r })?.value))
        .collect::<Result<_>>()?;
    FluxReport::new("gradnorm_sphere", radii.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;

    #[test]
    fn flat_fluxes_vanish() {
        let flat = MetricSpec::flat();
        assert_eq!(adm_flux(&flat, &Surface::Sphere { radius: 3.0 }).unwrap().value, 0.0);
        let g =
            gradnorm_flux(&flat, &AnalyticField::linear([1.0, 0.0, 0.0]), &Surface::Sphere { radius: 3.0 }).unwrap();
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn schwarzschild_sphere_flux() {
        // For g = w⁴δ the integrand is −∂_r(w⁴)·2 = 8 w³ m/(2r²), so the
        // sphere flux is (1/16π)·4πr²·4m w³/r² = m w³.
        let m = 1.0;
        let r: f64 = 16.0;
        let f = adm_flux(&MetricSpec::schwarzschild(m), &Surface::Sphere { radius: r }).unwrap();
        assert!((f.value - (1.0 + m / (2.0 * r)).powi(3)).abs() < 1e-12, "{}", f.value);
    }
}
