//! Boundary terms on the cylinder `C_L = D₊ ∪ D₋ ∪ T_L` about the asymptotic
//! direction of `u`.
//!
//! Coordinates are taken in the frame `(a, e₁, e₂)`, so that index 1 below is
//! the axial direction and `x²`, `x³` are the transverse coordinates.

use std::f64::consts::PI;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::autodiff::Vec3;
use crate::discretization::quadrature::{gauss_legendre_on, orthonormal_frame};
use crate::discretization::Surface;
use crate::field::Potential;
use crate::levelset::curve::{geodesic_curvature_total, BoundarySurface};
use crate::linalg;
use crate::mass::flux::gradnorm_flux_from;
use crate::mass::par_map;
use crate::metric::{MetricSpec, Point3};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderSettings {
    /// Gauss nodes per direction on caps and tube.
    pub surface_nodes: usize,
    /// Azimuthal nodes.
    pub azimuthal_nodes: usize,
    /// Levels in `t ∈ [−L, L]` for `∫∫κ`.
    pub levels: usize,
    pub curve_samples: usize,
}

impl Default for CylinderSettings {
    fn default() -> Self {
        Self { surface_nodes: 64, azimuthal_nodes: 128, levels: 48, curve_samples: 128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderTerms {
    pub half_length: f64,
    /// Metric-derivative expression for `∫_{C_L} ∂_υ|∇u| dA`.
    pub flux_from_metric: f64,
    /// `4πL` plus the metric-derivative expression for `∫∫κ`.
    pub kappa_from_metric: f64,
    /// `∫_{C_L} ∂_υ|∇u| dA` computed from `u`.
    pub gradnorm_flux: f64,
    /// `∫_{−L}^{L} ∮_{∂Σ_t} κ ds dt` from traced curves.
    pub kappa_integral: f64,
    /// `gradnorm_flux − kappa_integral + 4πL`, which tends to `8πm`.
    pub combined: f64,
}

/// `∂_k g_ij` in the frame `f` (rows are the frame vectors).
fn frame_derivatives(spec: &MetricSpec, p: Point3, f: &[Vec3; 3]) -> Result<[[[f64; 3]; 3]; 3]> {
    let jet = spec.metric_jet(p)?;
    let mut out = [[[0.0; 3]; 3]; 3];
    for (i, fi) in f.iter().enumerate() {
        for (j, fj) in f.iter().enumerate() {
            for (k, fk) in f.iter().enumerate() {
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        for c in 0..3 {
                            s += fi[a] * fj[b] * fk[c] * jet.dg[a][b][c];
                        }
                    }
                }
                out[i][j][k] = s;
            }
        }
    }
    Ok(out)
}

pub fn cylinder_boundary_terms(
    spec: &MetricSpec,
    u: &dyn Potential,
    half_length: f64,
    axis: Vec3,
    settings: &CylinderSettings,
) -> Result<CylinderTerms> {
    let l = half_length;
    let a = linalg::normalize(axis);
    let (e1, e2) = orthonormal_frame(a);
    let frame = [a, e1, e2];
    let (n, m) = (settings.surface_nodes, settings.azimuthal_nodes);
    let dth = 2.0 * PI / m as f64;

    // caps: ½ ∫_{D±} ±Σ_j (g_{1j,j} − g_{jj,1}) dA
    let mut cap_nodes = Vec::new();
    for sign in [-1.0, 1.0] {
        for &(rho, wr) in &gauss_legendre_on(n, 0.0, l) {
            for j in 0..m {
                let th = (j as f64 + 0.5) * dth;
                let p = linalg::add(
                    linalg::scale(a, sign * l),
                    linalg::add(linalg::scale(e1, rho * th.cos()), linalg::scale(e2, rho * th.sin())),
                );
                cap_nodes.push((Point3::from(p), sign, wr * rho * dth));
            }
        }
    }
    let caps = par_map(&cap_nodes, |&(p, sign, w)| {
        let d = frame_derivatives(spec, p, &frame)?;
        let s: f64 = (0..3).map(|j| d[0][j][j] - d[j][j][0]).sum();
        Ok(0.5 * sign * s * w)
    })?;

    // tube terms
    let mut tube_nodes = Vec::new();
    for &(h, wh) in &gauss_legendre_on(n, -l, l) {
        for j in 0..m {
            let th = (j as f64 + 0.5) * dth;
            let (x2, x3) = (l * th.cos(), l * th.sin());
            let p = linalg::add(linalg::scale(a, h), linalg::add(linalg::scale(e1, x2), linalg::scale(e2, x3)));
            tube_nodes.push((Point3::from(p), x2, x3, wh * l * dth));
        }
    }
    let tube_flux = par_map(&tube_nodes, |&(p, x2, x3, w)| {
        let d = frame_derivatives(spec, p, &frame)?;
        Ok((x2 * (d[1][0][0] - d[0][0][1]) + x3 * (d[2][0][0] - d[0][0][2])) * w / (2.0 * l))
    })?;
    let tube_kappa = par_map(&tube_nodes, |&(p, x2, x3, w)| {
        let d = frame_derivatives(spec, p, &frame)?;
        Ok((x2 * (d[2][2][1] - d[1][2][2]) + x3 * (d[1][1][2] - d[2][1][1])) * w / (2.0 * l))
    })?;
    let flux_from_metric = caps.iter().sum::<f64>() + tube_flux.iter().sum::<f64>();
    let kappa_from_metric = 4.0 * PI * l + tube_kappa.iter().sum::<f64>();

    let gradnorm = gradnorm_flux_from(spec, u, &Surface::Cylinder { half_length: l, axis: a }, (n / 2, m / 2))?.value;
    let tube = BoundarySurface::Tube { axis: a, radius: l };
    let mut kappa_integral = 0.0;
    for (t, w) in gauss_legendre_on(settings.levels, -l, l) {
        kappa_integral += w * geodesic_curvature_total(spec, u, &tube, a, t, settings.curve_samples)?.total_kappa;
    }
    Ok(CylinderTerms {
        half_length: l,
        flux_from_metric,
        kappa_from_metric,
        gradnorm_flux: gradnorm,
        kappa_integral,
        combined: gradnorm - kappa_integral + 4.0 * PI * l,
    })
}
