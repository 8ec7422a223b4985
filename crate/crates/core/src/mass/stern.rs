//! The harmonic-function lower bound
//! `B = (1/16π) ∫ (|∇²u|²/|∇u| + R|∇u|) dV`.

use std::f64::consts::PI;

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::discretization::{Region, ScalarField};
use crate::field::Potential;
use crate::geometry::PointGeometry;
use crate::metric::MetricSpec;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct SternSettings {
    /// Regulariser in `φ = √(|∇u|² + ε)`; default `h² · median|∇u|²`.
    pub epsilon: Option<f64>,
    /// Samples with `|∇u| < floor_fraction · median|∇u|` are excluded.
    pub floor_fraction: f64,
}

impl Default for SternSettings {
    fn default() -> Self {
        Self { epsilon: None, floor_fraction: 1e-3 }
    }
}

/// `B` at `ε` and `ε/4`, split into its Hessian and scalar-curvature parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SternIntegral {
    pub bound: f64,
    pub bound_quarter_epsilon: f64,
    pub hessian_part: f64,
    pub scalar_part: f64,
    pub epsilon: f64,
    pub floor: f64,
    pub skipped_fraction: f64,
}

/// `B` together with the mass it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SternReport {
    pub integral: SternIntegral,
    pub mass_estimate: f64,
    pub margin: f64,
    pub budget: f64,
    /// `margin ≥ −budget`.
    pub holds: bool,
    /// `B` does not increase as `ε` shrinks.
    pub monotone_in_epsilon: bool,
}

impl SternReport {
    pub fn new(integral: SternIntegral, mass_estimate: f64, budget: f64) -> Self {
        let margin = mass_estimate - integral.bound;
        Self {
            integral,
            mass_estimate,
            margin,
            budget,
            holds: margin >= -budget && integral.bound >= 0.0,
            // φ appears in the denominator only: smaller ε, larger B
            monotone_in_epsilon: integral.bound_quarter_epsilon >= integral.bound - 1e-12 * integral.bound.abs(),
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-sample integrand terms: Hessian part at ε, at ε/4, scalar part.
fn terms(geo: &PointGeometry, eps: f64) -> [f64; 3] {
    let n2 = geo.norm * geo.norm;
    [geo.hess_norm_sq / (n2 + eps).sqrt(), geo.hess_norm_sq / (n2 + 0.25 * eps).sqrt(), geo.scalar * geo.norm]
}

fn finish(sums: [f64; 4], total: f64, epsilon: f64, floor: f64) -> SternIntegral {
    let k = 1.0 / (16.0 * PI);
    SternIntegral {
        bound: k * (sums[0] + sums[2]),
        bound_quarter_epsilon: k * (sums[1] + sums[2]),
        hessian_part: k * sums[0],
        scalar_part: k * sums[2],
        epsilon,
        floor,
        skipped_fraction: if total > 0.0 { sums[3] / total } else { 0.0 },
    }
}

/// `B` for a solved grid field: second-order difference jets at every
/// active node, trapezoid weights times `√det g`.
pub fn stern_bound(spec: &MetricSpec, u: &ScalarField, settings: &SternSettings) -> Result<SternIntegral> {
    let d = u.domain;
    let h = d.spacing;
    let geos: Vec<Option<(PointGeometry, f64)>> = (0..d.len())
        .into_par_iter()
        .map(|n| {
            let (i, j, k) = d.coords(n);
            if !d.class(i, j, k).is_active() {
                return Ok(None);
            }
            let p = d.point(i, j, k);
            let geo = PointGeometry::new(spec, p, &u.jet_at(i, j, k)?)?;
            Ok(Some((geo, d.trapezoid_weight(i, j, k) * geo.sqrt_det)))
        })
        .collect::<Result<_>>()?;
    let med = median(geos.iter().flatten().map(|(g, _)| g.norm).collect());
    let floor = settings.floor_fraction * med;
    let eps = settings.epsilon.unwrap_or(h * h * med * med);
    // slab sums in index order keep the result independent of thread count
    let dim = d.dim();
    let slab = dim * dim;
    let partial: Vec<[f64; 5]> = geos
        .par_chunks(slab)
        .map(|chunk| {
            let mut acc = [0.0; 5];
            for (geo, w) in chunk.iter().flatten() {
                acc[4] += w;
                if geo.norm < floor || geo.norm == 0.0 {
                    acc[3] += w;
                    continue;
                }
                let t = terms(geo, eps);
                for c in 0..3 {
                    acc[c] += t[c] * w;
                }
            }
            acc
        })
        .collect();
    let mut sums = [0.0; 5];
    for p in partial {
        for c in 0..5 {
            sums[c] += p[c];
        }
    }
    Ok(finish([sums[0], sums[1], sums[2], sums[3]], sums[4], eps, floor))
}

/// `B` for a potential known pointwise (closed form or interpolated), by the
/// region's product Gauss rule. `spacing` sets the default `ε`.
pub fn stern_bound_region(
    spec: &MetricSpec,
    u: &dyn Potential,
    region: &Region,
    resolution: (usize, (usize, usize)),
    spacing: f64,
    settings: &SternSettings,
) -> Result<SternIntegral> {
    let samples = region.samples(resolution.0, resolution.1);
    let geos: Vec<(PointGeometry, f64)> = samples
        .par_iter()
        .map(|s| {
            let geo = PointGeometry::new(spec, s.point, &u.jet(s.point)?)?;
            Ok((geo, s.weight * geo.sqrt_det))
        })
        .collect::<Result<_>>()?;
    let med = median(geos.iter().map(|(g, _)| g.norm).collect());
    let floor = settings.floor_fraction * med;
    let eps = settings.epsilon.unwrap_or(spacing * spacing * med * med);
    let mut sums = [0.0; 4];
    let mut total = 0.0;
    for (geo, w) in &geos {
        total += w;
        if geo.norm < floor || geo.norm == 0.0 {
            sums[3] += w;
            continue;
        }
        let t = terms(geo, eps);
        for c in 0..3 {
            sums[c] += t[c] * w;
        }
    }
    Ok(finish(sums, total, eps, floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::GridDomain;
    use crate::field::AnalyticField;

    #[test]
    fn linear_field_in_flat_space_has_zero_bound() {
        let d = GridDomain::cube(2.0, 0.25).unwrap();
        let u = ScalarField::sample_potential(d, &AnalyticField::linear([0.0, 1.0, 0.0])).unwrap();
        let b = stern_bound(&MetricSpec::flat(), &u, &SternSettings::default()).unwrap();
        assert!(b.bound.abs() < 1e-20);
        assert_eq!(b.skipped_fraction, 0.0);
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(vec![4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
