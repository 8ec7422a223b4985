//! Pointwise identities behind the mass bound, evaluated with second-order
//! central differences of a potential, and their refinement studies.
//!
//! Metric quantities (`g`, `Γ`, `Ric`, `R`) are exact, so every residual
//! isolates the error of differencing the field.

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::autodiff::Jet;
use crate::field::Potential;
use crate::fit;
use crate::geometry::PointGeometry;
use crate::levelset::curvature_from;
use crate::linalg;
use crate::metric::{MetricSpec, Point3};
use crate::{Error, Result};

/// Residuals below this are treated as round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;
pub const ORDER_WINDOW: (f64, f64) = (1.7, 2.3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityTag {
    /// `Ric(∇u,∇u) = ½|∇u|²(R − R_Σ) + |∇|∇u||² − ½|∇²u|²`
    TracedGauss,
    /// `Δφ = φ⁻¹(|∇²u|² + Ric(∇u,∇u) − φ⁻²|∇u|²|∇|∇u||²)`, `φ = √(|∇u|² + ε)`
    BochnerPhi,
    /// `L_g v = w⁻⁵ L_δ(wv)` with `L = Δ − R/8`
    ConformalInvariance,
    /// `Δ_g u = 0`
    Harmonicity,
}

impl IdentityTag {
    pub const ALL: [IdentityTag; 4] =
        [IdentityTag::TracedGauss, IdentityTag::BochnerPhi, IdentityTag::ConformalInvariance, IdentityTag::Harmonicity];
}

/// Central-difference jet of `f` at `p` with spacing `h` (19 points).
pub fn fd_jet(f: &dyn Fn(Point3) -> Result<f64>, p: Point3, h: f64) -> Result<Jet> {
    let at = |d: [i32; 3]| -> Result<f64> {
        let a = p.to_array();
        f(Point3::new(a[0] + d[0] as f64 * h, a[1] + d[1] as f64 * h, a[2] + d[2] as f64 * h))
    };
    let c = at([0, 0, 0])?;
    let mut jet = Jet { v: c, d: [0.0; 3], h: [[0.0; 3]; 3] };
    for a in 0..3 {
        let mut e = [0; 3];
        e[a] = 1;
        let plus = at(e)?;
        let minus = at(e.map(|x| -x))?;
        jet.d[a] = (plus - minus) / (2.0 * h);
        jet.h[a][a] = (plus - 2.0 * c + minus) / (h * h);
        for b in a + 1..3 {
            let mut d = [0; 3];
            let mut q = [0.0; 4];
            for (slot, (sa, sb)) in [(1, 1), (1, -1), (-1, 1), (-1, -1)].into_iter().enumerate() {
                d[a] = sa;
                d[b] = sb;
                q[slot] = at(d)?;
            }
            let m = (q[0] - q[1] - q[2] + q[3]) / (4.0 * h * h);
            jet.h[a][b] = m;
            jet.h[b][a] = m;
        }
    }
    Ok(jet)
}

/// Traced Gauss residual with `R_Σ` from the curvature sample.
pub fn traced_gauss_residual(geo: &PointGeometry, floor: f64) -> Result<f64> {
    let k = curvature_from(geo, floor)?;
    let n2 = geo.norm * geo.norm;
    let rhs = 0.5 * n2 * (geo.scalar - k.sigma_scalar) + geo.d_norm_sq - 0.5 * geo.hess_norm_sq;
    Ok((geo.ricci_grad() - rhs).abs())
}

pub fn check_traced_gauss(spec: &MetricSpec, u: &dyn Potential, p: Point3, h: f64, floor: f64) -> Result<f64> {
    let jet = fd_jet(&|q| u.value(q), p, h)?;
    traced_gauss_residual(&PointGeometry::new(spec, p, &jet)?, floor)
}

/// Bochner-φ residual and the slack of the inequality
/// `Δφ ≥ ½φ⁻¹(|∇²u|² + |∇u|²(R − R_Σ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BochnerSample {
    pub residual: f64,
    pub inequality_slack: f64,
}

fn grad_norm_sq(spec: &MetricSpec, jet: &Jet, p: Point3) -> Result<f64> {
    let ginv = linalg::inverse(&spec.metric_value(p)?);
    Ok(linalg::bilinear(&ginv, jet.d, jet.d))
}

pub fn check_bochner_phi(
    spec: &MetricSpec,
    u: &dyn Potential,
    p: Point3,
    h: f64,
    eps: f64,
    floor: f64,
) -> Result<BochnerSample> {
    let value = |q: Point3| u.value(q);
    let phi = |q: Point3| -> Result<f64> { Ok((grad_norm_sq(spec, &fd_jet(&value, q, h)?, q)? + eps).sqrt()) };
    let pj = fd_jet(&phi, p, h)?;
    let geo = PointGeometry::new(spec, p, &fd_jet(&value, p, h)?)?;
    let mut lap = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut s = pj.h[i][j];
            for k in 0..3 {
                s -= geo.gamma[k][i][j] * pj.d[k];
            }
            lap += geo.ginv[i][j] * s;
        }
    }
    let n2 = geo.norm * geo.norm;
    let f = (n2 + eps).sqrt();
    let rhs = (geo.hess_norm_sq + geo.ricci_grad() - n2 * geo.d_norm_sq / (f * f)) / f;
    let k = curvature_from(&geo, floor)?;
    let lower = 0.5 * (geo.hess_norm_sq + n2 * (geo.scalar - k.sigma_scalar)) / f;
    Ok(BochnerSample { residual: (lap - rhs).abs(), inequality_slack: lap - lower })
}

/// Difference path: both sides of `L_g v = w⁻⁵ L_δ(wv)` from central
/// differences of `v` and of `wv`.
pub fn check_conformal_invariance(spec: &MetricSpec, v: &dyn Potential, p: Point3, h: f64) -> Result<f64> {
    let w = |q: Point3| -> Result<f64> {
        spec.conformal_factor(q)?
            .map(|j| j.v)
            .ok_or_else(|| Error::invalid("identity", "metric is not conformally flat"))
    };
    let vj = fd_jet(&|q| v.value(q), p, h)?;
    let wv = fd_jet(&|q| Ok(w(q)? * v.value(q)?), p, h)?;
    let geo = PointGeometry::new(spec, p, &vj)?;
    let lhs = geo.laplacian - geo.scalar * vj.v / 8.0;
    let rhs = w(p)?.powi(-5) * (wv.h[0][0] + wv.h[1][1] + wv.h[2][2]);
    Ok((lhs - rhs).abs())
}

/// Closed-form path of the same identity with exact jets of `v` and `w`.
pub fn check_conformal_invariance_exact(spec: &MetricSpec, v: &dyn Potential, p: Point3) -> Result<f64> {
    let w = spec.conformal_factor(p)?.ok_or_else(|| Error::invalid("identity", "metric is not conformally flat"))?;
    let vj = v.jet(p)?;
    let geo = PointGeometry::new(spec, p, &vj)?;
    let wv = w * vj;
    let lhs = geo.laplacian - geo.scalar * vj.v / 8.0;
    let rhs = w.v.powi(-5) * (wv.h[0][0] + wv.h[1][1] + wv.h[2][2]);
    Ok((lhs - rhs).abs())
}

pub fn check_harmonicity(spec: &MetricSpec, u: &dyn Potential, p: Point3, h: f64) -> Result<f64> {
    let jet = fd_jet(&|q| u.value(q), p, h)?;
    Ok(PointGeometry::new(spec, p, &jet)?.laplacian.abs())
}

/// Halton points in `[-1, 1]³` scaled to the shell `r_min ≤ r ≤ r_max`,
/// snapped to the lattice of spacing `h` and deduplicated.
pub fn sample_nodes(count: usize, r_min: f64, r_max: f64, h: f64) -> Vec<Point3> {
    fn halton(mut i: usize, base: usize) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    let mut out: Vec<Point3> = Vec::with_capacity(count);
    let mut seen = std::collections::HashSet::new();
    let mut i = 1;
    while out.len() < count && i < 1_000_000 {
        let q = [halton(i, 2), halton(i, 3), halton(i, 5)].map(|c| ((2.0 * c - 1.0) * r_max / h).round() as i64);
        i += 1;
        let p = Point3::new(q[0] as f64 * h, q[1] as f64 * h, q[2] as f64 * h);
        if p.r() >= r_min && p.r() <= r_max && seen.insert(q) {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyStatus {
    /// Every residual is at the round-off floor.
    Exact,
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: IdentityTag,
    pub samples: usize,
    pub spacings: Vec<f64>,
    /// RMS residual over the samples at each spacing.
    pub residuals: Vec<f64>,
    pub max_residuals: Vec<f64>,
    pub order: Option<f64>,
    pub window: (f64, f64),
    pub status: StudyStatus,
    /// Fraction of Bochner samples satisfying the pointwise inequality.
    pub inequality_fraction: Option<f64>,
    pub skipped: usize,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct StudySettings {
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// `ε` in the Bochner-φ checks.
    pub epsilon: f64,
    pub gradient_floor: f64,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self { samples: 200, r_min: 2.0, r_max: 8.0, epsilon: 1.0, gradient_floor: 1e-8 }
    }
}

/// Residual of one identity at one point; `v` is the test function for the
/// conformal check, `u` the potential for the others.
fn residual_at(
    tag: IdentityTag,
    spec: &MetricSpec,
    u: &dyn Potential,
    v: &dyn Potential,
    p: Point3,
    h: f64,
    s: &StudySettings,
) -> Result<(f64, Option<bool>)> {
    Ok(match tag {
        IdentityTag::TracedGauss => (check_traced_gauss(spec, u, p, h, s.gradient_floor)?, None),
        IdentityTag::BochnerPhi => {
            let b = check_bochner_phi(spec, u, p, h, s.epsilon, s.gradient_floor)?;
            (b.residual, Some(b.inequality_slack >= 0.0))
        }
        IdentityTag::ConformalInvariance => (check_conformal_invariance(spec, v, p, h)?, None),
        IdentityTag::Harmonicity => (check_harmonicity(spec, u, p, h)?, None),
    })
}

/// Residuals at common lattice nodes for each spacing and the
/// least-squares order of `log residual` against `log h`.
pub fn convergence_study(
    tag: IdentityTag,
    spec: &MetricSpec,
    u: &dyn Potential,
    v: &dyn Potential,
    spacings: &[f64],
    settings: &StudySettings,
) -> Result<IdentityReport> {
    if spacings.len() < 3 {
        return Err(Error::invalid("convergence study", "need at least three spacings"));
    }
    let coarsest = spacings.iter().copied().fold(0.0, f64::max);
    let points = sample_nodes(settings.samples, settings.r_min, settings.r_max, coarsest);
    let mut residuals = Vec::new();
    let mut max_residuals = Vec::new();
    let mut skipped = 0;
    let mut ok = 0usize;
    let mut checked = 0usize;
    for &h in spacings {
        let rows: Vec<Option<(f64, Option<bool>)>> = points
            .par_iter()
            .map(|&p| match residual_at(tag, spec, u, v, p, h, settings) {
                Ok(r) => Ok(Some(r)),
                Err(Error::NearCritical { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let mut sq = 0.0;
        let mut mx: f64 = 0.0;
        let mut n = 0usize;
        for r in &rows {
            match r {
                Some((res, ineq)) => {
                    sq += res * res;
                    mx = mx.max(*res);
                    n += 1;
                    if let Some(b) = ineq {
                        checked += 1;
                        ok += *b as usize;
                    }
                }
                None => skipped += 1,
            }
        }
        residuals.push(if n > 0 { (sq / n as f64).sqrt() } else { 0.0 });
        max_residuals.push(mx);
    }
    let above: Vec<(f64, f64)> =
        spacings.iter().zip(&residuals).filter(|(_, &r)| r > ROUNDOFF_FLOOR).map(|(&h, &r)| (h, r)).collect();
    let (order, status, warning) = if above.is_empty() {
        (None, StudyStatus::Exact, None)
    } else if above.len() < 2 {
        (None, StudyStatus::Fail, Some("only one residual above the round-off floor".to_string()))
    } else {
        let (h, r): (Vec<f64>, Vec<f64>) = above.iter().copied().unzip();
        let q = fit::convergence_order(&h, &r);
        let pass = q >= ORDER_WINDOW.0 && q <= ORDER_WINDOW.1;
        let warn = (above.len() < spacings.len()).then(|| "some residuals at the round-off floor".to_string());
        (Some(q), if pass { StudyStatus::Pass } else { StudyStatus::Fail }, warn)
    };
    Ok(IdentityReport {
        identity: tag,
        samples: points.len(),
        spacings: spacings.to_vec(),
        residuals,
        max_residuals,
        order,
        window: ORDER_WINDOW,
        status,
        inequality_fraction: (checked > 0).then(|| ok as f64 / checked as f64),
        skipped,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;

    #[test]
    fn quadratics_are_differenced_exactly() {
        let f = |p: Point3| Ok(p.x * p.x - 2.0 * p.y * p.z + 3.0 * p.z);
        let j = fd_jet(&f, Point3::new(0.3, -0.2, 1.1), 0.1).unwrap();
        assert!((j.d[0] - 0.6).abs() < 1e-12 && (j.h[1][2] + 2.0).abs() < 1e-10 && (j.h[0][0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn flat_linear_data_is_exact() {
        let flat = MetricSpec::flat();
        let u = AnalyticField::linear([0.0, 0.0, 1.0]);
        let p = Point3::new(1.0, 2.0, -0.5);
        assert!(check_traced_gauss(&flat, &u, p, 0.25, 1e-8).unwrap() < 1e-12);
        let b = check_bochner_phi(&flat, &u, p, 0.25, 0.1, 1e-8).unwrap();
        assert!(b.residual < 1e-10);
        assert!(check_harmonicity(&flat, &u, p, 0.25).unwrap() < 1e-12);
    }

    #[test]
    fn saddle_bochner_in_flat_space() {
        // |∇u|² = 4(x² + y²) and φ = √(4(x²+y²) + ε); compare with the identity
        let flat = MetricSpec::flat();
        let p = Point3::new(1.0, 0.5, 0.0);
        let coarse = check_bochner_phi(&flat, &AnalyticField::Saddle, p, 0.1, 0.1, 1e-8).unwrap().residual;
        let fine = check_bochner_phi(&flat, &AnalyticField::Saddle, p, 0.05, 0.1, 1e-8).unwrap().residual;
        assert!(fine < coarse / 3.0, "{coarse} {fine}");
    }

    #[test]
    fn conformal_identity_reduces_to_scalar_curvature() {
        struct One;
        impl Potential for One {
            fn jet(&self, _: Point3) -> Result<Jet> {
                Ok(Jet::constant(1.0))
            }
        }
        let spec = MetricSpec::bump(1.0, 0.3, 3.0, 1.0);
        let r = check_conformal_invariance_exact(&spec, &One, Point3::new(1.0, 2.5, 0.4)).unwrap();
        assert!(r < 1e-12, "{r}");
        let s = MetricSpec::schwarzschild(1.0);
        let v = AnalyticField::harmonic_linear(s, [1.0, 0.0, 0.0]);
        assert!(check_conformal_invariance_exact(&s, &v, Point3::new(2.0, 1.0, 0.0)).unwrap() < 1e-13);
    }

    #[test]
    fn halton_nodes_are_reproducible_and_in_shell() {
        let a = sample_nodes(50, 2.0, 8.0, 0.5);
        let b = sample_nodes(50, 2.0, 8.0, 0.5);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|p| p.r() >= 2.0 && p.r() <= 8.0));
    }
}
