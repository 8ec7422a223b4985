//! Boundary curves `∂Σ_t` on coordinate spheres and tubes, their geodesic
//! curvature inside `Σ_t`, and transversality.
//!
//! Curves are traced by root finding on each meridian (sphere) or axial line
//! (tube), parametrised by the azimuth `φ` about `axis`. The tangent field is
//! `T = ∂u × N` with `N` the Euclidean normal of the bounding surface, and
//! `κ = g(ν̂, ∇_T T)/g(T, T)` with `ν̂` the unit conormal pointing into `Σ_t`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::Vec3;
use crate::discretization::quadrature::orthonormal_frame;
use crate::field::Potential;
use crate::geometry::PointGeometry;
use crate::linalg;
use crate::metric::{MetricSpec, Point3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The level set lies inside the surface.
    Inside,
    /// The level set lies outside (an excised ball).
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum BoundarySurface {
    Sphere {
        radius: f64,
        side: Side,
    },
    /// Round tube of the given radius about a line through the origin.
    Tube {
        axis: Vec3,
        radius: f64,
    },
}

impl BoundarySurface {
    fn normal(&self, x: Vec3) -> Vec3 {
        match *self {
            BoundarySurface::Sphere { .. } => x,
            BoundarySurface::Tube { axis, .. } => linalg::sub(x, linalg::scale(axis, linalg::dot(x, axis))),
        }
    }

    /// Directional derivative of the normal field along `v`.
    fn normal_derivative(&self, v: Vec3) -> Vec3 {
        match *self {
            BoundarySurface::Sphere { .. } => v,
            BoundarySurface::Tube { axis, .. } => linalg::sub(v, linalg::scale(axis, linalg::dot(v, axis))),
        }
    }

    /// Sign taking the outward normal to the conormal direction into `Σ`.
    fn inward_sign(&self) -> f64 {
        match self {
            BoundarySurface::Sphere { side: Side::Outside, .. } => 1.0,
            _ => -1.0,
        }
    }
}

/// Geometry of the boundary curve at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub point: Point3,
    pub kappa: f64,
    /// `|T|_g / |dφ(T)|`: metric arclength per unit azimuth.
    pub speed: f64,
    /// `1/|dφ(T)|`: parameter length of `α' = ∂u × N` per unit azimuth.
    pub parameter_rate: f64,
    /// `1 − |cos θ|`, `θ` the angle between `∇u` and the surface normal.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveIntegral {
    pub level: f64,
    /// `∮ κ ds`
    pub total_kappa: f64,
    pub length: f64,
    /// Parameter interval of `α' = ∂u × N`.
    pub theta0: f64,
    pub min_margin: f64,
    pub points: Vec<CurvePoint>,
}

/// Pointwise curve geometry. Errors if the level set is tangent to the surface.
pub fn curve_point(
    spec: &MetricSpec,
    u: &dyn Potential,
    surface: &BoundarySurface,
    axis: Vec3,
    p: Point3,
) -> Result<CurvePoint> {
    let jet = u.jet(p)?;
    let geo = PointGeometry::new(spec, p, &jet)?;
    let x = p.to_array();
    let n = surface.normal(x);
    let t = linalg::cross(jet.d, n);
    let tt = geo.inner(t, t);
    if !(tt > 0.0) {
        return Err(Error::NotTransversal(format!("∂u ∥ N at {p:?}")));
    }
    let dt =
        linalg::add(linalg::cross(linalg::mat_vec(&jet.h, t), n), linalg::cross(jet.d, surface.normal_derivative(t)));
    let acc = geo.acceleration(t, dt);
    let nu = linalg::scale(geo.grad, 1.0 / geo.norm);
    let mut c = linalg::scale(n, surface.inward_sign());
    c = linalg::sub(c, linalg::scale(nu, geo.inner(c, nu)));
    c = linalg::sub(c, linalg::scale(t, geo.inner(c, t) / tt));
    let c = linalg::scale(c, 1.0 / geo.length(c));
    let kappa = geo.inner(c, acc) / tt;

    let perp = linalg::sub(x, linalg::scale(axis, linalg::dot(x, axis)));
    let dphi = linalg::dot(linalg::cross(perp, t), axis) / linalg::dot(perp, perp);
    if dphi == 0.0 {
        return Err(Error::NotTransversal(format!("curve stalls in azimuth at {p:?}")));
    }
    let (surf_normal, _) = geo.unit_normal(n);
    let cos = cos_angle(&geo, nu, surf_normal).unwrap_or(1.0);
    Ok(CurvePoint {
        point: p,
        kappa,
        speed: tt.sqrt() / dphi.abs(),
        parameter_rate: 1.0 / dphi.abs(),
        margin: 1.0 - cos.abs(),
    })
}

/// `g(a, b)/(|a||b|)` for contravariant `a`, `b`.
fn cos_angle(geo: &PointGeometry, a: Vec3, b: Vec3) -> Option<f64> {
    let (la, lb) = (geo.length(a), geo.length(b));
    (la > 0.0 && lb > 0.0).then(|| geo.inner(a, b) / (la * lb))
}

/// Point of `{u = t}` on the surface at azimuth `phi` about `axis`.
pub fn locate(u: &dyn Potential, surface: &BoundarySurface, axis: Vec3, t: f64, phi: f64) -> Result<Point3> {
    let (e1, e2) = orthonormal_frame(axis);
    let radial = linalg::add(linalg::scale(e1, phi.cos()), linalg::scale(e2, phi.sin()));
    let (at, lo, hi): (Box<dyn Fn(f64) -> Vec3>, f64, f64) = match *surface {
        BoundarySurface::Sphere { radius, .. } => (
            Box::new(move |th: f64| {
                linalg::scale(linalg::add(linalg::scale(axis, th.cos()), linalg::scale(radial, th.sin())), radius)
            }),
            0.0,
            PI,
        ),
        BoundarySurface::Tube { radius, .. } => {
            let reach = 4.0 * radius.max(1.0) + t.abs();
            (Box::new(move |s: f64| linalg::add(linalg::scale(axis, s), linalg::scale(radial, radius))), -reach, reach)
        }
    };
    let f = |s: f64| -> Result<f64> { Ok(u.value(Point3::from(at(s)))? - t) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::EmptyLevel { level: t, min: fa.min(fb) + t, max: fa.max(fb) + t });
    }
    // bisection to a safe bracket, then secant steps
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= 4.0 * f64::EPSILON * m.abs().max(1.0) {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(Point3::from(at(m)));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let s = if fb != fa { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
    Ok(Point3::from(at(s.clamp(a.min(b), a.max(b)))))
}

/// Traces `∂Σ_t` on the surface and integrates `κ ds`, arclength and the
/// parameter interval with the `samples`-point periodic trapezoid rule.
pub fn geodesic_curvature_total(
    spec: &MetricSpec,
    u: &dyn Potential,
    surface: &BoundarySurface,
    axis: Vec3,
    t: f64,
    samples: usize,
) -> Result<CurveIntegral> {
    let axis = linalg::normalize(axis);
    let dphi = 2.0 * PI / samples as f64;
    let points: Result<Vec<CurvePoint>> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let p = locate(u, surface, axis, t, j as f64 * dphi)?;
            curve_point(spec, u, surface, axis, p)
        })
        .collect();
    let points = points?;
    let total_kappa = points.iter().map(|c| c.kappa * c.speed).sum::<f64>() * dphi;
    let length = points.iter().map(|c| c.speed).sum::<f64>() * dphi;
    let theta0 = points.iter().map(|c| c.parameter_rate).sum::<f64>() * dphi;
    let min_margin = points.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    if !(min_margin > 0.0) {
        return Err(Error::NotTransversal(format!("margin {min_margin:.3e} at level {t}")));
    }
    Ok(CurveIntegral { level: t, total_kappa, length, theta0, min_margin, points })
}

/// `1 − |cos θ|` between `∇u` and the normal of the sphere through `p`.
pub fn transversality_margin(spec: &MetricSpec, u: &dyn Potential, p: Point3) -> Result<f64> {
    let geo = PointGeometry::new(spec, p, &u.jet(p)?)?;
    let (n, _) = geo.unit_normal(p.to_array());
    let cos = cos_angle(&geo, geo.grad, n).ok_or(Error::NearCritical { point: p, norm: geo.norm, floor: 0.0 })?;
    Ok(1.0 - cos.abs())
}

/// `∮κ ds` along a closed polyline on the surface (for example a mesh
/// boundary loop), trapezoid rule in metric arclength.
pub fn kappa_along_polyline(
    spec: &MetricSpec,
    u: &dyn Potential,
    surface: &BoundarySurface,
    points: &[Vec3],
) -> Result<f64> {
    let n = points.len();
    if n < 3 {
        return Err(Error::invalid("polyline", "need at least three points"));
    }
    // azimuth axis only enters the speed, which is not used here
    let axis = [1.0, 0.0, 0.0];
    let kappa: Result<Vec<(f64, PointGeometry)>> = points
        .par_iter()
        .map(|&x| {
            let p = Point3::from(x);
            let geo = PointGeometry::new(spec, p, &u.jet(p)?)?;
            let k = curve_point(spec, u, surface, axis, p).map(|c| c.kappa).or_else(|e| match e {
                Error::NotTransversal(_) => curve_point(spec, u, surface, [0.0, 1.0, 0.0], p).map(|c| c.kappa),
                e => Err(e),
            })?;
            Ok((k, geo))
        })
        .collect();
    let kappa = kappa?;
    let mut total = 0.0;
    for q in 0..n {
        let (a, b) = (q, (q + 1) % n);
        let d = linalg::sub(points[b], points[a]);
        let len = 0.5 * (kappa[a].1.length(d) + kappa[b].1.length(d));
        total += 0.5 * (kappa[a].0 + kappa[b].0) * len;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;

    #[test]
    fn great_circle_bounds_a_flat_disk() {
        let u = AnalyticField::linear([1.0, 0.0, 0.0]);
        let s = BoundarySurface::Sphere { radius: 5.0, side: Side::Inside };
        let c = geodesic_curvature_total(&MetricSpec::flat(), &u, &s, [1.0, 0.0, 0.0], 0.0, 64).unwrap();
        assert!((c.total_kappa - 2.0 * PI).abs() < 1e-10, "{}", c.total_kappa);
        assert!((c.length - 10.0 * PI).abs() < 1e-9);
        assert!((c.theta0 - 2.0 * PI).abs() < 1e-10);
        assert!((c.min_margin - 1.0).abs() < 1e-10);
    }

    #[test]
    fn small_circle_on_sphere() {
        // the circle x = t on S_r bounds a flat disk of radius √(r² − t²)
        let u = AnalyticField::linear([1.0, 0.0, 0.0]);
        let s = BoundarySurface::Sphere { radius: 5.0, side: Side::Inside };
        let c = geodesic_curvature_total(&MetricSpec::flat(), &u, &s, [1.0, 0.0, 0.0], 3.0, 64).unwrap();
        assert!((c.total_kappa - 2.0 * PI).abs() < 1e-10);
        assert!((c.length - 8.0 * PI).abs() < 1e-9);
        assert!((c.min_margin - 0.4).abs() < 1e-10);
    }

    #[test]
    fn tube_cross_sections_are_flat_disks() {
        let u = AnalyticField::linear([0.0, 0.0, 1.0]);
        let s = BoundarySurface::Tube { axis: [0.0, 0.0, 1.0], radius: 3.0 };
        let c = geodesic_curvature_total(&MetricSpec::flat(), &u, &s, [0.0, 0.0, 1.0], 1.5, 32).unwrap();
        assert!((c.total_kappa - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn pole_is_tangential() {
        let u = AnalyticField::linear([1.0, 0.0, 0.0]);
        let m = transversality_margin(&MetricSpec::flat(), &u, Point3::new(4.0, 0.0, 0.0)).unwrap();
        assert!(m.abs() < 1e-14);
        let m = transversality_margin(&MetricSpec::flat(), &u, Point3::new(0.0, 4.0, 0.0)).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
    }
}
