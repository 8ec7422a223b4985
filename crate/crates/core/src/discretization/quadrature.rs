//! Gauss–Legendre based surface and volume quadrature on spheres, shells,
//! cylinders and box boundaries.

use std::f64::consts::PI;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::autodiff::Vec3;
use crate::linalg;
use crate::metric::{MetricSpec, Point3};
use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    x.iter().zip(&w).map(|(&x, &w)| (a + half * (x + 1.0), w * half)).collect()
}

/// Orthonormal `(e1, e2)` completing `axis` to a right-handed frame.
pub fn orthonormal_frame(axis: Vec3) -> (Vec3, Vec3) {
    let a = linalg::normalize(axis);
    let seed = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = linalg::normalize(linalg::sub(seed, linalg::scale(a, linalg::dot(seed, a))));
    let e2 = linalg::cross(a, e1);
    (e1, e2)
}

/// A quadrature node on a surface: point, outward Euclidean unit normal and
/// Euclidean area weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: Point3,
    pub normal: Vec3,
    pub weight: f64,
}

/// Area element used when integrating over a surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaElement {
    Euclidean,
    Induced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum Surface {
    Sphere {
        radius: f64,
    },
    /// Caps at `x·a = ±L` and tube of radius `L` about `a`.
    Cylinder {
        half_length: f64,
        axis: Vec3,
    },
    /// The six faces of `[-L, L]^3`.
    BoxFaces {
        half_extent: f64,
    },
}

/// Default resolution before automatic doubling.
pub const DEFAULT_RESOLUTION: (usize, usize) = (64, 128);
/// Doubling stops once the integral moves by less than this (relative).
pub const SURFACE_TOLERANCE: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 3;

impl Surface {
    /// Quadrature nodes at resolution `(n, m)`: `n` Gauss–Legendre nodes in
    /// the non-periodic direction and `m` uniform nodes in the periodic one.
    pub fn samples(&self, (n, m): (usize, usize)) -> Vec<SurfaceSample> {
        let mut out = Vec::new();
        match *self {
            Surface::Sphere { radius } => {
                let (x, w) = gauss_legendre(n);
                let dphi = 2.0 * PI / m as f64;
                for (&c, &wc) in x.iter().zip(&w) {
                    let s = (1.0 - c * c).sqrt();
                    for j in 0..m {
                        let phi = (j as f64 + 0.5) * dphi;
                        let normal = [s * phi.cos(), s * phi.sin(), c];
                        out.push(SurfaceSample {
                            point: Point3::from(linalg::scale(normal, radius)),
                            normal,
                            weight: radius * radius * wc * dphi,
                        });
                    }
                }
            }
            Surface::Cylinder { half_length, axis } => {
                let l = half_length;
                let a = linalg::normalize(axis);
                let (e1, e2) = orthonormal_frame(a);
                let dth = 2.0 * PI / m as f64;
                for sign in [-1.0, 1.0] {
                    for &(rho, wr) in &gauss_legendre_on(n, 0.0, l) {
                        for j in 0..m {
                            let th = (j as f64 + 0.5) * dth;
                            let radial = linalg::add(linalg::scale(e1, th.cos()), linalg::scale(e2, th.sin()));
                            let p = linalg::add(linalg::scale(a, sign * l), linalg::scale(radial, rho));
                            out.push(SurfaceSample {
                                point: Point3::from(p),
                                normal: linalg::scale(a, sign),
                                weight: wr * rho * dth,
                            });
                        }
                    }
                }
                for &(h, wh) in &gauss_legendre_on(n, -l, l) {
                    for j in 0..m {
                        let th = (j as f64 + 0.5) * dth;
                        let radial = linalg::add(linalg::scale(e1, th.cos()), linalg::scale(e2, th.sin()));
                        let p = linalg::add(linalg::scale(a, h), linalg::scale(radial, l));
                        out.push(SurfaceSample { point: Point3::from(p), normal: radial, weight: wh * l * dth });
                    }
                }
            }
            Surface::BoxFaces { half_extent } => {
                let rule = gauss_legendre_on(n, -half_extent, half_extent);
                for axis in 0..3 {
                    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
                    for sign in [-1.0, 1.0] {
                        for &(s, ws) in &rule {
                            for &(t, wt) in &rule {
                                let mut p = [0.0; 3];
                                p[axis] = sign * half_extent;
                                p[b] = s;
                                p[c] = t;
                                let mut normal = [0.0; 3];
                                normal[axis] = sign;
                                out.push(SurfaceSample { point: Point3::from(p), normal, weight: ws * wt });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Euclidean area, for checking the rules.
    pub fn euclidean_area(&self) -> f64 {
        match *self {
            Surface::Sphere { radius } => 4.0 * PI * radius * radius,
            Surface::Cylinder { half_length, .. } => 6.0 * PI * half_length * half_length,
            Surface::BoxFaces { half_extent } => 24.0 * half_extent * half_extent,
        }
    }
}

/// Result of an adaptive surface integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceIntegral {
    pub value: f64,
    pub resolution: (usize, usize),
    pub relative_change: f64,
}

/// Ratio of the induced to the Euclidean area element for a surface with
/// Euclidean unit normal `n`: `√det g · |n|_{g^{-1}}`.
pub fn induced_factor(spec: &MetricSpec, p: Point3, n: Vec3) -> Result<f64> {
    let jet = spec.metric_jet(p)?;
    let ginv = jet.inverse();
    Ok(jet.sqrt_det() * linalg::bilinear(&ginv, n, n).sqrt())
}

/// Integrates `f` over the surface with the chosen element, doubling the
/// resolution until the value changes by less than [`SURFACE_TOLERANCE`].
pub fn surface_integral<F>(surface: &Surface, element: AreaElement, spec: &MetricSpec, f: F) -> Result<SurfaceIntegral>
where
    F: Fn(&SurfaceSample) -> Result<f64> + Sync,
{
    surface_integral_from(surface, element, spec, DEFAULT_RESOLUTION, f)
}

pub fn surface_integral_from<F>(
    surface: &Surface,
    element: AreaElement,
    spec: &MetricSpec,
    start: (usize, usize),
    f: F,
) -> Result<SurfaceIntegral>
where
    F: Fn(&SurfaceSample) -> Result<f64> + Sync,
{
    let eval = |res: (usize, usize)| -> Result<f64> {
        let samples = surface.samples(res);
        let terms = crate::mass::par_map(&samples, |s| {
            let factor = match element {
                AreaElement::Euclidean => 1.0,
                AreaElement::Induced => induced_factor(spec, s.point, s.normal)?,
            };
            Ok(f(s)? * s.weight * factor)
        })?;
        Ok(terms.iter().sum())
    };
    let mut res = start;
    let mut value = eval(res)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        let next_res = (res.0 * 2, res.1 * 2);
        let next = eval(next_res)?;
        let diff = (next - value).abs();
        change = diff / next.abs().max(1e-300);
        res = next_res;
        value = next;
        if change < SURFACE_TOLERANCE || diff < 1e-14 {
            break;
        }
    }
    Ok(SurfaceIntegral { value, resolution: res, relative_change: change })
}

/// Volume regions integrated by product Gauss rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum Region {
    Ball {
        radius: f64,
    },
    Shell {
        inner: f64,
        outer: f64,
    },
    /// Solid cylinder of half-length and radius `L`, minus a centred ball.
    Cylinder {
        half_length: f64,
        axis: Vec3,
        excision: f64,
    },
}

/// A volume quadrature node with its Euclidean weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeSample {
    pub point: Point3,
    pub weight: f64,
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Ball { radius } => radius > 0.0,
            Region::Shell { inner, outer } => inner >= 0.0 && outer > inner,
            Region::Cylinder { half_length, excision, .. } => {
                half_length > 0.0 && excision >= 0.0 && excision < half_length
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("region", format!("{self:?}")))
        }
    }

    /// Outer radius bound, used to pick lattices covering the region.
    pub fn extent(&self) -> f64 {
        match *self {
            Region::Ball { radius } => radius,
            Region::Shell { outer, .. } => outer,
            Region::Cylinder { half_length, .. } => half_length * std::f64::consts::SQRT_2,
        }
    }

    /// Product rule with `nr` radial (or axial) nodes and an `(n, m)`
    /// angular resolution.
    pub fn samples(&self, nr: usize, (n, m): (usize, usize)) -> Vec<VolumeSample> {
        let mut out = Vec::new();
        let sphere_rule = |radial: &[(f64, f64)], out: &mut Vec<VolumeSample>| {
            let unit = Surface::Sphere { radius: 1.0 }.samples((n, m));
            for &(r, wr) in radial {
                for s in &unit {
                    out.push(VolumeSample {
                        point: Point3::from(linalg::scale(s.normal, r)),
                        weight: wr * r * r * s.weight,
                    });
                }
            }
        };
        match *self {
            Region::Ball { radius } => sphere_rule(&gauss_legendre_on(nr, 0.0, radius), &mut out),
            Region::Shell { inner, outer } => sphere_rule(&gauss_legendre_on(nr, inner, outer), &mut out),
            Region::Cylinder { half_length: l, axis, excision } => {
                let a = linalg::normalize(axis);
                let (e1, e2) = orthonormal_frame(a);
                let dth = 2.0 * PI / m as f64;
                let mut radial = Vec::new();
                if excision > 0.0 {
                    radial.extend(gauss_legendre_on(nr, 0.0, excision));
                    radial.extend(gauss_legendre_on(nr, excision, l));
                } else {
                    radial.extend(gauss_legendre_on(nr, 0.0, l));
                }
                for &(rho, wr) in &radial {
                    let gap = if rho < excision { (excision * excision - rho * rho).sqrt() } else { 0.0 };
                    let mut axial = Vec::new();
                    if gap > 0.0 {
                        axial.extend(gauss_legendre_on(n, -l, -gap));
                        axial.extend(gauss_legendre_on(n, gap, l));
                    } else {
                        axial.extend(gauss_legendre_on(2 * n, -l, l));
                    }
                    for &(h, wh) in &axial {
                        for j in 0..m {
                            let th = (j as f64 + 0.5) * dth;
                            let dir = linalg::add(linalg::scale(e1, th.cos()), linalg::scale(e2, th.sin()));
                            let p = linalg::add(linalg::scale(a, h), linalg::scale(dir, rho));
                            out.push(VolumeSample { point: Point3::from(p), weight: wr * wh * rho * dth });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn euclidean_volume(&self) -> f64 {
        match *self {
            Region::Ball { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            Region::Shell { inner, outer } => 4.0 / 3.0 * PI * (outer.powi(3) - inner.powi(3)),
            Region::Cylinder { half_length: l, excision, .. } => {
                2.0 * PI * l.powi(3) - 4.0 / 3.0 * PI * excision.powi(3)
            }
        }
    }

    /// Signed clip functions, nonpositive inside, with their boundary class.
    pub fn contains(&self, p: Point3) -> bool {
        match *self {
            Region::Ball { radius } => p.r() <= radius,
            Region::Shell { inner, outer } => p.r() <= outer && p.r() >= inner,
            Region::Cylinder { half_length, axis, excision } => {
                let (along, rho) = crate::discretization::grid::axial(linalg::normalize(axis), p.to_array());
                along.abs() <= half_length && rho <= half_length && p.r() >= excision
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_and_cylinder_areas() {
        for surf in [
            Surface::Sphere { radius: 3.0 },
            Surface::Cylinder { half_length: 2.0, axis: [0.0, 0.6, 0.8] },
            Surface::BoxFaces { half_extent: 1.5 },
        ] {
            let a: f64 = surf.samples((16, 32)).iter().map(|s| s.weight).sum();
            assert!((a / surf.euclidean_area() - 1.0).abs() < 1e-10, "{surf:?}");
        }
    }

    #[test]
    fn second_moment_on_sphere() {
        let r: f64 = 2.0;
        let s: f64 =
            Surface::Sphere { radius: r }.samples((16, 32)).iter().map(|s| s.weight * s.point.x * s.point.x).sum();
        assert!((s - 4.0 * PI / 3.0 * r.powi(4)).abs() < 1e-10);
    }

    #[test]
    fn region_volumes() {
        for reg in [
            Region::Ball { radius: 2.0 },
            Region::Shell { inner: 0.5, outer: 3.0 },
            Region::Cylinder { half_length: 2.0, axis: [1.0, 0.0, 0.0], excision: 0.7 },
        ] {
            let v: f64 = reg.samples(24, (16, 32)).iter().map(|s| s.weight).sum();
            assert!((v / reg.euclidean_volume() - 1.0).abs() < 1e-6, "{reg:?}: {v}");
        }
    }
}
