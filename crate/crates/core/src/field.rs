//! Scalar potentials evaluated pointwise with their first and second
//! coordinate derivatives.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::autodiff::{radius_squared, Jet, Vec3};
use crate::linalg;
use crate::metric::{MetricKind, MetricSpec, Point3};
use crate::{Error, Result};

/// Anything that can report `u`, `∂u` and `∂²u` at a point.
pub trait Potential: Sync {
    fn jet(&self, p: Point3) -> Result<Jet>;

    fn value(&self, p: Point3) -> Result<f64> {
        Ok(self.jet(p)?.v)
    }
}

/// Closed-form test fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "field", rename_all = "snake_case")]
pub enum AnalyticField {
    /// `a · x`
    Linear { direction: Vec3 },
    /// `x² − y²`
    Saddle,
    /// `|x|²`
    RadiusSquared,
    /// `x_i x_j`
    Monomial { i: usize, j: usize },
    /// The exactly harmonic function asymptotic to `a · x`: `ℓ/w` for
    /// conformally flat metrics, the coordinate `a · X` in the harmonic chart.
    HarmonicLinear { metric: MetricSpec, direction: Vec3 },
    /// `ℓ (1 − m/2r + m²/4r²)`: harmonic for Schwarzschild with vanishing
    /// normal derivative on the horizon `r = m/2`.
    NeumannExterior { mass: f64, direction: Vec3 },
}

impl AnalyticField {
    pub fn linear(direction: Vec3) -> Self {
        Self::Linear { direction }
    }

    pub fn harmonic_linear(metric: MetricSpec, direction: Vec3) -> Self {
        Self::HarmonicLinear { metric, direction }
    }

    pub fn neumann_exterior(mass: f64, direction: Vec3) -> Self {
        Self::NeumannExterior { mass, direction }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |d: &Vec3| (linalg::norm(*d) - 1.0).abs() < 1e-9;
        match self {
            Self::Linear { direction } | Self::NeumannExterior { direction, .. } if !unit(direction) => {
                Err(Error::invalid("field", "direction must be a unit vector"))
            }
            Self::HarmonicLinear { metric, direction } => {
                if !unit(direction) {
                    return Err(Error::invalid("field", "direction must be a unit vector"));
                }
                if matches!(metric.kind, MetricKind::Bump { .. }) {
                    // ℓ/w is harmonic only when w is; a bump breaks that.
                    return Err(Error::invalid("field", "no closed-form harmonic function for bump metrics"));
                }
                metric.validate()
            }
            Self::Monomial { i, j } if *i > 2 || *j > 2 => {
                Err(Error::invalid("field", "monomial indices must be 0..=2"))
            }
            _ => Ok(()),
        }
    }
}

fn linear_jet(direction: Vec3, p: Vec3) -> Jet {
    let x = Jet::coords(p);
    x[0] * direction[0] + x[1] * direction[1] + x[2] * direction[2]
}

impl Potential for AnalyticField {
    fn jet(&self, p: Point3) -> Result<Jet> {
        let a = p.to_array();
        Ok(match *self {
            Self::Linear { direction } => linear_jet(direction, a),
            Self::Saddle => {
                let [x, y, _] = Jet::coords(a);
                x * x - y * y
            }
            Self::RadiusSquared => radius_squared(a),
            Self::Monomial { i, j } => {
                let x = Jet::coords(a);
                x[i] * x[j]
            }
            Self::HarmonicLinear { metric, direction } => match metric.conformal_factor(p)? {
                Some(w) => linear_jet(direction, a) / w,
                None => {
                    let MetricKind::SchwarzschildHarmonic { .. } = metric.kind else { unreachable!() };
                    linear_jet(direction, a)
                }
            },
            Self::NeumannExterior { mass, direction } => {
                if p.r() <= 0.0 {
                    return Err(Error::Singular { point: p, cutoff: mass / 4.0 });
                }
                let inv = radius_squared(a).sqrt().recip();
                let f = 1.0 + inv * (-0.5 * mass) + inv.square() * (0.25 * mass * mass);
                linear_jet(direction, a) * f
            }
        })
    }

    /// Values are defined down to the origin where the closed form has a
    /// removable singularity, so lattices may sample through the puncture.
    fn value(&self, p: Point3) -> Result<f64> {
        let a = p.to_array();
        let r = p.r();
        match *self {
            Self::HarmonicLinear { metric, direction } => match metric.kind {
                MetricKind::Schwarzschild { mass } => Ok(linalg::dot(direction, a) * 2.0 * r / (2.0 * r + mass)),
                _ => Ok(self.jet(p)?.v),
            },
            _ => Ok(self.jet(p)?.v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_linear_has_zero_laplacian() {
        let spec = MetricSpec::schwarzschild(1.0);
        let u = AnalyticField::harmonic_linear(spec, [1.0, 0.0, 0.0]);
        let p = Point3::new(2.3, -1.1, 0.7);
        let j = u.jet(p).unwrap();
        let w = spec.conformal_factor(p).unwrap().unwrap();
        // Δ_g u = w^-6 ∂_i(w^2 ∂_i u) for g = w^4 δ
        let mut lap = 0.0;
        for i in 0..3 {
            lap += w.v * w.v * j.h[i][i] + 2.0 * w.v * w.d[i] * j.d[i];
        }
        assert!(lap.abs() < 1e-13, "{lap}");
    }

    #[test]
    fn neumann_exterior_has_zero_radial_derivative_on_horizon() {
        let u = AnalyticField::neumann_exterior(1.0, [1.0, 0.0, 0.0]);
        let dir = linalg::normalize([0.3, 0.5, -0.2]);
        let p = Point3::from(linalg::scale(dir, 0.5));
        let j = u.jet(p).unwrap();
        assert!(linalg::dot(j.d, dir).abs() < 1e-14);
    }

    #[test]
    fn value_through_the_puncture() {
        let u = AnalyticField::harmonic_linear(MetricSpec::schwarzschild(1.0), [1.0, 0.0, 0.0]);
        assert_eq!(u.value(Point3::new(0.0, 0.0, 0.0)).unwrap(), 0.0);
        let p = Point3::new(10.0, 0.0, 0.0);
        assert!((u.value(p).unwrap() - 10.0 / 1.05).abs() < 1e-12);
        assert!((u.value(p).unwrap() - u.jet(p).unwrap().v).abs() < 1e-12);
    }
}
