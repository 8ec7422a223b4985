//! Boundary data from the asymptotic expansion of harmonic functions.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::autodiff::Vec3;
use crate::linalg;
use crate::metric::Point3;
use crate::{Error, Result};

/// How the excised ball enters the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExcisionMode {
    /// Homogeneous Neumann condition, imposed naturally by leaving the
    /// excised nodes out of the energy.
    #[default]
    Neumann,
    /// Excised nodes hold the Dirichlet data.
    Dirichlet,
}

/// Linear growth direction `a⃗`, mass `m` and monopole coefficient `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub direction: Vec3,
    pub mass: f64,
    #[serde(default)]
    pub monopole: f64,
}

impl BoundaryData {
    pub fn new(direction: Vec3, mass: f64, monopole: f64) -> Self {
        Self { direction, mass, monopole }
    }

    pub fn validate(&self) -> Result<()> {
        if (linalg::norm(self.direction) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("boundary data", "direction must be a unit vector"));
        }
        if !self.mass.is_finite() || !self.monopole.is_finite() {
            return Err(Error::invalid("boundary data", "mass and monopole must be finite"));
        }
        Ok(())
    }
}

/// `a_i x^i / (1 + m/2r) + a/r`.
pub fn boundary_values(bd: &BoundaryData, p: Point3) -> Result<f64> {
    let r = p.r();
    if !(r > 0.0) {
        return Err(Error::Singular { point: p, cutoff: 0.0 });
    }
    let lin = linalg::dot(bd.direction, p.to_array());
    Ok(lin / (1.0 + bd.mass / (2.0 * r)) + bd.monopole / r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_linear_without_mass() {
        let bd = BoundaryData::new([0.0, 1.0, 0.0], 0.0, 0.0);
        assert_eq!(boundary_values(&bd, Point3::new(3.0, -2.0, 1.0)).unwrap(), -2.0);
    }

    #[test]
    fn schwarzschild_value_at_ten() {
        let bd = BoundaryData::new([1.0, 0.0, 0.0], 1.0, 0.0);
        let v = boundary_values(&bd, Point3::new(10.0, 0.0, 0.0)).unwrap();
        assert!((v - 10.0 / 1.05).abs() < 1e-14);
    }
}
