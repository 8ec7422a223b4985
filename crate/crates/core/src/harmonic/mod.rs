//! Harmonic functions on truncated domains by Dirichlet-energy minimisation.

pub mod assemble;
pub mod boundary;
pub mod cg;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::discretization::{GridDomain, GridPotential, ScalarField, Surface};
use crate::field::{AnalyticField, Potential};
use crate::metric::{MetricSpec, Point3};
use crate::{Error, Result};

pub use assemble::{assemble_system, System};
pub use boundary::{boundary_values, BoundaryData, ExcisionMode};
pub use cg::{CgOutcome, CgSettings};

/// Source of Dirichlet values on the truncation surface (and on the excised
/// ball in Dirichlet-excision mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DirichletData {
    /// The asymptotic expansion `a·x/(1 + m/2r) + a₀/r`.
    Asymptotic(BoundaryData),
    /// Values of a closed-form field.
    Exact(AnalyticField),
}

impl DirichletData {
    pub fn value(&self, p: Point3) -> Result<f64> {
        match self {
            DirichletData::Asymptotic(bd) => boundary_values(bd, p),
            DirichletData::Exact(f) => f.value(p),
        }
    }
}

/// Discrete maximum principle witness for one solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPrinciple {
    pub boundary_min: f64,
    pub boundary_max: f64,
    pub interior_min: f64,
    pub interior_max: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct HarmonicSolution {
    pub u: ScalarField,
    pub residual: f64,
    pub iterations: usize,
    pub energy: f64,
    pub data: DirichletData,
    pub excision: ExcisionMode,
    pub stencil_points: usize,
    pub max_principle: MaxPrinciple,
}

impl HarmonicSolution {
    pub fn potential(&self) -> GridPotential<'_> {
        GridPotential::new(&self.u)
    }
}

/// Assembles and solves in one step.
pub fn solve_harmonic(
    spec: &MetricSpec,
    domain: GridDomain,
    data: DirichletData,
    excision: ExcisionMode,
    settings: &CgSettings,
) -> Result<HarmonicSolution> {
    let system = assemble_system(spec, domain, excision)?;
    system.solve(&data, settings)
}

/// Sphere-average fit of the monopole coefficient `a` in
/// `u − a_i x^i/(1 + m/2r) ≈ a/r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonopoleFit {
    pub coefficient: f64,
    pub radii: Vec<f64>,
    pub averages: Vec<f64>,
    pub residual: f64,
}

pub fn monopole_estimate(u: &dyn Potential, mass: f64, direction: [f64; 3], radii: &[f64]) -> Result<MonopoleFit> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateFit("need at least two increasing radii".into()));
    }
    if radii[radii.len() - 1] / radii[0] < 2.0 {
        return Err(Error::DegenerateFit(format!("radii span a factor {:.3} < 2", radii[radii.len() - 1] / radii[0])));
    }
    let bd = BoundaryData::new(direction, mass, 0.0);
    let mut averages = Vec::with_capacity(radii.len());
    for &r in radii {
        let surf = Surface::Sphere { radius: r };
        let samples = surf.samples((16, 32));
        let mut acc = 0.0;
        for s in &samples {
            acc += s.weight * (u.value(s.point)? - boundary_values(&bd, s.point)?);
        }
        averages.push(acc / surf.euclidean_area());
    }
    // least squares for A(r) = a / r
    let num: f64 = radii.iter().zip(&averages).map(|(r, a)| a / r).sum();
    let den: f64 = radii.iter().map(|r| 1.0 / (r * r)).sum();
    let coefficient = num / den;
    let residual = (radii.iter().zip(&averages).map(|(r, a)| (a - coefficient / r).powi(2)).sum::<f64>()
        / radii.len() as f64)
        .sqrt();
    Ok(MonopoleFit { coefficient, radii: radii.to_vec(), averages, residual })
}
