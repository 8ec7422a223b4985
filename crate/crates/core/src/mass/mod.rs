//! Mass computations: flux integrals at infinity, the harmonic-function
//! lower bound, level-set integrals and the cylinder boundary ledger.

pub mod cylinder;
pub mod flux;
pub mod inequality;
pub mod levels;
pub mod stern;

use rayon::prelude::*;

use crate::Result;

pub use cylinder::{cylinder_boundary_terms, CylinderSettings, CylinderTerms};
pub use flux::{adm_flux, cylinder_mass, gradnorm_flux, gradnorm_report, sphere_mass, FluxReport};
pub use inequality::{stern_inequality_report, InequalityReport, InequalitySettings};
pub use levels::{gauss_integral_over_levels, GaussIntegralReport, LevelRow, LevelSettings};
pub use stern::{stern_bound, stern_bound_region, SternIntegral, SternReport, SternSettings};

/// Parallel fallible map that preserves input order.
pub fn par_map<T, F>(items: &[T], f: F) -> Result<Vec<f64>>
where
    T: Sync,
    F: Fn(&T) -> Result<f64> + Sync + Send,
{
    items.par_iter().map(f).collect()
}
