//! Structured grids, finite-difference derivatives and quadrature.

pub mod grid;
pub mod quadrature;

pub use grid::{BoundaryClass, GridDomain, GridPotential, NodeClass, ScalarField, Shape, VolumeIntegral};
pub use quadrature::{AreaElement, Region, Surface, SurfaceSample};
