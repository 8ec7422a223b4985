//! Level sets of harmonic functions: extraction, topology and curvature.

pub mod curvature;
pub mod curve;
pub mod marching;
pub mod mesh;

pub use curvature::{
    curvature_at, curvature_from, gauss_bonnet_defect, integrate_over_mesh, total_gauss_curvature, CurvatureSample,
    GaussBonnetDefect, MeshIntegral,
};
pub use curve::{geodesic_curvature_total, transversality_margin, BoundarySurface, CurveIntegral, Side};
pub use marching::{extract, field_values, Clip, Lattice};
pub use mesh::{BoundaryLoop, LevelSetMesh, LoopClass};
