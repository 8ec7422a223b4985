//! Numerical laboratory for harmonic-function lower bounds on the ADM mass of
//! asymptotically flat 3-metrics.
//!
//! The crate is organised around the pipeline: an analytic [`MetricSpec`],
//! a structured [`discretization::GridDomain`], a harmonic solve
//! ([`harmonic`]), level-set extraction and curvature ([`levelset`]), and the
//! flux / bound computations in [`mass`]. [`identities`] checks the pointwise
//! identities that the bound rests on, and [`runner`] drives JSON-configured
//! experiments for the `masslab` binary.

// Tensor code indexes by component; `!(a < b)` rejects NaN on purpose.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod config;
pub mod discretization;
pub mod error;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod harmonic;
pub mod identities;
pub mod levelset;
pub mod linalg;
pub mod mass;
pub mod metric;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
pub use field::{AnalyticField, Potential};
pub use metric::{MetricJet, MetricKind, MetricSpec, Point3};
