//! Experiment configuration: the JSON document read by `masslab run`.
//!
//! Every optional block has defaults, and [`ExperimentConfig::resolve`]
//! replaces the remaining data-dependent defaults (radii, regions) with
//! concrete values so the copy embedded in the report is complete.

use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::autodiff::Vec3;
use crate::discretization::{GridDomain, Region, Shape};
use crate::field::AnalyticField;
use crate::harmonic::{CgSettings, ExcisionMode};
use crate::identities::StudySettings;
use crate::linalg;
use crate::mass::{CylinderSettings, InequalitySettings, LevelSettings, SternSettings};
use crate::metric::{MetricKind, MetricSpec};
use crate::{Error, Result};

/// Version tag written into every report; `compare` refuses to mix versions.
pub const SCHEMA_VERSION: &str = "masslab-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    /// Sphere and cylinder ADM fluxes, gradient-norm flux of the solved `u`.
    Mass,
    /// Stern bound `B` of the solved `u` against the mass estimate, plus the
    /// integrated inequality on a sub-region.
    Bound,
    /// `∫∫K` over level sets, both routes, with topology per level.
    Levelsets,
    /// Pointwise identity residuals under refinement.
    Identities,
    /// Boundary terms of the integrated identity on coordinate cylinders.
    Cylinder,
    /// Solver error against the closed-form harmonic function.
    Convergence,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Mass => "mass",
            Analysis::Bound => "bound",
            Analysis::Levelsets => "levelsets",
            Analysis::Identities => "identities",
            Analysis::Cylinder => "cylinder",
            Analysis::Convergence => "convergence",
        }
    }

    /// Whether the analysis needs the solved potential on the main domain.
    pub fn needs_solve(self) -> bool {
        matches!(self, Analysis::Mass | Analysis::Bound | Analysis::Levelsets)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default = "default_shape")]
    pub shape: Shape,
    /// `L`: half side of the box, or half-length and radius of the cylinder.
    pub half_extent: f64,
    /// `h`; must divide `L`.
    pub spacing: f64,
    /// Radius of the excised ball; 0 for none.
    #[serde(default)]
    pub excision_radius: f64,
    #[serde(default = "default_axis")]
    pub axis: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema, Default)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// `a·x/w + a₀/r` on the truncation surface.
    #[default]
    Asymptotic,
    /// Values of the closed-form harmonic function.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: Option<usize>,
    /// Monopole coefficient `a₀` in the asymptotic data.
    pub monopole: f64,
    /// Asymptotic direction `a⃗` of `u`.
    pub direction: Vec3,
    pub data: DataSource,
    pub excision: ExcisionMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let cg = CgSettings::default();
        Self {
            tol: cg.tol,
            max_iter: cg.max_iter,
            monopole: 0.0,
            direction: [1.0, 0.0, 0.0],
            data: DataSource::Asymptotic,
            excision: ExcisionMode::Neumann,
        }
    }
}

impl SolverConfig {
    pub fn cg(&self) -> CgSettings {
        CgSettings { tol: self.tol, max_iter: self.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct MassConfig {
    pub radii: Vec<f64>,
    pub half_lengths: Vec<f64>,
    /// Spheres for the gradient-norm flux of the solved `u`; must lie inside
    /// the domain. Empty means `(r₀, 1.5 r₀, 2 r₀)` with
    /// `r₀ = max(L/4, r_exc + 2h)`.
    pub gradnorm_radii: Vec<f64>,
    /// Allowed relative gap between the sphere and cylinder extrapolations.
    pub route_tolerance: f64,
}

impl Default for MassConfig {
    fn default() -> Self {
        Self {
            radii: vec![8.0, 16.0, 32.0],
            half_lengths: vec![8.0, 16.0, 32.0],
            gradnorm_radii: Vec::new(),
            route_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConfig {
    pub stern: SternSettings,
    /// Repeat the solve at `2h` and use `|B_h − B_2h|` in the budget.
    pub companion: bool,
    pub inequality: bool,
    /// Defaults to the ball (or shell outside the excision) of radius `L/2`.
    pub inequality_region: Option<Region>,
    pub inequality_settings: InequalitySettings,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            stern: SternSettings::default(),
            companion: true,
            inequality: true,
            inequality_region: None,
            inequality_settings: InequalitySettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct LevelsetConfig {
    /// Defaults to the ball (or shell outside the excision) of radius `3L/4`.
    pub region: Option<Region>,
    pub settings: LevelSettings,
    /// Allowed relative gap between the direct and Gauss–Bonnet routes.
    pub route_tolerance: f64,
    /// Relative slack on `∫∫K ≤ (8π/3) m̂`.
    pub bound_slack: f64,
}

impl Default for LevelsetConfig {
    fn default() -> Self {
        Self { region: None, settings: LevelSettings::default(), route_tolerance: 0.02, bound_slack: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityConfig {
    pub spacings: Vec<f64>,
    pub study: StudySettings,
    /// Test function for the conformal-covariance check.
    pub test_function: AnalyticField,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            spacings: vec![0.5, 0.25, 0.125],
            study: StudySettings::default(),
            test_function: AnalyticField::Monomial { i: 0, j: 1 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct CylinderConfig {
    pub half_lengths: Vec<f64>,
    pub settings: CylinderSettings,
    /// Minimum ratio of `|combined/8π − m|` between `L` and `2L`.
    pub halving_ratio: f64,
    /// `C` in the budget `C (L^{1−2q} + L^{−q})` for the geodesic-curvature
    /// term.
    pub budget_constant: f64,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        Self {
            half_lengths: vec![8.0, 16.0, 32.0],
            settings: CylinderSettings::default(),
            halving_ratio: 1.5,
            budget_constant: 16.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub half_extent: f64,
    /// Dirichlet data are imposed on this ball as well as on the box.
    pub excision_radius: f64,
    pub spacings: Vec<f64>,
    pub window: (f64, f64),
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            half_extent: 8.0,
            excision_radius: 2.0,
            spacings: vec![0.5, 0.25, 0.125],
            window: crate::identities::ORDER_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output directory; defaults to the directory holding the config.
    pub directory: Option<String>,
    /// File stem; defaults to the config file stem.
    pub stem: Option<String>,
    /// Levels whose meshes are written as OFF files (needs `levelsets`).
    pub meshes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub metric: MetricSpec,
    pub domain: DomainConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub analysis: Vec<Analysis>,
    #[serde(default)]
    pub mass: MassConfig,
    #[serde(default)]
    pub bound: BoundConfig,
    #[serde(default)]
    pub levelsets: LevelsetConfig,
    #[serde(default)]
    pub identities: IdentityConfig,
    #[serde(default)]
    pub cylinder: CylinderConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_shape() -> Shape {
    Shape::Box
}

fn default_axis() -> Vec3 {
    [0.0, 0.0, 1.0]
}

fn divides(h: f64, l: f64) -> bool {
    let n = l / h;
    (n - n.round()).abs() < 1e-9 * n.max(1.0) && n.round() >= 1.0
}

fn increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite() && *x > 0.0) && v.windows(2).all(|w| w[1] > w[0])
}

fn invalid(what: &'static str, reason: String) -> Error {
    Error::Invalid { what, reason }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))?;
        cfg.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// JSON schema of the config document.
    pub fn schema() -> serde_json::Value {
        let schema = schemars::schema_for!(ExperimentConfig);
        serde_json::to_value(schema).expect("schema serialises")
    }

    pub fn needs_solve(&self) -> bool {
        self.analysis.iter().any(|a| a.needs_solve())
    }

    pub fn requests(&self, a: Analysis) -> bool {
        self.analysis.contains(&a)
    }

    /// Closed-form harmonic function asymptotic to the solver direction, if
    /// the family has one.
    pub fn exact_field(&self) -> Option<AnalyticField> {
        match self.metric.kind {
            MetricKind::Bump { .. } => None,
            _ => Some(AnalyticField::harmonic_linear(self.metric, self.solver.direction)),
        }
    }

    pub fn grid_domain(&self) -> Result<GridDomain> {
        let d = &self.domain;
        GridDomain::new(d.shape, d.half_extent, d.spacing, d.axis, d.excision_radius)
    }

    /// Validates and fills the data-dependent defaults.
    pub fn resolve(mut self) -> Result<Self> {
        self.validate()?;
        let l = self.domain.half_extent;
        let exc = self.domain.excision_radius;
        let h = self.domain.spacing;
        let around = |outer: f64| {
            if exc > 0.0 {
                Region::Shell { inner: exc + 2.0 * h, outer }
            } else {
                Region::Ball { radius: outer }
            }
        };
        if self.mass.gradnorm_radii.is_empty() {
            let r0 = (0.25 * l).max(exc + 2.0 * h);
            self.mass.gradnorm_radii = vec![r0, 1.5 * r0, 2.0 * r0];
        }
        self.bound.inequality_region.get_or_insert(around(0.5 * l));
        self.levelsets.region.get_or_insert(around(0.75 * l));
        self.analysis.sort();
        self.analysis.dedup();
        self.check_regions()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty".into()));
        }
        self.metric.validate()?;
        if self.analysis.is_empty() {
            return Err(invalid("analysis", "at least one analysis is required".into()));
        }
        let d = &self.domain;
        if !(d.half_extent > 0.0) || !(d.spacing > 0.0) {
            return Err(invalid("domain", format!("L = {} and h = {} must be positive", d.half_extent, d.spacing)));
        }
        if !divides(d.spacing, d.half_extent) {
            return Err(invalid("domain.spacing", format!("h = {} does not divide L = {}", d.spacing, d.half_extent)));
        }
        if !(d.excision_radius >= 0.0) || d.excision_radius >= d.half_extent {
            return Err(invalid("domain.excision_radius", format!("{} must lie in [0, L)", d.excision_radius)));
        }
        if (linalg::norm(d.axis) - 1.0).abs() > 1e-9 {
            return Err(invalid("domain.axis", "must be a unit vector".into()));
        }
        if (linalg::norm(self.solver.direction) - 1.0).abs() > 1e-9 {
            return Err(invalid("solver.direction", "must be a unit vector".into()));
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(invalid("solver.tol", format!("{} must lie in (0, 1)", self.solver.tol)));
        }
        let cutoff = self.metric.singular_cutoff();
        if self.needs_solve() && cutoff > 0.0 && d.excision_radius <= cutoff {
            return Err(invalid(
                "domain.excision_radius",
                format!("{} must exceed the singular radius {cutoff} of the metric", d.excision_radius),
            ));
        }
        let closed_form = self.exact_field().is_some();
        if !closed_form {
            if self.solver.data == DataSource::Exact {
                return Err(invalid("solver.data", "no closed-form harmonic function for this metric".into()));
            }
            for a in [Analysis::Identities, Analysis::Cylinder, Analysis::Convergence] {
                if self.requests(a) {
                    return Err(invalid("analysis", format!("{} needs a closed-form harmonic function", a.name())));
                }
            }
        }
        if self.requests(Analysis::Mass) {
            if !increasing(&self.mass.radii) || !increasing(&self.mass.half_lengths) {
                return Err(invalid("mass", "radii and half_lengths must be positive and increasing".into()));
            }
            if !self.mass.gradnorm_radii.is_empty() && !increasing(&self.mass.gradnorm_radii) {
                return Err(invalid("mass.gradnorm_radii", "must be positive and increasing".into()));
            }
        }
        if self.requests(Analysis::Identities) {
            let s = &self.identities.spacings;
            if s.len() < 3 || !s.iter().all(|h| *h > 0.0) {
                return Err(invalid("identities.spacings", "need at least three positive spacings".into()));
            }
            self.identities.test_function.validate()?;
        }
        if self.requests(Analysis::Cylinder) && !increasing(&self.cylinder.half_lengths) {
            return Err(invalid("cylinder.half_lengths", "must be positive and increasing".into()));
        }
        if self.requests(Analysis::Convergence) {
            let c = &self.convergence;
            if c.spacings.len() < 2 || c.spacings.iter().any(|h| !divides(*h, c.half_extent)) {
                return Err(invalid(
                    "convergence.spacings",
                    format!("need two or more spacings dividing L = {}", c.half_extent),
                ));
            }
            if cutoff > 0.0 && c.excision_radius <= cutoff {
                return Err(invalid("convergence.excision_radius", format!("must exceed {cutoff}")));
            }
        }
        if !self.output.meshes.is_empty() && !self.requests(Analysis::Levelsets) {
            return Err(invalid("output.meshes", "mesh export needs the levelsets analysis".into()));
        }
        Ok(())
    }

    fn check_regions(&self) -> Result<()> {
        let l = self.domain.half_extent;
        let exc = self.domain.excision_radius;
        let inside = |r: &Region| -> bool {
            let inner = match *r {
                Region::Ball { .. } => 0.0,
                Region::Shell { inner, .. } => inner,
                Region::Cylinder { .. } => return false,
            };
            r.validate().is_ok() && r.extent() <= l && (exc == 0.0 || inner > exc)
        };
        if self.requests(Analysis::Bound) && self.bound.inequality {
            let r = self.bound.inequality_region.as_ref().expect("resolved");
            if !inside(r) {
                return Err(invalid(
                    "bound.inequality_region",
                    format!("{r:?} must be a ball or shell inside the domain"),
                ));
            }
        }
        if self.requests(Analysis::Levelsets) {
            let r = self.levelsets.region.as_ref().expect("resolved");
            if !inside(r) {
                return Err(invalid("levelsets.region", format!("{r:?} must be a ball or shell inside the domain")));
            }
        }
        if self.requests(Analysis::Mass) && self.mass.gradnorm_radii.iter().any(|&r| r > l || r <= exc) {
            return Err(invalid("mass.gradnorm_radii", format!("must lie in ({exc}, {l}]")));
        }
        Ok(())
    }
}
