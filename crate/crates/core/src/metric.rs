//! Asymptotically flat 3-metrics in a global chart and their pointwise
//! differential geometry.
//!
//! Every shipped family is evaluated through forward-mode jets, so the first
//! and second coordinate derivatives of `g_ij` are exact. A fourth-order
//! central-difference jet is kept alongside as an independent route.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use crate::autodiff::{radius_squared, Jet, Mat3, Vec3};
use crate::linalg::{self, IDENTITY};
use crate::{Error, Result};

/// A point in the chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn r(&self) -> f64 {
        linalg::norm(self.to_array())
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }
}

impl From<Vec3> for Point3 {
    fn from(a: Vec3) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// The metric families shipped with the lab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Flat,
    /// `w^4 δ` with `w = 1 + m/2r`.
    Schwarzschild {
        mass: f64,
    },
    /// `w^4 δ` with `w = 1 + m/2r + A exp(-((r - c)/σ)^2)`.
    Bump {
        mass: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `w^4 δ` with `w = 1 + (m/2) erf(r/σ)/r`: the Newtonian potential of a
    /// Gaussian mass cloud, so `w` is superharmonic and smooth at the origin.
    SmearedMass {
        mass: f64,
        width: f64,
    },
    /// Schwarzschild written in the harmonic coordinates `X = x/w(r)`. Not
    /// conformally flat in this chart.
    SchwarzschildHarmonic {
        mass: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MetricSpec {
    #[serde(flatten)]
    pub kind: MetricKind,
    /// Declared decay order `q` of `g - δ`.
    #[serde(default = "default_decay_order")]
    pub decay_order: f64,
}

fn default_decay_order() -> f64 {
    1.0
}

/// `g`, `∂_k g_ij` and `∂_l ∂_k g_ij` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub point: Point3,
    pub g: Mat3,
    /// `dg[i][j][k] = ∂_k g_ij`
    pub dg: [[[f64; 3]; 3]; 3],
    /// `ddg[i][j][k][l] = ∂_l ∂_k g_ij`
    pub ddg: [[[[f64; 3]; 3]; 3]; 3],
}

/// `gamma[l][i][j] = Γ^l_ij`
pub type Christoffel = [[[f64; 3]; 3]; 3];

impl MetricSpec {
    pub fn new(kind: MetricKind) -> Self {
        Self { kind, decay_order: 1.0 }
    }

    pub fn flat() -> Self {
        Self::new(MetricKind::Flat)
    }

    pub fn schwarzschild(mass: f64) -> Self {
        Self::new(MetricKind::Schwarzschild { mass })
    }

    pub fn smeared_mass(mass: f64, width: f64) -> Self {
        Self::new(MetricKind::SmearedMass { mass, width })
    }

    pub fn schwarzschild_harmonic(mass: f64) -> Self {
        Self::new(MetricKind::SchwarzschildHarmonic { mass })
    }

    pub fn bump(mass: f64, amplitude: f64, center: f64, width: f64) -> Self {
        Self::new(MetricKind::Bump { mass, amplitude, center, width })
    }

    pub fn with_decay_order(mut self, q: f64) -> Self {
        self.decay_order = q;
        self
    }

    /// Mass parameter of the family (its ADM mass).
    pub fn mass(&self) -> f64 {
        match self.kind {
            MetricKind::Flat => 0.0,
            MetricKind::Schwarzschild { mass }
            | MetricKind::Bump { mass, .. }
            | MetricKind::SmearedMass { mass, .. }
            | MetricKind::SchwarzschildHarmonic { mass } => mass,
        }
    }

    /// Evaluations with `r` below this radius are refused.
    pub fn singular_cutoff(&self) -> f64 {
        match self.kind {
            MetricKind::Flat | MetricKind::SmearedMass { .. } => 0.0,
            MetricKind::Schwarzschild { mass }
            | MetricKind::Bump { mass, .. }
            | MetricKind::SchwarzschildHarmonic { mass } => mass.abs() / 4.0,
        }
    }

    pub fn is_conformally_flat(&self) -> bool {
        !matches!(self.kind, MetricKind::SchwarzschildHarmonic { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.decay_order <= 0.5 {
            return Err(Error::invalid("metric", format!("decay order {} must exceed 1/2", self.decay_order)));
        }
        let finite = |x: f64| x.is_finite();
        match self.kind {
            MetricKind::Flat => {}
            MetricKind::Schwarzschild { mass } | MetricKind::SchwarzschildHarmonic { mass } => {
                if !finite(mass) || mass < 0.0 {
                    return Err(Error::invalid("metric", "mass must be finite and nonnegative"));
                }
            }
            MetricKind::Bump { mass, amplitude, center, width } => {
                if !(finite(mass) && mass >= 0.0 && finite(amplitude) && finite(center) && width > 0.0) {
                    return Err(Error::invalid(
                        "metric",
                        "bump needs mass >= 0, finite amplitude/center and width > 0",
                    ));
                }
            }
            MetricKind::SmearedMass { mass, width } => {
                if !(finite(mass) && mass >= 0.0 && width > 0.0) {
                    return Err(Error::invalid("metric", "smeared mass needs mass >= 0 and width > 0"));
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, p: Point3) -> Result<()> {
        let cutoff = self.singular_cutoff();
        let r = p.r();
        if (cutoff > 0.0 && r < cutoff) || !r.is_finite() {
            return Err(Error::Singular { point: p, cutoff });
        }
        Ok(())
    }

    /// The conformal factor `w` as a jet, for conformally flat kinds.
    pub fn conformal_factor(&self, p: Point3) -> Result<Option<Jet>> {
        self.check_point(p)?;
        Ok(self.conformal_factor_unchecked(p.to_array()))
    }

    fn conformal_factor_unchecked(&self, p: Vec3) -> Option<Jet> {
        let one = Jet::constant(1.0);
        match self.kind {
            MetricKind::Flat => Some(one),
            MetricKind::Schwarzschild { mass } => {
                if mass == 0.0 {
                    return Some(one);
                }
                let r = radius_squared(p).sqrt();
                Some(one + r.recip() * (0.5 * mass))
            }
            MetricKind::Bump { mass, amplitude, center, width } => {
                let r = radius_squared(p).sqrt();
                let newton = if mass == 0.0 { Jet::constant(0.0) } else { r.recip() * (0.5 * mass) };
                let bump = ((r - center) / width).square().scale(-1.0).exp() * amplitude;
                Some(one + newton + bump)
            }
            MetricKind::SmearedMass { mass, width } => Some(one + erf_over_r(radius_squared(p), width) * (0.5 * mass)),
            MetricKind::SchwarzschildHarmonic { .. } => None,
        }
    }

    /// `g_ij` as jets.
    pub fn metric_jets(&self, p: Point3) -> Result<[[Jet; 3]; 3]> {
        self.check_point(p)?;
        let a = p.to_array();
        if let Some(w) = self.conformal_factor_unchecked(a) {
            if w.v <= 0.0 {
                return Err(Error::NotPositiveDefinite { point: p, minors: [w.v, w.v, w.v] });
            }
            let w4 = w.powi(4);
            let zero = Jet::constant(0.0);
            let mut g = [[zero; 3]; 3];
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = w4;
            }
            return Ok(g);
        }
        let MetricKind::SchwarzschildHarmonic { mass } = self.kind else {
            unreachable!("only the harmonic chart lacks a conformal factor")
        };
        let s = radius_squared(a);
        let big_r = s.sqrt();
        let r_iso = (big_r + (s + big_r * (2.0 * mass)).sqrt()) * 0.5;
        let w = 1.0 + r_iso.recip() * (0.5 * mass);
        let radial = w.powi(8) / (1.0 + r_iso.recip() * mass).square();
        let tangential = w.powi(6);
        let coef = (radial - tangential) / s;
        let x = Jet::coords(a);
        let mut g = [[Jet::constant(0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut e = coef * x[i] * x[j];
                if i == j {
                    e = e + tangential;
                }
                g[i][j] = e;
            }
        }
        Ok(g)
    }

    /// Pointwise 2-jet of the metric with closed-form derivatives.
    pub fn metric_jet(&self, p: Point3) -> Result<MetricJet> {
        let jets = self.metric_jets(p)?;
        let mut out = MetricJet { point: p, g: [[0.0; 3]; 3], dg: [[[0.0; 3]; 3]; 3], ddg: [[[[0.0; 3]; 3]; 3]; 3] };
        for i in 0..3 {
            for j in 0..3 {
                let e = &jets[i][j];
                out.g[i][j] = e.v;
                out.dg[i][j] = e.d;
                out.ddg[i][j] = e.h;
            }
        }
        out.check_positive_definite()?;
        Ok(out)
    }

    /// The metric tensor alone.
    pub fn metric(&self, p: Point3) -> Result<Mat3> {
        Ok(self.metric_jet(p)?.g)
    }

    /// `g_ij` without derivatives; cheap for conformally flat kinds.
    pub fn metric_value(&self, p: Point3) -> Result<Mat3> {
        self.check_point(p)?;
        let r = p.r();
        let w = match self.kind {
            MetricKind::Flat => 1.0,
            MetricKind::Schwarzschild { mass } => {
                if mass == 0.0 {
                    1.0
                } else {
                    1.0 + 0.5 * mass / r
                }
            }
            MetricKind::Bump { mass, amplitude, center, width } => {
                let newton = if mass == 0.0 { 0.0 } else { 0.5 * mass / r };
                1.0 + newton + amplitude * (-((r - center) / width).powi(2)).exp()
            }
            MetricKind::SmearedMass { mass, width } => {
                let f = if r < 1e-8 * width { FRAC_2_SQRT_PI / width } else { libm::erf(r / width) / r };
                1.0 + 0.5 * mass * f
            }
            MetricKind::SchwarzschildHarmonic { .. } => return Ok(self.metric_jet(p)?.g),
        };
        if !(w > 0.0) {
            return Err(Error::NotPositiveDefinite { point: p, minors: [w, w, w] });
        }
        Ok(linalg::scale_mat(&IDENTITY, w.powi(4)))
    }

    /// 2-jet by fourth-order central differences of `g` with step
    /// `1e-4 * max(1, r)`.
    pub fn metric_jet_fd(&self, p: Point3) -> Result<MetricJet> {
        let step = 1e-4 * p.r().max(1.0);
        let base = p.to_array();
        let eval = |offset: [f64; 3]| -> Result<Mat3> {
            let q = Point3::from(linalg::add(base, offset));
            let jets = self.metric_jets(q)?;
            let mut g = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] = jets[i][j].v;
                }
            }
            Ok(g)
        };
        let g0 = eval([0.0; 3])?;
        let weights = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut out = MetricJet { point: p, g: g0, dg: [[[0.0; 3]; 3]; 3], ddg: [[[[0.0; 3]; 3]; 3]; 3] };
        let mut shifted = [[[[0.0; 3]; 3]; 4]; 3];
        for k in 0..3 {
            for (n, &(s, _)) in weights.iter().enumerate() {
                let mut off = [0.0; 3];
                off[k] = s * step;
                shifted[k][n] = eval(off)?;
            }
        }
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let d: f64 = weights.iter().enumerate().map(|(n, &(_, c))| c * shifted[k][n][i][j]).sum();
                    out.dg[i][j][k] = d / (12.0 * step);
                    let dd = -shifted[k][0][i][j] + 16.0 * shifted[k][1][i][j] - 30.0 * g0[i][j]
                        + 16.0 * shifted[k][2][i][j]
                        - shifted[k][3][i][j];
                    out.ddg[i][j][k][k] = dd / (12.0 * step * step);
                }
            }
        }
        for k in 0..3 {
            for l in (k + 1)..3 {
                let mut acc = [[0.0; 3]; 3];
                for &(sa, ca) in &weights {
                    for &(sb, cb) in &weights {
                        let mut off = [0.0; 3];
                        off[k] = sa * step;
                        off[l] = sb * step;
                        let g = eval(off)?;
                        for i in 0..3 {
                            for j in 0..3 {
                                acc[i][j] += ca * cb * g[i][j];
                            }
                        }
                    }
                }
                for i in 0..3 {
                    for j in 0..3 {
                        let v = acc[i][j] / (144.0 * step * step);
                        out.ddg[i][j][k][l] = v;
                        out.ddg[i][j][l][k] = v;
                    }
                }
            }
        }
        out.check_positive_definite()?;
        Ok(out)
    }

    /// Scalar curvature. Conformally flat kinds use `R = -8 w^-5 Δ_δ w`;
    /// otherwise the Ricci tensor is contracted from the 2-jet.
    pub fn scalar_curvature(&self, p: Point3) -> Result<f64> {
        if let Some(w) = self.conformal_factor(p)? {
            let lap = w.h[0][0] + w.h[1][1] + w.h[2][2];
            return Ok(-8.0 * lap / w.v.powi(5));
        }
        Ok(self.metric_jet(p)?.scalar_curvature())
    }

    /// Tabulates `sup_{|x| = r} |∂^l (g - δ)| r^{q + l}` for `l = 0, 1, 2`.
    pub fn decay_report(&self, radii: &[f64]) -> Result<DecayReport> {
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("radii", "must be strictly increasing"));
        }
        let q = self.decay_order;
        let dirs = fibonacci_sphere(200);
        let mut rows = Vec::with_capacity(radii.len());
        for &r in radii {
            let mut sup = [0.0f64; 3];
            for d in &dirs {
                let jet = self.metric_jet(Point3::from(linalg::scale(*d, r)))?;
                for i in 0..3 {
                    for j in 0..3 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        sup[0] = sup[0].max((jet.g[i][j] - delta).abs());
                        for k in 0..3 {
                            sup[1] = sup[1].max(jet.dg[i][j][k].abs());
                            for l in 0..3 {
                                sup[2] = sup[2].max(jet.ddg[i][j][k][l].abs());
                            }
                        }
                    }
                }
            }
            let scaled = [sup[0] * r.powf(q), sup[1] * r.powf(q + 1.0), sup[2] * r.powf(q + 2.0)];
            rows.push(DecayRow { r, scaled });
        }
        let mut slopes = [0.0; 3];
        let mut bounded = [true; 3];
        if rows.len() >= 2 {
            for l in 0..3 {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|row| row.scaled[l] > 1e-300)
                    .map(|row| (row.r.ln(), row.scaled[l].ln()))
                    .collect();
                slopes[l] = if pts.len() >= 2 { crate::fit::slope(&pts) } else { 0.0 };
                bounded[l] = slopes[l] <= DECAY_SLOPE_LIMIT;
            }
        }
        Ok(DecayReport { decay_order: q, rows, log_slopes: slopes, bounded })
    }
}

/// Columns whose log-log growth rate exceeds this are flagged as failing.
pub const DECAY_SLOPE_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub r: f64,
    /// `[l = 0, l = 1, l = 2]`
    pub scaled: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub decay_order: f64,
    pub rows: Vec<DecayRow>,
    pub log_slopes: [f64; 3],
    pub bounded: [bool; 3],
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        self.bounded.iter().all(|&b| b)
    }
}

/// Quasi-uniform directions on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// `erf(sqrt(s)/σ)/sqrt(s)` as a jet in `s`, smooth through `s = 0`.
fn erf_over_r(s: Jet, width: f64) -> Jet {
    let sv = s.v.max(0.0);
    let r = sv.sqrt();
    let z = r / width;
    let c = FRAC_2_SQRT_PI / width;
    let (f, df, ddf) = if z < 0.5 {
        // erf(z)/z = (2/sqrt(pi)) sum (-1)^n z^{2n} / (n! (2n+1)), in powers of u = s/σ².
        let u = sv / (width * width);
        let inv_w2 = 1.0 / (width * width);
        let (mut f, mut df, mut ddf) = (0.0, 0.0, 0.0);
        let mut fact = 1.0;
        for n in 0..24 {
            if n > 0 {
                fact *= n as f64;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let coef = sign / (fact * (2 * n + 1) as f64);
            let nf = n as f64;
            f += coef * u.powi(n);
            if n >= 1 {
                df += coef * nf * u.powi(n - 1) * inv_w2;
            }
            if n >= 2 {
                ddf += coef * nf * (nf - 1.0) * u.powi(n - 2) * inv_w2 * inv_w2;
            }
        }
        (c * f, c * df, c * ddf)
    } else {
        let e = c * (-z * z).exp();
        let erf = libm::erf(z);
        let f = erf / r;
        let fp = e / r - erf / (r * r);
        let ep = -2.0 * r / (width * width) * e;
        let fpp = ep / r - 2.0 * e / (r * r) + 2.0 * erf / (r * r * r);
        (f, fp / (2.0 * r), (fpp - fp / r) / (4.0 * r * r))
    };
    s.chain(f, df, ddf)
}

impl MetricJet {
    pub fn flat(point: Point3) -> Self {
        Self { point, g: IDENTITY, dg: [[[0.0; 3]; 3]; 3], ddg: [[[[0.0; 3]; 3]; 3]; 3] }
    }

    /// Leading-minor test of positive definiteness.
    pub fn check_positive_definite(&self) -> Result<()> {
        let minors = linalg::leading_minors(&self.g);
        if minors.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::NotPositiveDefinite { point: self.point, minors });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Mat3 {
        linalg::inverse(&self.g)
    }

    pub fn sqrt_det(&self) -> f64 {
        linalg::det(&self.g).sqrt()
    }

    /// Christoffel symbols of the second kind from the general formula
    /// `½ g^{lk}(∂_i g_kj + ∂_j g_ki − ∂_k g_ij)`.
    pub fn christoffel(&self) -> Christoffel {
        let ginv = self.inverse();
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for l in 0..3 {
            for i in 0..3 {
                for j in i..3 {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += ginv[l][k] * (self.dg[k][j][i] + self.dg[k][i][j] - self.dg[i][j][k]);
                    }
                    gamma[l][i][j] = 0.5 * s;
                    gamma[l][j][i] = 0.5 * s;
                }
            }
        }
        gamma
    }

    /// `∂_m Γ^l_ij`, indexed `[m][l][i][j]`.
    pub fn christoffel_derivative(&self) -> [Christoffel; 3] {
        let ginv = self.inverse();
        let mut out = [[[[0.0; 3]; 3]; 3]; 3];
        for m in 0..3 {
            // ∂_m g^{lk} = -g^{la} ∂_m g_ab g^{bk}
            let mut dginv = [[0.0; 3]; 3];
            for l in 0..3 {
                for k in 0..3 {
                    let mut s = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            s -= ginv[l][a] * self.dg[a][b][m] * ginv[b][k];
                        }
                    }
                    dginv[l][k] = s;
                }
            }
            for l in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let mut s = 0.0;
                        for k in 0..3 {
                            let first = self.dg[k][j][i] + self.dg[k][i][j] - self.dg[i][j][k];
                            let second = self.ddg[k][j][i][m] + self.ddg[k][i][j][m] - self.ddg[i][j][k][m];
                            s += dginv[l][k] * first + ginv[l][k] * second;
                        }
                        out[m][l][i][j] = 0.5 * s;
                    }
                }
            }
        }
        out
    }

    /// Ricci tensor `R_ij = ∂_l Γ^l_ij − ∂_j Γ^l_il + Γ^l_lm Γ^m_ij − Γ^l_jm Γ^m_il`.
    pub fn ricci(&self) -> Mat3 {
        let gamma = self.christoffel();
        let dgamma = self.christoffel_derivative();
        let mut ric = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += dgamma[l][l][i][j] - dgamma[j][l][i][l];
                    for m in 0..3 {
                        s += gamma[l][l][m] * gamma[m][i][j] - gamma[l][j][m] * gamma[m][i][l];
                    }
                }
                ric[i][j] = s;
            }
        }
        ric
    }

    pub fn scalar_curvature(&self) -> f64 {
        linalg::trace_with(&self.inverse(), &self.ricci())
    }
}

/// Closed-form Christoffel symbols of `w^4 δ`:
/// `2(δ^l_j ∂_i log w + δ^l_i ∂_j log w − δ_ij ∂^l log w)`.
pub fn christoffel_conformal(w: &Jet) -> Christoffel {
    let dlog = linalg::scale(w.d, 1.0 / w.v);
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                if l == j {
                    s += dlog[i];
                }
                if l == i {
                    s += dlog[j];
                }
                if i == j {
                    s -= dlog[l];
                }
                gamma[l][i][j] = 2.0 * s;
            }
        }
    }
    gamma
}

/// Christoffel symbols at a point: closed form for conformally flat kinds,
/// general formula otherwise.
pub fn christoffel(spec: &MetricSpec, p: Point3) -> Result<Christoffel> {
    match spec.conformal_factor(p)? {
        Some(w) => Ok(christoffel_conformal(&w)),
        None => Ok(spec.metric_jet(p)?.christoffel()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_jet_is_trivial() {
        let jet = MetricSpec::flat().metric_jet(Point3::new(0.3, -2.0, 5.0)).unwrap();
        assert_eq!(jet.g, IDENTITY);
        assert!(jet.dg.iter().flatten().flatten().all(|&v| v == 0.0));
        assert!(jet.ddg.iter().flatten().flatten().flatten().all(|&v| v == 0.0));
        assert!(jet.christoffel().iter().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn schwarzschild_values_at_two() {
        let spec = MetricSpec::schwarzschild(1.0);
        let jet = spec.metric_jet(Point3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((jet.g[0][0] - 2.44140625).abs() < 1e-14);
        assert!((jet.dg[0][0][0] - (-0.9765625)).abs() < 1e-14);
        let gamma = jet.christoffel();
        assert!((gamma[0][0][0] - (-0.2)).abs() < 1e-14);
    }

    #[test]
    fn singular_points_are_refused() {
        let spec = MetricSpec::schwarzschild(1.0);
        assert!(matches!(spec.metric_jet(Point3::new(0.2, 0.0, 0.0)), Err(Error::Singular { .. })));
        assert!(spec.metric_jet(Point3::new(0.3, 0.0, 0.0)).is_ok());
    }

    #[test]
    fn smeared_mass_is_regular_at_origin() {
        let spec = MetricSpec::smeared_mass(1.0, 1.5);
        let a = spec.metric_jet(Point3::new(0.0, 0.0, 0.0)).unwrap();
        let b = spec.metric_jet(Point3::new(1e-6, 0.0, 0.0)).unwrap();
        assert!((a.g[0][0] - b.g[0][0]).abs() < 1e-9);
        assert!((a.ddg[0][0][0][0] - b.ddg[0][0][0][0]).abs() < 1e-6);
        // series and closed-form branches meet at r = σ/2
        let lo = spec.metric_jet(Point3::new(0.75 - 1e-9, 0.0, 0.0)).unwrap();
        let hi = spec.metric_jet(Point3::new(0.75 + 1e-9, 0.0, 0.0)).unwrap();
        assert!((lo.ddg[0][0][0][0] - hi.ddg[0][0][0][0]).abs() < 1e-6);
        assert!((lo.ddg[1][1][1][1] - hi.ddg[1][1][1][1]).abs() < 1e-6);
    }

    #[test]
    fn harmonic_chart_is_not_conformally_flat() {
        let spec = MetricSpec::schwarzschild_harmonic(1.0);
        let g = spec.metric(Point3::new(3.0, 1.0, 0.5)).unwrap();
        assert!(g[0][1].abs() > 1e-4);
        assert!(spec.conformal_factor(Point3::new(3.0, 1.0, 0.5)).unwrap().is_none());
    }

    #[test]
    fn non_positive_factor_is_rejected() {
        let spec = MetricSpec::bump(0.0, -2.0, 3.0, 1.0);
        assert!(matches!(spec.metric_jet(Point3::new(3.0, 0.0, 0.0)), Err(Error::NotPositiveDefinite { .. })));
    }
}
