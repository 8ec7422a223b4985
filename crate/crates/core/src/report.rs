//! Report documents, their CSV tables, and the tolerance-driven comparison
//! behind `masslab compare`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::harmonic::{MaxPrinciple, MonopoleFit};
use crate::identities::IdentityReport;
use crate::mass::{CylinderTerms, FluxReport, GaussIntegralReport, InequalityReport, SternIntegral, SternReport};
use crate::{Error, Result};

/// One named hard assertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub spacing: f64,
    pub nodes: usize,
    pub stencil_points: usize,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
    pub max_principle: MaxPrinciple,
    /// Sphere-average fit of the `a/r` term; absent when the domain is too
    /// small for two radii a factor 2 apart.
    pub monopole: Option<MonopoleFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSection {
    /// Flux convention for the finite-radius values.
    pub convention: String,
    pub sphere: FluxReport,
    pub cylinder: FluxReport,
    /// `∫ ∂_ν|∇u|` of the solved potential; tends to `(16π/3) m`.
    pub gradnorm: FluxReport,
    pub mass_estimate: f64,
    pub route_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSection {
    pub stern: SternReport,
    /// `B` from the companion solve at `2h`.
    pub companion: Option<SternIntegral>,
    pub companion_spacing: Option<f64>,
    pub budget_terms: BTreeMap<String, f64>,
    pub inequality: Option<InequalityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelsetSection {
    /// `(8π/3) m̂`, with `m̂` the sphere-route estimate when available.
    pub bound: f64,
    pub integral: GaussIntegralReport,
    /// Levels exported as OFF meshes.
    pub mesh_levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderSection {
    pub rows: Vec<CylinderTerms>,
    /// `combined/8π − m` per half-length.
    pub errors: Vec<f64>,
    /// Error ratios between consecutive half-lengths.
    pub ratios: Vec<f64>,
    /// `|kappa_from_metric − ∫∫κ|` and its budget per half-length.
    pub kappa_gaps: Vec<f64>,
    pub kappa_budgets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub spacing: f64,
    pub max_error: f64,
    pub iterations: usize,
    pub residual: f64,
    pub max_principle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSection {
    pub rows: Vec<ConvergenceRow>,
    pub order: Option<f64>,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub name: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levelsets: Option<LevelsetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<Vec<IdentityReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cylinder: Option<CylinderSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSection>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            name: config.name.clone(),
            config,
            solve: None,
            mass: None,
            bound: None,
            levelsets: None,
            identities: None,
            cylinder: None,
            convergence: None,
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// CSV tables keyed by table name, one row per radius, length, level or
    /// spacing.
    pub fn tables(&self) -> Result<Vec<(&'static str, String)>> {
        let mut out = Vec::new();
        if let Some(m) = &self.mass {
            let mut w = writer(&["route", "parameter", "value"])?;
            for f in [&m.sphere, &m.cylinder, &m.gradnorm] {
                for (p, v) in f.parameters.iter().zip(&f.values) {
                    w.write_record([f.route.clone(), p.to_string(), v.to_string()]).map_err(csv_err)?;
                }
            }
            out.push(("mass", finish(w)?));
        }
        if let Some(b) = &self.bound {
            let mut w =
                writer(&["spacing", "bound", "bound_quarter_epsilon", "hessian_part", "scalar_part", "epsilon"])?;
            let mut rows = vec![(self.config.domain.spacing, &b.stern.integral)];
            if let (Some(c), Some(h)) = (&b.companion, b.companion_spacing) {
                rows.push((h, c));
            }
            for (h, s) in rows {
                w.write_record(
                    [h, s.bound, s.bound_quarter_epsilon, s.hessian_part, s.scalar_part, s.epsilon]
                        .map(|x| x.to_string()),
                )
                .map_err(csv_err)?;
            }
            out.push(("bound", finish(w)?));
        }
        if let Some(l) = &self.levelsets {
            out.push(("levels", serialize_rows(&l.integral.rows)?));
        }
        if let Some(ids) = &self.identities {
            let mut w = writer(&["identity", "spacing", "rms_residual", "max_residual"])?;
            for r in ids {
                let tag = serde_json::to_value(r.identity)?.as_str().unwrap_or_default().to_string();
                for ((h, rms), max) in r.spacings.iter().zip(&r.residuals).zip(&r.max_residuals) {
                    w.write_record([tag.clone(), h.to_string(), rms.to_string(), max.to_string()]).map_err(csv_err)?;
                }
            }
            out.push(("identities", finish(w)?));
        }
        if let Some(c) = &self.cylinder {
            out.push(("cylinder", serialize_rows(&c.rows)?));
        }
        if let Some(c) = &self.convergence {
            out.push(("convergence", serialize_rows(&c.rows)?));
        }
        Ok(out)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn writer(header: &[&str]) -> Result<csv::Writer<Vec<u8>>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    Ok(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn serialize_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    finish(w)
}

/// Tolerance file for `compare`:
///
/// ```json
/// { "default": 1e-9, "rules": [{"pattern": "mass.*", "tol": 0.01}], "ignore": ["config.*"] }
/// ```
///
/// Patterns match dotted key paths, `*` matching any run of characters. The
/// first matching rule wins; keys matching no rule use `default`, and are
/// skipped when it is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub default: Option<f64>,
    pub rules: Vec<ToleranceRule>,
    pub ignore: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceRule {
    pub pattern: String,
    pub tol: f64,
}

impl Tolerances {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("tolerance file", e.to_string()))
    }

    fn for_key(&self, key: &str) -> Option<f64> {
        if self.ignore.iter().any(|p| glob(p, key)) {
            return None;
        }
        self.rules.iter().find(|r| glob(&r.pattern, key)).map(|r| r.tol).or(self.default)
    }
}

fn glob(pattern: &str, text: &str) -> bool {
    match pattern.split_once('*') {
        None => pattern == text,
        Some((head, rest)) => {
            let Some(tail) = text.strip_prefix(head) else { return false };
            (0..=tail.len()).filter(|&i| tail.is_char_boundary(i)).any(|i| glob(rest, &tail[i..]))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffEntry {
    pub key: String,
    pub a: Value,
    pub b: Value,
    /// `|a − b| / max(|a|, |b|)` for numbers, infinite for other mismatches.
    pub relative: f64,
    pub tolerance: f64,
    pub exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Diff {
    /// Compared keys whose values differ.
    pub entries: Vec<DiffEntry>,
    /// Compared keys present in only one report.
    pub missing: Vec<String>,
    pub compared: usize,
}

impl Diff {
    pub fn exceeded(&self) -> usize {
        self.entries.iter().filter(|e| e.exceeded).count() + self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.missing.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let flag = if e.exceeded { "FAIL" } else { "ok  " };
            s.push_str(&format!(
                "{flag} {} rel={:.3e} tol={:.1e} a={} b={}\n",
                e.key, e.relative, e.tolerance, e.a, e.b
            ));
        }
        for k in &self.missing {
            s.push_str(&format!("FAIL {k} present in one report only\n"));
        }
        s.push_str(&format!(
            "{} keys compared, {} differ, {} over tolerance\n",
            self.compared,
            self.entries.len(),
            self.exceeded()
        ));
        s
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn relative(a: &Value, b: &Value) -> f64 {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) if x == y => 0.0,
        (Some(x), Some(y)) => (x - y).abs() / x.abs().max(y.abs()),
        _ if a == b => 0.0,
        _ => f64::INFINITY,
    }
}

/// Per-key differences between two reports.
pub fn compare(a: &Value, b: &Value, tol: &Tolerances) -> Result<Diff> {
    let version = |v: &Value| v.get("schema_version").and_then(Value::as_str).map(str::to_string);
    match (version(a), version(b)) {
        (Some(x), Some(y)) if x == y => {}
        (x, y) => return Err(Error::Schema(format!("schema versions {x:?} and {y:?} differ"))),
    }
    let (mut fa, mut fb) = (BTreeMap::new(), BTreeMap::new());
    flatten("", a, &mut fa);
    flatten("", b, &mut fb);
    let mut diff = Diff::default();
    let keys: std::collections::BTreeSet<&String> = fa.keys().chain(fb.keys()).collect();
    for key in keys.into_iter().filter(|k| *k != "schema_version") {
        let Some(t) = tol.for_key(key) else { continue };
        diff.compared += 1;
        match (fa.get(key), fb.get(key)) {
            (Some(x), Some(y)) => {
                let rel = relative(x, y);
                if rel > 0.0 {
                    diff.entries.push(DiffEntry {
                        key: key.clone(),
                        a: x.clone(),
                        b: y.clone(),
                        relative: rel,
                        tolerance: t,
                        exceeded: rel > t,
                    });
                }
            }
            _ => diff.missing.push(key.clone()),
        }
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn glob_matches() {
        assert!(glob("mass.*", "mass.sphere.values.0"));
        assert!(glob("*.limit", "mass.sphere.extrapolation.limit"));
        assert!(glob("a*b*c", "axxbyyc"));
        assert!(!glob("mass.*", "bound.mass"));
        assert!(glob("exact", "exact"));
    }

    #[test]
    fn identical_reports_have_empty_diff() {
        let a = json!({"schema_version": "v", "x": 1.0, "y": [1, 2, "s"]});
        let d = compare(&a, &a, &Tolerances { default: Some(0.0), ..Default::default() }).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.compared, 4);
    }

    #[test]
    fn rules_and_ignores() {
        let a = json!({"schema_version": "v", "m": 1.0, "b": 2.0, "config": {"h": 0.5}});
        let b = json!({"schema_version": "v", "m": 1.005, "b": 2.5, "config": {"h": 0.25}});
        let tol = Tolerances {
            default: Some(1e-12),
            rules: vec![ToleranceRule { pattern: "m".into(), tol: 0.01 }],
            ignore: vec!["config.*".into()],
        };
        let d = compare(&a, &b, &tol).unwrap();
        assert_eq!(d.entries.len(), 2);
        assert_eq!(d.exceeded(), 1);
        assert!(d.entries.iter().find(|e| e.key == "b").unwrap().exceeded);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let a = json!({"schema_version": "v1"});
        let b = json!({"schema_version": "v2"});
        assert!(matches!(compare(&a, &b, &Tolerances::default()), Err(Error::Schema(_))));
    }
}
