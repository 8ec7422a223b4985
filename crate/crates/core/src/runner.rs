//! Drives one configured experiment: solve, analyses, checks, files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{Analysis, DataSource, ExperimentConfig};
use crate::discretization::{GridDomain, ScalarField, Shape};
use crate::field::{AnalyticField, Potential};
use crate::fit;
use crate::harmonic::{monopole_estimate, solve_harmonic, BoundaryData, DirichletData, ExcisionMode, HarmonicSolution};
use crate::identities::{convergence_study, IdentityTag, StudyStatus};
use crate::levelset::{extract, field_values, Clip, LevelSetMesh};
use crate::mass::{
    cylinder_boundary_terms, cylinder_mass, gauss_integral_over_levels, gradnorm_report, sphere_mass, stern_bound,
    stern_inequality_report, SternReport,
};
use crate::report::{
    BoundSection, Check, ConvergenceRow, ConvergenceSection, CylinderSection, LevelsetSection, MassSection, Report,
    SolveSummary,
};
use crate::{Error, Result};

/// Exit status for a failed run: 1 validation, 2 solver non-convergence,
/// 3 a check or runtime assertion.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoConvergence { .. } => 2,
        Error::NearCritical { .. } | Error::EmptyLevel { .. } | Error::NotTransversal(_) => 3,
        _ => 1,
    }
}

/// Result of [`execute`]: the report and any meshes requested for export.
pub struct Experiment {
    pub report: Report,
    pub meshes: Vec<(f64, LevelSetMesh)>,
}

fn solve_on(cfg: &ExperimentConfig, spacing: f64) -> Result<HarmonicSolution> {
    let d = &cfg.domain;
    let domain = GridDomain::new(d.shape, d.half_extent, spacing, d.axis, d.excision_radius)?;
    let data = match cfg.solver.data {
        DataSource::Asymptotic => {
            DirichletData::Asymptotic(BoundaryData::new(cfg.solver.direction, cfg.metric.mass(), cfg.solver.monopole))
        }
        DataSource::Exact => DirichletData::Exact(cfg.exact_field().expect("validated")),
    };
    solve_harmonic(&cfg.metric, domain, data, cfg.solver.excision, &cfg.solver.cg())
}

fn summarise(cfg: &ExperimentConfig, s: &HarmonicSolution) -> SolveSummary {
    let l = cfg.domain.half_extent;
    let radii = [0.25 * l, 0.375 * l, 0.5 * l];
    let monopole = if cfg.domain.shape == Shape::Box && radii[0] > cfg.domain.excision_radius + 2.0 * cfg.domain.spacing
    {
        monopole_estimate(&s.potential(), cfg.metric.mass(), cfg.solver.direction, &radii).ok()
    } else {
        None
    };
    SolveSummary {
        spacing: s.u.domain.spacing,
        nodes: s.u.domain.len(),
        stencil_points: s.stencil_points,
        iterations: s.iterations,
        residual: s.residual,
        energy: s.energy,
        max_principle: s.max_principle,
        monopole,
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Runs every requested analysis. Check failures are recorded in the
/// report; errors abort the run.
pub fn execute(cfg: &ExperimentConfig) -> Result<Experiment> {
    let mut report = Report::new(cfg.clone());
    let spec = cfg.metric;
    let dir = cfg.solver.direction;
    let mut meshes = Vec::new();

    let solution = if cfg.needs_solve() { Some(solve_on(cfg, cfg.domain.spacing)?) } else { None };
    if let Some(s) = &solution {
        let mp = s.max_principle;
        report.check(Check::new(
            "solve.max_principle",
            mp.holds,
            format!(
                "interior [{:.6e}, {:.6e}] within boundary [{:.6e}, {:.6e}]",
                mp.interior_min, mp.interior_max, mp.boundary_min, mp.boundary_max
            ),
        ));
        report.solve = Some(summarise(cfg, s));
    }

    // The sphere route is cheap and fixes m̂ for every later comparison.
    let sphere = sphere_mass(&spec, &cfg.mass.radii)?;
    let mass_estimate = sphere.limit();

    if cfg.requests(Analysis::Mass) {
        let s = solution.as_ref().expect("solved");
        let cylinder = cylinder_mass(&spec, &cfg.mass.half_lengths, cfg.domain.axis)?;
        let gradnorm = gradnorm_report(&spec, &s.potential(), &cfg.mass.gradnorm_radii)?;
        let route_gap = relative_gap(sphere.limit(), cylinder.limit());
        let ok = route_gap <= cfg.mass.route_tolerance || (sphere.limit() - cylinder.limit()).abs() < 1e-10;
        report.check(Check::new(
            "mass.routes",
            ok,
            format!("sphere {:.6} vs cylinder {:.6}, relative gap {route_gap:.3e}", sphere.limit(), cylinder.limit()),
        ));
        report.mass = Some(MassSection {
            convention: "euclidean normal and euclidean area element".into(),
            sphere: sphere.clone(),
            cylinder,
            gradnorm,
            mass_estimate,
            route_gap,
        });
    }

    let mut level_euler = Vec::new();
    if cfg.requests(Analysis::Levelsets) {
        let s = solution.as_ref().expect("solved");
        let u = s.potential();
        let (lattice, values) = field_values(&s.u);
        let region = cfg.levelsets.region.expect("resolved");
        let integral = gauss_integral_over_levels(&spec, &u, &lattice, &values, &region, dir, &cfg.levelsets.settings)?;
        let bound = 8.0 * PI / 3.0 * mass_estimate;
        // On shells the annuli nearly cancel the disks, so the gap is scaled
        // by the larger of the integral and the bound it is tested against.
        let scale = integral.gauss_bonnet.abs().max(bound.abs()).max(1.0);
        let gap = (integral.direct - integral.gauss_bonnet).abs() / scale;
        report.check(Check::new(
            "levelsets.routes",
            gap <= cfg.levelsets.route_tolerance,
            format!("direct {:.6} vs Gauss-Bonnet {:.6}, gap {gap:.3e}", integral.direct, integral.gauss_bonnet),
        ));
        report.check(Check::new(
            "levelsets.bound",
            integral.direct <= bound * (1.0 + cfg.levelsets.bound_slack) + 1e-8,
            format!("{:.6} against (8pi/3) m = {bound:.6}", integral.direct),
        ));
        let worst = integral.rows.iter().map(|r| r.euler).max().unwrap_or(0);
        report.check(Check::new("levelsets.euler", worst <= 1, format!("largest Euler characteristic {worst}")));
        level_euler = integral.rows.iter().map(|r| (r.level, r.euler)).collect();
        let clips = Clip::for_region(&region);
        for &t in &cfg.output.meshes {
            meshes.push((t, extract(&lattice, &values, t, &clips)?));
        }
        report.levelsets = Some(LevelsetSection { bound, integral, mesh_levels: cfg.output.meshes.clone() });
    }

    if cfg.requests(Analysis::Bound) {
        let s = solution.as_ref().expect("solved");
        let integral = stern_bound(&spec, &s.u, &cfg.bound.stern)?;
        let mut budget_terms = BTreeMap::new();
        budget_terms.insert("mass_fit".to_string(), sphere.extrapolation.residual);
        let coarse = 2.0 * cfg.domain.spacing;
        let n = cfg.domain.half_extent / coarse;
        let use_companion = cfg.bound.companion && (n - n.round()).abs() < 1e-9 && n.round() >= 4.0;
        let (companion, companion_spacing) = if use_companion {
            let c = solve_on(cfg, coarse)?;
            let ci = stern_bound(&spec, &c.u, &cfg.bound.stern)?;
            budget_terms.insert("refinement".to_string(), (integral.bound - ci.bound).abs());
            (Some(ci), Some(coarse))
        } else {
            budget_terms.insert("epsilon".to_string(), (integral.bound - integral.bound_quarter_epsilon).abs());
            (None, None)
        };
        let budget: f64 = budget_terms.values().sum();
        let stern = SternReport::new(integral, mass_estimate, budget);
        report.check(Check::new("bound.nonnegative", integral.bound >= 0.0, format!("B = {:.6e}", integral.bound)));
        report.check(Check::new(
            "bound.margin",
            stern.holds,
            format!("m - B = {:.6e} against budget {budget:.3e}", stern.margin),
        ));
        report.check(Check::new(
            "bound.monotone_epsilon",
            stern.monotone_in_epsilon,
            format!("B(eps) = {:.6e}, B(eps/4) = {:.6e}", integral.bound, integral.bound_quarter_epsilon),
        ));
        let inequality = if cfg.bound.inequality {
            let region = cfg.bound.inequality_region.expect("resolved");
            let r = stern_inequality_report(
                &spec,
                &s.potential(),
                &region,
                dir,
                level_euler.clone(),
                &cfg.bound.inequality_settings,
            )?;
            report.check(Check::new(
                "bound.inequality",
                r.holds,
                format!("lhs {:.6} rhs {:.6} slack {:.3e}", r.lhs, r.rhs, r.slack),
            ));
            Some(r)
        } else {
            None
        };
        report.bound = Some(BoundSection { stern, companion, companion_spacing, budget_terms, inequality });
    }

    if cfg.requests(Analysis::Identities) {
        let u = cfg.exact_field().expect("validated");
        let v = cfg.identities.test_function;
        let mut reports = Vec::new();
        for tag in IdentityTag::ALL {
            let r = convergence_study(tag, &spec, &u, &v, &cfg.identities.spacings, &cfg.identities.study)?;
            let name = serde_json::to_value(tag)?.as_str().unwrap_or_default().to_string();
            report.check(Check::new(
                format!("identities.{name}"),
                r.status != StudyStatus::Fail,
                format!("{:?}, order {:?}", r.status, r.order),
            ));
            if let Some(frac) = r.inequality_fraction {
                report.check(Check::new(
                    "identities.bochner_inequality",
                    frac >= 1.0,
                    format!("holds at {:.2}% of samples", 100.0 * frac),
                ));
            }
            reports.push(r);
        }
        report.identities = Some(reports);
    }

    if cfg.requests(Analysis::Cylinder) {
        report.cylinder = Some(cylinder_section(cfg, &mut report)?);
    }

    if cfg.requests(Analysis::Convergence) {
        report.convergence = Some(convergence_section(cfg, &mut report)?);
    }

    Ok(Experiment { report, meshes })
}

fn cylinder_section(cfg: &ExperimentConfig, report: &mut Report) -> Result<CylinderSection> {
    let spec = cfg.metric;
    let u = cfg.exact_field().expect("validated");
    let m = spec.mass();
    let q = spec.decay_order;
    let c = &cfg.cylinder;
    let mut rows = Vec::new();
    for &l in &c.half_lengths {
        rows.push(cylinder_boundary_terms(&spec, &u, l, cfg.solver.direction, &c.settings)?);
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.combined / (8.0 * PI) - m).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).abs()).collect();
    let kappa_gaps: Vec<f64> = rows.iter().map(|r| (r.kappa_from_metric - r.kappa_integral).abs()).collect();
    let kappa_budgets: Vec<f64> =
        c.half_lengths.iter().map(|&l| c.budget_constant * (l.powf(1.0 - 2.0 * q) + l.powf(-q))).collect();
    let exact = errors.iter().all(|e| e.abs() < 1e-8);
    let halving_ok = exact || ratios.iter().all(|&r| r >= c.halving_ratio);
    report.check(Check::new("cylinder.halving", halving_ok, format!("errors {errors:.3?}, ratios {ratios:.3?}")));
    let within = kappa_gaps.iter().zip(&kappa_budgets).all(|(g, b)| g <= b);
    report.check(Check::new(
        "cylinder.kappa_budget",
        within,
        format!("gaps {kappa_gaps:.3?} against budgets {kappa_budgets:.3?}"),
    ));
    Ok(CylinderSection { rows, errors, ratios, kappa_gaps, kappa_budgets })
}

/// Largest nodal error of a solve against a closed form.
pub fn max_nodal_error(field: &ScalarField, exact: &dyn Potential) -> Result<f64> {
    let d = field.domain;
    let classes = d.classes();
    let mut worst: f64 = 0.0;
    for (idx, c) in classes.iter().enumerate() {
        if c.is_active() {
            worst = worst.max((field.values[idx] - exact.value(d.point_of(idx))?).abs());
        }
    }
    Ok(worst)
}

fn convergence_section(cfg: &ExperimentConfig, report: &mut Report) -> Result<ConvergenceSection> {
    let spec = cfg.metric;
    let c = &cfg.convergence;
    let exact: AnalyticField = cfg.exact_field().expect("validated");
    let mut rows = Vec::new();
    for &h in &c.spacings {
        let domain = GridDomain::cube(c.half_extent, h)?.with_excision(c.excision_radius)?;
        let s = solve_harmonic(&spec, domain, DirichletData::Exact(exact), ExcisionMode::Dirichlet, &cfg.solver.cg())?;
        rows.push(ConvergenceRow {
            spacing: h,
            max_error: max_nodal_error(&s.u, &exact)?,
            iterations: s.iterations,
            residual: s.residual,
            max_principle: s.max_principle.holds,
        });
    }
    let h: Vec<f64> = rows.iter().map(|r| r.spacing).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.max_error).collect();
    // A solve that reproduces the closed form to round-off has no order.
    let order = e.iter().all(|&x| x > 1e-9).then(|| fit::convergence_order(&h, &e));
    let ok = match order {
        Some(p) => p >= c.window.0 && p <= c.window.1,
        None => e.iter().all(|&x| x <= 1e-9),
    };
    report.check(Check::new("convergence.order", ok, format!("max errors {e:.3?}, order {order:.3?}")));
    report.check(Check::new(
        "convergence.max_principle",
        rows.iter().all(|r| r.max_principle),
        "discrete maximum principle in every solve",
    ));
    Ok(ConvergenceSection { rows, order, window: c.window })
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct Written {
    pub report: PathBuf,
    pub tables: Vec<PathBuf>,
    pub meshes: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &str, force: bool) -> Result<()> {
    let mut f = if force {
        OpenOptions::new().write(true).create(true).truncate(true).open(path)?
    } else {
        OpenOptions::new().write(true).create_new(true).open(path)?
    };
    f.write_all(contents.as_bytes())?;
    Ok(())
}

/// Output directory and stem for a config file. Without `force` the stem
/// carries a UTC timestamp (and a counter if that is taken too).
pub fn output_stem(cfg: &ExperimentConfig, config_path: &Path, force: bool) -> PathBuf {
    let base = config_path.parent().unwrap_or(Path::new("."));
    let dir = match &cfg.output.directory {
        Some(d) if Path::new(d).is_absolute() => PathBuf::from(d),
        Some(d) => base.join(d),
        None => base.to_path_buf(),
    };
    let stem = cfg.output.stem.clone().unwrap_or_else(|| {
        config_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "masslab".into())
    });
    if force {
        return dir.join(stem);
    }
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut candidate = format!("{stem}.{stamp}");
    let mut k = 1;
    while dir.join(format!("{candidate}.report.json")).exists() {
        candidate = format!("{stem}.{stamp}-{k}");
        k += 1;
    }
    dir.join(candidate)
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<stem>.report.json`, `<stem>.<table>.csv` and
/// `<stem>.<level>.off`. Existing files are only replaced with `force`.
pub fn write_outputs(exp: &Experiment, stem: &Path, force: bool) -> Result<Written> {
    if let Some(dir) = stem.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let report = with_suffix(stem, ".report.json");
    write_file(&report, &exp.report.to_json()?, force)?;
    let mut tables = Vec::new();
    for (name, csv) in exp.report.tables()? {
        let p = with_suffix(stem, &format!(".{name}.csv"));
        write_file(&p, &csv, force)?;
        tables.push(p);
    }
    let mut meshes = Vec::new();
    for (t, mesh) in &exp.meshes {
        let p = with_suffix(stem, &format!(".{t}.off"));
        write_file(&p, &mesh.to_off(), force)?;
        meshes.push(p);
    }
    Ok(Written { report, tables, meshes })
}

/// `masslab run`: load, execute, write. Returns the written files and the
/// exit status (0, or 3 if a check failed).
pub fn run(config_path: &Path, force: bool) -> Result<(Written, Experiment, i32)> {
    let cfg = ExperimentConfig::load(config_path)?;
    let exp = execute(&cfg)?;
    let stem = output_stem(&cfg, config_path, force);
    let written = write_outputs(&exp, &stem, force)?;
    let code = if exp.report.passed { 0 } else { 3 };
    Ok((written, exp, code))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x", "y")), 1);
        assert_eq!(exit_code(&Error::NoConvergence { iterations: 1, residual: 1.0, condition: 1.0 }), 2);
        assert_eq!(exit_code(&Error::NotTransversal("x".into())), 3);
    }

    #[test]
    fn flat_identities_only() {
        let cfg = ExperimentConfig::from_json(
            r#"{"name": "t", "metric": {"kind": "flat"}, "domain": {"half_extent": 4, "spacing": 1},
                "analysis": ["identities"], "identities": {"study": {"samples": 8}}}"#,
        )
        .unwrap();
        let exp = execute(&cfg).unwrap();
        assert!(exp.report.passed, "{:?}", exp.report.failed_checks());
        assert!(exp.report.solve.is_none());
        assert_eq!(exp.report.identities.as_ref().unwrap().len(), 4);
    }
}
