//! Refinement study of the pointwise identities on Schwarzschild: each
//! residual should fall like `h²`.

use masslab::identities::{convergence_study, IdentityTag, StudySettings};
use masslab::{AnalyticField, MetricSpec};

fn main() -> masslab::Result<()> {
    let spec = MetricSpec::schwarzschild(1.0);
    let u = AnalyticField::harmonic_linear(spec, [1.0, 0.0, 0.0]);
    let v = AnalyticField::Monomial { i: 0, j: 1 };
    let settings = StudySettings::default();
    for tag in IdentityTag::ALL {
        let r = convergence_study(tag, &spec, &u, &v, &[0.5, 0.25, 0.125], &settings)?;
        let rms: Vec<String> = r.residuals.iter().map(|x| format!("{x:.2e}")).collect();
        println!(
            "{tag:?}: rms {rms:?}, order {:.3?} -> {:?}{}",
            r.order,
            r.status,
            r.inequality_fraction.map(|f| format!(", inequality at {:.0}%", 100.0 * f)).unwrap_or_default()
        );
    }
    Ok(())
}
