//! Least-squares fits used for convergence orders and limit extrapolation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Slope of the least-squares line through `(x, y)` pairs.
pub fn slope(pts: &[(f64, f64)]) -> f64 {
    line(pts).1
}

/// `(intercept, slope)` of the least-squares line.
pub fn line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Observed order of a quantity that should behave like `C h^p`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().zip(err).map(|(h, e)| (h.ln(), e.ln())).collect();
    slope(&pts)
}

/// Result of fitting `f(s) = f_inf + c / s`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Extrapolation {
    pub limit: f64,
    pub coefficient: f64,
    /// RMS of the fit residuals.
    pub residual: f64,
    pub model: String,
    /// Set when the residual exceeds 10% of the smallest `c/s` term.
    pub warning: Option<String>,
}

/// Least-squares fit of `f_inf + c/s` to samples at increasing parameters.
pub fn extrapolate_inverse(params: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if params.len() != values.len() || params.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 samples, got {}", params.len())));
    }
    if params.windows(2).any(|w| w[1] <= w[0]) || params[0] <= 0.0 {
        return Err(Error::DegenerateFit("parameters must be positive and strictly increasing".into()));
    }
    let span = params[params.len() - 1] / params[0];
    if span < 2.0 {
        return Err(Error::DegenerateFit(format!("parameters span a factor {span:.3} < 2")));
    }
    let pts: Vec<(f64, f64)> = params.iter().zip(values).map(|(&s, &f)| (1.0 / s, f)).collect();
    let (limit, coefficient) = line(&pts);
    let residual =
        (pts.iter().map(|&(x, f)| (f - limit - coefficient * x).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    let smallest = (coefficient / params[params.len() - 1]).abs();
    let warning = (residual > 0.1 * smallest && residual > 1e-12 * limit.abs().max(1.0))
        .then(|| format!("fit residual {residual:.3e} exceeds 10% of the 1/s term {smallest:.3e}"));
    Ok(Extrapolation { limit, coefficient, residual, model: "f_inf + c/s".into(), warning })
}

/// Richardson estimate of the limit from values at `h` and `h/2` assuming
/// order `p`.
pub fn richardson(coarse: f64, fine: f64, p: f64) -> f64 {
    let k = 2f64.powf(p);
    (k * fine - coarse) / (k - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_model_is_recovered() {
        let c = 16.0 * std::f64::consts::PI / 3.0;
        let r = [8.0, 16.0, 32.0];
        let v: Vec<f64> = r.iter().map(|r| c + 1.0 / r).collect();
        let e = extrapolate_inverse(&r, &v).unwrap();
        assert!((e.limit - c).abs() < 1e-12);
        assert!((e.coefficient - 1.0).abs() < 1e-12);
        assert!(e.warning.is_none());
    }

    #[test]
    fn constant_sequence() {
        let e = extrapolate_inverse(&[1.0, 2.0, 4.0], &[3.0, 3.0, 3.0]).unwrap();
        assert!((e.limit - 3.0).abs() < 1e-14 && e.coefficient.abs() < 1e-14);
    }

    #[test]
    fn narrow_span_is_degenerate() {
        assert!(matches!(extrapolate_inverse(&[8.0, 10.0, 12.0], &[1.0, 1.0, 1.0]), Err(Error::DegenerateFit(_))));
        assert!(extrapolate_inverse(&[8.0, 16.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn order_of_power_law() {
        let h = [0.5, 0.25, 0.125];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        assert!((convergence_order(&h, &e) - 2.0).abs() < 1e-12);
    }
}
