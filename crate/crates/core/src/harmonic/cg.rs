//! Jacobi-preconditioned conjugate gradients with order-fixed reductions.

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reductions are split into chunks of this many entries; partial sums are
/// added in chunk order, so results do not depend on the thread count.
const CHUNK: usize = 8192;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct CgSettings {
    /// Relative residual target `|b − Ax| / |b|`.
    pub tol: f64,
    /// Defaults to `50 N^{1/3}` for `N` unknowns.
    pub max_iter: Option<usize>,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None }
    }
}

impl CgSettings {
    pub fn iteration_cap(&self, unknowns: usize) -> usize {
        self.max_iter.unwrap_or_else(|| (50.0 * (unknowns as f64).cbrt()).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `A x = b` for SPD `A`, given `apply(x, y)` writing `y = A x` and
/// the inverse diagonal. Entries where `inv_diag` is 0 are held fixed.
pub fn pcg<F>(
    apply: F,
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    settings: &CgSettings,
    unknowns: usize,
) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.par_iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    r.par_iter_mut().zip(b.par_iter().zip(&ap)).for_each(|(r, (b, a))| *r = b - a);
    let mut z: Vec<f64> = r.par_iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let cap = settings.iteration_cap(unknowns);
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut residual = dot(&r, &r).sqrt() / b_norm;
    let mut it = 0;
    while residual > settings.tol {
        if it >= cap {
            return Err(Error::NoConvergence {
                iterations: it,
                residual,
                condition: lanczos_condition(&alphas, &betas),
            });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NoConvergence { iterations: it, residual, condition: f64::INFINITY });
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(&ap).for_each(|(r, a)| *r -= alpha * a);
        z.par_iter_mut().zip(r.par_iter().zip(inv_diag)).for_each(|(z, (r, d))| *z = r * d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        alphas.push(alpha);
        betas.push(beta);
        residual = dot(&r, &r).sqrt() / b_norm;
        it += 1;
    }
    // Recompute the true residual once to guard against drift.
    apply(x, &mut ap);
    r.par_iter_mut().zip(b.par_iter().zip(&ap)).for_each(|(r, (b, a))| *r = b - a);
    let residual = dot(&r, &r).sqrt() / b_norm;
    Ok(CgOutcome { iterations: it, residual })
}

/// Condition number of the preconditioned operator estimated from the
/// Lanczos tridiagonal matrix implied by the CG coefficients.
pub fn lanczos_condition(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    if k == 0 {
        return f64::NAN;
    }
    let mut diag = vec![0.0; k];
    let mut off = vec![0.0; k.saturating_sub(1)];
    for j in 0..k {
        diag[j] = 1.0 / alphas[j] + if j > 0 { betas[j - 1] / alphas[j - 1] } else { 0.0 };
        if j + 1 < k {
            off[j] = betas[j].sqrt() / alphas[j];
        }
    }
    let (lo, hi) = tridiagonal_extremes(&diag, &off);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by
/// Sturm-sequence bisection.
pub fn tridiagonal_extremes(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    // number of eigenvalues below x
    let count = |x: f64| {
        let mut c = 0;
        let mut q = 1.0;
        for i in 0..n {
            let o2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            q = diag[i] - x - if i > 0 { o2 / q } else { 0.0 };
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    let bisect = |target: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if count(m) > target {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(n - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_tridiagonal_system() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 2.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        };
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        apply(&exact, &mut b);
        let mut x = vec![0.0; n];
        let inv = vec![0.5; n];
        let out = pcg(apply, &inv, &b, &mut x, &CgSettings::default(), n).unwrap();
        assert!(out.residual <= 1e-10);
        for i in 0..n {
            assert!((x[i] - exact[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn sturm_bisection_finds_laplacian_spectrum() {
        let n = 20;
        let (lo, hi) = tridiagonal_extremes(&vec![2.0; n], &vec![-1.0; n - 1]);
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        assert!((lo - (2.0 - 2.0 * h.cos())).abs() < 1e-10);
        assert!((hi - (2.0 + 2.0 * h.cos())).abs() < 1e-10);
    }

    #[test]
    fn iteration_cap_triggers_error() {
        let n = 200;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = (i as f64 + 1.0) * x[i];
            }
        };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let inv = vec![1.0; n];
        let err = pcg(apply, &inv, &b, &mut x, &CgSettings { tol: 1e-12, max_iter: Some(3) }, n).unwrap_err();
        match err {
            Error::NoConvergence { iterations, condition, .. } => {
                assert_eq!(iterations, 3);
                assert!(condition > 1.0);
            }
            e => panic!("{e}"),
        }
    }
}
