//! Pointwise Riemannian quantities of a metric together with a scalar field.

use crate::autodiff::{Jet, Mat3, Vec3};
use crate::linalg;
use crate::metric::{Christoffel, MetricJet, MetricSpec, Point3};
use crate::Result;

/// Everything the level-set and bound formulas need at one point: the metric,
/// its curvature, and the covariant first and second derivatives of `u`.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub point: Point3,
    pub g: Mat3,
    pub ginv: Mat3,
    pub sqrt_det: f64,
    pub gamma: Christoffel,
    pub ricci: Mat3,
    pub scalar: f64,
    pub u: f64,
    /// Coordinate gradient `∂_i u`.
    pub du: Vec3,
    /// Metric gradient `∇u^i = g^{ij} ∂_j u`.
    pub grad: Vec3,
    /// `|∇u|_g`
    pub norm: f64,
    /// Covariant Hessian `∇²u_ij = ∂_ij u − Γ^l_ij ∂_l u`.
    pub hess: Mat3,
    /// `Δ_g u`
    pub laplacian: f64,
    /// `|∇²u|²`
    pub hess_norm_sq: f64,
    /// `∂_k |∇u| = ∇²u(∇u, ∂_k) / |∇u|`.
    pub d_norm: Vec3,
    /// `|∇|∇u||²`
    pub d_norm_sq: f64,
}

impl PointGeometry {
    pub fn new(spec: &MetricSpec, p: Point3, u: &Jet) -> Result<Self> {
        let jet = spec.metric_jet(p)?;
        let scalar = spec.scalar_curvature(p)?;
        Ok(Self::from_parts(&jet, scalar, u))
    }

    pub fn from_parts(jet: &MetricJet, scalar: f64, u: &Jet) -> Self {
        let ginv = jet.inverse();
        let gamma = jet.christoffel();
        let ricci = jet.ricci();
        let du = u.d;
        let grad = linalg::mat_vec(&ginv, du);
        let norm = linalg::dot(du, grad).max(0.0).sqrt();
        let mut hess = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = u.h[i][j];
                for l in 0..3 {
                    s -= gamma[l][i][j] * du[l];
                }
                hess[i][j] = s;
            }
        }
        let laplacian = linalg::trace_with(&ginv, &hess);
        let hess_norm_sq = linalg::norm_sq_with(&ginv, &hess);
        let d_norm = if norm > 0.0 { linalg::scale(linalg::mat_vec(&hess, grad), 1.0 / norm) } else { [0.0; 3] };
        let d_norm_sq = linalg::bilinear(&ginv, d_norm, d_norm);
        Self {
            point: jet.point,
            g: jet.g,
            ginv,
            sqrt_det: jet.sqrt_det(),
            gamma,
            ricci,
            scalar,
            u: u.v,
            du,
            grad,
            norm,
            hess,
            laplacian,
            hess_norm_sq,
            d_norm,
            d_norm_sq,
        }
    }

    /// `g(a, b)` for vectors.
    pub fn inner(&self, a: Vec3, b: Vec3) -> f64 {
        linalg::bilinear(&self.g, a, b)
    }

    pub fn length(&self, a: Vec3) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// `Ric(∇u, ∇u)`
    pub fn ricci_grad(&self) -> f64 {
        linalg::bilinear(&self.ricci, self.grad, self.grad)
    }

    /// Covariant acceleration `∇_V V` of the vector field whose value is `v`
    /// and whose directional derivative along itself is `dv = (V·∂)V`.
    pub fn acceleration(&self, v: Vec3, dv: Vec3) -> Vec3 {
        let mut out = dv;
        for (l, o) in out.iter_mut().enumerate() {
            *o += linalg::bilinear(&self.gamma[l], v, v);
        }
        out
    }

    /// Metric unit normal `υ^i` to a surface with Euclidean (co)normal `n`,
    /// and the ratio `dA_g / dA_δ`.
    pub fn unit_normal(&self, n: Vec3) -> (Vec3, f64) {
        let raised = linalg::mat_vec(&self.ginv, n);
        let len = linalg::dot(n, raised).sqrt();
        let en = linalg::norm(n);
        (linalg::scale(raised, 1.0 / len), self.sqrt_det * len / en)
    }
}

/// Mean curvature of the level sets of `f` with respect to the unit normal
/// `∇f/|∇f|`, as the divergence `(1/√g) ∂_i(√g ∇f^i/|∇f|)`.
pub fn level_mean_curvature(spec: &MetricSpec, p: Point3, f: &Jet) -> Result<f64> {
    let gj = spec.metric_jets(p)?;
    // Inverse metric and sqrt det as first-order jets.
    let det = gj[0][0] * (gj[1][1] * gj[2][2] - gj[1][2] * gj[2][1])
        - gj[0][1] * (gj[1][0] * gj[2][2] - gj[1][2] * gj[2][0])
        + gj[0][2] * (gj[1][0] * gj[2][1] - gj[1][1] * gj[2][0]);
    let inv_det = det.recip();
    let mut ginv = [[Jet::constant(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, e) = ((i + 1) % 3, (i + 2) % 3);
            ginv[i][j] = (gj[a][c] * gj[b][e] - gj[a][e] * gj[b][c]) * inv_det;
        }
    }
    let sqrt_det = det.sqrt();
    // ∂_j f as jets whose gradient is the Hessian row.
    let df: Vec<Jet> = (0..3).map(|j| Jet { v: f.d[j], d: f.h[j], h: [[0.0; 3]; 3] }).collect();
    let mut norm_sq = Jet::constant(0.0);
    let mut raised = [Jet::constant(0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            raised[i] = raised[i] + ginv[i][j] * df[j];
        }
        norm_sq = norm_sq + raised[i] * df[i];
    }
    let inv_norm = norm_sq.sqrt().recip();
    let mut div = 0.0;
    for (i, r) in raised.iter().enumerate() {
        div += (sqrt_det * *r * inv_norm).d[i];
    }
    Ok(div / sqrt_det.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::radius_squared;

    #[test]
    fn horizon_is_minimal_and_flat_spheres_have_mean_curvature_two_over_r() {
        let r = |p: Point3| radius_squared(p.to_array()).sqrt();
        let p = Point3::new(0.3, 0.4, 0.0);
        let h = level_mean_curvature(&MetricSpec::schwarzschild(1.0), p, &r(p)).unwrap();
        assert!(h.abs() < 1e-12, "{h}");
        let q = Point3::new(1.0, 2.0, 2.0);
        let h = level_mean_curvature(&MetricSpec::flat(), q, &r(q)).unwrap();
        assert!((h - 2.0 / 3.0).abs() < 1e-13);
    }
}
