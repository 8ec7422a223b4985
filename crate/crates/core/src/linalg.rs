//! Small fixed-size helpers for 3-vectors and 3x3 matrices.

use crate::autodiff::{Mat3, Vec3};

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

/// `m(a, b) = a^i m_ij b^j`.
pub fn bilinear(m: &Mat3, a: Vec3, b: Vec3) -> f64 {
    dot(a, mat_vec(m, b))
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn inverse(m: &Mat3) -> Mat3 {
    let d = det(m);
    let inv = 1.0 / d;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, e) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = (m[a][c] * m[b][e] - m[a][e] * m[b][c]) * inv;
        }
    }
    out
}

/// Leading principal minors, in order of size.
pub fn leading_minors(m: &Mat3) -> [f64; 3] {
    [m[0][0], m[0][0] * m[1][1] - m[0][1] * m[1][0], det(m)]
}

/// Full contraction `a^{ik} a^{jl} b_ij b_kl` of a symmetric covariant tensor
/// against the inverse metric `ginv`.
pub fn norm_sq_with(ginv: &Mat3, b: &Mat3) -> f64 {
    let mut tmp = [[0.0; 3]; 3];
    for i in 0..3 {
        for l in 0..3 {
            tmp[i][l] = (0..3).map(|j| ginv[i][j] * b[j][l]).sum();
        }
    }
    let mut s = 0.0;
    for i in 0..3 {
        for l in 0..3 {
            s += tmp[i][l] * tmp[l][i];
        }
    }
    s
}

pub fn trace_with(ginv: &Mat3, b: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += ginv[i][j] * b[i][j];
        }
    }
    s
}

pub fn scale_mat(m: &Mat3, s: f64) -> Mat3 {
    let mut out = *m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    out
}

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trips() {
        let m = [[2.0, 0.3, -0.1], [0.3, 1.5, 0.2], [-0.1, 0.2, 1.1]];
        let inv = inverse(&m);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-14);
            }
        }
    }
}
