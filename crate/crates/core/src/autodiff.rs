//! Second-order forward-mode differentiation in three variables.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to the chart coordinates. Arithmetic propagates all three exactly,
//! which gives closed-form first and second derivatives for every analytic
//! metric family and test field in the crate without hand-expanding the
//! chain rule for each one.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: Vec3,
    pub h: Mat3,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 3], h: [[0.0; 3]; 3] }
    }

    /// The coordinate function `x^axis` evaluated at `value`.
    pub fn variable(value: f64, axis: usize) -> Self {
        let mut d = [0.0; 3];
        d[axis] = 1.0;
        Self { v: value, d, h: [[0.0; 3]; 3] }
    }

    /// The three coordinate functions at a point.
    pub fn coords(p: Vec3) -> [Jet; 3] {
        [Self::variable(p[0], 0), Self::variable(p[1], 1), Self::variable(p[2], 2)]
    }

    /// Composition `f(self)` given `f`, `f'` and `f''` at `self.v`.
    pub fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..3 {
            out.d[i] = df * self.d[i];
            for j in 0..3 {
                out.h[i][j] = df * self.h[i][j] + ddf * self.d[i] * self.d[j];
            }
        }
        out
    }

    pub fn scale(self, s: f64) -> Self {
        let mut out = self;
        out.v *= s;
        for i in 0..3 {
            out.d[i] *= s;
            for j in 0..3 {
                out.h[i][j] *= s;
            }
        }
        out
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }

    pub fn powi(self, n: i32) -> Self {
        let nf = f64::from(n);
        let p2 = self.v.powi(n - 2);
        let p1 = p2 * self.v;
        self.chain(p1 * self.v, nf * p1, nf * (nf - 1.0) * p2)
    }

    pub fn erf(self) -> Self {
        let g = std::f64::consts::FRAC_2_SQRT_PI * (-self.v * self.v).exp();
        self.chain(libm::erf(self.v), g, -2.0 * self.v * g)
    }

    pub fn square(self) -> Self {
        self * self
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for i in 0..3 {
            out.d[i] += o.d[i];
            for j in 0..3 {
                out.h[i][j] += o.h[i][j];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..3 {
            out.d[i] = self.d[i] * o.v + self.v * o.d[i];
            for j in 0..3 {
                out.h[i][j] = self.h[i][j] * o.v + self.v * o.h[i][j] + self.d[i] * o.d[j] + self.d[j] * o.d[i];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        let mut out = self;
        out.v += c;
        out
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        self + (-c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

/// `|x|^2` as a jet.
pub fn radius_squared(p: Vec3) -> Jet {
    let [x, y, z] = Jet::coords(p);
    x * x + y * y + z * z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Vec3) -> Jet, p: Vec3) {
        let h = 1e-4;
        let j = f(p);
        for a in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[a] += h;
            pm[a] -= h;
            let (fp, fm) = (f(pp), f(pm));
            let d = (fp.v - fm.v) / (2.0 * h);
            assert!((d - j.d[a]).abs() < 1e-6 * (1.0 + d.abs()), "d{a}: {d} vs {}", j.d[a]);
            for b in 0..3 {
                let hb = (fp.d[b] - fm.d[b]) / (2.0 * h);
                assert!((hb - j.h[a][b]).abs() < 1e-6 * (1.0 + hb.abs()));
            }
        }
    }

    #[test]
    fn elementary_functions_match_differences() {
        let p = [0.7, -0.3, 1.1];
        fd_check(|p| radius_squared(p).sqrt().recip(), p);
        fd_check(|p| (radius_squared(p) * -0.5).exp() * Jet::variable(p[0], 0), p);
        fd_check(|p| (radius_squared(p).sqrt() * 0.8).erf() / radius_squared(p).sqrt(), p);
        fd_check(|p| (Jet::variable(p[1], 1) + 2.0).powi(4) / (Jet::variable(p[2], 2) + 3.0), p);
        fd_check(|p| (radius_squared(p) + 1.0).ln(), p);
    }

    #[test]
    fn hessian_is_symmetric() {
        let [x, y, z] = Jet::coords([0.4, 1.3, -0.2]);
        let f = (x * y).exp() / (z * z + 1.0) + x.powi(3) * y;
        for i in 0..3 {
            for j in 0..3 {
                assert!((f.h[i][j] - f.h[j][i]).abs() < 1e-14);
            }
        }
    }
}
