//! Matrix-free discrete Dirichlet energy
//! `E(u) = ½ Σ √det g g^{ij} ∂_i u ∂_j u h³`.
//!
//! Diagonal terms live on lattice edges (metric at the edge midpoint), cross
//! terms on plaquettes (metric at the plaquette centre). A conformally flat
//! metric has no cross terms and the operator is the 7-point stencil;
//! otherwise the plaquettes add the 12 face-diagonal neighbours (19 points).

use rayon::prelude::*;

use super::boundary::ExcisionMode;
use super::cg::{self, CgSettings};
use super::{DirichletData, HarmonicSolution, MaxPrinciple};
use crate::discretization::{GridDomain, NodeClass, ScalarField};
use crate::linalg;
use crate::metric::{MetricSpec, Point3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Absent,
    Free,
    Fixed,
}

/// Plane index of the axis pair `(a, b)`, `a < b`.
const PLANES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

pub struct System {
    pub domain: GridDomain,
    pub excision: ExcisionMode,
    pub role: Vec<Role>,
    /// `edge[p][a]`: coefficient `h √g g^{aa}` of the edge `(p, p + e_a)`.
    edge: Vec<[f64; 3]>,
    /// `plaq[p][k]`: `h √g g^{ab} / 2` of the plaquette with origin `p` in
    /// plane `k`; absent for conformally flat metrics.
    plaq: Option<Vec<[f64; 3]>>,
    diag: Vec<f64>,
    pub unknowns: usize,
}

fn stiffness(spec: &MetricSpec, p: Point3) -> Result<[[f64; 3]; 3]> {
    let g = spec.metric_value(p)?;
    let minors = linalg::leading_minors(&g);
    if minors.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::NotPositiveDefinite { point: p, minors });
    }
    Ok(linalg::scale_mat(&linalg::inverse(&g), linalg::det(&g).sqrt()))
}

/// Builds the operator for `spec` on `domain`. Fails if the metric is not
/// positive definite at any midpoint the energy samples.
pub fn assemble_system(spec: &MetricSpec, domain: GridDomain, excision: ExcisionMode) -> Result<System> {
    let d = domain.dim();
    let classes = domain.classes();
    let role: Vec<Role> = classes
        .par_iter()
        .map(|c| match c {
            NodeClass::Interior | NodeClass::ExcisionLayer => Role::Free,
            NodeClass::Truncation(_) => Role::Fixed,
            NodeClass::Excised => match excision {
                ExcisionMode::Neumann => Role::Absent,
                ExcisionMode::Dirichlet => Role::Fixed,
            },
            NodeClass::Outside => Role::Absent,
        })
        .collect();
    let unknowns = role.iter().filter(|&&r| r == Role::Free).count();
    let h = domain.spacing;
    let idx = |i: usize, j: usize, k: usize| domain.index(i, j, k);
    let participates = |n: usize| role[n] != Role::Absent;

    let edge: Result<Vec<[f64; 3]>> = (0..domain.len())
        .into_par_iter()
        .map(|n| {
            let (i, j, k) = domain.coords(n);
            let mut out = [0.0; 3];
            if !participates(n) {
                return Ok(out);
            }
            let c = [i, j, k];
            for a in 0..3 {
                if c[a] + 1 >= d {
                    continue;
                }
                let mut q = c;
                q[a] += 1;
                let m = idx(q[0], q[1], q[2]);
                if !participates(m) || (role[n] == Role::Fixed && role[m] == Role::Fixed) {
                    continue;
                }
                let mut mid = domain.point(i, j, k).to_array();
                mid[a] += 0.5 * h;
                out[a] = h * stiffness(spec, Point3::from(mid))?[a][a];
            }
            Ok(out)
        })
        .collect();
    let edge = edge?;

    let plaq = if spec.is_conformally_flat() {
        None
    } else {
        let plaq: Result<Vec<[f64; 3]>> = (0..domain.len())
            .into_par_iter()
            .map(|n| {
                let (i, j, k) = domain.coords(n);
                let c = [i, j, k];
                let mut out = [0.0; 3];
                for (slot, &(a, b)) in PLANES.iter().enumerate() {
                    if c[a] + 1 >= d || c[b] + 1 >= d {
                        continue;
                    }
                    let corner = |da: usize, db: usize| {
                        let mut q = c;
                        q[a] += da;
                        q[b] += db;
                        idx(q[0], q[1], q[2])
                    };
                    let corners = [corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1)];
                    if corners.iter().any(|&m| !participates(m)) || corners.iter().all(|&m| role[m] == Role::Fixed) {
                        continue;
                    }
                    let mut centre = domain.point(i, j, k).to_array();
                    centre[a] += 0.5 * h;
                    centre[b] += 0.5 * h;
                    out[slot] = 0.5 * h * stiffness(spec, Point3::from(centre))?[a][b];
                }
                Ok(out)
            })
            .collect();
        Some(plaq?)
    };

    let mut system = System { domain, excision, role, edge, plaq, diag: Vec::new(), unknowns };
    system.diag = system.compute_diagonal();
    Ok(system)
}

impl System {
    /// 7 for diagonal metrics, 19 with cross terms.
    pub fn stencil_points(&self) -> usize {
        if self.plaq.is_some() {
            19
        } else {
            7
        }
    }

    fn shifted(&self, c: [usize; 3], a: usize, up: bool) -> Option<usize> {
        let d = self.domain.dim();
        let mut q = c;
        if up {
            if q[a] + 1 >= d {
                return None;
            }
            q[a] += 1;
        } else {
            if q[a] == 0 {
                return None;
            }
            q[a] -= 1;
        }
        Some(self.domain.index(q[0], q[1], q[2]))
    }

    /// `(A x)_n` for a participating node.
    fn row(&self, n: usize, x: &[f64], diagonal_only: bool) -> f64 {
        let (i, j, k) = self.domain.coords(n);
        let c = [i, j, k];
        let xn = if diagonal_only { 1.0 } else { x[n] };
        let other = |m: usize| if diagonal_only { 0.0 } else { x[m] };
        let mut y = 0.0;
        for a in 0..3 {
            if let Some(q) = self.shifted(c, a, true) {
                y += self.edge[n][a] * (xn - other(q));
            }
            if let Some(o) = self.shifted(c, a, false) {
                y += self.edge[o][a] * (xn - other(o));
            }
        }
        if let Some(plaq) = &self.plaq {
            let d = self.domain.dim();
            for (slot, &(a, b)) in PLANES.iter().enumerate() {
                for (da, db) in [(0usize, 0usize), (1, 0), (0, 1), (1, 1)] {
                    // plaquette whose origin is c - da e_a - db e_b
                    if c[a] < da || c[b] < db {
                        continue;
                    }
                    let mut o = c;
                    o[a] -= da;
                    o[b] -= db;
                    if o[a] + 1 >= d || o[b] + 1 >= d {
                        continue;
                    }
                    let s = plaq[self.domain.index(o[0], o[1], o[2])][slot];
                    if s == 0.0 {
                        continue;
                    }
                    let mut opp = o;
                    opp[a] += 1 - da;
                    opp[b] += 1 - db;
                    let m = self.domain.index(opp[0], opp[1], opp[2]);
                    let sign = if da == db { 1.0 } else { -1.0 };
                    y += sign * s * (xn - other(m));
                }
            }
        }
        y
    }

    fn compute_diagonal(&self) -> Vec<f64> {
        (0..self.domain.len())
            .into_par_iter()
            .map(|n| if self.role[n] == Role::Absent { 0.0 } else { self.row(n, &[], true) })
            .collect()
    }

    /// `y = A x` on the rows selected by `rows`; other entries are zeroed.
    pub fn apply(&self, x: &[f64], y: &mut [f64], free_rows_only: bool) {
        y.par_iter_mut().enumerate().for_each(|(n, y)| {
            let r = self.role[n];
            *y = if r == Role::Free || (!free_rows_only && r == Role::Fixed) { self.row(n, x, false) } else { 0.0 };
        });
    }

    /// Dirichlet energy `½ xᵀ A x` (with the `h³` volume factor included).
    pub fn energy(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y, false);
        0.5 * cg::dot(x, &y)
    }

    /// Solves with the given Dirichlet data.
    pub fn solve(&self, data: &DirichletData, settings: &CgSettings) -> Result<HarmonicSolution> {
        let domain = self.domain;
        // Fixed values that couple to an unknown must exist; the rest are
        // stored when the data is defined there (the puncture may not be).
        let coupled = self.coupled_fixed();
        let fixed: Result<Vec<f64>> = (0..domain.len())
            .into_par_iter()
            .map(|n| match (self.role[n], coupled[n]) {
                (Role::Fixed, true) => data.value(domain.point_of(n)),
                (Role::Fixed, false) => Ok(data.value(domain.point_of(n)).unwrap_or(0.0)),
                _ => Ok(0.0),
            })
            .collect();
        let fixed = fixed?;
        let mut rhs = vec![0.0; domain.len()];
        self.apply(&fixed, &mut rhs, true);
        rhs.par_iter_mut().for_each(|v| *v = -*v);
        let inv_diag: Vec<f64> = (0..domain.len())
            .into_par_iter()
            .map(|n| if self.role[n] == Role::Free { 1.0 / self.diag[n] } else { 0.0 })
            .collect();
        let mut x = vec![0.0; domain.len()];
        // Start from the data itself, which is already close at large r.
        let start: Result<Vec<f64>> = (0..domain.len())
            .into_par_iter()
            .map(|n| if self.role[n] == Role::Free { data.value(domain.point_of(n)).or(Ok(0.0)) } else { Ok(0.0) })
            .collect();
        x.copy_from_slice(&start?);
        let outcome = cg::pcg(|p, y| self.apply(p, y, true), &inv_diag, &rhs, &mut x, settings, self.unknowns)?;
        let values: Vec<f64> =
            x.iter().zip(&fixed).zip(&self.role).map(|((x, f), r)| if *r == Role::Free { *x } else { *f }).collect();
        let energy = self.energy(&values);
        let max_principle = self.max_principle(&values, &coupled);
        let u = ScalarField { domain, values, excised_valid: self.excision == ExcisionMode::Dirichlet };
        Ok(HarmonicSolution {
            u,
            residual: outcome.residual,
            iterations: outcome.iterations,
            energy,
            data: *data,
            excision: self.excision,
            stencil_points: self.stencil_points(),
            max_principle,
        })
    }

    /// Fixed nodes sharing an edge or plaquette with an unknown.
    fn coupled_fixed(&self) -> Vec<bool> {
        let d = self.domain.dim();
        (0..self.domain.len())
            .into_par_iter()
            .map(|n| {
                if self.role[n] != Role::Fixed {
                    return false;
                }
                let (i, j, k) = self.domain.coords(n);
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        for dk in -1i64..=1 {
                            let q = [i as i64 + di, j as i64 + dj, k as i64 + dk];
                            if q.iter().any(|&v| v < 0 || v >= d as i64) {
                                continue;
                            }
                            let m = self.domain.index(q[0] as usize, q[1] as usize, q[2] as usize);
                            if self.role[m] == Role::Free {
                                return true;
                            }
                        }
                    }
                }
                false
            })
            .collect()
    }

    fn max_principle(&self, values: &[f64], coupled: &[bool]) -> MaxPrinciple {
        let mut bmin = f64::INFINITY;
        let mut bmax = f64::NEG_INFINITY;
        let mut imin = f64::INFINITY;
        let mut imax = f64::NEG_INFINITY;
        for (n, &v) in values.iter().enumerate() {
            match self.role[n] {
                Role::Fixed if coupled[n] => {
                    bmin = bmin.min(v);
                    bmax = bmax.max(v);
                }
                Role::Free => {
                    imin = imin.min(v);
                    imax = imax.max(v);
                }
                _ => {}
            }
        }
        let slack = 1e-9 * (bmax - bmin).abs().max(1e-300);
        let holds = self.unknowns == 0 || (imin >= bmin - slack && imax <= bmax + slack);
        MaxPrinciple { boundary_min: bmin, boundary_max: bmax, interior_min: imin, interior_max: imax, holds }
    }

    /// Dense matrix restricted to the unknowns, for small test systems.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let free: Vec<usize> = (0..self.domain.len()).filter(|&n| self.role[n] == Role::Free).collect();
        let mut out = vec![vec![0.0; free.len()]; free.len()];
        let mut e = vec![0.0; self.domain.len()];
        let mut y = vec![0.0; self.domain.len()];
        for (col, &n) in free.iter().enumerate() {
            e[n] = 1.0;
            self.apply(&e, &mut y, true);
            for (row, &m) in free.iter().enumerate() {
                out[row][col] = y[m];
            }
            e[n] = 0.0;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_operator_is_seven_point_laplacian() {
        let d = GridDomain::cube(1.0, 0.25).unwrap();
        let sys = assemble_system(&MetricSpec::flat(), d, ExcisionMode::Neumann).unwrap();
        assert_eq!(sys.stencil_points(), 7);
        let centre = d.index(4, 4, 4);
        let x = vec![1.0; d.len()];
        let mut y = vec![0.0; d.len()];
        sys.apply(&x, &mut y, true);
        assert!(y[centre].abs() < 1e-14);
        assert!((sys.diag[centre] - 6.0 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn operator_is_symmetric_for_non_diagonal_metric() {
        let d = GridDomain::cube(2.0, 0.5).unwrap();
        let sys = assemble_system(&MetricSpec::schwarzschild_harmonic(1.0), d, ExcisionMode::Neumann).unwrap();
        assert_eq!(sys.stencil_points(), 19);
        let a = sys.dense();
        let mut asym: f64 = 0.0;
        for i in 0..a.len() {
            for j in 0..a.len() {
                asym = asym.max((a[i][j] - a[j][i]).abs());
            }
        }
        assert_eq!(asym, 0.0);
    }
}
