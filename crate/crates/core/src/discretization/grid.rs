//! Node-centred lattices on `[-L, L]^3` and second-order finite differences.

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet, Vec3};
use crate::field::Potential;
use crate::linalg;
use crate::metric::{MetricSpec, Point3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Box,
    Cylinder,
}

/// Which part of the truncation surface a boundary node represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    Face,
    Cap,
    Tube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Interior,
    /// Active node next to the excised ball (the discrete inner sphere).
    ExcisionLayer,
    Truncation(BoundaryClass),
    Excised,
    Outside,
}

impl NodeClass {
    /// Nodes that carry a value of the solution.
    pub fn is_active(self) -> bool {
        !matches!(self, NodeClass::Excised | NodeClass::Outside)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub shape: Shape,
    pub half_extent: f64,
    pub spacing: f64,
    /// Cylinder axis; ignored for boxes.
    pub axis: Vec3,
    /// Radius of the excised ball, 0 for none.
    pub excision_radius: f64,
    n: usize,
}

impl GridDomain {
    pub fn new(shape: Shape, half_extent: f64, spacing: f64, axis: Vec3, excision_radius: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(half_extent > 0.0) {
            return Err(Error::invalid("domain", "half extent and spacing must be positive"));
        }
        let ratio = half_extent / spacing;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 2.0 {
            return Err(Error::invalid(
                "domain",
                format!("spacing {spacing} does not divide half extent {half_extent} into at least 2 cells"),
            ));
        }
        if !(excision_radius >= 0.0) || excision_radius >= half_extent {
            return Err(Error::invalid("domain", "excision radius must lie in [0, L)"));
        }
        if (linalg::norm(axis) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("domain", "axis must be a unit vector"));
        }
        Ok(Self { shape, half_extent, spacing, axis, excision_radius, n: n as usize })
    }

    pub fn cube(half_extent: f64, spacing: f64) -> Result<Self> {
        Self::new(Shape::Box, half_extent, spacing, [1.0, 0.0, 0.0], 0.0)
    }

    pub fn cylinder(half_extent: f64, spacing: f64, axis: Vec3) -> Result<Self> {
        Self::new(Shape::Cylinder, half_extent, spacing, axis, 0.0)
    }

    pub fn with_excision(mut self, radius: f64) -> Result<Self> {
        self.excision_radius = radius;
        Self::new(self.shape, self.half_extent, self.spacing, self.axis, radius)
    }

    /// Cells per half extent.
    pub fn cells(&self) -> usize {
        self.n
    }

    /// Nodes per axis.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.dim().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let d = self.dim();
        (i * d + j) * d + k
    }

    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let d = self.dim();
        (idx / (d * d), (idx / d) % d, idx % d)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Point3 {
        Point3::new(self.coordinate(i), self.coordinate(j), self.coordinate(k))
    }

    pub fn point_of(&self, idx: usize) -> Point3 {
        let (i, j, k) = self.coords(idx);
        self.point(i, j, k)
    }

    fn inside_shape(&self, p: Point3) -> bool {
        match self.shape {
            Shape::Box => true,
            Shape::Cylinder => {
                let (along, rho) = axial(self.axis, p.to_array());
                let tol = 1e-9 * self.spacing;
                along.abs() <= self.half_extent + tol && rho <= self.half_extent + tol
            }
        }
    }

    fn excised(&self, p: Point3) -> bool {
        self.excision_radius > 0.0 && p.r() < self.excision_radius
    }

    pub fn class(&self, i: usize, j: usize, k: usize) -> NodeClass {
        let p = self.point(i, j, k);
        if !self.inside_shape(p) {
            return NodeClass::Outside;
        }
        if self.excised(p) {
            return NodeClass::Excised;
        }
        let last = self.dim() - 1;
        let on_lattice_edge = [i, j, k].iter().any(|&c| c == 0 || c == last);
        match self.shape {
            Shape::Box if on_lattice_edge => return NodeClass::Truncation(BoundaryClass::Face),
            Shape::Cylinder => {
                let outside_neighbour = on_lattice_edge
                    || self.neighbours(i, j, k).any(|(a, b, c)| !self.inside_shape(self.point(a, b, c)));
                if outside_neighbour {
                    let (along, rho) = axial(self.axis, p.to_array());
                    let class = if self.half_extent - along.abs() <= self.half_extent - rho {
                        BoundaryClass::Cap
                    } else {
                        BoundaryClass::Tube
                    };
                    return NodeClass::Truncation(class);
                }
            }
            Shape::Box => {}
        }
        if self.excision_radius > 0.0 && self.neighbours(i, j, k).any(|(a, b, c)| self.excised(self.point(a, b, c))) {
            return NodeClass::ExcisionLayer;
        }
        NodeClass::Interior
    }

    pub fn classes(&self) -> Vec<NodeClass> {
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = self.coords(idx);
                self.class(i, j, k)
            })
            .collect()
    }

    /// The (up to six) lattice neighbours of a node.
    pub fn neighbours(&self, i: usize, j: usize, k: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let last = self.dim() - 1;
        let steps: [(isize, isize, isize); 6] = [(-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)];
        steps.into_iter().filter_map(move |(a, b, c)| {
            let ni = i as isize + a;
            let nj = j as isize + b;
            let nk = k as isize + c;
            let ok = |v: isize| v >= 0 && v as usize <= last;
            (ok(ni) && ok(nj) && ok(nk)).then_some((ni as usize, nj as usize, nk as usize))
        })
    }

    /// Trapezoidal coordinate weight of a node (before the √det g factor).
    pub fn trapezoid_weight(&self, i: usize, j: usize, k: usize) -> f64 {
        let last = self.dim() - 1;
        let f = |c: usize| if self.shape == Shape::Box && (c == 0 || c == last) { 0.5 } else { 1.0 };
        f(i) * f(j) * f(k) * self.spacing.powi(3)
    }

    /// Integrates `integrand(node) · √det g` over the active nodes with
    /// trapezoidal weights. Nodes where the integrand returns `None` are
    /// skipped and their measure reported.
    pub fn volume_integral<F>(&self, spec: &MetricSpec, integrand: F) -> Result<VolumeIntegral>
    where
        F: Fn(usize, usize, usize) -> Result<Option<f64>> + Sync,
    {
        let d = self.dim();
        let slabs: Vec<Result<[f64; 3]>> = (0..d)
            .into_par_iter()
            .map(|i| {
                let mut acc = [0.0; 3];
                for j in 0..d {
                    for k in 0..d {
                        if !self.class(i, j, k).is_active() {
                            continue;
                        }
                        let w = self.trapezoid_weight(i, j, k) * spec.metric_jet(self.point(i, j, k))?.sqrt_det();
                        acc[2] += w;
                        match integrand(i, j, k)? {
                            Some(v) => acc[0] += v * w,
                            None => acc[1] += w,
                        }
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut total = [0.0; 3];
        for s in slabs {
            let s = s?;
            for c in 0..3 {
                total[c] += s[c];
            }
        }
        Ok(VolumeIntegral { value: total[0], skipped_measure: total[1], total_measure: total[2] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeIntegral {
    pub value: f64,
    pub skipped_measure: f64,
    pub total_measure: f64,
}

impl VolumeIntegral {
    pub fn skipped_fraction(&self) -> f64 {
        if self.total_measure > 0.0 {
            self.skipped_measure / self.total_measure
        } else {
            0.0
        }
    }
}

/// Coordinate along `axis` and distance from it.
pub fn axial(axis: Vec3, p: Vec3) -> (f64, f64) {
    let along = linalg::dot(axis, p);
    let perp = linalg::sub(p, linalg::scale(axis, along));
    (along, linalg::norm(perp))
}

/// Node-indexed scalar data on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub domain: GridDomain,
    pub values: Vec<f64>,
    /// Whether values stored at excised nodes are meaningful (Dirichlet
    /// excision) and may enter difference stencils.
    pub excised_valid: bool,
}

impl ScalarField {
    pub fn zeros(domain: GridDomain) -> Self {
        Self { domain, values: vec![0.0; domain.len()], excised_valid: false }
    }

    /// Samples a function at every active node; inactive nodes hold 0.
    pub fn sample<F>(domain: GridDomain, f: F) -> Result<Self>
    where
        F: Fn(Point3) -> Result<f64> + Sync,
    {
        let values: Result<Vec<f64>> = (0..domain.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = domain.coords(idx);
                if domain.class(i, j, k).is_active() {
                    let v = f(domain.point(i, j, k))?;
                    if !v.is_finite() {
                        return Err(Error::invalid(
                            "field",
                            format!("non-finite value at {:?}", domain.point(i, j, k)),
                        ));
                    }
                    Ok(v)
                } else {
                    Ok(0.0)
                }
            })
            .collect();
        Ok(Self { domain, values: values?, excised_valid: false })
    }

    pub fn sample_potential(domain: GridDomain, u: &dyn Potential) -> Result<Self> {
        Self::sample(domain, |p| u.value(p))
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.domain.index(i, j, k)]
    }

    fn usable(&self, c: [isize; 3]) -> bool {
        let last = self.domain.dim() as isize - 1;
        if c.iter().any(|&v| v < 0 || v > last) {
            return false;
        }
        match self.domain.class(c[0] as usize, c[1] as usize, c[2] as usize) {
            NodeClass::Outside => false,
            NodeClass::Excised => self.excised_valid,
            _ => true,
        }
    }

    fn at(&self, c: [isize; 3]) -> f64 {
        self.get(c[0] as usize, c[1] as usize, c[2] as usize)
    }

    /// Second-order first-derivative stencil along `axis` at `c`, as
    /// `(offsets, weights)` in units of `1/h`.
    fn first_stencil(&self, c: [isize; 3], axis: usize) -> Option<(&'static [isize], &'static [f64])> {
        let shifted = |s: isize| {
            let mut q = c;
            q[axis] += s;
            self.usable(q)
        };
        if shifted(-1) && shifted(1) {
            Some((&[-1, 1], &[-0.5, 0.5]))
        } else if shifted(1) && shifted(2) {
            Some((&[0, 1, 2], &[-1.5, 2.0, -0.5]))
        } else if shifted(-1) && shifted(-2) {
            Some((&[0, -1, -2], &[1.5, -2.0, 0.5]))
        } else {
            None
        }
    }

    fn first(&self, c: [isize; 3], axis: usize) -> Option<f64> {
        let (off, w) = self.first_stencil(c, axis)?;
        let mut s = 0.0;
        for (&o, &wt) in off.iter().zip(w) {
            let mut q = c;
            q[axis] += o;
            s += wt * self.at(q);
        }
        Some(s / self.domain.spacing)
    }

    fn second(&self, c: [isize; 3], axis: usize) -> Option<f64> {
        let shifted = |s: isize| {
            let mut q = c;
            q[axis] += s;
            self.usable(q)
        };
        let (off, w): (&[isize], &[f64]) = if shifted(-1) && shifted(1) {
            (&[-1, 0, 1], &[1.0, -2.0, 1.0])
        } else if (1..=3).all(shifted) {
            (&[0, 1, 2, 3], &[2.0, -5.0, 4.0, -1.0])
        } else if (1..=3).all(|s| shifted(-s)) {
            (&[0, -1, -2, -3], &[2.0, -5.0, 4.0, -1.0])
        } else {
            return None;
        };
        let mut s = 0.0;
        for (&o, &wt) in off.iter().zip(w) {
            let mut q = c;
            q[axis] += o;
            s += wt * self.at(q);
        }
        let h = self.domain.spacing;
        Some(s / (h * h))
    }

    fn mixed(&self, c: [isize; 3], a: usize, b: usize) -> Option<f64> {
        // Apply the a-stencil to the b-derivative at the shifted nodes.
        let (off, w) = self.first_stencil(c, a)?;
        let mut s = 0.0;
        for (&o, &wt) in off.iter().zip(w) {
            let mut q = c;
            q[a] += o;
            s += wt * self.first(q, b)?;
        }
        Some(s / self.domain.spacing)
    }

    /// Value, gradient and Hessian at a node by finite differences: central
    /// where the full stencil is usable, one-sided second order otherwise.
    pub fn jet_at(&self, i: usize, j: usize, k: usize) -> Result<Jet> {
        let c = [i as isize, j as isize, k as isize];
        let missing = || Error::invalid("stencil", format!("no usable stencil at node ({i}, {j}, {k})"));
        if !self.usable(c) {
            return Err(missing());
        }
        let mut jet = Jet::constant(self.at(c));
        for a in 0..3 {
            jet.d[a] = self.first(c, a).ok_or_else(missing)?;
            jet.h[a][a] = self.second(c, a).ok_or_else(missing)?;
        }
        for a in 0..3 {
            for b in (a + 1)..3 {
                let v = self.mixed(c, a, b).ok_or_else(missing)?;
                jet.h[a][b] = v;
                jet.h[b][a] = v;
            }
        }
        Ok(jet)
    }

    /// Metric Laplacian at an interior node in divergence form,
    /// `(1/√g) ∂_i(√g g^{ij} ∂_j f)`, from the nodal jet and metric jet.
    pub fn laplacian_at(&self, spec: &MetricSpec, i: usize, j: usize, k: usize) -> Result<f64> {
        let jet = self.jet_at(i, j, k)?;
        let geo = crate::geometry::PointGeometry::new(spec, self.domain.point(i, j, k), &jet)?;
        Ok(geo.laplacian)
    }

    pub fn min_max_active(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (idx, &v) in self.values.iter().enumerate() {
            let (i, j, k) = self.domain.coords(idx);
            if self.domain.class(i, j, k).is_active() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

/// A grid field viewed as a potential: nodal difference jets, trilinearly
/// interpolated inside each cell.
pub struct GridPotential<'a> {
    pub field: &'a ScalarField,
}

impl<'a> GridPotential<'a> {
    pub fn new(field: &'a ScalarField) -> Self {
        Self { field }
    }

    fn cell(&self, x: f64) -> (usize, f64) {
        let d = &self.field.domain;
        let s = (x + d.half_extent) / d.spacing;
        let cells = d.dim() - 1;
        let i = (s.floor().max(0.0) as usize).min(cells - 1);
        (i, (s - i as f64).clamp(0.0, 1.0))
    }
}

impl Potential for GridPotential<'_> {
    fn jet(&self, p: Point3) -> Result<Jet> {
        let d = &self.field.domain;
        let a = p.to_array();
        if a.iter().any(|c| c.abs() > d.half_extent * (1.0 + 1e-12)) {
            return Err(Error::invalid("point", format!("{p:?} lies outside the grid")));
        }
        let (i, fx) = self.cell(a[0]);
        let (j, fy) = self.cell(a[1]);
        let (k, fz) = self.cell(a[2]);
        let mut out = Jet::constant(0.0);
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
                    let w = wx * wy * wz;
                    if w == 0.0 {
                        continue;
                    }
                    let jet = self.field.jet_at(i + di, j + dj, k + dk)?;
                    out = out + jet.scale(w);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;

    #[test]
    fn spacing_must_divide_extent() {
        assert!(GridDomain::cube(1.0, 0.3).is_err());
        assert!(GridDomain::cube(1.0, 0.25).is_ok());
    }

    #[test]
    fn quadratics_are_differenced_exactly() {
        let d = GridDomain::cube(1.0, 0.25).unwrap();
        let f = ScalarField::sample(d, |p| Ok(3.0 * p.x * p.x - p.x * p.y + 2.0 * p.z + 0.5 * p.y * p.z)).unwrap();
        for &(i, j, k) in &[(4, 4, 4), (0, 3, 8), (8, 8, 0), (1, 7, 2)] {
            let jet = f.jet_at(i, j, k).unwrap();
            let p = d.point(i, j, k);
            assert!((jet.d[0] - (6.0 * p.x - p.y)).abs() < 1e-12);
            assert!((jet.d[2] - (2.0 + 0.5 * p.y)).abs() < 1e-12);
            assert!((jet.h[0][0] - 6.0).abs() < 1e-10);
            assert!((jet.h[0][1] + 1.0).abs() < 1e-10);
            assert!((jet.h[1][2] - 0.5).abs() < 1e-10);
            assert!(jet.h[1][1].abs() < 1e-10);
        }
    }

    #[test]
    fn unit_integrand_gives_box_volume() {
        let d = GridDomain::cube(2.0, 0.5).unwrap();
        let v = d.volume_integral(&MetricSpec::flat(), |_, _, _| Ok(Some(1.0))).unwrap();
        assert!((v.value - 64.0).abs() < 1e-12);
    }

    #[test]
    fn cylinder_classes() {
        let d = GridDomain::cylinder(2.0, 0.5, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(d.class(0, 0, 4), NodeClass::Outside);
        assert_eq!(d.class(4, 4, 8), NodeClass::Truncation(BoundaryClass::Cap));
        assert_eq!(d.class(8, 4, 4), NodeClass::Truncation(BoundaryClass::Tube));
        assert_eq!(d.class(4, 4, 4), NodeClass::Interior);
        let e = GridDomain::cube(2.0, 0.5).unwrap().with_excision(0.6).unwrap();
        assert_eq!(e.class(4, 4, 4), NodeClass::Excised);
        assert_eq!(e.class(5, 4, 4), NodeClass::Excised);
        assert_eq!(e.class(6, 4, 4), NodeClass::ExcisionLayer);
    }

    #[test]
    fn grid_potential_interpolates_linear_fields_exactly() {
        let d = GridDomain::cube(1.0, 0.25).unwrap();
        let u = AnalyticField::linear([0.6, 0.8, 0.0]);
        let f = ScalarField::sample_potential(d, &u).unwrap();
        let gp = GridPotential::new(&f);
        let j = gp.jet(Point3::new(0.13, -0.71, 0.4)).unwrap();
        assert!((j.v - (0.6 * 0.13 - 0.8 * 0.71)).abs() < 1e-14);
        assert!((j.d[1] - 0.8).abs() < 1e-13);
    }
}
