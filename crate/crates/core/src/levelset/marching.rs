//! Marching tetrahedra on rectilinear lattices, with exact clipping against
//! the spheres, tubes and caps that bound the integration region.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::{LevelSetMesh, LoopClass};
use crate::autodiff::Vec3;
use crate::discretization::grid::axial;
use crate::discretization::{GridDomain, Region, ScalarField};
use crate::field::Potential;
use crate::linalg;
use crate::metric::Point3;
use crate::{Error, Result};

/// Node coordinates along each axis; spacing may vary.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub axes: [Vec<f64>; 3],
}

impl Lattice {
    pub fn uniform(half_extent: f64, spacing: f64) -> Result<Self> {
        let d = GridDomain::cube(half_extent, spacing)?;
        Ok(Self::from_domain(&d))
    }

    pub fn from_domain(d: &GridDomain) -> Self {
        let xs: Vec<f64> = (0..d.dim()).map(|i| d.coordinate(i)).collect();
        Self { axes: [xs.clone(), xs.clone(), xs] }
    }

    /// `n` nodes per axis on `[-X, X]` at `x = c sinh(β ξ)`, `ξ` uniform.
    /// Spacing grows by `cosh β` from the centre to the edge. An even `n`
    /// keeps the origin off the lattice.
    pub fn graded(half_extent: f64, nodes: usize, beta: f64) -> Result<Self> {
        if nodes < 3 || !(half_extent > 0.0) || !(beta > 0.0) {
            return Err(Error::invalid("lattice", "need at least 3 nodes, positive extent and grading"));
        }
        let c = half_extent / beta.sinh();
        let xs: Vec<f64> =
            (0..nodes).map(|i| c * (beta * (-1.0 + 2.0 * i as f64 / (nodes - 1) as f64)).sinh()).collect();
        Ok(Self { axes: [xs.clone(), xs.clone(), xs] })
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.axes[0].len(), self.axes[1].len(), self.axes[2].len()]
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [_, ny, nz] = self.dims();
        (i * ny + j) * nz + k
    }

    pub fn point(&self, n: usize) -> Vec3 {
        let [_, ny, nz] = self.dims();
        [self.axes[0][n / (ny * nz)], self.axes[1][(n / nz) % ny], self.axes[2][n % nz]]
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes.iter().flat_map(|a| a.windows(2).map(|w| w[1] - w[0])).fold(f64::INFINITY, f64::min)
    }

    /// Samples a potential; nodes where it is undefined get NaN and are
    /// dropped from extraction.
    pub fn sample(&self, u: &dyn Potential) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|n| u.value(Point3::from(self.point(n))).unwrap_or(f64::NAN)).collect()
    }
}

/// Node values of a solved field, NaN on inactive nodes.
pub fn field_values(field: &ScalarField) -> (Lattice, Vec<f64>) {
    let d = field.domain;
    let classes = d.classes();
    let values = field
        .values
        .iter()
        .zip(&classes)
        .map(|(&v, c)| if c.is_active() || field.excised_valid { v } else { f64::NAN })
        .collect();
    (Lattice::from_domain(&d), values)
}

/// One side of a clipping surface; `level(p) ≤ 0` is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "clip", rename_all = "snake_case")]
pub enum Clip {
    Ball {
        radius: f64,
    },
    ExteriorOfBall {
        radius: f64,
    },
    Tube {
        axis: Vec3,
        radius: f64,
    },
    /// `x·normal ≤ offset`
    HalfSpace {
        normal: Vec3,
        offset: f64,
    },
}

impl Clip {
    pub fn level(&self, p: Vec3) -> f64 {
        match *self {
            Clip::Ball { radius } => linalg::norm(p) - radius,
            Clip::ExteriorOfBall { radius } => radius - linalg::norm(p),
            Clip::Tube { axis, radius } => axial(axis, p).1 - radius,
            Clip::HalfSpace { normal, offset } => linalg::dot(p, normal) - offset,
        }
    }

    pub fn class(&self) -> LoopClass {
        match self {
            Clip::Ball { .. } => LoopClass::Sphere,
            Clip::ExteriorOfBall { .. } => LoopClass::InnerSphere,
            Clip::Tube { .. } => LoopClass::Tube,
            Clip::HalfSpace { .. } => LoopClass::Cap,
        }
    }

    /// Clips whose intersection is `region`.
    pub fn for_region(region: &Region) -> Vec<Clip> {
        match *region {
            Region::Ball { radius } => vec![Clip::Ball { radius }],
            Region::Shell { inner, outer } => {
                let mut v = vec![Clip::Ball { radius: outer }];
                if inner > 0.0 {
                    v.push(Clip::ExteriorOfBall { radius: inner });
                }
                v
            }
            Region::Cylinder { half_length, axis, excision } => {
                let a = linalg::normalize(axis);
                let mut v = vec![
                    Clip::Tube { axis: a, radius: half_length },
                    Clip::HalfSpace { normal: a, offset: half_length },
                    Clip::HalfSpace { normal: linalg::scale(a, -1.0), offset: half_length },
                ];
                if excision > 0.0 {
                    v.push(Clip::ExteriorOfBall { radius: excision });
                }
                v
            }
        }
    }
}

/// The 6 Kuhn tetrahedra of the unit cube, as corner bit masks `x|y<<1|z<<2`.
/// Every tetrahedron contains the main diagonal, so neighbouring cubes split
/// shared faces identically.
const KUHN: [[usize; 4]; 6] = [[0, 1, 3, 7], [0, 1, 5, 7], [0, 2, 3, 7], [0, 2, 6, 7], [0, 4, 5, 7], [0, 4, 6, 7]];

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The level value actually extracted: `t` nudged off node values by
/// `1e-9·h` so no surface vertex coincides with a node.
pub fn regular_level(values: &[f64], t: f64, h: f64) -> Result<f64> {
    let (min, max) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(t > min && t < max) {
        return Err(Error::EmptyLevel { level: t, min, max });
    }
    let mut level = t;
    while values.par_iter().any(|&v| v == level) {
        level += 1e-9 * h;
    }
    Ok(level)
}

/// Extracts `{u = t}` from lattice values and clips it to the intersection of
/// the `clips`.
pub fn extract(lattice: &Lattice, values: &[f64], t: f64, clips: &[Clip]) -> Result<LevelSetMesh> {
    if values.len() != lattice.len() {
        return Err(Error::invalid("level set", "value count does not match lattice"));
    }
    let level = regular_level(values, t, lattice.min_spacing())?;
    let [nx, ny, nz] = lattice.dims();
    let slabs: Vec<Vec<[EdgeKey; 3]>> = (0..nx - 1)
        .into_par_iter()
        .map(|i| {
            let mut tris = Vec::new();
            for j in 0..ny - 1 {
                for k in 0..nz - 1 {
                    let corner = |m: usize| lattice.index(i + (m & 1), j + ((m >> 1) & 1), k + ((m >> 2) & 1));
                    let nodes: [usize; 8] = std::array::from_fn(corner);
                    let vals: [f64; 8] = std::array::from_fn(|m| values[nodes[m]]);
                    if vals.iter().any(|v| !v.is_finite()) {
                        continue;
                    }
                    let above = vals.iter().filter(|&&v| v > level).count();
                    if above == 0 || above == 8 {
                        continue;
                    }
                    for tet in &KUHN {
                        march_tet(tet.map(|m| (nodes[m], vals[m])), level, lattice, &mut tris);
                    }
                }
            }
            tris
        })
        .collect();

    let mut builder = Builder::default();
    let mut polys: Vec<Vec<usize>> = Vec::new();
    for tri in slabs.into_iter().flatten() {
        let ids: Vec<usize> = tri
            .iter()
            .map(|&(a, b)| {
                if let Some(&id) = builder.edge_ids.get(&(a, b)) {
                    return id;
                }
                let (pa, pb) = (lattice.point(a), lattice.point(b));
                let s = (level - values[a]) / (values[b] - values[a]);
                let id = builder.push(lerp(pa, pb, s), None);
                builder.edge_ids.insert((a, b), id);
                id
            })
            .collect();
        polys.push(ids);
    }
    for (c, clip) in clips.iter().enumerate() {
        polys = builder.clip(polys, c, clip);
    }
    let triangles: Vec<[usize; 3]> = polys
        .iter()
        .flat_map(|p| (1..p.len() - 1).map(move |q| [p[0], p[q], p[q + 1]]))
        .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
        .collect();
    let classes: Vec<LoopClass> = clips.iter().map(Clip::class).collect();
    Ok(LevelSetMesh::build(t, level, builder.points, builder.on_clip, triangles, &classes))
}

/// Emits the triangles of `{u = level}` in one tetrahedron as lattice-edge keys,
/// oriented so the normal points towards increasing `u`.
fn march_tet(c: [(usize, f64); 4], level: f64, lattice: &Lattice, out: &mut Vec<[EdgeKey; 3]>) {
    let (hi, lo): (Vec<usize>, Vec<usize>) = (0..4).partition(|&q| c[q].1 > level);
    let e = |a: usize, b: usize| key(c[a].0, c[b].0);
    let raw: Vec<[EdgeKey; 3]> = match hi.len() {
        1 | 3 => {
            let (lone, rest) = if hi.len() == 1 { (hi[0], &lo) } else { (lo[0], &hi) };
            vec![[e(lone, rest[0]), e(lone, rest[1]), e(lone, rest[2])]]
        }
        2 => {
            let (a, b, p, q) = (hi[0], hi[1], lo[0], lo[1]);
            // quad a-p, a-q, b-q, b-p in cyclic order
            vec![[e(a, p), e(a, q), e(b, q)], [e(a, p), e(b, q), e(b, p)]]
        }
        _ => return,
    };
    // Orientation from the Euclidean direction of increasing u across the tet.
    let centroid = |set: &[usize]| {
        let mut s = [0.0; 3];
        for &q in set {
            s = linalg::add(s, lattice.point(c[q].0));
        }
        linalg::scale(s, 1.0 / set.len() as f64)
    };
    let up = linalg::sub(centroid(&hi), centroid(&lo));
    let pos = |k: EdgeKey| {
        let (a, b) = k;
        let (va, vb) = (c.iter().find(|x| x.0 == a).unwrap().1, c.iter().find(|x| x.0 == b).unwrap().1);
        let s = (level - va) / (vb - va);
        linalg::add(lattice.point(a), linalg::scale(linalg::sub(lattice.point(b), lattice.point(a)), s))
    };
    for t in raw {
        let (p0, p1, p2) = (pos(t[0]), pos(t[1]), pos(t[2]));
        let n = linalg::cross(linalg::sub(p1, p0), linalg::sub(p2, p0));
        if linalg::dot(n, up) >= 0.0 {
            out.push(t);
        } else {
            out.push([t[0], t[2], t[1]]);
        }
    }
}

#[derive(Default)]
struct Builder {
    points: Vec<Vec3>,
    on_clip: Vec<Option<usize>>,
    edge_ids: HashMap<EdgeKey, usize>,
    cut_ids: HashMap<(usize, usize, usize), usize>,
}

impl Builder {
    fn push(&mut self, p: Vec3, clip: Option<usize>) -> usize {
        self.points.push(p);
        self.on_clip.push(clip);
        self.points.len() - 1
    }

    /// Sutherland–Hodgman against one clip. Cut points are found by root
    /// finding on the exact clip function along the polygon edge, so they
    /// lie on the clipping surface, and are shared between neighbours.
    fn clip(&mut self, polys: Vec<Vec<usize>>, c: usize, clip: &Clip) -> Vec<Vec<usize>> {
        let mut level: Vec<f64> = self.points.iter().map(|&p| clip.level(p)).collect();
        let mut out = Vec::with_capacity(polys.len());
        for poly in polys {
            if poly.iter().all(|&v| level[v] <= 0.0) {
                out.push(poly);
                continue;
            }
            if poly.iter().all(|&v| level[v] > 0.0) {
                continue;
            }
            let mut kept = Vec::with_capacity(poly.len() + 2);
            for q in 0..poly.len() {
                let (a, b) = (poly[q], poly[(q + 1) % poly.len()]);
                let (ia, ib) = (level[a] <= 0.0, level[b] <= 0.0);
                if ia {
                    kept.push(a);
                }
                if ia != ib {
                    let k = (a.min(b), a.max(b), c);
                    let id = match self.cut_ids.get(&k) {
                        Some(&id) => id,
                        None => {
                            let (pa, pb) = (self.points[a], self.points[b]);
                            let s = root_on_segment(|s| clip.level(lerp(pa, pb, s)), level[a], level[b]);
                            let id = self.push(lerp(pa, pb, s), Some(c));
                            level.push(0.0);
                            self.cut_ids.insert(k, id);
                            id
                        }
                    };
                    kept.push(id);
                }
            }
            if kept.len() >= 3 {
                out.push(kept);
            }
        }
        out
    }
}

fn lerp(a: Vec3, b: Vec3, s: f64) -> Vec3 {
    linalg::add(a, linalg::scale(linalg::sub(b, a), s))
}

/// Root of `f` on `[0, 1]` given opposite-signed end values (Illinois
/// regula falsi).
fn root_on_segment(f: impl Fn(f64) -> f64, f0: f64, f1: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (0.0, 1.0, f0, f1);
    let mut side = 0;
    for _ in 0..100 {
        let s = (a * fb - b * fa) / (fb - fa);
        let fs = f(s);
        if fs == 0.0 || (b - a).abs() < 1e-15 {
            return s;
        }
        if (fs > 0.0) == (fb > 0.0) {
            b = s;
            fb = fs;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = s;
            fa = fs;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    (a * fb - b * fa) / (fb - fa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;
    use crate::levelset::mesh::LoopClass;

    #[test]
    fn plane_in_a_box_is_a_disk() {
        let lat = Lattice::uniform(1.0, 0.25).unwrap();
        let v = lat.sample(&AnalyticField::linear([1.0, 0.0, 0.0]));
        let m = extract(&lat, &v, 0.0, &[]).unwrap();
        assert!(m.extracted_level > 0.0 && m.extracted_level < 1e-9);
        assert_eq!(m.component_count(), 1);
        assert_eq!(m.euler, 1);
        assert_eq!(m.loops.len(), 1);
        assert_eq!(m.loops[0].class, LoopClass::Lattice);
        assert!((m.euclidean_area() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn plane_clipped_to_ball_has_one_sphere_loop() {
        let lat = Lattice::uniform(2.0, 0.125).unwrap();
        let v = lat.sample(&AnalyticField::linear([0.0, 0.6, 0.8]));
        let m = extract(&lat, &v, 0.3, &[Clip::Ball { radius: 1.5 }]).unwrap();
        assert_eq!(m.euler, 1);
        assert_eq!(m.loops_of(LoopClass::Sphere), 1);
        assert!(m.loops[0].closed);
        for &i in &m.loops[0].vertices {
            assert!((linalg::norm(m.vertices[i]) - 1.5).abs() < 1e-12);
        }
        let disk = std::f64::consts::PI * (1.5f64.powi(2) - 0.09);
        assert!((m.euclidean_area() / disk - 1.0).abs() < 5e-3);
    }

    #[test]
    fn sphere_level_is_closed() {
        let lat = Lattice::uniform(1.5, 0.125).unwrap();
        let v = lat.sample(&AnalyticField::RadiusSquared);
        let m = extract(&lat, &v, 1.0, &[]).unwrap();
        assert_eq!(m.euler, 2);
        assert!(m.loops.is_empty());
        assert_eq!(m.max_edge_valence, 2);
        assert!((m.euclidean_area() / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.01);
    }

    #[test]
    fn shell_clip_gives_annulus() {
        let lat = Lattice::graded(3.0, 40, 1.5).unwrap();
        let v = lat.sample(&AnalyticField::linear([1.0, 0.0, 0.0]));
        let clips = Clip::for_region(&Region::Shell { inner: 1.0, outer: 2.5 });
        let m = extract(&lat, &v, 0.2, &clips).unwrap();
        assert_eq!(m.euler, 0);
        assert_eq!(m.loops_of(LoopClass::Sphere), 1);
        assert_eq!(m.loops_of(LoopClass::InnerSphere), 1);
    }

    #[test]
    fn level_outside_range_is_empty() {
        let lat = Lattice::uniform(1.0, 0.5).unwrap();
        let v = lat.sample(&AnalyticField::linear([1.0, 0.0, 0.0]));
        assert!(matches!(extract(&lat, &v, 2.0, &[]), Err(Error::EmptyLevel { .. })));
    }
}
