//! Triangle meshes of level sets: topology, boundary loops and export.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::Vec3;
use crate::linalg;
use crate::Result;

/// Which bounding surface a boundary loop lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopClass {
    /// Outer truncation sphere.
    Sphere,
    /// Excised inner sphere.
    InnerSphere,
    Tube,
    Cap,
    /// The surface ran into the edge of the lattice or into missing data.
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub class: LoopClass,
    pub vertices: Vec<usize>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTopology {
    pub triangles: usize,
    pub euler: i64,
    pub boundary_loops: usize,
    /// `(2 − χ − b)/2`; only meaningful for orientable manifolds.
    pub genus: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetMesh {
    /// Requested level.
    pub level: f64,
    /// Level actually extracted after the tie-breaking nudge.
    pub extracted_level: f64,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub loops: Vec<BoundaryLoop>,
    pub components: Vec<ComponentTopology>,
    pub euler: i64,
    /// Largest number of triangles sharing an edge.
    pub max_edge_valence: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl LevelSetMesh {
    /// Compacts vertices and computes topology. `on_clip[v]` names the clip a
    /// vertex was cut on, `classes[c]` that clip's boundary class.
    pub fn build(
        level: f64,
        extracted_level: f64,
        points: Vec<Vec3>,
        on_clip: Vec<Option<usize>>,
        triangles: Vec<[usize; 3]>,
        classes: &[LoopClass],
    ) -> Self {
        let mut remap = vec![usize::MAX; points.len()];
        let mut vertices = Vec::new();
        let mut tags = Vec::new();
        let triangles: Vec<[usize; 3]> = triangles
            .into_iter()
            .map(|t| {
                t.map(|v| {
                    if remap[v] == usize::MAX {
                        remap[v] = vertices.len();
                        vertices.push(points[v]);
                        tags.push(on_clip[v]);
                    }
                    remap[v]
                })
            })
            .collect();

        let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (f, t) in triangles.iter().enumerate() {
            for q in 0..3 {
                let (a, b) = (t[q], t[(q + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_insert((0, f)).0 += 1;
            }
        }
        let max_edge_valence = edges.values().map(|e| e.0).max().unwrap_or(0);

        let mut uf = UnionFind((0..vertices.len()).collect());
        for t in &triangles {
            uf.union(t[0], t[1]);
            uf.union(t[1], t[2]);
        }

        let mut boundary: Vec<(usize, usize)> = edges.iter().filter(|(_, &(n, _))| n == 1).map(|(&k, _)| k).collect();
        boundary.sort_unstable();
        let loops = walk_loops(&boundary, &tags, classes);

        // per-component V, E, F, loops
        let mut roots: Vec<usize> = (0..vertices.len()).map(|v| uf.find(v)).collect();
        let mut order: Vec<usize> = roots.clone();
        order.sort_unstable();
        order.dedup();
        let slot: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        for r in roots.iter_mut() {
            *r = slot[r];
        }
        let mut v = vec![0i64; order.len()];
        let mut e = vec![0i64; order.len()];
        let mut f = vec![0usize; order.len()];
        let mut b = vec![0usize; order.len()];
        for &r in &roots {
            v[r] += 1;
        }
        for &(a, _) in edges.keys() {
            e[roots[a]] += 1;
        }
        for t in &triangles {
            f[roots[t[0]]] += 1;
        }
        for l in &loops {
            b[roots[l.vertices[0]]] += 1;
        }
        let components: Vec<ComponentTopology> = (0..order.len())
            .map(|c| {
                let euler = v[c] - e[c] + f[c] as i64;
                ComponentTopology { triangles: f[c], euler, boundary_loops: b[c], genus: (2 - euler - b[c] as i64) / 2 }
            })
            .collect();
        let euler = components.iter().map(|c| c.euler).sum();
        Self { level, extracted_level, vertices, triangles, loops, components, euler, max_edge_valence }
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn loops_of(&self, class: LoopClass) -> usize {
        self.loops.iter().filter(|l| l.class == class).count()
    }

    /// Euclidean area and unit normal of one triangle.
    pub fn triangle(&self, f: usize) -> (Vec3, Vec3, f64) {
        let [a, b, c] = self.triangles[f].map(|v| self.vertices[v]);
        let n = linalg::cross(linalg::sub(b, a), linalg::sub(c, a));
        let len = linalg::norm(n);
        let centroid = linalg::scale(linalg::add(linalg::add(a, b), c), 1.0 / 3.0);
        let normal = if len > 0.0 { linalg::scale(n, 1.0 / len) } else { [0.0; 3] };
        (centroid, normal, 0.5 * len)
    }

    pub fn euclidean_area(&self) -> f64 {
        (0..self.triangles.len()).map(|f| self.triangle(f).2).sum()
    }

    /// Object File Format text.
    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF\n{} {} 0", self.vertices.len(), self.triangles.len());
        for p in &self.vertices {
            let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", p[0], p[1], p[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    /// Boundary polylines, one row per vertex.
    pub fn loops_csv(&self) -> String {
        let mut s = String::from("loop,class,index,x,y,z\n");
        for (l, lp) in self.loops.iter().enumerate() {
            let class =
                serde_json::to_value(lp.class).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            for (i, &v) in lp.vertices.iter().enumerate() {
                let p = self.vertices[v];
                let _ = writeln!(s, "{l},{class},{i},{:.12e},{:.12e},{:.12e}", p[0], p[1], p[2]);
            }
        }
        s
    }

    pub fn write_off(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_off())?;
        Ok(())
    }
}

/// Chains boundary edges into loops. A loop's class is the most common class
/// among its edges, where an edge belongs to a clip when both of its
/// endpoints were cut on it.
fn walk_loops(edges: &[(usize, usize)], tags: &[Option<usize>], classes: &[LoopClass]) -> Vec<BoundaryLoop> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj.entry(a).or_default().push(i);
        adj.entry(b).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut loops = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut at) = edges[start];
        let mut verts = vec![first, at];
        let mut counts: HashMap<LoopClass, usize> = HashMap::new();
        let class_of = |a: usize, b: usize| match (tags[a], tags[b]) {
            (Some(x), Some(y)) if x == y => classes[x],
            _ => LoopClass::Lattice,
        };
        *counts.entry(class_of(first, at)).or_default() += 1;
        let mut closed = false;
        loop {
            let next = adj[&at].iter().copied().find(|&e| !used[e]);
            let Some(e) = next else { break };
            used[e] = true;
            let (a, b) = edges[e];
            let other = if a == at { b } else { a };
            *counts.entry(class_of(at, other)).or_default() += 1;
            if other == first {
                closed = true;
                break;
            }
            verts.push(other);
            at = other;
        }
        let mut ranked: Vec<(LoopClass, usize)> = counts.into_iter().collect();
        ranked.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        loops.push(BoundaryLoop { class: ranked[0].0, vertices: verts, closed });
    }
    loops
}
