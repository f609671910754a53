//! Conforming triangulations with oriented faces.
//!
//! Every face stores one global unit normal pointing out of its *owner*,
//! the lower-indexed adjacent triangle. Triangle-local outward normals are
//! `sign * normal` with `sign = +1` for the owner and `-1` for the
//! neighbor, so fluxes through shared faces cancel exactly.

mod io;
mod refine;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use io::{load_mesh, parse_mesh, write_mesh};

/// Text of the bundled unstructured Delaunay mesh of the unit square
/// (269 nodes, 489 triangles).
pub const SAMPLE_UNSTRUCTURED: &str = include_str!("../../data/unit_square_unstructured.msh");

use crate::error::MeshError;
use crate::quadrature::SegmentRule;
use crate::{Point, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    /// Endpoints, sorted ascending; the face parameter runs from
    /// `nodes[0]` to `nodes[1]`.
    pub nodes: [usize; 2],
    pub owner: usize,
    pub neighbor: Option<usize>,
    /// Unit normal, outward from `owner`.
    pub normal: Point,
    pub length: Real,
    pub midpoint: Point,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    faces: Vec<Face>,
    /// Local face `i` of a triangle is opposite its local vertex `i`.
    triangle_faces: Vec<[usize; 3]>,
    areas: Vec<Real>,
    barycenters: Vec<Point>,
    boundary_nodes: Vec<bool>,
}

/// Gauss points and weights on a face together with its global normal.
#[derive(Clone, Debug)]
pub struct FaceFrame {
    pub normal: Point,
    pub points: Vec<Point>,
    /// Weights scaled by the face length.
    pub weights: Vec<Real>,
    /// Face parameter in `[0, 1]` of each point, measured from `nodes[0]`.
    pub params: Vec<Real>,
}

fn signed_area(a: Point, b: Point, c: Point) -> Real {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds a mesh from raw nodes and counterclockwise triangles,
    /// validating orientation and conformity.
    pub fn from_parts(nodes: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Topology("mesh has no triangles".into()));
        }
        let mut used = vec![false; nodes.len()];
        let mut areas = Vec::with_capacity(triangles.len());
        let mut barycenters = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nodes.len() {
                    return Err(MeshError::Topology(format!(
                        "triangle {t} references node {v} but only {} nodes exist",
                        nodes.len()
                    )));
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::Topology(format!("triangle {t} repeats a node")));
            }
            let [a, b, c] = tri.map(|v| nodes[v]);
            let area = signed_area(a, b, c);
            if area <= 0.0 {
                return Err(MeshError::Topology(format!(
                    "triangle {t} is not counterclockwise (signed area {area:e})"
                )));
            }
            areas.push(area);
            barycenters.push([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]);
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(MeshError::Topology(format!("node {v} is not used by any triangle")));
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        // directed edges seen, to catch overlapping or flipped neighbors
        let mut directed: HashMap<[usize; 2], usize> = HashMap::new();
        let mut triangle_faces = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                if let Some(other) = directed.insert([a, b], t) {
                    return Err(MeshError::Topology(format!(
                        "edge ({a}, {b}) has the same orientation in triangles {other} and {t}"
                    )));
                }
                let key = [a.min(b), a.max(b)];
                match lookup.get(&key) {
                    Some(&f) => {
                        if faces[f].neighbor.is_some() {
                            return Err(MeshError::Topology(format!(
                                "edge ({}, {}) is shared by more than two triangles",
                                key[0], key[1]
                            )));
                        }
                        faces[f].neighbor = Some(t);
                        local[i] = f;
                    }
                    None => {
                        let pa = nodes[a];
                        let pb = nodes[b];
                        let e = [pb[0] - pa[0], pb[1] - pa[1]];
                        let length = e[0].hypot(e[1]);
                        let f = faces.len();
                        faces.push(Face {
                            nodes: key,
                            owner: t,
                            neighbor: None,
                            normal: [e[1] / length, -e[0] / length],
                            length,
                            midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                        });
                        lookup.insert(key, f);
                        local[i] = f;
                    }
                }
            }
            triangle_faces.push(local);
        }

        let mut boundary_nodes = vec![false; nodes.len()];
        for f in faces.iter().filter(|f| f.is_boundary()) {
            boundary_nodes[f.nodes[0]] = true;
            boundary_nodes[f.nodes[1]] = true;
        }

        let mesh = Self {
            nodes,
            triangles,
            faces,
            triangle_faces,
            areas,
            barycenters,
            boundary_nodes,
        };
        mesh.check_hanging_nodes()?;
        Ok(mesh)
    }

    /// A hanging node shows up as a boundary node lying strictly inside
    /// another boundary face.
    fn check_hanging_nodes(&self) -> Result<(), MeshError> {
        let bnodes: Vec<usize> = (0..self.nodes.len()).filter(|&v| self.boundary_nodes[v]).collect();
        for face in self.faces.iter().filter(|f| f.is_boundary()) {
            let a = self.nodes[face.nodes[0]];
            let b = self.nodes[face.nodes[1]];
            let tol = 1e-12 * face.length;
            for &v in &bnodes {
                if v == face.nodes[0] || v == face.nodes[1] {
                    continue;
                }
                let p = self.nodes[v];
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                if cross.abs() / face.length > tol {
                    continue;
                }
                let s = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]))
                    / (face.length * face.length);
                if s > 1e-12 && s < 1.0 - 1e-12 {
                    return Err(MeshError::Topology(format!(
                        "hanging node {v} on face ({}, {})",
                        face.nodes[0], face.nodes[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `n x n` squares on the unit square, each cut along the diagonal
    /// from its lower-left to its upper-right corner.
    pub fn structured_unit_square(n: usize) -> Self {
        assert!(n >= 1, "structured mesh needs n >= 1");
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let h = 1.0 / n as Real;
        let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([i as Real * h, j as Real * h]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = idx(i, j);
                let v10 = idx(i + 1, j);
                let v01 = idx(i, j + 1);
                let v11 = idx(i + 1, j + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::from_parts(nodes, triangles).expect("structured mesh is valid")
    }

    /// Moves interior nodes by at most `fraction` of the shortest edge
    /// (capped at 0.2) in a direction drawn from a seeded generator.
    pub fn jittered(&self, fraction: Real, seed: u64) -> Result<Self, MeshError> {
        let fraction = fraction.clamp(0.0, 0.2);
        let radius = fraction * self.min_edge_length();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = self.nodes.clone();
        for (v, p) in nodes.iter_mut().enumerate() {
            // draw for every node so the stream does not depend on flags
            let r: Real = radius * rng.random::<Real>();
            let theta: Real = std::f64::consts::TAU * rng.random::<Real>();
            if !self.boundary_nodes[v] {
                p[0] += r * theta.cos();
                p[1] += r * theta.sin();
            }
        }
        Self::from_parts(nodes, self.triangles.clone())
    }

    pub fn uniform_refine(&self) -> Self {
        refine::red_refine(self)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn triangle_faces(&self, t: usize) -> [usize; 3] {
        self.triangle_faces[t]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn area(&self, t: usize) -> Real {
        self.areas[t]
    }

    pub fn areas(&self) -> &[Real] {
        &self.areas
    }

    pub fn barycenter(&self, t: usize) -> Point {
        self.barycenters[t]
    }

    pub fn total_area(&self) -> Real {
        self.areas.iter().sum()
    }

    pub fn is_boundary_node(&self, v: usize) -> bool {
        self.boundary_nodes[v]
    }

    /// `+1` if `t` owns its local face `i`, `-1` otherwise.
    pub fn face_sign(&self, t: usize, local: usize) -> Real {
        if self.faces[self.triangle_faces[t][local]].owner == t {
            1.0
        } else {
            -1.0
        }
    }

    /// Outward unit normal of local face `i` of triangle `t`.
    pub fn outward_normal(&self, t: usize, local: usize) -> Point {
        let f = &self.faces[self.triangle_faces[t][local]];
        let s = self.face_sign(t, local);
        [s * f.normal[0], s * f.normal[1]]
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.nodes[v])
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> Real {
        self.triangle_faces[t]
            .iter()
            .map(|&f| self.faces[f].length)
            .fold(0.0, Real::max)
    }

    /// Mesh width: the longest edge in the mesh.
    pub fn h(&self) -> Real {
        self.faces.iter().map(|f| f.length).fold(0.0, Real::max)
    }

    pub fn min_edge_length(&self) -> Real {
        self.faces.iter().map(|f| f.length).fold(Real::INFINITY, Real::min)
    }

    /// Maps barycentric coordinates on triangle `t` to a physical point.
    pub fn map_point(&self, t: usize, bary: [Real; 3]) -> Point {
        let [a, b, c] = self.vertices(t);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [Real; 3] {
        let [a, b, c] = self.vertices(t);
        let area = self.areas[t];
        let l1 = signed_area(a, p, c) / area;
        let l2 = signed_area(a, b, p) / area;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Brute-force point location; returns the first triangle containing
    /// `p` up to a small tolerance.
    pub fn locate(&self, p: Point) -> Option<(usize, [Real; 3])> {
        (0..self.triangles.len()).find_map(|t| {
            let b = self.barycentric(t, p);
            b.iter().all(|&l| l >= -1e-12).then_some((t, b))
        })
    }

    /// Two-point Gauss rule on `face` with its global normal.
    pub fn face_flux_frame(&self, face: usize) -> FaceFrame {
        let f = &self.faces[face];
        let a = self.nodes[f.nodes[0]];
        let b = self.nodes[f.nodes[1]];
        let rule = SegmentRule::<Real>::gauss2();
        FaceFrame {
            normal: f.normal,
            points: rule
                .points
                .iter()
                .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
                .collect(),
            weights: rule.weights.iter().map(|w| w * f.length).collect(),
            params: rule.points.clone(),
        }
    }

    /// Same mesh with triangles renumbered by `perm` (new index `k` takes
    /// old triangle `perm[k]`).
    pub fn permute_triangles(&self, perm: &[usize]) -> Result<Self, MeshError> {
        let triangles = perm.iter().map(|&t| self.triangles[t]).collect();
        Self::from_parts(self.nodes.clone(), triangles)
    }

    /// The bundled unstructured sample mesh.
    pub fn sample_unstructured() -> Mesh {
        parse_mesh(SAMPLE_UNSTRUCTURED).expect("bundled mesh is valid")
    }
}
