//! Bernardi-Raugel velocity space and piecewise-constant scalar space.
//!
//! Velocity DoFs: two per interior node (vector P1 hats), then one per
//! interior face (bubble `b_F n_F` with `b_F = 4 l_i l_j`, equal to one at
//! the face midpoint, and `n_F` the global face normal). Boundary nodes and
//! faces carry no DoFs, which builds in the homogeneous Dirichlet condition.
//!
//! Local numbering on a triangle: `2k + c` is the hat of local vertex `k`
//! in component `c`; `6 + i` is the bubble of local face `i` (opposite
//! vertex `i`).

use crate::error::FeError;
use crate::mesh::Mesh;
use crate::quadrature::{SegmentRule, TriangleRule};
use crate::{Point, Real};

pub const LOCAL_DIM: usize = 9;

/// Integral of `b_F` over its face, divided by the face length.
pub const BUBBLE_FACE_MEAN: Real = 2.0 / 3.0;

#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    /// Gradients of the barycentric coordinates.
    pub grads: [Point; 3],
    pub area: Real,
}

/// Value and Jacobian (`grad[c][d] = d v_c / d x_d`) of a vector field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VectorValue {
    pub value: [Real; 2],
    pub grad: [[Real; 2]; 2],
}

impl VectorValue {
    pub fn divergence(&self) -> Real {
        self.grad[0][0] + self.grad[1][1]
    }

    /// Symmetric gradient.
    pub fn strain(&self) -> [[Real; 2]; 2] {
        let off = 0.5 * (self.grad[0][1] + self.grad[1][0]);
        [[self.grad[0][0], off], [off, self.grad[1][1]]]
    }

    fn axpy(&mut self, a: Real, other: &VectorValue) {
        for c in 0..2 {
            self.value[c] += a * other.value[c];
            for d in 0..2 {
                self.grad[c][d] += a * other.grad[c][d];
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct BrSpace<'m> {
    mesh: &'m Mesh,
    node_dof: Vec<Option<usize>>,
    face_dof: Vec<Option<usize>>,
    ndofs: usize,
    local: Vec<[Option<usize>; LOCAL_DIM]>,
    geometry: Vec<ElementGeometry>,
    rule: TriangleRule<Real>,
}

impl<'m> BrSpace<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        let mut next = 0;
        let node_dof: Vec<Option<usize>> = (0..mesh.num_nodes())
            .map(|v| {
                (!mesh.is_boundary_node(v)).then(|| {
                    next += 2;
                    next - 2
                })
            })
            .collect();
        let face_dof: Vec<Option<usize>> = mesh
            .faces()
            .iter()
            .map(|f| {
                (!f.is_boundary()).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();

        let mut local = Vec::with_capacity(mesh.num_triangles());
        let mut geometry = Vec::with_capacity(mesh.num_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut dofs = [None; LOCAL_DIM];
            for k in 0..3 {
                if let Some(d) = node_dof[tri[k]] {
                    dofs[2 * k] = Some(d);
                    dofs[2 * k + 1] = Some(d + 1);
                }
            }
            for (i, &f) in mesh.triangle_faces(t).iter().enumerate() {
                dofs[6 + i] = face_dof[f];
            }
            local.push(dofs);

            let p = mesh.vertices(t);
            let area = mesh.area(t);
            let mut grads = [[0.0; 2]; 3];
            for (i, g) in grads.iter_mut().enumerate() {
                let a = p[(i + 1) % 3];
                let b = p[(i + 2) % 3];
                *g = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
            }
            geometry.push(ElementGeometry { grads, area });
        }

        Self {
            mesh,
            node_dof,
            face_dof,
            ndofs: next,
            local,
            geometry,
            rule: TriangleRule::degree5(),
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn local_dofs(&self, t: usize) -> &[Option<usize>; LOCAL_DIM] {
        &self.local[t]
    }

    pub fn geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    /// First of the two DoFs of node `v`, if it is interior.
    pub fn node_dof(&self, v: usize) -> Option<usize> {
        self.node_dof[v]
    }

    pub fn face_dof(&self, f: usize) -> Option<usize> {
        self.face_dof[f]
    }

    /// The volume rule used throughout (degree 5).
    pub fn rule(&self) -> &TriangleRule<Real> {
        &self.rule
    }

    /// Values and gradients of the nine local basis functions.
    pub fn eval_basis(&self, t: usize, bary: [Real; 3]) -> [VectorValue; LOCAL_DIM] {
        let g = &self.geometry[t].grads;
        let mut out = [VectorValue::default(); LOCAL_DIM];
        for k in 0..3 {
            for c in 0..2 {
                let v = &mut out[2 * k + c];
                v.value[c] = bary[k];
                v.grad[c] = g[k];
            }
        }
        let faces = self.mesh.triangle_faces(t);
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            let n = self.mesh.faces()[faces[i]].normal;
            let b = 4.0 * bary[j] * bary[k];
            let db = [
                4.0 * (bary[j] * g[k][0] + bary[k] * g[j][0]),
                4.0 * (bary[j] * g[k][1] + bary[k] * g[j][1]),
            ];
            let v = &mut out[6 + i];
            for c in 0..2 {
                v.value[c] = b * n[c];
                v.grad[c] = [n[c] * db[0], n[c] * db[1]];
            }
        }
        out
    }

    /// Local coefficient vector of `coeffs` on triangle `t`.
    pub fn gather(&self, coeffs: &[Real], t: usize) -> [Real; LOCAL_DIM] {
        self.local[t].map(|d| d.map_or(0.0, |d| coeffs[d]))
    }

    /// Discrete field `coeffs` evaluated on triangle `t`.
    pub fn eval(&self, coeffs: &[Real], t: usize, bary: [Real; 3]) -> VectorValue {
        let local = self.gather(coeffs, t);
        let basis = self.eval_basis(t, bary);
        let mut out = VectorValue::default();
        for (a, phi) in local.iter().zip(&basis) {
            out.axpy(*a, phi);
        }
        out
    }

    /// Velocity at mesh node `v` (zero on the boundary).
    pub fn nodal_value(&self, coeffs: &[Real], v: usize) -> [Real; 2] {
        self.node_dof[v].map_or([0.0, 0.0], |d| [coeffs[d], coeffs[d + 1]])
    }

    /// `int_F u_h . n_F ds` with the global face normal, by two-point Gauss.
    pub fn face_flux(&self, coeffs: &[Real], face: usize) -> Real {
        let f = &self.mesh.faces()[face];
        let frame = self.mesh.face_flux_frame(face);
        let ua = self.nodal_value(coeffs, f.nodes[0]);
        let ub = self.nodal_value(coeffs, f.nodes[1]);
        let beta = self.face_dof[face].map_or(0.0, |d| coeffs[d]);
        frame
            .params
            .iter()
            .zip(&frame.weights)
            .map(|(&s, &w)| {
                let u = [(1.0 - s) * ua[0] + s * ub[0], (1.0 - s) * ua[1] + s * ub[1]];
                let lin = u[0] * f.normal[0] + u[1] * f.normal[1];
                w * (lin + beta * 4.0 * s * (1.0 - s))
            })
            .sum()
    }

    /// Elementwise mean divergence `pi_0 div u_h` (the discrete divergence).
    pub fn discrete_divergence(&self, coeffs: &[Real]) -> Vec<Real> {
        (0..self.mesh.num_triangles())
            .map(|t| {
                let total: Real = (0..3)
                    .map(|i| {
                        let f = self.mesh.triangle_faces(t)[i];
                        self.mesh.face_sign(t, i) * self.face_flux(coeffs, f)
                    })
                    .sum();
                total / self.mesh.area(t)
            })
            .collect()
    }

    /// Copy of `coeffs` whose bubble coefficients on a spanning tree of the
    /// dual graph are changed so that every elementwise divergence vanishes.
    pub fn correct_divergence(&self, coeffs: &[Real]) -> Vec<Real> {
        let mesh = self.mesh;
        let nt = mesh.num_triangles();
        let mut out = coeffs.to_vec();
        let mut parent_face = vec![usize::MAX; nt];
        let mut seen = vec![false; nt];
        let mut order = Vec::with_capacity(nt);
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(t) = queue.pop_front() {
            order.push(t);
            for &f in &mesh.triangle_faces(t) {
                let face = &mesh.faces()[f];
                let Some(nb) = face.neighbor else { continue };
                let other = if face.owner == t { nb } else { face.owner };
                if !seen[other] {
                    seen[other] = true;
                    parent_face[other] = f;
                    queue.push_back(other);
                }
            }
        }
        // leaves first: each triangle fixes the bubble on the face towards its parent
        for &t in order.iter().rev().take(nt - 1) {
            let pf = parent_face[t];
            let local = mesh.triangle_faces(t).iter().position(|&f| f == pf).unwrap();
            let sign = mesh.face_sign(t, local);
            let total: Real = (0..3)
                .map(|i| mesh.face_sign(t, i) * self.face_flux(&out, mesh.triangle_faces(t)[i]))
                .sum();
            let d = self.face_dof[pf].expect("tree faces are interior");
            out[d] -= sign * total / (BUBBLE_FACE_MEAN * mesh.faces()[pf].length);
        }
        out
    }

    /// Interpolates an analytic velocity: vertex values at interior nodes,
    /// bubbles chosen so every interior face flux matches `int_F u . n`.
    pub fn interpolate(&self, u: impl Fn(Point) -> [Real; 2]) -> Result<Vec<Real>, FeError> {
        let mut coeffs = vec![0.0; self.ndofs];
        for (v, p) in self.mesh.nodes().iter().enumerate() {
            let val = u(*p);
            match self.node_dof[v] {
                Some(d) => {
                    coeffs[d] = val[0];
                    coeffs[d + 1] = val[1];
                }
                None => {
                    let magnitude = val[0].hypot(val[1]);
                    if magnitude > 1e-10 {
                        return Err(FeError::BoundaryViolation { x: p[0], y: p[1], magnitude });
                    }
                }
            }
        }
        let line = SegmentRule::<Real>::gauss_legendre(5);
        for (fi, f) in self.mesh.faces().iter().enumerate() {
            let Some(d) = self.face_dof[fi] else { continue };
            let a = self.mesh.nodes()[f.nodes[0]];
            let b = self.mesh.nodes()[f.nodes[1]];
            let exact: Real = line
                .points
                .iter()
                .zip(&line.weights)
                .map(|(&s, &w)| {
                    let val = u([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                    w * f.length * (val[0] * f.normal[0] + val[1] * f.normal[1])
                })
                .sum();
            let linear = self.face_flux(&coeffs, fi);
            coeffs[d] = (exact - linear) / (BUBBLE_FACE_MEAN * f.length);
        }
        Ok(coeffs)
    }
}

/// Piecewise constants, one value per triangle.
#[derive(Clone, Copy, Debug)]
pub struct P0Space<'m> {
    mesh: &'m Mesh,
    /// Whether the space is restricted to zero-mean functions.
    pub zero_mean: bool,
}

impl<'m> P0Space<'m> {
    pub fn new(mesh: &'m Mesh, zero_mean: bool) -> Self {
        Self { mesh, zero_mean }
    }

    pub fn dim(&self) -> usize {
        self.mesh.num_triangles()
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    /// L2 projection: the elementwise mean of `f` under the degree-5 rule.
    pub fn project(&self, f: impl Fn(Point) -> Real) -> Vec<Real> {
        pi0_project(self.mesh, f)
    }

    /// `int q dx` for coefficients `q`.
    pub fn integral(&self, q: &[Real]) -> Real {
        q.iter().zip(self.mesh.areas()).map(|(v, a)| v * a).sum()
    }
}

/// Elementwise means of `f` under the degree-5 rule.
pub fn pi0_project(mesh: &Mesh, f: impl Fn(Point) -> Real) -> Vec<Real> {
    let rule = TriangleRule::<Real>::degree5();
    (0..mesh.num_triangles())
        .map(|t| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(b, w)| w * f(mesh.map_point(t, *b)))
                .sum()
        })
        .collect()
}
