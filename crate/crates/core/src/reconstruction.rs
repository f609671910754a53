//! Reconstruction operator mapping Bernardi-Raugel fields into H(div).
//!
//! Every local basis function is replaced by an element-local field made of
//! a vector P1 part (vertex values) and, for the identity map only, the
//! original face bubbles. BDM1 keeps the P1 hats unchanged and sends each
//! bubble to the P1 field with the same normal moments against `{1, s - 1/2}`
//! on all three faces. RT0 sends every basis function to
//! `a_T + (c_T / 2)(x - x_T)` built from its face fluxes.

use nalgebra::{Matrix6, Vector6};

use crate::autodiff::ScalarField;
use crate::error::FeError;
use crate::fespace::{BrSpace, VectorValue, LOCAL_DIM};
use crate::quadrature::SegmentRule;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReconstructionKind {
    Identity,
    Rt0,
    Bdm1,
}

impl ReconstructionKind {
    pub fn name(self) -> &'static str {
        match self {
            ReconstructionKind::Identity => "identity",
            ReconstructionKind::Rt0 => "rt0",
            ReconstructionKind::Bdm1 => "bdm1",
        }
    }
}

impl std::str::FromStr for ReconstructionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "none" => Ok(Self::Identity),
            "rt0" => Ok(Self::Rt0),
            "bdm1" => Ok(Self::Bdm1),
            _ => Err(format!("unknown reconstruction '{s}' (identity, rt0, bdm1)")),
        }
    }
}

/// Element-local vector field: P1 part given by vertex values plus
/// multiples of the element's three face bubbles `4 l_j l_k n_F`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalField {
    pub linear: [[Real; 2]; 3],
    pub bubble: [Real; 3],
}

impl LocalField {
    fn axpy(&mut self, a: Real, other: &LocalField) {
        for k in 0..3 {
            self.linear[k][0] += a * other.linear[k][0];
            self.linear[k][1] += a * other.linear[k][1];
            self.bubble[k] += a * other.bubble[k];
        }
    }
}

/// Reconstructed images of all local basis functions, per triangle.
#[derive(Clone, Debug)]
pub struct Reconstructor<'s> {
    space: &'s BrSpace<'s>,
    kind: ReconstructionKind,
    basis: Vec<[LocalField; LOCAL_DIM]>,
}

/// Minimum admissible reciprocal condition number of the BDM1 moment matrix.
pub const MIN_RCOND: Real = 1e-8;

impl<'s> Reconstructor<'s> {
    pub fn new(space: &'s BrSpace<'s>, kind: ReconstructionKind) -> Result<Self, FeError> {
        let mesh = space.mesh();
        let mut basis = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let mut local = [LocalField::default(); LOCAL_DIM];
            match kind {
                ReconstructionKind::Identity => {
                    hats_unchanged(&mut local);
                    for i in 0..3 {
                        local[6 + i].bubble[i] = 1.0;
                    }
                }
                ReconstructionKind::Bdm1 => {
                    hats_unchanged(&mut local);
                    let inv = bdm1_inverse(space, t)?;
                    for i in 0..3 {
                        let mut moments = Vector6::zeros();
                        let f = &mesh.faces()[mesh.triangle_faces(t)[i]];
                        moments[2 * i] = crate::fespace::BUBBLE_FACE_MEAN * f.length;
                        local[6 + i] = linear_from_vector(&(inv * moments));
                    }
                }
                ReconstructionKind::Rt0 => {
                    for (a, field) in local.iter_mut().enumerate() {
                        *field = rt0_of_local_basis(space, t, a);
                    }
                }
            }
            basis.push(local);
        }
        Ok(Self { space, kind, basis })
    }

    pub fn kind(&self) -> ReconstructionKind {
        self.kind
    }

    pub fn space(&self) -> &'s BrSpace<'s> {
        self.space
    }

    /// Reconstructed local basis on triangle `t`.
    pub fn local_basis(&self, t: usize) -> &[LocalField; LOCAL_DIM] {
        &self.basis[t]
    }

    /// Values of the reconstructed local basis at a barycentric point.
    pub fn eval_basis(&self, t: usize, bary: [Real; 3]) -> [VectorValue; LOCAL_DIM] {
        let raw = self.space.eval_basis(t, bary);
        self.basis[t].map(|lf| eval_local(&raw, &lf))
    }

    pub fn reconstruct(&self, coeffs: &[Real]) -> Result<ReconstructedField<'s>, FeError> {
        if coeffs.len() != self.space.ndofs() {
            return Err(FeError::DimensionMismatch {
                expected: self.space.ndofs(),
                got: coeffs.len(),
            });
        }
        let locals = (0..self.basis.len())
            .map(|t| {
                let mut lf = LocalField::default();
                for (a, c) in self.space.gather(coeffs, t).iter().enumerate() {
                    if *c != 0.0 {
                        lf.axpy(*c, &self.basis[t][a]);
                    }
                }
                lf
            })
            .collect();
        Ok(ReconstructedField { space: self.space, locals })
    }
}

/// `Pi v` stored element by element.
#[derive(Clone, Debug)]
pub struct ReconstructedField<'s> {
    space: &'s BrSpace<'s>,
    pub locals: Vec<LocalField>,
}

impl ReconstructedField<'_> {
    pub fn eval(&self, t: usize, bary: [Real; 3]) -> VectorValue {
        eval_local(&self.space.eval_basis(t, bary), &self.locals[t])
    }

    /// Mean divergence over triangle `t`.
    pub fn mean_divergence(&self, t: usize) -> Real {
        let rule = self.space.rule();
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(b, w)| w * self.eval(t, *b).divergence())
            .sum()
    }
}

fn eval_local(raw: &[VectorValue; LOCAL_DIM], lf: &LocalField) -> VectorValue {
    let mut out = VectorValue::default();
    let mut add = |a: Real, v: &VectorValue| {
        if a != 0.0 {
            for c in 0..2 {
                out.value[c] += a * v.value[c];
                for d in 0..2 {
                    out.grad[c][d] += a * v.grad[c][d];
                }
            }
        }
    };
    for k in 0..3 {
        add(lf.linear[k][0], &raw[2 * k]);
        add(lf.linear[k][1], &raw[2 * k + 1]);
    }
    for k in 0..3 {
        add(lf.bubble[k], &raw[6 + k]);
    }
    out
}

fn hats_unchanged(local: &mut [LocalField; LOCAL_DIM]) {
    for k in 0..3 {
        for c in 0..2 {
            local[2 * k + c].linear[k][c] = 1.0;
        }
    }
}

/// Coefficient vector ordering `2k + c` (vertex `k`, component `c`).
fn linear_from_vector(x: &Vector6<Real>) -> LocalField {
    let mut lf = LocalField::default();
    for k in 0..3 {
        lf.linear[k] = [x[2 * k], x[2 * k + 1]];
    }
    lf
}

/// Local vertices of face `i` ordered by the global face orientation,
/// i.e. `(local index of nodes[0], local index of nodes[1])`.
fn face_endpoints(space: &BrSpace, t: usize, i: usize) -> (usize, usize) {
    let mesh = space.mesh();
    let f = &mesh.faces()[mesh.triangle_faces(t)[i]];
    let tri = mesh.triangles()[t];
    let j = (i + 1) % 3;
    let k = (i + 2) % 3;
    if tri[j] == f.nodes[0] {
        (j, k)
    } else {
        (k, j)
    }
}

/// Inverse of the map from vector-P1 coefficients to the six normal moments
/// `int_F v.n_F q ds`, `q in {1, s - 1/2}` (rows `2i`, `2i + 1` for face `i`).
fn bdm1_inverse(space: &BrSpace, t: usize) -> Result<Matrix6<Real>, FeError> {
    let mesh = space.mesh();
    let rule = SegmentRule::<Real>::gauss2();
    let mut a = Matrix6::<Real>::zeros();
    for i in 0..3 {
        let f = &mesh.faces()[mesh.triangle_faces(t)[i]];
        let (ja, jb) = face_endpoints(space, t, i);
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let mut bary = [0.0; 3];
            bary[ja] = 1.0 - s;
            bary[jb] = s;
            for (m, q) in [1.0, s - 0.5].into_iter().enumerate() {
                for k in 0..3 {
                    for c in 0..2 {
                        a[(2 * i + m, 2 * k + c)] += w * f.length * q * bary[k] * f.normal[c];
                    }
                }
            }
        }
    }
    let inv = a.try_inverse().ok_or(FeError::IllConditioned { triangle: t, rcond: 0.0 })?;
    let rcond = 1.0 / (norm1(&a) * norm1(&inv));
    if !(rcond > MIN_RCOND) {
        return Err(FeError::IllConditioned { triangle: t, rcond });
    }
    Ok(inv)
}

fn norm1(m: &Matrix6<Real>) -> Real {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<Real>())
        .fold(0.0, Real::max)
}

/// RT0 image of local basis function `a` from its outward face fluxes.
fn rt0_of_local_basis(space: &BrSpace, t: usize, a: usize) -> LocalField {
    let mesh = space.mesh();
    let area = mesh.area(t);
    let xt = mesh.barycenter(t);
    let mut flux = [0.0; 3];
    for (i, fl) in flux.iter_mut().enumerate() {
        let f = &mesh.faces()[mesh.triangle_faces(t)[i]];
        let sign = mesh.face_sign(t, i);
        *fl = if a >= 6 {
            if a - 6 == i {
                sign * crate::fespace::BUBBLE_FACE_MEAN * f.length
            } else {
                0.0
            }
        } else {
            let (k, c) = (a / 2, a % 2);
            if k == i {
                0.0
            } else {
                sign * 0.5 * f.length * f.normal[c]
            }
        };
    }
    let div = flux.iter().sum::<Real>() / area;
    let mut mean = [0.0; 2];
    for (i, fl) in flux.iter().enumerate() {
        let xf = mesh.faces()[mesh.triangle_faces(t)[i]].midpoint;
        mean[0] += fl * (xf[0] - xt[0]) / area;
        mean[1] += fl * (xf[1] - xt[1]) / area;
    }
    let mut lf = LocalField::default();
    for (k, p) in mesh.vertices(t).iter().enumerate() {
        lf.linear[k] = [
            mean[0] + 0.5 * div * (p[0] - xt[0]),
            mean[1] + 0.5 * div * (p[1] - xt[1]),
        ];
    }
    lf
}

/// `max_T |div(Pi v)|_T - pi_0(div v)|_T|`.
pub fn divergence_identity_check(recon: &Reconstructor, coeffs: &[Real]) -> Result<Real, FeError> {
    let field = recon.reconstruct(coeffs)?;
    let div_h = recon.space().discrete_divergence(coeffs);
    Ok(div_h
        .iter()
        .enumerate()
        .map(|(t, d)| (field.mean_divergence(t) - d).abs())
        .fold(0.0, Real::max))
}

/// `int grad(phi) . Pi v dx`; vanishes for discretely divergence-free `v`.
pub fn gradient_orthogonality_check(
    recon: &Reconstructor,
    coeffs: &[Real],
    phi: &impl ScalarField,
) -> Result<Real, FeError> {
    let field = recon.reconstruct(coeffs)?;
    let mesh = recon.space().mesh();
    let rule = recon.space().rule();
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let g = phi.gradient(mesh.map_point(t, *b));
            let v = field.eval(t, *b).value;
            total += w * area * (g[0] * v[0] + g[1] * v[1]);
        }
    }
    Ok(total)
}

/// Largest elementwise ratio `||v - Pi v||_{L2(T)} / (h_T ||grad v||_{L2(T)})`
/// over triangles where `grad v` does not vanish.
pub fn approximation_ratio(recon: &Reconstructor, coeffs: &[Real]) -> Result<Real, FeError> {
    let field = recon.reconstruct(coeffs)?;
    let space = recon.space();
    let mesh = space.mesh();
    let rule = space.rule();
    let mut worst: Real = 0.0;
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        let (mut diff, mut grad) = (0.0, 0.0);
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let v = space.eval(coeffs, t, *b);
            let pv = field.eval(t, *b);
            diff += w * area * ((v.value[0] - pv.value[0]).powi(2) + (v.value[1] - pv.value[1]).powi(2));
            grad += w * area * v.grad.iter().flatten().map(|g| g * g).sum::<Real>();
        }
        if grad > 1e-28 {
            worst = worst.max(diff.sqrt() / (mesh.diameter(t) * grad.sqrt()));
        }
    }
    Ok(worst)
}
