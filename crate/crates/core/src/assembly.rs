//! Assembly of the discrete operators.
//!
//! The upwind matrix is stored in operator form: `(A rho)_K` is the total
//! upwinded mass flux `sum_F rho_upw u_{K,F}` out of triangle `K`, so the
//! density step reads `(M + tau A) rho = M rho_prev` with `M = diag(|T|)`.
//! Its columns sum to zero (mass conservation) and `A 1 = M pi_0 div u`.

use crate::error::FeError;
use crate::fespace::{BrSpace, LOCAL_DIM};
use crate::mesh::Mesh;
use crate::problems::Forcing;
use crate::quadrature::TriangleRule;
use crate::reconstruction::{ReconstructionKind, Reconstructor};
use crate::sparse::SparseMatrix;
use crate::Real;

fn scatter(
    entries: &mut Vec<(usize, usize, Real)>,
    dofs: &[Option<usize>; LOCAL_DIM],
    local: &[[Real; LOCAL_DIM]; LOCAL_DIM],
) {
    for (a, ra) in dofs.iter().enumerate() {
        let Some(r) = ra else { continue };
        for (b, cb) in dofs.iter().enumerate() {
            let Some(c) = cb else { continue };
            if local[a][b] != 0.0 {
                entries.push((*r, *c, local[a][b]));
            }
        }
    }
}

/// `2 mu int eps(u) : eps(v)`.
pub fn assemble_a1(space: &BrSpace, mu: Real) -> SparseMatrix {
    let mesh = space.mesh();
    let rule = space.rule();
    let mut entries = Vec::with_capacity(mesh.num_triangles() * 81);
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        let mut local = [[0.0; LOCAL_DIM]; LOCAL_DIM];
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let strains = space.eval_basis(t, *bary).map(|v| v.strain());
            for a in 0..LOCAL_DIM {
                for b in 0..LOCAL_DIM {
                    let mut s = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            s += strains[a][i][j] * strains[b][i][j];
                        }
                    }
                    local[a][b] += 2.0 * mu * w * area * s;
                }
            }
        }
        scatter(&mut entries, space.local_dofs(t), &local);
    }
    SparseMatrix::from_triplets(space.ndofs(), space.ndofs(), &entries)
}

/// Mean divergence of each local basis function on triangle `t`.
pub fn local_mean_divergence(space: &BrSpace, t: usize) -> [Real; LOCAL_DIM] {
    let rule = space.rule();
    let mut d = [0.0; LOCAL_DIM];
    for (bary, w) in rule.points.iter().zip(&rule.weights) {
        for (a, v) in space.eval_basis(t, *bary).iter().enumerate() {
            d[a] += w * v.divergence();
        }
    }
    d
}

/// `lambda (div_h u, div_h v)` for reconstructing kinds, `lambda (div u, div v)`
/// for the identity.
pub fn assemble_a2(space: &BrSpace, kind: ReconstructionKind, lambda: Real) -> SparseMatrix {
    let mesh = space.mesh();
    let rule = space.rule();
    let mut entries = Vec::with_capacity(mesh.num_triangles() * 81);
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        let mut local = [[0.0; LOCAL_DIM]; LOCAL_DIM];
        if kind == ReconstructionKind::Identity {
            for (bary, w) in rule.points.iter().zip(&rule.weights) {
                let div = space.eval_basis(t, *bary).map(|v| v.divergence());
                for a in 0..LOCAL_DIM {
                    for b in 0..LOCAL_DIM {
                        local[a][b] += lambda * w * area * div[a] * div[b];
                    }
                }
            }
        } else {
            let d = local_mean_divergence(space, t);
            for a in 0..LOCAL_DIM {
                for b in 0..LOCAL_DIM {
                    local[a][b] = lambda * area * d[a] * d[b];
                }
            }
        }
        scatter(&mut entries, space.local_dofs(t), &local);
    }
    SparseMatrix::from_triplets(space.ndofs(), space.ndofs(), &entries)
}

/// Pressure coupling: row `T`, column `i` holds `-int_T div(phi_i)`.
pub fn assemble_b(space: &BrSpace) -> SparseMatrix {
    let mesh = space.mesh();
    let mut entries = Vec::new();
    for t in 0..mesh.num_triangles() {
        let d = local_mean_divergence(space, t);
        for (a, dof) in space.local_dofs(t).iter().enumerate() {
            if let Some(i) = dof {
                if d[a] != 0.0 {
                    entries.push((t, *i, -mesh.area(t) * d[a]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(mesh.num_triangles(), space.ndofs(), &entries)
}

/// Diagonal P0 mass matrix.
pub fn assemble_p0_mass(mesh: &Mesh) -> SparseMatrix {
    SparseMatrix::diagonal_from(mesh.areas())
}

/// Precomputed right-hand side pieces: `int f . Pi phi_i` globally and
/// `int g . Pi phi_a` per triangle, so that `G(rho, Pi v)` for a P0
/// density is a weighted sum of the latter.
#[derive(Clone, Debug)]
pub struct LoadVectors {
    pub f: Vec<Real>,
    pub g_local: Vec<[Real; LOCAL_DIM]>,
    dofs: Vec<[Option<usize>; LOCAL_DIM]>,
}

impl LoadVectors {
    pub fn new(recon: &Reconstructor, forcing: &dyn Forcing, rule: &TriangleRule<Real>) -> Self {
        let space = recon.space();
        let mesh = space.mesh();
        let mut f = vec![0.0; space.ndofs()];
        let mut g_local = Vec::with_capacity(mesh.num_triangles());
        let mut dofs = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let area = mesh.area(t);
            let mut fl = [0.0; LOCAL_DIM];
            let mut gl = [0.0; LOCAL_DIM];
            for (bary, w) in rule.points.iter().zip(&rule.weights) {
                let x = mesh.map_point(t, *bary);
                let fv = forcing.f(x);
                let gv = forcing.g(x);
                for (a, phi) in recon.eval_basis(t, *bary).iter().enumerate() {
                    let v = phi.value;
                    fl[a] += w * area * (fv[0] * v[0] + fv[1] * v[1]);
                    gl[a] += w * area * (gv[0] * v[0] + gv[1] * v[1]);
                }
            }
            let local = *space.local_dofs(t);
            for (a, dof) in local.iter().enumerate() {
                if let Some(i) = dof {
                    f[*i] += fl[a];
                }
            }
            g_local.push(gl);
            dofs.push(local);
        }
        Self { f, g_local, dofs }
    }

    /// `F(Pi phi_i) + G(rho, Pi phi_i)`.
    pub fn rhs(&self, rho: &[Real]) -> Result<Vec<Real>, FeError> {
        if rho.len() != self.g_local.len() {
            return Err(FeError::DimensionMismatch {
                expected: self.g_local.len(),
                got: rho.len(),
            });
        }
        let mut out = self.f.clone();
        for (t, gl) in self.g_local.iter().enumerate() {
            if rho[t] == 0.0 {
                continue;
            }
            for (a, dof) in self.dofs[t].iter().enumerate() {
                if let Some(i) = dof {
                    out[*i] += rho[t] * gl[a];
                }
            }
        }
        Ok(out)
    }
}

/// One-shot right-hand side with the default degree-5 rule.
pub fn assemble_rhs(recon: &Reconstructor, forcing: &dyn Forcing, rho: &[Real]) -> Result<Vec<Real>, FeError> {
    LoadVectors::new(recon, forcing, recon.space().rule()).rhs(rho)
}

/// Upwind finite-volume operator for a fixed velocity.
#[derive(Clone, Debug)]
pub struct UpwindMatrix {
    pub matrix: SparseMatrix,
    /// `int_F u_h . n_F` per face, global normal (outward from the owner).
    pub fluxes: Vec<Real>,
}

impl UpwindMatrix {
    /// `(A rho)_K`: net upwinded outflow of `rho u` from each triangle.
    pub fn apply(&self, rho: &[Real]) -> Vec<Real> {
        self.matrix.matvec(rho)
    }

    /// Elementwise upwind divergence `div_upw(rho u)|_K = (A rho)_K / |K|`.
    pub fn upwind_divergence(&self, mesh: &Mesh, rho: &[Real]) -> Vec<Real> {
        self.apply(rho).iter().zip(mesh.areas()).map(|(v, a)| v / a).collect()
    }
}

pub fn assemble_upwind(space: &BrSpace, u: &[Real]) -> UpwindMatrix {
    let mesh = space.mesh();
    let fluxes: Vec<Real> = (0..mesh.num_faces()).map(|f| space.face_flux(u, f)).collect();
    UpwindMatrix {
        matrix: upwind_from_fluxes(mesh, &fluxes),
        fluxes,
    }
}

/// Operator form of the upwind scheme from given face fluxes.
pub fn upwind_from_fluxes(mesh: &Mesh, fluxes: &[Real]) -> SparseMatrix {
    let nt = mesh.num_triangles();
    let mut entries = Vec::with_capacity(2 * mesh.num_faces());
    for (f, face) in mesh.faces().iter().enumerate() {
        let Some(l) = face.neighbor else { continue };
        let k = face.owner;
        let flux = fluxes[f];
        if flux > 0.0 {
            entries.push((k, k, flux));
            entries.push((l, k, -flux));
        } else if flux < 0.0 {
            entries.push((l, l, -flux));
            entries.push((k, l, flux));
        }
    }
    // explicit zero diagonal keeps the pattern of M + tau A fixed
    entries.extend((0..nt).map(|t| (t, t, 0.0)));
    SparseMatrix::from_triplets(nt, nt, &entries)
}

/// Convex potential used by the entropy identity of the upwind scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Potential {
    /// `phi(s) = s^2`.
    Quadratic,
    /// `phi(s) = s ln s`.
    Entropy,
}

impl Potential {
    pub fn value(self, s: Real) -> Real {
        match self {
            Potential::Quadratic => s * s,
            Potential::Entropy => s * s.ln(),
        }
    }

    pub fn derivative(self, s: Real) -> Real {
        match self {
            Potential::Quadratic => 2.0 * s,
            Potential::Entropy => s.ln() + 1.0,
        }
    }

    pub fn second_derivative(self, s: Real) -> Real {
        match self {
            Potential::Quadratic => 2.0,
            Potential::Entropy => 1.0 / s,
        }
    }

    /// Intermediate value `s` with
    /// `phi(y) - phi(x) - phi'(x)(y - x) = phi''(s)(y - x)^2 / 2`.
    pub fn mean_value(self, x: Real, y: Real) -> Real {
        if x == y {
            return x;
        }
        match self {
            Potential::Quadratic => 0.5 * (x + y),
            Potential::Entropy => {
                // r = y ln(y/x) + x - y = x ((1+t) ln(1+t) - t), t = (y - x)/x
                let t = (y - x) / x;
                let g = if t.abs() < 0.1 {
                    let mut sum = 0.0;
                    let mut pow = t * t;
                    for n in 2..40 {
                        let term = pow / (n * (n - 1)) as Real;
                        sum += if n % 2 == 0 { term } else { -term };
                        pow *= t;
                    }
                    sum
                } else {
                    (1.0 + t) * t.ln_1p() - t
                };
                (x - y) * (x - y) / (2.0 * x * g)
            }
        }
    }
}

/// Both sides of
/// `sum_K phi'(rho_K) (A rho)_K - sum_K (rho phi' - phi)(rho_K) (A 1)_K
///  = 1/2 sum_F phi''(rho_KL) |u_F| (rho_K - rho_L)^2`.
pub fn convexity_jump_diagnostic(
    mesh: &Mesh,
    upwind: &UpwindMatrix,
    rho: &[Real],
    phi: Potential,
) -> Result<(Real, Real), FeError> {
    if phi == Potential::Entropy {
        if let Some((t, &v)) = rho.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(FeError::NonPositiveDensity { triangle: t, value: v });
        }
    }
    let a_rho = upwind.apply(rho);
    let a_one = upwind.apply(&vec![1.0; rho.len()]);
    let mut lhs = 0.0;
    for t in 0..rho.len() {
        let r = rho[t];
        let dphi = phi.derivative(r);
        lhs += dphi * a_rho[t] - (r * dphi - phi.value(r)) * a_one[t];
    }
    let mut rhs = 0.0;
    for (f, face) in mesh.faces().iter().enumerate() {
        let Some(l) = face.neighbor else { continue };
        let flux = upwind.fluxes[f];
        if flux == 0.0 {
            continue;
        }
        let (up, down) = if flux > 0.0 { (face.owner, l) } else { (l, face.owner) };
        let jump = rho[up] - rho[down];
        let s = phi.mean_value(rho[down], rho[up]);
        rhs += 0.5 * phi.second_derivative(s) * flux.abs() * jump * jump;
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Polynomial2;
    use crate::problems::GradientForcing;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64, lo: Real, hi: Real) -> Vec<Real> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    }

    fn dense(a: &SparseMatrix) -> DMatrix<Real> {
        DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a.get(r, c))
    }

    #[test]
    fn a1_symmetric_and_coercive() {
        let m = Mesh::structured_unit_square(4).jittered(0.2, 1).unwrap();
        let s = BrSpace::new(&m);
        let a = assemble_a1(&s, 1.3);
        assert!(a.asymmetry() < 1e-13);
        let eig = dense(&a).symmetric_eigenvalues();
        assert!(eig.min() > 0.0);
    }

    #[test]
    fn a1_hat_entries_match_hand_computation() {
        // n=2 mesh: the single interior node (0.5, 0.5) has six incident triangles;
        // for the x-hat, sum over T of 2 mu |T| (ux^2 + uy^2 / 2) with grad lambda.
        let m = Mesh::structured_unit_square(2);
        let s = BrSpace::new(&m);
        let a = assemble_a1(&s, 1.0);
        let centre = m.nodes().iter().position(|p| *p == [0.5, 0.5]).unwrap();
        let d = s.node_dof(centre).unwrap();
        let mut expect = 0.0;
        let mut cross = 0.0;
        for t in 0..m.num_triangles() {
            if let Some(k) = m.triangles()[t].iter().position(|&v| v == centre) {
                let g = s.geometry(t).grads[k];
                expect += 2.0 * m.area(t) * (g[0] * g[0] + 0.5 * g[1] * g[1]);
                cross += 2.0 * m.area(t) * 0.5 * g[0] * g[1];
            }
        }
        assert!((a.get(d, d) - expect).abs() < 1e-13);
        assert!((a.get(d, d + 1) - cross).abs() < 1e-13);
        // closed form on the structured mesh
        assert!((expect - 6.0).abs() < 1e-13, "{expect}");
    }

    #[test]
    fn a2_vanishes_for_zero_lambda_and_divergence_free_fields() {
        let m = Mesh::structured_unit_square(4).jittered(0.1, 3).unwrap();
        let s = BrSpace::new(&m);
        assert_eq!(assemble_a2(&s, ReconstructionKind::Bdm1, 0.0).nnz(), 0);
        let v = s.correct_divergence(&random(s.ndofs(), 2, -1.0, 1.0));
        let a2 = assemble_a2(&s, ReconstructionKind::Bdm1, 2.0);
        assert!(a2.matvec(&v).iter().all(|x| x.abs() < 1e-11));
        assert!(a2.asymmetry() < 1e-13);
        let full = assemble_a2(&s, ReconstructionKind::Identity, 2.0);
        assert!(full.matvec(&v).iter().any(|x| x.abs() > 1e-6));
    }

    #[test]
    fn a2_single_element_matches_mean_divergence_product() {
        let m = Mesh::structured_unit_square(2);
        let s = BrSpace::new(&m);
        let u = random(s.ndofs(), 4, -1.0, 1.0);
        let v = random(s.ndofs(), 5, -1.0, 1.0);
        let du = s.discrete_divergence(&u);
        let dv = s.discrete_divergence(&v);
        let expect: Real = (0..m.num_triangles()).map(|t| 0.7 * m.area(t) * du[t] * dv[t]).sum();
        let a2 = assemble_a2(&s, ReconstructionKind::Rt0, 0.7);
        let got: Real = v.iter().zip(a2.matvec(&u)).map(|(a, b)| a * b).sum();
        assert!((got - expect).abs() < 1e-13);
    }

    #[test]
    fn b_annihilates_constants_and_encodes_divergence() {
        let m = Mesh::structured_unit_square(5).jittered(0.2, 6).unwrap();
        let s = BrSpace::new(&m);
        let b = assemble_b(&s);
        let ones = vec![1.0; m.num_triangles()];
        assert!(b.matvec_transpose(&ones).iter().all(|x| x.abs() < 1e-14));
        let u = random(s.ndofs(), 7, -1.0, 1.0);
        let div = s.discrete_divergence(&u);
        for (t, bu) in b.matvec(&u).iter().enumerate() {
            assert!((bu + m.area(t) * div[t]).abs() < 1e-13);
        }
    }

    #[test]
    fn b_entry_of_single_bubble() {
        let m = Mesh::structured_unit_square(1);
        let s = BrSpace::new(&m);
        let b = assemble_b(&s);
        let flux = 2.0 * 2f64.sqrt() / 3.0;
        let f = m.faces().iter().find(|f| !f.is_boundary()).unwrap();
        assert!((b.get(f.owner, 0) + flux).abs() < 1e-15);
        assert!((b.get(f.neighbor.unwrap(), 0) - flux).abs() < 1e-15);
    }

    #[test]
    fn mass_matrix() {
        let m = Mesh::structured_unit_square(1);
        assert_eq!(assemble_p0_mass(&m).diagonal(), vec![0.5, 0.5]);
        let r = Mesh::structured_unit_square(3).jittered(0.2, 2).unwrap();
        let fine = r.uniform_refine();
        let mf = assemble_p0_mass(&fine).diagonal();
        let total: Real = mf.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_loads_are_orthogonal_to_divergence_free_fields() {
        let m = Mesh::structured_unit_square(6).jittered(0.2, 8).unwrap();
        let s = BrSpace::new(&m);
        let q = Polynomial2::new(vec![(1.0, 3, 1), (0.5, 2, 2), (-1.0, 0, 4)]);
        let forcing = GradientForcing(q);
        let r = Reconstructor::new(&s, ReconstructionKind::Bdm1).unwrap();
        let rhs = assemble_rhs(&r, &forcing, &vec![0.0; m.num_triangles()]).unwrap();
        for seed in 0..5 {
            let v = s.correct_divergence(&random(s.ndofs(), seed, -1.0, 1.0));
            let dot: Real = v.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-12, "{dot}");
        }
    }

    #[test]
    fn constant_load_matches_rt0_mean_formula() {
        // int (0,1) . Pi phi_i = sum_T |T| a_T(phi_i)_y for RT0
        let m = Mesh::structured_unit_square(3).jittered(0.2, 9).unwrap();
        let s = BrSpace::new(&m);
        let r = Reconstructor::new(&s, ReconstructionKind::Rt0).unwrap();
        let forcing = crate::problems::FnForcing { f: |_| [0.0, 1.0], g: |_| [0.0, 0.0] };
        let rhs = assemble_rhs(&r, &forcing, &vec![1.0; m.num_triangles()]).unwrap();
        let mut expect = vec![0.0; s.ndofs()];
        for t in 0..m.num_triangles() {
            for (a, dof) in s.local_dofs(t).iter().enumerate() {
                let Some(i) = dof else { continue };
                let lf = r.local_basis(t)[a];
                let mean_y = (lf.linear[0][1] + lf.linear[1][1] + lf.linear[2][1]) / 3.0;
                expect[*i] += m.area(t) * mean_y;
            }
        }
        for (x, y) in rhs.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-14);
        }
        // BDM1 and RT0 agree on hat DoFs for constant forcing
        let rb = Reconstructor::new(&s, ReconstructionKind::Bdm1).unwrap();
        let rhs_b = assemble_rhs(&rb, &forcing, &vec![1.0; m.num_triangles()]).unwrap();
        for v in 0..m.num_nodes() {
            if let Some(d) = s.node_dof(v) {
                assert!((rhs[d] - rhs_b[d]).abs() < 1e-14);
                assert!((rhs[d + 1] - rhs_b[d + 1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_forcing_gives_zero_rhs() {
        let m = Mesh::structured_unit_square(2);
        let s = BrSpace::new(&m);
        let r = Reconstructor::new(&s, ReconstructionKind::Bdm1).unwrap();
        let zero = crate::problems::FnForcing { f: |_| [0.0, 0.0], g: |_| [0.0, 0.0] };
        assert!(assemble_rhs(&r, &zero, &[1.0; 8]).unwrap().iter().all(|v| *v == 0.0));
        assert!(assemble_rhs(&r, &zero, &[1.0; 3]).is_err());
    }

    #[test]
    fn upwind_properties_on_random_fields() {
        let m = Mesh::structured_unit_square(8).jittered(0.2, 4).unwrap();
        let s = BrSpace::new(&m);
        let u = random(s.ndofs(), 3, -1.0, 1.0);
        let up = assemble_upwind(&s, &u);
        assert!(up.matrix.col_sums().iter().all(|v| v.abs() < 1e-12));
        assert!(up.matrix.diagonal().iter().all(|&d| d >= 0.0));
        for (r, c, v) in up.matrix.triplets() {
            if r != c {
                assert!(v <= 0.0);
            }
        }
        let div = s.discrete_divergence(&u);
        let d1 = up.upwind_divergence(&m, &vec![1.0; m.num_triangles()]);
        for (a, b) in d1.iter().zip(&div) {
            assert!((a - b).abs() < 1e-11);
        }
        let zero = assemble_upwind(&s, &vec![0.0; s.ndofs()]);
        assert!(zero.matrix.triplets().all(|(_, _, v)| v == 0.0));
    }

    #[test]
    fn two_triangle_upwind_matrix() {
        let m = Mesh::structured_unit_square(1);
        let f = m.faces().iter().position(|f| !f.is_boundary()).unwrap();
        let mut fluxes = vec![0.0; m.num_faces()];
        fluxes[f] = 1.0;
        let a = upwind_from_fluxes(&m, &fluxes);
        let (k, l) = (m.faces()[f].owner, m.faces()[f].neighbor.unwrap());
        assert_eq!(a.get(k, k), 1.0);
        assert_eq!(a.get(l, k), -1.0);
        assert_eq!(a.get(k, l), 0.0);
        assert_eq!(a.get(l, l), 0.0);
    }

    #[test]
    fn convexity_identity() {
        let m = Mesh::structured_unit_square(2);
        let s = BrSpace::new(&m);
        for seed in 0..5 {
            let u = random(s.ndofs(), seed, -1.0, 1.0);
            let rho = random(m.num_triangles(), seed + 100, 0.1, 2.0);
            let up = assemble_upwind(&s, &u);
            let (l, r) = convexity_jump_diagnostic(&m, &up, &rho, Potential::Quadratic).unwrap();
            assert!((l - r).abs() < 1e-12 * r.abs().max(1.0) && r >= 0.0);
            let (l, r) = convexity_jump_diagnostic(&m, &up, &rho, Potential::Entropy).unwrap();
            assert!((l - r).abs() < 1e-10 * r.abs().max(1.0) && r >= 0.0, "{l} {r}");
        }
        let up = assemble_upwind(&s, &random(s.ndofs(), 9, -1.0, 1.0));
        let (l, r) = convexity_jump_diagnostic(&m, &up, &[0.7; 8], Potential::Entropy).unwrap();
        assert!(l.abs() < 1e-14 && r == 0.0);
        let mut bad = vec![1.0; 8];
        bad[3] = 0.0;
        assert!(convexity_jump_diagnostic(&m, &up, &bad, Potential::Entropy).is_err());
    }

    #[test]
    fn entropy_mean_value_lies_between_arguments() {
        for (x, y) in [(0.5, 2.0), (3.0, 0.1), (1.0, 1.0 + 1e-6)] {
            let s = Potential::Entropy.mean_value(x, y);
            assert!(s > x.min(y) && s < x.max(y), "{s}");
        }
    }
}
