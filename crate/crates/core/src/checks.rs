//! Operator property suite: reconstruction identities, upwind matrix
//! structure, positivity of the density step, the convexity identity and
//! pressure robustness of the Stokes solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{assemble_upwind, convexity_jump_diagnostic, Potential};
use crate::autodiff::Polynomial2;
use crate::error::SolverError;
use crate::fespace::BrSpace;
use crate::mesh::Mesh;
use crate::problems::{GradientForcing, Problem};
use crate::reconstruction::{divergence_identity_check, gradient_orthogonality_check, ReconstructionKind, Reconstructor};
use crate::solver::{density_step, solve_incompressible_stokes, Discretization, RunConfig};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub value: Real,
    pub bound: Bound,
    pub tolerance: Real,
}

impl CheckItem {
    fn at_most(name: impl Into<String>, value: Real, tolerance: Real) -> Self {
        Self { name: name.into(), value, bound: Bound::AtMost, tolerance }
    }

    fn at_least(name: impl Into<String>, value: Real, tolerance: Real) -> Self {
        Self { name: name.into(), value, bound: Bound::AtLeast, tolerance }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.tolerance,
            Bound::AtLeast => self.value >= self.tolerance,
        }
    }
}

impl std::fmt::Display for CheckItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} = {:.3e} ({op} {:.0e})", self.name, self.value, self.tolerance)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(CheckItem::passed)
    }
}

/// Meshes the suite runs on: structured `n = 2, 4, 8, 16` and two jittered ones.
pub fn check_meshes() -> Vec<Mesh> {
    let mut meshes: Vec<Mesh> = [2, 4, 8, 16].into_iter().map(Mesh::structured_unit_square).collect();
    for (n, seed) in [(5, 11), (9, 23)] {
        meshes.push(Mesh::structured_unit_square(n).jittered(0.3, seed).expect("jitter below 0.5 keeps triangles valid"));
    }
    meshes
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Real> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> Vec<Real> {
    (0..n).map(|_| rng.random_range(0.05..2.0)).collect()
}

/// `|int grad(phi_h) . Pi v + int phi_h div_h v|` for the P1 function with
/// nodal values `phi`.
pub fn p1_gradient_identity(recon: &Reconstructor, coeffs: &[Real], phi: &[Real]) -> Result<Real, SolverError> {
    let space = recon.space();
    let mesh = space.mesh();
    let field = recon.reconstruct(coeffs)?;
    let div_h = space.discrete_divergence(coeffs);
    let rule = space.rule();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let geo = space.geometry(t);
        let mut grad = [0.0; 2];
        for k in 0..3 {
            grad[0] += phi[tri[k]] * geo.grads[k][0];
            grad[1] += phi[tri[k]] * geo.grads[k][1];
        }
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let v = field.eval(t, *b).value;
            lhs += w * geo.area * (grad[0] * v[0] + grad[1] * v[1]);
        }
        let mean_phi = (phi[tri[0]] + phi[tri[1]] + phi[tri[2]]) / 3.0;
        rhs -= div_h[t] * mean_phi * geo.area;
    }
    Ok((lhs - rhs).abs())
}

/// Worst violation of `1^T A = 0`, `A 1 = M pi_0 div u` (relative to the
/// flux scale) and the sign pattern of `A`.
pub fn upwind_properties(space: &BrSpace, u: &[Real]) -> [Real; 3] {
    let mesh = space.mesh();
    let upwind = assemble_upwind(space, u);
    let a = &upwind.matrix;
    let scale = upwind.fluxes.iter().fold(Real::MIN_POSITIVE, |m, f| m.max(f.abs()));
    let conservation = a.col_sums().iter().fold(0.0, |m: Real, v| m.max(v.abs())) / scale;

    // pi_0 div u from quadrature of the pointwise divergence
    let rule = space.rule();
    let a_one = a.row_sums();
    let mut consistency: Real = 0.0;
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        let integral: Real = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(b, w)| w * area * space.eval(u, t, *b).divergence())
            .sum();
        consistency = consistency.max((a_one[t] - integral).abs() / scale);
    }

    let mut sign: Real = 0.0;
    for (r, c, v) in a.triplets() {
        let bad = if r == c { (-v).max(0.0) } else { v.max(0.0) };
        sign = sign.max(bad / scale);
    }
    [conservation, consistency, sign]
}

/// Backward-Euler density step from random data: `(min rho_next, relative mass drift)`.
pub fn density_step_trial(rng: &mut ChaCha8Rng, mesh: &Mesh) -> Result<(Real, Real), SolverError> {
    let space = BrSpace::new(mesh);
    let u: Vec<Real> = random_vec(rng, space.ndofs()).iter().map(|v| 10.0 * v).collect();
    let mut rho = random_density(rng, mesh.num_triangles());
    // some empty cells to probe positivity at zero
    for r in rho.iter_mut() {
        if rng.random_bool(0.2) {
            *r = 0.0;
        }
    }
    let tau = 10f64.powf(rng.random_range(-4.0..1.0));
    let upwind = assemble_upwind(&space, &u);
    let next = density_step(mesh.areas(), &upwind.matrix, &rho, tau)?;
    let mass = |r: &[Real]| r.iter().zip(mesh.areas()).map(|(a, b)| a * b).sum::<Real>();
    let (m0, m1) = (mass(&rho), mass(&next));
    let min = next.iter().copied().fold(Real::INFINITY, Real::min);
    Ok((min, (m1 - m0).abs() / m0.abs().max(Real::MIN_POSITIVE)))
}

/// `(|lhs - rhs| / max(|rhs|, tiny), min(lhs, rhs))`.
pub fn convexity_trial(rng: &mut ChaCha8Rng, mesh: &Mesh, phi: Potential) -> Result<(Real, Real), SolverError> {
    let space = BrSpace::new(mesh);
    let u = random_vec(rng, space.ndofs());
    let rho = random_density(rng, mesh.num_triangles());
    let upwind = assemble_upwind(&space, &u);
    let (lhs, rhs) = convexity_jump_diagnostic(mesh, &upwind, &rho, phi)?;
    Ok(((lhs - rhs).abs() / rhs.abs().max(1e-300), lhs.min(rhs)))
}

/// `||grad u_0||` of the Stokes solve with `f = grad(x^3 y - mean)`, `g = 0`.
pub fn gradient_forcing_velocity(mesh: &Mesh, kind: ReconstructionKind) -> Result<Real, SolverError> {
    let space = BrSpace::new(mesh);
    let q = Polynomial2::new(vec![(1.0, 3, 1)]).zero_mean();
    let forcing = GradientForcing(q);
    let mut config = RunConfig::for_problem(&Problem::wellbalanced(1.0, 1.0)?, kind);
    config.mu = 1.0;
    config.lambda = 0.0;
    let disc = Discretization::new(&space, &config, &forcing)?;
    let rhs = disc.loads.rhs(&vec![0.0; mesh.num_triangles()])?;
    let (u, _) = solve_incompressible_stokes(&disc.a1, &disc.b, mesh.areas(), &rhs)?;
    Ok(grad_norm(&space, &u))
}

fn grad_norm(space: &BrSpace, u: &[Real]) -> Real {
    let mesh = space.mesh();
    let rule = space.rule();
    let mut s = 0.0;
    for t in 0..mesh.num_triangles() {
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let g = space.eval(u, t, *b).grad;
            s += w * mesh.area(t) * g.iter().flatten().map(|x| x * x).sum::<Real>();
        }
    }
    s.sqrt()
}

/// Parameter sets covering every problem family.
pub fn family_samples() -> Result<Vec<Problem>, SolverError> {
    Ok(vec![
        Problem::convergence(1.0, None, 1.0, 1.0)?,
        Problem::convergence(1e-2, None, 100.0, 1.4)?,
        Problem::convergence(0.5, Some(0.3), 3.0, 2.0)?,
        Problem::limit(10.0, 2.0)?,
        Problem::limit(1.0, 1.4)?,
        Problem::wellbalanced(1.0, 1.0)?,
        Problem::wellbalanced(2.0, 1.4)?,
    ])
}

/// Over `points` random interior points of each family: the largest PDE
/// residual, and the largest gap between the differentiated quantities
/// (velocity gradient, pressure gradient, stress divergence) and central
/// differences of the plain fields, relative to each quantity's scale.
pub fn forcing_consistency(rng: &mut ChaCha8Rng, points: usize) -> Result<(Real, Real), SolverError> {
    const H: Real = 1e-4;
    let mut residual: Real = 0.0;
    let mut fd_gap: Real = 0.0;
    for pb in family_samples()? {
        let pts: Vec<[Real; 2]> = (0..points)
            .map(|_| [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)])
            .collect();
        let (mut gaps, mut scales) = ([0.0 as Real; 3], [0.0 as Real; 3]);
        for &x in &pts {
            let r = pb.pde_residual(x);
            residual = residual.max(r[0].hypot(r[1]));

            let shift = |dx: Real, dy: Real| [x[0] + dx, x[1] + dy];
            let u = |p: [Real; 2]| pb.velocity(p);
            let (uxp, uxm, uyp, uym) = (u(shift(H, 0.0)), u(shift(-H, 0.0)), u(shift(0.0, H)), u(shift(0.0, -H)));
            let grad = pb.velocity_gradient(x);
            for c in 0..2 {
                let fd = [(uxp[c] - uxm[c]) / (2.0 * H), (uyp[c] - uym[c]) / (2.0 * H)];
                for d in 0..2 {
                    gaps[0] = gaps[0].max((grad[c][d] - fd[d]).abs());
                    scales[0] = scales[0].max(grad[c][d].abs());
                }
            }

            let p = |q: [Real; 2]| pb.pressure(q);
            let gp = pb.pressure_gradient(x);
            let fd = [
                (p(shift(H, 0.0)) - p(shift(-H, 0.0))) / (2.0 * H),
                (p(shift(0.0, H)) - p(shift(0.0, -H))) / (2.0 * H),
            ];
            for d in 0..2 {
                gaps[1] = gaps[1].max((gp[d] - fd[d]).abs());
                scales[1] = scales[1].max(gp[d].abs());
            }

            let ds = pb.stress_divergence(x);
            for c in 0..2 {
                let e = 1 - c;
                // u_c along both axes, and grad(div u)_c = d_c d_c u_c + d_x d_y u_e
                let laplace = second_derivative(&u, x, c, 0, H) + second_derivative(&u, x, c, 1, H);
                let grad_div = second_derivative(&u, x, c, c, H) + mixed_derivative(&u, x, e, H);
                let fd = pb.mu * laplace + (pb.mu + pb.lambda) * grad_div;
                gaps[2] = gaps[2].max((ds[c] - fd).abs());
                scales[2] = scales[2].max(ds[c].abs());
            }
        }
        for k in 0..3 {
            if scales[k] > 0.0 {
                fd_gap = fd_gap.max(gaps[k] / scales[k]);
            } else {
                fd_gap = fd_gap.max(gaps[k]);
            }
        }
    }
    Ok((residual, fd_gap))
}

/// `d^2 u_c / dx_a^2` by central differences.
fn second_derivative(u: &impl Fn([Real; 2]) -> [Real; 2], x: [Real; 2], c: usize, a: usize, h: Real) -> Real {
    let mut e = [0.0; 2];
    e[a] = h;
    let plus = u([x[0] + e[0], x[1] + e[1]])[c];
    let minus = u([x[0] - e[0], x[1] - e[1]])[c];
    (plus - 2.0 * u(x)[c] + minus) / (h * h)
}

/// `d^2 u_c / dx dy` by central differences.
fn mixed_derivative(u: &impl Fn([Real; 2]) -> [Real; 2], x: [Real; 2], c: usize, h: Real) -> Real {
    let v = |dx: Real, dy: Real| u([x[0] + dx, x[1] + dy])[c];
    (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4.0 * h * h)
}

/// Runs the whole suite with a seeded generator.
pub fn run_checks(seed: u64) -> Result<CheckReport, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meshes = check_meshes();
    let mut items = Vec::new();

    let (mut div_id, mut p1_id, mut orth) = (0.0 as Real, 0.0 as Real, 0.0 as Real);
    let (mut cons, mut cons1, mut sign) = (0.0 as Real, 0.0 as Real, 0.0 as Real);
    let q = Polynomial2::new(vec![(1.0, 3, 1), (-2.0, 1, 2), (0.5, 0, 3), (1.0, 1, 0)]);
    for mesh in &meshes {
        let space = BrSpace::new(mesh);
        for kind in [ReconstructionKind::Bdm1, ReconstructionKind::Rt0] {
            let recon = Reconstructor::new(&space, kind)?;
            for _ in 0..3 {
                let v = random_vec(&mut rng, space.ndofs());
                div_id = div_id.max(divergence_identity_check(&recon, &v)?);
                let phi = random_vec(&mut rng, mesh.num_nodes());
                p1_id = p1_id.max(p1_gradient_identity(&recon, &v, &phi)?);
                let w = space.correct_divergence(&v);
                orth = orth.max(gradient_orthogonality_check(&recon, &w, &q)?.abs());
            }
        }
        for _ in 0..3 {
            let u = random_vec(&mut rng, space.ndofs());
            let [a, b, c] = upwind_properties(&space, &u);
            cons = cons.max(a);
            cons1 = cons1.max(b);
            sign = sign.max(c);
        }
    }
    items.push(CheckItem::at_most("reconstruction divergence identity", div_id, 1e-12));
    items.push(CheckItem::at_most("reconstruction P1 gradient identity", p1_id, 1e-12));
    items.push(CheckItem::at_most("gradient orthogonality of divergence-free fields", orth, 1e-10));
    items.push(CheckItem::at_most("upwind column sums", cons, 1e-11));
    items.push(CheckItem::at_most("upwind A1 minus M pi0 div u", cons1, 1e-11));
    items.push(CheckItem::at_most("upwind sign pattern", sign, 1e-11));

    let (mut min_rho, mut drift) = (Real::INFINITY, 0.0 as Real);
    for trial in 0..100 {
        let mesh = &meshes[trial % meshes.len()];
        let (m, d) = density_step_trial(&mut rng, mesh)?;
        min_rho = min_rho.min(m);
        drift = drift.max(d);
    }
    items.push(CheckItem::at_least("density step minimum", min_rho, -1e-14));
    items.push(CheckItem::at_most("density step mass drift", drift, 1e-12));

    for (phi, tol, label) in [(Potential::Quadratic, 1e-12, "s^2"), (Potential::Entropy, 1e-9, "s log s")] {
        let (mut err, mut lowest) = (0.0 as Real, Real::INFINITY);
        for mesh in meshes.iter().take(3) {
            for _ in 0..5 {
                let (e, low) = convexity_trial(&mut rng, mesh, phi)?;
                err = err.max(e);
                lowest = lowest.min(low);
            }
        }
        items.push(CheckItem::at_most(format!("convexity identity {label}"), err, tol));
        items.push(CheckItem::at_least(format!("convexity sides {label}"), lowest, 0.0));
    }

    let (residual, fd_gap) = forcing_consistency(&mut rng, 50)?;
    items.push(CheckItem::at_most("forcing PDE residual", residual, 1e-9));
    items.push(CheckItem::at_most("forcing derivatives vs finite differences", fd_gap, 1e-6));

    let mesh = Mesh::structured_unit_square(8).jittered(0.25, 5)?;
    items.push(CheckItem::at_most(
        "gradient forcing velocity, modified",
        gradient_forcing_velocity(&mesh, ReconstructionKind::Bdm1)?,
        1e-10,
    ));
    items.push(CheckItem::at_least(
        "gradient forcing velocity, classical",
        gradient_forcing_velocity(&mesh, ReconstructionKind::Identity)?,
        1e-5,
    ));
    Ok(CheckReport { items })
}
