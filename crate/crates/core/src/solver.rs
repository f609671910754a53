//! Linear solves and the fixed-point iteration for the compressible system.

use log::{debug, info, warn};

use crate::assembly::{assemble_a1, assemble_a2, assemble_b, assemble_upwind, LoadVectors};
use crate::error::SolverError;
use crate::fespace::BrSpace;
use crate::problems::{EquationOfState, Forcing, Problem};
use crate::quadrature::TriangleRule;
use crate::reconstruction::{ReconstructionKind, Reconstructor};
use crate::sparse::{norm2, CholeskySolver, LuSolver, SparseMatrix};
use crate::Real;

/// Consecutive residual increases that trigger halving of `tau`.
pub const TAU_PATIENCE: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mu: Real,
    pub lambda: Real,
    pub eos: EquationOfState,
    /// Prescribed total mass.
    pub mass: Real,
    /// Pseudo-time step; `None` means `mu / c`.
    pub tau: Option<Real>,
    pub tol: Real,
    pub max_iters: usize,
    pub kind: ReconstructionKind,
}

impl RunConfig {
    pub fn for_problem(problem: &Problem, kind: ReconstructionKind) -> Self {
        Self {
            mu: problem.mu,
            lambda: problem.lambda,
            eos: problem.eos,
            mass: problem.mass,
            tau: None,
            tol: 1e-11,
            max_iters: 2000,
            kind,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: String| Err(SolverError::Config(m));
        if !(self.mu > 0.0) {
            return fail(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.lambda > -2.0 * self.mu) {
            return fail(format!("lambda must exceed -2 mu, got {}", self.lambda));
        }
        EquationOfState::new(self.eos.c, self.eos.gamma)?;
        if !(self.mass > 0.0) {
            return fail(format!("mass must be positive, got {}", self.mass));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0) {
                return fail(format!("tau must be positive, got {tau}"));
            }
        }
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        Ok(())
    }

    pub fn tau(&self) -> Real {
        self.tau.unwrap_or(self.mu / self.eos.c)
    }

    /// Runs with `gamma > 1` are outside the setting the scheme is analysed for.
    pub fn experimental(&self) -> bool {
        !self.eos.isothermal()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Vec<Real>,
    pub p: Vec<Real>,
    pub rho: Vec<Real>,
    /// Completed loop passes.
    pub iterations: usize,
    pub residuals: Vec<Real>,
    pub converged: bool,
    /// The well-balanced initial density was not admissible.
    pub fallback: bool,
    /// Final pseudo-time step after any halving.
    pub tau: Real,
}

/// Operators for one mesh, scheme and parameter set.
pub struct Discretization<'s> {
    pub space: &'s BrSpace<'s>,
    pub recon: Reconstructor<'s>,
    pub a1: SparseMatrix,
    pub a2: SparseMatrix,
    pub b: SparseMatrix,
    pub loads: LoadVectors,
}

impl<'s> Discretization<'s> {
    /// Assembles with the default degree-5 volume rule.
    pub fn new(space: &'s BrSpace<'s>, config: &RunConfig, forcing: &dyn Forcing) -> Result<Self, SolverError> {
        Self::with_rule(space, config, forcing, space.rule())
    }

    /// Same, with a caller-chosen rule for the load vectors.
    pub fn with_rule(
        space: &'s BrSpace<'s>,
        config: &RunConfig,
        forcing: &dyn Forcing,
        rule: &TriangleRule<Real>,
    ) -> Result<Self, SolverError> {
        config.validate()?;
        let recon = Reconstructor::new(space, config.kind)?;
        let loads = LoadVectors::new(&recon, forcing, rule);
        Ok(Self {
            space,
            a1: assemble_a1(space, config.mu),
            a2: assemble_a2(space, config.kind, config.lambda),
            b: assemble_b(space),
            loads,
            recon,
        })
    }

    pub fn areas(&self) -> &[Real] {
        self.space.mesh().areas()
    }
}

/// Zero-mean-pressure Stokes problem `A1 u + B^T p = rhs`, `B u = 0`.
pub fn solve_incompressible_stokes(
    a1: &SparseMatrix,
    b: &SparseMatrix,
    areas: &[Real],
    rhs: &[Real],
) -> Result<(Vec<Real>, Vec<Real>), SolverError> {
    // Constants span ker(B^T) and the rows of B sum to zero, so pinning p_0
    // and dropping row 0 leaves a regular system. A dense mean-value
    // multiplier row would ruin the sparse LU fill instead.
    let nv = a1.nrows();
    let np = b.nrows();
    let n = nv + np - 1;
    let mut entries: Vec<(usize, usize, Real)> = a1.triplets().collect();
    for (r, c, v) in b.triplets().filter(|&(r, _, _)| r > 0) {
        entries.push((nv + r - 1, c, v));
        entries.push((c, nv + r - 1, v));
    }
    let system = SparseMatrix::from_triplets(n, n, &entries);
    let mut full_rhs = rhs.to_vec();
    full_rhs.resize(n, 0.0);
    let x = LuSolver::new(&system)?.solve(&full_rhs)?;
    let mut p = Vec::with_capacity(np);
    p.push(0.0);
    p.extend_from_slice(&x[nv..]);
    let total: Real = areas.iter().sum();
    let mean = p.iter().zip(areas).map(|(q, a)| q * a).sum::<Real>() / total;
    p.iter_mut().for_each(|q| *q -= mean);
    Ok((x[..nv].to_vec(), p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WellBalancedInit {
    pub rho: Vec<Real>,
    pub fallback: bool,
}

/// `rho_0 = phi^{-1}(p_0 + C)` with `C` fixed by the mass constraint.
/// For `gamma = 1` this is `p_0 / c + M / |Omega|`. Falls back to the
/// constant density when no admissible `C` exists.
pub fn wellbalanced_init(p0: &[Real], eos: &EquationOfState, mass: Real, areas: &[Real]) -> WellBalancedInit {
    let total_area: Real = areas.iter().sum();
    let constant = || WellBalancedInit {
        rho: vec![mass / total_area; p0.len()],
        fallback: true,
    };
    if eos.isothermal() {
        let shift = mass / total_area;
        let rho: Vec<Real> = p0.iter().map(|p| p / eos.c + shift).collect();
        if rho.iter().any(|&r| r < 0.0) {
            return constant();
        }
        return WellBalancedInit { rho, fallback: false };
    }
    // mass(C) is increasing in C; the smallest admissible C makes min rho = 0
    let density = |k: Real| -> Vec<Real> {
        p0.iter().map(|p| eos.density((p + k).max(0.0)).unwrap_or(0.0)).collect()
    };
    let mass_of = |k: Real| -> Real { density(k).iter().zip(areas).map(|(r, a)| r * a).sum() };
    let pmin = p0.iter().copied().fold(Real::INFINITY, Real::min);
    let mut lo = -pmin;
    if mass_of(lo) > mass {
        return constant();
    }
    let mut hi = lo.abs().max(1.0);
    while mass_of(hi) < mass {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_of(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * Real::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let mut rho = density(0.5 * (lo + hi));
    // remove the last bisection error exactly
    let scale = mass / rho.iter().zip(areas).map(|(r, a)| r * a).sum::<Real>();
    rho.iter_mut().for_each(|r| *r *= scale);
    WellBalancedInit { rho, fallback: false }
}

/// Backward-Euler upwind step `(M + tau A) rho = M rho_prev`.
///
/// Solved for the increment: solving for `rho` directly leaves a rounding
/// error in `A rho` of order `eps |rho| / tau`, which for small `tau` sits
/// above the stopping tolerance.
pub fn density_step(areas: &[Real], upwind: &SparseMatrix, rho_prev: &[Real], tau: Real) -> Result<Vec<Real>, SolverError> {
    let system = SparseMatrix::diagonal_from(areas).lincomb(1.0, upwind, tau);
    let rhs: Vec<Real> = upwind.matvec(rho_prev).iter().map(|v| -tau * v).collect();
    let delta = LuSolver::new(&system)?.solve(&rhs)?;
    Ok(rho_prev.iter().zip(&delta).map(|(r, d)| r + d).collect())
}

/// `u = (A1 + A2)^{-1} (rhs - B^T p)`.
pub fn momentum_step(
    chol: &CholeskySolver,
    b: &SparseMatrix,
    rhs: &[Real],
    p: &[Real],
) -> Result<Vec<Real>, SolverError> {
    let bp = b.matvec_transpose(p);
    let r: Vec<Real> = rhs.iter().zip(&bp).map(|(f, g)| f - g).collect();
    chol.solve(&r)
}

/// Momentum residual `K u - rhs + B^T p`.
pub fn momentum_residual(k: &SparseMatrix, b: &SparseMatrix, u: &[Real], rhs: &[Real], p: &[Real]) -> Vec<Real> {
    let ku = k.matvec(u);
    let bp = b.matvec_transpose(p);
    ku.iter().zip(rhs).zip(&bp).map(|((a, f), g)| a - f + g).collect()
}

/// Initial step plus the fixed-point loop.
pub fn fixed_point_solve(disc: &Discretization, config: &RunConfig) -> Result<State, SolverError> {
    config.validate()?;
    let space = disc.space;
    let mesh = space.mesh();
    let areas = disc.areas();
    let total_area: Real = areas.iter().sum();
    let eos = config.eos;
    if config.experimental() {
        info!("gamma = {} > 1: experimental barotropic run", eos.gamma);
    }

    let rho_guess = vec![config.mass / total_area; mesh.num_triangles()];
    let rhs0 = disc.loads.rhs(&rho_guess)?;
    let (u0, p0) = solve_incompressible_stokes(&disc.a1, &disc.b, areas, &rhs0)?;
    let init = wellbalanced_init(&p0, &eos, config.mass, areas);
    let (mut u, mut rho) = if init.fallback {
        warn!("well-balanced initial density not admissible; starting from a constant density");
        (vec![0.0; space.ndofs()], init.rho)
    } else {
        (u0, init.rho)
    };
    let mut p = eos.pressures(&rho)?;
    let mut state = State {
        u: u.clone(),
        p: p.clone(),
        rho: rho.clone(),
        iterations: 0,
        residuals: Vec::new(),
        converged: false,
        fallback: init.fallback,
        tau: config.tau(),
    };
    if config.max_iters == 0 {
        return Ok(state);
    }

    let k = disc.a1.lincomb(1.0, &disc.a2, 1.0);
    let chol = CholeskySolver::new(&k)?;
    let mut tau = config.tau();
    let mut increases = 0;
    let mut residuals: Vec<Real> = Vec::new();
    let mut converged = false;
    let mut iter = 0;
    while iter < config.max_iters {
        iter += 1;
        let upwind = assemble_upwind(space, &u);
        rho = density_step(areas, &upwind.matrix, &rho, tau)?;
        check_density(iter, &rho, areas, config.mass)?;
        p = eos.pressures(&rho)?;
        let rhs = disc.loads.rhs(&rho)?;
        u = momentum_step(&chol, &disc.b, &rhs, &p)?;

        let mom = norm2(&momentum_residual(&k, &disc.b, &u, &rhs, &p));
        // L2 norm of the piecewise constant div_upw(rho u)
        let tested = assemble_upwind(space, &u).apply(&rho);
        let continuity = tested.iter().zip(areas).map(|(v, a)| v * v / a).sum::<Real>().sqrt();
        let res = mom + continuity;
        let mass: Real = rho.iter().zip(areas).map(|(r, a)| r * a).sum();
        let min_rho = rho.iter().copied().fold(Real::INFINITY, Real::min);
        info!("{iter} {res:.15e} {mass:.15e} {min_rho:.15e}");
        if let Some(&last) = residuals.last() {
            increases = if res > last { increases + 1 } else { 0 };
            if increases >= TAU_PATIENCE {
                tau *= 0.5;
                increases = 0;
                debug!("residual increased {TAU_PATIENCE} times in a row; tau halved to {tau:e}");
            }
        }
        residuals.push(res);
        if res < config.tol {
            converged = true;
            break;
        }
    }
    if converged && residuals.len() > 10 {
        let tail = &residuals[residuals.len() - 10..];
        if tail.windows(2).any(|w| w[1] > w[0]) {
            warn!("residual not monotone over the last 10 iterations");
        }
    }
    if !converged {
        warn!(
            "no convergence after {iter} iterations (residual {:e})",
            residuals.last().copied().unwrap_or(Real::NAN)
        );
    }
    state.u = u;
    state.p = p;
    state.rho = rho;
    state.iterations = iter;
    state.residuals = residuals;
    state.converged = converged;
    state.tau = tau;
    Ok(state)
}

fn check_density(iteration: usize, rho: &[Real], areas: &[Real], mass: Real) -> Result<(), SolverError> {
    let scale = rho.iter().fold(0.0, |m: Real, r| m.max(r.abs()));
    if let Some((t, r)) = rho.iter().enumerate().find(|(_, r)| **r < -1e-14 * scale.max(1.0)) {
        return Err(SolverError::Invariant {
            iteration,
            msg: format!("negative density {r:e} on triangle {t}"),
        });
    }
    let total: Real = rho.iter().zip(areas).map(|(r, a)| r * a).sum();
    if (total - mass).abs() > 1e-11 * mass {
        return Err(SolverError::Invariant {
            iteration,
            msg: format!("mass drift: {total:.17e} vs {mass:.17e}"),
        });
    }
    Ok(())
}
