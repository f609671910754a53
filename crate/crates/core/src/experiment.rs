//! Running a problem family on a mesh or a refinement sequence.

use crate::analysis::{error_norms, ConvergenceTable, ErrorReport};
use crate::error::{MeshError, SolverError};
use crate::fespace::BrSpace;
use crate::mesh::{load_mesh, Mesh};
use crate::problems::{Forcing, Problem};
use crate::quadrature::TriangleRule;
use crate::reconstruction::ReconstructionKind;
use crate::solver::{fixed_point_solve, Discretization, RunConfig, State};
use crate::Real;

/// Modified (gradient-robust) or classical scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Modified(ReconstructionKind),
    Classical,
}

impl Scheme {
    pub const MODIFIED: Scheme = Scheme::Modified(ReconstructionKind::Bdm1);

    pub fn kind(self) -> ReconstructionKind {
        match self {
            Scheme::Modified(k) => k,
            Scheme::Classical => ReconstructionKind::Identity,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Modified(ReconstructionKind::Rt0) => "modified-rt0",
            Scheme::Modified(_) => "modified",
            Scheme::Classical => "classical",
        }
    }
}

/// Solver knobs that are not part of the physical problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub tau: Option<Real>,
    pub tol: Real,
    pub max_iters: usize,
    /// Points per direction of a collapsed Gauss rule for the load vectors;
    /// `None` keeps the degree-5 rule.
    pub load_points: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tau: None,
            tol: 1e-11,
            max_iters: 2000,
            load_points: None,
        }
    }
}

impl SolverSettings {
    pub fn run_config(&self, problem: &Problem, scheme: Scheme) -> RunConfig {
        let mut c = RunConfig::for_problem(problem, scheme.kind());
        c.tau = self.tau;
        c.tol = self.tol;
        c.max_iters = self.max_iters;
        c
    }
}

/// Where a base mesh comes from. Text form: `structured:N`,
/// `jittered:N:FRACTION:SEED`, `unstructured` or `file:PATH`.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    Structured(usize),
    Jittered { n: usize, fraction: Real, seed: u64 },
    /// The bundled sample, see [`Mesh::sample_unstructured`].
    Unstructured,
    File(std::path::PathBuf),
}

impl MeshSource {
    pub fn build(&self) -> Result<Mesh, MeshError> {
        match self {
            MeshSource::Structured(n) => Ok(Mesh::structured_unit_square(*n)),
            MeshSource::Jittered { n, fraction, seed } => {
                Mesh::structured_unit_square(*n).jittered(*fraction, *seed)
            }
            MeshSource::Unstructured => Ok(Mesh::sample_unstructured()),
            MeshSource::File(p) => load_mesh(p),
        }
    }

    /// Short name usable in file names.
    pub fn label(&self) -> String {
        match self {
            MeshSource::Structured(n) => format!("structured{n}"),
            MeshSource::Jittered { n, .. } => format!("jittered{n}"),
            MeshSource::Unstructured => "unstructured".into(),
            MeshSource::File(p) => {
                let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
                let clean: String = stem
                    .chars()
                    .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
                    .collect();
                format!("file-{clean}")
            }
        }
    }
}

impl std::fmt::Display for MeshSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshSource::Structured(n) => write!(f, "structured:{n}"),
            MeshSource::Jittered { n, fraction, seed } => write!(f, "jittered:{n}:{fraction}:{seed}"),
            MeshSource::Unstructured => write!(f, "unstructured"),
            MeshSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl std::str::FromStr for MeshSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("bad mesh `{s}` (expected structured:N, jittered:N:FRACTION:SEED, unstructured or file:PATH)");
        if s == "unstructured" {
            return Ok(MeshSource::Unstructured);
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(MeshSource::File(path.into()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["structured", n] => {
                let n: usize = n.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                Ok(MeshSource::Structured(n))
            }
            ["jittered", n, fraction, seed] => {
                let n: usize = n.parse().map_err(|_| bad())?;
                let fraction: Real = fraction.parse().map_err(|_| bad())?;
                if n == 0 || !(0.0..0.5).contains(&fraction) {
                    return Err(bad());
                }
                Ok(MeshSource::Jittered { n, fraction, seed: seed.parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        }
    }
}

/// `base`, then `levels - 1` uniform refinements of it.
pub fn refinement_sequence(base: &Mesh, levels: usize) -> Vec<Mesh> {
    let mut out: Vec<Mesh> = Vec::with_capacity(levels);
    for k in 0..levels {
        let next = if k == 0 { base.clone() } else { out[k - 1].uniform_refine() };
        out.push(next);
    }
    out
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub report: ErrorReport,
    pub state: State,
    /// `min(2 mu + lambda, mu) ||grad u_h|| / (||f|| + ||rho_h|| ||g||_inf)`.
    pub stability_ratio: Real,
    pub experimental: bool,
}

/// Solves `problem` on `mesh` with `scheme` and measures errors.
pub fn run_case(mesh: &Mesh, problem: &Problem, scheme: Scheme, settings: &SolverSettings) -> Result<CaseResult, SolverError> {
    run_case_with_forcing(mesh, problem, problem, scheme, settings)
}

/// Same as [`run_case`] with a separate forcing.
pub fn run_case_with_forcing(
    mesh: &Mesh,
    problem: &Problem,
    forcing: &dyn Forcing,
    scheme: Scheme,
    settings: &SolverSettings,
) -> Result<CaseResult, SolverError> {
    let space = BrSpace::new(mesh);
    let config = settings.run_config(problem, scheme);
    let rule = match settings.load_points {
        Some(n) => TriangleRule::collapsed_gauss(n),
        None => TriangleRule::degree5(),
    };
    let disc = Discretization::with_rule(&space, &config, forcing, &rule)?;
    let state = fixed_point_solve(&disc, &config)?;
    let report = error_norms(
        &space,
        &state.u,
        &state.rho,
        problem,
        state.iterations,
        state.converged,
        scheme.name(),
    );
    let stability_ratio = stability_ratio(&space, &state, problem, forcing);
    log::debug!(
        "{} on {} triangles: H1 error {:e}, {} iterations, stability ratio {:e}",
        scheme.name(),
        mesh.num_triangles(),
        report.h1u,
        state.iterations,
        stability_ratio
    );
    Ok(CaseResult {
        report,
        state,
        stability_ratio,
        experimental: config.experimental(),
    })
}

fn stability_ratio(space: &BrSpace, state: &State, problem: &Problem, forcing: &dyn Forcing) -> Real {
    let mesh = space.mesh();
    let rule = space.rule();
    let (mut grad, mut f2, mut rho2, mut ginf): (Real, Real, Real, Real) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        rho2 += area * state.rho[t] * state.rho[t];
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.map_point(t, *b);
            let g = space.eval(&state.u, t, *b).grad;
            grad += w * area * g.iter().flatten().map(|v| v * v).sum::<Real>();
            let f = forcing.f(x);
            f2 += w * area * (f[0] * f[0] + f[1] * f[1]);
            let gv = forcing.g(x);
            ginf = ginf.max(gv[0].hypot(gv[1]));
        }
    }
    let data = f2.sqrt() + rho2.sqrt() * ginf;
    if data == 0.0 {
        return 0.0;
    }
    (2.0 * problem.mu + problem.lambda).min(problem.mu) * grad.sqrt() / data
}

/// Runs `scheme` over `meshes` and collects a table.
pub fn convergence_table(
    meshes: &[Mesh],
    problem: &Problem,
    scheme: Scheme,
    settings: &SolverSettings,
) -> Result<(ConvergenceTable, Vec<CaseResult>), SolverError> {
    let mut table = ConvergenceTable::default();
    let mut cases = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let case = run_case(mesh, problem, scheme, settings)?;
        table.rows.push(case.report.clone());
        cases.push(case);
    }
    Ok((table, cases))
}
