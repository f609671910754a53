//! Experiment orchestration over parameter grids and refinement sequences.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;

use grstokes::analysis::{write_atomic, ConvergenceTable, CSV_HEADER};
use grstokes::checks::run_checks;
use grstokes::experiment::{refinement_sequence, run_case, Scheme};
use grstokes::problems::{Family, Problem};
use grstokes::{Mesh, Real};

use crate::config::{Command, ExperimentConfig};

pub const THREADS_ENV: &str = "GRSTOKES_THREADS";

pub const LIMIT_HEADER: &str = "c,ndof,H1u,L2u,L2rho,iters,converged,scheme";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub solves: usize,
    /// Solves that stopped without meeting the tolerance or failed outright.
    pub failures: usize,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.failures == 0
    }

    fn absorb(&mut self, other: Outcome) {
        self.files.extend(other.files);
        self.solves += other.solves;
        self.failures += other.failures;
    }
}

/// Parallelism cap from the environment, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{THREADS_ENV}: {e}"),
    }
}

fn num(x: Real) -> String {
    format!("{x}")
}

struct Cell {
    problem: Problem,
    params: Vec<(&'static str, String)>,
    mesh: usize,
    scheme: Scheme,
}

fn problem_grid(config: &ExperimentConfig, family: Family) -> Result<Vec<(Problem, Vec<(&'static str, String)>)>> {
    let mut out = Vec::new();
    for &mu in &config.mu {
        for &lambda in &config.lambda {
            for &c in &config.c {
                for &gamma in &config.gamma {
                    let pb = match family {
                        Family::ConvergenceStudy => Problem::convergence(mu, lambda, c, gamma),
                        Family::IncompressibilityLimit => Problem::limit(c, gamma),
                        Family::WellBalanced => Problem::wellbalanced(c, gamma),
                    }
                    .with_context(|| format!("parameters mu = {mu}, c = {c}, gamma = {gamma}"))?;
                    let mut params = Vec::new();
                    if family == Family::ConvergenceStudy {
                        params.push(("mu", num(mu)));
                        params.push(("lambda", lambda.map(num).unwrap_or_else(|| "auto".into())));
                    }
                    params.push(("c", num(c)));
                    params.push(("gamma", num(gamma)));
                    out.push((pb, params));
                }
            }
        }
    }
    Ok(out)
}

fn header(config: &ExperimentConfig, cell: &[(&str, String)]) -> Vec<String> {
    let mut lines = config.describe();
    lines.push(String::new());
    lines.push(cell.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", "));
    lines
}

fn commented(lines: &[String]) -> String {
    let mut out = String::new();
    for l in lines {
        if l.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {l}");
        }
    }
    out
}

/// Runs one subcommand, writing into `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building thread pool")?;
    pool.install(|| match config.command {
        Command::Check => run_check(config, out),
        Command::Limit => run_limit(config, out),
        Command::Convergence | Command::WellBalanced => run_tables(config, out),
    })
}

fn build_meshes(config: &ExperimentConfig) -> Result<Vec<Vec<Mesh>>> {
    if config.levels == 0 {
        return Ok(Vec::new());
    }
    let labels: BTreeSet<String> = config.meshes.iter().map(|m| m.label()).collect();
    if labels.len() != config.meshes.len() {
        bail!("`mesh` lists two meshes with the same name; output files would collide");
    }
    config
        .meshes
        .iter()
        .map(|src| {
            let base = src.build().with_context(|| format!("building mesh {src}"))?;
            Ok(refinement_sequence(&base, config.levels))
        })
        .collect()
}

/// Convergence and well-balanced runs: one table per parameter set, mesh and scheme.
pub fn run_tables(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let family = config.command.family().expect("table commands have a family");
    let grid = problem_grid(config, family)?;
    let sequences = build_meshes(config)?;
    let mut cells = Vec::new();
    for (problem, params) in &grid {
        for mesh in 0..sequences.len() {
            for &scheme in &config.schemes {
                cells.push(Cell { problem: *problem, params: params.clone(), mesh, scheme });
            }
        }
    }
    let results: Vec<Result<Outcome>> = cells
        .par_iter()
        .map(|cell| {
            let src = &config.meshes[cell.mesh];
            let mut tag = vec![("mesh", src.to_string())];
            tag.extend(cell.params.iter().cloned());
            tag.push(("scheme", cell.scheme.name().to_string()));
            let mut table = ConvergenceTable { rows: Vec::new(), comments: header(config, &tag) };
            let mut outcome = Outcome::default();
            for (level, mesh) in sequences[cell.mesh].iter().enumerate() {
                outcome.solves += 1;
                match run_case(mesh, &cell.problem, cell.scheme, &config.settings) {
                    Ok(case) => {
                        if !case.report.converged {
                            outcome.failures += 1;
                        }
                        info!(
                            "{} level {level}: {} triangles, system size {}, stability ratio {:.6e}",
                            src.label(),
                            mesh.num_triangles(),
                            case.report.system_size,
                            case.stability_ratio
                        );
                        table.comments.push(format!(
                            "level {level}: triangles = {}, system size = {}",
                            mesh.num_triangles(),
                            case.report.system_size
                        ));
                        table.rows.push(case.report);
                    }
                    Err(e) => {
                        warn!("{} level {level}: {e}", src.label());
                        outcome.failures += 1;
                        table.comments.push(format!("level {level}: failed: {e}"));
                    }
                }
            }
            let mut name = format!("{}_{}", config.command.name(), src.label());
            for (k, v) in &cell.params {
                let _ = write!(name, "_{k}{v}");
            }
            let _ = write!(name, "_{}", cell.scheme.name());
            let path = out.join(format!("{name}.csv"));
            let text = if table.rows.is_empty() {
                format!("{}{CSV_HEADER}\n", commented(&table.comments))
            } else {
                table.to_csv()?
            };
            write_atomic(&path, &text)?;
            outcome.files.push(path);
            if config.gnuplot && !table.rows.is_empty() {
                table.emit_gnuplot(out, &name)?;
                for norm in ["L2u", "H1u", "L2rho"] {
                    outcome.files.push(out.join(format!("{name}_{norm}.dat")));
                }
            }
            Ok(outcome)
        })
        .collect();
    collect(results)
}

/// Error against `c` on fixed meshes: one table per `gamma`, mesh, level and scheme.
pub fn run_limit(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    // validate every (c, gamma) before any solve
    let _ = problem_grid(config, Family::IncompressibilityLimit)?;
    let sequences = build_meshes(config)?;
    let mut cells = Vec::new();
    for &gamma in &config.gamma {
        for (m, seq) in sequences.iter().enumerate() {
            for level in 0..seq.len() {
                for &scheme in &config.schemes {
                    cells.push((gamma, m, level, scheme));
                }
            }
        }
    }
    let results: Vec<Result<Outcome>> = cells
        .par_iter()
        .map(|&(gamma, m, level, scheme)| {
            let src = &config.meshes[m];
            let mesh = &sequences[m][level];
            let tag = vec![
                ("mesh", src.to_string()),
                ("level", level.to_string()),
                ("gamma", num(gamma)),
                ("scheme", scheme.name().to_string()),
            ];
            let mut lines = header(config, &tag);
            let mut rows = String::new();
            let mut outcome = Outcome::default();
            for &c in &config.c {
                outcome.solves += 1;
                let problem = Problem::limit(c, gamma)?;
                match run_case(mesh, &problem, scheme, &config.settings) {
                    Ok(case) => {
                        let r = &case.report;
                        if !r.converged {
                            outcome.failures += 1;
                        }
                        let _ = writeln!(
                            rows,
                            "{},{},{:.5e},{:.5e},{:.5e},{},{},{}",
                            num(c),
                            r.ndof,
                            r.h1u,
                            r.l2u,
                            r.l2rho,
                            r.iterations,
                            r.converged,
                            r.scheme
                        );
                    }
                    Err(e) => {
                        warn!("{} c = {c}: {e}", src.label());
                        outcome.failures += 1;
                        lines.push(format!("c = {c}: failed: {e}"));
                    }
                }
            }
            let path = out.join(format!(
                "limit_{}_level{level}_gamma{}_{}.csv",
                src.label(),
                num(gamma),
                scheme.name()
            ));
            write_atomic(&path, &format!("{}{LIMIT_HEADER}\n{rows}", commented(&lines)))?;
            outcome.files.push(path);
            Ok(outcome)
        })
        .collect();
    collect(results)
}

/// Operator property suite; a failed property counts as a failure.
pub fn run_check(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let report = run_checks(config.seed)?;
    let mut text = commented(&config.describe());
    for item in &report.items {
        let _ = writeln!(text, "{item}");
    }
    let path = out.join("check.txt");
    write_atomic(&path, &text)?;
    Ok(Outcome {
        files: vec![path],
        solves: report.items.len(),
        failures: report.items.iter().filter(|i| !i.passed()).count(),
    })
}

fn collect(results: Vec<Result<Outcome>>) -> Result<Outcome> {
    let mut total = Outcome::default();
    for r in results {
        total.absorb(r?);
    }
    total.files.sort();
    Ok(total)
}
