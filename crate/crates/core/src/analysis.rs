//! Error norms, empirical convergence orders and CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::AnalysisError;
use crate::fespace::BrSpace;
use crate::problems::Problem;
use crate::Real;

pub const CSV_HEADER: &str = "ndof,L2u,rateL2u,H1u,rateH1u,L2rho,rateL2rho,iters,converged,scheme";

/// Analytic reference fields.
pub trait ExactSolution {
    fn velocity(&self, p: [Real; 2]) -> [Real; 2];
    fn velocity_gradient(&self, p: [Real; 2]) -> [[Real; 2]; 2];
    fn density(&self, p: [Real; 2]) -> Real;
}

impl ExactSolution for Problem {
    fn velocity(&self, p: [Real; 2]) -> [Real; 2] {
        Problem::velocity(self, p)
    }
    fn velocity_gradient(&self, p: [Real; 2]) -> [[Real; 2]; 2] {
        Problem::velocity_gradient(self, p)
    }
    fn density(&self, p: [Real; 2]) -> Real {
        Problem::density(self, p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    /// `2|T| + |N| + |E|`, the count used for plotting.
    pub ndof: usize,
    /// Unknowns actually solved for (velocity + pressure).
    pub system_size: usize,
    pub h: Real,
    pub l2u: Real,
    pub h1u: Real,
    pub l2rho: Real,
    pub iterations: usize,
    pub converged: bool,
    pub scheme: String,
}

/// `2|T| + |N| + |E|`.
pub fn nominal_ndof(space: &BrSpace) -> usize {
    let m = space.mesh();
    2 * m.num_triangles() + m.num_nodes() + m.num_faces()
}

/// `(||u - u_h||, ||grad(u - u_h)||, ||rho - rho_h||)` by the degree-5 rule.
pub fn error_components(
    space: &BrSpace,
    u: &[Real],
    rho: &[Real],
    exact: &dyn ExactSolution,
) -> (Real, Real, Real) {
    let mesh = space.mesh();
    let rule = space.rule();
    let (mut l2u, mut h1u, mut l2rho) = (0.0, 0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.map_point(t, *b);
            let uh = space.eval(u, t, *b);
            let ue = exact.velocity(x);
            let ge = exact.velocity_gradient(x);
            let wa = w * area;
            l2u += wa * ((ue[0] - uh.value[0]).powi(2) + (ue[1] - uh.value[1]).powi(2));
            for c in 0..2 {
                for d in 0..2 {
                    h1u += wa * (ge[c][d] - uh.grad[c][d]).powi(2);
                }
            }
            l2rho += wa * (exact.density(x) - rho[t]).powi(2);
        }
    }
    (l2u.sqrt(), h1u.sqrt(), l2rho.sqrt())
}

pub fn error_norms(
    space: &BrSpace,
    u: &[Real],
    rho: &[Real],
    exact: &dyn ExactSolution,
    iterations: usize,
    converged: bool,
    scheme: &str,
) -> ErrorReport {
    let (l2u, h1u, l2rho) = error_components(space, u, rho, exact);
    ErrorReport {
        ndof: nominal_ndof(space),
        system_size: space.ndofs() + space.mesh().num_triangles(),
        h: space.mesh().h(),
        l2u,
        h1u,
        l2rho,
        iterations,
        converged,
        scheme: scheme.to_string(),
    }
}

/// `log2(e_{k-1} / e_k)`, absent for the first entry and non-positive errors.
pub fn dyadic_rate(errors: &[Real]) -> Vec<Option<Real>> {
    let mut out = vec![None; errors.len()];
    for k in 1..errors.len() {
        let (a, b) = (errors[k - 1], errors[k]);
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            out[k] = Some((a / b).log2());
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
    /// Written as `# ...` lines above the header.
    pub comments: Vec<String>,
}

impl ConvergenceTable {
    pub fn column(&self, pick: impl Fn(&ErrorReport) -> Real) -> Vec<Real> {
        self.rows.iter().map(pick).collect()
    }

    pub fn rates_l2u(&self) -> Vec<Option<Real>> {
        dyadic_rate(&self.column(|r| r.l2u))
    }

    pub fn rates_h1u(&self) -> Vec<Option<Real>> {
        dyadic_rate(&self.column(|r| r.h1u))
    }

    pub fn rates_l2rho(&self) -> Vec<Option<Real>> {
        dyadic_rate(&self.column(|r| r.l2rho))
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn to_csv(&self) -> Result<String, AnalysisError> {
        if self.rows.is_empty() {
            return Err(AnalysisError::EmptyTable);
        }
        let mut out = String::new();
        for c in &self.comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "{CSV_HEADER}");
        let (r1, r2, r3) = (self.rates_l2u(), self.rates_h1u(), self.rates_l2rho());
        let rate = |r: Option<Real>| r.map(|v| format!("{v:.5e}")).unwrap_or_default();
        for (k, row) in self.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{:.5e},{},{:.5e},{},{:.5e},{},{},{},{}",
                row.ndof,
                row.l2u,
                rate(r1[k]),
                row.h1u,
                rate(r2[k]),
                row.l2rho,
                rate(r3[k]),
                row.iterations,
                row.converged,
                row.scheme
            );
        }
        Ok(out)
    }

    /// Writes the CSV through a temporary file and a rename.
    pub fn emit(&self, path: impl AsRef<Path>) -> Result<(), AnalysisError> {
        write_atomic(path.as_ref(), &self.to_csv()?)
    }

    /// Two-column `ndof error` files, one per norm, named `<stem>_<norm>.dat`.
    pub fn emit_gnuplot(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(), AnalysisError> {
        if self.rows.is_empty() {
            return Err(AnalysisError::EmptyTable);
        }
        let cols: [(&str, fn(&ErrorReport) -> Real); 3] =
            [("L2u", |r| r.l2u), ("H1u", |r| r.h1u), ("L2rho", |r| r.l2rho)];
        for (name, pick) in cols {
            let mut text = format!("# ndof {name}\n");
            for r in &self.rows {
                let _ = writeln!(text, "{} {:.5e}", r.ndof, pick(r));
            }
            write_atomic(&dir.as_ref().join(format!("{stem}_{name}.dat")), &text)?;
        }
        Ok(())
    }

    /// Reads a table written by [`ConvergenceTable::to_csv`]; `h` and the
    /// system size are not stored and come back as zero.
    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        let mut table = ConvergenceTable::default();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            let bad = |m: &str| AnalysisError::Parse(format!("line {}: {m}", i + 1));
            if let Some(c) = line.strip_prefix('#') {
                table.comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !seen_header {
                if line.trim() != CSV_HEADER {
                    return Err(bad("unexpected header"));
                }
                seen_header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(bad("expected 10 fields"));
            }
            let num = |s: &str| s.parse::<Real>().map_err(|e| bad(&e.to_string()));
            table.rows.push(ErrorReport {
                ndof: f[0].parse().map_err(|_| bad("bad ndof"))?,
                system_size: 0,
                h: 0.0,
                l2u: num(f[1])?,
                h1u: num(f[3])?,
                l2rho: num(f[5])?,
                iterations: f[7].parse().map_err(|_| bad("bad iteration count"))?,
                converged: f[8].parse().map_err(|_| bad("bad converged flag"))?,
                scheme: f[9].to_string(),
            });
        }
        if table.rows.is_empty() {
            return Err(AnalysisError::EmptyTable);
        }
        Ok(table)
    }
}

pub fn write_atomic(path: &Path, text: &str) -> Result<(), AnalysisError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
