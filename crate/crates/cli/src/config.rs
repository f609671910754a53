//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use grstokes::experiment::{MeshSource, Scheme, SolverSettings};
use grstokes::problems::Family;
use grstokes::reconstruction::ReconstructionKind;
use grstokes::Real;

/// Keys understood in config files and `--set`.
pub const KEYS: &[&str] = &[
    "family",
    "mu",
    "lambda",
    "c",
    "gamma",
    "mesh",
    "levels",
    "scheme",
    "reconstruction",
    "tau",
    "tol",
    "max_iters",
    "load_points",
    "gnuplot",
    "seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Convergence,
    Limit,
    WellBalanced,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::Limit => "limit",
            Command::WellBalanced => "wellbalanced",
            Command::Check => "check",
        }
    }

    pub fn family(self) -> Option<Family> {
        match self {
            Command::Convergence => Some(Family::ConvergenceStudy),
            Command::Limit => Some(Family::IncompressibilityLimit),
            Command::WellBalanced => Some(Family::WellBalanced),
            Command::Check => None,
        }
    }

    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::Convergence => &[
                ("mu", "1"),
                ("lambda", "auto"),
                ("c", "1"),
                ("gamma", "1"),
                ("mesh", "structured:8"),
                ("levels", "4"),
            ],
            Command::Limit => &[
                ("c", "1,10,100,1000,10000"),
                ("gamma", "2"),
                ("mesh", "structured:16,unstructured"),
                ("levels", "1"),
            ],
            Command::WellBalanced => &[
                ("c", "1"),
                ("gamma", "1,1.4"),
                ("mesh", "structured:8,unstructured"),
                ("levels", "3"),
            ],
            Command::Check => &[("seed", "1")],
        }
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got `{line}`", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_set(arg: &str) -> Result<(String, String)> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects key=value, got `{arg}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub mu: Vec<Real>,
    /// `None` entries mean the family default `-2 mu / 3`.
    pub lambda: Vec<Option<Real>>,
    pub c: Vec<Real>,
    pub gamma: Vec<Real>,
    pub meshes: Vec<MeshSource>,
    pub levels: usize,
    pub schemes: Vec<Scheme>,
    pub settings: SolverSettings,
    pub gnuplot: bool,
    pub seed: u64,
    raw: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Later pairs override earlier ones; defaults come first.
    pub fn resolve(command: Command, pairs: &[(String, String)]) -> Result<Self> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        let common = [
            ("scheme", "both"),
            ("reconstruction", "bdm1"),
            ("tau", "auto"),
            ("tol", "1e-11"),
            ("max_iters", "2000"),
            ("load_points", "auto"),
            ("gnuplot", "false"),
        ];
        let fixed_by_family = matches!(command, Command::Limit | Command::WellBalanced);
        for (k, v) in common.iter().chain(command.defaults()) {
            raw.insert(k.to_string(), v.to_string());
        }
        for (k, v) in pairs {
            if !KEYS.contains(&k.as_str()) {
                bail!("unknown config key `{k}` (known: {})", KEYS.join(", "));
            }
            if k == "family" {
                if v != command.name() {
                    bail!("config is for family `{v}` but the subcommand is `{}`", command.name());
                }
                continue;
            }
            if fixed_by_family && (k == "mu" || k == "lambda") {
                bail!("`{k}` is fixed (mu = 1, lambda = -2/3) for `{}`", command.name());
            }
            raw.insert(k.clone(), v.clone());
        }

        let get = |k: &str| raw.get(k).map(String::as_str).unwrap_or("");
        let reals = |k: &str| -> Result<Vec<Real>> {
            get(k)
                .split(',')
                .map(|v| {
                    let x: Real = v.trim().parse().with_context(|| format!("`{k}`: bad number `{}`", v.trim()))?;
                    if !x.is_finite() {
                        bail!("`{k}`: value must be finite");
                    }
                    Ok(x)
                })
                .collect()
        };
        let (mu, lambda) = if fixed_by_family || command == Command::Check {
            (vec![1.0], vec![None])
        } else {
            let lambda = get("lambda")
                .split(',')
                .map(|v| match v.trim() {
                    "auto" => Ok(None),
                    t => t.parse::<Real>().map(Some).with_context(|| format!("`lambda`: bad number `{t}`")),
                })
                .collect::<Result<Vec<_>>>()?;
            (reals("mu")?, lambda)
        };
        let (c, gamma) = if command == Command::Check { (vec![1.0], vec![1.0]) } else { (reals("c")?, reals("gamma")?) };
        let meshes = if command == Command::Check {
            Vec::new()
        } else {
            get("mesh")
                .split(',')
                .map(|m| m.parse::<MeshSource>().map_err(|e| anyhow!("`mesh`: {e}")))
                .collect::<Result<Vec<_>>>()?
        };
        let levels: usize = match raw.get("levels") {
            Some(v) => v.parse().with_context(|| format!("`levels`: bad count `{v}`"))?,
            None => 0,
        };
        let kind: ReconstructionKind = get("reconstruction")
            .parse()
            .map_err(|e| anyhow!("`reconstruction`: {e}"))?;
        if kind == ReconstructionKind::Identity {
            bail!("`reconstruction` selects the modified scheme's operator (bdm1 or rt0); use `scheme = classical` for the identity");
        }
        let schemes = match get("scheme") {
            "modified" => vec![Scheme::Modified(kind)],
            "classical" => vec![Scheme::Classical],
            "both" => vec![Scheme::Modified(kind), Scheme::Classical],
            other => bail!("`scheme`: expected modified, classical or both, got `{other}`"),
        };
        let tau = match get("tau") {
            "auto" => None,
            t => {
                let v: Real = t.parse().with_context(|| format!("`tau`: bad number `{t}`"))?;
                if !(v > 0.0 && v.is_finite()) {
                    bail!("`tau` must be positive");
                }
                Some(v)
            }
        };
        let tol: Real = get("tol").parse().with_context(|| format!("`tol`: bad number `{}`", get("tol")))?;
        if !(tol > 0.0) {
            bail!("`tol` must be positive");
        }
        let max_iters: usize = get("max_iters")
            .parse()
            .with_context(|| format!("`max_iters`: bad count `{}`", get("max_iters")))?;
        let load_points = match get("load_points") {
            "auto" => None,
            t => Some(t.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| anyhow!("`load_points`: expected auto or a positive count, got `{t}`"))?),
        };
        let gnuplot = match get("gnuplot") {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            other => bail!("`gnuplot`: expected true or false, got `{other}`"),
        };
        let seed: u64 = match raw.get("seed") {
            Some(v) => v.parse().with_context(|| format!("`seed`: bad value `{v}`"))?,
            None => 1,
        };
        Ok(Self {
            command,
            mu,
            lambda,
            c,
            gamma,
            meshes,
            levels,
            schemes,
            settings: SolverSettings { tau, tol, max_iters, load_points },
            gnuplot,
            seed,
            raw,
        })
    }

    pub fn from_sources(command: Command, file: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut pairs = Vec::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            pairs.extend(parse_pairs(&text).with_context(|| format!("in config {}", path.display()))?);
        }
        for s in sets {
            pairs.push(parse_set(s)?);
        }
        Self::resolve(command, &pairs)
    }

    /// `key = value` lines of every resolved setting, sorted by key.
    pub fn describe(&self) -> Vec<String> {
        let mut lines = vec![format!("family = {}", self.command.name())];
        lines.extend(self.raw.iter().map(|(k, v)| format!("{k} = {v}")));
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
        list.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_per_family() {
        let c = ExperimentConfig::resolve(Command::Convergence, &[]).unwrap();
        assert_eq!((c.mu.clone(), c.c.clone(), c.gamma.clone(), c.levels), (vec![1.0], vec![1.0], vec![1.0], 4));
        assert_eq!(c.schemes.len(), 2);
        assert_eq!(c.settings, SolverSettings::default());
        let l = ExperimentConfig::resolve(Command::Limit, &[]).unwrap();
        assert_eq!(l.c, vec![1.0, 10.0, 100.0, 1000.0, 10000.0]);
        assert_eq!(l.meshes, vec![MeshSource::Structured(16), MeshSource::Unstructured]);
        let w = ExperimentConfig::resolve(Command::WellBalanced, &[]).unwrap();
        assert_eq!(w.gamma, vec![1.0, 1.4]);
    }

    #[test]
    fn overrides_and_lists() {
        let c = ExperimentConfig::resolve(
            Command::Convergence,
            &pairs(&[("mu", "1, 0.01"), ("lambda", "auto,0"), ("c", "100"), ("scheme", "classical"), ("levels", "0"), ("c", "10")]),
        )
        .unwrap();
        assert_eq!(c.mu, vec![1.0, 0.01]);
        assert_eq!(c.lambda, vec![None, Some(0.0)]);
        assert_eq!(c.c, vec![10.0]);
        assert_eq!(c.schemes, vec![Scheme::Classical]);
        assert_eq!(c.levels, 0);
        assert!(c.describe().contains(&"c = 10".to_string()));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            ("nope", "1"),
            ("mu", "x"),
            ("scheme", "fast"),
            ("mesh", "hex:4"),
            ("tau", "-1"),
            ("family", "limit"),
            ("reconstruction", "identity"),
            ("gnuplot", "maybe"),
            ("c", "inf"),
        ] {
            assert!(ExperimentConfig::resolve(Command::Convergence, &pairs(&[bad])).is_err(), "{bad:?}");
        }
        assert!(ExperimentConfig::resolve(Command::Limit, &pairs(&[("mu", "2")])).is_err());
    }

    #[test]
    fn config_file_syntax() {
        let p = parse_pairs("# comment\nmu = 1 # trailing\n\nc=2\n").unwrap();
        assert_eq!(p, pairs(&[("mu", "1"), ("c", "2")]));
        assert!(parse_pairs("mu 1").is_err());
        assert!(parse_set("levels").is_err());
    }
}
