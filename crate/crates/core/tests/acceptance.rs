//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; the process fails if any criterion fails.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use grstokes::analysis::{dyadic_rate, ErrorReport};
use grstokes::checks::{forcing_consistency, run_checks};
use grstokes::experiment::{run_case, Scheme, SolverSettings};
use grstokes::problems::Problem;
use grstokes::Mesh;

type Outcome = Result<String, String>;

fn report(mesh: &Mesh, problem: &Problem, scheme: Scheme) -> Result<ErrorReport, String> {
    run_case(mesh, problem, scheme, &SolverSettings::default())
        .map(|c| c.report)
        .map_err(|e| format!("solver error: {e}"))
}

fn within_time(start: Instant, limit: Duration, summary: String) -> Outcome {
    let took = start.elapsed();
    if took > limit {
        Err(format!("{summary}; took {took:.1?}, limit {limit:?}"))
    } else {
        Ok(format!("{summary}; {took:.1?}"))
    }
}

fn wellbalanced_exactness() -> Outcome {
    let start = Instant::now();
    let mut meshes: Vec<(String, Mesh)> = [8, 16, 32]
        .into_iter()
        .map(|n| (format!("n={n}"), Mesh::structured_unit_square(n)))
        .collect();
    meshes.push(("unstructured".into(), Mesh::sample_unstructured()));
    let (mut worst_l2, mut worst_h1, mut min_classical) = (0.0_f64, 0.0_f64, f64::INFINITY);
    for gamma in [1.0, 1.4] {
        let problem = Problem::wellbalanced(1.0, gamma).map_err(|e| e.to_string())?;
        for (name, mesh) in &meshes {
            let m = report(mesh, &problem, Scheme::MODIFIED)?;
            if m.l2u > 1e-10 || m.h1u > 1e-9 {
                return Err(format!("gamma={gamma} {name}: modified |u|={:.3e} |grad u|={:.3e}", m.l2u, m.h1u));
            }
            if !m.converged || m.iterations != 1 {
                return Err(format!("gamma={gamma} {name}: modified needed {} iterations", m.iterations));
            }
            let c = report(mesh, &problem, Scheme::Classical)?;
            if c.h1u < 1e-4 {
                return Err(format!("gamma={gamma} {name}: classical |grad u|={:.3e} < 1e-4", c.h1u));
            }
            worst_l2 = worst_l2.max(m.l2u);
            worst_h1 = worst_h1.max(m.h1u);
            min_classical = min_classical.min(c.h1u);
        }
    }
    within_time(
        start,
        Duration::from_secs(60),
        format!(
            "modified max |u|={worst_l2:.2e} max |grad u|={worst_h1:.2e}, 1 iteration; classical min |grad u|={min_classical:.2e}"
        ),
    )
}

fn incompressibility_limit() -> Outcome {
    let start = Instant::now();
    let cs = [1.0, 10.0, 100.0, 1000.0];
    let unstructured = Mesh::sample_unstructured();
    let structured = Mesh::structured_unit_square(16);
    let (mut modified, mut classical, mut structured_worst) = (Vec::new(), Vec::new(), 0.0_f64);
    for c in cs {
        let problem = Problem::limit(c, 2.0).map_err(|e| e.to_string())?;
        modified.push(report(&unstructured, &problem, Scheme::MODIFIED)?.h1u);
        classical.push(report(&unstructured, &problem, Scheme::Classical)?.h1u);
        structured_worst = structured_worst.max(report(&structured, &problem, Scheme::MODIFIED)?.h1u);
    }
    let ratios: Vec<f64> = modified.windows(2).map(|w| w[0] / w[1]).collect();
    if let Some(r) = ratios.iter().find(|r| !(8.0..=12.5).contains(*r)) {
        return Err(format!("modified error ratio {r:.3} outside [8, 12.5] (errors {})", sci(&modified)));
    }
    let (lo, hi) = classical.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
    let spread = (hi - lo) / lo;
    if spread > 0.05 {
        return Err(format!("classical errors spread {:.1}% (errors {})", 100.0 * spread, sci(&classical)));
    }
    if structured_worst > 1e-9 {
        return Err(format!("structured modified error {structured_worst:.3e} > 1e-9"));
    }
    within_time(
        start,
        Duration::from_secs(120),
        format!(
            "modified ratios {:.2?}, classical spread {:.2}%, structured modified max {structured_worst:.2e}",
            ratios,
            100.0 * spread
        ),
    )
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

fn check_band(name: &str, rates: &[Option<f64>], lo: f64, hi: f64) -> Result<(), String> {
    for r in rates.iter().skip(1) {
        match r {
            Some(v) if *v >= lo && *v <= hi => {}
            _ => return Err(format!("{name} EOCs {rates:.3?} not all in [{lo}, {hi}]")),
        }
    }
    Ok(())
}

fn fmt_rates(rates: &[Option<f64>]) -> String {
    rates.iter().flatten().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join("/")
}

fn convergence_orders() -> Outcome {
    let start = Instant::now();
    let meshes: Vec<Mesh> = [8, 16, 32, 64].into_iter().map(Mesh::structured_unit_square).collect();
    let run = |c: f64| -> Result<Vec<ErrorReport>, String> {
        let problem = Problem::convergence(1.0, None, c, 1.0).map_err(|e| e.to_string())?;
        meshes.iter().map(|m| report(m, &problem, Scheme::MODIFIED)).collect()
    };
    let col = |rows: &[ErrorReport], pick: fn(&ErrorReport) -> f64| dyadic_rate(&rows.iter().map(pick).collect::<Vec<_>>());

    let rows = run(1.0)?;
    let (rho, l2, h1) = (col(&rows, |r| r.l2rho), col(&rows, |r| r.l2u), col(&rows, |r| r.h1u));
    check_band("c=1 density", &rho, 0.85, 1.15)?;
    check_band("c=1 L2 velocity", &l2, 1.0, f64::INFINITY)?;
    check_band("c=1 H1 velocity", &h1, 0.33, f64::INFINITY)?;
    let rows100 = run(100.0)?;
    let (l2_100, h1_100) = (col(&rows100, |r| r.l2u), col(&rows100, |r| r.h1u));
    check_band("c=100 L2 velocity", &l2_100, 1.7, 2.3)?;
    check_band("c=100 H1 velocity", &h1_100, 0.8, 1.2)?;
    within_time(
        start,
        Duration::from_secs(300),
        format!(
            "c=1 EOC rho {} L2u {} H1u {}; c=100 EOC L2u {} H1u {}",
            fmt_rates(&rho),
            fmt_rates(&l2),
            fmt_rates(&h1),
            fmt_rates(&l2_100),
            fmt_rates(&h1_100)
        ),
    )
}

fn locking_gap() -> Outcome {
    let start = Instant::now();
    let problem = Problem::convergence(1e-2, None, 100.0, 1.0).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for n in [8, 16] {
        let mesh = Mesh::structured_unit_square(n);
        let m = report(&mesh, &problem, Scheme::MODIFIED)?;
        let c = report(&mesh, &problem, Scheme::Classical)?;
        let ratio = c.h1u / m.h1u;
        if ratio < 20.0 {
            return Err(format!("n={n}: classical/modified H1 ratio {ratio:.2} < 20"));
        }
        ratios.push(ratio);
    }
    within_time(start, Duration::from_secs(60), format!("classical/modified H1 ratios {ratios:.1?}"))
}

fn operator_properties() -> Outcome {
    let start = Instant::now();
    let report = run_checks(1).map_err(|e| e.to_string())?;
    if let Some(bad) = report.items.iter().find(|i| !i.passed()) {
        return Err(bad.to_string());
    }
    within_time(start, Duration::from_secs(30), format!("{} properties hold", report.items.len()))
}

fn forcing_self_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (residual, fd_gap) = forcing_consistency(&mut rng, 50).map_err(|e| e.to_string())?;
    if residual > 1e-9 {
        return Err(format!("PDE residual {residual:.3e} > 1e-9"));
    }
    if fd_gap > 1e-6 {
        return Err(format!("AD vs finite differences {fd_gap:.3e} > 1e-6"));
    }
    within_time(
        start,
        Duration::from_secs(10),
        format!("PDE residual {residual:.2e}, AD vs finite differences {fd_gap:.2e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("1 well-balanced exactness", wellbalanced_exactness),
        ("2 incompressibility limit", incompressibility_limit),
        ("3 convergence orders", convergence_orders),
        ("4 locking gap", locking_gap),
        ("5 operator properties", operator_properties),
        ("6 forcing self-consistency", forcing_self_consistency),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(summary) => println!("PASS criterion {name}: {summary}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 6 acceptance criteria passed");
}
