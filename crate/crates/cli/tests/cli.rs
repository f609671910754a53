use std::path::Path;
use std::process::{Command, Output};

fn grstokes(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grstokes"))
        .args(args)
        .current_dir(dir)
        .env("GRSTOKES_THREADS", "2")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect())
        .unwrap_or_default();
    names.sort();
    names
}

#[test]
fn zero_levels_writes_nothing_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in ["convergence", "wellbalanced", "limit"] {
        let out = grstokes(&[sub, "--levels", "0", "--out", "o"], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(csv_files(&tmp.path().join("o")).is_empty());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("wb.cfg"),
        "# small well-balanced sweep\nmesh = structured:4, jittered:4:0.2:9\nlevels = 2\ngamma = 1, 1.4\n",
    )
    .unwrap();
    let run = |out: &str| {
        let o = grstokes(&["wellbalanced", "--config", "wb.cfg", "--out", out], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a");
    run("b");
    let (a, b) = (csv_files(&tmp.path().join("a")), csv_files(&tmp.path().join("b")));
    assert_eq!(a.len(), 8);
    assert_eq!(a, b);
    for name in &a {
        let x = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let y = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let text = std::fs::read_to_string(tmp.path().join("a/wellbalanced_jittered4_c1_gamma1.4_modified.csv")).unwrap();
    assert!(text.starts_with("# family = wellbalanced\n"));
    assert!(text.contains("# mesh = structured:4, jittered:4:0.2:9\n"));
    assert!(text.contains("ndof,L2u,rateL2u,H1u,rateH1u,L2rho,rateL2rho,iters,converged,scheme\n"));
    // no leftover temporaries from the atomic writes
    assert!(a.iter().all(|n| !n.ends_with(".tmp")));
}

#[test]
fn non_convergence_exits_2_but_writes_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = grstokes(
        &["convergence", "--levels", "2", "--scheme", "modified", "--set", "max_iters=2", "--set", "mesh=structured:3", "--out", "o"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let files = csv_files(&tmp.path().join("o"));
    assert_eq!(files, vec!["convergence_structured3_mu1_lambdaauto_c1_gamma1_modified.csv".to_string()]);
    let text = std::fs::read_to_string(tmp.path().join("o").join(&files[0])).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",false,modified")).count(), 2);
}

#[test]
fn config_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["convergence", "--set", "colour=blue"],
        vec!["convergence", "--set", "c=0.25"],
        vec!["limit", "--set", "mu=2"],
        vec!["convergence", "--scheme", "fancy"],
        vec!["convergence", "--config", "missing.cfg"],
        vec!["wellbalanced", "--set", "mesh=file:nowhere.msh"],
    ] {
        let out = grstokes(&args, tmp.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn bad_thread_cap_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_grstokes"))
        .args(["check", "--out", "o"])
        .current_dir(tmp.path())
        .env("GRSTOKES_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_subcommand_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = grstokes(&["check", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(tmp.path().join("o/check.txt")).unwrap();
    let lines: Vec<&str> = report.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 16);
    assert!(lines.iter().all(|l| l.starts_with("PASS ")));
}

#[test]
fn limit_table_from_mesh_file() {
    let tmp = tempfile::tempdir().unwrap();
    let mesh = "# 3x3 grid on the unit square\n\
                16 18\n";
    let mut text = mesh.to_string();
    for j in 0..4 {
        for i in 0..4 {
            text.push_str(&format!("{} {}\n", i as f64 / 3.0, j as f64 / 3.0));
        }
    }
    for j in 0..3 {
        for i in 0..3 {
            let v = j * 4 + i;
            text.push_str(&format!("{} {} {}\n{} {} {}\n", v, v + 1, v + 5, v, v + 5, v + 4));
        }
    }
    std::fs::write(tmp.path().join("grid.msh"), text).unwrap();
    let out = grstokes(
        &["limit", "--set", "mesh=file:grid.msh", "--set", "c=1,10", "--scheme", "modified", "--out", "o"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(tmp.path().join("o/limit_file-grid_level0_gamma2_modified.csv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "c,ndof,H1u,L2u,L2rho,iters,converged,scheme");
    assert_eq!(rows.len(), 3);
    // structured grid: the modified scheme is exact for this family
    for r in &rows[1..] {
        let h1: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert!(h1 < 1e-9, "{r}");
    }
}
