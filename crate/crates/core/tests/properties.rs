use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use grstokes::analysis::{dyadic_rate, error_components};
use grstokes::checks::{density_step_trial, upwind_properties};
use grstokes::experiment::{run_case, Scheme, SolverSettings};
use grstokes::fespace::{pi0_project, BrSpace};
use grstokes::problems::Problem;
use grstokes::reconstruction::{divergence_identity_check, ReconstructionKind, Reconstructor};
use grstokes::{Mesh, Real};

fn jittered(n: usize, seed: u64) -> Mesh {
    Mesh::structured_unit_square(n).jittered(0.3, seed).unwrap()
}

fn shuffled(len: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

fn close(a: Real, b: Real, rel: Real) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(Real::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_step_keeps_sign_and_mass(n in 2usize..7, seed in any::<u64>()) {
        let mesh = jittered(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (min, drift) = density_step_trial(&mut rng, &mesh).unwrap();
        prop_assert!(min >= -1e-14, "min density {min}");
        prop_assert!(drift <= 1e-12, "mass drift {drift}");
    }

    #[test]
    fn upwind_operator_structure(n in 2usize..7, seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let mesh = jittered(n, seed);
        let space = BrSpace::new(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<Real> = (0..space.ndofs()).map(|_| scale * rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let [conservation, consistency, sign] = upwind_properties(&space, &u);
        prop_assert!(conservation <= 1e-13);
        prop_assert!(consistency <= 1e-12);
        prop_assert_eq!(sign, 0.0);
    }

    #[test]
    fn reconstruction_preserves_mean_divergence(n in 2usize..6, seed in any::<u64>(), rt0 in any::<bool>()) {
        let mesh = jittered(n, seed);
        let space = BrSpace::new(&mesh);
        let kind = if rt0 { ReconstructionKind::Rt0 } else { ReconstructionKind::Bdm1 };
        let recon = Reconstructor::new(&space, kind).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let v: Vec<Real> = (0..space.ndofs()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        prop_assert!(divergence_identity_check(&recon, &v).unwrap() <= 1e-12);
    }

    #[test]
    fn error_norms_ignore_triangle_order(n in 2usize..6, seed in any::<u64>()) {
        let mesh = jittered(n, seed);
        let permuted = mesh.permute_triangles(&shuffled(mesh.num_triangles(), seed)).unwrap();
        let problem = Problem::convergence(1.0, None, 1.0, 1.0).unwrap();
        let norms = |m: &Mesh| {
            let space = BrSpace::new(m);
            // a perturbed interpolant so every norm is nonzero
            let u = space.interpolate(|p| {
                let e = problem.velocity(p);
                [e[0] + 0.1 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]), e[1]]
            }).unwrap();
            let rho = pi0_project(m, |p| problem.density(p) + 0.01 * p[0]);
            error_components(&space, &u, &rho, &problem)
        };
        let (a, b) = (norms(&mesh), norms(&permuted));
        prop_assert!(close(a.0, b.0, 1e-13) && close(a.1, b.1, 1e-13) && close(a.2, b.2, 1e-13), "{a:?} vs {b:?}");
    }

    #[test]
    fn dyadic_rate_recovers_powers(e0 in 1e-6f64..1e2, p in 0.25f64..4.0) {
        let errors: Vec<Real> = (0..4).map(|k| e0 * 2f64.powf(-p * k as Real)).collect();
        let rates = dyadic_rate(&errors);
        prop_assert!(rates[0].is_none());
        for r in &rates[1..] {
            prop_assert!((r.unwrap() - p).abs() < 1e-9);
        }
    }
}

#[test]
fn dyadic_rate_skips_bad_entries() {
    let rates = dyadic_rate(&[4e-2, 1e-2, 0.0, 1e-3, f64::NAN]);
    assert_eq!(rates[0], None);
    assert!((rates[1].unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(rates[2], None);
    assert_eq!(rates[3], None);
    assert_eq!(rates[4], None);
}

#[test]
fn refinement_halves_h_and_keeps_area() {
    for mesh in [Mesh::structured_unit_square(3), jittered(4, 7), Mesh::sample_unstructured()] {
        let fine = mesh.uniform_refine();
        assert_eq!(fine.num_triangles(), 4 * mesh.num_triangles());
        assert!((fine.h() - 0.5 * mesh.h()).abs() < 1e-14);
        assert!((fine.total_area() - mesh.total_area()).abs() < 1e-13);
    }
}

#[test]
fn solve_is_independent_of_triangle_order() {
    let mesh = jittered(4, 3);
    let permuted = mesh.permute_triangles(&shuffled(mesh.num_triangles(), 99)).unwrap();
    let problem = Problem::convergence(1.0, None, 1.0, 1.0).unwrap();
    let settings = SolverSettings::default();
    let a = run_case(&mesh, &problem, Scheme::MODIFIED, &settings).unwrap().report;
    let b = run_case(&permuted, &problem, Scheme::MODIFIED, &settings).unwrap().report;
    assert!(a.converged && b.converged);
    assert_eq!(a.ndof, b.ndof);
    for (x, y) in [(a.l2u, b.l2u), (a.h1u, b.h1u), (a.l2rho, b.l2rho)] {
        assert!(close(x, y, 1e-8), "{x} vs {y}");
    }
}

#[test]
fn small_viscosity_high_c_converges() {
    let problem = Problem::convergence(1e-2, None, 100.0, 1.0).unwrap();
    let mesh = Mesh::structured_unit_square(16);
    for scheme in [Scheme::MODIFIED, Scheme::Classical] {
        let report = run_case(&mesh, &problem, scheme, &SolverSettings::default()).unwrap().report;
        assert!(report.converged, "{} stopped after {} iterations", report.scheme, report.iterations);
    }
}

#[test]
fn solver_error_not_far_below_interpolation_error() {
    let problem = Problem::convergence(1.0, None, 1.0, 1.0).unwrap();
    let mesh = Mesh::structured_unit_square(8);
    let space = BrSpace::new(&mesh);
    let u = space.interpolate(|p| problem.velocity(p)).unwrap();
    let rho = pi0_project(&mesh, |p| problem.density(p));
    let (_, h1_interp, _) = error_components(&space, &u, &rho, &problem);
    let report = run_case(&mesh, &problem, Scheme::MODIFIED, &SolverSettings::default()).unwrap().report;
    assert!(report.h1u >= 0.5 * h1_interp, "solver {} vs interpolant {}", report.h1u, h1_interp);
}
