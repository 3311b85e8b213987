mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::bundled;
use wellsep::chi::build_chi;
use wellsep::fieldmap::OddMap;
use wellsep::geometry::{random_point, AmbientSpace};
use wellsep::problem::{Problem, ProblemMap};
use wellsep::solver::{
    cube_targets, oracle_scan, residual, solve_targets, sweep_cube, Method, OracleGrid, SolveOptions,
};
use wellsep::Error;

fn capbump_m2() -> Problem {
    bundled("capbump_m2_witness_b")
}

#[test]
fn classical_zero_target() {
    let p = capbump_m2();
    let r = solve_targets(&p.map, None, &[0.0, 0.0], &SolveOptions::default()).unwrap();
    assert!(r.converged && r.residual <= 0.02, "{r:?}");
    assert_eq!(r.residual, residual(&r.f_at_v, &r.target));
}

#[test]
fn off_diagonal_target_matches_oracle() {
    let p = capbump_m2();
    let t = [0.5, -0.5];
    let oracle = oracle_scan(&p.map, &t, 400).unwrap();
    assert!(oracle.residual < 0.01, "oracle {}", oracle.residual);
    let r = solve_targets(&p.map, None, &t, &SolveOptions::default()).unwrap();
    assert!(r.converged, "{}", r.residual);
    assert!(r.residual <= oracle.residual + 0.02);
}

#[test]
fn targets_outside_the_cube_are_rejected() {
    let p = capbump_m2();
    let opts = SolveOptions::default();
    assert!(matches!(
        solve_targets(&p.map, None, &[1.5, 0.0], &opts),
        Err(Error::InvalidArgument(_))
    ));
    // Inside [-1, 1] but outside the shrunken cube.
    assert!(solve_targets(&p.map, None, &[0.99, 0.0], &opts).is_err());
    assert!(matches!(
        solve_targets(&p.map, None, &[0.0, 0.0, 0.0], &opts),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn bad_options_are_rejected() {
    let p = capbump_m2();
    for opts in [
        SolveOptions { tol: 0.0, ..Default::default() },
        SolveOptions { margin: 1.0, ..Default::default() },
        SolveOptions { n_starts: 0, ..Default::default() },
    ] {
        assert!(solve_targets(&p.map, None, &[0.0, 0.0], &opts).is_err());
    }
}

#[test]
fn zero_target_oracle_bound() {
    let p = capbump_m2();
    let r = oracle_scan(&p.map, &[0.0, 0.0], 400).unwrap();
    assert!(r.residual <= 0.01, "{}", r.residual);
}

#[test]
fn tiny_oracle_grid_still_answers() {
    let p = capbump_m2();
    let grid = OracleGrid::new(&p.map, 1).unwrap();
    assert_eq!(grid.len(), 2);
    let r = grid.scan(&p.map, &[0.9, -0.9]).unwrap();
    assert!(r.residual.is_finite());
}

#[test]
fn oracle_rejects_three_functions() {
    let p = bundled("capbump_m3_witness_b");
    assert!(matches!(
        oracle_scan(&p.map, &[0.0, 0.0, 0.0], 10),
        Err(Error::UnsupportedDimension(_))
    ));
}

#[test]
fn circle_oracle_bisects_to_machine_precision() {
    let p = bundled("circle_m1");
    for t in [-1.0, -0.3, 0.0, 0.7, 1.0] {
        let r = oracle_scan(&p.map, &[t], 400).unwrap();
        assert!(r.residual <= 1e-10, "t = {t}: {}", r.residual);
    }
}

#[test]
fn antipodal_residual_symmetry() {
    let p = capbump_m2();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let v = random_point(&mut rng, p.space);
        let t: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let neg_t: Vec<f64> = t.iter().map(|x| -x).collect();
        assert_eq!(
            residual(&p.map.eval(&v), &t),
            residual(&p.map.eval(&v.antipode()), &neg_t)
        );
    }
}

#[test]
fn solves_are_deterministic() {
    let p = capbump_m2();
    let labeler = p.labeler().unwrap();
    for method in [Method::Direct, Method::ChiHomotopy] {
        let opts = SolveOptions {
            method,
            seed: 5,
            ..Default::default()
        };
        let a = solve_targets(&p.map, Some(labeler.as_ref()), &[0.3, 0.6], &opts).unwrap();
        let b = solve_targets(&p.map, Some(labeler.as_ref()), &[0.3, 0.6], &opts).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn chi_homotopy_converges_and_prefers_positive_chi() {
    let p = capbump_m2();
    let labeler = p.labeler().unwrap();
    let opts = SolveOptions {
        method: Method::ChiHomotopy,
        ..Default::default()
    };
    for t in [[0.0, 0.0], [0.5, -0.5], [-0.7, 0.2]] {
        let r = solve_targets(&p.map, Some(labeler.as_ref()), &t, &opts).unwrap();
        assert!(r.converged, "{t:?}: {}", r.residual);
        assert!(r.method.starts_with("chi_homotopy"));
        assert!(r.chi_value.unwrap() > 0.0);
    }
}

#[test]
fn chi_homotopy_without_witness_falls_back() {
    let p = capbump_m2();
    let opts = SolveOptions {
        method: Method::ChiHomotopy,
        ..Default::default()
    };
    let r = solve_targets(&p.map, None, &[0.2, 0.2], &opts).unwrap();
    assert_eq!(r.method, "direct");
    assert_eq!(r.warnings.len(), 1);
    assert!(r.converged);
}

#[test]
fn chi_build_needs_interior_targets() {
    let p = capbump_m2();
    let labeler = p.labeler().unwrap();
    let r = build_chi(&p.map, labeler.as_ref(), &[0.0, 0.0], 5_000, 0).unwrap();
    assert!(!r.a_plus().is_empty());
    assert!(build_chi(&p.map, labeler.as_ref(), &[-1.0, 0.0], 5_000, 0).is_err());
}

#[test]
fn small_sweep_at_half_margin() {
    let p = capbump_m2();
    let opts = SolveOptions {
        margin: 0.5,
        ..Default::default()
    };
    let report = sweep_cube(&p.map, None, 2, &opts).unwrap();
    let targets: Vec<&[f64]> = report.targets().collect();
    assert_eq!(
        targets,
        vec![&[-0.5, -0.5][..], &[-0.5, 0.5][..], &[0.5, -0.5][..], &[0.5, 0.5][..]]
    );
    assert_eq!(report.fraction_converged, 1.0);
    let grid = OracleGrid::new(&p.map, 200).unwrap();
    for row in &report.rows {
        assert!(grid.scan(&p.map, &row.target).unwrap().residual <= 0.02);
    }
    assert!(sweep_cube(&p.map, None, 1, &opts).is_err());
}

#[test]
fn cube_targets_are_symmetric() {
    let ts = cube_targets(2, 5, 0.05);
    assert_eq!(ts.len(), 25);
    assert_eq!(ts[0], vec![-0.95, -0.95]);
    assert_eq!(ts[24], vec![0.95, 0.95]);
    for t in &ts {
        let neg: Vec<f64> = t.iter().map(|x| -x).collect();
        assert!(ts.contains(&neg));
    }
    assert_eq!(cube_targets(3, 3, 0.0).len(), 27);
}

#[test]
fn oracle_dominance_on_random_targets() {
    let p = capbump_m2();
    let grid = OracleGrid::new(&p.map, 200).unwrap();
    let opts = SolveOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let t: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.95..=0.95)).collect();
        let r = solve_targets(&p.map, None, &t, &opts).unwrap();
        let o = grid.scan(&p.map, &t).unwrap();
        assert!(r.residual <= o.residual + opts.tol, "{t:?}: {} vs {}", r.residual, o.residual);
    }
}

#[test]
fn separation_violating_system_misses_corners() {
    let p = bundled("identical_caps_m2");
    let report = sweep_cube(&p.map, None, 3, &SolveOptions::default()).unwrap();
    assert!(report.fraction_converged < 1.0);
    let corner = report.rows.iter().find(|r| r.target == [0.95, -0.95]).unwrap();
    assert!(!corner.converged);
    assert!(oracle_scan(&p.map, &[0.95, -0.95], 100).unwrap().residual > 0.9);
    // f_1 = f_2 there, so the diagonal is still reachable.
    let diag = report.rows.iter().find(|r| r.target == [0.0, 0.0]).unwrap();
    assert!(diag.converged);
}

#[test]
fn three_functions_direct_solve() {
    let p = bundled("capbump_m3_witness_b");
    assert_eq!(p.space, AmbientSpace::new(3).unwrap());
    let r = solve_targets(&p.map, None, &[0.3, -0.4, 0.1], &SolveOptions::default()).unwrap();
    assert!(r.converged, "{}", r.residual);
    assert!(matches!(p.map, ProblemMap::Field(_)));
}
