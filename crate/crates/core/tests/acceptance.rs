//! Exit criteria. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{binary, bundled, spec_path};
use wellsep::chi::build_chi;
use wellsep::fieldmap::{in_omega, OddMap, DEFAULT_OMEGA_MARGIN};
use wellsep::geometry::{random_point, span_volume, AmbientSpace, SpherePoint};
use wellsep::problem::{ProblemMap, Witness};
use wellsep::separation::{
    label_omega_a, label_omega_b, u_region_contains, LabelerB, WitnessA, WitnessB, DEFAULT_N_EQ,
};
use wellsep::solver::{residual, solve_targets, sweep_cube, Method, OracleGrid, SolveOptions};

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn record(results: &mut Vec<Outcome>, id: u32, name: &'static str, passed: bool, detail: String) {
    println!("[{}] {id}. {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    results.push(Outcome { id, name, passed, detail });
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn oddness(results: &mut Vec<Outcome>) {
    let start = Instant::now();
    let p = bundled("capbump_m2_witness_b");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_f: f64 = 0.0;
    for _ in 0..1000 {
        let v = random_point(&mut rng, p.space);
        let a = p.map.eval(&v);
        let b = p.map.eval(&v.antipode());
        worst_f = worst_f.max(sup(&a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>()));
    }
    let labeler = p.labeler().unwrap();
    let chi = build_chi(&p.map, labeler.as_ref(), &[0.3, -0.2], 5_000, 7).unwrap();
    let mut worst_chi: f64 = 0.0;
    for _ in 0..1000 {
        let v = random_point(&mut rng, p.space);
        worst_chi = worst_chi.max((chi.eval(&v) + chi.eval(&v.antipode())).abs());
    }
    let elapsed = start.elapsed();
    record(
        results,
        1,
        "oddness of f and chi",
        worst_f <= 1e-12 && worst_chi <= 1e-12 && elapsed <= Duration::from_secs(30),
        format!("max|f(v)+f(-v)| = {worst_f:e}, max|chi(v)+chi(-v)| = {worst_chi:e}, {elapsed:.2?}"),
    );
}

fn separation_reproduction(results: &mut Vec<Outcome>) {
    let code = |name: &str| {
        Command::new(binary())
            .arg("check-separation")
            .arg(spec_path(name))
            .output()
            .unwrap()
            .status
            .code()
    };
    let a = code("capbump_m2_witness_a");
    let b = code("capbump_m2_witness_b");
    let broken = code("capbump_m2_broken_witness_b");
    record(
        results,
        2,
        "separation witnesses of the explicit example",
        a == Some(0) && b == Some(0) && broken == Some(1),
        format!("exit codes: witness a {a:?}, witness b {b:?}, broken witness {broken:?}"),
    );
}

/// Random orthogonal change of coordinates applied to the standard witness.
fn rotated_witness(space: AmbientSpace, rng: &mut ChaCha8Rng) -> WitnessB {
    let dim = space.dim();
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < dim {
        let mut c = random_point(rng, space).into_coords();
        for b in &q {
            let p: f64 = c.iter().zip(b).map(|(x, y)| x * y).sum();
            c.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            q.push(c.into_iter().map(|x| x / n).collect());
        }
    }
    let std = WitnessB::standard(space);
    let full = (1usize << space.m()) - 1;
    let mut vs: Vec<Option<SpherePoint>> = vec![None; full + 1];
    for mask in 0..=full {
        if vs[mask].is_some() {
            continue;
        }
        let v = std.get(mask).coords();
        let rotated: Vec<f64> = (0..dim)
            .map(|r| (0..dim).map(|c| q[c][r] * v[c]).sum())
            .collect();
        let p = SpherePoint::new(rotated).unwrap();
        vs[full ^ mask] = Some(p.antipode());
        vs[mask] = Some(p);
    }
    WitnessB::new(space, vs.into_iter().map(Option::unwrap).collect()).unwrap()
}

fn linear_independence(results: &mut Vec<Outcome>) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = f64::INFINITY;
    let mut draws = 0;
    for m in [2usize, 3] {
        let space = AmbientSpace::new(m).unwrap();
        let witnesses = [WitnessB::standard(space), rotated_witness(space, &mut rng)];
        for wit in &witnesses {
            for _ in 0..500 {
                let xs: Vec<SpherePoint> = (1..=m)
                    .map(|i| loop {
                        let x = random_point(&mut rng, space);
                        if u_region_contains(wit, i, &x) {
                            break x;
                        }
                    })
                    .collect();
                worst = worst.min(span_volume(&xs));
                draws += 1;
            }
        }
    }
    record(
        results,
        3,
        "points of the regions U_i are independent",
        worst > 1e-10,
        format!("{draws} draws, min |det(x_1..x_m, n)| = {worst:e}"),
    );
}

fn labeling_coherence(results: &mut Vec<Outcome>) {
    let p = bundled("capbump_m2_witness_b");
    let ProblemMap::Field(fm) = &p.map else { unreachable!() };
    let Some(Witness::B(wb)) = &p.witness else { unreachable!() };
    let wa = WitnessA::new(p.space.basis(0));
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let (mut n, mut antisym_ok, mut products) = (0, true, std::collections::BTreeSet::new());
    while n < 500 {
        let v = random_point(&mut rng, p.space);
        if !in_omega(fm, &v, DEFAULT_OMEGA_MARGIN) {
            continue;
        }
        n += 1;
        let lb = label_omega_b(fm, wb, &v, DEFAULT_N_EQ).unwrap();
        let lb_minus = label_omega_b(fm, wb, &v.antipode(), DEFAULT_N_EQ).unwrap();
        antisym_ok &= lb_minus == -lb;
        let la = label_omega_a(&wa, &v).unwrap();
        products.insert(la.sign() * lb.sign());
    }
    record(
        results,
        4,
        "labels are antisymmetric and agree up to a global sign",
        antisym_ok && products.len() == 1,
        format!("{n} points, antisymmetric = {antisym_ok}, products seen = {products:?}"),
    );
}

fn circle_remark(results: &mut Vec<Outcome>) {
    let start = Instant::now();
    let p = bundled("circle_m1");
    let grid = OracleGrid::new(&p.map, 400).unwrap();
    let max_f = (0..grid.len())
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / grid.len() as f64;
            p.map.eval(&SpherePoint::new(vec![a.cos(), a.sin()]).unwrap())[0]
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut worst: f64 = 0.0;
    for k in 0..21 {
        let t = -1.0 + 0.1 * k as f64;
        worst = worst.max(grid.scan(&p.map, &[t]).unwrap().residual);
    }
    let elapsed = start.elapsed();
    record(
        results,
        5,
        "m = 1 targets by bisection",
        max_f > 1.0 && worst <= 1e-10 && elapsed <= Duration::from_secs(5),
        format!("max f_1 = {max_f}, worst residual over 21 targets = {worst:e}, {elapsed:.2?}"),
    );
}

fn cube_coverage(results: &mut Vec<Outcome>) {
    let start = Instant::now();
    let p = bundled("capbump_m2_witness_a");
    let opts = SolveOptions {
        tol: 0.02,
        margin: 0.05,
        ..p.spec.solver.clone()
    };
    let report = sweep_cube(&p.map, None, 5, &opts).unwrap();
    let grid = OracleGrid::new(&p.map, 400).unwrap();
    let mut worst_gap: f64 = 0.0;
    for row in &report.rows {
        let o = grid.scan(&p.map, &row.target).unwrap();
        worst_gap = worst_gap.max((row.residual - o.residual).abs());
    }
    let elapsed = start.elapsed();
    record(
        results,
        6,
        "cube coverage on a 5x5 grid",
        report.fraction_converged == 1.0
            && report.rows.len() == 25
            && worst_gap <= 0.02
            && elapsed <= Duration::from_secs(300),
        format!(
            "fraction converged = {}, max residual = {:e}, max |solver - oracle| = {worst_gap:e}, {elapsed:.2?}",
            report.fraction_converged, report.max_residual
        ),
    );
}

fn chi_endgame(results: &mut Vec<Outcome>) {
    let p = bundled("capbump_m2_witness_b");
    let ProblemMap::Field(fm) = &p.map else { unreachable!() };
    let Some(Witness::B(wb)) = &p.witness else { unreachable!() };
    let labeler = LabelerB {
        map: fm,
        witness: wb.clone(),
        n_eq: DEFAULT_N_EQ,
    };
    let opts = SolveOptions {
        method: Method::ChiHomotopy,
        tol: 0.02,
        ..SolveOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut triggered, mut ok, mut converged) = (0, true, 0);
    for _ in 0..10 {
        let t: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.8..=0.8)).collect();
        let r = solve_targets(fm, Some(&labeler), &t, &opts).unwrap();
        converged += r.converged as usize;
        if r.converged && r.chi_value.is_some_and(|c| c >= 1.0 - 1e-6) {
            triggered += 1;
            ok &= residual(&fm.eval_f(&r.v_star), &t) <= 0.02;
        }
    }
    record(
        results,
        7,
        "chi endgame: chi = 1 forces f = t",
        ok,
        format!("{converged}/10 converged, {triggered} with chi(v*) >= 1 - 1e-6, all within 0.02 = {ok}"),
    );
}

fn negative_control(results: &mut Vec<Outcome>) {
    let p = bundled("identical_caps_m2");
    let opts = SolveOptions {
        tol: 0.02,
        margin: 0.05,
        ..p.spec.solver.clone()
    };
    let report = sweep_cube(&p.map, None, 5, &opts).unwrap();
    let grid = OracleGrid::new(&p.map, 400).unwrap();
    let mut ok = report.fraction_converged < 1.0;
    let mut detail = format!("fraction converged = {}", report.fraction_converged);
    for corner in [[0.95, -0.95], [-0.95, 0.95]] {
        let row = report.rows.iter().find(|r| r.target == corner).unwrap();
        let o = grid.scan(&p.map, &corner).unwrap();
        ok &= !row.converged && o.residual > opts.tol;
        detail += &format!(
            "; {corner:?}: solver {:.3} (converged {}), oracle {:.3}",
            row.residual, row.converged, o.residual
        );
    }
    record(results, 8, "negative control misses the anti-diagonal corners", ok, detail);
}

fn determinism(results: &mut Vec<Outcome>) {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(binary())
            .args(["sweep-cube", "--grid", "3", "--out"])
            .arg(&out)
            .arg(spec_path("capbump_m2_witness_b"))
            .status()
            .unwrap();
        (status.code(), std::fs::read(out).unwrap())
    };
    let (c1, a) = run("first.csv");
    let (c2, b) = run("second.csv");
    record(
        results,
        9,
        "sweep CSV is byte-identical across runs",
        c1 == Some(0) && c2 == Some(0) && a == b && !a.is_empty(),
        format!("exit codes {c1:?}/{c2:?}, {} bytes, identical = {}", a.len(), a == b),
    );
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    oddness(&mut results);
    separation_reproduction(&mut results);
    linear_independence(&mut results);
    labeling_coherence(&mut results);
    circle_remark(&mut results);
    cube_coverage(&mut results);
    chi_endgame(&mut results);
    negative_control(&mut results);
    determinism(&mut results);
    let failed: Vec<String> = results
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{}. {} ({})", o.id, o.name, o.detail))
        .collect();
    println!("{}/{} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failed criteria: {failed:#?}");
}
