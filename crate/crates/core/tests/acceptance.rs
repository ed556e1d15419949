//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criterion 13 runs only with `--include-ignored`, `--ignored` or
//! `WITSAMP_EXTENDED=1`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use witsamp_core::conditioning::{self, ConditionMeasure, UnivariatePoly};
use witsamp_core::polysys::{self, expand_substitution};
use witsamp_core::tracker::{self, LocalStep};
use witsamp_core::{
    linalg, rng, solver, AffinePlane, ComplexMatrix, Complex64, PathStats, PolySystem, TrackerConfig,
    TrackingMode, WitnessSet,
};

type Check = std::result::Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn minors_witness(cols: usize) -> WitnessSet {
    let f = polysys::adjacent_minors(cols).unwrap();
    solver::witness_generate(&f, cols - 1, cols as u64, &TrackerConfig::default()).unwrap()
}

fn move_target(w: &WitnessSet, cols: usize, j: u64) -> AffinePlane {
    AffinePlane::random(w.n(), w.k(), rng::derive_seed(1000 + cols as u64, j)).unwrap()
}

fn max_residual(f: &PolySystem, points: &[Vec<Complex64>]) -> f64 {
    points
        .iter()
        .map(|z| norm(&f.evaluate(z).unwrap()))
        .fold(0.0, f64::max)
}

fn c1_minors_2x3() -> Check {
    let f = polysys::adjacent_minors(3).unwrap();
    let mut worst = 0.0f64;
    for seed in 1..=3 {
        let w = solver::witness_generate(&f, 2, seed, &TrackerConfig::default()).map_err(|e| e.to_string())?;
        ensure(w.degree() == 4, format!("seed {seed}: degree {}", w.degree()))?;
        worst = worst.max(max_residual(&f, w.points()));
    }
    ensure(worst <= 1e-10, format!("residual {worst:.2e} > 1e-10"))?;
    Ok(format!("degree 4 for seeds 1..=3, max residual {worst:.1e}"))
}

fn c2_minors_degrees() -> Check {
    let mut found = Vec::new();
    for (cols, expected) in [(4usize, 8usize), (5, 16)] {
        let w = minors_witness(cols);
        ensure(w.degree() == expected, format!("2x{cols}: degree {} != {expected}", w.degree()))?;
        found.push(format!("2x{cols}->{}", w.degree()));
    }
    let f = polysys::adjacent_minors(3).unwrap();
    let w = minors_witness(3);
    let plane = w.plane().clone();
    let oracle: Vec<Vec<Complex64>> = quadric_pair_solutions(|a, b| {
        let v = f.evaluate(&plane.point(&[a, b])).unwrap();
        [v[0], v[1]]
    })
    .iter()
    .map(|s| plane.point(s))
    .collect();
    ensure(oracle.len() == w.degree(), "resultant count differs")?;
    let d = assignment_distance(w.points(), &oracle);
    ensure(d <= 1e-8, format!("2x3 vs resultant oracle: {d:.2e}"))?;
    Ok(format!("{}, 2x3 matches resultant oracle to {d:.1e}", found.join(", ")))
}

fn c3_hypersurface_lines() -> Check {
    let mut worst = 0.0f64;
    for d in 2..=8u32 {
        let f = polysys::random_sparse_hypersurface(10, d, 5, d as u64).unwrap();
        let w = solver::witness_generate(&f, 1, 40 + d as u64, &TrackerConfig::default()).map_err(|e| e.to_string())?;
        ensure(w.degree() == d as usize, format!("d = {d}: degree {}", w.degree()))?;
        let b = w.plane().offset().to_vec();
        let v = w.plane().basis().column(0);
        let line = |xi: Complex64| linalg::add(&b, &linalg::scale(&v, xi));
        let p = conditioning::univariate_restrict(&f, &b, &v).map_err(|e| e.to_string())?;
        let oracle: Vec<Vec<Complex64>> = conditioning::aberth_roots(&p)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(line)
            .collect();
        let roots = durand_kerner(&interpolate(|xi| f.evaluate(&line(xi)).unwrap()[0], d as usize, 1.0));
        // interpolation on the unit circle loses digits in proportion to the largest root
        let reach = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let independent: Vec<Vec<Complex64>> = roots.into_iter().map(line).collect();
        let e1 = assignment_distance(w.points(), &oracle);
        let e2 = assignment_distance(w.points(), &independent) / reach;
        ensure(e1 <= 1e-8 && e2 <= 1e-8, format!("d = {d}: distance {e1:.2e}, relative {e2:.2e}"))?;
        worst = worst.max(e1);
    }
    Ok(format!("degrees 2..=8 recovered, max distance to Aberth roots {worst:.1e}"))
}

fn mean_newton(stats: &[PathStats]) -> f64 {
    stats.iter().map(|s| s.newton_iterations as f64).sum::<f64>() / stats.len() as f64
}

fn c4_local_beats_global() -> Check {
    let cfg = TrackerConfig::default();
    let mut parts = Vec::new();
    for cols in 3..=5 {
        let w = minors_witness(cols);
        let (mut local, mut global) = (Vec::new(), Vec::new());
        for j in 0..5 {
            let target = move_target(&w, cols, j);
            for (mode, acc) in [(TrackingMode::Local, &mut local), (TrackingMode::Global, &mut global)] {
                let (_, stats) =
                    tracker::move_witness(&w, &target, &cfg, mode).map_err(|e| format!("2x{cols} {mode} move {j}: {e}"))?;
                acc.extend(stats);
            }
        }
        let (l, g) = (mean_newton(&local), mean_newton(&global));
        let reduction = 1.0 - l / g;
        ensure(l < g && reduction >= 0.10, format!("2x{cols}: local {l:.1} vs global {g:.1}"))?;
        parts.push(format!("2x{cols} {l:.1}/{g:.1}"));
    }
    Ok(format!("mean Newton iterations local/global: {}", parts.join(", ")))
}

fn c5_condition_agreement() -> Check {
    let cfg = TrackerConfig::default();
    let mut count = 0;
    let mut worst = 1.0f64;
    let mut check = |w: &WitnessSet| -> std::result::Result<(), String> {
        for z in w.points() {
            let kb = conditioning::intrinsic_condition(w.system(), z, w.plane().basis()).map_err(|e| e.to_string())?;
            let ka = conditioning::extrinsic_condition(w.system(), z, w.plane()).map_err(|e| e.to_string())?;
            let ratio = kb / ka;
            worst = if (ratio.ln()).abs() > worst.ln().abs() { ratio } else { worst };
            ensure((1e-2..=1e2).contains(&ratio), format!("kappa_B {kb:.3e} vs kappa_A {ka:.3e}"))?;
            count += 1;
        }
        Ok(())
    };
    for cols in 3..=5 {
        let w = minors_witness(cols);
        check(&w)?;
        for j in 0..5 {
            let target = move_target(&w, cols, j);
            for mode in [TrackingMode::Local, TrackingMode::Global] {
                let (moved, _) = tracker::move_witness(&w, &target, &cfg, mode).map_err(|e| e.to_string())?;
                check(&moved)?;
            }
        }
    }
    Ok(format!("{count} witness points, worst kappa_B/kappa_A = {worst:.2}"))
}

fn geometric_mean(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

fn c6_table_trends() -> Check {
    let degrees = [10, 20, 30, 40];
    let seeds = 1..=5u64;
    let mut offset = vec![Vec::new(); degrees.len()];
    let mut origin_min = f64::INFINITY;
    let mut ratio = vec![Vec::new(); degrees.len()];
    for seed in seeds {
        let rows = conditioning::run_condition_experiment(10, &degrees, 5, seed, ConditionMeasure::Balanced)
            .map_err(|e| e.to_string())?;
        for (i, row) in rows.iter().enumerate() {
            offset[i].push(row.offset.smallest_inverse_cond);
            ratio[i].push(row.smallest_ratio());
            origin_min = origin_min.min(row.origin.smallest_inverse_cond);
        }
    }
    let off: Vec<f64> = offset.iter().map(|v| geometric_mean(v)).collect();
    let rat: Vec<f64> = ratio.iter().map(|v| geometric_mean(v)).collect();
    ensure(off[3] * 1e3 <= off[0], format!("offset smallest d=10 {:.2e}, d=40 {:.2e}", off[0], off[3]))?;
    ensure(origin_min > 1e-2, format!("origin smallest {origin_min:.2e}"))?;
    ensure(rat.windows(2).all(|w| w[0] < w[1]), format!("ratios not increasing: {rat:?}"))?;
    Ok(format!(
        "offset smallest {:.1e} -> {:.1e}, origin min {:.2}, ratios {:.1e} {:.1e} {:.1e} {:.1e}",
        off[0], off[3], origin_min, rat[0], rat[1], rat[2], rat[3]
    ))
}

fn c7_local_shift() -> Check {
    let mut at_zero = f64::INFINITY;
    let mut other10 = 0.0f64;
    let mut other30 = 0.0f64;
    for seed in 1..=5u64 {
        for d in [10usize, 30] {
            let s = conditioning::local_shift_experiment(10, d, 5, seed, ConditionMeasure::Balanced)
                .map_err(|e| e.to_string())?;
            at_zero = at_zero.min(s.inverse_at_zero);
            if d == 10 {
                other10 = other10.max(s.smallest_inverse_other);
            } else {
                other30 = other30.max(s.smallest_inverse_other);
            }
        }
    }
    ensure(at_zero >= 0.5, format!("inverse condition at zero {at_zero:.2e}"))?;
    ensure(other10 < 1e-2, format!("d = 10 other roots {other10:.2e}"))?;
    ensure(other30 < 1e-8, format!("d = 30 other roots {other30:.2e}"))?;
    Ok(format!(
        "zero root >= {at_zero:.2}, other roots d=10 <= {other10:.1e}, d=30 <= {other30:.1e}"
    ))
}

fn c8_round_trip() -> Check {
    let cfg = TrackerConfig::default();
    let w = minors_witness(3);
    let mut worst = 0.0f64;
    for mode in [TrackingMode::Local, TrackingMode::Global] {
        for j in 0..3 {
            let target = move_target(&w, 3, 50 + j);
            let (there, _) = tracker::move_witness(&w, &target, &cfg, mode).map_err(|e| e.to_string())?;
            let (back, _) = tracker::move_witness(&there, w.plane(), &cfg, mode).map_err(|e| e.to_string())?;
            let d = assignment_distance(back.points(), w.points());
            ensure(d <= 1e-8, format!("{mode} loop {j}: {d:.2e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("3 loops per mode return the 4 points, max distance {worst:.1e}"))
}

fn c9_residual_law() -> Check {
    let mut points = Vec::new();
    for cols in [3, 4] {
        let w = minors_witness(cols);
        for (i, z) in w.points().iter().enumerate() {
            points.push((w.clone(), z.clone(), move_target(&w, cols, 70 + i as u64)));
        }
    }
    let mut worst = 0.0f64;
    for (w, z, target) in points.iter().take(10) {
        let (v, _) = tracker::predictor_direction(z, target).ok_or("point already on target")?;
        let r = |h: f64| {
            let x = linalg::add(z, &linalg::scale(&v, Complex64::new(h, 0.0)));
            norm(&w.system().evaluate(&x).unwrap()) / h
        };
        let (a, b) = (r(1e-4), r(2e-4));
        let rel = (a - b).abs() / a;
        ensure(rel < 0.25, format!("ratio differs by {rel:.3}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("10 points, max relative change {worst:.1e}"))
}

fn c10_geometry() -> Check {
    let cfg = TrackerConfig::default();
    let (mut par, mut perp, mut steps) = (0.0f64, 0.0f64, 0usize);
    let mut violation: Option<String> = None;
    for cols in 3..=5 {
        let w = minors_witness(cols);
        for j in 0..5 {
            let target = move_target(&w, cols, j);
            let basis = target.basis();
            for z in w.points() {
                let mut last = f64::INFINITY;
                let observer = |s: &LocalStep<'_>| {
                    let pred = linalg::sub(s.predicted, s.start);
                    let corr = linalg::sub(s.corrected, s.predicted);
                    par = par.max(norm(&linalg::project_coordinates(&pred, basis)));
                    perp = perp.max(norm(&linalg::project_perpendicular(&corr, basis)));
                    if !(s.dist_after < s.dist_before && s.dist_before <= last) && violation.is_none() {
                        violation = Some(format!("distance {:.3e} -> {:.3e}", s.dist_before, s.dist_after));
                    }
                    last = s.dist_after;
                    steps += 1;
                };
                tracker::track_local_observed(w.system(), z, &target, &cfg, observer).map_err(|e| e.to_string())?;
            }
        }
    }
    if let Some(v) = violation {
        return Err(v);
    }
    ensure(par <= 1e-12, format!("prediction parallel component {par:.2e}"))?;
    ensure(perp <= 1e-10, format!("correction perpendicular component {perp:.2e}"))?;
    Ok(format!("{steps} steps, parallel {par:.1e}, perpendicular {perp:.1e}"))
}

fn unit_move(w: &WitnessSet, seed: u64) -> AffinePlane {
    let mut r = rng::seeded(seed);
    let raw: Vec<Complex64> = (0..w.n()).map(|_| rng::complex_uniform(&mut r, 1.0)).collect();
    let u = linalg::project_perpendicular(&raw, w.plane().basis());
    let u = linalg::scale(&u, Complex64::new(1.0 / norm(&u), 0.0));
    w.plane().translated(&u)
}

fn c11_step_scaling() -> Check {
    let w = minors_witness(3);
    let target = unit_move(&w, 5);
    let steps = |h0: f64| -> std::result::Result<usize, String> {
        let cfg = TrackerConfig { h0, ..TrackerConfig::default() }.without_step_control();
        let mut total = 0;
        for z in w.points() {
            let (_, stats) = tracker::track_local(w.system(), z, &target, &cfg).map_err(|e| e.error.to_string())?;
            total += stats.steps_taken;
        }
        Ok(total)
    };
    let mut parts = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let (a, b) = (steps(h)?, steps(h / 2.0)?);
        let factor = b as f64 / a as f64;
        ensure((1.5..=3.0).contains(&factor), format!("h = {h}: {a} -> {b} steps"))?;
        parts.push(format!("{a}->{b}"));
    }
    Ok(format!("steps when halving h from 0.2, 0.1, 0.05: {}", parts.join(", ")))
}

fn c12_kernels() -> Check {
    let systems = [
        polysys::adjacent_minors(4).unwrap(),
        polysys::cyclic_roots(6).unwrap(),
        polysys::random_sparse_hypersurface(10, 12, 5, 3).unwrap(),
    ];
    let mut r = rng::seeded(12);
    let mut point = |n: usize| -> Vec<Complex64> { (0..n).map(|_| rng::complex_uniform(&mut r, 1.0)).collect() };
    let mut jac_err = 0.0f64;
    let mut exp_err = 0.0f64;
    for (s, f) in systems.iter().enumerate() {
        let x = point(f.n());
        let j = f.jacobian(&x).map_err(|e| e.to_string())?;
        let fd = finite_difference_jacobian(f, &x, 1e-5);
        for i in 0..f.m() {
            let row_scale = (0..f.n()).map(|k| j[(i, k)].norm()).fold(1e-300, f64::max);
            for k in 0..f.n() {
                jac_err = jac_err.max((j[(i, k)] - fd[i][k]).norm() / row_scale);
            }
        }
        let plane = AffinePlane::random(f.n(), 2, 90 + s as u64).unwrap();
        let expanded = expand_substitution(f, plane.offset(), plane.basis()).map_err(|e| e.to_string())?;
        let xi = point(2);
        let x = plane.point(&xi);
        let direct = f.evaluate(&x).unwrap();
        let via = expanded.evaluate(&xi).unwrap();
        let scale = f.evaluation_scale(&x).unwrap();
        for i in 0..f.m() {
            exp_err = exp_err.max((direct[i] - via[i]).norm() / scale[i]);
        }
    }
    ensure(jac_err <= 1e-6, format!("Jacobian vs finite differences {jac_err:.2e}"))?;
    ensure(exp_err <= 1e-10, format!("expansion vs composition {exp_err:.2e}"))?;

    let mut rm = rng::seeded(13);
    let mut svd_err = 0.0f64;
    for (m, n) in [(3, 3), (6, 6), (10, 10), (5, 3)] {
        let a = ComplexMatrix::random_unit_circle(m, n, &mut rm);
        let (k, ko) = (linalg::condition_number(&a), condition_number(&a));
        svd_err = svd_err.max((k - ko).abs() / ko);
    }
    ensure(svd_err <= 1e-6, format!("condition number vs SVD oracle {svd_err:.2e}"))?;

    let mut eig_err = 0.0f64;
    for seed in 0..5 {
        let mut rp = rng::seeded(500 + seed);
        let mut coeffs = rng::unit_circle_vec(&mut rp, 8);
        coeffs.push(ONE);
        let p = UnivariatePoly::new(coeffs.clone()).unwrap();
        for root in conditioning::aberth_roots(&p).map_err(|e| e.to_string())? {
            let ours = conditioning::root_condition(&p, root).map_err(|e| e.to_string())?;
            let oracle = eigenvalue_condition(&coeffs, root);
            eig_err = eig_err.max((ours - oracle).abs() / oracle);
        }
    }
    ensure(eig_err <= 1e-4, format!("root condition vs inverse iteration {eig_err:.2e}"))?;
    Ok(format!(
        "jacobian {jac_err:.1e}, expansion {exp_err:.1e}, svd {svd_err:.1e}, eigen {eig_err:.1e}"
    ))
}

/// Witness file for the one-dimensional component of cyclic 8-roots.
///
/// Read from `WITSAMP_CYCLIC8_WITNESS` when set, otherwise computed once by
/// the total-degree run and cached under the target directory.
fn cyclic8_witness() -> std::result::Result<WitnessSet, String> {
    if let Ok(path) = std::env::var("WITSAMP_CYCLIC8_WITNESS") {
        return WitnessSet::load(&path).map_err(|e| e.to_string());
    }
    let cache = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("cyclic8.witness");
    if let Ok(w) = WitnessSet::load(&cache) {
        return Ok(w);
    }
    let f = polysys::cyclic_roots(8).unwrap();
    let w = solver::witness_generate(&f, 7, 8, &TrackerConfig::default()).map_err(|e| e.to_string())?;
    w.save(&cache).map_err(|e| e.to_string())?;
    Ok(w)
}

fn c13_cyclic8() -> Check {
    let w = cyclic8_witness()?;
    ensure(w.degree() == 144, format!("witness file holds {} points", w.degree()))?;
    let target = AffinePlane::random(w.n(), w.k(), 2024).unwrap();
    let cfg = TrackerConfig::default();
    let mut parts = Vec::new();
    for mode in [TrackingMode::Local, TrackingMode::Global] {
        let (moved, stats) = tracker::move_witness(&w, &target, &cfg, mode).map_err(|e| format!("{mode}: {e}"))?;
        moved.validate().map_err(|e| e.to_string())?;
        ensure(moved.degree() == 144, format!("{mode}: {} points", moved.degree()))?;
        parts.push(format!("{mode} {:.1}", mean_newton(&stats)));
    }
    Ok(format!("144 points preserved, mean Newton iterations {}", parts.join(", ")))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let extended = args.iter().any(|a| a == "--include-ignored" || a == "--ignored")
        || std::env::var("WITSAMP_EXTENDED").is_ok_and(|v| v == "1");
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, name: "witness degree of 2x3 adjacent minors", limit: secs(5), run: c1_minors_2x3 },
        Criterion { id: 2, name: "witness degrees of 2x4 and 2x5 minors", limit: secs(30), run: c2_minors_degrees },
        Criterion { id: 3, name: "hypersurface line sampling", limit: secs(10), run: c3_hypersurface_lines },
        Criterion { id: 4, name: "local intrinsic needs fewer Newton iterations", limit: secs(60), run: c4_local_beats_global },
        Criterion { id: 5, name: "intrinsic and extrinsic conditioning agree", limit: secs(30), run: c5_condition_agreement },
        Criterion { id: 6, name: "offset vs origin conditioning trends", limit: secs(60), run: c6_table_trends },
        Criterion { id: 7, name: "local shift conditioning", limit: secs(30), run: c7_local_shift },
        Criterion { id: 8, name: "monodromy round trip", limit: secs(10), run: c8_round_trip },
        Criterion { id: 9, name: "residual is linear in the step", limit: secs(5), run: c9_residual_law },
        Criterion { id: 10, name: "predictor and corrector geometry", limit: secs(60), run: c10_geometry },
        Criterion { id: 11, name: "step count scales like 1/h", limit: secs(10), run: c11_step_scaling },
        Criterion { id: 12, name: "kernel oracles", limit: secs(30), run: c12_kernels },
        Criterion { id: 13, name: "cyclic 8-roots keeps 144 points", limit: secs(3600), run: c13_cyclic8 },
    ];
    let mut failed = 0;
    for c in &criteria {
        if c.id == 13 && !extended {
            println!("SKIP criterion {:>2}: {} (opt-in, pass --include-ignored)", c.id, c.name);
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {:.1} s, limit {} s", elapsed.as_secs_f64(), c.limit.as_secs()))
            }
        });
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {:>2}: {} [{:.2} s] {}",
                c.id,
                c.name,
                elapsed.as_secs_f64(),
                detail
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "FAIL criterion {:>2}: {} [{:.2} s] {}",
                    c.id,
                    c.name,
                    elapsed.as_secs_f64(),
                    detail
                );
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
