use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use witsamp_core::conditioning::{self, ConditionReport, ConditionRow, LocalShift, Regime};
use witsamp_core::tracker::{self, MoveReport};
use witsamp_core::{polysys, rng, solver, AffinePlane, Error, PathStats, PolySystem, TrackerConfig, TrackingMode, WitnessSet};

use crate::failure::{Failure, Outcome};
use crate::manifest::RunManifest;
use crate::{CompareArgs, ConditionArgs, SampleArgs, SystemKind, TrackerArgs, WitnessArgs};

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load_system(path: &Path) -> Outcome<PolySystem> {
    PolySystem::from_text(&read(path)?).map_err(|e| Failure::from(e).context(format!("reading {}", path.display())))
}

fn load_witness(path: &Path) -> Outcome<WitnessSet> {
    WitnessSet::from_text(&read(path)?).map_err(|e| Failure::from(e).context(format!("reading {}", path.display())))
}

/// Summaries go to stdout unless stdout carries the data.
fn say(data_on_stdout: bool, line: &str) {
    if data_on_stdout {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn tracker_config(a: &TrackerArgs) -> Outcome<TrackerConfig> {
    let cfg = TrackerConfig {
        h0: a.h,
        eps: a.eps,
        delta: a.delta,
        rho: a.rho,
        ..TrackerConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn with_tracker_flags(m: RunManifest, a: &TrackerArgs) -> RunManifest {
    m.flag("h", a.h).flag("eps", format!("{:e}", a.eps)).flag("delta", a.delta).flag("rho", a.rho)
}

pub fn generate(kind: SystemKind) -> Outcome {
    let (f, manifest, out, expected) = match kind {
        SystemKind::Minors { cols, out } => {
            let m = RunManifest::new("generate minors").flag("cols", cols).path_flag("out", &out);
            (polysys::adjacent_minors(cols)?, m, out, Some(polysys::adjacent_minors_degree(cols)))
        }
        SystemKind::Cyclic { n, out } => {
            let m = RunManifest::new("generate cyclic").flag("n", n).path_flag("out", &out);
            (polysys::cyclic_roots(n)?, m, out, None)
        }
        SystemKind::Hypersurface { n, d, t, seed, out } => {
            let m = RunManifest::new("generate hypersurface")
                .flag("n", n)
                .flag("d", d)
                .flag("t", t)
                .flag("seed", seed)
                .path_flag("out", &out);
            (polysys::random_sparse_hypersurface(n, d, t, seed)?, m, out, None)
        }
    };
    manifest.emit(out.as_deref(), &f.to_text())?;
    let mut line = format!("n {} m {}", f.n(), f.m());
    if let Some(d) = expected {
        let _ = write!(line, " expected witness degree {d}");
    }
    say(out.is_none(), &line);
    Ok(())
}

pub fn witness(a: WitnessArgs) -> Outcome {
    let f = load_system(&a.system)?;
    let mut manifest = RunManifest::new("witness")
        .flag("system", a.system.display())
        .flag("codim", a.codim)
        .flag("seed", a.seed)
        .path_flag("out", &a.out);
    let report = solver::witness_generate_report(&f, a.codim, a.seed, &TrackerConfig::default())?;
    let w = &report.witness;
    manifest.note(format!(
        "{} paths, {} failed, {} rejected, {} duplicates",
        report.paths,
        report.failures.len(),
        report.rejected,
        report.duplicates
    ));
    manifest.emit(a.out.as_deref(), &w.to_text())?;
    let quiet = a.out.is_none();
    say(quiet, &format!("degree {}", w.degree()));
    say(
        quiet,
        &format!(
            "paths {} failures {} rejected {} duplicates {}",
            report.paths,
            report.failures.len(),
            report.rejected,
            report.duplicates
        ),
    );
    for (i, why) in &report.failures {
        say(quiet, &format!("path {i}: {why}"));
    }
    Ok(())
}

fn stats_csv(w0: &WitnessSet, target: &AffinePlane, report: &MoveReport) -> String {
    let mut out = String::from("path,newton_iters,steps,rejected,final_residual,kappa_B,kappa_E\n");
    let f = w0.system();
    for (i, r) in report.results.iter().enumerate() {
        let (stats, kappas) = match r {
            Ok((z, s)) => {
                let kb = conditioning::intrinsic_condition(f, z, target.basis()).unwrap_or(f64::NAN);
                let ke = conditioning::extrinsic_condition(f, z, target).unwrap_or(f64::NAN);
                (s, (kb, ke))
            }
            Err(e) => (&e.stats, (f64::NAN, f64::NAN)),
        };
        let _ = writeln!(
            out,
            "{i},{},{},{},{:.6e},{:.6e},{:.6e}",
            stats.newton_iterations, stats.steps_taken, stats.steps_rejected, stats.final_residual, kappas.0, kappas.1
        );
    }
    out
}

fn describe_failures(report: &MoveReport) -> Vec<String> {
    let mut lines: Vec<String> = report
        .results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().err().map(|e| format!("path {i} failed: {}", e.error)))
        .collect();
    let merged = tracker::coinciding_endpoints(&report.results);
    if !merged.is_empty() {
        lines.push(format!("paths {merged:?} end on the same point"));
    }
    lines
}

pub fn sample(a: SampleArgs) -> Outcome {
    let cfg = tracker_config(&a.tracker)?;
    let w0 = load_witness(&a.witness)?;
    let manifest = with_tracker_flags(
        RunManifest::new("sample")
            .flag("witness", a.witness.display())
            .flag("seed", a.seed)
            .flag("mode", a.mode),
        &a.tracker,
    )
    .path_flag("out", &a.out)
    .path_flag("stats", &a.stats);
    let target = AffinePlane::random(w0.n(), w0.k(), a.seed)?;
    let report = tracker::track_witness(&w0, &target, &cfg, a.mode);
    let quiet = a.out.is_none();
    if let Some(path) = &a.stats {
        manifest.emit(Some(path), &stats_csv(&w0, &target, &report))?;
    }
    let problems = describe_failures(&report);
    for line in &problems {
        say(quiet, line);
    }
    let stats = report.stats();
    let w1 = report.into_witness(&w0, &target)?;
    manifest.emit(a.out.as_deref(), &w1.to_text())?;
    let iterations: usize = stats.iter().map(|s| s.newton_iterations).sum();
    say(
        quiet,
        &format!(
            "{} paths, all success, mean Newton iterations {:.1}",
            stats.len(),
            iterations as f64 / stats.len().max(1) as f64
        ),
    );
    Ok(())
}

#[derive(Default)]
struct ModeSummary {
    newton: usize,
    steps: usize,
    paths: usize,
    failures: usize,
    seconds: f64,
}

/// Target plane of move `j` in `compare`.
pub fn move_target(w: &WitnessSet, seed: u64, j: usize) -> witsamp_core::Result<AffinePlane> {
    AffinePlane::random(w.n(), w.k(), rng::derive_seed(seed, j as u64))
}

pub fn compare(a: CompareArgs) -> Outcome {
    let cfg = tracker_config(&a.tracker)?;
    let w0 = load_witness(&a.witness)?;
    let mut manifest = with_tracker_flags(
        RunManifest::new("compare")
            .flag("witness", a.witness.display())
            .flag("moves", a.moves)
            .flag("seed", a.seed),
        &a.tracker,
    )
    .path_flag("out", &a.out);
    let quiet = a.out.is_none();
    let mut body = String::from("mode,mean_newton_iters,mean_steps,failures,wall_time\n");
    let mut failed_moves = 0;
    if a.moves > 0 {
        let targets = (0..a.moves).map(|j| move_target(&w0, a.seed, j)).collect::<witsamp_core::Result<Vec<_>>>()?;
        for mode in [TrackingMode::Local, TrackingMode::Global] {
            let mut sum = ModeSummary::default();
            for (j, target) in targets.iter().enumerate() {
                let clock = Instant::now();
                let report = tracker::track_witness(&w0, target, &cfg, mode);
                sum.seconds += clock.elapsed().as_secs_f64();
                let stats: Vec<PathStats> = report.stats();
                sum.newton += stats.iter().map(|s| s.newton_iterations).sum::<usize>();
                sum.steps += stats.iter().map(|s| s.steps_taken).sum::<usize>();
                sum.paths += stats.len();
                let problems = describe_failures(&report);
                sum.failures += report.failed_indices().len() + tracker::coinciding_endpoints(&report.results).len();
                if let Err(e) = report.into_witness(&w0, target) {
                    failed_moves += 1;
                    for line in &problems {
                        say(quiet, &format!("{mode} move {j}: {line}"));
                    }
                    manifest.note(format!("{mode} move {j}: {e}"));
                }
            }
            let paths = sum.paths.max(1) as f64;
            let _ = writeln!(
                body,
                "{mode},{:.3},{:.3},{},{:.6}",
                sum.newton as f64 / paths,
                sum.steps as f64 / paths,
                sum.failures,
                sum.seconds
            );
            say(
                quiet,
                &format!("{mode}: mean Newton iterations {:.1} over {} paths", sum.newton as f64 / paths, sum.paths),
            );
        }
    }
    manifest.emit(a.out.as_deref(), &body)?;
    if failed_moves > 0 {
        return Err(Failure::numerical(format!("{failed_moves} moves did not produce a valid witness set")));
    }
    Ok(())
}

fn geometric_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut log_sum, mut count) = (0.0, 0usize);
    for v in values {
        log_sum += v.ln();
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        (log_sum / count as f64).exp()
    }
}

fn ratios_path(a: &ConditionArgs) -> Option<PathBuf> {
    a.ratios.clone().or_else(|| {
        a.out.as_ref().map(|p| {
            let stem = p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            p.with_file_name(format!("{stem}.ratios.csv"))
        })
    })
}

pub fn condition(a: ConditionArgs) -> Outcome {
    if a.degrees.iter().any(|&d| d == 0) || a.seeds.is_empty() {
        return Err(Failure::usage("degrees must be positive and at least one seed is needed"));
    }
    let ratios_out = ratios_path(&a);
    let degrees_shown = a.degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
    let seeds_shown = a.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
    let mut manifest = RunManifest::new("condition")
        .flag("n", a.n)
        .flag("degrees", degrees_shown)
        .flag("t", a.t)
        .flag("seeds", seeds_shown)
        .flag("measure", a.measure)
        .path_flag("out", &a.out)
        .path_flag("ratios", &ratios_out);
    manifest.note("values are geometric means over the seeds");
    manifest.note("local-shift point z1 = xi1*v with xi1 the smallest nonzero-modulus root of f(v*xi)");

    type Cell = (usize, u64, Result<ConditionRow, Error>, Result<LocalShift, Error>);
    let jobs: Vec<(usize, u64)> = a.degrees.iter().flat_map(|&d| a.seeds.iter().map(move |&s| (d, s))).collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(d, s)| {
            (
                d,
                s,
                conditioning::condition_row(a.n, d, a.t, s, a.measure),
                conditioning::local_shift_experiment(a.n, d, a.t, s, a.measure),
            )
        })
        .collect();

    let mut table = String::from("degree,regime,largest_inv_cond,smallest_inv_cond\n");
    let mut ratios = String::from(
        "degree,offset_largest,offset_smallest,origin_largest,origin_smallest,ratio_smallest,ratio_largest\n",
    );
    for &d in &a.degrees {
        let mut rows: Vec<ConditionRow> = Vec::new();
        let mut shifts: Vec<ConditionReport> = Vec::new();
        for (_, s, row, shift) in cells.iter().filter(|c| c.0 == d) {
            match row {
                Ok(r) => rows.push(*r),
                Err(e) => manifest.note(format!("seed {s}: {e}")),
            }
            match shift {
                Ok(l) => shifts.push(l.report),
                Err(e) => manifest.note(format!("seed {s}, local shift: {e}")),
            }
        }
        let mean = |reports: &[ConditionReport]| {
            (
                geometric_mean(reports.iter().map(|r| r.largest_inverse_cond)),
                geometric_mean(reports.iter().map(|r| r.smallest_inverse_cond)),
            )
        };
        let offset: Vec<ConditionReport> = rows.iter().map(|r| r.offset).collect();
        let origin: Vec<ConditionReport> = rows.iter().map(|r| r.origin).collect();
        let (off, ori, loc) = (mean(&offset), mean(&origin), mean(&shifts));
        for (regime, (hi, lo)) in [(Regime::Offset, off), (Regime::Origin, ori), (Regime::LocalShift, loc)] {
            let _ = writeln!(table, "{d},{regime},{hi:.6e},{lo:.6e}");
        }
        let _ = writeln!(
            ratios,
            "{d},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            off.0,
            off.1,
            ori.0,
            ori.1,
            ori.1 / off.1,
            ori.0 / off.0
        );
    }

    match (&a.out, &ratios_out) {
        (Some(_), Some(r)) => {
            manifest.emit(a.out.as_deref(), &table)?;
            manifest.emit(Some(r), &ratios)?;
            println!("{} degrees, {} seeds", a.degrees.len(), a.seeds.len());
        }
        (None, Some(r)) => {
            manifest.emit(None, &table)?;
            manifest.emit(Some(r), &ratios)?;
        }
        (_, None) => manifest.emit(None, &format!("{table}\n{ratios}"))?,
    }
    Ok(())
}
