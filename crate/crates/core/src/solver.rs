//! Witness set bootstrap by a total-degree homotopy.
//!
//! The square system `F` is connected to the start system
//! `G_i(x) = x_i^{d_i} − c_i` through `H(x, t) = (1−t)·γ·G(x) + t·F(x)` with
//! a random unit-modulus `γ`, and each of the `Π d_i` start roots is tracked
//! to `t = 1` with a tangent predictor.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::polysys::{self, PolySystem, RestrictedSystem};
use crate::rng;
use crate::tracker::{self, Homotopy, PathStats, Predictor, TrackerConfig};
use crate::witness::{self, ExtrinsicPlane, WitnessSet};

/// Endpoints farther out than this are paths to infinity.
pub const DIVERGENT_NORM: f64 = 1e8;
/// Residual bound on the original system for accepted witness points.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// `x_i^{d_i} − c_i = 0`, whose `Π d_i` roots are known in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct StartSystem {
    degrees: Vec<u32>,
    constants: ComplexVector,
}

impl StartSystem {
    pub fn new(degrees: Vec<u32>, constants: ComplexVector) -> Result<Self> {
        if degrees.len() != constants.len() {
            return Err(Error::Dimension {
                context: "start system constants",
                expected: degrees.len(),
                got: constants.len(),
            });
        }
        if let Some(i) = degrees.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!("equation {i} is constant")));
        }
        Ok(StartSystem { degrees, constants })
    }

    /// Degrees of `f` and seeded unit-circle constants.
    pub fn for_system(f: &PolySystem, seed: u64) -> Result<Self> {
        let mut r = rng::seeded(seed);
        let constants = rng::unit_circle_vec(&mut r, f.n());
        StartSystem::new(f.degrees(), constants)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Number of start roots; saturates instead of overflowing.
    pub fn root_count(&self) -> usize {
        self.degrees
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .unwrap_or(usize::MAX)
    }

    /// Root number `index`, read as a mixed-radix digit string.
    pub fn root(&self, index: usize) -> ComplexVector {
        let mut rest = index;
        self.degrees
            .iter()
            .zip(&self.constants)
            .map(|(&d, &c)| {
                let j = rest % d as usize;
                rest /= d as usize;
                let modulus = c.norm().powf(1.0 / d as f64);
                let angle = (c.arg() + std::f64::consts::TAU * j as f64) / d as f64;
                Complex64::from_polar(modulus, angle)
            })
            .collect()
    }

    pub fn eval_jac(&self, x: &[Complex64]) -> (ComplexVector, ComplexMatrix) {
        let n = self.degrees.len();
        let mut v = Vec::with_capacity(n);
        let mut j = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            let d = self.degrees[i] as i32;
            let lower = x[i].powi(d - 1);
            v.push(lower * x[i] - self.constants[i]);
            j[(i, i)] = lower * d as f64;
        }
        (v, j)
    }
}

/// `(1−t)·γ·G(x) + t·F(x)`.
pub struct TotalDegreeHomotopy<'a> {
    target: &'a PolySystem,
    start: StartSystem,
    gamma: Complex64,
}

impl<'a> TotalDegreeHomotopy<'a> {
    pub fn new(target: &'a PolySystem, seed: u64) -> Result<Self> {
        if target.m() != target.n() {
            return Err(Error::invalid(format!(
                "total-degree homotopy needs a square system, got {} equations in {} variables",
                target.m(),
                target.n()
            )));
        }
        let start = StartSystem::for_system(target, rng::derive_seed(seed, 0))?;
        let gamma = rng::unit_circle(&mut rng::seeded(rng::derive_seed(seed, 1)));
        Ok(TotalDegreeHomotopy { target, start, gamma })
    }

    pub fn start(&self) -> &StartSystem {
        &self.start
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }
}

impl Homotopy for TotalDegreeHomotopy<'_> {
    fn dim(&self) -> usize {
        self.target.n()
    }

    fn eval_jac(&self, x: &[Complex64], t: f64) -> Result<(ComplexVector, ComplexMatrix)> {
        let (g, gj) = self.start.eval_jac(x);
        let (f, fj) = self.target.evaluate_with_jacobian(x)?;
        let a = self.gamma * (1.0 - t);
        let b = Complex64::new(t, 0.0);
        let v = g.iter().zip(&f).map(|(g, f)| a * g + b * f).collect();
        Ok((v, gj.lincomb(a, &fj, b)))
    }

    /// Endpoints can be far from the unit ball, where an absolute residual
    /// bound is below rounding level.
    fn step_tolerance(&self, eps: f64) -> Option<f64> {
        Some(eps)
    }

    fn dt(&self, x: &[Complex64], _t: f64) -> Result<ComplexVector> {
        let (g, _) = self.start.eval_jac(x);
        let f = self.target.evaluate(x)?;
        Ok(g.iter().zip(&f).map(|(g, f)| f - self.gamma * g).collect())
    }
}

/// Endpoints of a total-degree run, in start-root order.
#[derive(Debug, Default)]
pub struct SolveReport {
    /// Finite endpoints with the index of the start root they came from.
    pub solutions: Vec<(usize, ComplexVector)>,
    /// Paths that diverged or failed, with a reason.
    pub failures: Vec<(usize, String)>,
    pub stats: Vec<PathStats>,
    pub paths: usize,
}

impl SolveReport {
    pub fn points(&self) -> Vec<ComplexVector> {
        self.solutions.iter().map(|(_, x)| x.clone()).collect()
    }
}

/// Start roots beyond this count are refused rather than tracked.
pub const MAX_PATHS: usize = 1 << 24;

/// Total-degree runs with a fresh gamma after a run loses paths or repeats
/// endpoints; their points are merged into the first run's.
pub const EXTRA_RUNS: u64 = 2;

/// Tracks every start root of the total-degree homotopy for `f` to `t = 1`.
///
/// Paths that end on top of each other are tracked again with a finer
/// initial step, since coinciding endpoints of a generic homotopy signal a
/// path jump.
pub fn total_degree_solve(f: &PolySystem, seed: u64, cfg: &TrackerConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let homotopy = TotalDegreeHomotopy::new(f, seed)?;
    let paths = homotopy.start().root_count();
    if paths > MAX_PATHS {
        return Err(Error::invalid(format!("{paths} start roots exceed the limit of {MAX_PATHS}")));
    }
    let track = |i: usize, cfg: &TrackerConfig| {
        tracker::track_homotopy(&homotopy, &homotopy.start().root(i), cfg, Predictor::Tangent)
    };
    let mut results: Vec<tracker::PathResult> = (0..paths).into_par_iter().map(|i| track(i, cfg)).collect();

    let fine = TrackerConfig {
        h0: cfg.h0 / 8.0,
        ..cfg.clone()
    };
    for _ in 0..2 {
        let suspects = tracker::coinciding_endpoints(&results);
        if suspects.is_empty() {
            break;
        }
        let redone: Vec<_> = suspects.par_iter().map(|&i| track(i, &fine)).collect();
        for (i, r) in suspects.into_iter().zip(redone) {
            results[i] = r;
        }
    }

    let mut report = SolveReport {
        paths,
        ..Default::default()
    };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((x, stats)) => {
                report.stats.push(stats);
                if linalg::norm(&x) > DIVERGENT_NORM || !linalg::is_finite(&x) {
                    report.failures.push((i, "diverged".to_string()));
                } else {
                    report.solutions.push((i, x));
                }
            }
            Err(failure) => {
                report.failures.push((i, failure.error.to_string()));
                report.stats.push(failure.stats);
            }
        }
    }
    Ok(report)
}

/// A witness set together with how it was obtained.
#[derive(Debug)]
pub struct WitnessReport {
    pub witness: WitnessSet,
    /// Paths tracked over all runs.
    pub paths: usize,
    /// Failed paths of the last run.
    pub failures: Vec<(usize, String)>,
    /// Finite endpoints dropped because they do not satisfy the original system.
    pub rejected: usize,
    /// Repeated endpoints within the first run.
    pub duplicates: usize,
}

/// Witness set for the `(n − k)`-dimensional solution set of `f`.
pub fn witness_generate(f: &PolySystem, k: usize, seed: u64, cfg: &TrackerConfig) -> Result<WitnessSet> {
    witness_generate_report(f, k, seed, cfg).map(|r| r.witness)
}

/// [`witness_generate`] with the path report.
pub fn witness_generate_report(f: &PolySystem, k: usize, seed: u64, cfg: &TrackerConfig) -> Result<WitnessReport> {
    let n = f.n();
    if k < 1 || k > n {
        return Err(Error::invalid(format!(
            "codimension must satisfy 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let squared = polysys::square_system(f, k, rng::derive_seed(seed, 1))?;
    let slice = ExtrinsicPlane::random(n, k, rng::derive_seed(seed, 2))?;
    let plane = witness::extrinsic_to_intrinsic(&slice)?;
    let embedded = if k == n {
        squared.clone()
    } else {
        squared.stacked(&slice.to_system()?)?
    };
    let mut points: Vec<ComplexVector> = Vec::new();
    let mut rejected = 0;
    let mut duplicates = 0;
    let mut paths = 0;
    let mut failures = Vec::new();
    for attempt in 0..=EXTRA_RUNS {
        let solved = total_degree_solve(&embedded, rng::derive_seed(seed, 3 + attempt), cfg)?;
        paths += solved.paths;
        failures = solved.failures;
        let mut mine: Vec<ComplexVector> = Vec::new();
        let mut repeated = 0;
        for (_, x) in &solved.solutions {
            let Some(z) = polish(&squared, x, &plane, cfg) else {
                rejected += 1;
                continue;
            };
            let residual = linalg::norm(&f.evaluate(&z)?);
            if !(residual <= MEMBERSHIP_TOL || f.backward_error(&z)? <= witness::BACKWARD_TOL) {
                rejected += 1;
                continue;
            }
            if mine.iter().any(|p| linalg::distance(p, &z) <= witness::DISTINCT_TOL) {
                repeated += 1;
                continue;
            }
            mine.push(z);
        }
        for z in mine {
            if !points.iter().any(|p| linalg::distance(p, &z) <= witness::DISTINCT_TOL) {
                points.push(z);
            }
        }
        if attempt == 0 {
            duplicates = repeated;
        }
        if failures.is_empty() && repeated == 0 {
            break;
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyWitness);
    }
    let witness = WitnessSet::new(squared, plane, points)?;
    Ok(WitnessReport {
        witness,
        paths,
        failures,
        rejected,
        duplicates,
    })
}

/// Projects `x` onto the plane and refines it by Newton in the plane's
/// directions anchored at the projection.
fn polish(g: &PolySystem, x: &[Complex64], plane: &witness::AffinePlane, cfg: &TrackerConfig) -> Option<ComplexVector> {
    let r = plane.perpendicular_component(x);
    let on_plane = linalg::sub(x, &r);
    let restricted = RestrictedSystem::with_basis(g, on_plane, plane.basis().clone()).ok()?;
    let out = tracker::newton_correct(&restricted, cfg.eps, cfg.max_newton).ok()?;
    let z = restricted.point(&out.xi);
    Some(z)
}
