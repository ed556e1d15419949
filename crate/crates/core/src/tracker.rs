//! Path tracking for moving witness points from one slicing plane to another.
//!
//! Two regimes are implemented:
//!
//! * **local intrinsic** ([`track_local`]): each step moves the current point
//!   orthogonally toward the target plane and then corrects with Newton's
//!   method in coordinates `ẑ + Wξ` anchored at the predicted point, so only
//!   the offset point moves. Moving a whole witness set uses the same step
//!   toward a sequence of intermediate planes ([`track_local_path`]).
//! * **global intrinsic** ([`track_global`]): the offset and the basis are
//!   interpolated, `x = (1−t)b + tc + ((1−t)V + tW)ξ`, and `ξ(t)` is
//!   followed in `t` with a zero-order predictor.
//!
//! [`track_homotopy`] is the shared `t`-stepping engine; the total-degree
//! solver uses it with a tangent predictor.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::conditioning;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::polysys::{PolySystem, RestrictedSystem};
use crate::witness::{self, AffinePlane, WitnessSet};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Points farther than this from the origin are treated as diverging.
pub const DIVERGENCE_NORM: f64 = 1e8;
/// Distance below which a point already lies on the target plane.
pub const ON_PLANE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    /// Initial step, as a fraction of the total distance (local) or of `t`.
    pub h0: f64,
    /// Corrector accuracy on the residual norm.
    pub eps: f64,
    /// A priori control threshold on `||f(z + s v)|| / s` beyond its limit
    /// `||f'(z) v||` as `s → 0`.
    pub delta: f64,
    /// Step reduction factor.
    pub rho: f64,
    pub max_newton: usize,
    /// Smallest admissible absolute step.
    pub min_step: f64,
    pub max_steps: usize,
    /// Step growth after a corrector that needed at most two iterations.
    pub expansion: f64,
    /// Record `κ(B)` after every accepted step.
    pub record_condition: bool,
    /// Largest admissible ratio `||Δx_{i+1}|| / ||Δx_i||` between successive
    /// corrector updates; slower contraction rejects the step.
    pub contraction: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            h0: 0.1,
            eps: 1e-10,
            delta: 1.0,
            rho: 0.5,
            max_newton: 6,
            min_step: 1e-8,
            max_steps: 10_000,
            expansion: 1.5,
            record_condition: true,
            contraction: 0.25,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.h0) && self.h0 <= 1.0) {
            return Err(Error::invalid(format!(
                "step size h must lie in (0, 1], got {}",
                self.h0
            )));
        }
        if !positive(self.eps) {
            return Err(Error::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !positive(self.min_step) {
            return Err(Error::invalid("min_step must be positive"));
        }
        if !(self.expansion.is_finite() && self.expansion >= 1.0) {
            return Err(Error::invalid("expansion must be at least 1"));
        }
        if !(self.contraction > 0.0) {
            return Err(Error::invalid(format!("contraction must be positive, got {}", self.contraction)));
        }
        if self.max_newton == 0 || self.max_steps == 0 {
            return Err(Error::invalid("iteration caps must be positive"));
        }
        Ok(())
    }

    /// Same configuration with the a priori control switched off.
    pub fn without_step_control(mut self) -> Self {
        self.delta = f64::INFINITY;
        self
    }
}

/// Per-path counters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathStats {
    /// Newton iterations, including those spent on rejected steps.
    pub newton_iterations: usize,
    pub steps_taken: usize,
    pub steps_rejected: usize,
    pub final_residual: f64,
    /// `κ(B)` at accepted points.
    pub condition_estimates: Vec<f64>,
    /// Residual after each accepted step.
    pub residual_history: Vec<f64>,
    /// Distance to the target plane (local) or `1 − t` (homotopy), starting
    /// with the initial value.
    pub distance_history: Vec<f64>,
    pub success: bool,
}

impl PathStats {
    /// Appends the counters of a later leg of the same path.
    pub fn absorb(&mut self, later: PathStats) {
        self.newton_iterations += later.newton_iterations;
        self.steps_taken += later.steps_taken;
        self.steps_rejected += later.steps_rejected;
        self.final_residual = later.final_residual;
        self.condition_estimates.extend(later.condition_estimates);
        self.residual_history.extend(later.residual_history);
        self.distance_history.extend(later.distance_history);
        self.success = later.success;
    }
}

/// A failed path with whatever was recorded before the failure.
#[derive(Debug)]
pub struct PathFailure {
    pub error: Error,
    pub stats: PathStats,
}

impl fmt::Display for PathFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} steps ({} rejected)",
            self.error, self.stats.steps_taken, self.stats.steps_rejected
        )
    }
}

impl std::error::Error for PathFailure {}

pub type PathResult = std::result::Result<(ComplexVector, PathStats), PathFailure>;

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub xi: ComplexVector,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Residual before the first and after every iteration.
    pub residuals: Vec<f64>,
}

/// Newton's method on a square map given by `eval_jac`, starting at `x0`.
///
/// Stops with `converged` once the residual is at most `eps`, or, when
/// `step_tol` is given, once an update satisfies `||Δx|| ≤ step_tol·(1 + ||x||)`;
/// gives up (without error) after `max_newton` updates, when the residual
/// grows, or when an update is longer than `contraction` times the previous
/// one.
pub fn newton_iterate<F>(
    mut eval_jac: F,
    x0: ComplexVector,
    eps: f64,
    step_tol: Option<f64>,
    max_newton: usize,
    contraction: f64,
) -> Result<NewtonOutcome>
where
    F: FnMut(&[Complex64]) -> Result<(ComplexVector, ComplexMatrix)>,
{
    let mut x = x0;
    let (mut r, mut j) = eval_jac(&x)?;
    let mut res = linalg::norm(&r);
    let mut residuals = vec![res];
    let mut iterations = 0;
    let mut small_step = false;
    let mut last_update = f64::INFINITY;
    loop {
        if res <= eps || small_step {
            return Ok(NewtonOutcome {
                xi: x,
                iterations,
                residual: res,
                converged: true,
                residuals,
            });
        }
        if iterations == max_newton || !res.is_finite() {
            break;
        }
        let rhs: ComplexVector = r.iter().map(|v| -v).collect();
        let dx = linalg::lu_solve(&j, &rhs)?;
        let update = linalg::norm(&dx);
        let tiny = step_tol.is_some_and(|tol| update <= tol * (1.0 + linalg::norm(&x)));
        if update > contraction * last_update && !tiny {
            break;
        }
        last_update = update;
        linalg::axpy(ONE, &dx, &mut x);
        iterations += 1;
        if let Some(tol) = step_tol {
            small_step = update <= tol * (1.0 + linalg::norm(&x));
        }
        let next = eval_jac(&x)?;
        r = next.0;
        j = next.1;
        let new_res = linalg::norm(&r);
        residuals.push(new_res);
        // A growing residual past the first update means we are not in the
        // basin of the path we are following.
        let growing = iterations >= 2 && new_res > res && !small_step;
        res = new_res;
        if growing {
            break;
        }
    }
    Ok(NewtonOutcome {
        xi: x,
        iterations,
        residual: res,
        converged: false,
        residuals,
    })
}

/// Newton's method on `g(ξ) = f(b + Wξ)` from `ξ = 0`.
pub fn newton_correct(g: &RestrictedSystem<'_>, eps: f64, max_newton: usize) -> Result<NewtonOutcome> {
    newton_correct_guarded(g, eps, max_newton, f64::INFINITY)
}

/// [`newton_correct`] that gives up once updates stop contracting by
/// `contraction`.
pub fn newton_correct_guarded(
    g: &RestrictedSystem<'_>,
    eps: f64,
    max_newton: usize,
    contraction: f64,
) -> Result<NewtonOutcome> {
    if g.m() != g.k() {
        return Err(Error::Dimension {
            context: "newton_correct needs a square restricted system",
            expected: g.k(),
            got: g.m(),
        });
    }
    newton_iterate(
        |xi| g.eval_jac(xi),
        vec![Complex64::new(0.0, 0.0); g.k()],
        eps,
        None,
        max_newton,
        contraction,
    )
}

/// Unit vector from `z` toward its orthogonal projection onto `target`, and
/// the distance to it; `None` when `z` already lies on the plane.
pub fn predictor_direction(z: &[Complex64], target: &AffinePlane) -> Option<(ComplexVector, f64)> {
    let r = target.perpendicular_component(z);
    let dist = linalg::norm(&r);
    if !(dist >= ON_PLANE_TOL) {
        return None;
    }
    let v = linalg::scale(&r, Complex64::new(-1.0 / dist, 0.0));
    Some((v, dist))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub step: f64,
    pub evaluations: usize,
}

/// Shrinks `h` by `rho` while `g_at(h)/h > delta`, one evaluation per test.
pub fn apriori_step_control<G>(mut g_at: G, h: f64, delta: f64, rho: f64, min_step: f64) -> Result<StepControl>
where
    G: FnMut(f64) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let mut h = h;
    let mut evaluations = 0;
    loop {
        let y = g_at(h);
        evaluations += 1;
        if !(y / h > delta) {
            return Ok(StepControl { step: h, evaluations });
        }
        if h <= min_step {
            return Err(Error::StepFailure { step: h });
        }
        h *= rho;
    }
}

/// One accepted local step, as seen by an observer.
#[derive(Clone, Copy, Debug)]
pub struct LocalStep<'a> {
    pub start: &'a [Complex64],
    pub predicted: &'a [Complex64],
    pub corrected: &'a [Complex64],
    pub step: f64,
    pub dist_before: f64,
    pub dist_after: f64,
    pub newton_iterations: usize,
}

fn check_square(f: &PolySystem, target: &AffinePlane) -> Result<()> {
    if f.n() != target.n() {
        return Err(Error::Dimension {
            context: "system variables vs plane ambient dimension",
            expected: target.n(),
            got: f.n(),
        });
    }
    if f.m() != target.k() {
        return Err(Error::Dimension {
            context: "equations vs plane dimension",
            expected: target.k(),
            got: f.m(),
        });
    }
    Ok(())
}

fn fail(error: Error, stats: PathStats) -> PathFailure {
    PathFailure { error, stats }
}

fn record_condition(f: &PolySystem, z: &[Complex64], basis: &ComplexMatrix, stats: &mut PathStats) {
    if let Ok(k) = conditioning::intrinsic_condition(f, z, basis) {
        stats.condition_estimates.push(k);
    }
}

/// Moves the witness point `z` onto `target` in local intrinsic coordinates.
pub fn track_local(f: &PolySystem, z: &[Complex64], target: &AffinePlane, cfg: &TrackerConfig) -> PathResult {
    track_local_observed(f, z, target, cfg, |_| {})
}

/// [`track_local`] calling `observe` after every accepted step.
///
/// Steps are absolute lengths `s = min(h·dist₀, dist)` along the unit
/// predictor direction, where `dist₀` is the initial distance, so a move
/// with constant `h` takes `⌈1/h⌉` steps and the last one lands exactly on
/// the plane. The a priori control shrinks `s` while
/// `||f(z + s v)||/s > ||f'(z) v|| + δ`.
pub fn track_local_observed<O>(
    f: &PolySystem,
    z: &[Complex64],
    target: &AffinePlane,
    cfg: &TrackerConfig,
    mut observe: O,
) -> PathResult
where
    O: FnMut(&LocalStep<'_>),
{
    let mut stats = PathStats::default();
    if let Err(e) = cfg.validate().and_then(|_| check_square(f, target)) {
        return Err(fail(e, stats));
    }
    if z.len() != f.n() {
        let e = Error::Dimension {
            context: "start point",
            expected: f.n(),
            got: z.len(),
        };
        return Err(fail(e, stats));
    }
    let basis = target.basis();
    let mut z = z.to_vec();
    let dist0 = target.distance(&z);
    stats.distance_history.push(dist0);
    let mut h = cfg.h0;

    while let Some((v, dist)) = predictor_direction(&z, target) {
        if dist <= cfg.eps {
            break;
        }
        if stats.steps_taken + stats.steps_rejected >= cfg.max_steps {
            let e = Error::Path(format!("exceeded {} steps", cfg.max_steps));
            return Err(fail(e, stats));
        }
        let wanted = (h * dist0).min(dist);
        let s = if wanted < dist || dist > cfg.min_step {
            // δ bounds what the residual gains beyond its first-order part.
            let threshold = match f.jacobian(&z) {
                Ok(j) => cfg.delta + linalg::norm(&j.mul_vec(&v)),
                Err(e) => return Err(fail(e, stats)),
            };
            let control = apriori_step_control(
                |s| {
                    let x = linalg::add(&z, &linalg::scale(&v, Complex64::new(s, 0.0)));
                    f.evaluate(&x).map(|y| linalg::norm(&y)).unwrap_or(f64::INFINITY)
                },
                wanted,
                threshold,
                cfg.rho,
                cfg.min_step,
            );
            match control {
                Ok(c) => c.step,
                Err(e) => return Err(fail(e, stats)),
            }
        } else {
            wanted
        };
        if s < wanted {
            h = s / dist0;
        }

        let predicted = linalg::add(&z, &linalg::scale(&v, Complex64::new(s, 0.0)));
        let g = match RestrictedSystem::with_basis(f, predicted.clone(), basis.clone()) {
            Ok(g) => g,
            Err(e) => return Err(fail(e, stats)),
        };
        let outcome = newton_correct(&g, cfg.eps, cfg.max_newton);
        match outcome {
            Ok(out) if out.converged => {
                stats.newton_iterations += out.iterations;
                stats.steps_taken += 1;
                let corrected = g.point(&out.xi);
                let dist_after = target.distance(&corrected);
                stats.residual_history.push(out.residual);
                stats.distance_history.push(dist_after);
                if cfg.record_condition {
                    record_condition(f, &corrected, basis, &mut stats);
                }
                observe(&LocalStep {
                    start: &z,
                    predicted: &predicted,
                    corrected: &corrected,
                    step: s,
                    dist_before: dist,
                    dist_after,
                    newton_iterations: out.iterations,
                });
                z = corrected;
                if out.iterations <= 2 {
                    h = (h * cfg.expansion).min(cfg.h0);
                }
            }
            other => {
                if let Ok(out) = &other {
                    stats.newton_iterations += out.iterations;
                }
                stats.steps_rejected += 1;
                h *= cfg.rho;
                if h * dist0 < cfg.min_step {
                    let e = Error::StepFailure { step: h * dist0 };
                    return Err(fail(e, stats));
                }
            }
        }
    }

    // Final polish in the target plane's local coordinates.
    let residual = f.evaluate(&z).map(|r| linalg::norm(&r)).unwrap_or(f64::INFINITY);
    if residual > cfg.eps {
        let g = RestrictedSystem::with_basis(f, z.clone(), basis.clone()).map_err(|e| fail(e, stats.clone()))?;
        match newton_correct(&g, cfg.eps, cfg.max_newton) {
            Ok(out) => {
                stats.newton_iterations += out.iterations;
                if !out.converged {
                    stats.final_residual = out.residual;
                    let e = Error::Path(format!("final polish stalled at residual {:e}", out.residual));
                    return Err(fail(e, stats));
                }
                z = g.point(&out.xi);
            }
            Err(e) => return Err(fail(e, stats)),
        }
    }
    stats.final_residual = f.evaluate(&z).map(|r| linalg::norm(&r)).unwrap_or(f64::INFINITY);
    stats.success = true;
    Ok((z, stats))
}

/// A square system `H(x, t) = 0` in `x`, followed from `t = 0` to `t = 1`.
pub trait Homotopy {
    fn dim(&self) -> usize;

    /// `H(x, t)` and `∂H/∂x`.
    fn eval_jac(&self, x: &[Complex64], t: f64) -> Result<(ComplexVector, ComplexMatrix)>;

    /// `∂H/∂t`.
    fn dt(&self, x: &[Complex64], t: f64) -> Result<ComplexVector>;

    /// Relative Newton step size that also counts as convergence; `None`
    /// means only the residual bound does.
    fn step_tolerance(&self, _eps: f64) -> Option<f64> {
        None
    }

    /// Hook to reject a state before correcting at `t`, e.g. a degenerate basis.
    fn check(&self, _t: f64) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predictor {
    /// Keep `x` and only advance `t`.
    Constant,
    /// Euler step along `dx/dt = −H_x⁻¹ H_t`.
    Tangent,
}

/// Follows one path of `h` from `x0` at `t = 0` to `t = 1`.
pub fn track_homotopy<H: Homotopy + ?Sized>(
    h: &H,
    x0: &[Complex64],
    cfg: &TrackerConfig,
    predictor: Predictor,
) -> PathResult {
    let mut stats = PathStats::default();
    if let Err(e) = cfg.validate() {
        return Err(fail(e, stats));
    }
    if x0.len() != h.dim() {
        let e = Error::Dimension {
            context: "homotopy start point",
            expected: h.dim(),
            got: x0.len(),
        };
        return Err(fail(e, stats));
    }
    let mut x = x0.to_vec();
    let mut t = 0.0f64;
    let mut dt = cfg.h0;
    stats.distance_history.push(1.0);

    while t < 1.0 {
        if stats.steps_taken + stats.steps_rejected >= cfg.max_steps {
            let e = Error::Path(format!("exceeded {} steps at t = {t}", cfg.max_steps));
            return Err(fail(e, stats));
        }
        let landing = t + dt >= 1.0;
        let t_next = if landing { 1.0 } else { t + dt };
        let step = t_next - t;

        let predicted = match predictor {
            Predictor::Constant => Ok(x.clone()),
            Predictor::Tangent => tangent(h, &x, t).map(|dx| {
                let mut p = x.clone();
                linalg::axpy(Complex64::new(step, 0.0), &dx, &mut p);
                p
            }),
        };
        let outcome = predicted.and_then(|p| {
            h.check(t_next)?;
            newton_iterate(
                |y| h.eval_jac(y, t_next),
                p,
                cfg.eps,
                h.step_tolerance(cfg.eps),
                cfg.max_newton,
                cfg.contraction,
            )
        });
        match outcome {
            Ok(out) if out.converged => {
                stats.newton_iterations += out.iterations;
                stats.steps_taken += 1;
                stats.residual_history.push(out.residual);
                stats.distance_history.push(1.0 - t_next);
                x = out.xi;
                t = t_next;
                if linalg::norm(&x) > DIVERGENCE_NORM {
                    let e = Error::Path(format!("diverged at t = {t}"));
                    return Err(fail(e, stats));
                }
                if out.iterations <= 2 {
                    dt = (dt * cfg.expansion).min(cfg.h0);
                }
            }
            Ok(out) => {
                stats.newton_iterations += out.iterations;
                stats.steps_rejected += 1;
                dt *= cfg.rho;
            }
            Err(Error::Singular { .. }) => {
                stats.steps_rejected += 1;
                dt *= cfg.rho;
            }
            Err(e) => return Err(fail(e, stats)),
        }
        if dt < cfg.min_step {
            let e = Error::StepFailure { step: dt };
            return Err(fail(e, stats));
        }
    }
    stats.final_residual = h
        .eval_jac(&x, 1.0)
        .map(|(r, _)| linalg::norm(&r))
        .unwrap_or(f64::INFINITY);
    stats.success = true;
    Ok((x, stats))
}

fn tangent<H: Homotopy + ?Sized>(h: &H, x: &[Complex64], t: f64) -> Result<ComplexVector> {
    let (_, jx) = h.eval_jac(x, t)?;
    let ht = h.dt(x, t)?;
    let rhs: ComplexVector = ht.iter().map(|v| -v).collect();
    linalg::lu_solve(&jx, &rhs)
}

/// `f((1−t)b + tc + ((1−t)V + tW)ξ)` in the intrinsic unknowns `ξ`.
pub struct PlaneMove<'a> {
    f: &'a PolySystem,
    source: &'a AffinePlane,
    target: &'a AffinePlane,
}

impl<'a> PlaneMove<'a> {
    pub fn new(f: &'a PolySystem, source: &'a AffinePlane, target: &'a AffinePlane) -> Result<Self> {
        check_square(f, source)?;
        check_square(f, target)?;
        Ok(PlaneMove { f, source, target })
    }

    pub fn offset(&self, t: f64) -> ComplexVector {
        let a = Complex64::new(1.0 - t, 0.0);
        let b = Complex64::new(t, 0.0);
        self.source
            .offset()
            .iter()
            .zip(self.target.offset())
            .map(|(p, q)| a * p + b * q)
            .collect()
    }

    pub fn basis(&self, t: f64) -> ComplexMatrix {
        self.source.basis().lincomb(
            Complex64::new(1.0 - t, 0.0),
            self.target.basis(),
            Complex64::new(t, 0.0),
        )
    }

    pub fn point(&self, xi: &[Complex64], t: f64) -> ComplexVector {
        linalg::add(&self.offset(t), &self.basis(t).mul_vec(xi))
    }
}

impl Homotopy for PlaneMove<'_> {
    fn dim(&self) -> usize {
        self.source.k()
    }

    fn eval_jac(&self, xi: &[Complex64], t: f64) -> Result<(ComplexVector, ComplexMatrix)> {
        let basis = self.basis(t);
        let x = linalg::add(&self.offset(t), &basis.mul_vec(xi));
        let (v, j) = self.f.evaluate_with_jacobian(&x)?;
        Ok((v, j.matmul(&basis)))
    }

    fn dt(&self, xi: &[Complex64], t: f64) -> Result<ComplexVector> {
        let x = self.point(xi, t);
        let db = linalg::sub(self.target.offset(), self.source.offset());
        let dv = self
            .target
            .basis()
            .lincomb(ONE, self.source.basis(), Complex64::new(-1.0, 0.0));
        let dx = linalg::add(&db, &dv.mul_vec(xi));
        Ok(self.f.jacobian(&x)?.mul_vec(&dx))
    }

    fn check(&self, t: f64) -> Result<()> {
        linalg::orthonormalize(&self.basis(t)).map(|_| ())
    }
}

/// Tracks every witness point of `w0` onto `target` with the global
/// intrinsic homotopy; results are in input order.
pub fn track_global(w0: &WitnessSet, target: &AffinePlane, cfg: &TrackerConfig) -> Vec<PathResult> {
    let indices: Vec<usize> = (0..w0.degree()).collect();
    track_global_paths(w0, &indices, target, cfg)
}

fn track_global_paths(w0: &WitnessSet, indices: &[usize], target: &AffinePlane, cfg: &TrackerConfig) -> Vec<PathResult> {
    let f = w0.system();
    let source = w0.plane();
    let homotopy = match PlaneMove::new(f, source, target) {
        Ok(h) => h,
        Err(e) => {
            return indices
                .iter()
                .map(|_| Err(fail(Error::Path(e.to_string()), PathStats::default())))
                .collect()
        }
    };
    indices
        .par_iter()
        .map(|&i| {
            let xi0 = source.intrinsic_coordinates(&w0.points()[i]);
            let (xi, mut stats) = track_homotopy(&homotopy, &xi0, cfg, Predictor::Constant)?;
            let x = target.point(&xi);
            stats.final_residual = f.evaluate(&x).map(|r| linalg::norm(&r)).unwrap_or(f64::INFINITY);
            if cfg.record_condition {
                record_condition(f, &x, target.basis(), &mut stats);
            }
            Ok((x, stats))
        })
        .collect()
}

/// Local intrinsic tracking along the plane path of [`PlaneMove`].
///
/// Each step is one step of [`track_local`] with `h = 1` towards the plane
/// at `t + Δt`: predict by orthogonal projection onto that plane, correct by
/// Newton in its directions. `Δt` is first cut by the a priori control and
/// then follows the feedback of [`track_homotopy`]; a prediction whose
/// residual is below `ρ` times the threshold also lets `Δt` grow. Since every
/// point sees the same planes, distinct start points stay on distinct paths.
pub fn track_local_path(
    f: &PolySystem,
    z: &[Complex64],
    source: &AffinePlane,
    target: &AffinePlane,
    cfg: &TrackerConfig,
) -> PathResult {
    let mut stats = PathStats::default();
    if let Err(e) = cfg.validate().and_then(|_| check_square(f, target)) {
        return Err(fail(e, stats));
    }
    let segment = PlaneMove::new(f, source, target).map_err(|e| fail(e, PathStats::default()))?;
    let mut z = z.to_vec();
    let mut t = 0.0f64;
    let mut dt = cfg.h0;
    stats.distance_history.push(target.distance(&z));

    while t < 1.0 {
        if stats.steps_taken + stats.steps_rejected >= cfg.max_steps {
            let e = Error::Path(format!("exceeded {} steps at t = {t}", cfg.max_steps));
            return Err(fail(e, stats));
        }
        if dt < cfg.min_step {
            return Err(fail(Error::StepFailure { step: dt }, stats));
        }
        let t_next = (t + dt).min(1.0);
        let plane = if t_next >= 1.0 {
            target.clone()
        } else {
            let next = linalg::orthonormalize(&segment.basis(t_next))
                .and_then(|basis| AffinePlane::new(segment.offset(t_next), basis));
            match next {
                Ok(p) => p,
                Err(_) => {
                    stats.steps_rejected += 1;
                    dt *= cfg.rho;
                    continue;
                }
            }
        };
        let mut roomy = false;
        let predicted = match predictor_direction(&z, &plane) {
            Some((v, dist)) => {
                let predicted = linalg::add(&z, &linalg::scale(&v, Complex64::new(dist, 0.0)));
                let threshold = match f.jacobian(&z) {
                    Ok(j) => cfg.delta + linalg::norm(&j.mul_vec(&v)),
                    Err(e) => return Err(fail(e, stats)),
                };
                let y = f.evaluate(&predicted).map(|r| linalg::norm(&r)).unwrap_or(f64::INFINITY);
                if y / dist > threshold {
                    stats.steps_rejected += 1;
                    dt *= cfg.rho;
                    continue;
                }
                roomy = y / dist < cfg.rho * threshold;
                predicted
            }
            None => z.clone(),
        };
        let g = match RestrictedSystem::with_basis(f, predicted, plane.basis().clone()) {
            Ok(g) => g,
            Err(e) => return Err(fail(e, stats)),
        };
        match newton_correct_guarded(&g, cfg.eps, cfg.max_newton, cfg.contraction) {
            Ok(out) if out.converged => {
                stats.newton_iterations += out.iterations;
                stats.steps_taken += 1;
                z = g.point(&out.xi);
                t = t_next;
                stats.residual_history.push(out.residual);
                stats.distance_history.push(target.distance(&z));
                if cfg.record_condition {
                    record_condition(f, &z, plane.basis(), &mut stats);
                }
                if out.iterations <= 2 || roomy {
                    dt = (dt * cfg.expansion).min(cfg.h0);
                }
            }
            Ok(out) => {
                stats.newton_iterations += out.iterations;
                stats.steps_rejected += 1;
                dt *= cfg.rho;
            }
            Err(Error::Singular { .. }) => {
                stats.steps_rejected += 1;
                dt *= cfg.rho;
            }
            Err(e) => return Err(fail(e, stats)),
        }
    }
    stats.final_residual = f.evaluate(&z).map(|r| linalg::norm(&r)).unwrap_or(f64::INFINITY);
    stats.success = true;
    Ok((z, stats))
}

/// Indices of successful paths whose endpoints lie within
/// [`witness::DISTINCT_TOL`] of another endpoint.
pub fn coinciding_endpoints(results: &[PathResult]) -> Vec<usize> {
    let ends: Vec<(usize, &ComplexVector)> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|(x, _)| (i, x)))
        .collect();
    let mut out = Vec::new();
    for a in 0..ends.len() {
        for b in a + 1..ends.len() {
            if linalg::distance(ends[a].1, ends[b].1) <= witness::DISTINCT_TOL {
                out.push(ends[a].0);
                out.push(ends[b].0);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Rounds of re-tracking after endpoints coincide.
pub const RETRACK_ROUNDS: u32 = 4;

/// Coordinates used when moving a witness set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrackingMode {
    Local,
    Global,
}

impl fmt::Display for TrackingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrackingMode::Local => "local",
            TrackingMode::Global => "global",
        })
    }
}

impl FromStr for TrackingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(TrackingMode::Local),
            "global" => Ok(TrackingMode::Global),
            other => Err(Error::invalid(format!(
                "unknown mode `{other}` (expected local or global)"
            ))),
        }
    }
}

/// Outcome of tracking every point of a witness set.
#[derive(Debug)]
pub struct MoveReport {
    pub results: Vec<PathResult>,
    /// Paths tracked again because their first endpoint coincided with
    /// another path's.
    pub retracked: Vec<usize>,
}

impl MoveReport {
    pub fn failed_indices(&self) -> Vec<usize> {
        self.results
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_err())
            .map(|(i, _)| i)
            .collect()
    }

    /// Stats of every path, failed ones included.
    pub fn stats(&self) -> Vec<PathStats> {
        self.results
            .iter()
            .map(|r| match r {
                Ok((_, s)) => s.clone(),
                Err(f) => f.stats.clone(),
            })
            .collect()
    }

    /// The endpoints as a witness set on `target`, or the first reason they
    /// do not form one.
    pub fn into_witness(self, w0: &WitnessSet, target: &AffinePlane) -> Result<WitnessSet> {
        let failed = self.failed_indices();
        if !failed.is_empty() {
            return Err(Error::PathFailures {
                failed: failed.len(),
                total: self.results.len(),
                indices: failed,
            });
        }
        let points: Vec<ComplexVector> = self
            .results
            .into_iter()
            .map(|r| r.map(|(z, _)| z).expect("failures handled above"))
            .collect();
        if let Some((first, second, d)) = witness::closest_pair(&points) {
            if d <= witness::DISTINCT_TOL {
                return Err(Error::PathCrossing { first, second });
            }
        }
        WitnessSet::new(w0.system().clone(), target.clone(), points)
    }
}

/// Tracks every point without assembling a witness set.
///
/// Local mode uses [`track_local_path`], global mode [`track_global`].
/// Paths whose endpoints coincide are tracked again with the initial step
/// divided by 8, then 64, and so on. Iterations of discarded attempts stay in
/// the stats.
pub fn track_witness(w0: &WitnessSet, target: &AffinePlane, cfg: &TrackerConfig, mode: TrackingMode) -> MoveReport {
    let f = w0.system();
    let mut results: Vec<PathResult> = match mode {
        TrackingMode::Local => w0
            .points()
            .par_iter()
            .map(|z| track_local_path(f, z, w0.plane(), target, cfg))
            .collect(),
        TrackingMode::Global => track_global(w0, target, cfg),
    };
    let mut retracked = Vec::new();
    for round in 1..=RETRACK_ROUNDS {
        let suspects = coinciding_endpoints(&results);
        if suspects.is_empty() {
            break;
        }
        let fine = TrackerConfig {
            h0: cfg.h0 / 8f64.powi(round as i32),
            ..cfg.clone()
        };
        let redone: Vec<PathResult> = match mode {
            TrackingMode::Local => suspects
                .par_iter()
                .map(|&i| track_local_path(f, &w0.points()[i], w0.plane(), target, &fine))
                .collect(),
            TrackingMode::Global => track_global_paths(w0, &suspects, target, &fine),
        };
        for (&i, r) in suspects.iter().zip(redone) {
            let earlier = match &results[i] {
                Ok((_, s)) => s.clone(),
                Err(e) => e.stats.clone(),
            };
            results[i] = match r {
                Ok((x, s)) => {
                    let mut total = earlier;
                    total.absorb(s);
                    Ok((x, total))
                }
                Err(PathFailure { error, stats }) => {
                    let mut total = earlier;
                    total.absorb(stats);
                    Err(fail(error, total))
                }
            };
            retracked.push(i);
        }
    }
    retracked.sort_unstable();
    retracked.dedup();
    MoveReport { results, retracked }
}

/// Moves the whole witness set onto `target`.
pub fn move_witness(
    w0: &WitnessSet,
    target: &AffinePlane,
    cfg: &TrackerConfig,
    mode: TrackingMode,
) -> Result<(WitnessSet, Vec<PathStats>)> {
    cfg.validate()?;
    if target.n() != w0.n() || target.k() != w0.k() {
        return Err(Error::invalid(format!(
            "target plane is a {}-plane in C^{}, witness plane is a {}-plane in C^{}",
            target.k(),
            target.n(),
            w0.k(),
            w0.n()
        )));
    }
    let report = track_witness(w0, target, cfg, mode);
    let stats = report.stats();
    let w1 = report.into_witness(w0, target)?;
    Ok((w1, stats))
}
