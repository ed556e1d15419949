//! Conditioning of generic points.
//!
//! Two families of measurements live here:
//!
//! * Jacobian condition numbers at a witness point, extrinsic `κ(A)` of the
//!   `n × n` matrix `[f'(z); L]` and local intrinsic `κ(B)` of `f'(z)V`.
//! * Eigenvalue conditioning of the companion matrices of univariate
//!   restrictions `f(b + vξ)`, `f(vξ)` and `f(z₁ + vξ)` of one hypersurface.
//!
//! Companion eigenvalue condition numbers use the closed-form eigenvectors:
//! for monic `p(ξ) = ξ^d + a_{d−1}ξ^{d−1} + … + a_0` with root `λ`, the right
//! eigenvector is `x = (1, λ, …, λ^{d−1})` and the left eigenvector `y` has
//! `y_{d−1} = 1`, `y_{j−1} = λ y_j + a_j` (Horner partial sums), so that
//! `yᵀx = p'(λ)` and `κ(λ) = ||x||·||y|| / |yᵀx|`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::polysys::{self, PolySystem};
use crate::rng;
use crate::witness::{self, AffinePlane};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Leading coefficients below this make a restriction degenerate.
pub const DEGENERATE_LEAD: f64 = 1e-14;
/// Acceptance bound on the scaled residual of an Aberth root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
pub const ABERTH_MAX_ITER: usize = 200;

/// `κ(f'(z)·basis)`, the local intrinsic condition number.
pub fn intrinsic_condition(f: &PolySystem, z: &[Complex64], basis: &ComplexMatrix) -> Result<f64> {
    let b = f.jacobian(z)?.matmul(basis);
    if !b.is_square() {
        return Err(Error::Dimension {
            context: "restricted Jacobian must be square",
            expected: b.cols(),
            got: b.rows(),
        });
    }
    Ok(linalg::condition_number(&b))
}

/// `κ([f'(z); L])` with `L` the orthonormal linear equations of `plane`.
pub fn extrinsic_condition(f: &PolySystem, z: &[Complex64], plane: &AffinePlane) -> Result<f64> {
    let l = witness::intrinsic_to_extrinsic(plane);
    let a = f.jacobian(z)?.vstack(&l.coefficients);
    if !a.is_square() {
        return Err(Error::Dimension {
            context: "extrinsic Jacobian must be square",
            expected: a.cols(),
            got: a.rows(),
        });
    }
    Ok(linalg::condition_number(&a))
}

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariatePoly {
    coefficients: ComplexVector,
    /// Leading coefficient divided out to make the polynomial monic (1 if none).
    divisor: Complex64,
}

impl UnivariatePoly {
    /// Leading (last) coefficient must be nonzero and all entries finite.
    pub fn new(coefficients: ComplexVector) -> Result<Self> {
        match coefficients.last() {
            None => Err(Error::invalid("polynomial needs at least one coefficient")),
            Some(lead) if *lead == ZERO => Err(Error::Degenerate("leading coefficient is zero".into())),
            Some(_) if !linalg::is_finite(&coefficients) => Err(Error::invalid("non-finite coefficient")),
            Some(_) => Ok(UnivariatePoly {
                coefficients,
                divisor: ONE,
            }),
        }
    }

    /// `Π (ξ − r_i)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![ONE];
        for &r in roots {
            let mut next = vec![ZERO; c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            c = next;
        }
        UnivariatePoly {
            coefficients: c,
            divisor: ONE,
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coefficients.last().expect("nonempty")
    }

    pub fn divisor(&self) -> Complex64 {
        self.divisor
    }

    pub fn is_monic(&self) -> bool {
        (self.leading() - ONE).norm() <= 1e-12
    }

    /// Divides by the leading coefficient, accumulating it into `divisor`.
    pub fn to_monic(&self) -> Self {
        let lead = self.leading();
        let mut coefficients: ComplexVector = self.coefficients.iter().map(|c| c / lead).collect();
        *coefficients.last_mut().expect("nonempty") = ONE;
        UnivariatePoly {
            coefficients,
            divisor: self.divisor * lead,
        }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    /// `(p(x), p'(x))` by one Horner pass.
    pub fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coefficients.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    /// `Σ |c_i| |x|^i`, the scale against which `|p(x)|` is rounding error.
    pub fn abs_eval(&self, x: Complex64) -> f64 {
        let r = x.norm();
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// `|p(x)| / max(1 + |x|^d, Σ|c_i||x|^i)`.
    pub fn scaled_residual(&self, x: Complex64) -> f64 {
        let d = self.degree() as i32;
        let scale = (1.0 + x.norm().powi(d)).max(self.abs_eval(x));
        self.eval(x).norm() / scale
    }

    /// Companion matrix with ones on the superdiagonal and `−a_j` in the last row.
    pub fn companion(&self) -> Result<ComplexMatrix> {
        if !self.is_monic() {
            return Err(Error::invalid("companion matrix needs a monic polynomial"));
        }
        let d = self.degree();
        let mut c = ComplexMatrix::zeros(d, d);
        for i in 0..d.saturating_sub(1) {
            c[(i, i + 1)] = ONE;
        }
        for j in 0..d {
            c[(d - 1, j)] = -self.coefficients[j];
        }
        Ok(c)
    }
}

impl fmt::Display for UnivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coefficients.iter().enumerate().rev() {
            if i + 1 < self.coefficients.len() {
                f.write_str(" + ")?;
            }
            write!(f, "({}, {})·ξ^{}", c.re, c.im, i)?;
        }
        Ok(())
    }
}

/// `ξ ↦ f(b + vξ)` as a monic polynomial; the leading coefficient is
/// recorded as the divisor.
pub fn univariate_restrict(f: &PolySystem, b: &[Complex64], v: &[Complex64]) -> Result<UnivariatePoly> {
    if f.m() != 1 {
        return Err(Error::invalid(format!(
            "univariate restriction needs one equation, got {}",
            f.m()
        )));
    }
    if v.len() != f.n() || b.len() != f.n() {
        return Err(Error::Dimension {
            context: "univariate restriction",
            expected: f.n(),
            got: if v.len() != f.n() { v.len() } else { b.len() },
        });
    }
    if linalg::norm(v) == 0.0 {
        return Err(Error::invalid("direction vector is zero"));
    }
    let column = ComplexMatrix::from_columns(f.n(), &[v.to_vec()]);
    let g = polysys::expand_substitution(f, b, &column)?;
    let d = f.equations()[0].degree() as usize;
    let mut coefficients = g.equations()[0].univariate_coefficients()?;
    coefficients.resize(d + 1, ZERO);
    let lead = coefficients[d];
    if !(lead.norm() >= DEGENERATE_LEAD) {
        return Err(Error::Degenerate(format!(
            "leading coefficient {:e} of the degree-{d} restriction",
            lead.norm()
        )));
    }
    Ok(UnivariatePoly::new(coefficients)?.to_monic())
}

/// All roots by simultaneous Aberth-Ehrlich iteration.
///
/// Each root satisfies `|p(r)| ≤ 1e-10·max(1 + |r|^d, Σ|c_i||r|^i)`; the
/// second scale admits roots that are exact up to rounding in the
/// coefficients when those are large.
pub fn aberth_roots(p: &UnivariatePoly) -> Result<Vec<Complex64>> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::invalid("constant polynomial has no roots"));
    }
    let p = p.to_monic();
    let c = p.coefficients();
    if d == 1 {
        return Ok(vec![-c[0]]);
    }

    // Initial guesses on a circle whose radius is the geometric mean of the
    // root moduli, rotated off the real axis.
    let radius = {
        let r = c[0].norm().powf(1.0 / d as f64);
        if r > 0.0 && r.is_finite() {
            r
        } else {
            1.0
        }
    };
    let mut z: ComplexVector = (0..d)
        .map(|j| {
            let angle = std::f64::consts::TAU * j as f64 / d as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut quiet_rounds = 0;
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let (pv, dpv) = p.eval_with_derivative(z[i]);
            if pv == ZERO {
                continue;
            }
            let newton = pv / dpv;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| ONE / (z[i] - z[j]))
                .sum();
            let w = newton / (ONE - newton * repulsion);
            if w.is_finite() {
                z[i] -= w;
                max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-14 {
            quiet_rounds += 1;
            if quiet_rounds >= 2 {
                break;
            }
        } else {
            quiet_rounds = 0;
        }
    }

    let residuals: Vec<f64> = z.iter().map(|&r| p.scaled_residual(r)).collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    if !(worst <= ROOT_RESIDUAL_TOL) {
        return Err(Error::RootFailure {
            worst_residual: worst,
            residuals,
        });
    }
    Ok(z)
}

/// Eigenvalue condition number of `λ` for the companion matrix of monic `p`.
pub fn root_condition(p: &UnivariatePoly, lambda: Complex64) -> Result<f64> {
    if !p.is_monic() {
        return Err(Error::invalid("root_condition needs a monic polynomial"));
    }
    let d = p.degree();
    let a = p.coefficients();
    let mut x = Vec::with_capacity(d);
    let mut power = ONE;
    for _ in 0..d {
        x.push(power);
        power *= lambda;
    }
    let mut y = vec![ZERO; d];
    y[d - 1] = ONE;
    for j in (1..d).rev() {
        y[j - 1] = lambda * y[j] + a[j];
    }
    let yx: Complex64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
    let denom = yx.norm();
    if !(denom >= linalg::SIGMA_UNDERFLOW) {
        return Ok(f64::INFINITY);
    }
    let kappa = linalg::norm(&x) * linalg::norm(&y) / denom;
    Ok(if kappa.is_finite() { kappa } else { f64::INFINITY })
}

/// Diagonal `D` (powers of two) that balances the companion matrix `C` of
/// monic `p`, so that `D⁻¹CD` has comparable row and column norms.
///
/// This is the scaling pass of the standard eigensolver balancing; the
/// row/column permutation pass is not needed because a companion matrix has
/// no isolated eigenvalues unless `p(0) = 0` exactly.
pub fn companion_balancing(p: &UnivariatePoly) -> Result<Vec<f64>> {
    const RADIX: f64 = 2.0;
    const FACTOR: f64 = 0.95;
    let mut c = p.companion()?;
    let d = c.rows();
    let sfmin1 = f64::MIN_POSITIVE / f64::EPSILON;
    let sfmax1 = 1.0 / sfmin1;
    let sfmin2 = sfmin1 * RADIX;
    let sfmax2 = 1.0 / sfmin2;
    let mut scale = vec![1.0f64; d];
    for _sweep in 0..1000 {
        let mut changed = false;
        for i in 0..d {
            let mut col = (0..d).map(|j| c[(j, i)].norm_sqr()).sum::<f64>().sqrt();
            let mut row = (0..d).map(|j| c[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            let mut ca = (0..d).map(|j| c[(j, i)].norm()).fold(0.0, f64::max);
            let mut ra = (0..d).map(|j| c[(i, j)].norm()).fold(0.0, f64::max);
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let s = col + row;
            let mut f = 1.0f64;
            let mut g = row / RADIX;
            while col < g && f.max(col).max(ca) < sfmax2 && row.min(g).min(ra) > sfmin2 {
                f *= RADIX;
                col *= RADIX;
                ca *= RADIX;
                row /= RADIX;
                g /= RADIX;
                ra /= RADIX;
            }
            g = col / RADIX;
            while g >= row && row.max(ra) < sfmax2 && f.min(col).min(g).min(ca) > sfmin2 {
                f /= RADIX;
                col /= RADIX;
                g /= RADIX;
                ca /= RADIX;
                row *= RADIX;
                ra *= RADIX;
            }
            if col + row >= FACTOR * s {
                continue;
            }
            if f < 1.0 && scale[i] < 1.0 && f * scale[i] <= sfmin1 {
                continue;
            }
            if f > 1.0 && scale[i] > 1.0 && scale[i] >= sfmax1 / f {
                continue;
            }
            scale[i] *= f;
            changed = true;
            for j in 0..d {
                c[(i, j)] /= f;
                c[(j, i)] *= f;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(scale)
}

/// Eigenvalue condition number of `λ` for the balanced companion matrix
/// `D⁻¹CD`, whose eigenvectors are `D⁻¹x` and `Dy`.
pub fn balanced_root_condition(p: &UnivariatePoly, lambda: Complex64, scale: &[f64]) -> Result<f64> {
    if !p.is_monic() {
        return Err(Error::invalid("balanced_root_condition needs a monic polynomial"));
    }
    let d = p.degree();
    if scale.len() != d {
        return Err(Error::Dimension {
            context: "balancing diagonal",
            expected: d,
            got: scale.len(),
        });
    }
    let a = p.coefficients();
    let mut x = Vec::with_capacity(d);
    let mut power = ONE;
    for _ in 0..d {
        x.push(power);
        power *= lambda;
    }
    let mut y = vec![ZERO; d];
    y[d - 1] = ONE;
    for j in (1..d).rev() {
        y[j - 1] = lambda * y[j] + a[j];
    }
    let yx: Complex64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
    let denom = yx.norm();
    if !(denom >= linalg::SIGMA_UNDERFLOW) {
        return Ok(f64::INFINITY);
    }
    let xs: ComplexVector = x.iter().zip(scale).map(|(v, s)| v / s).collect();
    let ys: ComplexVector = y.iter().zip(scale).map(|(v, s)| v * s).collect();
    let kappa = linalg::norm(&xs) * linalg::norm(&ys) / denom;
    Ok(if kappa.is_finite() { kappa } else { f64::INFINITY })
}

/// Which eigenvalue condition number is reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ConditionMeasure {
    /// Wilkinson condition of the companion matrix as is.
    Plain,
    /// Condition after diagonal balancing of the companion matrix, as
    /// reported by balancing eigensolvers.
    #[default]
    Balanced,
}

impl fmt::Display for ConditionMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionMeasure::Plain => "plain",
            ConditionMeasure::Balanced => "balanced",
        })
    }
}

impl std::str::FromStr for ConditionMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(ConditionMeasure::Plain),
            "balanced" => Ok(ConditionMeasure::Balanced),
            other => Err(Error::invalid(format!(
                "unknown condition measure `{other}` (expected plain or balanced)"
            ))),
        }
    }
}

/// Roots of `p` with their inverse condition numbers `1/κ` (plain).
pub fn roots_with_inverse_condition(p: &UnivariatePoly) -> Result<Vec<(Complex64, f64)>> {
    roots_with_inverse_condition_by(p, ConditionMeasure::Plain)
}

/// Roots of `p` with their inverse condition numbers under `measure`.
pub fn roots_with_inverse_condition_by(p: &UnivariatePoly, measure: ConditionMeasure) -> Result<Vec<(Complex64, f64)>> {
    let monic = p.to_monic();
    let roots = aberth_roots(&monic)?;
    match measure {
        ConditionMeasure::Plain => roots
            .into_iter()
            .map(|r| Ok((r, 1.0 / root_condition(&monic, r)?)))
            .collect(),
        ConditionMeasure::Balanced => {
            let scale = companion_balancing(&monic)?;
            roots
                .into_iter()
                .map(|r| Ok((r, 1.0 / balanced_root_condition(&monic, r, &scale)?)))
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Roots of `f(b + vξ)`.
    Offset,
    /// Roots of `f(vξ)`.
    Origin,
    /// Roots of `f(z₁ + vξ)` with `z₁` a point of the hypersurface.
    LocalShift,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Offset => "offset",
            Regime::Origin => "origin",
            Regime::LocalShift => "local-shift",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    pub degree: usize,
    pub regime: Regime,
    pub largest_inverse_cond: f64,
    pub smallest_inverse_cond: f64,
}

impl ConditionReport {
    fn from_inverse(degree: usize, regime: Regime, inv: impl IntoIterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for v in inv {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        ConditionReport {
            degree,
            regime,
            largest_inverse_cond: hi,
            smallest_inverse_cond: lo,
        }
    }
}

/// One row of the comparison table: both regimes and their ratios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionRow {
    pub degree: usize,
    pub offset: ConditionReport,
    pub origin: ConditionReport,
}

impl ConditionRow {
    /// Smallest inverse condition, origin over offset.
    pub fn smallest_ratio(&self) -> f64 {
        self.origin.smallest_inverse_cond / self.offset.smallest_inverse_cond
    }

    /// Largest inverse condition, origin over offset.
    pub fn largest_ratio(&self) -> f64 {
        self.origin.largest_inverse_cond / self.offset.largest_inverse_cond
    }
}

/// Unit-circle `b` and `v` with `v_1 = 1`, so that `f(vξ)` stays monic
/// for the hypersurfaces with leading term `x_1^d`.
pub fn experiment_line(n: usize, seed: u64) -> (ComplexVector, ComplexVector) {
    let mut r = rng::seeded(seed);
    let b = rng::unit_circle_vec(&mut r, n);
    let mut v = rng::unit_circle_vec(&mut r, n);
    v[0] = ONE;
    (b, v)
}

/// Conditioning of the roots of `f(b + vξ)` and `f(vξ)` for one random
/// hypersurface per degree.
pub fn run_condition_experiment(
    n: usize,
    degrees: &[usize],
    t: usize,
    seed: u64,
    measure: ConditionMeasure,
) -> Result<Vec<ConditionRow>> {
    degrees
        .iter()
        .map(|&d| condition_row(n, d, t, seed, measure).map_err(|e| annotate(d, e)))
        .collect()
}

fn annotate(d: usize, e: Error) -> Error {
    match e {
        Error::Degenerate(msg) => Error::Degenerate(format!("degree {d}: {msg}")),
        other => other,
    }
}

/// Single-degree piece of [`run_condition_experiment`].
pub fn condition_row(n: usize, d: usize, t: usize, seed: u64, measure: ConditionMeasure) -> Result<ConditionRow> {
    let f = polysys::random_sparse_hypersurface(n, d as u32, t, seed)?;
    let (b, v) = experiment_line(n, rng::derive_seed(seed, d as u64));
    let zero = vec![ZERO; n];
    let offset = roots_with_inverse_condition_by(&univariate_restrict(&f, &b, &v)?, measure)?;
    let origin = roots_with_inverse_condition_by(&univariate_restrict(&f, &zero, &v)?, measure)?;
    Ok(ConditionRow {
        degree: d,
        offset: ConditionReport::from_inverse(d, Regime::Offset, offset.iter().map(|p| p.1)),
        origin: ConditionReport::from_inverse(d, Regime::Origin, origin.iter().map(|p| p.1)),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalShift {
    /// The root `ξ₁` of `f(vξ)` used for the shift, `z₁ = ξ₁ v`.
    pub shift_root: Complex64,
    /// Inverse condition of the root of `f(z₁ + vξ)` at `ξ = 0`.
    pub inverse_at_zero: f64,
    /// Smallest inverse condition among the other roots.
    pub smallest_inverse_other: f64,
    pub report: ConditionReport,
}

/// Conditioning after moving the offset onto a point of the hypersurface.
///
/// `z₁ = ξ₁ v` where `ξ₁` is the smallest nonzero-modulus root of `f(vξ)`;
/// `f(z₁ + vξ)` then has a root at `ξ = 0`. Roots of modulus below
/// `1e-10 · max(1, max |ξ|)` count as zero, since `f(0) = 0` whenever `f`
/// has no constant term.
pub fn local_shift_condition(f: &PolySystem, v: &[Complex64], measure: ConditionMeasure) -> Result<LocalShift> {
    let n = f.n();
    let origin = univariate_restrict(f, &vec![ZERO; n], v)?;
    let roots = aberth_roots(&origin)?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let shift_root = roots
        .iter()
        .filter(|r| r.norm() > 1e-10 * scale)
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .copied()
        .ok_or_else(|| Error::Degenerate("f(vξ) has no nonzero root".into()))?;
    let z1 = linalg::scale(v, shift_root);
    let shifted = roots_with_inverse_condition_by(&univariate_restrict(f, &z1, v)?, measure)?;
    let zero_index = shifted
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.norm().total_cmp(&b.1 .0.norm()))
        .map(|(i, _)| i)
        .expect("degree >= 1");
    let inverse_at_zero = shifted[zero_index].1;
    let smallest_inverse_other = shifted
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != zero_index)
        .map(|(_, p)| p.1)
        .fold(f64::INFINITY, f64::min);
    Ok(LocalShift {
        shift_root,
        inverse_at_zero,
        smallest_inverse_other,
        report: ConditionReport::from_inverse(
            origin.degree(),
            Regime::LocalShift,
            shifted.iter().map(|p| p.1),
        ),
    })
}

/// [`local_shift_condition`] on the random hypersurface and line of
/// [`condition_row`] for the same `(n, d, t, seed)`.
pub fn local_shift_experiment(n: usize, d: usize, t: usize, seed: u64, measure: ConditionMeasure) -> Result<LocalShift> {
    let f = polysys::random_sparse_hypersurface(n, d as u32, t, seed)?;
    let (_, v) = experiment_line(n, rng::derive_seed(seed, d as u64));
    local_shift_condition(&f, &v, measure).map_err(|e| annotate(d, e))
}
