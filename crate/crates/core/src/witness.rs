//! Slicing planes and witness sets.
//!
//! A `k`-plane in `C^n` is stored intrinsically as an offset point plus an
//! orthonormal basis ([`AffinePlane`]); the equivalent system of `n − k`
//! linear equations is an [`ExtrinsicPlane`]. Witness points are always
//! stored in extrinsic coordinates: the local intrinsic representation of a
//! point `z` on a plane with basis `V` is simply `(z, V, ξ = 0)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::polysys::PolySystem;
use crate::rng;

/// Orthonormality tolerance for plane bases.
pub const BASIS_TOL: f64 = 1e-10;
/// Residual and plane-membership tolerance for witness points.
pub const POINT_TOL: f64 = 1e-8;
/// Componentwise backward error accepted in place of the residual bound for
/// points far from the unit ball, where the absolute residual is dominated
/// by rounding in the evaluation.
pub const BACKWARD_TOL: f64 = 1e-12;
/// Minimum pairwise distance between distinct witness points.
pub const DISTINCT_TOL: f64 = 1e-6;

/// The plane `{offset + basis·ξ : ξ ∈ C^k}` with orthonormal `basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePlane {
    offset: ComplexVector,
    basis: ComplexMatrix,
}

impl AffinePlane {
    pub fn new(offset: ComplexVector, basis: ComplexMatrix) -> Result<Self> {
        let n = offset.len();
        if basis.rows() != n {
            return Err(Error::Dimension {
                context: "plane basis rows",
                expected: n,
                got: basis.rows(),
            });
        }
        let k = basis.cols();
        if k < 1 || k > n {
            return Err(Error::invalid(format!(
                "plane dimension must satisfy 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        if !linalg::is_finite(&offset) || !basis.is_finite() {
            return Err(Error::invalid("plane has non-finite entries"));
        }
        let err = basis.orthonormality_error();
        if !(err <= BASIS_TOL) {
            return Err(Error::invalid(format!(
                "plane basis is not orthonormal (|V*V - I| = {err:e})"
            )));
        }
        Ok(AffinePlane { offset, basis })
    }

    /// A random plane: unit-circle offset and basis, then orthonormalized.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::invalid(format!(
                "plane dimension must satisfy 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        let mut last_err = None;
        for attempt in 0..4u64 {
            let s = if attempt == 0 {
                seed
            } else {
                rng::derive_seed(seed, attempt)
            };
            let mut r = rng::seeded(s);
            let offset = rng::unit_circle_vec(&mut r, n);
            let raw = ComplexMatrix::random_unit_circle(n, k, &mut r);
            match linalg::orthonormalize(&raw) {
                Ok(basis) => return AffinePlane::new(offset, basis),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }

    pub fn n(&self) -> usize {
        self.offset.len()
    }

    pub fn k(&self) -> usize {
        self.basis.cols()
    }

    pub fn offset(&self) -> &[Complex64] {
        &self.offset
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn point(&self, xi: &[Complex64]) -> ComplexVector {
        linalg::add(&self.offset, &self.basis.mul_vec(xi))
    }

    /// `V^H (z − b)`.
    pub fn intrinsic_coordinates(&self, z: &[Complex64]) -> ComplexVector {
        linalg::project_coordinates(&linalg::sub(z, &self.offset), &self.basis)
    }

    /// Component of `z − b` orthogonal to the plane's directions.
    pub fn perpendicular_component(&self, z: &[Complex64]) -> ComplexVector {
        linalg::project_perpendicular(&linalg::sub(z, &self.offset), &self.basis)
    }

    /// Euclidean distance from `z` to the plane.
    pub fn distance(&self, z: &[Complex64]) -> f64 {
        linalg::norm(&self.perpendicular_component(z))
    }

    pub fn contains(&self, z: &[Complex64], tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// The same plane with `z` as its offset point.
    pub fn with_offset(&self, z: ComplexVector) -> Result<Self> {
        if z.len() != self.n() {
            return Err(Error::Dimension {
                context: "new plane offset",
                expected: self.n(),
                got: z.len(),
            });
        }
        Ok(AffinePlane {
            offset: z,
            basis: self.basis.clone(),
        })
    }

    /// Translates the plane by `shift` (keeps the basis).
    pub fn translated(&self, shift: &[Complex64]) -> Self {
        AffinePlane {
            offset: linalg::add(&self.offset, shift),
            basis: self.basis.clone(),
        }
    }
}

/// `coefficients · x + constants = 0`, one row per equation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtrinsicPlane {
    pub coefficients: ComplexMatrix,
    pub constants: ComplexVector,
}

impl ExtrinsicPlane {
    pub fn new(coefficients: ComplexMatrix, constants: ComplexVector) -> Result<Self> {
        if coefficients.rows() != constants.len() {
            return Err(Error::Dimension {
                context: "extrinsic plane constants",
                expected: coefficients.rows(),
                got: constants.len(),
            });
        }
        if coefficients.rows() > coefficients.cols() {
            return Err(Error::invalid("more linear equations than variables"));
        }
        Ok(ExtrinsicPlane {
            coefficients,
            constants,
        })
    }

    /// `n − k` random linear equations with unit-circle coefficients.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::invalid(format!(
                "plane dimension must satisfy 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        let mut r = rng::seeded(seed);
        let coefficients = ComplexMatrix::random_unit_circle(n - k, n, &mut r);
        let constants = rng::unit_circle_vec(&mut r, n - k);
        ExtrinsicPlane::new(coefficients, constants)
    }

    pub fn n(&self) -> usize {
        self.coefficients.cols()
    }

    /// Plane dimension `n − rows`.
    pub fn k(&self) -> usize {
        self.coefficients.cols() - self.coefficients.rows()
    }

    pub fn residual(&self, x: &[Complex64]) -> ComplexVector {
        linalg::add(&self.coefficients.mul_vec(x), &self.constants)
    }

    /// The linear equations as a polynomial system in `n` variables.
    pub fn to_system(&self) -> Result<PolySystem> {
        let n = self.n();
        let equations = (0..self.coefficients.rows())
            .map(|i| {
                let mut terms: Vec<(Complex64, Vec<u32>)> = self
                    .coefficients
                    .row(i)
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        (c, e)
                    })
                    .collect();
                terms.push((self.constants[i], vec![0; n]));
                crate::polysys::Polynomial::from_terms(n, terms)
            })
            .collect::<Result<Vec<_>>>()?;
        PolySystem::new(n, equations)
    }
}

/// Offset point and orthonormal null-space basis of a linear system.
pub fn extrinsic_to_intrinsic(plane: &ExtrinsicPlane) -> Result<AffinePlane> {
    let a = &plane.coefficients;
    let n = a.cols();
    if a.rows() == 0 {
        return AffinePlane::new(vec![Complex64::new(0.0, 0.0); n], ComplexMatrix::identity(n));
    }
    // Rows of A span the normal space; Q is an orthonormal basis for it.
    let q = linalg::orthonormalize(&a.adjoint())?;
    // Minimal-norm offset b = Q y with (A Q) y = −c.
    let aq = a.matmul(&q);
    let rhs: ComplexVector = plane.constants.iter().map(|c| -c).collect();
    let y = linalg::lu_solve(&aq, &rhs)?;
    let offset = q.mul_vec(&y);
    let basis = linalg::orthogonal_complement(&q);
    AffinePlane::new(offset, basis)
}

/// Linear equations `U^H x − U^H b = 0` with `U` an orthonormal complement
/// of the plane's basis, so the coefficient rows are orthonormal.
pub fn intrinsic_to_extrinsic(plane: &AffinePlane) -> ExtrinsicPlane {
    let u = linalg::orthogonal_complement(plane.basis());
    let coefficients = u.adjoint();
    let constants = coefficients
        .mul_vec(plane.offset())
        .into_iter()
        .map(|c| -c)
        .collect();
    ExtrinsicPlane {
        coefficients,
        constants,
    }
}

/// Polynomial system, slicing plane, and the isolated points where they meet.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSet {
    system: PolySystem,
    plane: AffinePlane,
    points: Vec<ComplexVector>,
}

impl WitnessSet {
    /// Builds and validates a witness set.
    pub fn new(system: PolySystem, plane: AffinePlane, points: Vec<ComplexVector>) -> Result<Self> {
        let w = WitnessSet {
            system,
            plane,
            points,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn system(&self) -> &PolySystem {
        &self.system
    }

    pub fn plane(&self) -> &AffinePlane {
        &self.plane
    }

    pub fn points(&self) -> &[ComplexVector] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn n(&self) -> usize {
        self.plane.n()
    }

    pub fn k(&self) -> usize {
        self.plane.k()
    }

    /// Checks every witness-set invariant, naming the first that fails.
    pub fn validate(&self) -> Result<()> {
        let n = self.plane.n();
        let k = self.plane.k();
        if self.system.n() != n {
            return Err(Error::Validation {
                invariant: "ambient dimension",
                detail: format!("system has {} variables, plane lives in C^{n}", self.system.n()),
            });
        }
        if self.system.m() != k {
            return Err(Error::Validation {
                invariant: "square system",
                detail: format!("system has {} equations for a {k}-plane", self.system.m()),
            });
        }
        for (i, z) in self.points.iter().enumerate() {
            if z.len() != n || !linalg::is_finite(z) {
                return Err(Error::Validation {
                    invariant: "point dimension",
                    detail: format!("point {i} is not a finite vector in C^{n}"),
                });
            }
            let res = linalg::norm(&self.system.evaluate(z)?);
            if !(res <= POINT_TOL || self.system.backward_error(z)? <= BACKWARD_TOL) {
                return Err(Error::Validation {
                    invariant: "residual",
                    detail: format!("point {i} has residual {res:e}"),
                });
            }
            let dist = self.plane.distance(z);
            if !(dist <= POINT_TOL) {
                return Err(Error::Validation {
                    invariant: "plane membership",
                    detail: format!("point {i} is {dist:e} away from the plane"),
                });
            }
        }
        if let Some((i, j, d)) = closest_pair(&self.points) {
            if d <= DISTINCT_TOL {
                return Err(Error::Validation {
                    invariant: "distinctness",
                    detail: format!("points {i} and {j} are {d:e} apart"),
                });
            }
        }
        Ok(())
    }

    /// The witness plane re-anchored at point `index` (0-based); the basis
    /// is shared, so it describes the same plane.
    pub fn rebase(&self, index: usize) -> Result<AffinePlane> {
        let z = self.points.get(index).ok_or_else(|| {
            Error::invalid(format!(
                "witness point index {index} out of range (degree {})",
                self.degree()
            ))
        })?;
        self.plane.with_offset(z.clone())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "WITNESS v1");
        let _ = writeln!(out, "n {} k {} d {}", self.n(), self.k(), self.degree());
        out.push_str("SYSTEM\n");
        out.push_str(&self.system.to_text());
        out.push_str("PLANE OFFSET\n");
        write_vector(&mut out, self.plane.offset());
        out.push_str("PLANE BASIS\n");
        for col in self.plane.basis().columns() {
            write_vector(&mut out, &col);
        }
        out.push_str("POINTS\n");
        for z in &self.points {
            write_vector(&mut out, z);
        }
        out.push_str("END\n");
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        parse_witness(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}

/// `(i, j, distance)` of the closest pair, if there are two points.
pub fn closest_pair(points: &[ComplexVector]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = linalg::distance(&points[i], &points[j]);
            if best.map_or(true, |(_, _, bd)| d < bd) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

fn write_vector(out: &mut String, v: &[Complex64]) {
    for z in v {
        let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
    }
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(s: &'a str) -> Self {
        Lines {
            inner: s.lines().enumerate().peekable(),
            last: 0,
        }
    }

    /// Next meaningful line as `(1-based number, trimmed text)`.
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Ok((i + 1, t));
        }
        Err(Error::parse(self.last + 1, "unexpected end of witness file"))
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let (no, l) = self.next_line()?;
        if l.split_whitespace().collect::<Vec<_>>().join(" ") != keyword {
            return Err(Error::parse(no, format!("expected `{keyword}`, found `{l}`")));
        }
        Ok(())
    }

    fn complex(&mut self) -> Result<Complex64> {
        let (no, l) = self.next_line()?;
        let mut parts = l.split_whitespace();
        let (re, im) = match (parts.next(), parts.next(), parts.next()) {
            (Some(re), Some(im), None) => (re, im),
            _ => return Err(Error::parse(no, format!("expected `re im`, found `{l}`"))),
        };
        let re: f64 = re
            .parse()
            .map_err(|_| Error::parse(no, format!("bad real part `{re}`")))?;
        let im: f64 = im
            .parse()
            .map_err(|_| Error::parse(no, format!("bad imaginary part `{im}`")))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::parse(no, "non-finite entry"));
        }
        Ok(Complex64::new(re, im))
    }

    fn vector(&mut self, n: usize) -> Result<ComplexVector> {
        (0..n).map(|_| self.complex()).collect()
    }
}

fn parse_witness(s: &str) -> Result<WitnessSet> {
    let mut lines = Lines::new(s);
    lines.expect("WITNESS v1")?;
    let (no, dims) = lines.next_line()?;
    let tokens: Vec<&str> = dims.split_whitespace().collect();
    let (n, k, d) = match tokens.as_slice() {
        ["n", n, "k", k, "d", d] => {
            let p = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(no, format!("bad size `{t}`")))
            };
            (p(n)?, p(k)?, p(d)?)
        }
        _ => return Err(Error::parse(no, "expected `n <n> k <k> d <d>`")),
    };
    lines.expect("SYSTEM")?;

    // Hand the remaining raw lines to the system parser, then resume after it.
    let start = lines.last;
    let rest: Vec<&str> = s.lines().skip(start).collect();
    let (system, consumed) = PolySystem::parse_lines(rest.iter().copied(), start + 1)?;
    for _ in 0..consumed {
        lines.inner.next();
    }
    lines.last = start + consumed;
    if system.n() != n || system.m() != k {
        return Err(Error::parse(
            lines.last,
            format!(
                "system is {}x{} but header says k = {k}, n = {n}",
                system.m(),
                system.n()
            ),
        ));
    }

    lines.expect("PLANE OFFSET")?;
    let offset = lines.vector(n)?;
    lines.expect("PLANE BASIS")?;
    let columns = (0..k).map(|_| lines.vector(n)).collect::<Result<Vec<_>>>()?;
    lines.expect("POINTS")?;
    let points = (0..d).map(|_| lines.vector(n)).collect::<Result<Vec<_>>>()?;
    lines.expect("END")?;
    if let Ok((no, l)) = lines.next_line() {
        return Err(Error::parse(no, format!("unexpected content after END: `{l}`")));
    }

    let plane = AffinePlane::new(offset, ComplexMatrix::from_columns(n, &columns)).map_err(|e| {
        Error::Validation {
            invariant: "orthonormal basis",
            detail: e.to_string(),
        }
    })?;
    WitnessSet::new(system, plane, points)
}
