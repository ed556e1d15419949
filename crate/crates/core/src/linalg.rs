//! Dense complex linear algebra for the small systems that arise in path
//! tracking: LU solves, Gram-Schmidt, orthogonal projections and
//! singular-value condition numbers.
//!
//! Vectors are plain `Vec<Complex64>` / `&[Complex64]`; matrices are the
//! row-major [`ComplexMatrix`]. The 2-norm is used throughout.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng;

pub type ComplexVector = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative pivot threshold below which [`lu_solve`] reports singularity.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-14;
/// Relative column norm below which [`orthonormalize`] reports rank loss.
pub const RANK_TOL: f64 = 1e-12;
/// Smallest singular value treated as nonzero by [`condition_number`].
pub const SIGMA_UNDERFLOW: f64 = 1e-300;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// First `k` columns of the `n × n` identity.
    pub fn identity_columns(n: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, k);
        for i in 0..k.min(n) {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        ComplexMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            m.set_column(j, c);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Matrix with unit-circle entries drawn from `rng`.
    pub fn random_unit_circle(rows: usize, cols: usize, rng: &mut rng::SeededRng) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: rng::unit_circle_vec(rng, rows * cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[Complex64]) {
        assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn columns(&self) -> Vec<ComplexVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> ComplexVector {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(ZERO, |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `self^H x` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> ComplexVector {
        assert_eq!(x.len(), self.rows, "adjoint-vector dimension mismatch");
        let mut out = vec![ZERO; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(l);
                for (o, b) in out.row_mut(i).iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * c).collect(),
        }
    }

    /// `a·self + b·other`, entrywise.
    pub fn lincomb(&self, a: Complex64, other: &ComplexMatrix, b: Complex64) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        }
    }

    /// Stacks `self` above `below`.
    pub fn vstack(&self, below: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, below.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        ComplexMatrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |(V^H V − I)_{ij}|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for p in 0..self.cols {
            for q in p..self.cols {
                let mut g = ZERO;
                for i in 0..self.rows {
                    g += self[(i, p)].conj() * self[(i, q)];
                }
                if p == q {
                    g -= ONE;
                }
                worst = worst.max(g.norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "({:+.6e}{:+.6e}i) ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// vector helpers

/// Hermitian inner product `a^H b`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> ComplexVector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> ComplexVector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(a: &[Complex64], c: Complex64) -> ComplexVector {
    a.iter().map(|x| x * c).collect()
}

pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn is_finite(a: &[Complex64]) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

// ---------------------------------------------------------------------------
// solves and factorizations

/// Solves `A Δ = rhs` by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, rhs: &[Complex64]) -> Result<ComplexVector> {
    if !a.is_square() {
        return Err(Error::Dimension {
            context: "lu_solve (matrix must be square)",
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    if rhs.len() != n {
        return Err(Error::Dimension {
            context: "lu_solve right-hand side",
            expected: n,
            got: rhs.len(),
        });
    }
    let scale = a.max_abs();
    if n > 0 && scale == 0.0 {
        return Err(Error::Singular { pivot: 0 });
    }
    let threshold = SINGULAR_PIVOT_TOL * scale;

    let mut m = a.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_abs >= threshold) || piv_abs == 0.0 {
            return Err(Error::Singular { pivot: col });
        }
        if piv != col {
            for j in 0..n {
                m.data.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        let inv = ONE / m[(col, col)];
        for r in col + 1..n {
            let factor = m[(r, col)] * inv;
            if factor == ZERO {
                continue;
            }
            m[(r, col)] = ZERO;
            for j in col + 1..n {
                let u = m[(col, j)];
                m[(r, j)] -= factor * u;
            }
            let bc = b[col];
            b[r] -= factor * bc;
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in col + 1..n {
            acc -= m[(col, j)] * b[j];
        }
        b[col] = acc / m[(col, col)];
    }
    Ok(b)
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Returns `V` with the same column span as `m` and `V^H V = I`.
pub fn orthonormalize(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let mut v = m.column(j);
        let original = norm(&v);
        if original == 0.0 || !original.is_finite() {
            return Err(Error::RankDeficient { column: j });
        }
        for _pass in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let remaining = norm(&v);
        if remaining < RANK_TOL * original {
            return Err(Error::RankDeficient { column: j });
        }
        let inv = Complex64::new(1.0 / remaining, 0.0);
        v.iter_mut().for_each(|x| *x *= inv);
        basis.push(v);
    }
    Ok(ComplexMatrix::from_columns(m.rows(), &basis))
}

/// Orthonormal basis of the orthogonal complement of the (orthonormal)
/// columns of `q`, built greedily from the coordinate vectors.
pub fn orthogonal_complement(q: &ComplexMatrix) -> ComplexMatrix {
    let n = q.rows();
    let mut basis: Vec<ComplexVector> = q.columns();
    let mut out: Vec<ComplexVector> = Vec::with_capacity(n.saturating_sub(q.cols()));
    let mut used = vec![false; n];
    while basis.len() < n {
        let mut best: Option<(usize, ComplexVector, f64)> = None;
        for j in (0..n).filter(|&j| !used[j]) {
            let mut v = vec![ZERO; n];
            v[j] = ONE;
            for _pass in 0..2 {
                for b in &basis {
                    let c = dot(b, &v);
                    axpy(-c, b, &mut v);
                }
            }
            let nv = norm(&v);
            if best.as_ref().map_or(true, |(_, _, bn)| nv > *bn) {
                best = Some((j, v, nv));
            }
        }
        let (j, mut v, nv) = best.expect("fewer than n basis vectors leaves a candidate");
        used[j] = true;
        let inv = Complex64::new(1.0 / nv, 0.0);
        v.iter_mut().for_each(|x| *x *= inv);
        basis.push(v.clone());
        out.push(v);
    }
    ComplexMatrix::from_columns(n, &out)
}

/// Scalar work done by [`project_perpendicular_counted`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub inner_products: usize,
    pub vector_updates: usize,
    pub multiplications: usize,
}

/// `u − Σ_i (w_i^H u) w_i` for orthonormal columns `w_i`.
pub fn project_perpendicular(u: &[Complex64], w: &ComplexMatrix) -> ComplexVector {
    let mut ops = OpCount::default();
    project_perpendicular_counted(u, w, &mut ops)
}

/// [`project_perpendicular`] that tallies its arithmetic into `ops`.
pub fn project_perpendicular_counted(
    u: &[Complex64],
    w: &ComplexMatrix,
    ops: &mut OpCount,
) -> ComplexVector {
    assert_eq!(u.len(), w.rows(), "projection dimension mismatch");
    let n = w.rows();
    let coeffs: Vec<Complex64> = (0..w.cols())
        .map(|j| {
            ops.inner_products += 1;
            ops.multiplications += n;
            (0..n).fold(ZERO, |acc, i| acc + w[(i, j)].conj() * u[i])
        })
        .collect();
    let mut r = u.to_vec();
    for (j, c) in coeffs.iter().enumerate() {
        ops.vector_updates += 1;
        ops.multiplications += n;
        for (i, ri) in r.iter_mut().enumerate() {
            *ri -= c * w[(i, j)];
        }
    }
    r
}

/// Coordinates of `u` in the orthonormal columns of `w`: `w^H u`.
pub fn project_coordinates(u: &[Complex64], w: &ComplexMatrix) -> ComplexVector {
    w.adjoint_mul_vec(u)
}

/// Singular values (descending) by one-sided Jacobi on the columns of `a`.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    // Work on whichever orientation has fewer columns.
    let work = if a.cols() > a.rows() {
        a.adjoint()
    } else {
        a.clone()
    };
    let mut cols = work.columns();
    let k = cols.len();
    const MAX_SWEEPS: usize = 60;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = dot(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let yq = *y * phase.conj();
                    let xp = *x;
                    *x = xp * c - yq * s;
                    *y = xp * s + yq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// 2-norm condition number `σ_max / σ_min`; `+∞` when `σ_min` underflows.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if min >= SIGMA_UNDERFLOW && min.is_finite() => max / min,
        _ => f64::INFINITY,
    }
}

/// `count` samples `exp(iθ)` from a fresh generator seeded with `seed`.
pub fn random_unit_circle(count: usize, seed: u64) -> ComplexVector {
    let mut r = rng::seeded(seed);
    rng::unit_circle_vec(&mut r, count)
}
