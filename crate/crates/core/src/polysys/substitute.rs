//! Restriction of a system to an affine plane `x = b + Vξ`, either as a
//! composed evaluation (sparsity kept) or as a symbolic expansion.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{PolySystem, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::rng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Orthonormality tolerance accepted by [`restrict`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// `ξ ↦ f(b + Vξ)` evaluated by composition, never expanded.
#[derive(Clone, Debug)]
pub struct RestrictedSystem<'a> {
    system: &'a PolySystem,
    offset: ComplexVector,
    basis: ComplexMatrix,
}

impl<'a> RestrictedSystem<'a> {
    /// Restriction onto an arbitrary (not necessarily orthonormal) basis.
    pub fn with_basis(system: &'a PolySystem, offset: ComplexVector, basis: ComplexMatrix) -> Result<Self> {
        if offset.len() != system.n() {
            return Err(Error::Dimension {
                context: "restriction offset",
                expected: system.n(),
                got: offset.len(),
            });
        }
        if basis.rows() != system.n() {
            return Err(Error::Dimension {
                context: "restriction basis rows",
                expected: system.n(),
                got: basis.rows(),
            });
        }
        Ok(RestrictedSystem {
            system,
            offset,
            basis,
        })
    }

    pub fn system(&self) -> &PolySystem {
        self.system
    }

    pub fn offset(&self) -> &[Complex64] {
        &self.offset
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Number of intrinsic variables.
    pub fn k(&self) -> usize {
        self.basis.cols()
    }

    /// Number of equations.
    pub fn m(&self) -> usize {
        self.system.m()
    }

    pub fn point(&self, xi: &[Complex64]) -> ComplexVector {
        let mut x = self.offset.clone();
        let step = self.basis.mul_vec(xi);
        linalg::axpy(ONE, &step, &mut x);
        x
    }

    fn check_xi(&self, xi: &[Complex64]) -> Result<()> {
        if xi.len() != self.k() {
            return Err(Error::Dimension {
                context: "intrinsic coordinates",
                expected: self.k(),
                got: xi.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, xi: &[Complex64]) -> Result<ComplexVector> {
        self.check_xi(xi)?;
        self.system.evaluate(&self.point(xi))
    }

    /// `f'(b + Vξ)·V`, an `m × k` matrix.
    pub fn jac(&self, xi: &[Complex64]) -> Result<ComplexMatrix> {
        Ok(self.eval_jac(xi)?.1)
    }

    pub fn eval_jac(&self, xi: &[Complex64]) -> Result<(ComplexVector, ComplexMatrix)> {
        self.check_xi(xi)?;
        let (v, j) = self.system.evaluate_with_jacobian(&self.point(xi))?;
        Ok((v, j.matmul(&self.basis)))
    }
}

/// Restriction of `f` to the plane `b + Vξ`; `V` must be orthonormal.
pub fn restrict<'a>(
    f: &'a PolySystem,
    offset: &[Complex64],
    basis: &ComplexMatrix,
) -> Result<RestrictedSystem<'a>> {
    let err = basis.orthonormality_error();
    if !(err <= ORTHONORMAL_TOL) {
        return Err(Error::invalid(format!(
            "restriction basis is not orthonormal (|V*V - I| = {err:e})"
        )));
    }
    RestrictedSystem::with_basis(f, offset.to_vec(), basis.clone())
}

type SparseK = BTreeMap<Vec<u32>, Complex64>;

fn multiply(a: &SparseK, b: &SparseK) -> SparseK {
    let mut out = SparseK::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(ZERO) += ca * cb;
        }
    }
    out
}

/// Symbolic expansion of `ξ ↦ f(b + Vξ)` as a system in `k` variables.
///
/// Products of binomial powers destroy the sparsity of `f`; the term count
/// may grow combinatorially.
pub fn expand_substitution(f: &PolySystem, offset: &[Complex64], basis: &ComplexMatrix) -> Result<PolySystem> {
    let n = f.n();
    if offset.len() != n || basis.rows() != n {
        return Err(Error::Dimension {
            context: "expand_substitution",
            expected: n,
            got: if offset.len() != n { offset.len() } else { basis.rows() },
        });
    }
    let k = basis.cols();
    let linear_forms: Vec<SparseK> = (0..n)
        .map(|j| {
            let mut form = SparseK::new();
            if offset[j] != ZERO {
                form.insert(vec![0; k], offset[j]);
            }
            for l in 0..k {
                if basis[(j, l)] != ZERO {
                    let mut e = vec![0; k];
                    e[l] = 1;
                    form.insert(e, basis[(j, l)]);
                }
            }
            form
        })
        .collect();

    // powers[j][e] = (b_j + V_j ξ)^e, filled lazily
    let mut powers: Vec<Vec<SparseK>> = (0..n)
        .map(|_| {
            let mut unit = SparseK::new();
            unit.insert(vec![0; k], ONE);
            vec![unit]
        })
        .collect();

    let mut equations = Vec::with_capacity(f.m());
    for p in f.equations() {
        let mut acc = SparseK::new();
        for t in p.terms() {
            let mut prod = SparseK::new();
            prod.insert(vec![0; k], t.coefficient);
            for (j, &e) in t.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[j].len() <= e as usize {
                    let next = multiply(powers[j].last().expect("seeded"), &linear_forms[j]);
                    powers[j].push(next);
                }
                prod = multiply(&prod, &powers[j][e as usize]);
            }
            for (e, c) in prod {
                *acc.entry(e).or_insert(ZERO) += c;
            }
        }
        equations.push(Polynomial::from_terms(k, acc.into_iter().map(|(e, c)| (c, e)))?);
    }
    PolySystem::new(k, equations)
}

/// Random `k × m` combination `C·f` with unit-circle entries in `C`.
///
/// A system that already has `k` equations is returned unchanged.
pub fn square_system(f: &PolySystem, k: usize, seed: u64) -> Result<PolySystem> {
    let m = f.m();
    if m < k {
        return Err(Error::invalid(format!(
            "cannot square {m} equations to {k}: need at least {k}"
        )));
    }
    if m == k {
        return Ok(f.clone());
    }
    let mut r = rng::seeded(seed);
    let c = ComplexMatrix::random_unit_circle(k, m, &mut r);
    let polys: Vec<&Polynomial> = f.equations().iter().collect();
    let equations = (0..k)
        .map(|i| Polynomial::linear_combination(f.n(), c.row(i), &polys))
        .collect::<Result<Vec<_>>>()?;
    PolySystem::new(f.n(), equations)
}
