//! Sparse multivariate polynomial systems over the complex numbers.
//!
//! Terms are kept merged and sorted in graded lexicographic order (leading
//! term first), so two systems are equal exactly when they are structurally
//! equal. Evaluation caches the powers of each variable once per point and
//! then accumulates monomials term by term.

mod generators;
mod substitute;
mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};

pub use generators::{adjacent_minors, adjacent_minors_degree, cyclic_roots, random_sparse_hypersurface};
pub use substitute::{expand_substitution, restrict, square_system, RestrictedSystem};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coefficient: Complex64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coefficient: Complex64, exponents: Vec<u32>) -> Self {
        Monomial {
            coefficient,
            exponents,
        }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Graded lexicographic comparison, larger monomials first.
fn grlex_desc(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    /// Builds a polynomial in `n` variables, merging repeated exponent
    /// vectors by coefficient addition and dropping terms that cancel.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, Vec<u32>)>,
    {
        let mut merged: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (c, e) in terms {
            if e.len() != n {
                return Err(Error::Dimension {
                    context: "monomial exponent vector",
                    expected: n,
                    got: e.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid("non-finite coefficient"));
            }
            *merged.entry(e).or_insert(ZERO) += c;
        }
        let mut terms: Vec<Monomial> = merged
            .into_iter()
            .filter(|(_, c)| *c != ZERO)
            .map(|(e, c)| Monomial::new(c, e))
            .collect();
        terms.sort_by(|a, b| grlex_desc(&a.exponents, &b.exponents));
        Ok(Polynomial { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient_of(&self, exponents: &[u32]) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.exponents == exponents)
            .map_or(ZERO, |t| t.coefficient)
    }

    /// Dense coefficients `c_0..c_d` of a univariate polynomial.
    pub fn univariate_coefficients(&self) -> Result<Vec<Complex64>> {
        if self.n != 1 {
            return Err(Error::Dimension {
                context: "univariate coefficients",
                expected: 1,
                got: self.n,
            });
        }
        let mut out = vec![ZERO; self.degree() as usize + 1];
        for t in &self.terms {
            out[t.exponents[0] as usize] += t.coefficient;
        }
        Ok(out)
    }

    /// `Σ weights_i · polys_i`, merged.
    pub fn linear_combination(n: usize, weights: &[Complex64], polys: &[&Polynomial]) -> Result<Self> {
        let terms = weights.iter().zip(polys).flat_map(|(w, p)| {
            p.terms
                .iter()
                .map(move |t| (w * t.coefficient, t.exponents.clone()))
        });
        Polynomial::from_terms(n, terms)
    }
}

#[derive(Clone, Debug)]
struct SparseTerm {
    coefficient: Complex64,
    factors: Vec<(usize, u32)>,
}

/// A list of `m` polynomials in `n` variables.
#[derive(Clone, Debug)]
pub struct PolySystem {
    n: usize,
    equations: Vec<Polynomial>,
    compiled: Vec<Vec<SparseTerm>>,
    max_power: Vec<u32>,
}

impl PartialEq for PolySystem {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.equations == other.equations
    }
}

impl PolySystem {
    pub fn new(n: usize, equations: Vec<Polynomial>) -> Result<Self> {
        for p in &equations {
            if p.n != n {
                return Err(Error::Dimension {
                    context: "polynomial variable count",
                    expected: n,
                    got: p.n,
                });
            }
        }
        let mut max_power = vec![0u32; n];
        let compiled = equations
            .iter()
            .map(|p| {
                p.terms
                    .iter()
                    .map(|t| {
                        let factors: Vec<(usize, u32)> = t
                            .exponents
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(j, &e)| (j, e))
                            .collect();
                        for &(j, e) in &factors {
                            max_power[j] = max_power[j].max(e);
                        }
                        SparseTerm {
                            coefficient: t.coefficient,
                            factors,
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(PolySystem {
            n,
            equations,
            compiled,
            max_power,
        })
    }

    /// Convenience constructor from raw `(coefficient, exponents)` lists.
    pub fn from_term_lists(n: usize, equations: Vec<Vec<(Complex64, Vec<u32>)>>) -> Result<Self> {
        let polys = equations
            .into_iter()
            .map(|terms| Polynomial::from_terms(n, terms))
            .collect::<Result<Vec<_>>>()?;
        PolySystem::new(n, polys)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.equations.iter().map(Polynomial::degree).collect()
    }

    pub fn term_counts(&self) -> Vec<usize> {
        self.equations.iter().map(|p| p.terms.len()).collect()
    }

    /// Appends the equations of `other` (same variable count).
    pub fn stacked(&self, other: &PolySystem) -> Result<PolySystem> {
        if other.n != self.n {
            return Err(Error::Dimension {
                context: "stacking systems",
                expected: self.n,
                got: other.n,
            });
        }
        let mut eqs = self.equations.clone();
        eqs.extend(other.equations.iter().cloned());
        PolySystem::new(self.n, eqs)
    }

    fn check_point(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                context: "evaluation point",
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Table of `x_j^e` for `e ≤ max_power[j]`, flattened with offsets.
    fn power_table(&self, x: &[Complex64]) -> (Vec<Complex64>, Vec<usize>) {
        let mut offsets = Vec::with_capacity(self.n);
        let mut table = Vec::new();
        for (j, &top) in self.max_power.iter().enumerate() {
            offsets.push(table.len());
            let mut p = Complex64::new(1.0, 0.0);
            table.push(p);
            for _ in 0..top {
                p *= x[j];
                table.push(p);
            }
        }
        (table, offsets)
    }

    pub fn evaluate(&self, x: &[Complex64]) -> Result<ComplexVector> {
        self.check_point(x)?;
        let (table, offsets) = self.power_table(x);
        Ok(self
            .compiled
            .iter()
            .map(|terms| {
                terms.iter().fold(ZERO, |acc, t| {
                    let mono = t
                        .factors
                        .iter()
                        .fold(t.coefficient, |p, &(j, e)| p * table[offsets[j] + e as usize]);
                    acc + mono
                })
            })
            .collect())
    }

    /// `Σ |c| |x^a|` over the terms of each equation: the magnitude that
    /// rounding errors in [`evaluate`](Self::evaluate) are proportional to.
    pub fn evaluation_scale(&self, x: &[Complex64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let abs: Vec<f64> = x.iter().map(|v| v.norm()).collect();
        Ok(self
            .compiled
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| {
                        t.factors
                            .iter()
                            .fold(t.coefficient.norm(), |p, &(j, e)| p * abs[j].powi(e as i32))
                    })
                    .sum()
            })
            .collect())
    }

    /// Largest componentwise relative residual `|f_i(x)| / Σ|c||x^a|`.
    pub fn backward_error(&self, x: &[Complex64]) -> Result<f64> {
        let values = self.evaluate(x)?;
        let scale = self.evaluation_scale(x)?;
        Ok(values
            .iter()
            .zip(&scale)
            .map(|(v, &s)| match (v.norm(), s) {
                (0.0, _) => 0.0,
                (r, s) if s > 0.0 => r / s,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max))
    }

    pub fn jacobian(&self, x: &[Complex64]) -> Result<ComplexMatrix> {
        Ok(self.evaluate_with_jacobian(x)?.1)
    }

    /// Values and the `m × n` Jacobian in one pass over the terms.
    pub fn evaluate_with_jacobian(&self, x: &[Complex64]) -> Result<(ComplexVector, ComplexMatrix)> {
        self.check_point(x)?;
        let (table, offsets) = self.power_table(x);
        let mut values = vec![ZERO; self.m()];
        let mut jac = ComplexMatrix::zeros(self.m(), self.n);
        let mut powers: Vec<Complex64> = Vec::new();
        let mut suffix: Vec<Complex64> = Vec::new();
        for (i, terms) in self.compiled.iter().enumerate() {
            for t in terms {
                powers.clear();
                powers.extend(
                    t.factors
                        .iter()
                        .map(|&(j, e)| table[offsets[j] + e as usize]),
                );
                let r = powers.len();
                suffix.clear();
                suffix.resize(r + 1, Complex64::new(1.0, 0.0));
                for q in (0..r).rev() {
                    suffix[q] = suffix[q + 1] * powers[q];
                }
                values[i] += t.coefficient * suffix[0];
                let mut prefix = t.coefficient;
                for (q, &(j, e)) in t.factors.iter().enumerate() {
                    let lower = table[offsets[j] + e as usize - 1];
                    jac[(i, j)] += prefix * (e as f64) * lower * suffix[q + 1];
                    prefix *= powers[q];
                }
            }
        }
        Ok((values, jac))
    }

    pub fn to_text(&self) -> String {
        text::write_system(self)
    }

    pub fn from_text(s: &str) -> Result<Self> {
        text::parse_system(s)
    }

    /// Parses a system from an iterator of lines; `first_line` is the 1-based
    /// line number of the header (used for error messages).
    pub(crate) fn parse_lines<'a, I>(lines: I, first_line: usize) -> Result<(Self, usize)>
    where
        I: Iterator<Item = &'a str>,
    {
        text::parse_lines(lines, first_line)
    }
}

impl std::fmt::Display for PolySystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_point(vals: &[f64]) -> Vec<Complex64> {
        vals.iter().map(|&v| c(v, 0.0)).collect()
    }

    #[test]
    fn merges_and_sorts_terms() {
        let p = Polynomial::from_terms(
            2,
            vec![
                (c(1.0, 0.0), vec![0, 1]),
                (c(2.0, 0.0), vec![2, 0]),
                (c(3.0, 0.0), vec![0, 1]),
                (c(1.0, 0.0), vec![0, 0]),
                (c(-1.0, 0.0), vec![0, 0]),
            ],
        )
        .unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[0].exponents, vec![2, 0]);
        assert_eq!(p.coefficient_of(&[0, 1]), c(4.0, 0.0));
    }

    #[test]
    fn rejects_wrong_exponent_length() {
        assert!(Polynomial::from_terms(3, vec![(c(1.0, 0.0), vec![1, 0])]).is_err());
    }

    #[test]
    fn evaluate_adjacent_minors() {
        let f = adjacent_minors(3).unwrap();
        let ones = real_point(&[1.0; 6]);
        assert_eq!(f.evaluate(&ones).unwrap(), vec![c(0.0, 0.0); 2]);
        let x = real_point(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(f.evaluate(&x).unwrap(), vec![c(-3.0, 0.0), c(-3.0, 0.0)]);
    }

    #[test]
    fn evaluate_empty_system() {
        let f = PolySystem::new(3, vec![]).unwrap();
        assert!(f.evaluate(&real_point(&[1.0, 2.0, 3.0])).unwrap().is_empty());
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let f = adjacent_minors(3).unwrap();
        assert!(matches!(
            f.evaluate(&real_point(&[1.0; 5])),
            Err(Error::Dimension { .. })
        ));
        assert!(f.jacobian(&real_point(&[1.0; 7])).is_err());
    }

    #[test]
    fn jacobian_of_product() {
        let f = PolySystem::from_term_lists(2, vec![vec![(c(1.0, 0.0), vec![1, 1])]]).unwrap();
        let j = f.jacobian(&real_point(&[2.0, 3.0])).unwrap();
        assert_eq!(j.row(0), &[c(3.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn jacobian_adjacent_minors_row() {
        let f = adjacent_minors(3).unwrap();
        let j = f
            .jacobian(&real_point(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))
            .unwrap();
        let expected = real_point(&[5.0, -4.0, 0.0, -2.0, 1.0, 0.0]);
        assert_eq!(j.row(0), expected.as_slice());
    }

    #[test]
    fn jacobian_handles_zero_coordinates() {
        // d/dx (x^3 y) at x = 0 must be 0, d/dy = 0; d/dx(x y) at (0, 2) = 2
        let f = PolySystem::from_term_lists(
            2,
            vec![
                vec![(c(1.0, 0.0), vec![3, 1])],
                vec![(c(1.0, 0.0), vec![1, 1])],
            ],
        )
        .unwrap();
        let j = f.jacobian(&real_point(&[0.0, 2.0])).unwrap();
        assert_eq!(j[(0, 0)], c(0.0, 0.0));
        assert_eq!(j[(1, 0)], c(2.0, 0.0));
        assert_eq!(j[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn evaluate_matches_jacobian_pass_values() {
        let f = cyclic_roots(5).unwrap();
        let mut r = rng::seeded(4);
        let x = rng::unit_circle_vec(&mut r, 5);
        let (v, _) = f.evaluate_with_jacobian(&x).unwrap();
        let w = f.evaluate(&x).unwrap();
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() <= 1e-13 * (1.0 + a.norm()));
        }
    }
}
