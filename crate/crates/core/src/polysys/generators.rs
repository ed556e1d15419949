//! Benchmark families.

use num_complex::Complex64;
use rand::seq::index;

use super::{PolySystem, Polynomial};
use crate::error::{Error, Result};
use crate::rng;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn unit_exponent(n: usize, vars: &[usize]) -> Vec<u32> {
    let mut e = vec![0u32; n];
    for &v in vars {
        e[v] += 1;
    }
    e
}

/// All adjacent 2×2 minors of a general `2 × cols` matrix.
///
/// Variables are ordered `x11..x1c, x21..x2c`; equation `j` is
/// `x1j·x2(j+1) − x2j·x1(j+1)`.
pub fn adjacent_minors(cols: usize) -> Result<PolySystem> {
    if cols < 2 {
        return Err(Error::invalid(format!(
            "adjacent minors need at least 2 columns, got {cols}"
        )));
    }
    let n = 2 * cols;
    let top = |j: usize| j;
    let bottom = |j: usize| cols + j;
    let equations = (0..cols - 1)
        .map(|j| {
            Polynomial::from_terms(
                n,
                vec![
                    (ONE, unit_exponent(n, &[top(j), bottom(j + 1)])),
                    (-ONE, unit_exponent(n, &[bottom(j), top(j + 1)])),
                ],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    PolySystem::new(n, equations)
}

/// Degree `2^(cols−1)` of the solution set of [`adjacent_minors`].
pub fn adjacent_minors_degree(cols: usize) -> u64 {
    1u64 << cols.saturating_sub(1).min(63)
}

/// The cyclic `n`-roots system.
pub fn cyclic_roots(n: usize) -> Result<PolySystem> {
    if n < 2 {
        return Err(Error::invalid(format!("cyclic roots need n >= 2, got {n}")));
    }
    let mut equations = Vec::with_capacity(n);
    for len in 1..n {
        let terms = (0..n).map(|start| {
            let vars: Vec<usize> = (0..len).map(|l| (start + l) % n).collect();
            (ONE, unit_exponent(n, &vars))
        });
        equations.push(Polynomial::from_terms(n, terms)?);
    }
    let all: Vec<usize> = (0..n).collect();
    equations.push(Polynomial::from_terms(
        n,
        vec![(ONE, unit_exponent(n, &all)), (-ONE, vec![0; n])],
    )?);
    PolySystem::new(n, equations)
}

/// Exponent vector drawn uniformly from all monomials in `n` variables of
/// total degree at most `max_degree` (stars and bars with a slack part).
fn random_exponents(rng: &mut rng::SeededRng, n: usize, max_degree: u32) -> Vec<u32> {
    let slots = max_degree as usize + n;
    let mut bars = index::sample(rng, slots, n).into_vec();
    bars.sort_unstable();
    let mut e = Vec::with_capacity(n);
    let mut prev: isize = -1;
    for b in bars {
        e.push((b as isize - prev - 1) as u32);
        prev = b as isize;
    }
    e
}

/// One sparse polynomial `x1^d + (t random terms of degree < d) + Σ c_i x_i`
/// with every random coefficient on the unit circle.
pub fn random_sparse_hypersurface(n: usize, d: u32, t: usize, seed: u64) -> Result<PolySystem> {
    if n < 1 {
        return Err(Error::invalid("hypersurface needs n >= 1"));
    }
    if d < 2 {
        return Err(Error::invalid(format!("hypersurface degree must be >= 2, got {d}")));
    }
    let mut r = rng::seeded(seed);
    let mut terms = Vec::with_capacity(1 + t + n);
    let mut lead = vec![0u32; n];
    lead[0] = d;
    terms.push((ONE, lead));
    for _ in 0..t {
        let e = random_exponents(&mut r, n, d - 1);
        terms.push((rng::unit_circle(&mut r), e));
    }
    for i in 0..n {
        terms.push((rng::unit_circle(&mut r), unit_exponent(n, &[i])));
    }
    PolySystem::new(n, vec![Polynomial::from_terms(n, terms)?])
}
