//! Shared fixtures for the benchmarks.

use witsamp_core::{polysys, rng, solver, AffinePlane, Complex64, TrackerConfig, WitnessSet};

/// Witness set of the `2 × cols` adjacent minors, seeded like the tests.
pub fn minors_witness(cols: usize) -> WitnessSet {
    let f = polysys::adjacent_minors(cols).expect("cols >= 2");
    solver::witness_generate(&f, cols - 1, cols as u64, &TrackerConfig::default()).expect("minors witness set")
}

/// The `j`-th random target plane for `w`.
pub fn target(w: &WitnessSet, j: u64) -> AffinePlane {
    AffinePlane::random(w.n(), w.k(), rng::derive_seed(77, j)).expect("valid dimensions")
}

pub fn random_point(n: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng::seeded(seed);
    (0..n).map(|_| rng::complex_uniform(&mut r, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        let w = minors_witness(3);
        assert_eq!(w.degree(), 4);
        let t = target(&w, 1);
        assert_eq!((t.n(), t.k()), (6, 2));
        assert_ne!(t, target(&w, 2));
        assert_eq!(random_point(4, 9), random_point(4, 9));
    }
}
