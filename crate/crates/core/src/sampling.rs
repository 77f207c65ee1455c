//! Deterministic low-discrepancy sample points in a parameter box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Fraction of each side kept clear at both ends.
pub const MARGIN: f64 = 0.05;

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// `count` points of a Halton sequence in `domain`, randomly shifted modulo
/// one with a seeded generator and shrunk by [`MARGIN`]. A single point is
/// placed at the center of the box.
pub fn sample_points(domain: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = domain.len();
    assert!(dim <= PRIMES.len(), "at most {} parameters", PRIMES.len());
    if count == 1 {
        return vec![domain.iter().map(|(a, b)| 0.5 * (a + b)).collect()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            domain
                .iter()
                .enumerate()
                .map(|(k, &(lo, hi))| {
                    let t = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                    let w = hi - lo;
                    lo + w * (MARGIN + (1.0 - 2.0 * MARGIN) * t)
                })
                .collect()
        })
        .collect()
}
