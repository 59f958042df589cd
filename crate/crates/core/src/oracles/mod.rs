//! Brute-force validators, independent of the closed forms: an adaptive
//! Simpson rule, a grid PDE solver for `□_η`, grid semigroup convolutions,
//! and finite-difference heat-equation residuals.

mod pde;
mod residual;
mod semigroup;
mod simpson;

pub use pde::{pde_evolve, GridField, GridSpec};
pub use residual::{heat_residual_check, BoxOperator, ResidualReport};
pub use semigroup::{heisenberg_semigroup_check, semigroup_check};
pub use simpson::{reference_quadrature, reference_quadrature_real};

use crate::scalar::Real;

/// Deterministic probe points in `[-radius, radius]^dim` from the Halton
/// sequence (bases 2, 3, 5, …), skipping the first `skip` terms.
pub fn halton_points<T: Real>(dim: usize, count: usize, radius: T, skip: usize) -> Vec<Vec<T>> {
    const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    assert!(dim <= PRIMES.len(), "at most 16 Halton dimensions");
    (skip + 1..=skip + count)
        .map(|k| {
            PRIMES[..dim]
                .iter()
                .map(|&b| {
                    let (mut f, mut r, mut i) = (1.0, 0.0, k);
                    while i > 0 {
                        f /= b as f64;
                        r += f * (i % b) as f64;
                        i /= b;
                    }
                    radius * T::lit(2.0 * r - 1.0)
                })
                .collect()
        })
        .collect()
}
