//! Deterministic random instances for the validation suites.
//!
//! A tiny splitmix64 generator keeps the randomized cross-checks reproducible
//! across platforms without pulling an RNG crate into the library surface.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::lindblad::JumpChannel;
use crate::quantum::{ComplexOperator, DensityMatrix};

/// splitmix64; passes through the full 64-bit state space, good enough for
/// test-instance generation.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_signed(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}

/// Random Hermitian operator with entries of magnitude ~`scale` (rad/ns).
pub fn random_hermitian(dim: usize, scale: f64, rng: &mut SplitMix64) -> ComplexOperator {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.next_signed(), rng.next_signed()) * Complex64::new(scale, 0.0)
    });
    let herm = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    ComplexOperator::from_matrix(herm)
}

/// Random full-rank density matrix via `A A^dag / Tr`.
pub fn random_density(dim: usize, rng: &mut SplitMix64) -> DensityMatrix {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.next_signed(), rng.next_signed())
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / Complex64::new(tr, 0.0)).expect("A A^dag is a valid state")
}

/// Random jump channels with rates in `[0, 1.5)` rad/ns.
pub fn random_channels(dim: usize, count: usize, rng: &mut SplitMix64) -> Vec<JumpChannel> {
    (0..count)
        .map(|k| {
            let op = DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.next_signed(), rng.next_signed())
            });
            JumpChannel::new(
                ComplexOperator::from_matrix(op),
                1.5 * rng.next_f64(),
                k % 2 == 0,
                &format!("random-{k}"),
            )
            .expect("non-negative rate")
        })
        .collect()
}
