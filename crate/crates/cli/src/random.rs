// SPDX-License-Identifier: Apache-2.0

//! Seeded random operators for scenarios and suites.

use clusterdyn_core::hilbert::symmetrize_two_sided;
use clusterdyn_core::{Complex64, ManyBodyOperator, Matrix, OperatorSequence, Statistics};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, side: usize) -> Matrix {
    Matrix::from_fn(side, side, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_operator(rng: &mut ChaCha8Rng, n: usize, d: usize, stats: Statistics) -> ManyBodyOperator {
    ManyBodyOperator::new(n, d, stats, random_matrix(rng, d.pow(n as u32))).expect("finite entries")
}

/// `M†M / Tr(M†M)` (or the Hermitian part of `M` when `positive` is false),
/// then projected onto the exchange-symmetric sector of `stats`.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, d: usize, stats: Statistics, positive: bool) -> ManyBodyOperator {
    let m = random_matrix(rng, d.pow(n as u32));
    let raw = if positive {
        let p = m.adjoint() * &m;
        let tr = p.trace().re;
        p / Complex64::new(tr, 0.0)
    } else {
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    };
    let op = ManyBodyOperator::new(n, d, stats, raw).expect("finite entries");
    symmetrize_two_sided(stats, &op)
}

/// `(1, D_1, …, D_{N_max})` with `D_n` a random state scaled by `scale^n`.
pub fn random_density_sequence(
    seed: u64,
    n_max: usize,
    d: usize,
    stats: Statistics,
    positive: bool,
    scale: f64,
) -> OperatorSequence {
    let mut rng = rng(seed);
    let comps = (1..=n_max)
        .map(|n| random_state(&mut rng, n, d, stats, positive).scaled(Complex64::new(scale.powi(n as i32), 0.0)))
        .collect();
    OperatorSequence::new(Complex64::new(1.0, 0.0), comps).expect("consistent layout")
}

#[cfg(test)]
mod tests {
    use super::*;
    use clusterdyn_core::hilbert::exchange_symmetry_residual;

    #[test]
    fn seeded_states_are_reproducible_and_symmetric() {
        let a = random_density_sequence(7, 3, 2, Statistics::Fermi, true, 1.0);
        let b = random_density_sequence(7, 3, 2, Statistics::Fermi, true, 1.0);
        assert_eq!(a, b);
        for c in a.components() {
            assert!(exchange_symmetry_residual(c).unwrap().max() < 1e-13);
            assert!(c.hermiticity_deviation() < 1e-14);
        }
        assert!((a.component(1).unwrap().trace().re - 1.0).abs() < 1e-14);
    }
}
