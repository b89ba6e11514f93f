// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hilbert::{ManyBodyOperator, Matrix, Statistics};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, side: usize) -> Matrix {
    Matrix::from_fn(side, side, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_operator(rng: &mut ChaCha8Rng, n: usize, d: usize, stats: Statistics) -> ManyBodyOperator {
    ManyBodyOperator::new(n, d, stats, random_matrix(rng, d.pow(n as u32))).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, side: usize) -> Matrix {
    let m = random_matrix(rng, side);
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Positive, exchange-symmetric, unit-trace state on `n` particles.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, d: usize, stats: Statistics) -> ManyBodyOperator {
    let m = random_matrix(rng, d.pow(n as u32));
    let raw = ManyBodyOperator::new(n, d, stats, m.adjoint() * m).unwrap();
    let sym = crate::hilbert::symmetrize_two_sided(stats, &raw);
    let tr = sym.trace().re;
    if tr > 1e-12 {
        sym.scaled(Complex64::new(1.0 / tr, 0.0))
    } else {
        sym
    }
}

/// `(1, D_1, …, D_{N_max})` with random symmetric states scaled by `scale^n`.
pub fn random_density_sequence(
    rng: &mut ChaCha8Rng,
    n_max: usize,
    d: usize,
    stats: Statistics,
    scale: f64,
) -> crate::hilbert::OperatorSequence {
    let comps = (1..=n_max)
        .map(|n| random_state(rng, n, d, stats).scaled(Complex64::new(scale.powi(n as i32), 0.0)))
        .collect();
    crate::hilbert::OperatorSequence::new(Complex64::new(1.0, 0.0), comps).unwrap()
}

/// Hermitian `k`-body potential invariant under factor relabeling.
pub fn symmetric_potential(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Matrix {
    let raw = ManyBodyOperator::new(k, d, Statistics::Boltzmann, random_hermitian(rng, d.pow(k as u32))).unwrap();
    crate::hilbert::symmetrize_two_sided(Statistics::Boltzmann, &raw).into_matrix()
}

/// Random one-body term plus symmetric potentials of the listed orders.
pub fn random_spec(rng: &mut ChaCha8Rng, d: usize, orders: &[usize]) -> crate::hamiltonian::InteractionSpec {
    let mut spec = crate::hamiltonian::InteractionSpec::new(d, 1.0, random_hermitian(rng, d)).unwrap();
    for &k in orders {
        let phi = symmetric_potential(rng, d, k);
        spec = spec.with_potential(k, phi).unwrap();
    }
    spec
}

/// Central difference with one Richardson step, `(4 D(h/2) − D(h)) / 3`.
pub fn richardson<F: Fn(f64) -> Matrix>(f: F, t: f64, h: f64) -> Matrix {
    let central = |h: f64| (f(t + h) - f(t - h)) * Complex64::new(0.5 / h, 0.0);
    (central(h / 2.0) * Complex64::new(4.0, 0.0) - central(h)) * Complex64::new(1.0 / 3.0, 0.0)
}
