// SPDX-License-Identifier: Apache-2.0

//! Dense operator algebra on `(C^d)^{⊗n}`.
//!
//! Multi-indices are little-endian: the factor of label `k` (position
//! `k - 1`) has stride `d^(k-1)`, so the first label is the fastest-varying
//! digit of a row or column index.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Sub};
use core::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::combinatorics::Label;
use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

/// Exchange statistics of identical particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistics {
    Bose,
    Fermi,
    /// Distinguishable baseline: the symmetrizer is the identity map.
    Boltzmann,
}

impl Statistics {
    pub const ALL: [Statistics; 3] = [Statistics::Bose, Statistics::Fermi, Statistics::Boltzmann];

    /// Weight of a permutation of the given parity in the symmetrizer.
    pub fn sign(self, parity: u8) -> f64 {
        match self {
            Statistics::Fermi if parity % 2 == 1 => -1.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
            Statistics::Boltzmann => "boltzmann",
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bose" | "bose-einstein" => Ok(Statistics::Bose),
            "fermi" | "fermi-dirac" => Ok(Statistics::Fermi),
            "boltzmann" | "maxwell-boltzmann" => Ok(Statistics::Boltzmann),
            _ => Err(Error::InvalidParameter("unknown statistics")),
        }
    }
}

/// `d^n`, failing on overflow.
pub fn hilbert_dim(d: usize, n: usize) -> Result<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|n| d.checked_pow(n))
        .ok_or(Error::ResourceCap {
            what: "Hilbert-space dimension",
            requested: usize::MAX,
            cap: usize::MAX,
        })
}

/// A `d^n × d^n` operator on `n` particles, tagged with its statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyOperator {
    n: usize,
    d: usize,
    stats: Statistics,
    matrix: Matrix,
}

impl ManyBodyOperator {
    pub fn new(n: usize, d: usize, stats: Statistics, matrix: Matrix) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter("single-particle dimension must be at least 2"));
        }
        let side = hilbert_dim(d, n)?;
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ManyBodyOperator { n, d, stats, matrix })
    }

    pub(crate) fn from_parts(n: usize, d: usize, stats: Statistics, matrix: Matrix) -> Self {
        debug_assert_eq!(matrix.nrows(), d.pow(n as u32));
        ManyBodyOperator { n, d, stats, matrix }
    }

    pub fn zeros(n: usize, d: usize, stats: Statistics) -> Self {
        let side = d.pow(n as u32);
        ManyBodyOperator::from_parts(n, d, stats, Matrix::zeros(side, side))
    }

    pub fn identity(n: usize, d: usize, stats: Statistics) -> Self {
        let side = d.pow(n as u32);
        ManyBodyOperator::from_parts(n, d, stats, Matrix::identity(side, side))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn stats(&self) -> Statistics {
        self.stats
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn with_stats(mut self, stats: Statistics) -> Self {
        self.stats = stats;
        self
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        ManyBodyOperator::from_parts(self.n, self.d, self.stats, self.matrix.adjoint())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ManyBodyOperator::from_parts(self.n, self.d, self.stats, &self.matrix * c)
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus of `A - A†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    pub fn trace_norm(&self) -> f64 {
        trace_norm(self)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.side(),
                found: other.side(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(ManyBodyOperator::from_parts(self.n, self.d, self.stats, &self.matrix + &other.matrix))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(ManyBodyOperator::from_parts(self.n, self.d, self.stats, &self.matrix - &other.matrix))
    }
}

impl Add for &ManyBodyOperator {
    type Output = ManyBodyOperator;

    /// Panics when the operands act on different spaces.
    fn add(self, rhs: &ManyBodyOperator) -> ManyBodyOperator {
        self.checked_add(rhs).expect("operands act on the same space")
    }
}

impl Sub for &ManyBodyOperator {
    type Output = ManyBodyOperator;

    /// Panics when the operands act on different spaces.
    fn sub(self, rhs: &ManyBodyOperator) -> ManyBodyOperator {
        self.checked_sub(rhs).expect("operands act on the same space")
    }
}

impl Mul<f64> for &ManyBodyOperator {
    type Output = ManyBodyOperator;

    fn mul(self, rhs: f64) -> ManyBodyOperator {
        self.scaled(Complex64::new(rhs, 0.0))
    }
}

pub fn hermiticity_deviation(m: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Truncated sequence `(f_0, f_1, …, f_{N_max})` of operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSequence {
    f0: Complex64,
    components: Vec<ManyBodyOperator>,
    d: usize,
    stats: Statistics,
}

impl OperatorSequence {
    /// `components[k]` must act on `k + 1` particles.
    pub fn new(f0: Complex64, components: Vec<ManyBodyOperator>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptySet)?;
        let (d, stats) = (first.d, first.stats);
        for (k, c) in components.iter().enumerate() {
            if c.n != k + 1 {
                return Err(Error::DimensionMismatch {
                    expected: k + 1,
                    found: c.n,
                });
            }
            if c.d != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.d,
                });
            }
            if c.stats != stats {
                return Err(Error::StatisticsMismatch);
            }
        }
        Ok(OperatorSequence {
            f0,
            components,
            d,
            stats,
        })
    }

    pub fn zeros(n_max: usize, d: usize, stats: Statistics) -> Self {
        OperatorSequence {
            f0: Complex64::new(0.0, 0.0),
            components: (1..=n_max).map(|n| ManyBodyOperator::zeros(n, d, stats)).collect(),
            d,
            stats,
        }
    }

    pub fn f0(&self) -> Complex64 {
        self.f0
    }

    pub fn n_max(&self) -> usize {
        self.components.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn stats(&self) -> Statistics {
        self.stats
    }

    /// Component acting on `n` particles, `1 <= n <= N_max`.
    pub fn component(&self, n: usize) -> Option<&ManyBodyOperator> {
        n.checked_sub(1).and_then(|k| self.components.get(k))
    }

    pub fn components(&self) -> &[ManyBodyOperator] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ManyBodyOperator> {
        self.components
    }

    /// `|f_0| + Σ_n ‖f_n‖₁`.
    pub fn trace_norm(&self) -> f64 {
        self.f0.norm() + self.components.iter().map(trace_norm).sum::<f64>()
    }
}

/// A bijection of `{0, …, n-1}`, acting on tensor-factor positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter("permutation images must be a bijection"));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// Images written with labels `1..=n`.
    pub fn from_labels(images: &[u32]) -> Result<Self> {
        Permutation::new(
            images
                .iter()
                .map(|&i| (i as usize).wrapping_sub(1))
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidParameter("transposition outside the permuted set"));
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Ok(Permutation { images })
    }

    /// All `n!` permutations in lexicographic order of their image lists.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut current: Vec<usize> = (0..n).collect();
        let mut out = vec![Permutation {
            images: current.clone(),
        }];
        loop {
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
                return out;
            };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot exists");
            current.swap(i - 1, j);
            current[i..].reverse();
            out.push(Permutation {
                images: current.clone(),
            });
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `|π|`: 0 for even, 1 for odd permutations.
    pub fn parity(&self) -> u8 {
        let n = self.images.len();
        let mut visited = vec![false; n];
        let mut transpositions = 0usize;
        for start in 0..n {
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.images[i];
                len += 1;
            }
            if len > 0 {
                transpositions += len - 1;
            }
        }
        (transpositions % 2) as u8
    }

    /// `self ∘ other`, i.e. `k ↦ self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&k| self.images[k]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (k, &v) in self.images.iter().enumerate() {
            images[v] = k;
        }
        Permutation { images }
    }

    /// Row map `r ↦ r'` with digits `r'_k = r_{π(k)}`.
    fn index_map(&self, d: usize) -> Vec<usize> {
        let n = self.len();
        let side = d.pow(n as u32);
        let strides: Vec<usize> = (0..n).map(|k| d.pow(k as u32)).collect();
        (0..side)
            .map(|r| {
                (0..n)
                    .map(|k| ((r / strides[self.images[k]]) % d) * strides[k])
                    .sum()
            })
            .collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, i) in self.images.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str(")")
    }
}

/// Precomputed digit bookkeeping for placing factors at given positions.
struct Placement {
    // local index of each global index, per factor
    local: Vec<Vec<usize>>,
    // digits at uncovered positions, packed
    rest: Option<Vec<usize>>,
}

impl Placement {
    fn new(d: usize, n: usize, blocks: &[&[usize]]) -> Self {
        let side = d.pow(n as u32);
        let mut covered = vec![false; n];
        let local = blocks
            .iter()
            .map(|pos| {
                for &p in pos.iter() {
                    covered[p] = true;
                }
                (0..side)
                    .map(|r| {
                        pos.iter()
                            .enumerate()
                            .map(|(j, &p)| ((r / d.pow(p as u32)) % d) * d.pow(j as u32))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let uncovered: Vec<usize> = (0..n).filter(|&p| !covered[p]).collect();
        let rest = if uncovered.is_empty() {
            None
        } else {
            Some(
                (0..side)
                    .map(|r| {
                        uncovered
                            .iter()
                            .enumerate()
                            .map(|(j, &p)| ((r / d.pow(p as u32)) % d) * d.pow(j as u32))
                            .sum()
                    })
                    .collect(),
            )
        };
        Placement { local, rest }
    }
}

/// Tensor product of operators on disjoint position sets, identity on any
/// position not covered. Factor `j` of a block acts on position `block[j]`.
pub(crate) fn block_product(d: usize, n: usize, factors: &[(&Matrix, &[usize])]) -> Matrix {
    let side = d.pow(n as u32);
    let blocks: Vec<&[usize]> = factors.iter().map(|(_, p)| *p).collect();
    let place = Placement::new(d, n, &blocks);
    Matrix::from_fn(side, side, |r, c| {
        if let Some(rest) = &place.rest {
            if rest[r] != rest[c] {
                return Complex64::new(0.0, 0.0);
            }
        }
        let mut v = Complex64::new(1.0, 0.0);
        for (b, (m, _)) in factors.iter().enumerate() {
            v *= m[(place.local[b][r], place.local[b][c])];
        }
        v
    })
}

pub(crate) fn embed_matrix(a: &Matrix, d: usize, positions: &[usize], n: usize) -> Matrix {
    block_product(d, n, &[(a, positions)])
}

/// Places `a`, acting on the labels `support`, into the space of `ground`.
pub fn embed_operator(
    a: &ManyBodyOperator,
    support: &[Label],
    ground: &[Label],
) -> Result<ManyBodyOperator> {
    if a.n != support.len() {
        return Err(Error::DimensionMismatch {
            expected: support.len(),
            found: a.n,
        });
    }
    for (i, l) in support.iter().enumerate() {
        if support[..i].contains(l) {
            return Err(Error::DuplicateElement(i));
        }
    }
    let positions = support
        .iter()
        .map(|l| {
            ground
                .iter()
                .position(|g| g == l)
                .ok_or(Error::NotInGround(l.id()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = ground.len();
    hilbert_dim(a.d, n)?;
    Ok(ManyBodyOperator::from_parts(
        n,
        a.d,
        a.stats,
        embed_matrix(&a.matrix, a.d, &positions, n),
    ))
}

/// `a ⊗ b` with `a` on the leading labels.
pub fn tensor_product(a: &ManyBodyOperator, b: &ManyBodyOperator) -> Result<ManyBodyOperator> {
    if a.d != b.d {
        return Err(Error::DimensionMismatch {
            expected: a.d,
            found: b.d,
        });
    }
    let n = a.n + b.n;
    let pa: Vec<usize> = (0..a.n).collect();
    let pb: Vec<usize> = (a.n..n).collect();
    Ok(ManyBodyOperator::from_parts(
        n,
        a.d,
        a.stats,
        block_product(a.d, n, &[(&a.matrix, &pa), (&b.matrix, &pb)]),
    ))
}

/// `f^{⊗n}`.
pub fn tensor_power(f: &ManyBodyOperator, n: usize) -> Result<ManyBodyOperator> {
    let mut out = ManyBodyOperator::identity(0, f.d, f.stats);
    for _ in 0..n {
        out = tensor_product(&out, f)?;
    }
    Ok(out)
}

pub(crate) fn partial_trace_matrix(m: &Matrix, d: usize, n: usize, keep: usize) -> Matrix {
    let k = d.pow(keep as u32);
    let r = d.pow((n - keep) as u32);
    Matrix::from_fn(k, k, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for h in 0..r {
            acc += m[(i + k * h, j + k * h)];
        }
        acc
    })
}

/// Traces out labels `keep+1, …, n`.
pub fn partial_trace(f: &ManyBodyOperator, keep: usize) -> Result<ManyBodyOperator> {
    if keep > f.n {
        return Err(Error::ParticleCount { keep, count: f.n });
    }
    Ok(ManyBodyOperator::from_parts(
        keep,
        f.d,
        f.stats,
        partial_trace_matrix(&f.matrix, f.d, f.n, keep),
    ))
}

/// `(p_π f)(q; q') = f(q_{π(1)}, …, q_{π(n)}; q')`: permutes the ket side only.
///
/// Composition: `permute_ket(π, permute_ket(σ, f)) = permute_ket(π ∘ σ, f)`.
pub fn permute_ket(p: &Permutation, f: &ManyBodyOperator) -> Result<ManyBodyOperator> {
    check_perm(p, f)?;
    let map = p.index_map(f.d);
    let side = f.side();
    let m = Matrix::from_fn(side, side, |r, c| f.matrix[(map[r], c)]);
    Ok(ManyBodyOperator::from_parts(f.n, f.d, f.stats, m))
}

/// `U_π f U_π†`: the same relabeling on both kernel sides.
pub fn conjugate_by_permutation(p: &Permutation, f: &ManyBodyOperator) -> Result<ManyBodyOperator> {
    check_perm(p, f)?;
    let map = p.index_map(f.d);
    let side = f.side();
    let m = Matrix::from_fn(side, side, |r, c| f.matrix[(map[r], map[c])]);
    Ok(ManyBodyOperator::from_parts(f.n, f.d, f.stats, m))
}

fn check_perm(p: &Permutation, f: &ManyBodyOperator) -> Result<()> {
    if p.len() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            found: p.len(),
        });
    }
    Ok(())
}

pub(crate) fn symmetrize_matrix(stats: Statistics, m: &Matrix, d: usize, n: usize) -> Matrix {
    if stats == Statistics::Boltzmann || n <= 1 {
        return m.clone();
    }
    let perms = Permutation::all(n);
    let norm = 1.0 / perms.len() as f64;
    let side = m.nrows();
    let mut out = Matrix::zeros(side, side);
    for p in &perms {
        let w = stats.sign(p.parity()) * norm;
        let map = p.index_map(d);
        for c in 0..side {
            for r in 0..side {
                out[(r, c)] += m[(map[r], c)] * w;
            }
        }
    }
    out
}

/// `𝒮^±_n f = (1/n!) Σ_π (±1)^{|π|} p_π f`; the identity map for Boltzmann.
/// The result carries the tag `stats`.
pub fn symmetrize(stats: Statistics, f: &ManyBodyOperator) -> ManyBodyOperator {
    ManyBodyOperator::from_parts(f.n, f.d, stats, symmetrize_matrix(stats, &f.matrix, f.d, f.n))
}

/// Projects a state operator onto the statistics-valid sector from both
/// sides: `P f P` for Bose/Fermi, the conjugation average for Boltzmann.
pub fn symmetrize_two_sided(stats: Statistics, f: &ManyBodyOperator) -> ManyBodyOperator {
    let m = match stats {
        Statistics::Boltzmann => {
            let perms = Permutation::all(f.n);
            let side = f.side();
            let mut acc = Matrix::zeros(side, side);
            for p in &perms {
                let map = p.index_map(f.d);
                acc += Matrix::from_fn(side, side, |r, c| f.matrix[(map[r], map[c])]);
            }
            acc / Complex64::new(perms.len() as f64, 0.0)
        }
        _ => {
            let left = symmetrize_matrix(stats, &f.matrix, f.d, f.n);
            symmetrize_matrix(stats, &left.adjoint(), f.d, f.n).adjoint()
        }
    };
    ManyBodyOperator::from_parts(f.n, f.d, stats, m)
}

/// Sum of singular values.
pub fn trace_norm(f: &ManyBodyOperator) -> f64 {
    matrix_trace_norm(&f.matrix)
}

pub(crate) fn matrix_trace_norm(m: &Matrix) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone().svd(false, false).singular_values.sum()
}

/// Worst exchange-symmetry violations of an operator over a set of permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryResidual {
    /// `max_π ‖U_π f U_π† − f‖₁`
    pub two_sided: f64,
    /// `max_π ‖p_π f − (±1)^{|π|} f‖₁`; `None` for Boltzmann.
    pub one_sided: Option<f64>,
    /// Permutation attaining the larger of the two.
    pub worst: Option<Permutation>,
}

impl SymmetryResidual {
    pub fn max(&self) -> f64 {
        self.two_sided.max(self.one_sided.unwrap_or(0.0))
    }
}

/// Checks two-sided invariance under `conjugation` permutations and the
/// one-sided sign rule under `one_sided` permutations.
pub fn symmetry_residual(
    f: &ManyBodyOperator,
    conjugation: &[Permutation],
    one_sided: &[Permutation],
) -> Result<SymmetryResidual> {
    let mut res = SymmetryResidual {
        two_sided: 0.0,
        one_sided: None,
        worst: None,
    };
    let mut worst = 0.0;
    for p in conjugation {
        let r = trace_norm(&(&conjugate_by_permutation(p, f)? - f));
        res.two_sided = res.two_sided.max(r);
        if r > worst {
            worst = r;
            res.worst = Some(p.clone());
        }
    }
    if f.stats != Statistics::Boltzmann {
        let mut one = 0.0f64;
        for p in one_sided {
            let sign = f.stats.sign(p.parity());
            let r = trace_norm(&(&permute_ket(p, f)? - &(f * sign)));
            one = one.max(r);
            if r > worst {
                worst = r;
                res.worst = Some(p.clone());
            }
        }
        res.one_sided = Some(one);
    }
    Ok(res)
}

/// Full-group exchange-symmetry residual of a state component.
pub fn exchange_symmetry_residual(f: &ManyBodyOperator) -> Result<SymmetryResidual> {
    let perms = Permutation::all(f.n);
    symmetry_residual(f, &perms, &perms)
}

/// Human-readable operator label used in diagnostics.
pub fn describe(f: &ManyBodyOperator) -> alloc::string::String {
    let mut s = "n=".to_string();
    s.push_str(&f.n.to_string());
    s.push_str(",d=");
    s.push_str(&f.d.to_string());
    s.push(',');
    s.push_str(f.stats.name());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::labels;
    use crate::testing::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(n: usize, d: usize, entries: &[f64]) -> ManyBodyOperator {
        let side = entries.len();
        let m = Matrix::from_fn(side, side, |i, j| if i == j { c(entries[i]) } else { c(0.0) });
        ManyBodyOperator::new(n, d, Statistics::Boltzmann, m).unwrap()
    }

    // Kernel entry of an n-particle operator at digit tuples q, q' (label order).
    fn kernel(f: &ManyBodyOperator, q: &[usize], qp: &[usize]) -> Complex64 {
        let d = f.d();
        let idx = |t: &[usize]| t.iter().enumerate().map(|(k, &x)| x * d.pow(k as u32)).sum::<usize>();
        f.matrix()[(idx(q), idx(qp))]
    }

    #[test]
    fn embed_whole_ground_and_identity() {
        let mut rng = rng(1);
        let a = random_operator(&mut rng, 2, 2, Statistics::Bose);
        let g = labels(2);
        assert_eq!(embed_operator(&a, &g, &g).unwrap(), a);
        let id = ManyBodyOperator::identity(1, 3, Statistics::Boltzmann);
        let e = embed_operator(&id, &labels(1), &labels(3)).unwrap();
        assert_eq!(e, ManyBodyOperator::identity(3, 3, Statistics::Boltzmann));
    }

    #[test]
    fn embed_on_second_factor_matches_index_loop() {
        let a = diag(1, 2, &[1.0, -1.0]);
        let ground = labels(2);
        let z = [ground[1]];
        let e = embed_operator(&a, &z, &ground).unwrap();
        for q1 in 0..2 {
            for q2 in 0..2 {
                for p1 in 0..2 {
                    for p2 in 0..2 {
                        let expect = if q1 == p1 { a.matrix()[(q2, p2)] } else { c(0.0) };
                        assert_eq!(kernel(&e, &[q1, q2], &[p1, p2]), expect);
                    }
                }
            }
        }
        assert!((e.trace() - a.trace() * 2.0).norm() < 1e-15);
    }

    #[test]
    fn embed_errors() {
        let a = diag(1, 2, &[1.0, 2.0]);
        let ground = labels(2);
        let outside = [Label::new(5).unwrap()];
        assert_eq!(embed_operator(&a, &outside, &ground), Err(Error::NotInGround(5)));
        assert!(matches!(
            embed_operator(&a, &ground, &ground),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_cases() {
        let mut rng = rng(2);
        let f = random_operator(&mut rng, 2, 2, Statistics::Boltzmann);
        assert_eq!(partial_trace(&f, 2).unwrap(), f);

        let a = random_operator(&mut rng, 1, 3, Statistics::Boltzmann);
        let b = random_operator(&mut rng, 1, 3, Statistics::Boltzmann);
        let ab = tensor_product(&a, &b).unwrap();
        let reduced = partial_trace(&ab, 1).unwrap();
        assert!(trace_norm(&(&reduced - &a.scaled(b.trace()))) < 1e-13);

        // four-index loop oracle
        let r = partial_trace(&f, 1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0);
                for h in 0..2 {
                    acc += kernel(&f, &[i, h], &[j, h]);
                }
                assert!((r.matrix()[(i, j)] - acc).norm() < 1e-15);
            }
        }
        assert!((r.trace() - f.trace()).norm() < 1e-14);
        assert_eq!(partial_trace(&f, 3), Err(Error::ParticleCount { keep: 3, count: 2 }));
    }

    #[test]
    fn permute_ket_cases() {
        let mut rng = rng(3);
        let f = random_operator(&mut rng, 3, 2, Statistics::Boltzmann);
        assert_eq!(permute_ket(&Permutation::identity(3), &f).unwrap(), f);

        let a = random_operator(&mut rng, 1, 2, Statistics::Boltzmann);
        let b = random_operator(&mut rng, 1, 2, Statistics::Boltzmann);
        let ab = tensor_product(&a, &b).unwrap();
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        let p = permute_ket(&swap, &ab).unwrap();
        for q1 in 0..2 {
            for q2 in 0..2 {
                for p1 in 0..2 {
                    for p2 in 0..2 {
                        assert_eq!(kernel(&p, &[q1, q2], &[p1, p2]), kernel(&ab, &[q2, q1], &[p1, p2]));
                    }
                }
            }
        }
        let twice = permute_ket(&swap, &p).unwrap();
        assert_eq!(twice, ab);

        // three-label kernel relabeling
        let cyc = Permutation::new(vec![1, 2, 0]).unwrap();
        let pf = permute_ket(&cyc, &f).unwrap();
        for r in 0..8usize {
            let q = [r % 2, (r / 2) % 2, r / 4];
            let src = [q[1], q[2], q[0]];
            for col in 0..8usize {
                let qp = [col % 2, (col / 2) % 2, col / 4];
                assert_eq!(kernel(&pf, &q, &qp), kernel(&f, &src, &qp));
            }
        }
        assert!(permute_ket(&swap, &f).is_err());
    }

    #[test]
    fn composition_law() {
        let mut rng = rng(4);
        let f = random_operator(&mut rng, 3, 2, Statistics::Boltzmann);
        let perms = Permutation::all(3);
        for p in &perms {
            for s in &perms {
                let lhs = permute_ket(p, &permute_ket(s, &f).unwrap()).unwrap();
                let rhs = permute_ket(&p.compose(s).unwrap(), &f).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn permutation_basics() {
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::transposition(3, 0, 2).unwrap().parity(), 1);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().parity(), 0);
        assert!(Permutation::new(vec![0, 0]).is_err());
        let p = Permutation::from_labels(&[2, 3, 1]).unwrap();
        assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(3));
        let odd = Permutation::all(4).iter().filter(|p| p.parity() == 1).count();
        assert_eq!(odd, 12);
    }

    #[test]
    fn symmetrize_boltzmann_is_identity_map() {
        let mut rng = rng(5);
        let f = random_operator(&mut rng, 2, 2, Statistics::Boltzmann);
        assert_eq!(symmetrize(Statistics::Boltzmann, &f), f);
    }

    #[test]
    fn fermi_pair_matches_two_term_expansion() {
        let a = diag(1, 2, &[1.0, 2.0]);
        let aa = tensor_product(&a, &a).unwrap();
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        let oracle = &(&aa - &permute_ket(&swap, &aa).unwrap()) * 0.5;
        let s = symmetrize(Statistics::Fermi, &aa);
        assert!(trace_norm(&(&s - &oracle.with_stats(Statistics::Fermi))) < 1e-15);
    }

    #[test]
    fn symmetrizer_properties() {
        let mut rng = rng(6);
        for stats in Statistics::ALL {
            for n in 1..=3 {
                let f = random_operator(&mut rng, n, 2, stats);
                let g = random_operator(&mut rng, n, 2, stats);
                let s = symmetrize(stats, &f);
                assert!(trace_norm(&(&symmetrize(stats, &s) - &s)) < 1e-14);
                // linearity
                let lhs = symmetrize(stats, &(&(&f * 2.0) + &g));
                let rhs = &(&s * 2.0) + &symmetrize(stats, &g);
                assert!(trace_norm(&(&lhs - &rhs)) < 1e-13);
                if stats != Statistics::Boltzmann {
                    for p in Permutation::all(n) {
                        let moved = permute_ket(&p, &s).unwrap();
                        let expect = &s * stats.sign(p.parity());
                        assert!(trace_norm(&(&moved - &expect)) < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn two_sided_projection_is_conjugation_invariant() {
        let mut rng = rng(7);
        for stats in Statistics::ALL {
            let f = symmetrize_two_sided(stats, &random_operator(&mut rng, 3, 3, stats));
            let res = exchange_symmetry_residual(&f).unwrap();
            assert!(res.max() < 1e-13, "{stats}: {res:?}");
        }
    }

    #[test]
    fn trace_norm_cases() {
        assert_eq!(trace_norm(&ManyBodyOperator::zeros(2, 2, Statistics::Bose)), 0.0);
        assert!((trace_norm(&diag(1, 2, &[1.0, 2.0])) - 3.0).abs() < 1e-14);
        let mut rng = rng(8);
        let f = random_operator(&mut rng, 2, 2, Statistics::Boltzmann);
        // spectral route: singular values are square roots of eig(f†f)
        let gram = f.matrix().adjoint() * f.matrix();
        let eig = gram.symmetric_eigen();
        let oracle: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
        assert!((trace_norm(&f) - oracle).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_is_a_norm() {
        let mut rng = rng(9);
        for _ in 0..20 {
            let f = random_operator(&mut rng, 2, 2, Statistics::Boltzmann);
            let g = random_operator(&mut rng, 2, 2, Statistics::Boltzmann);
            assert!(trace_norm(&(&f + &g)) <= trace_norm(&f) + trace_norm(&g) + 1e-12);
            let z = Complex64::new(-1.5, 0.7);
            assert!((trace_norm(&f.scaled(z)) - z.norm() * trace_norm(&f)).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_then_trace_recovers_support() {
        let mut rng = rng(10);
        let a = random_operator(&mut rng, 2, 2, Statistics::Boltzmann);
        let e = embed_operator(&a, &labels(2), &labels(4)).unwrap();
        let back = partial_trace(&e, 2).unwrap();
        assert!(trace_norm(&(&back - &(&a * 4.0))) < 1e-13);
        assert!((e.trace() - a.trace() * 4.0).norm() < 1e-13);
    }

    #[test]
    fn sequence_norm_and_validation() {
        let mut rng = rng(11);
        let comps: Vec<_> = (1..=3).map(|n| random_operator(&mut rng, n, 2, Statistics::Bose)).collect();
        let seq = OperatorSequence::new(c(-2.0), comps.clone()).unwrap();
        let expect = 2.0 + comps.iter().map(trace_norm).sum::<f64>();
        assert!((seq.trace_norm() - expect).abs() < 1e-14);
        assert_eq!(seq.component(2), Some(&comps[1]));
        assert_eq!(seq.component(0), None);
        let bad = vec![comps[1].clone()];
        assert!(OperatorSequence::new(c(0.0), bad).is_err());
    }

    #[test]
    fn operator_validation() {
        assert!(ManyBodyOperator::new(1, 1, Statistics::Bose, Matrix::zeros(1, 1)).is_err());
        assert!(ManyBodyOperator::new(2, 2, Statistics::Bose, Matrix::zeros(3, 3)).is_err());
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(ManyBodyOperator::new(1, 2, Statistics::Bose, m), Err(Error::NonFinite));
        assert_eq!("Fermi".parse::<Statistics>().unwrap(), Statistics::Fermi);
    }

    proptest::proptest! {
        #[test]
        fn partial_trace_preserves_trace(seed in 0u64..10_000, n in 1usize..=4, keep in 0usize..=4) {
            let keep = keep.min(n);
            let mut rng = rng(seed);
            let f = random_operator(&mut rng, n, 2, Statistics::Boltzmann);
            let r = partial_trace(&f, keep).unwrap();
            let scale = 1.0 + f.trace().norm();
            proptest::prop_assert!((r.trace() - f.trace()).norm() <= 1e-13 * scale);
        }
    }
}
