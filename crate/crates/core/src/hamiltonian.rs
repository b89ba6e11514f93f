// SPDX-License-Identifier: Apache-2.0

//! Hamiltonians with k-body potentials, their generators and the unitary
//! evolution groups, diagonalized once per particle count.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::combinatorics::{combinations, Label};
use crate::error::{Error, Result};
use crate::hilbert::{
    block_product, embed_matrix, hermiticity_deviation, hilbert_dim, ManyBodyOperator, Matrix,
    Permutation, Statistics,
};

/// Default cap on the side `d^n` of any Hamiltonian matrix.
pub const DEFAULT_MAX_SIDE: usize = 4096;

/// Absolute Hermiticity tolerance for supplied matrices, scaled by `max(1, max |a_ij|)`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

fn check_hermitian(m: &Matrix, what: &str) -> Result<()> {
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let deviation = hermiticity_deviation(m);
    if deviation > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NonHermitian {
            what: what.into(),
            deviation,
        });
    }
    Ok(())
}

/// One-body term, k-body potentials and ħ.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSpec {
    d: usize,
    hbar: f64,
    one_body: Matrix,
    potentials: BTreeMap<usize, Matrix>,
    max_side: usize,
}

impl InteractionSpec {
    /// A non-interacting system with the given one-body operator.
    pub fn new(d: usize, hbar: f64, one_body: Matrix) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter("single-particle dimension must be at least 2"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter("hbar must be positive and finite"));
        }
        if one_body.nrows() != d || one_body.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: one_body.nrows().max(one_body.ncols()),
            });
        }
        check_hermitian(&one_body, "one-body operator")?;
        Ok(InteractionSpec {
            d,
            hbar,
            one_body,
            potentials: BTreeMap::new(),
            max_side: DEFAULT_MAX_SIDE,
        })
    }

    /// Adds (or replaces) the `k`-body potential, a `d^k × d^k` Hermitian matrix.
    ///
    /// Exchange symmetry of `phi` is not enforced here; see
    /// [`InteractionSpec::exchange_asymmetry`].
    pub fn with_potential(mut self, k: usize, phi: Matrix) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter("potentials act on at least two particles"));
        }
        let side = hilbert_dim(self.d, k)?;
        if phi.nrows() != side || phi.ncols() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: phi.nrows().max(phi.ncols()),
            });
        }
        check_hermitian(&phi, &format!("{k}-body potential"))?;
        self.potentials.insert(k, phi);
        Ok(self)
    }

    pub fn with_max_side(mut self, max_side: usize) -> Self {
        self.max_side = max_side;
        self
    }

    /// The same one-body term with every potential removed.
    pub fn without_potentials(&self) -> Self {
        InteractionSpec {
            potentials: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn one_body(&self) -> &Matrix {
        &self.one_body
    }

    pub fn max_side(&self) -> usize {
        self.max_side
    }

    pub fn potential(&self, k: usize) -> Option<&Matrix> {
        self.potentials.get(&k)
    }

    pub fn potentials(&self) -> impl Iterator<Item = (usize, &Matrix)> {
        self.potentials.iter().map(|(&k, m)| (k, m))
    }

    /// Largest supplied potential order, 1 if there are none.
    pub fn k_max(&self) -> usize {
        self.potentials.keys().next_back().copied().unwrap_or(1)
    }

    /// True when every supplied potential is identically zero.
    pub fn is_free(&self) -> bool {
        self.potentials
            .values()
            .all(|m| m.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    /// Largest entry of `U_π Φ^(k) U_π† − Φ^(k)` over all `k` and `π`.
    /// Zero for physically symmetric potentials.
    pub fn exchange_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&k, phi) in &self.potentials {
            let op = ManyBodyOperator::from_parts(k, self.d, Statistics::Boltzmann, phi.clone());
            for p in Permutation::all(k) {
                let moved = crate::hilbert::conjugate_by_permutation(&p, &op).expect("sizes agree");
                let diff = moved.matrix() - phi;
                worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    fn check_side(&self, n: usize) -> Result<usize> {
        let side = hilbert_dim(self.d, n)?;
        if side > self.max_side {
            return Err(Error::ResourceCap {
                what: "Hamiltonian matrix side",
                requested: side,
                cap: self.max_side,
            });
        }
        Ok(side)
    }
}

/// Lattice analogue of `-ħ²/2 Δ` on `d` periodic sites with spacing 1:
/// `scale · (2 δ_ij − δ_{i,j+1} − δ_{i+1,j})` indices mod `d`.
pub fn periodic_laplacian(d: usize, scale: f64) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] += Complex64::new(2.0 * scale, 0.0);
        m[(i, (i + 1) % d)] -= Complex64::new(scale, 0.0);
        m[((i + 1) % d, i)] -= Complex64::new(scale, 0.0);
    }
    m
}

fn hamiltonian_matrix(n: usize, spec: &InteractionSpec) -> Result<Matrix> {
    let side = spec.check_side(n)?;
    let mut h = Matrix::zeros(side, side);
    for i in 0..n {
        h += embed_matrix(&spec.one_body, spec.d, &[i], n);
    }
    for (&k, phi) in &spec.potentials {
        for z in combinations(n, k) {
            h += embed_matrix(phi, spec.d, &z, n);
        }
    }
    Ok(h)
}

/// `H_n = Σ_i h(i) + Σ_k Σ_{i_1<…<i_k} Φ^(k)(i_1, …, i_k)`, with `H_0 = 0`.
pub fn build_hamiltonian(n: usize, spec: &InteractionSpec) -> Result<ManyBodyOperator> {
    Ok(ManyBodyOperator::from_parts(
        n,
        spec.d,
        Statistics::Boltzmann,
        hamiltonian_matrix(n, spec)?,
    ))
}

pub(crate) fn commutator_generator(f: &Matrix, h: &Matrix, hbar: f64) -> Matrix {
    (f * h - h * f) * Complex64::new(0.0, -1.0 / hbar)
}

/// `𝒩 f = −(i/ħ)(f H − H f)`. The evolution obeys `d/dt f = −𝒩 f`.
pub fn von_neumann_generator(
    f: &ManyBodyOperator,
    h: &ManyBodyOperator,
    hbar: f64,
) -> Result<ManyBodyOperator> {
    if f.n() != h.n() || f.d() != h.d() {
        return Err(Error::DimensionMismatch {
            expected: f.side(),
            found: h.side(),
        });
    }
    Ok(ManyBodyOperator::from_parts(
        f.n(),
        f.d(),
        f.stats(),
        commutator_generator(f.matrix(), h.matrix(), hbar),
    ))
}

/// `𝒩_int^(k) f = −(i/ħ)(f Φ^(k) − Φ^(k) f)` with `Φ^(k)` on `labels`, `k = |labels|`.
pub fn interaction_generator(
    labels: &[Label],
    spec: &InteractionSpec,
    f: &ManyBodyOperator,
) -> Result<ManyBodyOperator> {
    let k = labels.len();
    let phi = spec.potential(k).ok_or(Error::MissingPotential { k })?;
    if f.d() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: f.d(),
        });
    }
    let mut positions = Vec::with_capacity(k);
    for (i, l) in labels.iter().enumerate() {
        if l.position() >= f.n() {
            return Err(Error::NotInGround(l.id()));
        }
        if labels[..i].contains(l) {
            return Err(Error::DuplicateElement(i));
        }
        positions.push(l.position());
    }
    let e = embed_matrix(phi, spec.d, &positions, f.n());
    Ok(ManyBodyOperator::from_parts(
        f.n(),
        f.d(),
        f.stats(),
        commutator_generator(f.matrix(), &e, spec.hbar),
    ))
}

#[derive(Debug, Clone)]
struct Spectral {
    hamiltonian: Matrix,
    eigenvalues: DVector<f64>,
    eigenvectors: Matrix,
}

/// Eigendecompositions of `H_0, …, H_max` for one [`InteractionSpec`].
#[derive(Debug, Clone)]
pub struct EvolutionCache {
    spec: InteractionSpec,
    entries: Vec<Spectral>,
}

impl EvolutionCache {
    pub fn build(spec: &InteractionSpec, max_particles: usize) -> Result<Self> {
        let entries = (0..=max_particles)
            .map(|m| {
                let h = hamiltonian_matrix(m, spec)?;
                let eig = h.clone().symmetric_eigen();
                Ok(Spectral {
                    hamiltonian: h,
                    eigenvalues: eig.eigenvalues,
                    eigenvectors: eig.eigenvectors,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvolutionCache {
            spec: spec.clone(),
            entries,
        })
    }

    pub fn spec(&self) -> &InteractionSpec {
        &self.spec
    }

    pub fn max_particles(&self) -> usize {
        self.entries.len() - 1
    }

    fn entry(&self, m: usize) -> Result<&Spectral> {
        self.entries
            .get(m)
            .ok_or(Error::MissingCacheEntry { particles: m })
    }

    pub fn hamiltonian(&self, m: usize) -> Result<&Matrix> {
        Ok(&self.entry(m)?.hamiltonian)
    }

    pub fn eigenvalues(&self, m: usize) -> Result<&DVector<f64>> {
        Ok(&self.entry(m)?.eigenvalues)
    }

    /// `‖V diag(λ) V† − H_m‖` (largest entry) relative to `max(1, max |H_ij|)`.
    pub fn reconstruction_error(&self, m: usize) -> Result<f64> {
        let e = self.entry(m)?;
        let lambda = Matrix::from_diagonal(&e.eigenvalues.map(|l| Complex64::new(l, 0.0)));
        let rebuilt = &e.eigenvectors * lambda * e.eigenvectors.adjoint();
        let scale = e.hamiltonian.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let diff = (rebuilt - &e.hamiltonian).iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(diff / scale)
    }

    /// `e^{−(i/ħ) t H_m}`.
    pub fn unitary(&self, m: usize, t: f64) -> Result<Matrix> {
        let e = self.entry(m)?;
        let hbar = self.spec.hbar;
        let phases = e
            .eigenvalues
            .map(|l| Complex64::from_polar(1.0, -l * t / hbar));
        let mut v = e.eigenvectors.clone();
        for (j, mut col) in v.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        Ok(v * e.eigenvectors.adjoint())
    }

    /// All unitaries `U_0(t), …, U_max(t)`.
    pub fn propagators(&self, t: f64) -> Result<Propagators> {
        let unitaries = (0..self.entries.len())
            .map(|m| self.unitary(m, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Propagators {
            t,
            d: self.spec.d,
            unitaries,
        })
    }
}

/// Evolution unitaries of every cached particle count at one time `t`.
#[derive(Debug, Clone)]
pub struct Propagators {
    t: f64,
    d: usize,
    unitaries: Vec<Matrix>,
}

impl Propagators {
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn unitary(&self, m: usize) -> Result<&Matrix> {
        self.unitaries
            .get(m)
            .ok_or(Error::MissingCacheEntry { particles: m })
    }

    /// Conjugation by `⊗_B U_|B|(t)` with each block on its positions.
    /// Blocks must partition `0..n`; positions within a block ascend.
    pub(crate) fn evolve_positions(&self, f: &Matrix, n: usize, blocks: &[Vec<usize>]) -> Result<Matrix> {
        if self.t == 0.0 {
            return Ok(f.clone());
        }
        let factors = blocks
            .iter()
            .map(|b| Ok((self.unitary(b.len())?, b.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        let u = if blocks.len() == 1 {
            factors[0].0.clone()
        } else {
            block_product(self.d, n, &factors)
        };
        Ok(&u * f * u.adjoint())
    }
}

/// Validates that `blocks` partition the labels `1..=n` and converts them to
/// sorted position lists.
pub(crate) fn block_positions(blocks: &[Vec<Label>], n: usize) -> Result<Vec<Vec<usize>>> {
    let mut seen = alloc::vec![false; n];
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        if b.is_empty() {
            return Err(Error::InvalidBlocks);
        }
        let mut pos = Vec::with_capacity(b.len());
        for l in b {
            let p = l.position();
            if p >= n {
                return Err(Error::NotInGround(l.id()));
            }
            if seen[p] {
                return Err(Error::OverlappingElements(l.id()));
            }
            seen[p] = true;
            pos.push(p);
        }
        pos.sort_unstable();
        out.push(pos);
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidBlocks);
    }
    Ok(out)
}

/// `𝒢_n(−t) f = e^{−(i/ħ) t H_n} f e^{(i/ħ) t H_n}`; returns `f` itself at `t = 0`.
pub fn evolve_group(f: &ManyBodyOperator, t: f64, cache: &EvolutionCache) -> Result<ManyBodyOperator> {
    if f.d() != cache.spec.d {
        return Err(Error::DimensionMismatch {
            expected: cache.spec.d,
            found: f.d(),
        });
    }
    if t == 0.0 {
        cache.entry(f.n())?;
        return Ok(f.clone());
    }
    let u = cache.unitary(f.n(), t)?;
    Ok(ManyBodyOperator::from_parts(
        f.n(),
        f.d(),
        f.stats(),
        &u * f.matrix() * u.adjoint(),
    ))
}

/// Product over blocks of the block evolution groups, each block evolving
/// with its own Hamiltonian `H_{|B|}` on the labels of `B`.
pub fn evolve_blocks(
    f: &ManyBodyOperator,
    blocks: &[Vec<Label>],
    t: f64,
    cache: &EvolutionCache,
) -> Result<ManyBodyOperator> {
    let pos = block_positions(blocks, f.n())?;
    let props = cache.propagators(t)?;
    Ok(ManyBodyOperator::from_parts(
        f.n(),
        f.d(),
        f.stats(),
        props.evolve_positions(f.matrix(), f.n(), &pos)?,
    ))
}

/// `Σ_B H_{|B|}(B)`: the generator of the block-product evolution.
pub(crate) fn block_hamiltonian(cache: &EvolutionCache, n: usize, blocks: &[Vec<usize>]) -> Result<Matrix> {
    let d = cache.spec.d;
    let side = d.pow(n as u32);
    let mut h = Matrix::zeros(side, side);
    for b in blocks {
        h += embed_matrix(cache.hamiltonian(b.len())?, d, b, n);
    }
    Ok(h)
}
