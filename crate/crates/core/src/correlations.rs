// SPDX-License-Identifier: Apache-2.0

//! Correlation operators: the Möbius pair linking density and correlation
//! sequences, cluster correlations, the von Neumann hierarchy for
//! correlations and a Runge–Kutta integrator for it.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::combinatorics::{
    combinations, declusterize, index_partitions, mobius_weight, ClusterSet, Label,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{EvolutionCache, InteractionSpec};
use crate::hilbert::{
    block_product, embed_matrix, symmetrize_matrix, ManyBodyOperator, Matrix, OperatorSequence,
    Permutation, Statistics,
};

/// `g = (0, g_1, …, g_{N_max})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSequence {
    seq: OperatorSequence,
}

impl CorrelationSequence {
    pub fn new(components: Vec<ManyBodyOperator>) -> Result<Self> {
        Ok(CorrelationSequence {
            seq: OperatorSequence::new(Complex64::new(0.0, 0.0), components)?,
        })
    }

    /// Chaos data: `g_1` given, `g_n = 0` for `2 <= n <= n_max`.
    pub fn chaos(g1: &ManyBodyOperator, n_max: usize) -> Result<Self> {
        if g1.n() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: g1.n(),
            });
        }
        if n_max == 0 {
            return Err(Error::InvalidParameter("truncation order must be at least 1"));
        }
        let mut comps = vec![g1.clone()];
        comps.extend((2..=n_max).map(|n| ManyBodyOperator::zeros(n, g1.d(), g1.stats())));
        CorrelationSequence::new(comps)
    }

    pub fn n_max(&self) -> usize {
        self.seq.n_max()
    }

    pub fn d(&self) -> usize {
        self.seq.d()
    }

    pub fn stats(&self) -> Statistics {
        self.seq.stats()
    }

    pub fn component(&self, n: usize) -> Option<&ManyBodyOperator> {
        self.seq.component(n)
    }

    pub fn components(&self) -> &[ManyBodyOperator] {
        self.seq.components()
    }

    pub fn as_sequence(&self) -> &OperatorSequence {
        &self.seq
    }

    pub fn into_sequence(self) -> OperatorSequence {
        self.seq
    }

    fn matrices(&self) -> Vec<Matrix> {
        self.seq.components().iter().map(|c| c.matrix().clone()).collect()
    }

    fn from_matrices(mats: Vec<Matrix>, d: usize, stats: Statistics) -> Self {
        let comps = mats
            .into_iter()
            .enumerate()
            .map(|(k, m)| ManyBodyOperator::from_parts(k + 1, d, stats, m))
            .collect();
        CorrelationSequence::new(comps).expect("components are consistent by construction")
    }
}

/// `g_{1+n}(X_c)` for `X_c = ({1, …, s}, s+1, …, s+n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCorrelation {
    pub s: usize,
    pub n: usize,
    pub op: ManyBodyOperator,
    pub cluster_set: ClusterSet,
}

fn positions_of(blocks: &[Vec<usize>]) -> Vec<&[usize]> {
    blocks.iter().map(|b| b.as_slice()).collect()
}

/// `Π_B f_{|B|}(B)` over the blocks of a partition of `0..n`.
fn product_over_blocks(comps: &[Matrix], d: usize, n: usize, blocks: &[Vec<usize>]) -> Matrix {
    let factors: Vec<(&Matrix, &[usize])> = positions_of(blocks)
        .into_iter()
        .map(|b| (&comps[b.len() - 1], b))
        .collect();
    block_product(d, n, &factors)
}

fn check_sequence(seq: &OperatorSequence) -> Result<()> {
    if seq.n_max() > crate::combinatorics::DEFAULT_BELL_CAP {
        return Err(Error::ResourceCap {
            what: "partition ground-set size",
            requested: seq.n_max(),
            cap: crate::combinatorics::DEFAULT_BELL_CAP,
        });
    }
    Ok(())
}

/// `g_n = 𝒮_n Σ_P (−1)^{|P|−1} (|P|−1)! Π_{X∈P} D_{|X|}(X)`.
pub fn density_to_correlations(density: &OperatorSequence) -> Result<CorrelationSequence> {
    check_sequence(density)?;
    let (d, stats) = (density.d(), density.stats());
    let comps: Vec<Matrix> = density.components().iter().map(|c| c.matrix().clone()).collect();
    let mut out = Vec::with_capacity(comps.len());
    for n in 1..=comps.len() {
        let side = comps[n - 1].nrows();
        let mut acc = Matrix::zeros(side, side);
        for p in index_partitions(n)? {
            let w = mobius_weight(p.len()) as f64;
            acc += product_over_blocks(&comps, d, n, p.blocks()) * Complex64::new(w, 0.0);
        }
        out.push(symmetrize_matrix(stats, &acc, d, n));
    }
    Ok(CorrelationSequence::from_matrices(out, d, stats))
}

/// `Σ_P Π_{X∈P} g_{|X|}(X)` for `k = 1..=N_max`, without the symmetrizer.
fn unsymmetrized_densities(g: &[Matrix], d: usize) -> Result<Vec<Matrix>> {
    let mut out = Vec::with_capacity(g.len());
    for k in 1..=g.len() {
        let side = g[k - 1].nrows();
        let mut acc = Matrix::zeros(side, side);
        for p in index_partitions(k)? {
            acc += product_over_blocks(g, d, k, p.blocks());
        }
        out.push(acc);
    }
    Ok(out)
}

/// `D_n = 𝒮_n Σ_P Π_{X∈P} g_{|X|}(X)`; the inverse of [`density_to_correlations`].
/// The zeroth component is set to 1.
pub fn correlations_to_density(g: &CorrelationSequence) -> Result<OperatorSequence> {
    check_sequence(g.as_sequence())?;
    let (d, stats) = (g.d(), g.stats());
    let dt = unsymmetrized_densities(&g.matrices(), d)?;
    let comps = dt
        .into_iter()
        .enumerate()
        .map(|(k, m)| ManyBodyOperator::from_parts(k + 1, d, stats, symmetrize_matrix(stats, &m, d, k + 1)))
        .collect();
    OperatorSequence::new(Complex64::new(1.0, 0.0), comps)
}

/// Precomputed ingredients of cluster correlations for one correlation sequence.
struct ClusterBasis {
    d: usize,
    stats: Statistics,
    // unsymmetrized inverse-Möbius sums, index k - 1
    dtilde: Vec<Matrix>,
}

impl ClusterBasis {
    fn new(g: &CorrelationSequence) -> Result<Self> {
        check_sequence(g.as_sequence())?;
        Ok(ClusterBasis {
            d: g.d(),
            stats: g.stats(),
            dtilde: unsymmetrized_densities(&g.matrices(), g.d())?,
        })
    }

    /// Cluster correlation of elements given as local positions covering `0..m`.
    fn correlation(&self, elems: &[Vec<usize>]) -> Result<Matrix> {
        let m: usize = elems.iter().map(Vec::len).sum();
        if m > self.dtilde.len() {
            return Err(Error::Truncation {
                requested: m,
                n_max: self.dtilde.len(),
            });
        }
        let side = self.d.pow(m as u32);
        let mut acc = Matrix::zeros(side, side);
        for p in index_partitions(elems.len())? {
            let blocks = theta_blocks(elems, p.blocks());
            let w = mobius_weight(p.len()) as f64;
            acc += product_over_blocks(&self.dtilde, self.d, m, &blocks) * Complex64::new(w, 0.0);
        }
        Ok(symmetrize_matrix(self.stats, &acc, self.d, m))
    }
}

/// Sorted positions `θ(B)` for each block of element indices.
pub(crate) fn theta_blocks(elems: &[Vec<usize>], blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    blocks
        .iter()
        .map(|b| {
            let mut th: Vec<usize> = b.iter().flat_map(|&e| elems[e].iter().copied()).collect();
            th.sort_unstable();
            th
        })
        .collect()
}

/// Element label lists converted to local positions `0..m` in ascending label order.
pub(crate) fn local_elements(cluster: &ClusterSet) -> Result<Vec<Vec<usize>>> {
    if cluster.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut ground = declusterize(cluster);
    ground.sort_unstable();
    Ok(cluster
        .elements()
        .iter()
        .map(|e| {
            let mut pos: Vec<usize> = e
                .labels()
                .iter()
                .map(|l| ground.binary_search(l).expect("label in its own ground"))
                .collect();
            pos.sort_unstable();
            pos
        })
        .collect())
}

/// Cluster correlation operator of an arbitrary cluster set,
/// `Σ_P (−1)^{|P|−1}(|P|−1)! 𝒮 Π_{X∈P} Σ_{P′ of θ(X)} Π g`.
/// The result acts on the labels of `θ(cluster)` in ascending order.
pub fn cluster_correlation(g: &CorrelationSequence, cluster: &ClusterSet) -> Result<ManyBodyOperator> {
    let basis = ClusterBasis::new(g)?;
    let elems = local_elements(cluster)?;
    let m = elems.iter().map(Vec::len).sum();
    Ok(ManyBodyOperator::from_parts(m, g.d(), g.stats(), basis.correlation(&elems)?))
}

/// `g_{1+n}(X_c)` with `X_c = ({1, …, s}, s+1, …, s+n)`.
pub fn clusterize(g: &CorrelationSequence, s: usize, n: usize) -> Result<ClusterCorrelation> {
    if s == 0 {
        return Err(Error::InvalidParameter("cluster size must be at least 1"));
    }
    if s + n > g.n_max() {
        return Err(Error::Truncation {
            requested: s + n,
            n_max: g.n_max(),
        });
    }
    let cluster_set = ClusterSet::cluster_with_satellites(s, n)?;
    let op = cluster_correlation(g, &cluster_set)?;
    Ok(ClusterCorrelation {
        s,
        n,
        op,
        cluster_set,
    })
}

/// `Σ_k Σ_Z Φ^(k)(Z)` over `k`-subsets `Z ⊂ 0..n` meeting every block.
fn potential_meeting_blocks(spec: &InteractionSpec, n: usize, blocks: &[Vec<usize>]) -> Option<Matrix> {
    let mut block_of = vec![0usize; n];
    for (b, pos) in blocks.iter().enumerate() {
        for &p in pos {
            block_of[p] = b;
        }
    }
    let mut acc: Option<Matrix> = None;
    for (k, phi) in spec.potentials() {
        if k > n || k < blocks.len() {
            continue;
        }
        for z in combinations(n, k) {
            let mut hit = vec![false; blocks.len()];
            for &p in &z {
                hit[block_of[p]] = true;
            }
            if hit.iter().all(|&h| h) {
                let e = embed_matrix(phi, spec.d(), &z, n);
                acc = Some(match acc {
                    Some(a) => a + e,
                    None => e,
                });
            }
        }
    }
    acc
}

/// Commutator `(i/ħ)(X A − A X) = −𝒩_A X`.
pub(crate) fn minus_generator(x: &Matrix, a: &Matrix, hbar: f64) -> Matrix {
    (x * a - a * x) * Complex64::new(0.0, 1.0 / hbar)
}

/// Partitions of `0..n` with `|P| ≥ 2` together with their interaction terms.
struct HierarchyPlan {
    d: usize,
    stats: Statistics,
    hbar: f64,
    hamiltonians: Vec<Matrix>,
    terms: Vec<Vec<(Vec<Vec<usize>>, Matrix)>>,
}

impl HierarchyPlan {
    fn new(cache: &EvolutionCache, n_max: usize, stats: Statistics) -> Result<Self> {
        let spec = cache.spec();
        let mut hamiltonians = Vec::with_capacity(n_max);
        let mut terms = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            hamiltonians.push(cache.hamiltonian(n)?.clone());
            let mut per_n = Vec::new();
            for p in index_partitions(n)? {
                if p.len() < 2 {
                    continue;
                }
                if let Some(phi) = potential_meeting_blocks(spec, n, p.blocks()) {
                    per_n.push((p.blocks().to_vec(), phi));
                }
            }
            terms.push(per_n);
        }
        Ok(HierarchyPlan {
            d: spec.d(),
            stats,
            hbar: spec.hbar(),
            hamiltonians,
            terms,
        })
    }

    fn rhs(&self, g: &[Matrix], n: usize) -> Matrix {
        let free = minus_generator(&g[n - 1], &self.hamiltonians[n - 1], self.hbar);
        if self.terms[n - 1].is_empty() {
            return free;
        }
        let side = g[n - 1].nrows();
        let mut acc = Matrix::zeros(side, side);
        for (blocks, phi) in &self.terms[n - 1] {
            let q = product_over_blocks(g, self.d, n, blocks);
            acc += minus_generator(&q, phi, self.hbar);
        }
        free + symmetrize_matrix(self.stats, &acc, self.d, n)
    }
}

fn check_dynamics(g: &CorrelationSequence, cache: &EvolutionCache, n: usize) -> Result<()> {
    if g.d() != cache.spec().d() {
        return Err(Error::DimensionMismatch {
            expected: cache.spec().d(),
            found: g.d(),
        });
    }
    if n == 0 || n > g.n_max() {
        return Err(Error::Truncation {
            requested: n,
            n_max: g.n_max(),
        });
    }
    Ok(())
}

/// Right-hand side of the hierarchy for `g_n`:
/// `−𝒩_n g_n + 𝒮_n Σ_{|P|≥2} Σ_{Z_r ⊂ X_r, Z_r ≠ ∅} (−𝒩_int^{(Σ|Z_r|)}(Z_1, …)) Π g_{|X_i|}`.
///
/// The symmetrizer is applied after the interaction commutator; with it
/// placed before, the identity fails for Bose and Fermi from `n = 3` on.
/// Potential orders that were not supplied contribute nothing.
pub fn von_neumann_rhs(g: &CorrelationSequence, n: usize, cache: &EvolutionCache) -> Result<ManyBodyOperator> {
    check_dynamics(g, cache, n)?;
    let plan = HierarchyPlan::new(cache, n, g.stats())?;
    let rhs = plan.rhs(&g.matrices(), n);
    Ok(ManyBodyOperator::from_parts(n, g.d(), g.stats(), rhs))
}

/// Right-hand side of the generalized hierarchy for the cluster correlation
/// of `cluster`: `−𝒩 g(X_c) + 𝒮 Σ_{|P|>1} Σ_{Z_r ⊂ θ(X_r)} (−𝒩_int) Π g(X_r)`.
pub fn generalized_rhs(g: &CorrelationSequence, cluster: &ClusterSet, cache: &EvolutionCache) -> Result<ManyBodyOperator> {
    let elems = local_elements(cluster)?;
    let m: usize = elems.iter().map(Vec::len).sum();
    check_dynamics(g, cache, m)?;
    let basis = ClusterBasis::new(g)?;
    let spec = cache.spec();
    let hbar = spec.hbar();
    let full = basis.correlation(&elems)?;
    let mut out = minus_generator(&full, cache.hamiltonian(m)?, hbar);
    let side = full.nrows();
    let mut acc = Matrix::zeros(side, side);
    let mut any = false;
    for p in index_partitions(elems.len())? {
        if p.len() < 2 {
            continue;
        }
        let thetas = theta_blocks(&elems, p.blocks());
        let Some(phi) = potential_meeting_blocks(spec, m, &thetas) else {
            continue;
        };
        let mut sub_ops = Vec::with_capacity(p.len());
        for (blk, th) in p.blocks().iter().zip(&thetas) {
            let local: Vec<Vec<usize>> = blk
                .iter()
                .map(|&e| {
                    elems[e]
                        .iter()
                        .map(|x| th.binary_search(x).expect("element inside its block"))
                        .collect()
                })
                .collect();
            sub_ops.push(basis.correlation(&local)?);
        }
        let factors: Vec<(&Matrix, &[usize])> = sub_ops.iter().zip(&thetas).map(|(o, t)| (o, t.as_slice())).collect();
        let r = block_product(g.d(), m, &factors);
        acc += minus_generator(&r, &phi, hbar);
        any = true;
    }
    if any {
        out += symmetrize_matrix(g.stats(), &acc, g.d(), m);
    }
    Ok(ManyBodyOperator::from_parts(m, g.d(), g.stats(), out))
}

/// Classical fourth-order Runge–Kutta with `steps` uniform steps on `[0, t_final]`.
pub fn integrate_hierarchy(
    g0: &CorrelationSequence,
    t_final: f64,
    steps: usize,
    cache: &EvolutionCache,
) -> Result<CorrelationSequence> {
    if steps == 0 {
        return Err(Error::InvalidParameter("at least one integration step is required"));
    }
    if !t_final.is_finite() {
        return Err(Error::InvalidParameter("final time must be finite"));
    }
    check_dynamics(g0, cache, g0.n_max())?;
    if t_final == 0.0 {
        return Ok(g0.clone());
    }
    let n_max = g0.n_max();
    let plan = HierarchyPlan::new(cache, n_max, g0.stats())?;
    let h = t_final / steps as f64;
    let deriv = |y: &[Matrix]| -> Vec<Matrix> { (1..=n_max).map(|n| plan.rhs(y, n)).collect() };
    let shifted = |y: &[Matrix], k: &[Matrix], a: f64| -> Vec<Matrix> {
        y.iter().zip(k).map(|(y, k)| y + k * Complex64::new(a, 0.0)).collect()
    };
    let mut y = g0.matrices();
    for step in 0..steps {
        let k1 = deriv(&y);
        let k2 = deriv(&shifted(&y, &k1, h / 2.0));
        let k3 = deriv(&shifted(&y, &k2, h / 2.0));
        let k4 = deriv(&shifted(&y, &k3, h));
        for i in 0..n_max {
            let incr = &k1[i] + (&k2[i] + &k3[i]) * Complex64::new(2.0, 0.0) + &k4[i];
            y[i] += incr * Complex64::new(h / 6.0, 0.0);
        }
        if !y.iter().all(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::IntegrationFailure { step: step + 1 });
        }
    }
    Ok(CorrelationSequence::from_matrices(y, g0.d(), g0.stats()))
}

/// Permutations of `0..s+n` mapping the cluster `{0, …, s-1}` onto itself:
/// the relabelings under which a cluster correlation is conjugation invariant.
pub fn cluster_preserving_permutations(s: usize, n: usize) -> Vec<Permutation> {
    Permutation::all(s + n)
        .into_iter()
        .filter(|p| p.images()[..s].iter().all(|&i| i < s))
        .collect()
}

/// Labels of the cluster set `({1, …, s}, s+1, …, s+n)` in element order.
pub fn cluster_labels(s: usize, n: usize) -> Result<Vec<Label>> {
    Ok(declusterize(&ClusterSet::cluster_with_satellites(s, n)?))
}
