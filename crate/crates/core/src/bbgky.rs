// SPDX-License-Identifier: Apache-2.0

//! Marginal density operators, cumulants of the evolution groups, the BBGKY
//! hierarchy and its cumulant-series solution.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::combinatorics::{
    absolute_mobius_sum, combinations, index_partitions, mobius_weight, ClusterSet,
};
use crate::correlations::{
    clusterize, local_elements, minus_generator, theta_blocks, ClusterCorrelation, CorrelationSequence,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{block_hamiltonian, EvolutionCache, Propagators};
use crate::hilbert::{
    embed_matrix, matrix_trace_norm, partial_trace_matrix, symmetrize_matrix, tensor_power,
    ManyBodyOperator, Matrix, OperatorSequence, Statistics,
};

/// `(F_1, …, F_{N_max})`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSequence {
    seq: OperatorSequence,
}

impl MarginalSequence {
    pub fn new(components: Vec<ManyBodyOperator>) -> Result<Self> {
        Ok(MarginalSequence {
            seq: OperatorSequence::new(Complex64::new(0.0, 0.0), components)?,
        })
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

    pub fn component(&self, s: usize) -> Option<&ManyBodyOperator> {
        self.seq.component(s)
    }

    pub fn components(&self) -> &[ManyBodyOperator] {
        self.seq.components()
    }

    pub fn as_sequence(&self) -> &OperatorSequence {
        &self.seq
    }
}

/// Weight `α` of the sequence norm `Σ_n α^n ‖f_n‖₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormParams {
    alpha: f64,
}

impl WeightedNormParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive and finite"));
        }
        Ok(WeightedNormParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α > e`, the regime in which the series solution is known to converge.
    pub fn in_convergence_regime(&self) -> bool {
        self.alpha > core::f64::consts::E
    }
}

/// `|f_0| + Σ_{n≥1} α^n ‖f_n‖₁`.
pub fn weighted_norm(seq: &OperatorSequence, params: WeightedNormParams) -> f64 {
    let mut total = seq.f0().norm();
    let mut w = 1.0;
    for c in seq.components() {
        w *= params.alpha;
        total += w * c.trace_norm();
    }
    total
}

fn check_cluster_operator(cluster: &ClusterSet, f: &ManyBodyOperator) -> Result<Vec<Vec<usize>>> {
    let elems = local_elements(cluster)?;
    let m: usize = elems.iter().map(Vec::len).sum();
    let mut labels = crate::combinatorics::declusterize(cluster);
    labels.sort_unstable();
    if let Some(l) = labels.iter().enumerate().find(|(i, l)| l.position() != *i) {
        return Err(Error::NotInGround(l.1.id()));
    }
    if m != f.n() {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: f.n(),
        });
    }
    Ok(elems)
}

/// `(Möbius weight, declusterized blocks, block-evolved operator)`.
type CumulantTerm = (f64, Vec<Vec<usize>>, Matrix);

fn cumulant_terms(
    props: &Propagators,
    f: &Matrix,
    n: usize,
    elems: &[Vec<usize>],
) -> Result<Vec<CumulantTerm>> {
    index_partitions(elems.len())?
        .into_iter()
        .map(|p| {
            let blocks = theta_blocks(elems, p.blocks());
            let evolved = props.evolve_positions(f, n, &blocks)?;
            Ok((mobius_weight(p.len()) as f64, blocks, evolved))
        })
        .collect()
}

fn cumulant_matrix(props: &Propagators, f: &Matrix, n: usize, elems: &[Vec<usize>]) -> Result<Matrix> {
    let side = f.nrows();
    let mut acc = Matrix::zeros(side, side);
    for (w, _, evolved) in cumulant_terms(props, f, n, elems)? {
        acc += evolved * Complex64::new(w, 0.0);
    }
    Ok(acc)
}

/// `𝔄_{1+n}(t, X_c) f = Σ_P (−1)^{|P|−1}(|P|−1)! Π_{Z∈P} 𝒢_{|θ(Z)|}(−t, θ(Z)) f`,
/// the partition sum running over the elements of `cluster`, whose labels
/// must be `1, …, f.n()`.
pub fn cumulant_apply(
    t: f64,
    cluster: &ClusterSet,
    f: &ManyBodyOperator,
    cache: &EvolutionCache,
) -> Result<ManyBodyOperator> {
    let elems = check_cluster_operator(cluster, f)?;
    let props = cache.propagators(t)?;
    Ok(ManyBodyOperator::from_parts(
        f.n(),
        f.d(),
        f.stats(),
        cumulant_matrix(&props, f.matrix(), f.n(), &elems)?,
    ))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_order(s: usize, n_max: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidParameter("marginal order must be at least 1"));
    }
    if s > n_max {
        return Err(Error::Truncation {
            requested: s,
            n_max,
        });
    }
    Ok(())
}

/// `F_s = Σ_{n=0}^{N_max−s} (1/n!) Tr_{s+1,…,s+n} g_{1+n}(X_c)`.
pub fn marginal_from_clusters(g: &CorrelationSequence, s: usize) -> Result<ManyBodyOperator> {
    check_order(s, g.n_max())?;
    let d = g.d();
    let side = d.pow(s as u32);
    let mut acc = Matrix::zeros(side, side);
    for n in 0..=g.n_max() - s {
        let c = clusterize(g, s, n)?;
        acc += partial_trace_matrix(c.op.matrix(), d, s + n, s) * Complex64::new(1.0 / factorial(n), 0.0);
    }
    Ok(ManyBodyOperator::from_parts(s, d, g.stats(), acc))
}

/// All marginals `F_1, …, F_{N_max}` of a correlation sequence.
pub fn marginals_from_clusters(g: &CorrelationSequence) -> Result<MarginalSequence> {
    MarginalSequence::new(
        (1..=g.n_max())
            .map(|s| marginal_from_clusters(g, s))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// `F_s = Σ_{n=0}^{N_max−s} (1/n!) Tr_{s+1,…,s+n} D_{s+n}` for every `s`.
pub fn grand_canonical_marginals(density: &OperatorSequence) -> Result<MarginalSequence> {
    let n_max = density.n_max();
    let d = density.d();
    let comps = (1..=n_max)
        .map(|s| {
            let side = d.pow(s as u32);
            let mut acc = Matrix::zeros(side, side);
            for n in 0..=n_max - s {
                let dn = density.component(s + n).expect("within truncation");
                acc += partial_trace_matrix(dn.matrix(), d, s + n, s) * Complex64::new(1.0 / factorial(n), 0.0);
            }
            ManyBodyOperator::from_parts(s, d, density.stats(), acc)
        })
        .collect();
    MarginalSequence::new(comps)
}

fn check_marginals(f: &MarginalSequence, s: usize, cache: &EvolutionCache) -> Result<()> {
    check_order(s, f.n_max())?;
    if f.d() != cache.spec().d() {
        return Err(Error::DimensionMismatch {
            expected: cache.spec().d(),
            found: f.d(),
        });
    }
    Ok(())
}

/// `−𝒩_s F_s + Σ_{n≥1} (1/n!) Tr_{s+1,…,s+n} Σ_{Z⊂Y, Z≠∅} (−𝒩_int^{(|Z|+n)}(Z, s+1, …, s+n)) F_{s+n}`.
///
/// Components beyond `N_max` are zero (finitely supported data) and missing
/// potential orders contribute nothing.
pub fn bbgky_rhs(f: &MarginalSequence, s: usize, cache: &EvolutionCache) -> Result<ManyBodyOperator> {
    check_marginals(f, s, cache)?;
    let spec = cache.spec();
    let (d, hbar) = (spec.d(), spec.hbar());
    let fs = f.component(s).expect("checked order");
    let mut out = minus_generator(fs.matrix(), cache.hamiltonian(s)?, hbar);
    for n in 1..=f.n_max() - s {
        let total = s + n;
        let big = f.component(total).expect("within truncation");
        let side = big.side();
        let mut acc = Matrix::zeros(side, side);
        let mut any = false;
        for r in 1..=s {
            let Some(phi) = spec.potential(r + n) else {
                continue;
            };
            for z in combinations(s, r) {
                let mut pos = z.clone();
                pos.extend(s..total);
                acc += minus_generator(big.matrix(), &embed_matrix(phi, d, &pos, total), hbar);
                any = true;
            }
        }
        if any {
            out += partial_trace_matrix(&acc, d, total, s) * Complex64::new(1.0 / factorial(n), 0.0);
        }
    }
    Ok(ManyBodyOperator::from_parts(s, d, f.stats(), out))
}

fn satellite_elements(s: usize, n: usize) -> Vec<Vec<usize>> {
    let mut elems = alloc::vec![(0..s).collect::<Vec<_>>()];
    elems.extend((s..s + n).map(|p| alloc::vec![p]));
    elems
}

/// `F_s(t) = Σ_{n=0}^{N_max−s} (1/n!) Tr_{s+1,…,s+n} 𝔄_{1+n}(t, X_c) F_{s+n}(0)`.
pub fn solve_bbgky_series(f0: &MarginalSequence, t: f64, s: usize, cache: &EvolutionCache) -> Result<ManyBodyOperator> {
    check_marginals(f0, s, cache)?;
    let props = cache.propagators(t)?;
    let d = f0.d();
    let side = d.pow(s as u32);
    let mut acc = Matrix::zeros(side, side);
    for n in 0..=f0.n_max() - s {
        let total = s + n;
        let big = f0.component(total).expect("within truncation");
        let a = cumulant_matrix(&props, big.matrix(), total, &satellite_elements(s, n))?;
        acc += partial_trace_matrix(&a, d, total, s) * Complex64::new(1.0 / factorial(n), 0.0);
    }
    Ok(ManyBodyOperator::from_parts(s, d, f0.stats(), acc))
}

/// Series solution at every order `s = 1, …, N_max`.
pub fn solve_bbgky_series_all(f0: &MarginalSequence, t: f64, cache: &EvolutionCache) -> Result<MarginalSequence> {
    MarginalSequence::new(
        (1..=f0.n_max())
            .map(|s| solve_bbgky_series(f0, t, s, cache))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Exact time derivative of [`solve_bbgky_series`]: each evolved term of the
/// cumulant is differentiated analytically, `d/dt Π_B 𝒢_B(−t) f = −𝒩_{H_P} Π_B 𝒢_B(−t) f`
/// with `H_P = Σ_B H_{|B|}(B)`.
pub fn series_time_derivative(
    f0: &MarginalSequence,
    t: f64,
    s: usize,
    cache: &EvolutionCache,
) -> Result<ManyBodyOperator> {
    check_marginals(f0, s, cache)?;
    let props = cache.propagators(t)?;
    let d = f0.d();
    let hbar = cache.spec().hbar();
    let side = d.pow(s as u32);
    let mut acc = Matrix::zeros(side, side);
    for n in 0..=f0.n_max() - s {
        let total = s + n;
        let big = f0.component(total).expect("within truncation");
        let mut term = Matrix::zeros(big.side(), big.side());
        for (w, blocks, evolved) in cumulant_terms(&props, big.matrix(), total, &satellite_elements(s, n))? {
            let h = block_hamiltonian(cache, total, &blocks)?;
            term += minus_generator(&evolved, &h, hbar) * Complex64::new(w, 0.0);
        }
        acc += partial_trace_matrix(&term, d, total, s) * Complex64::new(1.0 / factorial(n), 0.0);
    }
    Ok(ManyBodyOperator::from_parts(s, d, f0.stats(), acc))
}

/// Cluster correlation evolved from chaos data, `𝒮_{s+n} 𝔄_{1+n}(t, X_c) g_1(0)^{⊗(s+n)}`.
///
/// The symmetrizer is applied after the cumulant; placing it only before
/// the cumulant does not reproduce the evolved cluster correlations for
/// Bose and Fermi systems once `s + n ≥ 3`.
pub fn chaos_cluster_solution(
    g1: &ManyBodyOperator,
    t: f64,
    s: usize,
    n: usize,
    cache: &EvolutionCache,
) -> Result<ClusterCorrelation> {
    if g1.n() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: g1.n(),
        });
    }
    if s == 0 {
        return Err(Error::InvalidParameter("cluster size must be at least 1"));
    }
    let total = s + n;
    if total > cache.max_particles() {
        return Err(Error::Truncation {
            requested: total,
            n_max: cache.max_particles(),
        });
    }
    let product = tensor_power(g1, total)?;
    let props = cache.propagators(t)?;
    let a = cumulant_matrix(&props, product.matrix(), total, &satellite_elements(s, n))?;
    let op = symmetrize_matrix(g1.stats(), &a, g1.d(), total);
    Ok(ClusterCorrelation {
        s,
        n,
        op: ManyBodyOperator::from_parts(total, g1.d(), g1.stats(), op),
        cluster_set: ClusterSet::cluster_with_satellites(s, n)?,
    })
}

/// Both sides of `‖𝔄_{1+n}(t) f‖₁ ≤ Σ_P (|P|−1)! ‖f‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundReport {
    /// `‖𝔄_{1+n}(t) f‖₁`
    pub lhs: f64,
    /// `‖f‖₁`
    pub input_norm: f64,
    /// `Σ_P (|P|−1)!` over partitions of the cluster set.
    pub bound_factor: f64,
    /// `lhs / input_norm`, 0 for `f = 0`.
    pub ratio: f64,
    /// `bound_factor − ratio`
    pub slack: f64,
    pub holds: bool,
}

/// Measures the cumulant norm against the partition-counting bound that
/// follows from the trace-norm isometry of each block evolution.
pub fn cumulant_norm_bound_check(
    t: f64,
    cluster: &ClusterSet,
    f: &ManyBodyOperator,
    cache: &EvolutionCache,
) -> Result<NormBoundReport> {
    let a = cumulant_apply(t, cluster, f, cache)?;
    let lhs = matrix_trace_norm(a.matrix());
    let input_norm = matrix_trace_norm(f.matrix());
    let bound_factor = absolute_mobius_sum(cluster.len())? as f64;
    let ratio = if input_norm > 0.0 { lhs / input_norm } else { 0.0 };
    let slack = bound_factor - ratio;
    Ok(NormBoundReport {
        lhs,
        input_norm,
        bound_factor,
        ratio,
        slack,
        holds: slack >= 0.0,
    })
}
