// SPDX-License-Identifier: Apache-2.0

//! Brute-force references for cross-checking the fast paths of
//! `clusterdyn-core`. Everything here is written with explicit multi-index
//! loops and recomputes from scratch on every call.

use clusterdyn_core::{Complex64, Label, ManyBodyOperator, Matrix, OperatorSequence, Permutation, Statistics};
use clusterdyn_core::hamiltonian::InteractionSpec;

/// An oracle value with a note on how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub value: T,
    pub method: &'static str,
    pub cost: String,
}

fn digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(idx % d);
        idx /= d;
    }
    out
}

fn index(digits: &[usize], d: usize) -> usize {
    let mut idx = 0;
    for &q in digits.iter().rev() {
        idx = idx * d + q;
    }
    idx
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `a` on the labels `support` inside `ground`, identity elsewhere.
pub fn loop_embed(a: &ManyBodyOperator, support: &[Label], ground: &[Label]) -> ManyBodyOperator {
    let d = a.d();
    let n = ground.len();
    let pos: Vec<usize> = support
        .iter()
        .map(|l| ground.iter().position(|g| g == l).expect("support inside ground"))
        .collect();
    let side = d.pow(n as u32);
    let mut m = Matrix::zeros(side, side);
    for r in 0..side {
        let rd = digits(r, d, n);
        for c in 0..side {
            let cd = digits(c, d, n);
            let outside_equal = (0..n).filter(|k| !pos.contains(k)).all(|k| rd[k] == cd[k]);
            if !outside_equal {
                continue;
            }
            let ar: Vec<usize> = pos.iter().map(|&p| rd[p]).collect();
            let ac: Vec<usize> = pos.iter().map(|&p| cd[p]).collect();
            m[(r, c)] = a.matrix()[(index(&ar, d), index(&ac, d))];
        }
    }
    ManyBodyOperator::new(n, d, a.stats(), m).expect("valid shape")
}

/// Traces out labels `keep+1, …, n` by summing over their digits.
pub fn loop_partial_trace(f: &ManyBodyOperator, keep: usize) -> ManyBodyOperator {
    let (d, n) = (f.d(), f.n());
    let ks = d.pow(keep as u32);
    let rest = d.pow((n - keep) as u32);
    let mut m = Matrix::zeros(ks, ks);
    for i in 0..ks {
        let id = digits(i, d, keep);
        for j in 0..ks {
            let jd = digits(j, d, keep);
            let mut acc = zero();
            for h in 0..rest {
                let hd = digits(h, d, n - keep);
                let row: Vec<usize> = id.iter().chain(&hd).copied().collect();
                let col: Vec<usize> = jd.iter().chain(&hd).copied().collect();
                acc += f.matrix()[(index(&row, d), index(&col, d))];
            }
            m[(i, j)] = acc;
        }
    }
    ManyBodyOperator::new(keep, d, f.stats(), m).expect("valid shape")
}

/// `(p_π f)(q; q') = f(q_{π(1)}, …, q_{π(n)}; q')` entry by entry.
pub fn loop_permute_ket(p: &Permutation, f: &ManyBodyOperator) -> ManyBodyOperator {
    let (d, n) = (f.d(), f.n());
    let side = f.side();
    let mut m = Matrix::zeros(side, side);
    for r in 0..side {
        let q = digits(r, d, n);
        let src: Vec<usize> = (0..n).map(|k| q[p.images()[k]]).collect();
        for c in 0..side {
            m[(r, c)] = f.matrix()[(index(&src, d), c)];
        }
    }
    ManyBodyOperator::new(n, d, f.stats(), m).expect("valid shape")
}

/// `(1/n!) Σ_π (±1)^{|π|} p_π f` from explicit kernels.
pub fn loop_symmetrize(stats: Statistics, f: &ManyBodyOperator) -> ManyBodyOperator {
    if stats == Statistics::Boltzmann {
        return f.clone().with_stats(stats);
    }
    let perms = Permutation::all(f.n());
    let mut m = Matrix::zeros(f.side(), f.side());
    for p in &perms {
        m += loop_permute_ket(p, f).matrix() * Complex64::new(stats.sign(p.parity()), 0.0);
    }
    m /= Complex64::new(perms.len() as f64, 0.0);
    ManyBodyOperator::new(f.n(), f.d(), stats, m).expect("valid shape")
}

fn loop_hamiltonian(n: usize, spec: &InteractionSpec) -> Matrix {
    let d = spec.d();
    let side = d.pow(n as u32);
    let ground: Vec<Label> = (1..=n as u32).map(|i| Label::new(i).expect("positive")).collect();
    let mut h = Matrix::zeros(side, side);
    let one = ManyBodyOperator::new(1, d, Statistics::Boltzmann, spec.one_body().clone()).expect("d×d");
    for &l in &ground {
        h += loop_embed(&one, &[l], &ground).matrix();
    }
    for (k, phi) in spec.potentials() {
        let phi = ManyBodyOperator::new(k, d, Statistics::Boltzmann, phi.clone()).expect("d^k side");
        // all increasing k-tuples of labels
        let mut tuple: Vec<usize> = (0..k).collect();
        if k > n {
            continue;
        }
        loop {
            let support: Vec<Label> = tuple.iter().map(|&i| ground[i]).collect();
            h += loop_embed(&phi, &support, &ground).matrix();
            let mut i = k;
            while i > 0 && tuple[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            tuple[i - 1] += 1;
            for j in i..k {
                tuple[j] = tuple[j - 1] + 1;
            }
        }
    }
    h
}

/// `D_m(t) = e^{−(i/ħ)tH_m} D_m(0) e^{(i/ħ)tH_m}` for every component, with
/// each Hamiltonian assembled by index loops and diagonalized afresh.
pub fn direct_density_evolution(
    d0: &OperatorSequence,
    t: f64,
    spec: &InteractionSpec,
) -> OracleResult<OperatorSequence> {
    let mut comps = Vec::with_capacity(d0.n_max());
    let mut flops = 0usize;
    for c in d0.components() {
        let h = loop_hamiltonian(c.n(), spec);
        let eig = h.symmetric_eigen();
        let phases = Matrix::from_diagonal(
            &eig.eigenvalues
                .map(|l| Complex64::from_polar(1.0, -l * t / spec.hbar())),
        );
        let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        let evolved = &u * c.matrix() * u.adjoint();
        flops += 6 * c.side().pow(3);
        comps.push(ManyBodyOperator::new(c.n(), c.d(), c.stats(), evolved).expect("finite"));
    }
    OracleResult {
        value: OperatorSequence::new(d0.f0(), comps).expect("same layout as input"),
        method: "loop-built Hamiltonian, fresh eigendecomposition per component",
        cost: format!("~{flops} complex multiply-adds"),
    }
}

fn partitions_of(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for p in partitions_of(rest) {
        let mut alone = vec![vec![first]];
        alone.extend(p.iter().cloned());
        out.push(alone);
        for i in 0..p.len() {
            let mut joined = p.clone();
            joined[i].insert(0, first);
            out.push(joined);
        }
    }
    out
}

/// All set partitions of `0..m` by the insert-first recursion.
pub fn recursive_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    partitions_of(&(0..m).collect::<Vec<_>>())
}

/// `Σ_P (−1)^{|P|−1}(|P|−1)!` over every partition of an `m`-set.
pub fn exhaustive_mobius_identity(m: usize) -> i64 {
    assert!(m >= 1, "ground set must be nonempty");
    recursive_partitions(m)
        .iter()
        .map(|p| {
            let k = p.len() as i64;
            let fact: i64 = (1..k).product();
            if k % 2 == 1 {
                fact
            } else {
                -fact
            }
        })
        .sum()
}

/// Bell numbers from the Bell triangle.
pub fn bell_triangle(m: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..m {
        let mut next = vec![*row.last().expect("nonempty")];
        for &x in &row {
            let last = *next.last().expect("nonempty");
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// Sum of singular values as `Σ √λ` over the eigenvalues of `f† f`.
pub fn spectral_trace_norm(f: &ManyBodyOperator) -> f64 {
    let gram = f.matrix().adjoint() * f.matrix();
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `Σ_{n=0}^{N_max−s} (1/n!) Tr_{s+1,…,s+n} D_{s+n}`.
pub fn grand_canonical_marginal(density: &OperatorSequence, s: usize) -> ManyBodyOperator {
    let n_max = density.n_max();
    let side = density.d().pow(s as u32);
    let mut acc = Matrix::zeros(side, side);
    for n in 0..=n_max - s {
        let dn = density.component(s + n).expect("within truncation");
        acc += loop_partial_trace(dn, s).matrix() * Complex64::new(1.0 / factorial(n), 0.0);
    }
    ManyBodyOperator::new(s, density.d(), density.stats(), acc).expect("finite")
}

/// The grand-canonical marginal divided by `Ξ = Σ_k Tr D_k / k!`, expanded
/// as a power series in the particle number and truncated at total order
/// `N_max`: `Σ_{n+j ≤ N_max−s} c_j (1/n!) Tr D_{s+n}` with `1/Ξ = Σ_j c_j`,
/// `c_0 = 1`, `c_k = −Σ_{j<k} c_j Ξ_{k−j}`.
pub fn normalized_grand_canonical_marginal(density: &OperatorSequence, s: usize) -> ManyBodyOperator {
    let n_max = density.n_max();
    let xi: Vec<Complex64> = (0..=n_max)
        .map(|k| {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                density.component(k).expect("within truncation").trace() / factorial(k)
            }
        })
        .collect();
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=n_max {
        let ck = -(0..k).map(|j| c[j] * xi[k - j]).sum::<Complex64>();
        c.push(ck);
    }
    let side = density.d().pow(s as u32);
    let mut acc = Matrix::zeros(side, side);
    for n in 0..=n_max - s {
        let traced = loop_partial_trace(density.component(s + n).expect("within truncation"), s);
        let weight: Complex64 = c[..=n_max - s - n].iter().sum();
        acc += traced.matrix() * (weight / factorial(n));
    }
    ManyBodyOperator::new(s, density.d(), density.stats(), acc).expect("finite")
}
