// SPDX-License-Identifier: Apache-2.0

//! Set partitions, subsets and cluster structures.
//!
//! Partitions are produced from restricted-growth strings in lexicographic
//! order, so block `i` of every partition is the block holding the `i`-th
//! smallest leading element. Every partition sum in the crate walks this
//! order, which keeps reductions replayable bit for bit.

use alloc::vec;
use alloc::vec::Vec;
use core::num::NonZeroU32;

use crate::error::{Error, Result};

/// Largest ground set accepted by [`enumerate_partitions`]; Bell(12) = 4 213 597.
pub const DEFAULT_BELL_CAP: usize = 12;

/// Bell numbers `B(0) ..= B(cap)` from the binomial recurrence
/// `B(m + 1) = Σ_k C(m, k) B(k)`.
pub fn bell_numbers(cap: usize) -> Vec<u64> {
    let mut bell = vec![1u64];
    let mut row = vec![1u64];
    for m in 0..cap {
        // row holds C(m, k) for k = 0..=m
        let next: u64 = row.iter().zip(&bell).map(|(c, b)| c * b).sum();
        bell.push(next);
        let mut nrow = vec![1u64; m + 2];
        for k in 1..=m {
            nrow[k] = row[k - 1] + row[k];
        }
        row = nrow;
    }
    bell
}

/// A particle label; labels start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(NonZeroU32);

impl Label {
    pub fn new(id: u32) -> Result<Self> {
        NonZeroU32::new(id).map(Label).ok_or(Error::InvalidLabel(id))
    }

    pub fn id(self) -> u32 {
        self.0.get()
    }

    /// Zero-based tensor-factor position of this label in the ground `(1, …, n)`.
    pub fn position(self) -> usize {
        self.0.get() as usize - 1
    }

    pub(crate) fn from_position(pos: usize) -> Self {
        Label(NonZeroU32::new(pos as u32 + 1).expect("position + 1 is nonzero"))
    }
}

/// Labels `1..=n`.
pub fn labels(n: usize) -> Vec<Label> {
    (0..n).map(Label::from_position).collect()
}

/// One decomposition of a ground set into nonempty disjoint blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition<T> {
    blocks: Vec<Vec<T>>,
}

impl<T> Partition<T> {
    pub fn blocks(&self) -> &[Vec<T>] {
        &self.blocks
    }

    /// Number of blocks, `|P|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn mobius_weight(&self) -> i64 {
        mobius_weight(self.len())
    }
}

/// `(-1)^(k-1) (k-1)!` for a partition with `k` blocks.
pub fn mobius_weight(blocks: usize) -> i64 {
    assert!(blocks >= 1, "a partition has at least one block");
    let fact: i64 = (1..blocks as i64).product();
    if blocks % 2 == 1 {
        fact
    } else {
        -fact
    }
}

/// `Σ_P (|P| - 1)!` over all partitions of an `m`-set: the sum of absolute
/// Möbius weights.
pub fn absolute_mobius_sum(m: usize) -> Result<u64> {
    let parts = index_partitions(m)?;
    Ok(parts
        .iter()
        .map(|p| mobius_weight(p.len()).unsigned_abs())
        .sum())
}

/// Iterator over restricted-growth strings of length `m` in lexicographic order.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    current: Vec<usize>,
    // prefix_max[i] = max(current[0..=i])
    prefix_max: Vec<usize>,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(m: usize) -> Self {
        RestrictedGrowth {
            current: vec![0; m],
            prefix_max: vec![0; m],
            done: m == 0,
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let m = self.current.len();
        let mut i = m;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] <= self.prefix_max[i - 1] {
                self.current[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
                for j in i + 1..m {
                    self.current[j] = 0;
                    self.prefix_max[j] = self.prefix_max[j - 1];
                }
                break;
            }
        }
        Some(out)
    }
}

fn check_cap(m: usize, cap: usize) -> Result<()> {
    if m > cap {
        return Err(Error::ResourceCap {
            what: "partition ground-set size",
            requested: m,
            cap,
        });
    }
    Ok(())
}

/// Partitions of `{0, …, m-1}` in canonical order.
pub fn index_partitions(m: usize) -> Result<Vec<Partition<usize>>> {
    if m == 0 {
        return Err(Error::EmptySet);
    }
    check_cap(m, DEFAULT_BELL_CAP)?;
    let bell = bell_numbers(m)[m] as usize;
    let mut out = Vec::with_capacity(bell);
    for rgs in RestrictedGrowth::new(m) {
        let nblocks = rgs.iter().max().map_or(0, |x| x + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(Partition { blocks });
    }
    Ok(out)
}

/// Every partition of `ground`, each exactly once, in canonical order.
pub fn enumerate_partitions<T: Clone + PartialEq>(ground: &[T]) -> Result<Vec<Partition<T>>> {
    enumerate_partitions_capped(ground, DEFAULT_BELL_CAP)
}

pub fn enumerate_partitions_capped<T: Clone + PartialEq>(
    ground: &[T],
    cap: usize,
) -> Result<Vec<Partition<T>>> {
    if ground.is_empty() {
        return Err(Error::EmptySet);
    }
    check_distinct(ground)?;
    check_cap(ground.len(), cap)?;
    Ok(index_partitions(ground.len())?
        .into_iter()
        .map(|p| Partition {
            blocks: p
                .blocks
                .into_iter()
                .map(|b| b.into_iter().map(|i| ground[i].clone()).collect())
                .collect(),
        })
        .collect())
}

fn check_distinct<T: PartialEq>(items: &[T]) -> Result<()> {
    for (i, a) in items.iter().enumerate() {
        if items[..i].contains(a) {
            return Err(Error::DuplicateElement(i));
        }
    }
    Ok(())
}

/// All `2^|s| - 1` nonempty subsets, ordered by size and then lexicographically
/// by position in `s`.
pub fn nonempty_subsets<T: Clone>(s: &[T]) -> Result<Vec<Vec<T>>> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    if s.len() >= 64 {
        return Err(Error::ResourceCap {
            what: "subset ground-set size",
            requested: s.len(),
            cap: 63,
        });
    }
    let mut out = Vec::with_capacity((1usize << s.len()) - 1);
    for size in 1..=s.len() {
        for combo in combinations(s.len(), size) {
            out.push(combo.into_iter().map(|i| s[i].clone()).collect());
        }
    }
    Ok(out)
}

/// `k`-element subsets of `{0, …, n-1}` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// An atomic member of a cluster set: a bare particle or a cluster `{Y}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterElement {
    labels: Vec<Label>,
}

impl ClusterElement {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySet);
        }
        check_distinct(&labels)?;
        Ok(ClusterElement { labels })
    }

    pub fn particle(label: Label) -> Self {
        ClusterElement {
            labels: vec![label],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn min_label(&self) -> Label {
        *self.labels.iter().min().expect("nonempty")
    }
}

/// Ordered list of pairwise disjoint cluster elements, such as
/// `X_c = ({1, …, s}, s+1, …, s+n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterSet {
    elements: Vec<ClusterElement>,
}

impl ClusterSet {
    pub fn new(elements: Vec<ClusterElement>) -> Result<Self> {
        let mut seen: Vec<Label> = Vec::new();
        for e in &elements {
            for &l in e.labels() {
                if seen.contains(&l) {
                    return Err(Error::OverlappingElements(l.id()));
                }
                seen.push(l);
            }
        }
        Ok(ClusterSet { elements })
    }

    /// Every label of `ground` as its own element.
    pub fn singletons(ground: &[Label]) -> Result<Self> {
        ClusterSet::new(ground.iter().map(|&l| ClusterElement::particle(l)).collect())
    }

    /// The cluster `{1, …, s}` followed by the satellites `s+1, …, s+n`.
    pub fn cluster_with_satellites(s: usize, n: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::EmptySet);
        }
        let mut elements = vec![ClusterElement::new(labels(s))?];
        elements.extend((s..s + n).map(|p| ClusterElement::particle(Label::from_position(p))));
        Ok(ClusterSet { elements })
    }

    pub fn elements(&self) -> &[ClusterElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Sub-cluster set made of the elements at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> ClusterSet {
        ClusterSet {
            elements: indices.iter().map(|&i| self.elements[i].clone()).collect(),
        }
    }
}

/// θ: flattens a cluster set into its labels, in element order.
pub fn declusterize(x: &ClusterSet) -> Vec<Label> {
    x.elements
        .iter()
        .flat_map(|e| e.labels.iter().copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn l(ids: &[u32]) -> Vec<Label> {
        ids.iter().map(|&i| Label::new(i).unwrap()).collect()
    }

    // Bell triangle: each row starts with the last entry of the previous one.
    fn bell_triangle(m: usize) -> u64 {
        let mut row = vec![1u64];
        for _ in 1..m {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            row = next;
        }
        *row.last().unwrap()
    }

    #[test]
    fn small_partitions_in_canonical_order() {
        let p1 = enumerate_partitions(&[1]).unwrap();
        assert_eq!(p1.len(), 1);
        assert_eq!(p1[0].blocks(), &[vec![1]]);

        let p2 = enumerate_partitions(&[1, 2]).unwrap();
        assert_eq!(p2[0].blocks(), &[vec![1, 2]]);
        assert_eq!(p2[1].blocks(), &[vec![1], vec![2]]);

        let p3 = enumerate_partitions(&[1, 2, 3]).unwrap();
        assert_eq!(p3.len(), 5);
        assert_eq!(p3[1].blocks(), &[vec![1, 2], vec![3]]);
        assert_eq!(p3[2].blocks(), &[vec![1, 3], vec![2]]);
        assert_eq!(p3[4].blocks(), &[vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn counts_match_bell_triangle() {
        let bell = bell_numbers(8);
        for m in 1..=8 {
            assert_eq!(bell_triangle(m), bell[m]);
            let ground: Vec<usize> = (0..m).collect();
            let parts = enumerate_partitions(&ground).unwrap();
            assert_eq!(parts.len() as u64, bell_triangle(m), "m = {m}");
        }
    }

    #[test]
    fn partitions_are_valid_and_distinct() {
        for m in 1..=7 {
            let ground: Vec<usize> = (0..m).collect();
            let parts = enumerate_partitions(&ground).unwrap();
            let mut canon = BTreeSet::new();
            for p in &parts {
                let mut seen: Vec<usize> = Vec::new();
                for b in p.blocks() {
                    assert!(!b.is_empty());
                    seen.extend(b);
                }
                seen.sort();
                assert_eq!(seen, ground);
                let mut blocks: Vec<Vec<usize>> = p.blocks().to_vec();
                blocks.sort();
                canon.insert(blocks);
                // blocks ordered by least element
                for w in p.blocks().windows(2) {
                    assert!(w[0][0] < w[1][0]);
                }
            }
            assert_eq!(canon.len(), parts.len());
        }
    }

    #[test]
    fn mobius_weights() {
        assert_eq!(mobius_weight(1), 1);
        assert_eq!(mobius_weight(2), -1);
        assert_eq!(mobius_weight(4), -6);
    }

    #[test]
    fn mobius_identity_exhaustive() {
        for m in 1..=7 {
            let total: i64 = index_partitions(m)
                .unwrap()
                .iter()
                .map(|p| p.mobius_weight())
                .sum();
            assert_eq!(total, if m == 1 { 1 } else { 0 }, "m = {m}");
        }
    }

    #[test]
    fn absolute_sums() {
        assert_eq!(absolute_mobius_sum(1).unwrap(), 1);
        assert_eq!(absolute_mobius_sum(2).unwrap(), 2);
        // 1 + 3·1 + 1·2
        assert_eq!(absolute_mobius_sum(3).unwrap(), 6);
    }

    #[test]
    fn errors() {
        assert_eq!(enumerate_partitions::<u8>(&[]), Err(Error::EmptySet));
        assert_eq!(
            enumerate_partitions(&[1, 2, 1]),
            Err(Error::DuplicateElement(2))
        );
        let big: Vec<usize> = (0..13).collect();
        assert!(matches!(
            enumerate_partitions(&big),
            Err(Error::ResourceCap { .. })
        ));
        assert!(matches!(
            enumerate_partitions_capped(&[1, 2, 3], 2),
            Err(Error::ResourceCap { cap: 2, .. })
        ));
        assert_eq!(nonempty_subsets::<u8>(&[]), Err(Error::EmptySet));
        assert_eq!(Label::new(0), Err(Error::InvalidLabel(0)));
    }

    #[test]
    fn subsets() {
        assert_eq!(nonempty_subsets(&[1]).unwrap(), vec![vec![1]]);
        assert_eq!(
            nonempty_subsets(&[1, 2]).unwrap(),
            vec![vec![1], vec![2], vec![1, 2]]
        );
        assert_eq!(nonempty_subsets(&[1, 2, 3, 4]).unwrap().len(), 15);
    }

    #[test]
    fn declusterization() {
        let x = ClusterSet::new(vec![
            ClusterElement::new(l(&[1, 2, 3])).unwrap(),
            ClusterElement::particle(Label::new(4).unwrap()),
            ClusterElement::particle(Label::new(5).unwrap()),
        ])
        .unwrap();
        assert_eq!(declusterize(&x), l(&[1, 2, 3, 4, 5]));
        assert_eq!(x, ClusterSet::cluster_with_satellites(3, 2).unwrap());

        let pair = ClusterSet::singletons(&l(&[1, 2])).unwrap();
        assert_eq!(declusterize(&pair), l(&[1, 2]));
        let one = ClusterSet::new(vec![ClusterElement::new(l(&[1])).unwrap()]).unwrap();
        assert_eq!(declusterize(&one), l(&[1]));

        assert_eq!(
            ClusterSet::new(vec![
                ClusterElement::new(l(&[1, 2])).unwrap(),
                ClusterElement::new(l(&[2])).unwrap()
            ]),
            Err(Error::OverlappingElements(2))
        );
        assert_eq!(ClusterElement::new(vec![]), Err(Error::EmptySet));
    }

    proptest::proptest! {
        #[test]
        fn declusterize_of_singletons_is_identity(ids in proptest::collection::btree_set(1u32..100, 1..10)) {
            let ground = l(&ids.into_iter().collect::<Vec<_>>());
            let x = ClusterSet::singletons(&ground).unwrap();
            proptest::prop_assert_eq!(declusterize(&x), ground);
        }
    }
}
