use std::collections::HashMap;

use super::{enumerate, LatticePoint, LatticeSet};
use crate::{Error, Result};

/// Multiplicities `s2(tau) = |{(mu1, mu2) in E^2 : mu1 + mu2 = tau}|`.
///
/// Entries are kept sorted by `tau` so that every traversal is
/// deterministic; a hash index gives O(1) lookups.
#[derive(Clone, Debug)]
pub struct PairSumTable {
    m: u64,
    n: usize,
    entries: Vec<(LatticePoint, u64)>,
    index: HashMap<LatticePoint, usize>,
}

impl PairSumTable {
    pub fn new(set: &LatticeSet) -> Self {
        let mut counts: HashMap<LatticePoint, u64> = HashMap::with_capacity(set.len() * set.len() / 2 + 1);
        for a in set {
            for b in set {
                *counts.entry(*a + *b).or_default() += 1;
            }
        }
        let mut entries: Vec<_> = counts.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        let index = entries.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
        PairSumTable { m: set.m(), n: set.len(), entries, index }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Cardinality of the underlying lattice set.
    pub fn set_len(&self) -> usize {
        self.n
    }

    pub fn get(&self, tau: &LatticePoint) -> u64 {
        self.index.get(tau).map_or(0, |&i| self.entries[i].1)
    }

    /// Number of distinct pair sums.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// `(tau, s2(tau))` in lexicographic order of `tau`.
    pub fn entries(&self) -> &[(LatticePoint, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u128 {
        self.entries.iter().map(|e| e.1 as u128).sum()
    }
}

/// Pairs of indices into a [`LatticeSet`] grouped by their sum.
///
/// Group `g` holds every ordered `(i, j)` with `mu_i + mu_j = taus[g]`; the
/// group of `-tau` is found through `partner`. Iterating group `g` against
/// group `partner[g]` enumerates all 4-tuples summing to zero.
#[derive(Clone, Debug)]
pub struct PairGroups {
    pub taus: Vec<LatticePoint>,
    pub pairs: Vec<Vec<(u32, u32)>>,
    pub partner: Vec<usize>,
}

impl PairGroups {
    pub fn new(set: &LatticeSet) -> Self {
        let pts = set.points();
        let mut by_tau: HashMap<LatticePoint, Vec<(u32, u32)>> = HashMap::new();
        for (i, a) in pts.iter().enumerate() {
            for (j, b) in pts.iter().enumerate() {
                by_tau.entry(*a + *b).or_default().push((i as u32, j as u32));
            }
        }
        let mut grouped: Vec<_> = by_tau.into_iter().collect();
        grouped.sort_unstable_by_key(|g| g.0);
        let index: HashMap<LatticePoint, usize> =
            grouped.iter().enumerate().map(|(i, g)| (g.0, i)).collect();
        let partner = grouped.iter().map(|g| index[&-g.0]).collect();
        let (taus, pairs) = grouped.into_iter().unzip();
        PairGroups { taus, pairs, partner }
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn index_of(&self, tau: &LatticePoint) -> Option<usize> {
        self.taus.binary_search(tau).ok()
    }
}

/// Integer points `x` with `tau . x = 0` and `|x|^2 = 4m - |tau|^2`.
///
/// These are the differences `mu1 - mu2` of pairs summing to `tau`, so the
/// count equals `s2(tau)`.
pub fn circle_count(m: u64, tau: &LatticePoint) -> Result<u64> {
    let t2 = tau.norm_sq() as u64;
    if t2 == 0 || t2 >= 4 * m {
        return Err(Error::DegenerateTau(tau.0));
    }
    let shell = enumerate(4 * m - t2);
    Ok(shell.iter().filter(|x| x.dot(tau) == 0).count() as u64)
}
