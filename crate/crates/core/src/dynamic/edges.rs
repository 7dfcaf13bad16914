use std::fmt;

use crate::error::{Error, Result};
use crate::structure::StateSet;

/// Largest `n²` for which a dense complement or full relation is built.
pub const PAIR_CAP: usize = 1 << 26;

/// A binary relation on universe indices, stored as sorted successor lists.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    succ: Vec<Vec<u32>>,
}

impl EdgeSet {
    pub fn empty(n: usize) -> Self {
        EdgeSet { succ: vec![Vec::new(); n] }
    }

    pub fn diagonal(n: usize) -> Self {
        EdgeSet { succ: (0..n as u32).map(|i| vec![i]).collect() }
    }

    /// Diagonal restricted to a state set.
    pub fn diagonal_on(set: &StateSet) -> Self {
        let mut e = EdgeSet::empty(set.universe_len());
        for i in set.iter() {
            e.succ[i].push(i as u32);
        }
        e
    }

    pub fn full(n: usize) -> Result<Self> {
        check_pairs(n)?;
        Ok(EdgeSet { succ: vec![(0..n as u32).collect(); n] })
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(n: usize, pairs: I) -> Self {
        let mut e = EdgeSet::empty(n);
        for (i, j) in pairs {
            e.succ[i].push(j as u32);
        }
        e.normalize();
        e
    }

    /// Builds from per-state successor lists in any order.
    pub fn from_successors(succ: Vec<Vec<u32>>) -> Self {
        let mut e = EdgeSet { succ };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        for s in &mut self.succ {
            s.sort_unstable();
            s.dedup();
        }
    }

    pub fn universe_len(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, i: usize) -> &[u32] {
        &self.succ[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.succ[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.iter().all(Vec::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i, j as usize)))
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        self.zip_with(other, |a, b| merge(a, b, |x, y| x || y))
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        self.zip_with(other, |a, b| merge(a, b, |x, y| x && y))
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        self.zip_with(other, |a, b| merge(a, b, |x, y| x && !y))
    }

    fn zip_with(&self, other: &EdgeSet, f: impl Fn(&[u32], &[u32]) -> Vec<u32>) -> EdgeSet {
        EdgeSet { succ: self.succ.iter().zip(&other.succ).map(|(a, b)| f(a, b)).collect() }
    }

    /// Complement within `V × V`; refuses universes with more than [`PAIR_CAP`] pairs.
    pub fn complement(&self) -> Result<EdgeSet> {
        let n = self.succ.len();
        check_pairs(n)?;
        Ok(EdgeSet {
            succ: self
                .succ
                .iter()
                .map(|s| {
                    let mut out = Vec::with_capacity(n - s.len());
                    let mut k = 0;
                    for j in 0..n as u32 {
                        if k < s.len() && s[k] == j {
                            k += 1;
                        } else {
                            out.push(j);
                        }
                    }
                    out
                })
                .collect(),
        })
    }

    /// Relational composition: `(a, c)` with `(a, b) ∈ self` and `(b, c) ∈ other`.
    pub fn compose(&self, other: &EdgeSet) -> EdgeSet {
        let n = self.succ.len();
        let mut mark = vec![usize::MAX; n];
        let succ = self
            .succ
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut out = Vec::new();
                for &b in s {
                    for &c in &other.succ[b as usize] {
                        if mark[c as usize] != i {
                            mark[c as usize] = i;
                            out.push(c);
                        }
                    }
                }
                out.sort_unstable();
                out
            })
            .collect();
        EdgeSet { succ }
    }

    pub fn converse(&self) -> EdgeSet {
        let mut succ = vec![Vec::new(); self.succ.len()];
        for (i, j) in self.iter() {
            succ[j].push(i as u32);
        }
        EdgeSet { succ }
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.succ.iter().zip(&other.succ).all(|(a, b)| {
            let mut k = 0;
            a.iter().all(|x| {
                while k < b.len() && b[k] < *x {
                    k += 1;
                }
                k < b.len() && b[k] == *x
            })
        })
    }

    /// States with at least one successor.
    pub fn domain(&self) -> StateSet {
        let n = self.succ.len();
        StateSet::from_indices(n, (0..n).filter(|&i| !self.succ[i].is_empty()))
    }

    /// States with at least one predecessor.
    pub fn range(&self) -> StateSet {
        let n = self.succ.len();
        StateSet::from_indices(n, self.succ.iter().flatten().map(|&j| j as usize))
    }

    pub fn restrict_diagonal(&self) -> EdgeSet {
        EdgeSet {
            succ: self
                .succ
                .iter()
                .enumerate()
                .map(|(i, s)| if s.binary_search(&(i as u32)).is_ok() { vec![i as u32] } else { vec![] })
                .collect(),
        }
    }
}

fn check_pairs(n: usize) -> Result<()> {
    match n.checked_mul(n) {
        Some(p) if p <= PAIR_CAP => Ok(()),
        _ => Err(Error::CapExceeded { bits: 2 * n.max(1).ilog2() as usize, cap: PAIR_CAP.ilog2() as usize }),
    }
}

fn merge(a: &[u32], b: &[u32], keep: impl Fn(bool, bool) -> bool) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let x = a.get(i).copied().unwrap_or(u32::MAX);
        let y = b.get(j).copied().unwrap_or(u32::MAX);
        let v = x.min(y);
        let (ia, ib) = (x == v && i < a.len(), y == v && j < b.len());
        if keep(ia, ib) {
            out.push(v);
        }
        if ia {
            i += 1;
        }
        if ib {
            j += 1;
        }
    }
    out
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
