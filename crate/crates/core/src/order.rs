//! Finite preorders as bitmask relations. Shared by the directed sets of
//! `nettop`, the relation oracles of `sketch`, and `sketchlib`.

use serde::Serialize;

/// A relation on `0..n`; bit `j` of `up[i]` means `i <= j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Preorder {
    pub n: usize,
    pub up: Vec<u64>,
}

impl Preorder {
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut up = vec![0u64; n];
        for &(i, j) in pairs {
            up[i] |= 1 << j;
        }
        Preorder { n, up }
    }

    pub fn discrete(n: usize) -> Self {
        Preorder { n, up: (0..n).map(|i| 1u64 << i).collect() }
    }

    pub fn indiscrete(n: usize) -> Self {
        Preorder { n, up: vec![full(n); n] }
    }

    /// `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        Preorder { n, up: (0..n).map(|i| full(n) & !((1u64 << i) - 1)).collect() }
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.up[i] >> j & 1 == 1
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|i| self.le(i, i))
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.n).all(|i| {
            let mut reach = 0u64;
            for j in bits(self.up[i]) {
                reach |= self.up[j];
            }
            reach & !self.up[i] == 0
        })
    }

    pub fn is_preorder(&self) -> bool {
        self.is_reflexive() && self.is_transitive()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|i| bits(self.up[i]).map(move |j| (i, j))).collect()
    }

    /// Component labels of the equivalence relation generated by the order.
    pub fn components(&self) -> Vec<usize> {
        let mut label: Vec<usize> = (0..self.n).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for (i, j) in self.pairs() {
                let m = label[i].min(label[j]);
                if label[i] != m || label[j] != m {
                    label[i] = m;
                    label[j] = m;
                    changed = true;
                }
            }
        }
        label
    }

    pub fn is_monotone(&self, f: &[usize], other: &Preorder) -> bool {
        self.pairs().into_iter().all(|(i, j)| other.le(f[i], f[j]))
    }

    /// Relabels along a permutation: `perm[i]` is the new name of `i`.
    pub fn relabel(&self, perm: &[usize]) -> Preorder {
        let mut up = vec![0u64; self.n];
        for (i, j) in self.pairs() {
            up[perm[i]] |= 1 << perm[j];
        }
        Preorder { n: self.n, up }
    }

    /// Least relabeling over all permutations, with a permutation achieving it.
    pub fn canonical(&self) -> (Preorder, Vec<usize>) {
        permutations(self.n)
            .into_iter()
            .map(|p| (self.relabel(&p), p))
            .min_by(|a, b| a.0.up.cmp(&b.0.up))
            .expect("at least one permutation")
    }
}

pub fn full(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Indices of the set bits of `m`, ascending.
pub fn bits(m: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| m >> i & 1 == 1)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Every preorder on `0..n`, by filtering all reflexive relations.
pub fn all_preorders(n: usize) -> Vec<Preorder> {
    let off: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for code in 0u64..(1u64 << off.len()) {
        let mut up: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for (k, &(i, j)) in off.iter().enumerate() {
            if code >> k & 1 == 1 {
                up[i] |= 1 << j;
            }
        }
        let p = Preorder { n, up };
        if p.is_transitive() {
            out.push(p);
        }
    }
    out
}

/// Monotone maps between preorders, lexicographic in the value list.
pub fn monotone_maps(p: &Preorder, q: &Preorder) -> Vec<Vec<usize>> {
    crate::finsetlim::all_functions(p.n, q.n).filter(|f| p.is_monotone(f, q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preorder_counts() {
        let counts: Vec<usize> = (0..5).map(|n| all_preorders(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 4, 29, 355]);
    }

    #[test]
    fn chain_and_components() {
        let c = Preorder::chain(3);
        assert!(c.is_preorder());
        assert!(c.le(0, 2) && !c.le(2, 0));
        assert_eq!(c.components(), vec![0, 0, 0]);
        assert_eq!(Preorder::discrete(3).components(), vec![0, 1, 2]);
    }

    #[test]
    fn canonical_is_invariant() {
        let p = Preorder::from_pairs(3, &[(0, 0), (1, 1), (2, 2), (2, 0)]);
        let q = p.relabel(&[1, 2, 0]);
        assert_eq!(p.canonical().0, q.canonical().0);
        let (c, perm) = p.canonical();
        assert_eq!(p.relabel(&perm), c);
    }

    #[test]
    fn monotone_maps_between_chains() {
        assert_eq!(monotone_maps(&Preorder::chain(2), &Preorder::chain(3)).len(), 6);
        assert_eq!(monotone_maps(&Preorder::discrete(2), &Preorder::chain(2)).len(), 4);
    }
}
