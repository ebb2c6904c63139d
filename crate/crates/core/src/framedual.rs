//! Finite frames, power-set boolean algebras, and finite spaces as frame
//! embeddings `F -> P(X)`, with the contravariant duality on morphisms.

use serde::Serialize;
use thiserror::Error;

use crate::finsetlim::all_functions;
use crate::nettop::{all_topologies, FinTopSpace};
use crate::order::{bits, full, Preorder};

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum FrameError {
    #[error("order is not antisymmetric, reflexive and transitive")]
    NotPartialOrder,
    #[error("empty carrier")]
    Empty,
    #[error("{a} and {b} have no least upper bound")]
    NoJoin { a: usize, b: usize },
    #[error("{a} and {b} have no greatest lower bound")]
    NoMeet { a: usize, b: usize },
    #[error("law {law} fails at {elements:?}")]
    LawFailure { law: &'static str, elements: Vec<usize> },
    #[error("embedding {0}")]
    BadEmbedding(String),
    #[error("open set {open:#b} has a preimage that is not open")]
    NotContinuous { open: u64 },
}

/// A finite lattice with its join and meet tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameRep {
    pub order: Preorder,
    pub join: Vec<Vec<usize>>,
    pub meet: Vec<Vec<usize>>,
    pub bottom: usize,
    pub top: usize,
}

fn antisymmetric(p: &Preorder) -> bool {
    (0..p.n).all(|i| (0..p.n).all(|j| i == j || !(p.le(i, j) && p.le(j, i))))
}

/// Lattice tables of a finite partial order.
fn lattice(order: &Preorder) -> Result<FrameRep, FrameError> {
    if order.n == 0 {
        return Err(FrameError::Empty);
    }
    if !order.is_preorder() || !antisymmetric(order) {
        return Err(FrameError::NotPartialOrder);
    }
    let n = order.n;
    let bound = |cands: u64, least: bool| -> Option<usize> {
        bits(cands).find(|&c| bits(cands).all(|d| if least { order.le(c, d) } else { order.le(d, c) }))
    };
    let down: Vec<u64> = (0..n).map(|j| (0..n).filter(|&i| order.le(i, j)).fold(0, |m, i| m | 1 << i)).collect();
    let mut join = vec![vec![0; n]; n];
    let mut meet = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            join[a][b] = bound(order.up[a] & order.up[b], true).ok_or(FrameError::NoJoin { a, b })?;
            meet[a][b] = bound(down[a] & down[b], false).ok_or(FrameError::NoMeet { a, b })?;
        }
    }
    let bottom = bound(full(n), true).ok_or(FrameError::NoMeet { a: 0, b: 0 })?;
    let top = bound(full(n), false).ok_or(FrameError::NoJoin { a: 0, b: 0 })?;
    Ok(FrameRep { order: order.clone(), join, meet, bottom, top })
}

impl FrameRep {
    /// Validates completeness and the binary distributive law.
    pub fn new(order: Preorder) -> Result<Self, FrameError> {
        let f = lattice(&order)?;
        f.check_distributive()?;
        Ok(f)
    }

    /// A family of subsets ordered by inclusion, in the given order.
    pub fn from_sets(sets: &[u64]) -> Result<Self, FrameError> {
        let pairs: Vec<(usize, usize)> = (0..sets.len())
            .flat_map(|i| (0..sets.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| sets[i] & !sets[j] == 0)
            .collect();
        FrameRep::new(Preorder::from_pairs(sets.len(), &pairs))
    }

    pub fn size(&self) -> usize {
        self.order.n
    }

    fn check_distributive(&self) -> Result<(), FrameError> {
        let n = self.size();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.meet[a][self.join[b][c]] != self.join[self.meet[a][b]][self.meet[a][c]] {
                        return Err(FrameError::LawFailure { law: "distributivity", elements: vec![a, b, c] });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn join_all(&self, subset: u64) -> usize {
        bits(subset).fold(self.bottom, |acc, x| self.join[acc][x])
    }

    pub fn meet_all(&self, subset: u64) -> usize {
        bits(subset).fold(self.top, |acc, x| self.meet[acc][x])
    }
}

/// `P(X)` on `atoms` points; element `u` is the subset with mask `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CabaRep {
    pub atoms: usize,
}

impl CabaRep {
    pub fn size(&self) -> usize {
        1 << self.atoms
    }

    pub fn complement(&self, u: u64) -> u64 {
        full(self.atoms) & !u
    }
}

/// `psi[i]` is the subset assigned to frame element `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpacePresentation {
    pub frame: FrameRep,
    pub caba: CabaRep,
    pub psi: Vec<u64>,
}

impl SpacePresentation {
    /// `psi` is injective and preserves finite meets and all joins.
    pub fn validate(&self) -> Result<(), FrameError> {
        let (f, psi) = (&self.frame, &self.psi);
        if psi.len() != f.size() || psi.iter().any(|&u| u & !full(self.caba.atoms) != 0) {
            return Err(FrameError::BadEmbedding("does not map into the power set".into()));
        }
        if (0..psi.len()).any(|i| (0..i).any(|j| psi[i] == psi[j])) {
            return Err(FrameError::BadEmbedding("is not injective".into()));
        }
        if psi[f.bottom] != 0 || psi[f.top] != full(self.caba.atoms) {
            return Err(FrameError::BadEmbedding("misses the empty join or meet".into()));
        }
        for a in 0..f.size() {
            for b in 0..f.size() {
                if psi[f.join[a][b]] != psi[a] | psi[b] {
                    return Err(FrameError::BadEmbedding(format!("does not preserve the join of {a} and {b}")));
                }
                if psi[f.meet[a][b]] != psi[a] & psi[b] {
                    return Err(FrameError::BadEmbedding(format!("does not preserve the meet of {a} and {b}")));
                }
            }
        }
        Ok(())
    }
}

/// Opens under inclusion, embedded in the power set of the carrier.
pub fn open_frame(s: &FinTopSpace) -> SpacePresentation {
    let frame = FrameRep::from_sets(&s.opens).expect("open sets form a frame");
    SpacePresentation { frame, caba: CabaRep { atoms: s.n }, psi: s.opens.clone() }
}

pub fn space_from_presentation(p: &SpacePresentation) -> Result<FinTopSpace, FrameError> {
    p.validate()?;
    FinTopSpace::new(p.caba.atoms, p.psi.clone()).map_err(|e| FrameError::BadEmbedding(e.to_string()))
}

/// Preserves the top, binary meets, and joins of every subset.
pub fn is_frame_morphism(f: &[usize], a: &FrameRep, b: &FrameRep) -> bool {
    if f.len() != a.size() || f.iter().any(|&y| y >= b.size()) || f[a.top] != b.top {
        return false;
    }
    let meets = (0..a.size()).all(|x| (0..a.size()).all(|y| f[a.meet[x][y]] == b.meet[f[x]][f[y]]));
    meets
        && (0..=full(a.size())).all(|s| {
            let image = bits(s).fold(0u64, |m, x| m | 1 << f[x]);
            f[a.join_all(s)] == b.join_all(image)
        })
}

/// `g : P(Y) -> P(X)`, indexed by masks, preserves complements and joins of every family.
pub fn is_caba_morphism(g: &[u64], y: CabaRep, x: CabaRep) -> bool {
    if g.len() != y.size() || g.iter().any(|&u| u & !full(x.atoms) != 0) {
        return false;
    }
    let complements = (0..y.size() as u64).all(|u| g[y.complement(u) as usize] == x.complement(g[u as usize]));
    let joins = if y.size() <= 16 {
        (0..=full(y.size())).all(|fam| {
            let sup = bits(fam).fold(0u64, |m, u| m | u as u64);
            g[sup as usize] == bits(fam).fold(0u64, |m, u| m | g[u])
        })
    } else {
        g[0] == 0 && (0..y.size()).all(|a| (0..y.size()).all(|b| g[a | b] == g[a] | g[b]))
    };
    complements && joins
}

/// Every CABA morphism `P(Y) -> P(X)`: images of atoms extended by joins, then filtered.
pub fn caba_morphisms(y: CabaRep, x: CabaRep) -> Vec<Vec<u64>> {
    all_functions(y.atoms, x.size())
        .filter_map(|atom_images| {
            let g: Vec<u64> = (0..y.size() as u64).map(|u| bits(u).fold(0, |m, a| m | atom_images[a] as u64)).collect();
            is_caba_morphism(&g, y, x).then_some(g)
        })
        .collect()
}

/// Maps the opens of `y` into the opens of `x`.
pub fn is_compatible(g: &[u64], x: &FinTopSpace, y: &FinTopSpace) -> bool {
    y.opens.iter().all(|&v| x.is_open(g[v as usize]))
}

/// The preimage map of a continuous `f : X -> Y`.
pub fn dual_morphism(f: &[usize], x: &FinTopSpace, y: &FinTopSpace) -> Result<Vec<u64>, FrameError> {
    if f.len() != x.n || f.iter().any(|&v| v >= y.n) {
        return Err(FrameError::BadEmbedding("map leaves the carrier".into()));
    }
    if let Some(&open) = y.opens.iter().find(|&&v| !x.is_open(FinTopSpace::preimage(f, v))) {
        return Err(FrameError::NotContinuous { open });
    }
    Ok((0..1u64 << y.n).map(|v| FinTopSpace::preimage(f, v)).collect())
}

/// A finite boolean algebra presented by its order and complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoolTable {
    pub order: Preorder,
    pub complement: Vec<usize>,
}

/// Atoms and the isomorphism `b -> P(atoms)` sending `b` to the atoms below it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AtomDecomposition {
    pub atoms: Vec<usize>,
    pub to_powerset: Vec<u64>,
}

pub fn caba_atoms(t: &BoolTable) -> Result<AtomDecomposition, FrameError> {
    let l = FrameRep::new(t.order.clone())?;
    let n = l.size();
    if t.complement.len() != n || t.complement.iter().any(|&c| c >= n) {
        return Err(FrameError::LawFailure { law: "complement is a function", elements: vec![] });
    }
    for a in 0..n {
        let c = t.complement[a];
        if l.meet[a][c] != l.bottom || l.join[a][c] != l.top {
            return Err(FrameError::LawFailure { law: "complement", elements: vec![a, c] });
        }
    }
    let atoms: Vec<usize> =
        (0..n).filter(|&a| a != l.bottom && (0..n).all(|b| b == a || b == l.bottom || !t.order.le(b, a))).collect();
    let to_powerset: Vec<u64> = (0..n)
        .map(|b| atoms.iter().enumerate().filter(|&(_, &a)| t.order.le(a, b)).fold(0, |m, (k, _)| m | 1 << k))
        .collect();
    let mut seen = to_powerset.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != n || n != 1 << atoms.len() {
        return Err(FrameError::LawFailure { law: "atomicity", elements: atoms });
    }
    for a in 0..n {
        for b in 0..n {
            if t.order.le(a, b) != (to_powerset[a] & !to_powerset[b] == 0) {
                return Err(FrameError::LawFailure { law: "order isomorphism", elements: vec![a, b] });
            }
        }
    }
    Ok(AtomDecomposition { atoms, to_powerset })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniversalReport {
    pub spaces: usize,
    pub maps: usize,
    pub bijective: bool,
    pub structure: bool,
    pub natural: bool,
}

impl UniversalReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.structure && self.natural
    }
}

/// `Hom(T, target) -> subsets of T`, `g -> g^{-1}(1)`, checked against
/// `expected(T)`, the pointwise max/min against union/intersection, and
/// naturality along every continuous map between spaces within `bound`.
fn universal(bound: usize, target: &FinTopSpace, expected: impl Fn(&FinTopSpace) -> Vec<u64>) -> UniversalReport {
    let spaces: Vec<FinTopSpace> = (0..=bound).flat_map(all_topologies).collect();
    let classify = |g: &[usize]| FinTopSpace::preimage(g, 0b10);
    let mut bijective = true;
    let mut structure = true;
    for t in &spaces {
        let homs = t.continuous_maps(target);
        let mut images: Vec<u64> = homs.iter().map(|g| classify(g)).collect();
        images.sort_unstable();
        let mut want = expected(t);
        want.sort_unstable();
        bijective &= images == want;
        for g in &homs {
            for h in &homs {
                let max: Vec<usize> = g.iter().zip(h).map(|(a, b)| *a.max(b)).collect();
                let min: Vec<usize> = g.iter().zip(h).map(|(a, b)| *a.min(b)).collect();
                structure &= t.is_continuous(&max, target) && classify(&max) == classify(g) | classify(h);
                structure &= t.is_continuous(&min, target) && classify(&min) == classify(g) & classify(h);
            }
        }
    }
    let mut maps = 0;
    let mut natural = true;
    for t in &spaces {
        for u in &spaces {
            let homs_u = u.continuous_maps(target);
            for f in t.continuous_maps(u) {
                maps += 1;
                natural &= homs_u.iter().all(|g| {
                    let gf: Vec<usize> = f.iter().map(|&i| g[i]).collect();
                    classify(&gf) == FinTopSpace::preimage(&f, classify(g))
                });
            }
        }
    }
    UniversalReport { spaces: spaces.len(), maps, bijective, structure, natural }
}

/// `Hom(T, S) = O(T)` for the Sierpinski space `S`.
pub fn sierpinski_universal(bound: usize) -> UniversalReport {
    universal(bound, &FinTopSpace::sierpinski(), |t| t.opens.clone())
}

/// `Hom(T, 2) = P(|T|)` for the two-point space with the trivial topology.
pub fn two_point_universal(bound: usize) -> UniversalReport {
    universal(bound, &FinTopSpace::trivial(2), |t| (0..=full(t.n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_frame_examples() {
        let d = open_frame(&FinTopSpace::discrete(2));
        assert_eq!(d.frame.size(), 4);
        assert_eq!(d.psi, vec![0, 1, 2, 3]);
        let s = open_frame(&FinTopSpace::sierpinski());
        assert_eq!(s.psi, vec![0, 0b10, 0b11]);
        assert!(s.frame.order.le(0, 1) && s.frame.order.le(1, 2));
        assert_eq!(open_frame(&FinTopSpace::trivial(3)).frame.size(), 2);
    }

    #[test]
    fn presentation_round_trip() {
        for n in 0..=4 {
            for t in all_topologies(n) {
                assert_eq!(space_from_presentation(&open_frame(&t)).unwrap(), t);
            }
        }
        let chain = FrameRep::new(Preorder::chain(2)).unwrap();
        let p = SpacePresentation { frame: chain.clone(), caba: CabaRep { atoms: 3 }, psi: vec![0, 0b111] };
        assert_eq!(space_from_presentation(&p).unwrap(), FinTopSpace::trivial(3));
        // two incomparable singletons without their union
        let v = FrameRep::from_sets(&[0, 0b01, 0b10, 0b11]).unwrap();
        let bad = SpacePresentation { frame: v, caba: CabaRep { atoms: 3 }, psi: vec![0, 0b001, 0b010, 0b111] };
        assert!(space_from_presentation(&bad).is_err());
    }

    #[test]
    fn caba_morphism_examples() {
        let y = CabaRep { atoms: 2 };
        let id: Vec<u64> = (0..4).collect();
        assert!(is_caba_morphism(&id, y, y));
        // union-preserving but sends {0} to everything
        let g = vec![0, 0b11, 0b10, 0b11];
        assert!(!is_caba_morphism(&g, y, y));
        for a in 0..=3 {
            for b in 0..=3 {
                let (x, yy) = (CabaRep { atoms: a }, CabaRep { atoms: b });
                for f in all_functions(a, b) {
                    let g: Vec<u64> = (0..1u64 << b).map(|v| FinTopSpace::preimage(&f, v)).collect();
                    assert!(is_caba_morphism(&g, yy, x));
                }
                assert_eq!(caba_morphisms(yy, x).len(), b.pow(a as u32));
            }
        }
    }

    #[test]
    fn frame_morphism_examples() {
        let s = open_frame(&FinTopSpace::sierpinski()).frame;
        assert!(is_frame_morphism(&[0, 1, 2], &s, &s));
        assert!(!is_frame_morphism(&[0, 0, 0], &s, &s));
        assert!(is_frame_morphism(&[0, 2, 2], &s, &s));
    }

    #[test]
    fn duality_counts_sierpinski() {
        let s = FinTopSpace::sierpinski();
        let compatible = caba_morphisms(CabaRep { atoms: 2 }, CabaRep { atoms: 2 })
            .into_iter()
            .filter(|g| is_compatible(g, &s, &s))
            .count();
        assert_eq!(compatible, 3);
        assert_eq!(s.continuous_maps(&s).len(), 3);
        assert_eq!(dual_morphism(&[0, 1], &s, &s).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(dual_morphism(&[1, 0], &s, &s), Err(FrameError::NotContinuous { open: 0b10 }));
    }

    #[test]
    fn atoms_of_boolean_tables() {
        let two = BoolTable { order: Preorder::chain(2), complement: vec![1, 0] };
        assert_eq!(caba_atoms(&two).unwrap().atoms, vec![1]);
        let p2 = FrameRep::from_sets(&[0, 1, 2, 3]).unwrap();
        let t = BoolTable { order: p2.order, complement: vec![3, 2, 1, 0] };
        assert_eq!(caba_atoms(&t).unwrap().atoms, vec![1, 2]);
        // M3: bottom 0, atoms 1 2 3, top 4
        let mut pairs: Vec<(usize, usize)> = (0..5).map(|i| (i, i)).collect();
        pairs.extend([(0, 1), (0, 2), (0, 3), (0, 4), (1, 4), (2, 4), (3, 4)]);
        let m3 = BoolTable { order: Preorder::from_pairs(5, &pairs), complement: vec![4, 2, 3, 1, 0] };
        assert!(matches!(caba_atoms(&m3), Err(FrameError::LawFailure { law: "distributivity", .. })));
    }

    #[test]
    fn universal_objects() {
        assert!(sierpinski_universal(2).passed());
        assert!(two_point_universal(2).passed());
        assert_eq!(FinTopSpace::discrete(1).continuous_maps(&FinTopSpace::sierpinski()).len(), 2);
    }
}
