//! Limits and colimits of finite diagrams of finite sets.
//!
//! A finite set is a cardinality `n` with elements `0..n`; a function is its
//! value list. Limit apexes list compatible tuples in lexicographic order of
//! shape-object indices; colimit classes are numbered by their least member in
//! the disjoint union.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{FinCategory, Obj};

pub type Func = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LimitError {
    #[error("diagram is malformed: {0}")]
    Malformed(String),
    #[error("diagram is not functorial at {0}")]
    NotFunctorial(String),
    #[error("legs do not commute with {morphism} at element {element}")]
    NonCommuting { morphism: String, element: usize },
}

/// A functor from a finite shape into finite sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinSetDiagram {
    pub shape: Arc<FinCategory>,
    pub sets: Vec<usize>,
    pub maps: Vec<Func>,
}

impl FinSetDiagram {
    pub fn new(shape: Arc<FinCategory>, sets: Vec<usize>, maps: Vec<Func>) -> Result<Self, LimitError> {
        let d = FinSetDiagram { shape, sets, maps };
        d.check()?;
        Ok(d)
    }

    /// Checks sizes, identities and composites.
    pub fn check(&self) -> Result<(), LimitError> {
        let s = &*self.shape;
        if self.sets.len() != s.num_objects() || self.maps.len() != s.num_morphisms() {
            return Err(LimitError::Malformed("sizes do not match the shape".into()));
        }
        for u in 0..s.num_morphisms() {
            let f = &self.maps[u];
            if f.len() != self.sets[s.src(u)] || f.iter().any(|&y| y >= self.sets[s.tgt(u)]) {
                return Err(LimitError::Malformed(format!("map {} has the wrong type", s.name(u))));
            }
        }
        for a in 0..s.num_objects() {
            if !is_identity(&self.maps[s.id(a)]) {
                return Err(LimitError::NotFunctorial(s.object_name(a).to_string()));
            }
        }
        for g in 0..s.num_morphisms() {
            for f in 0..s.num_morphisms() {
                if let Some(h) = s.compose(g, f) {
                    if compose(&self.maps[g], &self.maps[f]) != self.maps[h] {
                        return Err(LimitError::NotFunctorial(format!("{} . {}", s.name(g), s.name(f))));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A cone over a diagram: `legs[j]` maps the apex into `sets[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetCone {
    pub diagram: FinSetDiagram,
    pub apex: usize,
    pub legs: Vec<Func>,
}

/// A cocone under a diagram: `legs[j]` maps `sets[j]` into the apex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetCocone {
    pub diagram: FinSetDiagram,
    pub apex: usize,
    pub legs: Vec<Func>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limit {
    pub cone: SetCone,
    /// Apex elements as compatible families, one entry per shape object.
    pub tuples: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colimit {
    pub cocone: SetCocone,
    /// Least member `(object, element)` of each class.
    pub representatives: Vec<(Obj, usize)>,
}

pub fn is_identity(f: &[usize]) -> bool {
    f.iter().enumerate().all(|(i, &v)| i == v)
}

/// `g . f` as value lists.
pub fn compose(g: &[usize], f: &[usize]) -> Func {
    f.iter().map(|&x| g[x]).collect()
}

pub fn is_injective(f: &[usize]) -> bool {
    let mut seen = std::collections::HashSet::new();
    f.iter().all(|x| seen.insert(*x))
}

pub fn is_surjective(f: &[usize], cod: usize) -> bool {
    let mut hit = vec![false; cod];
    for &y in f {
        hit[y] = true;
    }
    hit.into_iter().all(|h| h)
}

/// All functions `dom -> cod`, lexicographic in the value list.
pub fn all_functions(dom: usize, cod: usize) -> FunctionIter {
    FunctionIter { cur: vec![0; dom], cod, done: cod == 0 && dom > 0 }
}

pub struct FunctionIter {
    cur: Vec<usize>,
    cod: usize,
    done: bool,
}

impl Iterator for FunctionIter {
    type Item = Func;
    fn next(&mut self) -> Option<Func> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut i = self.cur.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.cur[i] += 1;
            if self.cur[i] < self.cod {
                break;
            }
            self.cur[i] = 0;
        }
        Some(out)
    }
}

/// Set partitions of `0..n` as restricted growth strings (block label per element).
pub fn partitions(n: usize) -> Vec<Func> {
    fn go(n: usize, cur: &mut Func, max: usize, out: &mut Vec<Func>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            go(n, cur, if b == max { max + 1 } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), 0, &mut out);
    out
}

/// Compatible families of the diagram, lexicographically ordered.
pub fn limit_tuples(d: &FinSetDiagram) -> Vec<Vec<usize>> {
    let s = &*d.shape;
    let n = s.num_objects();
    // constraints touching object j whose other end precedes j
    let incoming: Vec<Vec<(usize, Obj)>> = (0..n)
        .map(|j| (0..s.num_morphisms()).filter(|&u| s.tgt(u) == j && s.src(u) < j).map(|u| (u, s.src(u))).collect())
        .collect();
    let outgoing: Vec<Vec<(usize, Obj)>> = (0..n)
        .map(|j| (0..s.num_morphisms()).filter(|&u| s.src(u) == j && s.tgt(u) <= j).map(|u| (u, s.tgt(u))).collect())
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(
        j: usize,
        d: &FinSetDiagram,
        incoming: &[Vec<(usize, Obj)>],
        outgoing: &[Vec<(usize, Obj)>],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if j == d.sets.len() {
            out.push(cur.clone());
            return;
        }
        let forced = incoming[j].first().map(|&(u, i)| d.maps[u][cur[i]]);
        let range: Vec<usize> = match forced {
            Some(v) => vec![v],
            None => (0..d.sets[j]).collect(),
        };
        for x in range {
            cur.push(x);
            let ok = incoming[j].iter().all(|&(u, i)| d.maps[u][cur[i]] == x)
                && outgoing[j].iter().all(|&(u, k)| d.maps[u][x] == cur[k]);
            if ok {
                go(j + 1, d, incoming, outgoing, cur, out);
            }
            cur.pop();
        }
    }
    go(0, d, &incoming, &outgoing, &mut cur, &mut out);
    out
}

/// The canonical limit: compatible families with coordinate projections.
pub fn limit(d: &FinSetDiagram) -> Limit {
    let tuples = limit_tuples(d);
    let legs = (0..d.sets.len()).map(|j| tuples.iter().map(|t| t[j]).collect()).collect();
    Limit { cone: SetCone { diagram: d.clone(), apex: tuples.len(), legs }, tuples }
}

/// The canonical colimit: disjoint union modulo the generated equivalence.
pub fn colimit(d: &FinSetDiagram) -> Colimit {
    let s = &*d.shape;
    let mut offset = Vec::with_capacity(d.sets.len());
    let mut owner = Vec::new();
    for (j, &n) in d.sets.iter().enumerate() {
        offset.push(owner.len());
        owner.extend((0..n).map(|x| (j, x)));
    }
    let total = owner.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for u in 0..s.num_morphisms() {
        let (j, k) = (s.src(u), s.tgt(u));
        for x in 0..d.sets[j] {
            let a = find(&mut parent, offset[j] + x);
            let b = find(&mut parent, offset[k] + d.maps[u][x]);
            if a != b {
                // keep the smaller index as root so roots are least members
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
    }
    let mut class_of_root = HashMap::new();
    let mut representatives = Vec::new();
    let mut flat = vec![0; total];
    for (g, slot) in flat.iter_mut().enumerate() {
        let r = find(&mut parent, g);
        let next = class_of_root.len();
        let c = *class_of_root.entry(r).or_insert_with(|| {
            representatives.push(owner[r]);
            next
        });
        *slot = c;
    }
    let legs = (0..d.sets.len()).map(|j| (0..d.sets[j]).map(|x| flat[offset[j] + x]).collect()).collect();
    Colimit { cocone: SetCocone { diagram: d.clone(), apex: representatives.len(), legs }, representatives }
}

fn check_cone_commutes(c: &SetCone) -> Result<(), LimitError> {
    let s = &*c.diagram.shape;
    if c.legs.len() != s.num_objects() {
        return Err(LimitError::Malformed("one leg per shape object required".into()));
    }
    for (j, leg) in c.legs.iter().enumerate() {
        if leg.len() != c.apex || leg.iter().any(|&y| y >= c.diagram.sets[j]) {
            return Err(LimitError::Malformed(format!("leg at {} has the wrong type", s.object_name(j))));
        }
    }
    for u in 0..s.num_morphisms() {
        let (j, k) = (s.src(u), s.tgt(u));
        for a in 0..c.apex {
            if c.diagram.maps[u][c.legs[j][a]] != c.legs[k][a] {
                return Err(LimitError::NonCommuting { morphism: s.name(u).to_string(), element: a });
            }
        }
    }
    Ok(())
}

/// Comparison map from the apex into the canonical limit (indices into `limit_tuples`).
pub fn limit_comparison(c: &SetCone) -> Result<(Vec<usize>, usize), LimitError> {
    check_cone_commutes(c)?;
    let tuples = limit_tuples(&c.diagram);
    let index: HashMap<&[usize], usize> = tuples.iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
    let map = (0..c.apex)
        .map(|a| {
            let t: Vec<usize> = c.legs.iter().map(|leg| leg[a]).collect();
            index[t.as_slice()]
        })
        .collect();
    Ok((map, tuples.len()))
}

/// True iff the comparison map apex -> limit is a bijection.
pub fn is_limit_cone(c: &SetCone) -> Result<bool, LimitError> {
    let (map, n) = limit_comparison(c)?;
    Ok(map.len() == n && is_injective(&map))
}

fn check_cocone_commutes(c: &SetCocone) -> Result<(), LimitError> {
    let s = &*c.diagram.shape;
    if c.legs.len() != s.num_objects() {
        return Err(LimitError::Malformed("one leg per shape object required".into()));
    }
    for (j, leg) in c.legs.iter().enumerate() {
        if leg.len() != c.diagram.sets[j] || leg.iter().any(|&y| y >= c.apex) {
            return Err(LimitError::Malformed(format!("leg at {} has the wrong type", s.object_name(j))));
        }
    }
    for u in 0..s.num_morphisms() {
        let (j, k) = (s.src(u), s.tgt(u));
        for x in 0..c.diagram.sets[j] {
            if c.legs[k][c.diagram.maps[u][x]] != c.legs[j][x] {
                return Err(LimitError::NonCommuting { morphism: s.name(u).to_string(), element: x });
            }
        }
    }
    Ok(())
}

/// Comparison map from the canonical colimit into the apex.
pub fn colimit_comparison(c: &SetCocone) -> Result<Func, LimitError> {
    check_cocone_commutes(c)?;
    let col = colimit(&c.diagram);
    Ok(col.representatives.iter().map(|&(j, x)| c.legs[j][x]).collect())
}

/// True iff the comparison map colimit -> apex is a bijection.
pub fn is_colimit_cocone(c: &SetCocone) -> Result<bool, LimitError> {
    let map = colimit_comparison(c)?;
    Ok(map.len() == c.apex && is_injective(&map))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equalizer_shape() -> Arc<FinCategory> {
        Arc::new(FinCategory::from_graph(&["s", "t"], &[("f", 0, 1), ("g", 0, 1)]).unwrap())
    }

    fn span_shape() -> Arc<FinCategory> {
        Arc::new(FinCategory::from_graph(&["l", "m", "r"], &[("p", 1, 0), ("q", 1, 2)]).unwrap())
    }

    #[test]
    fn binary_product() {
        let d = FinSetDiagram::new(Arc::new(FinCategory::discrete(&["a", "b"])), vec![2, 1], vec![vec![0, 1], vec![0]])
            .unwrap();
        let l = limit(&d);
        assert_eq!(l.tuples, vec![vec![0, 0], vec![1, 0]]);
        assert!(is_limit_cone(&l.cone).unwrap());
    }

    #[test]
    fn equalizer_examples() {
        let sh = equalizer_shape();
        // f = (x, x, y), g = (x, y, y)
        let d =
            FinSetDiagram::new(sh.clone(), vec![3, 2], vec![vec![0, 1, 2], vec![0, 1], vec![0, 0, 1], vec![0, 1, 1]])
                .unwrap();
        let l = limit(&d);
        let apex: Vec<usize> = l.tuples.iter().map(|t| t[0]).collect();
        assert_eq!(apex, vec![0, 2]);
        let same =
            FinSetDiagram::new(sh, vec![3, 2], vec![vec![0, 1, 2], vec![0, 1], vec![0, 0, 1], vec![0, 0, 1]]).unwrap();
        assert_eq!(limit(&same).cone.apex, 3);
    }

    #[test]
    fn duplicated_apex_element_is_not_a_limit() {
        let d = FinSetDiagram::new(Arc::new(FinCategory::discrete(&["a", "b"])), vec![2, 1], vec![vec![0, 1], vec![0]])
            .unwrap();
        let cone = SetCone { diagram: d, apex: 3, legs: vec![vec![0, 1, 1], vec![0, 0, 0]] };
        assert!(!is_limit_cone(&cone).unwrap());
    }

    #[test]
    fn empty_diagram_limits() {
        let d = FinSetDiagram::new(Arc::new(FinCategory::discrete(&[])), vec![], vec![]).unwrap();
        assert_eq!(limit(&d).cone.apex, 1);
        assert_eq!(colimit(&d).cocone.apex, 0);
        let two = SetCone { diagram: d.clone(), apex: 2, legs: vec![] };
        assert!(!is_limit_cone(&two).unwrap());
    }

    #[test]
    fn non_commuting_legs_are_an_error() {
        let sh = equalizer_shape();
        let d = FinSetDiagram::new(sh, vec![2, 2], vec![vec![0, 1], vec![0, 1], vec![0, 1], vec![1, 0]]).unwrap();
        let cone = SetCone { diagram: d, apex: 1, legs: vec![vec![0], vec![0]] };
        assert!(matches!(is_limit_cone(&cone), Err(LimitError::NonCommuting { .. })));
    }

    #[test]
    fn colimit_examples() {
        let disc =
            FinSetDiagram::new(Arc::new(FinCategory::discrete(&["a", "b"])), vec![2, 1], vec![vec![0, 1], vec![0]])
                .unwrap();
        assert_eq!(colimit(&disc).cocone.apex, 3);
        let sh = equalizer_shape();
        let coeq = FinSetDiagram::new(sh, vec![2, 3], vec![vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![0, 2]]).unwrap();
        assert_eq!(colimit(&coeq).cocone.apex, 3);
        let span =
            FinSetDiagram::new(span_shape(), vec![1, 1, 1], vec![vec![0], vec![0], vec![0], vec![0], vec![0]]).unwrap();
        let c = colimit(&span);
        assert_eq!(c.cocone.apex, 1);
        assert!(is_colimit_cocone(&c.cocone).unwrap());
    }

    #[test]
    fn unreached_element_is_not_a_coproduct() {
        let disc = FinSetDiagram::new(Arc::new(FinCategory::discrete(&["a", "b"])), vec![1, 1], vec![vec![0], vec![0]])
            .unwrap();
        let c = SetCocone { diagram: disc, apex: 3, legs: vec![vec![0], vec![1]] };
        assert!(!is_colimit_cocone(&c).unwrap());
    }

    /// Epimorphism cocone of q: apex B over the span B <-q- A -q-> B, legs id, id, q.
    fn epi_cocone(q: &[usize], b: usize) -> SetCocone {
        let shape = Arc::new(FinCategory::from_graph(&["y", "a", "b"], &[("u", 0, 1), ("v", 0, 2)]).unwrap());
        let idb: Func = (0..b).collect();
        let ida: Func = (0..q.len()).collect();
        let d =
            FinSetDiagram::new(shape, vec![q.len(), b, b], vec![ida, idb.clone(), idb.clone(), q.to_vec(), q.to_vec()])
                .unwrap();
        SetCocone { diagram: d, apex: b, legs: vec![q.to_vec(), idb.clone(), idb] }
    }

    #[test]
    fn epimorphism_cocone_matches_pushout_oracle() {
        for a in 0..4 {
            for b in 0..4 {
                for q in all_functions(a, b) {
                    let cocone = epi_cocone(&q, b);
                    // oracle: pushout of q along q has exactly b classes iff q is onto
                    let pushout = colimit(&cocone.diagram).cocone.apex;
                    let verdict = is_colimit_cocone(&cocone).unwrap();
                    assert_eq!(verdict, pushout == b);
                    assert_eq!(verdict, is_surjective(&q, b));
                }
            }
        }
    }

    #[test]
    fn partitions_are_bell_numbers() {
        let bell: Vec<usize> = (0..7).map(|n| partitions(n).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn function_iter_counts() {
        assert_eq!(all_functions(0, 0).count(), 1);
        assert_eq!(all_functions(2, 0).count(), 0);
        assert_eq!(all_functions(3, 2).count(), 8);
    }
}
