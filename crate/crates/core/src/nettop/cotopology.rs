//! Topologies on open-set lattices and the cotopologies they correspond to.
//!
//! A component `C(P, X)` lives on `(P + {inf}) x |X|`; the point `(p, x)` has
//! index `p * |X| + x`, with `p = |P|` standing for `inf`.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::{
    all_directed_sets, cofinal_maps, converges_unchecked, digits, iteration_families, topology_from_convergence,
};
use super::{ConvergenceOracle, DirectedSet, FinTopSpace, Net, Rule, TopError};
use crate::order::full;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CotopologyError {
    #[error("not a topological topology: {0:?}")]
    NotTopological(TtWitness),
    #[error(transparent)]
    Top(#[from] TopError),
    #[error("tau must live on the {expected} open sets of the space, found {found} points")]
    WrongCarrier { expected: usize, found: usize },
}

/// A space together with a topology `tau` on its open sets; point `i` of
/// `tau` is `space.opens[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TopologicalTopology {
    pub space: FinTopSpace,
    pub tau: FinTopSpace,
}

impl TopologicalTopology {
    pub fn new(space: FinTopSpace, tau: FinTopSpace) -> Result<Self, CotopologyError> {
        if tau.n != space.opens.len() {
            return Err(CotopologyError::WrongCarrier { expected: space.opens.len(), found: tau.n });
        }
        Ok(TopologicalTopology { space, tau })
    }

    /// Every topology on `O(X)`.
    pub fn all_over(space: &FinTopSpace) -> Vec<TopologicalTopology> {
        super::all_topologies(space.opens.len())
            .into_iter()
            .map(|tau| TopologicalTopology { space: space.clone(), tau })
            .collect()
    }

    fn union(&self, a: usize, b: usize) -> usize {
        self.space.open_index(self.space.opens[a] | self.space.opens[b]).expect("opens closed under union")
    }

    fn intersection(&self, a: usize, b: usize) -> usize {
        self.space.open_index(self.space.opens[a] & self.space.opens[b]).expect("opens closed under intersection")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Operation {
    Union,
    Intersection,
}

/// A convergent constant net `family -> limit` in `O(X)^k` whose image does not converge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TtWitness {
    pub operation: Operation,
    pub family: Vec<usize>,
    pub limit: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TtReport {
    /// Unions and intersections of every arity up to `max_arity` are continuous.
    pub finitary: bool,
    pub max_arity: usize,
    pub witness: Option<TtWitness>,
}

/// Continuity of `k`-ary unions and intersections `O(X)^k -> O(X)` for
/// `k <= |O(X)|`, tested on constant nets over a one-point index, which
/// decides continuity between finite spaces. Nullary operations are constants.
pub fn check_topological_topology(tt: &TopologicalTopology) -> TtReport {
    let m = tt.tau.n;
    let one = DirectedSet::singleton();
    let conv: Vec<Vec<bool>> = (0..m)
        .map(|a| (0..m).map(|s| converges_unchecked(&tt.tau, &Net::constant(one.clone(), a), s)).collect())
        .collect();
    for k in 1..=m {
        for op in [Operation::Union, Operation::Intersection] {
            if let Some(w) = arity_failure(tt, &conv, k, op) {
                return TtReport { finitary: false, max_arity: m, witness: Some(w) };
            }
        }
    }
    TtReport { finitary: true, max_arity: m, witness: None }
}

fn arity_failure(tt: &TopologicalTopology, conv: &[Vec<bool>], k: usize, op: Operation) -> Option<TtWitness> {
    let m = conv.len();
    let apply = |xs: &[usize]| -> usize {
        xs[1..].iter().fold(xs[0], |acc, &x| match op {
            Operation::Union => tt.union(acc, x),
            Operation::Intersection => tt.intersection(acc, x),
        })
    };
    for code in 0..m.pow(k as u32) {
        let limit = digits(code, &vec![m; k]);
        let target = apply(&limit);
        // every family converging to `limit` componentwise
        let choices: Vec<Vec<usize>> = limit.iter().map(|&s| (0..m).filter(|&a| conv[a][s]).collect()).collect();
        let radix: Vec<usize> = choices.iter().map(Vec::len).collect();
        for c in 0..radix.iter().product() {
            let family: Vec<usize> = digits(c, &radix).iter().enumerate().map(|(i, &j)| choices[i][j]).collect();
            if !conv[apply(&family)][target] {
                return Some(TtWitness { operation: op, family, limit });
            }
        }
    }
    None
}

/// Opens `V`, `W` for which the moving-bump family over an infinite index set
/// has a discontinuous union: the family with `V` at coordinate `p` and `W`
/// elsewhere tends to the constant family `W` as `p` grows, while its union
/// stays `V u W`. Continuity of infinite unions forces `V u W -> W`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BumpWitness {
    pub bump: usize,
    pub background: usize,
}

/// Diagnostic for the infinitary condition, which the finitary check cannot see.
pub fn infinitary_bump_witness(tt: &TopologicalTopology) -> Option<BumpWitness> {
    let m = tt.tau.n;
    let one = DirectedSet::singleton();
    (0..m).flat_map(|v| (0..m).map(move |w| (v, w))).find_map(|(v, w)| {
        let joined = tt.union(v, w);
        (joined != w && !converges_unchecked(&tt.tau, &Net::constant(one.clone(), joined), w))
            .then_some(BumpWitness { bump: v, background: w })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CotopologyComponent {
    pub index: DirectedSet,
    pub space: FinTopSpace,
}

impl CotopologyComponent {
    /// The slice `iota_p^{-1}(U)` as a subset of `X`.
    pub fn slice(&self, u: u64, p: usize, n: usize) -> u64 {
        (u >> (p * n)) & full(n)
    }
}

/// A cotopology on a finite space, restricted to directed sets within `bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CotopologyRep {
    pub space: FinTopSpace,
    pub bound: usize,
    pub components: Vec<CotopologyComponent>,
}

impl CotopologyRep {
    /// Component for an index set isomorphic to `p`, with the relabeling.
    pub fn component_for(&self, p: &DirectedSet) -> Option<(&CotopologyComponent, Vec<usize>)> {
        let (canon, perm) = p.canonical();
        self.components.iter().find(|c| c.index == canon).map(|c| (c, perm))
    }
}

fn assemble(slices: &[u64], n: usize) -> u64 {
    slices.iter().enumerate().fold(0, |m, (p, &s)| m | s << (p * n))
}

/// `U` is open iff every slice is open and the slices over `P` converge in
/// `tau` to the slice at `inf`. Rejects `tt` failing the finitary check.
pub fn cotopology_from_tt(tt: &TopologicalTopology, p: &DirectedSet) -> Result<CotopologyComponent, CotopologyError> {
    if let Some(w) = check_topological_topology(tt).witness {
        return Err(CotopologyError::NotTopological(w));
    }
    component_unchecked(tt, p)
}

fn component_unchecked(tt: &TopologicalTopology, p: &DirectedSet) -> Result<CotopologyComponent, CotopologyError> {
    let (n, m, k) = (tt.space.n, tt.tau.n, p.size());
    if (k + 1) * n > 64 {
        return Err(TopError::TooLarge((k + 1) * n).into());
    }
    let mut opens = Vec::new();
    for code in 0..m.pow(k as u32 + 1) {
        let idx = digits(code, &vec![m; k + 1]);
        let net = Net { index: p.clone(), values: idx[..k].to_vec() };
        if converges_unchecked(&tt.tau, &net, idx[k]) {
            let slices: Vec<u64> = idx.iter().map(|&i| tt.space.opens[i]).collect();
            opens.push(assemble(&slices, n));
        }
    }
    let space = FinTopSpace::new((k + 1) * n, opens)?;
    Ok(CotopologyComponent { index: p.clone(), space })
}

pub fn cotopology_rep(tt: &TopologicalTopology, bound: usize) -> Result<CotopologyRep, CotopologyError> {
    if let Some(w) = check_topological_topology(tt).witness {
        return Err(CotopologyError::NotTopological(w));
    }
    let components = all_directed_sets(bound).iter().map(|p| component_unchecked(tt, p)).collect::<Result<_, _>>()?;
    Ok(CotopologyRep { space: tt.space.clone(), bound, components })
}

/// The identities of `(P x X) + X`: each component is a coproduct of copies of `X`.
pub fn trivial_cotopology(space: &FinTopSpace, bound: usize) -> CotopologyRep {
    let components = all_directed_sets(bound)
        .into_iter()
        .map(|p| {
            let copies = vec![space.clone(); p.size() + 1];
            CotopologyComponent { index: p, space: FinTopSpace::coproduct(&copies).expect("small coproduct") }
        })
        .collect();
    CotopologyRep { space: space.clone(), bound, components }
}

/// `(U_p) -> U` in `O(X)` iff the set with slices `U_p` over `P` and `U`
/// over `inf` is open in `C(P, X)`; `tau` is the resulting topology.
pub fn tt_from_cotopology(c: &CotopologyRep) -> Result<TopologicalTopology, CotopologyError> {
    let space = c.space.clone();
    let n = space.n;
    let rep = c.clone();
    let rule: Rule = Arc::new(move |x: &Net, s: usize| {
        let x = x.canonical();
        let Some((comp, _)) = rep.component_for(&x.index) else { return false };
        let mut slices: Vec<u64> = x.values.iter().map(|&v| rep.space.opens[v]).collect();
        slices.push(rep.space.opens[s]);
        comp.space.is_open(assemble(&slices, n))
    });
    let index_sets = c.components.iter().map(|k| k.index.clone()).collect();
    let o = ConvergenceOracle::with_index_sets(space.opens.len(), index_sets, c.bound, rule);
    let tau = topology_from_convergence(&o)?;
    TopologicalTopology::new(space, tau)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CotopologyWitness {
    /// The codiagonal `C(P, X) -> X` pulls the open `open` back to a non-open set.
    Constant { index: DirectedSet, open: u64 },
    /// `C(h, X) : C(Q, X) -> C(P, X)` is not continuous at `open`.
    Subnet { source: DirectedSet, target: DirectedSet, cofinal: Vec<usize>, open: u64 },
    /// `open` is not open in `C(P, X)` but is open in the locality colimit.
    Locality { index: DirectedSet, open: u64 },
    /// The iteration map into `C(P x prod Q_p, X)` pulls `pulled` back to a non-open set.
    Iteration { outer: DirectedSet, inner: Vec<DirectedSet>, pulled: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CotopologyAxiom {
    pub axiom: String,
    pub passed: bool,
    pub cases: usize,
    pub witness: Option<CotopologyWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CotopologyReport {
    pub bound: usize,
    /// Largest `P x prod Q_p` tried; the product must itself lie within `bound`.
    pub iteration_cap: usize,
    pub axioms: Vec<CotopologyAxiom>,
}

impl CotopologyReport {
    pub fn all_passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }
}

fn report(name: &str, cases: usize, witness: Option<CotopologyWitness>) -> CotopologyAxiom {
    CotopologyAxiom { axiom: name.into(), passed: witness.is_none(), cases, witness }
}

/// Preimage of `u` under `(q, x) -> (h(q), x)`, `inf -> inf`.
fn pull(u: u64, h: &[usize], inf_target: usize, n: usize) -> u64 {
    let mut slices: Vec<u64> = h.iter().map(|&p| (u >> (p * n)) & full(n)).collect();
    slices.push((u >> (inf_target * n)) & full(n));
    assemble(&slices, n)
}

/// The dual axioms: each mediating map is forced on carriers, so the check
/// is continuity of that map between the finite spaces.
pub fn check_cotopology_axioms(c: &CotopologyRep) -> CotopologyReport {
    let n = c.space.n;
    let comps = &c.components;

    let mut cases = 0;
    let mut constant = None;
    'outer: for comp in comps {
        for &v in &c.space.opens {
            cases += 1;
            let u = assemble(&vec![v; comp.index.size() + 1], n);
            if !comp.space.is_open(u) {
                constant = Some(CotopologyWitness::Constant { index: comp.index.clone(), open: v });
                break 'outer;
            }
        }
    }
    let constant = report("constant nets", cases, constant);

    let mut cases = 0;
    let mut subnet = None;
    'outer: for src in comps {
        for tgt in comps {
            for h in cofinal_maps(&src.index, &tgt.index) {
                for &u in &tgt.space.opens {
                    cases += 1;
                    if !src.space.is_open(pull(u, &h, tgt.index.size(), n)) {
                        subnet = Some(CotopologyWitness::Subnet {
                            source: src.index.clone(),
                            target: tgt.index.clone(),
                            cofinal: h,
                            open: u,
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    let subnet = report("subnets", cases, subnet);

    let mut cases = 0;
    let mut locality = None;
    'outer: for comp in comps {
        let p = &comp.index;
        let k = p.size();
        let subs: Vec<(DirectedSet, Vec<usize>)> =
            p.cofinal_subsets().into_iter().map(|s| p.restrict(s).expect("cofinal subsets are directed")).collect();
        let m = c.space.opens.len();
        for code in 0..m.pow(k as u32 + 1) {
            let slices: Vec<u64> = digits(code, &vec![m; k + 1]).iter().map(|&i| c.space.opens[i]).collect();
            let u = assemble(&slices, n);
            if comp.space.is_open(u) {
                continue;
            }
            cases += 1;
            let glued = subs.iter().all(|(q, idx)| {
                comps.iter().any(|r| {
                    cofinal_maps(&r.index, q).iter().any(|h| {
                        let into_p: Vec<usize> = h.iter().map(|&i| idx[i]).collect();
                        r.space.is_open(pull(u, &into_p, k, n))
                    })
                })
            });
            if glued {
                locality = Some(CotopologyWitness::Locality { index: p.clone(), open: u });
                break 'outer;
            }
        }
    }
    let locality = report("locality", cases, locality);

    let index_sets: Vec<DirectedSet> = comps.iter().map(|k| k.index.clone()).collect();
    let mut cases = 0;
    let mut iteration = None;
    'outer: for (outer, inner) in iteration_families(&index_sets, c.bound) {
        let big = outer.iteration_index(&inner).expect("small iteration index");
        let Some((target, perm)) = c.component_for(&big) else { continue };
        let Some((base, _)) = c.component_for(&outer) else { continue };
        let inner_comps: Vec<&CotopologyComponent> =
            inner.iter().map(|q| c.component_for(q).expect("inner component").0).collect();
        let mut radix = vec![outer.size()];
        radix.extend(inner.iter().map(DirectedSet::size));
        for &v in &base.space.opens {
            // opens of each C(Q_p, X) agreeing with v at inf
            let choices: Vec<Vec<u64>> = inner_comps
                .iter()
                .enumerate()
                .map(|(p, qc)| {
                    let kq = qc.index.size();
                    qc.space.opens.iter().copied().filter(|&w| qc.slice(w, kq, n) == base.slice(v, p, n)).collect()
                })
                .collect();
            let counts: Vec<usize> = choices.iter().map(Vec::len).collect();
            for ch in 0..counts.iter().product() {
                let pick: Vec<u64> = digits(ch, &counts).iter().enumerate().map(|(p, &i)| choices[p][i]).collect();
                let mut slices = vec![0u64; big.size() + 1];
                for (e, slot) in slices.iter_mut().enumerate().take(big.size()) {
                    let d = digits(e, &radix);
                    let ps = d[0];
                    *slot = inner_comps[ps].slice(pick[ps], d[1 + ps], n);
                }
                slices[big.size()] = base.slice(v, outer.size(), n);
                // move to the canonical labeling of the target component
                let mut relabeled = vec![0u64; big.size() + 1];
                for e in 0..big.size() {
                    relabeled[perm[e]] = slices[e];
                }
                relabeled[big.size()] = slices[big.size()];
                let pulled = assemble(&relabeled, n);
                cases += 1;
                if !target.space.is_open(pulled) {
                    iteration =
                        Some(CotopologyWitness::Iteration { outer: outer.clone(), inner: inner.clone(), pulled });
                    break 'outer;
                }
            }
        }
    }
    let iteration = report("iterations", cases, iteration);

    CotopologyReport { bound: c.bound, iteration_cap: c.bound, axioms: vec![constant, subnet, locality, iteration] }
}
