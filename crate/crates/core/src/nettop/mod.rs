//! Finite topological spaces seen through net convergence.
//!
//! Subsets of a carrier are `u64` bitmasks, so carriers hold at most 64 points.
//! Directed sets are finite, hence have greatest elements; convergence over
//! them sees exactly the specialization preorder.

pub mod cotopology;
pub mod fragment;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::finsetlim::{all_functions, Func};
use crate::order::{all_preorders, bits, full, Preorder};
use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopError {
    #[error("carrier of size {0} exceeds 64 points")]
    TooLarge(usize),
    #[error("subset {0:#b} leaves the carrier")]
    NotSubset(u64),
    #[error("opens must contain the empty set and the carrier")]
    MissingBounds,
    #[error("opens not closed under {op} of {a:#b} and {b:#b}")]
    NotClosed { op: &'static str, a: u64, b: u64 },
    #[error("point {0} is outside the carrier")]
    PointOutside(usize),
    #[error("not a directed set: {0}")]
    NotDirected(String),
    #[error("map is not a function between the carriers")]
    BadMap,
}

/// A finite space; `opens` is sorted and duplicate free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FinTopSpace {
    pub n: usize,
    pub opens: Vec<u64>,
}

impl FinTopSpace {
    pub fn new(n: usize, mut opens: Vec<u64>) -> Result<Self, TopError> {
        if n > 64 {
            return Err(TopError::TooLarge(n));
        }
        opens.sort_unstable();
        opens.dedup();
        if let Some(&u) = opens.iter().find(|&&u| u & !full(n) != 0) {
            return Err(TopError::NotSubset(u));
        }
        if opens.first() != Some(&0) || opens.last() != Some(&full(n)) {
            return Err(TopError::MissingBounds);
        }
        for &a in &opens {
            for &b in &opens {
                if opens.binary_search(&(a | b)).is_err() {
                    return Err(TopError::NotClosed { op: "union", a, b });
                }
                if opens.binary_search(&(a & b)).is_err() {
                    return Err(TopError::NotClosed { op: "intersection", a, b });
                }
            }
        }
        Ok(FinTopSpace { n, opens })
    }

    pub fn discrete(n: usize) -> Self {
        FinTopSpace { n, opens: (0..=full(n)).collect() }
    }

    pub fn trivial(n: usize) -> Self {
        FinTopSpace { n, opens: if n == 0 { vec![0] } else { vec![0, full(n)] } }
    }

    /// Points `{0, 1}` with opens `{}`, `{1}`, `{0, 1}`.
    pub fn sierpinski() -> Self {
        FinTopSpace { n: 2, opens: vec![0, 0b10, 0b11] }
    }

    /// Topology generated by `sets`.
    pub fn from_subbase(n: usize, sets: &[u64]) -> Result<Self, TopError> {
        if let Some(&u) = sets.iter().find(|&&u| u & !full(n) != 0) {
            return Err(TopError::NotSubset(u));
        }
        let mut base: BTreeSet<u64> = sets.iter().copied().collect();
        base.insert(full(n));
        loop {
            let v: Vec<u64> = base.iter().copied().collect();
            let before = base.len();
            for &a in &v {
                for &b in &v {
                    base.insert(a & b);
                }
            }
            if base.len() == before {
                break;
            }
        }
        let mut opens: BTreeSet<u64> = BTreeSet::from([0]);
        for &b in &base {
            let cur: Vec<u64> = opens.iter().copied().collect();
            for u in cur {
                opens.insert(u | b);
            }
        }
        FinTopSpace::new(n, opens.into_iter().collect())
    }

    /// The up-sets of a preorder.
    pub fn from_specialization(p: &Preorder) -> Self {
        let opens = (0..=full(p.n)).filter(|&u| bits(u).all(|x| p.up[x] & !u == 0)).collect();
        FinTopSpace { n: p.n, opens }
    }

    pub fn is_open(&self, u: u64) -> bool {
        self.opens.binary_search(&u).is_ok()
    }

    pub fn open_index(&self, u: u64) -> Option<usize> {
        self.opens.binary_search(&u).ok()
    }

    /// Smallest open set containing `x`.
    pub fn neighbourhood(&self, x: usize) -> u64 {
        self.opens.iter().filter(|&&u| u >> x & 1 == 1).fold(full(self.n), |a, &u| a & u)
    }

    /// `x <= y` iff every open containing `x` contains `y`.
    pub fn specialization(&self) -> Preorder {
        Preorder { n: self.n, up: (0..self.n).map(|x| self.neighbourhood(x)).collect() }
    }

    pub fn is_discrete(&self) -> bool {
        self.opens.len() == 1 << self.n
    }

    pub fn preimage(f: &[usize], u: u64) -> u64 {
        f.iter().enumerate().filter(|&(_, &y)| u >> y & 1 == 1).fold(0, |m, (x, _)| m | 1 << x)
    }

    /// Continuity by open preimages.
    pub fn is_continuous(&self, f: &[usize], target: &FinTopSpace) -> bool {
        f.len() == self.n
            && f.iter().all(|&y| y < target.n)
            && target.opens.iter().all(|&v| self.is_open(Self::preimage(f, v)))
    }

    /// All continuous maps into `target`, lexicographic in the value list.
    pub fn continuous_maps(&self, target: &FinTopSpace) -> Vec<Func> {
        all_functions(self.n, target.n).filter(|f| self.is_continuous(f, target)).collect()
    }

    /// The open-set criterion: distinct points have disjoint neighbourhoods.
    pub fn is_t2(&self) -> bool {
        (0..self.n).all(|x| (0..self.n).all(|y| x == y || self.neighbourhood(x) & self.neighbourhood(y) == 0))
    }

    /// Finest topology on `n` points making every `(leg, space)` continuous.
    pub fn final_topology(n: usize, legs: &[(&[usize], &FinTopSpace)]) -> Result<Self, TopError> {
        if n > 24 {
            return Err(TopError::TooLarge(n));
        }
        let opens = (0..=full(n)).filter(|&u| legs.iter().all(|(f, s)| s.is_open(Self::preimage(f, u)))).collect();
        FinTopSpace::new(n, opens)
    }

    /// Disjoint union; summand `i` occupies a contiguous block.
    pub fn coproduct(spaces: &[FinTopSpace]) -> Result<Self, TopError> {
        let n: usize = spaces.iter().map(|s| s.n).sum();
        if n > 64 {
            return Err(TopError::TooLarge(n));
        }
        let mut opens = vec![0u64];
        let mut shift = 0;
        for s in spaces {
            opens = opens.iter().flat_map(|&u| s.opens.iter().map(move |&v| u | v << shift)).collect();
            shift += s.n;
        }
        FinTopSpace::new(n, opens)
    }

    /// Product with mixed-radix points, first factor most significant.
    pub fn product(spaces: &[FinTopSpace]) -> Result<Self, TopError> {
        let radix: Vec<usize> = spaces.iter().map(|s| s.n).collect();
        let n: usize = radix.iter().product();
        if n > 64 {
            return Err(TopError::TooLarge(n));
        }
        let mut subbase = Vec::new();
        for (i, s) in spaces.iter().enumerate() {
            let proj: Func = (0..n).map(|k| digits(k, &radix)[i]).collect();
            subbase.extend(s.opens.iter().map(|&v| Self::preimage(&proj, v)));
        }
        FinTopSpace::from_subbase(n, &subbase)
    }
}

impl fmt::Display for FinTopSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "space {} {{", self.n)?;
        for (k, u) in self.opens.iter().enumerate() {
            let pts: Vec<String> = bits(*u).map(|x| x.to_string()).collect();
            write!(f, "{}[{}]", if k == 0 { "" } else { " " }, pts.join(","))?;
        }
        write!(f, "}}")
    }
}

/// Mixed-radix digits, first digit most significant.
pub fn digits(mut k: usize, radix: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radix.len()];
    for i in (0..radix.len()).rev() {
        out[i] = k % radix[i];
        k /= radix[i];
    }
    out
}

/// Every topology on `n <= 4` points, by filtering all families of subsets.
pub fn all_topologies_brute(n: usize) -> Vec<FinTopSpace> {
    assert!(n <= 4, "brute-force enumeration is limited to 4 points");
    let inner: Vec<u64> = (1..full(n)).collect();
    let mut out = Vec::new();
    for code in 0u64..1 << inner.len() {
        let mut opens = vec![0, full(n)];
        opens.extend(bits(code).map(|i| inner[i]));
        if let Ok(s) = FinTopSpace::new(n, opens) {
            out.push(s);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Every topology on `n` points, as up-sets of preorders.
pub fn all_topologies(n: usize) -> Vec<FinTopSpace> {
    let mut out: Vec<FinTopSpace> = all_preorders(n).iter().map(FinTopSpace::from_specialization).collect();
    out.sort();
    out
}

/// A finite nonempty directed preorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DirectedSet {
    pub order: Preorder,
}

impl DirectedSet {
    pub fn new(order: Preorder) -> Result<Self, TopError> {
        if order.n == 0 {
            return Err(TopError::NotDirected("empty".into()));
        }
        if order.n > 64 {
            return Err(TopError::TooLarge(order.n));
        }
        if !order.is_preorder() {
            return Err(TopError::NotDirected("not reflexive and transitive".into()));
        }
        for i in 0..order.n {
            for j in 0..order.n {
                if order.up[i] & order.up[j] == 0 {
                    return Err(TopError::NotDirected(format!("{i} and {j} have no upper bound")));
                }
            }
        }
        Ok(DirectedSet { order })
    }

    pub fn singleton() -> Self {
        DirectedSet { order: Preorder::chain(1) }
    }

    pub fn chain(n: usize) -> Self {
        DirectedSet::new(Preorder::chain(n)).expect("chain")
    }

    pub fn size(&self) -> usize {
        self.order.n
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.order.le(i, j)
    }

    /// Elements above everything.
    pub fn tops(&self) -> u64 {
        self.order.up.iter().fold(full(self.size()), |a, &u| a & u)
    }

    pub fn top(&self) -> usize {
        self.tops().trailing_zeros() as usize
    }

    /// `P_{>= p}`.
    pub fn tail(&self, p: usize) -> u64 {
        self.order.up[p]
    }

    /// The induced order on a subset, with the original index of each new element.
    pub fn restrict(&self, subset: u64) -> Result<(DirectedSet, Vec<usize>), TopError> {
        let idx: Vec<usize> = bits(subset).collect();
        let up = idx
            .iter()
            .map(|&i| idx.iter().enumerate().filter(|&(_, &j)| self.le(i, j)).fold(0u64, |m, (k, _)| m | 1 << k))
            .collect();
        Ok((DirectedSet::new(Preorder { n: idx.len(), up })?, idx))
    }

    pub fn is_cofinal_subset(&self, subset: u64) -> bool {
        subset != 0 && (0..self.size()).all(|p| self.tail(p) & subset != 0)
    }

    pub fn cofinal_subsets(&self) -> Vec<u64> {
        (1..=full(self.size())).filter(|&s| self.is_cofinal_subset(s)).collect()
    }

    /// Least relabeling (see [`Preorder::canonical`]) and the permutation achieving it.
    pub fn canonical(&self) -> (DirectedSet, Vec<usize>) {
        let (order, perm) = self.order.canonical();
        (DirectedSet { order }, perm)
    }

    /// `P x prod_{p} Q_p` in the product order; element `(p, f)` sits at
    /// the mixed-radix code of `[p, f(0), f(1), ...]`.
    pub fn iteration_index(&self, inner: &[DirectedSet]) -> Result<DirectedSet, TopError> {
        let mut radix = vec![self.size()];
        radix.extend(inner.iter().map(DirectedSet::size));
        let n: usize = radix.iter().product();
        if n > 64 {
            return Err(TopError::TooLarge(n));
        }
        let ds: Vec<Vec<usize>> = (0..n).map(|k| digits(k, &radix)).collect();
        let up = ds
            .iter()
            .map(|a| {
                (0..n)
                    .filter(|&k| {
                        let b = &ds[k];
                        self.le(a[0], b[0]) && inner.iter().enumerate().all(|(r, q)| q.le(a[r + 1], b[r + 1]))
                    })
                    .fold(0u64, |m, k| m | 1 << k)
            })
            .collect();
        DirectedSet::new(Preorder { n, up })
    }
}

/// `h : Q -> P` is cofinal when every tail of `P` contains the image of some tail of `Q`.
pub fn is_cofinal(h: &[usize], q: &DirectedSet, p: &DirectedSet) -> bool {
    h.len() == q.size()
        && (0..p.size()).all(|p0| {
            let tail = p.tail(p0);
            (0..q.size()).any(|q0| bits(q.tail(q0)).all(|r| tail >> h[r] & 1 == 1))
        })
}

pub fn cofinal_maps(q: &DirectedSet, p: &DirectedSet) -> Vec<Func> {
    all_functions(q.size(), p.size()).filter(|h| is_cofinal(h, q, p)).collect()
}

/// Directed sets with at most `max` elements, one per isomorphism class,
/// ordered by size and then by canonical code.
pub fn all_directed_sets(max: usize) -> Vec<DirectedSet> {
    let mut out = Vec::new();
    for k in 1..=max {
        let classes: BTreeSet<Preorder> = all_preorders(k)
            .into_iter()
            .filter_map(|p| DirectedSet::new(p).ok())
            .map(|d| d.canonical().0.order)
            .collect();
        out.extend(classes.into_iter().map(|order| DirectedSet { order }));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Net {
    pub index: DirectedSet,
    pub values: Vec<usize>,
}

impl Net {
    pub fn new(index: DirectedSet, values: Vec<usize>) -> Self {
        assert_eq!(index.size(), values.len(), "a net has one value per index");
        Net { index, values }
    }

    pub fn constant(index: DirectedSet, value: usize) -> Self {
        let values = vec![value; index.size()];
        Net { index, values }
    }

    /// `x o h` for `h : Q -> P`.
    pub fn subnet(&self, q: &DirectedSet, h: &[usize]) -> Net {
        Net { index: q.clone(), values: h.iter().map(|&p| self.values[p]).collect() }
    }

    pub fn map(&self, f: &[usize]) -> Net {
        Net { index: self.index.clone(), values: self.values.iter().map(|&x| f[x]).collect() }
    }

    pub fn value_mask(&self) -> u64 {
        self.values.iter().fold(0, |m, &x| m | 1 << x)
    }

    /// The same net over the canonical relabeling of its index.
    pub fn canonical(&self) -> Net {
        let (index, perm) = self.index.canonical();
        let mut values = vec![0; self.values.len()];
        for (i, &v) in self.values.iter().enumerate() {
            values[perm[i]] = v;
        }
        Net { index, values }
    }
}

/// Nets over `index` with values in `0..carrier`, by base-`carrier` code.
pub fn nets_over(index: &DirectedSet, carrier: usize) -> impl Iterator<Item = Net> + '_ {
    all_functions(index.size(), carrier).map(move |values| Net { index: index.clone(), values })
}

/// `x -> p`: every open around `p` contains a tail of `x`.
pub fn converges(s: &FinTopSpace, x: &Net, p: usize) -> Result<bool, TopError> {
    if p >= s.n {
        return Err(TopError::PointOutside(p));
    }
    if let Some(&v) = x.values.iter().find(|&&v| v >= s.n) {
        return Err(TopError::PointOutside(v));
    }
    Ok(converges_unchecked(s, x, p))
}

fn converges_unchecked(s: &FinTopSpace, x: &Net, p: usize) -> bool {
    s.opens
        .iter()
        .filter(|&&u| u >> p & 1 == 1)
        .all(|&u| (0..x.index.size()).any(|q| bits(x.index.tail(q)).all(|r| u >> x.values[r] & 1 == 1)))
}

pub type Rule = Arc<dyn Fn(&Net, usize) -> bool + Send + Sync>;

/// A convergence relation given by a rule, tabulated over all nets indexed
/// by the directed sets of [`all_directed_sets`]`(bound)`.
#[derive(Clone)]
pub struct ConvergenceOracle {
    pub carrier: usize,
    pub bound: usize,
    pub index_sets: Vec<DirectedSet>,
    /// Per index set, per net code, the mask of limits.
    pub table: Vec<Vec<u64>>,
    rule: Rule,
}

impl fmt::Debug for ConvergenceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvergenceOracle")
            .field("carrier", &self.carrier)
            .field("bound", &self.bound)
            .field("table", &self.table)
            .finish()
    }
}

impl ConvergenceOracle {
    pub fn from_rule(carrier: usize, bound: usize, rule: Rule) -> Self {
        Self::with_index_sets(carrier, all_directed_sets(bound), bound, rule)
    }

    pub fn with_index_sets(carrier: usize, index_sets: Vec<DirectedSet>, bound: usize, rule: Rule) -> Self {
        let table = index_sets
            .iter()
            .map(|d| {
                nets_over(d, carrier)
                    .map(|x| (0..carrier).filter(|&p| rule(&x, p)).fold(0u64, |m, p| m | 1 << p))
                    .collect()
            })
            .collect();
        ConvergenceOracle { carrier, bound, index_sets, table, rule }
    }

    pub fn of_space(s: &FinTopSpace, bound: usize) -> Self {
        let s = s.clone();
        let n = s.n;
        Self::from_rule(n, bound, Arc::new(move |x: &Net, p: usize| converges_unchecked(&s, x, p)))
    }

    pub fn converges(&self, x: &Net, p: usize) -> bool {
        (self.rule)(x, p)
    }

    pub fn limits(&self, x: &Net) -> u64 {
        (0..self.carrier).filter(|&p| self.converges(x, p)).fold(0, |m, p| m | 1 << p)
    }

    pub fn rule(&self) -> Rule {
        self.rule.clone()
    }

    /// Every tabulated net with its limit mask.
    pub fn entries(&self) -> impl Iterator<Item = (Net, u64)> + '_ {
        self.index_sets
            .iter()
            .zip(&self.table)
            .flat_map(move |(d, row)| nets_over(d, self.carrier).zip(row.iter().copied()))
    }
}

/// Closed sets are the sets containing the limits of all their tabulated nets.
pub fn topology_from_convergence(o: &ConvergenceOracle) -> Result<FinTopSpace, TopError> {
    if o.carrier > 24 {
        return Err(TopError::TooLarge(o.carrier));
    }
    let pairs: BTreeSet<(u64, u64)> = o.entries().map(|(x, l)| (x.value_mask(), l)).collect();
    let all = full(o.carrier);
    let opens = (0..=all)
        .filter(|&u| {
            let closed = all & !u;
            pairs.iter().all(|&(v, l)| v & !closed != 0 || l & !closed == 0)
        })
        .collect();
    FinTopSpace::new(o.carrier, opens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KelleyBounds {
    pub directed: usize,
    /// Largest index set `P x prod Q_p` tried in the iteration axiom.
    pub iteration_cap: usize,
}

impl KelleyBounds {
    pub fn new(directed: usize) -> Self {
        KelleyBounds { directed, iteration_cap: directed * directed }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum KelleyWitness {
    /// A constant net not converging to its value.
    ConstantNet { index: DirectedSet, point: usize },
    /// `x -> point` but not `x o h -> point`.
    Subnet { net: Net, source: DirectedSet, cofinal: Func, point: usize },
    /// Every cofinal restriction has a subnet converging to `point`, but `net` does not.
    Locality { net: Net, point: usize },
    /// Inner nets `values[p] -> inner_limits[p] -> point`, diagonal net does not converge.
    Iteration {
        outer: DirectedSet,
        inner: Vec<DirectedSet>,
        values: Vec<Vec<usize>>,
        inner_limits: Vec<usize>,
        point: usize,
    },
}

impl KelleyWitness {
    /// Re-evaluates the violation against `o`.
    pub fn replay(&self, o: &ConvergenceOracle, bounds: KelleyBounds) -> bool {
        match self {
            KelleyWitness::ConstantNet { index, point } => !o.converges(&Net::constant(index.clone(), *point), *point),
            KelleyWitness::Subnet { net, source, cofinal, point } => {
                is_cofinal(cofinal, source, &net.index)
                    && o.converges(net, *point)
                    && !o.converges(&net.subnet(source, cofinal), *point)
            }
            KelleyWitness::Locality { net, point } => {
                !o.converges(net, *point) && locally_convergent(o, net, *point, &all_directed_sets(bounds.directed))
            }
            KelleyWitness::Iteration { outer, inner, values, inner_limits, point } => {
                let inner_ok = inner
                    .iter()
                    .zip(values)
                    .zip(inner_limits)
                    .all(|((q, v), &s)| o.converges(&Net::new(q.clone(), v.clone()), s));
                let outer_ok = o.converges(&Net::new(outer.clone(), inner_limits.clone()), *point);
                inner_ok && outer_ok && !o.converges(&diagonal_net(outer, inner, values), *point)
            }
        }
    }
}

/// `(x_{p, f(p)})` over `P x prod Q_p`.
pub fn diagonal_net(outer: &DirectedSet, inner: &[DirectedSet], values: &[Vec<usize>]) -> Net {
    let index = outer.iteration_index(inner).expect("iteration index within 64 points");
    let mut radix = vec![outer.size()];
    radix.extend(inner.iter().map(DirectedSet::size));
    let vals = (0..index.size())
        .map(|k| {
            let d = digits(k, &radix);
            values[d[0]][d[1 + d[0]]]
        })
        .collect();
    Net { index, values: vals }
}

fn locally_convergent(o: &ConvergenceOracle, x: &Net, s: usize, dsets: &[DirectedSet]) -> bool {
    x.index.cofinal_subsets().into_iter().all(|sub| {
        let (q, idx) = x.index.restrict(sub).expect("cofinal subsets are directed");
        let restricted = Net { index: q.clone(), values: idx.iter().map(|&i| x.values[i]).collect() };
        dsets.iter().any(|r| cofinal_maps(r, &q).iter().any(|h| o.converges(&restricted.subnet(r, h), s)))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub passed: bool,
    pub cases: usize,
    pub witness: Option<KelleyWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KelleyReport {
    pub bounds: KelleyBounds,
    pub axioms: Vec<AxiomReport>,
}

impl KelleyReport {
    pub fn all_passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn first_witness(&self) -> Option<&KelleyWitness> {
        self.axioms.iter().find_map(|a| a.witness.as_ref())
    }
}

fn axiom(name: &str, results: Vec<(usize, Option<KelleyWitness>)>) -> AxiomReport {
    let cases = results.iter().map(|r| r.0).sum();
    let witness = results.into_iter().find_map(|r| r.1);
    AxiomReport { axiom: name.into(), passed: witness.is_none(), cases, witness }
}

/// Checks constant nets, subnets, (cofinal-subset) locality and iterations
/// over every directed set within `bounds`.
pub fn check_kelley_axioms(o: &ConvergenceOracle, bounds: KelleyBounds, exec: Exec) -> KelleyReport {
    let dsets = all_directed_sets(bounds.directed);
    let n = o.carrier;

    let constant = exec.map(&dsets, |d| {
        let w = (0..n).find(|&s| !o.converges(&Net::constant(d.clone(), s), s));
        (n, w.map(|point| KelleyWitness::ConstantNet { index: d.clone(), point }))
    });

    let subnets = exec.map(&dsets, |p| {
        let mut cases = 0;
        for x in nets_over(p, n) {
            let lim = o.limits(&x);
            for q in &dsets {
                for h in cofinal_maps(q, p) {
                    let y = x.subnet(q, &h);
                    for s in bits(lim) {
                        cases += 1;
                        if !o.converges(&y, s) {
                            return (
                                cases,
                                Some(KelleyWitness::Subnet { net: x, source: q.clone(), cofinal: h, point: s }),
                            );
                        }
                    }
                }
            }
        }
        (cases, None)
    });

    let locality = exec.map(&dsets, |p| {
        let mut cases = 0;
        for x in nets_over(p, n) {
            let lim = o.limits(&x);
            for s in (0..n).filter(|&s| lim >> s & 1 == 0) {
                cases += 1;
                if locally_convergent(o, &x, s, &dsets) {
                    return (cases, Some(KelleyWitness::Locality { net: x, point: s }));
                }
            }
        }
        (cases, None)
    });

    let families = iteration_families(&dsets, bounds.iteration_cap);
    let iterations = exec.map(&families, |(outer, inner)| check_iteration(o, outer, inner));

    KelleyReport {
        bounds,
        axioms: vec![
            axiom("constant nets", constant),
            axiom("subnets", subnets),
            axiom("locality", locality),
            axiom("iterations", iterations),
        ],
    }
}

/// `(P, (Q_p))` with `|P| * prod |Q_p| <= cap`.
pub fn iteration_families(dsets: &[DirectedSet], cap: usize) -> Vec<(DirectedSet, Vec<DirectedSet>)> {
    let mut out = Vec::new();
    for outer in dsets {
        let k = outer.size();
        let mut choice = vec![0usize; k];
        loop {
            let inner: Vec<DirectedSet> = choice.iter().map(|&i| dsets[i].clone()).collect();
            if k * inner.iter().map(DirectedSet::size).product::<usize>() <= cap {
                out.push((outer.clone(), inner));
            }
            let mut i = 0;
            while i < k && choice[i] + 1 == dsets.len() {
                choice[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
            choice[i] += 1;
        }
    }
    out
}

fn check_iteration(
    o: &ConvergenceOracle,
    outer: &DirectedSet,
    inner: &[DirectedSet],
) -> (usize, Option<KelleyWitness>) {
    let n = o.carrier;
    let sizes: Vec<usize> = inner.iter().map(DirectedSet::size).collect();
    let total: usize = sizes.iter().sum();
    let mut cases = 0;
    for flat in all_functions(total, n) {
        let mut values = Vec::with_capacity(inner.len());
        let mut at = 0;
        for &k in &sizes {
            values.push(flat[at..at + k].to_vec());
            at += k;
        }
        let inner_lims: Vec<Vec<usize>> =
            inner.iter().zip(&values).map(|(q, v)| bits(o.limits(&Net::new(q.clone(), v.clone()))).collect()).collect();
        if inner_lims.iter().any(Vec::is_empty) {
            continue;
        }
        let diagonal = diagonal_net(outer, inner, &values);
        let diag_lim = o.limits(&diagonal);
        let radix: Vec<usize> = inner_lims.iter().map(Vec::len).collect();
        for c in 0..radix.iter().product() {
            let choice: Vec<usize> = digits(c, &radix).iter().enumerate().map(|(p, &i)| inner_lims[p][i]).collect();
            let lim = o.limits(&Net::new(outer.clone(), choice.clone()));
            cases += 1;
            if let Some(s) = bits(lim & !diag_lim).next() {
                let w = KelleyWitness::Iteration {
                    outer: outer.clone(),
                    inner: inner.to_vec(),
                    values,
                    inner_limits: choice,
                    point: s,
                };
                return (cases, Some(w));
            }
        }
    }
    (cases, None)
}

/// `P` plus a point at infinity: subsets of `P` are open, and the tails
/// `P_{>= p}` with `inf` added form a local base at `inf = |P|`.
pub fn p_infinity(p: &DirectedSet) -> FinTopSpace {
    let k = p.size();
    let inf = 1u64 << k;
    let opens = (0..=full(k + 1)).filter(|&u| u & inf == 0 || (0..k).any(|q| p.tail(q) & !u == 0)).collect();
    FinTopSpace { n: k + 1, opens }
}

/// Whether `f` sends convergent nets to convergent nets, over directed sets of size `<= bound`.
pub fn continuity_via_nets(x: &FinTopSpace, y: &FinTopSpace, f: &[usize], bound: usize) -> Result<bool, TopError> {
    if f.len() != x.n || f.iter().any(|&v| v >= y.n) {
        return Err(TopError::BadMap);
    }
    Ok(all_directed_sets(bound).iter().all(|d| {
        nets_over(d, x.n).all(|net| {
            let image = net.map(f);
            (0..x.n).all(|s| !converges_unchecked(x, &net, s) || converges_unchecked(y, &image, f[s]))
        })
    }))
}

/// Convergence pulled back along every map of the sink, then turned into a topology.
pub fn initial_topology(n: usize, sink: &[(Func, FinTopSpace)], bound: usize) -> Result<FinTopSpace, TopError> {
    for (f, s) in sink {
        if f.len() != n || f.iter().any(|&v| v >= s.n) {
            return Err(TopError::BadMap);
        }
    }
    let sink = sink.to_vec();
    let rule: Rule =
        Arc::new(move |x: &Net, p: usize| sink.iter().all(|(f, s)| converges_unchecked(s, &x.map(f), f[p])));
    topology_from_convergence(&ConvergenceOracle::from_rule(n, bound, rule))
}

/// The topology generated by preimages of opens.
pub fn initial_topology_subbase(n: usize, sink: &[(Func, FinTopSpace)]) -> Result<FinTopSpace, TopError> {
    let sets: Vec<u64> =
        sink.iter().flat_map(|(f, s)| s.opens.iter().map(move |&v| FinTopSpace::preimage(f, v))).collect();
    FinTopSpace::from_subbase(n, &sets)
}

/// Eventually constant nets converge to their eventual value.
pub fn discrete_via_nets(n: usize, bound: usize) -> ConvergenceOracle {
    let rule: Rule =
        Arc::new(|x: &Net, p: usize| (0..x.index.size()).any(|q| bits(x.index.tail(q)).all(|r| x.values[r] == p)));
    ConvergenceOracle::from_rule(n, bound, rule)
}

/// A net converges when a tail lies in one summand and converges there.
pub fn coproduct_convergence(spaces: &[FinTopSpace], bound: usize) -> ConvergenceOracle {
    let mut offsets = vec![0];
    for s in spaces {
        offsets.push(offsets.last().unwrap() + s.n);
    }
    let n = *offsets.last().unwrap();
    let spaces = spaces.to_vec();
    let rule: Rule = Arc::new(move |x: &Net, p: usize| {
        let i = offsets.iter().rposition(|&o| o <= p).unwrap().min(spaces.len() - 1);
        let (lo, hi) = (offsets[i], offsets[i + 1]);
        (0..x.index.size()).any(|q| {
            let tail = x.index.tail(q);
            if !bits(tail).all(|r| (lo..hi).contains(&x.values[r])) {
                return false;
            }
            let (t, idx) = x.index.restrict(tail).expect("tails are directed");
            let local = Net { index: t, values: idx.iter().map(|&r| x.values[r] - lo).collect() };
            converges_unchecked(&spaces[i], &local, p - lo)
        })
    });
    ConvergenceOracle::from_rule(n, bound, rule)
}

/// Componentwise convergence; points are mixed-radix codes as in [`FinTopSpace::product`].
pub fn product_convergence(spaces: &[FinTopSpace], bound: usize) -> ConvergenceOracle {
    let radix: Vec<usize> = spaces.iter().map(|s| s.n).collect();
    let n = radix.iter().product();
    let spaces = spaces.to_vec();
    let rule: Rule = Arc::new(move |x: &Net, p: usize| {
        let target = digits(p, &radix);
        spaces.iter().enumerate().all(|(i, s)| {
            let coord: Func = x.values.iter().map(|&v| digits(v, &radix)[i]).collect();
            converges_unchecked(s, &Net { index: x.index.clone(), values: coord }, target[i])
        })
    });
    ConvergenceOracle::from_rule(n, bound, rule)
}

/// No tabulated net has two limits.
pub fn is_hausdorff(s: &FinTopSpace, bound: usize) -> bool {
    ConvergenceOracle::of_space(s, bound).entries().all(|(_, l)| l.count_ones() <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski_constant_one() -> Net {
        Net::constant(DirectedSet::singleton(), 1)
    }

    #[test]
    fn convergence_examples() {
        let s = FinTopSpace::sierpinski();
        assert_eq!(converges(&s, &sierpinski_constant_one(), 0), Ok(true));
        assert_eq!(converges(&s, &Net::constant(DirectedSet::singleton(), 0), 1), Ok(false));
        assert_eq!(converges(&s, &sierpinski_constant_one(), 2), Err(TopError::PointOutside(2)));
        let d = FinTopSpace::discrete(2);
        let x = Net::new(DirectedSet::chain(2), vec![0, 1]);
        assert_eq!(converges(&d, &x, 1), Ok(true));
        assert_eq!(converges(&d, &x, 0), Ok(false));
        for t in all_topologies(3) {
            for p in 0..3 {
                assert!(converges(&t, &Net::constant(DirectedSet::chain(3), p), p).unwrap());
            }
        }
    }

    #[test]
    fn topology_counts_agree() {
        for n in 0..=4 {
            let brute = all_topologies_brute(n);
            assert_eq!(brute, all_topologies(n));
            assert_eq!(brute.len(), [1, 1, 4, 29, 355][n]);
        }
    }

    #[test]
    fn directed_set_basics() {
        let d = all_directed_sets(3);
        assert_eq!(d.iter().filter(|x| x.size() == 1).count(), 1);
        assert_eq!(d.iter().filter(|x| x.size() == 2).count(), 2);
        assert!(DirectedSet::new(Preorder::discrete(2)).is_err());
        let c = DirectedSet::chain(2);
        assert!(is_cofinal(&[0, 1], &c, &c));
        assert!(is_cofinal(&[1], &DirectedSet::singleton(), &c));
        assert!(!is_cofinal(&[0], &DirectedSet::singleton(), &c));
        assert!(!is_cofinal(&[0, 0], &c, &c));
        assert_eq!(c.cofinal_subsets(), vec![0b10, 0b11]);
        let it = c.iteration_index(&[c.clone(), DirectedSet::singleton()]).unwrap();
        assert_eq!(it.size(), 4);
    }

    #[test]
    fn oracle_relabeling_invariance() {
        let s = FinTopSpace::sierpinski();
        let o = ConvergenceOracle::of_space(&s, 3);
        for d in &o.index_sets {
            for perm in crate::order::permutations(d.size()) {
                let relabeled = DirectedSet { order: d.order.relabel(&perm) };
                for x in nets_over(d, 2) {
                    let mut values = vec![0; x.values.len()];
                    for (i, &v) in x.values.iter().enumerate() {
                        values[perm[i]] = v;
                    }
                    assert_eq!(o.limits(&x), o.limits(&Net::new(relabeled.clone(), values)));
                }
            }
        }
    }

    #[test]
    fn reconstruction_small() {
        for n in 0..=3 {
            for t in all_topologies_brute(n) {
                assert_eq!(topology_from_convergence(&ConvergenceOracle::of_space(&t, 2)).unwrap(), t);
            }
        }
        let trivial = ConvergenceOracle::from_rule(3, 2, Arc::new(|_: &Net, _| true));
        assert_eq!(topology_from_convergence(&trivial).unwrap(), FinTopSpace::trivial(3));
        assert_eq!(topology_from_convergence(&discrete_via_nets(3, 2)).unwrap(), FinTopSpace::discrete(3));
    }

    #[test]
    fn kelley_axioms_and_mutants() {
        let b = KelleyBounds::new(2);
        for t in all_topologies(2) {
            assert!(check_kelley_axioms(&ConvergenceOracle::of_space(&t, 2), b, Exec::default()).all_passed());
        }
        // (a, b) over the 2-chain also converges to a in the discrete space
        let d = FinTopSpace::discrete(2);
        let odd = Net::new(DirectedSet::chain(2), vec![0, 1]).canonical();
        let rule: Rule =
            Arc::new(move |x: &Net, p: usize| converges_unchecked(&d, x, p) || (p == 0 && x.canonical() == odd));
        let o = ConvergenceOracle::from_rule(2, 2, rule);
        let r = check_kelley_axioms(&o, b, Exec::default());
        let subnet = &r.axioms[1];
        assert!(!subnet.passed);
        assert!(subnet.witness.as_ref().unwrap().replay(&o, b));
    }

    #[test]
    fn p_infinity_examples() {
        assert_eq!(p_infinity(&DirectedSet::singleton()).opens, vec![0, 0b01, 0b11]);
        assert_eq!(p_infinity(&DirectedSet::chain(2)).opens.len(), 6);
        let t = FinTopSpace::sierpinski();
        for p in all_directed_sets(2) {
            let pairs: usize =
                nets_over(&p, 2).map(|x| (0..2).filter(|&s| converges_unchecked(&t, &x, s)).count()).sum();
            assert_eq!(p_infinity(&p).continuous_maps(&t).len(), pairs);
        }
    }

    #[test]
    fn continuity_examples() {
        let s = FinTopSpace::sierpinski();
        let d = FinTopSpace::discrete(2);
        assert!(continuity_via_nets(&s, &s, &[0, 1], 2).unwrap());
        assert!(continuity_via_nets(&s, &d, &[1, 1], 2).unwrap());
        // swapping the points of the Sierpinski space reverses specialization
        assert!(!continuity_via_nets(&s, &s, &[1, 0], 2).unwrap());
        assert!(!s.is_continuous(&[1, 0], &s));
        assert_eq!(continuity_via_nets(&s, &s, &[0], 2), Err(TopError::BadMap));
    }

    #[test]
    fn initial_topologies() {
        assert_eq!(initial_topology(3, &[], 2).unwrap(), FinTopSpace::trivial(3));
        let t = all_topologies(3)[7].clone();
        assert_eq!(initial_topology(3, &[(vec![0, 1, 2], t.clone())], 2).unwrap(), t);
        // classify U = {0} and V = {0, 1} in the Sierpinski space
        let s = FinTopSpace::sierpinski();
        let sink = vec![(vec![1, 0, 0], s.clone()), (vec![1, 1, 0], s)];
        let expected = FinTopSpace::from_subbase(3, &[0b001, 0b011]).unwrap();
        assert_eq!(initial_topology(3, &sink, 2).unwrap(), expected);
        assert_eq!(initial_topology_subbase(3, &sink).unwrap(), expected);
    }

    #[test]
    fn coproducts_and_products() {
        let s = FinTopSpace::sierpinski();
        let o = coproduct_convergence(&[s.clone(), s.clone()], 2);
        assert_eq!(topology_from_convergence(&o).unwrap(), FinTopSpace::coproduct(&[s.clone(), s.clone()]).unwrap());
        let x = Net::new(DirectedSet { order: Preorder::indiscrete(2) }, vec![1, 3]);
        assert_eq!(o.limits(&x), 0);
        let p = product_convergence(&[s.clone(), s.clone()], 2);
        assert_eq!(topology_from_convergence(&p).unwrap(), FinTopSpace::product(&[s.clone(), s]).unwrap());
        let t = product_convergence(&[FinTopSpace::trivial(2), FinTopSpace::trivial(2)], 2);
        assert_eq!(topology_from_convergence(&t).unwrap(), FinTopSpace::trivial(4));
        assert!(check_kelley_axioms(&p, KelleyBounds::new(2), Exec::default()).all_passed());
    }

    #[test]
    fn hausdorff_is_discrete() {
        assert!(!is_hausdorff(&FinTopSpace::sierpinski(), 2));
        assert!(!is_hausdorff(&FinTopSpace::trivial(2), 2));
        for n in 0..=3 {
            for t in all_topologies(n) {
                assert_eq!(is_hausdorff(&t, 2), t.is_discrete());
                assert_eq!(t.is_t2(), t.is_discrete());
            }
        }
    }
}
