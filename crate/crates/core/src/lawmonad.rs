//! Truncated Lawvere theories as abstract clones, the monad they induce,
//! Eilenberg-Moore algebras, the comparison with clone models, and the
//! Kleisli round trip.
//!
//! Everything is computed on demand: a theory is a substitution rule on
//! `Op(I)` for `I <= n`, not a stored table, since `Op(J)^I` is far too big to
//! materialise even for small bounds. Any construction that would need an
//! arity beyond `n` is refused with [`LawError::ArityOverflow`].

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::finsetlim::all_functions;
use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum LawError {
    #[error("arity {needed} exceeds the truncation bound {bound} ({context})")]
    ArityOverflow { needed: usize, bound: usize, context: String },
    #[error("operation {op} out of range at arity {arity}")]
    BadOperation { arity: usize, op: usize },
    #[error("substitution table has no entry for {0}")]
    MissingEntry(String),
    #[error("{law} fails: {detail}")]
    LawFailure { law: String, detail: String },
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("invalid monoid table: {0}")]
    BadMonoid(String),
    #[error("no model enumeration available for theory `{0}`")]
    NoModelOracle(String),
}

fn overflow(needed: usize, bound: usize, context: impl Into<String>) -> LawError {
    LawError::ArityOverflow { needed, bound, context: context.into() }
}

/// Explicit substitution table, as produced by the text format.
///
/// Entries that follow from the projection laws may be omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloneTable {
    pub names: Vec<Vec<String>>,
    pub proj: Vec<Vec<usize>>,
    pub subst: HashMap<(usize, usize, usize, Vec<usize>), usize>,
}

#[derive(Clone, Debug)]
enum CloneRepr {
    Trivial,
    Pointed,
    Semilattice,
    MonoidAction { table: Vec<Vec<usize>>, unit: usize },
    Table(Arc<CloneTable>),
    Kleisli(Arc<MonadTrunc>),
}

/// An abstract clone truncated at arity `n`: `Op(I) = Hom(X^I, X)` for `I <= n`.
#[derive(Clone, Debug)]
pub struct TruncClone {
    pub name: String,
    pub n: usize,
    repr: CloneRepr,
}

impl TruncClone {
    /// Only projections: the theory of sets.
    pub fn trivial(n: usize) -> Self {
        TruncClone { name: "trivial".into(), n, repr: CloneRepr::Trivial }
    }

    /// One constant: `Op(I) = I + {bot}`, with `bot` encoded as `I`.
    pub fn pointed(n: usize) -> Self {
        TruncClone { name: "pointed".into(), n, repr: CloneRepr::Pointed }
    }

    /// Join semilattices with bottom: `Op(I)` = subsets of `I` as bitmasks.
    pub fn semilattice(n: usize) -> Self {
        assert!(n < 64, "semilattice arity must fit a bitmask");
        TruncClone { name: "semilattice".into(), n, repr: CloneRepr::Semilattice }
    }

    /// Left actions of a finite monoid given by its multiplication table.
    /// `Op(I) = M x I`, with `(m, i)` encoded as `i * |M| + m`.
    pub fn monoid_action(table: Vec<Vec<usize>>, n: usize) -> Result<Self, LawError> {
        let m = table.len();
        if m == 0 {
            return Err(LawError::BadMonoid("empty monoid".into()));
        }
        if table.iter().any(|r| r.len() != m || r.iter().any(|&x| x >= m)) {
            return Err(LawError::BadMonoid("table is not square over 0..m".into()));
        }
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(LawError::BadMonoid(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let unit = (0..m)
            .find(|&e| (0..m).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| LawError::BadMonoid("no unit".into()))?;
        let rows: Vec<String> =
            table.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
        Ok(TruncClone {
            name: format!("monoid-action:{}", rows.join(";")),
            n,
            repr: CloneRepr::MonoidAction { table, unit },
        })
    }

    /// A theory given by an explicit table. Validity is not checked here; see [`check_clone`].
    pub fn from_table(name: impl Into<String>, table: CloneTable) -> Self {
        let n = table.names.len().saturating_sub(1);
        TruncClone { name: name.into(), n, repr: CloneRepr::Table(Arc::new(table)) }
    }

    /// Built-in theories by name, with the default arity bounds.
    pub fn builtin(name: &str) -> Result<Self, LawError> {
        match name {
            "trivial" => Ok(Self::trivial(4)),
            "pointed" => Ok(Self::pointed(5)),
            "semilattice" => Ok(Self::semilattice(8)),
            _ => {
                let body = name.strip_prefix("monoid-action:").ok_or_else(|| LawError::UnknownTheory(name.into()))?;
                let table = body
                    .split(';')
                    .map(|row| row.split(',').map(|x| x.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| LawError::BadMonoid(e.to_string()))?;
                let m = table.len();
                Self::monoid_action(table, (3 * m).max(4))
            }
        }
    }

    /// The table, for theories given by one.
    pub fn table(&self) -> Option<&CloneTable> {
        match &self.repr {
            CloneRepr::Table(t) => Some(t),
            _ => None,
        }
    }

    /// `|Op(i)|`.
    pub fn size(&self, i: usize) -> usize {
        match &self.repr {
            CloneRepr::Trivial => i,
            CloneRepr::Pointed => i + 1,
            CloneRepr::Semilattice => 1usize << i,
            CloneRepr::MonoidAction { table, .. } => table.len() * i,
            CloneRepr::Table(t) => t.names.get(i).map_or(0, Vec::len),
            CloneRepr::Kleisli(m) => m.size(i),
        }
    }

    /// The projection `pr_k` in `Op(i)`.
    pub fn proj(&self, i: usize, k: usize) -> usize {
        debug_assert!(k < i);
        match &self.repr {
            CloneRepr::Trivial | CloneRepr::Pointed => k,
            CloneRepr::Semilattice => 1 << k,
            CloneRepr::MonoidAction { table, unit } => k * table.len() + unit,
            CloneRepr::Table(t) => t.proj[i][k],
            CloneRepr::Kleisli(m) => m.eta(i, k),
        }
    }

    pub fn projections(&self, i: usize) -> Vec<usize> {
        (0..i).map(|k| self.proj(i, k)).collect()
    }

    fn check_arity(&self, i: usize, context: &str) -> Result<(), LawError> {
        if i > self.n {
            Err(overflow(i, self.n, context))
        } else {
            Ok(())
        }
    }

    /// `subst(f, gs) = f o (g_1, .., g_I)` for `f` in `Op(i)` and `gs` in `Op(j)^i`.
    pub fn subst(&self, i: usize, f: usize, j: usize, gs: &[usize]) -> Result<usize, LawError> {
        self.check_arity(i, "substitution source")?;
        self.check_arity(j, "substitution target")?;
        if f >= self.size(i) {
            return Err(LawError::BadOperation { arity: i, op: f });
        }
        debug_assert_eq!(gs.len(), i);
        match &self.repr {
            CloneRepr::Trivial => Ok(gs[f]),
            CloneRepr::Pointed => Ok(if f == i { j } else { gs[f] }),
            CloneRepr::Semilattice => Ok((0..i).filter(|k| f >> k & 1 == 1).fold(0, |acc, k| acc | gs[k])),
            CloneRepr::MonoidAction { table, .. } => {
                let m = table.len();
                let g = gs[f / m];
                Ok(g / m * m + table[f % m][g % m])
            }
            CloneRepr::Table(t) => {
                if let Some(k) = t.proj[i].iter().position(|&p| p == f) {
                    return Ok(gs[k]);
                }
                if i == j && gs == t.proj[j].as_slice() {
                    return Ok(f);
                }
                t.subst.get(&(i, f, j, gs.to_vec())).copied().ok_or_else(|| {
                    LawError::MissingEntry(format!(
                        "{}({})",
                        t.names[i][f],
                        gs.iter().map(|&g| t.names[j][g].as_str()).collect::<Vec<_>>().join(", ")
                    ))
                })
            }
            CloneRepr::Kleisli(m) => {
                let tj = m.size(j);
                let lifted = m.fmap(i, tj, gs, f)?;
                m.mu(j, lifted)
            }
        }
    }

    /// Human-readable name of an operation.
    pub fn op_name(&self, i: usize, f: usize) -> String {
        match &self.repr {
            CloneRepr::Trivial => format!("x{f}"),
            CloneRepr::Pointed => {
                if f == i {
                    "bot".into()
                } else {
                    format!("x{f}")
                }
            }
            CloneRepr::Semilattice => {
                let vars: Vec<String> = (0..i).filter(|k| f >> k & 1 == 1).map(|k| format!("x{k}")).collect();
                if vars.is_empty() {
                    "bot".into()
                } else {
                    vars.join("+")
                }
            }
            CloneRepr::MonoidAction { table, .. } => format!("{}.x{}", f % table.len(), f / table.len()),
            CloneRepr::Table(t) => t.names[i][f].clone(),
            CloneRepr::Kleisli(_) => format!("t{f}"),
        }
    }
}

/// Failure of a clone law, replayable with [`TruncClone::subst`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CloneWitness {
    pub law: String,
    pub arities: Vec<usize>,
    pub op: usize,
    pub args: Vec<usize>,
    pub outer: Vec<usize>,
}

/// Checks projection laws and associativity of substitution for arities `<= bound`.
pub fn check_clone(t: &TruncClone, bound: usize) -> Result<Option<CloneWitness>, LawError> {
    let b = bound.min(t.n);
    for i in 0..=b {
        for k in 0..i {
            if t.proj(i, k) >= t.size(i) {
                return Err(LawError::BadOperation { arity: i, op: t.proj(i, k) });
            }
        }
    }
    for i in 0..=b {
        for j in 0..=b {
            for gs in all_functions(i, t.size(j)) {
                for k in 0..i {
                    if t.subst(i, t.proj(i, k), j, &gs)? != gs[k] {
                        return Ok(Some(CloneWitness {
                            law: "projection".into(),
                            arities: vec![i, j],
                            op: t.proj(i, k),
                            args: gs,
                            outer: vec![],
                        }));
                    }
                }
            }
        }
        let pr = t.projections(i);
        for f in 0..t.size(i) {
            if t.subst(i, f, i, &pr)? != f {
                return Ok(Some(CloneWitness {
                    law: "identity".into(),
                    arities: vec![i],
                    op: f,
                    args: pr,
                    outer: vec![],
                }));
            }
        }
    }
    for i in 0..=b {
        for j in 0..=b {
            for k in 0..=b {
                let outers: Vec<Vec<usize>> = all_functions(j, t.size(k)).collect();
                for gs in all_functions(i, t.size(j)) {
                    for hs in &outers {
                        let inner: Vec<usize> = gs.iter().map(|&g| t.subst(j, g, k, hs)).collect::<Result<_, _>>()?;
                        for f in 0..t.size(i) {
                            let lhs = t.subst(j, t.subst(i, f, j, &gs)?, k, hs)?;
                            let rhs = t.subst(i, f, k, &inner)?;
                            if lhs != rhs {
                                return Ok(Some(CloneWitness {
                                    law: "associativity".into(),
                                    arities: vec![i, j, k],
                                    op: f,
                                    args: gs,
                                    outer: hs.clone(),
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
enum MonadRepr {
    Theory(Arc<TruncClone>),
    Patched { base: Arc<MonadTrunc>, set: usize, input: usize, output: usize },
}

/// A monad on finite sets `0..k`, `k <= n`.
#[derive(Clone, Debug)]
pub struct MonadTrunc {
    pub name: String,
    pub n: usize,
    repr: MonadRepr,
}

/// `T(I) = Op(I)`, `eta_I(i) = pr_i`, `mu_I(f) = f o u_I` with `pr_g o u_I = g`.
pub fn monad_from_theory(t: &TruncClone) -> MonadTrunc {
    MonadTrunc { name: t.name.clone(), n: t.n, repr: MonadRepr::Theory(Arc::new(t.clone())) }
}

impl MonadTrunc {
    pub fn identity(n: usize) -> Self {
        let mut m = monad_from_theory(&TruncClone::trivial(n));
        m.name = "identity".into();
        m
    }

    fn theory(&self) -> &TruncClone {
        match &self.repr {
            MonadRepr::Theory(t) => t,
            MonadRepr::Patched { base, .. } => base.theory(),
        }
    }

    /// Same monad with a single entry of `mu_set` replaced.
    pub fn with_mu_patch(&self, set: usize, input: usize, output: usize) -> Self {
        MonadTrunc {
            name: format!("{} (mu patched)", self.name),
            n: self.n,
            repr: MonadRepr::Patched { base: Arc::new(self.clone()), set, input, output },
        }
    }

    pub fn size(&self, i: usize) -> usize {
        self.theory().size(i)
    }

    pub fn eta(&self, i: usize, k: usize) -> usize {
        self.theory().proj(i, k)
    }

    /// `T(f)(t) = t o X^f`, i.e. `subst(t, (pr_{f(i)})_i)`.
    pub fn fmap(&self, i: usize, j: usize, f: &[usize], t: usize) -> Result<usize, LawError> {
        let th = self.theory();
        let gs: Vec<usize> = f.iter().map(|&x| th.proj(j, x)).collect();
        th.subst(i, t, j, &gs)
    }

    /// `mu_I : T(T(I)) -> T(I)`; needs `|T(I)| <= n`.
    pub fn mu(&self, i: usize, x: usize) -> Result<usize, LawError> {
        if let MonadRepr::Patched { base, set, input, output } = &self.repr {
            if i == *set && x == *input {
                return Ok(*output);
            }
            return base.mu(i, x);
        }
        let ti = self.size(i);
        if ti > self.n {
            return Err(overflow(ti, self.n, format!("mu at I = {i}")));
        }
        let u: Vec<usize> = (0..ti).collect();
        self.theory().subst(ti, x, i, &u)
    }

    /// Tabulates `mu_I` (only for small `I`).
    pub fn mu_table(&self, i: usize) -> Result<Vec<usize>, LawError> {
        let tti = self.size(self.size(i));
        (0..tti).map(|x| self.mu(i, x)).collect()
    }
}

/// A counterexample to a monad law.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawWitness {
    pub sets: Vec<usize>,
    pub element: usize,
    pub maps: Vec<Vec<usize>>,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawCheck {
    pub law: String,
    pub passed: bool,
    pub cases: usize,
    pub witness: Option<LawWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonadReport {
    pub name: String,
    pub arity_bound: usize,
    pub sets_bound: usize,
    pub laws: Vec<LawCheck>,
    /// Law instances not checked because they need arities beyond the bound.
    pub skipped: Vec<String>,
}

impl MonadReport {
    pub fn all_passed(&self) -> bool {
        self.laws.iter().all(|l| l.passed)
    }

    pub fn law(&self, name: &str) -> Option<&LawCheck> {
        self.laws.iter().find(|l| l.law == name)
    }
}

struct LawAcc {
    law: &'static str,
    cases: usize,
    witness: Option<LawWitness>,
}

impl LawAcc {
    fn new(law: &'static str) -> Self {
        LawAcc { law, cases: 0, witness: None }
    }

    fn record(&mut self, lhs: usize, rhs: usize, sets: &[usize], element: usize, maps: &[&[usize]]) {
        self.cases += 1;
        if lhs != rhs && self.witness.is_none() {
            self.witness = Some(LawWitness {
                sets: sets.to_vec(),
                element,
                maps: maps.iter().map(|m| m.to_vec()).collect(),
                lhs,
                rhs,
            });
        }
    }

    fn done(self) -> LawCheck {
        LawCheck { law: self.law.into(), passed: self.witness.is_none(), cases: self.cases, witness: self.witness }
    }
}

fn compose(f: &[usize], g: &[usize]) -> Vec<usize> {
    f.iter().map(|&x| g[x]).collect()
}

/// Pointwise check of the functor, naturality, unit and associativity laws
/// on all sets of size `<= sets_bound`.
pub fn check_monad_laws(m: &MonadTrunc, sets_bound: usize) -> Result<MonadReport, LawError> {
    let b = sets_bound.min(m.n);
    let mut skipped = Vec::new();
    let mut fid = LawAcc::new("functor identity");
    let mut fcomp = LawAcc::new("functor composition");
    let mut eta_nat = LawAcc::new("unit naturality");
    let mut mu_nat = LawAcc::new("multiplication naturality");
    let mut left = LawAcc::new("left unit");
    let mut right = LawAcc::new("right unit");
    let mut assoc = LawAcc::new("associativity");

    for i in 0..=b {
        let id: Vec<usize> = (0..i).collect();
        for t in 0..m.size(i) {
            fid.record(m.fmap(i, i, &id, t)?, t, &[i], t, &[&id]);
        }
        for j in 0..=b {
            for f in all_functions(i, j) {
                for k in 0..i {
                    eta_nat.record(m.fmap(i, j, &f, m.eta(i, k))?, m.eta(j, f[k]), &[i, j], k, &[&f]);
                }
                for k in 0..=b {
                    for g in all_functions(j, k) {
                        let gf = compose(&f, &g);
                        for t in 0..m.size(i) {
                            let lhs = m.fmap(i, k, &gf, t)?;
                            let rhs = m.fmap(j, k, &g, m.fmap(i, j, &f, t)?)?;
                            fcomp.record(lhs, rhs, &[i, j, k], t, &[&f, &g]);
                        }
                    }
                }
                let (ti, tj) = (m.size(i), m.size(j));
                if ti > m.n || tj > m.n {
                    skipped.push(format!("multiplication naturality at ({i},{j}): |T| = ({ti},{tj}) > {}", m.n));
                    continue;
                }
                let tf: Vec<usize> = (0..ti).map(|t| m.fmap(i, j, &f, t)).collect::<Result<_, _>>()?;
                for x in 0..m.size(ti) {
                    let lhs = m.fmap(i, j, &f, m.mu(i, x)?)?;
                    let rhs = m.mu(j, m.fmap(ti, tj, &tf, x)?)?;
                    mu_nat.record(lhs, rhs, &[i, j], x, &[&f]);
                }
            }
        }
        let ti = m.size(i);
        if ti > m.n {
            skipped.push(format!("unit laws at I = {i}: |T(I)| = {ti} > {}", m.n));
            continue;
        }
        let eta_i: Vec<usize> = (0..i).map(|k| m.eta(i, k)).collect();
        for t in 0..ti {
            left.record(m.mu(i, m.eta(ti, t))?, t, &[i], t, &[]);
            right.record(m.mu(i, m.fmap(i, ti, &eta_i, t)?)?, t, &[i], t, &[&eta_i]);
        }
        let tti = m.size(ti);
        if tti > m.n {
            skipped.push(format!("associativity at I = {i}: |T(T(I))| = {tti} > {}", m.n));
            continue;
        }
        let mu_i = m.mu_table(i)?;
        for x in 0..m.size(tti) {
            let lhs = m.mu(i, m.mu(ti, x)?)?;
            let rhs = m.mu(i, m.fmap(tti, ti, &mu_i, x)?)?;
            assoc.record(lhs, rhs, &[i], x, &[]);
        }
    }
    Ok(MonadReport {
        name: m.name.clone(),
        arity_bound: m.n,
        sets_bound: b,
        laws: vec![fid.done(), fcomp.done(), eta_nat.done(), mu_nat.done(), left.done(), right.done(), assoc.done()],
        skipped,
    })
}

/// An Eilenberg-Moore algebra `h : T(A) -> A` on `A = 0..carrier`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AlgebraRep {
    pub carrier: usize,
    pub h: Vec<usize>,
}

/// `h(pr_a) = a` and `h(f o X^h) = h(f o u_A)` for all `f` in `T(T(A))`.
pub fn check_algebra(m: &MonadTrunc, a: &AlgebraRep) -> Result<(), LawError> {
    let ta = m.size(a.carrier);
    if a.h.len() != ta || a.h.iter().any(|&x| x >= a.carrier) {
        return Err(LawError::LawFailure { law: "shape".into(), detail: "h is not a map T(A) -> A".into() });
    }
    for x in 0..a.carrier {
        if a.h[m.eta(a.carrier, x)] != x {
            return Err(LawError::LawFailure { law: "unit".into(), detail: format!("h(pr_{x}) != {x}") });
        }
    }
    if ta > m.n {
        return Err(overflow(ta, m.n, format!("algebra law on carrier {}", a.carrier)));
    }
    for f in 0..m.size(ta) {
        let lhs = a.h[m.fmap(ta, a.carrier, &a.h, f)?];
        let rhs = a.h[m.mu(a.carrier, f)?];
        if lhs != rhs {
            return Err(LawError::LawFailure {
                law: "multiplication".into(),
                detail: format!("h(f o X^h) = {lhs} but h(f o u_A) = {rhs} at f = {f}"),
            });
        }
    }
    Ok(())
}

pub fn algebra_morphism(m: &MonadTrunc, a: &AlgebraRep, b: &AlgebraRep, beta: &[usize]) -> Result<bool, LawError> {
    for t in 0..m.size(a.carrier) {
        if b.h[m.fmap(a.carrier, b.carrier, beta, t)?] != beta[a.h[t]] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All algebras on `0..carrier`, by brute force over `h`.
pub fn enumerate_algebras(m: &MonadTrunc, carrier: usize) -> Result<Vec<AlgebraRep>, LawError> {
    let ta = m.size(carrier);
    if ta > m.n {
        return Err(overflow(ta, m.n, format!("algebras on carrier {carrier}")));
    }
    let mut out = Vec::new();
    for h in all_functions(ta, carrier) {
        let a = AlgebraRep { carrier, h };
        match check_algebra(m, &a) {
            Ok(()) => out.push(a),
            Err(LawError::LawFailure { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Interpretations `M(f) : A^I -> A` for `f` in `Op(I)`, `I <= arity`.
/// Tuples are coded little-endian in base `|A|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelRep {
    pub carrier: usize,
    pub arity: usize,
    pub ops: Vec<Vec<Vec<usize>>>,
}

fn encode(a: &[usize], base: usize) -> usize {
    a.iter().rev().fold(0, |acc, &x| acc * base + x)
}

fn decode(mut code: usize, len: usize, base: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = code % base;
            code /= base;
            d
        })
        .collect()
}

fn tuples(carrier: usize, i: usize) -> usize {
    carrier.pow(i as u32)
}

impl ModelRep {
    /// Builds the tables from an evaluation rule.
    pub fn from_fn<F>(t: &TruncClone, carrier: usize, arity: usize, mut eval: F) -> Result<Self, LawError>
    where
        F: FnMut(usize, usize, &[usize]) -> Result<usize, LawError>,
    {
        let mut ops = Vec::with_capacity(arity + 1);
        for i in 0..=arity {
            let mut per_op = Vec::with_capacity(t.size(i));
            for f in 0..t.size(i) {
                let row = (0..tuples(carrier, i))
                    .map(|c| eval(i, f, &decode(c, i, carrier)))
                    .collect::<Result<Vec<_>, _>>()?;
                per_op.push(row);
            }
            ops.push(per_op);
        }
        Ok(ModelRep { carrier, arity, ops })
    }

    pub fn apply(&self, i: usize, f: usize, a: &[usize]) -> usize {
        self.ops[i][f][encode(a, self.carrier)]
    }
}

/// Projection and substitution laws for all arities in the model.
pub fn check_model(t: &TruncClone, m: &ModelRep) -> Result<(), LawError> {
    let fail = |law: &str, detail: String| Err(LawError::LawFailure { law: law.into(), detail });
    if m.arity > t.n {
        return Err(overflow(m.arity, t.n, "model arity"));
    }
    for i in 0..=m.arity {
        if m.ops[i].len() != t.size(i) {
            return fail("shape", format!("wrong number of operations at arity {i}"));
        }
        for c in 0..tuples(m.carrier, i) {
            let a = decode(c, i, m.carrier);
            for k in 0..i {
                if m.ops[i][t.proj(i, k)][c] != a[k] {
                    return fail("projection", format!("M(pr_{k}) at {a:?}"));
                }
            }
        }
    }
    for i in 0..=m.arity {
        for j in 0..=m.arity {
            for gs in all_functions(i, t.size(j)) {
                for f in 0..t.size(i) {
                    let s = t.subst(i, f, j, &gs)?;
                    for c in 0..tuples(m.carrier, j) {
                        let inner: Vec<usize> = gs.iter().map(|&g| m.ops[j][g][c]).collect();
                        if m.apply(i, f, &inner) != m.ops[j][s][c] {
                            return fail(
                                "substitution",
                                format!("{} o {gs:?} at {:?}", t.op_name(i, f), decode(c, j, m.carrier)),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn model_morphism(t: &TruncClone, a: &ModelRep, b: &ModelRep, beta: &[usize]) -> bool {
    let arity = a.arity.min(b.arity);
    (0..=arity).all(|i| {
        (0..t.size(i)).all(|f| {
            (0..tuples(a.carrier, i)).all(|c| {
                let x = decode(c, i, a.carrier);
                let y: Vec<usize> = x.iter().map(|&v| beta[v]).collect();
                beta[a.ops[i][f][c]] == b.apply(i, f, &y)
            })
        })
    })
}

/// `h_M(f) = M(f)(u_M)`: evaluate at the identity tuple of the carrier.
pub fn algebra_from_model(t: &TruncClone, m: &ModelRep) -> Result<AlgebraRep, LawError> {
    let a = m.carrier;
    if a > m.arity {
        return Err(overflow(a, m.arity, "algebra_from_model needs Op(|A|)"));
    }
    let u: Vec<usize> = (0..a).collect();
    let code = encode(&u, a);
    Ok(AlgebraRep { carrier: a, h: (0..t.size(a)).map(|f| m.ops[a][f][code]).collect() })
}

/// `M(s)(a) = h(T(a)(s)) = h(s o X^a)`.
pub fn model_from_algebra(alg: &AlgebraRep, t: &TruncClone, arity: usize) -> Result<ModelRep, LawError> {
    let m = monad_from_theory(t);
    ModelRep::from_fn(t, alg.carrier, arity, |i, s, a| Ok(alg.h[m.fmap(i, alg.carrier, a, s)?]))
}

/// Models on `0..carrier` from an independent, theory-specific presentation:
/// basepoints, semilattice tables, monoid actions.
pub fn enumerate_models(t: &TruncClone, carrier: usize, arity: usize) -> Result<Vec<ModelRep>, LawError> {
    let a = carrier;
    match &t.repr {
        CloneRepr::Trivial => Ok(vec![ModelRep::from_fn(t, a, arity, |_, f, x| Ok(x[f]))?]),
        CloneRepr::Pointed => {
            (0..a).map(|p| ModelRep::from_fn(t, a, arity, |i, f, x| Ok(if f == i { p } else { x[f] }))).collect()
        }
        CloneRepr::Semilattice => {
            let mut out = Vec::new();
            for join in all_functions(a * a, a) {
                let j = |x: usize, y: usize| join[x * a + y];
                let ok = (0..a).all(|x| j(x, x) == x)
                    && (0..a).all(|x| (0..a).all(|y| j(x, y) == j(y, x)))
                    && (0..a).all(|x| (0..a).all(|y| (0..a).all(|z| j(j(x, y), z) == j(x, j(y, z)))));
                if !ok {
                    continue;
                }
                let Some(bot) = (0..a).find(|&e| (0..a).all(|x| j(e, x) == x)) else { continue };
                out.push(ModelRep::from_fn(t, a, arity, |i, f, x| {
                    Ok((0..i).filter(|k| f >> k & 1 == 1).fold(bot, |acc, k| j(acc, x[k])))
                })?);
            }
            Ok(out)
        }
        CloneRepr::MonoidAction { table, unit } => {
            let ms = table.len();
            let mut out = Vec::new();
            for act in all_functions(ms * a, a) {
                let act_at = |m: usize, x: usize| act[m * a + x];
                let ok = (0..a).all(|x| act_at(*unit, x) == x)
                    && (0..ms)
                        .all(|m| (0..ms).all(|n| (0..a).all(|x| act_at(table[m][n], x) == act_at(m, act_at(n, x)))));
                if ok {
                    out.push(ModelRep::from_fn(t, a, arity, |_, f, x| Ok(act_at(f % ms, x[f / ms])))?);
                }
            }
            Ok(out)
        }
        CloneRepr::Table(_) | CloneRepr::Kleisli(_) => Err(LawError::NoModelOracle(t.name.clone())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CarrierComparison {
    pub carrier: usize,
    pub models: usize,
    pub algebras: usize,
    pub objects_bijective: bool,
    pub round_trip: bool,
    pub model_morphisms: usize,
    pub algebra_morphisms: usize,
    pub morphisms_agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonReport {
    pub theory: String,
    pub arity_bound: usize,
    pub carrier_bound: usize,
    pub carriers: Vec<CarrierComparison>,
    /// Morphisms between models on carriers `a`, `b`, keyed `"a->b"`.
    pub morphism_counts: BTreeMap<String, (usize, usize)>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.carriers.iter().all(|c| c.objects_bijective && c.round_trip && c.morphisms_agree)
            && self.morphism_counts.values().all(|(x, y)| x == y)
    }
}

/// Enumerates models and algebras on carriers `<= bound` and checks that the
/// comparison functor is bijective on objects and on morphisms.
pub fn comparison_check(t: &TruncClone, bound: usize, exec: Exec) -> Result<ComparisonReport, LawError> {
    let m = monad_from_theory(t);
    let arity = bound;
    let per_carrier: Vec<Result<(Vec<ModelRep>, Vec<AlgebraRep>, Vec<AlgebraRep>, bool), LawError>> =
        exec.map_range(bound + 1, |a| {
            let models = enumerate_models(t, a, arity)?;
            for md in &models {
                check_model(t, md)?;
            }
            let algebras = enumerate_algebras(&m, a)?;
            let images: Vec<AlgebraRep> =
                models.iter().map(|md| algebra_from_model(t, md)).collect::<Result<_, _>>()?;
            let mut round_trip = true;
            for (md, img) in models.iter().zip(&images) {
                check_algebra(&m, img)?;
                round_trip &= model_from_algebra(img, t, arity)? == *md;
            }
            for alg in &algebras {
                let md = model_from_algebra(alg, t, arity)?;
                check_model(t, &md)?;
                round_trip &= algebra_from_model(t, &md)? == *alg;
            }
            Ok((models, images, algebras, round_trip))
        });
    let per_carrier: Vec<_> = per_carrier.into_iter().collect::<Result<_, _>>()?;

    let mut carriers = Vec::new();
    let mut morphism_counts = BTreeMap::new();
    for (a, (models, images, algebras, round_trip)) in per_carrier.iter().enumerate() {
        let mut sorted_images = images.clone();
        sorted_images.sort();
        let distinct = {
            let mut d = sorted_images.clone();
            d.dedup();
            d.len() == sorted_images.len()
        };
        let mut sorted_algebras = algebras.clone();
        sorted_algebras.sort();
        carriers.push(CarrierComparison {
            carrier: a,
            models: models.len(),
            algebras: algebras.len(),
            objects_bijective: distinct && sorted_images == sorted_algebras,
            round_trip: *round_trip,
            model_morphisms: 0,
            algebra_morphisms: 0,
            morphisms_agree: true,
        });
    }
    for a in 0..=bound {
        for b in 0..=bound {
            let (ma, ia, _, _) = &per_carrier[a];
            let (mb, ib, _, _) = &per_carrier[b];
            let (mut nm, mut na, mut agree) = (0, 0, true);
            for beta in all_functions(a, b) {
                for (x, hx) in ma.iter().zip(ia) {
                    for (y, hy) in mb.iter().zip(ib) {
                        let is_model = model_morphism(t, x, y, &beta);
                        let is_alg = algebra_morphism(&m, hx, hy, &beta)?;
                        nm += is_model as usize;
                        na += is_alg as usize;
                        agree &= is_model == is_alg;
                    }
                }
            }
            carriers[a].model_morphisms += nm;
            carriers[a].algebra_morphisms += na;
            carriers[a].morphisms_agree &= agree;
            morphism_counts.insert(format!("{a}->{b}"), (nm, na));
        }
    }
    Ok(ComparisonReport { theory: t.name.clone(), arity_bound: t.n, carrier_bound: bound, carriers, morphism_counts })
}

/// `Op(I) := T(I)` with substitution given by Kleisli composition.
pub fn kleisli_theory(m: &MonadTrunc) -> TruncClone {
    TruncClone { name: format!("kleisli({})", m.name), n: m.n, repr: CloneRepr::Kleisli(Arc::new(m.clone())) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTripReport {
    pub theory: String,
    pub arity_bound: usize,
    pub sets_bound: usize,
    /// `H(f) = (f(pr_i))_i` respects projections and substitution.
    pub h_iso: bool,
    /// `alpha_I` is a bijection for each checked `I`.
    pub alpha_bijective: Vec<(usize, bool)>,
    /// `alpha_I o eta_I = eta_I` pointwise.
    pub alpha_unit: bool,
    pub alpha_mu_square: bool,
    pub skipped: Vec<String>,
}

impl RoundTripReport {
    pub fn passed(&self) -> bool {
        self.h_iso && self.alpha_unit && self.alpha_mu_square && self.alpha_bijective.iter().all(|&(_, b)| b)
    }
}

/// `alpha_I(f) = (f o eta_1)(*)`, where `f : T(1) -> T(I)` is the algebra map
/// underlying the Kleisli arrow `1 -> T(I)` named by `x`.
fn alpha(m: &MonadTrunc, i: usize, x: usize) -> Result<usize, LawError> {
    let ti = m.size(i);
    let f = |s: usize| -> Result<usize, LawError> { m.mu(i, m.fmap(1, ti, &[x], s)?) };
    f(m.eta(1, 0))
}

/// theory -> monad -> Kleisli theory, and monad -> theory -> monad, checked pointwise.
pub fn theory_monad_roundtrip(t: &TruncClone, sets_bound: usize) -> Result<RoundTripReport, LawError> {
    let m = monad_from_theory(t);
    let k = kleisli_theory(&m);
    let s = monad_from_theory(&k);
    let b = sets_bound.min(t.n);
    let mut skipped = Vec::new();

    let mut h_iso = true;
    for i in 0..=b {
        h_iso &= k.size(i) == t.size(i);
        h_iso &= (0..i).all(|p| k.proj(i, p) == t.proj(i, p));
        for j in 0..=b {
            if m.size(j) > t.n {
                skipped.push(format!("H on substitution into arity {j}: |T({j})| > {}", t.n));
                continue;
            }
            for gs in all_functions(i, t.size(j)) {
                for f in 0..t.size(i) {
                    h_iso &= k.subst(i, f, j, &gs)? == t.subst(i, f, j, &gs)?;
                }
            }
        }
    }

    let mut alpha_bijective = Vec::new();
    let mut alpha_unit = true;
    let mut alpha_mu_square = true;
    for i in 0..=b {
        let ti = m.size(i);
        if ti > m.n {
            skipped.push(format!("alpha at I = {i}: |T(I)| = {ti} > {}", m.n));
            continue;
        }
        let a: Vec<usize> = (0..s.size(i)).map(|x| alpha(&m, i, x)).collect::<Result<_, _>>()?;
        let mut seen = a.clone();
        seen.sort_unstable();
        seen.dedup();
        alpha_bijective.push((i, seen.len() == ti && s.size(i) == ti && a.iter().all(|&y| y < ti)));
        alpha_unit &= (0..i).all(|p| a[s.eta(i, p)] == m.eta(i, p));
        let tti = m.size(ti);
        if tti > m.n {
            skipped.push(format!("mu-square at I = {i}: |T(T(I))| = {tti} > {}", m.n));
            continue;
        }
        let a_t: Vec<usize> = (0..s.size(ti)).map(|x| alpha(&m, ti, x)).collect::<Result<_, _>>()?;
        for f in 0..s.size(s.size(i)) {
            let lhs = a[s.mu(i, f)?];
            let rhs = m.mu(i, m.fmap(ti, ti, &a, a_t[f])?)?;
            alpha_mu_square &= lhs == rhs;
        }
    }
    Ok(RoundTripReport {
        theory: t.name.clone(),
        arity_bound: t.n,
        sets_bound: b,
        h_iso,
        alpha_bijective,
        alpha_unit,
        alpha_mu_square,
        skipped,
    })
}

/// `F(I) = Hom(X^I, -)`: carrier `Op(I)`, acting by substitution.
pub fn free_model(t: &TruncClone, i: usize, arity: usize) -> Result<ModelRep, LawError> {
    if i > t.n {
        return Err(overflow(i, t.n, "free model"));
    }
    let c = t.size(i);
    ModelRep::from_fn(t, c, arity, |j, f, gs| t.subst(j, f, i, gs))
}

/// `(model morphisms F(I) -> M, functions I -> M(X))`, counted independently.
pub fn free_adjunction_counts(t: &TruncClone, i: usize, m: &ModelRep) -> Result<(usize, usize), LawError> {
    let free = free_model(t, i, m.arity)?;
    let morphisms = all_functions(free.carrier, m.carrier).filter(|b| model_morphism(t, &free, m, b)).count();
    Ok((morphisms, tuples(m.carrier, i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_clones_satisfy_laws() {
        for t in [
            TruncClone::trivial(4),
            TruncClone::pointed(5),
            TruncClone::semilattice(8),
            TruncClone::builtin("monoid-action:0,1;1,0").unwrap(),
        ] {
            assert_eq!(check_clone(&t, 2).unwrap(), None, "{}", t.name);
        }
    }

    #[test]
    fn bad_monoid_tables_rejected() {
        assert!(TruncClone::builtin("monoid-action:0,1;1,1;").is_err());
        assert!(TruncClone::builtin("monoid-action:1,1;1,1").is_err());
        assert!(matches!(TruncClone::builtin("groups"), Err(LawError::UnknownTheory(_))));
    }

    #[test]
    fn pointed_mu_collapses_bottoms() {
        let m = monad_from_theory(&TruncClone::pointed(5));
        // T(T(2)) = {x0, x1, bot_2} + {bot}: indices 0, 1, 2 name elements of T(2).
        assert_eq!(m.mu_table(2).unwrap(), vec![0, 1, 2, 2]);
        assert_eq!((0..2).map(|k| m.eta(2, k)).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn semilattice_mu_is_union() {
        let m = monad_from_theory(&TruncClone::semilattice(8));
        let i = 2;
        for x in 0..m.size(m.size(i)) {
            let union = (0..4).filter(|s| x >> s & 1 == 1).fold(0, |acc, s| acc | s);
            assert_eq!(m.mu(i, x).unwrap(), union);
        }
    }

    #[test]
    fn monad_laws_hold_for_builtins() {
        for t in [TruncClone::trivial(4), TruncClone::pointed(5), TruncClone::semilattice(8)] {
            let r = check_monad_laws(&monad_from_theory(&t), 3).unwrap();
            assert!(r.all_passed(), "{r:?}");
        }
        assert!(check_monad_laws(&MonadTrunc::identity(4), 4).unwrap().all_passed());
        let r = check_monad_laws(&monad_from_theory(&TruncClone::semilattice(4)), 4).unwrap();
        assert!(r.all_passed());
        assert!(!r.skipped.is_empty());
    }

    #[test]
    fn mutated_mu_yields_associativity_witness() {
        let m = monad_from_theory(&TruncClone::pointed(5));
        let mut found = None;
        'search: for i in 0..=2 {
            let tti = m.size(m.size(i));
            for x in 0..tti {
                for y in 0..m.size(i) {
                    if m.mu(i, x).unwrap() == y {
                        continue;
                    }
                    let p = m.with_mu_patch(i, x, y);
                    let r = check_monad_laws(&p, 2).unwrap();
                    let a = r.law("associativity").unwrap();
                    if !a.passed {
                        found = Some((p, a.witness.clone().unwrap()));
                        break 'search;
                    }
                }
            }
        }
        let (p, w) = found.expect("some single-entry patch breaks associativity");
        let i = w.sets[0];
        let ti = p.size(i);
        let mu_i = p.mu_table(i).unwrap();
        let lhs = p.mu(i, p.mu(ti, w.element).unwrap()).unwrap();
        let rhs = p.mu(i, p.fmap(p.size(ti), ti, &mu_i, w.element).unwrap()).unwrap();
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn arity_overflow_is_reported() {
        let m = monad_from_theory(&TruncClone::semilattice(4));
        assert!(matches!(m.mu(3, 0), Err(LawError::ArityOverflow { needed: 8, bound: 4, .. })));
    }

    #[test]
    fn pointed_algebra_sends_bottom_to_basepoint() {
        let t = TruncClone::pointed(5);
        let models = enumerate_models(&t, 2, 2).unwrap();
        let h = algebra_from_model(&t, &models[0]).unwrap();
        assert_eq!(h, AlgebraRep { carrier: 2, h: vec![0, 1, 0] });
        let back = model_from_algebra(&AlgebraRep { carrier: 2, h: vec![0, 1, 1] }, &t, 2).unwrap();
        assert_eq!(back, models[1]);
    }

    #[test]
    fn semilattice_algebra_on_chain_is_join() {
        let t = TruncClone::semilattice(8);
        let chain = ModelRep::from_fn(&t, 2, 2, |i, f, x| {
            Ok((0..i).filter(|k| f >> k & 1 == 1).map(|k| x[k]).max().unwrap_or(0))
        })
        .unwrap();
        check_model(&t, &chain).unwrap();
        let h = algebra_from_model(&t, &chain).unwrap();
        assert_eq!(h.h, vec![0, 0, 1, 1]);
    }

    #[test]
    fn trivial_algebras_are_forced() {
        let t = TruncClone::trivial(4);
        let m = monad_from_theory(&t);
        for a in 0..=3 {
            let algs = enumerate_algebras(&m, a).unwrap();
            assert_eq!(algs, vec![AlgebraRep { carrier: a, h: (0..a).collect() }]);
        }
    }

    #[test]
    fn comparison_is_bijective() {
        for (t, bound) in [
            (TruncClone::trivial(4), 3),
            (TruncClone::pointed(5), 3),
            (TruncClone::semilattice(8), 2),
            (TruncClone::builtin("monoid-action:0,1;1,0").unwrap(), 2),
        ] {
            let r = comparison_check(&t, bound, Exec::default()).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn comparison_counts_match_oracles() {
        let r = comparison_check(&TruncClone::pointed(5), 3, Exec::Sequential).unwrap();
        let models: Vec<usize> = r.carriers.iter().map(|c| c.models).collect();
        assert_eq!(models, vec![0, 1, 2, 3]);
        // basepoint-preserving maps between pointed sets of sizes a, b: a * b^(a-1) choices summed over pairs
        let oracle = |a: usize, b: usize| if a == 0 || b == 0 { 0 } else { a * b * b.pow(a as u32 - 1) };
        for a in 0..=3 {
            for b in 0..=3 {
                assert_eq!(r.morphism_counts[&format!("{a}->{b}")], (oracle(a, b), oracle(a, b)));
            }
        }
        let tr = comparison_check(&TruncClone::trivial(4), 3, Exec::Sequential).unwrap();
        for a in 0..=3usize {
            for b in 0..=3usize {
                let all = b.pow(a as u32);
                assert_eq!(tr.morphism_counts[&format!("{a}->{b}")], (all, all));
            }
        }
        let sl = comparison_check(&TruncClone::semilattice(8), 2, Exec::Sequential).unwrap();
        let models: Vec<usize> = sl.carriers.iter().map(|c| c.models).collect();
        assert_eq!(models, vec![0, 1, 2]);
    }

    #[test]
    fn kleisli_round_trips() {
        let r = theory_monad_roundtrip(&TruncClone::trivial(4), 4).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = theory_monad_roundtrip(&TruncClone::pointed(5), 4).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.alpha_bijective.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        let r = theory_monad_roundtrip(&TruncClone::semilattice(8), 3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.alpha_bijective.len(), 4);
    }

    #[test]
    fn free_model_adjunction() {
        let t = TruncClone::pointed(5);
        assert_eq!(free_model(&t, 0, 2).unwrap().carrier, 1);
        assert_eq!(free_model(&TruncClone::trivial(4), 3, 2).unwrap().carrier, 3);
        for i in 0..=2 {
            for c in 1..=3 {
                for md in enumerate_models(&t, c, 2).unwrap() {
                    let (lhs, rhs) = free_adjunction_counts(&t, i, &md).unwrap();
                    assert_eq!(lhs, rhs, "I = {i}, carrier {c}");
                }
            }
        }
        check_model(&t, &free_model(&t, 2, 2).unwrap()).unwrap();
    }

    #[test]
    fn laws_invariant_under_relabelling() {
        // Transporting T along a permutation of I commutes with mu.
        let m = monad_from_theory(&TruncClone::pointed(5));
        let sigma = vec![2, 0, 1];
        let t_sigma: Vec<usize> = (0..m.size(3)).map(|t| m.fmap(3, 3, &sigma, t).unwrap()).collect();
        let mut sorted = t_sigma.clone();
        sorted.sort();
        assert_eq!(sorted, (0..m.size(3)).collect::<Vec<_>>());
        for x in 0..m.size(m.size(3)) {
            let lhs = t_sigma[m.mu(3, x).unwrap()];
            let rhs = m.mu(3, m.fmap(m.size(3), m.size(3), &t_sigma, x).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
