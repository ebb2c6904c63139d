//! Finite categories, functors and natural transformations stored as explicit tables.
//!
//! Objects and morphisms are addressed by stable indices assigned at
//! construction. Every enumeration in the crate sorts by these indices.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub type Obj = usize;
pub type Mor = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Morphism {
    pub name: String,
    pub src: Obj,
    pub tgt: Obj,
}

impl Morphism {
    pub fn new(name: impl Into<String>, src: Obj, tgt: Obj) -> Self {
        Morphism { name: name.into(), src, tgt }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinCatError {
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown morphism {0}")]
    UnknownMorphism(String),
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("invalid category: {0}")]
    Invalid(ValidationReport),
    #[error("functors are not parallel")]
    NotParallel,
    #[error("graph has a composable pair of non-identity edges: {0} . {1}")]
    NotDepthOne(String, String),
}

/// A finite category given by its full composition table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<Mor>,
    /// `compose[g * m + f]` is `g . f` where defined.
    compose: Vec<Option<Mor>>,
}

impl FinCategory {
    /// Builds a table from raw parts without validating the category laws.
    pub fn from_fn(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<Mor>,
        compose: impl Fn(Mor, Mor) -> Option<Mor>,
    ) -> Result<Self, FinCatError> {
        let m = morphisms.len();
        if identities.len() != objects.len() {
            return Err(FinCatError::Malformed("one identity per object required".into()));
        }
        if identities.iter().any(|&i| i >= m) {
            return Err(FinCatError::Malformed("identity index out of range".into()));
        }
        if morphisms.iter().any(|f| f.src >= objects.len() || f.tgt >= objects.len()) {
            return Err(FinCatError::Malformed("morphism endpoint out of range".into()));
        }
        let mut table = vec![None; m * m];
        for g in 0..m {
            for f in 0..m {
                let h = compose(g, f);
                if let Some(h) = h {
                    if h >= m {
                        return Err(FinCatError::Malformed("composite out of range".into()));
                    }
                }
                table[g * m + f] = h;
            }
        }
        Ok(FinCategory { objects, morphisms, identities, compose: table })
    }

    /// Like [`FinCategory::from_fn`] but rejects tables failing [`validate_category`].
    pub fn try_new(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<Mor>,
        compose: impl Fn(Mor, Mor) -> Option<Mor>,
    ) -> Result<Self, FinCatError> {
        let c = Self::from_fn(objects, morphisms, identities, compose)?;
        let report = validate_category(&c);
        if report.is_ok() {
            Ok(c)
        } else {
            Err(FinCatError::Invalid(report))
        }
    }

    /// Category on a graph with no composable pair of non-identity edges.
    /// Identities are added as `id_<object>`.
    pub fn from_graph(objects: &[&str], edges: &[(&str, Obj, Obj)]) -> Result<Self, FinCatError> {
        for (n1, _, t1) in edges {
            for (n2, s2, _) in edges {
                if t1 == s2 {
                    return Err(FinCatError::NotDepthOne(n2.to_string(), n1.to_string()));
                }
            }
        }
        let n = objects.len();
        let mut morphisms: Vec<Morphism> =
            objects.iter().enumerate().map(|(i, o)| Morphism::new(format!("id_{o}"), i, i)).collect();
        morphisms.extend(edges.iter().map(|(name, s, t)| Morphism::new(*name, *s, *t)));
        let identities: Vec<Mor> = (0..n).collect();
        let objs = objects.iter().map(|s| s.to_string()).collect();
        let srcs: Vec<(Obj, Obj)> = morphisms.iter().map(|f| (f.src, f.tgt)).collect();
        Self::try_new(objs, morphisms, identities, |g, f| {
            if srcs[f].1 != srcs[g].0 {
                None
            } else if g < n {
                Some(f)
            } else if f < n {
                Some(g)
            } else {
                None
            }
        })
    }

    pub fn discrete(names: &[&str]) -> Self {
        Self::from_graph(names, &[]).expect("discrete category")
    }

    pub fn terminal() -> Self {
        Self::discrete(&["*"])
    }

    /// Two objects `a`, `b` and one arrow `a -> b`.
    pub fn arrow() -> Self {
        Self::from_graph(&["a", "b"], &[("u", 0, 1)]).expect("arrow category")
    }

    /// The thin category of a preorder: one arrow `i -> j` iff `i <= j`.
    pub fn thin(p: &crate::order::Preorder) -> Result<Self, FinCatError> {
        let pairs = p.pairs();
        let index: std::collections::HashMap<(Obj, Obj), Mor> =
            pairs.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let objects = (0..p.n).map(|i| i.to_string()).collect();
        let morphisms = pairs.iter().map(|&(i, j)| Morphism::new(format!("{i}<={j}"), i, j)).collect();
        let identities = (0..p.n)
            .map(|i| {
                index.get(&(i, i)).copied().ok_or_else(|| FinCatError::Malformed("relation is not reflexive".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::try_new(objects, morphisms, identities, |g, f| {
            let (a, b) = pairs[f];
            let (b2, c) = pairs[g];
            if b != b2 {
                return None;
            }
            index.get(&(a, c)).copied()
        })
    }

    /// Opposite of the full subcategory of the simplex category on `[0], ..., [n]`.
    ///
    /// A morphism `[a] -> [b]` of the result is a monotone map `[b] -> [a]`,
    /// stored as its value list. Morphism names are `<a>_<b>_<values>`.
    pub fn truncated_simplex_op(n: usize, object_names: &[&str]) -> Self {
        assert_eq!(object_names.len(), n + 1);
        let mut morphisms = Vec::new();
        let mut maps: Vec<Vec<usize>> = Vec::new();
        let mut identities = vec![0; n + 1];
        for a in 0..=n {
            for b in 0..=n {
                for phi in monotone_maps(b + 1, a + 1) {
                    if a == b && phi.iter().enumerate().all(|(i, &v)| i == v) {
                        identities[a] = morphisms.len();
                    }
                    let digits: String = phi.iter().map(|v| v.to_string()).collect();
                    morphisms.push(Morphism::new(format!("{}{}_{}", object_names[a], object_names[b], digits), a, b));
                    maps.push(phi);
                }
            }
        }
        let index: std::collections::HashMap<(Obj, Obj, Vec<usize>), Mor> =
            morphisms.iter().zip(&maps).enumerate().map(|(i, (f, phi))| ((f.src, f.tgt, phi.clone()), i)).collect();
        let objs = object_names.iter().map(|s| s.to_string()).collect();
        let ends: Vec<(Obj, Obj)> = morphisms.iter().map(|f| (f.src, f.tgt)).collect();
        Self::try_new(objs, morphisms, identities, |g, f| {
            if ends[f].1 != ends[g].0 {
                return None;
            }
            // g . f corresponds to phi_f . phi_g
            let composite: Vec<usize> = maps[g].iter().map(|&k| maps[f][k]).collect();
            index.get(&(ends[f].0, ends[g].1, composite)).copied()
        })
        .expect("truncated simplex category is valid")
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn object_name(&self, a: Obj) -> &str {
        &self.objects[a]
    }

    pub fn morphism(&self, f: Mor) -> &Morphism {
        &self.morphisms[f]
    }

    pub fn name(&self, f: Mor) -> &str {
        &self.morphisms[f].name
    }

    pub fn src(&self, f: Mor) -> Obj {
        self.morphisms[f].src
    }

    pub fn tgt(&self, f: Mor) -> Obj {
        self.morphisms[f].tgt
    }

    pub fn id(&self, a: Obj) -> Mor {
        self.identities[a]
    }

    pub fn is_identity(&self, f: Mor) -> bool {
        self.identities[self.src(f)] == f
    }

    /// `g . f`, if defined by the table.
    pub fn compose(&self, g: Mor, f: Mor) -> Option<Mor> {
        self.compose[g * self.morphisms.len() + f]
    }

    /// `g . f` for a composable pair; panics otherwise.
    pub fn comp(&self, g: Mor, f: Mor) -> Mor {
        self.compose(g, f).unwrap_or_else(|| panic!("{} . {} is not defined", self.name(g), self.name(f)))
    }

    pub fn object_by_name(&self, name: &str) -> Result<Obj, FinCatError> {
        self.objects.iter().position(|o| o == name).ok_or_else(|| FinCatError::UnknownObject(name.to_string()))
    }

    pub fn morphism_by_name(&self, name: &str) -> Result<Mor, FinCatError> {
        self.morphisms.iter().position(|f| f.name == name).ok_or_else(|| FinCatError::UnknownMorphism(name.to_string()))
    }

    /// Morphisms `a -> b` in index order (no bounds check).
    pub fn hom(&self, a: Obj, b: Obj) -> Vec<Mor> {
        (0..self.morphisms.len()).filter(|&f| self.src(f) == a && self.tgt(f) == b).collect()
    }

    /// Returns a copy with the morphisms renamed by `rename` (identity where it returns `None`).
    pub fn renamed(&self, rename: impl Fn(Mor, &str) -> Option<String>) -> Self {
        let mut c = self.clone();
        for (i, f) in c.morphisms.iter_mut().enumerate() {
            if let Some(n) = rename(i, &f.name) {
                f.name = n;
            }
        }
        c
    }
}

/// Monotone maps `{0..dom} -> {0..cod}` as value lists, in lexicographic order.
pub fn monotone_maps(dom: usize, cod: usize) -> Vec<Vec<usize>> {
    fn go(dom: usize, cod: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == dom {
            out.push(cur.clone());
            return;
        }
        for v in lo..cod {
            cur.push(v);
            go(dom, cod, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(dom, cod, 0, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    IdentityType { object: String },
    ComposeUndefined { g: String, f: String },
    ComposeSpurious { g: String, f: String },
    ComposeType { g: String, f: String },
    LeftIdentity { f: String },
    RightIdentity { f: String },
    Associativity { h: String, g: String, f: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IdentityType { object } => write!(out, "identity of {object} has wrong type"),
            Violation::ComposeUndefined { g, f } => write!(out, "compose undefined: {g} . {f}"),
            Violation::ComposeSpurious { g, f } => write!(out, "compose defined on non-composable pair: {g} . {f}"),
            Violation::ComposeType { g, f } => write!(out, "composite {g} . {f} has wrong type"),
            Violation::LeftIdentity { f } => write!(out, "left identity law fails for {f}"),
            Violation::RightIdentity { f } => write!(out, "right identity law fails for {f}"),
            Violation::Associativity { h, g, f } => write!(out, "associativity fails for {h} . {g} . {f}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks totality on composable pairs, identity laws and associativity.
pub fn validate_category(c: &FinCategory) -> ValidationReport {
    let mut violations = Vec::new();
    let m = c.num_morphisms();
    for a in 0..c.num_objects() {
        let i = c.id(a);
        if c.src(i) != a || c.tgt(i) != a {
            violations.push(Violation::IdentityType { object: c.object_name(a).to_string() });
        }
    }
    let mut typed_ok = true;
    for g in 0..m {
        for f in 0..m {
            let composable = c.tgt(f) == c.src(g);
            match (composable, c.compose(g, f)) {
                (true, None) => {
                    typed_ok = false;
                    violations.push(Violation::ComposeUndefined { g: c.name(g).into(), f: c.name(f).into() })
                }
                (false, Some(_)) => {
                    violations.push(Violation::ComposeSpurious { g: c.name(g).into(), f: c.name(f).into() })
                }
                (true, Some(h)) if c.src(h) != c.src(f) || c.tgt(h) != c.tgt(g) => {
                    typed_ok = false;
                    violations.push(Violation::ComposeType { g: c.name(g).into(), f: c.name(f).into() })
                }
                _ => {}
            }
        }
    }
    if !typed_ok || !violations.is_empty() {
        return ValidationReport { violations };
    }
    for f in 0..m {
        if c.comp(c.id(c.tgt(f)), f) != f {
            violations.push(Violation::LeftIdentity { f: c.name(f).into() });
        }
        if c.comp(f, c.id(c.src(f))) != f {
            violations.push(Violation::RightIdentity { f: c.name(f).into() });
        }
    }
    for f in 0..m {
        for g in (0..m).filter(|&g| c.src(g) == c.tgt(f)) {
            let gf = c.comp(g, f);
            for h in (0..m).filter(|&h| c.src(h) == c.tgt(g)) {
                if c.comp(h, gf) != c.comp(c.comp(h, g), f) {
                    violations.push(Violation::Associativity {
                        h: c.name(h).into(),
                        g: c.name(g).into(),
                        f: c.name(f).into(),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// The opposite category: same indices and names, endpoints swapped.
pub fn opposite(c: &FinCategory) -> FinCategory {
    let morphisms = c.morphisms.iter().map(|f| Morphism::new(f.name.clone(), f.tgt, f.src)).collect();
    let m = c.num_morphisms();
    let mut table = vec![None; m * m];
    for g in 0..m {
        for f in 0..m {
            table[g * m + f] = c.compose(f, g);
        }
    }
    FinCategory { objects: c.objects.clone(), morphisms, identities: c.identities.clone(), compose: table }
}

/// The morphisms `a -> b` in canonical (index) order.
pub fn hom_set(c: &FinCategory, a: Obj, b: Obj) -> Result<Vec<Mor>, FinCatError> {
    for x in [a, b] {
        if x >= c.num_objects() {
            return Err(FinCatError::UnknownObject(x.to_string()));
        }
    }
    Ok(c.hom(a, b))
}

/// Product category; object `(a, b)` has index `a * |obj d| + b`, morphism `(f, g)` has
/// index `f * |mor d| + g`.
pub fn product_category(c: &FinCategory, d: &FinCategory) -> FinCategory {
    let (no, nm) = (d.num_objects(), d.num_morphisms());
    let mut objects = Vec::new();
    for a in c.objects() {
        for b in d.objects() {
            objects.push(format!("({a},{b})"));
        }
    }
    let mut morphisms = Vec::new();
    for f in c.morphisms() {
        for g in d.morphisms() {
            morphisms.push(Morphism::new(format!("({},{})", f.name, g.name), f.src * no + g.src, f.tgt * no + g.tgt));
        }
    }
    let identities =
        (0..c.num_objects()).flat_map(|a| (0..no).map(move |b| (a, b))).map(|(a, b)| c.id(a) * nm + d.id(b)).collect();
    FinCategory::from_fn(objects, morphisms, identities, |x, y| {
        let (g1, g2) = (x / nm, x % nm);
        let (f1, f2) = (y / nm, y % nm);
        Some(c.compose(g1, f1)? * nm + d.compose(g2, f2)?)
    })
    .expect("product of valid tables")
}

/// A functor between finite categories, stored as object and morphism maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctorRep {
    pub source: Arc<FinCategory>,
    pub target: Arc<FinCategory>,
    pub obj_map: Vec<Obj>,
    pub mor_map: Vec<Mor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FunctorViolation {
    Shape,
    Endpoints { morphism: String },
    Identity { object: String },
    Composition { g: String, f: String },
}

impl fmt::Display for FunctorViolation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorViolation::Shape => write!(out, "map sizes do not match the source category"),
            FunctorViolation::Endpoints { morphism } => write!(out, "image of {morphism} has wrong endpoints"),
            FunctorViolation::Identity { object } => write!(out, "identity of {object} not preserved"),
            FunctorViolation::Composition { g, f } => write!(out, "composite {g} . {f} not preserved"),
        }
    }
}

impl FunctorRep {
    pub fn identity(c: Arc<FinCategory>) -> Self {
        FunctorRep {
            obj_map: (0..c.num_objects()).collect(),
            mor_map: (0..c.num_morphisms()).collect(),
            source: c.clone(),
            target: c,
        }
    }

    /// Constant functor at object `b` of `target`.
    pub fn constant(source: Arc<FinCategory>, target: Arc<FinCategory>, b: Obj) -> Self {
        FunctorRep {
            obj_map: vec![b; source.num_objects()],
            mor_map: vec![target.id(b); source.num_morphisms()],
            source,
            target,
        }
    }

    /// Exhaustive functor-law check.
    pub fn violations(&self) -> Vec<FunctorViolation> {
        let (s, t) = (&*self.source, &*self.target);
        if self.obj_map.len() != s.num_objects()
            || self.mor_map.len() != s.num_morphisms()
            || self.obj_map.iter().any(|&o| o >= t.num_objects())
            || self.mor_map.iter().any(|&m| m >= t.num_morphisms())
        {
            return vec![FunctorViolation::Shape];
        }
        let mut out = Vec::new();
        for f in 0..s.num_morphisms() {
            let g = self.mor_map[f];
            if t.src(g) != self.obj_map[s.src(f)] || t.tgt(g) != self.obj_map[s.tgt(f)] {
                out.push(FunctorViolation::Endpoints { morphism: s.name(f).into() });
            }
        }
        if !out.is_empty() {
            return out;
        }
        for a in 0..s.num_objects() {
            if self.mor_map[s.id(a)] != t.id(self.obj_map[a]) {
                out.push(FunctorViolation::Identity { object: s.object_name(a).into() });
            }
        }
        for g in 0..s.num_morphisms() {
            for f in 0..s.num_morphisms() {
                if let Some(h) = s.compose(g, f) {
                    if t.compose(self.mor_map[g], self.mor_map[f]) != Some(self.mor_map[h]) {
                        out.push(FunctorViolation::Composition { g: s.name(g).into(), f: s.name(f).into() });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }

    /// `other . self`.
    pub fn then(&self, other: &FunctorRep) -> FunctorRep {
        FunctorRep {
            source: self.source.clone(),
            target: other.target.clone(),
            obj_map: self.obj_map.iter().map(|&o| other.obj_map[o]).collect(),
            mor_map: self.mor_map.iter().map(|&m| other.mor_map[m]).collect(),
        }
    }

    /// The same functor viewed between opposite categories.
    pub fn opposite(&self) -> FunctorRep {
        FunctorRep {
            source: Arc::new(opposite(&self.source)),
            target: Arc::new(opposite(&self.target)),
            obj_map: self.obj_map.clone(),
            mor_map: self.mor_map.clone(),
        }
    }
}

/// A natural transformation between parallel functors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatTransRep {
    pub source: FunctorRep,
    pub target: FunctorRep,
    pub components: Vec<Mor>,
}

impl NatTransRep {
    /// Names of the domain morphisms whose naturality square fails.
    pub fn naturality_failures(&self) -> Vec<String> {
        let d = &*self.source.source;
        let c = &*self.source.target;
        (0..d.num_morphisms())
            .filter(|&f| {
                let (a, b) = (d.src(f), d.tgt(f));
                c.compose(self.components[b], self.source.mor_map[f])
                    != c.compose(self.target.mor_map[f], self.components[a])
            })
            .map(|f| d.name(f).to_string())
            .collect()
    }
}

/// All natural transformations `F => G`, in lexicographic order of component lists.
pub fn enumerate_nat_trans(f: &FunctorRep, g: &FunctorRep) -> Result<Vec<NatTransRep>, FinCatError> {
    if f.source != g.source || f.target != g.target {
        return Err(FinCatError::NotParallel);
    }
    let d = &*f.source;
    let c = &*f.target;
    let n = d.num_objects();
    let choices: Vec<Vec<Mor>> = (0..n).map(|a| c.hom(f.obj_map[a], g.obj_map[a])).collect();
    let mut out = Vec::new();
    let mut comp = Vec::with_capacity(n);
    fn go(
        a: usize,
        d: &FinCategory,
        c: &FinCategory,
        f: &FunctorRep,
        g: &FunctorRep,
        choices: &[Vec<Mor>],
        comp: &mut Vec<Mor>,
        out: &mut Vec<Vec<Mor>>,
    ) {
        if a == choices.len() {
            out.push(comp.clone());
            return;
        }
        for &alpha in &choices[a] {
            comp.push(alpha);
            let ok = (0..d.num_morphisms()).all(|u| {
                let (x, y) = (d.src(u), d.tgt(u));
                if x > a || y > a {
                    return true;
                }
                c.compose(comp[y], f.mor_map[u]) == c.compose(g.mor_map[u], comp[x])
            });
            if ok {
                go(a + 1, d, c, f, g, choices, comp, out);
            }
            comp.pop();
        }
    }
    let mut raw = Vec::new();
    go(0, d, c, f, g, &choices, &mut comp, &mut raw);
    out.extend(raw.into_iter().map(|components| NatTransRep { source: f.clone(), target: g.clone(), components }));
    Ok(out)
}

/// Searches for an isomorphism `c -> d` by backtracking; returns it as a functor.
pub fn find_isomorphism(c: &Arc<FinCategory>, d: &Arc<FinCategory>) -> Option<FunctorRep> {
    if c.num_objects() != d.num_objects() || c.num_morphisms() != d.num_morphisms() {
        return None;
    }
    let n = c.num_objects();
    let mut obj = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn objs(
        a: usize,
        c: &FinCategory,
        d: &FinCategory,
        obj: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> Option<Vec<Mor>> {
        if a == obj.len() {
            return morphisms(c, d, obj);
        }
        for b in 0..obj.len() {
            if used[b] {
                continue;
            }
            obj[a] = b;
            let ok = (0..=a)
                .all(|x| c.hom(x, a).len() == d.hom(obj[x], b).len() && c.hom(a, x).len() == d.hom(b, obj[x]).len());
            if ok {
                used[b] = true;
                if let Some(m) = objs(a + 1, c, d, obj, used) {
                    return Some(m);
                }
                used[b] = false;
            }
        }
        obj[a] = usize::MAX;
        None
    }
    fn morphisms(c: &FinCategory, d: &FinCategory, obj: &[usize]) -> Option<Vec<Mor>> {
        let m = c.num_morphisms();
        let mut map = vec![usize::MAX; m];
        let mut used = vec![false; m];
        for a in 0..c.num_objects() {
            map[c.id(a)] = d.id(obj[a]);
            used[d.id(obj[a])] = true;
        }
        let order: Vec<Mor> = (0..m).filter(|&f| !c.is_identity(f)).collect();
        fn go(
            k: usize,
            order: &[Mor],
            c: &FinCategory,
            d: &FinCategory,
            obj: &[usize],
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            if k == order.len() {
                return true;
            }
            let f = order[k];
            for g in d.hom(obj[c.src(f)], obj[c.tgt(f)]) {
                if used[g] {
                    continue;
                }
                map[f] = g;
                let consistent = (0..c.num_morphisms()).all(|x| {
                    if map[x] == usize::MAX {
                        return true;
                    }
                    [(f, x), (x, f)].iter().all(|&(p, q)| match c.compose(p, q) {
                        Some(r) if map[r] != usize::MAX => d.compose(map[p], map[q]) == Some(map[r]),
                        _ => true,
                    })
                });
                if consistent {
                    used[g] = true;
                    if go(k + 1, order, c, d, obj, map, used) {
                        return true;
                    }
                    used[g] = false;
                }
                map[f] = usize::MAX;
            }
            false
        }
        if go(0, &order, c, d, obj, &mut map, &mut used) {
            Some(map)
        } else {
            None
        }
    }
    let mor_map = objs(0, c, d, &mut obj, &mut used)?;
    let functor = FunctorRep { source: c.clone(), target: d.clone(), obj_map: obj, mor_map };
    debug_assert!(functor.is_valid());
    Some(functor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn missing_composite() -> FinCategory {
        // a -u-> b -v-> c without a composite for v . u
        let objs = vec!["a".into(), "b".into(), "c".into()];
        let mors = vec![
            Morphism::new("id_a", 0, 0),
            Morphism::new("id_b", 1, 1),
            Morphism::new("id_c", 2, 2),
            Morphism::new("u", 0, 1),
            Morphism::new("v", 1, 2),
        ];
        let ends: Vec<_> = mors.iter().map(|m| (m.src, m.tgt)).collect();
        FinCategory::from_fn(objs, mors, vec![0, 1, 2], |g, f| {
            if ends[f].1 != ends[g].0 {
                None
            } else if g < 3 {
                Some(f)
            } else if f < 3 {
                Some(g)
            } else {
                None
            }
        })
        .unwrap()
    }

    #[test]
    fn identity_only_category_is_valid() {
        assert!(validate_category(&FinCategory::terminal()).is_ok());
    }

    #[test]
    fn missing_composite_is_reported() {
        let report = validate_category(&missing_composite());
        assert_eq!(report.violations, vec![Violation::ComposeUndefined { g: "v".into(), f: "u".into() }]);
        assert!(report.to_string().contains("compose undefined"));
    }

    #[test]
    fn associativity_violation_is_detected() {
        // one object, morphisms e, a with a . a = e but e acts as a non-identity
        let objs = vec!["x".into()];
        let mors = vec![Morphism::new("id", 0, 0), Morphism::new("a", 0, 0), Morphism::new("b", 0, 0)];
        // table: a.a = b, a.b = a, b.a = b, b.b = a: not associative
        let t = |g: Mor, f: Mor| -> Option<Mor> {
            Some(match (g, f) {
                (0, x) | (x, 0) => x,
                (1, 1) => 2,
                (1, 2) => 1,
                (2, 1) => 2,
                _ => 1,
            })
        };
        let c = FinCategory::from_fn(objs, mors, vec![0], t).unwrap();
        let report = validate_category(&c);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Associativity { .. })));
    }

    #[test]
    fn opposite_of_arrow_reverses_it() {
        let a = FinCategory::arrow();
        let op = opposite(&a);
        let u = op.morphism_by_name("u").unwrap();
        assert_eq!((op.src(u), op.tgt(u)), (1, 0));
        assert!(validate_category(&op).is_ok());
        assert_eq!(opposite(&op), a);
    }

    #[test]
    fn terminal_is_self_dual() {
        let t = FinCategory::terminal();
        assert_eq!(opposite(&t), t);
    }

    #[test]
    fn discrete_hom_sets() {
        let c = FinCategory::discrete(&["a", "b"]);
        assert_eq!(hom_set(&c, 0, 0).unwrap(), vec![c.id(0)]);
        assert!(hom_set(&c, 0, 1).unwrap().is_empty());
        assert!(matches!(hom_set(&c, 0, 7), Err(FinCatError::UnknownObject(_))));
    }

    #[test]
    fn arrow_times_arrow_is_the_square() {
        let a = FinCategory::arrow();
        let sq = product_category(&a, &a);
        assert_eq!(sq.num_objects(), 4);
        assert_eq!(sq.num_morphisms(), 9);
        assert!(validate_category(&sq).is_ok());
    }

    #[test]
    fn product_with_terminal_is_isomorphic() {
        let a = Arc::new(FinCategory::arrow());
        let p = Arc::new(product_category(&a, &FinCategory::terminal()));
        assert!(find_isomorphism(&a, &p).is_some());
        let d = Arc::new(FinCategory::discrete(&["x", "y"]));
        assert!(find_isomorphism(&a, &d).is_none());
    }

    #[test]
    fn monotone_map_counts_match_brute_force() {
        for dom in 0..4 {
            for cod in 0usize..4 {
                let mut brute = 0;
                let total = cod.pow(dom as u32);
                for code in 0..total {
                    let mut v = Vec::new();
                    let mut c = code;
                    for _ in 0..dom {
                        v.push(c % cod.max(1));
                        c /= cod.max(1);
                    }
                    if v.windows(2).all(|w| w[0] <= w[1]) {
                        brute += 1;
                    }
                }
                let brute = if dom == 0 { 1 } else { brute };
                assert_eq!(monotone_maps(dom, cod).len(), brute, "{dom} -> {cod}");
            }
        }
    }

    #[test]
    fn nat_trans_on_discrete_identity() {
        let c = Arc::new(FinCategory::discrete(&["a", "b"]));
        let id = FunctorRep::identity(c);
        assert_eq!(enumerate_nat_trans(&id, &id).unwrap().len(), 1);
    }

    #[test]
    fn nat_trans_between_constants_into_arrow() {
        let a = Arc::new(FinCategory::arrow());
        let src = Arc::new(FinCategory::discrete(&["x", "y"]));
        let f = FunctorRep::constant(src.clone(), a.clone(), 0);
        let g = FunctorRep::constant(src.clone(), a.clone(), 1);
        let ts = enumerate_nat_trans(&f, &g).unwrap();
        assert_eq!(ts.len(), 1);
        assert!(ts[0].naturality_failures().is_empty());
        // constant at an object with trivial endomorphisms
        assert_eq!(enumerate_nat_trans(&f, &f).unwrap().len(), 1);
        let other = FunctorRep::identity(a.clone());
        assert_eq!(enumerate_nat_trans(&f, &other), Err(FinCatError::NotParallel));
    }

    #[test]
    fn simplex_op_counts() {
        let c = FinCategory::truncated_simplex_op(2, &["X", "R", "T"]);
        assert_eq!(c.num_morphisms(), 31);
        assert!(validate_category(&c).is_ok());
        assert_eq!(c.hom(1, 1).len(), 3);
        assert_eq!(c.hom(2, 1).len(), 6);
        assert_eq!(c.hom(2, 0).len(), 3);
    }
}
