//! Limit sketches over finite categories, their models in finite sets,
//! realizedness, Yoneda models, model enumeration and tensor products.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fincat::{opposite, product_category, FinCatError, FinCategory, FunctorRep, Mor, Morphism, Obj};
use crate::finsetlim::{self, all_functions, Colimit, FinSetDiagram, Func, LimitError, SetCocone, SetCone};
use crate::order::permutations;
use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SketchError {
    #[error("cone {cone}: {reason}")]
    BadCone { cone: String, reason: String },
    #[error("functor is defined on a different category")]
    SourceMismatch,
    #[error("family members have different sources")]
    MismatchedSources,
    #[error("empty family")]
    EmptyFamily,
    #[error("operation needs a {0} sketch")]
    WrongOrientation(&'static str),
    #[error("not a model of the dual sketch: {0}")]
    DualModel(ModelFailure),
    #[error(transparent)]
    Category(#[from] FinCatError),
    #[error(transparent)]
    Limit(#[from] LimitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ConeKind {
    General,
    /// Built by [`monomorphism_cone`]; shape objects `0`, `1` are the two
    /// copies of the apex and `2..` the targets of the family.
    Mono,
}

/// A cone (or, in a colimit sketch, a cocone) in the ambient category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub name: String,
    pub apex: Obj,
    pub diagram: FunctorRep,
    pub legs: Vec<Mor>,
    pub kind: ConeKind,
}

impl Cone {
    pub fn new(name: impl Into<String>, apex: Obj, diagram: FunctorRep, legs: Vec<Mor>) -> Self {
        Cone { name: name.into(), apex, diagram, legs, kind: ConeKind::General }
    }

    pub fn shape(&self) -> &FinCategory {
        &self.diagram.source
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    Limit,
    Colimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sketch {
    pub name: String,
    pub ambient: Arc<FinCategory>,
    pub cones: Vec<Cone>,
    pub orientation: Orientation,
}

fn same_category(a: &Arc<FinCategory>, b: &Arc<FinCategory>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Sketch {
    /// Checks that every cone lives in `ambient` and commutes.
    pub fn new(
        name: impl Into<String>,
        ambient: Arc<FinCategory>,
        cones: Vec<Cone>,
        orientation: Orientation,
    ) -> Result<Self, SketchError> {
        for cone in &cones {
            check_cone(&ambient, cone, orientation)?;
        }
        Ok(Sketch { name: name.into(), ambient, cones, orientation })
    }

    pub fn empty(ambient: Arc<FinCategory>) -> Self {
        Sketch { name: "empty".into(), ambient, cones: Vec::new(), orientation: Orientation::Limit }
    }

    pub fn cone_by_name(&self, name: &str) -> Option<&Cone> {
        self.cones.iter().find(|c| c.name == name)
    }
}

fn check_cone(ambient: &Arc<FinCategory>, cone: &Cone, orientation: Orientation) -> Result<(), SketchError> {
    let bad = |reason: String| SketchError::BadCone { cone: cone.name.clone(), reason };
    if !same_category(&cone.diagram.target, ambient) {
        return Err(bad("diagram does not land in the ambient category".into()));
    }
    if let Some(v) = cone.diagram.violations().first() {
        return Err(bad(format!("diagram is not a functor: {v}")));
    }
    let shape = cone.shape();
    if cone.legs.len() != shape.num_objects() || cone.apex >= ambient.num_objects() {
        return Err(bad("one leg per shape object required".into()));
    }
    for (j, &leg) in cone.legs.iter().enumerate() {
        let target = cone.diagram.obj_map[j];
        let ends = match orientation {
            Orientation::Limit => (cone.apex, target),
            Orientation::Colimit => (target, cone.apex),
        };
        if leg >= ambient.num_morphisms() || (ambient.src(leg), ambient.tgt(leg)) != ends {
            return Err(bad(format!("leg at {} has the wrong endpoints", shape.object_name(j))));
        }
    }
    for u in 0..shape.num_morphisms() {
        let (j, k) = (shape.src(u), shape.tgt(u));
        let du = cone.diagram.mor_map[u];
        let commutes = match orientation {
            Orientation::Limit => ambient.compose(du, cone.legs[j]) == Some(cone.legs[k]),
            Orientation::Colimit => ambient.compose(cone.legs[k], du) == Some(cone.legs[j]),
        };
        if !commutes {
            return Err(bad(format!("legs do not commute with {}", shape.name(u))));
        }
    }
    Ok(())
}

/// The monomorphism cone of a family `f_i : A -> B_i`: apex `A`, two copies of
/// `A` joined to each `B_i` by `f_i`, legs `id_A`, `id_A`, `f_i`.
pub fn monomorphism_cone(ambient: &Arc<FinCategory>, name: &str, family: &[Mor]) -> Result<Cone, SketchError> {
    let first = *family.first().ok_or(SketchError::EmptyFamily)?;
    let a = ambient.src(first);
    if family.iter().any(|&f| ambient.src(f) != a) {
        return Err(SketchError::MismatchedSources);
    }
    let k = family.len();
    let mut names = vec!["L".to_string(), "R".to_string()];
    names.extend((0..k).map(|i| format!("B{i}")));
    let edges: Vec<(String, Obj, Obj)> =
        (0..k).flat_map(|i| [(format!("l{i}"), 0, 2 + i), (format!("r{i}"), 1, 2 + i)]).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let edge_refs: Vec<(&str, Obj, Obj)> = edges.iter().map(|(n, s, t)| (n.as_str(), *s, *t)).collect();
    let shape = Arc::new(FinCategory::from_graph(&name_refs, &edge_refs)?);
    let mut obj_map = vec![a, a];
    obj_map.extend(family.iter().map(|&f| ambient.tgt(f)));
    let mut mor_map: Vec<Mor> = obj_map.iter().map(|&o| ambient.id(o)).collect();
    mor_map.extend(family.iter().flat_map(|&f| [f, f]));
    let mut legs = vec![ambient.id(a), ambient.id(a)];
    legs.extend_from_slice(family);
    let diagram = FunctorRep { source: shape, target: ambient.clone(), obj_map, mor_map };
    Ok(Cone { name: name.into(), apex: a, diagram, legs, kind: ConeKind::Mono })
}

/// A model in finite sets: a functor on the ambient category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetModel {
    pub functor: FinSetDiagram,
}

impl SetModel {
    pub fn sizes(&self) -> &[usize] {
        &self.functor.sets
    }

    pub fn map(&self, f: Mor) -> &Func {
        &self.functor.maps[f]
    }
}

/// A natural transformation between set-valued functors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModelMorphism {
    pub components: Vec<Func>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ModelFailure {
    NotFunctorial(String),
    ConeNotLimit { cone: String },
}

impl fmt::Display for ModelFailure {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFailure::NotFunctorial(at) => write!(out, "not functorial at {at}"),
            ModelFailure::ConeNotLimit { cone } => write!(out, "cone {cone} is not sent to a universal cone"),
        }
    }
}

/// The diagram of sets obtained by applying `f` to the cone's diagram.
pub fn cone_diagram(cone: &Cone, f: &FinSetDiagram) -> FinSetDiagram {
    FinSetDiagram {
        shape: cone.diagram.source.clone(),
        sets: cone.diagram.obj_map.iter().map(|&o| f.sets[o]).collect(),
        maps: cone.diagram.mor_map.iter().map(|&m| f.maps[m].clone()).collect(),
    }
}

pub fn limit_image(cone: &Cone, f: &FinSetDiagram) -> SetCone {
    SetCone {
        diagram: cone_diagram(cone, f),
        apex: f.sets[cone.apex],
        legs: cone.legs.iter().map(|&l| f.maps[l].clone()).collect(),
    }
}

pub fn colimit_image(cone: &Cone, f: &FinSetDiagram) -> SetCocone {
    SetCocone {
        diagram: cone_diagram(cone, f),
        apex: f.sets[cone.apex],
        legs: cone.legs.iter().map(|&l| f.maps[l].clone()).collect(),
    }
}

fn cone_holds(s: &Sketch, cone: &Cone, f: &FinSetDiagram) -> bool {
    match s.orientation {
        Orientation::Limit => finsetlim::is_limit_cone(&limit_image(cone, f)).unwrap_or(false),
        Orientation::Colimit => finsetlim::is_colimit_cocone(&colimit_image(cone, f)).unwrap_or(false),
    }
}

/// First reason `f` is not a model of `s`, if any.
pub fn model_failure(s: &Sketch, f: &FinSetDiagram) -> Result<Option<ModelFailure>, SketchError> {
    if !same_category(&f.shape, &s.ambient) {
        return Err(SketchError::SourceMismatch);
    }
    match f.check() {
        Ok(()) => {}
        Err(LimitError::NotFunctorial(at)) => return Ok(Some(ModelFailure::NotFunctorial(at))),
        Err(e) => return Err(e.into()),
    }
    Ok(s.cones.iter().find(|c| !cone_holds(s, c, f)).map(|c| ModelFailure::ConeNotLimit { cone: c.name.clone() }))
}

pub fn is_model(s: &Sketch, f: &FinSetDiagram) -> Result<bool, SketchError> {
    Ok(model_failure(s, f)?.is_none())
}

/// `Hom(a, -)` as a functor into finite sets; element `k` of the set at `b`
/// is the `k`-th morphism of `hom(a, b)`.
pub fn yoneda_functor(c: &Arc<FinCategory>, a: Obj) -> FinSetDiagram {
    let homs: Vec<Vec<Mor>> = (0..c.num_objects()).map(|b| c.hom(a, b)).collect();
    let mut pos = vec![usize::MAX; c.num_morphisms()];
    for hom in &homs {
        for (k, &g) in hom.iter().enumerate() {
            pos[g] = k;
        }
    }
    let maps = (0..c.num_morphisms()).map(|f| homs[c.src(f)].iter().map(|&g| pos[c.comp(f, g)]).collect()).collect();
    FinSetDiagram { shape: c.clone(), sets: homs.iter().map(Vec::len).collect(), maps }
}

/// The representable model `Hom(a, -)`, or the cone it breaks.
pub fn yoneda_model(s: &Sketch, a: Obj) -> Result<SetModel, ModelFailure> {
    let f = yoneda_functor(&s.ambient, a);
    match model_failure(s, &f) {
        Ok(None) => Ok(SetModel { functor: f }),
        Ok(Some(e)) => Err(e),
        Err(e) => Err(ModelFailure::NotFunctorial(e.to_string())),
    }
}

/// A distinguished cone that is not universal, seen through `Hom(test_object, -)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizationWitness {
    pub cone: String,
    pub test_object: String,
}

/// Yoneda reduction: a cone is a limit iff every `Hom(W, -)` sends it to a limit of sets.
pub fn realization_failure(s: &Sketch) -> Option<RealizationWitness> {
    if s.orientation == Orientation::Colimit {
        return realization_failure(&dual_sketch(s));
    }
    for w in 0..s.ambient.num_objects() {
        let y = yoneda_functor(&s.ambient, w);
        for cone in &s.cones {
            if !cone_holds(s, cone, &y) {
                return Some(RealizationWitness {
                    cone: cone.name.clone(),
                    test_object: s.ambient.object_name(w).to_string(),
                });
            }
        }
    }
    None
}

pub fn is_realized(s: &Sketch) -> bool {
    realization_failure(s).is_none()
}

/// Functor into the thin or general finite category `m.target`, tested
/// through all hom-functors `Hom(T, m(-))`.
pub fn is_model_in(s: &Sketch, m: &FunctorRep) -> Result<bool, SketchError> {
    if !same_category(&m.source, &s.ambient) {
        return Err(SketchError::SourceMismatch);
    }
    if !m.is_valid() {
        return Ok(false);
    }
    let c = &*m.target;
    for t in 0..c.num_objects() {
        let homs: Vec<Vec<Mor>> = m.obj_map.iter().map(|&o| c.hom(t, o)).collect();
        let pos = |b: Obj, g: Mor| homs[b].iter().position(|&x| x == g).expect("composite in hom set");
        let maps = (0..s.ambient.num_morphisms())
            .map(|f| {
                let (a, b) = (s.ambient.src(f), s.ambient.tgt(f));
                homs[a].iter().map(|&g| pos(b, c.comp(m.mor_map[f], g))).collect()
            })
            .collect();
        let h = FinSetDiagram { shape: s.ambient.clone(), sets: homs.iter().map(Vec::len).collect(), maps };
        if !is_model(s, &h)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cones become cocones over the opposite ambient category; involutive.
pub fn dual_sketch(s: &Sketch) -> Sketch {
    let ambient = Arc::new(opposite(&s.ambient));
    let cones = s
        .cones
        .iter()
        .map(|c| Cone {
            name: c.name.clone(),
            apex: c.apex,
            diagram: FunctorRep {
                source: Arc::new(opposite(&c.diagram.source)),
                target: ambient.clone(),
                obj_map: c.diagram.obj_map.clone(),
                mor_map: c.diagram.mor_map.clone(),
            },
            legs: c.legs.clone(),
            kind: c.kind,
        })
        .collect();
    let orientation = match s.orientation {
        Orientation::Limit => Orientation::Colimit,
        Orientation::Colimit => Orientation::Limit,
    };
    Sketch { name: format!("{}^op", s.name), ambient, cones, orientation }
}

/// Ambient `E x F`; cones `(A, tau)` for objects `A` of `s` and cones `tau` of
/// `t`, then `(sigma, B)`.
pub fn tensor_sketch(s: &Sketch, t: &Sketch) -> Result<Sketch, SketchError> {
    if s.orientation != Orientation::Limit || t.orientation != Orientation::Limit {
        return Err(SketchError::WrongOrientation("limit"));
    }
    let (e, f) = (&*s.ambient, &*t.ambient);
    let ambient = Arc::new(product_category(e, f));
    let (no, nm) = (f.num_objects(), f.num_morphisms());
    let obj = |a: Obj, b: Obj| a * no + b;
    let mor = |x: Mor, y: Mor| x * nm + y;
    let mut cones = Vec::new();
    for a in 0..e.num_objects() {
        for tau in &t.cones {
            cones.push(Cone {
                name: format!("({},{})", e.object_name(a), tau.name),
                apex: obj(a, tau.apex),
                diagram: FunctorRep {
                    source: tau.diagram.source.clone(),
                    target: ambient.clone(),
                    obj_map: tau.diagram.obj_map.iter().map(|&b| obj(a, b)).collect(),
                    mor_map: tau.diagram.mor_map.iter().map(|&g| mor(e.id(a), g)).collect(),
                },
                legs: tau.legs.iter().map(|&l| mor(e.id(a), l)).collect(),
                kind: tau.kind,
            });
        }
    }
    for sigma in &s.cones {
        for b in 0..no {
            cones.push(Cone {
                name: format!("({},{})", sigma.name, f.object_name(b)),
                apex: obj(sigma.apex, b),
                diagram: FunctorRep {
                    source: sigma.diagram.source.clone(),
                    target: ambient.clone(),
                    obj_map: sigma.diagram.obj_map.iter().map(|&a| obj(a, b)).collect(),
                    mor_map: sigma.diagram.mor_map.iter().map(|&g| mor(g, f.id(b))).collect(),
                },
                legs: sigma.legs.iter().map(|&l| mor(l, f.id(b))).collect(),
                kind: sigma.kind,
            });
        }
    }
    Sketch::new(format!("{} (x) {}", s.name, t.name), ambient, cones, Orientation::Limit)
}

// ---------------------------------------------------------------------------
// Model morphisms

/// All natural transformations between two set-valued functors on the same
/// category, lexicographic in the component tables.
pub fn set_nat_trans(m: &FinSetDiagram, n: &FinSetDiagram) -> Result<Vec<ModelMorphism>, SketchError> {
    if !same_category(&m.shape, &n.shape) {
        return Err(SketchError::SourceMismatch);
    }
    let c = &*m.shape;
    let out_edges: Vec<Vec<Mor>> = (0..c.num_objects())
        .map(|a| (0..c.num_morphisms()).filter(|&f| c.src(f) == a && !c.is_identity(f)).collect())
        .collect();
    type Comp = Vec<Vec<Option<usize>>>;
    let init: Comp = m.sets.iter().map(|&k| vec![None; k]).collect();

    fn assign(
        comp: &mut Comp,
        a: Obj,
        x: usize,
        v: usize,
        c: &FinCategory,
        m: &FinSetDiagram,
        n: &FinSetDiagram,
        out_edges: &[Vec<Mor>],
    ) -> bool {
        let mut queue = vec![(a, x, v)];
        while let Some((a, x, v)) = queue.pop() {
            match comp[a][x] {
                Some(w) if w == v => continue,
                Some(_) => return false,
                None => comp[a][x] = Some(v),
            }
            for &f in &out_edges[a] {
                queue.push((c.tgt(f), m.maps[f][x], n.maps[f][v]));
            }
        }
        true
    }

    fn candidates(
        comp: &Comp,
        a: Obj,
        x: usize,
        c: &FinCategory,
        m: &FinSetDiagram,
        n: &FinSetDiagram,
        out_edges: &[Vec<Mor>],
    ) -> Vec<usize> {
        (0..n.sets[a])
            .filter(|&v| {
                out_edges[a].iter().all(|&f| match comp[c.tgt(f)][m.maps[f][x]] {
                    Some(w) => n.maps[f][v] == w,
                    None => true,
                })
            })
            .collect()
    }

    fn go(
        comp: Comp,
        c: &FinCategory,
        m: &FinSetDiagram,
        n: &FinSetDiagram,
        out_edges: &[Vec<Mor>],
        out: &mut Vec<ModelMorphism>,
    ) {
        let mut best: Option<(usize, Obj, usize, Vec<usize>)> = None;
        for a in 0..comp.len() {
            for x in 0..comp[a].len() {
                if comp[a][x].is_none() {
                    let cand = candidates(&comp, a, x, c, m, n, out_edges);
                    if best.as_ref().is_none_or(|b| cand.len() < b.0) {
                        best = Some((cand.len(), a, x, cand));
                    }
                }
            }
        }
        match best {
            None => out.push(ModelMorphism {
                components: comp
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v.expect("assigned")).collect())
                    .collect(),
            }),
            Some((_, a, x, cand)) => {
                for v in cand {
                    let mut next = comp.clone();
                    if assign(&mut next, a, x, v, c, m, n, out_edges) {
                        go(next, c, m, n, out_edges, out);
                    }
                }
            }
        }
    }

    let mut out = Vec::new();
    go(init, c, m, n, &out_edges, &mut out);
    out.sort();
    Ok(out)
}

pub fn model_morphisms(m: &SetModel, n: &SetModel) -> Result<Vec<ModelMorphism>, SketchError> {
    set_nat_trans(&m.functor, &n.functor)
}

// ---------------------------------------------------------------------------
// Category of elements and tensor products

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elements {
    pub category: Arc<FinCategory>,
    /// `(object of the ambient category, element)` per object.
    pub objects: Vec<(Obj, usize)>,
    /// Underlying ambient morphism of each morphism.
    pub base: Vec<Mor>,
}

impl Elements {
    pub fn index_of(&self, a: Obj, x: usize) -> Option<usize> {
        self.objects.iter().position(|&p| p == (a, x))
    }
}

/// Category of elements of `m` restricted to the full subcategory on `subcat`.
pub fn category_of_elements(m: &FinSetDiagram, subcat: &[Obj]) -> Result<Elements, SketchError> {
    let c = &*m.shape;
    let objects: Vec<(Obj, usize)> = subcat.iter().flat_map(|&a| (0..m.sets[a]).map(move |x| (a, x))).collect();
    let index: HashMap<(Obj, usize), usize> = objects.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut morphisms = Vec::new();
    let mut base = Vec::new();
    let mut ends = Vec::new();
    let mut identities = vec![0; objects.len()];
    for (i, &(a, x)) in objects.iter().enumerate() {
        for &b in subcat {
            for f in c.hom(a, b) {
                let j = index[&(b, m.maps[f][x])];
                if f == c.id(a) {
                    identities[i] = morphisms.len();
                }
                morphisms.push(Morphism::new(format!("{}@{}", c.name(f), x), i, j));
                base.push(f);
                ends.push((i, j));
            }
        }
    }
    let lookup: HashMap<(usize, Mor), Mor> = base.iter().enumerate().map(|(k, &f)| ((ends[k].0, f), k)).collect();
    let names = objects.iter().map(|&(a, x)| format!("({},{})", c.object_name(a), x)).collect();
    let category = FinCategory::try_new(names, morphisms, identities, |g, f| {
        if ends[f].1 != ends[g].0 {
            return None;
        }
        lookup.get(&(ends[f].0, c.comp(base[g], base[f]))).copied()
    })?;
    Ok(Elements { category: Arc::new(category), objects, base })
}

/// `N (x) M` as the colimit of `N` over the opposite of the category of elements of `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorProduct {
    pub elements: Elements,
    pub colimit: Colimit,
}

impl TensorProduct {
    pub fn carrier(&self) -> usize {
        self.colimit.cocone.apex
    }

    /// Coprojection `N(A) -> N (x) M` of the element with index `k`.
    pub fn leg(&self, k: usize) -> &Func {
        &self.colimit.cocone.legs[k]
    }
}

/// `n` is a functor on the opposite ambient category and must model the dual sketch.
pub fn tensor_product(s: &Sketch, n: &FinSetDiagram, m: &SetModel) -> Result<TensorProduct, SketchError> {
    if s.orientation != Orientation::Limit {
        return Err(SketchError::WrongOrientation("limit"));
    }
    if !same_category(&m.functor.shape, &s.ambient) {
        return Err(SketchError::SourceMismatch);
    }
    let dual = dual_sketch(s);
    if let Some(fail) = model_failure(&dual, n)? {
        return Err(SketchError::DualModel(fail));
    }
    let all: Vec<Obj> = (0..s.ambient.num_objects()).collect();
    let elements = category_of_elements(&m.functor, &all)?;
    let shape = Arc::new(opposite(&elements.category));
    let diagram = FinSetDiagram {
        shape,
        sets: elements.objects.iter().map(|&(a, _)| n.sets[a]).collect(),
        maps: elements.base.iter().map(|&f| n.maps[f].clone()).collect(),
    };
    diagram.check()?;
    let colimit = finsetlim::colimit(&diagram);
    Ok(TensorProduct { elements, colimit })
}

/// Checks `N (x) Hom(a, -) = N(a)` through the coprojection at `(a, id_a)`.
pub fn representable_tensor_iso(s: &Sketch, n: &FinSetDiagram, a: Obj) -> Result<bool, SketchError> {
    let y = yoneda_model(s, a).map_err(SketchError::DualModel)?;
    let tp = tensor_product(s, n, &y)?;
    let id_pos = s.ambient.hom(a, a).iter().position(|&g| g == s.ambient.id(a)).expect("identity in hom");
    let k = tp.elements.index_of(a, id_pos).expect("element of identity");
    let leg = tp.leg(k);
    Ok(leg.len() == tp.carrier() && finsetlim::is_injective(leg))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionCheck {
    pub test_size: usize,
    pub hom_count: usize,
    pub nat_count: usize,
    pub bijective: bool,
}

fn encode(values: impl Iterator<Item = usize>, base: usize) -> usize {
    let mut code = 0;
    let mut weight = 1;
    for v in values {
        code += v * weight;
        weight *= base;
    }
    code
}

fn decode(mut code: usize, len: usize, base: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let v = code % base;
            code /= base;
            v
        })
        .collect()
}

/// `Hom(N(-), T)` for a set `T` of size `t`; a function `N(A) -> T` is
/// stored as its base-`t` code.
pub fn hom_into(n: &FinSetDiagram, ambient: &Arc<FinCategory>, t: usize) -> FinSetDiagram {
    let sets: Vec<usize> = n.sets.iter().map(|&k| t.pow(k as u32)).collect();
    let maps = (0..ambient.num_morphisms())
        .map(|f| {
            let a = ambient.src(f);
            let nf = &n.maps[f];
            (0..sets[a])
                .map(|code| {
                    let g = decode(code, n.sets[a], t.max(1));
                    encode(nf.iter().map(|&y| g[y]), t.max(1))
                })
                .collect()
        })
        .collect();
    FinSetDiagram { shape: ambient.clone(), sets, maps }
}

/// Verifies `Hom(N (x) M, T) = Nat(M, Hom(N(-), T))` for `|T| <= max_test`
/// through the map `phi |-> (phi . coprojections)`.
pub fn verify_tensor_adjunction(
    s: &Sketch,
    n: &FinSetDiagram,
    m: &SetModel,
    tp: &TensorProduct,
    max_test: usize,
    exec: Exec,
) -> Result<Vec<AdjunctionCheck>, SketchError> {
    let mut out = Vec::new();
    for t in 0..=max_test {
        let h = hom_into(n, &s.ambient, t);
        let nats: HashSet<ModelMorphism> = set_nat_trans(&m.functor, &h)?.into_iter().collect();
        let phis: Vec<Func> = all_functions(tp.carrier(), t).collect();
        let images: Vec<ModelMorphism> = exec.map(&phis, |phi| {
            let components = (0..s.ambient.num_objects())
                .map(|a| {
                    (0..m.functor.sets[a])
                        .map(|x| {
                            let k = tp.elements.index_of(a, x).expect("element");
                            encode(tp.leg(k).iter().map(|&c| phi[c]), t.max(1))
                        })
                        .collect()
                })
                .collect();
            ModelMorphism { components }
        });
        let distinct: HashSet<&ModelMorphism> = images.iter().collect();
        let bijective =
            distinct.len() == images.len() && images.len() == nats.len() && images.iter().all(|i| nats.contains(i));
        out.push(AdjunctionCheck { test_size: t, hom_count: phis.len(), nat_count: nats.len(), bijective });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Model enumeration

/// Allowed carrier sizes for the objects that are not forced by a cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelBounds {
    pub default: Vec<usize>,
    pub overrides: Vec<(Obj, Vec<usize>)>,
}

impl ModelBounds {
    pub fn exact(k: usize) -> Self {
        ModelBounds { default: vec![k], overrides: Vec::new() }
    }

    pub fn up_to(k: usize) -> Self {
        ModelBounds { default: (0..=k).collect(), overrides: Vec::new() }
    }

    pub fn with(mut self, obj: Obj, sizes: Vec<usize>) -> Self {
        self.overrides.push((obj, sizes));
        self
    }

    pub fn sizes_for(&self, obj: Obj) -> &[usize] {
        self.overrides.iter().rev().find(|(o, _)| *o == obj).map_or(&self.default, |(_, s)| s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Role {
    Free,
    /// Carrier given by tuples over `coords` of the cone's shape objects;
    /// `subset` chooses any subset of all tuples (monomorphism cones),
    /// otherwise the carrier is the limit.
    Derived {
        cone: usize,
        coords: Vec<usize>,
        subset: bool,
    },
}

#[derive(Clone, Debug)]
enum Step {
    Size(Obj),
    Derive(Obj),
    Subset(Obj),
    Composite { f: Mor, g: Mor, h: Mor },
    Tuple(Mor),
    Function(Mor),
    Check { g: Mor, h: Mor },
    Cone(usize),
}

/// A value-independent schedule of choices, forced values and checks.
struct Plan<'a> {
    sketch: &'a Sketch,
    bounds: &'a ModelBounds,
    roles: Vec<Role>,
    derived_order: Vec<Obj>,
    steps: Vec<Step>,
}

#[derive(Clone, Debug)]
struct Partial {
    sets: Vec<usize>,
    maps: Vec<Option<Func>>,
    tuples: Vec<Vec<Vec<usize>>>,
}

fn roles_for(s: &Sketch) -> Vec<Role> {
    let e = &*s.ambient;
    let mut roles = vec![Role::Free; e.num_objects()];
    for (ci, cone) in s.cones.iter().enumerate() {
        let n = cone.shape().num_objects();
        let coords: Vec<usize> = match cone.kind {
            ConeKind::Mono => (2..n).collect(),
            ConeKind::General => (0..n).collect(),
        };
        if coords.iter().any(|&j| cone.diagram.obj_map[j] == cone.apex) {
            continue;
        }
        let proposed = Role::Derived { cone: ci, coords, subset: cone.kind == ConeKind::Mono };
        match &roles[cone.apex] {
            Role::Free => roles[cone.apex] = proposed,
            Role::Derived { subset: true, .. } if cone.kind == ConeKind::General => roles[cone.apex] = proposed,
            _ => {}
        }
    }
    // demote objects on dependency cycles
    loop {
        let deps = |o: Obj, roles: &[Role]| -> Vec<Obj> {
            match &roles[o] {
                Role::Free => Vec::new(),
                Role::Derived { cone, coords, .. } => {
                    coords.iter().map(|&j| s.cones[*cone].diagram.obj_map[j]).collect()
                }
            }
        };
        let mut state = vec![0u8; roles.len()];
        fn visit(o: Obj, roles: &[Role], state: &mut [u8], deps: &dyn Fn(Obj, &[Role]) -> Vec<Obj>) -> Option<Obj> {
            if state[o] == 2 {
                return None;
            }
            if state[o] == 1 {
                return Some(o);
            }
            state[o] = 1;
            for d in deps(o, roles) {
                if let Some(c) = visit(d, roles, state, deps) {
                    return Some(c);
                }
            }
            state[o] = 2;
            None
        }
        let cyc = (0..roles.len()).find_map(|o| visit(o, &roles, &mut state, &deps));
        match cyc {
            Some(o) => roles[o] = Role::Free,
            None => break,
        }
    }
    roles
}

impl<'a> Plan<'a> {
    fn new(sketch: &'a Sketch, bounds: &'a ModelBounds) -> Self {
        let e = &*sketch.ambient;
        let (no, nm) = (e.num_objects(), e.num_morphisms());
        let roles = roles_for(sketch);
        let non_id: Vec<Mor> = (0..nm).filter(|&f| !e.is_identity(f)).collect();
        // decompositions f = g . h with g, h non-identities
        let mut decomp: Vec<Vec<(Mor, Mor)>> = vec![Vec::new(); nm];
        let mut touching: Vec<Vec<(Mor, Mor)>> = vec![Vec::new(); nm];
        for &g in &non_id {
            for &h in &non_id {
                if let Some(k) = e.compose(g, h) {
                    decomp[k].push((g, h));
                    touching[g].push((g, h));
                    if h != g {
                        touching[h].push((g, h));
                    }
                    if k != g && k != h {
                        touching[k].push((g, h));
                    }
                }
            }
        }
        let mut known_obj = vec![false; no];
        let mut known = vec![false; nm];
        let mut checked: HashSet<(Mor, Mor)> = HashSet::new();
        let mut steps = Vec::new();
        let mut derived_order = Vec::new();
        let mut cone_used = vec![false; sketch.cones.len()];

        let mark = |f: Mor,
                    known: &mut Vec<bool>,
                    checked: &mut HashSet<(Mor, Mor)>,
                    steps: &mut Vec<Step>,
                    skip: Option<(Mor, Mor)>| {
            if known[f] {
                return;
            }
            known[f] = true;
            if let Some(p) = skip {
                checked.insert(p);
            }
            for &(g, h) in &touching[f] {
                let k = e.comp(g, h);
                if known[g] && known[h] && known[k] && checked.insert((g, h)) {
                    steps.push(Step::Check { g, h });
                }
            }
        };

        let legs_of = |o: Obj| -> Vec<Mor> {
            match &roles[o] {
                Role::Derived { cone, coords, .. } => coords.iter().map(|&j| sketch.cones[*cone].legs[j]).collect(),
                Role::Free => Vec::new(),
            }
        };

        loop {
            // deterministic closure
            let mut changed = true;
            while changed {
                changed = false;
                for o in 0..no {
                    if known_obj[o] {
                        continue;
                    }
                    if let Role::Derived { cone, coords, subset: false } = &roles[o] {
                        let c = &sketch.cones[*cone];
                        let ready = coords.iter().all(|&j| known_obj[c.diagram.obj_map[j]])
                            && c.diagram.mor_map.iter().all(|&u| known[u] || e.is_identity(u));
                        if ready {
                            steps.push(Step::Derive(o));
                            derived_order.push(o);
                            cone_used[*cone] = true;
                            known_obj[o] = true;
                            mark(e.id(o), &mut known, &mut checked, &mut steps, None);
                            for l in legs_of(o) {
                                mark(l, &mut known, &mut checked, &mut steps, None);
                            }
                            changed = true;
                        }
                    }
                }
                for f in 0..nm {
                    if known[f] || !known_obj[e.src(f)] || !known_obj[e.tgt(f)] {
                        continue;
                    }
                    let b = e.tgt(f);
                    if let Role::Derived { .. } = roles[b] {
                        let legs = legs_of(b);
                        if legs.iter().all(|&l| known[e.comp(l, f)]) {
                            steps.push(Step::Tuple(f));
                            for &l in &legs {
                                checked.insert((l, f));
                            }
                            mark(f, &mut known, &mut checked, &mut steps, None);
                            changed = true;
                            continue;
                        }
                    }
                    if let Some(&(g, h)) = decomp[f].iter().find(|&&(g, h)| known[g] && known[h]) {
                        steps.push(Step::Composite { f, g, h });
                        mark(f, &mut known, &mut checked, &mut steps, Some((g, h)));
                        changed = true;
                    }
                }
            }
            // next choice
            let ready_subset = (0..no).find(|&o| {
                !known_obj[o]
                    && matches!(&roles[o], Role::Derived { cone, coords, subset: true }
                        if coords.iter().all(|&j| known_obj[sketch.cones[*cone].diagram.obj_map[j]]))
            });
            if let Some(o) = ready_subset {
                if let Role::Derived { cone, .. } = roles[o] {
                    cone_used[cone] = true;
                }
                steps.push(Step::Subset(o));
                derived_order.push(o);
                known_obj[o] = true;
                mark(e.id(o), &mut known, &mut checked, &mut steps, None);
                for l in legs_of(o) {
                    mark(l, &mut known, &mut checked, &mut steps, None);
                }
                continue;
            }
            if let Some(o) = (0..no).find(|&o| !known_obj[o] && roles[o] == Role::Free) {
                steps.push(Step::Size(o));
                known_obj[o] = true;
                mark(e.id(o), &mut known, &mut checked, &mut steps, None);
                continue;
            }
            if let Some(f) = (0..nm).find(|&f| !known[f] && known_obj[e.src(f)] && known_obj[e.tgt(f)]) {
                steps.push(Step::Function(f));
                mark(f, &mut known, &mut checked, &mut steps, None);
                continue;
            }
            if let Some(o) = (0..no).find(|&o| !known_obj[o]) {
                // a limit object whose diagram never becomes known: treat as free
                steps.push(Step::Size(o));
                known_obj[o] = true;
                mark(e.id(o), &mut known, &mut checked, &mut steps, None);
                continue;
            }
            break;
        }
        for (ci, used) in cone_used.iter().enumerate() {
            if !used {
                steps.push(Step::Cone(ci));
            }
        }
        Plan { sketch, bounds, roles, derived_order, steps }
    }

    fn root(&self) -> Partial {
        let e = &*self.sketch.ambient;
        Partial {
            sets: vec![0; e.num_objects()],
            maps: vec![None; e.num_morphisms()],
            tuples: vec![Vec::new(); e.num_objects()],
        }
    }

    fn coords(&self, o: Obj) -> (&Cone, &[usize]) {
        match &self.roles[o] {
            Role::Derived { cone, coords, .. } => (&self.sketch.cones[*cone], coords),
            Role::Free => unreachable!("free objects carry no tuples"),
        }
    }

    fn set_object(&self, st: &mut Partial, o: Obj, size: usize) {
        st.sets[o] = size;
        st.maps[self.sketch.ambient.id(o)] = Some((0..size).collect());
    }

    /// Installs a derived carrier and its projections; false on a leg clash.
    fn install(&self, st: &mut Partial, o: Obj, tuples: Vec<Vec<usize>>) -> bool {
        let e = &*self.sketch.ambient;
        self.set_object(st, o, tuples.len());
        let (cone, coords) = self.coords(o);
        for (pos, &j) in coords.iter().enumerate() {
            let leg = cone.legs[j];
            if e.is_identity(leg) {
                continue;
            }
            let proj: Func = tuples.iter().map(|t| t[pos]).collect();
            match &st.maps[leg] {
                Some(existing) if *existing != proj => return false,
                _ => st.maps[leg] = Some(proj),
            }
        }
        st.tuples[o] = tuples;
        true
    }

    fn map(st: &Partial, f: Mor) -> &Func {
        st.maps[f].as_ref().expect("scheduled before use")
    }

    /// Runs deterministic steps from `idx`; returns the children at the next choice.
    fn advance(&self, mut idx: usize, mut st: Partial) -> Advance {
        let e = &*self.sketch.ambient;
        while idx < self.steps.len() {
            match &self.steps[idx] {
                Step::Derive(o) => {
                    let (cone, _) = self.coords(*o);
                    let d = FinSetDiagram {
                        shape: cone.diagram.source.clone(),
                        sets: cone.diagram.obj_map.iter().map(|&b| st.sets[b]).collect(),
                        maps: cone
                            .diagram
                            .mor_map
                            .iter()
                            .map(|&u| {
                                if e.is_identity(u) {
                                    (0..st.sets[e.src(u)]).collect()
                                } else {
                                    Self::map(&st, u).clone()
                                }
                            })
                            .collect(),
                    };
                    if !self.install(&mut st, *o, finsetlim::limit_tuples(&d)) {
                        return Advance::Dead;
                    }
                }
                Step::Composite { f, g, h } => {
                    let v = finsetlim::compose(Self::map(&st, *g), Self::map(&st, *h));
                    st.maps[*f] = Some(v);
                }
                Step::Tuple(f) => {
                    let b = e.tgt(*f);
                    let (cone, coords) = self.coords(b);
                    let parts: Vec<&Func> = coords.iter().map(|&j| Self::map(&st, e.comp(cone.legs[j], *f))).collect();
                    let index: HashMap<&[usize], usize> =
                        st.tuples[b].iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
                    let mut v = Vec::with_capacity(st.sets[e.src(*f)]);
                    for x in 0..st.sets[e.src(*f)] {
                        let t: Vec<usize> = parts.iter().map(|p| p[x]).collect();
                        match index.get(t.as_slice()) {
                            Some(&i) => v.push(i),
                            None => return Advance::Dead,
                        }
                    }
                    st.maps[*f] = Some(v);
                }
                Step::Check { g, h } => {
                    let k = e.comp(*g, *h);
                    if finsetlim::compose(Self::map(&st, *g), Self::map(&st, *h)) != *Self::map(&st, k) {
                        return Advance::Dead;
                    }
                }
                Step::Cone(ci) => {
                    let f = self.finish(&st);
                    if !cone_holds(self.sketch, &self.sketch.cones[*ci], &f) {
                        return Advance::Dead;
                    }
                }
                Step::Size(o) => {
                    let kids = self
                        .bounds
                        .sizes_for(*o)
                        .iter()
                        .map(|&k| {
                            let mut next = st.clone();
                            self.set_object(&mut next, *o, k);
                            (idx + 1, next)
                        })
                        .collect();
                    return Advance::Children(kids);
                }
                Step::Subset(o) => {
                    let (cone, coords) = self.coords(*o);
                    let dims: Vec<usize> = coords.iter().map(|&j| st.sets[cone.diagram.obj_map[j]]).collect();
                    let candidates = cartesian(&dims);
                    let mut kids = Vec::new();
                    for mask in 0u64..(1u64 << candidates.len()) {
                        let chosen: Vec<Vec<usize>> = candidates
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, t)| t.clone())
                            .collect();
                        let mut next = st.clone();
                        if self.install(&mut next, *o, chosen) {
                            kids.push((idx + 1, next));
                        }
                    }
                    return Advance::Children(kids);
                }
                Step::Function(f) => {
                    let kids = all_functions(st.sets[e.src(*f)], st.sets[e.tgt(*f)])
                        .map(|v| {
                            let mut next = st.clone();
                            next.maps[*f] = Some(v);
                            (idx + 1, next)
                        })
                        .collect();
                    return Advance::Children(kids);
                }
            }
            idx += 1;
        }
        Advance::Done(Box::new(st))
    }

    fn finish(&self, st: &Partial) -> FinSetDiagram {
        FinSetDiagram {
            shape: self.sketch.ambient.clone(),
            sets: st.sets.clone(),
            maps: st.maps.iter().map(|m| m.clone().expect("complete model")).collect(),
        }
    }

    fn dfs(&self, idx: usize, st: Partial, out: &mut Vec<FinSetDiagram>) {
        match self.advance(idx, st) {
            Advance::Dead => {}
            Advance::Done(st) => out.push(self.finish(&st)),
            Advance::Children(kids) => {
                for (i, k) in kids {
                    self.dfs(i, k, out);
                }
            }
        }
    }

    fn run(&self, exec: Exec) -> Vec<FinSetDiagram> {
        enum Node {
            Open(usize, Partial),
            Done(FinSetDiagram),
        }
        let mut frontier = vec![Node::Open(0, self.root())];
        while frontier.len() < 64 && frontier.iter().any(|n| matches!(n, Node::Open(..))) {
            let mut next = Vec::new();
            for node in frontier {
                match node {
                    Node::Done(d) => next.push(Node::Done(d)),
                    Node::Open(i, st) => match self.advance(i, st) {
                        Advance::Dead => {}
                        Advance::Done(st) => next.push(Node::Done(self.finish(&st))),
                        Advance::Children(kids) => next.extend(kids.into_iter().map(|(i, k)| Node::Open(i, k))),
                    },
                }
            }
            frontier = next;
        }
        exec.flat_map(&frontier, |node| match node {
            Node::Done(d) => vec![d.clone()],
            Node::Open(i, st) => {
                let mut out = Vec::new();
                self.dfs(*i, st.clone(), &mut out);
                out
            }
        })
    }

    /// Least relabeling over permutations of the free carriers; derived
    /// carriers follow by re-sorting their tuples.
    fn canonical_key(&self, m: &FinSetDiagram) -> Vec<Func> {
        let e = &*self.sketch.ambient;
        let free: Vec<Obj> = (0..e.num_objects()).filter(|o| !self.derived_order.contains(o)).collect();
        let options: Vec<Vec<Vec<usize>>> = free.iter().map(|&o| permutations(m.sets[o])).collect();
        let mut choice = vec![0usize; free.len()];
        let mut best: Option<Vec<Func>> = None;
        loop {
            let mut pi: Vec<Vec<usize>> = vec![Vec::new(); e.num_objects()];
            for (k, &o) in free.iter().enumerate() {
                pi[o] = options[k][choice[k]].clone();
            }
            for &o in &self.derived_order {
                let (cone, coords) = self.coords(o);
                let tuples: Vec<Vec<usize>> = (0..m.sets[o])
                    .map(|x| {
                        coords
                            .iter()
                            .map(|&j| {
                                let leg = cone.legs[j];
                                pi[cone.diagram.obj_map[j]][m.maps[leg][x]]
                            })
                            .collect()
                    })
                    .collect();
                let mut order: Vec<usize> = (0..m.sets[o]).collect();
                order.sort_by(|&a, &b| tuples[a].cmp(&tuples[b]));
                let mut p = vec![0; m.sets[o]];
                for (rank, &x) in order.iter().enumerate() {
                    p[x] = rank;
                }
                pi[o] = p;
            }
            let key: Vec<Func> = (0..e.num_morphisms())
                .map(|f| {
                    let (a, b) = (e.src(f), e.tgt(f));
                    let mut v = vec![0; m.sets[a]];
                    for x in 0..m.sets[a] {
                        v[pi[a][x]] = pi[b][m.maps[f][x]];
                    }
                    v
                })
                .collect();
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
            // odometer over permutation choices
            let mut k = 0;
            loop {
                if k == free.len() {
                    let mut key = best.expect("at least one relabeling");
                    key.insert(0, m.sets.clone());
                    return key;
                }
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}

enum Advance {
    Dead,
    Done(Box<Partial>),
    Children(Vec<(usize, Partial)>),
}

/// All tuples of `0..dims[0] x ... x 0..dims[k-1]`, lexicographic.
fn cartesian(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |x| {
                    let mut u = t.clone();
                    u.push(x);
                    u
                })
            })
            .collect();
    }
    out
}

/// Models whose unforced carriers are `0..k` for the allowed sizes `k`.
///
/// Carriers of cone apexes are canonical (sorted tuples), so the result lists
/// each model once up to isomorphisms that are the identity on the unforced
/// carriers. Only limit sketches are supported.
pub fn enumerate_models(s: &Sketch, bounds: &ModelBounds, exec: Exec) -> Result<Vec<SetModel>, SketchError> {
    if s.orientation != Orientation::Limit {
        return Err(SketchError::WrongOrientation("limit"));
    }
    let plan = Plan::new(s, bounds);
    Ok(plan.run(exec).into_iter().map(|functor| SetModel { functor }).collect())
}

/// [`enumerate_models`] reduced modulo all model isomorphisms; keeps the first
/// representative of each class.
pub fn enumerate_models_up_to_iso(s: &Sketch, bounds: &ModelBounds, exec: Exec) -> Result<Vec<SetModel>, SketchError> {
    let models = enumerate_models(s, bounds, exec)?;
    let plan = Plan::new(s, bounds);
    let keys = exec.map(&models, |m| plan.canonical_key(&m.functor));
    let mut seen = HashSet::new();
    Ok(models.into_iter().zip(keys).filter(|(_, k)| seen.insert(k.clone())).map(|(m, _)| m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::all_preorders;

    fn arrow() -> Arc<FinCategory> {
        Arc::new(FinCategory::arrow())
    }

    /// `p --x--> a`, `p --y--> b` with the product cone at `p`.
    fn product_sketch() -> Sketch {
        let e = Arc::new(FinCategory::from_graph(&["p", "a", "b"], &[("x", 0, 1), ("y", 0, 2)]).unwrap());
        let shape = Arc::new(FinCategory::discrete(&["0", "1"]));
        let diagram = FunctorRep { source: shape, target: e.clone(), obj_map: vec![1, 2], mor_map: vec![1, 2] };
        let cone = Cone::new("prod", 0, diagram, vec![3, 4]);
        Sketch::new("product", e, vec![cone], Orientation::Limit).unwrap()
    }

    #[test]
    fn empty_sketch_on_terminal_counts_sizes() {
        let s = Sketch::empty(Arc::new(FinCategory::terminal()));
        let ms = enumerate_models(&s, &ModelBounds::up_to(2), Exec::Sequential).unwrap();
        assert_eq!(ms.iter().map(|m| m.sizes()[0]).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(is_realized(&s));
    }

    #[test]
    fn arrow_models_are_all_functions() {
        let s = Sketch::empty(arrow());
        for a in 0..3 {
            for b in 0..3 {
                let bounds = ModelBounds::exact(0).with(0, vec![a]).with(1, vec![b]);
                let ms = enumerate_models(&s, &bounds, Exec::default()).unwrap();
                assert_eq!(ms.len(), b.pow(a as u32));
            }
        }
    }

    #[test]
    fn mono_cone_models_are_injections() {
        let e = arrow();
        let cone = monomorphism_cone(&e, "mono", &[2]).unwrap();
        let s = Sketch::new("inj", e, vec![cone], Orientation::Limit).unwrap();
        for b in 0..4usize {
            // a subset carrier lists its tuples in order, so each image set appears once
            let ms = enumerate_models(&s, &ModelBounds::exact(b), Exec::Sequential).unwrap();
            assert_eq!(ms.len(), 1 << b);
            for a in 0..=b {
                let subsets = (0..1u32 << b).filter(|m| m.count_ones() as usize == a).count();
                assert_eq!(ms.iter().filter(|m| m.sizes()[0] == a).count(), subsets);
            }
            assert!(ms.iter().all(|m| finsetlim::is_injective(m.map(2))));
        }
    }

    #[test]
    fn monomorphism_cone_detects_joint_injectivity() {
        let e = arrow();
        let cone = monomorphism_cone(&e, "mono", &[2]).unwrap();
        let s = Sketch::new("inj", e.clone(), vec![cone], Orientation::Limit).unwrap();
        for f in all_functions(2, 2) {
            let d = FinSetDiagram::new(e.clone(), vec![2, 2], vec![vec![0, 1], vec![0, 1], f.clone()]).unwrap();
            assert_eq!(is_model(&s, &d).unwrap(), finsetlim::is_injective(&f));
        }
        assert_eq!(monomorphism_cone(&e, "x", &[]), Err(SketchError::EmptyFamily));
        assert_eq!(monomorphism_cone(&e, "x", &[2, 1]), Err(SketchError::MismatchedSources));
        // identity family: always a limit
        let id_cone = monomorphism_cone(&e, "id", &[0]).unwrap();
        let s = Sketch::new("id", e.clone(), vec![id_cone], Orientation::Limit).unwrap();
        assert_eq!(enumerate_models(&s, &ModelBounds::exact(2), Exec::Sequential).unwrap().len(), 4);
    }

    #[test]
    fn product_sketch_models_and_realizedness() {
        let s = product_sketch();
        assert!(is_realized(&s));
        let ms = enumerate_models(&s, &ModelBounds::up_to(2), Exec::default()).unwrap();
        // a and b free; p forced: one model per pair of sizes
        assert_eq!(ms.len(), 9);
        for m in &ms {
            assert_eq!(m.sizes()[0], m.sizes()[1] * m.sizes()[2]);
            assert!(is_model(&s, &m.functor).unwrap());
        }
        for a in 0..3 {
            assert!(yoneda_model(&s, a).is_ok());
        }
    }

    #[test]
    fn unrealized_cone_is_witnessed() {
        // product cone in a category where p has no morphism to anything but a, b
        // and a third object q also maps to a and b: the pair (qa, qb) has no mediator
        let e = Arc::new(
            FinCategory::from_graph(&["p", "a", "b", "q"], &[("x", 0, 1), ("y", 0, 2), ("u", 3, 1), ("v", 3, 2)])
                .unwrap(),
        );
        let shape = Arc::new(FinCategory::discrete(&["0", "1"]));
        let diagram = FunctorRep { source: shape, target: e.clone(), obj_map: vec![1, 2], mor_map: vec![1, 2] };
        let cone = Cone::new("prod", 0, diagram, vec![4, 5]);
        let s = Sketch::new("broken", e, vec![cone], Orientation::Limit).unwrap();
        let w = realization_failure(&s).unwrap();
        assert_eq!(w, RealizationWitness { cone: "prod".into(), test_object: "q".into() });
        assert!(yoneda_model(&s, 3).is_err());
    }

    #[test]
    fn non_commuting_cone_is_rejected() {
        let e = arrow();
        let shape = Arc::new(FinCategory::arrow());
        let diagram = FunctorRep::identity(shape.clone());
        let diagram = FunctorRep { target: e.clone(), ..diagram };
        // legs id_a and id_b cannot both leave a single apex
        let err = Sketch::new("x", e, vec![Cone::new("bad", 0, diagram, vec![0, 1])], Orientation::Limit);
        assert!(matches!(err, Err(SketchError::BadCone { .. })));
    }

    #[test]
    fn model_morphisms_between_chains_are_monotone_maps() {
        // functor on the thin 2-chain: a preorder-free check of nat trans counting
        let e = arrow();
        let s = Sketch::empty(e.clone());
        let m =
            SetModel { functor: FinSetDiagram::new(e.clone(), vec![1, 1], vec![vec![0], vec![0], vec![0]]).unwrap() };
        assert_eq!(model_morphisms(&m, &m).unwrap().len(), 1);
        let n = SetModel {
            functor: FinSetDiagram::new(e.clone(), vec![2, 2], vec![vec![0, 1], vec![0, 1], vec![1, 1]]).unwrap(),
        };
        let brute = all_functions(2, 2)
            .flat_map(|a| all_functions(2, 2).map(move |b| (a.clone(), b)))
            .filter(|(a, b)| (0..2).all(|x| b[n.map(2)[x]] == n.map(2)[a[x]]))
            .count();
        assert_eq!(model_morphisms(&n, &n).unwrap().len(), brute);
        assert!(is_model(&s, &n.functor).unwrap());
    }

    #[test]
    fn category_of_elements_counts() {
        let e = arrow();
        let m = FinSetDiagram::new(e.clone(), vec![2, 3], vec![vec![0, 1], vec![0, 1, 2], vec![2, 2]]).unwrap();
        let el = category_of_elements(&m, &[0, 1]).unwrap();
        assert_eq!(el.category.num_objects(), 5);
        assert_eq!(el.category.num_morphisms(), 5 + 2);
        let terminal = FinSetDiagram::new(e.clone(), vec![1, 1], vec![vec![0], vec![0], vec![0]]).unwrap();
        let el = category_of_elements(&terminal, &[0, 1]).unwrap();
        assert!(crate::fincat::find_isomorphism(&el.category, &e).is_some());
    }

    #[test]
    fn tensor_over_trivial_category() {
        let e = Arc::new(FinCategory::terminal());
        let s = Sketch::empty(e.clone());
        let n = FinSetDiagram::new(Arc::new(opposite(&e)), vec![3], vec![vec![0, 1, 2]]).unwrap();
        let m = SetModel { functor: FinSetDiagram::new(e.clone(), vec![1], vec![vec![0]]).unwrap() };
        let tp = tensor_product(&s, &n, &m).unwrap();
        assert_eq!(tp.carrier(), 3);
        assert!(representable_tensor_iso(&s, &n, 0).unwrap());
        let checks = verify_tensor_adjunction(&s, &n, &m, &tp, 3, Exec::default()).unwrap();
        assert!(checks.iter().all(|c| c.bijective));
        // a two-element M doubles the carrier
        let m2 = SetModel { functor: FinSetDiagram::new(e.clone(), vec![2], vec![vec![0, 1]]).unwrap() };
        assert_eq!(tensor_product(&s, &n, &m2).unwrap().carrier(), 6);
    }

    #[test]
    fn tensor_sketch_cone_count_and_unit() {
        let s = product_sketch();
        let unit = Sketch::empty(Arc::new(FinCategory::terminal()));
        let t = tensor_sketch(&s, &unit).unwrap();
        // |objects of s| * |cones of unit| + |cones of s| * |objects of unit|
        assert_eq!(t.cones.len(), 1);
        assert!(crate::fincat::find_isomorphism(&t.ambient, &s.ambient).is_some());
        let tt = tensor_sketch(&s, &s).unwrap();
        assert_eq!(tt.cones.len(), 6);
        assert!(is_realized(&tt));
    }

    #[test]
    fn dual_is_involutive() {
        let s = product_sketch();
        let dd = dual_sketch(&dual_sketch(&s));
        assert_eq!(*dd.ambient, *s.ambient);
        assert_eq!(dd.cones.len(), s.cones.len());
        assert_eq!(dd.orientation, Orientation::Limit);
        assert!(is_realized(&dual_sketch(&s)));
    }

    #[test]
    fn hom_criterion_matches_meets_in_thin_categories() {
        let s = product_sketch();
        for p in all_preorders(3) {
            let c = Arc::new(FinCategory::thin(&p).unwrap());
            for objs in all_functions(3, 3) {
                let (op, oa, ob) = (objs[0], objs[1], objs[2]);
                if !(p.le(op, oa) && p.le(op, ob)) {
                    continue;
                }
                let arrow_of = |i: usize, j: usize| c.hom(i, j)[0];
                let mor_map = vec![c.id(op), c.id(oa), c.id(ob), arrow_of(op, oa), arrow_of(op, ob)];
                let m = FunctorRep { source: s.ambient.clone(), target: c.clone(), obj_map: objs.clone(), mor_map };
                let glb = (0..3).all(|z| !(p.le(z, oa) && p.le(z, ob)) || p.le(z, op));
                assert_eq!(is_model_in(&s, &m).unwrap(), glb);
            }
        }
    }

    #[test]
    fn up_to_iso_on_free_arrow() {
        // functions 2 -> 2 up to relabeling both ends: constant and bijection
        let s = Sketch::empty(arrow());
        let ms = enumerate_models_up_to_iso(&s, &ModelBounds::exact(2), Exec::Sequential).unwrap();
        assert_eq!(ms.len(), 2);
    }
}
