//! Concrete sketches: preorders and categories as models of truncated
//! simplicial sketches, copreorders and their classification.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fincat::{opposite, FinCategory, FunctorRep, Mor, Obj};
use crate::finsetlim::{partitions, FinSetDiagram, Func};
use crate::order::Preorder;
use crate::par::Exec;
use crate::sketch::{monomorphism_cone, Cone, Orientation, SetModel, Sketch};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CopreorderError {
    #[error("element {0} is not in the carrier")]
    NotSubset(usize),
}

/// Conventional names for the low-dimensional morphisms of the truncated simplex category.
fn conventional_name(generated: &str) -> Option<&'static str> {
    Some(match generated {
        "XX_0" => "id_X",
        "RR_01" => "id_R",
        "TT_012" => "id_T",
        "QQ_0123" => "id_Q",
        "RX_0" => "r1",
        "RX_1" => "r2",
        "XR_00" => "i",
        "TR_01" => "pr1",
        "TR_12" => "pr2",
        "TR_02" => "c",
        _ => return None,
    })
}

fn named_simplex(n: usize, names: &[&str]) -> Arc<FinCategory> {
    let c = FinCategory::truncated_simplex_op(n, names);
    Arc::new(c.renamed(|_, name| conventional_name(name).map(str::to_string)))
}

fn mor(e: &FinCategory, name: &str) -> Mor {
    e.morphism_by_name(name).unwrap_or_else(|_| panic!("built-in morphism {name}"))
}

/// Cone over the cospan `d0 --u0--> d2 <--u1-- d1`.
fn pullback_cone(
    e: &Arc<FinCategory>,
    name: &str,
    apex: Obj,
    objects: [Obj; 3],
    arrows: [Mor; 2],
    legs: [Mor; 3],
) -> Cone {
    let shape = Arc::new(FinCategory::from_graph(&["0", "1", "2"], &[("u0", 0, 2), ("u1", 1, 2)]).expect("cospan"));
    let mut mor_map: Vec<Mor> = objects.iter().map(|&o| e.id(o)).collect();
    mor_map.extend(arrows);
    let diagram = FunctorRep { source: shape, target: e.clone(), obj_map: objects.to_vec(), mor_map };
    Cone::new(name, apex, diagram, legs.to_vec())
}

/// Sketch of preorders on the opposite of the simplex category truncated at
/// `[2]`: objects `X`, `R`, `T`; the monomorphism cone of `(r1, r2)` and the
/// fiber product `T = R x_X R` along `r2`, `r1`.
pub fn preorder_sketch() -> Sketch {
    let e = named_simplex(2, &["X", "R", "T"]);
    let (x, r, t) = (0, 1, 2);
    let (r1, r2) = (mor(&e, "r1"), mor(&e, "r2"));
    let relation = monomorphism_cone(&e, "relation", &[r1, r2]).expect("common source");
    let middle = mor(&e, "TX_1");
    let transitivity =
        pullback_cone(&e, "composable", t, [r, r, x], [r2, r1], [mor(&e, "pr1"), mor(&e, "pr2"), middle]);
    Sketch::new("preorder", e, vec![relation, transitivity], Orientation::Limit).expect("preorder sketch")
}

/// Sketch of small categories on the simplex category truncated at `[3]`:
/// `T = R x_X R` (composable pairs) and `Q = T x_R T` (composable triples).
pub fn category_sketch() -> Sketch {
    let e = named_simplex(3, &["X", "R", "T", "Q"]);
    let (x, r, t, q) = (0, 1, 2, 3);
    let (r1, r2) = (mor(&e, "r1"), mor(&e, "r2"));
    let (pr1, pr2) = (mor(&e, "pr1"), mor(&e, "pr2"));
    let pairs = pullback_cone(&e, "composable", t, [r, r, x], [r2, r1], [pr1, pr2, mor(&e, "TX_1")]);
    let triples = pullback_cone(
        &e,
        "triples",
        q,
        [t, t, r],
        [pr2, pr1],
        [mor(&e, "QT_012"), mor(&e, "QT_123"), mor(&e, "QR_12")],
    );
    Sketch::new("category", e, vec![pairs, triples], Orientation::Limit).expect("category sketch")
}

/// The relation `(M(r1), M(r2))` of a preorder-sketch model on `M(X)`.
pub fn model_relation(s: &Sketch, m: &SetModel) -> Preorder {
    let (r1, r2) = (mor(&s.ambient, "r1"), mor(&s.ambient, "r2"));
    let x = s.ambient.object_by_name("X").expect("object X");
    let r = s.ambient.object_by_name("R").expect("object R");
    let pairs: Vec<(usize, usize)> = (0..m.sizes()[r]).map(|e| (m.map(r1)[e], m.map(r2)[e])).collect();
    Preorder::from_pairs(m.sizes()[x], &pairs)
}

/// Positions of `[b]`'s vertices under the monotone map behind `f : [a] -> [b]`
/// of a truncated simplex-op category whose object `0` is `[0]`.
pub fn vertex_values(e: &FinCategory, f: Mor) -> Vec<usize> {
    let (a, b) = (e.src(f), e.tgt(f));
    let from_a = e.hom(a, 0);
    e.hom(b, 0).iter().map(|&v| from_a.iter().position(|&w| w == e.comp(v, f)).expect("vertex")).collect()
}

/// A quotient `q : X + X -> R`; tagged element `(t, x)` sits at `t * carrier + x`.
/// Classes are numbered by first occurrence, so equal structures over
/// `X + X` have equal tables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CopreorderStruct {
    pub carrier: usize,
    pub quotient: Func,
    pub classes: usize,
}

impl CopreorderStruct {
    pub fn from_quotient(carrier: usize, quotient: &[usize]) -> Self {
        let mut relabel = std::collections::HashMap::new();
        let quotient: Func = quotient
            .iter()
            .map(|c| {
                let next = relabel.len();
                *relabel.entry(*c).or_insert(next)
            })
            .collect();
        CopreorderStruct { carrier, classes: relabel.len(), quotient }
    }
}

/// `(x, t) ~ (x', t')` iff `x = x'` and (`t = t'` or `x` in `subset`).
pub fn copreorder_from_subset(carrier: usize, subset: &[usize]) -> Result<CopreorderStruct, CopreorderError> {
    if let Some(&bad) = subset.iter().find(|&&a| a >= carrier) {
        return Err(CopreorderError::NotSubset(bad));
    }
    let q: Func = (0..2 * carrier)
        .map(|i| {
            let (t, x) = (i / carrier.max(1), i % carrier.max(1));
            if subset.contains(&x) {
                x
            } else {
                x + t * carrier
            }
        })
        .collect();
    Ok(CopreorderStruct::from_quotient(carrier, &q))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CopreorderWitness {
    /// Map `X -> T` (as a base-`|T|` code) not related to itself.
    Reflexivity { test_size: usize, map: usize },
    /// `(f, g)` and `(g, h)` related but `(f, h)` not.
    Transitivity { test_size: usize, f: usize, g: usize, h: usize },
}

/// The relation `{(g q_0, g q_1) : g : R -> T}` on maps `X -> T`, as bit rows.
pub fn induced_relation(c: &CopreorderStruct, test_size: usize) -> Vec<Vec<u64>> {
    let n = c.carrier;
    let t = test_size;
    let maps = t.pow(n as u32);
    let words = maps.div_ceil(64).max(1);
    let mut rows = vec![vec![0u64; words]; maps];
    let code = |f: &dyn Fn(usize) -> usize| -> usize {
        let mut v = 0;
        for x in (0..n).rev() {
            v = v * t + f(x);
        }
        v
    };
    for g in crate::finsetlim::all_functions(c.classes, t) {
        let f0 = code(&|x| g[c.quotient[x]]);
        let f1 = code(&|x| g[c.quotient[n + x]]);
        rows[f0][f1 / 64] |= 1 << (f1 % 64);
    }
    rows
}

fn related(rows: &[Vec<u64>], f: usize, g: usize) -> bool {
    rows[f][g / 64] >> (g % 64) & 1 == 1
}

/// First test set (by size) on which the induced relation fails to be a preorder.
pub fn copreorder_failure(c: &CopreorderStruct, test_bound: usize) -> Option<CopreorderWitness> {
    for t in 0..=test_bound {
        let rows = induced_relation(c, t);
        if let Some(f) = (0..rows.len()).find(|&f| !related(&rows, f, f)) {
            return Some(CopreorderWitness::Reflexivity { test_size: t, map: f });
        }
        for f in 0..rows.len() {
            for g in 0..rows.len() {
                if !related(&rows, f, g) {
                    continue;
                }
                let missing = rows[g].iter().zip(&rows[f]).position(|(rg, rf)| rg & !rf != 0);
                if let Some(w) = missing {
                    let bits = rows[g][w] & !rows[f][w];
                    let h = w * 64 + bits.trailing_zeros() as usize;
                    return Some(CopreorderWitness::Transitivity { test_size: t, f, g, h });
                }
            }
        }
    }
    None
}

pub fn copreorder_check(c: &CopreorderStruct, test_bound: usize) -> bool {
    copreorder_failure(c, test_bound).is_none()
}

/// All quotients of `X + X` passing [`copreorder_check`], in the order of
/// their restricted growth strings.
pub fn classify_copreorders(carrier: usize, test_bound: usize, exec: Exec) -> Vec<CopreorderStruct> {
    let all = partitions(2 * carrier);
    exec.map(&all, |p| {
        let c = CopreorderStruct::from_quotient(carrier, p);
        copreorder_check(&c, test_bound).then_some(c)
    })
    .into_iter()
    .flatten()
    .collect()
}

/// The unique `A` with `copreorder_from_subset(X, A) = c`, if any.
pub fn matching_subset(c: &CopreorderStruct) -> Option<Vec<usize>> {
    let n = c.carrier;
    let subset: Vec<usize> = (0..n).filter(|&x| c.quotient[x] == c.quotient[n + x]).collect();
    (copreorder_from_subset(n, &subset).ok()? == *c).then_some(subset)
}

/// `(P x X) / ((p, a) = (p', a)` for `p ~ p'`, `a` in `subset`), where `~` is
/// generated by the order. Returns the class of each `(p, x)` at `p * |X| + x`.
pub fn copreorder_functor(carrier: usize, subset: &[usize], p: &Preorder) -> Result<(usize, Func), CopreorderError> {
    if let Some(&bad) = subset.iter().find(|&&a| a >= carrier) {
        return Err(CopreorderError::NotSubset(bad));
    }
    let comp = p.components();
    let raw: Func = (0..p.n * carrier)
        .map(|i| {
            let (q, x) = (i / carrier, i % carrier);
            if subset.contains(&x) {
                comp[q] * carrier + x
            } else {
                i
            }
        })
        .collect();
    let c = CopreorderStruct::from_quotient(carrier, &raw);
    Ok((c.classes, c.quotient))
}

/// The model of the dual preorder sketch attached to `(X, A)`:
/// `N([k]) = X x [k]` with the fibres over `A` collapsed.
pub fn copreorder_dual_model(s: &Sketch, carrier: usize, subset: &[usize]) -> Result<FinSetDiagram, CopreorderError> {
    if let Some(&bad) = subset.iter().find(|&&a| a >= carrier) {
        return Err(CopreorderError::NotSubset(bad));
    }
    let e = &*s.ambient;
    let points = |o: Obj| e.hom(o, 0).len();
    let elements: Vec<Vec<(usize, usize)>> = (0..e.num_objects())
        .map(|o| {
            (0..carrier)
                .flat_map(|x| {
                    let k = if subset.contains(&x) { 1 } else { points(o) };
                    (0..k).map(move |i| (x, i))
                })
                .collect()
        })
        .collect();
    let index = |o: Obj, x: usize, i: usize| -> usize {
        let i = if subset.contains(&x) { 0 } else { i };
        elements[o].iter().position(|&p| p == (x, i)).expect("element")
    };
    let maps = (0..e.num_morphisms())
        .map(|f| {
            // in the opposite category f runs tgt -> src and acts by its vertex map
            let phi = vertex_values(e, f);
            let (a, b) = (e.src(f), e.tgt(f));
            elements[b].iter().map(|&(x, i)| index(a, x, phi[i])).collect()
        })
        .collect();
    Ok(FinSetDiagram { shape: Arc::new(opposite(e)), sets: elements.iter().map(Vec::len).collect(), maps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::validate_category;
    use crate::finsetlim::all_functions;
    use crate::order::{all_preorders, monotone_maps};
    use crate::sketch::*;

    #[test]
    fn preorder_ambient_shape() {
        let s = preorder_sketch();
        let e = &*s.ambient;
        assert!(validate_category(e).is_ok());
        assert!(validate_category(&opposite(e)).is_ok());
        assert_eq!(e.num_morphisms(), 31);
        let (x, r, t) = (0, 1, 2);
        assert_eq!(e.hom(r, r).len(), 3);
        assert_eq!(e.hom(t, r).len(), 6);
        assert_eq!(e.hom(t, x).len(), 3);
        assert_eq!(e.hom(x, t).len(), 1);
        // relations of the generators
        let id = |o| e.id(o);
        let m = |n| mor(e, n);
        assert_eq!(e.comp(m("r1"), m("i")), id(x));
        assert_eq!(e.comp(m("r2"), m("i")), id(x));
        assert_eq!(e.comp(m("r1"), m("c")), e.comp(m("r1"), m("pr1")));
        assert_eq!(e.comp(m("r2"), m("c")), e.comp(m("r2"), m("pr2")));
    }

    #[test]
    fn built_in_sketches_are_realized() {
        assert!(is_realized(&preorder_sketch()));
        assert!(is_realized(&category_sketch()));
        assert!(validate_category(&category_sketch().ambient).is_ok());
    }

    #[test]
    fn broken_cone_is_not_realized() {
        let s = preorder_sketch();
        let e = s.ambient.clone();
        let shape = Arc::new(FinCategory::discrete(&["0", "1"]));
        let diagram =
            FunctorRep { source: shape, target: e.clone(), obj_map: vec![0, 0], mor_map: vec![e.id(0), e.id(0)] };
        let mut cones = s.cones.clone();
        cones.push(Cone::new("square", 0, diagram, vec![e.id(0), e.id(0)]));
        let broken = Sketch::new("broken", e, cones, Orientation::Limit).unwrap();
        let w = realization_failure(&broken).unwrap();
        assert_eq!(w.cone, "square");
    }

    #[test]
    fn preorder_model_counts_match_relation_oracle() {
        let s = preorder_sketch();
        for k in 0..=3 {
            let ms = enumerate_models(&s, &ModelBounds::exact(k), Exec::default()).unwrap();
            assert_eq!(ms.len(), all_preorders(k).len(), "size {k}");
            let mut rels: Vec<Preorder> = ms.iter().map(|m| model_relation(&s, m)).collect();
            rels.sort();
            let mut oracle = all_preorders(k);
            oracle.sort();
            assert_eq!(rels, oracle);
            for m in &ms {
                assert!(is_model(&s, &m.functor).unwrap());
            }
        }
        let iso = enumerate_models_up_to_iso(&s, &ModelBounds::exact(3), Exec::default()).unwrap();
        assert_eq!(iso.len(), 9);
    }

    #[test]
    fn model_morphisms_are_monotone_maps() {
        let s = preorder_sketch();
        let models: Vec<SetModel> =
            (1..=3).flat_map(|k| enumerate_models(&s, &ModelBounds::exact(k), Exec::default()).unwrap()).collect();
        for m in models.iter().step_by(3) {
            for n in &models {
                let (p, q) = (model_relation(&s, m), model_relation(&s, n));
                assert_eq!(model_morphisms(m, n).unwrap().len(), monotone_maps(&p, &q).len());
            }
        }
    }

    #[test]
    fn discrete_to_chain_has_four_morphisms() {
        let s = preorder_sketch();
        let ms = enumerate_models(&s, &ModelBounds::exact(2), Exec::default()).unwrap();
        let find = |p: Preorder| ms.iter().find(|m| model_relation(&s, m) == p).unwrap();
        let d = find(Preorder::discrete(2));
        let c = find(Preorder::chain(2));
        assert_eq!(model_morphisms(d, c).unwrap().len(), 4);
    }

    #[test]
    fn yoneda_sizes() {
        let s = preorder_sketch();
        assert_eq!(yoneda_model(&s, 0).unwrap().sizes(), &[1, 1, 1]);
        assert_eq!(yoneda_model(&s, 1).unwrap().sizes(), &[2, 3, 4]);
        assert_eq!(model_relation(&s, &yoneda_model(&s, 0).unwrap()), Preorder::indiscrete(1));
        assert_eq!(model_relation(&s, &yoneda_model(&s, 1).unwrap()), Preorder::chain(2));
        let el = category_of_elements(&yoneda_model(&s, 1).unwrap().functor, &[0]).unwrap();
        assert_eq!(el.category.num_objects(), 2);
        assert_eq!(el.category.num_morphisms(), 2);
    }

    #[test]
    fn full_relation_with_plain_product_is_not_a_model() {
        let s = preorder_sketch();
        let e = &s.ambient;
        // M(X) = 2, M(R) = all pairs, M(T) = M(R) x M(R) with coordinate legs
        let pairs: Vec<(usize, usize)> = (0..4).map(|k| (k / 2, k % 2)).collect();
        let quads: Vec<(usize, usize)> = (0..16).map(|k| (k / 4, k % 4)).collect();
        let sets = vec![2, 4, 16];
        let elem = |o: Obj, vertices: &[usize]| -> usize {
            match o {
                0 => vertices[0],
                1 => vertices[0] * 2 + vertices[1],
                _ => (vertices[0] * 2 + vertices[1]) * 4 + vertices[1] * 2 + vertices[2],
            }
        };
        let verts = |o: Obj, k: usize| -> Vec<usize> {
            match o {
                0 => vec![k],
                1 => vec![pairs[k].0, pairs[k].1],
                _ => vec![pairs[quads[k].0].0, pairs[quads[k].0].1, pairs[quads[k].1].1],
            }
        };
        let maps = (0..e.num_morphisms())
            .map(|f| {
                let phi = vertex_values(e, f);
                let (a, b) = (e.src(f), e.tgt(f));
                (0..sets[a])
                    .map(|k| {
                        let v = verts(a, k);
                        elem(b, &phi.iter().map(|&i| v[i]).collect::<Vec<_>>())
                    })
                    .collect()
            })
            .collect();
        let d = FinSetDiagram { shape: e.clone(), sets, maps };
        assert!(!is_model(&s, &d).unwrap());
    }

    #[test]
    fn category_sketch_counts_monoids() {
        let s = category_sketch();
        let bounds = ModelBounds::exact(0).with(0, vec![1]).with(1, vec![2]);
        let labeled = enumerate_models(&s, &bounds, Exec::default()).unwrap();
        let oracle = all_functions(4, 2)
            .filter(|t| {
                let mul = |a: usize, b: usize| t[a * 2 + b];
                let assoc = (0..8).all(|k| {
                    let (a, b, c) = (k / 4, k / 2 % 2, k % 2);
                    mul(mul(a, b), c) == mul(a, mul(b, c))
                });
                let unit = (0..2).any(|u| (0..2).all(|a| mul(u, a) == a && mul(a, u) == a));
                assoc && unit
            })
            .count();
        assert_eq!(labeled.len(), oracle);
        let iso = enumerate_models_up_to_iso(&s, &bounds, Exec::default()).unwrap();
        assert_eq!(iso.len(), 2);
        // two objects, identities only
        let bounds = ModelBounds::exact(0).with(0, vec![2]).with(1, vec![2]);
        let ms = enumerate_models_up_to_iso(&s, &bounds, Exec::default()).unwrap();
        let i = mor(&s.ambient, "i");
        let discrete: Vec<_> = ms.iter().filter(|m| crate::finsetlim::is_surjective(m.map(i), 2)).collect();
        assert_eq!(discrete.len(), 1);
    }

    #[test]
    fn copreorder_examples() {
        let full = copreorder_from_subset(2, &[0, 1]).unwrap();
        assert_eq!(full.classes, 2);
        let none = copreorder_from_subset(2, &[]).unwrap();
        assert_eq!(none.classes, 4);
        let half = copreorder_from_subset(2, &[0]).unwrap();
        assert_eq!(half.classes, 3);
        assert_eq!(copreorder_from_subset(2, &[2]), Err(CopreorderError::NotSubset(2)));
        // f <= g iff f(a) = g(a)
        let rows = induced_relation(&half, 3);
        for f in 0..9 {
            for g in 0..9 {
                assert_eq!(related(&rows, f, g), f % 3 == g % 3);
            }
        }
        for n in 0..=3 {
            for mask in 0..1usize << n {
                let a: Vec<usize> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
                let c = copreorder_from_subset(n, &a).unwrap();
                assert_eq!(c.classes, 2 * n - a.len());
                assert!(copreorder_check(&c, 4));
                assert_eq!(matching_subset(&c), Some(a));
            }
        }
    }

    #[test]
    fn crossed_identification_fails_reflexivity() {
        // (0, tag 0) glued to (1, tag 1)
        let c = CopreorderStruct::from_quotient(2, &[0, 1, 2, 0]);
        assert!(matches!(copreorder_failure(&c, 3), Some(CopreorderWitness::Reflexivity { .. })));
    }

    #[test]
    fn classification_counts() {
        for n in 1..=3 {
            let found = classify_copreorders(n, n + 2, Exec::default());
            assert_eq!(found.len(), 1 << n);
            assert!(found.iter().all(|c| matching_subset(c).is_some()));
        }
    }

    #[test]
    fn copreorder_functor_sizes() {
        let chain = Preorder::chain(2);
        assert_eq!(copreorder_functor(2, &[0], &chain).unwrap().0, 3);
        assert_eq!(copreorder_functor(2, &[], &chain).unwrap().0, 4);
        for p in all_preorders(3) {
            for mask in 0..4usize {
                let a: Vec<usize> = (0..2).filter(|x| mask >> x & 1 == 1).collect();
                let comps: std::collections::HashSet<usize> = p.components().into_iter().collect();
                let expected = comps.len() * a.len() + p.n * (2 - a.len());
                assert_eq!(copreorder_functor(2, &a, &p).unwrap().0, expected);
            }
            let disc = Preorder::discrete(3);
            assert_eq!(copreorder_functor(2, &[0, 1], &disc).unwrap().0, 6);
        }
    }

    #[test]
    fn dual_models_are_copreorders() {
        let s = preorder_sketch();
        let dual = dual_sketch(&s);
        let (r1, r2) = (mor(&s.ambient, "r1"), mor(&s.ambient, "r2"));
        for n in 0..=2 {
            for mask in 0..1usize << n {
                let a: Vec<usize> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
                let nm = copreorder_dual_model(&s, n, &a).unwrap();
                assert!(is_model(&dual, &nm).unwrap());
                let q: Func = nm.maps[r1].iter().chain(&nm.maps[r2]).copied().collect();
                assert_eq!(CopreorderStruct::from_quotient(n, &q), copreorder_from_subset(n, &a).unwrap());
            }
        }
    }

    #[test]
    fn tensor_with_representables_and_adjunction() {
        let s = preorder_sketch();
        let ns = [
            copreorder_dual_model(&s, 1, &[]).unwrap(),
            copreorder_dual_model(&s, 2, &[0]).unwrap(),
            copreorder_dual_model(&s, 2, &[0, 1]).unwrap(),
        ];
        for n in &ns {
            for a in 0..3 {
                assert!(representable_tensor_iso(&s, n, a).unwrap());
            }
        }
        let ms = enumerate_models(&s, &ModelBounds::exact(2), Exec::default()).unwrap();
        let tp = tensor_product(&s, &ns[1], &ms[1]).unwrap();
        let checks = verify_tensor_adjunction(&s, &ns[1], &ms[1], &tp, 2, Exec::default()).unwrap();
        assert!(checks.iter().all(|c| c.bijective), "{checks:?}");
    }
}
