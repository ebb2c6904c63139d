use std::sync::Arc;

use proptest::prelude::*;

use sketchlab::cli::parse::parse_space;
use sketchlab::fincat::{hom_set, opposite, product_category, validate_category, FinCategory};
use sketchlab::finsetlim::{colimit, is_colimit_cocone, is_limit_cone, limit, partitions, FinSetDiagram, Func};
use sketchlab::framedual::{open_frame, space_from_presentation};
use sketchlab::lawmonad::{check_monad_laws, comparison_check, monad_from_theory, TruncClone};
use sketchlab::nettop::{continuity_via_nets, is_hausdorff, topology_from_convergence, ConvergenceOracle, FinTopSpace};
use sketchlab::order::all_preorders;
use sketchlab::sketch::{enumerate_models, is_model, yoneda_model, ModelBounds};
use sketchlab::sketchlib::{category_sketch, copreorder_check, preorder_sketch, CopreorderStruct};
use sketchlab::Exec;

/// A topology on at most `max` points, picked uniformly among labeled ones.
fn space(max: usize) -> impl Strategy<Value = FinTopSpace> {
    (0..=max).prop_flat_map(|n| {
        let all = all_preorders(n);
        (0..all.len()).prop_map(move |i| FinTopSpace::from_specialization(&all[i]))
    })
}

fn function(dom: usize, cod: usize) -> impl Strategy<Value = Func> {
    proptest::collection::vec(0..cod.max(1), dom)
}

fn cospan() -> Arc<FinCategory> {
    Arc::new(FinCategory::from_graph(&["a", "b", "c"], &[("f", 0, 2), ("g", 1, 2)]).unwrap())
}

/// A set-valued cospan `A -> C <- B` with sets of size at most 3.
fn cospan_diagram() -> impl Strategy<Value = FinSetDiagram> {
    (0..=3usize, 0..=3usize, 1..=3usize).prop_flat_map(|(a, b, c)| {
        (function(a, c), function(b, c)).prop_map(move |(f, g)| {
            let shape = cospan();
            let sets = vec![a, b, c];
            let maps = (0..shape.num_morphisms())
                .map(|m| match shape.name(m) {
                    "f" => f.clone(),
                    "g" => g.clone(),
                    _ => (0..sets[shape.src(m)]).collect(),
                })
                .collect();
            FinSetDiagram::new(shape, sets, maps).unwrap()
        })
    })
}

/// The pointwise product `D1(c) x D2(d)` over the product shape.
fn product_diagram(d1: &FinSetDiagram, d2: &FinSetDiagram) -> FinSetDiagram {
    let shape = Arc::new(product_category(&d1.shape, &d2.shape));
    let (n2, m2) = (d2.shape.num_objects(), d2.shape.num_morphisms());
    let sets = (0..shape.num_objects()).map(|o| d1.sets[o / n2] * d2.sets[o % n2]).collect();
    let maps = (0..shape.num_morphisms())
        .map(|m| {
            let (f, g) = (m / m2, m % m2);
            let (sf, sg) = (d1.sets[d1.shape.src(f)], d2.sets[d2.shape.src(g)]);
            let tg = d2.sets[d2.shape.tgt(g)];
            (0..sf * sg).map(|x| d1.maps[f][x / sg] * tg + d2.maps[g][x % sg]).collect()
        })
        .collect();
    FinSetDiagram::new(shape, sets, maps).unwrap()
}

fn group_table(m: usize) -> Vec<Vec<usize>> {
    (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect()
}

fn max_table(m: usize) -> Vec<Vec<usize>> {
    (0..m).map(|a| (0..m).map(|b| a.max(b)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thin_categories_validate(t in space(4)) {
        let c = FinCategory::thin(&t.specialization()).unwrap();
        prop_assert!(validate_category(&c).is_ok());
        let op = opposite(&c);
        prop_assert!(validate_category(&op).is_ok());
        prop_assert_eq!(opposite(&op), c.clone());
        let mut total = 0;
        for a in 0..c.num_objects() {
            for b in 0..c.num_objects() {
                total += hom_set(&c, a, b).unwrap().len();
            }
        }
        prop_assert_eq!(total, c.num_morphisms());
    }

    #[test]
    fn computed_limits_and_colimits_verify(d in cospan_diagram()) {
        prop_assert!(is_limit_cone(&limit(&d).cone).unwrap());
        prop_assert!(is_colimit_cocone(&colimit(&d).cocone).unwrap());
    }

    #[test]
    fn limits_commute_with_limits(d1 in cospan_diagram(), d2 in cospan_diagram()) {
        let p = product_diagram(&d1, &d2);
        let l = limit(&p);
        prop_assert!(is_limit_cone(&l.cone).unwrap());
        prop_assert_eq!(l.cone.apex, limit(&d1).cone.apex * limit(&d2).cone.apex);
    }

    #[test]
    fn convergence_determines_topology(t in space(4)) {
        let back = topology_from_convergence(&ConvergenceOracle::of_space(&t, 2)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn hausdorff_iff_discrete(t in space(4)) {
        prop_assert_eq!(is_hausdorff(&t, 2), t.is_discrete());
        prop_assert_eq!(t.is_t2(), t.is_discrete());
    }

    #[test]
    fn net_continuity_matches_preimages(
        (x, y, f) in (space(3), space(3)).prop_flat_map(|(x, y)| {
            let (n, m) = (x.n, y.n);
            (Just(x), Just(y), function(n, m))
        })
    ) {
        prop_assume!(y.n > 0 || x.n == 0);
        prop_assert_eq!(continuity_via_nets(&x, &y, &f, 2).unwrap(), x.is_continuous(&f, &y));
    }

    #[test]
    fn frame_round_trip(t in space(4)) {
        prop_assert_eq!(space_from_presentation(&open_frame(&t)).unwrap(), t);
    }

    #[test]
    fn printed_spaces_parse_back(t in space(4)) {
        let points: Vec<String> = (0..t.n).map(|i| format!("p{i}")).collect();
        let opens: Vec<String> = t.opens.iter().map(|&u| {
            let members: Vec<&str> = (0..t.n).filter(|i| u >> i & 1 == 1).map(|i| points[i].as_str()).collect();
            format!("{{{}}}", members.join(" "))
        }).collect();
        let text = format!("space {{ points: {}; opens: {}; }}", points.join(" "), opens.join(" "));
        prop_assert_eq!(parse_space(&text).unwrap(), t);
    }

    #[test]
    fn copreorder_check_is_monotone_in_the_bound(
        (n, k, b) in (1..=2usize).prop_flat_map(|n| (Just(n), 0..partitions(2 * n).len(), 0..=4usize))
    ) {
        let c = CopreorderStruct::from_quotient(n, &partitions(2 * n)[k]);
        if copreorder_check(&c, b) {
            for smaller in 0..b {
                prop_assert!(copreorder_check(&c, smaller));
            }
        }
    }

    #[test]
    fn monoid_action_monads_are_lawful(m in 1..=2usize, group in any::<bool>()) {
        let table = if group { group_table(m) } else { max_table(m) };
        let t = TruncClone::monoid_action(table, (3 * m).max(4)).unwrap();
        prop_assert!(check_monad_laws(&monad_from_theory(&t), 3).unwrap().all_passed());
        prop_assert!(comparison_check(&t, 3, Exec::Sequential).unwrap().passed());
    }
}

#[test]
fn representables_are_models() {
    for s in [preorder_sketch(), category_sketch()] {
        for a in 0..s.ambient.num_objects() {
            assert!(yoneda_model(&s, a).is_ok(), "{} at {}", s.name, s.ambient.object_name(a));
        }
    }
}

#[test]
fn enumerated_models_pass_the_model_check() {
    let s = preorder_sketch();
    for k in 1..=3 {
        for m in enumerate_models(&s, &ModelBounds::exact(k), Exec::default()).unwrap() {
            assert!(is_model(&s, &m.functor).unwrap());
        }
    }
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let s = preorder_sketch();
    let par = enumerate_models(&s, &ModelBounds::exact(3), Exec::Parallel).unwrap();
    let seq = enumerate_models(&s, &ModelBounds::exact(3), Exec::Sequential).unwrap();
    assert_eq!(par, seq);
}
