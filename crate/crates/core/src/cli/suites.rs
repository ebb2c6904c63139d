//! The verification suites behind `--suite`, each producing a deterministic [`Report`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::parse::{Document, InputError};
use crate::finsetlim::all_functions;
use crate::framedual::{
    caba_morphisms, dual_morphism, is_compatible, open_frame, sierpinski_universal, space_from_presentation,
    two_point_universal, CabaRep,
};
use crate::lawmonad::{
    check_clone, check_monad_laws, comparison_check, monad_from_theory, theory_monad_roundtrip, LawError, TruncClone,
};
use crate::nettop::cotopology::{
    check_cotopology_axioms, check_topological_topology, cotopology_rep, tt_from_cotopology, CotopologyError,
    TopologicalTopology,
};
use crate::nettop::fragment::{model_failures, model_from_space, space_from_model, top_sketch};
use crate::nettop::{
    all_directed_sets, all_topologies, all_topologies_brute, check_kelley_axioms, continuity_via_nets, nets_over,
    p_infinity, topology_from_convergence, ConvergenceOracle, DirectedSet, FinTopSpace, KelleyBounds, Net, Rule,
};
use crate::order::{all_preorders, Preorder};
use crate::par::Exec;
use crate::sketch::{
    enumerate_models, realization_failure, representable_tensor_iso, tensor_product, verify_tensor_adjunction,
    yoneda_model, Cone, ModelBounds, Orientation, Sketch,
};
use crate::sketchlib::{
    category_sketch, classify_copreorders, copreorder_dual_model, copreorder_from_subset, matching_subset,
    model_relation, preorder_sketch,
};

/// Suite names with one-line descriptions, in run order for `--suite all`.
pub const SUITES: [(&str, &str); 13] = [
    ("preorder-counts", "preorder sketch models per carrier size vs. all preorders"),
    ("realized", "built-in sketches are realized; a broken cone is caught"),
    ("kelley-reconstruction", "topology recovered from convergence of small nets"),
    ("kelley", "Kelley axioms on topological oracles; mutants fail"),
    ("continuity", "net continuity agrees with open-preimage continuity"),
    ("p-infinity", "continuous maps out of P+inf vs. convergent (net, limit) pairs"),
    ("copreorders", "classification of copreorder structures"),
    ("tensor", "tensor with representables and the tensor adjunction"),
    ("frame-duality", "continuous maps vs. compatible CABA morphisms; frame round trip"),
    ("universal", "Sierpinski space and the two-point space as universal objects"),
    ("cotopology", "topological topologies vs. cotopologies, both round trips"),
    ("top-sketch", "truncated sketch of Top: models of spaces and back"),
    ("monad", "theories, monads, algebras, comparison and Kleisli round trips"),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error("unknown suite `{0}` (see --list)")]
    UnknownSuite(String),
    #[error("--{flag} {value} exceeds the resource ceiling {ceiling}")]
    ResourceGuard { flag: &'static str, value: usize, ceiling: usize },
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Internal(String),
}

fn internal(e: impl std::fmt::Display) -> SuiteError {
    SuiteError::Internal(e.to_string())
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub max_space: Option<usize>,
    pub max_directed: Option<usize>,
    pub max_model: Option<usize>,
    pub test_bound: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub max: Option<usize>,
    pub ceiling: usize,
    pub exec: Exec,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_space: None,
            max_directed: None,
            max_model: None,
            test_bound: None,
            sizes: None,
            max: None,
            ceiling: 4,
            exec: Exec::default(),
        }
    }
}

impl SuiteOptions {
    fn guard(&self, flag: &'static str, value: usize, slack: usize) -> Result<usize, SuiteError> {
        if value > self.ceiling + slack {
            Err(SuiteError::ResourceGuard { flag, value, ceiling: self.ceiling + slack })
        } else {
            Ok(value)
        }
    }

    fn space(&self, default: usize) -> Result<usize, SuiteError> {
        self.guard("max-space", self.max_space.unwrap_or(default), 0)
    }

    fn directed(&self, default: usize) -> Result<usize, SuiteError> {
        self.guard("max-directed", self.max_directed.unwrap_or(default), 0)
    }

    fn model(&self, default: usize) -> Result<usize, SuiteError> {
        self.guard("max-model", self.max_model.unwrap_or(default), 0)
    }

    fn max(&self, default: usize) -> Result<usize, SuiteError> {
        self.guard("max", self.max.unwrap_or(default), 0)
    }

    /// Test sets are two larger than carriers by default, so the guard allows that slack.
    fn test_bound(&self, default: usize) -> Result<usize, SuiteError> {
        self.guard("test-bound", self.test_bound.unwrap_or(default), 2)
    }

    fn sizes(&self, default: &[usize]) -> Result<Vec<usize>, SuiteError> {
        let sizes = self.sizes.clone().unwrap_or_else(|| default.to_vec());
        for &s in &sizes {
            self.guard("sizes", s, 0)?;
        }
        Ok(sizes)
    }
}

/// One verdict inside a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub bounds: BTreeMap<String, usize>,
    pub detail: String,
    pub witness: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub passed: bool,
    pub bounds: BTreeMap<String, usize>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let bounds: Vec<String> = self.bounds.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            out,
            "suite {}: {} ({} checks; {})",
            self.suite,
            verdict(self.passed),
            self.checks.len(),
            bounds.join(", ")
        );
        for c in &self.checks {
            let _ = writeln!(out, "  {} {}: {}", verdict(c.passed), c.name, c.detail);
            if let Some(w) = &c.witness {
                let _ = writeln!(out, "      witness: {w}");
            }
        }
        out
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn verdict(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

struct Builder {
    suite: String,
    bounds: BTreeMap<String, usize>,
    checks: Vec<Check>,
}

impl Builder {
    fn new(suite: &str) -> Self {
        Builder { suite: suite.into(), bounds: BTreeMap::new(), checks: Vec::new() }
    }

    fn bound(&mut self, k: &str, v: usize) -> &mut Self {
        self.bounds.insert(k.into(), v);
        self
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>, witness: Option<Value>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            bounds: self.bounds.clone(),
            detail: detail.into(),
            witness,
        });
    }

    fn finish(mut self) -> Report {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        Report {
            passed: self.checks.iter().all(|c| c.passed),
            suite: self.suite,
            bounds: self.bounds,
            checks: self.checks,
        }
    }
}

/// Runs a named suite. `input`, when given, adds checks on its blocks for the
/// suites that accept them (`realized`, `kelley`, `kelley-reconstruction`, `monad`).
pub fn run_suite(name: &str, opts: &SuiteOptions, input: Option<&Document>) -> Result<Report, SuiteError> {
    let mut b = Builder::new(name);
    match name {
        "preorder-counts" => preorder_counts(&mut b, opts)?,
        "realized" => realized(&mut b, input)?,
        "kelley-reconstruction" => kelley_reconstruction(&mut b, opts, input)?,
        "kelley" => kelley(&mut b, opts, input)?,
        "continuity" => continuity(&mut b, opts)?,
        "p-infinity" => p_infinity_suite(&mut b, opts)?,
        "copreorders" => copreorders(&mut b, opts)?,
        "tensor" => tensor(&mut b, opts)?,
        "frame-duality" => frame_duality(&mut b, opts)?,
        "universal" => universal(&mut b, opts)?,
        "cotopology" => cotopology(&mut b, opts)?,
        "top-sketch" => top_sketch_suite(&mut b, opts)?,
        "monad" => monad(&mut b, opts, input)?,
        _ => return Err(SuiteError::UnknownSuite(name.into())),
    }
    Ok(b.finish())
}

fn preorder_counts(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let sizes = opts.sizes(&[1, 2, 3])?;
    b.bound("max-size", sizes.iter().copied().max().unwrap_or(0));
    let s = preorder_sketch();
    for k in sizes {
        let models = enumerate_models(&s, &ModelBounds::exact(k), opts.exec).map_err(internal)?;
        let mut rels: Vec<Preorder> = models.iter().map(|m| model_relation(&s, m)).collect();
        rels.sort();
        let mut oracle = all_preorders(k);
        oracle.sort();
        b.check(
            format!("models/size-{k}"),
            rels == oracle,
            format!("{} models, {} reflexive transitive relations", models.len(), oracle.len()),
            None,
        );
    }
    Ok(())
}

/// The preorder sketch plus a cone presenting `X` as the product `X x X`.
pub fn broken_preorder_sketch() -> Sketch {
    let s = preorder_sketch();
    let e = s.ambient.clone();
    let shape = Arc::new(crate::fincat::FinCategory::discrete(&["0", "1"]));
    let diagram = crate::fincat::FunctorRep {
        source: shape,
        target: e.clone(),
        obj_map: vec![0, 0],
        mor_map: vec![e.id(0), e.id(0)],
    };
    let mut cones = s.cones.clone();
    cones.push(Cone::new("square", 0, diagram, vec![e.id(0), e.id(0)]));
    Sketch::new("preorder+square", e, cones, Orientation::Limit).expect("cone commutes")
}

fn realized(b: &mut Builder, input: Option<&Document>) -> Result<(), SuiteError> {
    for s in [preorder_sketch(), category_sketch()] {
        let w = realization_failure(&s);
        b.check(format!("sketch/{}", s.name), w.is_none(), format!("{} cones", s.cones.len()), w.map(|w| json!(w)));
    }
    let broken = broken_preorder_sketch();
    let w = realization_failure(&broken);
    let caught = w.as_ref().is_some_and(|w| w.cone == "square");
    b.check("sketch/broken-cone", caught, "extra product cone X = X x X must be rejected", w.map(|w| json!(w)));
    if let Some(doc) = input {
        for name in doc.names("cones") {
            let s = doc.sketch(Some(&name))?;
            let w = realization_failure(&s);
            b.check(format!("input/{name}"), w.is_none(), format!("{} cones", s.cones.len()), w.map(|w| json!(w)));
        }
    }
    Ok(())
}

fn kelley_reconstruction(b: &mut Builder, opts: &SuiteOptions, input: Option<&Document>) -> Result<(), SuiteError> {
    let max = opts.space(4)?;
    let directed = opts.directed(2)?;
    b.bound("max-space", max).bound("max-directed", directed);
    for n in 0..=max {
        let spaces = all_topologies(n);
        let brute = all_topologies_brute(n);
        b.check(
            format!("topologies/n={n}"),
            brute == spaces,
            format!("{} topologies from preorders, {} by brute force", spaces.len(), brute.len()),
            None,
        );
        let results: Vec<Option<FinTopSpace>> = opts.exec.map(&spaces, |t| {
            let back = topology_from_convergence(&ConvergenceOracle::of_space(t, directed)).ok();
            (back.as_ref() != Some(t)).then(|| t.clone())
        });
        let bad = results.into_iter().flatten().next();
        b.check(
            format!("reconstruct/n={n}"),
            bad.is_none(),
            format!("{} topologies recovered exactly", spaces.len()),
            bad.map(|t| json!(t)),
        );
    }
    if let Some(doc) = input {
        for name in doc.names("space") {
            let t = doc.space(Some(&name))?;
            let back = topology_from_convergence(&ConvergenceOracle::of_space(&t, directed)).map_err(internal)?;
            b.check(format!("input/{name}"), back == t, format!("{t}"), None);
        }
    }
    Ok(())
}

/// Hand-made convergence relations that violate one Kelley axiom each,
/// with the bound at which the violation is visible.
pub fn kelley_mutants() -> Vec<(&'static str, &'static str, ConvergenceOracle, KelleyBounds)> {
    let sierpinski = FinTopSpace::sierpinski();
    let s1 = sierpinski.clone();
    // the constant net at the open point does not converge
    let constant: Rule = Arc::new(move |x: &Net, p: usize| {
        crate::nettop::converges(&s1, x, p).unwrap_or(false) && !(p == 1 && x.values.iter().all(|&v| v == 1))
    });
    // (a, b) over the 2-chain also converges to a in the discrete space
    let d = FinTopSpace::discrete(2);
    let odd = Net::new(DirectedSet::chain(2), vec![0, 1]).canonical();
    let subnet: Rule = Arc::new(move |x: &Net, p: usize| {
        crate::nettop::converges(&d, x, p).unwrap_or(false) || (p == 0 && x.canonical() == odd)
    });
    // convergence forgets every net indexed by more than three points
    let s2 = sierpinski;
    let capped: Rule =
        Arc::new(move |x: &Net, p: usize| x.index.size() <= 3 && crate::nettop::converges(&s2, x, p).unwrap_or(false));
    vec![
        ("constant-nets", "constant nets", ConvergenceOracle::from_rule(2, 2, constant), KelleyBounds::new(2)),
        ("subnets", "subnets", ConvergenceOracle::from_rule(2, 2, subnet), KelleyBounds::new(2)),
        ("iterations", "iterations", ConvergenceOracle::from_rule(2, 3, capped), KelleyBounds::new(3)),
    ]
}

fn kelley(b: &mut Builder, opts: &SuiteOptions, input: Option<&Document>) -> Result<(), SuiteError> {
    let max = opts.space(3)?;
    let directed = opts.directed(3)?;
    b.bound("max-space", max).bound("max-directed", directed);
    let bounds = KelleyBounds::new(directed);
    for n in 0..=max {
        let spaces = all_topologies(n);
        let reports = opts
            .exec
            .map(&spaces, |t| check_kelley_axioms(&ConvergenceOracle::of_space(t, directed), bounds, Exec::Sequential));
        let failed = spaces.iter().zip(&reports).find(|(_, r)| !r.all_passed());
        let cases: usize = reports.iter().flat_map(|r| r.axioms.iter().map(|a| a.cases)).sum();
        b.check(
            format!("axioms/n={n}"),
            failed.is_none(),
            format!("{} topologies, {cases} axiom instances", spaces.len()),
            failed.map(|(t, r)| json!({ "space": t, "witness": r.first_witness() })),
        );
    }
    for (name, axiom, oracle, bounds) in kelley_mutants() {
        let r = check_kelley_axioms(&oracle, bounds, opts.exec);
        let hit = r.axioms.iter().find(|a| a.axiom == axiom);
        let witness = hit.and_then(|a| a.witness.clone());
        let replayed = witness.as_ref().is_some_and(|w| w.replay(&oracle, bounds));
        b.check(
            format!("mutant/{name}"),
            replayed,
            format!("{axiom} axiom fails and the witness replays"),
            witness.map(|w| json!(w)),
        );
    }
    if let Some(doc) = input {
        for name in doc.names("convergence") {
            let o = doc.convergence(Some(&name))?;
            let kb = KelleyBounds::new(o.bound);
            let r = check_kelley_axioms(&o, kb, opts.exec);
            let detail = match topology_from_convergence(&o) {
                Ok(t) => format!("induced topology {t}"),
                Err(e) => e.to_string(),
            };
            b.check(format!("input/{name}"), r.all_passed(), detail, r.first_witness().map(|w| json!(w)));
        }
    }
    Ok(())
}

fn spaces_up_to(n: usize) -> Vec<FinTopSpace> {
    (0..=n).flat_map(all_topologies).collect()
}

fn continuity(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let max = opts.space(3)?;
    let directed = opts.directed(2)?;
    b.bound("max-space", max).bound("max-directed", directed);
    for nx in 0..=max {
        for ny in 0..=max {
            let xs = all_topologies(nx);
            let ys = all_topologies(ny);
            let pairs: Vec<(usize, usize)> = (0..xs.len()).flat_map(|i| (0..ys.len()).map(move |j| (i, j))).collect();
            let results = opts.exec.map(&pairs, |&(i, j)| {
                let mut count = 0;
                for f in all_functions(nx, ny) {
                    let nets = continuity_via_nets(&xs[i], &ys[j], &f, directed).expect("valid map");
                    if nets != xs[i].is_continuous(&f, &ys[j]) {
                        return (count, Some(json!({ "x": xs[i], "y": ys[j], "map": f })));
                    }
                    count += 1;
                }
                (count, None)
            });
            let total: usize = results.iter().map(|r| r.0).sum();
            let bad = results.into_iter().find_map(|r| r.1);
            b.check(format!("maps/{nx}->{ny}"), bad.is_none(), format!("{total} maps agree"), bad);
        }
    }
    Ok(())
}

fn p_infinity_suite(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let directed = opts.directed(3)?;
    let max = opts.space(3)?;
    b.bound("max-directed", directed).bound("max-space", max);
    let spaces = spaces_up_to(max);
    for (k, p) in all_directed_sets(directed).iter().enumerate() {
        let pi = p_infinity(p);
        let rows = opts.exec.map(&spaces, |t| {
            let maps = pi.continuous_maps(t).len();
            let pairs: usize = nets_over(p, t.n)
                .map(|x| (0..t.n).filter(|&s| crate::nettop::converges(t, &x, s).unwrap_or(false)).count())
                .sum();
            (maps, pairs)
        });
        let bad = spaces.iter().zip(&rows).find(|(_, r)| r.0 != r.1);
        let total: usize = rows.iter().map(|r| r.0).sum();
        b.check(
            format!("adjunction/P{k}-size{}", p.size()),
            bad.is_none(),
            format!("{} spaces, {total} maps = (net, limit) pairs", spaces.len()),
            bad.map(|(t, r)| json!({ "space": t, "maps": r.0, "pairs": r.1 })),
        );
    }
    Ok(())
}

fn copreorders(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let max = opts.max(3)?;
    b.bound("max", max);
    for n in 1..=max {
        let test = opts.test_bound(n + 2)?;
        let found = classify_copreorders(n, test, opts.exec);
        let subsets: Vec<Option<Vec<usize>>> = found.iter().map(matching_subset).collect();
        let distinct: BTreeSet<&Vec<usize>> = subsets.iter().flatten().collect();
        let exact = found
            .iter()
            .zip(&subsets)
            .all(|(c, a)| a.as_ref().is_some_and(|a| copreorder_from_subset(n, a).is_ok_and(|d| &d == c)));
        let ok = found.len() == 1 << n && distinct.len() == found.len() && exact;
        b.check(
            format!("classify/n={n}"),
            ok,
            format!("{} structures (expected {}), test bound {test}, each from a unique subset", found.len(), 1 << n),
            None,
        );
    }
    Ok(())
}

fn tensor(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let max = opts.max(3)?;
    b.bound("max-test-set", max);
    let s = preorder_sketch();
    let ns = [(1, vec![]), (2, vec![0]), (2, vec![0, 1])];
    let models = enumerate_models(&s, &ModelBounds::exact(2), opts.exec).map_err(internal)?;
    for (k, (carrier, subset)) in ns.iter().enumerate() {
        let n = copreorder_dual_model(&s, *carrier, subset).map_err(internal)?;
        for a in 0..s.ambient.num_objects() {
            let ok = representable_tensor_iso(&s, &n, a).map_err(internal)?;
            b.check(
                format!("iso/N{k}/{}", s.ambient.object_name(a)),
                ok,
                format!("N = copreorder on {carrier} points with A = {subset:?}"),
                None,
            );
        }
        let mut ms: Vec<(String, crate::sketch::SetModel)> = (0..s.ambient.num_objects())
            .map(|a| (format!("Y{}", s.ambient.object_name(a)), yoneda_model(&s, a).expect("realized")))
            .collect();
        ms.extend(models.iter().enumerate().map(|(j, m)| (format!("M{j}"), m.clone())));
        for (label, m) in &ms {
            let tp = tensor_product(&s, &n, m).map_err(internal)?;
            let checks = verify_tensor_adjunction(&s, &n, m, &tp, max, opts.exec).map_err(internal)?;
            let bad = checks.iter().find(|c| !c.bijective);
            let counts: Vec<String> = checks.iter().map(|c| format!("{}:{}", c.test_size, c.hom_count)).collect();
            b.check(
                format!("adjunction/N{k}/{label}"),
                bad.is_none(),
                format!("|N (x) M| = {}, hom counts {}", tp.carrier(), counts.join(" ")),
                bad.map(|c| json!(c)),
            );
        }
    }
    Ok(())
}

fn frame_duality(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let max = opts.space(3)?;
    b.bound("max-space", max).bound("round-trip", max + 1);
    for nx in 0..=max {
        for ny in 0..=max {
            let xs = all_topologies(nx);
            let ys = all_topologies(ny);
            let cabas = caba_morphisms(CabaRep { atoms: ny }, CabaRep { atoms: nx });
            let pairs: Vec<(usize, usize)> = (0..xs.len()).flat_map(|i| (0..ys.len()).map(move |j| (i, j))).collect();
            let rows = opts.exec.map(&pairs, |&(i, j)| {
                let (x, y) = (&xs[i], &ys[j]);
                let maps = x.continuous_maps(y);
                let compatible: Vec<&Vec<u64>> = cabas.iter().filter(|g| is_compatible(g, x, y)).collect();
                let duals: HashSet<Vec<u64>> =
                    maps.iter().map(|f| dual_morphism(f, x, y).expect("continuous")).collect();
                let onto = compatible.iter().all(|g| duals.contains(*g));
                (maps.len(), compatible.len(), onto && duals.len() == maps.len())
            });
            let bad = pairs.iter().zip(&rows).find(|(_, r)| r.0 != r.1 || !r.2);
            let total: usize = rows.iter().map(|r| r.0).sum();
            b.check(
                format!("maps/{nx}x{ny}"),
                bad.is_none(),
                format!("{total} continuous maps = compatible CABA morphisms"),
                bad.map(|(&(i, j), r)| json!({ "x": xs[i], "y": ys[j], "maps": r.0, "caba": r.1 })),
            );
        }
    }
    for n in 0..=max + 1 {
        let spaces = all_topologies(n);
        let bad = spaces.iter().find(|t| space_from_presentation(&open_frame(t)).ok().as_ref() != Some(*t));
        b.check(format!("round-trip/n={n}"), bad.is_none(), format!("{} spaces", spaces.len()), bad.map(|t| json!(t)));
    }
    Ok(())
}

fn universal(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let max = opts.space(3)?;
    b.bound("max-space", max);
    for (name, r) in [("sierpinski", sierpinski_universal(max)), ("two-point", two_point_universal(max))] {
        b.check(
            format!("universal/{name}"),
            r.passed(),
            format!(
                "{} spaces, {} maps; bijective {}, structure {}, natural {}",
                r.spaces, r.maps, r.bijective, r.structure, r.natural
            ),
            None,
        );
    }
    Ok(())
}

fn cotopology(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let max = opts.space(2)?;
    let directed = opts.directed(3)?;
    b.bound("max-space", max).bound("max-directed", directed);
    for n in 0..=max {
        for (k, x) in all_topologies(n).iter().enumerate() {
            let tts = TopologicalTopology::all_over(x);
            let rows = opts.exec.map(&tts, |tt| -> Result<(bool, bool), String> {
                let finitary = check_topological_topology(tt).finitary;
                match cotopology_rep(tt, directed) {
                    Ok(c) => {
                        let axioms = check_cotopology_axioms(&c).all_passed();
                        let back = tt_from_cotopology(&c).map_err(|e| e.to_string())?;
                        let again = cotopology_rep(&back, directed).map_err(|e| e.to_string())?;
                        Ok((true, finitary && axioms && back == *tt && again == c))
                    }
                    Err(CotopologyError::NotTopological(_)) => Ok((false, !finitary)),
                    Err(e) => Err(e.to_string()),
                }
            });
            let mut accepted = 0;
            let mut bad = None;
            for (tt, r) in tts.iter().zip(rows) {
                let (acc, ok) = r.map_err(SuiteError::Internal)?;
                accepted += acc as usize;
                if !ok && bad.is_none() {
                    bad = Some(json!({ "space": tt.space, "tau": tt.tau }));
                }
            }
            b.check(
                format!("round-trips/n={n}/{k:02}"),
                bad.is_none(),
                format!("{}: {} topologies on O(X), {accepted} topological", x, tts.len()),
                bad,
            );
        }
    }
    Ok(())
}

fn top_sketch_suite(b: &mut Builder, opts: &SuiteOptions) -> Result<(), SuiteError> {
    let max = opts.space(3)?;
    let directed = opts.directed(2)?;
    let cap = 256;
    b.bound("max-space", max).bound("max-directed", directed).bound("family-cap", cap);
    let fr = top_sketch(directed, cap).map_err(internal)?;
    b.check(
        "fragment",
        true,
        format!(
            "{} spaces, {} arrows, {} cocones{}",
            fr.spaces.len(),
            fr.arrows.len(),
            fr.cocones.len(),
            if fr.truncated { " (locality families truncated)" } else { "" }
        ),
        None,
    );
    for n in 0..=max {
        let spaces = all_topologies(n);
        let rows = opts.exec.map(&spaces, |x| {
            let m = model_from_space(x, &fr);
            let failures = model_failures(&m, &fr).map_err(|e| e.to_string())?;
            let back = space_from_model(&m, &fr).map_err(|e| e.to_string())?;
            Ok::<_, String>((failures, back == *x))
        });
        let mut bad = None;
        for (x, r) in spaces.iter().zip(rows) {
            let (failures, same) = r.map_err(SuiteError::Internal)?;
            if (!failures.is_empty() || !same) && bad.is_none() {
                bad = Some(json!({ "space": x, "cocones_not_limits": failures, "round_trip": same }));
            }
        }
        b.check(
            format!("models/n={n}"),
            bad.is_none(),
            format!("{} spaces: cocones become limit cones, round trip exact", spaces.len()),
            bad,
        );
    }
    Ok(())
}

/// Largest `I` whose `T(I)` fits the arity bound, capped at `cap`.
fn alpha_range(t: &TruncClone, cap: usize) -> usize {
    (0..=cap).take_while(|&i| t.size(i) <= t.n).last().unwrap_or(0)
}

fn theory_checks(
    b: &mut Builder,
    t: &TruncClone,
    label: &str,
    model_bound: usize,
    exec: Exec,
) -> Result<(), SuiteError> {
    let law = |e: LawError| SuiteError::Internal(e.to_string());
    let clone = check_clone(t, 2.min(t.n)).map_err(law)?;
    b.check(format!("{label}/clone-laws"), clone.is_none(), format!("arity bound {}", t.n), clone.map(|w| json!(w)));
    let m = monad_from_theory(t);
    let r = check_monad_laws(&m, model_bound.min(t.n)).map_err(law)?;
    let failing = r.laws.iter().find(|l| !l.passed);
    let cases: usize = r.laws.iter().map(|l| l.cases).sum();
    b.check(
        format!("{label}/monad-laws"),
        r.all_passed(),
        format!("sets <= {}, {cases} instances, {} skipped beyond the bound", r.sets_bound, r.skipped.len()),
        failing.map(|l| json!(l)),
    );
    match comparison_check(t, model_bound, exec) {
        Ok(c) => {
            let counts: Vec<String> =
                c.carriers.iter().map(|x| format!("{}:{}/{}", x.carrier, x.models, x.algebras)).collect();
            b.check(
                format!("{label}/comparison"),
                c.passed(),
                format!("carriers <= {model_bound}, models/algebras {}", counts.join(" ")),
                (!c.passed()).then(|| json!(c)),
            );
        }
        Err(LawError::NoModelOracle(_)) => {}
        Err(e) => return Err(law(e)),
    }
    let range = alpha_range(t, 4);
    let rt = theory_monad_roundtrip(t, range).map_err(law)?;
    b.check(
        format!("{label}/kleisli-round-trip"),
        rt.passed(),
        format!(
            "alpha bijective for I <= {range}; unit {}, mu-square {}, H {}",
            rt.alpha_unit, rt.alpha_mu_square, rt.h_iso
        ),
        (!rt.passed()).then(|| json!(rt)),
    );
    Ok(())
}

fn monad(b: &mut Builder, opts: &SuiteOptions, input: Option<&Document>) -> Result<(), SuiteError> {
    let model_bound = opts.model(3)?;
    b.bound("max-model", model_bound);
    let builtins = [TruncClone::trivial(4), TruncClone::pointed(5), TruncClone::semilattice(8)];
    for t in &builtins {
        let label = t.name.clone();
        theory_checks(b, t, &label, model_bound, opts.exec)?;
    }
    if let Some(doc) = input {
        for name in doc.names("theory") {
            let t = doc.theory(Some(&name))?;
            theory_checks(b, &t, &format!("input/{name}"), model_bound.min(2), opts.exec)?;
        }
    }
    Ok(())
}
