//! A finite fragment of the colimit sketch of topological spaces.
//!
//! Objects are finite spaces (discrete spaces, `P + {inf}`, and the colimits
//! `F(P, h)` and `G(P, Q)`), arrows are continuous maps, and distinguished
//! cocones are colimits in spaces. Models in sets are contravariant: a space
//! `X` gives `T -> C(T, X)`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::{all_directed_sets, cofinal_maps, digits, p_infinity, topology_from_convergence};
use super::{ConvergenceOracle, DirectedSet, FinTopSpace, Net, Rule, TopError};
use crate::fincat::{opposite, FinCategory};
use crate::finsetlim::{colimit, compose, is_limit_cone, FinSetDiagram, Func, LimitError, SetCone};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FragmentSpace {
    pub name: String,
    pub space: FinTopSpace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FragmentArrow {
    pub src: usize,
    pub tgt: usize,
    pub map: Func,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoconeKind {
    Coproduct,
    Epimorphism,
    Locality,
    Iteration,
}

/// `objects[j]` is the space at shape object `j`, `arrows[u]` the arrow at
/// shape morphism `u`, `legs[j]` the arrow from `objects[j]` to `apex`.
#[derive(Clone, Debug, Serialize)]
pub struct SpaceCocone {
    pub name: String,
    pub kind: CoconeKind,
    #[serde(skip)]
    pub shape: Arc<FinCategory>,
    pub objects: Vec<usize>,
    pub arrows: Vec<usize>,
    pub apex: usize,
    pub legs: Vec<usize>,
}

/// Where a directed set `P` sits in the fragment.
#[derive(Clone, Debug, Serialize)]
pub struct LimitObject {
    pub index: DirectedSet,
    pub p_infinity: usize,
    /// `P + 1 -> P + {inf}`, the identity on points.
    pub epi: usize,
    /// `1 -> P + 1` at each point; the last one is the extra point.
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TopFragment {
    pub bound: usize,
    /// Families `h` tried per directed set in the locality cocones.
    pub family_cap: usize,
    pub truncated: bool,
    pub spaces: Vec<FragmentSpace>,
    pub arrows: Vec<FragmentArrow>,
    pub cocones: Vec<SpaceCocone>,
    pub point: usize,
    pub limit_objects: Vec<LimitObject>,
}

impl TopFragment {
    fn add_space(&mut self, name: String, space: FinTopSpace) -> usize {
        self.spaces.push(FragmentSpace { name, space });
        self.spaces.len() - 1
    }

    fn add_arrow(&mut self, src: usize, tgt: usize, map: Func) -> usize {
        debug_assert!(self.spaces[src].space.is_continuous(&map, &self.spaces[tgt].space));
        if let Some(i) = self.arrows.iter().position(|a| a.src == src && a.tgt == tgt && a.map == map) {
            return i;
        }
        self.arrows.push(FragmentArrow { src, tgt, map });
        self.arrows.len() - 1
    }

    fn identity(&mut self, s: usize) -> usize {
        let n = self.spaces[s].space.n;
        self.add_arrow(s, s, (0..n).collect())
    }

    /// Adds the colimit of a depth-one diagram of fragment spaces with the
    /// final topology, and its cocone.
    fn add_colimit(
        &mut self,
        name: String,
        kind: CoconeKind,
        objects: Vec<usize>,
        edges: Vec<(usize, usize, Func)>,
    ) -> Result<usize, TopError> {
        let names: Vec<String> = (0..objects.len()).map(|j| j.to_string()).collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let edge_names: Vec<String> = (0..edges.len()).map(|e| format!("e{e}")).collect();
        let graph: Vec<(&str, usize, usize)> =
            edges.iter().zip(&edge_names).map(|((s, t, _), nm)| (nm.as_str(), *s, *t)).collect();
        let shape = Arc::new(FinCategory::from_graph(&name_refs, &graph).expect("depth-one shape"));
        let sets: Vec<usize> = objects.iter().map(|&o| self.spaces[o].space.n).collect();
        let mut maps: Vec<Func> = sets.iter().map(|&k| (0..k).collect()).collect();
        maps.extend(edges.iter().map(|e| e.2.clone()));
        let d = FinSetDiagram { shape: shape.clone(), sets, maps };
        let col = colimit(&d);
        let legs_data: Vec<(&[usize], &FinTopSpace)> =
            col.cocone.legs.iter().zip(&objects).map(|(l, &o)| (l.as_slice(), &self.spaces[o].space)).collect();
        let space = FinTopSpace::final_topology(col.cocone.apex, &legs_data)?;
        let apex = self.add_space(name.clone(), space);
        let mut arrows: Vec<usize> = objects.iter().map(|&o| self.identity(o)).collect();
        for (s, t, f) in &edges {
            arrows.push(self.add_arrow(objects[*s], objects[*t], f.clone()));
        }
        let legs = col.cocone.legs.iter().zip(&objects).map(|(l, &o)| self.add_arrow(o, apex, l.clone())).collect();
        self.cocones.push(SpaceCocone { name, kind, shape, objects, arrows, apex, legs });
        Ok(apex)
    }
}

/// Builds the fragment for directed sets of size `<= bound`. Locality cocones
/// use every family of cofinal maps `h_Q : R_Q -> Q` with `R_Q` within the
/// bound, up to `family_cap` families per `P`.
pub fn top_sketch(bound: usize, family_cap: usize) -> Result<TopFragment, TopError> {
    let dsets = all_directed_sets(bound);
    let mut fr = TopFragment {
        bound,
        family_cap,
        truncated: false,
        spaces: Vec::new(),
        arrows: Vec::new(),
        cocones: Vec::new(),
        point: 0,
        limit_objects: Vec::new(),
    };
    let discrete: Vec<usize> =
        (0..=bound + 1).map(|k| fr.add_space(format!("D{k}"), FinTopSpace::discrete(k))).collect();
    fr.point = discrete[1];
    let point_id = fr.identity(fr.point);
    for (k, &dk) in discrete.iter().enumerate() {
        let shape = Arc::new(FinCategory::discrete(
            &(0..k).map(|i| i.to_string()).collect::<Vec<_>>().iter().map(String::as_str).collect::<Vec<_>>(),
        ));
        let legs: Vec<usize> = (0..k).map(|i| fr.add_arrow(discrete[1], dk, vec![i])).collect();
        fr.cocones.push(SpaceCocone {
            name: format!("coproduct D{k}"),
            kind: CoconeKind::Coproduct,
            shape,
            objects: vec![fr.point; k],
            arrows: vec![point_id; k],
            apex: dk,
            legs,
        });
    }

    let mut pinf = Vec::new();
    for (i, p) in dsets.iter().enumerate() {
        let k = p.size();
        let s = fr.add_space(format!("P{i}+inf"), p_infinity(p));
        pinf.push(s);
        let sum = discrete[k + 1];
        let epi = fr.add_arrow(sum, s, (0..=k).collect());
        let shape = Arc::new(
            FinCategory::from_graph(&["L", "R", "B"], &[("l", 2, 0), ("r", 2, 1)]).expect("cokernel pair shape"),
        );
        let (id_s, id_sum) = (fr.identity(s), fr.identity(sum));
        fr.cocones.push(SpaceCocone {
            name: format!("epi P{i}"),
            kind: CoconeKind::Epimorphism,
            shape,
            objects: vec![s, s, sum],
            arrows: vec![id_s, id_s, id_sum, epi, epi],
            apex: s,
            legs: vec![id_s, id_s, epi],
        });
        let points = (0..=k).map(|j| fr.add_arrow(fr.point, sum, vec![j])).collect();
        fr.limit_objects.push(LimitObject { index: p.clone(), p_infinity: s, epi, points });
    }

    for (i, p) in dsets.iter().enumerate() {
        let k = p.size();
        // per cofinal subset: every (R, h : R -> Q) with h cofinal
        let options: Vec<Vec<(usize, Func)>> = p
            .cofinal_subsets()
            .into_iter()
            .map(|sub| {
                let (q, idx) = p.restrict(sub).expect("cofinal subsets are directed");
                dsets
                    .iter()
                    .enumerate()
                    .flat_map(|(ri, r)| {
                        cofinal_maps(r, &q)
                            .into_iter()
                            .map(|h| (ri, h.iter().map(|&j| idx[j]).collect::<Func>()))
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        let radix: Vec<usize> = options.iter().map(Vec::len).collect();
        let total: usize = radix.iter().product();
        if total > family_cap {
            fr.truncated = true;
        }
        for f in 0..total.min(family_cap) {
            let choice = digits(f, &radix);
            let mut objects = vec![discrete[k + 1]];
            let mut edges = Vec::new();
            for (qi, &c) in choice.iter().enumerate() {
                let (ri, h) = &options[qi][c];
                let rk = dsets[*ri].size();
                objects.push(discrete[rk + 1]);
                objects.push(pinf[*ri]);
                let (a, b) = (objects.len() - 2, objects.len() - 1);
                edges.push((a, b, (0..=rk).collect()));
                let mut to_p = h.clone();
                to_p.push(k);
                edges.push((a, 0, to_p));
            }
            fr.add_colimit(format!("F(P{i},{f})"), CoconeKind::Locality, objects, edges)?;
        }
    }

    for (i, p) in dsets.iter().enumerate() {
        let k = p.size();
        for code in 0..dsets.len().pow(k as u32) {
            let family = digits(code, &vec![dsets.len(); k]);
            let mut objects = vec![pinf[i]];
            let mut edges = Vec::new();
            for (pt, &qi) in family.iter().enumerate() {
                objects.push(fr.point);
                objects.push(pinf[qi]);
                let (a, b) = (objects.len() - 2, objects.len() - 1);
                edges.push((a, b, vec![dsets[qi].size()]));
                edges.push((a, 0, vec![pt]));
            }
            let name = format!("G(P{i},{})", family.iter().map(|q| format!("P{q}")).collect::<Vec<_>>().join(","));
            fr.add_colimit(name, CoconeKind::Iteration, objects, edges)?;
        }
    }
    Ok(fr)
}

/// A set-valued model: `actions[a]` maps `M(tgt a)` to `M(src a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopModel {
    pub sets: Vec<usize>,
    pub actions: Vec<Func>,
}

/// `M(T) = C(T, X)`, acting by precomposition.
pub fn model_from_space(x: &FinTopSpace, fr: &TopFragment) -> TopModel {
    let elements: Vec<Vec<Func>> = fr.spaces.iter().map(|t| t.space.continuous_maps(x)).collect();
    let index: Vec<HashMap<&Func, usize>> =
        elements.iter().map(|e| e.iter().enumerate().map(|(i, f)| (f, i)).collect()).collect();
    let actions =
        fr.arrows.iter().map(|a| elements[a.tgt].iter().map(|g| index[a.src][&compose(g, &a.map)]).collect()).collect();
    TopModel { sets: elements.iter().map(Vec::len).collect(), actions }
}

/// The image of a cocone under a model, as a cone over the opposite shape.
pub fn cocone_image(m: &TopModel, c: &SpaceCocone) -> SetCone {
    let diagram = FinSetDiagram {
        shape: Arc::new(opposite(&c.shape)),
        sets: c.objects.iter().map(|&o| m.sets[o]).collect(),
        maps: c.arrows.iter().map(|&a| m.actions[a].clone()).collect(),
    };
    SetCone { diagram, apex: m.sets[c.apex], legs: c.legs.iter().map(|&a| m.actions[a].clone()).collect() }
}

/// Names of the cocones not sent to limit cones.
pub fn model_failures(m: &TopModel, fr: &TopFragment) -> Result<Vec<String>, LimitError> {
    let mut out = Vec::new();
    for c in &fr.cocones {
        if !is_limit_cone(&cocone_image(m, c))? {
            out.push(c.name.clone());
        }
    }
    Ok(out)
}

/// Carrier `M(1)`; `x -> s` iff `(x, s)` is the image of an element of `M(P + {inf})`.
pub fn space_from_model(m: &TopModel, fr: &TopFragment) -> Result<FinTopSpace, TopError> {
    let n = m.sets[fr.point];
    let mut relation: HashMap<DirectedSet, Vec<(Func, usize)>> = HashMap::new();
    for lo in &fr.limit_objects {
        let k = lo.index.size();
        let entries = (0..m.sets[lo.p_infinity])
            .map(|g| {
                let e = m.actions[lo.epi][g];
                let coords: Func = lo.points.iter().map(|&pt| m.actions[pt][e]).collect();
                (coords[..k].to_vec(), coords[k])
            })
            .collect();
        relation.insert(lo.index.clone(), entries);
    }
    let relation = Arc::new(relation);
    let rule: Rule = Arc::new(move |x: &Net, s: usize| {
        let x = x.canonical();
        relation.get(&x.index).is_some_and(|rel| rel.iter().any(|(v, t)| *t == s && *v == x.values))
    });
    let index_sets = fr.limit_objects.iter().map(|lo| lo.index.clone()).collect();
    topology_from_convergence(&ConvergenceOracle::with_index_sets(n, index_sets, fr.bound, rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nettop::all_topologies;

    #[test]
    fn fragment_shape() {
        let fr = top_sketch(1, 64).unwrap();
        assert!(!fr.truncated);
        // D0, D1, D2, P+inf, one F, one G
        assert_eq!(fr.spaces.len(), 6);
        let f = fr.cocones.iter().find(|c| c.kind == CoconeKind::Locality).unwrap();
        // singleton P, the only family: carrier {p, inf} with P+inf's topology
        assert_eq!(fr.spaces[f.apex].space, p_infinity(&DirectedSet::singleton()));
        let g = fr.cocones.iter().find(|c| c.kind == CoconeKind::Iteration).unwrap();
        assert_eq!(fr.spaces[g.apex].space.n, 3);
    }

    #[test]
    fn round_trip_and_limit_cones() {
        let fr = top_sketch(2, 256).unwrap();
        for n in 0..=2 {
            for x in all_topologies(n) {
                let m = model_from_space(&x, &fr);
                assert_eq!(space_from_model(&m, &fr).unwrap(), x);
                assert!(model_failures(&m, &fr).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn non_model_is_detected() {
        let fr = top_sketch(1, 64).unwrap();
        let mut m = model_from_space(&FinTopSpace::sierpinski(), &fr);
        // pretend M(D2) has an extra element
        let d2 = fr.spaces.iter().position(|s| s.name == "D2").unwrap();
        m.sets[d2] += 1;
        for (a, arrow) in fr.arrows.iter().enumerate() {
            if arrow.tgt == d2 {
                m.actions[a].push(0);
            }
        }
        assert!(!model_failures(&m, &fr).unwrap().is_empty());
    }
}
