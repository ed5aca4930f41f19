//! Separation queries.
//!
//! Before any query the diagram is normalised: equivalent nodes are merged
//! into one, every correlational link `A ↔ B` becomes `A ← L → B` with a fresh
//! hidden `L`, and function tags named in the conditioning set are dropped
//! because controllers are fixed context rather than random variables.
//! Diagrams that still contain ambiguous links are answered realization by
//! realization.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Diagram, EdgeKind, FunctionTag, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DsepError {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("query sets overlap on `{0}`")]
    OverlappingSets(NodeId),
    #[error("query sets must be non-empty")]
    EmptySet,
    #[error("merging equivalent nodes creates a directed cycle")]
    MergeCycle,
    #[error("diagram still has ambiguous links")]
    NotRealized,
    #[error("{0} nodes is too many for path enumeration")]
    TooLarge(usize),
    #[error("diagram is invalid")]
    InvalidDiagram,
}

/// `a ⟂ b | given`. Entries of `given` that are not nodes but name a
/// function tag (`g`, `fH`, ...) are accepted as context.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeparationQuery {
    pub a: BTreeSet<NodeId>,
    pub b: BTreeSet<NodeId>,
    pub given: BTreeSet<NodeId>,
}

impl SeparationQuery {
    pub fn new<'s>(
        a: impl IntoIterator<Item = &'s str>,
        b: impl IntoIterator<Item = &'s str>,
        given: impl IntoIterator<Item = &'s str>,
    ) -> Self {
        let set = |it: &mut dyn Iterator<Item = &'s str>| it.map(NodeId::from).collect();
        SeparationQuery {
            a: set(&mut a.into_iter()),
            b: set(&mut b.into_iter()),
            given: set(&mut given.into_iter()),
        }
    }

    pub fn swapped(&self) -> Self {
        SeparationQuery {
            a: self.b.clone(),
            b: self.a.clone(),
            given: self.given.clone(),
        }
    }
}

impl core::fmt::Display for SeparationQuery {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let join = |s: &BTreeSet<NodeId>| s.iter().map(NodeId::as_str).collect::<Vec<_>>().join(",");
        write!(
            f,
            "{{{}}} ⟂ {{{}}} | {{{}}}",
            join(&self.a),
            join(&self.b),
            join(&self.given)
        )
    }
}

/// Outcome for one orientation of the ambiguous links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationOutcome {
    /// Chosen direction `(tail, head)` for each formerly ambiguous link.
    pub orientation: Vec<(NodeId, NodeId)>,
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Separated,
    Connected,
    /// Realizations disagree.
    Ambiguous(Vec<RealizationOutcome>),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Separated => "separated",
            Verdict::Connected => "connected",
            Verdict::Ambiguous(_) => "ambiguous",
        }
    }

    fn from_bool(separated: bool) -> Verdict {
        if separated {
            Verdict::Separated
        } else {
            Verdict::Connected
        }
    }
}

/// A verdict plus the function tags that were conditioned on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub verdict: Verdict,
    pub context: Vec<FunctionTag>,
}

/// Classic separation on the normalised diagram, realization by realization
/// when links are still ambiguous.
pub fn d_separated(d: &Diagram, q: &SeparationQuery) -> Result<Verdict, DsepError> {
    evaluate(d, q).map(|e| e.verdict)
}

pub fn evaluate(d: &Diagram, q: &SeparationQuery) -> Result<Evaluation, DsepError> {
    if d.validate().is_err() {
        return Err(DsepError::InvalidDiagram);
    }
    let (given, context) = split_context(d, &q.given)?;
    if d.is_realized() {
        let g = Working::new(d)?;
        let (a, b, z) = g.resolve(&q.a, &q.b, &given)?;
        return Ok(Evaluation {
            verdict: Verdict::from_bool(g.separated(&a, &b, &z)),
            context,
        });
    }
    let ambiguous: Vec<_> = d.ambiguous_edges().cloned().collect();
    let mut outcomes = Vec::new();
    for r in d.realizations() {
        let g = Working::new(&r)?;
        let (a, b, z) = g.resolve(&q.a, &q.b, &given)?;
        let orientation = ambiguous
            .iter()
            .map(|e| {
                let (x, y) = e.pair();
                match r.edge_between(x, y) {
                    Some(o) if o.from() == x => (x.clone(), y.clone()),
                    _ => (y.clone(), x.clone()),
                }
            })
            .collect();
        outcomes.push(RealizationOutcome {
            orientation,
            separated: g.separated(&a, &b, &z),
        });
    }
    let verdict = match outcomes.first() {
        None => Verdict::Ambiguous(outcomes),
        Some(first) if outcomes.iter().all(|o| o.separated == first.separated) => {
            Verdict::from_bool(first.separated)
        }
        Some(_) => Verdict::Ambiguous(outcomes),
    };
    Ok(Evaluation { verdict, context })
}

fn split_context(
    d: &Diagram,
    given: &BTreeSet<NodeId>,
) -> Result<(BTreeSet<NodeId>, Vec<FunctionTag>), DsepError> {
    let mut nodes = BTreeSet::new();
    let mut context = Vec::new();
    for g in given {
        if d.contains(g) {
            nodes.insert(g.clone());
        } else if let Some(tag) = tag_named(d, g.as_str()) {
            context.push(tag);
        } else {
            return Err(DsepError::UnknownNode(g.clone()));
        }
    }
    Ok((nodes, context))
}

fn tag_named(d: &Diagram, s: &str) -> Option<FunctionTag> {
    FunctionTag::parse_builtin(s).or_else(|| {
        d.edges()
            .filter_map(|e| e.controller())
            .find(|t| t.symbol() == s)
            .cloned()
    })
}

/// Normalised graph: merged equivalence classes plus one hidden parent per
/// correlational link.
struct Working {
    index: BTreeMap<NodeId, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Working {
    fn new(d: &Diagram) -> Result<Working, DsepError> {
        let ids: Vec<&NodeId> = d.node_ids().collect();
        let pos: BTreeMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut uf = UnionFind::new(ids.len());
        for (a, b) in d.equivalences() {
            uf.union(pos[a], pos[b]);
        }
        let mut class_of = vec![usize::MAX; ids.len()];
        let mut next = 0;
        for i in 0..ids.len() {
            let r = uf.find(i);
            if class_of[r] == usize::MAX {
                class_of[r] = next;
                next += 1;
            }
            class_of[i] = class_of[r];
        }
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, n)| ((*n).clone(), class_of[i]))
            .collect();

        let mut arcs = BTreeSet::new();
        for e in d.edges() {
            let (u, v) = (class_of[pos[e.from()]], class_of[pos[e.to()]]);
            match e.kind() {
                EdgeKind::Directed if u != v => {
                    arcs.insert((u, v));
                }
                EdgeKind::Directed => {}
                EdgeKind::Correlational => {
                    let latent = next;
                    next += 1;
                    arcs.insert((latent, u));
                    arcs.insert((latent, v));
                }
                EdgeKind::Ambiguous => return Err(DsepError::NotRealized),
            }
        }
        let mut parents = vec![Vec::new(); next];
        let mut children = vec![Vec::new(); next];
        for &(u, v) in &arcs {
            parents[v].push(u);
            children[u].push(v);
        }
        let g = Working {
            index,
            parents,
            children,
        };
        if g.has_cycle() {
            return Err(DsepError::MergeCycle);
        }
        Ok(g)
    }

    fn has_cycle(&self) -> bool {
        let n = self.parents.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(u) = ready.pop() {
            seen += 1;
            for &c in &self.children[u] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        seen != n
    }

    #[allow(clippy::type_complexity)]
    fn resolve(
        &self,
        a: &BTreeSet<NodeId>,
        b: &BTreeSet<NodeId>,
        given: &BTreeSet<NodeId>,
    ) -> Result<(Vec<usize>, Vec<usize>, Vec<bool>), DsepError> {
        if a.is_empty() || b.is_empty() {
            return Err(DsepError::EmptySet);
        }
        let lookup = |n: &NodeId| {
            self.index
                .get(n)
                .copied()
                .ok_or_else(|| DsepError::UnknownNode(n.clone()))
        };
        let mut owner: BTreeMap<usize, &NodeId> = BTreeMap::new();
        let mut sets: [Vec<usize>; 3] = Default::default();
        for (slot, set) in [a, b, given].into_iter().enumerate() {
            for n in set {
                let i = lookup(n)?;
                if let Some(prev) = owner.insert(i, n) {
                    // Same merged node in two roles, or the same node twice.
                    let _ = prev;
                    if !sets[slot].contains(&i) {
                        return Err(DsepError::OverlappingSets(n.clone()));
                    }
                }
                if !sets[slot].contains(&i) {
                    sets[slot].push(i);
                }
            }
        }
        let [a, b, z] = sets;
        let mut zmask = vec![false; self.parents.len()];
        for i in z {
            zmask[i] = true;
        }
        Ok((a, b, zmask))
    }

    /// Reachability with direction-aware traversal ("Bayes ball").
    fn separated(&self, a: &[usize], b: &[usize], z: &[bool]) -> bool {
        let n = self.parents.len();
        // Nodes in z or with a descendant in z.
        let mut anc = z.to_vec();
        let mut stack: Vec<usize> = (0..n).filter(|&i| z[i]).collect();
        while let Some(u) = stack.pop() {
            for &p in &self.parents[u] {
                if !anc[p] {
                    anc[p] = true;
                    stack.push(p);
                }
            }
        }
        const UP: usize = 0; // arrived from a child
        const DOWN: usize = 1; // arrived from a parent
        let mut visited = vec![[false; 2]; n];
        let mut reached = vec![false; n];
        let mut queue: Vec<(usize, usize)> = a.iter().map(|&s| (s, UP)).collect();
        while let Some((u, dir)) = queue.pop() {
            if visited[u][dir] {
                continue;
            }
            visited[u][dir] = true;
            if !z[u] {
                reached[u] = true;
            }
            if dir == UP && !z[u] {
                queue.extend(self.parents[u].iter().map(|&p| (p, UP)));
                queue.extend(self.children[u].iter().map(|&c| (c, DOWN)));
            } else if dir == DOWN {
                if !z[u] {
                    queue.extend(self.children[u].iter().map(|&c| (c, DOWN)));
                }
                if anc[u] {
                    queue.extend(self.parents[u].iter().map(|&p| (p, UP)));
                }
            }
        }
        b.iter().all(|&t| !reached[t])
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Largest graph [`brute_force_separated`] accepts, hidden nodes included.
pub const BRUTE_FORCE_LIMIT: usize = 16;

/// Test oracle: lists every simple path between the two sets and applies
/// the blocking rules literally. Shares no code with [`d_separated`]'s
/// traversal.
pub fn brute_force_separated(d: &Diagram, q: &SeparationQuery) -> Result<Verdict, DsepError> {
    if !d.is_realized() {
        return Err(DsepError::NotRealized);
    }
    // Merge by relabelling every node to the smallest id of its class.
    let mut rep: BTreeMap<String, String> = d
        .node_ids()
        .map(|n| (String::from(n.as_str()), String::from(n.as_str())))
        .collect();
    loop {
        let mut changed = false;
        for (x, y) in d.equivalences() {
            let (rx, ry) = (rep[x.as_str()].clone(), rep[y.as_str()].clone());
            if rx != ry {
                let low = if rx < ry { rx.clone() } else { ry.clone() };
                for v in rep.values_mut() {
                    if *v == rx || *v == ry {
                        *v = low.clone();
                    }
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut arrows: Vec<(String, String)> = Vec::new();
    for (k, e) in d.edges().enumerate() {
        let (u, v) = (rep[e.from().as_str()].clone(), rep[e.to().as_str()].clone());
        if e.kind() == EdgeKind::Correlational {
            let hidden = format!("\u{0}latent{k}");
            arrows.push((hidden.clone(), u));
            arrows.push((hidden, v));
        } else if u != v {
            arrows.push((u, v));
        }
    }
    arrows.sort();
    arrows.dedup();
    let mut nodes: BTreeSet<String> = rep.values().cloned().collect();
    for (u, v) in &arrows {
        nodes.insert(u.clone());
        nodes.insert(v.clone());
    }
    if nodes.len() > BRUTE_FORCE_LIMIT {
        return Err(DsepError::TooLarge(nodes.len()));
    }

    let mut given = BTreeSet::new();
    for g in &q.given {
        match rep.get(g.as_str()) {
            Some(r) => {
                given.insert(r.clone());
            }
            None if tag_named(d, g.as_str()).is_some() => {}
            None => return Err(DsepError::UnknownNode(g.clone())),
        }
    }
    let map_set = |s: &BTreeSet<NodeId>| -> Result<BTreeSet<String>, DsepError> {
        s.iter()
            .map(|n| {
                rep.get(n.as_str())
                    .cloned()
                    .ok_or_else(|| DsepError::UnknownNode(n.clone()))
            })
            .collect()
    };
    let (a, b) = (map_set(&q.a)?, map_set(&q.b)?);
    if a.is_empty() || b.is_empty() {
        return Err(DsepError::EmptySet);
    }
    for x in &a {
        if b.contains(x) || given.contains(x) {
            return Err(DsepError::OverlappingSets(NodeId::new(x.as_str())));
        }
    }
    if let Some(x) = b.intersection(&given).next() {
        return Err(DsepError::OverlappingSets(NodeId::new(x.as_str())));
    }

    let is_arrow = |u: &String, v: &String| arrows.iter().any(|(s, t)| s == u && t == v);
    let descendants = |start: &String| -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut frontier = vec![start.clone()];
        while let Some(u) = frontier.pop() {
            for (s, t) in &arrows {
                if *s == u && out.insert(t.clone()) {
                    frontier.push(t.clone());
                }
            }
        }
        out
    };
    let active_collider = |v: &String| given.contains(v) || descendants(v).iter().any(|w| given.contains(w));
    let neighbours = |u: &String| -> Vec<String> {
        arrows
            .iter()
            .filter_map(|(s, t)| {
                if s == u {
                    Some(t.clone())
                } else if t == u {
                    Some(s.clone())
                } else {
                    None
                }
            })
            .collect()
    };
    let path_active = |path: &[String]| -> bool {
        path.windows(3).all(|w| {
            let (p, v, n) = (&w[0], &w[1], &w[2]);
            let collider = is_arrow(p, v) && is_arrow(n, v);
            if collider {
                active_collider(v)
            } else {
                !given.contains(v)
            }
        })
    };

    for start in &a {
        // Depth-first enumeration of simple paths.
        let mut stack: Vec<Vec<String>> = vec![vec![start.clone()]];
        while let Some(path) = stack.pop() {
            let last = path.last().expect("non-empty").clone();
            if path.len() > 1 && b.contains(&last) {
                if path_active(&path) {
                    return Ok(Verdict::Connected);
                }
                continue;
            }
            for next in neighbours(&last) {
                if !path.contains(&next) {
                    let mut p = path.clone();
                    p.push(next);
                    // Prune prefixes that are already blocked.
                    if p.len() < 3 || path_active(&p[p.len() - 3..]) {
                        stack.push(p);
                    }
                }
            }
        }
    }
    Ok(Verdict::Separated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::catalog;
    use crate::graph::{Edge, VariableRole};
    use alloc::string::ToString;

    fn generic_diagram(names: &[&str], edges: &[Edge]) -> Diagram {
        let roles: Vec<_> = names
            .iter()
            .map(|n| VariableRole::Generic(n.to_string()))
            .collect();
        edges
            .iter()
            .cloned()
            .fold(Diagram::new(&roles).unwrap(), |d, e| d.add_edge(e).unwrap())
    }

    fn q(a: &[&'static str], b: &[&'static str], given: &[&'static str]) -> SeparationQuery {
        SeparationQuery::new(a.iter().copied(), b.iter().copied(), given.iter().copied())
    }

    fn both(d: &Diagram, query: &SeparationQuery) -> Verdict {
        let v = d_separated(d, query).unwrap();
        if d.is_realized() {
            assert_eq!(brute_force_separated(d, query).unwrap(), v, "{query}");
        }
        v
    }

    #[test]
    fn chain() {
        let d = generic_diagram(
            &["A", "B", "C"],
            &[Edge::directed("A", "B"), Edge::directed("B", "C")],
        );
        assert_eq!(both(&d, &q(&["A"], &["C"], &["B"])), Verdict::Separated);
        assert_eq!(both(&d, &q(&["A"], &["C"], &[])), Verdict::Connected);
    }

    #[test]
    fn collider() {
        let d = generic_diagram(
            &["Ya", "Zc", "Yb", "W"],
            &[
                Edge::directed("Ya", "Zc"),
                Edge::directed("Yb", "Zc"),
                Edge::directed("Zc", "W"),
            ],
        );
        assert_eq!(both(&d, &q(&["Ya"], &["Yb"], &[])), Verdict::Separated);
        assert_eq!(both(&d, &q(&["Ya"], &["Yb"], &["Zc"])), Verdict::Connected);
        // Conditioning on a descendant of the collider also opens it.
        assert_eq!(both(&d, &q(&["Ya"], &["Yb"], &["W"])), Verdict::Connected);
    }

    #[test]
    fn correlational_link_acts_as_hidden_common_cause() {
        let d = generic_diagram(
            &["A", "B", "C"],
            &[Edge::correlational("A", "B"), Edge::directed("B", "C")],
        );
        assert_eq!(both(&d, &q(&["A"], &["C"], &[])), Verdict::Connected);
        assert_eq!(both(&d, &q(&["A"], &["C"], &["B"])), Verdict::Separated);
    }

    #[test]
    fn prediction_independent_of_label_given_input_and_model() {
        let d = catalog("fig2").unwrap();
        assert_eq!(
            d_separated(&d, &q(&["Yhat"], &["Y"], &["X", "g"])).unwrap(),
            Verdict::Separated
        );
        let ev = evaluate(&d, &q(&["Yhat"], &["Y"], &["X", "g"])).unwrap();
        assert_eq!(ev.context, [FunctionTag::G]);
    }

    #[test]
    fn ambiguous_verdict_when_orientations_disagree() {
        // A — B with A → C ← ... : whether B is a parent of A decides B ⟂ C | A.
        let d = generic_diagram(
            &["A", "B", "C", "D"],
            &[
                Edge::ambiguous("A", "B"),
                Edge::directed("C", "A"),
                Edge::directed("D", "B"),
            ],
        );
        // B → A ← C : B ⟂ C marginally. A → B : C → A → B open.
        match d_separated(&d, &q(&["B"], &["C"], &[])).unwrap() {
            Verdict::Ambiguous(map) => {
                assert_eq!(map.len(), 2);
                assert!(map.iter().any(|o| o.separated));
                assert!(map.iter().any(|o| !o.separated));
            }
            other => panic!("expected ambiguous, got {other:?}"),
        }
        // Both orientations agree here.
        assert_eq!(
            d_separated(&d, &q(&["D"], &["C"], &["A", "B"])).unwrap(),
            Verdict::Separated
        );
    }

    #[test]
    fn equivalent_nodes_are_merged() {
        let d = catalog("fig3b").unwrap();
        for (x, y) in [("Y", "YH")] {
            for other in ["YhatH", "ZH", "Z", "H"] {
                for given in [&[][..], &["X"][..]] {
                    let lhs = d_separated(&d, &SeparationQuery::new([x], [other], given.iter().copied()));
                    let rhs = d_separated(&d, &SeparationQuery::new([y], [other], given.iter().copied()));
                    assert_eq!(lhs, rhs);
                }
            }
        }
        assert_eq!(
            d_separated(&d, &q(&["Y"], &["YH"], &[])),
            Err(DsepError::OverlappingSets("YH".into()))
        );
    }

    #[test]
    fn query_errors() {
        let d = catalog("fig2").unwrap();
        assert_eq!(
            d_separated(&d, &q(&["Q"], &["Y"], &[])),
            Err(DsepError::UnknownNode("Q".into()))
        );
        assert_eq!(
            d_separated(&d, &q(&["X"], &["Y"], &["X"])),
            Err(DsepError::OverlappingSets("X".into()))
        );
        assert_eq!(d_separated(&d, &q(&[], &["Y"], &[])), Err(DsepError::EmptySet));
        assert_eq!(
            brute_force_separated(&d, &q(&["X"], &["Y"], &[])),
            Err(DsepError::NotRealized)
        );
    }

    #[test]
    fn brute_force_refuses_large_graphs() {
        let names: Vec<String> = (0..17).map(|i| alloc::format!("n{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let d = generic_diagram(&refs, &[]);
        assert_eq!(
            brute_force_separated(&d, &q(&["n0"], &["n1"], &[])),
            Err(DsepError::TooLarge(17))
        );
    }
}
