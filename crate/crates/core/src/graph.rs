//! Diagram data structure.
//!
//! A [`Diagram`] is an immutable value: nodes keyed by [`NodeId`], a set of
//! edges of three kinds, and a set of declared node equivalences. Every
//! mutating operation returns a new diagram.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a node. Non-generic roles use a fixed canonical id
/// (`"X"`, `"Yhat"`, `"ZH"`, ...), generic nodes use their name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId::new(s)
    }
}

/// What a node stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariableRole {
    /// The instance `X`.
    Input,
    /// Ground-truth label `Y = f(X)`.
    TaskLabel,
    /// Model prediction `Ŷ = g(X)`.
    ModelPrediction,
    /// Model error `Z = I[Y ≠ Ŷ]`.
    ModelError,
    /// The person's local guess of the true label.
    HumanTaskLabel,
    /// The person's local guess of the model prediction.
    HumanModelPrediction,
    /// The person's local judgement of whether the model is wrong.
    HumanModelError,
    /// Task-specific intuitions `H`.
    Intuition,
    /// Machine explanation `E`.
    Explanation,
    Generic(String),
}

impl VariableRole {
    /// Roles with a canonical id, in a fixed order.
    pub const NAMED: [VariableRole; 9] = [
        VariableRole::Input,
        VariableRole::TaskLabel,
        VariableRole::ModelPrediction,
        VariableRole::ModelError,
        VariableRole::HumanTaskLabel,
        VariableRole::HumanModelPrediction,
        VariableRole::HumanModelError,
        VariableRole::Intuition,
        VariableRole::Explanation,
    ];

    pub fn canonical_id(&self) -> NodeId {
        NodeId::new(self.symbol())
    }

    /// Short ASCII symbol; doubles as the canonical node id.
    pub fn symbol(&self) -> &str {
        match self {
            VariableRole::Input => "X",
            VariableRole::TaskLabel => "Y",
            VariableRole::ModelPrediction => "Yhat",
            VariableRole::ModelError => "Z",
            VariableRole::HumanTaskLabel => "YH",
            VariableRole::HumanModelPrediction => "YhatH",
            VariableRole::HumanModelError => "ZH",
            VariableRole::Intuition => "H",
            VariableRole::Explanation => "E",
            VariableRole::Generic(name) => name,
        }
    }

    /// Pretty label for rendering.
    pub fn display_label(&self) -> &str {
        match self {
            VariableRole::Input => "X",
            VariableRole::TaskLabel => "Y",
            VariableRole::ModelPrediction => "Ŷ",
            VariableRole::ModelError => "Z",
            VariableRole::HumanTaskLabel => "Yᴴ",
            VariableRole::HumanModelPrediction => "Ŷᴴ",
            VariableRole::HumanModelError => "Zᴴ",
            VariableRole::Intuition => "H",
            VariableRole::Explanation => "E",
            VariableRole::Generic(name) => name,
        }
    }

    /// Parses a canonical symbol. Anything else is a generic node name.
    pub fn from_symbol(s: &str) -> VariableRole {
        VariableRole::NAMED
            .iter()
            .find(|r| r.symbol() == s)
            .cloned()
            .unwrap_or_else(|| VariableRole::Generic(s.to_string()))
    }

    pub fn is_core(&self) -> bool {
        matches!(
            self,
            VariableRole::TaskLabel | VariableRole::ModelPrediction | VariableRole::ModelError
        )
    }

    pub fn is_human_approximation(&self) -> bool {
        self.core_counterpart().is_some()
    }

    /// Core variable approximated by a human node.
    pub fn core_counterpart(&self) -> Option<VariableRole> {
        match self {
            VariableRole::HumanTaskLabel => Some(VariableRole::TaskLabel),
            VariableRole::HumanModelPrediction => Some(VariableRole::ModelPrediction),
            VariableRole::HumanModelError => Some(VariableRole::ModelError),
            _ => None,
        }
    }

    /// Human approximation of a core variable.
    pub fn human_counterpart(&self) -> Option<VariableRole> {
        match self {
            VariableRole::TaskLabel => Some(VariableRole::HumanTaskLabel),
            VariableRole::ModelPrediction => Some(VariableRole::HumanModelPrediction),
            VariableRole::ModelError => Some(VariableRole::HumanModelError),
            _ => None,
        }
    }

    /// Function controlling the links into a node of this role.
    pub fn controlling_function(&self) -> Option<FunctionTag> {
        match self {
            VariableRole::TaskLabel => Some(FunctionTag::F),
            VariableRole::ModelPrediction => Some(FunctionTag::G),
            VariableRole::ModelError => Some(FunctionTag::Z),
            VariableRole::HumanTaskLabel => Some(FunctionTag::FH),
            VariableRole::HumanModelPrediction => Some(FunctionTag::GH),
            VariableRole::HumanModelError => Some(FunctionTag::ZH),
            _ => None,
        }
    }
}

/// A function annotating (controlling) a bundle of links. Controllers are
/// context, not random variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FunctionTag {
    F,
    G,
    Z,
    FH,
    GH,
    ZH,
    Named(String),
}

impl FunctionTag {
    pub fn symbol(&self) -> &str {
        match self {
            FunctionTag::F => "f",
            FunctionTag::G => "g",
            FunctionTag::Z => "z",
            FunctionTag::FH => "fH",
            FunctionTag::GH => "gH",
            FunctionTag::ZH => "zH",
            FunctionTag::Named(name) => name,
        }
    }

    pub fn display_label(&self) -> &str {
        match self {
            FunctionTag::FH => "fᴴ",
            FunctionTag::GH => "gᴴ",
            FunctionTag::ZH => "zᴴ",
            other => other.symbol(),
        }
    }

    /// Recognises the six built-in function symbols only.
    pub fn parse_builtin(s: &str) -> Option<FunctionTag> {
        match s {
            "f" => Some(FunctionTag::F),
            "g" => Some(FunctionTag::G),
            "z" => Some(FunctionTag::Z),
            "fH" => Some(FunctionTag::FH),
            "gH" => Some(FunctionTag::GH),
            "zH" => Some(FunctionTag::ZH),
            _ => None,
        }
    }

    pub fn from_symbol(s: &str) -> FunctionTag {
        FunctionTag::parse_builtin(s).unwrap_or_else(|| FunctionTag::Named(s.to_string()))
    }
}

impl fmt::Display for FunctionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Solid arrow `from → to`.
    Directed,
    /// Dashed undirected link whose direction is not assumed.
    Ambiguous,
    /// Dashed bidirected link: dependence through an unobserved common cause.
    Correlational,
}

/// An edge. Ambiguous and correlational edges are unordered; their endpoints
/// are stored sorted so that equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    from: NodeId,
    to: NodeId,
    kind: EdgeKind,
    controller: Option<FunctionTag>,
}

impl Edge {
    pub fn new(
        from: impl Into<NodeId>,
        to: impl Into<NodeId>,
        kind: EdgeKind,
        controller: Option<FunctionTag>,
    ) -> Self {
        let (mut from, mut to) = (from.into(), to.into());
        if kind != EdgeKind::Directed && to < from {
            core::mem::swap(&mut from, &mut to);
        }
        Edge {
            from,
            to,
            kind,
            controller,
        }
    }

    pub fn directed(from: impl Into<NodeId>, to: impl Into<NodeId>) -> Self {
        Edge::new(from, to, EdgeKind::Directed, None)
    }

    pub fn ambiguous(a: impl Into<NodeId>, b: impl Into<NodeId>) -> Self {
        Edge::new(a, b, EdgeKind::Ambiguous, None)
    }

    pub fn correlational(a: impl Into<NodeId>, b: impl Into<NodeId>) -> Self {
        Edge::new(a, b, EdgeKind::Correlational, None)
    }

    pub fn controlled_by(mut self, tag: FunctionTag) -> Self {
        self.controller = Some(tag);
        self
    }

    pub fn from(&self) -> &NodeId {
        &self.from
    }

    pub fn to(&self) -> &NodeId {
        &self.to
    }

    pub fn kind(&self) -> EdgeKind {
        self.kind
    }

    pub fn controller(&self) -> Option<&FunctionTag> {
        self.controller.as_ref()
    }

    pub fn touches(&self, n: &NodeId) -> bool {
        &self.from == n || &self.to == n
    }

    /// The endpoint opposite `n`, if `n` is an endpoint.
    pub fn other(&self, n: &NodeId) -> Option<&NodeId> {
        if &self.from == n {
            Some(&self.to)
        } else if &self.to == n {
            Some(&self.from)
        } else {
            None
        }
    }

    /// Unordered endpoint pair.
    pub fn pair(&self) -> (&NodeId, &NodeId) {
        if self.from <= self.to {
            (&self.from, &self.to)
        } else {
            (&self.to, &self.from)
        }
    }

    /// Directed copy pointing at `head`. `head` must be an endpoint.
    pub fn oriented_towards(&self, head: &NodeId) -> Edge {
        let tail = self.other(head).expect("head is an endpoint").clone();
        Edge {
            from: tail,
            to: head.clone(),
            kind: EdgeKind::Directed,
            controller: self.controller.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("role {0:?} appears more than once")]
    DuplicateRole(VariableRole),
    #[error("node id `{0}` appears more than once")]
    DuplicateId(NodeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("self-loop on `{0}`")]
    SelfLoop(NodeId),
    #[error("edge {0} -> {1} would introduce a directed cycle")]
    CycleIntroduced(NodeId, NodeId),
    #[error("`{0}` and `{1}` are already linked")]
    ParallelEdge(NodeId, NodeId),
    #[error("`{0}` and `{1}` cannot be declared equivalent")]
    InvalidEquivalence(NodeId, NodeId),
    #[error("diagram needs at least one node")]
    Empty,
}

/// A single invariant violation reported by [`Diagram::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cycle(Vec<NodeId>),
    DuplicateRole(VariableRole),
    SelfLoop(NodeId),
    UnknownNode(NodeId),
    ParallelEdge(NodeId, NodeId),
    InvalidEquivalence(NodeId, NodeId),
    /// Correlational links carry no controller.
    ControlledCorrelation(NodeId, NodeId),
    /// A controller's edges do not share an endpoint.
    ControllerSpread(FunctionTag),
    /// Node id does not match the canonical id of its role.
    MisnamedNode(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagram {
    nodes: BTreeMap<NodeId, VariableRole>,
    edges: BTreeSet<Edge>,
    equivalences: BTreeSet<(NodeId, NodeId)>,
}

impl Diagram {
    /// Diagram with one node per role and no edges.
    pub fn new(roles: &[VariableRole]) -> Result<Diagram, GraphError> {
        if roles.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut d = Diagram::default();
        for role in roles {
            d = d.add_node(role.clone())?;
        }
        Ok(d)
    }

    /// Rebuilds a diagram from raw parts and checks it.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = (NodeId, VariableRole)>,
        edges: impl IntoIterator<Item = Edge>,
        equivalences: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Diagram, Vec<Violation>> {
        let mut d = Diagram::default();
        let mut violations = Vec::new();
        for (id, role) in nodes {
            if d.nodes.contains_key(&id) {
                violations.push(Violation::DuplicateRole(role.clone()));
            }
            d.nodes.insert(id, role);
        }
        for e in edges {
            d.edges.insert(e);
        }
        for (a, b) in equivalences {
            d.equivalences.insert(sorted_pair(a, b));
        }
        violations.extend(d.validate().err().unwrap_or_default());
        if violations.is_empty() {
            Ok(d)
        } else {
            Err(violations)
        }
    }

    pub fn add_node(&self, role: VariableRole) -> Result<Diagram, GraphError> {
        let id = role.canonical_id();
        if let Some(existing) = self.nodes.get(&id) {
            return Err(match existing {
                VariableRole::Generic(_) => GraphError::DuplicateId(id),
                _ => GraphError::DuplicateRole(role),
            });
        }
        let mut d = self.clone();
        d.nodes.insert(id, role);
        Ok(d)
    }

    pub fn add_edge(&self, edge: Edge) -> Result<Diagram, GraphError> {
        for end in [&edge.from, &edge.to] {
            if !self.nodes.contains_key(end) {
                return Err(GraphError::UnknownNode(end.clone()));
            }
        }
        if edge.from == edge.to {
            return Err(GraphError::SelfLoop(edge.from.clone()));
        }
        if self.edges.contains(&edge) {
            return Ok(self.clone());
        }
        if self.edge_between(&edge.from, &edge.to).is_some() {
            return Err(GraphError::ParallelEdge(edge.from.clone(), edge.to.clone()));
        }
        if edge.kind == EdgeKind::Directed && self.has_directed_path(&edge.to, &edge.from) {
            return Err(GraphError::CycleIntroduced(edge.from.clone(), edge.to.clone()));
        }
        let mut d = self.clone();
        d.edges.insert(edge);
        Ok(d)
    }

    pub fn remove_edge(&self, edge: &Edge) -> Diagram {
        let mut d = self.clone();
        d.edges.remove(edge);
        d
    }

    /// Declares two nodes identical. Only a core variable and its human
    /// approximation may be equivalent.
    pub fn declare_equivalent(&self, a: &NodeId, b: &NodeId) -> Result<Diagram, GraphError> {
        let ra = self.role(a).ok_or_else(|| GraphError::UnknownNode(a.clone()))?;
        let rb = self.role(b).ok_or_else(|| GraphError::UnknownNode(b.clone()))?;
        if !is_counterpart_pair(ra, rb) {
            return Err(GraphError::InvalidEquivalence(a.clone(), b.clone()));
        }
        let mut d = self.clone();
        d.equivalences.insert(sorted_pair(a.clone(), b.clone()));
        Ok(d)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &VariableRole)> {
        self.nodes.iter()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn equivalences(&self) -> impl Iterator<Item = &(NodeId, NodeId)> {
        self.equivalences.iter()
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn role(&self, id: &NodeId) -> Option<&VariableRole> {
        self.nodes.get(id)
    }

    /// Id of the node carrying a non-generic role.
    pub fn node_with_role(&self, role: &VariableRole) -> Option<NodeId> {
        let id = role.canonical_id();
        (self.nodes.get(&id) == Some(role)).then_some(id)
    }

    pub fn edge_between(&self, a: &NodeId, b: &NodeId) -> Option<&Edge> {
        self.edges
            .iter()
            .find(|e| (&e.from == a && &e.to == b) || (&e.from == b && &e.to == a))
    }

    pub fn is_equivalent(&self, a: &NodeId, b: &NodeId) -> bool {
        self.equivalences.contains(&sorted_pair(a.clone(), b.clone()))
    }

    /// Whether a node has been made identical to another one.
    pub fn is_merged(&self, id: &NodeId) -> bool {
        self.equivalences.iter().any(|(a, b)| a == id || b == id)
    }

    pub fn parents(&self, id: &NodeId) -> impl Iterator<Item = &NodeId> + '_ {
        let id = id.clone();
        self.edges
            .iter()
            .filter(move |e| e.kind == EdgeKind::Directed && e.to == id)
            .map(|e| &e.from)
    }

    pub fn children(&self, id: &NodeId) -> impl Iterator<Item = &NodeId> + '_ {
        let id = id.clone();
        self.edges
            .iter()
            .filter(move |e| e.kind == EdgeKind::Directed && e.from == id)
            .map(|e| &e.to)
    }

    pub fn ambiguous_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Ambiguous)
    }

    /// Realized diagrams carry no ambiguous links.
    pub fn is_realized(&self) -> bool {
        self.ambiguous_edges().next().is_none()
    }

    fn has_directed_path(&self, from: &NodeId, to: &NodeId) -> bool {
        let mut stack = alloc::vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.children(n));
            }
        }
        false
    }

    /// Directed cycle, if any (Kahn's algorithm leftovers).
    fn find_cycle(&self) -> Option<Vec<NodeId>> {
        let mut indeg: BTreeMap<&NodeId, usize> = self.nodes.keys().map(|k| (k, 0)).collect();
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Directed) {
            if let Some(d) = indeg.get_mut(&e.to) {
                *d += 1;
            }
        }
        let mut queue: Vec<&NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(k, _)| *k).collect();
        while let Some(n) = queue.pop() {
            indeg.remove(n);
            for c in self.children(n) {
                if let Some(d) = indeg.get_mut(c) {
                    *d -= 1;
                    if *d == 0 {
                        queue.push(c);
                    }
                }
            }
        }
        (!indeg.is_empty()).then(|| indeg.keys().map(|k| (*k).clone()).collect())
    }

    /// Nodes in a topological order of the directed edges.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indeg: BTreeMap<&NodeId, usize> = self.nodes.keys().map(|k| (k, 0)).collect();
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Directed) {
            *indeg.get_mut(&e.to)? += 1;
        }
        let mut ready: BTreeSet<&NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(k, _)| *k).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(n) = ready.pop_first() {
            order.push(n.clone());
            for c in self.children(n) {
                let d = indeg.get_mut(c)?;
                *d -= 1;
                if *d == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Every invariant violation, or `Ok` when there are none.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut roles_seen = BTreeSet::new();
        for (id, role) in &self.nodes {
            if &role.canonical_id() != id {
                out.push(Violation::MisnamedNode(id.clone()));
            }
            if !matches!(role, VariableRole::Generic(_)) && !roles_seen.insert(role) {
                out.push(Violation::DuplicateRole(role.clone()));
            }
        }
        let mut pairs = BTreeSet::new();
        let mut by_tag: BTreeMap<&FunctionTag, Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            for end in [&e.from, &e.to] {
                if !self.nodes.contains_key(end) {
                    out.push(Violation::UnknownNode(end.clone()));
                }
            }
            if e.from == e.to {
                out.push(Violation::SelfLoop(e.from.clone()));
            }
            let (a, b) = e.pair();
            if !pairs.insert((a.clone(), b.clone())) {
                out.push(Violation::ParallelEdge(a.clone(), b.clone()));
            }
            if let Some(tag) = &e.controller {
                if e.kind == EdgeKind::Correlational {
                    out.push(Violation::ControlledCorrelation(a.clone(), b.clone()));
                }
                by_tag.entry(tag).or_default().push(e);
            }
        }
        for (tag, edges) in by_tag {
            let first = edges[0];
            let shares = |n: &NodeId| edges.iter().all(|e| e.touches(n));
            if !shares(&first.from) && !shares(&first.to) {
                out.push(Violation::ControllerSpread(tag.clone()));
            }
        }
        for (a, b) in &self.equivalences {
            match (self.nodes.get(a), self.nodes.get(b)) {
                (Some(ra), Some(rb)) if is_counterpart_pair(ra, rb) => {}
                _ => out.push(Violation::InvalidEquivalence(a.clone(), b.clone())),
            }
        }
        if let Some(cycle) = self.find_cycle() {
            out.push(Violation::Cycle(cycle));
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Every orientation of the ambiguous links that keeps the directed
    /// graph acyclic. Correlational links are kept as they are.
    pub fn realizations(&self) -> Vec<Diagram> {
        let ambiguous: Vec<&Edge> = self.ambiguous_edges().collect();
        let mut base = self.clone();
        for e in &ambiguous {
            base.edges.remove(*e);
        }
        let mut out = Vec::new();
        // Depth-first over orientation choices with cycle pruning.
        let mut stack: Vec<(usize, Diagram)> = alloc::vec![(0, base)];
        while let Some((i, d)) = stack.pop() {
            if i == ambiguous.len() {
                out.push(d);
                continue;
            }
            let e = ambiguous[i];
            for head in [&e.to, &e.from] {
                let oriented = e.oriented_towards(head);
                if !d.has_directed_path(&oriented.to, &oriented.from) {
                    let mut next = d.clone();
                    next.edges.insert(oriented);
                    stack.push((i + 1, next));
                }
            }
        }
        out.sort_by(|a, b| a.edges.cmp(&b.edges));
        out
    }

    pub(crate) fn without_edges_where(&self, mut drop: impl FnMut(&Edge) -> bool) -> Diagram {
        let mut d = self.clone();
        d.edges.retain(|e| !drop(e));
        d
    }

    pub(crate) fn replace_edge(&self, old: &Edge, new: Edge) -> Result<Diagram, GraphError> {
        self.remove_edge(old).add_edge(new)
    }
}

fn is_counterpart_pair(a: &VariableRole, b: &VariableRole) -> bool {
    a.human_counterpart().as_ref() == Some(b) || b.human_counterpart().as_ref() == Some(a)
}

fn sorted_pair(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use VariableRole::*;

    fn generic(name: &str) -> VariableRole {
        Generic(name.to_string())
    }

    #[test]
    fn new_diagram_has_no_edges() {
        let d = Diagram::new(&[Input, TaskLabel]).unwrap();
        assert_eq!(d.node_count(), 2);
        assert_eq!(d.edges().count(), 0);
        assert!(d.validate().is_ok());
    }

    #[test]
    fn duplicate_role_rejected() {
        assert_eq!(
            Diagram::new(&[Input, Input]),
            Err(GraphError::DuplicateRole(Input))
        );
        assert!(Diagram::new(&[]).is_err());
    }

    #[test]
    fn all_named_roles_fit_in_one_diagram() {
        let d = Diagram::new(&VariableRole::NAMED).unwrap();
        assert_eq!(d.node_count(), 9);
        assert!(d.validate().is_ok());
    }

    #[test]
    fn controlled_edge_is_stored() {
        let d = Diagram::new(&[Input, ModelPrediction]).unwrap();
        let d = d
            .add_edge(Edge::directed("X", "Yhat").controlled_by(FunctionTag::G))
            .unwrap();
        let e = d.edges().next().unwrap();
        assert_eq!(e.controller(), Some(&FunctionTag::G));
        assert_eq!(
            d.parents(&"Yhat".into()).collect::<Vec<_>>(),
            vec![&NodeId::from("X")]
        );
    }

    #[test]
    fn cycle_rejected() {
        let d = Diagram::new(&[Input, TaskLabel]).unwrap();
        let d = d.add_edge(Edge::directed("X", "Y")).unwrap();
        assert!(matches!(
            d.add_edge(Edge::directed("Y", "X")),
            Err(GraphError::CycleIntroduced(..) | GraphError::ParallelEdge(..))
        ));
        let d = Diagram::new(&[generic("a"), generic("b"), generic("c")]).unwrap();
        let d = d
            .add_edge(Edge::directed("a", "b"))
            .unwrap()
            .add_edge(Edge::directed("b", "c"))
            .unwrap();
        assert_eq!(
            d.add_edge(Edge::directed("c", "a")),
            Err(GraphError::CycleIntroduced("c".into(), "a".into()))
        );
    }

    #[test]
    fn self_loop_and_unknown_node() {
        let d = Diagram::new(&[Input]).unwrap();
        assert_eq!(
            d.add_edge(Edge::directed("X", "X")),
            Err(GraphError::SelfLoop("X".into()))
        );
        assert_eq!(
            d.add_edge(Edge::directed("X", "Q")),
            Err(GraphError::UnknownNode("Q".into()))
        );
    }

    #[test]
    fn ambiguous_edges_are_unordered() {
        let d = Diagram::new(&[Input, TaskLabel]).unwrap();
        let a = d
            .add_edge(Edge::ambiguous("X", "Y").controlled_by(FunctionTag::F))
            .unwrap();
        let b = d
            .add_edge(Edge::ambiguous("Y", "X").controlled_by(FunctionTag::F))
            .unwrap();
        assert_eq!(a, b);
        assert!(!a.is_realized());
    }

    #[test]
    fn validate_reports_cycles_and_duplicates() {
        let cyclic = Diagram::from_parts(
            [("a".into(), generic("a")), ("b".into(), generic("b"))],
            [Edge::directed("a", "b"), Edge::directed("b", "a")],
            [],
        );
        let errs = cyclic.unwrap_err();
        assert!(errs.iter().any(|v| matches!(v, Violation::Cycle(_))));

        let dup = Diagram::from_parts([("Y".into(), TaskLabel), ("Y".into(), TaskLabel)], [], []);
        assert!(dup
            .unwrap_err()
            .iter()
            .any(|v| matches!(v, Violation::DuplicateRole(TaskLabel))));
    }

    #[test]
    fn equivalence_only_between_counterparts() {
        let d = Diagram::new(&[TaskLabel, HumanTaskLabel, ModelPrediction]).unwrap();
        assert!(d.declare_equivalent(&"Y".into(), &"YH".into()).is_ok());
        assert!(d.declare_equivalent(&"Yhat".into(), &"YH".into()).is_err());
    }

    #[test]
    fn single_ambiguous_edge_has_two_realizations() {
        let d = Diagram::new(&[generic("A"), generic("B")])
            .unwrap()
            .add_edge(Edge::ambiguous("A", "B"))
            .unwrap();
        let r = d.realizations();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|d| d.is_realized() && d.validate().is_ok()));
        assert_ne!(r[0], r[1]);
    }

    #[test]
    fn ambiguous_triangle_has_six_acyclic_orientations() {
        // 2^3 orientations, two of them are directed 3-cycles.
        let d = Diagram::new(&[generic("A"), generic("B"), generic("C")])
            .unwrap()
            .add_edge(Edge::ambiguous("A", "B"))
            .unwrap()
            .add_edge(Edge::ambiguous("B", "C"))
            .unwrap()
            .add_edge(Edge::ambiguous("C", "A"))
            .unwrap();
        assert_eq!(d.realizations().len(), 6);
    }

    #[test]
    fn correlational_edges_survive_realization() {
        let d = Diagram::new(&[generic("A"), generic("B"), generic("C")])
            .unwrap()
            .add_edge(Edge::ambiguous("A", "B"))
            .unwrap()
            .add_edge(Edge::correlational("B", "C"))
            .unwrap();
        for r in d.realizations() {
            assert!(r.edges().any(|e| e.kind() == EdgeKind::Correlational));
        }
    }
}
