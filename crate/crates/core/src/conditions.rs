//! The `show` operator, experiment conditions and the diagram catalog.

use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Diagram, Edge, EdgeKind, FunctionTag, GraphError, NodeId, VariableRole};

use VariableRole::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShowError {
    #[error("`{0}` has no human counterpart in the diagram")]
    MissingCounterpart(NodeId),
    #[error("`{0}` cannot be shown")]
    UnknownVariable(NodeId),
    #[error("diagram already has an explanation node")]
    ExplanationAlreadyPresent,
    #[error("diagram has no g-controlled link to derive an explanation from")]
    NoModelLink,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// The person knows the true label.
    Emulation,
    Discovery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    Shown,
    Hidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntuitionMode {
    NoAssumption,
    /// The explanation activates prior knowledge correlated with model error.
    ActivatesErrorPrior,
    /// The explanation shapes next-step intuitions.
    ExpandsIntuition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub task: Task,
    pub prediction: Visibility,
    pub explanation: Visibility,
    pub intuition: IntuitionMode,
}

impl Condition {
    pub fn new(task: Task, prediction: Visibility) -> Condition {
        Condition {
            task,
            prediction,
            explanation: Visibility::Hidden,
            intuition: IntuitionMode::NoAssumption,
        }
    }

    pub fn with_explanation(mut self, mode: IntuitionMode) -> Condition {
        self.explanation = Visibility::Shown;
        self.intuition = mode;
        self
    }

    /// Intuition assumptions only make sense once an explanation is shown.
    pub fn is_valid(&self) -> bool {
        self.intuition == IntuitionMode::NoAssumption || self.explanation == Visibility::Shown
    }
}

fn id(role: VariableRole) -> NodeId {
    role.canonical_id()
}

/// Makes a core variable visible: adds `v → vᴴ`, removes every other link
/// into `vᴴ`, turns ambiguous links at `vᴴ` into links out of it, and
/// declares `vᴴ ≡ v`. Once both labels are shown, `Zᴴ` is fully determined
/// by them and keeps only those two parents.
pub fn show(d: &Diagram, v: &VariableRole) -> Result<Diagram, ShowError> {
    let core = id(v.clone());
    if !matches!(v, TaskLabel | ModelPrediction) {
        return Err(ShowError::UnknownVariable(core));
    }
    if d.role(&core) != Some(v) {
        return Err(ShowError::UnknownVariable(core));
    }
    let human_role = v.human_counterpart().expect("labels have counterparts");
    let human = d
        .node_with_role(&human_role)
        .ok_or_else(|| ShowError::MissingCounterpart(core.clone()))?;

    let link = Edge::directed(core.clone(), human.clone());
    let mut out = d.without_edges_where(|e| {
        e != &link
            && e.touches(&human)
            && match e.kind() {
                EdgeKind::Directed => e.to() == &human,
                EdgeKind::Correlational => true,
                EdgeKind::Ambiguous => false,
            }
    });
    let ambiguous: Vec<Edge> = out
        .ambiguous_edges()
        .filter(|e| e.touches(&human))
        .cloned()
        .collect();
    for e in ambiguous {
        let head = e.other(&human).expect("touches human").clone();
        out = out.replace_edge(&e, e.oriented_towards(&head))?;
    }
    out = out.add_edge(link)?;
    out = out.declare_equivalent(&core, &human)?;
    determine_error_judgement(&out)
}

/// With both labels shown the person's error judgement is `I[Yᴴ ≠ Ŷᴴ]`.
fn determine_error_judgement(d: &Diagram) -> Result<Diagram, ShowError> {
    let (Some(yh), Some(yhath), Some(zh)) = (
        d.node_with_role(&HumanTaskLabel),
        d.node_with_role(&HumanModelPrediction),
        d.node_with_role(&HumanModelError),
    ) else {
        return Ok(d.clone());
    };
    if !(d.is_merged(&yh) && d.is_merged(&yhath)) {
        return Ok(d.clone());
    }
    let mut out =
        d.without_edges_where(|e| e.touches(&zh) && (e.kind() != EdgeKind::Directed || e.to() == &zh));
    for parent in [yh, yhath] {
        out = out.add_edge(Edge::directed(parent, zh.clone()).controlled_by(FunctionTag::ZH))?;
    }
    Ok(out)
}

/// Adds the explanation node `E`, derived from the model `g` alone, and wires
/// it according to the assumed intuition mode.
pub fn attach_explanation(d: &Diagram, mode: IntuitionMode) -> Result<Diagram, ShowError> {
    if d.node_with_role(&Explanation).is_some() {
        return Err(ShowError::ExplanationAlreadyPresent);
    }
    let source = d
        .edges()
        .find(|e| e.controller() == Some(&FunctionTag::G))
        .map(|e| e.from().clone())
        .ok_or(ShowError::NoModelLink)?;
    let e = id(Explanation);
    let mut out = d
        .add_node(Explanation)?
        .add_edge(Edge::directed(source, e.clone()).controlled_by(FunctionTag::G))?;

    // E can only inform approximations that are not already pinned down.
    for role in [HumanTaskLabel, HumanModelPrediction, HumanModelError] {
        let Some(h) = out.node_with_role(&role) else {
            continue;
        };
        if out.is_merged(&h) || is_determined(&out, &h) {
            continue;
        }
        out = out.add_edge(Edge::directed(e.clone(), h))?;
    }

    match mode {
        IntuitionMode::NoAssumption => {}
        IntuitionMode::ActivatesErrorPrior => {
            let h = intuition_node(&out)?;
            let z = out
                .node_with_role(&ModelError)
                .ok_or_else(|| ShowError::UnknownVariable(id(ModelError)))?;
            out = out
                .add_edge(Edge::directed(e.clone(), h.clone()))?
                .add_edge(Edge::correlational(h, z))?;
        }
        IntuitionMode::ExpandsIntuition => {
            let next = VariableRole::Generic(NEXT_INTUITION.to_string());
            out = out
                .add_node(next.clone())?
                .add_edge(Edge::directed(e.clone(), next.canonical_id()))?;
        }
    }
    Ok(out)
}

/// Name of the next-step intuition node added by [`IntuitionMode::ExpandsIntuition`].
pub const NEXT_INTUITION: &str = "H_next";

fn intuition_node(d: &Diagram) -> Result<NodeId, ShowError> {
    d.node_with_role(&Intuition)
        .ok_or_else(|| ShowError::UnknownVariable(id(Intuition)))
}

fn is_determined(d: &Diagram, zh: &NodeId) -> bool {
    d.role(zh) == Some(&HumanModelError)
        && d.node_with_role(&HumanTaskLabel)
            .zip(d.node_with_role(&HumanModelPrediction))
            .is_some_and(|(a, b)| d.is_merged(&a) && d.is_merged(&b))
}

/// Core side: `X —f— Y`, `X →g→ Ŷ`, `Y →z→ Z ←z← Ŷ`.
pub fn core_side() -> Diagram {
    let d = Diagram::new(&[Input, TaskLabel, ModelPrediction, ModelError]).expect("distinct roles");
    wire_core(d)
}

fn wire_core(d: Diagram) -> Diagram {
    let x = id(Input);
    let y = id(TaskLabel);
    let yhat = id(ModelPrediction);
    let z = id(ModelError);
    [
        Edge::ambiguous(x.clone(), y.clone()).controlled_by(FunctionTag::F),
        Edge::directed(x, yhat.clone()).controlled_by(FunctionTag::G),
        Edge::directed(y, z.clone()).controlled_by(FunctionTag::Z),
        Edge::directed(yhat, z).controlled_by(FunctionTag::Z),
    ]
    .into_iter()
    .fold(d, |d, e| d.add_edge(e).expect("core wiring is acyclic"))
}

/// Core side plus the person's approximations, each driven by `X` and the
/// intuitions `H` through the matching human function.
pub fn functional_view() -> Diagram {
    let d = Diagram::new(&[
        Input,
        TaskLabel,
        ModelPrediction,
        ModelError,
        HumanTaskLabel,
        HumanModelPrediction,
        HumanModelError,
        Intuition,
    ])
    .expect("distinct roles");
    let mut d = wire_core(d);
    for role in [HumanTaskLabel, HumanModelPrediction, HumanModelError] {
        let tag = role.controlling_function().expect("human roles are controlled");
        let target = id(role);
        for parent in [Input, Intuition] {
            d = d
                .add_edge(Edge::directed(id(parent), target.clone()).controlled_by(tag.clone()))
                .expect("acyclic");
        }
    }
    d
}

/// Root of the decision tree: the functional view with undirected dashed
/// links among the three human approximations.
pub fn base_diagram() -> Diagram {
    let (yh, yhath, zh) = (id(HumanTaskLabel), id(HumanModelPrediction), id(HumanModelError));
    [
        Edge::ambiguous(yh.clone(), yhath.clone()),
        Edge::ambiguous(yh, zh.clone()),
        Edge::ambiguous(yhath, zh),
    ]
    .into_iter()
    .fold(functional_view(), |d, e| d.add_edge(e).expect("fresh pairs"))
}

/// Diagram for a condition. Operators are applied in a fixed order: task
/// knowledge, then prediction, then explanation.
pub fn build(cond: &Condition) -> Result<Diagram, ShowError> {
    let mut d = base_diagram();
    if cond.task == Task::Emulation {
        d = show(&d, &TaskLabel)?;
    }
    if cond.prediction == Visibility::Shown {
        d = show(&d, &ModelPrediction)?;
        if cond.task == Task::Emulation {
            // Training ties the prediction to the label.
            d = d.add_edge(Edge::correlational(id(TaskLabel), id(ModelPrediction)))?;
        }
    }
    if cond.explanation == Visibility::Shown {
        d = attach_explanation(&d, cond.intuition)?;
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub task: Task,
    pub diagram: Diagram,
    pub shown: Diagram,
    pub hidden: Diagram,
}

/// Two-level tree: task knowledge at the first level, prediction
/// visibility at the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    pub root: Diagram,
    pub emulation: Branch,
    pub discovery: Branch,
}

impl DecisionTree {
    pub fn branches(&self) -> [&Branch; 2] {
        [&self.emulation, &self.discovery]
    }

    /// `(task, prediction visibility, diagram)` for the four leaves.
    pub fn leaves(&self) -> Vec<(Task, Visibility, &Diagram)> {
        self.branches()
            .into_iter()
            .flat_map(|b| {
                [
                    (b.task, Visibility::Shown, &b.shown),
                    (b.task, Visibility::Hidden, &b.hidden),
                ]
            })
            .collect()
    }
}

pub fn decision_tree() -> DecisionTree {
    let root = base_diagram();
    let branch = |task: Task| -> Branch {
        let diagram = match task {
            Task::Emulation => show(&root, &TaskLabel).expect("base has Yᴴ"),
            Task::Discovery => root.clone(),
        };
        let leaf = |p| build(&Condition::new(task, p)).expect("catalog conditions are valid");
        Branch {
            task,
            diagram,
            shown: leaf(Visibility::Shown),
            hidden: leaf(Visibility::Hidden),
        }
    };
    DecisionTree {
        emulation: branch(Task::Emulation),
        discovery: branch(Task::Discovery),
        root,
    }
}

/// Keys accepted by [`catalog`].
pub const CATALOG_KEYS: [&str; 15] = [
    "fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig3g", "fig4a", "fig4b1", "fig4b2",
    "fig4c1", "fig4c2", "fig7", "core",
];

/// Named diagram from the catalog.
pub fn catalog(key: &str) -> Option<Diagram> {
    use IntuitionMode::*;
    use Task::*;
    use Visibility::*;
    let built = |c: Condition| build(&c).expect("catalog conditions are valid");
    let explained = |mode| built(Condition::new(Discovery, Shown).with_explanation(mode));
    Some(match key {
        "core" => core_side(),
        "fig2" => functional_view(),
        "fig3a" => base_diagram(),
        "fig3b" => show(&base_diagram(), &TaskLabel).expect("base has Yᴴ"),
        "fig3c" => base_diagram(),
        "fig3d" => built(Condition::new(Emulation, Shown)),
        "fig3e" => built(Condition::new(Emulation, Hidden)),
        "fig3f" => built(Condition::new(Discovery, Shown)),
        "fig3g" => built(Condition::new(Discovery, Hidden)),
        "fig4a" => attach_explanation(&core_side(), NoAssumption).expect("core has g"),
        "fig4b1" => prediction_subgraph(),
        "fig4b2" => attach_explanation(&prediction_subgraph(), NoAssumption).expect("has g"),
        "fig4c1" => explained(NoAssumption),
        "fig4c2" => explained(ActivatesErrorPrior),
        "fig7" => explained(ExpandsIntuition),
        _ => return None,
    })
}

/// `X →g→ Ŷ` next to the person's guess `Ŷᴴ` driven by `X` and `H`.
fn prediction_subgraph() -> Diagram {
    let d = Diagram::new(&[Input, ModelPrediction, HumanModelPrediction, Intuition]).expect("distinct roles");
    [
        Edge::directed(id(Input), id(ModelPrediction)).controlled_by(FunctionTag::G),
        Edge::directed(id(Input), id(HumanModelPrediction)).controlled_by(FunctionTag::GH),
        Edge::directed(id(Intuition), id(HumanModelPrediction)).controlled_by(FunctionTag::GH),
    ]
    .into_iter()
    .fold(d, |d, e| d.add_edge(e).expect("acyclic"))
}
