//! Structural causal models over realized diagrams.
//!
//! Inputs live on an `r × r` grid over the unit square and are stored as a
//! cell index; every other variable is a bit. Each node is a function of its
//! diagram parents plus independent noise, so any separation in the diagram
//! is an independence in the sampled data.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Diagram, EdgeKind, NodeId, VariableRole};
use crate::seed::{derive_seed, rng_indexed, Rng};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScmError {
    #[error("diagram still has ambiguous links")]
    NotRealized,
    #[error("no structural rule for node `{0}`")]
    UnboundNode(NodeId),
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("sample size must be at least 1")]
    EmptySample,
}

/// `x[feature] > cut`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub feature: usize,
    pub cut: f64,
}

impl Threshold {
    pub const fn new(feature: usize, cut: f64) -> Self {
        Threshold { feature, cut }
    }

    pub fn eval(&self, x: [f64; 2]) -> bool {
        x[self.feature] > self.cut
    }
}

/// Flip probabilities for nodes that are not exact functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Noise {
    /// Human approximations the person forms unaided.
    pub approximation: f64,
    /// Human nodes copying a shown core variable.
    pub shown: f64,
    pub intuition: f64,
    pub generic: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise {
            approximation: 0.2,
            shown: 0.0,
            intuition: 0.2,
            generic: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSpec {
    pub resolution: u32,
    /// Ground truth `f`.
    pub task: Threshold,
    /// Model `g`.
    pub model: Threshold,
    /// The person's unaided guess at `f`.
    pub human_task: Threshold,
    /// The person's unaided guess at `g`.
    pub human_model: Threshold,
    /// Explanations fire within this distance of the model's cut.
    pub explanation_band: f64,
    pub noise: Noise,
    /// Give generic nodes random truth tables instead of rejecting them.
    pub bind_generic: bool,
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec {
            resolution: 10,
            task: Threshold::new(0, 0.5),
            model: Threshold::new(0, 0.6),
            human_task: Threshold::new(0, 0.4),
            human_model: Threshold::new(1, 0.5),
            explanation_band: 0.15,
            noise: Noise::default(),
            bind_generic: false,
        }
    }
}

impl WorldSpec {
    pub fn validate(&self) -> Result<(), ScmError> {
        let bad = |m: &str| Err(ScmError::InvalidWorld(m.to_string()));
        if !(1..=256).contains(&self.resolution) {
            return bad("resolution must be in 1..=256");
        }
        for t in [self.task, self.model, self.human_task, self.human_model] {
            if t.feature > 1 || !t.cut.is_finite() {
                return bad("thresholds need feature 0 or 1 and a finite cut");
            }
        }
        let n = self.noise;
        for p in [n.approximation, n.shown, n.intuition, n.generic] {
            if !(0.0..=1.0).contains(&p) {
                return bad("flip probabilities must lie in [0, 1]");
            }
        }
        if self.explanation_band.is_nan() || self.explanation_band < 0.0 {
            return bad("explanation band must be non-negative");
        }
        Ok(())
    }

    pub fn cells(&self) -> u32 {
        self.resolution * self.resolution
    }

    /// Centre of grid cell `c`.
    pub fn point(&self, c: u32) -> [f64; 2] {
        let r = self.resolution;
        let at = |k: u32| (f64::from(k) + 0.5) / f64::from(r);
        [at(c / r), at(c % r)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Input {
    Node(usize),
    Latent(usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Base {
    Zero,
    Threshold(Threshold),
    /// The two thresholds disagree.
    Disagreement(Threshold, Threshold),
    /// Near the model's cut.
    Band(Threshold, f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    UniformInput,
    /// Input drawn uniformly among cells whose ground-truth label equals the
    /// parity of the inputs.
    InputGiven(Vec<Input>),
    Threshold(usize, Threshold),
    Bernoulli(f64),
    Differ(usize, usize),
    Copy(usize, f64),
    Noisy {
        base: Base,
        x: Option<usize>,
        others: Vec<Input>,
        flip: f64,
    },
    Table {
        x: Option<usize>,
        inputs: Vec<Input>,
        table: Vec<bool>,
        flip: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    world: WorldSpec,
    diagram: Diagram,
    /// Observed nodes in topological order.
    slots: Vec<NodeId>,
    rules: Vec<Rule>,
    latents: usize,
    cells_by_label: [Vec<u32>; 2],
}

pub fn instantiate(d: &Diagram, w: &WorldSpec, seed: u64) -> Result<Scm, ScmError> {
    w.validate()?;
    if !d.is_realized() {
        return Err(ScmError::NotRealized);
    }
    let order = d.topological_order().ok_or(ScmError::NotRealized)?;
    let slot: BTreeMap<&NodeId, usize> = order.iter().enumerate().map(|(i, n)| (n, i)).collect();

    let mut latent_inputs: BTreeMap<&NodeId, Vec<Input>> = BTreeMap::new();
    let mut latents = 0;
    for e in d.edges().filter(|e| e.kind() == EdgeKind::Correlational) {
        for end in [e.from(), e.to()] {
            latent_inputs.entry(end).or_default().push(Input::Latent(latents));
        }
        latents += 1;
    }

    let mut cells_by_label = [Vec::new(), Vec::new()];
    for c in 0..w.cells() {
        cells_by_label[usize::from(w.task.eval(w.point(c)))].push(c);
    }
    let task_rate = cells_by_label[1].len() as f64 / f64::from(w.cells());
    let model_rate =
        (0..w.cells()).filter(|&c| w.model.eval(w.point(c))).count() as f64 / f64::from(w.cells());

    let mut rules = Vec::with_capacity(order.len());
    for id in &order {
        let role = d.role(id).expect("ordered node exists");
        let parents: Vec<&NodeId> = d.parents(id).collect();
        let unbound = || ScmError::UnboundNode(id.clone());
        let find = |r: VariableRole| parents.iter().find(|p| d.role(p) == Some(&r)).map(|p| slot[*p]);
        let x = find(VariableRole::Input);
        let latent = latent_inputs.get(id).cloned().unwrap_or_default();
        let rest = |skip: Option<usize>| -> Vec<Input> {
            parents
                .iter()
                .map(|p| slot[*p])
                .filter(|&s| Some(s) != skip)
                .map(Input::Node)
                .chain(latent.iter().copied())
                .collect()
        };
        let only = |allowed: &[Option<usize>]| parents.iter().all(|p| allowed.contains(&Some(slot[*p])));

        let rule = match role {
            VariableRole::Input => {
                if parents.is_empty() && latent.is_empty() {
                    Rule::UniformInput
                } else {
                    Rule::InputGiven(rest(None))
                }
            }
            VariableRole::TaskLabel | VariableRole::ModelPrediction => {
                let (t, rate) = if *role == VariableRole::TaskLabel {
                    (w.task, task_rate)
                } else {
                    (w.model, model_rate)
                };
                match x {
                    Some(xs) if only(&[x]) => Rule::Threshold(xs, t),
                    None if parents.is_empty() => Rule::Bernoulli(rate),
                    _ => return Err(unbound()),
                }
            }
            VariableRole::ModelError => {
                let y = find(VariableRole::TaskLabel);
                let yhat = find(VariableRole::ModelPrediction);
                match (y, yhat) {
                    (Some(a), Some(b)) if only(&[y, yhat]) => Rule::Differ(a, b),
                    _ => return Err(unbound()),
                }
            }
            VariableRole::HumanTaskLabel | VariableRole::HumanModelPrediction => {
                let core = role.core_counterpart().expect("human label has a counterpart");
                let counterpart = find(core);
                let shown = counterpart.is_some() && parents.len() == 1 && d.is_merged(id);
                if shown {
                    Rule::Copy(counterpart.expect("checked"), w.noise.shown)
                } else {
                    let t = if *role == VariableRole::HumanTaskLabel {
                        w.human_task
                    } else {
                        w.human_model
                    };
                    Rule::Noisy {
                        base: if x.is_some() {
                            Base::Threshold(t)
                        } else {
                            Base::Zero
                        },
                        x,
                        others: rest(x),
                        flip: w.noise.approximation,
                    }
                }
            }
            VariableRole::HumanModelError => {
                let yh = find(VariableRole::HumanTaskLabel);
                let yhath = find(VariableRole::HumanModelPrediction);
                let determined = parents.len() == 2
                    && yh.is_some()
                    && yhath.is_some()
                    && parents.iter().all(|p| d.is_merged(p));
                if determined {
                    Rule::Differ(yh.expect("checked"), yhath.expect("checked"))
                } else {
                    Rule::Noisy {
                        base: if x.is_some() {
                            Base::Disagreement(w.human_task, w.human_model)
                        } else {
                            Base::Zero
                        },
                        x,
                        others: rest(x),
                        flip: w.noise.approximation,
                    }
                }
            }
            VariableRole::Intuition => {
                let others = rest(None);
                let flip = if others.is_empty() { 0.5 } else { w.noise.intuition };
                Rule::Noisy {
                    base: Base::Zero,
                    x: None,
                    others,
                    flip,
                }
            }
            VariableRole::Explanation => match x {
                Some(_) => Rule::Noisy {
                    base: Base::Band(w.model, w.explanation_band),
                    x,
                    others: rest(x),
                    flip: 0.0,
                },
                None => return Err(unbound()),
            },
            VariableRole::Generic(_) => {
                if !w.bind_generic {
                    return Err(unbound());
                }
                let inputs = rest(x);
                let width = inputs.len() + usize::from(x.is_some());
                if width > 16 {
                    return Err(unbound());
                }
                let mut r = rng_indexed(derive_seed(seed, "truth-table"), id.as_str(), 0);
                let table = (0..1usize << width).map(|_| r.gen::<bool>()).collect();
                let flip = if width == 0 { 0.5 } else { w.noise.generic };
                Rule::Table {
                    x,
                    inputs,
                    table,
                    flip,
                }
            }
        };
        rules.push(rule);
    }

    Ok(Scm {
        world: w.clone(),
        diagram: d.clone(),
        slots: order,
        rules,
        latents,
        cells_by_label,
    })
}

impl Scm {
    pub fn world(&self) -> &WorldSpec {
        &self.world
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    /// Observed nodes in evaluation order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.slots
    }

    /// Draws rows `[0, rows)` of one chunk. Chunks are independently seeded,
    /// so they can be generated in any order.
    pub fn sample_chunk(&self, seed: u64, chunk: u64, rows: usize) -> Dataset {
        let mut rng = rng_indexed(seed, "sample", chunk);
        let mut columns = vec![Vec::with_capacity(rows); self.slots.len()];
        let mut values = vec![0u32; self.slots.len()];
        let mut latent = vec![false; self.latents];
        for _ in 0..rows {
            for l in latent.iter_mut() {
                *l = rng.gen();
            }
            for (i, rule) in self.rules.iter().enumerate() {
                values[i] = self.eval(rule, &values, &latent, &mut rng);
            }
            for (col, v) in columns.iter_mut().zip(&values) {
                col.push(*v);
            }
        }
        Dataset {
            columns: self.slots.clone(),
            data: columns,
        }
    }

    fn eval(&self, rule: &Rule, values: &[u32], latent: &[bool], rng: &mut Rng) -> u32 {
        let w = &self.world;
        let bit = |i: &Input| match *i {
            Input::Node(s) => values[s] & 1 == 1,
            Input::Latent(l) => latent[l],
        };
        let flip = |b: bool, p: f64, rng: &mut Rng| {
            if p > 0.0 && rng.gen::<f64>() < p {
                !b
            } else {
                b
            }
        };
        match rule {
            Rule::UniformInput => rng.gen_range(0..w.cells()),
            Rule::InputGiven(inputs) => {
                let parity = inputs.iter().fold(false, |acc, i| acc ^ bit(i));
                let pool = match &self.cells_by_label[usize::from(parity)] {
                    p if p.is_empty() => &self.cells_by_label[usize::from(!parity)],
                    p => p,
                };
                pool[rng.gen_range(0..pool.len())]
            }
            Rule::Threshold(x, t) => u32::from(t.eval(w.point(values[*x]))),
            Rule::Bernoulli(p) => u32::from(rng.gen::<f64>() < *p),
            Rule::Differ(a, b) => u32::from(values[*a] != values[*b]),
            Rule::Copy(src, p) => u32::from(flip(values[*src] == 1, *p, rng)),
            Rule::Noisy {
                base,
                x,
                others,
                flip: p,
            } => {
                let point = x.map(|s| w.point(values[s]));
                let b = match (base, point) {
                    (Base::Threshold(t), Some(pt)) => t.eval(pt),
                    (Base::Disagreement(a, b), Some(pt)) => a.eval(pt) != b.eval(pt),
                    (Base::Band(t, width), Some(pt)) => (pt[t.feature] - t.cut).abs() <= *width,
                    _ => false,
                };
                let b = others.iter().fold(b, |acc, i| acc ^ bit(i));
                u32::from(flip(b, *p, rng))
            }
            Rule::Table {
                x,
                inputs,
                table,
                flip: p,
            } => {
                let mut idx = 0usize;
                if let Some(s) = x {
                    idx = usize::from(w.point(values[*s])[0] > 0.5);
                }
                for i in inputs {
                    idx = (idx << 1) | usize::from(bit(i));
                }
                u32::from(flip(table[idx], *p, rng))
            }
        }
    }
}

/// Rows per independently seeded chunk.
pub const CHUNK_ROWS: usize = 4096;

/// `n` i.i.d. rows; identical for a given `(scm, n, seed)`.
pub fn sample(s: &Scm, n: usize, seed: u64) -> Result<Dataset, ScmError> {
    if n == 0 {
        return Err(ScmError::EmptySample);
    }
    let parts: Vec<Dataset> = chunk_sizes(n)
        .enumerate()
        .map(|(i, rows)| s.sample_chunk(seed, i as u64, rows))
        .collect();
    Ok(Dataset::concat(parts))
}

/// Row counts of the chunks making up an `n`-row sample.
pub fn chunk_sizes(n: usize) -> impl Iterator<Item = usize> {
    (0..n.div_ceil(CHUNK_ROWS)).map(move |i| CHUNK_ROWS.min(n - i * CHUNK_ROWS))
}

/// Column-major sample table. Hidden variables are not included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    columns: Vec<NodeId>,
    data: Vec<Vec<u32>>,
}

/// One row, keyed by node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub values: BTreeMap<NodeId, u32>,
}

impl Sample {
    pub fn get(&self, id: &str) -> Option<u32> {
        self.values.get(&NodeId::from(id)).copied()
    }
}

impl Dataset {
    pub fn new(columns: Vec<NodeId>, data: Vec<Vec<u32>>) -> Self {
        assert_eq!(columns.len(), data.len());
        assert!(data.windows(2).all(|w| w[0].len() == w[1].len()));
        Dataset { columns, data }
    }

    pub fn concat(parts: Vec<Dataset>) -> Dataset {
        let mut it = parts.into_iter();
        let mut out = match it.next() {
            Some(d) => d,
            None => return Dataset::new(Vec::new(), Vec::new()),
        };
        for part in it {
            assert_eq!(part.columns, out.columns);
            for (col, more) in out.data.iter_mut().zip(part.data) {
                col.extend(more);
            }
        }
        out
    }

    pub fn columns(&self) -> &[NodeId] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, id: &NodeId) -> Option<&[u32]> {
        self.columns
            .iter()
            .position(|c| c == id)
            .map(|i| self.data[i].as_slice())
    }

    pub fn row(&self, i: usize) -> Sample {
        Sample {
            values: self
                .columns
                .iter()
                .zip(&self.data)
                .map(|(c, col)| (c.clone(), col[i]))
                .collect(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.len()).map(|i| self.row(i))
    }
}
