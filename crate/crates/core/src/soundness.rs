//! Monte Carlo check that every separation the engine reports shows up as
//! a statistical independence in data sampled from a compatible model.
//! Connected verdicts are never asserted to be dependent: deterministic
//! nodes routinely create independencies the graph does not show.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ci::{ci_test, CiError, CiOptions, CiResult};
use crate::claims::claim_suite;
use crate::conditions::{catalog, CATALOG_KEYS};
use crate::dsep::{d_separated, DsepError, SeparationQuery, Verdict};
use crate::graph::{Diagram, Edge, NodeId, VariableRole};
use crate::scm::{instantiate, sample, Dataset, ScmError, WorldSpec};
use crate::seed::{derive_seed_indexed, rng};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SoundnessError {
    #[error("{world}: {source}")]
    Dsep { world: String, source: DsepError },
    #[error("{world}: {source}")]
    Scm { world: String, source: ScmError },
    #[error("{world}, {query}: {source}")]
    Ci {
        world: String,
        query: String,
        source: CiError,
    },
}

/// A realized diagram, the model that generates its data, and the queries to
/// check.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub label: String,
    /// Diagram the verdicts come from.
    pub diagram: Diagram,
    /// Diagram the data comes from, when it differs (mutation tests).
    pub generator: Option<Diagram>,
    pub spec: WorldSpec,
    pub queries: Vec<SeparationQuery>,
}

impl World {
    pub fn new(
        label: impl Into<String>,
        diagram: Diagram,
        spec: WorldSpec,
        queries: Vec<SeparationQuery>,
    ) -> Self {
        World {
            label: label.into(),
            diagram,
            generator: None,
            spec,
            queries,
        }
    }

    fn generating_diagram(&self) -> &Diagram {
        self.generator.as_ref().unwrap_or(&self.diagram)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoundnessOptions {
    pub n: usize,
    pub alpha: f64,
    /// Replica floor; the cap is raised so the corrected level is reachable.
    pub permutations: usize,
    pub seed: u64,
    /// Also test connected queries (reported, never asserted).
    pub test_connected: bool,
}

impl Default for SoundnessOptions {
    fn default() -> Self {
        SoundnessOptions {
            n: 50_000,
            alpha: 0.01,
            permutations: 1000,
            seed: 0,
            test_connected: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub world: String,
    pub query: SeparationQuery,
    pub separated: bool,
    pub ci: Option<CiResult>,
}

impl QueryOutcome {
    /// Separated in the graph but dependent in the data.
    pub fn violation(&self) -> bool {
        self.separated && self.ci.is_some_and(|c| c.dependent)
    }

    /// Connected in the graph but no dependence detected.
    pub fn extra_independence(&self) -> bool {
        !self.separated && self.ci.is_some_and(|c| !c.dependent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub outcomes: Vec<QueryOutcome>,
    /// Per-test level after Bonferroni correction.
    pub level: f64,
    pub worlds: usize,
}

impl SoundnessReport {
    pub fn violations(&self) -> impl Iterator<Item = &QueryOutcome> {
        self.outcomes.iter().filter(|o| o.violation())
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn tested_separations(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.separated && o.ci.is_some())
            .count()
    }
}

/// One pending query: verdict known, test not yet run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub world: usize,
    pub query: usize,
    pub separated: bool,
}

impl Job {
    pub fn needs_test(&self, opts: &SoundnessOptions) -> bool {
        self.separated || opts.test_connected
    }
}

/// Verdicts for every query, plus the corrected level.
pub fn plan(worlds: &[World], opts: &SoundnessOptions) -> Result<(Vec<Job>, f64), SoundnessError> {
    let mut jobs = Vec::new();
    for (wi, w) in worlds.iter().enumerate() {
        for (qi, q) in w.queries.iter().enumerate() {
            let verdict = d_separated(&w.diagram, q).map_err(|source| SoundnessError::Dsep {
                world: w.label.clone(),
                source,
            })?;
            jobs.push(Job {
                world: wi,
                query: qi,
                separated: verdict == Verdict::Separated,
            });
        }
    }
    let tests = jobs.iter().filter(|j| j.needs_test(opts)).count().max(1);
    Ok((jobs, opts.alpha / tests as f64))
}

pub fn sample_world(world: &World, index: usize, opts: &SoundnessOptions) -> Result<Dataset, SoundnessError> {
    let err = |source| SoundnessError::Scm {
        world: world.label.clone(),
        source,
    };
    let seed = derive_seed_indexed(opts.seed, "world", index as u64);
    let scm = instantiate(world.generating_diagram(), &world.spec, seed).map_err(err)?;
    sample(&scm, opts.n, seed).map_err(err)
}

/// Options for one test. The replica cap is at least `2 / level` so a
/// rejection is possible, and replicas stop at the first exceedance.
pub fn ci_options(job: &Job, level: f64, opts: &SoundnessOptions) -> CiOptions {
    let needed = libm::ceil(2.0 / level) as usize;
    CiOptions {
        alpha: level,
        permutations: opts.permutations.max(needed),
        seed: derive_seed_indexed(opts.seed, "ci", ((job.world as u64) << 32) | job.query as u64),
        stop_after_exceedances: Some(1),
    }
}

pub fn run_job(
    world: &World,
    data: &Dataset,
    job: &Job,
    level: f64,
    opts: &SoundnessOptions,
) -> Result<QueryOutcome, SoundnessError> {
    let q = &world.queries[job.query];
    let ci = if job.needs_test(opts) {
        // Function tags are context, not columns.
        let cols = |s: &alloc::collections::BTreeSet<NodeId>| -> Vec<NodeId> {
            s.iter().filter(|n| world.diagram.contains(n)).cloned().collect()
        };
        let result = ci_test(
            data,
            &cols(&q.a),
            &cols(&q.b),
            &cols(&q.given),
            ci_options(job, level, opts),
        )
        .map_err(|source| SoundnessError::Ci {
            world: world.label.clone(),
            query: q.to_string(),
            source,
        })?;
        Some(result)
    } else {
        None
    };
    Ok(QueryOutcome {
        world: world.label.clone(),
        query: q.clone(),
        separated: job.separated,
        ci,
    })
}

/// Sequential driver; the `hai` crate runs the same steps in parallel.
pub fn run_worlds(worlds: &[World], opts: &SoundnessOptions) -> Result<SoundnessReport, SoundnessError> {
    let (jobs, level) = plan(worlds, opts)?;
    let mut outcomes = Vec::with_capacity(jobs.len());
    for (wi, w) in worlds.iter().enumerate() {
        let data = sample_world(w, wi, opts)?;
        for job in jobs.iter().filter(|j| j.world == wi) {
            outcomes.push(run_job(w, &data, job, level, opts)?);
        }
    }
    Ok(SoundnessReport {
        outcomes,
        level,
        worlds: worlds.len(),
    })
}

/// Checks a single realized diagram.
pub fn soundness_check(
    d: &Diagram,
    w: &WorldSpec,
    queries: Vec<SeparationQuery>,
    opts: &SoundnessOptions,
) -> Result<SoundnessReport, SoundnessError> {
    run_worlds(&[World::new("world", d.clone(), w.clone(), queries)], opts)
}

/// Every single-pair query with an empty conditioning set or the input alone.
pub fn pair_queries(d: &Diagram) -> Vec<SeparationQuery> {
    let x = d.node_with_role(&VariableRole::Input);
    let ids: Vec<&NodeId> = d.node_ids().collect();
    let mut out = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let mut givens = alloc::vec![Vec::new()];
            if let Some(x) = &x {
                if x != *a && x != *b {
                    givens.push(alloc::vec![x.as_str()]);
                }
            }
            for g in givens {
                let q = SeparationQuery::new([a.as_str()], [b.as_str()], g);
                // Pairs merged into one node are not queries.
                if d_separated(d, &q).is_ok() {
                    out.push(q);
                }
            }
        }
    }
    out
}

/// One world per distinct realization of the catalog, checked against the
/// claim suite and all pair queries.
pub fn catalog_worlds() -> Vec<World> {
    catalog_worlds_with(|_| None)
}

/// Like [`catalog_worlds`], with some keys replaced. Verdicts come from the
/// replacement; when realization counts line up, data still comes from the
/// catalog diagram, so a wrong replacement shows up as a violation.
pub fn catalog_worlds_with(override_diagram: impl Fn(&str) -> Option<Diagram>) -> Vec<World> {
    let spec = WorldSpec {
        bind_generic: true,
        ..WorldSpec::default()
    };
    let claims = claim_suite();
    let mut seen: Vec<(Diagram, Option<Diagram>)> = Vec::new();
    let mut worlds: Vec<World> = Vec::new();
    for key in CATALOG_KEYS {
        let original = catalog(key).expect("catalog key");
        let replaced = override_diagram(key);
        let d = replaced.clone().unwrap_or_else(|| original.clone());
        let generators: Vec<Option<Diagram>> = match &replaced {
            None => alloc::vec![None; d.realizations().len()],
            Some(_) => {
                let orig = original.realizations();
                if orig.len() == d.realizations().len() {
                    orig.into_iter().map(Some).collect()
                } else {
                    alloc::vec![None; d.realizations().len()]
                }
            }
        };
        for (ri, (r, generator)) in d.realizations().into_iter().zip(generators).enumerate() {
            let entry = (r.clone(), generator.clone());
            let claimed = claims
                .iter()
                .filter(|c| c.diagram == key)
                .map(|c| c.query.clone());
            if let Some(i) = seen.iter().position(|e| *e == entry) {
                for q in claimed {
                    if !worlds[i].queries.contains(&q) {
                        worlds[i].queries.push(q);
                    }
                }
                continue;
            }
            let mut queries: Vec<SeparationQuery> = claimed.collect();
            queries.extend(pair_queries(&r));
            let mut w = World::new(format!("{key}/r{ri}"), r, spec.clone(), queries);
            w.generator = generator;
            worlds.push(w);
            seen.push(entry);
        }
    }
    worlds
}

/// Random DAGs over generic binary nodes, some with correlational links.
pub fn random_worlds(count: usize, nodes: usize, seed: u64) -> Vec<World> {
    let mut r = rng(seed, "random-worlds");
    let spec = WorldSpec {
        bind_generic: true,
        ..WorldSpec::default()
    };
    (0..count)
        .map(|k| {
            let names: Vec<String> = (0..nodes).map(|i| format!("V{i}")).collect();
            let roles: Vec<VariableRole> = names.iter().map(|n| VariableRole::Generic(n.clone())).collect();
            let mut d = Diagram::new(&roles).expect("distinct names");
            for i in 0..nodes {
                for j in i + 1..nodes {
                    let roll: f64 = r.gen();
                    let edge = if roll < 0.4 {
                        Some(Edge::directed(names[i].as_str(), names[j].as_str()))
                    } else if roll < 0.5 {
                        Some(Edge::correlational(names[i].as_str(), names[j].as_str()))
                    } else {
                        None
                    };
                    if let Some(e) = edge {
                        d = d.add_edge(e).expect("forward edges stay acyclic");
                    }
                }
            }
            let mut queries = Vec::new();
            for i in 0..nodes {
                for j in i + 1..nodes {
                    queries.push(SeparationQuery::new([names[i].as_str()], [names[j].as_str()], []));
                    for g in (0..nodes).filter(|&g| g != i && g != j) {
                        queries.push(SeparationQuery::new(
                            [names[i].as_str()],
                            [names[j].as_str()],
                            [names[g].as_str()],
                        ));
                    }
                }
            }
            World::new(format!("random{k}"), d, spec.clone(), queries)
        })
        .collect()
}
