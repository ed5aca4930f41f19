//! Causal diagrams for reasoning about what a person can learn from a model's
//! prediction and explanation, plus the machinery to check those diagrams:
//! a separation-query engine with a brute-force oracle, structural causal
//! models with a permutation test for conditional independence, simulated
//! study participants, and the statistics used to analyse them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and parallel orchestration live in the `hai` companion crate.

#![no_std]

extern crate alloc;

pub mod agents;
pub mod ci;
pub mod claims;
pub mod conditions;
pub mod dsep;
pub mod graph;
pub mod scm;
pub mod seed;
pub mod soundness;
pub mod stats;
pub mod study;

pub use conditions::{
    attach_explanation, build, catalog, decision_tree, show, Condition, DecisionTree, IntuitionMode,
    CATALOG_KEYS,
};
pub use dsep::{brute_force_separated, d_separated, SeparationQuery, Verdict};
pub use graph::{Diagram, Edge, EdgeKind, FunctionTag, GraphError, NodeId, VariableRole};
