#![allow(dead_code)]

use hai_core::dsep::{d_separated, DsepError, SeparationQuery};
use hai_core::graph::{Diagram, Edge, NodeId, VariableRole};
use proptest::prelude::*;
use proptest::sample::Index;

/// Recipe for a random diagram over generic nodes `N0..`.
#[derive(Debug, Clone)]
pub struct Recipe {
    pub nodes: usize,
    /// Topological order of the directed part.
    pub order: Vec<usize>,
    /// One code per unordered pair, in `(i, j)` order over `order`.
    pub codes: Vec<u8>,
    pub merge: Option<Index>,
    pub max_ambiguous: usize,
}

/// Named roles first, so counterpart pairs exist for merging.
const POOL: [&str; 9] = ["Y", "YH", "Yhat", "YhatH", "Z", "ZH", "X", "H", "E"];
const PAIRS: [(usize, usize); 3] = [(0, 1), (2, 3), (4, 5)];

pub fn name(i: usize) -> String {
    match POOL.get(i) {
        Some(s) => s.to_string(),
        None => format!("N{i}"),
    }
}

pub fn recipe(max_nodes: usize, max_ambiguous: usize) -> impl Strategy<Value = Recipe> {
    (2..=max_nodes).prop_flat_map(move |n| {
        (
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            proptest::collection::vec(0u8..12, n * (n - 1) / 2),
            proptest::option::weighted(0.3, any::<Index>()),
        )
            .prop_map(move |(order, codes, merge)| Recipe {
                nodes: n,
                order,
                codes,
                merge,
                max_ambiguous,
            })
    })
}

impl Recipe {
    pub fn build(&self) -> Diagram {
        let n = self.nodes;
        let roles: Vec<VariableRole> = (0..n).map(|i| VariableRole::from_symbol(&name(i))).collect();
        let mut d = Diagram::new(&roles).unwrap();
        let mut latents = 16usize.saturating_sub(n);
        let mut ambiguous = self.max_ambiguous;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let (u, v) = (name(self.order[i]), name(self.order[j]));
                let code = self.codes[k];
                k += 1;
                let edge = match code {
                    0..=3 => Some(Edge::directed(u.as_str(), v.as_str())),
                    4 if latents > 0 => {
                        latents -= 1;
                        Some(Edge::correlational(u.as_str(), v.as_str()))
                    }
                    5 if ambiguous > 0 => {
                        ambiguous -= 1;
                        Some(Edge::ambiguous(u.as_str(), v.as_str()))
                    }
                    _ => None,
                };
                if let Some(e) = edge {
                    d = d.add_edge(e).unwrap();
                }
            }
        }
        if let (Some(pick), true) = (&self.merge, n >= 3) {
            let pairs: Vec<_> = PAIRS.iter().filter(|(_, b)| *b < n).collect();
            let &(a, b) = pairs[pick.index(pairs.len())];
            let m = d
                .declare_equivalent(&NodeId::new(name(a)), &NodeId::new(name(b)))
                .expect("counterpart pair");
            let c = (0..n).find(|&c| c != a && c != b).unwrap();
            let probe = SeparationQuery::new([name(a).as_str()], [name(c).as_str()], []);
            // Merging ends of a longer directed path would close a cycle.
            if !matches!(d_separated(&m, &probe), Err(DsepError::MergeCycle)) {
                d = m;
            }
        }
        d
    }
}

/// A query over the diagram's nodes: each node lands in `a`, `b`, the
/// conditioning set or nowhere.
pub fn query_from(d: &Diagram, picks: &[u8]) -> Option<SeparationQuery> {
    let ids: Vec<&str> = d.node_ids().map(NodeId::as_str).collect();
    let (mut a, mut b, mut given) = (Vec::new(), Vec::new(), Vec::new());
    for (id, p) in ids.iter().zip(picks.iter().cycle()) {
        match p % 5 {
            0 => a.push(*id),
            1 => b.push(*id),
            2 | 3 => given.push(*id),
            _ => {}
        }
    }
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some(SeparationQuery::new(a, b, given))
}
