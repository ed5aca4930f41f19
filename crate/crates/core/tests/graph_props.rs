mod common;

use common::recipe;
use hai_core::graph::{Diagram, EdgeKind};
use proptest::prelude::*;

/// Orientations of the ambiguous links that keep the directed part acyclic,
/// counted independently of `realizations`.
fn acyclic_orientations(d: &Diagram) -> usize {
    let amb: Vec<_> = d.ambiguous_edges().cloned().collect();
    let mut count = 0;
    for mask in 0..1u32 << amb.len() {
        let mut g = Some(d.clone());
        for (i, e) in amb.iter().enumerate() {
            let head = if mask & (1 << i) != 0 { e.to() } else { e.from() };
            g = g.and_then(|g| g.remove_edge(e).add_edge(e.oriented_towards(head)).ok());
        }
        if g.is_some() {
            count += 1;
        }
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn realizations_are_valid_and_counted(r in recipe(8, 4)) {
        let d = r.build();
        let reals = d.realizations();
        let k = d.ambiguous_edges().count();
        prop_assert!(reals.len() <= 1 << k);
        prop_assert!(!reals.is_empty());
        for real in &reals {
            prop_assert!(real.validate().is_ok());
            prop_assert!(real.edges().all(|e| e.kind() != EdgeKind::Ambiguous));
        }
        prop_assert_eq!(reals.len(), acyclic_orientations(&d));
    }

    #[test]
    fn equality_ignores_insertion_order(r in recipe(8, 3)) {
        let d = r.build();
        let mut nodes: Vec<_> = d.nodes().map(|(i, r)| (i.clone(), r.clone())).collect();
        let mut edges: Vec<_> = d.edges().cloned().collect();
        nodes.reverse();
        edges.reverse();
        let eqs: Vec<_> = d.equivalences().map(|(a, b)| (b.clone(), a.clone())).collect();
        prop_assert_eq!(Diagram::from_parts(nodes, edges, eqs).unwrap(), d);
    }

    #[test]
    fn directed_part_stays_acyclic(r in recipe(10, 4)) {
        prop_assert!(r.build().topological_order().is_some());
    }
}
