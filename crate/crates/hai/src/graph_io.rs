//! Diagram files: a JSON document for import/export and DOT for rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use hai_core::conditions::{catalog, CATALOG_KEYS};
use hai_core::graph::{Diagram, Edge, EdgeKind, FunctionTag, NodeId, VariableRole};
use serde::{Deserialize, Serialize};

use crate::error::Failure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub role: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindDoc {
    Directed,
    Ambiguous,
    Correlational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub kind: KindDoc,
    #[serde(default)]
    pub controller: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramDoc {
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub equivalences: Vec<[String; 2]>,
}

impl DiagramDoc {
    pub fn from_diagram(d: &Diagram) -> DiagramDoc {
        DiagramDoc {
            nodes: d
                .nodes()
                .map(|(id, role)| NodeDoc {
                    id: id.to_string(),
                    role: role.symbol().to_string(),
                })
                .collect(),
            edges: d
                .edges()
                .map(|e| EdgeDoc {
                    from: e.from().to_string(),
                    to: e.to().to_string(),
                    kind: match e.kind() {
                        EdgeKind::Directed => KindDoc::Directed,
                        EdgeKind::Ambiguous => KindDoc::Ambiguous,
                        EdgeKind::Correlational => KindDoc::Correlational,
                    },
                    controller: e.controller().map(|t| t.symbol().to_string()),
                })
                .collect(),
            equivalences: d
                .equivalences()
                .map(|(a, b)| [a.to_string(), b.to_string()])
                .collect(),
        }
    }

    pub fn to_diagram(&self) -> Result<Diagram, Failure> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| (NodeId::new(n.id.as_str()), VariableRole::from_symbol(&n.role)));
        let edges = self.edges.iter().map(|e| {
            let kind = match e.kind {
                KindDoc::Directed => EdgeKind::Directed,
                KindDoc::Ambiguous => EdgeKind::Ambiguous,
                KindDoc::Correlational => EdgeKind::Correlational,
            };
            Edge::new(
                e.from.as_str(),
                e.to.as_str(),
                kind,
                e.controller.as_deref().map(FunctionTag::from_symbol),
            )
        });
        let eqs = self
            .equivalences
            .iter()
            .map(|[a, b]| (NodeId::new(a.as_str()), NodeId::new(b.as_str())));
        Diagram::from_parts(nodes, edges, eqs)
            .map_err(|v| Failure::Invalid(format!("diagram is not well formed: {v:?}")))
    }
}

pub fn to_json(d: &Diagram) -> String {
    let mut s = serde_json::to_string_pretty(&DiagramDoc::from_diagram(d)).expect("diagram serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<Diagram, Failure> {
    let doc: DiagramDoc =
        serde_json::from_str(text).map_err(|e| Failure::Invalid(format!("diagram JSON: {e}")))?;
    doc.to_diagram()
}

/// A catalog key or a path to a diagram JSON file.
pub fn load_diagram(spec: &str) -> Result<Diagram, Failure> {
    if let Some(d) = catalog(spec) {
        return Ok(d);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(Failure::Unknown(format!(
            "`{spec}` is neither a catalog key ({}) nor a diagram file",
            CATALOG_KEYS.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{spec}: {e}")))?;
    from_json(&text)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering. Equivalent nodes share one box; dashed lines are
/// ambiguous links, dashed double arrows correlational ones; controllers sit
/// in boxed edge labels.
pub fn to_dot(d: &Diagram, name: &str) -> String {
    // Representative of each node: the smallest id in its equivalence class.
    let mut rep: BTreeMap<NodeId, NodeId> = d.node_ids().map(|n| (n.clone(), n.clone())).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (a, b) in d.equivalences() {
            let (ra, rb) = (rep[a].clone(), rep[b].clone());
            if ra != rb {
                let lo = ra.clone().min(rb.clone());
                for v in rep.values_mut() {
                    if *v == ra || *v == rb {
                        *v = lo.clone();
                    }
                }
                changed = true;
            }
        }
    }
    let mut members: BTreeMap<NodeId, Vec<&VariableRole>> = BTreeMap::new();
    for (id, role) in d.nodes() {
        members.entry(rep[id].clone()).or_default().push(role);
    }

    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  rankdir=LR;\n  node [shape=ellipse];\n");
    for (id, roles) in &members {
        let label: Vec<&str> = roles.iter().map(|r| r.display_label()).collect();
        let _ = write!(
            out,
            "  {} [label={}",
            quote(id.as_str()),
            quote(&label.join(" ≡ "))
        );
        if roles.len() > 1 {
            out.push_str(", peripheries=2");
        }
        out.push_str("];\n");
    }
    for e in d.edges() {
        let (a, b) = (&rep[e.from()], &rep[e.to()]);
        if a == b {
            continue;
        }
        let mut attrs: Vec<String> = Vec::new();
        match e.kind() {
            EdgeKind::Directed => {}
            EdgeKind::Ambiguous => attrs.extend(["style=dashed".into(), "dir=none".into()]),
            EdgeKind::Correlational => attrs.extend(["style=dashed".into(), "dir=both".into()]),
        }
        if let Some(t) = e.controller() {
            attrs.push(format!(
                "label=<<table border=\"0\" cellborder=\"1\" cellspacing=\"0\"><tr><td>{}</td></tr></table>>",
                t.display_label()
            ));
        }
        let _ = write!(out, "  {} -> {}", quote(a.as_str()), quote(b.as_str()));
        if !attrs.is_empty() {
            let _ = write!(out, " [{}]", attrs.join(", "));
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_over_catalog() {
        for key in CATALOG_KEYS {
            let d = catalog(key).unwrap();
            assert_eq!(from_json(&to_json(&d)).unwrap(), d, "{key}");
        }
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matches!(from_json("{"), Err(Failure::Invalid(_))));
        let cyclic = r#"{"nodes":[{"id":"A","role":"A"},{"id":"B","role":"B"}],
            "edges":[{"from":"A","to":"B","kind":"directed"},{"from":"B","to":"A","kind":"directed"}]}"#;
        assert!(matches!(from_json(cyclic), Err(Failure::Invalid(_))));
        let extra = r#"{"nodes":[{"id":"A","role":"A","colour":1}]}"#;
        assert!(matches!(from_json(extra), Err(Failure::Invalid(_))));
    }

    #[test]
    fn unknown_key_is_unknown_resource() {
        assert!(matches!(load_diagram("fig99"), Err(Failure::Unknown(_))));
    }

    #[test]
    fn dot_styles() {
        let d = Diagram::new(&[
            VariableRole::Input,
            VariableRole::TaskLabel,
            VariableRole::ModelPrediction,
            VariableRole::HumanTaskLabel,
        ])
        .unwrap()
        .add_edge(Edge::directed("X", "Y").controlled_by(FunctionTag::F))
        .unwrap()
        .add_edge(Edge::correlational("Y", "Yhat"))
        .unwrap()
        .add_edge(Edge::ambiguous("X", "Yhat"))
        .unwrap()
        .declare_equivalent(&NodeId::new("Y"), &NodeId::new("YH"))
        .unwrap();
        let dot = to_dot(&d, "t");
        assert!(
            dot.contains("\"Y\" -> \"Yhat\" [style=dashed, dir=both]"),
            "{dot}"
        );
        assert!(
            dot.contains("\"X\" -> \"Yhat\" [style=dashed, dir=none]"),
            "{dot}"
        );
        assert!(dot.contains("<td>f</td>"), "{dot}");
        assert!(dot.contains("label=\"Y ≡ Yᴴ\", peripheries=2"), "{dot}");
        assert!(!dot.contains("\"YH\""), "{dot}");
    }
}
