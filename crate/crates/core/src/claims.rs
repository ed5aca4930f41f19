//! Separation facts the framework asserts about its catalog diagrams, as an
//! executable ledger.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::conditions::catalog;
use crate::dsep::{d_separated, DsepError, SeparationQuery, Verdict};
use crate::graph::Diagram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Separated,
    Connected,
    Ambiguous,
}

impl Expected {
    pub fn matches(self, v: &Verdict) -> bool {
        matches!(
            (self, v),
            (Expected::Separated, Verdict::Separated)
                | (Expected::Connected, Verdict::Connected)
                | (Expected::Ambiguous, Verdict::Ambiguous(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub id: &'static str,
    pub diagram: &'static str,
    pub query: SeparationQuery,
    pub expected: Expected,
    /// What the claim says about the person and the model.
    pub rationale: &'static str,
}

fn claim(
    id: &'static str,
    diagram: &'static str,
    a: &[&'static str],
    b: &[&'static str],
    given: &[&'static str],
    expected: Expected,
    rationale: &'static str,
) -> Claim {
    Claim {
        id,
        diagram,
        query: SeparationQuery::new(a.iter().copied(), b.iter().copied(), given.iter().copied()),
        expected,
        rationale,
    }
}

pub fn claim_suite() -> Vec<Claim> {
    use Expected::*;
    alloc::vec![
        claim(
            "prediction-given-input",
            "fig2",
            &["Yhat"], &["Y"], &["X", "g"], Separated,
            "once the input and the trained model are fixed, the prediction carries no further information about the true label",
        ),
        claim(
            "prediction-label-marginal",
            "fig2",
            &["Yhat"], &["Y"], &[], Connected,
            "without fixing the input, prediction and label are linked through it",
        ),
        claim(
            "error-collider",
            "fig2",
            &["Y"], &["Yhat"], &["X", "Z"], Connected,
            "the model error is a common effect of label and prediction, so knowing it ties the two together; for binary labels error and prediction pin down the label",
        ),
        claim(
            "human-side-given-input",
            "fig2",
            &["YH", "YhatH", "ZH"], &["Y", "Yhat", "Z"], &["X", "fH", "gH", "zH"], Separated,
            "without any intervention the person's approximations depend on the core variables only through the input",
        ),
        claim(
            "base-intuition-feeds-label",
            "fig3a",
            &["YH"], &["H"], &["X"], Connected,
            "in the base diagram intuition feeds the person's own label",
        ),
        claim(
            "base-triangle-undetermined",
            "fig3a",
            &["YH"], &["YhatH"], &["X", "H", "ZH"], Connected,
            "the three local approximations stay linked under every orientation of the dashed triangle",
        ),
        claim(
            "discovery-hidden-is-base",
            "fig3g",
            &["YH"], &["ZH"], &["X", "H", "YhatH"], Connected,
            "with nothing shown in a discovery task no link between local approximations can be removed",
        ),
        claim(
            "emulation-label-cut-from-intuition",
            "fig3b",
            &["YH"], &["H"], &["X"], Separated,
            "when the person already knows the true label, intuition no longer shapes it",
        ),
        claim(
            "emulation-shown-deterministic",
            "fig3d",
            &["ZH"], &["X", "H"], &["Y", "Yhat"], Separated,
            "knowing the label and seeing the prediction fixes the person's error judgement completely",
        ),
        claim(
            "explanation-given-input-and-model",
            "fig4c1",
            &["E"], &["Y", "Z"], &["X", "g"], Separated,
            "an explanation is computed from the input and the model alone, so it adds nothing about label or error beyond them",
        ),
        claim(
            "explanation-on-core-side",
            "fig4a",
            &["E"], &["Y", "Z"], &["X", "g"], Separated,
            "the same holds on the core side in isolation",
        ),
        claim(
            "no-prior-no-error-link",
            "fig4c1",
            &["H"], &["Z"], &["X"], Separated,
            "if the explanation does not touch intuition, intuition stays unrelated to the model error",
        ),
        claim(
            "activated-prior-links-error",
            "fig4c2",
            &["H"], &["Z"], &["X"], Connected,
            "an explanation that activates a prior about model error links intuition with the actual error",
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimOutcome {
    pub claim: Claim,
    pub verdict: Result<Verdict, DsepError>,
}

impl ClaimOutcome {
    pub fn passed(&self) -> bool {
        matches!(&self.verdict, Ok(v) if self.claim.expected.matches(v))
    }

    pub fn verdict_name(&self) -> String {
        match &self.verdict {
            Ok(v) => String::from(v.name()),
            Err(e) => alloc::format!("error: {e}"),
        }
    }
}

/// Runs the suite. `override_diagram` may substitute the diagram for a
/// catalog key (used to feed a tampered catalog).
pub fn run_claims(override_diagram: impl Fn(&str) -> Option<Diagram>) -> Vec<ClaimOutcome> {
    claim_suite()
        .into_iter()
        .map(|claim| {
            let verdict = match override_diagram(claim.diagram).or_else(|| catalog(claim.diagram)) {
                Some(d) => d_separated(&d, &claim.query),
                None => Err(DsepError::InvalidDiagram),
            };
            ClaimOutcome { claim, verdict }
        })
        .collect()
}
