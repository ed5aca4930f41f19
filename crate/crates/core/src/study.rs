//! Replication harness for the agreement study: two arms (features named or
//! anonymized), sixteen instances in two data groups, eight identifiers per
//! participant, and t tests for the four hypotheses.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{
    agree_probability, decide_with_draw, AgentProfile, Education, Feature, Income, Instance, Presentation,
};
use crate::seed::{derive_seed, rng, rng_indexed, Rng};
use crate::stats::{mean, t_independent, t_paired, t_welch, StatsError, TestKind, TestResult};

pub const LETTERS: [char; 8] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'];

/// The sixteen study instances.
pub fn builtin_instances() -> Vec<Instance> {
    use Education::{Masters, MiddleSchool};
    use Feature::{Age, Education as Edu};
    use Income::{High, Low};
    let rows = [
        (Masters, 25, 0.85, 0.13, High, Edu, 'A', 1),
        (Masters, 24, 0.85, 0.10, High, Edu, 'A', 2),
        (MiddleSchool, 46, 0.15, 0.83, Low, Edu, 'B', 1),
        (MiddleSchool, 49, 0.15, 0.93, Low, Edu, 'B', 2),
        (Masters, 26, 0.85, 0.17, Low, Age, 'C', 1),
        (Masters, 23, 0.85, 0.07, Low, Age, 'C', 2),
        (MiddleSchool, 48, 0.15, 0.90, High, Age, 'D', 1),
        (MiddleSchool, 47, 0.15, 0.87, High, Age, 'D', 2),
        (Masters, 23, 0.85, 0.07, Low, Edu, 'E', 1),
        (Masters, 26, 0.85, 0.17, Low, Edu, 'E', 2),
        (MiddleSchool, 47, 0.15, 0.87, High, Edu, 'F', 1),
        (MiddleSchool, 48, 0.15, 0.90, High, Edu, 'F', 2),
        (Masters, 24, 0.85, 0.10, High, Age, 'G', 1),
        (Masters, 25, 0.85, 0.13, High, Age, 'G', 2),
        (MiddleSchool, 49, 0.15, 0.93, Low, Age, 'H', 1),
        (MiddleSchool, 46, 0.15, 0.83, Low, Age, 'H', 2),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(edu, age, a, b, pred, expl, letter, group))| Instance {
            number: i as u8 + 1,
            education: Some(edu),
            age: Some(age),
            feature_a: a,
            feature_b: b,
            prediction: pred,
            explanation: expl,
            letter,
            group,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StudyError {
    #[error("invalid study config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub weight: f64,
    pub profile: AgentProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub size: usize,
    pub anonymized: bool,
    pub components: Vec<Component>,
}

impl ArmConfig {
    /// Component sizes by largest remainder, summing to `size`.
    pub fn counts(&self) -> Vec<usize> {
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        let quotas: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight / total * self.size as f64)
            .collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| libm::floor(*q) as usize).collect();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&i, &j| {
            let (ri, rj) = (
                quotas[i] - libm::floor(quotas[i]),
                quotas[j] - libm::floor(quotas[j]),
            );
            rj.total_cmp(&ri).then(i.cmp(&j))
        });
        let short = self.size - counts.iter().sum::<usize>();
        for &i in order.iter().take(short) {
            counts[i] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Agreement draws stratified across the participants of each component
    /// and instance, so observed rates sit within one participant of the
    /// model's rates.
    Stratified,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModel {
    Pooled,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Supported,
    Reversed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Supported,
    Reversed,
    Inconclusive,
    Any,
}

impl Expectation {
    pub fn accepts(self, o: Outcome) -> bool {
        matches!(
            (self, o),
            (Expectation::Any, _)
                | (Expectation::Supported, Outcome::Supported)
                | (Expectation::Reversed, Outcome::Reversed)
                | (Expectation::Inconclusive, Outcome::Inconclusive)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expectations {
    pub h1: Expectation,
    pub h2a: Expectation,
    pub h2b: Expectation,
    pub h2c: Expectation,
}

impl Default for Expectations {
    fn default() -> Self {
        Expectations {
            h1: Expectation::Supported,
            h2a: Expectation::Supported,
            h2b: Expectation::Supported,
            h2c: Expectation::Supported,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub regular: ArmConfig,
    pub anonymized: ArmConfig,
    pub alpha: f64,
    pub variance: VarianceModel,
    pub sampling: Sampling,
    /// Correlation of one participant's draws across instances (stratified
    /// sampling only).
    pub trust_correlation: f64,
    pub expectations: Expectations,
}

impl Default for StudyConfig {
    fn default() -> Self {
        let component = |name: &str, weight: f64, profile| Component {
            name: name.to_string(),
            weight,
            profile,
        };
        StudyConfig {
            regular: ArmConfig {
                size: 136,
                anonymized: false,
                components: vec![
                    component("assumed", 70.0, AgentProfile::assumed()),
                    component("age_first", 66.0, AgentProfile::age_first()),
                ],
            },
            anonymized: ArmConfig {
                size: 106,
                anonymized: true,
                components: vec![component("assumed", 1.0, AgentProfile::assumed())],
            },
            alpha: 0.05,
            variance: VarianceModel::Pooled,
            sampling: Sampling::Stratified,
            trust_correlation: 0.9,
            expectations: Expectations::default(),
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: String| Err(StudyError::InvalidConfig(m));
        for (name, arm) in [("regular", &self.regular), ("anonymized", &self.anonymized)] {
            if arm.size < 2 {
                return bad(format!("{name} arm needs at least 2 participants"));
            }
            if arm.components.is_empty() {
                return bad(format!("{name} arm has no population components"));
            }
            for c in &arm.components {
                if !(c.weight.is_finite() && c.weight >= 0.0) {
                    return bad(format!("{name}/{}: weight must be non-negative", c.name));
                }
                if let Err(e) = c.profile.validate() {
                    return bad(format!("{name}/{}: {e}", c.name));
                }
            }
            if arm.components.iter().map(|c| c.weight).sum::<f64>() <= 0.0 {
                return bad(format!("{name} arm weights sum to zero"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)".to_string());
        }
        if !(0.0..=1.0).contains(&self.trust_correlation) {
            return bad("trust_correlation must lie in [0, 1]".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Regular,
    Anonymized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub agent: u32,
    pub arm: Arm,
    pub component: String,
    pub holds_assumed_intuitions: bool,
    pub data_group: u8,
    /// Order in which the instance was shown, 1–8.
    pub position: u8,
    pub identifier: String,
    pub letter: char,
    pub shown_prediction: Income,
    pub label: Income,
    pub agree: bool,
}

impl TrialRecord {
    pub fn label_correct(&self, truth: Income) -> bool {
        self.label == truth
    }

    /// The person judges the model wrong exactly when they disagree.
    pub fn error_judgement_correct(&self, truth: Income) -> bool {
        !self.agree == (self.shown_prediction != truth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifierRow {
    pub letter: char,
    pub anonymized: f64,
    /// Regular-arm participants holding the assumed intuitions.
    pub regular: f64,
    /// Every regular-arm participant.
    pub regular_all: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub name: String,
    pub description: String,
    /// Mean agreement of the side predicted to be higher.
    pub left_mean: f64,
    pub right_mean: f64,
    pub test: TestResult,
    /// Variance was zero and the test defaulted to `t = 0, p = 1`.
    pub degenerate: bool,
    pub outcome: Outcome,
    pub expected: Expectation,
}

impl HypothesisResult {
    pub fn matches_expectation(&self) -> bool {
        self.expected.accepts(self.outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub seed: u64,
    pub records: Vec<TrialRecord>,
    pub table: Vec<IdentifierRow>,
    pub regular_mean: f64,
    pub anonymized_mean: f64,
    pub intuition_holders: usize,
    pub hypotheses: Vec<HypothesisResult>,
}

impl StudyResult {
    pub fn all_match(&self) -> bool {
        self.hypotheses.iter().all(HypothesisResult::matches_expectation)
    }

    pub fn hypothesis(&self, name: &str) -> Option<&HypothesisResult> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

struct Participant {
    arm: Arm,
    component: usize,
    group: u8,
}

fn standard_normal(r: &mut Rng) -> f64 {
    let u1: f64 = 1.0 - r.gen::<f64>();
    let u2: f64 = r.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Uniform draws for every participant and identifier. Stratified draws give
/// each stratum of `n` participants exactly one value per `1/n` interval,
/// with ranks coupled through a per-participant factor.
fn draws(cfg: &StudyConfig, people: &[Participant], seed: u64) -> Vec<[f64; 8]> {
    let mut u = vec![[0.0; 8]; people.len()];
    match cfg.sampling {
        Sampling::Independent => {
            for (i, row) in u.iter_mut().enumerate() {
                let mut r = rng_indexed(seed, "draws", i as u64);
                for v in row.iter_mut() {
                    *v = r.gen();
                }
            }
        }
        Sampling::Stratified => {
            let mut r = rng(seed, "stratified-draws");
            let rho = cfg.trust_correlation;
            let factor: Vec<f64> = people.iter().map(|_| standard_normal(&mut r)).collect();
            let mut strata: BTreeMap<(Arm, usize), Vec<usize>> = BTreeMap::new();
            for (i, p) in people.iter().enumerate() {
                strata.entry((p.arm, p.component)).or_default().push(i);
            }
            for members in strata.values() {
                let n = members.len() as f64;
                #[allow(clippy::needless_range_loop)]
                for l in 0..8 {
                    let mut scored: Vec<(f64, usize)> = members
                        .iter()
                        .map(|&i| {
                            (
                                rho * factor[i] + libm::sqrt(1.0 - rho * rho) * standard_normal(&mut r),
                                i,
                            )
                        })
                        .collect();
                    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    for (rank, &(_, i)) in scored.iter().enumerate() {
                        u[i][l] = (rank as f64 + r.gen::<f64>()) / n;
                    }
                }
            }
        }
    }
    u
}

fn assign(arm: Arm, cfg: &ArmConfig, r: &mut Rng) -> Vec<Participant> {
    let mut components: Vec<usize> = cfg
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(c, &k)| core::iter::repeat_n(c, k))
        .collect();
    components.shuffle(r);
    // Balanced data groups within each component.
    let mut seen = vec![0usize; cfg.components.len()];
    let flip: Vec<bool> = cfg.components.iter().map(|_| r.gen()).collect();
    components
        .into_iter()
        .map(|c| {
            let k = seen[c];
            seen[c] += 1;
            let group = if k.is_multiple_of(2) ^ flip[c] { 1 } else { 2 };
            Participant {
                arm,
                component: c,
                group,
            }
        })
        .collect()
}

fn test_or_default(
    result: Result<TestResult, StatsError>,
    kind: TestKind,
    df: f64,
    name: &str,
) -> (TestResult, bool) {
    match result {
        Ok(t) => (t, false),
        Err(e) => {
            log::warn!("{name}: {e}; reporting t = 0, p = 1");
            (TestResult::degenerate(kind, df), true)
        }
    }
}

fn outcome(t: &TestResult, alpha: f64) -> Outcome {
    if t.p < alpha && t.t > 0.0 {
        Outcome::Supported
    } else if t.p < alpha && t.t < 0.0 {
        Outcome::Reversed
    } else {
        Outcome::Inconclusive
    }
}

pub fn run_study(cfg: &StudyConfig, seed: u64) -> Result<StudyResult, StudyError> {
    cfg.validate()?;
    let instances = builtin_instances();
    let mut r = rng(seed, "assignment");
    let mut people = assign(Arm::Regular, &cfg.regular, &mut r);
    people.extend(assign(Arm::Anonymized, &cfg.anonymized, &mut r));
    let u = draws(cfg, &people, derive_seed(seed, "decisions"));

    let mut records = Vec::with_capacity(people.len() * 8);
    // Per participant, agreement indexed by letter.
    let mut agreement = vec![[false; 8]; people.len()];
    for (i, p) in people.iter().enumerate() {
        let arm_cfg = match p.arm {
            Arm::Regular => &cfg.regular,
            Arm::Anonymized => &cfg.anonymized,
        };
        let comp = &arm_cfg.components[p.component];
        let view = Presentation {
            anonymized: arm_cfg.anonymized,
            explanation_shown: true,
        };
        let mut order: Vec<usize> = (0..8).collect();
        order.shuffle(&mut rng_indexed(seed, "order", i as u64));
        for (pos, &l) in order.iter().enumerate() {
            let inst = instances
                .iter()
                .find(|x| x.letter == LETTERS[l] && x.group == p.group)
                .expect("every letter has both groups");
            let shown = if arm_cfg.anonymized {
                crate::agents::anonymize(inst)
            } else {
                inst.clone()
            };
            let d = decide_with_draw(&comp.profile, &shown, view, u[i][l]);
            agreement[i][l] = d.agree;
            records.push(TrialRecord {
                agent: i as u32,
                arm: p.arm,
                component: comp.name.clone(),
                holds_assumed_intuitions: comp.profile.holds_assumed_intuitions(),
                data_group: p.group,
                position: pos as u8 + 1,
                identifier: inst.identifier(),
                letter: inst.letter,
                shown_prediction: inst.prediction,
                label: d.label,
                agree: d.agree,
            });
        }
    }

    let rate = |bits: &[bool]| bits.iter().filter(|&&b| b).count() as f64 / bits.len() as f64;
    let holds = |i: usize| {
        let p = &people[i];
        p.arm == Arm::Regular
            && cfg.regular.components[p.component]
                .profile
                .holds_assumed_intuitions()
    };
    let select =
        |pred: &dyn Fn(usize) -> bool| -> Vec<usize> { (0..people.len()).filter(|&i| pred(i)).collect() };
    let regular = select(&|i| people[i].arm == Arm::Regular);
    let anonymized = select(&|i| people[i].arm == Arm::Anonymized);
    let holders = select(&holds);

    let letter_rate = |who: &[usize], l: usize| -> f64 {
        if who.is_empty() {
            return 0.0;
        }
        who.iter().filter(|&&i| agreement[i][l]).count() as f64 / who.len() as f64
    };
    let table = (0..8)
        .map(|l| IdentifierRow {
            letter: LETTERS[l],
            anonymized: letter_rate(&anonymized, l),
            regular: letter_rate(&holders, l),
            regular_all: letter_rate(&regular, l),
        })
        .collect();

    let per_person = |who: &[usize]| -> Vec<f64> { who.iter().map(|&i| rate(&agreement[i])).collect() };
    let (anon_rates, reg_rates) = (per_person(&anonymized), per_person(&regular));
    let (h1_test, h1_degenerate) = match cfg.variance {
        VarianceModel::Pooled => test_or_default(
            t_independent(&anon_rates, &reg_rates),
            TestKind::Independent,
            (anon_rates.len() + reg_rates.len()) as f64 - 2.0,
            "H1",
        ),
        VarianceModel::Welch => test_or_default(t_welch(&anon_rates, &reg_rates), TestKind::Welch, 0.0, "H1"),
    };
    let mut hypotheses = vec![HypothesisResult {
        name: "H1".to_string(),
        description: "anonymized arm agrees more than regular arm".to_string(),
        left_mean: mean(&anon_rates),
        right_mean: mean(&reg_rates),
        outcome: outcome(&h1_test, cfg.alpha),
        test: h1_test,
        degenerate: h1_degenerate,
        expected: cfg.expectations.h1,
    }];

    let pair = |letters: [usize; 2]| -> Vec<f64> {
        holders
            .iter()
            .map(|&i| letters.iter().filter(|&&l| agreement[i][l]).count() as f64 / 2.0)
            .collect()
    };
    let ab = pair([0, 1]);
    for (name, other, label, expected) in [
        ("H2a", [2, 3], "CD", cfg.expectations.h2a),
        ("H2b", [4, 5], "EF", cfg.expectations.h2b),
        ("H2c", [6, 7], "GH", cfg.expectations.h2c),
    ] {
        let rhs = pair(other);
        let (test, degenerate) = if ab.len() < 2 {
            log::warn!("{name}: fewer than two intuition holders; reporting t = 0, p = 1");
            (TestResult::degenerate(TestKind::Paired, 0.0), true)
        } else {
            test_or_default(t_paired(&ab, &rhs), TestKind::Paired, ab.len() as f64 - 1.0, name)
        };
        hypotheses.push(HypothesisResult {
            name: name.to_string(),
            description: format!("intuition holders agree more on AB than on {label}"),
            left_mean: if ab.is_empty() { 0.0 } else { mean(&ab) },
            right_mean: if rhs.is_empty() { 0.0 } else { mean(&rhs) },
            outcome: outcome(&test, cfg.alpha),
            test,
            degenerate,
            expected,
        });
    }

    Ok(StudyResult {
        seed,
        records,
        table,
        regular_mean: mean(&reg_rates),
        anonymized_mean: mean(&anon_rates),
        intuition_holders: holders.len(),
        hypotheses,
    })
}

/// Expected per-identifier agreement of one profile.
pub fn expected_rates(p: &AgentProfile, view: Presentation) -> [f64; 8] {
    let instances = builtin_instances();
    let mut out = [0.0; 8];
    for (l, slot) in out.iter_mut().enumerate() {
        let shown: Vec<Instance> = instances
            .iter()
            .filter(|i| i.letter == LETTERS[l])
            .map(|i| {
                if view.anonymized {
                    crate::agents::anonymize(i)
                } else {
                    i.clone()
                }
            })
            .collect();
        *slot = shown.iter().map(|i| agree_probability(p, i, view)).sum::<f64>() / shown.len() as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Regular-arm agreement of intuition holders, per identifier.
    const REFERENCE: [f64; 8] = [0.8571, 0.9571, 0.3286, 0.1714, 0.2857, 0.1571, 0.7429, 0.9286];

    #[test]
    fn builtin_table() {
        let rows = builtin_instances();
        assert_eq!(rows.len(), 16);
        let first = &rows[0];
        assert_eq!(
            (
                first.education,
                first.age,
                first.feature_a,
                first.feature_b,
                first.prediction,
                first.explanation
            ),
            (
                Some(Education::Masters),
                Some(25),
                0.85,
                0.13,
                Income::High,
                Feature::Education
            )
        );
        assert_eq!(first.identifier(), "A1");
        let last = &rows[15];
        assert_eq!(
            (
                last.education,
                last.age,
                last.feature_a,
                last.feature_b,
                last.prediction,
                last.explanation
            ),
            (
                Some(Education::MiddleSchool),
                Some(46),
                0.15,
                0.83,
                Income::Low,
                Feature::Age
            )
        );
        assert_eq!(last.identifier(), "H2");
        let mean_age = |letters: &str| {
            let ages: Vec<f64> = rows
                .iter()
                .filter(|r| letters.contains(r.letter))
                .map(|r| f64::from(r.age.unwrap()))
                .collect();
            mean(&ages)
        };
        assert_eq!(mean_age("ABCD"), mean_age("EFGH"));
    }

    #[test]
    fn calibrated_profile_matches_reference_in_expectation() {
        let rates = expected_rates(&AgentProfile::assumed(), Presentation::REGULAR);
        for (got, want) in rates.iter().zip(REFERENCE) {
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
    }

    #[test]
    fn largest_remainder_counts() {
        let cfg = StudyConfig::default();
        assert_eq!(cfg.regular.counts(), [70, 66]);
        let arm = ArmConfig {
            size: 10,
            anonymized: false,
            components: ["a", "b", "c"]
                .iter()
                .map(|n| Component {
                    name: n.to_string(),
                    weight: 1.0,
                    profile: AgentProfile::assumed(),
                })
                .collect(),
        };
        assert_eq!(arm.counts(), [4, 3, 3]);
    }

    #[test]
    fn default_study_supports_every_hypothesis() {
        let r = run_study(&StudyConfig::default(), 2024).unwrap();
        assert_eq!(r.intuition_holders, 70);
        assert_eq!(r.records.len(), (136 + 106) * 8);
        for h in &r.hypotheses {
            assert_eq!(h.outcome, Outcome::Supported, "{h:?}");
        }
        for (row, want) in r.table.iter().zip(REFERENCE) {
            assert!((row.regular - want).abs() <= 0.02, "{row:?}");
        }
        assert!(r.all_match());
    }

    #[test]
    fn records_are_consistent() {
        let r = run_study(&StudyConfig::default(), 5).unwrap();
        let mut per_agent: BTreeMap<u32, Vec<&TrialRecord>> = BTreeMap::new();
        for rec in &r.records {
            assert_eq!(rec.agree, rec.label == rec.shown_prediction);
            for truth in [Income::High, Income::Low] {
                assert_eq!(rec.label_correct(truth), rec.error_judgement_correct(truth));
            }
            per_agent.entry(rec.agent).or_default().push(rec);
        }
        for recs in per_agent.values() {
            let mut letters: Vec<char> = recs.iter().map(|r| r.letter).collect();
            letters.sort();
            assert_eq!(letters, LETTERS);
            assert!(recs.iter().all(|r| r.data_group == recs[0].data_group));
        }
        assert_eq!(r, run_study(&StudyConfig::default(), 5).unwrap());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = StudyConfig::default();
        cfg.regular.size = 1;
        assert!(run_study(&cfg, 0).is_err());
        let cfg = StudyConfig {
            alpha: 1.0,
            ..StudyConfig::default()
        };
        assert!(run_study(&cfg, 0).is_err());
    }

    #[test]
    fn reversed_expectation_is_a_mismatch() {
        let mut cfg = StudyConfig::default();
        cfg.expectations.h2c = Expectation::Reversed;
        let r = run_study(&cfg, 2024).unwrap();
        assert!(!r.all_match());
    }
}
