//! Simulated participants for the income-prediction study.
//!
//! A participant may hold a relevance intuition (which of education and age
//! matters more) and a mechanism intuition (the sign of each feature's
//! relation to income). With both, they form their own label from the
//! top-ranked feature and agree with the model more readily when the
//! prediction matches it, and more still when the explanation fits their
//! intuitions. Without intuitions, or when features are anonymized, they
//! follow the model at a fixed rate.

use alloc::string::String;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("instance is anonymized")]
    AnonymizedInstance,
    #[error("profile has no intuition to apply")]
    NoIntuition,
    #[error("age {0} is neither clearly high nor clearly low")]
    UnclassifiedAge(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Education,
    Age,
}

impl Feature {
    /// Name shown to participants.
    pub fn label(self, anonymized: bool) -> &'static str {
        match (self, anonymized) {
            (Feature::Education, false) => "Education",
            (Feature::Age, false) => "Age",
            (Feature::Education, true) => "Feature A",
            (Feature::Age, true) => "Feature B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Income {
    /// Above $50K.
    High,
    Low,
}

impl Income {
    pub fn flip(self) -> Income {
        match self {
            Income::High => Income::Low,
            Income::Low => Income::High,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Income::High => ">50K",
            Income::Low => "<50K",
        }
    }

    fn from_high(high: bool) -> Income {
        if high {
            Income::High
        } else {
            Income::Low
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Education {
    MiddleSchool,
    Masters,
}

impl Education {
    pub fn label(self) -> &'static str {
        match self {
            Education::MiddleSchool => "Middle school",
            Education::Masters => "Masters",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

/// Ages at or above `high_from` count as high, at or below `low_to` as low.
/// The study data only has ages 23–26 and 46–49.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeLevels {
    pub high_from: u32,
    pub low_to: u32,
}

pub const AGE_LEVELS: AgeLevels = AgeLevels {
    high_from: 46,
    low_to: 26,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    /// Position in the built-in table, 1-based.
    pub number: u8,
    /// `None` once anonymized.
    pub education: Option<Education>,
    pub age: Option<u32>,
    pub feature_a: f64,
    pub feature_b: f64,
    pub prediction: Income,
    /// The feature the explanation highlights.
    pub explanation: Feature,
    /// Letter A–H.
    pub letter: char,
    /// Data group, 1 or 2.
    pub group: u8,
}

impl Eq for Instance {}

impl Instance {
    pub fn identifier(&self) -> String {
        alloc::format!("{}{}", self.letter, self.group)
    }

    pub fn is_anonymized(&self) -> bool {
        self.education.is_none() && self.age.is_none()
    }

    /// Whether the feature's value counts as high.
    pub fn is_high(&self, f: Feature) -> Result<bool, AgentError> {
        match f {
            Feature::Education => self
                .education
                .map(|e| e == Education::Masters)
                .ok_or(AgentError::AnonymizedInstance),
            Feature::Age => {
                let age = self.age.ok_or(AgentError::AnonymizedInstance)?;
                if age >= AGE_LEVELS.high_from {
                    Ok(true)
                } else if age <= AGE_LEVELS.low_to {
                    Ok(false)
                } else {
                    Err(AgentError::UnclassifiedAge(age))
                }
            }
        }
    }
}

/// Hides the named features; only the encoded values remain.
pub fn anonymize(inst: &Instance) -> Instance {
    Instance {
        education: None,
        age: None,
        ..inst.clone()
    }
}

/// The explanation highlights the feature the assumed intuition ranks first.
pub fn alignment_r(inst: &Instance) -> Result<bool, AgentError> {
    if inst.is_anonymized() {
        return Err(AgentError::AnonymizedInstance);
    }
    Ok(inst.explanation == Feature::Education)
}

/// The highlighted feature's level agrees with the prediction under the
/// assumed positive relation with income.
pub fn alignment_m(inst: &Instance) -> Result<bool, AgentError> {
    Ok(Income::from_high(inst.is_high(inst.explanation)?) == inst.prediction)
}

/// A rate per label the person arrives at on their own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelRates {
    pub high: f64,
    pub low: f64,
}

impl LabelRates {
    pub fn get(&self, l: Income) -> f64 {
        match l {
            Income::High => self.high,
            Income::Low => self.low,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mechanism {
    pub education: Option<Sign>,
    pub age: Option<Sign>,
}

impl Mechanism {
    pub fn sign(&self, f: Feature) -> Option<Sign> {
        match f {
            Feature::Education => self.education,
            Feature::Age => self.age,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    /// Top-ranked feature; with two features this fixes the whole ranking.
    pub relevance: Option<Feature>,
    pub mechanism: Mechanism,
    /// Agreement rate with nothing to go on but the prediction.
    pub follow_rate_no_intuition: f64,
    /// Agreement when the prediction matches the person's own label.
    pub agree_when_matching: LabelRates,
    /// Agreement when it contradicts their own label.
    pub agree_when_conflicting: LabelRates,
    /// Pull towards agreement when a matching prediction comes with an
    /// explanation that fits both intuitions.
    pub explanation_weight: f64,
    /// Relative lift for a contradicting prediction whose explanation is
    /// consistent with the person's mechanism intuition.
    pub mechanism_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("profile parameter `{0}` must lie in [0, 1]")]
pub struct ProfileError(pub &'static str);

impl AgentProfile {
    /// Education first, both relations positive: the intuitions the study's
    /// hypotheses assume.
    pub fn assumed() -> Self {
        AgentProfile {
            relevance: Some(Feature::Education),
            mechanism: Mechanism {
                education: Some(Sign::Positive),
                age: Some(Sign::Positive),
            },
            ..Self::no_intuition()
        }
    }

    /// Age first, both relations positive.
    pub fn age_first() -> Self {
        AgentProfile {
            relevance: Some(Feature::Age),
            ..Self::assumed()
        }
    }

    pub fn no_intuition() -> Self {
        AgentProfile {
            relevance: None,
            mechanism: Mechanism {
                education: None,
                age: None,
            },
            follow_rate_no_intuition: 0.7064,
            agree_when_matching: LabelRates {
                high: 0.7429,
                low: 0.9286,
            },
            agree_when_conflicting: LabelRates {
                high: 0.2857,
                low: 0.1571,
            },
            explanation_weight: 0.42,
            mechanism_weight: 0.12,
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let checks = [
            ("follow_rate_no_intuition", self.follow_rate_no_intuition),
            ("agree_when_matching.high", self.agree_when_matching.high),
            ("agree_when_matching.low", self.agree_when_matching.low),
            ("agree_when_conflicting.high", self.agree_when_conflicting.high),
            ("agree_when_conflicting.low", self.agree_when_conflicting.low),
            ("explanation_weight", self.explanation_weight),
            ("mechanism_weight", self.mechanism_weight),
        ];
        match checks.iter().find(|(_, v)| !unit(*v)) {
            Some((name, _)) => Err(ProfileError(name)),
            None => Ok(()),
        }
    }

    pub fn holds_assumed_intuitions(&self) -> bool {
        self.relevance == Some(Feature::Education)
            && self.mechanism.education == Some(Sign::Positive)
            && self.mechanism.age == Some(Sign::Positive)
    }
}

fn implied(high: bool, sign: Sign) -> Income {
    Income::from_high(high == (sign == Sign::Positive))
}

/// The label the person would give unaided.
pub fn intuitive_label(p: &AgentProfile, inst: &Instance) -> Result<Income, AgentError> {
    let top = p.relevance.ok_or(AgentError::NoIntuition)?;
    let sign = p.mechanism.sign(top).ok_or(AgentError::NoIntuition)?;
    Ok(implied(inst.is_high(top)?, sign))
}

/// Explanation highlights the person's top-ranked feature.
pub fn fits_relevance(p: &AgentProfile, inst: &Instance) -> bool {
    p.relevance == Some(inst.explanation)
}

/// Highlighted feature, read through the person's sign, implies the
/// prediction.
pub fn fits_mechanism(p: &AgentProfile, inst: &Instance) -> bool {
    match (p.mechanism.sign(inst.explanation), inst.is_high(inst.explanation)) {
        (Some(sign), Ok(high)) => implied(high, sign) == inst.prediction,
        _ => false,
    }
}

/// What the participant sees besides the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub anonymized: bool,
    pub explanation_shown: bool,
}

impl Presentation {
    pub const REGULAR: Presentation = Presentation {
        anonymized: false,
        explanation_shown: true,
    };
    pub const ANONYMIZED: Presentation = Presentation {
        anonymized: true,
        explanation_shown: true,
    };
}

/// Probability of agreeing with the shown prediction.
pub fn agree_probability(p: &AgentProfile, inst: &Instance, view: Presentation) -> f64 {
    let own = if view.anonymized || inst.is_anonymized() {
        None
    } else {
        intuitive_label(p, inst).ok()
    };
    let Some(own) = own else {
        return p.follow_rate_no_intuition;
    };
    let base = p.agree_when_matching.get(own);
    if own == inst.prediction {
        if view.explanation_shown && fits_relevance(p, inst) && fits_mechanism(p, inst) {
            base + p.explanation_weight * (1.0 - base)
        } else {
            base
        }
    } else {
        let conflict = p.agree_when_conflicting.get(own);
        if view.explanation_shown && fits_mechanism(p, inst) {
            (conflict * (1.0 + p.mechanism_weight)).min(base.max(conflict))
        } else {
            conflict
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub label: Income,
    pub agree: bool,
}

/// Decision given a uniform draw `u` in `[0, 1)`: agree iff `u` falls below
/// the agreement probability.
pub fn decide_with_draw(p: &AgentProfile, inst: &Instance, view: Presentation, u: f64) -> Decision {
    let agree = u < agree_probability(p, inst, view);
    Decision {
        label: if agree {
            inst.prediction
        } else {
            inst.prediction.flip()
        },
        agree,
    }
}

pub fn decide(p: &AgentProfile, inst: &Instance, view: Presentation, seed: u64) -> Decision {
    let u: f64 = rng(seed, "decide").gen();
    decide_with_draw(p, inst, view, u)
}
