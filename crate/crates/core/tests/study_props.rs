use hai_core::agents::AgentProfile;
use hai_core::study::{run_study, Arm, Component, Outcome, Sampling, StudyConfig, TrialRecord};

fn null_config() -> StudyConfig {
    let mut cfg = StudyConfig::default();
    let same = vec![Component {
        name: "no_intuition".into(),
        weight: 1.0,
        profile: AgentProfile::no_intuition(),
    }];
    cfg.regular.components = same.clone();
    cfg.anonymized.components = same;
    cfg.sampling = Sampling::Independent;
    cfg
}

/// With both arms drawn from one population, H1 is rejected at about the
/// nominal rate.
#[test]
fn null_calibration_over_seeds() {
    let cfg = null_config();
    let runs = 100;
    let rejected = (0..runs)
        .filter(|&seed| {
            let r = run_study(&cfg, seed).unwrap();
            r.hypothesis("H1").unwrap().outcome != Outcome::Inconclusive
        })
        .count();
    // Binomial(100, 0.05): P(X > 12) < 0.001.
    assert!(rejected <= 12, "{rejected}/{runs} false rejections");
}

#[test]
fn agree_flag_matches_labels() {
    let r = run_study(&StudyConfig::default(), 5).unwrap();
    let instances = hai_core::study::builtin_instances();
    for rec in &r.records {
        assert_eq!(rec.agree, rec.label == rec.shown_prediction);
        let truth = instances
            .iter()
            .find(|i| i.identifier() == rec.identifier)
            .map(|i| i.prediction)
            .unwrap();
        // Binary labels with the prediction shown: judging the error right
        // and labelling right are the same event.
        assert_eq!(rec.error_judgement_correct(truth), rec.label_correct(truth));
    }
}

#[test]
fn paired_tests_use_only_intuition_holders() {
    let r = run_study(&StudyConfig::default(), 8).unwrap();
    let holders: std::collections::BTreeSet<u32> = r
        .records
        .iter()
        .filter(|t: &&TrialRecord| t.arm == Arm::Regular && t.holds_assumed_intuitions)
        .map(|t| t.agent)
        .collect();
    assert_eq!(holders.len(), r.intuition_holders);
    assert_eq!(r.hypothesis("H2a").unwrap().test.df, (holders.len() - 1) as f64);
}
