//! Report documents for the study and verification runs, plus CSV dumps.

use std::fmt::Write as _;

use hai_core::claims::ClaimOutcome;
use hai_core::scm::Dataset;
use hai_core::soundness::{SoundnessOptions, SoundnessReport};
use hai_core::study::{StudyConfig, StudyResult};
use serde::{Deserialize, Serialize};

use crate::config::config_hash;
use crate::error::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

fn csv_error(e: csv::Error) -> Failure {
    Failure::Invalid(format!("csv: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// JSON study report: the result plus where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config_sha256: String,
    pub config: StudyConfig,
    pub result: StudyResult,
}

pub fn study_report(cfg: &StudyConfig, result: &StudyResult, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => {
            let doc = StudyReport {
                config_sha256: config_hash(cfg),
                config: cfg.clone(),
                result: result.clone(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["identifier", "anonymized", "regular"])
                .map_err(csv_error)?;
            for row in &result.table {
                w.write_record([
                    row.letter.to_string(),
                    format!("{:.4}", row.anonymized),
                    format!("{:.4}", row.regular),
                ])
                .map_err(csv_error)?;
            }
            finish_csv(w)
        }
        Format::Text => Ok(study_text(cfg, result)),
    }
}

fn study_text(cfg: &StudyConfig, r: &StudyResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "study replication");
    let _ = writeln!(s, "seed: {}", r.seed);
    let _ = writeln!(s, "config sha256: {}", config_hash(cfg));
    let _ = writeln!(
        s,
        "participants: regular {} ({} holding the assumed intuitions), anonymized {}",
        cfg.regular.size, r.intuition_holders, cfg.anonymized.size
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "mean agreement");
    let _ = writeln!(s, "  regular     {:.4}", r.regular_mean);
    let _ = writeln!(s, "  anonymized  {:.4}", r.anonymized_mean);
    let _ = writeln!(s);
    let _ = writeln!(s, "agreement by identifier");
    let _ = writeln!(s, "  id  anonymized  regular  regular(all)");
    for row in &r.table {
        let _ = writeln!(
            s,
            "  {}   {:.4}      {:.4}   {:.4}",
            row.letter, row.anonymized, row.regular, row.regular_all
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "hypotheses (alpha {})", cfg.alpha);
    for h in &r.hypotheses {
        let _ = writeln!(
            s,
            "  {:<4} {:.4} vs {:.4}  t={:.3} df={:.1} p={:.4}  {:?} (expected {:?}){}  {}",
            h.name,
            h.left_mean,
            h.right_mean,
            h.test.t,
            h.test.df,
            h.test.p,
            h.outcome,
            h.expected,
            if h.degenerate { " [zero variance]" } else { "" },
            if h.matches_expectation() { "ok" } else { "MISMATCH" },
        );
        let _ = writeln!(s, "       {}", h.description);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "result: {}", if r.all_match() { "PASS" } else { "FAIL" });
    s
}

/// One row per trial.
pub fn records_csv(result: &StudyResult) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in &result.records {
        w.serialize(rec).map_err(csv_error)?;
    }
    finish_csv(w)
}

/// Header of node names, one row per sample.
pub fn samples_csv(data: &Dataset) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(data.columns().iter().map(|c| c.as_str()))
        .map_err(csv_error)?;
    let cols: Vec<&[u32]> = data
        .columns()
        .iter()
        .map(|c| data.column(c).expect("own column"))
        .collect();
    let mut row = Vec::with_capacity(cols.len());
    for i in 0..data.len() {
        row.clear();
        row.extend(cols.iter().map(|c| c[i].to_string()));
        w.write_record(&row).map_err(csv_error)?;
    }
    finish_csv(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimLine {
    pub id: String,
    pub diagram: String,
    pub query: String,
    pub expected: String,
    pub verdict: String,
    pub passed: bool,
    pub rationale: String,
}

impl ClaimLine {
    pub fn from_outcome(o: &ClaimOutcome) -> ClaimLine {
        ClaimLine {
            id: o.claim.id.to_string(),
            diagram: o.claim.diagram.to_string(),
            query: o.claim.query.to_string(),
            expected: format!("{:?}", o.claim.expected).to_lowercase(),
            verdict: o.verdict_name(),
            passed: o.passed(),
            rationale: o.claim.rationale.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedQuery {
    pub world: String,
    pub query: String,
    pub statistic: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessSummary {
    pub options: SoundnessOptions,
    pub worlds: usize,
    pub queries: usize,
    pub tested_separations: usize,
    /// Per-test level after the Bonferroni correction.
    pub level: f64,
    /// Separated in the diagram, dependent in the data.
    pub violations: Vec<FlaggedQuery>,
    /// Connected in the diagram, no dependence detected. Reported only.
    pub extra_independencies: Vec<FlaggedQuery>,
    pub passed: bool,
}

impl SoundnessSummary {
    pub fn new(opts: SoundnessOptions, r: &SoundnessReport) -> SoundnessSummary {
        let flag = |keep: fn(&hai_core::soundness::QueryOutcome) -> bool| -> Vec<FlaggedQuery> {
            r.outcomes
                .iter()
                .filter(|o| keep(o))
                .map(|o| {
                    let ci = o.ci.expect("flagged queries were tested");
                    FlaggedQuery {
                        world: o.world.clone(),
                        query: o.query.to_string(),
                        statistic: ci.statistic,
                        p: ci.p,
                    }
                })
                .collect()
        };
        SoundnessSummary {
            options: opts,
            worlds: r.worlds,
            queries: r.outcomes.len(),
            tested_separations: r.tested_separations(),
            level: r.level,
            violations: flag(|o| o.violation()),
            extra_independencies: flag(|o| o.extra_independence()),
            passed: r.passed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub claims: Option<Vec<ClaimLine>>,
    pub soundness: Option<SoundnessSummary>,
    pub passed: bool,
}

pub fn verify_report(r: &VerifyReport, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["check", "id", "query", "expected", "observed", "passed"])
                .map_err(csv_error)?;
            for c in r.claims.iter().flatten() {
                let pass = c.passed.to_string();
                let row = ["claim", &c.id, &c.query, &c.expected, &c.verdict, &pass];
                w.write_record(row).map_err(csv_error)?;
            }
            if let Some(s) = &r.soundness {
                for v in &s.violations {
                    let p = format!("p={:.3e}", v.p);
                    let row = ["soundness", &v.world, &v.query, "independent", &p, "false"];
                    w.write_record(row).map_err(csv_error)?;
                }
                let summary = format!("{} violations", s.violations.len());
                let row = [
                    "soundness",
                    "all",
                    "",
                    "no violations",
                    &summary,
                    &s.passed.to_string(),
                ];
                w.write_record(row).map_err(csv_error)?;
            }
            finish_csv(w)
        }
        Format::Text => Ok(verify_text(r)),
    }
}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify_text(r: &VerifyReport) -> String {
    let mut s = String::new();
    if let Some(claims) = &r.claims {
        let _ = writeln!(s, "claim ledger");
        for c in claims {
            let _ = writeln!(
                s,
                "{} {:<42} {:<7} {}  expected {}, got {}",
                pass(c.passed),
                c.id,
                c.diagram,
                c.query,
                c.expected,
                c.verdict
            );
            let _ = writeln!(s, "     {}", c.rationale);
        }
        let ok = claims.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "claims: {ok}/{} passed", claims.len());
        let _ = writeln!(s);
    }
    if let Some(sd) = &r.soundness {
        let o = &sd.options;
        let _ = writeln!(
            s,
            "soundness: n={} seed={} alpha={} permutation floor={}",
            o.n, o.seed, o.alpha, o.permutations
        );
        let _ = writeln!(
            s,
            "  worlds {}, queries {}, tested separations {}, per-test level {:.4e}",
            sd.worlds, sd.queries, sd.tested_separations, sd.level
        );
        for v in &sd.violations {
            let _ = writeln!(
                s,
                "  FAIL {} {}  cmi={:.3e} bits p={:.3e}",
                v.world, v.query, v.statistic, v.p
            );
        }
        let _ = writeln!(s, "  violations {}", sd.violations.len());
        if o.test_connected {
            let _ = writeln!(
                s,
                "  connected without detected dependence {} (reported only)",
                sd.extra_independencies.len()
            );
        }
        let _ = writeln!(s, "soundness: {}", pass(sd.passed));
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "result: {}", pass(r.passed));
    s
}
