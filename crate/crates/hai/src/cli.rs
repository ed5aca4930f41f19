//! The `hai` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hai_core::claims::run_claims;
use hai_core::dsep::{d_separated, DsepError, SeparationQuery, Verdict};
use hai_core::graph::Diagram;
use hai_core::scm::{instantiate, sample, WorldSpec};
use hai_core::seed::derive_seed;
use hai_core::soundness::{catalog_worlds_with, random_worlds, SoundnessOptions};
use hai_core::study::{run_study, StudyConfig};
use serde::Serialize;

use crate::config::{load_study, load_world};
use crate::error::Failure;
use crate::graph_io::{load_diagram, to_dot, to_json};
use crate::parallel::run_worlds;
use crate::report::{
    records_csv, samples_csv, study_report, verify_report, ClaimLine, Format, SoundnessSummary, VerifyReport,
};

/// Random five-node worlds added to the catalog in soundness runs.
pub const RANDOM_WORLDS: usize = 20;
const RANDOM_WORLD_NODES: usize = 5;

#[derive(Debug, Parser)]
#[command(
    name = "hai",
    version,
    about = "Causal diagrams of human-AI decision making: separation queries, simulation and a replication study"
)]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true, env = "HAI_OUTPUT_DIR")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Claims,
    Soundness,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a catalog diagram or diagram file.
    Diagram {
        /// Catalog key or path to a diagram JSON file.
        diagram: String,
        /// Write DOT here.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the diagram JSON document here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Answer a separation query.
    Dsep {
        #[arg(long)]
        diagram: String,
        /// Comma-separated node ids.
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<String>,
        /// Node ids or function tags to condition on.
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Run the claim ledger and/or the Monte Carlo soundness check.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Samples per world.
        #[arg(long, default_value_t = 50_000)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        permutations: usize,
        /// Replace a catalog diagram, as KEY=PATH.
        #[arg(long = "diagram-override", value_name = "KEY=PATH")]
        overrides: Vec<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample a realized diagram and write CSV.
    Simulate {
        #[arg(long)]
        diagram: String,
        /// World spec file (TOML or JSON).
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Which orientation of the ambiguous links to sample (default 0).
        #[arg(long)]
        realization: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the simulated replication study.
    Study {
        /// Study config file (TOML or JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Dump one CSV row per trial here.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let out = Output {
        dir: cli.output.clone(),
    };
    match &cli.command {
        Command::Diagram { diagram, dot, json } => cmd_diagram(&out, cli.format, diagram, dot, json),
        Command::Dsep { diagram, a, b, given } => {
            cmd_dsep(cli.format.unwrap_or(Format::Json), diagram, a, b, given)
        }
        Command::Verify {
            suite,
            n,
            alpha,
            permutations,
            overrides,
            report,
        } => {
            let opts = SoundnessOptions {
                n: *n,
                alpha: *alpha,
                permutations: *permutations,
                seed: cli.seed.unwrap_or(0),
                test_connected: false,
            };
            let fmt = cli.format.unwrap_or(Format::Text);
            let r = verify(*suite, &opts, overrides)?;
            let ext = extension(fmt);
            out.emit(
                report.as_deref(),
                &format!("verify_report.{ext}"),
                &verify_report(&r, fmt)?,
            )?;
            if r.passed {
                Ok(())
            } else {
                Err(Failure::Verdict("verification failed".into()))
            }
        }
        Command::Simulate {
            diagram,
            world,
            n,
            realization,
            out: path,
        } => {
            let seed = require_seed(cli.seed, "simulate")?;
            let csv = simulate(diagram, world.as_deref(), *n, *realization, seed)?;
            out.emit(path.as_deref(), "samples.csv", &csv)
        }
        Command::Study {
            config,
            report,
            records,
        } => {
            let seed = require_seed(cli.seed, "study")?;
            let cfg = match config {
                Some(p) => load_study(p)?,
                None => StudyConfig::default(),
            };
            let result = run_study(&cfg, seed).map_err(|e| Failure::Invalid(e.to_string()))?;
            let fmt = cli.format.unwrap_or(Format::Text);
            let ext = extension(fmt);
            out.emit(
                report.as_deref(),
                &format!("study_report.{ext}"),
                &study_report(&cfg, &result, fmt)?,
            )?;
            if let Some(p) = records {
                out.write(p, &records_csv(&result)?)?;
            }
            if result.all_match() {
                Ok(())
            } else {
                let missed: Vec<&str> = result
                    .hypotheses
                    .iter()
                    .filter(|h| !h.matches_expectation())
                    .map(|h| h.name.as_str())
                    .collect();
                Err(Failure::Verdict(format!(
                    "hypotheses not as expected: {}",
                    missed.join(", ")
                )))
            }
        }
    }
}

fn require_seed(seed: Option<u64>, cmd: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Invalid(format!("`{cmd}` needs --seed")))
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Text => "txt",
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

/// Where files go: explicit paths are taken relative to the output
/// directory when one is set; without a path, a default name in the output
/// directory or stdout.
struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn write(&self, p: &Path, content: &str) -> Result<(), Failure> {
        let p = self.resolve(p);
        let io = |e: std::io::Error| Failure::Invalid(format!("{}: {e}", p.display()));
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        std::fs::write(&p, content).map_err(io)
    }

    fn emit(&self, explicit: Option<&Path>, default_name: &str, content: &str) -> Result<(), Failure> {
        match (explicit, &self.dir) {
            (Some(p), _) => self.write(p, content),
            (None, Some(_)) => self.write(Path::new(default_name), content),
            (None, None) => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(content.as_bytes())
                    .map_err(|e| Failure::Invalid(format!("stdout: {e}")))
            }
        }
    }
}

fn cmd_diagram(
    out: &Output,
    format: Option<Format>,
    spec: &str,
    dot: &Option<PathBuf>,
    json: &Option<PathBuf>,
) -> Result<(), Failure> {
    let d = load_diagram(spec)?;
    let name = Path::new(spec)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(spec)
        .to_string();
    if let Some(p) = json {
        out.write(p, &to_json(&d))?;
    }
    match format {
        Some(Format::Json) if dot.is_none() => out.emit(None, &format!("{name}.json"), &to_json(&d)),
        Some(Format::Csv) => Err(Failure::Invalid("diagrams are exported as DOT or JSON".into())),
        _ if json.is_some() && dot.is_none() => Ok(()),
        _ => out.emit(dot.as_deref(), &format!("{name}.dot"), &to_dot(&d, &name)),
    }
}

#[derive(Serialize)]
struct DsepAnswer<'a> {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    realizations: Option<&'a [hai_core::dsep::RealizationOutcome]>,
}

fn dsep_failure(e: DsepError) -> Failure {
    match e {
        DsepError::UnknownNode(_) => Failure::Unknown(e.to_string()),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn cmd_dsep(format: Format, spec: &str, a: &[String], b: &[String], given: &[String]) -> Result<(), Failure> {
    let d = load_diagram(spec)?;
    let trim = |v: &[String]| -> Vec<String> {
        v.iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    };
    let (a, b, given) = (trim(a), trim(b), trim(given));
    let q = SeparationQuery::new(
        a.iter().map(String::as_str),
        b.iter().map(String::as_str),
        given.iter().map(String::as_str),
    );
    let v = d_separated(&d, &q).map_err(dsep_failure)?;
    let text = match format {
        Format::Json => {
            let realizations = match &v {
                Verdict::Ambiguous(r) => Some(r.as_slice()),
                _ => None,
            };
            let answer = DsepAnswer {
                verdict: v.name(),
                realizations,
            };
            serde_json::to_string(&answer).expect("verdict serializes") + "\n"
        }
        Format::Text => format!("{q}: {}\n", v.name()),
        Format::Csv => return Err(Failure::Invalid("dsep prints JSON or text".into())),
    };
    print!("{text}");
    Ok(())
}

fn parse_overrides(raw: &[String]) -> Result<BTreeMap<String, Diagram>, Failure> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (key, path) = item
            .split_once('=')
            .ok_or_else(|| Failure::Invalid(format!("--diagram-override expects KEY=PATH, got `{item}`")))?;
        if hai_core::conditions::catalog(key).is_none() {
            return Err(Failure::Unknown(format!(
                "no catalog diagram `{key}` to override"
            )));
        }
        out.insert(key.to_string(), load_diagram(path)?);
    }
    Ok(out)
}

/// Runs the requested suites and collects the report.
pub fn verify(suite: Suite, opts: &SoundnessOptions, overrides: &[String]) -> Result<VerifyReport, Failure> {
    let overrides = parse_overrides(overrides)?;
    let lookup = |k: &str| overrides.get(k).cloned();
    let claims = matches!(suite, Suite::Claims | Suite::All).then(|| {
        run_claims(lookup)
            .iter()
            .map(ClaimLine::from_outcome)
            .collect::<Vec<_>>()
    });
    let soundness = if matches!(suite, Suite::Soundness | Suite::All) {
        if !(opts.alpha > 0.0 && opts.alpha < 1.0) || opts.n == 0 {
            return Err(Failure::Invalid(
                "soundness needs n > 0 and alpha in (0, 1)".into(),
            ));
        }
        let mut worlds = catalog_worlds_with(lookup);
        worlds.extend(random_worlds(
            RANDOM_WORLDS,
            RANDOM_WORLD_NODES,
            derive_seed(opts.seed, "random-worlds"),
        ));
        let start = std::time::Instant::now();
        let report = run_worlds(&worlds, opts).map_err(|e| Failure::Invalid(e.to_string()))?;
        log::info!("soundness: {} worlds in {:.1?}", worlds.len(), start.elapsed());
        Some(SoundnessSummary::new(*opts, &report))
    } else {
        None
    };
    let passed = claims.iter().flatten().all(|c| c.passed) && soundness.as_ref().is_none_or(|s| s.passed);
    let suite = format!("{suite:?}").to_lowercase();
    Ok(VerifyReport {
        suite,
        claims,
        soundness,
        passed,
    })
}

pub fn simulate(
    spec: &str,
    world: Option<&Path>,
    n: usize,
    realization: Option<usize>,
    seed: u64,
) -> Result<String, Failure> {
    let d = load_diagram(spec)?;
    let w = match world {
        Some(p) => load_world(p)?,
        None => WorldSpec::default(),
    };
    let d = if d.is_realized() && realization.unwrap_or(0) == 0 {
        d
    } else {
        let k = realization.unwrap_or(0);
        let all = d.realizations();
        let count = all.len();
        log::info!("sampling realization {k} of {count}");
        all.into_iter()
            .nth(k)
            .ok_or_else(|| Failure::Unknown(format!("`{spec}` has {count} realizations, no number {k}")))?
    };
    let scm = instantiate(&d, &w, seed).map_err(|e| Failure::Invalid(e.to_string()))?;
    let data = sample(&scm, n, seed).map_err(|e| Failure::Invalid(e.to_string()))?;
    samples_csv(&data)
}
