use std::path::Path;
use std::process::{Command, Output};

use hai::graph_io::to_json;
use hai_core::conditions::catalog;
use hai_core::graph::{Edge, NodeId};

fn hai(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hai"))
        .args(args)
        .current_dir(dir)
        .env_remove("HAI_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&hai(&["diagram", "fig2"], d)), 0);
    assert_eq!(code(&hai(&["diagram", "fig99"], d)), 2);
    assert_eq!(
        code(&hai(&["dsep", "--diagram", "fig2", "--a", "Q", "--b", "Y"], d)),
        2
    );
    assert_eq!(
        code(&hai(&["dsep", "--diagram", "fig2", "--a", "Y", "--b", "Y"], d)),
        3
    );
    assert_eq!(code(&hai(&["diagram", "fig2", "--bogus"], d)), 3);
    assert_eq!(code(&hai(&["study"], d)), 3);
    assert_eq!(code(&hai(&["simulate", "--diagram", "fig2"], d)), 3);
    std::fs::write(d.join("broken.json"), "{\"nodes\": 3}").unwrap();
    assert_eq!(code(&hai(&["diagram", "broken.json"], d)), 3);
    std::fs::write(d.join("bad.toml"), "alpha = 2.0\n").unwrap();
    assert_eq!(
        code(&hai(&["--seed", "1", "study", "--config", "bad.toml"], d)),
        3
    );
    assert_eq!(
        code(&hai(&["--seed", "1", "study", "--config", "missing.toml"], d)),
        2
    );
    assert_eq!(code(&hai(&["--help"], d)), 0);
}

#[test]
fn fig3d_dot_has_dashed_double_arrow() {
    let dir = tempfile::tempdir().unwrap();
    let o = hai(&["diagram", "fig3d", "--dot", "out.dot"], dir.path());
    assert_eq!(code(&o), 0);
    let dot = std::fs::read_to_string(dir.path().join("out.dot")).unwrap();
    assert!(
        dot.contains("\"Y\" -> \"Yhat\" [style=dashed, dir=both]"),
        "{dot}"
    );
}

#[test]
fn diagram_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&hai(&["diagram", "fig4c2", "--json", "c2.json"], d)), 0);
    let text = std::fs::read_to_string(d.join("c2.json")).unwrap();
    assert_eq!(
        hai::graph_io::from_json(&text).unwrap(),
        catalog("fig4c2").unwrap()
    );
    let from_key = hai(
        &[
            "dsep",
            "--diagram",
            "fig4c2",
            "--a",
            "H",
            "--b",
            "Z",
            "--given",
            "X",
        ],
        d,
    );
    let from_file = hai(
        &[
            "dsep",
            "--diagram",
            "c2.json",
            "--a",
            "H",
            "--b",
            "Z",
            "--given",
            "X",
        ],
        d,
    );
    assert_eq!(stdout(&from_key), "{\"verdict\":\"connected\"}\n");
    assert_eq!(stdout(&from_key), stdout(&from_file));
}

#[test]
fn dsep_json_answer() {
    let dir = tempfile::tempdir().unwrap();
    let o = hai(
        &[
            "dsep",
            "--diagram",
            "fig4c1",
            "--a",
            "E",
            "--b",
            "Y,Z",
            "--given",
            "X,g",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "{\"verdict\":\"separated\"}\n");
}

#[test]
fn study_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for fmt in ["text", "json", "csv"] {
        let run = |name: &str| {
            let o = hai(
                &[
                    "--seed",
                    "2024",
                    "--format",
                    fmt,
                    "study",
                    "--report",
                    name,
                    "--records",
                    &format!("{name}.records"),
                ],
                d,
            );
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            (
                std::fs::read(d.join(name)).unwrap(),
                std::fs::read(d.join(format!("{name}.records"))).unwrap(),
            )
        };
        assert_eq!(run("one"), run("two"), "{fmt}");
    }
    let csv = std::fs::read_to_string(d.join("one")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn expecting_reversed_h2c_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("study.toml"), "[expectations]\nh2c = \"reversed\"\n").unwrap();
    let o = hai(&["--seed", "2024", "study", "--config", "study.toml"], d);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = Command::new(env!("CARGO_BIN_EXE_hai"))
        .args(["--seed", "3", "--format", "json", "study"])
        .env("HAI_OUTPUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let report = std::fs::read_to_string(out.join("study_report.json")).unwrap();
    let doc: hai::report::StudyReport = serde_json::from_str(&report).unwrap();
    assert_eq!(doc.result.seed, 3);
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = hai(&["--seed", "9", "simulate", "--diagram", "fig2", "--n", "100"], d);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"X") && header.contains(&"Z"));
    assert_eq!(lines.count(), 100);
    assert_eq!(
        code(&hai(
            &[
                "--seed",
                "9",
                "simulate",
                "--diagram",
                "fig3a",
                "--realization",
                "1",
                "--n",
                "10"
            ],
            d
        )),
        0
    );
    assert_eq!(
        code(&hai(
            &[
                "--seed",
                "9",
                "simulate",
                "--diagram",
                "fig3a",
                "--realization",
                "999"
            ],
            d
        )),
        2
    );
}

#[test]
fn corrupted_catalog_fails_claims() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let tampered = catalog("fig4c1")
        .unwrap()
        .add_edge(Edge::directed("Y", "E"))
        .unwrap();
    std::fs::write(d.join("tampered.json"), to_json(&tampered)).unwrap();
    let o = hai(
        &[
            "verify",
            "--suite",
            "claims",
            "--diagram-override",
            "fig4c1=tampered.json",
        ],
        d,
    );
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL explanation-given-input-and-model"));
    assert_eq!(code(&hai(&["verify", "--suite", "claims"], d)), 0);
    assert_eq!(
        code(&hai(&["verify", "--diagram-override", "fig99=tampered.json"], d)),
        2
    );
}

#[test]
fn corrupted_catalog_fails_soundness() {
    // The verdicts forget that the prediction depends on the input; data
    // still comes from the real diagram.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fig2 = catalog("fig2").unwrap();
    let edge = fig2
        .edges()
        .find(|e| e.from() == &NodeId::new("X") && e.to() == &NodeId::new("Yhat"))
        .unwrap()
        .clone();
    std::fs::write(d.join("cut.json"), to_json(&fig2.remove_edge(&edge))).unwrap();
    let o = hai(
        &[
            "--seed",
            "1",
            "verify",
            "--suite",
            "soundness",
            "--n",
            "2000",
            "--alpha",
            "0.5",
            "--diagram-override",
            "fig2=cut.json",
        ],
        d,
    );
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL fig2/r0"));
}
