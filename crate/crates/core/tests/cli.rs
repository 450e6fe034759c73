use std::path::PathBuf;
use std::process::{Command, Output};

use relfix::parse_problem;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn relfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relfix"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn report_on_the_step_fixture_passes() {
    let out = relfix(&["report", "example-3-1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("fixed points {1}"));
    assert!(text.contains("orbit 3 → 2 → 1 → 1"));
    assert!(text.contains("verdict: PASS"));
}

#[test]
fn json_reports_are_byte_identical() {
    let a = relfix(&["report", "synthetic-geometric.relfix", "--json"]);
    let b = relfix(&["report", "synthetic-geometric.relfix", "--json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let json: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(json["header"]["toolkit"], "relfix");
    assert_eq!(json["header"]["input_digest"].as_str().unwrap().len(), 64);
    assert_eq!(json["verdict"]["pass"], true);
    assert_eq!(json["certificate"]["unique"], true);
}

#[test]
fn coefficient_override_fails_the_axioms() {
    let out = relfix(&["axioms", "example-3-1", "--s", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("triangle: d(1, 3) = 4 > s·(d(1, 2) + d(2, 3)) = 2"));
}

#[test]
fn usual_metric_shows_unit_image_ratio() {
    let out = relfix(&["verify", "remark-usual-metric"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("[probe (2, 4)] d(σ,ρ) = 2, d(Fσ,Fρ) = 2, ratio 1"));
}

#[test]
fn b_simulation_probe_reports_negative_bound() {
    let out = relfix(&["verify", "remark-b-simulation", "--json"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let probe = &json["probes"][0];
    assert_eq!(probe["b_simulation"]["bound"], -4.0);
    assert_eq!(probe["b_simulation"]["nonnegative_value_impossible"], true);
}

#[test]
fn solver_flags_are_honoured() {
    let out = relfix(&["solve", "example-3-1", "--start", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("orbit 2 → 1 → 1"));

    let out = relfix(&["solve", "example-3-1", "--start", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not admissible"));

    let out = relfix(&["solve", "example-3-1", "--start", "4", "--allow-inadmissible-start"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("relation violated at steps [0]"));

    let out = relfix(&["solve", "synthetic-geometric", "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("MaxIterations"));

    let out = relfix(&["solve", "synthetic-geometric", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("terminated by Tolerance"));
}

#[test]
fn certify_rejects_a_non_fixed_result() {
    let out = relfix(&["certify", "synthetic-geometric", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("is not a fixed point"));
}

#[test]
fn input_errors_exit_with_two() {
    let out = relfix(&["report", "no-such-file"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = std::env::temp_dir().join(format!("relfix-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.relfix");
    let text = std::fs::read_to_string(fixtures().join("example-3-1.relfix"))
        .unwrap()
        .replace("s = 2", "s = 0.5");
    std::fs::write(&bad, text).unwrap();
    let out = relfix(&["axioms", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(": 5:5: s ≥ 1 required"), "{err}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn fixtures_round_trip_through_canonical_text() {
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let file = parse_problem(&text).unwrap();
        let again = parse_problem(&file.to_string()).unwrap();
        assert_eq!(file, again, "{}", path.display());
    }
}
