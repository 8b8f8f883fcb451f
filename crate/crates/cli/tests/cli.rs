use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imcf-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const CENTERED: &str = r#"
scenario = "CenteredSphere"
[grid]
n_theta = 16
n_phi = 32
[shape]
r0 = 0.5235987755982988
[flow]
stop_A = 0.3
record_every = 2
evolution_steps = 10
[output]
dir = "centered"
"#;

#[test]
fn centered_run_passes_and_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "centered.toml", CENTERED);
    let out = lab(&["run", &config]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let dir = tmp.path().join("centered");
    let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,area,A,I,J,L,calK,Q,min_H,lambda_min,umbilicity"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 2);
    let last = rows.last().unwrap();
    assert!(last[2] >= 0.3 * (1.0 - 1e-9));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_passed"], true);
    let statements: Vec<&str> = summary["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["statement"].as_str().unwrap())
        .collect();
    for name in [
        "theorem_1_2",
        "prop_4_1",
        "prop_4_2",
        "prop_2_4_monotone",
        "brendle_hypothesis",
        "evolution_identities",
        "minkowski_identity",
    ] {
        assert!(statements.contains(&name), "missing verdict {name}");
    }
    assert!(summary["initial"]["Q"].as_f64().unwrap().abs() < 1e-8);
    assert!(summary["origin"]["theorem_gap"].as_f64().unwrap().abs() < 1e-8);
    assert!(dir.join("q.svg").exists() && dir.join("area.svg").exists());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let body = CENTERED.replace("dir = \"centered\"", &format!("dir = \"{run}\""));
        let config = write_config(tmp.path(), &format!("{run}.toml"), &body);
        assert_eq!(lab(&["run", &config]).status.code(), Some(0));
        let dir = tmp.path().join(run);
        outputs.push((
            std::fs::read(dir.join("trace.csv")).unwrap(),
            std::fs::read(dir.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn malformed_config_exits_two_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = CENTERED.replace("record_every", "record_evry");
    let config = write_config(tmp.path(), "typo.toml", &typo);
    let out = lab(&["run", &config]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("record_evry"), "{stderr}");

    let missing = write_config(
        tmp.path(),
        "missing.toml",
        "scenario = \"OffCenterSphere\"\n[shape]\nr0 = 0.5\n",
    );
    assert_eq!(lab(&["run", &missing]).status.code(), Some(2));
    assert_eq!(
        lab(&["run", "/nonexistent/scenario.toml"]).status.code(),
        Some(2)
    );
}

#[test]
fn failed_verdict_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
scenario = "IdentitySuite"
[grid]
n_theta = 16
n_phi = 32
[shape]
r0 = 0.6
amplitude = 0.05
pattern = "mixed"
[output]
dir = "strict"
plots = false
[tolerances]
identities = 1e-300
"#;
    let config = write_config(tmp.path(), "strict.toml", body);
    let out = lab(&["run", &config]);
    assert_eq!(out.status.code(), Some(1));
    let summary = std::fs::read_to_string(tmp.path().join("strict/summary.json")).unwrap();
    assert!(summary.contains("\"all_passed\": false"));
    assert!(!tmp.path().join("strict/q.svg").exists());
}

#[test]
fn nonconvex_start_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
scenario = "PerturbedConvex"
[grid]
n_theta = 16
n_phi = 32
[shape]
r0 = 1.0
amplitude = 0.4
pattern = "quadrupole"
"#;
    let config = write_config(tmp.path(), "dent.toml", body);
    let out = lab(&["run", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn oracle_prints_closed_forms() {
    let out = lab(&["oracle", "sphere", "--n", "3", "--r0", "0.7853981633974483"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let i = v["centered"]["I"].as_f64().unwrap();
    assert!((i - 2.0 * 2f64.sqrt() * std::f64::consts::PI).abs() < 1e-12);
    assert!(v.get("offcenter").is_none());

    let out = lab(&[
        "oracle",
        "sphere",
        "--r0",
        "0.5235987755982988",
        "--d",
        "0.25",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["offcenter"]["naive_gap"].as_f64().unwrap() < 0.0);

    let out = lab(&["oracle", "sphere", "--r0", "2.0"]);
    assert_eq!(out.status.code(), Some(2));
}
