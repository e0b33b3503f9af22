use std::path::Path;
use std::process::{Command, Output};

use paulipriv_core::algebra::structure_type;
use paulipriv_core::constructions::{displayed_qutrit_character_table, private_algebra_for_max_abelian};
use paulipriv_core::dense::{identity, max_abs_diff, DenseOperator, OperatorJson};
use paulipriv_core::group::parse_class_list;
use paulipriv_core::group::PauliSubgroup;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paulipriv")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(out)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_operator(dir: &TempDir, name: &str, m: &DenseOperator) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(&OperatorJson::from(m)).unwrap()).unwrap();
    path_str(&p).to_string()
}

#[test]
fn exit_code_matrix() {
    let dir = TempDir::new().unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{ not json").unwrap();
    let ch2 = dir.path().join("ch2.json");
    assert_eq!(code(&run(&["channel", "from-group", "--gens", "ZI,IZ", "--out", path_str(&ch2)])), 0);
    let state1 = write_operator(&dir, "s1.json", &identity(2).unscale(2.0));

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["demo", "phaseflip"], 0),
        (vec!["demo", "qutrit"], 0),
        (vec!["demo", "qutrit", "--perturb"], 1),
        (vec!["privacy", "certify", "--group", "ZI,IZ", "--construct"], 0),
        (vec!["privacy", "certify", "--channel", "identity", "--b", "IX,YY"], 1),
        (vec!["privacy", "quasiorth", "--a", "delta4", "--b", "II,IX,YY,YZ"], 0),
        (vec!["privacy", "quasiorth", "--a", "delta4", "--b", "delta4"], 1),
        (vec!["group", "abelian", "--gens", "ZI,IZ"], 0),
        (vec!["group", "abelian", "--gens", "X,Z"], 1),
        (vec!["group", "close", "--gens", "XQ"], 2),
        (vec!["group", "close", "--gens", "ZI", "--bogus"], 2),
        (vec!["channel", "apply", "--in", path_str(&bad_json), "--state", &state1], 2),
        (vec!["channel", "apply", "--in", "/nonexistent/ch.json", "--state", &state1], 2),
        (vec!["privacy", "quasiorth", "--a", "delta4", "--b", "II,IX", "--format", "yaml"], 2),
        (vec!["channel", "apply", "--in", path_str(&ch2), "--state", &state1], 3),
        (vec!["group", "extend", "--gens", "X,Z"], 3),
        (vec!["channel", "from-group", "--gens", "XI,ZI"], 3),
        (vec!["privacy", "quasiorth", "--a", "delta2", "--b", "II,IX"], 3),
    ];
    for (args, expected) in cases {
        let out = run(&args);
        assert_eq!(code(&out), expected, "{args:?}\nstdout: {}\nstderr: {}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn json_output_is_deterministic_without_timestamp() {
    for args in [
        vec!["demo", "phaseflip", "--seed", "7", "--no-timestamp"],
        vec!["privacy", "certify", "--group", "ZZI,XXI,IIZ", "--construct", "--no-timestamp"],
        vec!["demo", "qutrit", "--no-timestamp"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let v = json(&a);
        assert!(v.get("timestamp").is_none());
        assert!(v.get("seed").is_some() && v.get("tolerance").is_some());
    }
    let v = json(&run(&["demo", "phaseflip"]));
    assert!(v["timestamp"].is_u64());
}

#[test]
fn phaseflip_transcript() {
    let out = run(&["demo", "phaseflip", "--format", "text"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().last(), Some("Φ(ρ) = I/4 for all tested ρ; max deviation < 1e-8"));
    assert_eq!(text.lines().filter(|l| l.contains("ρ[")).count(), 100);
}

#[test]
fn qutrit_demo_names_the_failing_identity() {
    let out = run(&["demo", "qutrit", "--format", "text"]);
    assert_eq!(stdout(&out).matches(": ok").count(), 5);
    let out = run(&["demo", "qutrit", "--perturb", "--format", "text"]);
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("failing identity:") && last.contains("ω XZ²⊗Z"), "{last}");
}

#[test]
fn certify_construct_reports_maximally_mixed_output() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("cert.json");
    let out = run(&["privacy", "certify", "--group", "ZI,IZ", "--construct", "--out", path_str(&cert)]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], Value::Bool(true));
    let written: OperatorJson = serde_json::from_value(
        serde_json::from_str::<Value>(&std::fs::read_to_string(&cert).unwrap()).unwrap()["rho0"].clone(),
    )
    .unwrap();
    let rho0 = DenseOperator::try_from(&written).unwrap();
    assert!(max_abs_diff(&rho0, &identity(4).unscale(4.0)) < 1e-12);
}

#[test]
fn group_files() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("k.txt");
    let out = run(&["group", "extend", "--gens", "ZI,IZ", "--d", "2", "--out", path_str(&f)]);
    assert_eq!(code(&out), 0);
    let k = PauliSubgroup::from_file_string(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(k.len(), 4);
    assert!(k.contains(&parse_class_list("ZZ", 2).unwrap()[0]));

    // the file feeds back in
    let out = run(&["group", "annihilator", "--in", path_str(&f)]);
    assert_eq!(json(&out)["result"]["size"], 4);

    let out = run(&["group", "annihilator", "--gens", ""]);
    assert_eq!(json(&out)["result"]["elements"], serde_json::json!(["I", "X", "Z", "Y"]));
}

#[test]
fn qutrit_character_csv_matches_displayed_table() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("f.csv");
    assert_eq!(code(&run(&["group", "charmatrix", "--d", "3", "--n", "1", "--out", path_str(&f)])), 0);
    let text = std::fs::read_to_string(&f).unwrap();
    let rows: Vec<Vec<u32>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    let expected: Vec<Vec<u32>> = displayed_qutrit_character_table().iter().map(|r| r.to_vec()).collect();
    assert_eq!(rows, expected);
}

#[test]
fn channel_pipeline_matches_library() {
    let dir = TempDir::new().unwrap();
    let ch = dir.path().join("ch.json");
    let res = dir.path().join("out.json");
    assert_eq!(code(&run(&["channel", "from-group", "--gens", "ZI,IZ", "--out", path_str(&ch)])), 0);
    // |00⟩+|11⟩ Bell state loses its coherences
    let mut bell = DenseOperator::zeros(4, 4);
    for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        bell[(r, c)] = 0.5.into();
    }
    let st = write_operator(&dir, "bell.json", &bell);
    assert_eq!(code(&run(&["channel", "apply", "--in", path_str(&ch), "--state", &st, "--out", path_str(&res)])), 0);
    let out: OperatorJson = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
    let out = DenseOperator::try_from(&out).unwrap();
    let mut expect = DenseOperator::zeros(4, 4);
    expect[(0, 0)] = 0.5.into();
    expect[(3, 3)] = 0.5.into();
    assert!(max_abs_diff(&out, &expect) < 1e-12);

    // complete depolarization of a qubit
    let cd = dir.path().join("cd.json");
    assert_eq!(code(&run(&["channel", "condexp", "--algebra", "scalars", "--n", "1", "--out", path_str(&cd)])), 0);
    let mut ket0 = DenseOperator::zeros(2, 2);
    ket0[(0, 0)] = 1.0.into();
    let st = write_operator(&dir, "zero.json", &ket0);
    let v = json(&run(&["channel", "apply", "--in", path_str(&cd), "--state", &st]));
    let out: OperatorJson = serde_json::from_value(v["result"].clone()).unwrap();
    assert!(max_abs_diff(&DenseOperator::try_from(&out).unwrap(), &identity(2).unscale(2.0)) < 1e-12);

    // same channel twice is Choi-equal, different channels are not
    assert_eq!(code(&run(&["channel", "choi-equal", "--in", path_str(&ch), "--other", path_str(&ch)])), 0);
    let ch1 = dir.path().join("ch1.json");
    assert_eq!(code(&run(&["channel", "from-group", "--gens", "ZI", "--out", path_str(&ch1)])), 0);
    assert_eq!(code(&run(&["channel", "choi-equal", "--in", path_str(&ch), "--other", path_str(&ch1)])), 1);
}

#[test]
fn subsystem_certificate_from_block_unitary() {
    let dir = TempDir::new().unwrap();
    let g = PauliSubgroup::close(2, 2, &parse_class_list("ZI,IZ", 2).unwrap()).unwrap();
    let p = private_algebra_for_max_abelian(&g).unwrap();
    let dec = structure_type(&p.algebra).unwrap();
    let v = write_operator(&dir, "v.json", &dec.unitary().adjoint());
    let out = run(&["privacy", "subsystem", "--group", "ZI,IZ", "--v", &v, "--dim-a", "2", "--dim-b", "2"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(json(&out)["result"]["verdict"], Value::Bool(true));
    let out = run(&["privacy", "subsystem", "--channel", "identity", "--v", &v, "--dim-a", "2", "--dim-b", "2"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn tolerance_override_is_echoed() {
    let v = json(&run(&["privacy", "quasiorth", "--a", "delta4", "--b", "II,IX,YY,YZ", "--tol", "1e-6", "--seed", "9"]));
    assert_eq!(v["tolerance"], 1e-6);
    assert_eq!(v["seed"], 9);
}
