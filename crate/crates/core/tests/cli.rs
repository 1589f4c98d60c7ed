use std::process::{Command, Output};

use phonon_qsim::circuits::Circuit;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phonon-qsim")).args(args).env("PHONON_QSIM_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header(text: &str) -> Vec<String> {
    let line = text.lines().find(|l| !l.starts_with('#')).unwrap();
    line.split(',').map(str::to_string).collect()
}

#[test]
fn resources_table() {
    let o = run(&["resources", "--sites", "2,3,4", "--n-x", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with('#'));
    assert_eq!(
        header(&text),
        ["n_sites", "coupling", "qubits", "phonon_qubits", "gates", "two_qubit", "depth", "ep_two_qubit"]
    );
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert!(rows.len() >= 3);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0], "2");
}

#[test]
fn exported_circuit_parses() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.txt");
    std::fs::write(&model, "sites = 2\nalpha = 1.0\nn_x = 3\n").unwrap();
    let out = dir.path().join("circuit.txt");
    let o = run(&["export-circuit", "--model", model.to_str().unwrap(), "--steps", "2", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# order = 2"));
    let c = Circuit::from_text(&text).unwrap();
    assert_eq!(c.n_qubits(), 2 + 2 * 3);
    assert!(!c.is_empty());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sizes\nsites = 3\nn_x = 2\n").unwrap();
    let o = run(&["resources", "--sites", "5,6", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("n_x = 2"));
    let sites: Vec<String> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert!(sites.iter().all(|s| s == "3"), "{sites:?}");
}

#[test]
fn ed_reference_matches_golden_layout() {
    let o = run(&["ed-reference", "--alphas", "0.5,1", "--n-cut", "30", "--z-max", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows = phonon_qsim::ed::parse_golden(&text).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].z.len(), 6);
    assert!(rows[1].e0 < 0.0);
}

#[test]
fn invalid_input_exit_code() {
    let o = run(&["export-circuit", "--omega", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "sites = 2\nflavour = 1\n").unwrap();
    let o = run(&["export-circuit", "--model", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_exit_code() {
    let o = run(&["export-circuit", "--model", "/nonexistent/model.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exit_code() {
    let o = run(&[
        "prep-gaussian",
        "--n-x",
        "4",
        "--steps",
        "1",
        "--target",
        "0.9999999",
        "--restarts",
        "1",
        "--max-sweeps",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    // The parameters are still written.
    assert!(stdout(&o).contains("n_x = 4"));
}

#[test]
fn resource_cap_exit_code() {
    let o = run(&["polaron-sweep", "--sites", "3", "--n-x", "7"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gaussian_parameters_round_trip() {
    let o = run(&["prep-gaussian", "--n-x", "3", "--steps", "2", "--target", "0.99", "--restarts", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = phonon_qsim::stateprep::VariationalParams::parse(&stdout(&o)).unwrap();
    assert_eq!((p.n_x, p.steps.len()), (3, 2));
    assert!(phonon_qsim::stateprep::gaussian_fidelity(&p).unwrap() >= 0.99);
}

#[test]
fn truncation_study_rows() {
    let o = run(&["truncation-study", "--n-x", "4", "--fit-eps"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 16);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
