use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ffo_lab::{parse_scenario, run, Status};

fn scenario(omega: &str, f: &str, ic: [[f64; 2]; 3], rtol: f64, tasks: &[&str]) -> String {
    serde_json::json!({
        "hamiltonian": {"omega": omega, "f": f, "g": "0"},
        "initial": {"nu_minus": ic[0], "nu_plus": ic[1], "nu_3": ic[2]},
        "time": {"t0": 0.0, "t1": 10.0, "dt_out": 0.01, "rtol": rtol, "atol": 1e-12},
        "tasks": tasks,
    })
    .to_string()
}

const IC_A: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]];
const IC_B: [[f64; 2]; 3] = [[0.5, 0.0], [0.5, 0.0], [0.0, 1.0]];

fn ffo_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffo-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn free_run_reports_drift_and_oracle_distance() {
    let s = parse_scenario(
        &scenario("2", "0", IC_A, 1e-10, &["nu", "oracle"]),
        "p1",
        Path::new("."),
    )
    .unwrap();
    let out = run(&s);
    let nu = out.report.task("nu").unwrap();
    assert!(nu.residual("lambda1_drift").unwrap() <= 1e-9);
    assert!(nu.residual("lambda2_drift").unwrap() <= 1e-9);
    let oracle = out.report.task("oracle").unwrap();
    assert!(oracle.residual("oracle_distance").unwrap() <= 1e-7);
    assert_eq!(out.report.status, Status::Ok);
    let table = out.table("nu.csv").unwrap();
    assert_eq!(table.headers.last().unwrap(), "oracle_distance");
    assert_eq!(table.rows.len(), 1001);
    for (name, t) in &out.report.tasks {
        for key in t.max_residuals.keys() {
            assert!(
                t.tolerance.contains_key(key),
                "{name}.{key} has no tolerance"
            );
        }
    }
}

#[test]
fn driven_chain_matches() {
    let s = parse_scenario(
        &scenario("2", "0.5", IC_B, 1e-10, &["epsilon"]),
        "p3",
        Path::new("."),
    )
    .unwrap();
    let out = run(&s);
    let eps = out.report.task("epsilon").unwrap();
    assert!(eps.residual("chain_mismatch").unwrap() <= 1e-6);
    assert_eq!(out.report.tasks.len(), 1);
}

#[test]
fn epsilon_without_drive_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "free.json",
        &scenario("2", "0", IC_B, 1e-10, &["epsilon"]),
    );
    let o = ffo_lab(&["check", &path]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let err = report["tasks"]["epsilon"]["error"].as_str().unwrap();
    assert!(err.contains("f vanishes on grid"), "{err}");
    assert_eq!(report["tasks"]["epsilon"]["status"], "validation_error");
}

#[test]
fn loose_tolerances_are_reported_as_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "loose.json",
        &scenario("2", "0.5", IC_B, 1e-4, &["nu"]),
    );
    let o = ffo_lab(&["check", &path]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn invalid_scenarios_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.json",
        r#"{"hamiltonian": {"omega": "2", "f": "0", "g": "0"}}"#,
    );
    let o = ffo_lab(&["run", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("initial"));

    let path = write(
        dir.path(),
        "imag.json",
        &scenario("i*t", "0", IC_A, 1e-10, &["nu"]),
    );
    assert_eq!(ffo_lab(&["run", &path]).status.code(), Some(1));

    let path = write(
        dir.path(),
        "driven.json",
        &scenario("2", "0.5", IC_A, 1e-10, &["nu"]),
    );
    assert_eq!(ffo_lab(&["free-compare", &path]).status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let tasks = [
        "nu",
        "oracle",
        "epsilon",
        "states",
        "phases",
        "discrepancies",
    ];
    let path = write(
        dir.path(),
        "p4.json",
        &scenario("2 + 0.3*cos(t)", "0.4*exp(i*t)", IC_B, 1e-10, &tasks),
    );
    let mut listings = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = ffo_lab(&["run", &path, "--out", out.to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stdout)
        );
        let mut files: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "json"))
            .filter(|p| p.file_name().unwrap() != "report.json")
            .collect();
        files.sort();
        listings.push(
            files
                .iter()
                .map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    let names: Vec<_> = listings[0]
        .iter()
        .map(|(n, _)| n.to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "epsilon.csv",
            "ledger.json",
            "nu.csv",
            "oracle.csv",
            "phases.csv",
            "states.csv"
        ]
    );
    assert!(listings[0] == listings[1], "outputs differ between runs");
}

#[test]
fn free_compare_writes_both_forms() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "p2.json",
        &scenario("2 + 0.5*sin(t)", "0", IC_B, 1e-10, &["nu"]),
    );
    let out = dir.path().join("fc");
    let o = ffo_lab(&["free-compare", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("free_compare.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(
        header.ends_with("implemented_deviation,stated_deviation"),
        "{header}"
    );
    assert!(!out.join("nu.csv").exists());
}

#[test]
fn sweep_runs_a_directory_and_reports_the_worst_status() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "a.json",
        &scenario("2", "0", IC_A, 1e-10, &["nu"]),
    );
    write(
        dir.path(),
        "b.json",
        &scenario("2", "0.5", IC_B, 1e-10, &["nu", "oracle"]),
    );
    let o = ffo_lab(&["sweep", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("a.out/nu.csv").exists());
    assert!(dir.path().join("b.out/oracle.csv").exists());

    write(
        dir.path(),
        "c.json",
        &scenario("2", "0.5", IC_B, 1e-4, &["nu"]),
    );
    let o = ffo_lab(&["sweep", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
