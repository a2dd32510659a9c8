use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ultralab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultralab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn axioms_report_has_seven_passing_entries() {
    let dir = tempfile::tempdir().unwrap();
    let o = ultralab(&["axioms", "--level", "6"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("axioms.json")).unwrap()).unwrap();
    let entries = report["entries"].as_object().unwrap();
    assert_eq!(entries.len(), 7);
    assert!(entries.values().all(|e| e["pass"] == true));
    assert_eq!(report["all_pass"], true);
}

#[test]
fn scalar_eval_prints_standard_part() {
    let dir = tempfile::tempdir().unwrap();
    let o = ultralab(&["scalar-eval", "st(3 + 5*a^-1)"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "3");
}

#[test]
fn refine_poincare_fits_exponent_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = ultralab(&["refine", "--quantity", "poincare", "--levels", "4..9"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("refine.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,h,alpha,value");
    assert_eq!(lines.len(), 7);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("refine.json")).unwrap()).unwrap();
    assert!((report["exponent"].as_f64().unwrap() - 1.0).abs() < 0.1);
}

#[test]
fn numerosity_of_naturals_and_finite_sets() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(stdout(&ultralab(&["numerosity", "naturals", "--level", "3"], dir.path())).trim(), "64");
    assert_eq!(stdout(&ultralab(&["numerosity", "1,2,3", "--level", "2"], dir.path())).trim(), "3");
    assert_eq!(stdout(&ultralab(&["numerosity", "", "--level", "2"], dir.path())).trim(), "0");
}

#[test]
fn spectrum_and_measure_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let harmonic = "potential={kind=\"harmonic\", omega=3.0}";
    let o = ultralab(&["spectrum", "--level", "4", "--set", harmonic, "--set", "eigenvectors=[0]"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("j,mu,st_group,residual\n"));
    assert!(dir.path().join("eigenvector_0.csv").exists());
    let o = ultralab(&["measure", "--level", "4", "--set", harmonic, "--set", "state={kind=\"eigenvector\", index=2}"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dist: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("measurement.json")).unwrap()).unwrap();
    let outcomes = dist.as_array().unwrap();
    let total: f64 = outcomes.iter().map(|o| o["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
    for o in outcomes {
        assert!(o.get("outcome").is_some() && o.get("group_size").is_some());
    }
}

#[test]
fn evolve_writes_state_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let o = ultralab(
        &["evolve", "--level", "5", "--set", "mode=\"schrodinger\"", "--set", "potential={kind=\"harmonic\", omega=2.0}"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let traces = fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    let rows: Vec<Vec<f64>> = traces
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| (r[1] - 1.0).abs() < 1e-10));
    let states = fs::read_to_string(dir.path().join("evolution.csv")).unwrap();
    assert!(states.starts_with("t,node,re,im\n"));
}

#[test]
fn commutator_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = ultralab(&["commutator", "--level", "6", "--set", "state.sigma=0.2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("commutator.json")).unwrap()).unwrap();
    assert!(r["pq_delta_max"].as_f64().unwrap() <= r["pq_delta_bound"].as_f64().unwrap());
    assert!(r["qp_state_error"].as_f64().unwrap() < 0.02);
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ultralab(&["axioms", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(ultralab(&["frobnicate"], dir.path()).status.code(), Some(2));
    let o = ultralab(&["axioms", "--set", "foo=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("foo"));
    assert_eq!(ultralab(&["scalar-eval", "st(3 +"], dir.path()).status.code(), Some(2));
    assert_eq!(ultralab(&["axioms", "--domain", "1,0"], dir.path()).status.code(), Some(2));
    assert_eq!(ultralab(&["numerosity", "1,x"], dir.path()).status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = ultralab(&["spectrum", "--level", "3", "--set", "tolerances.residual=1e-30"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn flags_override_file_and_dump_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.toml");
    fs::write(&file, "p = 2\nlevel = 3\n[potential]\nkind = \"harmonic\"\nomega = 1.5\n").unwrap();
    let cfg = file.to_str().unwrap();
    let o = ultralab(&["axioms", "--config", cfg, "--level", "6", "--p", "4", "--dump-config"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let dump = stdout(&o);
    assert!(dump.contains("level = 6") && dump.contains("p = 4") && dump.contains("omega = 1.5"), "{dump}");
    let canonical = dir.path().join("canonical.toml");
    fs::write(&canonical, &dump).unwrap();
    let again = ultralab(&["axioms", "--config", canonical.to_str().unwrap(), "--dump-config"], dir.path());
    assert_eq!(stdout(&again), dump);
}
