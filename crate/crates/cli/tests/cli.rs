use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use grandamalgam::{acn_tail, FunctionExpr, GrandExponent, MeasureSpace, WindowMode};
use grandamalgam_cli::config::ExperimentConfig;

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grandamalgam"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

/// Data rows of a CSV file as string cells, header dropped.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn norm_of_singular_function_in_grand_space() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["norm", "--fn", "singular", "--space", "grand"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("value 2.0\n"), "{text}");
    assert!(text.contains("path closed_form"));
    let rec: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("norm-singular-grand.json")).unwrap()).unwrap();
    assert_eq!(rec["schema_version"], 1);
    assert_eq!(rec["value"], 2.0);
}

#[test]
fn zero_function_has_zero_amalgam_norm() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["norm", "--fn", "zero", "--space", "amalgam"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("value 0.0\n"));
}

#[test]
fn classical_norm_of_singular_function_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["norm", "--fn", "singular", "--space", "grand", "--theta", "0"];
    let o = bin(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("value inf\n"));
    let mut strict = args.to_vec();
    strict.push("--require-finite");
    assert_eq!(bin(&strict, dir.path()).status.code(), Some(3));
}

#[test]
fn sequence_and_bound_selectors() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["norm", "--fn", "harmonic", "--space", "sequence"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    // at ε = p − 1 = 1 the weighted sum is the 64th harmonic number
    let h64: f64 = (1..=64).map(|k| 1.0 / k as f64).sum();
    let v: f64 = stdout(&o).lines().next().unwrap()["value ".len()..].parse().unwrap();
    assert!(v >= h64 * (1.0 - 1e-12), "{v} vs {h64}");

    for space in ["small-upper", "dual-upper"] {
        let o = bin(&["norm", "--fn", "one", "--space", space], dir.path());
        assert_eq!(o.status.code(), Some(0), "{space}");
    }
    // functions are not sequences
    assert_eq!(bin(&["norm", "--fn", "one", "--space", "sequence"], dir.path()).status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_tol = write_config(dir.path(), r#"{"suite": {"options": {"norm": {"quadrature": {"rel_tol": -1e-9}}}}}"#);
    assert_eq!(bin(&["verify", "--config", &bad_tol], dir.path()).status.code(), Some(2));
    let version = write_config(dir.path(), r#"{"schema_version": 7}"#);
    assert_eq!(bin(&["verify", "--config", &version], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["verify", "--claims", "T99"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["norm", "--fn", "nope", "--space", "grand"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["norm", "--fn", "one", "--space", "grand", "--p", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["--jobs", "0", "verify"], dir.path()).status.code(), Some(2));
    // nothing was written for rejected configs
    assert!(!dir.path().join("verify.json").exists());
}

#[test]
fn verify_restricted_to_one_claim_family() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify", "--claims", "T10"], dir.path());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    let reports = json["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["claim"] == "T10.acn"));
    let failed = json["failed"].as_u64().unwrap();
    assert_eq!(o.status.code(), Some(if failed > 0 { 1 } else { 0 }));

    let rows = csv_rows(&dir.path().join("verify.csv"));
    assert_eq!(rows.len(), reports.len());
    assert!(rows.iter().all(|r| r.len() == 5 && r[0] == "1" && r[1] == "T10.acn"));
}

#[test]
fn sweep_over_eps_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["sweep", "--axis", "eps", "--fn", "singular"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("sweep-eps-singular.csv"));
    assert_eq!(rows.len(), ExperimentConfig::default().sweep.eps.len());
    for r in rows {
        let eps: f64 = r[1].parse().unwrap();
        let phi: f64 = r[2].parse().unwrap();
        assert!(r[3].is_empty());
        let want = 2f64.powf(1.0 / (2.0 - eps));
        assert!((phi - want).abs() <= 1e-6, "φ({eps}) = {phi}, want {want}");
    }
}

#[test]
fn sweep_over_a_matches_tail_function() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["sweep", "--axis", "a", "--fn", "singular"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("sweep-a-singular.csv"));
    let cfg = ExperimentConfig::default();
    let g = GrandExponent::new(2.0, 1.0).unwrap();
    let want = acn_tail(
        &FunctionExpr::power(1.0, 0.0, -0.5),
        &g,
        &g,
        &MeasureSpace::unit(),
        &cfg.sweep.a,
        WindowMode::Periodic,
        &cfg.suite.options,
    )
    .unwrap();
    assert_eq!(rows.len(), want.len());
    for (r, (a, t)) in rows.iter().zip(want) {
        assert_eq!(r[1].parse::<f64>().unwrap(), a);
        assert_eq!(r[2].parse::<f64>().unwrap(), t.as_f64());
    }
}

#[test]
fn empty_sweep_grid_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sweep": {"p": []}}"#);
    let o = bin(&["sweep", "--axis", "p", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("sweep-p-singular.csv")).unwrap();
    assert_eq!(text, "schema_version,p,grand,grand_error,amalgam,amalgam_error\n");
}

#[test]
fn sweep_rows_record_errors_and_continue() {
    let dir = tempfile::tempdir().unwrap();
    // ε = 1.5 lies outside (0, p − 1] for p = 2
    let cfg = write_config(dir.path(), r#"{"sweep": {"eps": [0.5, 1.5, 0.25]}}"#);
    let o = bin(&["sweep", "--axis", "eps", "--fn", "one", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("sweep-eps-one.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[0][3].is_empty() && rows[2][3].is_empty());
    assert!(rows[1][2].is_empty() && !rows[1][3].is_empty());
}

#[test]
fn sweep_outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(bin(&["sweep", "--axis", "p", "--fn", "ramp"], d.path()).status.code(), Some(0));
    }
    for name in ["sweep-p-ramp.csv", "sweep-p-ramp.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn export_curve_writes_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["export-curve", "--fn", "left-half"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("curve-left-half.csv"));
    assert_eq!(rows.len(), ExperimentConfig::default().suite.options.x_points);
    assert_eq!(rows[0][1], "0.0");
    assert!(rows.iter().all(|r| r.len() == 4));

    let o = bin(&["export-curve", "--fn", "singular", "--require-finite"], dir.path());
    assert_eq!(o.status.code(), Some(0), "grand control function of t^(-1/2) is finite");
}
