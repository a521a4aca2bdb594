use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(sub: &str, config: &str, out: &Path) -> Output {
    let cfg = out.join(format!("{sub}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_kerr-array"))
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("KERR_ARRAY_WORKERS", "1")
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_with_all_couplings_zero_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("run", r#"{"mode":"run","params":{"delta":0,"omega":0,"zJ":0,"U":0,"zV":0,"n_max":3}}"#, dir.path());
    let v = stdout_json(&o);
    assert_eq!(v["label"]["kind"], "uniform");
    assert!(v["label"]["delta_n"].as_f64().unwrap() < 1e-12);

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,re_a_A,im_a_A,re_a_B,im_a_B,n_A,n_B,residual"));
    assert_eq!(csv.lines().count(), 6002);
    let meta = read_json(&dir.path().join("trajectory.csv.json"));
    assert_eq!(meta["config"]["retries"], 1);
    assert_eq!(meta["config"]["classifier"]["t_transient"], 200.0);
    assert_eq!(meta["config"]["integrator"]["dt"], 0.01);
}

#[test]
fn circuit_on_cancellation_manifold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"circuit",
        "solve":{"C":1e-12,"L":1e-9,"z":2,"target":{"solve_for":"e_j","C_J":5e-14}},
        "model":{"sign_convention":"flip_to_positive","kappa_hz":1e6,"omega":0.75}}"#;
    let v = stdout_json(&run("circuit", cfg, dir.path()));
    let d = &v["derived"];
    assert!(d["x_minus"].as_f64().unwrap().abs() < 1e-12);
    let ratio = 2.0 * d["v_hz"].as_f64().unwrap() / d["u_hz"].as_f64().unwrap();
    assert_eq!(ratio, 4.0);
    let m = &v["model_params"];
    assert!(m["U"].as_f64().unwrap() > 0.0);
    assert_eq!(m["zV"].as_f64().unwrap() / m["U"].as_f64().unwrap(), 4.0);
    assert!(dir.path().join("circuit.json").exists());
}

#[test]
fn circuit_model_mapping_needs_explicit_sign() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"circuit","circuit":{"C":1e-12,"L":1e-9,"C_J":5e-14,"E_J":1e-23,"z":2},
        "model":{"kappa_hz":1e6}}"#;
    let o = run("circuit", cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "invalid_config");
}

#[test]
fn oracle_without_cross_kerr_factorizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"oracle",
        "lattice":{"n_sites":3,"geometry":"open_chain","n_max":3},
        "bond_params":{"delta":0,"omega":0.4,"J":0,"U":0.5,"V":0},
        "method":"null_space"}"#;
    let v = stdout_json(&run("oracle", cfg, dir.path()));
    assert_eq!(v["reference_site"], 1);
    let mut rdr = csv::Reader::from_path(dir.path().join("g2.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["i", "j", "r", "g2"]);
    let mut off_site = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (i, j): (usize, usize) = (rec[0].parse().unwrap(), rec[1].parse().unwrap());
        if i != j {
            let g2: f64 = rec[3].parse().unwrap();
            assert!((g2 - 1.0).abs() < 1e-6, "g2({i},{j}) = {g2}");
            off_site += 1;
        }
    }
    assert_eq!(off_site, 6);
    let occ = std::fs::read_to_string(dir.path().join("occupations.csv")).unwrap();
    assert_eq!(occ.lines().count(), 4);
    assert!(dir.path().join("g2.csv.json").exists());
}

#[test]
fn oracle_scaled_params_are_divided_by_coordination() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"oracle",
        "lattice":{"n_sites":2,"geometry":"open_chain","n_max":2},
        "params":{"delta":0,"omega":0.3,"zJ":0.4,"U":1,"zV":2},
        "method":"null_space"}"#;
    let v = stdout_json(&run("oracle", cfg, dir.path()));
    assert_eq!(v["bond_params"]["J"], 0.2);
    assert_eq!(v["bond_params"]["V"], 1.0);
}

#[test]
fn oracle_rejects_ambiguous_params() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"oracle","lattice":{"n_sites":2,"geometry":"open_chain","n_max":2}}"#;
    let o = run("oracle", cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_table_sidecar_and_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"sweep",
        "base":{"delta":0,"omega":0.75,"zJ":0,"U":0,"zV":0,"hard_core":true,"n_max":1},
        "axis1":{"param":"zV","min":4,"max":8,"n_points":5}}"#;
    let v = stdout_json(&run("sweep", cfg, dir.path()));
    assert_eq!(v["nodes"], 5);
    let table = std::fs::read_to_string(dir.path().join("phase_table.csv")).unwrap();
    let phases: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(phases, ["uniform", "uniform", "crystal", "crystal", "crystal"]);
    let meta = read_json(&dir.path().join("phase_table.csv.json"));
    assert_eq!(meta["spec"]["axis1"]["n_points"], 5);
    let boundary = read_json(&dir.path().join("boundary.json"));
    let crossing = boundary["boundary"]["delta_n"][0][0][0].as_f64().unwrap();
    assert!(crossing > 5.0 && crossing < 6.0, "{crossing}");
}

#[test]
fn wigner_of_stationary_state_writes_one_grid_per_sublattice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"wigner","params":{"delta":0,"omega":0.5,"zJ":0,"U":0,"zV":0,"n_max":8},
        "grid":{"x_min":-3,"x_max":3,"p_min":-3,"p_max":3,"n_points":31}}"#;
    let v = stdout_json(&run("wigner", cfg, dir.path()));
    assert_eq!(v["files"].as_array().unwrap().len(), 2);
    for name in ["wigner_A.csv", "wigner_B.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().count(), 1 + 31 * 31);
        assert!(dir.path().join(format!("{name}.json")).exists());
    }
}

#[test]
fn mode_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("run", r#"{"mode":"circuit","circuit":{"C":1e-12,"L":1e-9,"C_J":5e-14,"E_J":1e-23,"z":2}}"#, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "invalid_config");
    assert_eq!(e["exit_code"], 2);
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("run", r#"{"mode":"run","params":{"delta":0,"omega":0,"zJ":0,"U":0,"zV":0,"Ω":1}}"#, dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stiff_integration_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"run","params":{"delta":0,"omega":5,"zJ":0,"U":1,"zV":0,"n_max":10},
        "integrator":{"dt":0.5,"max_halvings":0}}"#;
    let o = run("run", cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "stiffness");
}

#[test]
fn unresolved_point_exits_with_inconclusive_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode":"run","params":{"delta":0,"omega":0.75,"zJ":0,"U":0,"zV":5.7,"hard_core":true},"retries":0}"#;
    let o = run("run", cfg, dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["error"], "inconclusive");
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_kerr-array"))
        .args(["circuit", "--config", dir.path().join("nope.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "io");
}
