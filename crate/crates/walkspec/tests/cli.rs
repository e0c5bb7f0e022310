use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn walkspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkspec")).args(args).env_remove("WALKSPEC_SEED").output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let o = walkspec(&a);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).expect("json")
}

fn column(v: &Value, name: &str) -> Vec<Option<f64>> {
    v["rows"].as_array().unwrap().iter().map(|r| r[name].as_f64()).collect()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    // model strings like free:2,1 are quoted, so split on the quoted field first
    let rows = lines
        .map(|l| {
            let (model, rest) = match l.strip_prefix('"') {
                Some(s) => {
                    let (m, r) = s.split_once("\",").unwrap();
                    (m.to_string(), r)
                }
                None => {
                    let (m, r) = l.split_once(',').unwrap();
                    (m.to_string(), r)
                }
            };
            std::iter::once(model).chain(rest.split(',').map(String::from)).collect()
        })
        .collect();
    (header, rows)
}

fn col(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn rho_methods_agree_on_the_tree() {
    let v = json(&["rho", "--model", "tree:d=4", "--lambda", "1", "--method", "all"]);
    let rho = column(&v, "rho");
    assert_eq!(rho.len(), 3);
    for a in &rho {
        for b in &rho {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-3);
        }
    }
    assert_eq!(v["model"], "tree:d=4");
}

#[test]
fn rho_near_critical_is_one() {
    let v = json(&["rho", "--model", "free:2,1", "--lambda", "1.4142135", "--method", "closed"]);
    assert!((column(&v, "rho")[0].unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn rho_beyond_critical_fails() {
    let o = walkspec(&["rho", "--model", "free:2,1", "--lambda", "2"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("hypothesis violated"), "{}", stderr(&o));
}

#[test]
fn bad_model_string() {
    let o = walkspec(&["rho", "--model", "cube:3", "--lambda", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("invalid model"));
}

#[test]
fn speed_reports_a_small_z() {
    let v = json(&["speed", "--model", "free:2,1", "--lambda", "1", "--steps", "20000", "--replicas", "100"]);
    assert!(column(&v, "z_score")[0].unwrap().abs() < 3.0);
    assert_eq!(v["rng_id"], "chacha8");
    assert_eq!(v["seed"], "1");
}

#[test]
fn speed_at_lambda_c_is_sublinear() {
    // closed form is 0; |X_n| grows like sqrt(n) there, so the mean is small but positive
    let v = json(&[
        "speed",
        "--model",
        "free:2,1",
        "--lambda",
        "1.4142135623730951",
        "--steps",
        "40000",
        "--replicas",
        "50",
    ]);
    assert_eq!(column(&v, "speed_closed")[0], Some(0.0));
    let mc = column(&v, "speed_mc")[0].unwrap();
    assert!(mc > 0.0 && mc < 0.01, "{mc}");
}

#[test]
fn speed_rejects_trees() {
    let o = walkspec(&["speed", "--model", "tree:d=4", "--lambda", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("hypothesis violated"));
}

#[test]
fn seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_walkspec"))
        .args(["speed", "--model", "free:2,1", "--lambda", "1", "--steps", "100", "--replicas", "2", "--json"])
        .env("WALKSPEC_SEED", "99")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], "99");
}

#[test]
fn tree_sweep_is_monotone_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t4.csv");
    let out_s = out.to_str().unwrap();
    let args =
        ["sweep", "--model", "tree:d=4", "--lambda-lo", "0.05", "--lambda-hi", "3", "--points", "60", "--out", out_s];
    assert!(walkspec(&args).status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(walkspec(&args).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());

    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# schema=1\n"));
    for key in ["# tool=walkspec ", "# command=", "# model=tree:d=4", "# seed=", "# rng_id=chacha8"] {
        assert!(text.contains(key), "missing {key}");
    }
    let (header, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 60);
    let rho = col(&header, &rows, "rho_closed");
    assert!(rho.windows(2).all(|w| w[1] > w[0]));
    assert!((rho[59] - 1.0).abs() < 1e-12);
}

#[test]
fn free_sweep_columns() {
    let v = json(&["sweep", "--model", "free:2,1", "--points", "25", "--nmax", "300"]);
    let rho = column(&v, "rho_closed");
    let speed = column(&v, "speed_closed");
    assert!(rho.windows(2).all(|w| w[1].unwrap() > w[0].unwrap()));
    assert!(speed.windows(2).all(|w| w[1].unwrap() < w[0].unwrap()));
    for r in v["rows"].as_array().unwrap() {
        assert!(r["rho_dp"].is_number());
        assert!(r["wall_time_ms"].is_null());
    }
}

#[test]
fn gnuplot_script_alongside() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = walkspec(&[
        "sweep",
        "--model",
        "free:2,1",
        "--points",
        "5",
        "--out",
        out.to_str().unwrap(),
        "--gnuplot-script",
    ]);
    assert!(o.status.success());
    let gp = std::fs::read_to_string(dir.path().join("sweep.gp")).unwrap();
    assert!(gp.contains("'sweep.csv' using 1:3"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "model = free:2,1\nlambda = 0.5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&["rho", "--config", c, "--method", "closed"]);
    assert_eq!(v["model"], "free:2,1");
    assert_eq!(v["lambda"], "0.5");
    let v = json(&["rho", "--config", c, "--lambda", "1", "--method", "closed"]);
    assert_eq!(v["lambda"], "1");
}

#[test]
fn dp_table() {
    let v = json(&["dp", "--model", "tree:d=3", "--lambda", "1", "--nmax", "4"]);
    let p = column(&v, "p");
    assert_eq!(p.len(), 5);
    assert_eq!(p[0], Some(1.0));
    assert_eq!(p[1], Some(0.0));
    assert!((p[2].unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn simulate_summary() {
    let v = json(&["simulate", "--model", "free:2,1", "--lambda", "1", "--steps", "5000", "--replicas", "8"]);
    let rows = v["rows"].as_array().unwrap();
    let get = |q: &str| rows.iter().find(|r| r["quantity"] == q).unwrap()["value"].as_f64().unwrap();
    let total = get("origin_fraction") + get("type1_fraction") + get("type2_fraction");
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(get("type2_geometric_p"), 0.0);
}

#[test]
fn verify_oracle_and_closedform_pass() {
    for suite in ["oracle", "closedform"] {
        let o = walkspec(&["verify", "--suite", suite]);
        assert!(o.status.success(), "{}", stdout(&o));
        assert!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count() >= 2);
    }
}

#[test]
fn verify_fast_finishes_quickly() {
    let start = std::time::Instant::now();
    let o = walkspec(&["verify", "--suite", "all", "--fast"]);
    assert!(start.elapsed().as_secs() < 300);
    let lines = stdout(&o);
    assert_eq!(lines.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 18);
    // exit status mirrors the report
    assert_eq!(o.status.success(), !lines.contains("FAIL"));
}
