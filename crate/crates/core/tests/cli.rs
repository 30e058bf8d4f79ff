use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn graphlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_E1: &str = r#"
experiment = "E1"
seed = 11
trials = 8

[sequence]
kind = "mix13"
n = 3000
q = -0.2
"#;

#[test]
fn experiment_writes_identical_csv_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e1.toml", SMALL_E1);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = graphlab(&["experiment", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ca = fs::read(a.with_extension("csv")).unwrap();
    let cb = fs::read(b.with_extension("csv")).unwrap();
    assert_eq!(ca, cb);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 8);
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e1.toml", SMALL_E1);
    let a = graphlab(&["experiment", "--config", &cfg, "--trials", "4"]);
    let b = graphlab(&["experiment", "--config", &cfg, "--trials", "4", "--seed", "12"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 5);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "bad.toml", &SMALL_E1.replace("trials = 8", "trials = 8\nbogus = 1"));
    assert_eq!(graphlab(&["experiment", "--config", &unknown]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        graphlab(&["experiment", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let supercritical = write_config(dir.path(), "super.toml", &SMALL_E1.replace("q = -0.2", "q = 0.2"));
    let o = graphlab(&["experiment", "--config", &supercritical]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not negative"));
    // an unreachable target fraction with --assert
    let strict = write_config(
        dir.path(),
        "strict.toml",
        &format!("{SMALL_E1}\n[method]\nconstant = 1e-9\n").replace("\"E1\"", "\"E3\""),
    );
    let o = graphlab(&["experiment", "--config", &strict, "--assert"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn theory_reports_functionals() {
    let o = graphlab(&["theory", "--literal", "1,1,1,1,1,1,1,3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["q"].as_f64().unwrap() + 0.4).abs() < 1e-12);
    assert!((v["theta0"].as_f64().unwrap() - 0.4f64.atanh()).abs() < 1e-9);
}

#[test]
fn walk_and_llt_subcommands() {
    let o = graphlab(&["walk", "--step=-1:0.6,1:0.4", "--horizon", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let row3: Vec<&str> = text.lines().nth(3).unwrap().split(',').collect();
    assert_eq!(row3[0], "3");
    assert!((row3[1].parse::<f64>().unwrap() - 0.144).abs() < 1e-12);

    let o = graphlab(&["llt", "--dist=-1:0.5,1:0.5", "--n", "50,100"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 3);
    // not mean zero
    assert_eq!(graphlab(&["llt", "--dist=-1:0.6,1:0.4"]).status.code(), Some(3));
}

#[test]
fn samplers_emit_edge_lists() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    let o = graphlab(&["um", "sample", "--literal", "1,1,2,2,3,3", "--sampler", "switching", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let g = graphlab::MultiGraph::read_edge_list(fs::read_to_string(&out).unwrap().as_bytes(), Some(6)).unwrap();
    assert!(g.is_simple());
    let mut deg = g.degrees();
    deg.sort();
    assert_eq!(deg, vec![1, 1, 2, 2, 3, 3]);

    let o = graphlab(&["cm", "explore", "--literal", "1,1,1,1,1,1,1,3", "--seed", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("t,x,m,q,r,event,vertex"));
}
