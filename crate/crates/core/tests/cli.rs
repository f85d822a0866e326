use std::path::Path;
use std::process::{Command, Output};

fn oprenewal(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oprenewal"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn renewal_subcommand_writes_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = oprenewal(&["renewal", "--beta", "2.5", "--horizon", "2000", "--order", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fitted_exponent"));
    let csv = std::fs::read_to_string(dir.path().join("out/renewal.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,limit_distance,residual,prediction"));
    assert_eq!(csv.lines().count(), 2002);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/renewal.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["renewal"]["beta"], 2.5);
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert!(json["summary"]["fitted_exponent"].is_f64());
}

#[test]
fn tower_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["tower", "--beta", "1.3", "--horizon", "200", "--mc-samples", "4000", "--seed", "9", "--out", out]
    };
    assert!(oprenewal(&args("a"), dir.path()).status.success());
    assert!(oprenewal(&args("b"), dir.path()).status.success());
    let a = std::fs::read(dir.path().join("a/tower.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/tower.csv")).unwrap();
    assert_eq!(a, b);
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "n,cor,leading_prediction,ratio,monte_carlo,monte_carlo_se");
    // a different seed changes the simulated columns only
    let mut other = args("c");
    other[8] = "10";
    assert!(oprenewal(&other, dir.path()).status.success());
    assert_ne!(a, std::fs::read(dir.path().join("c/tower.csv")).unwrap());
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[run]\nmodule = \"lsv\"\nid = \"x\"\n[lsv]\nhorizon = 100\n").unwrap();
    let o = oprenewal(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));

    std::fs::write(
        dir.path().join("extra.toml"),
        "[run]\nmodule = \"conv\"\nid = \"x\"\n[conv]\nalpha = 1.5\nbeta = 2.0\nhorizon = 100\nwidth = 3\n",
    )
    .unwrap();
    let o = oprenewal(&["run", "--config", "extra.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("width"), "{}", stderr(&o));
}

#[test]
fn configs_run_in_parallel_and_override_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("conv.toml"),
        "[run]\nmodule = \"conv\"\nid = \"conv-a\"\nout = \"from-config\"\n[conv]\nalpha = 0.7\nbeta = 0.8\nhorizon = 1000\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("tower.toml"),
        "[run]\nmodule = \"tower\"\nid = \"tower-a\"\nseed = 3\n[tower]\nreturns = [[1, 0.5], [2, 0.25], [3, 0.25]]\nhorizon = 50\nmc_samples = 1000\n",
    )
    .unwrap();
    let o = oprenewal(
        &["--jobs", "2", "--out", "flags", "run", "--config", "conv.toml", "tower.toml"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("from-config/conv-a.csv").exists());
    assert!(dir.path().join("flags/tower-a.csv").exists());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("flags/tower-a.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["run"]["seed"], 3);
}

#[test]
fn experiment_catalog_is_runnable_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let list = oprenewal(&["experiment"], dir.path());
    assert!(list.status.success());
    assert_eq!(stdout(&list).lines().count(), 13);
    let o = oprenewal(&["experiment", "aperiodicity"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(dir.path().join("out/aperiodicity.csv").exists());
    let o = oprenewal(&["experiment", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("renewal-identity"));
}
