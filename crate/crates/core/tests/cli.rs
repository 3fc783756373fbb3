use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ure")).args(args).env_remove("URE_BUDGET").output().unwrap()
}

fn ure_env(args: &[&str], budget: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ure")).args(args).env("URE_BUDGET", budget).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn theorem1_example_prints_zero_difference() {
    let o = ure(&["verify", "--mode", "theorem1", "--n", "8", "--npos", "3", "--nbar", "4", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("difference=0 "), "{}", stdout(&o));
}

#[test]
fn incompatible_cutoffs_is_a_usage_error() {
    let o = ure(&["verify", "--mode", "theorem1", "--n", "8", "--nbar", "3", "--k", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--nbar"), "{}", stderr(&o));
    assert!(stderr(&o).contains("not a positive integer"));
}

#[test]
fn zero_policy_reports_a_failed_identity() {
    let o = ure(&[
        "verify", "--mode", "theorem1", "--n", "8", "--npos", "3", "--nbar", "4", "--k", "2", "--skip-policy", "zero",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("difference=-1/56"), "{}", stdout(&o));
}

#[test]
fn theorem2_prints_conditional_means() {
    let o = ure(&["verify", "--mode", "theorem2", "--n", "6", "--npos", "3", "--m", "2", "--nbar", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("E[URE]=2/3 M/N+=2/3 difference=0"), "{out}");
    assert_eq!(out.matches("E[m/n | n]=2/3").count(), 3);
}

#[test]
fn hypergeom_sweeps_every_positive_count() {
    let o = ure(&["verify", "--mode", "hypergeom", "--n", "6", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS: 6 instance(s) checked"));
}

#[test]
fn budget_flag_beats_env_beats_default() {
    let args = ["verify", "--mode", "theorem1", "--n", "12", "--npos", "6", "--nbar", "6", "--k", "2"];
    assert_eq!(ure(&args).status.code(), Some(0));

    let o = ure_env(&args, "100");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget is 100"), "{}", stderr(&o));

    let mut with_flag = args.to_vec();
    with_flag.extend(["--budget", "1000000"]);
    assert_eq!(ure_env(&with_flag, "100").status.code(), Some(0));

    let o = ure_env(&args, "lots");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("URE_BUDGET"));
}

#[test]
fn unknown_flag_and_missing_argument_are_usage_errors() {
    assert_eq!(ure(&["verify", "--mode", "theorem1", "--n", "8", "--bogus"]).status.code(), Some(1));
    assert_eq!(ure(&["verify", "--mode", "theorem2", "--n", "8"]).status.code(), Some(1));
    assert_eq!(ure(&["--help"]).status.code(), Some(0));
}

#[test]
fn eval_with_no_observed_positives_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let preds = write(dir.path(), "p.csv", "user_id,item_id,score\n1,1,0.9\n1,2,0.5\n1,3,0.1\n2,1,0.2\n2,2,0.4\n2,3,0.6\n");
    let rand = write(dir.path(), "r.csv", "user_id,item_id,label\n1,1,0\n1,3,0\n2,2,0\n");
    let o = ure(&["eval", "--scheme", "ure", "--k", "1", "--predictions", &preds, "--dataset", &rand]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("every user was skipped"), "{}", stderr(&o));
}

#[test]
fn eval_reports_each_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let preds = write(dir.path(), "p.csv", "user_id,item_id,score\na,x,0.9\na,y,0.5\na,z,0.1\n");
    let full = write(dir.path(), "f.csv", "user_id,item_id,label\na,x,1\na,y,0\na,z,1\n");
    let rand = write(dir.path(), "r.csv", "user_id,item_id,label\na,x,1\na,z,1\n");
    let out = dir.path().join("report.json").display().to_string();

    let o = ure(&["eval", "--scheme", "full", "--k", "1", "--predictions", &preds, "--dataset", &full, "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("full@1 macro_mean=0.5"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["result"]["macro_mean"], 0.5);
    assert_eq!(json["result"]["user_ids"]["1"], "a");
    assert_eq!(json["config"]["scheme"], "full");

    let o = ure(&["eval", "--scheme", "rand", "--kbar", "1", "--predictions", &preds, "--dataset", &rand]);
    assert!(stdout(&o).contains("rand@1 macro_mean=0.5"), "{}", stderr(&o));
    let o = ure(&["eval", "--scheme", "ure", "--k", "2", "--predictions", &preds, "--dataset", &rand]);
    assert!(stdout(&o).contains("ure@2 macro_mean=0.5"), "{}", stderr(&o));
}

#[test]
fn eval_cutoff_flags_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let preds = write(dir.path(), "p.csv", "user_id,item_id,score\n1,1,0.9\n1,2,0.5\n");
    let rand = write(dir.path(), "r.csv", "user_id,item_id,label\n1,1,1\n");
    let o = ure(&["eval", "--scheme", "rand", "--k", "1", "--predictions", &preds, "--dataset", &rand]);
    assert_eq!(o.status.code(), Some(1));
    let o = ure(&["eval", "--scheme", "ure", "--k", "2", "--predictions", &preds, "--dataset", &rand]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--k"), "{}", stderr(&o));
}

#[test]
fn data_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let preds = write(dir.path(), "p.csv", "user_id,item_id,score\n1,1,0.9\n1,2,inf\n");
    let rand = write(dir.path(), "r.csv", "user_id,item_id,label\n1,1,1\n");
    let o = ure(&["eval", "--scheme", "ure", "--k", "1", "--predictions", &preds, "--dataset", &rand]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p.csv:3"), "{}", stderr(&o));

    let preds = write(dir.path(), "p2.csv", "user_id,item_id,score\n1,1,0.9\n1,2,0.3\n");
    let dup = write(dir.path(), "d.csv", "user_id,item_id,label\n1,1,1\n1,1,0\n");
    let o = ure(&["eval", "--scheme", "ure", "--k", "1", "--predictions", &preds, "--dataset", &dup]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d.csv:3: duplicate"), "{}", stderr(&o));
}

#[test]
fn simulate_then_correlate_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let sim_s = sim.display().to_string();
    let o = ure(&[
        "simulate", "--out", &sim_s, "--users", "25", "--items", "40", "--nbar", "10", "--fidelities", "0.2,0.6",
        "--curvatures", "-1,1", "--seed", "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sim.join("manifest.json")).unwrap()).unwrap();
    let files: Vec<String> = manifest["predictions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| sim.join(f.as_str().unwrap()).display().to_string())
        .collect();
    assert_eq!(files.len(), 4);

    let full = sim.join("full.csv").display().to_string();
    let rand = sim.join("rand.csv").display().to_string();
    let out = dir.path().join("m.csv").display().to_string();
    let mut args = vec!["correlate", "--full", &full, "--rand", &rand, "--matrix", "2,5,10", "--format", "csv", "--out", &out];
    args.push("--predictions");
    args.extend(files.iter().map(String::as_str));
    let o = ure(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("ure_k,full_k,pearson_r\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 10);
    assert!(text.contains("# diagonal_dominant"));
}

#[test]
fn sweep_reports_k_max_per_value() {
    let o = ure(&[
        "sweep", "--mode", "kbar", "--values", "1,2", "--nbar", "10", "--users", "20", "--items", "40", "--fidelities",
        "0.2,0.5", "--curvatures", "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("nbar=10 kbar=1: k_max="), "{out}");
    assert!(out.contains("nbar=10 kbar=2: k_max="), "{out}");

    let o = ure(&["sweep", "--mode", "kbar", "--values", "11", "--nbar", "10", "--users", "5", "--items", "20"]);
    assert_eq!(o.status.code(), Some(1));
}
