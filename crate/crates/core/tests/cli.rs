use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refkernel::data::load_features_csv;
use refkernel::persist::ModelFile;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_refkernel"));
    cmd.env_remove("REFKERNEL_SEED");
    cmd
}

fn iris() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

/// A small Iris config: base SVDD, one split, one repeat, a two-point grid.
fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("iris.cfg");
    let text = format!(
        "# quick run\ndatasets = {}\nmethods = svdd\ncases = base\npaths = kernel\nsplits = 1\nrepeats = 1\ngrid_s = 1, 10\ngrid_c = 0.1, 0.2\n",
        iris().display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn experiment(dir: &Path, out: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = write_config(dir);
    let out = dir.join(out);
    let o = run(bin()
        .arg("run-experiment")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra));
    (o, out)
}

#[test]
fn run_experiment_writes_one_row_per_task() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = experiment(dir.path(), "a", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "task,method,path,case,gmean_mean,gmean_std,rank_mean,runs,failures");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("iris-Iris-setosa,svdd,kernel,base,"));
    assert!(out.join("results.md").exists() && out.join("runs.json").exists());
}

#[test]
fn reruns_are_byte_identical_and_seed_matters() {
    let dir = tempfile::tempdir().unwrap();
    let (a, out_a) = experiment(dir.path(), "a", &[]);
    let (b, out_b) = experiment(dir.path(), "b", &[]);
    assert!(a.status.success() && b.status.success());
    let read = |p: &Path| std::fs::read(p.join("results.csv")).unwrap();
    assert_eq!(read(&out_a), read(&out_b));

    let (c, out_c) = experiment(dir.path(), "c", &["--seed", "17"]);
    assert!(c.status.success());
    let runs = |p: &Path| std::fs::read_to_string(p.join("runs.json")).unwrap();
    assert_ne!(runs(&out_a), runs(&out_c));

    let mut cmd = bin();
    cmd.env("REFKERNEL_SEED", "17");
    let cfg = write_config(dir.path());
    let out_d = dir.path().join("d");
    let d = run(cmd.arg("run-experiment").arg("--config").arg(&cfg).arg("--out").arg(&out_d));
    assert!(d.status.success());
    assert_eq!(runs(&out_c), runs(&out_d));
}

#[test]
fn set_overrides_config_entries() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = experiment(dir.path(), "a", &["--set", "cases=base,2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.contains(",kernel,2,"));
}

fn fit(dir: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let model = dir.join("model.json");
    let o = run(bin()
        .arg("fit")
        .arg("--train")
        .arg(iris())
        .args(["--label-column", "class", "--target", "Iris-versicolor"])
        .arg("--model")
        .arg(&model)
        .args(extra));
    (o, model)
}

#[test]
fn fit_then_score_matches_in_process_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let (o, model) = fit(dir.path(), &["--method", "ocsvm", "--case", "5", "--path", "mapping", "--trade-off", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let s = run(bin().arg("score").arg("--model").arg(&model).arg("--input").arg(iris()));
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let stdout = String::from_utf8(s.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("index,score,is_target"));

    let file = ModelFile::load(&model).unwrap();
    let (_, raw) = load_features_csv(iris(), Some("class")).unwrap();
    let expected = file.decide_raw(&raw).unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 150);
    for (i, (row, (score, target))) in rows.iter().zip(&expected).enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], i.to_string());
        let printed: f64 = fields[1].parse().unwrap();
        assert!((printed - score).abs() <= 1e-9 * (1.0 + score.abs()));
        assert_eq!(fields[2], target.to_string());
    }
    // Most versicolor rows (50..100) land inside.
    let inside = expected[50..100].iter().filter(|d| d.1).count();
    assert!(inside >= 30, "{inside}");
}

#[test]
fn score_rejects_wrong_feature_count() {
    let dir = tempfile::tempdir().unwrap();
    let (o, model) = fit(dir.path(), &[]);
    assert!(o.status.success());
    let input = dir.path().join("three.csv");
    std::fs::write(&input, "a,b,c\n1,2,3\n4,5,6\n").unwrap();
    let s = run(bin().arg("score").arg("--model").arg(&model).arg("--input").arg(&input));
    assert_eq!(s.status.code(), Some(5));
}

#[test]
fn case_five_without_negatives_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("targets.csv");
    std::fs::write(&train, "a,b\n0,1\n1,0\n2,2\n0.5,1.5\n").unwrap();
    let o = run(bin().arg("fit").arg("--train").arg(&train).args(["--case", "5"]).arg("--out").arg(dir.path()));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_dataset_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(bin()
        .arg("run-experiment")
        .args(["--set", "datasets=/nonexistent/nothing.csv"])
        .arg("--out")
        .arg(&out));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "splits = many\n").unwrap();
    let o = run(bin().arg("run-experiment").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(2));
    let o = run(bin().arg("run-experiment").args(["--set", "no_such_key=1"]));
    assert_eq!(o.status.code(), Some(2));
    let o = run(bin().arg("fit").arg("--train").arg(iris()).args(["--target", "x"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn version_mismatch_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let (o, model) = fit(dir.path(), &[]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&model).unwrap().replacen("\"format_version\": 1", "\"format_version\": 99", 1);
    std::fs::write(&model, text).unwrap();
    let s = run(bin().arg("score").arg("--model").arg(&model).arg("--input").arg(iris()));
    assert_eq!(s.status.code(), Some(4));
}

#[test]
fn self_check_passes() {
    let o = run(bin().args(["self-check", "--instances", "40"]));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 6);
    assert!(stdout.contains("self-check passed"));
}
