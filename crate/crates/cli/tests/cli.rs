use std::f64::consts::LN_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tedlearn::costs::metric_projection;
use tedlearn::experiment::rows_from_csv;
use tedlearn::reference;
use tedlearn::trees::{load_dataset, save_dataset};
use tedlearn::CostTable;
use tedlearn_cli::{execute, experiment_paths, read_distance_csv, EXIT_OK, EXIT_PROPERTY, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["tedlearn"];
    full.extend_from_slice(args);
    let code = execute(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn reference_file(dir: &Path) -> PathBuf {
    let p = dir.join("reference.json");
    save_dataset(&reference::dataset(), &p).unwrap();
    p
}

fn synth_file(dir: &Path, per_class: usize, seed: u64) -> PathBuf {
    let p = dir.join(format!("synth{seed}.json"));
    let (code, _, err) = run(&["synth", "--per-class", &per_class.to_string(), "--seed", &seed.to_string(), "--out", s(&p)]);
    assert_eq!(code, EXIT_OK, "{err}");
    p
}

#[test]
fn dist_on_the_reference_instance() {
    let dir = tempfile::tempdir().unwrap();
    let data = reference_file(dir.path());
    let out = dir.path().join("d.csv");
    let (code, _, err) = run(&["dist", s(&data), "--cost", "default-log2", "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let rows = read_distance_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    for v in rows.iter().flatten() {
        assert!([0.0, LN_2, 2.0 * LN_2].iter().any(|w| (v - w).abs() < 1e-15), "{v}");
    }
    assert_eq!(rows[0][2], 2.0 * LN_2);
}

#[test]
fn dist_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.json");
    fs::write(&one, r#"{"alphabet": ["a"], "records": [{"tree": "a(a)", "label": "x"}]}"#).unwrap();
    let out = dir.path().join("one.csv");
    assert_eq!(run(&["dist", s(&one), "--cost", "simplex", "--out", s(&out)]).0, EXIT_OK);
    assert_eq!(read_distance_csv(&fs::read_to_string(&out).unwrap()).unwrap(), vec![vec![0.0]]);

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["dist", s(&missing), "--out", s(&out)]).0, EXIT_USAGE);
    assert_eq!(run(&["dist", s(&one), "--cost", s(&missing), "--out", s(&out)]).0, EXIT_USAGE);
}

#[test]
fn learn_single_script_reproduces_the_worked_cost() {
    let dir = tempfile::tempdir().unwrap();
    let data = reference_file(dir.path());
    let out = dir.path().join("g1");
    let (code, stdout, err) = run(&["learn", s(&data), "--variant", "G1", "--method", "gesl", "--beta", "0.1", "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("1-NN leave-one-out error"));
    let c = CostTable::load(out.join("cost.txt")).unwrap();
    assert!(c.max_abs_diff(&reference::c1()) < 5e-3);
    let trace = fs::read_to_string(out.join("loss_trace.csv")).unwrap();
    assert!(trace.starts_with("step,loss\n"));
}

#[test]
fn learn_all_scripts_with_metric_gives_a_pseudometric() {
    let dir = tempfile::tempdir().unwrap();
    let data = reference_file(dir.path());
    let out = dir.path().join("g2");
    let (code, _, err) = run(&["learn", s(&data), "--variant", "G2", "--metric", "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let c = CostTable::load(out.join("cost.txt")).unwrap();
    assert!(tedlearn::costs::check_pseudometric(&c).is_pseudometric());
    let (code, _, _) = run(&["check-metric", s(&out.join("cost.txt"))]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn learn_rejects_mismatched_method() {
    let dir = tempfile::tempdir().unwrap();
    let data = reference_file(dir.path());
    let out = dir.path().join("x");
    assert_eq!(run(&["learn", s(&data), "--variant", "L1", "--method", "gesl", "--out", s(&out)]).0, EXIT_USAGE);
    assert_eq!(run(&["learn", s(&data), "--variant", "G9", "--out", s(&out)]).0, EXIT_USAGE);
}

#[test]
fn learn_embedding_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_file(dir.path(), 6, 3);
    let mut texts = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("l2_{k}"));
        let (code, _, err) = run(&["learn", s(&data), "--variant", "L2", "--epochs", "15", "--seed", "5", "--out", s(&out)]);
        assert_eq!(code, EXIT_OK, "{err}");
        let read = |f: &str| fs::read(out.join(f)).unwrap();
        texts.push((read("cost.txt"), read("embedding.txt"), read("loss_trace.csv"), read("summary.txt")));
    }
    assert_eq!(texts[0], texts[1]);
    let e = tedlearn::EmbeddingMatrix::load(dir.path().join("l2_0/embedding.txt")).unwrap();
    assert_eq!(e.dim(), 4);
}

#[test]
fn learn_reports_non_convergence_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_file(dir.path(), 5, 9);
    let out = dir.path().join("l1");
    let (code, stdout, _) = run(&["learn", s(&data), "--variant", "L1", "--epochs", "1", "--out", s(&out)]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("converged: false"), "{stdout}");
}

#[test]
fn check_metric_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p0 = dir.path().join("c0.txt");
    let p1 = dir.path().join("c1.txt");
    let pp = dir.path().join("proj.txt");
    reference::c0().save(&p0).unwrap();
    reference::c1().save(&p1).unwrap();
    metric_projection(&reference::c1()).save(&pp).unwrap();
    assert_eq!(run(&["check-metric", s(&p0)]).0, EXIT_OK);
    let (code, stdout, _) = run(&["check-metric", s(&p1)]);
    assert_eq!(code, EXIT_PROPERTY);
    assert!(stdout.contains("c(-,2) > c(-,1) + c(1,2)"), "{stdout}");
    assert_eq!(run(&["check-metric", s(&pp)]).0, EXIT_OK);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "not a table").unwrap();
    assert_eq!(run(&["check-metric", s(&bad)]).0, EXIT_USAGE);
}

#[test]
fn verify_commands() {
    let (code, stdout, _) = run(&["verify", "dp_overestimation"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("value single.dp = 1.00000000000e0"));
    assert!(stdout.contains("value single.oracle = 6.00000000000e-1"));
    assert_eq!(run(&["verify", "no_such_demo"]).0, EXIT_USAGE);

    let (code, stdout, _) = run(&["verify"]);
    let all_pass = !stdout.contains(": FAIL");
    assert_eq!(code == EXIT_OK, all_pass);
    assert_eq!(stdout.matches("demo ").count(), 6);
}

#[test]
fn experiment_grid() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_file(dir.path(), 10, 1);
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("exp{k}"));
        let (code, _, err) = run(&["experiment", s(&data), "--folds", "2", "--epochs", "10", "--seed", "4", "--out", s(&out)]);
        assert_eq!(code, EXIT_OK, "{err}");
        let (p, e) = experiment_paths(&out, &data);
        assert!(p.file_name().unwrap().to_str().unwrap().ends_with("_experiment_results_pseudo-edit_distance.csv"));
        let texts = (fs::read_to_string(&p).unwrap(), fs::read_to_string(&e).unwrap());
        for t in [&texts.0, &texts.1] {
            let rows = rows_from_csv(t).unwrap();
            assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
            for (_, v) in rows {
                assert!((0.0..=1.0).contains(&v[0]) && (0.0..=1.0).contains(&v[2]));
            }
        }
        csvs.push(texts);
    }
    assert_eq!(csvs[0], csvs[1]);
    let out = dir.path().join("bad");
    assert_eq!(run(&["experiment", s(&data), "--folds", "11", "--out", s(&out)]).0, EXIT_USAGE);
    assert_eq!(run(&["experiment", s(&data), "--variant", "G1,X", "--out", s(&out)]).0, EXIT_USAGE);
}

#[test]
fn simplex_gradcheck_and_synth() {
    let (code, stdout, _) = run(&["simplex", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(stdout.lines().count(), 3);
    let (code, stdout, _) = run(&["gradcheck", "--trials", "10"]);
    assert_eq!(code, EXIT_OK, "{stdout}");

    let dir = tempfile::tempdir().unwrap();
    let p = synth_file(dir.path(), 20, 2);
    let d = load_dataset(&p).unwrap();
    assert_eq!(d.len(), 40);
    let again = synth_file(&dir.path().join("again"), 20, 2);
    assert_eq!(fs::read(&p).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tedlearn");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["simplex", "2"]), Some(0));
    assert_eq!(status(&["verify", "symmetry"]), Some(0));
    assert_eq!(status(&["dist", "/nonexistent/file.json", "--out", "/tmp/x.csv"]), Some(2));
    assert_eq!(status(&["no-such-command"]), Some(2));
    assert_eq!(status(&["--help"]), Some(0));
}
