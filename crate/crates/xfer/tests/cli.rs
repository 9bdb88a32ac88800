use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn inputs(scores: &Path) -> Vec<String> {
    let mut v = Vec::new();
    for (flag, path) in [
        ("--languages", fixture("languages.csv")),
        ("--features", fixture("features.csv")),
        ("--values", fixture("values.csv")),
        ("--scores", scores.to_path_buf()),
    ] {
        v.push(flag.to_string());
        v.push(path.to_string_lossy().into_owned());
    }
    v
}

fn xfer(args: &[&str], extra: &[String], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xfer"))
        .args(args)
        .args(extra)
        .arg("-o")
        .arg(out)
        .env_remove("XFER_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn empirical_rank_lists_the_published_top_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = xfer(&["rank", "--task", "pos", "--target", "af", "-k", "3"], &inputs(&fixture("published_scores.csv")), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("en 0.884000, nl 0.876000, de 0.865000\n"));
    let text = std::fs::read_to_string(dir.path().join("rank-pos-af.txt")).unwrap();
    assert!(text.contains("af    sup   af     Afrikaans  0.984000\naf    1     en     English    0.884000\n"));
    assert!(!dir.path().join(".xfer.lock").exists());
}

#[test]
fn empty_scores_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    std::fs::write(&scores, "task,source,target,accuracy\n").unwrap();
    let o = xfer(&["validate"], &inputs(&scores), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no records"), "{}", stderr(&o));
}

#[test]
fn bad_values_report_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    std::fs::write(&scores, "task,source,target,accuracy\nPOS,en,de,0.8\nPOS,en,nl,1.7\n").unwrap();
    let o = xfer(&["validate"], &inputs(&scores), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scores.csv:3"), "{}", stderr(&o));
}

#[test]
fn config_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let scores = fixture("published_scores.csv");
    let out = dir.path().join("out");

    let o = xfer(&["screen"], &inputs(&scores), &out);
    assert_eq!(o.status.code(), Some(2), "missing task: {}", stderr(&o));

    let o = xfer(&["evaluate", "--task", "pos", "--model", "svm"], &inputs(&scores), &out);
    assert_eq!(o.status.code(), Some(2), "unknown model: {}", stderr(&o));

    let o = xfer(&["validate", "--scores", "/nonexistent/scores.csv"], &[], &out);
    assert_eq!(o.status.code(), Some(2), "missing input: {}", stderr(&o));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\ncolour = \"blue\"\n").unwrap();
    let o = xfer(&["validate", "--config", cfg.to_str().unwrap()], &inputs(&scores), &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    let o = xfer(&["rank", "--bogus-flag"], &[], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file_and_the_env_var_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "seed = 3\ntask = \"pos\"\n[inputs]\nlanguages = {:?}\nfeatures = {:?}\nvalues = {:?}\nscores = {:?}\n",
            fixture("languages.csv"),
            fixture("features.csv"),
            fixture("values.csv"),
            fixture("published_scores.csv"),
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_xfer"))
        .args(["screen", "--seed", "9", "-o"])
        .arg(&out)
        .env("XFER_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("screen-pos.csv")).unwrap();
    assert!(csv.contains("# seed: 9\n"));
    assert!(csv.contains("# | task = \"POS\"\n"));
}

#[test]
fn a_held_lock_refuses_the_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(".xfer.lock"), "").unwrap();
    let o = xfer(&["validate"], &inputs(&fixture("published_scores.csv")), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(".xfer.lock"), "{}", stderr(&o));
    assert!(!dir.path().join("validate.csv").exists());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = inputs(&fixture("published_scores.csv"));
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = xfer(&["compare", "--task", "pos", "--trees", "40", "--threads", threads], &args, &out);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(out.join("compare-pos.csv")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "3"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# fold-hash: "));
    assert!(!text.contains("threads"));
}

#[test]
fn replay_detects_a_tampered_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = xfer(&["screen", "--task", "ner"], &inputs(&fixture("published_scores.csv")), &first);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let artifact = first.join("screen-ner.csv");

    let o = xfer(&["replay", artifact.to_str().unwrap()], &[], &dir.path().join("again"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("byte-identical"));

    let text = std::fs::read_to_string(&artifact).unwrap();
    std::fs::write(&artifact, text.replacen("1,", "9,", 1)).unwrap();
    let o = xfer(&["replay", artifact.to_str().unwrap()], &[], &dir.path().join("third"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("differs"), "{}", stderr(&o));
}

#[test]
fn trained_models_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = xfer(&["train", "--task", "nli", "--model", "gbm", "--trees", "20"], &inputs(&fixture("published_scores.csv")), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let model = xfer::model_io::ModelFile::read(&dir.path().join("model-nli.json")).unwrap();
    assert_eq!(model.model.kind(), xfer_core::ModelKind::Gbm);
}
