//! Black-box checks of the binary: exit codes, error messages, environment
//! handling, and the artifact listing on stdout.

use std::path::Path;
use std::process::{Command, Output};

fn hclbp(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hclbp"));
    cmd.args(args);
    cmd
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth_corpus(dir: &Path, per_class: usize) {
    let out = hclbp(&[
        "synth",
        dir.to_str().unwrap(),
        "--width",
        "32",
        "--height",
        "32",
        "--per-class",
        &per_class.to_string(),
        "--seed",
        "3",
    ])
    .output()
    .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr_of(&out));
}

#[test]
fn missing_input_exits_2_and_names_the_path() {
    let out = hclbp(&["extract", "/no/such/path"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = stderr_of(&out);
    assert!(stderr.contains("/no/such/path"), "stderr: {stderr}");
    assert!(stderr.contains("does not exist"), "stderr: {stderr}");
}

#[test]
fn unparseable_flag_values_exit_2() {
    for args in [
        &["classify", ".", "--metric", "manhattan"][..],
        &["extract", ".", "--schedule", "8;1"][..],
        &["extract", ".", "--blocks", "some"][..],
        &["noise-bench", ".", "--ratios", "abc"][..],
    ] {
        let out = hclbp(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "args {args:?}: {}", stderr_of(&out));
    }
}

#[test]
fn opcount_requires_exactly_one_image_source() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let base = ["opcount", "--out-dir", out_dir.to_str().unwrap()];

    let neither = hclbp(&base).output().unwrap();
    assert_eq!(neither.status.code(), Some(2), "{}", stderr_of(&neither));

    let zero_size = hclbp(&[&base[..], &["--size", "0"]].concat()).output().unwrap();
    assert_eq!(zero_size.status.code(), Some(2), "{}", stderr_of(&zero_size));

    let ok = hclbp(&[&base[..], &["--size", "24", "--schedule", "8,1"]].concat())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", stderr_of(&ok));
}

#[test]
fn too_many_folds_for_a_class_is_reported_clearly() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus, 3);
    let out = hclbp(&[
        "classify",
        corpus.to_str().unwrap(),
        "--schedule",
        "8,1",
        "--folds",
        "10",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ])
    .output()
    .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = stderr_of(&out);
    assert!(stderr.contains("fewer than 10 folds"), "stderr: {stderr}");
}

#[test]
fn out_dir_env_var_is_used_when_no_flag_is_given() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus, 2);
    let image = corpus.join("checker").join("checker_000.png");
    assert!(image.exists());

    let out_dir = tmp.path().join("from-env");
    let out = hclbp(&["extract", image.to_str().unwrap(), "--schedule", "8,1"])
        .env("HCLBP_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(out_dir.join("descriptors.json").exists());

    // An explicit flag wins over the environment.
    let flagged_dir = tmp.path().join("from-flag");
    let flagged = hclbp(&[
        "extract",
        image.to_str().unwrap(),
        "--schedule",
        "8,1",
        "--out-dir",
        flagged_dir.to_str().unwrap(),
    ])
    .env("HCLBP_OUT_DIR", tmp.path().join("ignored"))
    .output()
    .unwrap();
    assert!(flagged.status.success(), "{}", stderr_of(&flagged));
    assert!(flagged_dir.join("descriptors.json").exists());
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn successful_runs_list_their_artifacts_on_stdout() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus, 4);
    let out_dir = tmp.path().join("out");
    let out = hclbp(&[
        "classify",
        corpus.to_str().unwrap(),
        "--schedule",
        "8,1",
        "--folds",
        "2",
        "--format",
        "csv",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ])
    .output()
    .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["classification.json", "classification.csv"] {
        let path = out_dir.join(name);
        assert!(path.exists(), "missing artifact {name}");
        assert!(
            stdout.lines().any(|l| l.trim() == path.to_str().unwrap()),
            "stdout does not list {name}: {stdout}"
        );
    }
}

#[test]
fn help_and_subcommand_help_exit_0() {
    for args in [&["--help"][..], &["classify", "--help"][..], &["synth", "--help"][..]] {
        let out = hclbp(args).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "args {args:?}");
        assert!(!out.stdout.is_empty());
    }
}
