//! End-to-end tests of the `beamsim` binary: every subcommand, the
//! determinism guarantees, and the error contracts that must fail with a
//! nonzero exit code and a usable diagnostic.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn beamsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_fails_mentioning(out: &Output, needle: &str) {
    assert!(
        !out.status.success(),
        "expected failure, got success\nstdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains(needle),
        "stderr must mention {needle:?}, got: {stderr}"
    );
}

fn read(path: &PathBuf) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

// 1. `gen` writes the dataset, the four codebook exports, and a manifest,
//    and reruns with the same seed are byte-identical across directories.
#[test]
fn gen_is_deterministic_across_directories() {
    let dir = tempfile::tempdir().expect("tempdir");
    for out in ["a", "b"] {
        let run = beamsim(
            &["--out", out, "--seed", "7", "gen", "--scenario", "s1", "--n", "40"],
            dir.path(),
        );
        assert_ok(&run);
    }
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let dataset = read(&a.join("dataset_s1.csv"));
    assert_eq!(
        dataset,
        read(&b.join("dataset_s1.csv")),
        "same seed must reproduce the dataset byte for byte"
    );
    assert_eq!(
        dataset.lines().count(),
        41,
        "header plus one row per sample"
    );
    assert_eq!(
        read(&a.join("manifest_gen.json")),
        read(&b.join("manifest_gen.json")),
        "manifests carry no timestamps or paths, so they must match too"
    );
    for name in [
        "codebook_tx_children.json",
        "codebook_tx_parents.json",
        "codebook_rx_children.json",
        "codebook_rx_parents.json",
    ] {
        assert!(a.join(name).is_file(), "missing {name}");
    }
    let manifest = read(&a.join("manifest_gen.json"));
    assert!(
        manifest.contains("\"dataset_s1.csv\""),
        "manifest must hash the dataset"
    );
}

// 2. gen → train → eval runs end to end; history length tracks --epochs,
//    the model file is tagged, the KPI CSV covers every method, and a rerun
//    of eval reproduces its outputs exactly.
#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().expect("tempdir");
    assert_ok(&beamsim(
        &["--out", "data", "--seed", "3", "gen", "--n", "80"],
        dir.path(),
    ));
    assert_ok(&beamsim(
        &[
            "--out",
            "fit",
            "--seed",
            "3",
            "train",
            "--data",
            "data/dataset_s1.csv",
            "--epochs",
            "2",
        ],
        dir.path(),
    ));
    let fit = dir.path().join("fit");
    let history = read(&fit.join("history.csv"));
    assert_eq!(history.lines().count(), 3, "header plus one row per epoch");
    assert!(history.starts_with("epoch,train_loss,val_loss,val_top1\n"));
    assert!(
        read(&fit.join("model.json")).contains("\"kind\": \"linear-softmax\""),
        "model files are tagged by architecture"
    );

    for out in ["kpi1", "kpi2"] {
        assert_ok(&beamsim(
            &[
                "--out",
                out,
                "--seed",
                "3",
                "eval",
                "--model",
                "fit/model.json",
                "--data",
                "data/dataset_s1.csv",
            ],
            dir.path(),
        ));
    }
    let kpi = read(&dir.path().join("kpi1/kpi.csv"));
    assert!(kpi.starts_with("method,top_k,accuracy,"));
    for method in ["ebs,", "hbs,", "ml,"] {
        assert!(kpi.contains(&format!("\n{method}")), "missing {method} row");
    }
    assert_eq!(
        kpi.lines().count(),
        1 + 2 + 3,
        "header, two baselines, and one row per top-k value"
    );
    assert_eq!(
        kpi,
        read(&dir.path().join("kpi2/kpi.csv")),
        "evaluation must be reproducible"
    );
    assert!(dir.path().join("kpi1/correlation.csv").is_file());
    assert!(dir.path().join("kpi1/report.json").is_file());
}

// 3. A corrupted dataset header fails `train` with a diagnostic naming the
//    unexpected column.
#[test]
fn corrupt_header_names_the_bad_column() {
    let dir = tempfile::tempdir().expect("tempdir");
    assert_ok(&beamsim(
        &["--out", "data", "--seed", "9", "gen", "--n", "40"],
        dir.path(),
    ));
    let path = dir.path().join("data/dataset_s1.csv");
    let corrupted = read(&path).replacen("seed,scenario", "sheed,scenario", 1);
    std::fs::write(&path, corrupted).expect("rewrite dataset");
    let run = beamsim(
        &["train", "--data", "data/dataset_s1.csv"],
        dir.path(),
    );
    assert_fails_mentioning(&run, "sheed");
}

// 4. Evaluating a model against data from a different codebook setup fails
//    with a fingerprint diagnostic.
#[test]
fn fingerprint_mismatch_fails_eval() {
    let dir = tempfile::tempdir().expect("tempdir");
    assert_ok(&beamsim(
        &["--out", "data", "--seed", "5", "gen", "--n", "60"],
        dir.path(),
    ));
    assert_ok(&beamsim(
        &[
            "--out",
            "fit",
            "--seed",
            "5",
            "train",
            "--data",
            "data/dataset_s1.csv",
            "--epochs",
            "1",
        ],
        dir.path(),
    ));
    // Same data and model, but a config describing a narrower transmit grid:
    // the dataset read is stamped with the new fingerprint, which can no
    // longer match the model's.
    let cfg = dir.path().join("narrow.cfg");
    std::fs::write(&cfg, "tx_az_beams = 4\nn_samples = 60\n").expect("write config");
    let run = beamsim(
        &[
            "--config",
            "narrow.cfg",
            "eval",
            "--model",
            "fit/model.json",
            "--data",
            "data/dataset_s1.csv",
        ],
        dir.path(),
    );
    assert_fails_mentioning(&run, "fingerprint");
}

// 5. Unknown config keys are fatal and named.
#[test]
fn unknown_config_key_fails() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "beam_width = 11\n").expect("write config");
    let run = beamsim(&["--config", "bad.cfg", "gen", "--n", "10"], dir.path());
    assert_fails_mentioning(&run, "beam_width");
}

// 6. The built-in complexity table carries the computed row and the four
//    literature rows with their published figures.
#[test]
fn complexity_reference_table_renders() {
    let dir = tempfile::tempdir().expect("tempdir");
    let run = beamsim(&["complexity"], dir.path());
    assert_ok(&run);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("model,source,trainable_params,model_size_mbit,flops"));
    assert!(stdout.contains("linear-softmax,computed,1088,0.04,1088"));
    assert!(stdout.contains("fc-nn,literature,17728,0.5,17728"));
    assert_eq!(
        read(&dir.path().join("out/complexity.csv")).matches("literature").count(),
        4,
        "all four published baselines are rendered"
    );
}

// 7. A layer-spec file yields one computed row named after the file; an
//    empty spec is an error.
#[test]
fn complexity_spec_file_is_analyzed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec = dir.path().join("proposed.json");
    std::fs::write(
        &spec,
        r#"[{"fc": {"n_inputs": 16, "n_outputs": 64}}]"#,
    )
    .expect("write spec");
    let run = beamsim(&["complexity", "--spec", "proposed.json"], dir.path());
    assert_ok(&run);
    assert!(
        String::from_utf8_lossy(&run.stdout).contains("proposed,computed,1088,0.04,1088"),
        "one affine layer mapping 16 parents to 64 children costs 1088 everywhere"
    );

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").expect("write spec");
    let run = beamsim(&["complexity", "--spec", "empty.json"], dir.path());
    assert_fails_mentioning(&run, "no layers");
}

// 8. Suite mode regenerates every listed scenario and reports the ordering
//    verdict; passing --model alongside is refused.
#[test]
fn eval_suite_mode_writes_per_scenario_reports() {
    let dir = tempfile::tempdir().expect("tempdir");
    let run = beamsim(
        &[
            "--seed",
            "13",
            "eval",
            "--scenario",
            "s1,s2,s3",
            "--n",
            "45",
            "--epochs",
            "2",
        ],
        dir.path(),
    );
    assert_ok(&run);
    for name in ["kpi_s1.csv", "kpi_s2.csv", "kpi_s3.csv", "suite.json"] {
        assert!(dir.path().join("out").join(name).is_file(), "missing {name}");
    }
    assert!(
        read(&dir.path().join("out/suite.json")).contains("ordering_satisfied"),
        "suite bundle must carry the ordering verdict"
    );

    let refused = beamsim(
        &[
            "eval",
            "--scenario",
            "s1,s2",
            "--n",
            "10",
            "--model",
            "whatever.json",
        ],
        dir.path(),
    );
    assert_fails_mentioning(&refused, "suite mode");
}

// 9. BEAMSIM_THREADS: accepted when a positive integer, rejected otherwise.
#[test]
fn thread_cap_env_is_validated() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ok = Command::new(env!("CARGO_BIN_EXE_beamsim"))
        .args(["--seed", "2", "gen", "--n", "10"])
        .env("BEAMSIM_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .expect("binary runs");
    assert_ok(&ok);

    let bad = Command::new(env!("CARGO_BIN_EXE_beamsim"))
        .args(["gen", "--n", "10"])
        .env("BEAMSIM_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .expect("binary runs");
    assert_fails_mentioning(&bad, "BEAMSIM_THREADS");
}
