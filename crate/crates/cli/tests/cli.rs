use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn evtime(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_evtime"));
    cmd.current_dir(root()).args(args).env_remove("CHRONO_SEED");
    if let Some(s) = seed {
        cmd.env("CHRONO_SEED", s);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A small config over the bundled synthetic corpus writing into `out`.
fn config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.json");
    let out = dir.join("out");
    fs::write(
        &path,
        format!(
            r#"{{"seed": 3, "corpus_dirs": ["data/synthetic/docs"], "event_times": "data/synthetic/event_times.tsv",
"output_dir": {:?}, "sw": 1, "word_dim": 8, "position_dim": 4, "hidden_dim": 8, "epochs": 2{extra}}}"#,
            out.to_string_lossy()
        ),
    )
    .unwrap();
    path
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&evtime(&["--help"], None)), 0);
    // clap reports unknown subcommands with its own usage code.
    assert_ne!(code(&evtime(&["transmogrify"], None)), 0);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let cfg = cfg.to_str().unwrap();

    let out = evtime(&["corpus-stats", "--config", cfg, "--override", "colour=red"], None);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("colour"));

    // No seed anywhere.
    let out = evtime(&["corpus-stats", "--override", "corpus_dirs=data/synthetic/docs"], None);
    assert_eq!(code(&out), 1);

    let out = evtime(&["corpus-stats", "--config", cfg], Some("soon"));
    assert_eq!(code(&out), 1);

    let out = evtime(&["corpus-stats", "--config", "no/such/config.json"], None);
    assert_eq!(code(&out), 1);

    let out = evtime(&["corpus-stats", "--config", cfg, "--override", "corpus_dirs=no/such/dir"], None);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn missing_inputs_are_user_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let cfg = cfg.to_str().unwrap();
    for step in ["train", "predict", "infer"] {
        let out = evtime(&[step, "--config", cfg], None);
        assert_eq!(code(&out), 1, "{step}: {}", stderr(&out));
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let cfg = cfg.to_str().unwrap();
    let out_dir = dir.path().join("out");
    let run = |seed: Option<&str>| {
        for step in ["induce", "train"] {
            let out = evtime(&[step, "--config", cfg, "--override", "link_kind=E-D"], seed);
            assert_eq!(code(&out), 0, "{}", stderr(&out));
        }
        fs::read(out_dir.join("ed.model")).unwrap()
    };
    let from_config = run(None);
    assert_eq!(run(Some("3")), from_config);
    assert_ne!(run(Some("4")), from_config);
}

#[test]
fn inference_without_timex_predictions_notes_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#", "link_kind": "E-D""#);
    let cfg = cfg.to_str().unwrap();
    for step in ["induce", "train", "predict", "infer", "evaluate"] {
        let out = evtime(&[step, "--config", cfg], None);
        assert_eq!(code(&out), 0, "{step}: {}", stderr(&out));
    }
    let lines = fs::read_to_string(dir.path().join("out/inference.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 60);
    for r in &records {
        assert_eq!(r["clue_count"], 1);
        assert!(r["notes"].as_array().unwrap().iter().any(|n| n == "no E-T clues"), "{r}");
        assert!(r["gold"].is_string());
    }
    let table = fs::read_to_string(dir.path().join("out/predicted_times.tsv")).unwrap();
    assert_eq!(table.lines().count(), 60);
}
