use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "
total_episodes = 20
eval_every = 10
max_episode_steps = 200
checkpoint_every = 10
[curriculum]
switch_episode = 5
traffic_ramp_episodes = 5
traffic_max = 1
";

fn lanerl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanerl")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_one_line_error(out: &Output) {
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error"), "{err}");
}

#[test]
fn train_eval_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let runs = dir.path().join("runs");
    for variant in ["sca", "curla"] {
        let out_dir = runs.join(variant);
        assert_ok(&lanerl(&[
            "train", "--config", s(&cfg), "--variant", variant, "--seed", "1", "--out", s(&out_dir),
        ]));
        let text = std::fs::read_to_string(out_dir.join("records.csv")).unwrap();
        assert_eq!(text.lines().count(), 1 + 20 + 2);
        assert!(out_dir.join("summary.json").exists());
        assert!(out_dir.join("checkpoints/episode_000010.bin").exists());
    }

    let ckpt = runs.join("curla/checkpoints/final.bin");
    let out = lanerl(&["eval", "--checkpoint", s(&ckpt), "--config", s(&cfg), "--episodes", "2"]);
    assert_ok(&out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 3);
    assert!(stdout.lines().skip(1).all(|l| l.contains(",eval,")));

    let plots = dir.path().join("plots");
    assert_ok(&lanerl(&["plot", "--runs", s(&runs), "--out", s(&plots)]));
    let svgs = std::fs::read_dir(&plots).unwrap().count();
    assert_eq!(svgs, 6);
}

#[test]
fn frames_then_vae() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let frames = dir.path().join("frames");
    assert_ok(&lanerl(&["collect-frames", "--config", s(&cfg), "--count", "30", "--out", s(&frames)]));
    let vae = dir.path().join("vae.bin");
    let out = lanerl(&["vae-train", "--frames", s(&frames), "--out", s(&vae), "--epochs", "2"]);
    assert_ok(&out);
    assert!(vae.exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("validation bce"));
}

#[test]
fn errors_are_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_one_line_error(&lanerl(&[
        "train", "--config", s(&missing), "--variant", "sca", "--seed", "0", "--out", s(dir.path()),
    ]));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "eval_every = 0").unwrap();
    assert_one_line_error(&lanerl(&["eval", "--checkpoint", s(&bad), "--config", s(&bad), "--episodes", "1"]));

    let cfg = dir.path().join("ok.toml");
    std::fs::write(&cfg, TINY).unwrap();
    std::fs::write(dir.path().join("junk.bin"), b"not a checkpoint").unwrap();
    assert_one_line_error(&lanerl(&[
        "eval",
        "--checkpoint",
        s(&dir.path().join("junk.bin")),
        "--config",
        s(&cfg),
        "--episodes",
        "1",
    ]));
    assert_one_line_error(&lanerl(&["plot", "--runs", s(dir.path()), "--out", s(dir.path())]));

    // argument errors come from clap and also exit nonzero
    assert!(!lanerl(&["train", "--variant", "bogus"]).status.success());
}
