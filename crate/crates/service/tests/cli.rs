use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rumortrace"))
}

fn run(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path) -> (String, serde_json::Value) {
    let corpus = dir.join("plane.jsonl");
    run(bin()
        .args(["synth", "--noise", "200", "--out"])
        .arg(&corpus)
        .arg("--config-out")
        .arg(dir.join("config.json"))
        .arg("--manifest")
        .arg(dir.join("manifest.json")));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    (
        manifest["config"]["investigative_tweet_id"]
            .as_str()
            .unwrap()
            .to_string(),
        manifest,
    )
}

#[test]
fn investigate_writes_datasets_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (tweet, manifest) = synth(dir.path());
    let out = dir.path().join("out");
    let text = run(bin()
        .args(["investigate", "--corpus"])
        .arg(dir.path().join("plane.jsonl"))
        .args(["--tweet", &tweet, "--config"])
        .arg(dir.path().join("config.json"))
        .arg("--out")
        .arg(&out));
    let originator = manifest["originator_screen_name"].as_str().unwrap();
    assert!(text.contains(&format!("@{originator}")), "{text}");
    assert!(text.contains("Main actors:"));
    for name in [
        "artifacts.json",
        "summary.txt",
        "summary.json",
        "timeline.json",
        "retweet_network.json",
        "links.json",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
    assert_eq!(
        std::fs::read_to_string(out.join("summary.txt")).unwrap(),
        text
    );

    let only = dir.path().join("only");
    run(bin()
        .args(["investigate", "--corpus"])
        .arg(dir.path().join("plane.jsonl"))
        .args(["--tweet", &tweet, "--config"])
        .arg(dir.path().join("config.json"))
        .arg("--summary-only")
        .arg("--out")
        .arg(&only));
    assert!(only.join("summary.json").is_file());
    assert!(!only.join("artifacts.json").exists());
}

#[test]
fn investigate_rejects_mismatched_tweet() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = bin()
        .args(["investigate", "--corpus"])
        .arg(dir.path().join("plane.jsonl"))
        .args(["--tweet", "1", "--config"])
        .arg(dir.path().join("config.json"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

#[test]
fn scatter_of_empty_store_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = run(bin()
        .args(["scatter", "--out", "-", "--store"])
        .arg(dir.path().join("store")));
    assert_eq!(
        csv.trim(),
        "story_id,propagation_h,skepticism,skepticism_infinite,category"
    );
}
