use std::path::Path;
use std::process::{Command, Output};

fn tnstream(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tnstream"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate_csv(dir: &Path) -> std::path::PathBuf {
    let csv = dir.join("n3.csv");
    let out = tnstream(&[
        "generate",
        "--analogue",
        "n3_k2",
        "--seed",
        "1",
        "--output",
        path(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    csv
}

#[test]
fn generate_writes_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate_csv(dir.path());
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 300);
    assert!(text.lines().all(|l| l.split(',').count() == 4));

    let spec = r#"{"kind":"blobs","k":2,"n":10,"dim":2,"sigma":0.1,"separation":10}"#;
    let out = tnstream(&["generate", "--spec", spec, "--normalize"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 10);
}

#[test]
fn run_writes_snapshots_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate_csv(dir.path());
    let snaps = dir.path().join("snaps.jsonl");
    let args = [
        "run",
        "--input",
        path(&csv),
        "--labels",
        "--preset",
        "n3_k2",
        "--snapshot-every",
        "100",
        "--outlier-policy",
        "exclude",
        "--output",
        path(&snaps),
    ];
    let out = tnstream(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["snapshots"], 3);
    assert_eq!(summary["scores"]["ari"], 1.0);
    let first = std::fs::read(&snaps).unwrap();
    let steps: Vec<u64> = String::from_utf8(first.clone())
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["step"]
                .as_u64()
                .unwrap()
        })
        .collect();
    assert_eq!(steps, [100, 200, 300]);

    assert!(tnstream(&args).status.success());
    assert_eq!(
        std::fs::read(&snaps).unwrap(),
        first,
        "byte-identical rerun"
    );
}

#[test]
fn explicit_flags_and_backends() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate_csv(dir.path());
    for backend in [
        &["--backend", "ball"][..],
        &["--backend", "lsh", "--num-hashes", "20"],
    ] {
        let mut args = vec![
            "run",
            "--input",
            path(&csv),
            "--labels",
            "--window",
            "300",
            "--min-pts",
            "2",
            "--n-micro",
            "3",
            "--r-max",
            "0.131",
            "--k",
            "4",
            "--tk",
            "4",
            "--mk",
            "3",
            "--alpha",
            "inf",
            "--stride",
            "2",
            "--macro-scope",
            "unattached",
        ];
        args.extend_from_slice(backend);
        let out = tnstream(&args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
    }
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate_csv(dir.path());
    let c = path(&csv);
    for args in [
        vec!["run", "--input", c, "--window", "10"],
        vec!["run", "--input", c, "--preset", "nope"],
        vec!["run", "--input", c, "--preset", "n3_k2", "--min-pts", "1"],
        vec![
            "run",
            "--input",
            c,
            "--preset",
            "n3_k2",
            "--num-hashes",
            "8",
        ],
        vec!["run", "--input", c, "--bogus"],
        vec!["generate", "--spec", "{\"kind\":\"blobs\"}"],
        vec!["bench", "/nonexistent/bench.toml"],
    ] {
        let out = tnstream(&args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,x\n").unwrap();
    let missing = dir.path().join("missing.csv");
    for input in [&bad, &missing] {
        let out = tnstream(&["run", "--input", path(input), "--preset", "n3_k2"]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn bench_writes_scorecard_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.toml");
    std::fs::write(
        &config,
        r#"
[[run]]
name = "n3_k2"
preset = "n3_k2"
outlier_policy = "exclude"
dataset = { kind = "generate", spec = { kind = "blobs", k = 2, n = 300, dim = 3, sigma = 0.25, separation = 2.0 } }

[[run]]
name = "broken"
preset = "n3_k2"
dataset = { kind = "csv", path = "/nonexistent.csv" }
"#,
    )
    .unwrap();
    let scores = dir.path().join("scores.jsonl");
    let out = tnstream(&["bench", path(&config), "--output", path(&scores)]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 3);
    let rows: Vec<serde_json::Value> = std::fs::read_to_string(&scores)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows[0]["ari"], 1.0);
    assert_eq!(rows[0]["dataset"], "n3_k2");
    assert!(rows[1]["error"].is_string());

    std::fs::write(&config, "").unwrap();
    let out = tnstream(&["bench", path(&config)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn presets_lists_every_preset() {
    let out = tnstream(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), tnstream::io::PRESET_NAMES.len() + 1);
    assert!(text.contains("kdd_lsh"));
}
