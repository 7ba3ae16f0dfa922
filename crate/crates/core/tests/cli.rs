use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oztal::eval::Detection;
use oztal::io::{load_annotations, write_predictions};

fn oztal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oztal"))
        .args(args)
        .env_remove("OZTAL_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = oztal(args);
    assert!(
        out.status.success(),
        "oztal {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("synth");
    let mut args = vec!["synth", "--out", s(&out)];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                found.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    found.sort();
    found
}

#[test]
fn synth_same_seed_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = files(&synth(a.path(), &["--seed", "42", "--noise", "0.5"]));
    let fb = files(&synth(b.path(), &["--seed", "42", "--noise", "0.5"]));
    assert!(fa.len() >= 7);
    assert_eq!(fa, fb);
}

#[test]
fn synth_rejects_small_dim() {
    let dir = tempfile::tempdir().unwrap();
    let out = oztal(&[
        "synth",
        "--classes",
        "5",
        "--dim",
        "6",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K+2"));
}

#[test]
fn missing_manifest_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = oztal(&[
        "localize",
        "--features",
        s(&dir.path().join("none")),
        "--textbank",
        s(&dir.path().join("tb")),
        "--out",
        s(&dir.path().join("p.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifest not found"));
}

#[test]
fn jobs_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &["--noise", "1.0", "--videos", "6"]);
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let trace = dir.path().join(format!("{name}.trace"));
        ok(&[
            "localize",
            "--features",
            s(&data.join("features")),
            "--textbank",
            s(&data.join("textbank")),
            "--out",
            s(&out),
            "--trace",
            s(&trace),
            "--jobs",
            jobs,
        ]);
        (std::fs::read(out).unwrap(), std::fs::read(trace).unwrap())
    };
    let one = run("1", "one.jsonl");
    let eight = run("8", "eight.jsonl");
    assert!(!one.0.is_empty());
    assert_eq!(one, eight);
}

#[test]
fn perfect_predictions_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &[]);
    let gt = load_annotations(&data.join("gt.json")).unwrap();
    let mut dets = Vec::new();
    for (video, ann) in gt.videos() {
        for (i, seg) in ann.segments.iter().enumerate() {
            dets.push(Detection {
                video_id: video.clone(),
                label: seg.label.clone(),
                start: seg.start,
                end: seg.end,
                score: 1.0 + i as f64,
                emit: seg.end,
            });
        }
    }
    let preds = dir.path().join("perfect.jsonl");
    write_predictions(&preds, &dets).unwrap();
    let table = ok(&[
        "eval",
        "--preds",
        s(&preds),
        "--gt",
        s(&data.join("gt.json")),
    ]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0].split_whitespace().collect::<Vec<_>>(),
        ["tIoU", "0.30", "0.40", "0.50", "0.60", "0.70", "Avg"]
    );
    assert_eq!(
        lines[1].split_whitespace().collect::<Vec<_>>(),
        ["mAP", "100.00", "100.00", "100.00", "100.00", "100.00", "100.00"]
    );

    let table = ok(&[
        "eval",
        "--preds",
        s(&preds),
        "--gt",
        s(&data.join("gt.json")),
        "--tiou",
        "0.5,0.75,0.95",
    ]);
    assert_eq!(
        table
            .lines()
            .next()
            .unwrap()
            .split_whitespace()
            .collect::<Vec<_>>(),
        ["tIoU", "0.50", "0.75", "0.95", "Avg"]
    );
}

#[test]
fn unknown_labels_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &[]);
    let preds = dir.path().join("bad.jsonl");
    write_predictions(
        &preds,
        &[Detection {
            video_id: "synth_video_000".into(),
            label: "NotAClass".into(),
            start: 0.0,
            end: 1.0,
            score: 1.0,
            emit: 1.0,
        }],
    )
    .unwrap();
    let out = oztal(&[
        "eval",
        "--preds",
        s(&preds),
        "--gt",
        s(&data.join("gt.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotAClass"));
}

#[test]
fn splits_average_per_split_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &["--noise", "1.5"]);
    let preds = dir.path().join("p.jsonl");
    ok(&[
        "localize",
        "--features",
        s(&data.join("features")),
        "--textbank",
        s(&data.join("textbank")),
        "--out",
        s(&preds),
    ]);
    let splits = dir.path().join("splits.json");
    std::fs::write(
        &splits,
        r#"{"splits": [["Action00", "Action01"], ["Action02"]]}"#,
    )
    .unwrap();
    let json = dir.path().join("summary.json");
    ok(&[
        "eval",
        "--preds",
        s(&preds),
        "--gt",
        s(&data.join("gt.json")),
        "--splits",
        s(&splits),
        "--json",
        s(&json),
    ]);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    let reports = summary["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    let mean =
        (reports[0]["average"].as_f64().unwrap() + reports[1]["average"].as_f64().unwrap()) / 2.0;
    assert!((summary["average"].as_f64().unwrap() - mean).abs() < 1e-12);
}

#[test]
fn tau_sweep_has_seven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &["--noise", "1.0"]);
    let csv = ok(&[
        "sweep",
        "--features",
        s(&data.join("features")),
        "--textbank",
        s(&data.join("textbank")),
        "--gt",
        s(&data.join("gt.json")),
        "--grid",
        "tau=5:20:2.5",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "tau,lq,map@0.30,map@0.40,map@0.50,map@0.60,map@0.70,avg"
    );
    assert_eq!(lines.len(), 8);
    let taus: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(taus, ["5", "7.5", "10", "12.5", "15", "17.5", "20"]);
}

#[test]
fn single_point_sweep_matches_localize_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &["--noise", "1.5"]);
    let features = data.join("features");
    let textbank = data.join("textbank");
    let gt = data.join("gt.json");
    let preds = dir.path().join("p.jsonl");
    ok(&[
        "localize",
        "--features",
        s(&features),
        "--textbank",
        s(&textbank),
        "--out",
        s(&preds),
        "--tau",
        "12.5",
        "--lq",
        "10",
    ]);
    let json = dir.path().join("eval.json");
    ok(&[
        "eval",
        "--preds",
        s(&preds),
        "--gt",
        s(&gt),
        "--json",
        s(&json),
    ]);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();

    let csv = ok(&[
        "sweep",
        "--features",
        s(&features),
        "--textbank",
        s(&textbank),
        "--gt",
        s(&gt),
        "--grid",
        "tau=12.5;lq=10",
    ]);
    let row: Vec<f64> = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let from_eval: Vec<f64> = summary["map"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(&row[..2], &[12.5, 10.0]);
    // sweep scores are full precision; eval reads six-decimal times back
    for (a, b) in row[2..7].iter().zip(&from_eval) {
        assert!((a - b * 100.0).abs() < 1e-3, "{a} vs {b}");
    }
    assert!((row[7] - summary["average"].as_f64().unwrap() * 100.0).abs() < 1e-3);
}

#[test]
fn memory_length_sweep_includes_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &["--noise", "1.0"]);
    let csv = ok(&[
        "sweep",
        "--features",
        s(&data.join("features")),
        "--textbank",
        s(&data.join("textbank")),
        "--gt",
        s(&data.join("gt.json")),
        "--grid",
        "lq=0,5,10,20,40",
    ]);
    let lqs: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(lqs, ["0", "5", "10", "20", "40"]);
}

#[test]
fn empty_grid_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &[]);
    let out = oztal(&[
        "sweep",
        "--features",
        s(&data.join("features")),
        "--textbank",
        s(&data.join("textbank")),
        "--gt",
        s(&data.join("gt.json")),
        "--grid",
        "tau=",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
