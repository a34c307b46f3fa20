use std::process::{Command, Output};

use serde_json::Value;

fn randsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randsurf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = randsurf(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn records(text: &str) -> Vec<Value> {
    text.lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Lines of the section following `# name` in `dist` output.
fn section<'a>(text: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let mut lines = text.lines().skip_while(|l| *l != format!("# {name}"));
    lines.next()?;
    Some(lines.take_while(|l| !l.starts_with("# ")).collect())
}

#[test]
fn unique_instance_gives_identical_records() {
    let recs = records(&stdout(&[
        "sample",
        "--model",
        "sprime",
        "--n",
        "2",
        "--m",
        "0",
        "--samples",
        "3",
        "--seed",
        "7",
    ]));
    assert_eq!(recs.len(), 3);
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r["index"], i);
        assert_eq!(r["genus"], 0);
        assert_eq!(r["B"], 0);
        assert_eq!(r["connected"], true);
    }
}

#[test]
fn record_fields_in_fixed_order() {
    let text = stdout(&[
        "sample",
        "--model",
        "t",
        "--n",
        "5",
        "--m",
        "2",
        "--t",
        "4",
        "--samples",
        "1",
    ]);
    let keys: Vec<&str> = text
        .trim()
        .trim_matches(|c| c == '{' || c == '}')
        .split(',')
        .map(|kv| kv.split(':').next().unwrap().trim_matches('"'))
        .collect();
    assert_eq!(
        keys,
        [
            "model",
            "n",
            "m",
            "t",
            "seed",
            "index",
            "B",
            "I",
            "genus",
            "chi",
            "components",
            "connected"
        ]
    );
    let csv = stdout(&[
        "sample",
        "--model",
        "t",
        "--n",
        "5",
        "--m",
        "2",
        "--t",
        "4",
        "--samples",
        "2",
        "--format",
        "csv",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], keys.join(","));
    assert_eq!(lines.len(), 3);
}

#[test]
fn output_is_deterministic_across_runs_and_thread_counts() {
    let args = [
        "sample",
        "--model",
        "tprime",
        "--n",
        "100",
        "--m",
        "10",
        "--samples",
        "1000",
        "--seed",
        "1",
    ];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    let mut serial = args.to_vec();
    serial.extend(["--threads", "1"]);
    let mut pooled = args.to_vec();
    pooled.extend(["--threads", "3"]);
    assert_eq!(first, stdout(&serial));
    assert_eq!(first, stdout(&pooled));
    assert_eq!(records(&first).len(), 1000);
}

#[test]
fn four_sided_polygon_genus_fraction() {
    let recs = records(&stdout(&[
        "sample",
        "--model",
        "s",
        "--n",
        "4",
        "--m",
        "0",
        "--samples",
        "100000",
        "--seed",
        "2",
    ]));
    let tori = recs.iter().filter(|r| r["genus"] == 1).count() as f64;
    let frac = tori / recs.len() as f64;
    assert!((frac - 1.0 / 3.0).abs() <= 0.005, "genus-1 fraction {frac}");
}

#[test]
fn dist_reports_moments_against_harmonic_mean() {
    let text = stdout(&[
        "dist",
        "--model",
        "sprime",
        "--n",
        "10000",
        "--m",
        "100",
        "--samples",
        "10000",
        "--seed",
        "5",
    ]);
    let moments: Value = serde_json::from_str(section(&text, "moments").unwrap()[0]).unwrap();
    let h100: f64 = (1..=100).map(|k| 1.0 / k as f64).sum();
    let mean_b = moments["mean_B"].as_f64().unwrap();
    assert!((mean_b - h100).abs() <= 0.05, "mean_B {mean_b}");
    assert!(section(&text, "b_hat").is_some());
    let plan: Value = serde_json::from_str(section(&text, "plan").unwrap()[0]).unwrap();
    assert!((plan["r"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn dist_without_boundary_omits_normalized_columns() {
    let args = [
        "dist",
        "--model",
        "t",
        "--n",
        "6",
        "--m",
        "0",
        "--samples",
        "500",
        "--seed",
        "9",
    ];
    let text = stdout(&args);
    assert_eq!(text, stdout(&args));
    assert!(section(&text, "b_hat").is_none());
    assert!(section(&text, "g_hat").is_none());
    assert_eq!(section(&text, "B").unwrap(), ["value,count", "0,500"]);
    let joint = section(&text, "joint").unwrap();
    assert_eq!(joint[0], "B,genus,count");
    assert!(joint[1..].iter().all(|row| row.starts_with("0,")));
}

#[test]
fn oracle_tables() {
    assert_eq!(
        stdout(&["oracle", "--model", "s", "--n", "4"]),
        "B,genus,connected,numerator,denominator\n0,0,true,2,3\n0,1,true,1,3\n"
    );
    assert_eq!(
        stdout(&["oracle", "--model", "sprime", "--n", "2", "--m", "0"]),
        "B,genus,connected,numerator,denominator\n0,0,true,1,1\n"
    );
    let text = stdout(&["oracle", "--model", "tprime", "--n", "2", "--m", "1"]);
    let mut total = 0u64;
    for row in text.lines().skip(1) {
        let cols: Vec<u64> = row.split(',').skip(3).map(|c| c.parse().unwrap()).collect();
        assert_eq!(90 % cols[1], 0, "denominator divides the 90 cases");
        total += cols[0] * (90 / cols[1]);
    }
    assert_eq!(total, 90);
}

#[test]
fn oracle_guard_names_the_case_count() {
    let out = randsurf(&["oracle", "--model", "sprime", "--n", "40", "--m", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("3159930149316032375658375000"), "{err}");
}

#[test]
fn stirling_row() {
    assert_eq!(
        stdout(&["stirling", "--m", "4"])
            .lines()
            .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>(),
        ["B,stirling", "1,6", "2,11", "3,6", "4,1"]
    );
}

#[test]
fn verify_single_criterion() {
    let recs = records(&stdout(&["verify", "--only", "euler"]));
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["id"], "euler");
    assert_eq!(recs[0]["passed"], true);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| randsurf(args).status.code();
    assert_eq!(
        code(&["sample", "--model", "t", "--n", "3", "--m", "9"]),
        Some(1)
    );
    assert_eq!(code(&["sample", "--model", "q", "--n", "3"]), Some(1));
    assert_eq!(
        code(&["sample", "--model", "s", "--n", "3", "--threads", "0"]),
        Some(1)
    );
    assert_eq!(code(&["verify", "--only", "missing"]), Some(1));
    assert_eq!(
        code(&[
            "sample",
            "--model",
            "s",
            "--n",
            "4",
            "--out",
            "/nonexistent/dir/out.jsonl"
        ]),
        Some(2)
    );
    assert_eq!(code(&["--help"]), Some(0));
}
