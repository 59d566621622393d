use std::path::Path;
use std::process::{Command, Output};

fn gsign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsign"))
        .args(args)
        .output()
        .expect("spawn gsign")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn orbit_csv_has_period_and_circle_footer() {
    let out = stdout(&gsign(&[
        "orbit",
        "--alpha",
        "sqrt(2)/3",
        "--z",
        "1-i",
        "--n",
        "10000",
        "--format",
        "csv",
    ]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,re,im,sign,ambiguity"));
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 10_001);
    let period = out
        .lines()
        .find_map(|l| l.strip_prefix("# period="))
        .unwrap();
    assert!(period.ends_with(",p=14"), "{period}");
    assert!(out.lines().any(|l| l == "# circles=4"));
}

#[test]
fn orbit_json_reports_period() {
    let out = stdout(&gsign(&[
        "orbit",
        "--alpha",
        "0.00702367",
        "--z",
        "2.0176+4.8585i",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["period"]["p"], 51);
    assert_eq!(v["points"].as_array().unwrap().len(), 10_000);
}

#[test]
fn certify_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = gsign(&[
        "certify",
        "--alpha",
        "1/sqrt(6)",
        "--z",
        "-1/2-i",
        "--k",
        "100",
        "--conv-q",
        "4801",
        "--out",
        path(&cert),
    ]);
    stdout(&out);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(v["verdict"], "Certified");
    assert_eq!(v["kind"], "constant_sign");
    assert!((v["threshold"].as_f64().unwrap() - 0.0796).abs() < 1e-4);

    let rep: serde_json::Value =
        serde_json::from_str(&stdout(&gsign(&["verify", path(&cert)]))).unwrap();
    assert_eq!(rep["consistent"], true);

    // a tampered threshold is caught
    let mut bad = v.clone();
    bad["threshold"] = serde_json::json!(0.5);
    let tampered = dir.path().join("bad.json");
    std::fs::write(&tampered, serde_json::to_string(&bad).unwrap()).unwrap();
    assert_eq!(gsign(&["verify", path(&tampered)]).status.code(), Some(1));
}

#[test]
fn convergents_tsv() {
    let out = stdout(&gsign(&[
        "convergents",
        "--x",
        "10/17 + 10^-7*sqrt(2)",
        "--qmax",
        "1000000",
    ]));
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    let q: Vec<&str> = rows
        .iter()
        .filter(|r| r[0].parse::<usize>().is_ok())
        .map(|r| *r.last().unwrap())
        .collect();
    assert_eq!(q, ["1", "2", "5", "17", "415944"]);
}

#[test]
fn exit_codes() {
    assert_eq!(gsign(&["bogus"]).status.code(), Some(2));
    let bad = gsign(&["orbit", "--alpha", "sqrt(2", "--z", "0"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
    assert_eq!(
        gsign(&["orbit", "--alpha", "3", "--z", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(gsign(&["--help"]).status.code(), Some(0));
}

#[test]
fn map_writes_image_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("f.pgm");
    stdout(&gsign(&[
        "map",
        "--alpha",
        "sqrt(2)",
        "--res",
        "32x24",
        "--steps",
        "200",
        "--out",
        path(&img),
    ]));
    let bytes = std::fs::read(&img).unwrap();
    let header = b"P5\n32 24\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 32 * 24);
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.pgm.json")).unwrap())
            .unwrap();
    assert_eq!(side["steps"], 200);
    assert_eq!(side["alpha_hex"], "0x3ff6a09e667f3bcd");
}

#[test]
fn regions_json_and_pgm() {
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&gsign(&["regions", "--alpha", "0.25"]))).unwrap();
    assert_eq!(v["minus_disk"]["radius"], 0.5);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.pgm");
    stdout(&gsign(&[
        "regions",
        "--alpha",
        "0.25",
        "--format",
        "pgm",
        "--res",
        "64",
        "--out",
        path(&out),
    ]));
    assert!(std::fs::read(&out)
        .unwrap()
        .starts_with(b"P5\n64 64\n255\n"));

    let pat = stdout(&gsign(&[
        "regions",
        "--alpha",
        "sqrt(2)/3",
        "--z",
        "1-i",
        "--depth",
        "2",
    ]));
    let v: serde_json::Value = serde_json::from_str(&pat).unwrap();
    assert_eq!(v["balls"].as_array().unwrap().len(), 14);
    assert_eq!(v["depth"], 2);
}

#[test]
fn search_writes_jsonl_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (out, summary) = (dir.path().join("s.jsonl"), dir.path().join("sum.json"));
    let args = [
        "search",
        "--count",
        "25",
        "--seed",
        "5",
        "--horizon",
        "2000",
        "--z-radius",
        "2",
    ];
    let mut full = args.to_vec();
    full.extend(["--out", path(&out), "--summary", path(&summary)]);
    stdout(&gsign(&full));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 25);
    for line in text.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["total"], 25);
    // same seed, same records on stdout
    assert_eq!(stdout(&gsign(&args)), text);
}

#[test]
fn doubling_report() {
    let out = stdout(&gsign(&[
        "doubling",
        "--alpha",
        "0.00702367",
        "--z",
        "2.0176+4.8585i",
        "--n",
        "20000",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["base"]["p"], 51);
    assert_eq!(v["shifted"]["p"], 102);
    assert_eq!(v["verified"], true);
}
