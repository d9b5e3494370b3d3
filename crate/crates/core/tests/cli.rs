use std::path::Path;
use std::process::{Command, Output};

fn beamcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamcode"))
        .args(args)
        .output()
        .expect("spawn beamcode")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gold_degree_five_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamcode(&[
        "codes",
        "--family",
        "gold",
        "--n",
        "5",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("codes.json"));
    assert_eq!(v["N"], 31);
    assert_eq!(v["count"], 33);
    assert_eq!(v["worst_case_raw"], 9);
    let csv = std::fs::read_to_string(dir.path().join("codes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 33);
    assert!(csv.lines().all(|l| l.split(',').count() == 31));
}

#[test]
fn walsh_csv_is_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamcode(&[
        "codes",
        "--family",
        "walsh",
        "--n",
        "3",
        "--format",
        "csv",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("codes.csv")).unwrap();
    let rows: Vec<Vec<i32>> = csv
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    assert!(rows
        .iter()
        .all(|r| r.len() == 8 && r.iter().all(|c| c.abs() == 1)));
    assert!(!dir.path().join("codes.json").exists());
}

#[test]
fn gold_without_preferred_pair_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamcode(&[
        "codes",
        "--family",
        "gold",
        "--n",
        "4",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gold-like"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bounds_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamcode(&[
        "bounds",
        "--kinds",
        "walsh,gold,spherical-gold",
        "--n",
        "8,15",
        "--m",
        "64",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |kind: &str, n: &str| -> f64 {
        text.lines()
            .find_map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0] == kind && f[1] == n).then(|| f[2].parse().unwrap())
            })
            .unwrap()
    };
    assert!((value("walsh", "8") - 18.06).abs() < 0.01);
    assert!((value("gold", "15") - 11.76).abs() < 0.01);
    assert!((value("spherical-gold", "15") - 29.82).abs() < 0.01);

    let missing_m = beamcode(&[
        "bounds",
        "--kinds",
        "spherical-gold",
        "--n",
        "8",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(missing_m.status.code(), Some(2));
}

#[test]
fn repeated_sweep_reports_match() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--delays", "0,3,7", "--out-dir", path(dir.path())];
    let body = || {
        assert_eq!(beamcode(&args).status.code(), Some(0));
        let mut v = json(&dir.path().join("report.json"));
        v["wall_clock_s"] = serde_json::Value::Null;
        v
    };
    let first = body();
    let second = body();
    assert_eq!(first, second);
    assert_eq!(first["config_hash"].as_str().unwrap().len(), 64);

    let summary = beamcode(&["report", path(&dir.path().join("report.json"))]);
    assert_eq!(summary.status.code(), Some(0));
    assert!(!summary.stdout.is_empty());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "[code]\nfamily = \"walsh\"\nn = 4\n").unwrap();
    let out = beamcode(&[
        "sweep",
        "--config",
        path(&cfg),
        "--family",
        "gold-like",
        "--delays",
        "0,1",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("report.json"));
    assert_eq!(v["family"]["kind"], "walsh");
}

#[test]
fn infeasible_partition_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamcode(&[
        "codebook",
        "--partition",
        "sparse",
        "--m",
        "100",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn optimized_codebook_reaches_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamcode(&[
        "codebook",
        "--partition",
        "optimized",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("codebook.json"));
    assert!(v["mu_max"].as_f64().unwrap() <= 0.2);
    let words = v["codewords"].as_array().unwrap();
    assert_eq!(words.len(), 2);
}

#[test]
fn zero_iterations_echo_the_sparse_start() {
    let dir = tempfile::tempdir().unwrap();
    let opt = dir.path().join("opt");
    let sparse = dir.path().join("sparse");
    for (kind, out_dir) in [("optimized", &opt), ("sparse", &sparse)] {
        let out = beamcode(&[
            "codebook",
            "--partition",
            kind,
            "--iters",
            "0",
            "--seed",
            "5",
            "--out-dir",
            path(out_dir),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = json(&opt.join("codebook.json"));
    let b = json(&sparse.join("codebook.json"));
    assert_eq!(a["subsets"], b["subsets"]);
    assert_eq!(a["mu_max"], b["mu_max"]);
}

#[test]
fn decode_capture_round_trip_and_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = beamcode(&["sweep", "--delays", "0,5", "--out-dir", path(dir.path())]);
    assert_eq!(sweep.status.code(), Some(0));
    let capture = dir.path().join("captures").join("capture_d5.csv");
    let codes = dir.path().join("codes.json");
    let codebook = dir.path().join("codebook.json");
    let decoded = dir.path().join("decoded");
    let out = beamcode(&[
        "decode-capture",
        "--capture",
        path(&capture),
        "--codes",
        path(&codes),
        "--codebook",
        path(&codebook),
        "--out-dir",
        path(&decoded),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(decoded.join("aoa.csv").exists());

    let text = std::fs::read_to_string(&capture).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cut = lines[3].rfind(',').unwrap();
    lines[3].truncate(cut);
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let out = beamcode(&[
        "decode-capture",
        "--capture",
        path(&bad),
        "--codes",
        path(&codes),
        "--codebook",
        path(&codebook),
        "--out-dir",
        path(&decoded),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}
