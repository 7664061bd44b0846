use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use udecide::output::CSV_HEADER;

const GOLDEN_FIGURE1: &str = include_str!("data/figure1.csv");

const POINT: &str = "[problem]
p0 = 0.5
c01 = 0.3
c10 = 0.5

[noise]
sigma_p0 = 0.1
family_p = \"beta\"

[run]
trials = 20000
seed = 9
";

fn udecide(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_udecide"));
    cmd.args(args).env_remove("UDECIDE_THREADS");
    if let Some(t) = threads {
        cmd.env("UDECIDE_THREADS", t);
    }
    cmd.output().expect("spawn udecide")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn figure1_csv_matches_golden_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f1.csv");
    let o = udecide(&["figure1", "--out", path_str(&out)], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got = fs::read_to_string(&out).unwrap();
    assert_eq!(got, GOLDEN_FIGURE1);
}

#[test]
fn golden_file_contains_known_points() {
    let mut lines = GOLDEN_FIGURE1.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 198 + 33);
    assert!(rows.iter().all(|r| r.len() == 20));
    let row = rows
        .iter()
        .find(|r| r[0] == "cost-only" && r[1] == "0.05" && r[5] == "0.35")
        .unwrap();
    let norm_inc: f64 = row[12].parse().unwrap();
    assert!((norm_inc - 2.26).abs() < 5e-3);
    let row = rows
        .iter()
        .find(|r| r[0] == "prob-only" && r[1] == "0.5" && r[4] == "0.1")
        .unwrap();
    let norm_inc: f64 = row[12].parse().unwrap();
    assert!((norm_inc - 0.0288).abs() < 5e-4);
}

#[test]
fn manifest_records_resolved_run() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f1.csv");
    let o = udecide(&["figure1", "--out", path_str(&out), "--seed", "5"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("f1.csv.manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["subcommand"], "figure1");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["trials"], 100000);
    assert_eq!(m["stats"]["cells"], 198);
    assert!(m["timestamp_unix"].as_u64().unwrap() > 0);
    // the manifest's config reproduces the data file
    let cfg = write_config(&dir, "again.toml", m["config"].as_str().unwrap());
    let out2 = dir.path().join("again.csv");
    let o = udecide(&["figure1", "--config", path_str(&cfg), "--out", path_str(&out2)], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&out2).unwrap());
    assert!(!fs::read_to_string(&out).unwrap().contains("timestamp"));
}

#[test]
fn json_output_has_seed_trials_and_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f1.json");
    let o = udecide(&["figure1", "--out", path_str(&out), "--format", "json"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["rows"].as_array().unwrap().len(), 231);
}

#[test]
fn analytic_and_simulate_emit_single_point_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "p.toml", POINT);
    for sub in ["analytic", "simulate"] {
        let out = dir.path().join(format!("{sub}.csv"));
        let o = udecide(&[sub, "--config", path_str(&cfg), "--out", path_str(&out)], None);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let f: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(f[0], "point");
        assert_eq!(&f[16..18], &["20000", "9"]);
        let analytic: f64 = f[10].parse().unwrap();
        assert!((analytic - 0.0432).abs() < 5e-4);
        if sub == "simulate" {
            let mc: f64 = f[13].parse().unwrap();
            assert!(mc > 0.0 && mc < 0.5);
        } else {
            assert_eq!(f[13], "");
        }
    }
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "p.toml", POINT);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| vec!["simulate".to_string(), "--config".into(), path_str(&cfg).into(), "--out".into(), path_str(p).into(), "--trials".into(), "300000".into()];
    let run = |p: &Path, t: &str| {
        let a = args(p);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        udecide(&a, Some(t))
    };
    assert_eq!(run(&a, "1").status.code(), Some(0));
    assert_eq!(run(&b, "3").status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn plot_is_written_for_sweeps() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f1.csv");
    let svg = dir.path().join("f1.svg");
    let o = udecide(&["figure1", "--out", path_str(&out), "--plot", path_str(&svg)], None);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<polyline").count(), 3);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let out = path_str(&out);
    let bad_key = write_config(&dir, "bad.toml", "[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\nspeed = 1\n");
    let bad_p0 = write_config(&dir, "p0.toml", "[problem]\np0 = 1.5\nc01 = 0.3\nc10 = 0.5\n");
    let cases: Vec<(Vec<&str>, Option<&str>)> = vec![
        (vec!["analytic", "--out", out], None),
        (vec!["analytic", "--config", path_str(&bad_key), "--out", out], None),
        (vec!["analytic", "--config", path_str(&bad_p0), "--out", out], None),
        (vec!["figure1", "--config", path_str(&bad_p0), "--out", out], None),
        (vec!["figure1", "--config", "/nonexistent/c.toml", "--out", out], None),
        (vec!["figure1", "--out", out, "--trials", "0"], None),
        (vec!["figure1", "--out", out], Some("zero")),
        (vec!["figure1", "--out", out], Some("0")),
        (vec!["frobnicate", "--out", out], None),
    ];
    for (args, threads) in cases {
        let o = udecide(&args, threads);
        assert_eq!(o.status.code(), Some(2), "{args:?} {threads:?}");
        assert!(!o.stderr.is_empty());
    }
    assert!(!Path::new(out).exists());
}

#[test]
fn unknown_key_error_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", "[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\nspeed = 1\n");
    let out = dir.path().join("x.csv");
    let o = udecide(&["analytic", "--config", path_str(&cfg), "--out", path_str(&out)], None);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("speed"), "{stderr}");
}

#[test]
fn unwritable_output_exits_with_three() {
    let o = udecide(&["figure1", "--out", "/nonexistent/dir/out.csv"], None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(udecide(&["--help"], None).status.code(), Some(0));
    let v = udecide(&["--version"], None);
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}
