use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dsvnlms::harness::{self, ExperimentConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dsvnlms"));
    c.env_remove(harness::OUTPUT_DIR_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn presets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn shipped_preset_files_match_builtins() {
    for name in harness::PRESET_NAMES {
        let path = presets_dir().join(format!("{name}.json"));
        let shipped = ExperimentConfig::load(&path).unwrap();
        assert_eq!(shipped, harness::preset(name).unwrap(), "{name}");
        assert_eq!(fs::read_to_string(&path).unwrap(), shipped.to_json());
    }
}

#[test]
fn run_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let o = run(&[
            "run",
            "--preset",
            "wgn-tau5",
            "--trials",
            "2",
            "--seed",
            "11",
            "--quiet",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{o:?}");
        assert!(stdout(&o).contains("local_violations=0"));
    }
    let ta = read_tree(a.path());
    assert_eq!(ta, read_tree(b.path()));
    let names: Vec<String> = ta.iter().map(|(p, _)| p.display().to_string()).collect();
    for want in [
        "config.json",
        "summary.csv",
        "comparison.csv",
        "trial_11/input.csv",
        "trial_12/noise.csv",
        "trial_11/ds_fixed_tau5/trace.csv",
        "trial_11/ds_fixed_tau5/l.csv",
        "trial_11/ds_fixed_tau5/r.csv",
        "trial_11/ds_fixed_tau5/wtilde_sq.csv",
        "trial_11/ds_fixed_tau5/summary.txt",
    ] {
        assert!(names.iter().any(|n| n == want), "missing {want}");
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run", "--preset", "ar1-bounded", "--trials", "1", "-q"])
        .env(harness::OUTPUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    assert!(dir.path().join("trial_1/ds_known_bound/trace.csv").exists());
}

#[test]
fn check_accepts_clean_trace_and_rejects_tampered_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        "--preset",
        "wgn-tau2",
        "--trials",
        "1",
        "-q",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let trace = out.join("trial_1/ds_fixed_tau2/trace.csv");
    let o = run(&["check", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("local_violations=0"));

    // raise lhs above rhs on the first updated row
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = lines
        .iter()
        .position(|l| l.split(',').nth(4) == Some("1"))
        .unwrap();
    let mut cols: Vec<String> = lines[row].split(',').map(String::from).collect();
    let rhs: f64 = cols[11].parse().unwrap();
    cols[10] = format!("{:e}", rhs * 2.0);
    lines[row] = cols.join(",");
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let o = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{o:?}");
    assert!(stdout(&o).contains(&format!("first_violation_k={}", row - 1)));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["run"]).status.code(), Some(1));
    assert_eq!(
        run(&["check", "/nonexistent/trace.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["run", "/nonexistent/config.json"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let mut c = harness::preset("wgn-tau5").unwrap();
    c.iterations = 0;
    c.trials = 0;
    fs::write(&cfg, c.to_json()).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("iterations") && err.contains("trials"),
        "{err}"
    );
}

#[test]
fn dims_prints_layout() {
    let o = run(&["dims", "3", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("dimension=34\n"));
    assert!(s.contains("x(k)*x(k-2)"));
}

#[test]
fn custom_channel_file_resolves_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("channel.json"),
        r#"{"order": 2, "memory": 1, "terms": [{"lags": [0], "value": 0.4}, {"lags": [0, 1], "value": -0.3}]}"#,
    )
    .unwrap();
    let mut c = harness::preset("wgn-tau5").unwrap();
    c.channel = harness::ChannelSpec::File {
        path: "channel.json".into(),
    };
    c.trials = 1;
    c.iterations = 500;
    let path = dir.path().join("exp.json");
    fs::write(&path, c.to_json()).unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        path.to_str().unwrap(),
        "-q",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("local_violations=0"));
}
