use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fluidq::csvio::{parse_f64, read_table};

fn fluidq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluidq")).args(args).output().expect("spawn fluidq")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    read_table(fs::File::open(path).unwrap()).unwrap()
}

fn column(rows: &[Vec<String>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| parse_f64(&r[k]).unwrap()).collect()
}

#[test]
fn scale_table_starts_at_one() {
    let dir = tempfile::tempdir().unwrap();
    for model in ["brownian:c=0.5", "brownian:c=1", "tempered_stable:phi=1,gamma=2,nu=0.5"] {
        let out = dir.path().join("w.csv");
        let o = fluidq(&["--model", model, "--command", "scale", "--grid", "0:2:3", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("# command: scale"));
        let (header, rows) = table(&out);
        assert_eq!(header, ["x", "W_q", "engine"]);
        let w = column(&rows, 1);
        assert_eq!(w[0], 1.0);
        assert!(w.windows(2).all(|p| p[1] >= p[0]));
    }
}

#[test]
fn usage_errors_exit_one() {
    let cases: [&[&str]; 6] = [
        &["--model", "brownian:c=0.5", "--command", "scale", "--grid", "-1:2:3"],
        &["--model", "brownian:c=0.5", "--command", "plot"],
        &["--command", "scale"],
        &["--model", "brownian:c=1.5", "--command", "law", "--law", "busy_lt"],
        &["--model", "brownian:c=0.5", "--command", "law", "--law", "nonsense"],
        &["--bogus-flag"],
    ];
    for args in cases {
        assert_eq!(code(&fluidq(args)), 1, "{args:?}");
    }
}

#[test]
fn law_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("law.csv");
    let p = out.to_str().unwrap();
    let o = fluidq(&["--model", "brownian:c=0.5", "--command", "law", "--law", "qstar_cdf", "--grid", "0:5:11", "--out", p]);
    assert_eq!(code(&o), 0);
    let (header, rows) = table(&out);
    assert_eq!(header, ["alpha", "beta", "x", "y", "value", "formula"]);
    let v = column(&rows, 4);
    assert!(v.iter().all(|p| (0.0..=1.0).contains(p)));
    assert!(v.windows(2).all(|p| p[1] >= p[0]));
    assert!(rows.iter().all(|r| r[5] == "qstar-cdf"));

    let o = fluidq(&["--model", "brownian:c=0.5", "--command", "law", "--law", "busy_lt", "--grid", "0:2:5", "--out", p]);
    assert_eq!(code(&o), 0);
    let (_, rows) = table(&out);
    assert_eq!(parse_f64(&rows[0][0]).unwrap(), 0.0);
    assert_eq!(parse_f64(&rows[0][4]).unwrap(), 1.0);

    let o = fluidq(&["--model", "brownian:c=0.5", "--command", "law", "--law", "density:busy_length", "--grid", "0.1:8:20", "--out", p]);
    assert_eq!(code(&o), 0);
    let (_, rows) = table(&out);
    assert!(column(&rows, 4).iter().all(|d| *d > 0.0));
}

#[test]
fn evaluation_error_names_the_row() {
    let o = fluidq(&["--model", "tempered_stable:phi=1,gamma=2,nu=0.5", "--command", "law", "--law", "density:g1", "--x", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("x=1"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        fluidq(&[
            "--model", "brownian:c=0.5", "--command", "simulate", "--cycles", "1000", "--seed", "17", "--epsilon", "1e-4",
            "--out", p.to_str().unwrap(),
        ])
    };
    let oa = args(&a);
    assert_eq!(code(&oa), 0);
    assert_eq!(code(&args(&b)), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.contains("# seed: 17") && text.contains("# epsilon:"));
    let summary: serde_json::Value = serde_json::from_slice(&oa.stdout).unwrap();
    assert_eq!(summary["censored"], 0);
    let mb = &summary["mean_b"];
    let (v, se) = (mb["value"].as_f64().unwrap(), mb["std_error"].as_f64().unwrap());
    assert!((v - 1.0).abs() < 3.0 * se);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("w.csv");
    fs::write(
        &cfg,
        format!(
            r#"{{"model": {{"kind": "brownian", "c": 0.3}}, "command": "scale", "grid": "0:1:2", "q": 0.5, "out": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    assert_eq!(code(&fluidq(&["--config", cfg.to_str().unwrap()])), 0);
    assert!(fs::read_to_string(&out).unwrap().contains("# model: brownian(c=0.3)"));
    assert_eq!(code(&fluidq(&["--config", cfg.to_str().unwrap(), "--model", "brownian:c=0.7"])), 0);
    assert!(fs::read_to_string(&out).unwrap().contains("# model: brownian(c=0.7)"));
    fs::write(&cfg, r#"{"model": {"kind": "brownian", "c": 0.3}, "colour": 1}"#).unwrap();
    assert_eq!(code(&fluidq(&["--config", cfg.to_str().unwrap(), "--command", "scale"])), 1);
}

#[test]
fn unwritable_output_is_infrastructure() {
    let o = fluidq(&["--model", "brownian:c=0.5", "--command", "scale", "--out", "/nonexistent/dir/w.csv"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn custom_model_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let r = report.to_str().unwrap();
    let o = fluidq(&["--model", "custom:family=brownian,c=0.5,drift=0.8", "--command", "validate", "--out", r]);
    assert_eq!(code(&o), 4);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["pass"], false);
    let failed: Vec<&str> = rep["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"custom.w0"));
    assert!(failed.contains(&"custom.drift_consistency"));

    let o = fluidq(&["--model", "custom:family=exponential_jumps,slope=1,rate=2,mean=1,drift=1", "--command", "validate", "--out", r]);
    assert_eq!(code(&o), 0, "{}", fs::read_to_string(&report).unwrap());
}

#[test]
fn brownian_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = fluidq(&[
        "--model", "brownian:c=0.5", "--command", "validate", "--cycles", "100000", "--seed", "5", "--out",
        report.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(code(&o), 0, "{text}");
    let rep: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["provenance"]["n_cycles"], 100000);
    assert!(rep["checks"].as_array().unwrap().len() > 50);
}
