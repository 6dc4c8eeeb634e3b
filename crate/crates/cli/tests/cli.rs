use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn rkbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkbs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn help_succeeds_and_bad_usage_exits_one() {
    assert_eq!(rkbs(&["--help"]).status.code(), Some(0));
    assert_eq!(rkbs(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rkbs(&["fit", "--kernel", "exponential"]).status.code(), Some(1));
    assert_eq!(
        rkbs(&["audit", "--kernel", "exponential", "--condition", "a3"]).status.code(),
        Some(1)
    );
}

#[test]
fn audit_exponential_passes_and_reports_a3() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = rkbs(&[
        "audit",
        "--kernel",
        "exponential",
        "--trials",
        "20",
        "--grid",
        "301",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("A1: Pass"), "{text}");
    assert!(text.contains("A4: Pass"), "{text}");
    assert!(text.contains("A3: Proven"), "{text}");
    assert!(text.contains("not testable numerically"));

    let json: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    let reports = json.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        for key in ["condition", "verdict", "witness", "stats"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert_eq!(r["verdict"], "Pass");
    }
}

#[test]
fn audit_gaussian_a4_finds_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = rkbs(&[
        "audit",
        "--kernel",
        r#"{"family":"gaussian","params":{"sigma":1.0}}"#,
        "--condition",
        "a4",
        "--trials",
        "30",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    let r = &json[0];
    assert_eq!(r["verdict"], "Fail");
    assert!(r["witness"]["value"].as_f64().unwrap() > 1.0 + 1e-9);
}

#[test]
fn fit_rkbs_from_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("x.csv");
    let values = dir.path().join("y.csv");
    let xs: Vec<String> = (0..21).map(|i| format!("{}", -1.0 + 0.1 * i as f64)).collect();
    let ys: Vec<String> = (0..21)
        .map(|i| {
            let x = -1.0 + 0.1 * i as f64;
            format!("{}", (-x.abs()).exp())
        })
        .collect();
    fs::write(&points, xs.join(",")).unwrap();
    fs::write(&values, ys.join("\n")).unwrap();
    let out_path = dir.path().join("fit.json");
    let gram_path = dir.path().join("gram.json");
    let out = rkbs(&[
        "fit",
        "--kernel",
        "exponential",
        "--points",
        points.to_str().unwrap(),
        "--values",
        values.to_str().unwrap(),
        "--mu",
        "0.01",
        "--method",
        "rkbs",
        "--out",
        out_path.to_str().unwrap(),
        "--dump-gram",
        gram_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: Value = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
    assert!(fit["kkt_residual"].as_f64().unwrap() <= 1e-8);
    assert!(fit["objective"].as_f64().unwrap() >= 0.0);
    let coeffs = fit["coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 21);
    let nonzero = coeffs.iter().filter(|c| c.as_f64().unwrap() != 0.0).count();
    assert_eq!(fit["sparsity"].as_u64().unwrap() as usize, nonzero);
    // data is a single kernel section, so the fit is very sparse
    assert!(nonzero <= 3, "{nonzero}");
    assert_eq!(fit["function"]["side"], "left");
    assert_eq!(fit["function"]["kernel"]["family"], "exponential");

    let gram: Value = serde_json::from_str(&fs::read_to_string(gram_path).unwrap()).unwrap();
    let rows = gram.as_array().unwrap();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0].as_array().unwrap().len(), 21);
    assert_eq!(rows[3][3].as_f64().unwrap(), 1.0);
}

#[test]
fn fit_rkhs_inline_lists_is_dense() {
    let out = rkbs(&[
        "fit",
        "--kernel",
        "exponential",
        "--points",
        "-0.5,0,0.5,1",
        "--values",
        "1,2,0.5,1",
        "--mu",
        "0.1",
        "--method",
        "rkhs",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let fit: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(fit["sparsity"], 4);
    assert_eq!(fit["method"], "rkhs");
}

#[test]
fn numerical_failure_exits_two() {
    let out = rkbs(&[
        "fit", "--kernel", "gaussian", "--points", "0,1e-9,0.5", "--values", "1,2,3", "--mu", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("singular"), "{err}");
    assert!(err.contains("spacing"), "{err}");
}

#[test]
fn malformed_input_exits_one() {
    let cases: [&[&str]; 4] = [
        &["fit", "--kernel", "sinc", "--points", "0,1", "--values", "1,2", "--mu", "0.1"],
        &["fit", "--kernel", "exponential", "--points", "0,1", "--values", "1", "--mu", "0.1"],
        &["fit", "--kernel", "exponential", "--points", "0,1", "--values", "1,2", "--mu", "-1"],
        &["fit", "--kernel", "exponential", "--points", "0,zero", "--values", "1,2", "--mu", "1"],
    ];
    for args in cases {
        let out = rkbs(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn experiment_csv_is_deterministic() {
    let args = [
        "experiment", "--noise", "uniform", "--trials", "3", "--n", "40", "--seed", "7", "--mu-grid", "1e-4..1e0",
    ];
    let first = rkbs(&args);
    let second = rkbs(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "noise,method,mean_error,mean_sparsity,max_sparsity,trials,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("uniform,rkhs,"));
    assert!(lines[2].starts_with("uniform,rkbs,"));
    assert!(lines[1].ends_with(",3,7"));
}

#[test]
fn experiment_writes_csv_and_json_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let json = dir.path().join("out.json");
    let out = rkbs(&[
        "experiment",
        "--trials",
        "2",
        "--n",
        "30",
        "--mu-grid",
        "1e-3,1e-1",
        "--pepper-fraction",
        "0.5",
        "--out",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(csv).unwrap();
    let noises: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(noises, ["gaussian", "gaussian", "uniform", "uniform", "pepper", "pepper"]);

    let summaries: Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let summaries = summaries.as_array().unwrap();
    assert_eq!(summaries.len(), 3);
    for s in summaries {
        assert_eq!(s["records"].as_array().unwrap().len(), 2);
        for method in ["rkhs", "rkbs"] {
            let m = &s[method];
            assert!(m["max_sparsity"].as_f64().unwrap() >= m["mean_sparsity"].as_f64().unwrap());
        }
    }
    assert_eq!(summaries[2]["config"]["noise"]["fraction"], 0.5);
    assert!(summaries[2]["metadata"]["pepper_interpretation"]
        .as_str()
        .unwrap()
        .contains("0.5"));
}

#[test]
fn experiment_rejects_unknown_noise() {
    let out = rkbs(&["experiment", "--noise", "brown"]);
    assert_eq!(out.status.code(), Some(1));
}
