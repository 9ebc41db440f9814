use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adcov::data::load_csv;
use adcov::synthetic::{generate, GeneratorSpec};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn adcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adcov")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn test_command_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = adcov(&["test", "--generator", "independent_gaussian:n=40,seed=2", "--permutations", "99", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["command"], "test");
    assert_eq!(report["n"], 40);
    assert_eq!(report["permutations"], 99);
    assert_eq!(report["null_statistics"].as_array().unwrap().len(), 99);
    let v = report["v_hat"].as_f64().unwrap();
    let h = report["hsic_hat"].as_f64().unwrap();
    assert!((v - 4.0 * h).abs() <= 1e-12 * v.abs().max(1e-300));
    let p = report["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    assert!(stdout(&o).contains("p_value"));
}

#[test]
fn strong_dependence_hits_the_smallest_p_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = adcov(&["test", "--generator", "case2_2d:n=500,seed=1", "--permutations", "199", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["p_value"].as_f64().unwrap(), 1.0 / 200.0);
}

#[test]
fn malformed_csv_is_rejected_with_location() {
    let path = fixture("malformed.csv");
    let o = adcov(&["test", "--input", path.to_str().unwrap(), "--x-cols", "a", "--y-cols", "b"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("row 2") && err.contains("`b`") && err.contains("oops"), "{err}");
}

#[test]
fn missing_source_is_invalid_input() {
    let o = adcov(&["test"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_independent_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("oracle.json");
    let o = adcov(&[
        "oracle",
        fixture("independent.json").to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&report_path);
    assert_eq!(r["passed"], true);
    assert!(r["population_hsic"].as_f64().unwrap().abs() <= 1e-15);
    assert!(r["population_dcov"].as_f64().unwrap().abs() <= 1e-15);
}

#[test]
fn oracle_coupled_fixture() {
    // X = Y uniform on {0, 1}: E d d' = 1/2, (E d)^2 = 1/4, E[d(X,X') d(X,X'')] = 1/4,
    // so dCov^2 = 1/2 + 1/4 - 2/4 = 1/4.
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("oracle.json");
    let o = adcov(&[
        "oracle",
        fixture("coupled_two_atom.json").to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&report_path);
    assert!((r["population_dcov"].as_f64().unwrap() - 0.25).abs() <= 1e-15);
    assert!((r["population_hsic"].as_f64().unwrap() - 0.0625).abs() <= 1e-15);
    assert!((r["population_adc_sum"].as_f64().unwrap() - 0.0625).abs() <= 1e-14);
}

#[test]
fn oracle_rejects_indefinite_kernel() {
    let o = adcov(&[
        "oracle",
        fixture("coupled_two_atom.json").to_str().unwrap(),
        "--x-metric",
        "precomputed-kernel",
        "--x-matrix",
        fixture("indefinite_kernel.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("indefinite"), "{}", stderr(&o));
}

#[test]
fn generate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let o = adcov(&["generate", "--generator", "w_shape:n=30,seed=5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = generate(&"w_shape:n=30,seed=5".parse::<GeneratorSpec>().unwrap()).unwrap();
    let xs = expected.x.column_labels().to_vec();
    let ys = expected.y.column_labels().to_vec();
    let back = load_csv(&path, &xs, &ys).unwrap();
    assert_eq!(back.x.values(), expected.x.values());
    assert_eq!(back.y.values(), expected.y.values());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg_path,
        r#"{"generator": "parabola:n=60,seed=9", "permutations": 49, "seed": 11,
            "x_metric": "polynomial:alpha=0.5,beta=0.5", "y_metric": "double_exponential:theta=1"}"#,
    )
    .unwrap();
    let o = adcov(&[
        "test",
        "--config",
        cfg_path.to_str().unwrap(),
        "--permutations",
        "19",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["permutations"], 19);
    assert_eq!(report["seed"], 11);
    assert_eq!(report["statistic_path"], "kernel");
    assert_eq!(report["config"]["generator"], "parabola:n=60,seed=9");
}

#[test]
fn unknown_config_key_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    std::fs::write(&cfg_path, r#"{"generator": "circle:n=20", "permutatons": 5}"#).unwrap();
    let o = adcov(&["test", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn precomputed_matrices_match_data_mode() {
    let dir = tempfile::tempdir().unwrap();
    let spec: GeneratorSpec = "circle:n=25,seed=4".parse().unwrap();
    let ds = generate(&spec).unwrap();
    let write = |name: &str, m: &nalgebra::DMatrix<f64>| {
        let path = dir.path().join(name);
        let text: String = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect::<Vec<_>>().join(",") + "\n")
            .collect();
        std::fs::write(&path, text).unwrap();
        path
    };
    let dist = |s: &adcov::data::SampleSet| {
        let rows = s.rows();
        nalgebra::DMatrix::from_fn(rows.len(), rows.len(), |i, j| {
            rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        })
    };
    let xm = write("dx.csv", &dist(&ds.x));
    let ym = write("dy.csv", &dist(&ds.y));
    let m_out = dir.path().join("m");
    let g_out = dir.path().join("g");
    let o = adcov(&[
        "decompose",
        "--x-matrix",
        xm.to_str().unwrap(),
        "--y-matrix",
        ym.to_str().unwrap(),
        "--x-metric",
        "precomputed-distance",
        "--y-metric",
        "precomputed-distance",
        "--permutations",
        "9",
        "--out",
        m_out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = adcov(&["test", "--generator", "circle:n=25,seed=4", "--permutations", "9", "--out", g_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let vm = read_json(&m_out.join("report.json"))["v_hat"].as_f64().unwrap();
    let vg = read_json(&g_out.join("report.json"))["v_hat"].as_f64().unwrap();
    assert!((vm - vg).abs() <= 1e-12 * vg.abs(), "{vm} vs {vg}");
    assert!(m_out.join("contributions.csv").exists());
}

#[test]
fn decompose_prints_pair_table_and_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = adcov(&[
        "decompose",
        "--generator",
        "case1_2d:n=60,seed=3",
        "--permutations",
        "19",
        "--top",
        "5",
        "--features",
        "3,2",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("cum share"));
    let rows = text.lines().skip_while(|l| !l.contains("cum share")).skip(1).count();
    assert_eq!(rows, 5);
    let bundle = read_json(&dir.path().join("bundle.json"));
    let files: Vec<&str> =
        bundle["artifacts"].as_array().unwrap().iter().map(|a| a["file"].as_str().unwrap()).collect();
    for f in ["adc.json", "contributions.csv", "corr_raw.svg", "corr_weighted.svg", "coverage.svg", "report.json"] {
        assert!(files.contains(&f), "{f} missing from {files:?}");
        assert!(dir.path().join(f).exists());
    }
}
