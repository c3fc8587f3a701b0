//! End-to-end checks of the command-line interface through the built binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scatterline"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scatterline-cli-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_matrix(dir: &Path, name: &str, entries: (f64, f64, f64, f64)) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(
        &path,
        format!(
            r#"{{"m11":{},"m12":{},"m21":{},"m22":{}}}"#,
            entries.0, entries.1, entries.2, entries.3
        ),
    )
    .unwrap();
    path
}

fn write_square_well(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, "x,q\n-1.0,-2.0\n0.0,-2.0\n1.0,-2.0\n").unwrap();
    path
}

#[test]
fn forward_reflectionless_and_deterministic() {
    let dir = workdir("forward");
    let m = write_matrix(&dir, "m.json", (1.0, 0.0, 0.0, 1.0));
    let out = dir.join("sd.json");
    // identical configuration run twice: outputs must be byte-identical
    let mut captures = Vec::new();
    for _ in 0..2 {
        let status = bin()
            .args([
                "forward",
                "--matrix",
                m.to_str().unwrap(),
                "--support",
                "0.5",
                "--xi-min",
                "0.5",
                "--xi-max",
                "60",
                "--n-xi",
                "40",
                "--eta-max",
                "2",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        captures.push(std::fs::read(&out).unwrap());
    }
    assert!(captures[0] == captures[1], "repeated runs differ");

    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["config_hash"].is_string());
    let r_re = v["R_re"].as_array().unwrap();
    assert_eq!(r_re.len(), 80);
    assert!(r_re.iter().all(|x| x.as_f64().unwrap().abs() < 1e-10));
    assert_eq!(v["etas"].as_array().unwrap().len(), 0);
}

#[test]
fn invert_reflectionless_data() {
    let dir = workdir("invert");
    let m = write_matrix(&dir, "m.json", (1.0, 0.0, 0.0, 1.0));
    let sd = dir.join("sd.json");
    assert!(bin()
        .args([
            "forward",
            "--matrix",
            m.to_str().unwrap(),
            "--support",
            "0.5",
            "--xi-max",
            "80",
            "--n-xi",
            "60",
            "--out",
            sd.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let out = dir.join("mrec.json");
    assert!(bin()
        .args([
            "invert",
            "--data",
            sd.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--skip-traces",
        ])
        .status()
        .unwrap()
        .success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["case"], "diag");
    assert!(v["c2"].as_f64().unwrap().abs() < 1e-8);
    let branches = v["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 2);
    // reflectionless: both sign branches of the identity, m21 undetermined
    assert!((branches[0]["m11"].as_f64().unwrap().abs() - 1.0).abs() < 1e-8);
    assert!(branches[0]["m21"].is_null());
    let sel = v["selected_branch"].as_u64().unwrap() as usize;
    assert!(branches[sel]["m11"].as_f64().unwrap() > 0.0);
}

#[test]
fn invert_emits_traces_with_unitarity() {
    let dir = workdir("invert-traces");
    let m = write_matrix(&dir, "m.json", (2.0, 0.0, 0.0, 0.5));
    let sd = dir.join("sd.json");
    assert!(bin()
        .args([
            "forward",
            "--matrix",
            m.to_str().unwrap(),
            "--support",
            "0.5",
            "--xi-min",
            "0.5",
            "--xi-max",
            "80",
            "--n-xi",
            "80",
            "--out",
            sd.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let out = dir.join("mrec.json");
    let plot = dir.join("ab.csv");
    assert!(bin()
        .args([
            "invert",
            "--data",
            sd.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--emit-plot-data",
            plot.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["c2"].as_f64().unwrap() + 0.6).abs() < 1e-6);
    assert!(v["max_unitarity_residual"].as_f64().unwrap() < 1e-3);
    let a_re = v["a_re"].as_array().unwrap();
    assert!(!a_re.is_empty());
    // constant-modulus case: A = 1.25 and B = R A = -0.75 on the trace
    assert!(a_re.iter().all(|x| (x.as_f64().unwrap() - 1.25).abs() < 1e-3));
    let b_re = v["b_re"].as_array().unwrap();
    assert!(b_re.iter().all(|x| (x.as_f64().unwrap() + 0.75).abs() < 1e-3));
    let csv = std::fs::read_to_string(&plot).unwrap();
    assert!(csv.starts_with("# config_hash: "));
    assert!(csv.lines().nth(1).unwrap().starts_with("xi,"));
}

#[test]
fn recover_zero_potential() {
    let dir = workdir("recover");
    let m = write_matrix(&dir, "m.json", (1.0, 0.0, 0.0, 1.0));
    let sd = dir.join("sd.json");
    assert!(bin()
        .args([
            "forward",
            "--matrix",
            m.to_str().unwrap(),
            "--support",
            "1.0",
            "--xi-min",
            "0.45",
            "--xi-max",
            "60",
            "--n-xi",
            "200",
            "--out",
            sd.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let qhat = dir.join("qhat.csv");
    let misfit = dir.join("misfit.csv");
    assert!(bin()
        .args([
            "recover",
            "--data",
            sd.to_str().unwrap(),
            "--matrix",
            m.to_str().unwrap(),
            "--support",
            "1.0",
            "--cells",
            "4",
            "--reg",
            "1e-5",
            "--out",
            qhat.to_str().unwrap(),
            "--misfit-out",
            misfit.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&qhat).unwrap();
    assert!(text.starts_with("# config_hash: "));
    let cells: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(cells.len(), 5); // 4 cells + repeated closing sample
    assert!(cells.iter().all(|c| c.abs() < 1e-3), "{cells:?}");
    let hist = std::fs::read_to_string(&misfit).unwrap();
    assert!(hist.lines().nth(1).unwrap().starts_with("iter,misfit,gradnorm"));
}

#[test]
fn recover_four_cell_round_trip() {
    // files in, files out: generate data for a 4-cell potential, recover it
    let dir = workdir("roundtrip");
    let m = write_matrix(&dir, "m.json", (1.0, 0.0, 0.0, 1.0));
    let truth = [1.6, -1.2, 0.8, -0.5];
    let q = dir.join("q.csv");
    std::fs::write(
        &q,
        "x,q\n-1.0,1.6\n-0.5,-1.2\n0.0,0.8\n0.5,-0.5\n1.0,-0.5\n",
    )
    .unwrap();
    let sd = dir.join("sd.json");
    assert!(bin()
        .args([
            "forward",
            "--potential",
            q.to_str().unwrap(),
            "--matrix",
            m.to_str().unwrap(),
            "--support",
            "1.0",
            "--interpolation",
            "constant",
            "--xi-min",
            "0.45",
            "--xi-max",
            "80",
            "--n-xi",
            "700",
            "--log-floor",
            "1e-4",
            "--eta-max",
            "3",
            "--out",
            sd.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let qhat = dir.join("qhat.csv");
    assert!(bin()
        .args([
            "recover",
            "--data",
            sd.to_str().unwrap(),
            "--matrix",
            m.to_str().unwrap(),
            "--support",
            "1.0",
            "--cells",
            "4",
            "--reg",
            "1e-7",
            "--reg-sweep",
            "1e-6,1e-4",
            "--out",
            qhat.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&qhat).unwrap();
    let cells: Vec<f64> = text
        .lines()
        .skip(2)
        .take(4)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect();
    let num: f64 =
        cells.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = truth.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(num / den <= 0.01, "relative L2 {} (cells {cells:?})", num / den);
    // L-curve sweep artifact
    let sweep = std::fs::read_to_string(format!("{}.regsweep.csv", qhat.to_str().unwrap())).unwrap();
    assert!(sweep.lines().nth(1).unwrap().starts_with("reg,misfit,roughness"));
    assert_eq!(sweep.lines().count(), 4);
}

#[test]
fn exit_codes() {
    let dir = workdir("exit-codes");
    // missing data file: parse error
    let status = bin()
        .args(["invert", "--data", dir.join("missing.json").to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // non-unimodular matrix: domain violation
    let bad = write_matrix(&dir, "bad.json", (2.0, 0.0, 0.0, 2.0));
    let status = bin()
        .args([
            "forward",
            "--matrix",
            bad.to_str().unwrap(),
            "--out",
            dir.join("sd.json").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // zero inside the frequency range: domain violation
    let good = write_matrix(&dir, "m.json", (1.0, 0.0, 0.0, 1.0));
    let status = bin()
        .args([
            "forward",
            "--matrix",
            good.to_str().unwrap(),
            "--xi-min",
            "-1.0",
            "--out",
            dir.join("sd.json").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = workdir("config-file");
    let m = write_matrix(&dir, "m.json", (1.0, 0.0, 0.0, 1.0));
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"forward": {{"matrix": "{}", "support": 0.5, "n_xi": 16, "xi_max": 55.0, "out": "{}"}}}}"#,
            m.to_str().unwrap(),
            dir.join("from-file.json").to_str().unwrap()
        ),
    )
    .unwrap();
    // flag overrides the out path from the file
    let out = dir.join("from-flag.json");
    assert!(bin()
        .args([
            "forward",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    assert!(out.exists());
    assert!(!dir.join("from-file.json").exists());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["xi"].as_array().unwrap().len(), 32);
}

#[test]
fn validate_square_well_quick() {
    let dir = workdir("validate");
    let m = write_matrix(&dir, "m.json", (2.0, 0.0, 0.0, 0.5));
    let q = write_square_well(&dir, "q.csv");
    let report = dir.join("report.json");
    let status = bin()
        .args([
            "validate",
            "--suite",
            "appendix",
            "--matrix",
            m.to_str().unwrap(),
            "--potential",
            q.to_str().unwrap(),
            "--support",
            "1.0",
            "--interpolation",
            "constant",
            "--k-max",
            "8",
            "--report",
            report.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success(), "validate exited with {:?}", status.code());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    let entries = v["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["tag"] == "delta_inverse_bound_factor"));
    assert!(entries.iter().any(|e| e["tag"] == "w2_right_leading_slope"));
}

#[test]
fn threads_knob_keeps_output_identical() {
    // the thread count is not part of the run configuration; results must be
    // ordered deterministically regardless of it
    let dir = workdir("threads");
    let m = write_matrix(&dir, "m.json", (1.0, 1.0, 0.0, 1.0));
    let out = dir.join("sd.json");
    let mut captures = Vec::new();
    for threads in ["1", "4"] {
        assert!(bin()
            .args([
                "forward",
                "--threads",
                threads,
                "--matrix",
                m.to_str().unwrap(),
                "--support",
                "0.5",
                "--n-xi",
                "24",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap()
            .success());
        captures.push(std::fs::read(&out).unwrap());
    }
    assert!(captures[0] == captures[1], "thread count changed the output bytes");
}
