use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use schur_dilate::json::{self, FreedomJson, MatrixJson, ParamsJson};
use schur_dilate::linalg::{identity, real_diag, ComplexMatrix};
use schur_dilate::sample::{random_contraction, random_psd, random_unitary, rng_from_seed};
use schur_dilate::Tolerances;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_schur-dilate"));
    cmd.args(args).env_remove("SCHUR_DILATE_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn roundtrip(out: &Output) -> f64 {
    let err = stderr(out);
    let line = err.lines().find(|l| l.starts_with("roundtrip=")).expect("roundtrip line");
    line["roundtrip=".len()..].parse().unwrap()
}

fn write_matrix(dir: &TempDir, name: &str, a: &ComplexMatrix) -> String {
    let path = dir.path().join(name);
    fs::write(&path, json::matrix_to_string(a)).unwrap();
    path.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn fx(name: &str) -> String {
    fixture(name).to_str().unwrap().to_string()
}

fn report(out: &Output) -> Value {
    serde_json::from_str(stdout(out).trim()).expect("report JSON")
}

#[test]
fn param_identity_has_zero_gammas() {
    let dir = TempDir::new().unwrap();
    let input = write_matrix(&dir, "id.json", &identity(4));
    let out_path = path(&dir, "p.json");
    let out = run(&["param", "--kind", "psd", "--shape", "2+2", "--in", &input, "--out", &out_path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("roundtrip=0.0e0"));
    let p: ParamsJson = json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(p.gammas.len(), 1);
    assert!(p.gammas[0].data.iter().flatten().all(|&x| x == 0.0));
}

#[test]
fn param_scalar_fixture_forces_gamma() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "p.json");
    let out = run(&["param", "--kind", "psd", "--shape", "1+1", "--in", &fx("scalar_psd.json"), "--out", &out_path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let p: ParamsJson = json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let g = p.gammas[0].to_matrix().unwrap();
    assert!((g[(0, 0)].re - 0.5).abs() < 1e-15 && g[(0, 0)].im.abs() < 1e-15);
}

#[test]
fn param_random_fixtures_round_trip() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from_seed(900);
    let cases = [
        ("row", "2:1+2+1", 2, 4),
        ("column", "1+2+1:2", 4, 2),
        ("matrix", "2+1:1+2", 3, 3),
        ("psd", "1+2+2", 5, 5),
    ];
    for (kind, shape, r, c) in cases {
        let a = if kind == "psd" {
            random_psd(&mut rng, r)
        } else {
            random_contraction(&mut rng, r, c, 0.95)
        };
        let input = write_matrix(&dir, "a.json", &a);
        let params = path(&dir, "p.json");
        let out = run(&["param", "--kind", kind, "--shape", shape, "--in", &input, "--out", &params]);
        assert_eq!(code(&out), 0, "{kind}: {}", stderr(&out));
        assert!(roundtrip(&out) <= 1e-8);

        let rebuilt = path(&dir, "r.json");
        let out = run(&["param", "--reconstruct", "--in", &params, "--out", &rebuilt]);
        assert_eq!(code(&out), 0, "{kind}: {}", stderr(&out));
        assert!(roundtrip(&out) <= 1e-8);
        let b = json::matrix_from_str(&fs::read_to_string(&rebuilt).unwrap()).unwrap();
        assert!((b - &a).norm() <= 1e-8, "{kind}");
    }
}

#[test]
fn param_precondition_violations_exit_2() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "p.json");
    let not_psd = write_matrix(&dir, "n.json", &real_diag(&[1.0, -0.5]));
    let out = run(&["param", "--kind", "psd", "--shape", "1+1", "--in", &not_psd, "--out", &out_path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("positive semidefinite"));

    let big = write_matrix(&dir, "b.json", &real_diag(&[1.5, 0.2]));
    let out = run(&["param", "--kind", "matrix", "--shape", "1+1", "--in", &big, "--out", &out_path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not a contraction"));
    assert!(!Path::new(&out_path).exists());
}

#[test]
fn io_and_parse_failures_exit_1() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "p.json");
    let missing = path(&dir, "missing.json");
    let out = run(&["param", "--kind", "psd", "--shape", "1+1", "--in", &missing, "--out", &out_path]);
    assert_eq!(code(&out), 1);

    let garbage = path(&dir, "g.json");
    fs::write(&garbage, "{\"rows\": 2").unwrap();
    let out = run(&["param", "--kind", "psd", "--shape", "1+1", "--in", &garbage, "--out", &out_path]);
    assert_eq!(code(&out), 1);

    let input = fx("scalar_psd.json");
    let out = run(&["param", "--kind", "psd", "--shape", "1+x", "--in", &input, "--out", &out_path]);
    assert_eq!(code(&out), 1);
    let out = run(&["param", "--kind", "lower", "--shape", "1+1", "--in", &input, "--out", &out_path]);
    assert_eq!(code(&out), 1);
    let out = run(&["param", "--kind", "psd", "--shape", "1+1", "--in", &input, "--out", &out_path, "--bogus"]);
    assert_eq!(code(&out), 1);
    let out = run_env(
        &["param", "--kind", "psd", "--shape", "1+1", "--in", &input, "--out", &out_path],
        &[("SCHUR_DILATE_TOL", "tiny")],
    );
    assert_eq!(code(&out), 1);
    let out = run(&["witness", "--family", "nope", "--witness", "transpose", "--trials", "1", "--seed", "0", "--out", &out_path]);
    assert_eq!(code(&out), 1);
    let out = run(&["dilate", "--out", &out_path]);
    assert_eq!(code(&out), 1);
}

#[test]
fn tolerance_override_is_honoured() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "p.json");
    let slightly_negative = write_matrix(&dir, "n.json", &real_diag(&[1.0, -1e-6]));
    let args = ["param", "--kind", "psd", "--shape", "1+1", "--in", &slightly_negative, "--out", &out_path];
    assert_eq!(code(&run(&args)), 2);
    assert_eq!(code(&run_env(&args, &[("SCHUR_DILATE_TOL", "1e-4")])), 0);
}

#[test]
fn dilate_basis_povm_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["dilate", "--povm", &fx("basis_povm.json"), "--out", &path(&dir, "d.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["passed"], Value::Bool(true));
    assert_eq!(r["size"], 6);
    assert!(r["compression"].as_f64().unwrap() <= 1e-15);
}

#[test]
fn dilate_trine_gives_five_dimensional_unitary() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "d.json");
    let out = run(&["dilate", "--povm", &fx("trine_povm.json"), "--out", &out_path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    assert!(r["compression"].as_f64().unwrap() <= 1e-10);
    assert!(r["orthogonality"].as_f64().unwrap() <= 1e-9);
    let d: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(d["unitary"]["rows"], 5);
    assert_eq!(d["system_embedding"], serde_json::json!([0, 2]));
}

#[test]
fn dilate_amplitude_damping_simulation() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "dilate", "--channel", &fx("amplitude_damping.json"), "--out", &path(&dir, "d.json"),
        "--simulate", "20", "--seed", "7",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["simulated"], 20);
    assert!(r["max_deviation"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn dilate_accepts_freedom_and_padding() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from_seed(901);
    let freedom = FreedomJson {
        u1: MatrixJson::from(&random_unitary(&mut rng, 2)),
        u2: MatrixJson::from(&random_unitary(&mut rng, 4)),
    };
    let fpath = path(&dir, "f.json");
    fs::write(&fpath, json::to_string(&freedom)).unwrap();
    let out = run(&[
        "dilate", "--channel", &fx("amplitude_damping.json"), "--freedom", &fpath, "--pad", "4",
        "--out", &path(&dir, "d.json"), "--simulate", "5", "--seed", "1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["size"], 8);
    assert_eq!(r["ancilla_dim"], 4);

    let bad = FreedomJson {
        u1: MatrixJson::from(&real_diag(&[1.0, 2.0])),
        u2: MatrixJson::from(&identity(4)),
    };
    fs::write(&fpath, json::to_string(&bad)).unwrap();
    let out = run(&["dilate", "--channel", &fx("amplitude_damping.json"), "--freedom", &fpath, "--out", &path(&dir, "d.json")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn dilate_domain_failures_exit_2() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "d.json");
    let incomplete = path(&dir, "p.json");
    fs::write(&incomplete, r#"{"dim":2,"vectors":[[[1,0],[0,0]]]}"#).unwrap();
    let out = run(&["dilate", "--povm", &incomplete, "--out", &out_path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("resolve the identity"));

    let lossy = path(&dir, "c.json");
    let half = MatrixJson::from(&real_diag(&[0.9, 0.5]));
    fs::write(&lossy, format!(r#"{{"in_dim":2,"out_dim":2,"kraus":[{}]}}"#, json::to_string(&half))).unwrap();
    let out = run(&["dilate", "--channel", &lossy, "--out", &out_path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("trace preserving"));
    let out = run(&["dilate", "--channel", &lossy, "--absorb", "--out", &out_path, "--simulate", "3", "--seed", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = run(&["dilate", "--channel", &fx("amplitude_damping.json"), "--pad", "2", "--out", &out_path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("below the minimum"));
}

#[test]
fn loosened_tolerance_failing_report_exits_3() {
    // accepted at the loose tolerance, the missing weight shows up in the
    // extra outcomes and fails the report
    let dir = TempDir::new().unwrap();
    let almost = path(&dir, "p.json");
    let s = (0.5_f64 - 1e-7).sqrt();
    fs::write(&almost, format!(r#"{{"dim":1,"vectors":[[[{s},0]],[[{s},0]]]}}"#)).unwrap();
    let args = ["dilate", "--povm", &almost, "--out", &path(&dir, "d.json")];
    assert_eq!(code(&run(&args)), 2);
    let out = run_env(&args, &[("SCHUR_DILATE_TOL", "1e-4")]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert_eq!(report(&out)["passed"], Value::Bool(false));
}

fn witness(args: &[&str], out_path: &str) -> Output {
    let mut full = vec!["witness"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out_path]);
    run(&full)
}

fn jsonl(path: &str) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn witness_toeplitz_transpose_passes() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "w.jsonl");
    let out = witness(&["--family", "toeplitz2", "--witness", "transpose", "--trials", "100", "--seed", "3"], &out_path);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let lines = jsonl(&out_path);
    assert_eq!(lines.len(), 100);
    assert!(lines.iter().all(|l| l["passed"] == Value::Bool(true)));
    assert_eq!(lines[0]["seed"], 3);
    assert_eq!(lines[99]["seed"], 102);
    assert!(stdout(&out).contains("trials=100 passed=100"));
}

#[test]
fn witness_span_choi_passes() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "w.jsonl");
    let out = witness(&["--family", "span3", "--witness", "choi3", "--trials", "100", "--seed", "11"], &out_path);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let lines = jsonl(&out_path);
    assert_eq!(lines.len(), 100);
    assert_eq!(lines[0]["family"], "span3-1");
    assert_eq!(lines[1]["family"], "span3-2");
    assert_eq!(lines[2]["family"], "span3-3");
}

#[test]
fn witness_bell_control_fails() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "w.jsonl");
    let out = witness(&["--family", "bell-control", "--witness", "transpose", "--trials", "1", "--seed", "0"], &out_path);
    assert_ne!(code(&out), 0);
    let lines = jsonl(&out_path);
    assert_eq!(lines[0]["passed"], Value::Bool(false));
    assert!((lines[0]["min_eig"].as_f64().unwrap() + 0.5).abs() <= 1e-10);
}

#[test]
fn witness_unsupported_combination_exits_2() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "w.jsonl");
    let out = witness(&["--family", "toeplitz2", "--witness", "choi3", "--trials", "1", "--seed", "0"], &out_path);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unsupported combination"));
    let out = witness(&["--family", "toeplitz2", "--witness", "transpose", "--blocks", "3", "--trials", "1", "--seed", "0"], &out_path);
    assert_eq!(code(&out), 2);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.jsonl");
    let b = path(&dir, "b.jsonl");
    let args = ["--family", "arrow-second", "--witness", "reduction", "--trials", "40", "--seed", "5", "--block-dim", "3", "--blocks", "4"];
    let (ra, rb) = (witness(&args, &a), witness(&args, &b));
    assert_eq!(code(&ra), 0);
    assert_eq!(stdout(&ra), stdout(&rb));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let (da, db) = (path(&dir, "a.json"), path(&dir, "b.json"));
    let run_dilate = |out: &str| {
        run(&["dilate", "--channel", &fx("amplitude_damping.json"), "--out", out, "--simulate", "10", "--seed", "9"])
    };
    let (oa, ob) = (run_dilate(&da), run_dilate(&db));
    assert_eq!(stdout(&oa), stdout(&ob));
    assert_eq!(fs::read(&da).unwrap(), fs::read(&db).unwrap());

    let mut rng = rng_from_seed(902);
    let input = write_matrix(&dir, "m.json", &random_contraction(&mut rng, 3, 3, 0.9));
    let (pa, pb) = (path(&dir, "pa.json"), path(&dir, "pb.json"));
    run(&["param", "--kind", "matrix", "--shape", "1+2", "--in", &input, "--out", &pa]);
    run(&["param", "--kind", "matrix", "--shape", "1+2", "--in", &input, "--out", &pb]);
    assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap());
    let p: ParamsJson = json::from_str(&fs::read_to_string(&pa).unwrap()).unwrap();
    p.to_params(&Tolerances::default()).unwrap();
}
