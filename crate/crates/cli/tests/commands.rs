use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gaussent::channels::{classical_noise, identity, phase_conjugate, pure_loss, GaussianChannel};
use gaussent::states::{tmss, vacuum};
use gaussent::symplectic::CovarianceMatrix;
use gaussent_cli::{exit, load_state, save_channel, save_state};
use nalgebra::DMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaussent"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn channel_file(dir: &TempDir, name: &str, ch: &GaussianChannel) -> PathBuf {
    let p = dir.path().join(name);
    save_channel(&p, ch).unwrap();
    p
}

fn state_file(dir: &TempDir, name: &str, cm: &CovarianceMatrix) -> PathBuf {
    let p = dir.path().join(name);
    save_state(&p, cm).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_catalog_channels() {
    let dir = TempDir::new().unwrap();
    let loss = channel_file(&dir, "loss.json", &pure_loss(0.3).unwrap());
    let o = run(&["classify", s(&loss)]);
    assert_eq!(code(&o), exit::OK);
    assert_eq!(stdout_json(&o)["kind"], "Preserving");

    let noise = channel_file(&dir, "noise.json", &classical_noise(2.0).unwrap());
    let o = run(&["classify", s(&noise)]);
    assert_eq!(code(&o), exit::DISENTANGLING);
    let v = stdout_json(&o);
    assert_eq!(v["kind"], "Disentangling");
    assert_eq!(v["margin"].as_f64().unwrap(), 12.0);

    let id = channel_file(&dir, "id.json", &identity());
    let o = run(&["classify", s(&id)]);
    assert_eq!(code(&o), exit::OK);
    let v = stdout_json(&o);
    assert_eq!(v["margin"].as_f64().unwrap(), -4.0);
    for key in ["det_f", "det_g", "physicality_margin"] {
        assert!(v[key].is_number(), "{key}");
    }
}

#[test]
fn classify_boundary_exit_code() {
    let dir = TempDir::new().unwrap();
    // f = 0, g = I/2: 4 det g = 1 = (det f + 1)^2.
    let p = dir.path().join("b.json");
    std::fs::write(
        &p,
        r#"{"schema_version":"1","f":[0,0,0,0],"g":[0.5,0,0,0.5]}"#,
    )
    .unwrap();
    let o = run(&["classify", s(&p)]);
    assert_eq!(code(&o), exit::BOUNDARY);
    assert_eq!(stdout_json(&o)["kind"], "Boundary");
}

#[test]
fn invalid_and_malformed_channels() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    // Noiseless amplifier violates the uncertainty constraint.
    std::fs::write(
        &bad,
        r#"{"schema_version":"1","f":[2,0,0,2],"g":[0,0,0,0]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["classify", s(&bad)])), exit::INVALID_CHANNEL);
    let o = run(&["classify", "--no-validate", s(&bad)]);
    assert_eq!(code(&o), exit::OK);
    assert_eq!(stdout_json(&o)["valid"], false);

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    assert_eq!(code(&run(&["classify", s(&garbage)])), exit::MALFORMED);
    let short = dir.path().join("short.json");
    std::fs::write(
        &short,
        r#"{"schema_version":"1","f":[1,0,0],"g":[0,0,0,0]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["classify", s(&short)])), exit::MALFORMED);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&[])), exit::USAGE);
    assert_eq!(code(&run(&["frobnicate"])), exit::USAGE);
    assert_eq!(code(&run(&["verify", "--trials", "0"])), exit::USAGE);
    assert_eq!(
        code(&run(&["verify", "--trials", "10", "--modes", "9"])),
        exit::USAGE
    );
    assert_eq!(code(&run(&["--help"])), exit::OK);
}

#[test]
fn evolve_identity_is_bit_identical() {
    let dir = TempDir::new().unwrap();
    let input = tmss(1.0).unwrap();
    let st = state_file(&dir, "in.json", &input);
    let id = channel_file(&dir, "id.json", &identity());
    let out = dir.path().join("out.json");
    let o = run(&["evolve", s(&st), s(&id), "--out", s(&out)]);
    assert_eq!(code(&o), exit::OK);
    let evolved = load_state(&out).unwrap();
    assert_eq!(evolved.to_row_major(), input.to_row_major());
}

#[test]
fn evolve_verdicts_follow_channel() {
    let dir = TempDir::new().unwrap();
    let st = state_file(&dir, "in.json", &tmss(1.0).unwrap());
    let out = dir.path().join("out.json");

    let loss = channel_file(&dir, "loss.json", &pure_loss(0.5).unwrap());
    let o = run(&["evolve", s(&st), s(&loss), "--mode", "1", "--out", s(&out)]);
    assert_eq!(code(&o), exit::OK);
    let v = stdout_json(&o);
    assert_eq!(v["physical"], true);
    assert_eq!(v["separability"]["separable"], false);

    let pc = channel_file(&dir, "pc.json", &phase_conjugate(1.0).unwrap());
    let o = run(&["evolve", s(&st), s(&pc), "--out", s(&out)]);
    let v = stdout_json(&o);
    assert_eq!(v["physical"], true);
    assert_eq!(v["separability"]["separable"], true);

    let o = run(&["evolve", s(&st), s(&loss), "--mode", "2", "--out", s(&out)]);
    assert_eq!(code(&o), exit::MODE_OUT_OF_RANGE);
}

#[test]
fn check_examples() {
    let dir = TempDir::new().unwrap();
    let v = stdout_json(&run(&[
        "check",
        s(&state_file(&dir, "vac.json", &vacuum(2).unwrap())),
    ]));
    assert_eq!(v["physical"], true);
    assert_eq!(v["determinant_form"]["physical"], true);
    assert_eq!(v["separability"]["separable"], true);
    assert_eq!(v["log_negativity"]["value"].as_f64().unwrap(), 0.0);

    let o = run(&[
        "check",
        s(&state_file(&dir, "tmss.json", &tmss(1.0).unwrap())),
        "--mode",
        "1",
    ]);
    let v = stdout_json(&o);
    assert_eq!(v["physical"], true);
    assert_eq!(v["separability"]["separable"], false);
    assert_eq!(v["ppt"]["separable"], false);
    // With the ½cosh r / ½sinh r parametrization ν̃_min = e^(-r)/2, so E_N = r.
    let e = v["log_negativity"]["value"].as_f64().unwrap();
    assert!((e - 1.0).abs() < 1e-6, "E_N = {e}");

    let squashed = CovarianceMatrix::new(DMatrix::identity(4, 4) * 0.25).unwrap();
    let v = stdout_json(&run(&["check", s(&state_file(&dir, "sq.json", &squashed))]));
    assert_eq!(v["physical"], false);
    assert_eq!(v["determinant_form"]["physical"], false);
    assert!(v["separability"].is_null());
    assert!(v["log_negativity"].is_null());

    let o = run(&[
        "check",
        s(&state_file(&dir, "vac2.json", &vacuum(2).unwrap())),
        "--mode",
        "5",
    ]);
    assert_eq!(code(&o), exit::MODE_OUT_OF_RANGE);
}

#[test]
fn state_file_validation() {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let ok = r#"{"schema_version":"1","n_modes":1,"ordering":"q1p1q2p2","vacuum_variance":0.5,"matrix":[0.5,0,0,0.5]}"#;
    assert_eq!(code(&run(&["check", s(&write("ok.json", ok))])), exit::OK);
    for (name, body) in [
        ("order", ok.replace("q1p1q2p2", "q1q2p1p2")),
        (
            "vac",
            ok.replace("\"vacuum_variance\":0.5", "\"vacuum_variance\":1"),
        ),
        ("len", ok.replace("[0.5,0,0,0.5]", "[0.5,0,0.5]")),
        ("asym", ok.replace("[0.5,0,0,0.5]", "[0.5,1e-6,0,0.5]")),
    ] {
        let o = run(&["check", s(&write(name, &body))]);
        assert_eq!(code(&o), exit::MALFORMED, "{name}");
    }
    // Asymmetry inside the load tolerance is accepted.
    let near = ok.replace("[0.5,0,0,0.5]", "[0.5,1e-10,0,0.5]");
    assert_eq!(code(&run(&["check", s(&write("near", &near))])), exit::OK);
}

#[test]
fn verify_campaigns() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&[
        "verify",
        "--campaign",
        "prop1",
        "--trials",
        "10000",
        "--modes",
        "2",
        "--seed",
        "42",
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&o), exit::OK);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["trials_run"], 10000);
    assert_eq!(v["seed"], 42);

    let o = run(&["verify", "--campaign", "detf0", "--trials", "1000"]);
    assert_eq!(code(&o), exit::OK);
    assert_eq!(stdout_json(&o)["pass"], true);

    let o = run(&[
        "verify",
        "--campaign",
        "physicality",
        "--trials",
        "2000",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&o), exit::OK);
}

#[test]
fn verify_is_reproducible() {
    let args = ["verify", "--trials", "300", "--modes", "3", "--seed", "9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn sweep_csv_output() {
    let dir = TempDir::new().unwrap();
    let id = channel_file(&dir, "id.json", &identity());
    let o = run(&["sweep", s(&id), "--r-grid", "0.5,1.0"]);
    assert_eq!(code(&o), exit::OK);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,E_in,E_out,ratio");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        assert!(line.ends_with(",1"), "{line}");
    }

    let loss = channel_file(&dir, "loss.json", &pure_loss(0.5).unwrap());
    let csv = dir.path().join("loss.csv");
    assert_eq!(code(&run(&["sweep", s(&loss), "--out", s(&csv)])), exit::OK);
    let text = std::fs::read_to_string(&csv).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 20);
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
        - ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 0.01, "spread {spread}");
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let digits = field
            .chars()
            .take_while(|c| *c != 'e')
            .filter(|c| c.is_ascii_digit())
            .collect::<String>();
        assert!(digits.trim_start_matches('0').len() <= 12, "{field}");
    }

    let noise = channel_file(&dir, "noise.json", &classical_noise(2.0).unwrap());
    let o = run(&["sweep", s(&noise)]);
    assert_eq!(code(&o), exit::OK);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(2) == Some("0")));

    assert_eq!(
        code(&run(&["sweep", s(&id), "--r-grid", "0.5,-1"])),
        exit::USAGE
    );
}
