use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qinstr::effects::{Effect, State};
use qinstr::instruments::{luders_instrument, Instrument};
use qinstr::io::{self, Object};
use qinstr::observables::{fourier_mub, Observable};
use qinstr::HMatrix;
use tempfile::TempDir;

fn qinstr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qinstr"))
        .args(args)
        .env_remove("QINSTR_TOL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn qubit_z_x() -> (Observable, Observable) {
    let (id, f) = fourier_mub(2).unwrap();
    (Observable::from_basis(&id).unwrap(), Observable::from_basis(&f).unwrap())
}

fn save(dir: &TempDir, name: &str, obj: Object) -> PathBuf {
    let p = path(dir, name);
    io::save(&obj, &p).unwrap();
    p
}

fn load_instrument(p: &Path) -> Instrument {
    match io::load(p).unwrap() {
        Object::Instrument(i) => i,
        other => panic!("expected instrument, got {}", other.kind()),
    }
}

fn load_observable(p: &Path) -> Observable {
    match io::load(p).unwrap() {
        Object::Observable(o) => o,
        other => panic!("expected observable, got {}", other.kind()),
    }
}

#[test]
fn joint_probability_of_z_then_x_on_mixed_state() {
    let dir = TempDir::new().unwrap();
    let (z, x) = qubit_z_x();
    let rho = save(&dir, "rho.json", Object::State(State::maximally_mixed(2)));
    let z = save(&dir, "z.json", Object::Observable(z));
    let x = save(&dir, "x.json", Object::Observable(x));
    let out_path = path(&dir, "p.json");
    let out = qinstr(&[
        "compute", "joint-prob", s(&rho), s(&z), s(&x), "--x", "0", "--y", "0", "-o", s(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let p: f64 = stdout(&out).trim().parse().unwrap();
    assert!((p - 0.25).abs() < 1e-12, "p = {p}");
    match io::load(&out_path).unwrap() {
        Object::Probability(q) => assert_eq!(q, p),
        other => panic!("expected probability, got {}", other.kind()),
    }
}

#[test]
fn k_map_then_j_map_returns_the_observable() {
    let dir = TempDir::new().unwrap();
    let (z, _) = qubit_z_x();
    let zp = save(&dir, "z.json", Object::Observable(z.clone()));
    let k = path(&dir, "k.json");
    let j = path(&dir, "j.json");
    assert_eq!(code(&qinstr(&["compute", "k-map", s(&zp), "-o", s(&k)])), 0);
    assert!(load_instrument(&k).max_distance(&luders_instrument(&z)).unwrap() < 1e-12);
    assert_eq!(code(&qinstr(&["compute", "j-map", s(&k), "-o", s(&j)])), 0);
    assert!(load_observable(&j).max_distance(&z).unwrap() < 1e-12);
}

#[test]
fn dilation_round_trips_through_model_instrument() {
    let dir = TempDir::new().unwrap();
    let instr = path(&dir, "i.json");
    let fimm = path(&dir, "m.json");
    let back = path(&dir, "back.json");
    let gen = qinstr(&["random", "instrument", "--dim", "3", "--outcomes", "3", "--seed", "7", "-o", s(&instr)]);
    assert_eq!(code(&gen), 0);
    assert_eq!(code(&qinstr(&["compute", "dilate", s(&instr), "-o", s(&fimm)])), 0);
    assert_eq!(code(&qinstr(&["compute", "model-instr", s(&fimm), "-o", s(&back)])), 0);
    let r = load_instrument(&back).max_distance(&load_instrument(&instr)).unwrap();
    assert!(r < 1e-7, "residual {r}");
}

#[test]
fn random_output_is_determined_by_seed() {
    let dir = TempDir::new().unwrap();
    for kind in ["effect", "state", "observable", "instrument", "fimm", "stochastic"] {
        let a = path(&dir, "a.json");
        let b = path(&dir, "b.json");
        let c = path(&dir, "c.json");
        for (p, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
            let out = qinstr(&["random", kind, "--dim", "2", "--outcomes", "3", "--seed", seed, "-o", s(p)]);
            assert_eq!(code(&out), 0, "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let read = |p: &PathBuf| std::fs::read(p).unwrap();
        assert_eq!(read(&a), read(&b), "{kind}");
        assert_ne!(read(&a), read(&c), "{kind}");
        assert_eq!(code(&qinstr(&["validate", s(&a)])), 0, "{kind}");
    }
}

#[test]
fn random_state_has_unit_trace() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "rho.json");
    assert_eq!(code(&qinstr(&["random", "state", "--dim", "4", "--seed", "1", "-o", s(&p)])), 0);
    match io::load(&p).unwrap() {
        Object::State(rho) => assert!((rho.matrix().real_trace() - 1.0).abs() < 1e-10),
        other => panic!("expected state, got {}", other.kind()),
    }
}

#[test]
fn random_rejects_out_of_range_dimension() {
    let dir = TempDir::new().unwrap();
    let out = qinstr(&["random", "state", "--dim", "40", "-o", s(&path(&dir, "x.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = save(
        &dir,
        "good.json",
        Object::Effect(Effect::new(HMatrix::from_real_diag(&[0.2, 0.9])).unwrap()),
    );
    let out = qinstr(&["validate", s(&good)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("valid "));

    // effects summing to diag(1, 1.1)
    let bad = path(&dir, "bad.json");
    std::fs::write(
        &bad,
        r#"{"dim": 2, "kind": "observable", "labels": ["0", "1"],
            "effects": [[[0.5, 0], [0, 0.5]], [[0.5, 0], [0, 0.6]]]}"#,
    )
    .unwrap();
    assert_eq!(code(&qinstr(&["validate", s(&bad)])), 3);

    let not_psd = path(&dir, "neg.json");
    std::fs::write(&not_psd, r#"{"dim": 2, "kind": "state", "matrix": [[1.2, 0], [0, -0.2]]}"#).unwrap();
    assert_eq!(code(&qinstr(&["validate", s(&not_psd)])), 3);

    assert_eq!(code(&qinstr(&["validate", s(&path(&dir, "missing.json"))])), 2);
}

#[test]
fn canonical_output_is_stable_under_resave() {
    let dir = TempDir::new().unwrap();
    let first = path(&dir, "first.json");
    assert_eq!(code(&qinstr(&["random", "fimm", "--dim", "2", "--seed", "3", "-o", s(&first)])), 0);
    let text = std::fs::read_to_string(&first).unwrap();
    let again = io::to_canonical_string(&io::from_str(&text).unwrap());
    assert_eq!(text.trim_end(), again.trim_end());
}

#[test]
fn compute_rejects_wrong_input_kinds() {
    let dir = TempDir::new().unwrap();
    let rho = save(&dir, "rho.json", Object::State(State::maximally_mixed(2)));
    let out = qinstr(&["compute", "j-map", s(&rho), "-o", s(&path(&dir, "o.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_single_suite_passes() {
    let out = qinstr(&["verify", "--suite", "thm-2.1", "--seed", "42"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("thm-2.1"));
    let out = qinstr(&["verify", "--suite", "ex-1"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn verify_probe_reports_unknown_without_failing() {
    let out = qinstr(&["verify", "--suite", "conj-3.3-converse", "--trials", "3"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("unknown"));
}

#[test]
fn verify_rejects_unknown_suite() {
    assert_eq!(code(&qinstr(&["verify", "--suite", "no-such-suite"])), 2);
}

#[test]
fn verify_fails_under_tiny_tolerance_scale() {
    let out = Command::new(env!("CARGO_BIN_EXE_qinstr"))
        .args(["verify", "--suite", "thm-2.1", "--trials", "5"])
        .env("QINSTR_TOL", "1e-12")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(code(&qinstr(&[])), 2);
}
