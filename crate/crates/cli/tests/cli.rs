//! End-to-end tests of the `hm` binary: exit codes, JSON determinism, and
//! agreement with the library on fixture inputs.

use std::path::PathBuf;
use std::process::{Command, Output};

use hecke_massey::geometry::{quad_form_of, DegreeTriple, ModuliParams, QuadForm};
use hecke_massey::indeftheta::{orbit_antisymmetrize, theta_indef, CosetFunction2};
use hecke_massey::lattice::Lattice2;
use hecke_massey::massey::{f_from_system, universal_massey_kernel_exact};
use hecke_massey::numeric::{rat, rat_int};

fn hm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hm-cli-fixtures-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_fixture(name: &str, content: &str) -> String {
    let path = fixture_dir().join(name);
    std::fs::write(&path, content).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn orbit_fixture_paths() -> (String, String) {
    let q = QuadForm::new(rat_int(1), rat(3, 2), rat_int(1)).unwrap();
    let f = orbit_antisymmetrize(
        &q,
        Lattice2::standard(),
        Lattice2::scaled_standard(&rat_int(3)).unwrap(),
        [rat_int(1), rat_int(1)],
    )
    .unwrap();
    (
        write_fixture("orbit-form.json", &q.to_json().to_string()),
        write_fixture("orbit-f.json", &f.to_json().to_string()),
    )
}

#[test]
fn series_of_zero_function_prints_zero() {
    let q = quad_form_of(&DegreeTriple::new(2, 2, 3).unwrap());
    let f = CosetFunction2::zero_function(Lattice2::standard(), Lattice2::standard()).unwrap();
    let form = write_fixture("zero-form.json", &q.to_json().to_string());
    let func = write_fixture("zero-f.json", &f.to_json().to_string());
    let out = hm(&["series", "--form", &form, "--function", &func]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(j["terms"].as_array().unwrap().len(), 0);

    let out = hm(&[
        "series", "--form", &form, "--function", &func, "--output", "text",
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("0"));
}

#[test]
fn series_rejects_malformed_json_with_position() {
    let bad = write_fixture("bad.json", "{\"a\": \"1/1\", ");
    let out = hm(&["series", "--form", &bad, "--function", &bad]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");
}

#[test]
fn series_matches_library_on_kernel_fixture() {
    let t = DegreeTriple::new(2, 2, 3).unwrap();
    let q = quad_form_of(&t);
    let c = &universal_massey_kernel_exact(&t).unwrap().basis[0];
    let f = f_from_system(&t, &ModuliParams::zero(), c, 0).unwrap();
    let expect = theta_indef(&q, &f, &rat_int(6)).unwrap();

    let form = write_fixture("k-form.json", &q.to_json().to_string());
    let func = write_fixture("k-f.json", &f.to_json().to_string());
    let out = hm(&[
        "series",
        "--form",
        &form,
        "--function",
        &func,
        "--truncation",
        "6",
        "--check-f-condition",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out), expect.to_json());
}

#[test]
fn series_check_flag_rejects_bad_kernels() {
    let q = quad_form_of(&DegreeTriple::new(2, 2, 3).unwrap());
    // indicator of Z^2 is not sign-antisymmetric
    let f = CosetFunction2::new(
        Lattice2::standard(),
        Lattice2::standard(),
        vec![([rat_int(0), rat_int(0)], hecke_massey::numeric::Cyclo::one())],
    )
    .unwrap();
    let form = write_fixture("bad-form.json", &q.to_json().to_string());
    let func = write_fixture("bad-f.json", &f.to_json().to_string());
    let out = hm(&[
        "series",
        "--form",
        &form,
        "--function",
        &func,
        "--check-f-condition",
    ]);
    assert_eq!(code(&out), 3);
    // without the flag the sum is still computed
    let out = hm(&["series", "--form", &form, "--function", &func]);
    assert_eq!(code(&out), 0);
}

#[test]
fn solve_reports_dimensions_and_notes() {
    let out = hm(&["solve", "--degrees", "2", "4", "5"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(j["dimension"].as_u64().unwrap(), 0);
    assert!(j["note"]
        .as_str()
        .unwrap()
        .contains("necessary condition fails"));

    let out = hm(&["solve", "--degrees", "2", "2", "3"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(j["dimension"].as_u64().unwrap(), 4);
    assert_eq!(j["method"].as_str().unwrap(), "exact");

    let out = hm(&[
        "solve", "--degrees", "2", "2", "3", "--params", "1/4", "1/4", "0", "0",
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["dimension"].as_u64().unwrap(), 3);
    assert_eq!(j["verified_order"].as_str().unwrap(), "8/1");
}

#[test]
fn solve_without_flags_prints_usage() {
    let out = hm(&["solve"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--degrees"));
}

#[test]
fn verify_thm1_distinguishes_good_and_corrupted_tensors() {
    let t = DegreeTriple::new(2, 2, 3).unwrap();
    let c = &universal_massey_kernel_exact(&t).unwrap().basis[0];
    let good = write_fixture("tensor-good.json", &c.to_json().to_string());
    let out = hm(&["verify-thm1", "--tensor", &good, "--trunc", "6"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_json(&out)["pass"].as_bool().unwrap());

    // negate one entry
    let (&(i, j, k), v) = c.nonzero_entries().next().unwrap();
    let mut bad = c.clone();
    bad.set(i as i64, j as i64, k as i64, v.neg());
    let bad_path = write_fixture("tensor-bad.json", &bad.to_json().to_string());
    let out = hm(&["verify-thm1", "--tensor", &bad_path, "--trunc", "6"]);
    assert_eq!(code(&out), 4);
    let j = stdout_json(&out);
    assert!(!j["pass"].as_bool().unwrap());
    assert!(j["per_l"].as_array().is_some());
}

#[test]
fn invert_runs_the_pipeline_and_respects_the_cap() {
    let (form, func) = orbit_fixture_paths();
    let out = hm(&[
        "invert", "--form", &form, "--function", &func, "--trunc", "4", "--cap", "1000",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let j = stdout_json(&out);
    assert_eq!(j["N"].as_u64().unwrap(), 6);
    assert!(j["equality"].as_bool().unwrap());

    let out = hm(&[
        "invert", "--form", &form, "--function", &func, "--trunc", "4", "--cap", "1",
    ]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("N"));
}

#[test]
fn identical_inputs_produce_byte_identical_output() {
    let (form, func) = orbit_fixture_paths();
    let run = || {
        hm(&[
            "invert", "--form", &form, "--function", &func, "--trunc", "3", "--cap", "10",
        ])
    };
    let a = run();
    let b = run();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lattice_info_prints_canonical_lattices() {
    let out = hm(&["lattice-info", "--degrees", "2", "2", "3"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert!(j["integrality_criterion"].as_bool().unwrap());
    assert_eq!(j["lambda_index_in_gamma"].as_str().unwrap(), "12");
    let out = hm(&["lattice-info", "--degrees", "2", "4", "5", "--output", "text"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("false"));
}

#[test]
fn cyclo_order_cap_env_var_is_honored() {
    let t = DegreeTriple::new(2, 2, 3).unwrap();
    let q = quad_form_of(&t);
    let c = &universal_massey_kernel_exact(&t).unwrap().basis[0];
    let f = f_from_system(&t, &ModuliParams::zero(), c, 0).unwrap();
    let form = write_fixture("cap-form.json", &q.to_json().to_string());
    let func = write_fixture("cap-f.json", &f.to_json().to_string());
    let out = Command::new(env!("CARGO_BIN_EXE_hm"))
        .args(["series", "--form", &form, "--function", &func])
        .env("HM_MAX_CYCLO_ORDER", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_hm"))
        .args(["series", "--form", &form, "--function", &func])
        .env("HM_MAX_CYCLO_ORDER", "50000")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}
