use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biprecon")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn mu_out_of_range_is_usage_error() {
    let o = run(&["solve", "--family", "circle", "--mu", "2.0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mu must lie in [0,1)"));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&run(&["solve", "--bogus"])), 2);
    assert_eq!(code(&run(&["sweep", "--grid", "0,1.5/0"])), 2);
    assert_eq!(code(&run(&["solve", "--method", "bicg"])), 2);
}

#[test]
fn verify_circle_passes() {
    let o = run(&["verify", "--family", "circle", "--modes", "32"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["violations"], 0);
    let reps = v["reports"].as_array().unwrap();
    assert!(!reps.is_empty());
    assert!(reps.iter().all(|r| r["status"] != "violated"));
}

#[test]
fn verify_fredholm_perturbed_passes() {
    let o = run(&["verify", "--family", "fredholm", "--n", "32", "--mu", "0.3", "--nu", "0.1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn assemble_k1_matches_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k1");
    let o = run(&["assemble", "--family", "circle", "--modes", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let a = biprecon_read(&out.join("A.mtx"));
    let d: Vec<f64> = (0..3).map(|i| a[i]).collect();
    assert_eq!(d, vec![0.5, 0.25, 0.5]);
    let c = biprecon_read(&out.join("C.mtx"));
    assert!((c[1] - 0.5 * 2f64.ln()).abs() < 1e-15);
    assert!(out.join("problem.json").exists());
}

/// Diagonal real parts of a Matrix Market file.
fn biprecon_read(path: &Path) -> Vec<f64> {
    let m = biprecon::densela::io::read_matrix_market(path).unwrap();
    m.diagonal().iter().map(|z| z.re).collect()
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = vec![];
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let o = run(&[
            "solve", "--family", "circle", "--modes", "12", "--mu", "0.2", "--nu", "0.1", "--seed", "7", "--restart", "5",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        files.push((std::fs::read(out.join("solve.json")).unwrap(), std::fs::read(out.join("history.csv")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let s1 = run(&["sweep", "--grid", "0,0.5/0,0.5", "--modes", "6"]);
    let s2 = run(&["sweep", "--grid", "0,0.5/0,0.5", "--modes", "6", "--jobs", "1"]);
    assert_eq!(code(&s1), 0);
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn fov_and_carleman_emit_json() {
    let o = run(&["fov", "--modes", "6"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["containsZero"], false);
    let o = run(&["carleman", "--family", "fredholm", "--n", "16"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["carleman_norm"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&run(&["carleman", "--family", "circle"])), 2);
}

#[test]
fn strang_and_pinv_weight() {
    let o = run(&["strang", "--levels", "4,8,16", "--nu-rule", "fixed:0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["solve", "--modes", "8", "--weight", "pinv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(&["solve", "--weight", "pinv", "--mu", "0.2"])), 2);
}

#[test]
fn help_names_the_theorems() {
    let o = run(&["--help"]);
    let h = String::from_utf8_lossy(&o.stdout);
    assert!(h.contains("Strang"));
    assert!(h.contains("condition-number"));
    for sub in ["assemble", "perturb", "solve", "fov", "carleman", "verify", "sweep", "strang"] {
        assert!(h.contains(sub), "{sub} missing from help");
    }
}
