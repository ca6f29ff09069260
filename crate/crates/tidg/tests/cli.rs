use std::path::Path;
use std::process::{Command, Output};

fn tidg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tidg")).args(args).output().expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap_or_default()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_SWEEP: [&str; 10] = ["--benchmark", "beam", "--method", "CG1,SIPG,NIPG-UI", "--p", "3,1e4", "--angle", "pi/8,5pi/6", "--refine", "0,1"];

#[test]
fn invalid_method_is_a_config_error() {
    let out = tidg(&["solve", "--benchmark", "beam", "--method", "LDG", "--p", "3", "--angle", "0.3", "--refine", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "ConfigError");
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tidg(&["sweep", "--benchmark", "cook", "--method", "SIPG", "--angle", "pi/3", "--refine", "1", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("p list is empty"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"schema_version":1,"benchmark":"cook","penalty":3}"#).unwrap();
    let out = tidg(&["sweep", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn negative_penalty_in_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kb.json");
    std::fs::write(
        &cfg,
        r#"{"benchmark":"cook","methods":["SIPG"],"p":[1],"angles":[0],"levels":[0],"stabilization":{"k_beta":-1}}"#,
    )
    .unwrap();
    let out = tidg(&["solve", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("k_beta"));
}

#[test]
fn unstable_material_is_recorded_and_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = tidg(&["solve", "--benchmark", "cook", "--method", "SIPG", "--p", "1", "--nu", "0.7", "--angle", "pi/3", "--refine", "1", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "StabilityViolation");
    let skipped = std::fs::read_to_string(dir.path().join("skipped_cook.csv")).unwrap();
    assert_eq!(skipped.lines().count(), 2);
    assert!(skipped.contains("stability"));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("solve_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "skipped");
}

#[test]
fn solve_writes_row_summary_manifest_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = tidg(&[
        "solve", "--benchmark", "beam", "--method", "SIPG", "--p", "3", "--angle", "pi/8", "--refine", "1", "--out", path(dir.path()), "--dump-field",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("solve_beam.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "benchmark,method,p,angle,nu,level,h,ndof,tip_uy,dg_err,h1_rel_err,rate");
    assert!(lines[1].starts_with("beam,SIPG,3,0.39269908169872414,0.49995,1,"));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["config"]["methods"][0], "SIPG");
    assert!(manifest["version"].is_string());
    let field: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("field.json")).unwrap()).unwrap();
    assert_eq!(field["vertices"].as_array().unwrap().len(), field["displacement"].as_array().unwrap().len());
}

#[test]
fn serial_sweeps_are_byte_identical_and_match_parallel() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (i, dir) in dirs.iter().enumerate() {
        let mut args = vec!["sweep"];
        args.extend(SMALL_SWEEP);
        args.extend(["--out", path(dir.path())]);
        if i < 2 {
            args.push("--serial");
        }
        let out = tidg(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["sweep_beam.csv", "errors_beam.csv", "skipped_beam.csv"] {
        let read = |i: usize| std::fs::read(dirs[i].path().join(name)).unwrap();
        assert_eq!(read(0), read(1), "{name}");
        assert_eq!(read(0), read(2), "{name}");
    }
    let sweep = std::fs::read_to_string(dirs[0].path().join("sweep_beam.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 3 * 2 * 2 * 2);
    let errors = std::fs::read_to_string(dirs[0].path().join("errors_beam.csv")).unwrap();
    assert!(errors.starts_with("method,p,angle,level,h,ndof,dg_err,h1_rel_err,l2_err,rate_h1\n"));
    let rated = errors.lines().skip(1).filter(|l| !l.ends_with(',')).count();
    assert_eq!(rated, 3 * 2 * 2);
}

#[test]
fn manifest_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--serial", "--underintegrate", "--nu", "0.4"];
    args.extend(["--benchmark", "cook", "--method", "NIPG,CG2", "--p", "2,50", "--angle", "3pi/4", "--refine", "1,2", "--out", path(first.path())]);
    assert!(tidg(&args).status.success());
    let manifest = first.path().join("manifest.json");
    let rerun = tidg(&["sweep", "--config", path(&manifest), "--out", path(second.path())]);
    assert!(rerun.status.success(), "{}", String::from_utf8_lossy(&rerun.stderr));
    let a = std::fs::read(first.path().join("sweep_cook.csv")).unwrap();
    let b = std::fs::read(second.path().join("sweep_cook.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().contains("NIPG-UI"));
}

#[test]
fn sweep_continues_past_unstable_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = tidg(&[
        "sweep", "--serial", "--benchmark", "cook", "--method", "SIPG", "--p", "1,10", "--nu", "0.7", "--angle", "0", "--refine", "1", "--out", path(dir.path()),
    ]);
    assert!(out.status.success());
    let solved = std::fs::read_to_string(dir.path().join("sweep_cook.csv")).unwrap().lines().count() - 1;
    let skipped = std::fs::read_to_string(dir.path().join("skipped_cook.csv")).unwrap().lines().count() - 1;
    assert_eq!(solved + skipped, 2);
    assert!(skipped >= 1);
}

#[test]
fn verify_passes_on_a_fresh_build() {
    let out = tidg(&["verify"]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert!(table.contains("8/8 checks passed"), "{table}");
}

#[test]
fn help_documents_defaults() {
    let out = tidg(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.49995") && text.contains("k_beta = 100"), "{text}");
}
