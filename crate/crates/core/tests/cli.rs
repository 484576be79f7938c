//! CLI behavior: exit codes, config echo, emitted artifacts.

use pfmix::io::cli_main;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("pfmix").chain(args.iter().copied()))
}

#[test]
fn bad_flags_exit_with_config_error() {
    assert_eq!(run(&["run", "--scenario", "bogus"]), 2);
    assert_eq!(run(&["nonsense-subcommand"]), 2);
    assert_eq!(run(&["run", "--nu", "0.5"]), 2);
}

#[test]
fn unknown_config_key_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "definitely_not_a_key = 1\n").unwrap();
    assert_eq!(
        run(&["run", "--config", cfg.to_str().unwrap()]),
        2
    );
}

#[test]
fn tiny_run_emits_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts");
    let code = run(&[
        "run",
        "--scenario",
        "shear",
        "--refinements",
        "1",
        "--end-time",
        "3e-4",
        "--snapshots",
        "2e-4",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.join("shear_load_displacement.csv").exists());
    assert!(out.join("shear_convergence.csv").exists());
    assert!(out.join("shear_mesh.vtk").exists());
    assert!(out.join("manifest.txt").exists());
    // Snapshot at t = 2e-4 is step 2.
    assert!(out.join("shear_2.vtk").exists());
    let csv = std::fs::read_to_string(out.join("shear_load_displacement.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3, "header plus one row per step");
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("sha256:"));
    assert!(manifest.contains("scenario = shear"));
}

#[test]
fn infsup_subcommand_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "infsup",
        "--subdivisions",
        "2,4",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("infsup.csv")).unwrap();
    assert!(text.lines().count() >= 5, "two pairings x two meshes + header");
    assert!(text.starts_with("pairing,subdivisions,h,beta_h"));
}

#[test]
fn convergence_subcommand_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "convergence",
        "--method",
        "primal-q1",
        "--subdivisions",
        "4,8",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(dir.path().join("convergence.csv").exists());
}
