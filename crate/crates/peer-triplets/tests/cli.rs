//! End-to-end checks of the `peer-triplets` binary: exit codes, CSV
//! schemas and rerun determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_peer-triplets"))
}

#[test]
fn verify_subcommand_passes_for_builtins() {
    for name in ["AP4o33vg", "AP4o43vs"] {
        let out = bin().args(["verify", name]).output().unwrap();
        assert!(
            out.status.success(),
            "verify {} exited {:?}:\n{}",
            name,
            out.status.code(),
            String::from_utf8_lossy(&out.stdout)
        );
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("PASS"));
        assert!(text.contains("lambda2"));
    }
}

#[test]
fn unknown_triplet_is_usage_error() {
    let out = bin().args(["verify", "AP9o99"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown triplet"));
}

#[test]
fn missing_subcommand_is_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn solver_failure_exit_code() {
    // Odd step counts are invalid for alternating grids.
    let out = bin()
        .args([
            "converge",
            "--triplet",
            "AP4o33vg",
            "--problem",
            "tracking",
            "--grid",
            "alternating",
            "--sigma",
            "1.3",
            "--N",
            "41",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N = 41"));
}

#[test]
fn converge_csv_schema_and_determinism() {
    let run = || {
        let out = bin()
            .args([
                "converge",
                "--triplet",
                "AP4o33vg",
                "--problem",
                "tracking",
                "--grid",
                "alternating",
                "--sigma",
                "1.3",
                "--N",
                "10,20",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run();
    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "triplet,problem,grid,param,N,err_state,err_adjoint,order_state,order_adjoint"
    );
    assert_eq!(lines.count(), 2);
    // Reruns are bit-identical.
    assert_eq!(first, run());
}

#[test]
fn uniform_and_unit_alternating_columns_agree() {
    let run = |grid: &str, sigma: &str| {
        let out = bin()
            .args([
                "converge",
                "--triplet",
                "AP4o33vg",
                "--problem",
                "tracking",
                "--grid",
                grid,
                "--sigma",
                sigma,
                "--N",
                "40",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let uniform = run("uniform", "1.0");
    let alternating = run("alternating", "1.0");
    let pick = |text: &str| -> (f64, f64) {
        let row = text.lines().nth(1).unwrap().to_string();
        let cols: Vec<&str> = row.split(',').collect();
        (cols[5].parse().unwrap(), cols[6].parse().unwrap())
    };
    let (ue, ua) = pick(&uniform);
    let (ae, aa) = pick(&alternating);
    assert!((ue - ae).abs() <= 1e-13, "state errors {} vs {}", ue, ae);
    assert!((ua - aa).abs() <= 1e-13, "adjoint errors {} vs {}", ua, aa);
}

#[test]
fn mesh_csv_schema_and_statistics() {
    let out = bin()
        .args([
            "mesh",
            "--problem",
            "tracking",
            "--grid",
            "equi",
            "--r",
            "3",
            "--N",
            "40",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "n,t_n,h_n,sigma_n");
    assert_eq!(lines.count(), 40);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("sigma in ["), "missing summary: {}", stderr);
    assert!(stderr.contains("max |eta|"));
}

#[test]
fn solve_prints_terminal_data_and_dumps_stages() {
    let dir = std::env::temp_dir().join("peer_triplets_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let dump = dir.join("stages.csv");
    let out = bin()
        .args([
            "solve",
            "--triplet",
            "AP4o33vg",
            "--problem",
            "tracking",
            "--grid",
            "uniform",
            "--N",
            "40",
            "--dump",
            dump.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("terminal state"));
    assert!(stdout.contains("residual"));
    let csv = std::fs::read_to_string(&dump).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,i,t_ni,Y1,Y2,Y3,P1,P2,P3");
    assert_eq!(lines.count(), 40 * 4);
    // 17 significant digits in the data columns.
    let row = csv.lines().nth(1).unwrap();
    let y1 = row.split(',').nth(3).unwrap();
    assert!(y1.contains('e') && y1.split('e').next().unwrap().len() >= 17);
    std::fs::remove_file(&dump).ok();
}

#[test]
fn coefficient_file_round_trip_through_cli() {
    let dir = std::env::temp_dir().join("peer_triplets_cli_coeffs");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("vg.coeffs");
    let t = peer_triplets::load_builtin("AP4o33vg").unwrap();
    std::fs::write(&path, peer_triplets::coeff_file::export_coefficients(&t)).unwrap();
    let out = bin()
        .args(["verify", "--coefficients", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "verify from file failed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_runs_structural_checks_for_user_defined_triplets() {
    // A renamed coefficient set has no tabulated reference data; the
    // report falls back to the structural checks alone.
    let dir = std::env::temp_dir().join("peer_triplets_cli_custom");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("custom.coeffs");
    let t = peer_triplets::load_builtin("AP4o33vg").unwrap();
    let text = peer_triplets::coeff_file::export_coefficients(&t).replacen(
        "name AP4o33vg",
        "name custom-triplet",
        1,
    );
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["verify", "--coefficients", path.to_str().unwrap()])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "custom verify failed:\n{}", stdout);
    assert!(stdout.contains("custom-triplet"));
    assert!(stdout.contains("design bound"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_failure_yields_exit_code_one() {
    // Perturbing a weight-matrix entry keeps the coefficient set valid but
    // breaks the zero-stability norm certificate.
    let dir = std::env::temp_dir().join("peer_triplets_cli_broken");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.coeffs");
    let mut t = peer_triplets::load_builtin("AP4o33vg").unwrap();
    t.w[(0, 1)] += 0.25;
    t.name = "broken-weights".to_string();
    std::fs::write(&path, peer_triplets::coeff_file::export_coefficients(&t)).unwrap();
    let out = bin()
        .args(["verify", "--coefficients", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_structured_output() {
    let out = bin()
        .args(["verify", "AP4o33vg", "--format", "structured"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("check=\"lambda2\""));
    assert!(text.contains("pass=true"));
    assert!(text.lines().last().unwrap().contains("verdict=pass"));
}

#[test]
fn out_of_range_flags_are_usage_errors() {
    let out = bin()
        .args([
            "converge",
            "--triplet",
            "AP4o33vg",
            "--problem",
            "tracking",
            "--grid",
            "uniform",
            "--N",
            "10",
            "--component",
            "4",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .args([
            "mesh",
            "--problem",
            "tracking",
            "--grid",
            "equi",
            "--r",
            "5",
            "--N",
            "40",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
