//! End-to-end tests of the binary: argument handling, experiment outputs,
//! and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_kvfem")
}

fn tmpdir(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("kvfem_cli_{}_{name}", std::process::id()));
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = run(&[]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("usage:"), "{stderr}");
}

#[test]
fn unknown_flag_rejected() {
    let out = run(&["decay", "--wat"]);
    assert!(!out.status.success());
}

#[test]
fn config_error_reports_line() {
    let dir = tmpdir("badcfg");
    let cfg = write_config(
        &dir,
        "experiment=decay\nh_list=1/4\nkappa_list=1\nk_rule=h3\n",
    );
    let out = run(&["decay", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 4"), "{stderr}");
    assert!(stderr.contains("k_rule"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn subcommand_must_match_config() {
    let dir = tmpdir("mismatch");
    let cfg = write_config(
        &dir,
        "experiment=cavity\nh_list=1/4\nkappa_list=1\nk_rule=fixed:0.25\n",
    );
    let out = run(&["decay", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does not match"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn decay_outputs_are_deterministic() {
    let dir = tmpdir("decay");
    let cfg = write_config(
        &dir,
        "experiment=decay\nh_list=1/4\nkappa_list=1\nk_rule=fixed:0.05\nT=0.2\n",
    );
    let out1 = dir.join("out1");
    let out2 = dir.join("out2");
    for out in [&out1, &out2] {
        let res = run(&[
            "decay",
            "--config",
            cfg.to_str().unwrap(),
            "--output-dir",
            out.to_str().unwrap(),
        ]);
        assert!(
            res.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    for name in [
        "energy_k1.csv",
        "energy_k0.csv",
        "decay_k1.vtk",
        "decay_k0.vtk",
    ] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
        assert!(!a.is_empty());
    }
    // energy CSV line count = steps + 1 + header
    let text = std::fs::read_to_string(out1.join("energy_k1.csv")).unwrap();
    assert_eq!(text.lines().count(), 4 + 1 + 1);
    // the retarded model keeps strictly more kinetic energy than the
    // kappa = 0 reference at the final time
    let final_kinetic = |name: &str| -> f64 {
        let text = std::fs::read_to_string(out1.join(name)).unwrap();
        text.lines()
            .last()
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(final_kinetic("energy_k1.csv") > final_kinetic("energy_k0.csv"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn convergence_rates_approach_two() {
    let dir = tmpdir("conv");
    let cfg = write_config(
        &dir,
        "experiment=convergence\nh_list=1/4,1/8,1/16\nkappa_list=1\nk_rule=h2\noutput_dir=.\n",
    );
    let out = dir.join("out");
    let res = run(&[
        "convergence",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = std::fs::read_to_string(out.join("velocity_l2_rates.csv")).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("1/16,"));
    let rate: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!(rate > 1.7 && rate < 2.1, "final L2 rate {rate}");
    assert!(out.join("velocity_h1_rates.csv").exists());
    assert!(out.join("pressure_l2_rates.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cavity_emits_gap_csv_and_snapshots() {
    let dir = tmpdir("cavity");
    let cfg = write_config(
        &dir,
        "experiment=cavity\nh_list=1/4\nkappa_list=1,1e-3\nk_rule=fixed:0.25\nT=10\n",
    );
    let out = dir.join("out");
    let res = run(&[
        "cavity",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let gaps = std::fs::read_to_string(out.join("cavity_gaps.csv")).unwrap();
    assert!(gaps.starts_with("kappa,gap\n"));
    assert_eq!(gaps.lines().count(), 3);
    assert!(out.join("cavity_k0_steady.vtk").exists());
    assert!(out.join("cavity_k1.vtk").exists());
    assert!(out.join("cavity_k1e-3.vtk").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn single_run_writes_snapshot() {
    let dir = tmpdir("single");
    let cfg = write_config(
        &dir,
        "experiment=single\nproblem=manufactured\nh_list=1/4\nkappa_list=1e-3\nk_rule=h\nT=0.5\n",
    );
    let out = dir.join("out");
    let res = run(&[
        "single",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let vtk = std::fs::read_to_string(out.join("single_manufactured.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    std::fs::remove_dir_all(&dir).ok();
}
