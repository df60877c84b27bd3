use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn llns(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llns"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn llns")
}

#[test]
fn equilibrium_run_is_reproducible_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["equilibrium", "--samples", "2000", "--seed", "11", "--out", out];
    for out in ["a.csv", "b.csv"] {
        let o = llns(&args(out), dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("step,var_rho,var_j,var_e"), "{a}");
    assert!(dir.path().join("a.summary.txt").exists());

    let o = llns(
        &["equilibrium", "--samples", "2000", "--seed", "12", "--out", "c.csv"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_ne!(a, fs::read_to_string(dir.path().join("c.csv")).unwrap());
}

#[test]
fn summary_lists_the_reference_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = llns(&["equilibrium", "--samples", "1000"], dir.path());
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    for q in ["Var(rho)", "Var(J)", "Var(E)"] {
        assert!(stdout.contains(q), "{stdout}");
    }
    assert!(dir.path().join("equilibrium_zero_flow.csv").exists());
}

#[test]
fn bad_config_line_is_reported_by_number() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "# equilibrium\nscenario = equilibrium_zero_flow\nparticles = forty\n",
    )
    .unwrap();
    let o = llns(&["equilibrium", "--config", "run.cfg"], dir.path());
    assert!(!o.status.success());
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn config_file_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = meshfree_llns::experiments::ExperimentConfig::preset("table1-net-flow").unwrap();
    cfg.steps = 500;
    cfg.skip = 100;
    fs::write(dir.path().join("flow.cfg"), cfg.to_string()).unwrap();
    let o = llns(
        &["equilibrium", "--config", "flow.cfg", "--out", "flow.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("flow.csv").exists());
}

#[test]
fn subcommand_rejects_a_foreign_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = llns(&["covariance", "--preset", "table1-equilibrium"], dir.path());
    assert!(!o.status.success());
    let o = llns(&["shock", "--preset", "no-such-preset"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("table4-shock-mach2"));
}

#[test]
fn small_noiseless_shock_ensemble_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let o = llns(
        &[
            "shock",
            "--samples",
            "400",
            "--ensemble",
            "3",
            "--no-noise",
            "--threads",
            "1",
            "--out",
            "s.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "var_sigma").unwrap();
    for line in lines {
        let v: f64 = line.split(',').nth(col).unwrap().parse().unwrap();
        assert_eq!(v, 0.0, "{line}");
    }
}
