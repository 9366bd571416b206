//! End-to-end checks of the command-line driver.

use std::path::PathBuf;
use std::process::{Command, Output};

fn congame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_congame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("congame-cli-{}-{name}", std::process::id()));
    p
}

#[test]
fn poa_on_reference_games() {
    let out = congame(&["poa", "--game", "game_x", "--mechanism", "zero"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("poa=1"), "{text}");

    let out = congame(&["poa", "--game", "game_y"]);
    assert!(stdout(&out).contains("poa=1.3333333333333333"));
}

#[test]
fn robust_poa_reports_the_affine_baseline() {
    let out = congame(&[
        "robust-poa",
        "--basis",
        "affine",
        "--n",
        "20",
        "--delta",
        "0",
        "--mechanism",
        "zero",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("poa=2.5"), "{}", stdout(&out));
}

#[test]
fn every_run_logs_its_resolved_config() {
    let out = congame(&["nash", "--game", "game_x"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.starts_with("config: command=nash"),
        "missing config record: {text}"
    );
    assert!(text.contains("game=game_x"));
}

#[test]
fn perturb_is_reproducible_across_runs() {
    let out_a = tmp("mc-a.csv");
    let out_b = tmp("mc-b.csv");
    for path in [&out_a, &out_b] {
        let out = congame(&[
            "perturb",
            "--game",
            "game_y",
            "--mechanism",
            "optimal_local",
            "--seed",
            "7",
            "--trials",
            "50",
            "--delta-grid",
            "0.1,0.3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read_to_string(&out_a).unwrap();
    let b = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(a, b, "same seed must give identical output files");
    assert!(a.starts_with("delta,max_poa,avg_poa,frac_new_ne\n"));
    let _ = std::fs::remove_file(out_a);
    let _ = std::fs::remove_file(out_b);
}

#[test]
fn sweep_lambda_writes_fig3_format() {
    let path = tmp("fig3.csv");
    let out = congame(&[
        "sweep-lambda",
        "--basis",
        "affine",
        "--n",
        "3",
        "--lambda-grid",
        "0.5,1,2",
        "--delta-grid",
        "0,0.2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("lambda,delta,poa\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    let _ = std::fs::remove_file(path);
}

#[test]
fn robust_poa_fig2_output() {
    let five_col = tmp("sweep.csv");
    let fig2 = tmp("fig2.csv");
    let out = congame(&[
        "robust-poa",
        "--basis",
        "affine",
        "--n",
        "3",
        "--mechanism",
        "marginal_cost,optimal_local",
        "--delta-grid",
        "0,0.25",
        "--out",
        five_col.to_str().unwrap(),
        "--fig2",
        fig2.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&five_col).unwrap();
    assert!(text.starts_with("mechanism,n,delta,p_star,poa\n"));
    let text = std::fs::read_to_string(&fig2).unwrap();
    assert!(text.starts_with("mechanism,delta,poa\n"));
    let _ = std::fs::remove_file(five_col);
    let _ = std::fs::remove_file(fig2);
}

#[test]
fn worst_case_verifies_and_exports() {
    let path = tmp("wcg.toml");
    let out = congame(&[
        "worst-case",
        "--basis",
        "affine",
        "--n",
        "2",
        "--delta",
        "0",
        "--mechanism",
        "zero",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("nash_ok=true"), "{text}");
    assert!(text.contains("brute_force_poa=2"), "{text}");
    // The exported game is loadable.
    let reparsed = congame::gamefile::load_game(path.to_str().unwrap()).unwrap();
    assert_eq!(reparsed.n_agents(), 2);
    let _ = std::fs::remove_file(path);
}

#[test]
fn usage_errors_exit_2() {
    let out = congame(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("USAGE"));

    let out = congame(&["poa", "--bogus-flag", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1_with_diagnostic() {
    let out = congame(&["poa", "--game", "/no/such/file.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn certify_eps_prints_radii() {
    let out = congame(&["certify-eps", "--game", "game_y", "--mechanism", "marginal_cost"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("epsilon=0.5"), "{text}");
    assert!(text.contains("delta=0.5"), "{text}");
}
