// Every example must keep running. `cargo test` builds them next to this binary.

use std::path::PathBuf;
use std::process::Command;

fn run(name: &str) {
    let deps = std::env::current_exe().unwrap();
    let bin: PathBuf = deps.parent().unwrap().parent().unwrap().join("examples").join(name);
    assert!(bin.exists() || bin.with_extension("exe").exists(), "example {name} not built at {}", bin.display());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{name} failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty(), "{name} printed nothing");
}

#[test]
fn amm_math() {
    run("amm_math");
}

#[test]
fn bonding_curve() {
    run("bonding_curve");
}

#[test]
fn solve_equilibrium() {
    run("solve_equilibrium");
}

#[test]
fn twin_games() {
    run("twin_games");
}

#[test]
fn daily_pipeline() {
    run("daily_pipeline");
}

#[test]
fn strategy_suite() {
    run("strategy_suite");
}

#[test]
fn fee_attribution() {
    run("fee_attribution");
}
