//! Acceptance checks. Each test runs one verification suite at the default
//! seed and prints a single PASS/FAIL line before asserting.

use bilinear_core::verify::{run_suite, SuiteReport, DEFAULT_SEED};

fn report(label: &str, suite: &str, only: &[&str]) -> SuiteReport {
    let r = run_suite(suite, DEFAULT_SEED).expect("suite runs");
    let checks: Vec<_> = r
        .checks
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.name.as_str()))
        .collect();
    assert!(!checks.is_empty(), "no checks selected in {suite}");
    let pass = checks.iter().all(|c| c.pass);
    let detail: Vec<String> = checks
        .iter()
        .map(|c| {
            let mut s = format!("{}={:.4e} (limit {:.4e})", c.name, c.value, c.limit);
            if !c.detail.is_empty() {
                s.push_str(&format!(" [{}]", c.detail));
            }
            s
        })
        .collect();
    println!("{} {label}: {}", if pass { "PASS" } else { "FAIL" }, detail.join("; "));
    let mut r = r;
    r.pass = pass;
    r
}

fn run(label: &str, suite: &str, only: &[&str]) {
    let r = report(label, suite, only);
    assert!(r.pass, "{label} failed");
}

#[test]
fn a01_unitarity_and_propagator_law() {
    run("01 unitarity", "unitarity", &[]);
}

#[test]
fn a02_scheme_triangulation() {
    run("02 schemes", "schemes", &[]);
}

#[test]
fn a03_radon_continuity() {
    run("03 radon-continuity", "radon-continuity", &[]);
}

#[test]
fn a04_well_matrix_elements() {
    run("04 matrix-elements", "matrix-elements", &[]);
}

#[test]
fn a05a_kick_parity() {
    run("05a regularity/parity", "regularity", &["even-modes-vanish"]);
}

#[test]
fn a05b_kick_decay_exponent() {
    run("05b regularity/decay", "regularity", &["odd-decay-exponent"]);
}

#[test]
fn a05c_kick_sobolev_convergence() {
    run("05c regularity/convergence", "regularity", &["convergence-a1.1"]);
}

#[test]
fn a05d_kick_sobolev_divergence() {
    run("05d regularity/divergence", "regularity", &["divergence-a1.3"]);
}

#[test]
fn a06_energy_certificates() {
    run("06 certificates", "certificates", &[]);
}

#[test]
fn a07_galerkin_convergence() {
    run("07 galerkin", "galerkin", &[]);
}

#[test]
fn a08_time_reversal() {
    run("08 reversibility", "reversibility", &[]);
}

#[test]
fn a09_resonant_steering() {
    run("09 steering", "steering", &[]);
}

#[test]
fn a10_oscillator_orbit() {
    run("10 oscillator", "oscillator", &[]);
}

#[test]
fn a11_interpolation_campaigns() {
    run("11 interpolation", "interpolation", &[]);
}
