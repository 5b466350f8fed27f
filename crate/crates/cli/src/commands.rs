use std::path::Path;

use bilinear_core::estimates::certify_energy_bound;
use bilinear_core::linalg::{basis_vector, norm};
use bilinear_core::model::sobolev_norm;
use bilinear_core::propagator::{galerkin_sweep, propagate_radon};
use bilinear_core::synthesis::{plan_transition, steer_along_chain, steer_transition};
use bilinear_core::verify::{run_suite, suite_names, SuiteReport, SUITES};
use bilinear_core::{Error, Result, SteeringPlan};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{Artifacts, Csv};
use crate::scenario::{builtin_model, sample_times, Initial, Resolved, BUILTIN_MODELS};

/// Exit code returned when a certificate or verification check fails.
pub const EXIT_CHECK_FAILED: i32 = 4;

pub struct Outcome {
    pub artifacts: Artifacts,
    pub exit_code: i32,
    pub report: Vec<String>,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    command: &'static str,
    model: &'a str,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    horizon: f64,
    total_variation: f64,
    atoms: usize,
    samples: usize,
    sobolev_order: f64,
    max_norm_drift: f64,
    drift_warning: bool,
    final_populations: Vec<f64>,
}

pub fn simulate(r: &Resolved, out: &Path) -> Result<Outcome> {
    let opts = &r.scenario.simulate;
    let times = sample_times(&r.control, opts.samples);
    let run = propagate_radon(&r.system, &r.control, &r.psi0, &times)?;
    let n = r.system.dim();
    let mut header = vec!["time".to_string()];
    header.extend((1..=n).map(|k| format!("pop_{k}")));
    header.push("norm".into());
    header.push("sobolev_norm".into());
    let mut csv = Csv::new(&header);
    for (t, psi) in times.iter().zip(&run.states) {
        let mut row = Vec::with_capacity(n + 3);
        row.push(*t);
        row.extend(psi.iter().map(|z| z.norm_sqr()));
        row.push(norm(psi));
        row.push(sobolev_norm(&r.system, psi, opts.sobolev_order)?);
        csv.row(&row);
    }
    let summary = SimulateSummary {
        command: "simulate",
        model: &r.system.name,
        n,
        horizon: r.control.horizon(),
        total_variation: r.control.total_variation(),
        atoms: r.control.atoms().len(),
        samples: times.len(),
        sobolev_order: opts.sobolev_order,
        max_norm_drift: run.max_norm_drift(),
        drift_warning: run.drift_warning,
        final_populations: run.final_state().iter().map(|z| z.norm_sqr()).collect(),
    };
    let mut artifacts = Artifacts::new(out);
    artifacts.add_text("trajectory.csv", csv.finish());
    artifacts.add_json("summary.json", &summary)?;
    Ok(Outcome {
        artifacts,
        exit_code: 0,
        report: vec![format!(
            "simulated {} samples, max norm drift {:e}",
            times.len(),
            summary.max_norm_drift
        )],
    })
}

pub fn estimate(r: &Resolved, out: &Path) -> Result<Outcome> {
    let opts = r
        .scenario
        .estimate
        .as_ref()
        .ok_or_else(|| Error::Validation("scenario has no 'estimate' section".into()))?;
    let cert = certify_energy_bound(&r.system, &r.control, &r.psi0, opts.k, opts.s)?;
    let mut artifacts = Artifacts::new(out);
    artifacts.add_json("certificate.json", &cert)?;
    Ok(Outcome {
        artifacts,
        exit_code: if cert.pass { 0 } else { EXIT_CHECK_FAILED },
        report: vec![format!(
            "{} observed {:.6e} bound {:.6e} slack {:.3e}",
            if cert.pass { "PASS" } else { "FAIL" },
            cert.observed,
            cert.bound,
            cert.slack
        )],
    })
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    command: &'static str,
    model: &'a str,
    #[serde(rename = "N_ref")]
    n_ref: usize,
    s: f64,
    initial_mode: usize,
    deviations: Vec<(usize, f64)>,
    strictly_decreasing: bool,
}

pub fn sweep(r: &Resolved, out: &Path) -> Result<Outcome> {
    let opts = r
        .scenario
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Validation("scenario has no 'sweep' section".into()))?;
    let mode = match r.scenario.initial {
        Initial::Mode(k) => k,
        _ => return Err(Error::Validation("galerkin-sweep needs a basis initial state".into())),
    };
    let samples: Vec<f64> = (0..opts.samples)
        .map(|i| r.control.horizon() * i as f64 / (opts.samples - 1) as f64)
        .collect();
    let devs = galerkin_sweep(&r.model, &r.control, mode, &opts.orders, opts.n_ref, opts.s, &samples)?;
    let mut csv = Csv::new(&["N".into(), "deviation".into()]);
    for &(n, d) in &devs {
        csv.row(&[n as f64, d]);
    }
    let summary = SweepSummary {
        command: "galerkin-sweep",
        model: &r.system.name,
        n_ref: opts.n_ref,
        s: opts.s,
        initial_mode: mode,
        strictly_decreasing: devs.windows(2).all(|w| w[1].1 < w[0].1),
        deviations: devs,
    };
    let mut artifacts = Artifacts::new(out);
    artifacts.add_text("sweep.csv", csv.finish());
    artifacts.add_json("summary.json", &summary)?;
    Ok(Outcome {
        artifacts,
        exit_code: 0,
        report: summary
            .deviations
            .iter()
            .map(|(n, d)| format!("N = {n}: deviation {d:.6e}"))
            .collect(),
    })
}

#[derive(Serialize)]
struct SteerSummary {
    command: &'static str,
    path: Vec<usize>,
    best_n: usize,
    best_fidelity: f64,
    plans: Vec<SteeringPlan>,
}

/// Steering always starts from the first mode of the path.
pub fn steer(r: &Resolved, out: &Path) -> Result<Outcome> {
    let opts = r
        .scenario
        .steer
        .as_ref()
        .ok_or_else(|| Error::Validation("scenario has no 'steer' section".into()))?;
    let path = &opts.path;
    let runs = opts
        .n
        .par_iter()
        .map(|&n| -> Result<(usize, f64, f64, Vec<SteeringPlan>)> {
            if path.len() == 2 {
                let plan = plan_transition(&r.system, path[0], path[1], n, std::f64::consts::FRAC_PI_2)?;
                let psi0 = basis_vector(r.system.dim(), path[0] - 1);
                let (_, f) = steer_transition(&r.system, &plan, &psi0)?;
                Ok((n, plan.duration, f, vec![plan]))
            } else {
                let chain = steer_along_chain(&r.system, path, n)?;
                let duration = chain.plans.iter().map(|p| p.duration).sum();
                Ok((n, duration, chain.fidelity, chain.plans))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = Csv::new(&["n".into(), "duration".into(), "fidelity".into()]);
    for (n, d, f, _) in &runs {
        csv.row(&[*n as f64, *d, *f]);
    }
    let best = runs
        .iter()
        .fold(&runs[0], |b, x| if x.2 > b.2 { x } else { b });
    let summary = SteerSummary {
        command: "steer",
        path: path.clone(),
        best_n: best.0,
        best_fidelity: best.2,
        plans: best.3.clone(),
    };
    let mut artifacts = Artifacts::new(out);
    artifacts.add_text("steer.csv", csv.finish());
    artifacts.add_json("steer.json", &summary)?;
    Ok(Outcome {
        artifacts,
        exit_code: 0,
        report: runs
            .iter()
            .map(|(n, _, f, _)| format!("n = {n}: fidelity {f:.6}"))
            .collect(),
    })
}

pub fn list_suites() -> Vec<String> {
    SUITES.iter().map(|s| format!("{:<18} {}", s.name, s.description)).collect()
}

pub fn verify(names: &[String], seed: u64, out: &Path) -> Result<Outcome> {
    let selected: Vec<String> = if names.is_empty() {
        suite_names().iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    let known = suite_names();
    if let Some(bad) = selected.iter().find(|n| !known.contains(&n.as_str())) {
        return Err(Error::Argument(format!(
            "unknown suite '{bad}'; known suites: {}",
            known.join(", ")
        )));
    }
    let mut reports: Vec<SuiteReport> = Vec::with_capacity(selected.len());
    for name in &selected {
        reports.push(run_suite(name, seed)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let report = reports.iter().flat_map(|r| r.summary_lines()).collect();
    let mut artifacts = Artifacts::new(out);
    artifacts.add_json("verify.json", &reports)?;
    Ok(Outcome {
        artifacts,
        exit_code: if pass { 0 } else { EXIT_CHECK_FAILED },
        report,
    })
}

pub fn list_models() -> Vec<String> {
    BUILTIN_MODELS.iter().map(|s| s.to_string()).collect()
}

/// Writes `<name>.json`: the closed-form description, or a table of the
/// first `n` modes when `n` is given.
pub fn export_model(
    name: &str,
    n: Option<usize>,
    params: (Option<f64>, Option<f64>, Option<f64>),
    out: &Path,
) -> Result<Outcome> {
    let model = builtin_model(name, params.0, params.1, params.2).map_err(|e| match e {
        Error::Validation(m) => Error::Argument(m),
        other => other,
    })?;
    let record = match n {
        Some(n) => model.to_record(n)?,
        None => model
            .to_formula_record()
            .ok_or_else(|| Error::Argument(format!("model '{name}' has no closed form; pass --n")))?,
    };
    let mut artifacts = Artifacts::new(out);
    let file = format!("{name}.json");
    artifacts.add_text(&file, record.to_json()? + "\n");
    Ok(Outcome {
        artifacts,
        exit_code: 0,
        report: vec![format!("exported {name}")],
    })
}
