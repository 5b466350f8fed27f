//! Riemann products in the interaction frame.
//!
//! With `v(t) = u((0,t])` the frame variable `Y_t = e^{-v(t)B} Υ_t` obeys a
//! Kato evolution with generator `e^{-vB} A e^{vB}`. On a uniform grid with
//! `v` sampled at left endpoints each factor is `e^{-v_k B} e^{hA} e^{v_k B}`,
//! so after conjugating back the product telescopes into
//! `Υ ≈ Π_k e^{(v_{k+1} - v_k)B} e^{hA}`: a free step followed by a kick with
//! the control mass of the step. The scheme is first order in `h`.

use super::{PropagationResult, Propagator, Scheme, StepDiagnostic, StepKind, DRIFT_FAIL, DRIFT_WARN};
use crate::control::RadonControl;
use crate::error::{Error, Result};
use crate::linalg::{norm, CVec, C64};
use crate::model::GalerkinSystem;

/// Interaction-picture propagation to `T` with `step_count` equal steps.
/// The result carries the initial and final states.
pub fn propagate_interaction(
    system: &GalerkinSystem,
    u: &RadonControl,
    psi0: &CVec,
    step_count: usize,
) -> Result<PropagationResult> {
    system.check_state(psi0)?;
    if step_count == 0 {
        return Err(Error::arg("step_count must be at least 1"));
    }
    let horizon = u.horizon();
    let h = horizon / step_count as f64;
    let free: Vec<C64> = system.eigenvalues.iter().map(|&l| C64::from_polar(1.0, l * h)).collect();
    let prop = Propagator::new(system);
    let norm0 = norm(psi0);
    let mut psi = psi0.clone();
    let mut v_prev = 0.0;
    let mut max_drift = 0.0f64;
    let mut diagnostics = Vec::new();
    for k in 0..step_count {
        let t_start = horizon * k as f64 / step_count as f64;
        let t_end = if k + 1 == step_count {
            horizon
        } else {
            horizon * (k + 1) as f64 / step_count as f64
        };
        for (z, f) in psi.iter_mut().zip(&free) {
            *z *= f;
        }
        let v = u.cumulative_unchecked(t_end);
        psi = prop.kick_state(v - v_prev, &psi)?;
        v_prev = v;
        let drift = (norm(&psi) - norm0).abs();
        if drift > DRIFT_FAIL * norm0.max(1.0) {
            return Err(Error::numerical(format!(
                "norm drift {drift:e} at t = {t_end} exceeds {DRIFT_FAIL:e}"
            )));
        }
        max_drift = max_drift.max(drift);
        // One diagnostic per thousand steps keeps long runs compact.
        if (k + 1) % 1000 == 0 || k + 1 == step_count {
            diagnostics.push(StepDiagnostic {
                kind: StepKind::Flow,
                t_start,
                t_end,
                level: v,
                norm_drift: max_drift,
            });
        }
    }
    Ok(PropagationResult {
        scheme: Scheme::Interaction,
        sample_times: vec![0.0, horizon],
        states: vec![psi0.clone(), psi],
        diagnostics,
        drift_warning: max_drift > DRIFT_WARN * norm0.max(1.0),
    })
}

/// Richardson extrapolation of [`propagate_interaction`] over step counts
/// `base, 2·base, …, 2^{levels-1}·base`, assuming an error expansion in
/// integer powers of `h`. Returns the extrapolated final state and the size
/// of the last correction as an error estimate.
pub fn richardson_extrapolate(
    system: &GalerkinSystem,
    u: &RadonControl,
    psi0: &CVec,
    base: usize,
    levels: usize,
) -> Result<(CVec, f64)> {
    if levels == 0 {
        return Err(Error::arg("Richardson extrapolation needs at least one level"));
    }
    let mut table: Vec<CVec> = Vec::with_capacity(levels);
    let mut estimate = f64::INFINITY;
    for i in 0..levels {
        let steps = base << i;
        let mut row = vec![propagate_interaction(system, u, psi0, steps)?.final_state().clone()];
        for j in 1..=i {
            let factor = 1.0 / ((1u64 << j) as f64 - 1.0);
            let next = &row[j - 1] + (&row[j - 1] - &table[j - 1]) * C64::new(factor, 0.0);
            row.push(next);
        }
        if i > 0 {
            estimate = norm(&(&row[i] - &table[i - 1]));
        }
        table = row;
    }
    Ok((table.pop().expect("nonempty table"), estimate))
}
