//! Galerkin propagators under piecewise-constant and Radon-measure controls.
//!
//! Three independent schemes are provided so they can check each other:
//! ordered products of exact exponentials ([`propagate_radon`]), first-order
//! Riemann products in the interaction frame ([`propagate_interaction`]), and
//! truncated Dyson series with a factorial remainder bound ([`dyson_propagate`]).

mod dyson;
mod interaction;

use std::collections::HashMap;

use serde::Serialize;

use crate::control::{PiecewiseConstantControl, RadonControl, Segment};
use crate::error::{Error, Result};
use crate::linalg::{norm, CMat, CVec, HermitianEigen};
use crate::model::{sobolev_norm_unchecked, GalerkinSystem, SpectralModel};

pub use dyson::{dyson_propagate, dyson_remainder_bound, dyson_terms, DysonEstimate};
pub use interaction::{propagate_interaction, richardson_extrapolate};

/// Norm drift that is reported as a warning.
pub const DRIFT_WARN: f64 = 1e-10;
/// Norm drift that aborts a propagation.
pub const DRIFT_FAIL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Product,
    Interaction,
    Dyson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Flow,
    Kick,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostic {
    pub kind: StepKind,
    pub t_start: f64,
    pub t_end: f64,
    /// Control level for flows, weight for kicks.
    pub level: f64,
    /// `|‖ψ‖ - ‖ψ0‖|` after the step.
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub scheme: Scheme,
    pub sample_times: Vec<f64>,
    pub states: Vec<CVec>,
    pub diagnostics: Vec<StepDiagnostic>,
    /// Set when some step drifted by more than [`DRIFT_WARN`].
    pub drift_warning: bool,
}

impl PropagationResult {
    pub fn final_state(&self) -> &CVec {
        self.states.last().expect("propagation has at least one sample")
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.norm_drift).fold(0.0, f64::max)
    }
}

/// Per-propagation cache of generator eigendecompositions, keyed by the bit
/// pattern of the control level, and of step matrices keyed by `(u, Δt)`.
pub struct Propagator<'a> {
    system: &'a GalerkinSystem,
    eigen: HashMap<u64, HermitianEigen>,
    steps: HashMap<(u64, u64), CMat>,
}

impl<'a> Propagator<'a> {
    pub fn new(system: &'a GalerkinSystem) -> Self {
        Self {
            system,
            eigen: HashMap::new(),
            steps: HashMap::new(),
        }
    }

    pub fn system(&self) -> &GalerkinSystem {
        self.system
    }

    fn generator(&mut self, u: f64) -> Result<&HermitianEigen> {
        let key = u.to_bits();
        if !self.eigen.contains_key(&key) {
            let e = HermitianEigen::new(&self.system.hamiltonian(u))?;
            self.eigen.insert(key, e);
        }
        Ok(&self.eigen[&key])
    }

    /// `exp(Δt (A_N + u B_N))`.
    pub fn unitary_step(&mut self, u: f64, dt: f64) -> Result<CMat> {
        if !(dt >= 0.0) {
            return Err(Error::arg(format!("step duration must be nonnegative, got {dt}")));
        }
        let key = (u.to_bits(), dt.to_bits());
        if let Some(m) = self.steps.get(&key) {
            return Ok(m.clone());
        }
        let n = self.system.dim();
        let m = if dt == 0.0 {
            CMat::identity(n, n)
        } else {
            self.generator(u)?.exp_i(dt)
        };
        self.steps.insert(key, m.clone());
        Ok(m)
    }

    /// `exp(w B_N)`.
    pub fn kick(&self, w: f64) -> Result<CMat> {
        let n = self.system.dim();
        if w == 0.0 {
            return Ok(CMat::identity(n, n));
        }
        Ok(self.system.coupling_eigen()?.exp_i(w))
    }

    fn flow_state(&mut self, u: f64, dt: f64, psi: &CVec) -> Result<CVec> {
        if dt == 0.0 {
            return Ok(psi.clone());
        }
        Ok(self.generator(u)?.apply_exp_i(dt, psi))
    }

    fn kick_state(&self, w: f64, psi: &CVec) -> Result<CVec> {
        if w == 0.0 {
            return Ok(psi.clone());
        }
        Ok(self.system.coupling_eigen()?.apply_exp_i(w, psi))
    }

    /// Ordered product over `segments`, applied to a state, recording samples.
    fn run_segments(&mut self, segments: &[Segment], psi0: &CVec, samples: &[f64]) -> Result<PropagationResult> {
        self.system.check_state(psi0)?;
        let norm0 = norm(psi0);
        let mut psi = psi0.clone();
        let mut t = segments.first().map_or(0.0, |s| match *s {
            Segment::Flow { start, .. } => start,
            Segment::Kick { t, .. } => t,
        });
        let mut next = 0;
        let mut states = Vec::with_capacity(samples.len());
        let mut diagnostics = Vec::with_capacity(segments.len());
        let mut warn = false;
        let mut check = |kind, t_start, t_end, level, psi: &CVec, diagnostics: &mut Vec<StepDiagnostic>| {
            let drift = (norm(psi) - norm0).abs();
            if drift > DRIFT_FAIL * norm0.max(1.0) {
                return Err(Error::numerical(format!(
                    "norm drift {drift:e} at t = {t_end} exceeds {DRIFT_FAIL:e}"
                )));
            }
            warn |= drift > DRIFT_WARN * norm0.max(1.0);
            diagnostics.push(StepDiagnostic {
                kind,
                t_start,
                t_end,
                level,
                norm_drift: drift,
            });
            Ok(())
        };
        for seg in segments {
            match *seg {
                Segment::Flow { u, end, .. } => {
                    while next < samples.len() && samples[next] < end {
                        let s = samples[next];
                        if s > t {
                            psi = self.flow_state(u, s - t, &psi)?;
                            check(StepKind::Flow, t, s, u, &psi, &mut diagnostics)?;
                            t = s;
                        }
                        states.push(psi.clone());
                        next += 1;
                    }
                    if end > t {
                        psi = self.flow_state(u, end - t, &psi)?;
                        check(StepKind::Flow, t, end, u, &psi, &mut diagnostics)?;
                        t = end;
                    }
                }
                Segment::Kick { w, t: tau } => {
                    psi = self.kick_state(w, &psi)?;
                    check(StepKind::Kick, tau, tau, w, &psi, &mut diagnostics)?;
                }
            }
        }
        while next < samples.len() {
            states.push(psi.clone());
            next += 1;
        }
        Ok(PropagationResult {
            scheme: Scheme::Product,
            sample_times: samples.to_vec(),
            states,
            diagnostics,
            drift_warning: warn,
        })
    }

    /// Ordered product of the step matrices over `segments`.
    pub fn segments_operator(&mut self, segments: &[Segment]) -> Result<CMat> {
        let n = self.system.dim();
        let mut acc = CMat::identity(n, n);
        for seg in segments {
            let f = match *seg {
                Segment::Flow { u, start, end } => self.unitary_step(u, end - start)?,
                Segment::Kick { w, .. } => self.kick(w)?,
            };
            acc = f * acc;
        }
        Ok(acc)
    }
}

fn check_samples(samples: &[f64], horizon: f64) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::arg("at least one sample time is required"));
    }
    if samples.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
        return Err(Error::arg(format!("sample times must lie in [0, {horizon}]")));
    }
    if samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::arg("sample times must be nondecreasing"));
    }
    Ok(())
}

/// `exp(Δt (A_N + u B_N))`.
pub fn unitary_step(system: &GalerkinSystem, u: f64, dt: f64) -> Result<CMat> {
    Propagator::new(system).unitary_step(u, dt)
}

/// `exp(w B_N)`, the action of an atom of weight `w`.
pub fn kick(system: &GalerkinSystem, w: f64) -> Result<CMat> {
    Propagator::new(system).kick(w)
}

/// States under a piecewise-constant control starting at time 0.
pub fn propagate_piecewise(
    system: &GalerkinSystem,
    u: &PiecewiseConstantControl,
    psi0: &CVec,
    samples: &[f64],
) -> Result<PropagationResult> {
    let radon = RadonControl::from_density(u.clone())?;
    propagate_radon(system, &radon, psi0, samples)
}

/// States under a Radon control: flows over density pieces interleaved with
/// kicks at atoms. A sample at an atom reports the post-kick state.
pub fn propagate_radon(
    system: &GalerkinSystem,
    u: &RadonControl,
    psi0: &CVec,
    samples: &[f64],
) -> Result<PropagationResult> {
    check_samples(samples, u.horizon())?;
    Propagator::new(system).run_segments(&u.segments(), psi0, samples)
}

/// Segments of `u` restricted to `(s, t]`.
pub fn segments_between(u: &RadonControl, s: f64, t: f64) -> Vec<Segment> {
    u.segments()
        .into_iter()
        .filter_map(|seg| match seg {
            Segment::Flow { u, start, end } => {
                let (a, b) = (start.max(s), end.min(t));
                (b > a).then_some(Segment::Flow { u, start: a, end: b })
            }
            Segment::Kick { w, t: tau } => (tau > s && tau <= t).then_some(Segment::Kick { w, t: tau }),
        })
        .collect()
}

/// Propagator matrix `Υ(t, s)`.
pub fn propagator_between(system: &GalerkinSystem, u: &RadonControl, s: f64, t: f64) -> Result<CMat> {
    if !(0.0 <= s && s <= t && t <= u.horizon()) {
        return Err(Error::arg(format!("need 0 <= s <= t <= T, got s = {s}, t = {t}")));
    }
    Propagator::new(system).segments_operator(&segments_between(u, s, t))
}

/// `C Υ^{ũ}(T,0) C` with `ũ` the time-reversed control and `C` entrywise
/// conjugation; equals `Υ^u(T,0)^{-1}` when `C` anticommutes with `A_N` and `B_N`.
pub fn time_reversal_inverse(system: &GalerkinSystem, u: &RadonControl) -> Result<CMat> {
    if !system.conjugation_reversible() {
        return Err(Error::Unsupported(
            "time reversal needs real eigenvalues and a purely imaginary coupling matrix".into(),
        ));
    }
    let horizon = u.horizon();
    // Reversed factor order; atoms move to T - τ (an atom at T lands at 0 and
    // acts first).
    let reversed: Vec<Segment> = u
        .segments()
        .into_iter()
        .rev()
        .map(|seg| match seg {
            Segment::Flow { u, start, end } => Segment::Flow {
                u,
                start: horizon - end,
                end: horizon - start,
            },
            Segment::Kick { w, t } => Segment::Kick { w, t: horizon - t },
        })
        .collect();
    let m = Propagator::new(system).segments_operator(&reversed)?;
    Ok(m.map(|z| z.conj()))
}

/// `D(|A|^s)` deviation between order-`n` and order-`n_ref` propagations of
/// the same initial state, at every sample time.
pub fn galerkin_deviation(
    model: &SpectralModel,
    u: &RadonControl,
    psi0: &CVec,
    n: usize,
    n_ref: usize,
    s: f64,
    samples: &[f64],
) -> Result<Vec<f64>> {
    if !(n < n_ref) {
        return Err(Error::arg(format!("need N < N_ref, got N = {n}, N_ref = {n_ref}")));
    }
    if psi0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: psi0.len(),
        });
    }
    let small = model.compress(n)?;
    let reference = model.compress(n_ref)?;
    let mut psi_ref0 = CVec::zeros(n_ref);
    psi_ref0.rows_mut(0, n).copy_from(psi0);
    let a = propagate_radon(&small, u, psi0, samples)?;
    let b = propagate_radon(&reference, u, &psi_ref0, samples)?;
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            let mut d = y.clone();
            for k in 0..n {
                d[k] -= x[k];
            }
            sobolev_norm_unchecked(&reference.eigenvalues, &d, s)
        })
        .collect())
}

/// Maximum over samples of [`galerkin_deviation`], for several truncations in
/// parallel.
pub fn galerkin_sweep(
    model: &SpectralModel,
    u: &RadonControl,
    initial_mode: usize,
    orders: &[usize],
    n_ref: usize,
    s: f64,
    samples: &[f64],
) -> Result<Vec<(usize, f64)>> {
    use rayon::prelude::*;
    orders
        .par_iter()
        .map(|&n| {
            if initial_mode == 0 || initial_mode > n {
                return Err(Error::arg(format!("initial mode {initial_mode} not in 1..={n}")));
            }
            let psi0 = crate::linalg::basis_vector(n, initial_mode - 1);
            let dev = galerkin_deviation(model, u, &psi0, n, n_ref, s, samples)?;
            Ok((n, dev.into_iter().fold(0.0, f64::max)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Atom;
    use crate::linalg::{basis_vector, c, distance_to_identity, hermitize, unitarity_defect, C64, I};
    use crate::model::build_potential_well;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(n: usize, seed: u64) -> GalerkinSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eig: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..20.0)).collect();
        let x = hermitize(&CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        GalerkinSystem::new("random".into(), eig, x.map(|z| I * z), 0.0).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let sys = build_potential_well(8).unwrap();
        assert_eq!(unitary_step(&sys, 3.0, 0.0).unwrap(), CMat::identity(8, 8));
        assert!(unitary_step(&sys, 3.0, -1.0).is_err());
    }

    #[test]
    fn free_step_is_diagonal_phase() {
        let sys = build_potential_well(6).unwrap();
        let m = unitary_step(&sys, 0.0, 0.3).unwrap();
        for j in 0..6 {
            for k in 0..6 {
                let want = if j == k {
                    C64::from_polar(1.0, sys.eigenvalues[j] * 0.3)
                } else {
                    c(0.0, 0.0)
                };
                assert!((m[(j, k)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn step_inverse_random_64() {
        let sys = random_system(64, 5);
        let mut p = Propagator::new(&sys);
        let f = p.unitary_step(0.7, 0.4).unwrap();
        let g = Propagator::new(&sys.clone()).generator(0.7).unwrap().exp_i(-0.4);
        assert!(distance_to_identity(&(f.clone() * g)) < 1e-12);
        assert!(unitarity_defect(&f) < 1e-12);
    }

    #[test]
    fn kicks_invert() {
        let sys = build_potential_well(16).unwrap();
        assert_eq!(kick(&sys, 0.0).unwrap(), CMat::identity(16, 16));
        let k = kick(&sys, 0.8).unwrap() * kick(&sys, -0.8).unwrap();
        assert!(distance_to_identity(&k) < 1e-12);
    }

    #[test]
    fn free_evolution_of_ground_state() {
        let sys = build_potential_well(8).unwrap();
        let u = PiecewiseConstantControl::constant(0.0, 0.0, 1.0).unwrap();
        let times = [0.0, 0.25, 0.7, 1.0];
        let r = propagate_piecewise(&sys, &u, &basis_vector(8, 0), &times).unwrap();
        for (t, psi) in times.iter().zip(&r.states) {
            let want = C64::from_polar(1.0, sys.eigenvalues[0] * t);
            assert!((psi[0] - want).norm() < 1e-12);
            assert!(psi.iter().skip(1).all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn composition_at_breakpoints() {
        let sys = build_potential_well(12).unwrap();
        let u = RadonControl::new(
            1.0,
            PiecewiseConstantControl::new(vec![0.0, 0.3, 0.6, 1.0], vec![0.5, -1.0, 2.0]).unwrap(),
            vec![Atom { t: 0.45, w: 0.7 }],
        )
        .unwrap();
        let full = propagator_between(&sys, &u, 0.0, 1.0).unwrap();
        for s in [0.3, 0.45, 0.6] {
            let a = propagator_between(&sys, &u, 0.0, s).unwrap();
            let b = propagator_between(&sys, &u, s, 1.0).unwrap();
            assert!((b * a - &full).norm() < 1e-12);
        }
    }

    #[test]
    fn radon_pure_density_matches_piecewise_bitwise() {
        let sys = build_potential_well(10).unwrap();
        let d = PiecewiseConstantControl::new(vec![0.0, 0.5, 1.0], vec![0.3, -0.4]).unwrap();
        let times = [0.0, 0.2, 0.5, 0.9, 1.0];
        let a = propagate_piecewise(&sys, &d, &basis_vector(10, 0), &times).unwrap();
        let b = propagate_radon(&sys, &RadonControl::from_density(d).unwrap(), &basis_vector(10, 0), &times).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn single_atom_factorizes() {
        let sys = build_potential_well(10).unwrap();
        let u = RadonControl::single_atom(1.0, 0.5, 1.0).unwrap();
        let psi0 = basis_vector(10, 0);
        let r = propagate_radon(&sys, &u, &psi0, &[0.5, 1.0]).unwrap();
        let half = unitary_step(&sys, 0.0, 0.5).unwrap();
        let want = &half * kick(&sys, 1.0).unwrap() * &half * &psi0;
        assert!((r.final_state() - want).norm() < 1e-12);
        // Sample at the atom sees the post-kick state.
        let post = kick(&sys, 1.0).unwrap() * &half * &psi0;
        assert!((&r.states[0] - post).norm() < 1e-12);
    }

    #[test]
    fn sample_validation() {
        let sys = build_potential_well(4).unwrap();
        let u = RadonControl::zero(1.0).unwrap();
        let psi = basis_vector(4, 0);
        assert!(propagate_radon(&sys, &u, &psi, &[1.5]).is_err());
        assert!(propagate_radon(&sys, &u, &psi, &[0.5, 0.2]).is_err());
        assert!(propagate_radon(&sys, &u, &basis_vector(5, 0), &[1.0]).is_err());
    }

    #[test]
    fn time_reversal_free_flow() {
        let sys = build_potential_well(8).unwrap();
        let u = RadonControl::zero(0.7).unwrap();
        let inv = time_reversal_inverse(&sys, &u).unwrap();
        let want = unitary_step(&sys, 0.0, 0.7).unwrap().adjoint();
        assert!((inv - want).norm() < 1e-12);
    }

    #[test]
    fn time_reversal_rejects_complex_coupling() {
        let mut b = CMat::zeros(2, 2);
        b[(0, 1)] = c(1.0, 0.0);
        b[(1, 0)] = c(-1.0, 0.0);
        let sys = GalerkinSystem::new("r".into(), vec![1.0, 2.0], b, 0.0).unwrap();
        assert!(matches!(
            time_reversal_inverse(&sys, &RadonControl::zero(1.0).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn galerkin_deviation_trivial_cases() {
        let model = SpectralModel::potential_well();
        let zero = RadonControl::zero(1.0).unwrap();
        let dev = galerkin_deviation(&model, &zero, &basis_vector(8, 0), 8, 32, 0.0, &[0.5, 1.0]).unwrap();
        assert!(dev.iter().all(|&d| d == 0.0));
        let decoupled = SpectralModel::from_tables("d", (1..=40).map(|k| k as f64).collect(), CMat::zeros(40, 40), None)
            .unwrap();
        let u = RadonControl::from_density(PiecewiseConstantControl::constant(0.8, 0.0, 1.0).unwrap()).unwrap();
        for n in [4, 8, 16] {
            let dev = galerkin_deviation(&decoupled, &u, &basis_vector(n, 0), n, 40, 0.5, &[1.0]).unwrap();
            assert_eq!(dev, vec![0.0]);
        }
    }
}
