//! Controllability side: transition graphs, resonant periodic steering
//! between eigenstates, and the coherent-state confinement of the harmonic
//! oscillator.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::control::PiecewiseConstantControl;
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, CMat, CVec, HermitianEigen, C64, I};
use crate::model::{build_harmonic_oscillator, GalerkinSystem};
use crate::propagator::propagate_piecewise;

/// Couplings at or below this magnitude are treated as absent.
pub const COUPLING_FLOOR: f64 = 1e-12;

/// Default gap tolerance: `1e-9 · max|λ|`.
pub fn default_gap_tol(system: &GalerkinSystem) -> f64 {
    1e-9 * system.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    /// 1-based mode indices, `j < k`.
    pub j: usize,
    pub k: usize,
    pub coupling: f64,
    pub gap: f64,
    pub non_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionGraph {
    pub n: usize,
    pub gap_tol: f64,
    pub edges: Vec<Edge>,
}

impl TransitionGraph {
    pub fn edge(&self, j: usize, k: usize) -> Option<&Edge> {
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        self.edges.iter().find(|e| e.j == a && e.k == b)
    }

    /// Whether consecutive entries of `path` are joined by non-degenerate edges.
    pub fn is_chain(&self, path: &[usize]) -> bool {
        path.len() >= 2 && path.windows(2).all(|w| self.edge(w[0], w[1]).is_some_and(|e| e.non_degenerate))
    }

    /// Whether every mode is reachable from mode 1 along non-degenerate edges.
    pub fn connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n + 1];
        let mut stack = vec![1];
        seen[1] = true;
        while let Some(v) = stack.pop() {
            for e in self.edges.iter().filter(|e| e.non_degenerate) {
                let other = if e.j == v {
                    e.k
                } else if e.k == v {
                    e.j
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen[1..].iter().all(|&s| s)
    }
}

/// Coupled pairs and their degeneracy verdicts. An edge is degenerate when
/// another coupled pair sharing one of its modes has the same gap within
/// `gap_tol`.
pub fn build_transition_graph(system: &GalerkinSystem, gap_tol: f64) -> Result<TransitionGraph> {
    if !(gap_tol > 0.0) {
        return Err(Error::arg(format!("gap tolerance must be positive, got {gap_tol}")));
    }
    let n = system.dim();
    let lam = &system.eigenvalues;
    let mut edges = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let coupling = system.b[(j, k)].norm();
            if coupling > COUPLING_FLOOR {
                edges.push(Edge {
                    j: j + 1,
                    k: k + 1,
                    coupling,
                    gap: (lam[j] - lam[k]).abs(),
                    non_degenerate: true,
                });
            }
        }
    }
    let snapshot = edges.clone();
    for e in edges.iter_mut() {
        e.non_degenerate = !snapshot.iter().any(|o| {
            (o.j, o.k) != (e.j, e.k)
                && [o.j, o.k].iter().any(|v| *v == e.j || *v == e.k)
                && (o.gap - e.gap).abs() <= gap_tol
        });
    }
    Ok(TransitionGraph { n, gap_tol, edges })
}

/// `∫ u(τ) e^{iντ} dτ` over the support of a piecewise-constant control.
pub fn fourier_coefficient(u: &PiecewiseConstantControl, nu: f64) -> C64 {
    u.pieces().map(|(a, b, v)| v * step_weight(a, b, nu)).sum()
}

fn step_weight(a: f64, b: f64, nu: f64) -> C64 {
    if nu == 0.0 {
        return C64::new(b - a, 0.0);
    }
    // e^{iνa} (e^{iν(b−a)} − 1)/(iν), written to stay accurate for small ν(b−a).
    let h = b - a;
    let x = nu * h;
    let phase = C64::from_polar(1.0, nu * a);
    let integral = if x.abs() < 1e-4 {
        C64::new(h, 0.0) * (C64::new(1.0, 0.0) + I * x / 2.0 - x * x / 6.0)
    } else {
        (C64::from_polar(1.0, x) - 1.0) / (I * nu)
    };
    phase * integral
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicControl {
    /// One period on `[0, 2π/gap]`.
    pub control: PiecewiseConstantControl,
    pub gap: f64,
    /// `∫_0^{T*} u* e^{i·gap·τ} dτ`.
    pub resonant: C64,
    /// Achieved coefficients at the avoided frequencies.
    pub avoided: Vec<(f64, C64)>,
}

/// One period of a sampled sinusoid at frequency `gap` on `steps` equal steps,
/// projected by least squares so that its Fourier coefficients vanish at
/// every frequency in `avoid`.
pub fn make_periodic_control(gap: f64, amplitude: f64, avoid: &[f64], steps: usize) -> Result<PeriodicControl> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::arg(format!("gap must be positive, got {gap}")));
    }
    if !(amplitude > 0.0) {
        return Err(Error::arg(format!("amplitude must be positive, got {amplitude}")));
    }
    if steps < 8 {
        return Err(Error::arg(format!("periodic controls need at least 8 steps, got {steps}")));
    }
    let period = 2.0 * std::f64::consts::PI / gap;
    let grid: Vec<f64> = (0..=steps).map(|m| period * m as f64 / steps as f64).collect();
    let mut values: Vec<f64> = (0..steps)
        .map(|m| amplitude * (gap * 0.5 * (grid[m] + grid[m + 1])).cos())
        .collect();
    // Real constraint rows: Re and Im of Σ v_m w_m(ν) for each avoided ν.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for &nu in avoid {
        let w: Vec<C64> = (0..steps).map(|m| step_weight(grid[m], grid[m + 1], nu)).collect();
        rows.push(w.iter().map(|z| z.re).collect());
        if nu != 0.0 {
            rows.push(w.iter().map(|z| z.im).collect());
        }
    }
    if rows.len() >= steps {
        return Err(Error::arg(format!(
            "{} Fourier constraints need more than {steps} steps; increase the step count",
            rows.len()
        )));
    }
    if !rows.is_empty() {
        let c = DMatrix::from_fn(rows.len(), steps, |r, m| rows[r][m]);
        let v = DVector::from_vec(values.clone());
        // Minimal change onto the null space of C: v − C⁺ C v.
        let correction = c
            .clone()
            .svd(true, true)
            .solve(&(&c * &v), 1e-12)
            .map_err(|e| Error::numerical(format!("constraint projection failed: {e}")))?;
        values = (v - correction).iter().copied().collect();
    }
    let control = PiecewiseConstantControl::new(grid, values)?;
    let resonant = fourier_coefficient(&control, gap);
    let reference = amplitude * period;
    if resonant.norm() < 1e-3 * reference {
        return Err(Error::arg(format!(
            "resonant Fourier coefficient vanishes ({:e}); increase the step count",
            resonant.norm()
        )));
    }
    let avoided: Vec<(f64, C64)> = avoid.iter().map(|&nu| (nu, fourier_coefficient(&control, nu))).collect();
    if let Some((nu, z)) = avoided.iter().find(|(_, z)| z.norm() > 1e-12 * reference) {
        return Err(Error::numerical(format!(
            "coefficient at frequency {nu} is {:e} after projection",
            z.norm()
        )));
    }
    Ok(PeriodicControl {
        control,
        gap,
        resonant,
        avoided,
    })
}

/// Frequencies other than `gap` at which couplings touching modes `j` or `k`
/// (1-based) would also be driven by a `2π/gap`-periodic control.
pub fn competing_gaps(system: &GalerkinSystem, j: usize, k: usize, gap_tol: f64) -> Vec<f64> {
    let n = system.dim();
    let lam = &system.eigenvalues;
    let omega = (lam[j - 1] - lam[k - 1]).abs();
    let mut out: Vec<f64> = Vec::new();
    for l in 0..n {
        for m in l..n {
            if ![l, m].iter().any(|v| *v + 1 == j || *v + 1 == k) || system.b[(l, m)].norm() <= COUPLING_FLOOR {
                continue;
            }
            let g = (lam[l] - lam[m]).abs();
            let p = (g / omega).round();
            if p != 1.0 && (g - p * omega).abs() <= gap_tol && !out.iter().any(|&o| (o - p * omega).abs() <= gap_tol) {
                out.push(p * omega);
            }
        }
    }
    // The mean only matters through differing diagonal couplings.
    out.retain(|&g| g != 0.0 || (system.b[(j - 1, j - 1)] - system.b[(k - 1, k - 1)]).norm() > COUPLING_FLOOR);
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringPlan {
    /// 1-based `(from, to)`.
    pub edge: (usize, usize),
    pub gap: f64,
    pub period: f64,
    /// One period of `u*`, scaled so that the effective rotation angle is `theta`.
    pub base: PeriodicControl,
    pub n: usize,
    pub duration: f64,
    pub theta: f64,
}

impl SteeringPlan {
    /// `u*/n` repeated `n` times, or `None` for `n = 0`.
    pub fn control(&self) -> Result<Option<PiecewiseConstantControl>> {
        if self.n == 0 {
            return Ok(None);
        }
        Ok(Some(self.base.control.scaled(1.0 / self.n as f64).repeated(self.n)?))
    }
}

/// Plan a rotation by `theta` in the `(from, to)` plane with `n` periods.
pub fn plan_transition(system: &GalerkinSystem, from: usize, to: usize, n: usize, theta: f64) -> Result<SteeringPlan> {
    let dim = system.dim();
    if from == 0 || to == 0 || from > dim || to > dim || from == to {
        return Err(Error::arg(format!("invalid edge ({from}, {to}) for N = {dim}")));
    }
    let coupling = system.b[(from - 1, to - 1)].norm();
    if coupling <= COUPLING_FLOOR {
        return Err(Error::arg(format!("modes {from} and {to} are not coupled")));
    }
    let gap = (system.eigenvalues[from - 1] - system.eigenvalues[to - 1]).abs();
    let tol = default_gap_tol(system);
    if gap <= tol {
        return Err(Error::arg(format!("modes {from} and {to} are degenerate")));
    }
    let avoid = competing_gaps(system, from, to, tol);
    let mut steps = (2 * avoid.len() + 2).max(8);
    steps += steps % 2;
    let unit = loop {
        match make_periodic_control(gap, 1.0, &avoid, steps) {
            Ok(p) => break p,
            Err(_) if steps < 4096 => steps += 2,
            Err(e) => return Err(e),
        }
    };
    let amplitude = theta / (coupling * unit.resonant.norm());
    let base = make_periodic_control(gap, amplitude, &avoid, steps)?;
    let period = 2.0 * std::f64::consts::PI / gap;
    Ok(SteeringPlan {
        edge: (from, to),
        gap,
        period,
        base,
        n,
        duration: n as f64 * period,
        theta,
    })
}

/// `|⟨φ_target, ψ⟩|²`.
pub fn fidelity(psi: &CVec, target: usize) -> f64 {
    psi[target - 1].norm_sqr()
}

/// Runs the plan from `psi0`; returns the final state and its fidelity to the
/// plan's target mode.
pub fn steer_transition(system: &GalerkinSystem, plan: &SteeringPlan, psi0: &CVec) -> Result<(CVec, f64)> {
    system.check_state(psi0)?;
    let psi = match plan.control()? {
        None => psi0.clone(),
        Some(u) => propagate_piecewise(system, &u, psi0, &[u.end()])?.final_state().clone(),
    };
    let f = fidelity(&psi, plan.edge.1);
    Ok((psi, f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub control: PiecewiseConstantControl,
    pub plans: Vec<SteeringPlan>,
    pub state: CVec,
    pub fidelity: f64,
}

/// Full population transfers along `path` (1-based modes), starting from the
/// first mode of the path.
pub fn steer_along_chain(system: &GalerkinSystem, path: &[usize], per_edge_n: usize) -> Result<ChainResult> {
    if path.len() < 2 {
        return Err(Error::arg("a chain needs at least two modes"));
    }
    if per_edge_n == 0 {
        return Err(Error::arg("per-edge period count must be positive"));
    }
    let plans = path
        .windows(2)
        .map(|w| plan_transition(system, w[0], w[1], per_edge_n, std::f64::consts::FRAC_PI_2))
        .collect::<Result<Vec<_>>>()?;
    let mut control: Option<PiecewiseConstantControl> = None;
    for plan in &plans {
        let piece = plan.control()?.expect("n > 0");
        control = Some(match control {
            None => piece,
            Some(c) => c.concat(&piece.shifted(c.end()))?,
        });
    }
    let control = control.expect("at least one plan");
    let psi0 = basis_vector(system.dim(), path[0] - 1);
    let state = propagate_piecewise(system, &control, &psi0, &[control.end()])?.final_state().clone();
    let f = fidelity(&state, *path.last().expect("nonempty"));
    Ok(ChainResult {
        control,
        plans,
        state,
        fidelity: f,
    })
}

/// Displacement amplitude `α(T)` and scalar phase `χ(T)` of the driven
/// oscillator `ψ' = i(a†a + 1/2 + u(a + a†)/√2)ψ` started in the ground state:
/// `ψ(t) = e^{iχ} D(α) φ_1` with `α' = iα + iu/√2` and `χ' = 1/2 + u Re(α)/√2`,
/// both integrated exactly on each constant step.
pub fn coherent_oracle(u: &PiecewiseConstantControl) -> (C64, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut alpha = C64::new(0.0, 0.0);
    let mut chi = 0.0;
    for (a, b, v) in u.pieces() {
        let h = b - a;
        let z = alpha + v * s;
        // ∫_0^h Re α = Re(z (e^{ih} − 1)/i) − v h/√2.
        let integral = (z * (C64::from_polar(1.0, h) - 1.0) / I).re - v * s * h;
        chi += 0.5 * h + v * s * integral;
        alpha = z * C64::from_polar(1.0, h) - v * s;
    }
    (alpha, chi)
}

/// Truncated coherent state `exp(α a† − ᾱ a) φ_1` built from the same
/// tridiagonal ladder matrices as the Galerkin system.
pub fn coherent_state(n: usize, alpha: C64) -> Result<CVec> {
    let mut gen = CMat::zeros(n, n);
    for m in 1..n {
        let r = (m as f64).sqrt();
        gen[(m, m - 1)] = alpha * r;
        gen[(m - 1, m)] = -alpha.conj() * r;
    }
    // exp(G) = exp(i H) with H = −iG Hermitian.
    let e = HermitianEigen::new(&gen.map(|z| -I * z))?;
    Ok(e.apply_exp_i(1.0, &basis_vector(n, 0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillatorVerdict {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: (f64, f64),
    pub phase: f64,
    /// `1 − |⟨ψ(T), D(α) e^{TA} φ_1⟩|`.
    pub residual: f64,
    /// `‖ψ(T) − e^{iχ} D(α) φ_1‖`, sensitive to the phase as well.
    pub phase_residual: f64,
    /// Population in the top 10% of modes.
    pub leakage: f64,
    pub inconclusive: bool,
}

/// Compares the Galerkin evolution of the unperturbed oscillator from its
/// ground state with the classical coherent-state prediction.
pub fn verify_oscillator_noncontrollability(n: usize, u: &PiecewiseConstantControl) -> Result<OscillatorVerdict> {
    if u.start() != 0.0 {
        return Err(Error::arg("control must start at time 0"));
    }
    let system = build_harmonic_oscillator(n, 0.0, 1.0, 0.0)?;
    let psi0 = basis_vector(n, 0);
    let psi = propagate_piecewise(&system, u, &psi0, &[u.end()])?.final_state().clone();
    let (alpha, chi) = coherent_oracle(u);
    let coherent = coherent_state(n, alpha)?;
    // e^{TA} φ_1 only contributes the ground-state phase, which the modulus drops.
    let overlap = coherent.dotc(&psi).norm();
    let residual = (1.0 - overlap).max(0.0);
    let phase_residual = (&psi - coherent * C64::from_polar(1.0, chi)).norm();
    let top = n - (n / 10).max(1);
    let leakage: f64 = psi.iter().skip(top).map(|z| z.norm_sqr()).sum();
    Ok(OscillatorVerdict {
        n,
        alpha: (alpha.re, alpha.im),
        phase: chi,
        residual,
        phase_residual,
        leakage,
        inconclusive: leakage > 1e-6,
    })
}
