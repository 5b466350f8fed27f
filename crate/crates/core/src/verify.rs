//! Named verification suites with fixed seeds. Each suite returns a report
//! of individual checks; the CLI `verify` command and the acceptance tests
//! both run these.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::control::{spike_sequence, Atom, PiecewiseConstantControl, RadonControl};
use crate::error::{Error, Result};
use crate::estimates::{certify_energy_bound, interpolation_ladder_check, loewner_fractional_check, weak_coupling_constant};
use crate::linalg::{basis_vector, c, distance_to_identity, hermitize, norm, CMat, CVec, C64, I};
use crate::model::{build_potential_well, sobolev_norm, well_dipole, GalerkinSystem, SpectralModel};
use crate::propagator::{
    dyson_propagate, galerkin_deviation, kick, propagate_piecewise, propagate_radon, propagator_between,
    richardson_extrapolate, time_reversal_inverse,
};
use crate::synthesis::{plan_transition, steer_along_chain, steer_transition, verify_oscillator_noncontrollability};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
            detail: String::new(),
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value >= limit,
            detail: String::new(),
        }
    }

    fn flag(name: &str, pass: bool) -> Self {
        Self {
            name: name.into(),
            value: f64::from(u8::from(pass)),
            limit: 1.0,
            pass,
            detail: String::new(),
        }
    }

    fn with(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}/{}: value {:.6e} limit {:.6e}{}",
                    if c.pass { "PASS" } else { "FAIL" },
                    self.suite,
                    c.name,
                    c.value,
                    c.limit,
                    if c.detail.is_empty() { String::new() } else { format!(" ({})", c.detail) }
                )
            })
            .collect()
    }
}

type SuiteFn = fn(u64) -> Result<Vec<Check>>;

pub struct Suite {
    pub name: &'static str,
    pub description: &'static str,
    run: SuiteFn,
}

pub const SUITES: &[Suite] = &[
    Suite {
        name: "unitarity",
        description: "norm drift and propagator law on random systems and controls",
        run: suite_unitarity,
    },
    Suite {
        name: "schemes",
        description: "product, interaction-picture and Dyson propagation agree; Dyson remainder bound holds",
        run: suite_schemes,
    },
    Suite {
        name: "radon-continuity",
        description: "spike controls converge to a unit atom at first order",
        run: suite_radon_continuity,
    },
    Suite {
        name: "matrix-elements",
        description: "potential-well coupling parity and magnitude bound",
        run: suite_matrix_elements,
    },
    Suite {
        name: "regularity",
        description: "parity, decay and Sobolev-norm growth of a unit kick applied to the ground state",
        run: suite_regularity,
    },
    Suite {
        name: "certificates",
        description: "energy-growth certificates and ordering of weak-coupling constants",
        run: suite_certificates,
    },
    Suite {
        name: "galerkin",
        description: "Galerkin deviation decreases with truncation order",
        run: suite_galerkin,
    },
    Suite {
        name: "reversibility",
        description: "time reversal inverts the propagator",
        run: suite_reversibility,
    },
    Suite {
        name: "steering",
        description: "resonant periodic controls transfer population along edges and chains",
        run: suite_steering,
    },
    Suite {
        name: "oscillator",
        description: "driven oscillator stays on the coherent-state orbit",
        run: suite_oscillator,
    },
    Suite {
        name: "interpolation",
        description: "Loewner-Heinz and interpolation-ladder campaigns",
        run: suite_interpolation,
    },
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let suite = SUITES
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::arg(format!("unknown suite '{name}'; known suites: {}", suite_names().join(", "))))?;
    let start = Instant::now();
    let checks = (suite.run)(seed)?;
    Ok(SuiteReport {
        suite: name.into(),
        seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Random system with eigenvalues in `[0.5, 20)` and a dense coupling.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize) -> Result<GalerkinSystem> {
    let eig: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..20.0)).collect();
    let x = hermitize(&CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
    GalerkinSystem::new("random".into(), eig, x.map(|z| I * z), 0.0)
}

/// Random piecewise-constant control on `[0, T]` rescaled to total variation `tv`.
pub fn random_pwc(rng: &mut ChaCha8Rng, horizon: f64, tv: f64) -> Result<PiecewiseConstantControl> {
    let pieces = rng.gen_range(1..=10);
    let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.0..horizon)).collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut bp = vec![0.0];
    bp.extend(cuts.into_iter().filter(|&t| t > 0.0 && t < horizon));
    bp.push(horizon);
    let raw: Vec<f64> = (0..bp.len() - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mass: f64 = raw.iter().zip(bp.windows(2)).map(|(v, w)| v.abs() * (w[1] - w[0])).sum();
    let scale = if mass > 0.0 { tv / mass } else { 0.0 };
    PiecewiseConstantControl::new(bp, raw.iter().map(|v| v * scale).collect())
}

/// Random density plus atoms; the density carries part of `tv`, the atoms the rest.
pub fn random_radon(rng: &mut ChaCha8Rng, horizon: f64, tv: f64, atoms: usize) -> Result<RadonControl> {
    let share = if atoms == 0 { 1.0 } else { rng.gen_range(0.2..0.8) };
    let density = random_pwc(rng, horizon, tv * share)?;
    let mut times: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.0..horizon)).collect();
    if atoms > 0 && rng.gen_bool(0.3) {
        times[0] = horizon;
    }
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();
    times.retain(|&t| t > 0.0);
    let weights: Vec<f64> = times.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let wsum: f64 = weights.iter().map(|w| w.abs()).sum();
    let atoms: Vec<Atom> = times
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| Atom {
            t,
            w: if wsum > 0.0 { w * tv * (1.0 - share) / wsum } else { 0.0 },
        })
        .collect();
    RadonControl::new(horizon, density, atoms)
}

fn random_state(rng: &mut ChaCha8Rng, n: usize, support: usize) -> CVec {
    let v = CVec::from_fn(n, |i, _| {
        if i < support {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let s = norm(&v);
    v / C64::new(s, 0.0)
}

fn suite_unitarity(seed: u64) -> Result<Vec<Check>> {
    let results = (0..100u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let n = rng.gen_range(2..=64);
            let sys = random_system(&mut rng, n)?;
            let tv = rng.gen_range(0.0..10.0);
            let u = random_pwc(&mut rng, 1.0, tv)?;
            let radon = RadonControl::from_density(u.clone())?;
            let psi0 = random_state(&mut rng, n, n);
            let run = propagate_piecewise(&sys, &u, &psi0, &[0.25, 0.5, 0.75, 1.0])?;
            let drift = run.max_norm_drift();
            let full = propagator_between(&sys, &radon, 0.0, 1.0)?;
            let mut law = 0.0f64;
            let mut cuts: Vec<f64> = u.breakpoints()[1..u.breakpoints().len() - 1].to_vec();
            cuts.push(rng.gen_range(0.0..1.0));
            for s in cuts {
                let a = propagator_between(&sys, &radon, 0.0, s)?;
                let b = propagator_between(&sys, &radon, s, 1.0)?;
                law = law.max(crate::linalg::spectral_norm(&(b * a - &full)));
            }
            Ok((drift, law))
        })
        .collect::<Result<Vec<_>>>()?;
    let drift = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let law = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("norm-drift", drift, 1e-10).with("max over 100 random systems"),
        Check::at_most("propagator-law", law, 1e-12).with("max over breakpoints and a random interior time"),
    ])
}

/// The control used by the triangulation and Galerkin suites: four equal
/// pieces with total variation 1.
pub fn reference_control() -> Result<PiecewiseConstantControl> {
    PiecewiseConstantControl::uniform(0.0, 1.0, vec![1.2, -0.8, 0.6, -1.4])
}

fn suite_schemes(_seed: u64) -> Result<Vec<Check>> {
    let sys = build_potential_well(16)?;
    let d = reference_control()?;
    let u = RadonControl::from_density(d.clone())?;
    let psi0 = basis_vector(16, 0);
    let product = propagate_piecewise(&sys, &d, &psi0, &[1.0])?.final_state().clone();
    let (interaction, richardson_estimate) = richardson_extrapolate(&sys, &u, &psi0, 4096, 6)?;
    let (dyson, _) = dyson_propagate(&sys, &u, &psi0, 12)?;
    let mut checks = vec![
        Check::at_most("product-vs-interaction", norm(&(&product - &interaction)), 1e-8)
            .with(format!("Richardson correction {richardson_estimate:.2e}")),
        Check::at_most("product-vs-dyson", norm(&(&product - &dyson)), 1e-8),
        Check::at_most("interaction-vs-dyson", norm(&(&interaction - &dyson)), 1e-8),
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut detail = String::new();
    for order in 0..=12 {
        let (_, est) = dyson_propagate(&sys, &u, &psi0, order)?;
        let margin = est.truncation - est.remainder_bound;
        if margin > worst {
            worst = margin;
            detail = format!(
                "worst order {order}: truncation {:.3e}, bound {:.3e}, vs product {:.3e}",
                est.truncation, est.remainder_bound, est.observed
            );
        }
    }
    checks.push(Check::at_most("dyson-remainder-bound", worst, 0.0).with(detail));
    Ok(checks)
}

fn suite_radon_continuity(_seed: u64) -> Result<Vec<Check>> {
    let sys = build_potential_well(32)?;
    let atom = Atom { t: 0.5, w: 1.0 };
    let psi0 = basis_vector(32, 0);
    let exact = propagate_radon(&sys, &RadonControl::single_atom(1.0, atom.t, atom.w)?, &psi0, &[1.0])?;
    let mut errs = Vec::new();
    for n in [10, 100, 1000, 10_000] {
        let spike = spike_sequence(atom, n, 1.0)?;
        let r = propagate_piecewise(&sys, &spike, &psi0, &[1.0])?;
        errs.push(norm(&(r.final_state() - exact.final_state())));
    }
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        Check::flag("monotone-decay", monotone).with(format!("{:?}", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>())),
        Check::at_least("total-decay", errs[0] / errs[3], 100.0),
    ])
}

fn suite_matrix_elements(_seed: u64) -> Result<Vec<Check>> {
    let sys = SpectralModel::potential_well().compress(128)?;
    let mut parity = 0usize;
    let mut bound = 0usize;
    for j in 1..=128usize {
        for k in 1..=128usize {
            if j == k {
                continue;
            }
            let b = sys.b[(j - 1, k - 1)];
            if (j + k) % 2 == 0 && b != C64::new(0.0, 0.0) {
                parity += 1;
            }
            let (jf, kf) = (j as f64, k as f64);
            let limit = 2.0 * jf * kf / ((jf - kf).powi(2) * (jf + kf).powi(2));
            if b.norm() > limit {
                bound += 1;
            }
            debug_assert_eq!(b.im, well_dipole(j, k));
        }
    }
    Ok(vec![
        Check::at_most("parity-violations", parity as f64, 0.0),
        Check::at_most("bound-violations", bound as f64, 0.0),
    ])
}

/// `e^{B} e_1` for the potential well at order `n`.
pub fn kicked_ground_state(n: usize) -> Result<(GalerkinSystem, CVec)> {
    let sys = build_potential_well(n)?;
    let v = kick(&sys, 1.0)?.column(0).into_owned();
    Ok((sys, v))
}

/// Least-squares slope of `log|c_k|` against `log k` over odd `k` in `range`.
pub fn odd_mode_decay_exponent(v: &CVec, range: std::ops::RangeInclusive<usize>) -> f64 {
    let pts: Vec<(f64, f64)> = range
        .filter(|k| k % 2 == 1)
        .map(|k| ((k as f64).ln(), v[k - 1].norm().ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(n, d), p| (n + (p.0 - mx) * (p.1 - my), d + (p.0 - mx).powi(2)));
    -num / den
}

fn suite_regularity(_seed: u64) -> Result<Vec<Check>> {
    let (_, v256) = kicked_ground_state(256)?;
    let even = (2..=256).step_by(2).map(|k| v256[k - 1].norm()).fold(0.0, f64::max);
    let exponent = odd_mode_decay_exponent(&v256, 11..=101);
    let norms = |a: f64| -> Result<Vec<f64>> {
        [64, 128, 256]
            .iter()
            .map(|&n| {
                let (sys, v) = kicked_ground_state(n)?;
                sobolev_norm(&sys, &v, a)
            })
            .collect()
    };
    let n13 = norms(1.3)?;
    let n11 = norms(1.1)?;
    let growth13 = n13.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::INFINITY, f64::min);
    let change11 = n11.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("even-modes-vanish", even, 1e-12).with("largest even-mode magnitude at N = 256"),
        Check::at_most("odd-decay-exponent", (exponent - 3.0).abs(), 0.1).with(format!("fitted exponent {exponent:.4}")),
        Check::at_most("convergence-a1.1", change11, 0.02).with(format!("norms {n11:.6?}")),
        Check::at_least("divergence-a1.3", growth13, 0.2).with(format!("norms {n13:.6?}")),
    ])
}

fn certificate_models() -> Result<Vec<GalerkinSystem>> {
    Ok(vec![
        SpectralModel::potential_well().compress(32)?,
        SpectralModel::harmonic_oscillator(0.0, 1.0, 0.0)?.compress(32)?,
        SpectralModel::harmonic_oscillator(0.5, 1.0, 1.0)?.compress(32)?,
    ])
}

fn suite_certificates(seed: u64) -> Result<Vec<Check>> {
    let models = certificate_models()?;
    let mut worst_slack = f64::INFINITY;
    let mut runs = 0usize;
    for (mi, sys) in models.iter().enumerate() {
        let slacks = (0..50u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((mi as u64) << 32) ^ i);
                let tv = rng.gen_range(0.0..10.0);
                let atoms = rng.gen_range(0..3);
                let u = random_radon(&mut rng, 1.0, tv, atoms)?;
                let psi0 = random_state(&mut rng, sys.dim(), 8);
                let mut worst = f64::INFINITY;
                for k in [1.0, 2.0] {
                    for s in [k / 2.0, k] {
                        worst = worst.min(certify_energy_bound(sys, &u, &psi0, k, s)?.slack);
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;
        runs += slacks.len() * 4;
        worst_slack = worst_slack.min(slacks.into_iter().fold(f64::INFINITY, f64::min));
    }
    let mut ordering = f64::NEG_INFINITY;
    for sys in &models {
        for (s, k) in [(1.0, 2.0), (0.5, 2.0), (1.0, 4.0)] {
            let cs = weak_coupling_constant(sys, s)?;
            let ck = weak_coupling_constant(sys, k)?;
            ordering = ordering.max(cs - s / k * ck);
        }
    }
    Ok(vec![
        Check::at_least("certificate-slack", worst_slack, -1e-9).with(format!("{runs} certificates")),
        Check::at_most("constant-ordering", ordering, 1e-9).with("max of c_s - (s/k) c_k"),
    ])
}

fn suite_galerkin(_seed: u64) -> Result<Vec<Check>> {
    let model = SpectralModel::potential_well();
    let u = RadonControl::from_density(reference_control()?)?;
    let samples: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let orders = [8usize, 16, 32, 64, 128];
    let mut checks = Vec::new();
    for (label, s) in [("l2", 0.0), ("half", 0.5)] {
        let devs = orders
            .par_iter()
            .map(|&n| {
                let d = galerkin_deviation(&model, &u, &basis_vector(n, 0), n, 256, s, &samples)?;
                Ok(d.into_iter().fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?;
        let strict = devs.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::flag(&format!("strictly-decreasing-{label}"), strict).with(format!("{:?}", devs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>())));
        checks.push(Check::at_least(&format!("decay-factor-{label}"), devs[0] / devs[4], 100.0));
    }
    Ok(checks)
}

fn suite_reversibility(seed: u64) -> Result<Vec<Check>> {
    let sys = build_potential_well(32)?;
    let worst = (0..20u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(i));
            let tv = rng.gen_range(0.5..10.0);
            let atoms = rng.gen_range(1..=4);
            let horizon = rng.gen_range(0.5..2.0);
            let u = random_radon(&mut rng, horizon, tv, atoms)?;
            let fwd = propagator_between(&sys, &u, 0.0, u.horizon())?;
            let inv = time_reversal_inverse(&sys, &u)?;
            Ok(distance_to_identity(&(inv * fwd)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![Check::at_most("reversal-identity", worst, 1e-10)])
}

fn suite_steering(_seed: u64) -> Result<Vec<Check>> {
    let sys = build_potential_well(16)?;
    let psi0 = basis_vector(16, 0);
    let sweep = [4usize, 8, 16, 32, 64, 128, 256];
    let fidelities = sweep
        .par_iter()
        .map(|&n| {
            let plan = plan_transition(&sys, 1, 2, n, std::f64::consts::FRAC_PI_2)?;
            Ok(steer_transition(&sys, &plan, &psi0)?.1)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = fidelities.iter().copied().fold(0.0, f64::max);
    let chain = steer_along_chain(&sys, &[1, 2, 3], 128)?;
    Ok(vec![
        Check::at_least("edge-1-2", best, 0.95).with(format!("fidelities {fidelities:.4?} over n = {sweep:?}")),
        Check::at_least("chain-1-2-3", chain.fidelity, 0.9),
    ])
}

fn suite_oscillator(_seed: u64) -> Result<Vec<Check>> {
    let u = PiecewiseConstantControl::constant(0.2, 0.0, 1.0)?;
    let a = verify_oscillator_noncontrollability(128, &u)?;
    let b = verify_oscillator_noncontrollability(256, &u)?;
    let improved = b.residual <= a.residual / 10.0 || b.residual <= 1e-10;
    Ok(vec![
        Check::at_most("residual-128", a.residual, 1e-6).with(format!("inconclusive = {}", a.inconclusive)),
        Check::flag("residual-256", improved).with(format!("{:.3e} vs {:.3e}", b.residual, a.residual)),
    ])
}

fn random_positive(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let r = CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    hermitize(&(r.adjoint() * &r)) + CMat::identity(n, n) * c(rng.gen_range(0.1..1.0), 0.0)
}

fn suite_interpolation(seed: u64) -> Result<Vec<Check>> {
    let loewner_failures = (0..1000u64)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7_000_000 + i));
            let n = rng.gen_range(2..=12);
            let p = random_positive(&mut rng, n);
            let r = CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let rr = hermitize(&(r.adjoint() * &r));
            // Scale R†R so that Q = P − R†R keeps half of P's smallest eigenvalue.
            let pmin = crate::linalg::HermitianEigen::new(&p)?.min_value();
            let rmax = crate::linalg::HermitianEigen::new(&rr)?.max_abs_value().max(1e-300);
            let q = &p - rr * c(0.5 * pmin / rmax * rng.gen_range(0.0..1.0), 0.0);
            let q = hermitize(&q);
            let alpha = [0.25, 0.5, 0.75][rng.gen_range(0..3)];
            Ok(usize::from(!loewner_fractional_check(&p, &q, alpha)?))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let sys = build_potential_well(64)?;
    let ladder_failures = (0..10_000u64)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(9_000_000 + i));
            let support = rng.gen_range(1..=64);
            let psi = random_state(&mut rng, 64, support);
            let l = rng.gen_range(0.0..3.0);
            let j = rng.gen_range(0.0..3.0);
            Ok(usize::from(!interpolation_ladder_check(&sys, &psi, l, j)?))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(vec![
        Check::at_most("loewner-failures", loewner_failures as f64, 0.0).with("1000 random pairs"),
        Check::at_most("ladder-failures", ladder_failures as f64, 0.0).with("10000 random draws"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_argument_error() {
        let err = run_suite("nope", 1).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn suite_names_are_unique() {
        let mut names = suite_names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), SUITES.len());
    }

    #[test]
    fn random_controls_respect_total_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let u = random_radon(&mut rng, 1.5, 4.0, 3).unwrap();
            assert!((u.total_variation() - 4.0).abs() < 1e-9);
            let p = random_pwc(&mut rng, 1.0, 2.5).unwrap();
            assert!((p.l1_norm() - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn decay_exponent_of_power_law() {
        let v = CVec::from_fn(60, |i, _| C64::new(((i + 1) as f64).powf(-2.5), 0.0));
        assert!((odd_mode_decay_exponent(&v, 5..=55) - 2.5).abs() < 1e-12);
    }
}
