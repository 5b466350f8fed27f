//! Weak-coupling constants, a-priori energy certificates and the
//! interpolation inequalities they rest on.

use serde::{Deserialize, Serialize};

use crate::control::{RadonControl, Segment};
use crate::error::{Error, Result};
use crate::linalg::{hermitize, spectral_norm, CMat, CVec, HermitianEigen, C64};
use crate::model::{sobolev_norm, GalerkinSystem, SpectralModel};
use crate::propagator::{kick, propagate_radon};

/// Slack below which a certificate fails.
pub const CERTIFICATE_FLOOR: f64 = -1e-9;

fn require_invertible(system: &GalerkinSystem) -> Result<()> {
    if !(system.lambda_min > 0.0) {
        return Err(Error::arg(format!(
            "{}: |A_N| is singular (min |λ| = {})",
            system.name, system.lambda_min
        )));
    }
    Ok(())
}

/// `c_k(A_N, B_N)`: half the spectral radius of the Hermitian matrix
/// `|A|^{-k/2} [|A|^k, B] |A|^{-k/2}`, the best constant in
/// `|Re⟨|A|^k ψ, Bψ⟩| ≤ c ⟨|A|^k ψ, ψ⟩`.
pub fn weak_coupling_constant(system: &GalerkinSystem, k: f64) -> Result<f64> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::arg(format!("regularity order must be nonnegative, got {k}")));
    }
    require_invertible(system)?;
    if k == 0.0 {
        return Ok(0.0);
    }
    let lam: Vec<f64> = system.eigenvalues.iter().map(|l| l.abs()).collect();
    let n = system.dim();
    let m = CMat::from_fn(n, n, |i, j| {
        // (λ_i^k − λ_j^k) b_ij / (λ_i λ_j)^{k/2}, written to avoid overflow.
        let r = (lam[i] / lam[j]).powf(k / 2.0);
        system.b[(i, j)] * (r - 1.0 / r)
    });
    let eig = HermitianEigen::new(&hermitize(&m))?;
    Ok(0.5 * eig.max_abs_value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingCertificate {
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: f64,
    pub s: f64,
    pub c_k: f64,
    pub tv: f64,
    /// `e^{(s/k) c_k TV}`.
    pub bound: f64,
    /// Largest `‖ψ(t)‖_{s/2} / ‖ψ0‖_{s/2}` over the sample times.
    pub observed: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Times at which certificates sample the trajectory: a uniform grid plus
/// every breakpoint and atom.
pub fn certificate_samples(u: &RadonControl, grid: usize) -> Vec<f64> {
    let horizon = u.horizon();
    let mut times: Vec<f64> = (0..=grid).map(|i| horizon * i as f64 / grid as f64).collect();
    for seg in u.segments() {
        match seg {
            Segment::Flow { start, end, .. } => times.extend([start, end]),
            Segment::Kick { t, .. } => times.push(t),
        }
    }
    times.retain(|t| (0.0..=horizon).contains(t));
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();
    times
}

/// Propagates `psi0` and checks the growth of `‖ψ(t)‖_{s/2}` against
/// `e^{(s/k) c_k TV(u)}`.
pub fn certify_energy_bound(
    system: &GalerkinSystem,
    u: &RadonControl,
    psi0: &CVec,
    k: f64,
    s: f64,
) -> Result<CouplingCertificate> {
    if !(k > 0.0) || !(0.0..=k).contains(&s) {
        return Err(Error::arg(format!("need k > 0 and 0 <= s <= k, got k = {k}, s = {s}")));
    }
    let c_k = weak_coupling_constant(system, k)?;
    let tv = u.total_variation();
    let bound = ((s / k) * c_k * tv).exp();
    let base = sobolev_norm(system, psi0, s / 2.0)?;
    if !(base > 0.0) {
        return Err(Error::arg("initial state has zero norm"));
    }
    let samples = certificate_samples(u, 64);
    let run = propagate_radon(system, u, psi0, &samples)?;
    let mut observed = 0.0f64;
    for psi in &run.states {
        observed = observed.max(sobolev_norm(system, psi, s / 2.0)? / base);
    }
    let slack = bound - observed;
    Ok(CouplingCertificate {
        model: system.name.clone(),
        n: system.dim(),
        k,
        s,
        c_k,
        tv,
        bound,
        observed,
        slack,
        pass: slack >= CERTIFICATE_FLOOR,
    })
}

/// `‖|A|^{(l+j)/2} ψ‖ ≤ ‖|A|^l ψ‖^{1/2} ‖|A|^j ψ‖^{1/2}` within `1e-12`
/// relative tolerance.
pub fn interpolation_ladder_check(system: &GalerkinSystem, psi: &CVec, l: f64, j: f64) -> Result<bool> {
    require_invertible(system)?;
    if !(l >= 0.0 && j >= 0.0) {
        return Err(Error::arg("interpolation orders must be nonnegative"));
    }
    let mid = sobolev_norm(system, psi, (l + j) / 2.0)?;
    let rhs = (sobolev_norm(system, psi, l)? * sobolev_norm(system, psi, j)?).sqrt();
    Ok(mid <= rhs * (1.0 + 1e-12))
}

/// Fractional power of a positive Hermitian matrix.
pub fn hermitian_power(p: &CMat, alpha: f64) -> Result<CMat> {
    let e = HermitianEigen::new(p)?;
    if e.min_value() < -1e-12 * e.max_abs_value().max(1.0) {
        return Err(Error::arg("matrix is not positive semidefinite"));
    }
    Ok(e.map(|x| C64::new(x.max(0.0).powf(alpha), 0.0)))
}

/// Löwner–Heinz: `Q ≤ P` implies `Q^α ≤ P^α` for `α ∈ (0, 1)`. Returns whether
/// `P^α − Q^α` has minimal eigenvalue at least `-1e-10`.
pub fn loewner_fractional_check(p: &CMat, q: &CMat, alpha: f64) -> Result<bool> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    for (name, m) in [("P", p), ("Q", q)] {
        let asym = (m - m.adjoint()).norm();
        if asym > 1e-12 * m.norm().max(1.0) {
            return Err(Error::arg(format!("{name} is not Hermitian")));
        }
    }
    if HermitianEigen::new(q)?.min_value() <= 0.0 {
        return Err(Error::arg("Q must be positive definite"));
    }
    if HermitianEigen::new(&(p - q))?.min_value() < -1e-12 {
        return Err(Error::arg("precondition Q <= P fails"));
    }
    let diff = hermitian_power(p, alpha)? - hermitian_power(q, alpha)?;
    Ok(HermitianEigen::new(&hermitize(&diff))?.min_value() >= -1e-10)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeBoundCurve {
    /// `(λ, ‖B_N (λ − A_N)^{-1}‖)` on the grid `2^m λ_min`, `m = 0..=40`.
    pub curve: Vec<(f64, f64)>,
    pub infimum: f64,
}

/// Diagnostic for the `A`-bound of `B`. A finite truncation always decays to
/// zero; the curve is meant for comparison across `N`.
pub fn relative_bound_estimate(system: &GalerkinSystem) -> Result<RelativeBoundCurve> {
    require_invertible(system)?;
    let n = system.dim();
    let curve: Vec<(f64, f64)> = (0..=40)
        .map(|m| {
            let lam = system.lambda_min * 2f64.powi(m);
            let scaled = CMat::from_fn(n, n, |i, j| {
                system.b[(i, j)] / C64::new(lam, -system.eigenvalues[j])
            });
            (lam, spectral_norm(&scaled))
        })
        .collect();
    let infimum = curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(RelativeBoundCurve { curve, infimum })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub k: f64,
    pub orders: Vec<usize>,
    pub constants: Vec<f64>,
    pub nondecreasing: bool,
    /// Largest `log(‖e^{vB}ψ‖_{k/2} / ‖ψ‖_{k/2}) / |v|` over kick samples.
    pub max_kick_rate: f64,
    pub pass: bool,
}

/// `c_k(A_N, B_N)` along `orders`, plus kick-growth samples at every order
/// checked against the constant of the largest order.
pub fn compression_monotonicity_check(model: &SpectralModel, k: f64, orders: &[usize]) -> Result<MonotonicityReport> {
    if orders.is_empty() || orders.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("orders must be a nonempty increasing list"));
    }
    let systems = orders.iter().map(|&n| model.compress(n)).collect::<Result<Vec<_>>>()?;
    let constants = systems
        .iter()
        .map(|s| weak_coupling_constant(s, k))
        .collect::<Result<Vec<_>>>()?;
    let tol = 1e-9;
    let nondecreasing = constants.windows(2).all(|w| w[1] >= w[0] - tol * w[0].max(1.0));
    let c_max = *constants.last().expect("nonempty");
    let mut max_rate = 0.0f64;
    let mut kicks_ok = true;
    for sys in &systems {
        for v in [-1.0, -0.25, 0.25, 1.0] {
            let e = kick(sys, v)?;
            for idx in 0..sys.dim().min(6) {
                let psi = e.column(idx).into_owned();
                let before = sys.eigenvalues[idx].abs().powf(k / 2.0);
                let after = sobolev_norm(sys, &psi, k / 2.0)?;
                let ratio = after / before;
                max_rate = max_rate.max(ratio.ln() / v.abs());
                kicks_ok &= ratio <= (c_max * v.abs()).exp() * (1.0 + tol);
            }
        }
    }
    Ok(MonotonicityReport {
        k,
        orders: orders.to_vec(),
        constants,
        nondecreasing,
        max_kick_rate: max_rate,
        pass: nondecreasing && kicks_ok,
    })
}
