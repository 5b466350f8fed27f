//! Truncated Dyson series in powers of the control.
//!
//! The propagator is expanded as `Υ = Σ_m Y_(m)` where `Y_(m)` is homogeneous
//! of degree `m` in the control measure. We carry the stack `Φ_m = Y_(m) ψ0`
//! through the factor sequence. Atoms mix the stack through `e^{wB}`'s Taylor
//! blocks `w^r B^r / r!`. On a density piece of level `c` the stack obeys
//! `Φ_m' = A Φ_m + c B Φ_{m-1}`, which is integrated exactly: since `A` is
//! diagonal, every component of `e^{-tA} Φ_m(t)` is a finite sum of
//! exponentials `e^{i(λ_l - λ_j)t}` times polynomials in `t`.

use serde::Serialize;

use super::propagate_radon;
use crate::control::{RadonControl, Segment};
use crate::error::{Error, Result};
use crate::linalg::{norm, spectral_norm, CMat, CVec, C64, I};
use crate::model::GalerkinSystem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DysonEstimate {
    pub order: usize,
    /// `Σ_{m > n} ‖B‖^m TV^m / m! · ‖ψ0‖`.
    pub remainder_bound: f64,
    /// `‖dyson − product‖` at the final time.
    pub observed: f64,
    /// `‖Σ_{m > n} Φ_m‖`, the omitted terms summed until they stop
    /// contributing. Unlike `observed` it carries no roundoff from the
    /// product scheme, which near order 12 exceeds the bound itself.
    pub truncation: f64,
    pub coupling_norm: f64,
    pub total_variation: f64,
}

impl DysonEstimate {
    pub fn sound(&self) -> bool {
        self.truncation <= self.remainder_bound
    }
}

/// `Σ_{m > order} x^m / m!`, summed term by term so that small tails keep
/// their relative accuracy. Underflowing terms saturate the sum at zero.
pub fn dyson_remainder_bound(x: f64, order: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0f64;
    for m in 1..=order + 1 {
        term *= x / m as f64;
    }
    let mut sum = 0.0;
    let mut m = order + 1;
    while term > 0.0 && term.is_finite() && term > 1e-18 * sum {
        sum += term;
        m += 1;
        term *= x / m as f64;
    }
    sum
}

/// Polynomial-exponential components: `coeff[(j, l, d)]` multiplies
/// `t^d e^{i(λ_l - λ_j) t}` in component `j`.
struct PolyExp {
    n: usize,
    degrees: usize,
    coeff: Vec<C64>,
}

impl PolyExp {
    fn zeros(n: usize, degrees: usize) -> Self {
        Self {
            n,
            degrees,
            coeff: vec![C64::new(0.0, 0.0); n * n * degrees],
        }
    }

    fn idx(&self, j: usize, l: usize, d: usize) -> usize {
        (j * self.n + l) * self.degrees + d
    }

    fn poly(&self, j: usize, l: usize) -> &[C64] {
        let i = self.idx(j, l, 0);
        &self.coeff[i..i + self.degrees]
    }

    fn poly_mut(&mut self, j: usize, l: usize) -> &mut [C64] {
        let i = self.idx(j, l, 0);
        &mut self.coeff[i..i + self.degrees]
    }

    /// `e^{tA}` applied to the represented interaction-frame vector at `t`.
    fn evaluate(&self, lambda: &[f64], t: f64) -> CVec {
        let phases: Vec<C64> = lambda.iter().map(|&l| C64::from_polar(1.0, l * t)).collect();
        CVec::from_fn(self.n, |j, _| {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..self.n {
                let p = self.poly(j, l);
                if p.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    continue;
                }
                let mut v = C64::new(0.0, 0.0);
                for z in p.iter().rev() {
                    v = v * t + z;
                }
                acc += phases[l] * v;
            }
            acc
        })
    }
}

/// Flow the stack across a density piece of duration `h` and level `c`.
fn flow_stack(lambda: &[f64], b: &CMat, c: f64, h: f64, stack: &[CVec], resonance: f64) -> Vec<CVec> {
    let n = lambda.len();
    let order = stack.len() - 1;
    let mut out = Vec::with_capacity(stack.len());
    let mut prev = PolyExp::zeros(n, 1);
    for j in 0..n {
        prev.poly_mut(j, j)[0] = stack[0][j];
    }
    out.push(prev.evaluate(lambda, h));
    for m in 1..=order {
        let degrees = m + 1;
        let mut cur = PolyExp::zeros(n, degrees);
        for j in 0..n {
            cur.poly_mut(j, j)[0] = stack[m][j];
        }
        if c != 0.0 {
            let mut q = vec![C64::new(0.0, 0.0); prev.degrees];
            for j in 0..n {
                for l in 0..n {
                    q.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    for k in 0..n {
                        let bjk = b[(j, k)];
                        if bjk == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let bjk = bjk * c;
                        for (qd, pd) in q.iter_mut().zip(prev.poly(k, l)) {
                            *qd += bjk * pd;
                        }
                    }
                    if q.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                        continue;
                    }
                    let omega = lambda[l] - lambda[j];
                    if omega.abs() <= resonance {
                        // ∫_0^t s^d ds = t^{d+1}/(d+1).
                        let p = cur.poly_mut(j, l);
                        for (d, z) in q.iter().enumerate() {
                            p[d + 1] += z / (d + 1) as f64;
                        }
                    } else {
                        // ∫_0^t e^{iωs} q(s) ds = e^{iωt} R(t) − R(0) with
                        // R = (1/iω) Σ_r (i/ω)^r q^{(r)}.
                        let mut r = vec![C64::new(0.0, 0.0); degrees];
                        let mut deriv = q.clone();
                        let mut factor = 1.0 / (I * omega);
                        let z = I / omega;
                        while !deriv.is_empty() {
                            for (rd, dd) in r.iter_mut().zip(&deriv) {
                                *rd += factor * dd;
                            }
                            deriv = deriv.iter().enumerate().skip(1).map(|(d, v)| v * d as f64).collect();
                            factor *= z;
                        }
                        let r0 = r[0];
                        for (pd, rd) in cur.poly_mut(j, l).iter_mut().zip(&r) {
                            *pd += rd;
                        }
                        cur.poly_mut(j, j)[0] -= r0;
                    }
                }
            }
        }
        out.push(cur.evaluate(lambda, h));
        prev = cur;
    }
    out
}

/// Mix the stack through `e^{wB} = Σ_r w^r B^r / r!`.
fn kick_stack(b: &CMat, w: f64, stack: &[CVec]) -> Vec<CVec> {
    let order = stack.len() - 1;
    let mut out = stack.to_vec();
    if w == 0.0 {
        return out;
    }
    for (p, phi) in stack.iter().enumerate() {
        // term = (wB)^r / r! Φ_p, added to order p + r.
        let mut term = phi.clone();
        for r in 1..=order - p {
            term = (b * &term) * C64::new(w / r as f64, 0.0);
            out[p + r] += &term;
        }
    }
    out
}

/// Dyson terms `Φ_0 .. Φ_order` at the final time.
pub fn dyson_terms(system: &GalerkinSystem, u: &RadonControl, psi0: &CVec, order: usize) -> Result<Vec<CVec>> {
    system.check_state(psi0)?;
    let n = system.dim();
    let lambda = &system.eigenvalues;
    let scale = lambda.iter().map(|l| l.abs()).fold(1.0, f64::max);
    let resonance = 1e-12 * scale;
    let mut stack = vec![CVec::zeros(n); order + 1];
    stack[0] = psi0.clone();
    for seg in u.segments() {
        stack = match seg {
            Segment::Flow { u, start, end } => flow_stack(lambda, &system.b, u, end - start, &stack, resonance),
            Segment::Kick { w, .. } => kick_stack(&system.b, w, &stack),
        };
        if stack.iter().any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::numerical("non-finite Dyson term"));
        }
    }
    Ok(stack)
}

/// Partial Dyson sum through `order` at time `T`, with its remainder bound
/// and the observed discrepancy against the product scheme.
pub fn dyson_propagate(
    system: &GalerkinSystem,
    u: &RadonControl,
    psi0: &CVec,
    order: usize,
) -> Result<(CVec, DysonEstimate)> {
    let coupling_norm = spectral_norm(&system.b);
    let tv = u.total_variation();
    let remainder_bound = dyson_remainder_bound(coupling_norm * tv, order) * norm(psi0);
    // Extra orders until the bound on what they omit is negligible.
    let mut extra = 1;
    while extra < 64 && dyson_remainder_bound(coupling_norm * tv, order + extra) * norm(psi0) > 1e-6 * remainder_bound {
        extra += 1;
    }
    let terms = dyson_terms(system, u, psi0, order + extra)?;
    let mut state = CVec::zeros(system.dim());
    for t in &terms[..=order] {
        state += t;
    }
    let mut tail = CVec::zeros(system.dim());
    for t in terms[order + 1..].iter().rev() {
        tail += t;
    }
    let product = propagate_radon(system, u, psi0, &[u.horizon()])?;
    let estimate = DysonEstimate {
        order,
        remainder_bound,
        observed: norm(&(&state - product.final_state())),
        truncation: norm(&tail),
        coupling_norm,
        total_variation: tv,
    };
    Ok((state, estimate))
}
