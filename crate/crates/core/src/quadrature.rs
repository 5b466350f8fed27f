//! Gauss–Hermite quadrature in Hermite-function form.
//!
//! Nodes are the roots of `H_n`, found as eigenvalues of the Jacobi matrix and
//! polished by Newton steps. Weights are never formed directly: for `n` in the
//! thousands they underflow. Instead the Christoffel identity
//! `w_i e^{x_i^2} = 1 / Σ_{m<n} ψ_m(x_i)^2` is evaluated in log scale, where
//! `ψ_m` are the normalized Hermite functions.

use crate::error::{Error, Result};

const RESCALE: f64 = 1e150;

/// Normalized Hermite functions `ψ_0..ψ_{n-1}` at `x`, stored as
/// `(mantissa, log_scale)` so that `ψ_m(x) = mantissa * exp(log_scale)`.
fn scaled_hermite_functions(n: usize, x: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    for m in 0..n {
        out.push((cur, log_scale));
        let next = (2.0 / (m as f64 + 1.0)).sqrt() * x * cur - (m as f64 / (m as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    out
}

/// Plain evaluation of `ψ_0..ψ_{n-1}` at `x`; underflows gracefully to zero.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    scaled_hermite_functions(n, x)
        .into_iter()
        .map(|(m, l)| m * l.exp())
        .collect()
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL with shifts).
fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&offdiag[..n.saturating_sub(1)]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::numerical("tridiagonal QL iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// An `n`-point Gauss–Hermite rule.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    /// `log Σ_{m<n} ψ_m(x_i)^2`, i.e. `-log(w_i e^{x_i^2})`.
    log_christoffel: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("Gauss–Hermite rule needs at least one node"));
        }
        let off: Vec<f64> = (1..n).map(|m| (m as f64 / 2.0).sqrt()).collect();
        let mut nodes = tridiagonal_eigenvalues(&vec![0.0; n], &off)?;
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let psi = scaled_hermite_functions(n + 1, *x);
                let (pn, ln) = psi[n];
                let (pm, lm) = psi[n - 1];
                // ψ_n' = sqrt(2n) ψ_{n-1} - x ψ_n; ratio taken in a common scale.
                let pm = pm * (lm - ln).exp();
                let deriv = (2.0 * n as f64).sqrt() * pm - *x * pn;
                if deriv == 0.0 || !deriv.is_finite() {
                    break;
                }
                *x -= pn / deriv;
            }
        }
        let log_christoffel = nodes
            .iter()
            .map(|&x| {
                let psi = scaled_hermite_functions(n, x);
                let logs: Vec<f64> = psi
                    .iter()
                    .filter(|(m, _)| *m != 0.0)
                    .map(|(m, l)| 2.0 * (m.abs().ln() + l))
                    .collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                top + logs.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
            })
            .collect();
        Ok(Self {
            nodes,
            log_christoffel,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Matrix `M_{jk} = ∫ ψ_j(x) g(x) ψ_k(x) dx` for `j, k < dim`.
    pub fn hermite_matrix(&self, dim: usize, g: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; dim]; dim];
        for (i, &x) in self.nodes.iter().enumerate() {
            let gx = g(x);
            if gx == 0.0 {
                continue;
            }
            let lw = self.log_christoffel[i];
            // ψ_j sqrt(w e^{x^2}) for every j.
            let vals: Vec<f64> = scaled_hermite_functions(dim, x)
                .into_iter()
                .map(|(m, l)| {
                    if m == 0.0 {
                        0.0
                    } else {
                        m.signum() * (m.abs().ln() + l - 0.5 * lw).exp()
                    }
                })
                .collect();
            for j in 0..dim {
                if vals[j] == 0.0 {
                    continue;
                }
                let vj = vals[j] * gx;
                for k in j..dim {
                    out[j][k] += vj * vals[k];
                }
            }
        }
        for j in 0..dim {
            for k in 0..j {
                out[j][k] = out[k][j];
            }
        }
        out
    }
}

/// Node-doubling evaluation of `∫ ψ_j g ψ_k` until the largest relative entry
/// change drops below `tol`. Fails if `max_nodes` is reached with a change above
/// `fail_tol`.
pub fn adaptive_hermite_matrix(
    dim: usize,
    g: impl Fn(f64) -> f64 + Copy,
    tol: f64,
    fail_tol: f64,
    max_nodes: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut n = (dim + 8).next_power_of_two().min(max_nodes);
    let mut prev = GaussHermite::new(n)?.hermite_matrix(dim, g);
    loop {
        if n >= max_nodes {
            return Err(Error::numerical(format!(
                "Gauss–Hermite quadrature did not reach tolerance {fail_tol:e} within {max_nodes} nodes"
            )));
        }
        n = (2 * n).min(max_nodes);
        let next = GaussHermite::new(n)?.hermite_matrix(dim, g);
        let scale = next
            .iter()
            .flatten()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let change = next
            .iter()
            .flatten()
            .zip(prev.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        if change < tol || (n >= max_nodes && change < fail_tol) {
            return Ok(next);
        }
        prev = next;
    }
}
