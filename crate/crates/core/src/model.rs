//! Spectral models `(A, B)` in the eigenbasis of `A` and their Galerkin
//! compressions.
//!
//! `A` acts as `i·λ_k` on the `k`-th basis vector (1-based), `B` through its
//! matrix elements `b_jk = ⟨φ_j, B φ_k⟩`. Two worked models are built in: the
//! infinite square well on `(0, 1)` with dipolar coupling, and the harmonic
//! oscillator with an optional Gaussian perturbation of the dipole.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, HermitianEigen, C64, I};
use crate::quadrature::adaptive_hermite_matrix;

const QUADRATURE_TOL: f64 = 1e-12;
const QUADRATURE_FAIL_TOL: f64 = 1e-10;
const QUADRATURE_MAX_NODES: usize = 2048;
const SKEW_TOL: f64 = 1e-12;

/// Where the eigenvalues `λ_k` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Table(Vec<f64>),
    /// `λ_k = k²π²/2`.
    Well,
    /// `λ_k = (2k-1)/2 + η ν ⟨φ_k, e^{-a x²} φ_k⟩`.
    Oscillator { nu: f64, a: f64, eta: f64 },
    /// `λ_k = (2k-1)/2 + 2/(2k-1)`; pairs with [`Coupling::Quartic`].
    ShiftedOscillator,
}

/// Where the coupling matrix `b_jk` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Table(CMat),
    /// `B = i(x - 1/2)` on `(0,1)` when `centered`, `B = i x` otherwise.
    Well { centered: bool },
    /// `B = i(x + ν e^{-a x²})` in the Hermite basis.
    Oscillator { nu: f64, a: f64 },
    /// `B = i x⁴` in the Hermite basis.
    Quartic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub name: String,
    pub spectrum: Spectrum,
    pub coupling: Coupling,
    pub lambda_shift: f64,
}

/// Potential-well dipole element `⟨φ_j, x φ_k⟩` with `φ_k = √2 sin(kπx)` on `(0,1)`,
/// off the diagonal.
pub fn well_dipole(j: usize, k: usize) -> f64 {
    if j == k || (j + k) % 2 == 0 {
        return 0.0;
    }
    let (jf, kf) = (j as f64, k as f64);
    let d = (jf - kf) * (jf + kf);
    -8.0 * jf * kf / (PI * PI * d * d)
}

fn ladder_dipole(n: usize) -> Vec<Vec<f64>> {
    let mut x = vec![vec![0.0; n]; n];
    for k in 1..n {
        let v = (k as f64 / 2.0).sqrt();
        x[k - 1][k] = v;
        x[k][k - 1] = v;
    }
    x
}

fn gaussian_matrix(n: usize, a: f64) -> Result<Vec<Vec<f64>>> {
    adaptive_hermite_matrix(
        n,
        move |x| (-a * x * x).exp(),
        QUADRATURE_TOL,
        QUADRATURE_FAIL_TOL,
        QUADRATURE_MAX_NODES,
    )
}

impl Spectrum {
    fn max_index(&self) -> Option<usize> {
        match self {
            Spectrum::Table(v) => Some(v.len()),
            _ => None,
        }
    }

    fn values(&self, n: usize) -> Result<Vec<f64>> {
        Ok(match self {
            Spectrum::Table(v) => v[..n].to_vec(),
            Spectrum::Well => (1..=n).map(|k| (k as f64 * PI).powi(2) / 2.0).collect(),
            Spectrum::Oscillator { nu, a, eta } => {
                let base = (1..=n).map(|k| (2 * k - 1) as f64 / 2.0);
                if *eta == 0.0 || *nu == 0.0 {
                    base.collect()
                } else {
                    let g = gaussian_matrix(n, *a)?;
                    base.enumerate().map(|(i, l)| l + eta * nu * g[i][i]).collect()
                }
            }
            Spectrum::ShiftedOscillator => (1..=n)
                .map(|k| {
                    let m = (2 * k - 1) as f64;
                    m / 2.0 + 2.0 / m
                })
                .collect(),
        })
    }
}

impl Coupling {
    fn max_index(&self) -> Option<usize> {
        match self {
            Coupling::Table(m) => Some(m.nrows()),
            _ => None,
        }
    }

    fn matrix(&self, n: usize) -> Result<CMat> {
        Ok(match self {
            Coupling::Table(m) => m.view((0, 0), (n, n)).into_owned(),
            Coupling::Well { centered } => CMat::from_fn(n, n, |j, k| {
                if j == k {
                    if *centered {
                        c(0.0, 0.0)
                    } else {
                        c(0.0, 0.5)
                    }
                } else {
                    I * well_dipole(j + 1, k + 1)
                }
            }),
            Coupling::Oscillator { nu, a } => {
                let x = ladder_dipole(n);
                let g = if *nu == 0.0 {
                    None
                } else {
                    Some(gaussian_matrix(n, *a)?)
                };
                CMat::from_fn(n, n, |j, k| {
                    let extra = g.as_ref().map_or(0.0, |g| nu * g[j][k]);
                    I * (x[j][k] + extra)
                })
            }
            Coupling::Quartic => {
                let x = ladder_dipole(n + 4);
                let xm = nalgebra::DMatrix::from_fn(n + 4, n + 4, |j, k| x[j][k]);
                let x2 = &xm * &xm;
                let x4 = &x2 * &x2;
                CMat::from_fn(n, n, |j, k| I * x4[(j, k)])
            }
        })
    }
}

impl SpectralModel {
    /// Infinite square well with dipolar coupling, diagonal centered.
    pub fn potential_well() -> Self {
        Self::potential_well_with(true)
    }

    pub fn potential_well_with(centered: bool) -> Self {
        Self {
            name: if centered { "well" } else { "well-raw" }.to_string(),
            spectrum: Spectrum::Well,
            coupling: Coupling::Well { centered },
            lambda_shift: 0.0,
        }
    }

    pub fn harmonic_oscillator(nu: f64, a: f64, eta: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::arg(format!("Gaussian width parameter must be positive, got {a}")));
        }
        if !nu.is_finite() || !eta.is_finite() {
            return Err(Error::arg("oscillator parameters must be finite"));
        }
        Ok(Self {
            name: "oscillator".to_string(),
            spectrum: Spectrum::Oscillator { nu, a, eta },
            coupling: Coupling::Oscillator { nu, a },
            lambda_shift: 0.0,
        })
    }

    /// Negative-control model whose steering targets escape every truncation.
    pub fn no_good_galerkin() -> Self {
        Self {
            name: "no-good-galerkin".to_string(),
            spectrum: Spectrum::ShiftedOscillator,
            coupling: Coupling::Quartic,
            lambda_shift: 0.0,
        }
    }

    /// Model from explicit tables, validated; eigenvalues are sorted and the
    /// coupling permuted along with them.
    pub fn from_tables(
        name: impl Into<String>,
        eigenvalues: Vec<f64>,
        coupling: CMat,
        lambda_shift: Option<f64>,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(Error::Validation(format!(
                "coupling table is {}x{}, expected {n}x{n}",
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        if let Some(k) = eigenvalues.iter().position(|l| !l.is_finite()) {
            return Err(Error::Validation(format!("eigenvalue {} is not finite", k + 1)));
        }
        let offending = skew_violations(&coupling, SKEW_TOL);
        if !offending.is_empty() {
            let list: Vec<String> = offending
                .iter()
                .take(32)
                .map(|(j, k)| format!("({j},{k})"))
                .collect();
            return Err(Error::Validation(format!(
                "coupling is not skew-Hermitian at {}{}",
                list.join(", "),
                if offending.len() > 32 { ", ..." } else { "" }
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let permuted = CMat::from_fn(n, n, |j, k| coupling[(order[j], order[k])]);
        let shift = match lambda_shift {
            Some(s) if s.is_finite() => s,
            Some(s) => return Err(Error::Validation(format!("lambda_shift {s} is not finite"))),
            None => default_shift(&sorted),
        };
        let model = Self {
            name: name.into(),
            spectrum: Spectrum::Table(sorted),
            coupling: Coupling::Table(permuted),
            lambda_shift: shift,
        };
        if let Some(v) = model.spectrum.values(n)?.iter().map(|l| (l + shift).abs()).reduce(f64::min) {
            if v == 0.0 {
                return Err(Error::Validation("A is singular after the spectral shift".into()));
            }
        }
        Ok(model)
    }

    /// Largest index with defined entries; `None` for closed-form models.
    pub fn max_index(&self) -> Option<usize> {
        match (self.spectrum.max_index(), self.coupling.max_index()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Order-`n` Galerkin compression: leading `n×n` blocks of `A` and `B`.
    pub fn compress(&self, n: usize) -> Result<GalerkinSystem> {
        if n == 0 {
            return Err(Error::arg("truncation order must be at least 1"));
        }
        if let Some(max) = self.max_index() {
            if n > max {
                return Err(Error::arg(format!("truncation order {n} exceeds model size {max}")));
            }
        }
        let eigenvalues: Vec<f64> = self
            .spectrum
            .values(n)?
            .into_iter()
            .map(|l| l + self.lambda_shift)
            .collect();
        let b = self.coupling.matrix(n)?;
        GalerkinSystem::new(self.name.clone(), eigenvalues, b, self.lambda_shift)
    }

    /// Tabulated description of the first `n` modes.
    pub fn to_record(&self, n: usize) -> Result<ModelRecord> {
        let eigenvalues = self.spectrum.values(n)?;
        let b = self.coupling.matrix(n)?;
        let table = (0..n)
            .map(|j| (0..n).map(|k| [b[(j, k)].re, b[(j, k)].im]).collect())
            .collect();
        Ok(ModelRecord {
            name: self.name.clone(),
            eigenvalues: EigenvalueSpec::Table(eigenvalues),
            coupling: CouplingSpec::Table(table),
            lambda_shift: Some(self.lambda_shift),
        })
    }

    /// Closed-form description, when the model has one.
    pub fn to_formula_record(&self) -> Option<ModelRecord> {
        let eigenvalues = match &self.spectrum {
            Spectrum::Well => FormulaSpec::Well {},
            Spectrum::Oscillator { nu, a, eta } => FormulaSpec::Oscillator {
                nu: *nu,
                a: *a,
                eta: *eta,
            },
            Spectrum::ShiftedOscillator => FormulaSpec::ShiftedOscillator {},
            Spectrum::Table(_) => return None,
        };
        let coupling = match &self.coupling {
            Coupling::Well { centered } => BuiltinCoupling::Well {
                centered: *centered,
            },
            Coupling::Oscillator { nu, a } => BuiltinCoupling::Oscillator { nu: *nu, a: *a },
            Coupling::Quartic => BuiltinCoupling::Quartic {},
            Coupling::Table(_) => return None,
        };
        Some(ModelRecord {
            name: self.name.clone(),
            eigenvalues: EigenvalueSpec::Formula(eigenvalues),
            coupling: CouplingSpec::Builtin(coupling),
            lambda_shift: Some(self.lambda_shift),
        })
    }
}

fn skew_violations(b: &CMat, tol: f64) -> Vec<(usize, usize)> {
    let n = b.nrows();
    let mut out = Vec::new();
    for j in 0..n {
        for k in j..n {
            let s = b[(j, k)] + b[(k, j)].conj();
            let scale = 1.0f64.max(b[(j, k)].norm()).max(b[(k, j)].norm());
            if !(s.norm() <= tol * scale) {
                out.push((j + 1, k + 1));
            }
        }
    }
    out
}

/// Zero unless some eigenvalue vanishes; then the smallest shift (by
/// magnitude, positive on ties) making every `|λ_k + shift| ≥ 1/2`.
fn default_shift(eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().map(|l| l.abs()).fold(1.0, f64::max);
    if eigenvalues.iter().all(|l| l.abs() > 1e-14 * scale) {
        return 0.0;
    }
    let valid = |s: f64| eigenvalues.iter().all(|l| (l + s).abs() >= 0.5);
    let mut candidates: Vec<f64> = eigenvalues
        .iter()
        .flat_map(|l| [0.5 - l, -0.5 - l])
        .filter(|&s| valid(s))
        .collect();
    candidates.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)));
    candidates.first().copied().unwrap_or(0.5)
}

/// Order-`N` compression `(A_N, B_N)` as dense complex matrices.
#[derive(Debug)]
pub struct GalerkinSystem {
    pub name: String,
    /// `λ_k` including the spectral shift.
    pub eigenvalues: Vec<f64>,
    /// `A_N = i diag(λ)`.
    pub a: CMat,
    pub b: CMat,
    pub lambda_min: f64,
    pub lambda_shift: f64,
    coupling_eigen: OnceLock<std::result::Result<HermitianEigen, String>>,
}

impl Clone for GalerkinSystem {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            eigenvalues: self.eigenvalues.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            lambda_min: self.lambda_min,
            lambda_shift: self.lambda_shift,
            coupling_eigen: OnceLock::new(),
        }
    }
}

impl PartialEq for GalerkinSystem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.eigenvalues == other.eigenvalues
            && self.b == other.b
            && self.lambda_shift == other.lambda_shift
    }
}

impl GalerkinSystem {
    pub fn new(name: String, eigenvalues: Vec<f64>, b: CMat, lambda_shift: f64) -> Result<Self> {
        let n = eigenvalues.len();
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: b.nrows(),
            });
        }
        let offending = skew_violations(&b, 1e-10);
        if let Some((j, k)) = offending.first() {
            return Err(Error::Validation(format!("B_N is not skew-Hermitian at ({j},{k})")));
        }
        let a = CMat::from_diagonal(&CVec::from_iterator(n, eigenvalues.iter().map(|&l| I * l)));
        let lambda_min = eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        Ok(Self {
            name,
            eigenvalues,
            a,
            b,
            lambda_min,
            lambda_shift,
            coupling_eigen: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `-i(A_N + u B_N)`, the Hermitian generator at control level `u`.
    pub fn hamiltonian(&self, u: f64) -> CMat {
        let mut h = self.b.map(|z| -I * z * u);
        for (k, l) in self.eigenvalues.iter().enumerate() {
            h[(k, k)] += C64::new(*l, 0.0);
        }
        h
    }

    /// Eigendecomposition of the Hermitian matrix `-i B_N`, computed once.
    pub fn coupling_eigen(&self) -> Result<&HermitianEigen> {
        self.coupling_eigen
            .get_or_init(|| HermitianEigen::new(&self.b.map(|z| -I * z)).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Numerical(e.clone()))
    }

    /// Leading `m×m` compression of this system.
    pub fn truncate(&self, m: usize) -> Result<GalerkinSystem> {
        if m == 0 || m > self.dim() {
            return Err(Error::arg(format!("cannot truncate order {} system to {m}", self.dim())));
        }
        GalerkinSystem::new(
            self.name.clone(),
            self.eigenvalues[..m].to_vec(),
            self.b.view((0, 0), (m, m)).into_owned(),
            self.lambda_shift,
        )
    }

    /// Whether entrywise complex conjugation anticommutes with `A_N` and `B_N`
    /// (real `λ`, purely imaginary `b_jk`).
    pub fn conjugation_reversible(&self) -> bool {
        self.b.iter().all(|z| z.re == 0.0)
    }

    pub fn check_state(&self, psi: &CVec) -> Result<()> {
        if psi.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: psi.len(),
            });
        }
        Ok(())
    }
}

pub fn build_potential_well(n: usize) -> Result<GalerkinSystem> {
    if n < 2 {
        return Err(Error::arg(format!("potential well needs N >= 2, got {n}")));
    }
    SpectralModel::potential_well().compress(n)
}

pub fn build_harmonic_oscillator(n: usize, nu: f64, a: f64, eta: f64) -> Result<GalerkinSystem> {
    if n < 2 {
        return Err(Error::arg(format!("harmonic oscillator needs N >= 2, got {n}")));
    }
    SpectralModel::harmonic_oscillator(nu, a, eta)?.compress(n)
}

/// `√(Σ_k |λ_k|^{2s} |ψ_k|²)`, the norm of `D(|A|^s)`.
pub fn sobolev_norm(system: &GalerkinSystem, psi: &CVec, s: f64) -> Result<f64> {
    system.check_state(psi)?;
    if !(s >= 0.0) {
        return Err(Error::arg(format!("Sobolev order must be nonnegative, got {s}")));
    }
    if !(system.lambda_min > 0.0) {
        return Err(Error::arg("Sobolev norm needs an invertible A"));
    }
    Ok(sobolev_norm_unchecked(&system.eigenvalues, psi, s))
}

pub(crate) fn sobolev_norm_unchecked(eigenvalues: &[f64], psi: &CVec, s: f64) -> f64 {
    crate::linalg::compensated_sum(
        eigenvalues
            .iter()
            .zip(psi.iter())
            .map(|(l, z)| if s == 0.0 { z.norm_sqr() } else { l.abs().powf(2.0 * s) * z.norm_sqr() }),
    )
    .sqrt()
}

// ---------------------------------------------------------------------------
// JSON description records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub name: String,
    pub eigenvalues: EigenvalueSpec,
    pub coupling: CouplingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EigenvalueSpec {
    Table(Vec<f64>),
    Formula(FormulaSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case", deny_unknown_fields)]
pub enum FormulaSpec {
    Well {},
    Oscillator {
        #[serde(default)]
        nu: f64,
        #[serde(default = "default_width")]
        a: f64,
        #[serde(default)]
        eta: f64,
    },
    ShiftedOscillator {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingSpec {
    Table(Vec<Vec<[f64; 2]>>),
    Builtin(BuiltinCoupling),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinCoupling {
    Well {
        #[serde(default = "default_true")]
        centered: bool,
    },
    Oscillator {
        #[serde(default)]
        nu: f64,
        #[serde(default = "default_width")]
        a: f64,
    },
    Quartic {},
}

fn default_width() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl ModelRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Validated model from a description record.
pub fn build_from_spec(record: &ModelRecord) -> Result<SpectralModel> {
    let spectrum = match &record.eigenvalues {
        EigenvalueSpec::Table(v) => Spectrum::Table(v.clone()),
        EigenvalueSpec::Formula(FormulaSpec::Well {}) => Spectrum::Well,
        EigenvalueSpec::Formula(FormulaSpec::Oscillator { nu, a, eta }) => {
            if !(*a > 0.0) {
                return Err(Error::arg(format!("Gaussian width parameter must be positive, got {a}")));
            }
            Spectrum::Oscillator {
                nu: *nu,
                a: *a,
                eta: *eta,
            }
        }
        EigenvalueSpec::Formula(FormulaSpec::ShiftedOscillator {}) => Spectrum::ShiftedOscillator,
    };
    let coupling = match &record.coupling {
        CouplingSpec::Table(rows) => {
            let n = rows.len();
            if let Some(j) = rows.iter().position(|r| r.len() != n) {
                return Err(Error::Validation(format!(
                    "coupling row {} has {} entries, expected {n}",
                    j + 1,
                    rows[j].len()
                )));
            }
            Coupling::Table(CMat::from_fn(n, n, |j, k| c(rows[j][k][0], rows[j][k][1])))
        }
        CouplingSpec::Builtin(BuiltinCoupling::Well { centered }) => Coupling::Well {
            centered: *centered,
        },
        CouplingSpec::Builtin(BuiltinCoupling::Oscillator { nu, a }) => {
            if !(*a > 0.0) {
                return Err(Error::arg(format!("Gaussian width parameter must be positive, got {a}")));
            }
            Coupling::Oscillator { nu: *nu, a: *a }
        }
        CouplingSpec::Builtin(BuiltinCoupling::Quartic {}) => Coupling::Quartic,
    };
    match (spectrum, coupling) {
        (Spectrum::Table(eig), Coupling::Table(b)) => {
            SpectralModel::from_tables(record.name.clone(), eig, b, record.lambda_shift)
        }
        (spectrum, coupling) => {
            // Closed forms on either side: tabulate the closed part over the
            // table's size so the same validation path applies.
            let model = SpectralModel {
                name: record.name.clone(),
                spectrum,
                coupling,
                lambda_shift: 0.0,
            };
            match model.max_index() {
                Some(n) => {
                    let eig = model.spectrum.values(n)?;
                    let b = model.coupling.matrix(n)?;
                    SpectralModel::from_tables(record.name.clone(), eig, b, record.lambda_shift)
                }
                None => {
                    let shift = record.lambda_shift.unwrap_or(0.0);
                    if !shift.is_finite() {
                        return Err(Error::Validation("lambda_shift is not finite".into()));
                    }
                    Ok(SpectralModel {
                        lambda_shift: shift,
                        ..model
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint-free composite Gauss–Legendre (5 points per panel) on (0,1).
    fn quad01(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
        let nodes = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let h = 1.0 / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes {
                s += w * f(mid + 0.5 * h * x) * 0.5 * h;
            }
        }
        s
    }

    fn well_element_by_quadrature(j: usize, k: usize) -> f64 {
        quad01(
            |x| 2.0 * (x - 0.5) * (j as f64 * PI * x).sin() * (k as f64 * PI * x).sin(),
            200,
        )
    }

    #[test]
    fn well_elements_match_quadrature_oracle() {
        let b23 = well_element_by_quadrature(2, 3);
        let b12 = well_element_by_quadrature(1, 2);
        assert!((b23.abs() - 48.0 / (25.0 * PI * PI)).abs() < 1e-12);
        assert!((b12.abs() - 16.0 / (9.0 * PI * PI)).abs() < 1e-12);
        let sys = build_potential_well(6).unwrap();
        for j in 1..=6 {
            for k in 1..=6 {
                let q = well_element_by_quadrature(j, k);
                assert!((sys.b[(j - 1, k - 1)].im - q).abs() < 1e-12, "({j},{k})");
                assert_eq!(sys.b[(j - 1, k - 1)].re, 0.0);
            }
        }
        assert!((b23.abs() - 0.19454).abs() < 1e-5);
        assert!(b23.abs() <= 0.48);
        assert_eq!(sys.b[(0, 2)], c(0.0, 0.0));
    }

    #[test]
    fn well_compression_matches_closed_form() {
        let sys = build_potential_well(4).unwrap();
        for k in 0..4 {
            let want = ((k + 1) as f64 * PI).powi(2) / 2.0;
            assert_eq!(sys.a[(k, k)], c(0.0, want));
        }
        assert!((sys.a[(1, 1)].im - 2.0 * PI * PI).abs() < 1e-12);
        assert!(build_potential_well(1).is_err());
    }

    #[test]
    fn well_nonzero_count_is_odd_parity_pairs() {
        for n in [2, 3, 8, 13, 32] {
            let sys = build_potential_well(n).unwrap();
            let mut oracle = 0;
            for j in 1..=n {
                for k in 1..=n {
                    if (j + k) % 2 == 1 {
                        oracle += 1;
                    }
                }
            }
            let nonzero = sys.b.iter().filter(|z| z.norm() != 0.0).count();
            assert_eq!(nonzero, oracle);
            assert_eq!(nonzero, n * n / 2);
        }
    }

    #[test]
    fn raw_well_has_constant_diagonal() {
        let sys = SpectralModel::potential_well_with(false).compress(5).unwrap();
        for k in 0..5 {
            assert_eq!(sys.b[(k, k)], c(0.0, 0.5));
        }
    }

    #[test]
    fn oscillator_unperturbed_is_ladder() {
        let sys = build_harmonic_oscillator(10, 0.0, 1.0, 0.0).unwrap();
        assert!((sys.b[(0, 1)].im - 0.5f64.sqrt()).abs() < 1e-15);
        for k in 0..10 {
            assert_eq!(sys.b[(k, k)], c(0.0, 0.0));
            assert_eq!(sys.eigenvalues[k], (2 * k + 1) as f64 / 2.0);
        }
        for j in 0..10 {
            for k in 0..10 {
                if (j as usize).abs_diff(k) != 1 {
                    assert_eq!(sys.b[(j, k)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn oscillator_dipole_matches_quadrature_oracle() {
        let gh = crate::quadrature::GaussHermite::new(64).unwrap();
        let q = gh.hermite_matrix(16, |x| x);
        let sys = build_harmonic_oscillator(16, 0.0, 1.0, 0.0).unwrap();
        for j in 0..16 {
            for k in 0..16 {
                assert!((sys.b[(j, k)].im - q[j][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oscillator_gaussian_entry() {
        let sys = build_harmonic_oscillator(4, 1.0, 2.0, 0.0).unwrap();
        // Entry (1,1): dipole part vanishes, Gaussian part is 1/sqrt(3).
        assert!((sys.b[(0, 0)].im - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let shifted = build_harmonic_oscillator(4, 1.0, 2.0, 0.5).unwrap();
        assert!((shifted.eigenvalues[0] - (0.5 + 0.5 / 3f64.sqrt())).abs() < 1e-12);
        for j in 0..4 {
            for k in 0..4 {
                assert!((sys.b[(j, k)] + sys.b[(k, j)].conj()).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn oscillator_rejects_bad_width() {
        assert!(matches!(build_harmonic_oscillator(4, 1.0, 0.0, 0.0), Err(Error::Argument(_))));
        assert!(matches!(build_harmonic_oscillator(4, 1.0, -1.0, 0.0), Err(Error::Argument(_))));
    }

    #[test]
    fn table_model_validation() {
        let ok = SpectralModel::from_tables("d", vec![1.0, 2.0, 3.0], CMat::zeros(3, 3), None).unwrap();
        assert_eq!(ok.compress(3).unwrap().lambda_min, 1.0);

        let mut b = CMat::zeros(2, 2);
        b[(0, 1)] = c(0.0, 1.0);
        b[(1, 0)] = c(0.0, 1.0);
        assert!(SpectralModel::from_tables("i", vec![1.0, 2.0], b, None).is_ok());

        let mut b = CMat::zeros(2, 2);
        b[(0, 1)] = c(1.0, 0.0);
        b[(1, 0)] = c(1.0, 0.0);
        match SpectralModel::from_tables("bad", vec![1.0, 2.0], b, None) {
            Err(Error::Validation(msg)) => assert!(msg.contains("(1,2)"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn zero_eigenvalue_gets_default_shift() {
        let m = SpectralModel::from_tables("z", vec![0.0, 1.0, 2.0], CMat::zeros(3, 3), None).unwrap();
        let sys = m.compress(3).unwrap();
        assert!(sys.lambda_min >= 0.5);
        assert_eq!(m.lambda_shift, 0.5);
        let m = SpectralModel::from_tables("z", vec![-1.0, 0.0, 1.0], CMat::zeros(3, 3), None).unwrap();
        assert!(m.compress(3).unwrap().lambda_min >= 0.5);
    }

    #[test]
    fn table_eigenvalues_are_sorted_with_coupling() {
        let mut b = CMat::zeros(2, 2);
        b[(0, 1)] = c(0.0, 0.3);
        b[(1, 0)] = c(0.0, 0.3);
        b[(0, 0)] = c(0.0, 0.7);
        let m = SpectralModel::from_tables("s", vec![5.0, 1.0], b, None).unwrap();
        let sys = m.compress(2).unwrap();
        assert_eq!(sys.eigenvalues, vec![1.0, 5.0]);
        assert_eq!(sys.b[(1, 1)], c(0.0, 0.7));
    }

    #[test]
    fn compress_beyond_table_is_error() {
        let m = SpectralModel::from_tables("d", vec![1.0, 2.0], CMat::zeros(2, 2), None).unwrap();
        assert!(matches!(m.compress(3), Err(Error::Argument(_))));
    }

    #[test]
    fn nested_compression() {
        let model = SpectralModel::harmonic_oscillator(0.5, 1.5, 0.0).unwrap();
        let big = model.compress(12).unwrap();
        let nested = big.truncate(7).unwrap();
        let direct = model.compress(7).unwrap();
        assert_eq!(nested.eigenvalues, direct.eigenvalues);
        assert!((nested.b - direct.b).norm() < 1e-12);

        let well = SpectralModel::potential_well();
        assert_eq!(well.compress(20).unwrap().truncate(9).unwrap(), well.compress(9).unwrap());
    }

    #[test]
    fn well_table_round_trip_is_identical() {
        let record = SpectralModel::potential_well().to_record(8).unwrap();
        let text = record.to_json().unwrap();
        let back = ModelRecord::from_json(&text).unwrap();
        assert_eq!(back, record);
        let rebuilt = build_from_spec(&back).unwrap().compress(8).unwrap();
        let builtin = build_potential_well(8).unwrap();
        assert_eq!(rebuilt.eigenvalues, builtin.eigenvalues);
        assert_eq!(rebuilt.b, builtin.b);
        for (x, y) in rebuilt.b.iter().zip(builtin.b.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn formula_records_parse() {
        let text = r#"{"name":"o","eigenvalues":{"formula":"oscillator","nu":1.0,"a":2.0},
                       "coupling":{"builtin":"oscillator","nu":1.0,"a":2.0}}"#;
        let model = build_from_spec(&ModelRecord::from_json(text).unwrap()).unwrap();
        assert_eq!(model.max_index(), None);
        assert_eq!(model.to_formula_record().unwrap().eigenvalues, ModelRecord::from_json(text).unwrap().eigenvalues);
        let bad = r#"{"name":"o","eigenvalues":{"formula":"well","bogus":1},"coupling":{"builtin":"well"}}"#;
        assert!(ModelRecord::from_json(bad).is_err());
        let extra = r#"{"name":"o","eigenvalues":[1],"coupling":[[[0,0]]],"extra":1}"#;
        assert!(ModelRecord::from_json(extra).is_err());
    }

    #[test]
    fn sobolev_norm_cases() {
        let sys = build_potential_well(2).unwrap();
        let r = 0.5f64.sqrt();
        let psi = CVec::from_vec(vec![c(r, 0.0), c(r, 0.0)]);
        let want = PI * PI * (17.0f64 / 8.0).sqrt();
        // Direct formula: sqrt(((π²/2)² + (2π²)²)/2).
        let direct = (((PI * PI / 2.0).powi(2) + (2.0 * PI * PI).powi(2)) / 2.0).sqrt();
        assert!((want - direct).abs() < 1e-12);
        assert!((sobolev_norm(&sys, &psi, 1.0).unwrap() - want).abs() < 1e-12);
        assert!((want - 14.3873).abs() < 1e-4);
        assert!((sobolev_norm(&sys, &psi, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let e2 = crate::linalg::basis_vector(2, 1);
        assert!((sobolev_norm(&sys, &e2, 0.75).unwrap() - (2.0 * PI * PI).powf(0.75)).abs() < 1e-12);
        assert!(sobolev_norm(&sys, &CVec::zeros(3), 0.0).is_err());
    }

    #[test]
    fn quartic_model_matches_dense_power() {
        let sys = SpectralModel::no_good_galerkin().compress(6).unwrap();
        // ⟨φ_1, x⁴ φ_1⟩ = 3/4 for the Gaussian ground state.
        assert!((sys.b[(0, 0)].im - 0.75).abs() < 1e-14);
        assert!((sys.eigenvalues[0] - 2.5).abs() < 1e-15);
    }
}
