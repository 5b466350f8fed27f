//! Scenario files: one JSON document per run, validated in full before any
//! computation starts.

use std::path::{Path, PathBuf};

use bilinear_core::linalg::{basis_vector, c, norm};
use bilinear_core::model::build_from_spec;
use bilinear_core::{CVec, Error, GalerkinSystem, ModelRecord, PiecewiseConstantControl, RadonControl, Result, SpectralModel, C64};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelRef,
    #[serde(rename = "N")]
    pub n: usize,
    /// Inline control, `{"file": PATH}`, or absent for `u = 0` on `[0, T]`.
    #[serde(default)]
    pub control: Option<serde_json::Value>,
    /// Horizon used when no control is given.
    #[serde(rename = "T", default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub simulate: SimulateOptions,
    #[serde(default)]
    pub estimate: Option<EstimateOptions>,
    #[serde(default)]
    pub sweep: Option<SweepOptions>,
    #[serde(default)]
    pub steer: Option<SteerOptions>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRef {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    /// 1-based basis index.
    Mode(usize),
    /// Explicit amplitudes as `[re, im]` pairs, normalized on load.
    Vector(Vec<[f64; 2]>),
    /// Seeded random state supported on the first `support` modes.
    Random { support: usize },
}

impl Default for Initial {
    fn default() -> Self {
        Initial::Mode(1)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOptions {
    /// Uniform sample count on `[0, T]`; atom times are added.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Order of the Sobolev column, `‖|A|^s ψ‖`.
    #[serde(default = "default_half")]
    pub sobolev_order: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            sobolev_order: default_half(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateOptions {
    pub k: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    pub orders: Vec<usize>,
    #[serde(rename = "N_ref")]
    pub n_ref: usize,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_sweep_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteerOptions {
    /// 1-based modes; two entries for a single edge.
    pub path: Vec<usize>,
    /// Repetition counts to try.
    pub n: Vec<usize>,
}

fn default_samples() -> usize {
    101
}

fn default_sweep_samples() -> usize {
    21
}

fn default_half() -> f64 {
    0.5
}

/// Everything a command needs, built from a validated scenario.
pub struct Resolved {
    pub scenario: Scenario,
    pub model: SpectralModel,
    pub system: GalerkinSystem,
    pub control: RadonControl,
    pub psi0: CVec,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

fn relative(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn builtin_model(name: &str, nu: Option<f64>, a: Option<f64>, eta: Option<f64>) -> Result<SpectralModel> {
    let oscillator_params = nu.is_some() || a.is_some() || eta.is_some();
    match name {
        "oscillator" => SpectralModel::harmonic_oscillator(nu.unwrap_or(0.0), a.unwrap_or(1.0), eta.unwrap_or(0.0)),
        _ if oscillator_params => Err(Error::Validation(format!(
            "parameters nu, a, eta apply only to the oscillator, not '{name}'"
        ))),
        "well" => Ok(SpectralModel::potential_well()),
        "well-raw" => Ok(SpectralModel::potential_well_with(false)),
        "no-good-galerkin" => Ok(SpectralModel::no_good_galerkin()),
        _ => Err(Error::Validation(format!(
            "unknown builtin model '{name}'; known: {}",
            BUILTIN_MODELS.join(", ")
        ))),
    }
}

pub const BUILTIN_MODELS: &[&str] = &["well", "well-raw", "oscillator", "no-good-galerkin"];

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("scenario: {e}")))
    }

    /// Loads, validates and resolves every reference of a scenario file.
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Resolved> {
        let mut scenario = Self::parse(&read(path)?)?;
        if seed.is_some() {
            scenario.seed = seed;
        }
        let base = path.parent().unwrap_or(Path::new("."));
        scenario.resolve(base)
    }

    pub fn resolve(self, base: &Path) -> Result<Resolved> {
        let model = match (&self.model.builtin, &self.model.file) {
            (Some(name), None) => builtin_model(name, self.model.nu, self.model.a, self.model.eta)?,
            (None, Some(file)) => {
                if self.model.nu.is_some() || self.model.a.is_some() || self.model.eta.is_some() {
                    return Err(Error::Validation("model parameters apply only to builtin models".into()));
                }
                let record = ModelRecord::from_json(&read(&relative(base, file))?)
                    .map_err(|e| Error::Validation(format!("model file: {e}")))?;
                build_from_spec(&record)?
            }
            _ => return Err(Error::Validation("model needs exactly one of 'builtin' or 'file'".into())),
        };
        if self.n < 2 {
            return Err(Error::Validation(format!("N must be at least 2, got {}", self.n)));
        }
        let system = model.compress(self.n)?;
        let control = self.control(base)?;
        let psi0 = self.initial_state()?;
        self.validate_options()?;
        Ok(Resolved {
            scenario: self,
            model,
            system,
            control,
            psi0,
        })
    }

    fn control(&self, base: &Path) -> Result<RadonControl> {
        let value = match &self.control {
            None => {
                let t = self
                    .horizon
                    .ok_or_else(|| Error::Validation("scenario needs either 'control' or 'T'".into()))?;
                return RadonControl::from_density(PiecewiseConstantControl::constant(0.0, 0.0, t)?);
            }
            Some(v) => v,
        };
        let control: RadonControl = match value.as_object().and_then(|o| o.get("file").filter(|_| o.len() == 1)) {
            Some(file) => {
                let file = file
                    .as_str()
                    .ok_or_else(|| Error::Validation("control 'file' must be a string".into()))?;
                RadonControl::from_json(&read(&relative(base, Path::new(file)))?)
                    .map_err(|e| Error::Validation(format!("control file: {e}")))?
            }
            None => serde_json::from_value(value.clone()).map_err(|e| Error::Validation(format!("control: {e}")))?,
        };
        if let Some(t) = self.horizon {
            if t != control.horizon() {
                return Err(Error::Validation(format!(
                    "'T' = {t} disagrees with the control horizon {}",
                    control.horizon()
                )));
            }
        }
        Ok(control)
    }

    fn initial_state(&self) -> Result<CVec> {
        let n = self.n;
        let psi = match &self.initial {
            Initial::Mode(k) => {
                if *k == 0 || *k > n {
                    return Err(Error::Validation(format!("initial mode {k} not in 1..={n}")));
                }
                basis_vector(n, k - 1)
            }
            Initial::Vector(v) => {
                if v.len() != n {
                    return Err(Error::Validation(format!("initial vector has {} entries, expected {n}", v.len())));
                }
                if v.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::Validation("initial vector has non-finite entries".into()));
                }
                let psi = CVec::from_iterator(n, v.iter().map(|p| c(p[0], p[1])));
                let s = norm(&psi);
                if s == 0.0 {
                    return Err(Error::Validation("initial vector is zero".into()));
                }
                psi / C64::new(s, 0.0)
            }
            Initial::Random { support } => {
                use rand::{Rng, SeedableRng};
                if *support == 0 || *support > n {
                    return Err(Error::Validation(format!("random support {support} not in 1..={n}")));
                }
                let seed = self
                    .seed
                    .ok_or_else(|| Error::Validation("a random initial state needs a seed".into()))?;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let psi = CVec::from_fn(n, |i, _| {
                    if i < *support {
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let s = norm(&psi);
                psi / C64::new(s, 0.0)
            }
        };
        Ok(psi)
    }

    fn validate_options(&self) -> Result<()> {
        let sim = &self.simulate;
        if sim.samples < 2 {
            return Err(Error::Validation("simulate.samples must be at least 2".into()));
        }
        if !(sim.sobolev_order >= 0.0) {
            return Err(Error::Validation("simulate.sobolev_order must be nonnegative".into()));
        }
        if let Some(e) = &self.estimate {
            if !(e.k > 0.0 && e.s >= 0.0 && e.s <= e.k) {
                return Err(Error::Validation(format!("estimate needs k > 0 and 0 <= s <= k, got k = {}, s = {}", e.k, e.s)));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.orders.is_empty() {
                return Err(Error::Validation("sweep.orders is empty".into()));
            }
            if let Some(&bad) = sw.orders.iter().find(|&&m| m < 2 || m >= sw.n_ref) {
                return Err(Error::Validation(format!(
                    "sweep order {bad} must satisfy 2 <= N < N_ref = {}",
                    sw.n_ref
                )));
            }
            if !(sw.s >= 0.0) || sw.samples < 2 {
                return Err(Error::Validation("sweep needs s >= 0 and at least 2 samples".into()));
            }
        }
        if let Some(st) = &self.steer {
            if st.path.len() < 2 {
                return Err(Error::Validation("steer.path needs at least two modes".into()));
            }
            if let Some(&bad) = st.path.iter().find(|&&m| m == 0 || m > self.n) {
                return Err(Error::Validation(format!("steer.path mode {bad} not in 1..={}", self.n)));
            }
            if st.n.is_empty() || st.n.contains(&0) {
                return Err(Error::Validation("steer.n must list positive repetition counts".into()));
            }
        }
        Ok(())
    }
}

/// Uniform grid on `[0, T]` merged with the atom times.
pub fn sample_times(control: &RadonControl, count: usize) -> Vec<f64> {
    let t = control.horizon();
    let mut times: Vec<f64> = (0..count).map(|i| t * i as f64 / (count - 1) as f64).collect();
    times.extend(control.atoms().iter().map(|a| a.t));
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();
    times
}
