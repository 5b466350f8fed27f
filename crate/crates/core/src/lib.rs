//! Bilinear quantum control on Galerkin compressions of unbounded spectral
//! models: propagation, energy estimates and resonant steering.

pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod model;
pub mod control;
pub mod propagator;
pub mod estimates;
pub mod synthesis;
pub mod verify;

pub use control::{Atom, PiecewiseConstantControl, RadonControl};
pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use model::{GalerkinSystem, ModelRecord, SpectralModel};
pub use propagator::{PropagationResult, Scheme};
pub use estimates::CouplingCertificate;
pub use synthesis::{OscillatorVerdict, SteeringPlan};
pub use verify::{Check, SuiteReport};
