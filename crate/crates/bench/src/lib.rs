//! Fixtures shared by the benchmarks.

use bilinear_core::control::{Atom, PiecewiseConstantControl, RadonControl};
use bilinear_core::model::build_potential_well;
use bilinear_core::GalerkinSystem;

pub fn well(n: usize) -> GalerkinSystem {
    build_potential_well(n).expect("valid order")
}

/// Eight pieces plus two atoms on `[0, 1]`.
pub fn mixed_control() -> RadonControl {
    let density =
        PiecewiseConstantControl::uniform(0.0, 1.0, vec![1.2, -0.8, 0.6, -1.4, 0.3, 0.9, -0.2, 0.5]).expect("valid control");
    RadonControl::new(1.0, density, vec![Atom { t: 0.4, w: 0.7 }, Atom { t: 0.9, w: -0.3 }]).expect("valid control")
}
