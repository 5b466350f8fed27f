//! Dense complex linear algebra helpers built on `nalgebra`.
//!
//! Every exponential in this crate is of a skew-Hermitian generator, so all of
//! them go through a Hermitian eigendecomposition: `exp(i t H) = V e^{i t D} V†`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Hermitian part `(M + M†)/2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition `H = V diag(values) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(h: &CMat) -> Result<Self> {
        let n = h.nrows();
        if n != h.ncols() {
            return Err(Error::Dimension {
                expected: n,
                got: h.ncols(),
            });
        }
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numerical("non-finite entry in Hermitian matrix"));
        }
        let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let eig = SymmetricEigen::try_new(hermitize(h), f64::EPSILON, 1000 * n.max(1)).ok_or_else(
            || {
                Error::numerical(format!(
                    "Hermitian eigensolver did not converge (n = {n}, max |entry| = {scale:e})"
                ))
            },
        )?;
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(values)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMat {
        let d: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[j];
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(i t H)`.
    pub fn exp_i(&self, t: f64) -> CMat {
        self.map(|x| C64::from_polar(1.0, t * x))
    }

    /// `exp(i t H) v` without forming the full matrix.
    pub fn apply_exp_i(&self, t: f64, v: &CVec) -> CVec {
        let mut w = self.vectors.ad_mul(v);
        for (k, z) in w.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, t * self.values[k]);
        }
        &self.vectors * w
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() >= m.ncols() {
        m.ad_mul(m)
    } else {
        m * m.adjoint()
    };
    match HermitianEigen::new(&gram) {
        Ok(e) => e.max_abs_value().sqrt(),
        // Frobenius norm is an upper bound if the eigensolver ever gives up.
        Err(_) => m.norm(),
    }
}

/// `‖M − I‖` in spectral norm.
pub fn distance_to_identity(m: &CMat) -> f64 {
    let n = m.nrows();
    spectral_norm(&(m - CMat::identity(n, n)))
}

/// `‖U†U − I‖` in spectral norm.
pub fn unitarity_defect(u: &CMat) -> f64 {
    distance_to_identity(&u.ad_mul(u))
}

pub fn basis_vector(n: usize, index: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Euclidean norm with the columns summed in a fixed order.
pub fn norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Compensated (Kahan–Babuška) summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        hermitize(&m)
    }

    #[test]
    fn eigendecomposition_reconstructs() {
        let h = random_hermitian(24, 1);
        let e = HermitianEigen::new(&h).unwrap();
        let back = e.map(|x| c(x, 0.0));
        assert!((back - &h).norm() < 1e-12);
    }

    #[test]
    fn exp_is_unitary_and_inverts() {
        let h = random_hermitian(64, 2);
        let e = HermitianEigen::new(&h).unwrap();
        let u = e.exp_i(0.7);
        let v = e.exp_i(-0.7);
        assert!(unitarity_defect(&u) < 1e-12);
        assert!(distance_to_identity(&(u * v)) < 1e-12);
    }

    #[test]
    fn apply_matches_matrix() {
        let h = random_hermitian(10, 3);
        let e = HermitianEigen::new(&h).unwrap();
        let v = CVec::from_fn(10, |i, _| c(i as f64, 1.0));
        let a = e.exp_i(1.3) * &v;
        let b = e.apply_exp_i(1.3, &v);
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, -3.0), c(2.0, 0.0)]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
