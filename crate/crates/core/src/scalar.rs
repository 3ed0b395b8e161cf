//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All geometry, dynamics and quantization code is written against [`Real`],
//! which is implemented for `f32` and `f64`. Dense Hermitian eigensolvers are
//! the only place that needs a concrete float type; they are routed through
//! [`Real::hermitian_eigen`] and [`Real::singular_values`] so that the rest of
//! the crate stays generic.

use std::cmp::Ordering;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

use crate::error::{Error, Result};

/// Floating point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FftNum
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon, as a convenience for tolerance arithmetic.
    fn eps() -> Self {
        Float::epsilon()
    }

    /// Full eigendecomposition of a Hermitian matrix.
    ///
    /// Eigenvalues are returned in ascending order with the matching
    /// eigenvectors stored as columns.
    fn hermitian_eigen(m: &DMatrix<Complex<Self>>) -> Result<(Vec<Self>, DMatrix<Complex<Self>>)>;

    /// Singular values of a general complex matrix, unordered.
    fn singular_values(m: &DMatrix<Complex<Self>>) -> Result<Vec<Self>>;

    /// IEEE total order.
    fn total_cmp(&self, other: &Self) -> Ordering;
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal representable in working scalar")
}

/// Converts a count or index into the working scalar.
#[inline]
pub fn from_usize<T: Real>(v: usize) -> T {
    T::from_usize(v).expect("usize representable in working scalar")
}

/// Lossy conversion to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Japanese bracket `⟨x⟩ = sqrt(1 + |x|²)` evaluated from `|x|²`.
#[inline]
pub fn bracket_sq<T: Real>(norm_sq: T) -> T {
    (T::one() + norm_sq).sqrt()
}

const EIGEN_MAX_ITER: usize = 10_000;

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn hermitian_eigen(m: &DMatrix<Complex<$t>>) -> Result<(Vec<$t>, DMatrix<Complex<$t>>)> {
                if m.nrows() != m.ncols() {
                    return Err(Error::ShapeMismatch(format!(
                        "eigendecomposition of a {}x{} matrix",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let n = m.nrows();
                if n == 0 {
                    return Ok((Vec::new(), DMatrix::zeros(0, 0)));
                }
                // Real symmetric input (up to rounding) takes the cheaper real path.
                let scale = m.iter().fold(0.0, |acc: $t, z| acc.max(z.norm()));
                let real_input = m.iter().all(|z| z.im.abs() <= 4.0 * <$t>::EPSILON * scale);
                let (values, vectors): (Vec<$t>, DMatrix<Complex<$t>>) = if real_input {
                    let re = m.map(|z| z.re);
                    let eig = SymmetricEigen::try_new(re, <$t>::EPSILON, EIGEN_MAX_ITER)
                        .ok_or_else(|| Error::Solver("real symmetric eigensolver did not converge".into()))?;
                    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|v| Complex::new(v, 0.0)))
                } else {
                    let eig = SymmetricEigen::try_new(m.clone(), <$t>::EPSILON, EIGEN_MAX_ITER)
                        .ok_or_else(|| Error::Solver("Hermitian eigensolver did not converge".into()))?;
                    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
                };
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                let sorted_values = order.iter().map(|&i| values[i]).collect();
                let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
                Ok((sorted_values, sorted_vectors))
            }

            fn singular_values(m: &DMatrix<Complex<$t>>) -> Result<Vec<$t>> {
                if m.is_empty() {
                    return Ok(Vec::new());
                }
                let svd = SVD::try_new(m.clone(), false, false, <$t>::EPSILON, EIGEN_MAX_ITER)
                    .ok_or_else(|| Error::Solver("singular value decomposition did not converge".into()))?;
                Ok(svd.singular_values.iter().copied().collect())
            }

            fn total_cmp(&self, other: &Self) -> Ordering {
                <$t>::total_cmp(self, other)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_ascending() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::new(3.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(2.0, 0.0),
        ]));
        let (vals, vecs) = f64::hermitian_eigen(&m).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_eigenvalues() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(2.0f32, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, -1.0), Complex::new(2.0, 0.0)],
        );
        let (vals, _) = f32::hermitian_eigen(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-5 && (vals[1] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn bracket_of_zero_is_one() {
        assert_eq!(bracket_sq(0.0f64), 1.0);
        assert!((bracket_sq(9.0f64) - 10f64.sqrt()).abs() < 1e-15);
    }
}
