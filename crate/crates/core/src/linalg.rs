//! Dense complex linear algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.transpose().map(|z| z.conj())
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// `max|A − A*| / max|A|` (zero for the zero matrix).
pub fn relative_asymmetry<T: Real>(a: &CMatrix<T>) -> T {
    let scale = max_abs(a);
    if scale == T::zero() {
        return T::zero();
    }
    let n = a.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for k in 0..=j {
            worst = worst.max((a[(j, k)] - a[(k, j)].conj()).norm());
        }
    }
    worst / scale
}

/// `(A + A*)/2` in place.
pub fn symmetrize<T: Real>(a: &mut CMatrix<T>) {
    let n = a.nrows();
    let half = lit::<T>(0.5);
    for j in 0..n {
        a[(j, j)] = Complex::new(a[(j, j)].re, T::zero());
        for k in 0..j {
            let avg = (a[(j, k)] + a[(k, j)].conj()).scale(half);
            a[(j, k)] = avg;
            a[(k, j)] = avg.conj();
        }
    }
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> Result<T> {
    Ok(T::singular_values(a)?.into_iter().fold(T::zero(), T::max))
}

/// Spectral norm of a Hermitian matrix via its eigenvalues.
pub fn hermitian_norm<T: Real>(a: &CMatrix<T>) -> Result<T> {
    let (vals, _) = T::hermitian_eigen(a)?;
    Ok(vals.into_iter().fold(T::zero(), |m, v| m.max(v.abs())))
}

pub fn vector_norm<T: Real>(v: &CVector<T>) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// `(u, A u)` for Hermitian `A`; the imaginary part is discarded.
pub fn quadratic_form<T: Real>(a: &CMatrix<T>, u: &CVector<T>) -> T {
    let au = a * u;
    u.iter().zip(au.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Real embedding helper: `A` with every entry promoted to a complex number.
pub fn complexify<T: Real>(a: &DMatrix<T>) -> CMatrix<T> {
    a.map(|v| Complex::new(v, T::zero()))
}

#[derive(Debug, Clone)]
pub struct PowerIterationResult<T: Real> {
    pub value: T,
    pub vector: CVector<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on a Hermitian positive semidefinite matrix.
///
/// Starts from a seeded Gaussian vector and stops once the Rayleigh quotient
/// changes by at most `rel_tol` relative between iterations.
pub fn power_iteration<T: Real>(
    a: &CMatrix<T>,
    rel_tol: T,
    max_iter: usize,
    seed: u64,
) -> Result<PowerIterationResult<T>> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::ShapeMismatch(format!("power iteration on a {}x{} matrix", n, a.ncols())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = CVector::<T>::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex::new(lit(re), lit(im))
    });
    let nv = vector_norm(&v);
    v.iter_mut().for_each(|z| *z = z.unscale(nv));
    let mut rayleigh = quadratic_form(a, &v);
    for it in 1..=max_iter {
        let mut w = a * &v;
        let nw = vector_norm(&w);
        if nw == T::zero() {
            return Ok(PowerIterationResult { value: T::zero(), vector: v, iterations: it, converged: true });
        }
        w.iter_mut().for_each(|z| *z = z.unscale(nw));
        let next = quadratic_form(a, &w);
        v = w;
        let change = (next - rayleigh).abs();
        rayleigh = next;
        if change <= rel_tol * next.abs().max(T::min_positive_value()) {
            return Ok(PowerIterationResult { value: rayleigh, vector: v, iterations: it, converged: true });
        }
    }
    Ok(PowerIterationResult { value: rayleigh, vector: v, iterations: max_iter, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> CMatrix<f64> {
        CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex::new(v, 0.0))))
    }

    #[test]
    fn power_iteration_diagonal() {
        let r = power_iteration(&diag(&[3.0, 1.0, 2.0]), 1e-12, 10_000, 7).unwrap();
        assert!(r.converged);
        assert!((r.value - 3.0).abs() < 1e-10);
        assert!((r.vector[0].norm() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn power_iteration_identity() {
        let r = power_iteration(&diag(&[1.0; 5]), 1e-10, 100, 1).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetrize_makes_hermitian() {
        let mut a = CMatrix::from_fn(4, 4, |j, k| Complex::new((j * 3 + k) as f64, (j as f64) - (k as f64) * 0.5));
        symmetrize(&mut a);
        assert_eq!(relative_asymmetry(&a), 0.0);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        assert!((spectral_norm(&diag(&[-4.0, 2.0])).unwrap() - 4.0).abs() < 1e-12);
        assert!((hermitian_norm(&diag(&[-4.0, 2.0])).unwrap() - 4.0).abs() < 1e-12);
    }
}
