//! Confining potentials `V`, their gradients, and the Hamiltonian symbol
//! `p(x, ξ) = ½|ξ|² + V(x)`.
//!
//! Three families are shipped, all normalized so that `V(0) = 0`:
//!
//! * `Harmonic`: `V(x) = ½|x|²`, growth exponent `m = 1`.
//! * `BracketPower`: `V(x) = ⟨x⟩^{2q} − 1` where `q` defaults to the declared
//!   growth exponent `m`. Passing an explicit `q` as the single coefficient
//!   allows deliberately mis-declared models for assumption audits.
//! * `AnharmonicPerturbation`: `V(x) = ½|x|² + ε Σᵢ (cos(k xᵢ) − 1)/k²` with
//!   coefficients `[ε, k]`, `|ε| < 1`, `k > 0`. Convex, bounded derivatives of
//!   order ≥ 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Harmonic,
    BracketPower,
    AnharmonicPerturbation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel<T> {
    kind: PotentialKind,
    m: T,
    coefficients: Vec<T>,
    dimension: usize,
}

impl<T: Real> PotentialModel<T> {
    pub fn new(kind: PotentialKind, m: T, coefficients: Vec<T>, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("potential dimension must be at least 1".into()));
        }
        if !(m > T::zero() && m <= T::one()) {
            return Err(Error::Config(format!("growth exponent m = {m} outside (0, 1]")));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("potential coefficients must be finite".into()));
        }
        match kind {
            PotentialKind::Harmonic => {
                if m != T::one() {
                    return Err(Error::Config("harmonic potential requires m = 1".into()));
                }
                if !coefficients.is_empty() {
                    return Err(Error::Config("harmonic potential takes no coefficients".into()));
                }
            }
            PotentialKind::BracketPower => match coefficients.as_slice() {
                [] => {}
                [q] if *q > T::zero() => {}
                [q] => return Err(Error::Config(format!("bracket exponent q = {q} must be positive"))),
                _ => return Err(Error::Config("bracket_power takes at most one coefficient [q]".into())),
            },
            PotentialKind::AnharmonicPerturbation => {
                if m != T::one() {
                    return Err(Error::Config("anharmonic perturbation requires m = 1".into()));
                }
                match coefficients.as_slice() {
                    [eps, k] if eps.abs() < T::one() && *k > T::zero() => {}
                    [_, _] => return Err(Error::Config("anharmonic perturbation needs |ε| < 1 and k > 0".into())),
                    _ => return Err(Error::Config("anharmonic perturbation takes coefficients [ε, k]".into())),
                }
            }
        }
        Ok(Self { kind, m, coefficients, dimension })
    }

    pub fn harmonic(dimension: usize) -> Result<Self> {
        Self::new(PotentialKind::Harmonic, T::one(), Vec::new(), dimension)
    }

    pub fn bracket_power(dimension: usize, m: T) -> Result<Self> {
        Self::new(PotentialKind::BracketPower, m, Vec::new(), dimension)
    }

    pub fn anharmonic(dimension: usize, epsilon: T, wavenumber: T) -> Result<Self> {
        Self::new(PotentialKind::AnharmonicPerturbation, T::one(), vec![epsilon, wavenumber], dimension)
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    /// Declared growth exponent `m` of the assumption `V ≍ ⟨x⟩^{2m}`.
    pub fn m(&self) -> T {
        self.m
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn bracket_exponent(&self) -> T {
        self.coefficients.first().copied().unwrap_or(self.m)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dimension {
            return Err(Error::ShapeMismatch(format!(
                "position of dimension {len} for a {}-dimensional potential",
                self.dimension
            )));
        }
        Ok(())
    }

    /// `V(x)`.
    pub fn eval_potential(&self, x: &[T]) -> Result<T> {
        self.check_dim(x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite position".into()));
        }
        Ok(self.value(x))
    }

    /// `∇V(x)`.
    pub fn eval_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite position".into()));
        }
        let mut g = vec![T::zero(); x.len()];
        self.gradient_into(x, &mut g);
        Ok(g)
    }

    /// `p(x, ξ) = ½|ξ|² + V(x)`.
    pub fn eval_symbol(&self, rho: &PhasePoint<T>) -> Result<T> {
        self.check_dim(rho.dimension())?;
        Ok(self.symbol(&rho.x, &rho.xi))
    }

    /// Unchecked `V(x)` for hot loops; `x.len()` must equal the dimension.
    #[inline]
    pub fn value(&self, x: &[T]) -> T {
        let r2: T = x.iter().map(|&v| v * v).sum();
        let half = lit::<T>(0.5);
        match self.kind {
            PotentialKind::Harmonic => half * r2,
            PotentialKind::BracketPower => (T::one() + r2).powf(self.bracket_exponent()) - T::one(),
            PotentialKind::AnharmonicPerturbation => {
                let (eps, k) = (self.coefficients[0], self.coefficients[1]);
                let ripple: T = x.iter().map(|&v| (k * v).cos() - T::one()).sum();
                half * r2 + eps * ripple / (k * k)
            }
        }
    }

    /// Unchecked `∇V(x)` written into `out`.
    #[inline]
    pub fn gradient_into(&self, x: &[T], out: &mut [T]) {
        match self.kind {
            PotentialKind::Harmonic => out.copy_from_slice(x),
            PotentialKind::BracketPower => {
                let q = self.bracket_exponent();
                let r2: T = x.iter().map(|&v| v * v).sum();
                let scale = lit::<T>(2.0) * q * (T::one() + r2).powf(q - T::one());
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = scale * v;
                }
            }
            PotentialKind::AnharmonicPerturbation => {
                let (eps, k) = (self.coefficients[0], self.coefficients[1]);
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = v - eps * (k * v).sin() / k;
                }
            }
        }
    }

    /// Unchecked symbol `½|ξ|² + V(x)`.
    #[inline]
    pub fn symbol(&self, x: &[T], xi: &[T]) -> T {
        let k2: T = xi.iter().map(|&v| v * v).sum();
        lit::<T>(0.5) * k2 + self.value(x)
    }
}

/// A point `ρ = (x, ξ)` of phase space `ℝ^{2d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T> {
    pub x: Vec<T>,
    pub xi: Vec<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(x: Vec<T>, xi: Vec<T>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::ShapeMismatch(format!(
                "position has {} components but momentum has {}",
                x.len(),
                xi.len()
            )));
        }
        if x.iter().chain(&xi).any(|v| !v.is_finite()) {
            return Err(Error::Config("phase point has non-finite components".into()));
        }
        Ok(Self { x, xi })
    }

    pub fn origin(dimension: usize) -> Self {
        Self { x: vec![T::zero(); dimension], xi: vec![T::zero(); dimension] }
    }

    /// Builds a point from the concatenated coordinates `[x…, ξ…]`.
    pub fn from_coords(coords: &[T]) -> Result<Self> {
        if !coords.len().is_multiple_of(2) || coords.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "phase point needs an even, non-zero number of coordinates, got {}",
                coords.len()
            )));
        }
        let d = coords.len() / 2;
        Self::new(coords[..d].to_vec(), coords[d..].to_vec())
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> Vec<T> {
        self.x.iter().chain(&self.xi).copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.xi).all(|v| v.is_finite())
    }

    pub fn distance(&self, other: &Self) -> T {
        self.x
            .iter()
            .zip(&other.x)
            .chain(self.xi.iter().zip(&other.xi))
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }
}

/// Cubic sampling box `[−half_width, half_width]^d` for assumption audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox<T> {
    pub half_width: T,
    pub points_per_axis: usize,
}

/// Empirical derivative bound for one order `|α| = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderBound<T> {
    pub order: usize,
    /// `sup |∂^α V| / ⟨x⟩^{2m−k}` over the inner half of the box.
    pub inner_sup: T,
    /// Same supremum over the whole box.
    pub outer_sup: T,
    pub diverging: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport<T> {
    pub m: T,
    pub max_order: usize,
    pub orders: Vec<OrderBound<T>>,
    /// Smallest `C` with `V ≤ C ⟨x⟩^{2m}` on the box.
    pub upper_constant: T,
    /// Smallest `C` with `⟨x⟩^{2m}/C − C ≤ V` on the box.
    pub lower_constant: T,
    pub lower_diverging: bool,
    pub pass: bool,
    /// Orders above `max_order` are not audited.
    pub note: String,
}

const GROWTH_FACTOR: f64 = 1.5;
const FD_RELATIVE_STEP: f64 = 0.02;

/// Audits the two-sided growth bound and the derivative bounds
/// `|∂^α V| ≤ C_α ⟨x⟩^{2m−|α|}` on a finite box using finite differences.
///
/// A ratio is flagged as diverging when its supremum over the whole box
/// exceeds 1.5 times its supremum over the inner half box.
pub fn check_assumption<T: Real>(
    model: &PotentialModel<T>,
    sample_box: SampleBox<T>,
    max_order: usize,
) -> Result<AssumptionReport<T>> {
    if max_order > 4 {
        return Err(Error::Config(format!(
            "max_order = {max_order}: finite-difference derivatives are only audited up to order 4"
        )));
    }
    if sample_box.points_per_axis < 3 || !(sample_box.half_width > T::zero()) {
        return Err(Error::Config("sample box needs positive width and at least 3 points per axis".into()));
    }
    let d = model.dimension();
    let m = model.m();
    let two_m = lit::<T>(2.0) * m;
    let npts = sample_box.points_per_axis;
    let total = npts
        .checked_pow(d as u32)
        .filter(|&t| t <= 2_000_000)
        .ok_or_else(|| Error::Config("assumption sample box too large".into()))?;
    let spacing = lit::<T>(2.0) * sample_box.half_width / T::from_usize(npts - 1).unwrap();
    let inner_limit = sample_box.half_width * lit(0.5);

    let multi_indices: Vec<Vec<Vec<usize>>> = (0..=max_order).map(|k| multi_indices(d, k)).collect();
    let mut inner = vec![T::zero(); max_order + 1];
    let mut outer = vec![T::zero(); max_order + 1];
    let (mut upper, mut lower_inner, mut lower_outer) = (T::zero(), T::zero(), T::zero());

    let mut x = vec![T::zero(); d];
    for flat in 0..total {
        let mut rem = flat;
        for xa in x.iter_mut() {
            *xa = -sample_box.half_width + spacing * T::from_usize(rem % npts).unwrap();
            rem /= npts;
        }
        let r2: T = x.iter().map(|&v| v * v).sum();
        let bracket = (T::one() + r2).sqrt();
        let in_inner = x.iter().all(|v| v.abs() <= inner_limit);
        let v = model.value(&x);
        let weight = bracket.powf(two_m);
        upper = upper.max(v / weight);
        let needed = (-v + (v * v + lit::<T>(4.0) * weight).sqrt()) * lit(0.5);
        lower_outer = lower_outer.max(needed);
        if in_inner {
            lower_inner = lower_inner.max(needed);
        }
        let h = lit::<T>(FD_RELATIVE_STEP) * bracket;
        for (k, alphas) in multi_indices.iter().enumerate() {
            let scale = bracket.powf(two_m - T::from_usize(k).unwrap());
            for alpha in alphas {
                let deriv = finite_difference(model, &x, alpha, h).abs() / scale;
                outer[k] = outer[k].max(deriv);
                if in_inner {
                    inner[k] = inner[k].max(deriv);
                }
            }
        }
    }

    let floor = lit::<T>(1e-6);
    let grows = |inner: T, outer: T| outer > lit::<T>(GROWTH_FACTOR) * inner + floor;
    let orders: Vec<OrderBound<T>> = (0..=max_order)
        .map(|k| OrderBound {
            order: k,
            inner_sup: inner[k],
            outer_sup: outer[k],
            diverging: grows(inner[k], outer[k]),
        })
        .collect();
    let lower_diverging = grows(lower_inner, lower_outer);
    let pass = !lower_diverging && orders.iter().all(|o| !o.diverging);
    Ok(AssumptionReport {
        m,
        max_order,
        orders,
        upper_constant: upper,
        lower_constant: lower_outer,
        lower_diverging,
        pass,
        note: format!("derivative bounds audited for orders 0..={max_order} only"),
    })
}

/// All multi-indices `α ∈ ℕ^d` with `|α| = k`, as axis lists with repetition.
fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for axis in start..d {
            cur.push(axis);
            rec(d, k, axis, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Nested central differences of `V` along the listed axes.
fn finite_difference<T: Real>(model: &PotentialModel<T>, x: &[T], axes: &[usize], h: T) -> T {
    match axes.split_first() {
        None => model.value(x),
        Some((&axis, rest)) => {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[axis] += h;
            minus[axis] -= h;
            (finite_difference(model, &plus, rest, h) - finite_difference(model, &minus, rest, h)) / (lit::<T>(2.0) * h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_values() {
        let v = PotentialModel::<f64>::harmonic(1).unwrap();
        assert_eq!(v.eval_potential(&[0.0]).unwrap(), 0.0);
        assert_eq!(v.eval_potential(&[2.0]).unwrap(), 2.0);
        assert_eq!(v.eval_gradient(&[2.0]).unwrap(), vec![2.0]);
        let rho = PhasePoint::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(v.eval_symbol(&rho).unwrap(), 1.0);
        assert_eq!(v.eval_symbol(&PhasePoint::origin(1)).unwrap(), 0.0);
    }

    #[test]
    fn bracket_power_values() {
        let v = PotentialModel::<f64>::bracket_power(1, 0.5).unwrap();
        assert_relative_eq!(v.eval_potential(&[3.0]).unwrap(), 10f64.sqrt() - 1.0, epsilon = 1e-14);
        assert_relative_eq!(v.eval_gradient(&[3.0]).unwrap()[0], 3.0 / 10f64.sqrt(), epsilon = 1e-14);
        let rho = PhasePoint::new(vec![3.0], vec![2.0]).unwrap();
        assert_relative_eq!(v.eval_symbol(&rho).unwrap(), 4.16227766016838, epsilon = 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_origin() {
        let models = [
            PotentialModel::<f64>::harmonic(2).unwrap(),
            PotentialModel::bracket_power(2, 0.3).unwrap(),
            PotentialModel::anharmonic(2, 0.4, 1.5).unwrap(),
        ];
        for m in &models {
            assert_eq!(m.eval_gradient(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
            assert_eq!(m.eval_potential(&[0.0, 0.0]).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialModel::<f64>::bracket_power(1, 0.0).is_err());
        assert!(PotentialModel::<f64>::bracket_power(1, 1.2).is_err());
        assert!(PotentialModel::<f64>::new(PotentialKind::Harmonic, 0.5, vec![], 1).is_err());
        assert!(PotentialModel::<f64>::anharmonic(1, 1.0, 1.0).is_err());
        assert!(PotentialModel::<f64>::anharmonic(1, 0.5, -1.0).is_err());
        assert!(PotentialModel::<f64>::harmonic(0).is_err());
        let v = PotentialModel::<f64>::harmonic(2).unwrap();
        assert!(v.eval_potential(&[1.0]).is_err());
        assert!(v.eval_potential(&[f64::NAN, 0.0]).is_err());
        assert!(PhasePoint::new(vec![f64::INFINITY], vec![0.0]).is_err());
    }

    #[test]
    fn harmonic_assumption_passes() {
        let v = PotentialModel::<f64>::harmonic(1).unwrap();
        let rep = check_assumption(&v, SampleBox { half_width: 10.0, points_per_axis: 201 }, 2).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_relative_eq!(rep.orders[2].outer_sup, 1.0, epsilon = 1e-6);
        assert!(rep.upper_constant.is_finite() && rep.lower_constant.is_finite());
    }

    #[test]
    fn bracket_assumption_passes_first_order() {
        let v = PotentialModel::<f64>::bracket_power(1, 0.5).unwrap();
        let rep = check_assumption(&v, SampleBox { half_width: 50.0, points_per_axis: 401 }, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.orders[1].outer_sup <= 1.0 + 1e-3);
    }

    #[test]
    fn misdeclared_growth_fails() {
        // ⟨x⟩² − 1 declared with m = 1/2.
        let v = PotentialModel::<f64>::new(PotentialKind::BracketPower, 0.5, vec![1.0], 1).unwrap();
        let rep = check_assumption(&v, SampleBox { half_width: 50.0, points_per_axis: 401 }, 2).unwrap();
        assert!(!rep.pass);
        assert!(rep.orders[0].diverging);
    }

    #[test]
    fn order_cap_enforced() {
        let v = PotentialModel::<f64>::harmonic(1).unwrap();
        assert!(check_assumption(&v, SampleBox { half_width: 1.0, points_per_axis: 5 }, 5).is_err());
    }

    #[test]
    fn power_families_pass_fourth_order_in_two_dimensions() {
        let models = [PotentialModel::<f64>::harmonic(2).unwrap(), PotentialModel::bracket_power(2, 0.5).unwrap()];
        for m in &models {
            let rep = check_assumption(m, SampleBox { half_width: 40.0, points_per_axis: 41 }, 4).unwrap();
            assert!(rep.pass, "{:?}: {rep:?}", m.kind());
        }
    }

    #[test]
    fn cosine_perturbation_is_admissible_to_second_order_only() {
        // ∂⁴V = εk² cos(kx) does not decay like ⟨x⟩^{-2}.
        let m = PotentialModel::<f64>::anharmonic(1, 0.5, 1.0).unwrap();
        let sample = SampleBox { half_width: 40.0, points_per_axis: 801 };
        assert!(check_assumption(&m, sample, 2).unwrap().pass);
        let rep = check_assumption(&m, sample, 4).unwrap();
        assert!(!rep.pass && rep.orders[4].diverging);
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 2).len(), 3);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(1, 4).len(), 1);
        assert_eq!(multi_indices(2, 0), vec![Vec::<usize>::new()]);
    }
}
