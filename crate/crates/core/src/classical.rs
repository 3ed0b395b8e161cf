//! Hamiltonian flow `φᵗ` of `p = ½|ξ|² + V`, trajectory functionals, and the
//! escape-rate constant `sup √(R²+p) ∫₀ᵀ ⟨xᵗ/R⟩^{−2ν} dt`.

use std::cmp::Ordering;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{PhasePoint, PotentialModel};
use crate::refine;
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Step size and energy-drift envelope for the Störmer–Verlet integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig<T> {
    pub h: T,
    /// Bound on `|p(ρᵗ) − p(ρ₀)| / (1 + p(ρ₀))`.
    pub drift_tolerance: T,
}

impl<T: Real> Default for FlowConfig<T> {
    fn default() -> Self {
        Self { h: lit(1e-3), drift_tolerance: lit(1e-6) }
    }
}

impl<T: Real> FlowConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > T::zero() && self.h.is_finite()) {
            return Err(Error::Config(format!("time step h = {} must be positive", self.h)));
        }
        if !(self.drift_tolerance > T::zero()) {
            return Err(Error::Config("drift tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Number of steps and the adjusted step `T/⌈T/h⌉` that lands exactly on `T`.
pub fn step_plan<T: Real>(horizon: T, h: T) -> (usize, T) {
    let ratio = horizon / h;
    let steps = (ratio - lit::<T>(1e-9) * ratio.max(T::one())).ceil().to_usize().unwrap_or(1).max(1);
    (steps, horizon / from_usize(steps))
}

/// Kick-drift-kick; `grad` holds `∇V(x)` on entry and is refreshed on exit.
#[inline]
fn kdk<T: Real>(model: &PotentialModel<T>, x: &mut [T], xi: &mut [T], grad: &mut [T], h: T) {
    let half = lit::<T>(0.5) * h;
    for (p, &g) in xi.iter_mut().zip(grad.iter()) {
        *p -= half * g;
    }
    for (q, &p) in x.iter_mut().zip(xi.iter()) {
        *q += h * p;
    }
    model.gradient_into(x, grad);
    for (p, &g) in xi.iter_mut().zip(grad.iter()) {
        *p -= half * g;
    }
}

/// One Störmer–Verlet step of `(ẋ, ξ̇) = (ξ, −∇V(x))`.
pub fn step_verlet<T: Real>(state: &PhasePoint<T>, h: T, model: &PotentialModel<T>) -> Result<PhasePoint<T>> {
    if !(h > T::zero()) {
        return Err(Error::Config(format!("time step h = {h} must be positive")));
    }
    let mut grad = model.eval_gradient(&state.x)?;
    let (mut x, mut xi) = (state.x.clone(), state.xi.clone());
    kdk(model, &mut x, &mut xi, &mut grad, h);
    PhasePoint::new(x, xi)
}

/// Integrates `steps` uniform steps of size `h`, calling `visit(i, x, ξ)` on
/// every sample including the initial one. Returns the worst relative drift.
fn evolve<T: Real, F: FnMut(usize, &[T], &[T])>(
    model: &PotentialModel<T>,
    x0: &[T],
    xi0: &[T],
    steps: usize,
    h: T,
    tolerance: T,
    mut visit: F,
) -> Result<T> {
    let (mut x, mut xi) = (x0.to_vec(), xi0.to_vec());
    let mut grad = vec![T::zero(); x.len()];
    model.gradient_into(&x, &mut grad);
    let e0 = model.symbol(&x, &xi);
    let denom = T::one() + e0.abs();
    let mut worst = T::zero();
    visit(0, &x, &xi);
    for i in 1..=steps {
        kdk(model, &mut x, &mut xi, &mut grad, h);
        let drift = (model.symbol(&x, &xi) - e0).abs() / denom;
        if !(drift <= tolerance) {
            return Err(Error::Integration {
                time: to_f64(h * from_usize(i)),
                drift: to_f64(drift),
                tolerance: to_f64(tolerance),
            });
        }
        worst = worst.max(drift);
        visit(i, &x, &xi);
    }
    Ok(worst)
}

/// Time-sampled orbit stored as flat position and momentum arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    dimension: usize,
    step: T,
    energy0: T,
    max_drift: T,
    x: Vec<T>,
    xi: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.x.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn energy0(&self) -> T {
        self.energy0
    }

    /// Worst relative energy drift seen along the orbit.
    pub fn max_drift(&self) -> T {
        self.max_drift
    }

    pub fn horizon(&self) -> T {
        self.step * from_usize(self.len() - 1)
    }

    pub fn time(&self, i: usize) -> T {
        self.step * from_usize(i)
    }

    pub fn position(&self, i: usize) -> &[T] {
        &self.x[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn momentum(&self, i: usize) -> &[T] {
        &self.xi[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn point(&self, i: usize) -> PhasePoint<T> {
        PhasePoint { x: self.position(i).to_vec(), xi: self.momentum(i).to_vec() }
    }

    pub fn final_point(&self) -> PhasePoint<T> {
        self.point(self.len() - 1)
    }

    pub fn samples(&self) -> impl Iterator<Item = (T, PhasePoint<T>)> + '_ {
        (0..self.len()).map(move |i| (self.time(i), self.point(i)))
    }
}

/// Integrates the flow from `rho0` over `[0, T]` with the default drift tolerance.
pub fn integrate_flow<T: Real>(
    model: &PotentialModel<T>,
    rho0: &PhasePoint<T>,
    horizon: T,
    h: T,
) -> Result<Trajectory<T>> {
    integrate_flow_with(model, rho0, horizon, FlowConfig { h, ..FlowConfig::default() })
}

pub fn integrate_flow_with<T: Real>(
    model: &PotentialModel<T>,
    rho0: &PhasePoint<T>,
    horizon: T,
    flow: FlowConfig<T>,
) -> Result<Trajectory<T>> {
    flow.validate()?;
    if !(horizon > T::zero()) || flow.h > horizon * (T::one() + lit(1e-12)) {
        return Err(Error::Config(format!("need T > 0 and 0 < h ≤ T, got T = {horizon}, h = {}", flow.h)));
    }
    let d = model.dimension();
    if rho0.dimension() != d || !rho0.is_finite() {
        return Err(Error::ShapeMismatch("initial point does not match the potential".into()));
    }
    let (steps, h) = step_plan(horizon, flow.h);
    let mut xs = Vec::with_capacity((steps + 1) * d);
    let mut xis = Vec::with_capacity((steps + 1) * d);
    let max_drift = evolve(model, &rho0.x, &rho0.xi, steps, h, flow.drift_tolerance, |_, x, xi| {
        xs.extend_from_slice(x);
        xis.extend_from_slice(xi);
    })?;
    Ok(Trajectory { dimension: d, step: h, energy0: model.symbol(&rho0.x, &rho0.xi), max_drift, x: xs, xi: xis })
}

/// `⟨x/R⟩^{−2ν}`.
#[inline]
fn escape_weight<T: Real>(x: &[T], inv_r2: T, nu: T) -> T {
    let r2: T = x.iter().map(|&v| v * v).sum();
    (T::one() + r2 * inv_r2).powf(-nu)
}

fn check_weight_params<T: Real>(nu: T, r: T) -> Result<()> {
    if !(nu > lit(0.5)) {
        return Err(Error::Config(format!("ν = {nu} must exceed 1/2")));
    }
    if !(r >= T::one()) {
        return Err(Error::Config(format!("R = {r} must be at least 1")));
    }
    Ok(())
}

/// `√(R² + p(ρ₀)) · ∫₀ᵀ ⟨xᵗ/R⟩^{−2ν} dt` by the composite trapezoid rule.
pub fn escape_weight_integral<T: Real>(traj: &Trajectory<T>, nu: T, r: T) -> Result<T> {
    check_weight_params(nu, r)?;
    let inv_r2 = T::one() / (r * r);
    let n = traj.len();
    let mut acc = T::zero();
    for i in 0..n {
        let w = escape_weight(traj.position(i), inv_r2, nu);
        acc += if i == 0 || i == n - 1 { lit::<T>(0.5) * w } else { w };
    }
    Ok((r * r + traj.energy0).sqrt() * acc * traj.step)
}

/// Escape-weight integrals for several `R` from a single streamed orbit.
pub fn escape_weight_integrals<T: Real>(
    model: &PotentialModel<T>,
    rho0: &PhasePoint<T>,
    horizon: T,
    nu: T,
    rs: &[T],
    flow: FlowConfig<T>,
) -> Result<Vec<T>> {
    for &r in rs {
        check_weight_params(nu, r)?;
    }
    let (steps, h) = step_plan(horizon, flow.h);
    let inv: Vec<T> = rs.iter().map(|&r| T::one() / (r * r)).collect();
    let mut acc = vec![T::zero(); rs.len()];
    evolve(model, &rho0.x, &rho0.xi, steps, h, flow.drift_tolerance, |i, x, _| {
        let edge = i == 0 || i == steps;
        for (a, &ir) in acc.iter_mut().zip(&inv) {
            let w = escape_weight(x, ir, nu);
            *a += if edge { lit::<T>(0.5) * w } else { w };
        }
    })?;
    let e0 = model.symbol(&rho0.x, &rho0.xi);
    Ok(rs.iter().zip(acc).map(|(&r, a)| (r * r + e0).sqrt() * a * h).collect())
}

/// Time spent in the open ball `|x| < r`, left-endpoint rule.
pub fn occupation_time<T: Real>(traj: &Trajectory<T>, r: T) -> T {
    let r2 = r * r;
    let inside =
        (0..traj.len().saturating_sub(1)).filter(|&i| traj.position(i).iter().map(|&v| v * v).sum::<T>() < r2).count();
    traj.step * from_usize(inside)
}

/// Streaming variant of [`occupation_time`] that does not store the orbit.
pub fn occupation_time_from<T: Real>(
    model: &PotentialModel<T>,
    rho0: &PhasePoint<T>,
    horizon: T,
    r: T,
    flow: FlowConfig<T>,
) -> Result<T> {
    let (steps, h) = step_plan(horizon, flow.h);
    let r2 = r * r;
    let mut inside = 0usize;
    evolve(model, &rho0.x, &rho0.xi, steps, h, flow.drift_tolerance, |i, x, _| {
        if i < steps && x.iter().map(|&v| v * v).sum::<T>() < r2 {
            inside += 1;
        }
    })?;
    Ok(h * from_usize(inside))
}

/// `φᵗ(ρ₀)`; negative times integrate the momentum-reversed system.
pub fn flow_map<T: Real>(
    model: &PotentialModel<T>,
    rho0: &PhasePoint<T>,
    t: T,
    flow: FlowConfig<T>,
) -> Result<PhasePoint<T>> {
    if t == T::zero() {
        return Ok(rho0.clone());
    }
    let backward = t < T::zero();
    let flip = |v: &[T]| -> Vec<T> { v.iter().map(|&p| -p).collect() };
    let xi0 = if backward { flip(&rho0.xi) } else { rho0.xi.clone() };
    let (steps, h) = step_plan(t.abs(), flow.h.min(t.abs()));
    let mut end = (rho0.x.clone(), xi0.clone());
    evolve(model, &rho0.x, &xi0, steps, h, flow.drift_tolerance, |i, x, xi| {
        if i == steps {
            end = (x.to_vec(), xi.to_vec());
        }
    })?;
    let xi = if backward { flip(&end.1) } else { end.1 };
    PhasePoint::new(end.0, xi)
}

/// Central finite-difference Jacobian of `φᵗ` at `ρ₀`, ordered `(x…, ξ…)`.
pub fn flow_jacobian<T: Real>(
    model: &PotentialModel<T>,
    rho0: &PhasePoint<T>,
    t: T,
    h_fd: T,
    flow: FlowConfig<T>,
) -> Result<DMatrix<T>> {
    if !(h_fd > T::zero()) {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    let base = rho0.coords();
    let n = base.len();
    let columns: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[j] += h_fd;
            minus[j] -= h_fd;
            let fp = flow_map(model, &PhasePoint::from_coords(&plus)?, t, flow)?.coords();
            let fm = flow_map(model, &PhasePoint::from_coords(&minus)?, t, flow)?.coords();
            Ok(fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / (lit::<T>(2.0) * h_fd)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |i, j| columns[j][i]))
}

/// Determinant computed in double precision.
pub fn determinant<T: Real>(m: &DMatrix<T>) -> f64 {
    m.map(to_f64).determinant()
}

/// Sampling and refinement controls for the escape-rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig<T> {
    pub e_max: T,
    pub shells: usize,
    pub samples_per_shell: usize,
    pub top_k: usize,
    pub refine_iterations: usize,
    pub flow: FlowConfig<T>,
    pub seed: u64,
    /// Keep every sample for the diagnostics CSV.
    pub record_samples: bool,
    /// Re-evaluate each argmax at `h/2` and report the relative change.
    pub halving_check: bool,
}

impl<T: Real> Default for SearchConfig<T> {
    fn default() -> Self {
        Self {
            e_max: lit(1e3),
            shells: 64,
            samples_per_shell: 64,
            top_k: 8,
            refine_iterations: 400,
            flow: FlowConfig::default(),
            seed: 0,
            record_samples: false,
            halving_check: false,
        }
    }
}

impl<T: Real> SearchConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_max > T::zero() && self.e_max.is_finite()) {
            return Err(Error::Config(format!("energy cutoff E_max = {} must be finite and positive", self.e_max)));
        }
        if self.shells == 0 || self.samples_per_shell == 0 {
            return Err(Error::Config("search needs at least one shell and one sample per shell".into()));
        }
        self.flow.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord<T> {
    pub point: PhasePoint<T>,
    pub energy: T,
    pub integral: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalConstantEstimate<T> {
    pub value: T,
    pub argmax: PhasePoint<T>,
    pub argmax_energy: T,
    pub r: T,
    pub nu: T,
    pub horizon: T,
    pub samples_used: usize,
    pub refinement_converged: bool,
    /// The argmax lies in the top energy shell; raise `E_max`.
    pub cutoff_saturated: bool,
    /// Relative change of the argmax value when the step is halved.
    pub halving_change: Option<T>,
    pub samples: Vec<SampleRecord<T>>,
}

/// Radius `s ≥ 0` with `p(s·ω) = E` by bracketing and bisection.
fn solve_shell_radius<T: Real>(model: &PotentialModel<T>, dir: &[T], energy: T) -> T {
    let d = model.dimension();
    let at = |s: T| {
        let x: Vec<T> = dir[..d].iter().map(|&w| s * w).collect();
        let xi: Vec<T> = dir[d..].iter().map(|&w| s * w).collect();
        model.symbol(&x, &xi)
    };
    let mut hi = T::one();
    while at(hi) < energy {
        hi *= lit(2.0);
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid) < energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lit::<T>(0.5) * (lo + hi)
}

/// Point on the energy shell `p = E` in the direction `dir ∈ S^{2d−1}`.
pub fn shell_point<T: Real>(model: &PotentialModel<T>, dir: &[T], energy: T) -> PhasePoint<T> {
    let s = solve_shell_radius(model, dir, energy);
    let coords: Vec<T> = dir.iter().map(|&w| s * w).collect();
    let d = model.dimension();
    PhasePoint { x: coords[..d].to_vec(), xi: coords[d..].to_vec() }
}

/// Uniform random direction on `S^{2d−1}`.
pub fn random_direction<T: Real, G: Rng>(rng: &mut G, dim: usize) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|a| lit(a / norm)).collect();
        }
    }
}

/// Points on one energy shell with directions uniform on the sphere.
pub fn sample_shell<T: Real, G: Rng>(
    model: &PotentialModel<T>,
    energy: T,
    count: usize,
    rng: &mut G,
) -> Vec<PhasePoint<T>> {
    (0..count).map(|_| shell_point(model, &random_direction(rng, 2 * model.dimension()), energy)).collect()
}

/// Stratified initial conditions: the origin plus `samples_per_shell`
/// points on each of `shells` jittered energy levels in `[0, E_max]`.
fn stratified_samples<T: Real>(model: &PotentialModel<T>, search: &SearchConfig<T>) -> Vec<PhasePoint<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let width = search.e_max / from_usize(search.shells);
    let mut out = vec![PhasePoint::origin(model.dimension())];
    for k in 0..search.shells {
        for _ in 0..search.samples_per_shell {
            let u: f64 = rng.random();
            let energy = width * (from_usize::<T>(k) + lit(u));
            out.push(shell_point(model, &random_direction(&mut rng, 2 * model.dimension()), energy));
        }
    }
    out
}

/// Ordering for candidate maxima: larger value, then lower energy, then
/// lexicographically smaller coordinates.
fn rank<T: Real>(a: &(T, T, PhasePoint<T>), b: &(T, T, PhasePoint<T>)) -> Ordering {
    let tie = lit::<T>(1e-13) * (T::one() + a.0.abs().max(b.0.abs()));
    if (a.0 - b.0).abs() > tie {
        return b.0.total_cmp(&a.0);
    }
    a.1.total_cmp(&b.1).then_with(|| {
        a.2.coords()
            .iter()
            .zip(b.2.coords().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Escape-rate constant for a single `R`.
pub fn classical_constant<T: Real>(
    model: &PotentialModel<T>,
    horizon: T,
    nu: T,
    r: T,
    search: &SearchConfig<T>,
) -> Result<ClassicalConstantEstimate<T>> {
    Ok(classical_constants(model, horizon, nu, &[r], search)?.remove(0))
}

/// Refinement candidates as `(value, energy, point)`.
type Ranked<T> = Vec<(T, T, PhasePoint<T>)>;

/// Escape-rate constants for a list of `R` sharing one sample set.
///
/// The argmax found for each `R` is re-evaluated at every other `R`; since
/// the integrand is pointwise non-decreasing in `R`, the returned values are
/// non-decreasing along an ascending list.
pub fn classical_constants<T: Real>(
    model: &PotentialModel<T>,
    horizon: T,
    nu: T,
    rs: &[T],
    search: &SearchConfig<T>,
) -> Result<Vec<ClassicalConstantEstimate<T>>> {
    search.validate()?;
    if rs.is_empty() {
        return Ok(Vec::new());
    }
    for &r in rs {
        check_weight_params(nu, r)?;
    }
    if !(horizon > T::zero()) {
        return Err(Error::Config(format!("horizon T = {horizon} must be positive")));
    }
    let flow = FlowConfig { h: search.flow.h.min(horizon), ..search.flow };
    let points = stratified_samples(model, search);
    let values: Vec<Vec<T>> =
        points.par_iter().map(|p| escape_weight_integrals(model, p, horizon, nu, rs, flow)).collect::<Result<_>>()?;
    let energies: Vec<T> = points.iter().map(|p| model.symbol(&p.x, &p.xi)).collect();
    log::debug!("classical search: {} samples evaluated", points.len());

    let dim = 2 * model.dimension();
    let shell_width = search.e_max / from_usize(search.shells);
    let e_max = search.e_max;

    // Local refinement per R from the top-k samples.
    let mut per_r: Vec<(Ranked<T>, bool)> = Vec::with_capacity(rs.len());
    for (ri, &r) in rs.iter().enumerate() {
        let mut ranked: Vec<(T, T, PhasePoint<T>)> =
            points.iter().zip(&values).zip(&energies).map(|((p, v), &e)| (v[ri], e, p.clone())).collect();
        ranked.sort_by(rank);
        let starts: Vec<(T, T, PhasePoint<T>)> = ranked.into_iter().take(search.top_k.max(1)).collect();
        let refined: Vec<(T, T, PhasePoint<T>, bool)> = starts
            .par_iter()
            .map(|(_, e, p)| {
                let scale = (lit::<T>(2.0) * (*e + shell_width)).sqrt() * lit(0.1);
                let objective = |c: &[T]| -> T {
                    let q = PhasePoint { x: c[..dim / 2].to_vec(), xi: c[dim / 2..].to_vec() };
                    if model.symbol(&q.x, &q.xi) > e_max {
                        return T::nan();
                    }
                    escape_weight_integrals(model, &q, horizon, nu, &[r], flow)
                        .map(|v| v[0])
                        .unwrap_or_else(|_| T::nan())
                };
                let res = refine::maximize(objective, &p.coords(), scale, lit(1e-12), search.refine_iterations);
                let q = PhasePoint::from_coords(&res.point).unwrap_or_else(|_| p.clone());
                let e = model.symbol(&q.x, &q.xi);
                (res.value, e, q, res.converged)
            })
            .collect();
        let converged = refined.iter().all(|c| c.3);
        let mut cands = starts;
        cands.extend(refined.into_iter().filter(|c| c.0.is_finite()).map(|(v, e, q, _)| (v, e, q)));
        cands.sort_by(rank);
        per_r.push((cands, converged));
    }

    // Cross-seed every R with every other R's argmax.
    let seeds: Vec<PhasePoint<T>> = per_r.iter().map(|(c, _)| c[0].2.clone()).collect();
    let seed_values: Vec<Vec<T>> =
        seeds.par_iter().map(|p| escape_weight_integrals(model, p, horizon, nu, rs, flow)).collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(rs.len());
    for (ri, &r) in rs.iter().enumerate() {
        let mut pool: Vec<(T, T, PhasePoint<T>)> =
            seeds.iter().zip(&seed_values).map(|(p, v)| (v[ri], model.symbol(&p.x, &p.xi), p.clone())).collect();
        pool.sort_by(rank);
        let (value, energy, argmax) = pool.swap_remove(0);
        let halving_change = if search.halving_check {
            let half = FlowConfig { h: flow.h * lit(0.5), ..flow };
            let v = escape_weight_integrals(model, &argmax, horizon, nu, &[r], half)?[0];
            Some((v - value).abs() / value.abs().max(T::min_positive_value()))
        } else {
            None
        };
        let samples = if search.record_samples {
            points
                .iter()
                .zip(&values)
                .zip(&energies)
                .map(|((p, v), &e)| SampleRecord { point: p.clone(), energy: e, integral: v[ri] })
                .collect()
        } else {
            Vec::new()
        };
        out.push(ClassicalConstantEstimate {
            value,
            cutoff_saturated: energy >= e_max - shell_width,
            argmax,
            argmax_energy: energy,
            r,
            nu,
            horizon,
            samples_used: points.len(),
            refinement_converged: per_r[ri].1,
            halving_change,
            samples,
        });
    }
    Ok(out)
}

/// Writes per-sample diagnostics with columns `x…, xi…, E, integral`.
pub fn write_samples_csv<T: Real>(path: &Path, samples: &[SampleRecord<T>], dimension: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = Vec::new();
    for prefix in ["x", "xi"] {
        if dimension == 1 {
            header.push(prefix.to_string());
        } else {
            header.extend((1..=dimension).map(|i| format!("{prefix}{i}")));
        }
    }
    header.push("E".into());
    header.push("integral".into());
    w.write_record(&header)?;
    for s in samples {
        let mut row: Vec<String> = s.point.coords().iter().map(|v| format!("{v:e}")).collect();
        row.push(format!("{:e}", s.energy));
        row.push(format!("{:e}", s.integral));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
