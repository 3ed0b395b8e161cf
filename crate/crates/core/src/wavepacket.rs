//! Unit-width Gaussian coherent states and the wave-packet probe comparing
//! the smoothing functional of a packet with the classical trajectory
//! integral at its center.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::classical::{escape_weight_integral, escape_weight_integrals, integrate_flow_with, FlowConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CVector};
use crate::potential::{PhasePoint, PotentialModel};
use crate::quantum::{SmoothingParams, SmoothingProblem, SpectralData};
use crate::scalar::{lit, Real};
use crate::weyl::{check_model_grid, quantize_symbol, GridSpec, SymbolGrid};

/// Margin, in units of the packet width, kept from the box and from `0.7Ξ`.
pub const PACKET_MARGIN: f64 = 5.0;
/// Half-width of the phase-space window for Gaussian averages.
pub const AVERAGE_WINDOW: f64 = 6.0;

#[derive(Debug, Clone)]
pub struct CoherentState<T: Real> {
    center: PhasePoint<T>,
    vector: CVector<T>,
    grid: GridSpec<T>,
}

impl<T: Real> CoherentState<T> {
    pub fn center(&self) -> &PhasePoint<T> {
        &self.center
    }

    pub fn vector(&self) -> &CVector<T> {
        &self.vector
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// `Σ_j x_j |u_j|²`.
    pub fn position_expectation(&self) -> Vec<T> {
        let mut mean = vec![T::zero(); self.grid.d()];
        for (j, z) in self.vector.iter().enumerate() {
            for (m, x) in mean.iter_mut().zip(self.grid.position(j)) {
                *m += x * z.norm_sqr();
            }
        }
        mean
    }

    /// Mean momentum of the discrete Fourier distribution.
    pub fn momentum_expectation(&self) -> Vec<T> {
        momentum_expectation(&self.grid, &self.vector)
    }

    /// `⟨self, other⟩`.
    pub fn overlap(&self, other: &Self) -> Complex<T> {
        self.vector
            .iter()
            .zip(other.vector.iter())
            .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b)
    }
}

/// Distance by which `center` clears the box and the resolved band, after
/// the packet margin; negative values mean rejection.
pub fn packet_clearance<T: Real>(center: &PhasePoint<T>, grid: &GridSpec<T>) -> T {
    let margin = lit::<T>(PACKET_MARGIN);
    let x_room = center.x.iter().fold(T::infinity(), |m, &x| m.min(grid.half_width() - x.abs() - margin));
    let xi_room = center.xi.iter().fold(T::infinity(), |m, &p| m.min(grid.resolved_momentum() - p.abs() - margin));
    x_room.min(xi_room)
}

/// `u(x) = π^{−d/4} e^{−|x−x₀|²/2} e^{iξ₀·x}` sampled on the grid and
/// normalized in `ℓ²`.
pub fn coherent_state<T: Real>(center: &PhasePoint<T>, grid: &GridSpec<T>) -> Result<CoherentState<T>> {
    if center.dimension() != grid.d() || !center.is_finite() {
        return Err(Error::ShapeMismatch("packet center does not match the grid".into()));
    }
    let clearance = packet_clearance(center, grid);
    if clearance < T::zero() {
        return Err(Error::Rejected(format!(
            "packet at {:?} violates the {PACKET_MARGIN}σ margin by {}: needs |x| ≤ {} and |ξ| ≤ {}",
            center.coords(),
            -clearance,
            grid.half_width() - lit(PACKET_MARGIN),
            grid.resolved_momentum() - lit(PACKET_MARGIN)
        )));
    }
    let d = grid.d();
    let pref = T::PI().powf(-lit::<T>(0.25) * lit(d as f64)) * grid.dx().powf(lit::<T>(0.5) * lit(d as f64));
    let half = lit::<T>(0.5);
    let mut v = CVector::<T>::from_iterator(
        grid.size(),
        grid.positions().into_iter().map(|x| {
            let r2: T = x.iter().zip(&center.x).map(|(&a, &b)| (a - b) * (a - b)).sum();
            let phase: T = x.iter().zip(&center.xi).map(|(&a, &p)| a * p).sum();
            Complex::new(phase.cos(), phase.sin()).scale(pref * (-half * r2).exp())
        }),
    );
    let norm = linalg::vector_norm(&v);
    v.iter_mut().for_each(|z| *z = z.unscale(norm));
    Ok(CoherentState { center: center.clone(), vector: v, grid: *grid })
}

/// Mean of `ξ` under `|û(ξ)|²` with `û` the centered DFT of `u`.
pub fn momentum_expectation<T: Real>(grid: &GridSpec<T>, u: &CVector<T>) -> Vec<T> {
    let n = grid.n();
    let mut data: Vec<Complex<T>> = u.iter().copied().collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut data);
    if grid.d() == 2 {
        let mut col = vec![Complex::new(T::zero(), T::zero()); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            fft.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }
    let total: T = data.iter().map(|z| z.norm_sqr()).sum();
    let mut mean = vec![T::zero(); grid.d()];
    for (i, z) in data.iter().enumerate() {
        for (m, k) in mean.iter_mut().zip(grid.unflatten(i, n)) {
            let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            *m += lit::<T>(signed) * grid.dxi() * z.norm_sqr();
        }
    }
    mean.into_iter().map(|m| m / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAverage<T> {
    /// `π^{−d} ∫ a(ρ) e^{−|ρ−ρ₀|²} dρ` by the phase-space trapezoid rule.
    pub quadrature: T,
    /// `(u, Op(a) u)` for the coherent state at `ρ₀`.
    pub quadratic_form: T,
}

/// Gaussian phase-space averages of the `k` components of `f`, evaluated on
/// midpoint × momentum nodes inside the `6σ` window with every `stride`-th
/// node per axis.
fn window_average<T: Real, F>(
    grid: &GridSpec<T>,
    center: &PhasePoint<T>,
    strides: (usize, usize),
    k: usize,
    f: F,
) -> Result<Vec<T>>
where
    F: Fn(usize, usize, &[T], &[T]) -> Result<Vec<T>> + Sync,
{
    let d = grid.d();
    let window = lit::<T>(AVERAGE_WINDOW);
    let mids = grid.midpoint_axis();
    let moms = grid.momentum_axis();
    let axis_nodes = |axis: &[T], c: T, stride: usize| -> Vec<usize> {
        let hits: Vec<usize> = (0..axis.len()).filter(|&i| (axis[i] - c).abs() <= window).collect();
        match hits.first() {
            None => Vec::new(),
            Some(&first) => {
                // Anchor the stride at the node nearest the center so the
                // sub-grid stays symmetric about it.
                let nearest = hits
                    .iter()
                    .copied()
                    .min_by(|&a, &b| (axis[a] - c).abs().total_cmp(&(axis[b] - c).abs()))
                    .unwrap_or(first);
                hits.into_iter().filter(|&i| (i as isize - nearest as isize).rem_euclid(stride as isize) == 0).collect()
            }
        }
    };
    let x_nodes: Vec<Vec<usize>> = (0..d).map(|a| axis_nodes(&mids, center.x[a], strides.0)).collect();
    let xi_nodes: Vec<Vec<usize>> = (0..d).map(|a| axis_nodes(&moms, center.xi[a], strides.1)).collect();
    let combos = |lists: &[Vec<usize>]| -> Vec<Vec<usize>> {
        lists.iter().fold(vec![Vec::new()], |acc, list| {
            acc.into_iter()
                .flat_map(|prefix| {
                    list.iter().map(move |&i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect()
        })
    };
    let xs = combos(&x_nodes);
    let xis = combos(&xi_nodes);
    let mlen = 2 * grid.n() - 1;
    let cell = (lit::<T>(0.5) * grid.dx() * lit(strides.0 as f64) * grid.dxi() * lit(strides.1 as f64)).powi(d as i32);
    let norm = T::PI().powi(-(d as i32)) * cell;
    let nodes: Vec<(&Vec<usize>, &Vec<usize>)> = xs.iter().flat_map(|a| xis.iter().map(move |b| (a, b))).collect();
    let terms: Vec<Vec<T>> = nodes
        .par_iter()
        .map(|&(x_idx, p_idx)| {
            let x: Vec<T> = x_idx.iter().map(|&i| mids[i]).collect();
            let p: Vec<T> = p_idx.iter().map(|&i| moms[i]).collect();
            let s = x_idx.iter().fold(0, |acc, &i| acc * mlen + i);
            let m = p_idx.iter().fold(0, |acc, &i| acc * grid.n() + i);
            let dist: T =
                x.iter().zip(&center.x).chain(p.iter().zip(&center.xi)).map(|(&a, &b)| (a - b) * (a - b)).sum();
            let w = (-dist).exp();
            Ok(f(s, m, &x, &p)?.into_iter().map(|v| w * v).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![T::zero(); k];
    for t in terms {
        for (o, v) in out.iter_mut().zip(t) {
            *o += v;
        }
    }
    Ok(out.into_iter().map(|v| norm * v).collect())
}

/// Gaussian average of `a` around `center`, by phase-space quadrature and
/// by the quadratic form of its quantization on the coherent state.
pub fn gaussian_symbol_average<T: Real>(a: &SymbolGrid<T>, center: &PhasePoint<T>) -> Result<GaussianAverage<T>> {
    let grid = a.grid();
    let quadrature = window_average(grid, center, (1, 1), 1, |s, m, _, _| Ok(vec![a.at(s, m).re]))?[0];
    let u = coherent_state(center, grid)?;
    let op = quantize_symbol(a)?;
    let quadratic_form = linalg::quadratic_form(op.entries(), u.vector());
    Ok(GaussianAverage { quadrature, quadratic_form })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<T> {
    pub center: PhasePoint<T>,
    pub r: T,
    /// Smoothing functional of the coherent state.
    pub s: T,
    /// Trajectory integral `a_R` at the center.
    pub a: T,
    /// Gaussian average of `a_R` around the center.
    pub a_bar: T,
    pub s_over_a: T,
    pub abar_over_a: T,
}

/// Node spacing targeted when averaging the time-integrated symbol.
const PROBE_SPACING: f64 = 0.25;

/// Probes the packet at `center` for each `R`.
///
/// The classical orbit of the center must keep the packet margin over
/// `[0, T]`; otherwise the probe is rejected. The Gaussian-smoothed value
/// averages the time-integrated symbol `a_R = ∫₀ᵀ f_R∘φᵗ dt` directly.
#[allow(clippy::too_many_arguments)]
pub fn probe_lower_bound<T: Real>(
    model: &PotentialModel<T>,
    spec: &SpectralData<T>,
    center: &PhasePoint<T>,
    horizon: T,
    nu: T,
    rs: &[T],
    nq: usize,
    flow: FlowConfig<T>,
) -> Result<Vec<ProbeReport<T>>> {
    let grid = spec.grid();
    check_model_grid(model, grid)?;
    let traj = integrate_flow_with(model, center, horizon, FlowConfig { h: flow.h.min(horizon), ..flow })?;
    for (t, p) in traj.samples() {
        let clearance = packet_clearance(&p, grid);
        if clearance < T::zero() {
            return Err(Error::Rejected(format!(
                "orbit from {:?} leaves the resolved box at t = {t} (short by {})",
                center.coords(),
                -clearance
            )));
        }
    }
    let u = coherent_state(center, grid)?;

    let spacing = lit::<T>(PROBE_SPACING * grid.d() as f64);
    let stride = |h: T| (spacing / h).floor().to_usize().unwrap_or(1).max(1);
    let strides = (stride(lit::<T>(0.5) * grid.dx()), stride(grid.dxi()));
    let node_flow = FlowConfig { h: flow.h.min(horizon), ..flow };
    let a_bar = window_average(grid, center, strides, rs.len(), |_, _, x, xi| {
        let rho = PhasePoint { x: x.to_vec(), xi: xi.to_vec() };
        escape_weight_integrals(model, &rho, horizon, nu, rs, node_flow)
    })?;

    rs.iter()
        .zip(a_bar)
        .map(|(&r, a_bar)| {
            let problem = SmoothingProblem::new(model, spec, SmoothingParams { horizon, nu, r, nq })?;
            let s = problem.functional(u.vector())?;
            let a = escape_weight_integral(&traj, nu, r)?;
            Ok(ProbeReport { center: center.clone(), r, s, a, a_bar, s_over_a: s / a, abar_over_a: a_bar / a })
        })
        .collect()
}
