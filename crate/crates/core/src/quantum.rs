//! Discretized Hamiltonian `P = −½Δ + V`, its propagator, the smoothing
//! functional `∫₀ᵀ ‖⟨x/R⟩^{−ν} Q e^{−itP} u‖² dt` with `Q = Op((R²+p)^{1/4})`,
//! the associated Gram operator and its top eigenvalue.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::classical::{flow_map, FlowConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::potential::{PhasePoint, PotentialModel};
use crate::scalar::{from_usize, lit, Real};
use crate::weyl::{check_model_grid, quantize_fn, GridSpec, OperatorMatrix};

/// Grid points at each edge whose mass decides whether a state feels the box.
pub const BOUNDARY_WIDTH: usize = 5;
/// Largest boundary mass of an eigenvector counted as resolved.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;
/// Largest out-of-band mass of a maximizer for `band_ok`.
pub const BAND_TOLERANCE: f64 = 1e-6;

/// `P = Op(½|ξ|²) + diag V(x_j)`.
pub fn build_hamiltonian<T: Real>(model: &PotentialModel<T>, grid: &GridSpec<T>) -> Result<OperatorMatrix<T>> {
    check_model_grid(model, grid)?;
    let half = lit::<T>(0.5);
    let kinetic = quantize_fn(grid, |_, xi| half * xi.iter().map(|&v| v * v).sum::<T>())?;
    let mut entries = kinetic.into_entries();
    for (j, x) in grid.positions().iter().enumerate() {
        entries[(j, j)] += Complex::new(model.value(x), T::zero());
    }
    OperatorMatrix::new(*grid, entries, true)
}

#[derive(Debug, Clone)]
pub struct SpectralData<T: Real> {
    grid: GridSpec<T>,
    eigenvalues: Vec<T>,
    eigenvectors: CMatrix<T>,
    max_residual: T,
    unitarity_error: T,
}

/// Full dense eigendecomposition of a Hermitian operator.
pub fn eigendecompose<T: Real>(p: &OperatorMatrix<T>) -> Result<SpectralData<T>> {
    if !p.is_hermitian() {
        return Err(Error::Config("eigendecompose needs a Hermitian operator".into()));
    }
    let (eigenvalues, eigenvectors) = T::hermitian_eigen(p.entries())?;
    let size = eigenvalues.len();
    let residual = p.entries() * &eigenvectors;
    let max_residual = (0..size)
        .into_par_iter()
        .map(|k| {
            let lam = eigenvalues[k];
            let r: T =
                (0..size).map(|j| (residual[(j, k)] - eigenvectors[(j, k)].scale(lam)).norm_sqr()).sum::<T>().sqrt();
            r / (T::one() + lam.abs())
        })
        .reduce(T::zero, T::max);
    let gram = linalg::adjoint(&eigenvectors) * &eigenvectors;
    let unitarity_error = (0..size).flat_map(|j| (0..size).map(move |k| (j, k))).fold(T::zero(), |m, (j, k)| {
        let target = if j == k { T::one() } else { T::zero() };
        m.max((gram[(j, k)] - Complex::new(target, T::zero())).norm())
    });
    let spec = SpectralData { grid: *p.grid(), eigenvalues, eigenvectors, max_residual, unitarity_error };
    let (res_tol, unit_tol) = spec.tolerances();
    if !(max_residual <= res_tol) || !(unitarity_error <= unit_tol) {
        return Err(Error::Solver(format!(
            "eigendecomposition inaccurate: residual {max_residual:e} (tolerance {res_tol:e}), unitarity {unitarity_error:e} (tolerance {unit_tol:e})"
        )));
    }
    Ok(spec)
}

impl<T: Real> SpectralData<T> {
    /// Residual and unitarity tolerances: 1e-9 and 1e-10 in double
    /// precision, relaxed with the machine epsilon for narrower types.
    pub fn tolerances(&self) -> (T, T) {
        let scale = T::eps() * from_usize::<T>(self.eigenvalues.len()).sqrt();
        (lit::<T>(1e-9).max(scale * lit(1e3)), lit::<T>(1e-10).max(scale * lit(1e3)))
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    pub fn max_residual(&self) -> T {
        self.max_residual
    }

    pub fn unitarity_error(&self) -> T {
        self.unitarity_error
    }

    /// Mass of column `k` within [`BOUNDARY_WIDTH`] points of the box edge.
    pub fn boundary_mass(&self, k: usize) -> T {
        self.grid.boundary_nodes(BOUNDARY_WIDTH).iter().map(|&j| self.eigenvectors[(j, k)].norm_sqr()).sum()
    }

    /// Eigenvectors with energy at most `½(0.7Ξ)²` and negligible boundary
    /// mass: the states the grid represents faithfully.
    pub fn resolved_indices(&self) -> Vec<usize> {
        let cutoff = self.grid.band_energy();
        let edge = self.grid.boundary_nodes(BOUNDARY_WIDTH);
        (0..self.eigenvalues.len())
            .filter(|&k| self.eigenvalues[k] <= cutoff)
            .filter(|&k| {
                edge.iter().map(|&j| self.eigenvectors[(j, k)].norm_sqr()).sum::<T>() <= lit(BOUNDARY_TOLERANCE)
            })
            .collect()
    }

    /// Coefficients `U* u`.
    pub fn coefficients(&self, u: &CVector<T>) -> CVector<T> {
        self.eigenvectors.ad_mul_complex(u)
    }

    /// `e^{−itP} u`.
    pub fn propagate(&self, u: &CVector<T>, t: T) -> Result<CVector<T>> {
        if u.len() != self.eigenvalues.len() {
            return Err(Error::ShapeMismatch(format!(
                "state of length {} on a grid of size {}",
                u.len(),
                self.eigenvalues.len()
            )));
        }
        let mut c = self.coefficients(u);
        for (ck, &lam) in c.iter_mut().zip(&self.eigenvalues) {
            let phase = -t * lam;
            *ck *= Complex::new(phase.cos(), phase.sin());
        }
        Ok(&self.eigenvectors * c)
    }
}

/// `e^{−itP} u` via the spectral decomposition.
pub fn propagate<T: Real>(spec: &SpectralData<T>, u: &CVector<T>, t: T) -> Result<CVector<T>> {
    spec.propagate(u, t)
}

trait AdjointMul<T: Real> {
    fn ad_mul_complex(&self, v: &CVector<T>) -> CVector<T>;
}

impl<T: Real> AdjointMul<T> for CMatrix<T> {
    fn ad_mul_complex(&self, v: &CVector<T>) -> CVector<T> {
        CVector::from_fn(self.ncols(), |k, _| {
            self.column(k)
                .iter()
                .zip(v.iter())
                .map(|(a, b)| a.conj() * b)
                .fold(Complex::new(T::zero(), T::zero()), |s, z| s + z)
        })
    }
}

/// Gauss–Legendre nodes and weights on `[0, T]`.
pub fn time_nodes<T: Real>(horizon: T, nq: usize) -> Result<Vec<(T, T)>> {
    let deg = NonZeroUsize::new(nq).ok_or_else(|| Error::Config("need at least one quadrature node".into()))?;
    let rule = GaussLegendre::new(deg);
    let half = lit::<T>(0.5) * horizon;
    Ok(rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (half * (T::one() + lit::<T>(x)), half * lit::<T>(w)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams<T> {
    #[serde(rename = "T")]
    pub horizon: T,
    pub nu: T,
    #[serde(rename = "R")]
    pub r: T,
    pub nq: usize,
}

impl<T: Real> SmoothingParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon >= T::zero() && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon T = {} must be finite and non-negative", self.horizon)));
        }
        if !(self.nu > lit(0.5)) {
            return Err(Error::Config(format!("ν = {} must exceed 1/2", self.nu)));
        }
        if !(self.r >= T::one()) {
            return Err(Error::Config(format!("R = {} must be at least 1", self.r)));
        }
        if self.nq < 16 {
            return Err(Error::Config(format!("nq = {} must be at least 16", self.nq)));
        }
        Ok(())
    }
}

/// `Q`, the weight `⟨x/R⟩^{−ν}` and the time rule for one parameter set.
pub struct SmoothingProblem<'a, T: Real> {
    spec: &'a SpectralData<T>,
    params: SmoothingParams<T>,
    q: OperatorMatrix<T>,
    weight: Vec<T>,
    nodes: Vec<(T, T)>,
}

impl<'a, T: Real> SmoothingProblem<'a, T> {
    pub fn new(model: &PotentialModel<T>, spec: &'a SpectralData<T>, params: SmoothingParams<T>) -> Result<Self> {
        params.validate()?;
        let grid = spec.grid();
        check_model_grid(model, grid)?;
        let r2 = params.r * params.r;
        let quarter = lit::<T>(0.25);
        let q = quantize_fn(grid, |x, xi| (r2 + model.symbol(x, xi)).powf(quarter))?;
        let weight = grid
            .positions()
            .iter()
            .map(|x| (T::one() + x.iter().map(|&v| v * v).sum::<T>() / r2).powf(-params.nu * lit(0.5)))
            .collect();
        let nodes = time_nodes(params.horizon, params.nq)?;
        Ok(Self { spec, params, q, weight, nodes })
    }

    pub fn params(&self) -> &SmoothingParams<T> {
        &self.params
    }

    pub fn spectral(&self) -> &SpectralData<T> {
        self.spec
    }

    /// `Op((R²+p)^{1/4})`.
    pub fn q(&self) -> &OperatorMatrix<T> {
        &self.q
    }

    /// Diagonal of `W_ν = diag ⟨x_j/R⟩^{−ν}`.
    pub fn weight(&self) -> &[T] {
        &self.weight
    }

    pub fn nodes(&self) -> &[(T, T)] {
        &self.nodes
    }

    /// `Σ_q w_q ‖W Q e^{−it_q P} u‖²` for a unit vector `u`.
    pub fn functional(&self, u: &CVector<T>) -> Result<T> {
        let norm = linalg::vector_norm(u);
        if (norm - T::one()).abs() > lit::<T>(1e-8).max(T::eps() * lit(100.0)) {
            return Err(Error::Config(format!("smoothing functional needs a unit vector, got norm {norm}")));
        }
        self.nodes
            .par_iter()
            .map(|&(t, w)| {
                let ut = self.spec.propagate(u, t)?;
                let qu = self.q.entries() * ut;
                Ok(w * qu.iter().zip(&self.weight).map(|(z, &wj)| z.norm_sqr() * wj * wj).sum::<T>())
            })
            .try_reduce(T::zero, |a, b| Ok(a + b))
    }

    /// `M̃ = U_S* Q W² Q U_S` for the eigenvector columns `S`.
    fn reduced_weight(&self, cols: &[usize]) -> CMatrix<T> {
        let size = self.weight.len();
        let u_s = CMatrix::from_fn(size, cols.len(), |j, c| self.spec.eigenvectors[(j, cols[c])]);
        let qu = self.q.entries() * &u_s;
        let mut wqu = qu.clone();
        for (j, &w) in self.weight.iter().enumerate() {
            let w2 = w * w;
            wqu.row_mut(j).iter_mut().for_each(|z| *z = z.scale(w2));
        }
        linalg::adjoint(&qu) * wqu
    }

    /// Gram operator in the eigenbasis of `P`, restricted to columns `cols`.
    fn gram_on(&self, cols: Vec<usize>, restricted: bool) -> GramOperator<T> {
        let mut reduced = self.reduced_weight(&cols);
        let lams: Vec<T> = cols.iter().map(|&k| self.spec.eigenvalues[k]).collect();
        let m = cols.len();
        let kernel: Vec<Complex<T>> = (0..m * m)
            .into_par_iter()
            .map(|idx| {
                let (j, k) = (idx / m, idx % m);
                let gap = lams[j] - lams[k];
                self.nodes.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(t, w)| {
                    let ph = t * gap;
                    acc + Complex::new(ph.cos(), ph.sin()).scale(w)
                })
            })
            .collect();
        for j in 0..m {
            for k in 0..m {
                reduced[(j, k)] *= kernel[j * m + k];
            }
        }
        linalg::symmetrize(&mut reduced);
        GramOperator { params: self.params, columns: cols, reduced, restricted }
    }

    /// Gram operator on the full grid space.
    pub fn gram(&self) -> GramOperator<T> {
        self.gram_on((0..self.weight.len()).collect(), false)
    }

    /// Gram operator compressed to [`SpectralData::resolved_indices`].
    pub fn resolved_gram(&self) -> Result<GramOperator<T>> {
        let cols = self.spec.resolved_indices();
        if cols.is_empty() {
            return Err(Error::Rejected("no eigenvector of P is resolved by this grid".into()));
        }
        Ok(self.gram_on(cols, true))
    }

    /// Smallest eigenvalue of `Q`; positivity is reported, not required.
    pub fn q_min_eigenvalue(&self) -> Result<T> {
        self.q.min_eigenvalue()
    }

    /// Spectral-norm gap between `Op((R²+p)^{1/4})` and the functional
    /// calculus `(R²+P)^{1/4}`, on the full space and compressed to the
    /// resolved eigenvectors.
    pub fn functional_calculus_gap(&self) -> Result<(T, T)> {
        let r2 = self.params.r * self.params.r;
        let quarter = lit::<T>(0.25);
        let u = &self.spec.eigenvectors;
        let mut scaled = u.clone();
        for (k, &lam) in self.spec.eigenvalues.iter().enumerate() {
            let f = (r2 + lam).max(T::zero()).powf(quarter);
            scaled.column_mut(k).iter_mut().for_each(|z| *z = z.scale(f));
        }
        let fc = scaled * linalg::adjoint(u);
        let diff = self.q.entries() - fc;
        let full = linalg::spectral_norm(&diff)?;
        let cols = self.spec.resolved_indices();
        let u_s = CMatrix::from_fn(u.nrows(), cols.len(), |j, c| u[(j, cols[c])]);
        let compressed = linalg::adjoint(&u_s) * diff * &u_s;
        Ok((full, linalg::spectral_norm(&compressed)?))
    }
}

/// `G = Σ_q w_q e^{it_qP} Q W² Q e^{−it_qP}` stored in the eigenbasis of `P`.
#[derive(Debug, Clone)]
pub struct GramOperator<T: Real> {
    params: SmoothingParams<T>,
    columns: Vec<usize>,
    reduced: CMatrix<T>,
    restricted: bool,
}

impl<T: Real> GramOperator<T> {
    pub fn params(&self) -> &SmoothingParams<T> {
        &self.params
    }

    /// Eigenvector indices spanning the space `G` acts on.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Matrix of `G` in the eigenbasis columns.
    pub fn reduced(&self) -> &CMatrix<T> {
        &self.reduced
    }

    pub fn is_restricted(&self) -> bool {
        self.restricted
    }

    /// `U_S G̃ U_S*` as an operator on the grid.
    pub fn to_operator(&self, spec: &SpectralData<T>) -> Result<OperatorMatrix<T>> {
        let u = spec.eigenvectors();
        let u_s = CMatrix::from_fn(u.nrows(), self.columns.len(), |j, c| u[(j, self.columns[c])]);
        let g = &u_s * &self.reduced * linalg::adjoint(&u_s);
        OperatorMatrix::new(*spec.grid(), g, true)
    }

    /// Lifts eigenbasis coefficients to a grid vector.
    pub fn lift(&self, spec: &SpectralData<T>, c: &CVector<T>) -> CVector<T> {
        let u = spec.eigenvectors();
        CVector::from_fn(u.nrows(), |j, _| {
            self.columns
                .iter()
                .zip(c.iter())
                .fold(Complex::new(T::zero(), T::zero()), |s, (&k, &ck)| s + u[(j, k)] * ck)
        })
    }
}

/// `Σ_q w_q ‖W Q e^{−it_q P} u‖²` for a unit vector `u`.
#[allow(clippy::too_many_arguments)]
pub fn smoothing_functional<T: Real>(
    model: &PotentialModel<T>,
    spec: &SpectralData<T>,
    u: &CVector<T>,
    horizon: T,
    nu: T,
    r: T,
    nq: usize,
) -> Result<T> {
    SmoothingProblem::new(model, spec, SmoothingParams { horizon, nu, r, nq })?.functional(u)
}

/// Full-space Gram operator as a grid matrix.
pub fn gram_operator<T: Real>(
    model: &PotentialModel<T>,
    spec: &SpectralData<T>,
    horizon: T,
    nu: T,
    r: T,
    nq: usize,
) -> Result<OperatorMatrix<T>> {
    SmoothingProblem::new(model, spec, SmoothingParams { horizon, nu, r, nq })?.gram().to_operator(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMethod {
    PowerIteration,
    DenseEig,
}

/// Relative Rayleigh-quotient change that stops power iteration.
pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct QuantumConstantEstimate<T: Real> {
    pub value: T,
    pub maximizer: CVector<T>,
    pub method: ConstantMethod,
    pub iterations: usize,
    /// Power iteration stagnated and the dense solver was used instead.
    pub fell_back: bool,
    pub note: Option<String>,
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix.
pub fn top_eigenpair<T: Real>(g: &CMatrix<T>, method: ConstantMethod, seed: u64) -> Result<QuantumConstantEstimate<T>> {
    let dense = |note: Option<String>, fell_back: bool| -> Result<QuantumConstantEstimate<T>> {
        let (vals, vecs) = T::hermitian_eigen(g)?;
        let top = vals.len() - 1;
        Ok(QuantumConstantEstimate {
            value: vals[top],
            maximizer: vecs.column(top).into_owned(),
            method: ConstantMethod::DenseEig,
            iterations: 0,
            fell_back,
            note,
        })
    };
    match method {
        ConstantMethod::DenseEig => dense(None, false),
        ConstantMethod::PowerIteration => {
            let res = linalg::power_iteration(g, lit(POWER_TOLERANCE), POWER_MAX_ITER, seed)?;
            if res.converged {
                Ok(QuantumConstantEstimate {
                    value: res.value,
                    maximizer: res.vector,
                    method: ConstantMethod::PowerIteration,
                    iterations: res.iterations,
                    fell_back: false,
                    note: None,
                })
            } else {
                log::warn!("power iteration stagnated after {} iterations; using dense eigensolver", res.iterations);
                dense(Some(format!("power iteration stagnated after {} iterations", res.iterations)), true)
            }
        }
    }
}

/// Top eigenvalue of a Gram matrix on the grid.
pub fn quantum_constant<T: Real>(g: &OperatorMatrix<T>, method: ConstantMethod) -> Result<QuantumConstantEstimate<T>> {
    if !g.is_hermitian() {
        return Err(Error::Config("quantum constant needs a Hermitian operator".into()));
    }
    top_eigenpair(g.entries(), method, 0)
}

/// Top eigenpair of a Gram operator in its eigenbasis, lifted to the grid.
pub fn gram_constant<T: Real>(
    gram: &GramOperator<T>,
    spec: &SpectralData<T>,
    method: ConstantMethod,
    seed: u64,
) -> Result<QuantumConstantEstimate<T>> {
    let mut est = top_eigenpair(&gram.reduced, method, seed)?;
    est.maximizer = gram.lift(spec, &est.maximizer);
    Ok(est)
}

/// Mass of `u` outside the resolved eigenvectors plus its discrete Fourier
/// mass at momenta above `0.7Ξ`.
pub fn band_mass<T: Real>(spec: &SpectralData<T>, resolved: &[usize], u: &CVector<T>) -> T {
    let total: T = u.iter().map(|z| z.norm_sqr()).sum();
    if total == T::zero() {
        return T::zero();
    }
    let c = spec.coefficients(u);
    let inside: T = resolved.iter().map(|&k| c[k].norm_sqr()).sum();
    let outside = (total - inside).max(T::zero());
    (outside + high_momentum_mass(spec.grid(), u)) / total
}

/// Discrete Fourier mass of `u` at `|ξ| > 0.7Ξ`.
pub fn high_momentum_mass<T: Real>(grid: &GridSpec<T>, u: &CVector<T>) -> T {
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
    let dxi = grid.dxi();
    let cut = grid.resolved_momentum();
    let freq = |k: usize| -> T {
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        lit::<T>(signed) * dxi
    };
    let total: T = data.iter().map(|z| z.norm_sqr()).sum();
    if total == T::zero() {
        return T::zero();
    }
    let high: T = data
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let k2: T = grid.unflatten(*i, n).into_iter().map(|k| freq(k) * freq(k)).sum();
            k2.sqrt() > cut
        })
        .map(|(_, z)| z.norm_sqr())
        .sum();
    high / total
}

#[derive(Debug, Clone, PartialEq)]
pub struct EgorovReport<T> {
    /// `‖e^{itP}Op(a)e^{−itP} − Op(a∘φᵗ)‖ / ‖Op(a)‖`, compressed to the
    /// resolved eigenvectors of `P`.
    pub residual: T,
    /// `‖Op(a)‖` on the resolved eigenvectors.
    pub symbol_norm: T,
    pub resolved_dimension: usize,
}

/// Compares the Heisenberg-evolved quantization of `a` with the
/// quantization of the transported symbol `a∘φᵗ`.
///
/// `a` is a function because `a∘φᵗ` must be evaluated off the grid; the flow
/// is integrated forward from every midpoint × momentum node. Both sides are
/// compared on the resolved eigenvectors: the periodic midpoint rule couples
/// the two box edges, which only unresolved states see.
pub fn egorov_residual<T: Real, F>(
    model: &PotentialModel<T>,
    spec: &SpectralData<T>,
    a: F,
    t: T,
    flow: FlowConfig<T>,
) -> Result<EgorovReport<T>>
where
    F: Fn(&[T], &[T]) -> T + Sync,
{
    let grid = spec.grid();
    check_model_grid(model, grid)?;
    let resolved = spec.resolved_indices();
    if resolved.is_empty() {
        return Err(Error::Solver("no resolved eigenvectors for the Egorov comparison".into()));
    }
    let u = spec.eigenvectors().select_columns(&resolved);
    let u_adj = linalg::adjoint(&u);
    let op = quantize_fn(grid, &a)?;
    let mut inner = &u_adj * op.entries() * &u;
    linalg::symmetrize(&mut inner);
    let symbol_norm = linalg::hermitian_norm(&inner)?;
    let resolved_dimension = resolved.len();
    if t == T::zero() {
        return Ok(EgorovReport { residual: T::zero(), symbol_norm, resolved_dimension });
    }
    let phases: Vec<Complex<T>> = resolved
        .iter()
        .map(|&k| {
            let ph = t * spec.eigenvalues()[k];
            Complex::new(ph.cos(), ph.sin())
        })
        .collect();
    // U* e^{itP} A e^{−itP} U = D (U* A U) D*.
    for j in 0..resolved_dimension {
        for k in 0..resolved_dimension {
            inner[(j, k)] *= phases[j] * phases[k].conj();
        }
    }
    let transported = transported_operator(model, grid, &a, t, flow)?;
    let mut diff = inner - &u_adj * transported.entries() * &u;
    linalg::symmetrize(&mut diff);
    let diff_norm = linalg::hermitian_norm(&diff)?;
    let residual = if symbol_norm > T::zero() { diff_norm / symbol_norm } else { diff_norm };
    Ok(EgorovReport { residual, symbol_norm, resolved_dimension })
}

/// `Op(a∘φᵗ)` with the flow integrated from each node.
pub fn transported_operator<T: Real, F>(
    model: &PotentialModel<T>,
    grid: &GridSpec<T>,
    a: &F,
    t: T,
    flow: FlowConfig<T>,
) -> Result<OperatorMatrix<T>>
where
    F: Fn(&[T], &[T]) -> T + Sync,
{
    let sym = crate::weyl::SymbolGrid::try_from_fn(*grid, "a∘φᵗ", |x, xi| {
        let rho = PhasePoint { x: x.to_vec(), xi: xi.to_vec() };
        let end = flow_map(model, &rho, t, flow)?;
        Ok(a(&end.x, &end.xi))
    })?;
    crate::weyl::quantize_symbol(&sym)
}
