//! Discrete Weyl quantization on a periodic position grid.
//!
//! Positions are `x_j = −L + j·dx` with `dx = 2L/n`, momenta are the DFT-dual
//! nodes `ξ_m = (m − n/2)·π/L`, and symbols are sampled at the literal
//! midpoints `(x_j + x_k)/2 = −L + s·dx/2`, `s = j + k ∈ [0, 2n−2]`. The
//! matrix entries are
//!
//! ```text
//! A_jk = n^{−d} Σ_m e^{iξ_m·(x_j − x_k)} a((x_j + x_k)/2, ξ_m)
//! ```
//!
//! which is one inverse DFT per midpoint followed by a scatter along the
//! anti-diagonals `j + k = s`. Multi-dimensional indices are flattened in
//! row-major order (axis 0 slowest).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::potential::PotentialModel;
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Largest supported Hilbert-space dimension `n^d`.
pub const MAX_GRID_SIZE: usize = 4096;
/// Momenta up to this fraction of the Nyquist cutoff count as resolved.
pub const RESOLVED_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    d: usize,
    n: usize,
    l: T,
}

/// Builds a `d`-dimensional grid with `n` points per axis on `[−L, L)^d`.
pub fn build_grid<T: Real>(d: usize, n: usize, l: T) -> Result<GridSpec<T>> {
    GridSpec::new(d, n, l)
}

impl<T: Real> GridSpec<T> {
    pub fn new(d: usize, n: usize, l: T) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(Error::Config(format!("grid dimension d = {d} must be 1 or 2")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size n = {n} must be a power of two ≥ 2")));
        }
        if n.pow(d as u32) > MAX_GRID_SIZE {
            return Err(Error::Config(format!("n^d = {} exceeds the dense limit {MAX_GRID_SIZE}", n.pow(d as u32))));
        }
        if !(l > T::zero() && l.is_finite()) {
            return Err(Error::Config(format!("box half-width L = {l} must be positive")));
        }
        Ok(Self { d, n, l })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> T {
        self.l
    }

    /// Hilbert-space dimension `n^d`.
    pub fn size(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn dx(&self) -> T {
        lit::<T>(2.0) * self.l / from_usize(self.n)
    }

    /// Momentum spacing `π/L`.
    pub fn dxi(&self) -> T {
        T::PI() / self.l
    }

    /// Nyquist cutoff `Ξ = π/dx`.
    pub fn nyquist(&self) -> T {
        T::PI() / self.dx()
    }

    /// `0.7·Ξ`.
    pub fn resolved_momentum(&self) -> T {
        lit::<T>(RESOLVED_FRACTION) * self.nyquist()
    }

    /// `½(0.7·Ξ)²`, the largest kinetic energy the grid resolves.
    pub fn band_energy(&self) -> T {
        let k = self.resolved_momentum();
        lit::<T>(0.5) * k * k
    }

    pub fn position_axis(&self) -> Vec<T> {
        (0..self.n).map(|j| -self.l + self.dx() * from_usize(j)).collect()
    }

    pub fn momentum_axis(&self) -> Vec<T> {
        let half = from_usize::<T>(self.n / 2);
        (0..self.n).map(|m| (from_usize::<T>(m) - half) * self.dxi()).collect()
    }

    /// The `2n − 1` midpoints `−L + s·dx/2`.
    pub fn midpoint_axis(&self) -> Vec<T> {
        let h = lit::<T>(0.5) * self.dx();
        (0..2 * self.n - 1).map(|s| -self.l + h * from_usize(s)).collect()
    }

    pub fn midpoint_count(&self) -> usize {
        (2 * self.n - 1).pow(self.d as u32)
    }

    /// Per-axis indices of a flat index with axis length `len`.
    pub fn unflatten(&self, flat: usize, len: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        let mut rem = flat;
        for a in (0..self.d).rev() {
            idx[a] = rem % len;
            rem /= len;
        }
        idx
    }

    /// Coordinates of position node `j` (flat).
    pub fn position(&self, j: usize) -> Vec<T> {
        let axis = self.position_axis();
        self.unflatten(j, self.n).into_iter().map(|i| axis[i]).collect()
    }

    /// All position nodes, flat order.
    pub fn positions(&self) -> Vec<Vec<T>> {
        (0..self.size()).map(|j| self.position(j)).collect()
    }

    /// Coordinates of momentum node `m` (flat).
    pub fn momentum(&self, m: usize) -> Vec<T> {
        let axis = self.momentum_axis();
        self.unflatten(m, self.n).into_iter().map(|i| axis[i]).collect()
    }

    /// Indices of the position nodes within `width` points of the box edge.
    pub fn boundary_nodes(&self, width: usize) -> Vec<usize> {
        (0..self.size())
            .filter(|&j| self.unflatten(j, self.n).iter().any(|&i| i < width || i + width >= self.n))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolValues<T> {
    Real(Vec<T>),
    Complex(Vec<Complex<T>>),
}

/// A symbol sampled on midpoint × momentum nodes; entry `s·n^d + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid<T> {
    grid: GridSpec<T>,
    values: SymbolValues<T>,
    label: String,
}

impl<T: Real> SymbolGrid<T> {
    pub fn from_values(grid: GridSpec<T>, values: SymbolValues<T>, label: impl Into<String>) -> Result<Self> {
        let expected = grid.midpoint_count() * grid.size();
        let (len, finite) = match &values {
            SymbolValues::Real(v) => (v.len(), v.iter().all(|x| x.is_finite())),
            SymbolValues::Complex(v) => (v.len(), v.iter().all(|z| z.re.is_finite() && z.im.is_finite())),
        };
        if len != expected {
            return Err(Error::ShapeMismatch(format!("symbol has {len} samples, grid needs {expected}")));
        }
        if !finite {
            return Err(Error::Config("symbol has non-finite samples".into()));
        }
        Ok(Self { grid, values, label: label.into() })
    }

    /// Samples a real symbol `a(x, ξ)` on every midpoint × momentum node.
    pub fn from_fn<F>(grid: GridSpec<T>, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[T], &[T]) -> T + Sync,
    {
        Self::try_from_fn(grid, label, |x, xi| Ok(f(x, xi)))
    }

    pub fn try_from_fn<F>(grid: GridSpec<T>, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[T], &[T]) -> Result<T> + Sync,
    {
        let nm = grid.size();
        let mids = grid.midpoint_axis();
        let moms = grid.momentum_axis();
        let values: Vec<Vec<T>> = (0..grid.midpoint_count())
            .into_par_iter()
            .map(|s| {
                let x: Vec<T> = grid.unflatten(s, 2 * grid.n - 1).into_iter().map(|i| mids[i]).collect();
                (0..nm)
                    .map(|m| {
                        let xi: Vec<T> = grid.unflatten(m, grid.n).into_iter().map(|i| moms[i]).collect();
                        f(&x, &xi)
                    })
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_values(grid, SymbolValues::Real(values.concat()), label)
    }

    pub fn from_complex_fn<F>(grid: GridSpec<T>, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[T], &[T]) -> Complex<T> + Sync,
    {
        let nm = grid.size();
        let mids = grid.midpoint_axis();
        let moms = grid.momentum_axis();
        let values: Vec<Complex<T>> = (0..grid.midpoint_count())
            .into_par_iter()
            .flat_map_iter(|s| {
                let x: Vec<T> = grid.unflatten(s, 2 * grid.n - 1).into_iter().map(|i| mids[i]).collect();
                let row: Vec<Complex<T>> = (0..nm)
                    .map(|m| {
                        let xi: Vec<T> = grid.unflatten(m, grid.n).into_iter().map(|i| moms[i]).collect();
                        f(&x, &xi)
                    })
                    .collect();
                row
            })
            .collect();
        Self::from_values(grid, SymbolValues::Complex(values), label)
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &SymbolValues<T> {
        &self.values
    }

    pub fn is_real(&self) -> bool {
        matches!(self.values, SymbolValues::Real(_))
    }

    /// Value at midpoint `s` and momentum `m` (flat indices).
    pub fn at(&self, s: usize, m: usize) -> Complex<T> {
        let i = s * self.grid.size() + m;
        match &self.values {
            SymbolValues::Real(v) => Complex::new(v[i], T::zero()),
            SymbolValues::Complex(v) => v[i],
        }
    }

    fn real_values(&self) -> Option<&[T]> {
        match &self.values {
            SymbolValues::Real(v) => Some(v),
            SymbolValues::Complex(_) => None,
        }
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("symbols live on different grids".into()));
        }
        Ok(())
    }

    /// `α·a + β·b`.
    pub fn combine(alpha: T, a: &Self, beta: T, b: &Self) -> Result<Self> {
        a.check_same_grid(b)?;
        let label = format!("{alpha}·{} + {beta}·{}", a.label, b.label);
        let values = match (a.real_values(), b.real_values()) {
            (Some(x), Some(y)) => SymbolValues::Real(x.iter().zip(y).map(|(&p, &q)| alpha * p + beta * q).collect()),
            _ => SymbolValues::Complex((0..a.len()).map(|i| a.flat(i).scale(alpha) + b.flat(i).scale(beta)).collect()),
        };
        Self::from_values(a.grid, values, label)
    }

    /// Pointwise product `a·b`.
    pub fn product(a: &Self, b: &Self) -> Result<Self> {
        a.check_same_grid(b)?;
        let label = format!("({})·({})", a.label, b.label);
        let values = match (a.real_values(), b.real_values()) {
            (Some(x), Some(y)) => SymbolValues::Real(x.iter().zip(y).map(|(&p, &q)| p * q).collect()),
            _ => SymbolValues::Complex((0..a.len()).map(|i| a.flat(i) * b.flat(i)).collect()),
        };
        Self::from_values(a.grid, values, label)
    }

    fn len(&self) -> usize {
        match &self.values {
            SymbolValues::Real(v) => v.len(),
            SymbolValues::Complex(v) => v.len(),
        }
    }

    fn flat(&self, i: usize) -> Complex<T> {
        match &self.values {
            SymbolValues::Real(v) => Complex::new(v[i], T::zero()),
            SymbolValues::Complex(v) => v[i],
        }
    }

    /// Largest modulus over the grid.
    pub fn sup(&self) -> T {
        (0..self.len()).fold(T::zero(), |m, i| m.max(self.flat(i).norm()))
    }

    /// Maximum over interior nodes of the norm of the finite-difference
    /// derivative tensor of order `k` (all `2d` phase-space directions).
    pub fn derivative_sup(&self, k: usize) -> T {
        let g = &self.grid;
        let d = g.d;
        let mlen = 2 * g.n - 1;
        let steps: Vec<T> = (0..2 * d).map(|a| if a < d { lit::<T>(0.5) * g.dx() } else { g.dxi() }).collect();
        let dims: Vec<usize> = (0..2 * d).map(|a| if a < d { mlen } else { g.n }).collect();
        let alphas = multi_indices(2 * d, k);
        let margin = k;
        let nm = g.size();
        let total = g.midpoint_count() * nm;
        let value_at = |coords: &[usize]| -> Complex<T> {
            let mut s = 0;
            let mut m = 0;
            for a in 0..d {
                s = s * mlen + coords[a];
                m = m * g.n + coords[d + a];
            }
            self.at(s, m)
        };
        (0..total)
            .into_par_iter()
            .map(|flat| {
                let (s, m) = (flat / nm, flat % nm);
                let mut coords = g.unflatten(s, mlen);
                coords.extend(g.unflatten(m, g.n));
                if coords.iter().zip(&dims).any(|(&c, &len)| c < margin || c + margin >= len) {
                    return T::zero();
                }
                let sq: T =
                    alphas.iter().map(|alpha| nested_difference(&value_at, &coords, alpha, &steps).norm_sqr()).sum();
                sq.sqrt()
            })
            .reduce(T::zero, T::max)
    }

    /// `max_{k ≤ order}` of [`Self::derivative_sup`], the grid surrogate of a
    /// symbol seminorm.
    pub fn seminorm(&self, order: usize) -> T {
        (0..=order).map(|k| if k == 0 { self.sup() } else { self.derivative_sup(k) }).fold(T::zero(), T::max)
    }
}

fn multi_indices(dims: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(dims: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..dims {
            cur.push(a);
            rec(dims, k, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dims, k, 0, &mut Vec::new(), &mut out);
    out
}

fn nested_difference<T: Real, F: Fn(&[usize]) -> Complex<T>>(
    f: &F,
    coords: &[usize],
    axes: &[usize],
    steps: &[T],
) -> Complex<T> {
    match axes.split_first() {
        None => f(coords),
        Some((&a, rest)) => {
            let mut plus = coords.to_vec();
            let mut minus = coords.to_vec();
            plus[a] += 1;
            minus[a] -= 1;
            (nested_difference(f, &plus, rest, steps) - nested_difference(f, &minus, rest, steps))
                .unscale(lit::<T>(2.0) * steps[a])
        }
    }
}

/// `(R² + p)^γ` on the grid.
pub fn symbol_power<T: Real>(model: &PotentialModel<T>, gamma: T, r: T, grid: &GridSpec<T>) -> Result<SymbolGrid<T>> {
    check_model_grid(model, grid)?;
    if !(r >= T::one()) {
        return Err(Error::Config(format!("R = {r} must be at least 1")));
    }
    if !(gamma <= lit(0.5)) {
        return Err(Error::Config(format!("exponent γ = {gamma} must be at most 1/2")));
    }
    let r2 = r * r;
    SymbolGrid::from_fn(*grid, format!("(R²+p)^{gamma}"), |x, xi| (r2 + model.symbol(x, xi)).powf(gamma))
}

/// `f_R = ⟨x/R⟩^{−2ν} √(R² + p)` on the grid.
pub fn symbol_fr<T: Real>(model: &PotentialModel<T>, nu: T, r: T, grid: &GridSpec<T>) -> Result<SymbolGrid<T>> {
    check_model_grid(model, grid)?;
    if !(r >= T::one()) {
        return Err(Error::Config(format!("R = {r} must be at least 1")));
    }
    if !(nu > lit(0.5)) {
        return Err(Error::Config(format!("ν = {nu} must exceed 1/2")));
    }
    let r2 = r * r;
    SymbolGrid::from_fn(*grid, "f_R", |x, xi| fr_value(model, nu, r2, x, xi))
}

#[inline]
pub(crate) fn fr_value<T: Real>(model: &PotentialModel<T>, nu: T, r2: T, x: &[T], xi: &[T]) -> T {
    let x2: T = x.iter().map(|&v| v * v).sum();
    (T::one() + x2 / r2).powf(-nu) * (r2 + model.symbol(x, xi)).sqrt()
}

pub(crate) fn check_model_grid<T: Real>(model: &PotentialModel<T>, grid: &GridSpec<T>) -> Result<()> {
    if model.dimension() != grid.d() {
        return Err(Error::ShapeMismatch(format!(
            "{}-dimensional potential on a {}-dimensional grid",
            model.dimension(),
            grid.d()
        )));
    }
    Ok(())
}

/// A dense matrix acting on the position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    grid: GridSpec<T>,
    entries: CMatrix<T>,
    hermitian: bool,
}

impl<T: Real> OperatorMatrix<T> {
    /// Wraps `entries`; when `hermitian` is set the matrix is symmetrized.
    pub fn new(grid: GridSpec<T>, mut entries: CMatrix<T>, hermitian: bool) -> Result<Self> {
        let size = grid.size();
        if entries.nrows() != size || entries.ncols() != size {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix on a grid of size {size}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if hermitian {
            linalg::symmetrize(&mut entries);
        }
        Ok(Self { grid, entries, hermitian })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix<T> {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn relative_asymmetry(&self) -> T {
        linalg::relative_asymmetry(&self.entries)
    }

    pub fn spectral_norm(&self) -> Result<T> {
        if self.hermitian {
            linalg::hermitian_norm(&self.entries)
        } else {
            linalg::spectral_norm(&self.entries)
        }
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> Result<T> {
        let (vals, _) = T::hermitian_eigen(&self.entries)?;
        Ok(vals[0])
    }

    /// Writes the flat binary layout: `d`, `n` (u64 LE), `L` (f64 LE), then
    /// row-major `(re, im)` pairs of f64.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
        put(&(self.grid.d as u64).to_le_bytes())?;
        put(&(self.grid.n as u64).to_le_bytes())?;
        put(&to_f64(self.grid.l).to_le_bytes())?;
        let size = self.grid.size();
        for j in 0..size {
            for k in 0..size {
                let z = self.entries[(j, k)];
                put(&to_f64(z.re).to_le_bytes())?;
                put(&to_f64(z.im).to_le_bytes())?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads the layout written by [`Self::write_binary`]. The Hermitian
    /// flag is restored when the stored matrix is Hermitian to 1e-12.
    pub fn read_binary(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut buf = [0u8; 8];
        let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8]> {
            r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
            Ok(buf)
        };
        let d = u64::from_le_bytes(next(&mut r)?) as usize;
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let l = f64::from_le_bytes(next(&mut r)?);
        let grid = GridSpec::new(d, n, lit::<T>(l))?;
        let size = grid.size();
        let mut entries = CMatrix::<T>::zeros(size, size);
        for j in 0..size {
            for k in 0..size {
                let re = f64::from_le_bytes(next(&mut r)?);
                let im = f64::from_le_bytes(next(&mut r)?);
                entries[(j, k)] = Complex::new(lit(re), lit(im));
            }
        }
        let mut probe = [0u8; 1];
        if r.read(&mut probe).map_err(|e| Error::io(path, e))? != 0 {
            return Err(Error::ShapeMismatch(format!("trailing bytes in {}", path.display())));
        }
        let hermitian = linalg::relative_asymmetry(&entries) <= lit(1e-12);
        Ok(Self { grid, entries, hermitian })
    }
}

/// In-place inverse DFT (unnormalized, `e^{+2πi}` kernel) over every axis of
/// an `n^d` block.
struct InverseDft<T: Real> {
    fft: Arc<dyn Fft<T>>,
    d: usize,
    n: usize,
}

impl<T: Real> InverseDft<T> {
    fn new(grid: &GridSpec<T>) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(grid.n);
        Self { fft, d: grid.d, n: grid.n }
    }

    fn apply(&self, data: &mut [Complex<T>]) {
        let n = self.n;
        // Contiguous last axis.
        self.fft.process(data);
        if self.d == 2 {
            let mut column = vec![Complex::new(T::zero(), T::zero()); n];
            for c in 0..n {
                for r in 0..n {
                    column[r] = data[r * n + c];
                }
                self.fft.process(&mut column);
                for r in 0..n {
                    data[r * n + c] = column[r];
                }
            }
        }
    }
}

/// Anti-diagonal pairs `(j, k, δ mod n, (−1)^δ)` with `j + k = s` on one axis.
fn axis_pairs(n: usize, s: usize) -> Vec<(usize, usize, usize, bool)> {
    let lo = s.saturating_sub(n - 1);
    let hi = s.min(n - 1);
    (lo..=hi)
        .map(|j| {
            let k = s - j;
            let delta = j as isize - k as isize;
            let wrapped = delta.rem_euclid(n as isize) as usize;
            (j, k, wrapped, delta.rem_euclid(2) == 1)
        })
        .collect()
}

/// Assembles `A_jk` from a per-midpoint momentum sampler without
/// symmetrization. `fill(s, out)` writes the `n^d` values `a(mid_s, ξ_m)`.
fn assemble<T: Real, F>(grid: &GridSpec<T>, fill: F) -> CMatrix<T>
where
    F: Fn(usize, &mut [Complex<T>]) + Sync,
{
    let size = grid.size();
    let n = grid.n;
    let mlen = 2 * n - 1;
    let dft = InverseDft::new(grid);
    let norm = T::one() / from_usize(size);
    let mut out = CMatrix::<T>::zeros(size, size);
    let chunk = (4 * rayon::current_num_threads()).max(32);
    let mids: Vec<usize> = (0..grid.midpoint_count()).collect();
    for block in mids.chunks(chunk) {
        let transformed: Vec<Vec<Complex<T>>> = block
            .par_iter()
            .map(|&s| {
                let mut buf = vec![Complex::new(T::zero(), T::zero()); size];
                fill(s, &mut buf);
                dft.apply(&mut buf);
                buf
            })
            .collect();
        for (&s, vals) in block.iter().zip(&transformed) {
            if grid.d == 1 {
                for (j, k, w, odd) in axis_pairs(n, s) {
                    let v = vals[w].scale(norm);
                    out[(j, k)] = if odd { -v } else { v };
                }
            } else {
                let (s0, s1) = (s / mlen, s % mlen);
                let p1 = axis_pairs(n, s1);
                for (j0, k0, w0, odd0) in axis_pairs(n, s0) {
                    for &(j1, k1, w1, odd1) in &p1 {
                        let v = vals[w0 * n + w1].scale(norm);
                        out[(j0 * n + j1, k0 * n + k1)] = if odd0 ^ odd1 { -v } else { v };
                    }
                }
            }
        }
    }
    out
}

/// Discrete Weyl quantization without the final symmetrization.
pub fn quantize_unsymmetrized<T: Real>(sym: &SymbolGrid<T>) -> CMatrix<T> {
    let size = sym.grid.size();
    assemble(&sym.grid, |s, out| {
        for (m, o) in out.iter_mut().enumerate() {
            *o = sym.at(s, m);
        }
        debug_assert_eq!(out.len(), size);
    })
}

/// Discrete Weyl quantization; real symbols yield Hermitian matrices.
pub fn quantize_symbol<T: Real>(sym: &SymbolGrid<T>) -> Result<OperatorMatrix<T>> {
    OperatorMatrix::new(sym.grid, quantize_unsymmetrized(sym), sym.is_real())
}

/// Quantizes a real symbol given as a function, without storing the
/// midpoint × momentum table.
pub fn quantize_fn<T: Real, F>(grid: &GridSpec<T>, f: F) -> Result<OperatorMatrix<T>>
where
    F: Fn(&[T], &[T]) -> T + Sync,
{
    let mids = grid.midpoint_axis();
    let moms = grid.momentum_axis();
    let entries = assemble(grid, |s, out| {
        let x: Vec<T> = grid.unflatten(s, 2 * grid.n - 1).into_iter().map(|i| mids[i]).collect();
        for (m, o) in out.iter_mut().enumerate() {
            let xi: Vec<T> = grid.unflatten(m, grid.n).into_iter().map(|i| moms[i]).collect();
            *o = Complex::new(f(&x, &xi), T::zero());
        }
    });
    OperatorMatrix::new(*grid, entries, true)
}

/// Eigenvalue threshold of `Op(½(|x|²/L² + |ξ|²/Ξ²))` selecting the
/// half-scale phase-space ellipse.
const RESOLVED_ELLIPSE: f64 = 0.125;

/// Orthonormal basis (columns) of states concentrated in the half-scale
/// phase-space box `|x| ≲ L/2`, `|ξ| ≲ Ξ/2`.
pub fn resolved_basis<T: Real>(grid: &GridSpec<T>) -> Result<CMatrix<T>> {
    let (l2, k2) = (grid.l * grid.l, grid.nyquist() * grid.nyquist());
    let half = lit::<T>(0.5);
    let op = quantize_fn(grid, |x, xi| {
        let x2: T = x.iter().map(|&v| v * v).sum();
        let p2: T = xi.iter().map(|&v| v * v).sum();
        half * (x2 / l2 + p2 / k2)
    })?;
    let (vals, vecs) = T::hermitian_eigen(op.entries())?;
    let keep = vals.iter().take_while(|&&v| v <= lit(RESOLVED_ELLIPSE)).count();
    if keep == 0 {
        return Err(Error::Rejected("grid too coarse to resolve any state".into()));
    }
    Ok(vecs.columns(0, keep).into_owned())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComposeResidual<T> {
    /// `‖Op(a₁)Op(a₂) − Op(a₁a₂)‖` on the full grid space.
    pub full_norm: T,
    /// Same norm compressed to [`resolved_basis`].
    pub resolved_norm: T,
    /// `max|∇a₁| · max|∇a₂|` over the grid.
    pub gradient_product: T,
    /// `resolved_norm / gradient_product` (zero when the product vanishes).
    pub factor: T,
}

/// Residual of the composition rule `Op(a₁)Op(a₂) ≈ Op(a₁a₂)`.
///
/// The full-space norm includes the periodic wrap-around of unbounded
/// symbols; the resolved norm restricts to states well inside the box.
pub fn compose_residual<T: Real>(a1: &SymbolGrid<T>, a2: &SymbolGrid<T>) -> Result<ComposeResidual<T>> {
    a1.check_same_grid(a2)?;
    let o1 = quantize_symbol(a1)?;
    let o2 = quantize_symbol(a2)?;
    let o12 = quantize_symbol(&SymbolGrid::product(a1, a2)?)?;
    let diff = o1.entries() * o2.entries() - o12.entries();
    let full_norm = linalg::spectral_norm(&diff)?;
    let basis = resolved_basis(&a1.grid)?;
    let compressed = linalg::adjoint(&basis) * &diff * &basis;
    let resolved_norm = linalg::spectral_norm(&compressed)?;
    let gradient_product = a1.derivative_sup(1) * a2.derivative_sup(1);
    let factor = if gradient_product > T::zero() { resolved_norm / gradient_product } else { T::zero() };
    Ok(ComposeResidual { full_norm, resolved_norm, gradient_product, factor })
}

/// Constant `c` in the certificate `Op(a) ≥ −c·max|Hess a|`.
pub const GAARDING_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GaardingReport<T> {
    pub min_eigenvalue: T,
    pub hessian_sup: T,
    pub constant: T,
    pub pass: bool,
}

/// Smallest eigenvalue of `Op(a)` for a real symbol, with the Hessian
/// certificate.
pub fn gaarding_floor<T: Real>(a: &SymbolGrid<T>) -> Result<GaardingReport<T>> {
    if !a.is_real() {
        return Err(Error::Config("Gårding floor needs a real symbol".into()));
    }
    let op = quantize_symbol(a)?;
    let min_eigenvalue = op.min_eigenvalue()?;
    let hessian_sup = a.derivative_sup(2);
    let constant = lit::<T>(GAARDING_CONSTANT);
    let slack = lit::<T>(1e-10) * (T::one() + a.sup());
    Ok(GaardingReport {
        min_eigenvalue,
        hessian_sup,
        constant,
        pass: min_eigenvalue >= -constant * hessian_sup - slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport<T> {
    pub operator_norm: T,
    /// Grid seminorm surrogate up to order 4.
    pub seminorm: T,
    pub ratio: T,
}

/// `‖Op(a)‖` against the order-4 finite-difference seminorm of `a`.
pub fn boundedness_surrogate<T: Real>(a: &SymbolGrid<T>) -> Result<BoundednessReport<T>> {
    let op = quantize_symbol(a)?;
    let operator_norm = op.spectral_norm()?;
    let seminorm = a.seminorm(4);
    let ratio = if seminorm > T::zero() { operator_norm / seminorm } else { T::zero() };
    Ok(BoundednessReport { operator_norm, seminorm, ratio })
}

/// Dense real matrix view of a complex matrix with zero imaginary part.
pub fn real_part<T: Real>(a: &CMatrix<T>) -> DMatrix<T> {
    a.map(|z| z.re)
}
