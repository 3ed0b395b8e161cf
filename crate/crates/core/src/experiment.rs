//! End-to-end runs: the R-sweep comparing the classical and quantum
//! constants, the occupation-time scaling study, wave-packet probes and the
//! potential audit. Everything here works in `f64`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{self, classical_constants, occupation_time_from, FlowConfig, SearchConfig};
use crate::error::{Error, Result};
use crate::potential::{check_assumption, AssumptionReport, PhasePoint, PotentialKind, PotentialModel, SampleBox};
use crate::quantum::{
    band_mass, build_hamiltonian, eigendecompose, gram_constant, ConstantMethod, SmoothingParams, SmoothingProblem,
    SpectralData, BAND_TOLERANCE,
};
use crate::wavepacket::probe_lower_bound;
use crate::weyl::{build_grid, GridSpec};

/// Constants below `FLOOR · R` make the ratio meaningless.
const ILL_CONDITIONED_FLOOR: f64 = 1e-4;
/// Slack allowed when certifying `S ≤ 𝕮₀(R)`.
pub const PROBE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Growth exponent; harmonic always uses 1.
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub coefficients: Vec<f64>,
    #[serde(default = "one")]
    pub dimension: usize,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { kind: PotentialKind::Harmonic, m: None, coefficients: Vec::new(), dimension: 1 }
    }
}

impl PotentialSpec {
    pub fn build(&self) -> Result<PotentialModel<f64>> {
        let m = match (self.kind, self.m) {
            (PotentialKind::Harmonic, None) => 1.0,
            (_, Some(m)) => m,
            (kind, None) => {
                return Err(Error::Config(format!("potential kind {kind:?} needs an explicit exponent m")));
            }
        };
        PotentialModel::new(self.kind, m, self.coefficients.clone(), self.dimension)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 512, half_width: 24.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub e_max: f64,
    pub shells: usize,
    pub samples_per_shell: usize,
    pub top_k: usize,
    pub refine_iterations: usize,
    pub h: f64,
    pub drift_tolerance: f64,
    /// Write every classical sample to `samples_R<R>.csv`.
    pub record_samples: bool,
    pub halving_check: bool,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            e_max: 200.0,
            shells: 64,
            samples_per_shell: 64,
            top_k: 8,
            refine_iterations: 400,
            h: 1e-3,
            drift_tolerance: 1e-6,
            record_samples: false,
            halving_check: false,
        }
    }
}

impl SearchSettings {
    pub fn flow(&self) -> FlowConfig<f64> {
        FlowConfig { h: self.h, drift_tolerance: self.drift_tolerance }
    }

    pub fn to_search(&self, seed: u64) -> SearchConfig<f64> {
        SearchConfig {
            e_max: self.e_max,
            shells: self.shells,
            samples_per_shell: self.samples_per_shell,
            top_k: self.top_k,
            refine_iterations: self.refine_iterations,
            flow: self.flow(),
            seed,
            record_samples: self.record_samples,
            halving_check: self.halving_check,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumSettings {
    pub method: ConstantMethod,
    /// Compress the Gram operator to the resolved eigenvectors of `P`.
    pub restrict_to_band: bool,
    /// Dump each Gram operator as `gram_R<R>.bin`.
    pub write_matrices: bool,
}

impl Default for QuantumSettings {
    fn default() -> Self {
        Self { method: ConstantMethod::PowerIteration, restrict_to_band: true, write_matrices: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscapeSettings {
    pub energies: Vec<f64>,
    pub r: f64,
    pub samples: usize,
}

impl Default for EscapeSettings {
    fn default() -> Self {
        Self { energies: vec![1e1, 1e2, 1e3, 1e4], r: 1.0, samples: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCenter {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

/// Probe centers drawn uniformly on an energy shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeShell {
    pub energy: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionSettings {
    pub half_width: f64,
    pub points_per_axis: usize,
    pub max_order: usize,
}

impl Default for AssumptionSettings {
    fn default() -> Self {
        Self { half_width: 50.0, points_per_axis: 201, max_order: 4 }
    }
}

/// Run configuration, read from JSON. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub grid: GridConfig,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub nu: f64,
    #[serde(rename = "R_list")]
    pub r_list: Vec<f64>,
    pub nq: usize,
    pub search: SearchSettings,
    pub quantum: QuantumSettings,
    pub escape: EscapeSettings,
    pub probes: Vec<ProbeCenter>,
    pub probe_shell: Option<ProbeShell>,
    pub assumption: AssumptionSettings,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::default(),
            grid: GridConfig::default(),
            horizon: 2.0 * PI,
            nu: 1.0,
            r_list: vec![1.0, 2.0, 4.0, 8.0],
            nq: 64,
            search: SearchSettings::default(),
            quantum: QuantumSettings::default(),
            escape: EscapeSettings::default(),
            probes: Vec::new(),
            probe_shell: None,
            assumption: AssumptionSettings::default(),
            seed: 0,
        }
    }
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.build()?;
        if !(self.nu > 0.5) {
            return Err(Error::Config(format!("nu = {} must exceed 1/2", self.nu)));
        }
        if let Some(r) = self.r_list.iter().find(|&&r| !(r >= 1.0 && r.is_finite())) {
            return Err(Error::Config(format!("R = {r} must be at least 1")));
        }
        if self.r_list.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(format!("R_list {:?} must be strictly ascending", self.r_list)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon T = {} must be finite and non-negative", self.horizon)));
        }
        if self.nq < 16 {
            return Err(Error::Config(format!("nq = {} must be at least 16", self.nq)));
        }
        self.search.to_search(self.seed).validate()?;
        self.grid_spec()?;
        for p in &self.probes {
            if p.x.len() != self.potential.dimension || p.xi.len() != self.potential.dimension {
                return Err(Error::Config(format!(
                    "probe center {p:?} does not match dimension {}",
                    self.potential.dimension
                )));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec<f64>> {
        build_grid(self.potential.dimension, self.grid.n, self.grid.half_width)
    }
}

/// Builds the potential, grid and spectral data shared by the quantum stages.
pub struct Workspace {
    pub model: PotentialModel<f64>,
    pub grid: GridSpec<f64>,
    pub spec: SpectralData<f64>,
}

impl Workspace {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let model = cfg.potential.build()?;
        let grid = cfg.grid_spec()?;
        let spec = eigendecompose(&build_hamiltonian(&model, &grid)?)?;
        log::info!(
            "grid d={} n={} L={}: {} of {} eigenvectors resolved",
            grid.d(),
            grid.n(),
            grid.half_width(),
            spec.resolved_indices().len(),
            grid.size()
        );
        Ok(Self { model, grid, spec })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "Q0")]
    pub q0: f64,
    pub ratio: f64,
    pub band_ok: bool,
}

/// Diagnostics kept in the JSON report next to each row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDiagnostics {
    #[serde(rename = "R")]
    pub r: f64,
    pub classical_argmax: Vec<f64>,
    pub classical_argmax_energy: f64,
    pub classical_samples: usize,
    pub refinement_converged: bool,
    pub cutoff_saturated: bool,
    pub halving_change: Option<f64>,
    pub quantum_method: ConstantMethod,
    pub power_iterations: usize,
    pub fell_back: bool,
    pub band_mass: f64,
    pub q_min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub rows: Vec<ConstantsRow>,
    pub diagnostics: Vec<RowDiagnostics>,
    /// Smallest `c ≥ 0` with `C0/(1+c/R) ≤ Q0 ≤ C0(1+c/R)` on included rows.
    pub fitted_c: Option<f64>,
    pub inequalities_pass: bool,
    pub ill_conditioned: bool,
    pub excluded: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ConstantsReport {
    pub fn empty() -> Self {
        Self {
            rows: Vec::new(),
            diagnostics: Vec::new(),
            fitted_c: None,
            inequalities_pass: true,
            ill_conditioned: false,
            excluded: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.inequalities_pass && !self.ill_conditioned && self.excluded.is_empty()
    }
}

/// `c = max_rows R·max(C0/Q0 − 1, Q0/C0 − 1)`, clipped at zero.
pub fn fit_c(rows: &[&ConstantsRow]) -> Option<f64> {
    if rows.is_empty() {
        return None;
    }
    let c = rows.iter().map(|row| row.r * (row.c0 / row.q0 - 1.0).max(row.q0 / row.c0 - 1.0)).fold(0.0f64, f64::max);
    c.is_finite().then_some(c)
}

/// Two-sided bound with one `c`, to relative rounding slack.
pub fn inequalities_hold(rows: &[&ConstantsRow], c: f64) -> bool {
    let slack = 1e-12;
    rows.iter().all(|row| {
        let k = 1.0 + c / row.r;
        row.c0 / k <= row.q0 * (1.0 + slack) && row.q0 <= row.c0 * k * (1.0 + slack)
    })
}

/// Quantum constants, band masses and the Gram operators behind them.
struct QuantumRow {
    value: f64,
    method: ConstantMethod,
    iterations: usize,
    fell_back: bool,
    band_mass: f64,
    q_min: f64,
}

fn quantum_rows(
    cfg: &RunConfig,
    ws: &Workspace,
    method: ConstantMethod,
    out: Option<&std::path::Path>,
) -> Result<Vec<QuantumRow>> {
    let resolved = ws.spec.resolved_indices();
    cfg.r_list
        .iter()
        .map(|&r| {
            let params = SmoothingParams { horizon: cfg.horizon, nu: cfg.nu, r, nq: cfg.nq };
            let problem = SmoothingProblem::new(&ws.model, &ws.spec, params)?;
            let gram = if cfg.quantum.restrict_to_band { problem.resolved_gram()? } else { problem.gram() };
            let est = gram_constant(&gram, &ws.spec, method, cfg.seed)?;
            if let (true, Some(dir)) = (cfg.quantum.write_matrices, out) {
                gram.to_operator(&ws.spec)?.write_binary(&dir.join(format!("gram_R{r}.bin")))?;
            }
            let mass = band_mass(&ws.spec, &resolved, &est.maximizer);
            log::info!("R = {r}: Q0 = {:.9} (band mass {mass:.2e})", est.value);
            Ok(QuantumRow {
                value: est.value,
                method: est.method,
                iterations: est.iterations,
                fell_back: est.fell_back,
                band_mass: mass,
                q_min: problem.q_min_eigenvalue()?,
            })
        })
        .collect()
}

/// Sweeps `R_list`, computing both constants with identical `(T, ν)` and
/// fitting the correction constant on band-checked rows.
///
/// `out`, when given, receives the optional sample CSVs and matrix dumps.
pub fn run_correspondence(cfg: &RunConfig, out: Option<&std::path::Path>) -> Result<ConstantsReport> {
    cfg.validate()?;
    if cfg.r_list.is_empty() {
        return Ok(ConstantsReport::empty());
    }
    let r_max = cfg.r_list[cfg.r_list.len() - 1];
    if 2.0 * r_max > cfg.grid.half_width {
        return Err(Error::Config(format!(
            "grid half-width L = {} cannot hold R = {r_max}; need L ≥ 2R",
            cfg.grid.half_width
        )));
    }
    let mut warnings = Vec::new();
    let ws = Workspace::new(cfg)?;
    if cfg.search.e_max > ws.grid.band_energy() {
        let w = format!(
            "classical cutoff E_max = {} exceeds the resolved band energy {:.3}",
            cfg.search.e_max,
            ws.grid.band_energy()
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    let model = &ws.model;

    let classical = if cfg.horizon > 0.0 {
        classical_constants(model, cfg.horizon, cfg.nu, &cfg.r_list, &cfg.search.to_search(cfg.seed))?
    } else {
        Vec::new()
    };
    if let Some(dir) = out.filter(|_| cfg.search.record_samples) {
        for est in &classical {
            classical::write_samples_csv(
                &dir.join(format!("samples_R{}.csv", est.r)),
                &est.samples,
                model.dimension(),
            )?;
        }
    }
    let quantum = quantum_rows(cfg, &ws, cfg.quantum.method, out)?;

    let mut rows = Vec::with_capacity(cfg.r_list.len());
    let mut diagnostics = Vec::with_capacity(cfg.r_list.len());
    let mut ill_conditioned = false;
    for (i, &r) in cfg.r_list.iter().enumerate() {
        let q = &quantum[i];
        let (c0, diag_point, energy, samples, converged, saturated, halving) = match classical.get(i) {
            Some(est) => (
                est.value,
                est.argmax.coords(),
                est.argmax_energy,
                est.samples_used,
                est.refinement_converged,
                est.cutoff_saturated,
                est.halving_change,
            ),
            None => (0.0, PhasePoint::<f64>::origin(model.dimension()).coords(), 0.0, 0, true, false, None),
        };
        if saturated {
            let w = format!("R = {r}: classical argmax lies in the top energy shell; raise E_max");
            log::warn!("{w}");
            warnings.push(w);
        }
        let band_ok = q.band_mass <= BAND_TOLERANCE;
        if !band_ok {
            let w =
                format!("R = {r}: maximizer band mass {:.3e} exceeds {BAND_TOLERANCE:e}; row excluded", q.band_mass);
            log::warn!("{w}");
            warnings.push(w);
        }
        let floor = ILL_CONDITIONED_FLOOR * r;
        if c0 < floor || q.value < floor {
            ill_conditioned = true;
            let w =
                format!("R = {r}: constants C0 = {c0:.3e}, Q0 = {:.3e} are too small for a meaningful ratio", q.value);
            log::warn!("{w}");
            warnings.push(w);
        }
        rows.push(ConstantsRow { r, c0, q0: q.value, ratio: q.value / c0, band_ok });
        diagnostics.push(RowDiagnostics {
            r,
            classical_argmax: diag_point,
            classical_argmax_energy: energy,
            classical_samples: samples,
            refinement_converged: converged,
            cutoff_saturated: saturated,
            halving_change: halving,
            quantum_method: q.method,
            power_iterations: q.iterations,
            fell_back: q.fell_back,
            band_mass: q.band_mass,
            q_min_eigenvalue: q.q_min,
        });
    }

    let included: Vec<&ConstantsRow> = rows.iter().filter(|row| row.band_ok).collect();
    let excluded: Vec<f64> = rows.iter().filter(|row| !row.band_ok).map(|row| row.r).collect();
    let fitted_c = if ill_conditioned { None } else { fit_c(&included) };
    let inequalities_pass = match fitted_c {
        Some(c) => inequalities_hold(&included, c),
        None => false,
    };
    Ok(ConstantsReport { rows, diagnostics, fitted_c, inequalities_pass, ill_conditioned, excluded, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeRow {
    #[serde(rename = "E")]
    pub energy: f64,
    pub time: f64,
    /// `time · √E / r`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub r: f64,
    pub horizon: f64,
    pub rows: Vec<EscapeRow>,
    /// Least-squares slope of `log time` against `log E`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// `max_rows time·√E/r`.
    pub c_prime: Option<f64>,
    /// `max/min` of `time·√E/r` across rows.
    pub spread: Option<f64>,
    pub notice: Option<String>,
}

/// Least-squares line through `(x, y)`; `None` for fewer than two distinct `x`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Longest time spent in `B_r` over shell samples at each energy, and the
/// power-law fit of that time against the energy.
pub fn run_escape_scaling(cfg: &RunConfig) -> Result<EscapeReport> {
    cfg.validate()?;
    let esc = &cfg.escape;
    let model = cfg.potential.build()?;
    if esc.energies.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Config(format!("escape energies {:?} must be positive", esc.energies)));
    }
    let (lo, hi) = esc.energies.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    if esc.energies.len() < 2 || hi / lo < 100.0 {
        return Err(Error::Config(format!("escape energies {:?} must span at least two decades", esc.energies)));
    }
    if !(esc.r >= 0.0) || esc.samples == 0 {
        return Err(Error::Config("escape needs r ≥ 0 and at least one sample".into()));
    }
    if !(cfg.horizon > 0.0) {
        return Err(Error::Config("escape scaling needs a positive horizon".into()));
    }
    let flow = FlowConfig { h: cfg.search.h.min(cfg.horizon), drift_tolerance: cfg.search.drift_tolerance };
    let mut rows = Vec::with_capacity(esc.energies.len());
    for (k, &energy) in esc.energies.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
        let points = classical::sample_shell(&model, energy, esc.samples, &mut rng);
        let times: Vec<f64> = points
            .par_iter()
            .map(|p| occupation_time_from(&model, p, cfg.horizon, esc.r, flow))
            .collect::<Result<_>>()?;
        let time = times.into_iter().fold(0.0f64, f64::max);
        let scaled = if esc.r > 0.0 { time * energy.sqrt() / esc.r } else { 0.0 };
        log::info!("E = {energy}: occupation time {time:.6}");
        rows.push(EscapeRow { energy, time, scaled });
    }
    if rows.iter().any(|row| row.time <= 0.0) {
        let notice = if esc.r == 0.0 {
            "r = 0: all occupation times vanish; fit skipped".to_string()
        } else {
            "some occupation times vanish; fit skipped".to_string()
        };
        log::warn!("{notice}");
        return Ok(EscapeReport {
            r: esc.r,
            horizon: cfg.horizon,
            rows,
            slope: None,
            intercept: None,
            c_prime: None,
            spread: None,
            notice: Some(notice),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|row| (row.energy.ln(), row.time.ln())).collect();
    let (slope, intercept) = fit_line(&pts).unzip();
    let c_prime = rows.iter().map(|row| row.scaled).fold(0.0f64, f64::max);
    let c_min = rows.iter().map(|row| row.scaled).fold(f64::INFINITY, f64::min);
    Ok(EscapeReport {
        r: esc.r,
        horizon: cfg.horizon,
        rows,
        slope,
        intercept,
        c_prime: Some(c_prime),
        spread: Some(c_prime / c_min),
        notice: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub a_bar: f64,
    pub s_over_a: f64,
    pub abar_over_a: f64,
    #[serde(rename = "Q0")]
    pub q0: f64,
    /// `S ≤ Q0 + 1e-9`.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedProbe {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    pub rejected: Vec<RejectedProbe>,
    /// Quantum constant per `R`, in `R_list` order.
    pub quantum_constants: Vec<f64>,
}

impl ProbeTable {
    pub fn passed(&self) -> bool {
        self.rejected.is_empty() && self.rows.iter().all(|row| row.certified)
    }
}

/// Explicit probe centers followed by the energy-shell draws.
pub fn probe_centers(cfg: &RunConfig) -> Result<Vec<PhasePoint<f64>>> {
    let mut centers: Vec<PhasePoint<f64>> =
        cfg.probes.iter().map(|p| PhasePoint::new(p.x.clone(), p.xi.clone())).collect::<Result<_>>()?;
    if let Some(shell) = cfg.probe_shell {
        let model = cfg.potential.build()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        centers.extend(classical::sample_shell(&model, shell.energy, shell.count, &mut rng));
    }
    Ok(centers)
}

/// Probes every configured center at every `R` and certifies each smoothing
/// functional against the quantum constant.
pub fn run_probes(cfg: &RunConfig) -> Result<ProbeTable> {
    cfg.validate()?;
    let centers = probe_centers(cfg)?;
    if centers.is_empty() || cfg.r_list.is_empty() {
        return Ok(ProbeTable { rows: Vec::new(), rejected: Vec::new(), quantum_constants: Vec::new() });
    }
    let ws = Workspace::new(cfg)?;
    run_probes_with(cfg, &ws, &centers)
}

/// [`run_probes`] on an existing workspace and explicit centers.
///
/// Certification uses the dense eigensolver whatever the configured method:
/// the power-iteration Rayleigh quotient sits below the top eigenvalue by
/// more than the certification slack when a probe is itself near-maximizing.
pub fn run_probes_with(cfg: &RunConfig, ws: &Workspace, centers: &[PhasePoint<f64>]) -> Result<ProbeTable> {
    let q0: Vec<f64> = quantum_rows(cfg, ws, ConstantMethod::DenseEig, None)?.into_iter().map(|q| q.value).collect();
    let flow = cfg.search.flow();
    let results: Vec<std::result::Result<Vec<ProbeRow>, RejectedProbe>> = centers
        .par_iter()
        .map(|c| match probe_lower_bound(&ws.model, &ws.spec, c, cfg.horizon, cfg.nu, &cfg.r_list, cfg.nq, flow) {
            Ok(reports) => Ok(reports
                .into_iter()
                .zip(&q0)
                .map(|(p, &q)| ProbeRow {
                    x: c.x.clone(),
                    xi: c.xi.clone(),
                    r: p.r,
                    s: p.s,
                    a: p.a,
                    a_bar: p.a_bar,
                    s_over_a: p.s_over_a,
                    abar_over_a: p.abar_over_a,
                    q0: q,
                    certified: p.s <= q + PROBE_SLACK,
                })
                .collect()),
            Err(e) => Err(RejectedProbe { x: c.x.clone(), xi: c.xi.clone(), reason: e.to_string() }),
        })
        .collect();
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for r in results {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(rej) => {
                log::warn!("probe at x = {:?}, xi = {:?}: {}", rej.x, rej.xi, rej.reason);
                rejected.push(rej);
            }
        }
    }
    Ok(ProbeTable { rows, rejected, quantum_constants: q0 })
}

/// Audits the configured potential on its sample box.
pub fn run_check_assumption(cfg: &RunConfig) -> Result<AssumptionReport<f64>> {
    let model = cfg.potential.build()?;
    let a = &cfg.assumption;
    check_assumption(&model, SampleBox { half_width: a.half_width, points_per_axis: a.points_per_axis }, a.max_order)
}
