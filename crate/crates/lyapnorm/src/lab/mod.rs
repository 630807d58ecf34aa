//! Configuration-driven experiment lab.
//!
//! A TOML config file describes one experiment — which cocycle family to
//! drive, on which grid, over which Sobolev orders, with which seeds — and
//! [`run`] executes it deterministically: every seed gets its own named
//! random streams, workers share nothing, and the aggregated artifacts
//! (`manifest.json`, `results.csv`, `long.csv`, per-seed JSON records,
//! LYNF field checkpoints) are byte-identical for any worker count.
//! [`report`] re-reads a finished run directory, aggregates across seeds,
//! evaluates the experiment's built-in assertions, and writes `report.json`.
//!
//! Experiment kinds:
//!
//! * `psa-norm-sweep` — top exponent of scalar advection–diffusion across a
//!   list of `H^s` norms, sharing one trajectory per seed so the per-norm
//!   estimates differ only by the norm, never by the sample path.
//! * `lns-norm-sweep` — the same sweep for the linearized vorticity
//!   equation along a stochastically forced base flow.
//! * `kappa-scaling` — smoothing norms `‖S¹‖_{L²→H^s}` and
//!   `‖S¹‖_{H^{−s}→L²}` of the one-unit solution map on a frozen velocity
//!   path, swept over a κ list, to fit the κ^{−s/2} regularization law.
//! * `estimates-verify` — grid-refinement stability of the commutator and
//!   lower-order advection bounds: the normalized ratios are evaluated on
//!   the same random fields resolved at N/4, N/2, N and their ensemble max
//!   must stay stable under refinement.
//! * `matrix-oracle` — finite matrix models with exactly computable
//!   spectra: QR estimates against diagonal Birkhoff averages, quotient
//!   volume growth against block rate sums, angle-degeneracy slopes, and
//!   norm invariance of the spectrum.
//! * `regularity-compare` — transient-envelope (regularity-function)
//!   comparison across two norms with the measured cross-norm constant
//!   K_δ, plus its log⁺-moments.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cocycles::{operator_norm, record_unit_path, AdCocycle, TransportFamily};
use crate::error::{Error, Result};
use crate::flows::{
    advance_flow, FlowModel, GalerkinStochasticNse, NoiseSpec, ShearAxis, ShearRenewalFlow,
    SteadyFlow, TimePeriodicFlow,
};
use crate::geometry::FiniteNorm;
use crate::lyapunov::{
    frame_dim, frame_to_field, k_delta_estimate, leading_spectrum, quotient_volume_growth,
    sobolev_frame_weights, top_exponent_weighted_tracked, Exponent, MatrixCocycle, PdeCocycle,
    SpectrumOptions,
};
use crate::matrices::{diagonal_birkhoff, BlockTriangularModel, TriangularModel};
use crate::rng::SeedStream;
use crate::spectral::{
    checkpoint, NormSpec, PreparedVelocity, ProductBand, SpectralField, SpectralGrid,
};

/// Frozen `results.csv` header. New metrics append columns; existing
/// columns never move (see `docs/formats.md`).
pub const RESULTS_HEADER: &str =
    "experiment,seed,s,kappa,n,lambda_hat,stderr,sigma,d_bar,d_under,k_delta,n_delta,note";

/// Frozen `long.csv` header (plot-ready long format).
pub const LONG_HEADER: &str = "experiment,seed,metric,key,value";

/// Velocity regularity margin γ′ used for the admissible Sobolev range
/// when the config does not override it.
pub const DEFAULT_GAMMA_PRIME: f64 = 2.0;

/// Diffusivities below this put the dissipative cutoff beyond any grid the
/// lab drives; configs must stay at or above it.
pub const MIN_DIFFUSIVITY: f64 = 1e-4;

/// Triangular model dimension used by the matrix-oracle suite.
pub const ORACLE_DIM: usize = 6;

/// Fast/slow block dimensions of the oracle's block-triangular model.
pub const ORACLE_BLOCK: (usize, usize) = (2, 2);

const SMOOTHING_NORM_ITERS: usize = 30;
const COMMUTATOR_GAMMA: f64 = 2.5;
const VELOCITY_DECAY: f64 = 6.0;
const SCALAR_DECAY: f64 = 3.5;

/// Which experiment a config drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PsaNormSweep,
    LnsNormSweep,
    KappaScaling,
    EstimatesVerify,
    MatrixOracle,
    RegularityCompare,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::PsaNormSweep => "psa-norm-sweep",
            ExperimentKind::LnsNormSweep => "lns-norm-sweep",
            ExperimentKind::KappaScaling => "kappa-scaling",
            ExperimentKind::EstimatesVerify => "estimates-verify",
            ExperimentKind::MatrixOracle => "matrix-oracle",
            ExperimentKind::RegularityCompare => "regularity-compare",
        }
    }
}

/// Base velocity model an experiment drives the cocycle with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `u ≡ 0`: the bare heat/Stokes semigroup.
    Quiescent,
    /// Frozen single-mode shear `(A sin(y + phase), 0)`.
    SteadyShear {
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Shear alternating between the two axes with the given period.
    TimePeriodicShear { amplitude: f64, period: f64 },
    /// Shear with axis/phase redrawn each unit time (i.i.d. renewal).
    RenewalShear { amplitude: f64 },
    /// Stochastically forced 2d Navier–Stokes vorticity on the grid.
    StochasticNse {
        /// Forcing band: modes with `|k_i| ≤ k_cut` receive noise.
        k_cut: usize,
        /// Spectral decay exponent of the forcing amplitudes.
        decay: f64,
        /// Overall forcing amplitude.
        amplitude: f64,
        /// Units of burn-in before the cocycle run starts.
        #[serde(default)]
        spin_up: usize,
    },
}

/// One experiment: what to run, on which grid, with which seeds.
///
/// Round-trips through TOML exactly: parse → serialize → parse is the
/// identity on every field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label stamped into every output row.
    pub experiment: String,
    pub kind: ExperimentKind,
    /// Fourier truncation; must be a power of two.
    pub grid_n: usize,
    /// Scalar diffusivity (advection–diffusion kinds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Viscosity (linearized Navier–Stokes and its base flow).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Sobolev orders `s` the experiment measures.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub norms: Vec<f64>,
    /// Master seeds; one worker task per entry.
    pub seeds: Vec<u64>,
    /// Number of unit-time cocycle steps per seed.
    pub horizon: usize,
    /// κ values for the kappa-scaling sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa_list: Vec<f64>,
    /// Rate slack ε for regularity-function estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Cross-norm slack δ for the K_δ scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Block size of the transient-envelope probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_dim: Option<usize>,
    /// Overrides the admissible Sobolev range half-width γ′.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<f64>,
    /// Directory all artifacts are written into.
    pub output_dir: PathBuf,
    /// Velocity model (table; keep last in TOML files).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
}

impl ExperimentConfig {
    /// Parses a TOML config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    /// Canonical TOML serialization (field order fixed by the type).
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical serialization, so logically identical
    /// configs hash identically regardless of file formatting.
    pub fn sha256(&self) -> Result<String> {
        let canon = self.to_toml()?;
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        Ok(format!("{:x}", h.finalize()))
    }

    fn gamma_prime(&self) -> f64 {
        self.gamma_prime.unwrap_or(DEFAULT_GAMMA_PRIME)
    }

    /// Admissible range for a Sobolev order under this config's kind.
    fn norm_range(&self) -> (f64, f64) {
        let g = self.gamma_prime();
        match self.kind {
            // The linearized vorticity sweep shifts the admissible window
            // up by one derivative (vorticity versus velocity regularity).
            ExperimentKind::LnsNormSweep => (-g + 1.0, g + 1.0),
            _ => (-g, g),
        }
    }

    fn require_diffusivity(name: &str, value: Option<f64>) -> Result<f64> {
        let v = value.ok_or_else(|| Error::Config(format!("{name} is required for this experiment kind")))?;
        if !(v > 0.0) {
            return Err(Error::Config(format!(
                "{name} must be positive: {name} = 0 removes the diffusive smoothing that \
                 makes the one-step solution maps compact, so there is no discrete spectrum \
                 to measure"
            )));
        }
        if v < MIN_DIFFUSIVITY {
            return Err(Error::Config(format!(
                "{name} = {v} puts the dissipative cutoff scale {name}^(-1/2) ≈ {:.0} far \
                 beyond the resolved wavenumbers; raise {name} to at least {MIN_DIFFUSIVITY} \
                 or use a model with a coarser dissipative scale",
                v.powf(-0.5)
            )));
        }
        Ok(v)
    }

    /// Validates every field against the experiment kind; returns the
    /// first problem found. Runs before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() {
            return Err(Error::Config("experiment label must not be empty".into()));
        }
        if self.experiment.contains(',') || self.experiment.contains('\n') {
            return Err(Error::Config("experiment label must not contain commas or newlines".into()));
        }
        if !self.grid_n.is_power_of_two() || self.grid_n < 8 {
            return Err(Error::Config(format!(
                "grid_n must be a power of two with grid_n ≥ 8, got {}",
                self.grid_n
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        {
            let mut sorted = self.seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != self.seeds.len() {
                return Err(Error::Config("seeds must be distinct".into()));
            }
        }
        let (lo, hi) = self.norm_range();
        let check_norms = |norms: &[f64]| -> Result<()> {
            for &s in norms {
                if !s.is_finite() || s < lo || s > hi {
                    return Err(Error::Config(format!(
                        "Sobolev order s = {s} outside the admissible range [{lo}, {hi}] \
                         for this experiment kind (γ′ = {})",
                        self.gamma_prime()
                    )));
                }
            }
            Ok(())
        };
        match self.kind {
            ExperimentKind::PsaNormSweep => {
                Self::require_diffusivity("kappa", self.kappa)?;
                if self.norms.is_empty() {
                    return Err(Error::Config("norms: at least one Sobolev order is required".into()));
                }
                check_norms(&self.norms)?;
                if self.model.is_none() {
                    return Err(Error::Config("a [model] block is required".into()));
                }
                if self.horizon < 50 {
                    return Err(Error::Config("norm sweeps need horizon ≥ 50".into()));
                }
            }
            ExperimentKind::LnsNormSweep => {
                Self::require_diffusivity("nu", self.nu)?;
                if self.norms.is_empty() {
                    return Err(Error::Config("norms: at least one Sobolev order is required".into()));
                }
                check_norms(&self.norms)?;
                if self.model.is_none() {
                    return Err(Error::Config("a [model] block is required".into()));
                }
                if self.horizon < 50 {
                    return Err(Error::Config("norm sweeps need horizon ≥ 50".into()));
                }
            }
            ExperimentKind::KappaScaling => {
                if self.kappa_list.is_empty() {
                    return Err(Error::Config("kappa_list must not be empty".into()));
                }
                for &k in &self.kappa_list {
                    Self::require_diffusivity("kappa", Some(k))?;
                }
                if self.norms.is_empty() || self.norms.iter().any(|&s| !(s > 0.0)) {
                    return Err(Error::Config(
                        "kappa-scaling needs positive Sobolev orders (smoothing gain)".into(),
                    ));
                }
                check_norms(&self.norms)?;
                if self.model.is_none() {
                    return Err(Error::Config("a [model] block is required".into()));
                }
            }
            ExperimentKind::EstimatesVerify => {
                if self.grid_n % 4 != 0 || self.grid_n < 16 {
                    return Err(Error::Config(
                        "estimates-verify refines grid_n/4 → grid_n/2 → grid_n; grid_n must \
                         be a power of two ≥ 16"
                            .into(),
                    ));
                }
                if self.norms.is_empty() || self.norms.iter().any(|&s| !(s > 0.0)) {
                    return Err(Error::Config(
                        "estimates-verify needs positive Sobolev orders".into(),
                    ));
                }
                check_norms(&self.norms)?;
            }
            ExperimentKind::MatrixOracle => {
                if self.horizon < 10 {
                    return Err(Error::Config("matrix-oracle needs horizon ≥ 10 steps".into()));
                }
            }
            ExperimentKind::RegularityCompare => {
                Self::require_diffusivity("kappa", self.kappa)?;
                if self.norms.len() != 2 || !(self.norms[0] < self.norms[1]) {
                    return Err(Error::Config(
                        "regularity-compare needs norms = [s_base, s_strong] with \
                         s_base < s_strong"
                            .into(),
                    ));
                }
                check_norms(&self.norms)?;
                let eps = self.epsilon.unwrap_or(0.0);
                let del = self.delta.unwrap_or(0.0);
                if !(eps > 0.0) || !(del > 0.0) {
                    return Err(Error::Config(
                        "regularity-compare needs positive epsilon and delta".into(),
                    ));
                }
                if self.model.is_none() {
                    return Err(Error::Config("a [model] block is required".into()));
                }
                if self.horizon < 8 {
                    return Err(Error::Config("regularity-compare needs horizon ≥ 8".into()));
                }
                if let Some(p) = self.probe_dim {
                    if p == 0 {
                        return Err(Error::Config("probe_dim must be ≥ 1".into()));
                    }
                }
            }
        }
        if let Some(ModelConfig::StochasticNse { k_cut, decay, amplitude, .. }) = &self.model {
            Self::require_diffusivity("nu", self.nu)?;
            if *k_cut == 0 {
                return Err(Error::Config("stochastic forcing needs k_cut ≥ 1".into()));
            }
            if !decay.is_finite() || !(*amplitude > 0.0) {
                return Err(Error::Config(
                    "stochastic forcing needs finite decay and positive amplitude".into(),
                ));
            }
        }
        match &self.model {
            Some(ModelConfig::SteadyShear { amplitude, .. })
            | Some(ModelConfig::RenewalShear { amplitude })
            | Some(ModelConfig::TimePeriodicShear { amplitude, .. }) => {
                if !(*amplitude > 0.0) || !amplitude.is_finite() {
                    return Err(Error::Config("shear amplitude must be positive and finite".into()));
                }
            }
            _ => {}
        }
        if let Some(ModelConfig::TimePeriodicShear { period, .. }) = &self.model {
            if !(*period > 0.0) {
                return Err(Error::Config("shear period must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Per-seed substep record for the manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DtChoice {
    pub seed: u64,
    /// Substep used on the final unit interval.
    pub dt: f64,
    /// CFL halvings applied to reach it.
    pub halvings: u32,
}

/// Per-seed artifact index entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputEntry {
    pub seed: u64,
    /// Per-seed JSON record, relative to the run directory.
    pub record: String,
    /// LYNF field checkpoint, when the experiment carries a field.
    pub checkpoint: Option<String>,
}

/// What a run wrote and under which exact inputs. Re-running with an
/// identical manifest (same config hash, seeds, code version) reproduces
/// the numeric artifacts byte for byte; only `wall_time_seconds` varies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub kind: ExperimentKind,
    pub config_sha256: String,
    pub code_version: String,
    /// Worker count used; has no effect on any numeric artifact.
    pub threads: usize,
    pub seeds: Vec<u64>,
    pub grid_n: usize,
    pub expected_result_rows: usize,
    pub expected_long_rows: usize,
    pub dt_choices: Vec<DtChoice>,
    pub wall_time_seconds: f64,
    pub results_csv: String,
    pub long_csv: String,
    pub outputs: Vec<OutputEntry>,
    pub config: ExperimentConfig,
}

/// What [`run`] returns for CLI reporting.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub seeds: usize,
    pub result_rows: usize,
    pub long_rows: usize,
    pub wall_seconds: f64,
}

fn fmt_f64(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_exponent(e: Option<Exponent>) -> String {
    match e {
        None => String::new(),
        Some(Exponent::Finite(v)) => fmt_f64(v),
        Some(Exponent::MinusInfinity) => "-inf".into(),
    }
}

/// One `results.csv` row (all columns after the seed).
#[derive(Clone, Debug, Default)]
struct ResultRow {
    s: Option<f64>,
    kappa: Option<f64>,
    n: usize,
    lambda: Option<Exponent>,
    stderr: Option<f64>,
    sigma: Option<Exponent>,
    d_bar: Option<f64>,
    d_under: Option<f64>,
    k_delta: Option<f64>,
    n_delta: Option<usize>,
    note: String,
}

impl ResultRow {
    fn to_line(&self, experiment: &str, seed: u64) -> String {
        debug_assert!(!self.note.contains(','), "notes must stay comma-free");
        format!(
            "{experiment},{seed},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_opt(self.s),
            fmt_opt(self.kappa),
            self.n,
            fmt_exponent(self.lambda),
            fmt_opt(self.stderr),
            fmt_exponent(self.sigma),
            fmt_opt(self.d_bar),
            fmt_opt(self.d_under),
            fmt_opt(self.k_delta),
            self.n_delta.map(|n| n.to_string()).unwrap_or_default(),
            self.note
        )
    }
}

/// One `long.csv` row.
#[derive(Clone, Debug)]
struct LongRow {
    metric: String,
    key: String,
    value: f64,
}

impl LongRow {
    fn new(metric: impl Into<String>, key: impl Into<String>, value: f64) -> Self {
        LongRow { metric: metric.into(), key: key.into(), value }
    }

    fn to_line(&self, experiment: &str, seed: u64) -> String {
        debug_assert!(!self.metric.contains(',') && !self.key.contains(','));
        format!("{experiment},{seed},{},{},{}", self.metric, self.key, fmt_f64(self.value))
    }
}

/// Everything one worker produces for one seed.
struct SeedOutcome {
    rows: Vec<ResultRow>,
    long_rows: Vec<LongRow>,
    record: serde_json::Value,
    checkpoint: Option<SpectralField>,
    dt: Option<(f64, u32)>,
}

fn gaussian_vector(dim: usize, rng: &mut ChaCha12Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Instantiates the configured velocity model, consuming the seed's
/// velocity stream (including any stochastic spin-up units).
fn build_flow(
    model: &ModelConfig,
    grid: SpectralGrid,
    nu: Option<f64>,
    rng: ChaCha12Rng,
) -> Result<Box<dyn FlowModel>> {
    match model {
        ModelConfig::Quiescent => Ok(Box::new(SteadyFlow::quiescent(grid))),
        ModelConfig::SteadyShear { amplitude, phase } => {
            Ok(Box::new(SteadyFlow::shear(grid, ShearAxis::Horizontal, *amplitude, *phase)))
        }
        ModelConfig::TimePeriodicShear { amplitude, period } => {
            Ok(Box::new(TimePeriodicFlow::new(grid, *period, *amplitude, (0.0, 0.0))?))
        }
        ModelConfig::RenewalShear { amplitude } => {
            Ok(Box::new(ShearRenewalFlow::new(grid, *amplitude, rng)))
        }
        ModelConfig::StochasticNse { k_cut, decay, amplitude, spin_up } => {
            let nu = nu.ok_or_else(|| Error::Config("nu is required for the stochastic model".into()))?;
            let noise = NoiseSpec::smooth(grid, *k_cut, *decay, *amplitude)?;
            let mut flow = GalerkinStochasticNse::from_rest(grid, nu, noise, rng)?;
            for _ in 0..*spin_up {
                advance_flow(&mut flow, 1.0)?;
            }
            Ok(Box::new(flow))
        }
    }
}

fn transport_family(cfg: &ExperimentConfig) -> Result<TransportFamily> {
    match cfg.kind {
        ExperimentKind::LnsNormSweep => Ok(TransportFamily::LinearizedNse {
            nu: cfg.nu.ok_or_else(|| Error::Config("nu is required".into()))?,
        }),
        _ => Ok(TransportFamily::AdvectionDiffusion {
            kappa: cfg.kappa.ok_or_else(|| Error::Config("kappa is required".into()))?,
        }),
    }
}

/// The s-list a norm sweep actually measures: the configured list, with
/// s = 0 appended for advection–diffusion so the L² dissipation bound is
/// always checked.
fn sweep_norms(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut s_list = cfg.norms.clone();
    if cfg.kind == ExperimentKind::PsaNormSweep && !s_list.iter().any(|&s| s == 0.0) {
        s_list.push(0.0);
    }
    s_list
}

fn run_norm_sweep(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let grid = SpectralGrid::standard(cfg.grid_n)?;
    let stream = SeedStream::new(seed);
    let model_cfg = cfg.model.as_ref().ok_or_else(|| Error::Config("a [model] block is required".into()))?;
    let mut flow = build_flow(model_cfg, grid, cfg.nu, stream.stream("velocity", 0))?;
    let family = transport_family(cfg)?;
    let s_list = sweep_norms(cfg);

    let mut pde = PdeCocycle::new(flow.as_mut(), family, NormSpec::l2())?;
    let dim = frame_dim(grid);
    let mut init_rng = stream.stream("initial-vector", 0);
    let v0 = gaussian_vector(dim, &mut init_rng);
    let tables: Vec<Option<DVector<f64>>> = s_list
        .iter()
        .map(|&s| if s == 0.0 { None } else { Some(sobolev_frame_weights(grid, 0.0, s)) })
        .collect();
    let refs: Vec<Option<&DVector<f64>>> = tables.iter().map(|t| t.as_ref()).collect();
    let (estimates, final_v) = top_exponent_weighted_tracked(&mut pde, &v0, cfg.horizon, &refs)?;
    let dt = (pde.last_dt(), pde.last_halvings());

    let mut rows = Vec::new();
    let mut long_rows = Vec::new();
    let mut record_estimates = Vec::new();
    for (j, est) in estimates.iter().enumerate() {
        let s = s_list[j];
        let note = if cfg.kind == ExperimentKind::PsaNormSweep && s == 0.0 {
            let kappa = cfg.kappa.unwrap_or(0.0);
            let ok = match est.value {
                Exponent::Finite(v) => v <= -kappa + 1e-6,
                Exponent::MinusInfinity => true,
            };
            if ok { "dissipation-ok".to_string() } else { "dissipation-violated".to_string() }
        } else {
            String::new()
        };
        rows.push(ResultRow {
            s: Some(s),
            kappa: cfg.kappa,
            n: cfg.horizon,
            lambda: Some(est.value),
            stderr: Some(est.stderr),
            sigma: Some(est.value),
            note,
            ..Default::default()
        });
        for (i, a) in est.series.iter().enumerate() {
            long_rows.push(LongRow::new("increment", format!("s={s};step={i}"), *a));
        }
        record_estimates.push(serde_json::json!({
            "s": s,
            "lambda": est.value,
            "stderr": est.stderr,
            "series": &est.series,
        }));
    }
    let record = serde_json::json!({
        "seed": seed,
        "kind": cfg.kind.as_str(),
        "kappa": cfg.kappa,
        "nu": cfg.nu,
        "horizon": cfg.horizon,
        "dt": dt.0,
        "halvings": dt.1,
        "estimates": record_estimates,
    });
    let checkpoint = frame_to_field(&final_v, grid, 0.0)?;
    Ok(SeedOutcome {
        rows,
        long_rows,
        record,
        checkpoint: Some(checkpoint),
        dt: Some(dt),
    })
}

fn run_kappa_scaling(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let grid = SpectralGrid::standard(cfg.grid_n)?;
    let stream = SeedStream::new(seed);
    let model_cfg = cfg.model.as_ref().ok_or_else(|| Error::Config("a [model] block is required".into()))?;
    let mut flow = build_flow(model_cfg, grid, cfg.nu, stream.stream("velocity", 0))?;
    let path = record_unit_path(flow.as_mut())?;
    let mut sampler = stream.stream("sampler", 0);

    let mut long_rows = Vec::new();
    let mut record_points = Vec::new();
    let mut all_converged = true;
    for &kappa in &cfg.kappa_list {
        let unit = AdCocycle::new(kappa)?.prepare(&path)?;
        for &s in &cfg.norms {
            let up = operator_norm(&[&unit], 0.0, s, SMOOTHING_NORM_ITERS, &mut sampler)?;
            let down = operator_norm(&[&unit], -s, 0.0, SMOOTHING_NORM_ITERS, &mut sampler)?;
            all_converged &= up.converged && down.converged;
            let key = format!("kappa={kappa};s={s}");
            long_rows.push(LongRow::new("opnorm-l2-to-hs", key.clone(), up.value));
            long_rows.push(LongRow::new("opnorm-h-neg-s-to-l2", key.clone(), down.value));
            record_points.push(serde_json::json!({
                "kappa": kappa,
                "s": s,
                "l2_to_hs": up.value,
                "h_neg_s_to_l2": down.value,
                "converged": up.converged && down.converged,
            }));
        }
    }
    let record = serde_json::json!({
        "seed": seed,
        "kind": cfg.kind.as_str(),
        "grid_n": cfg.grid_n,
        "all_converged": all_converged,
        "points": record_points,
    });
    Ok(SeedOutcome { rows: Vec::new(), long_rows, record, checkpoint: None, dt: None })
}

/// Copies the conjugate-pair coefficients of `src` that fall inside the
/// destination grid's active band: the same function, resolved at a
/// coarser truncation.
fn project_field(src: &SpectralField, dst: SpectralGrid) -> SpectralField {
    let mut out = SpectralField::zero(dst, src.rank());
    let cut = dst.k_max() as i64;
    for k in dst.half_lattice() {
        if k.0.abs() > cut || k.1.abs() > cut {
            continue;
        }
        for comp in 0..src.rank().components() {
            let c = src.coeff(comp, k);
            if c != Complex64::new(0.0, 0.0) {
                out.add_mode_pair(comp, k, c);
            }
        }
    }
    out
}

fn run_estimates_verify(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let fine = SpectralGrid::standard(cfg.grid_n)?;
    let stream = SeedStream::new(seed);
    let mut vel_rng = stream.stream("velocity", 0);
    let mut scalar_rng = stream.stream("initial-vector", 0);
    let u_fine = SpectralField::random_divergence_free(fine, &mut vel_rng, fine.k_max(), VELOCITY_DECAY);
    let f_fine = SpectralField::random_scalar(fine, &mut scalar_rng, fine.k_max(), SCALAR_DECAY);

    let ladder = [cfg.grid_n / 4, cfg.grid_n / 2, cfg.grid_n];
    let mut long_rows = Vec::new();
    let mut record_rows = Vec::new();
    for &n in &ladder {
        let grid = SpectralGrid::standard(n)?;
        let u = project_field(&u_fine, grid);
        let f = project_field(&f_fine, grid);
        let prepared_u = PreparedVelocity::new(&u)?;
        let lap_u = u.laplacian();
        let prepared_lap = PreparedVelocity::new(&lap_u)?;
        let u_gamma = u.sobolev_norm(NormSpec::new(COMMUTATOR_GAMMA)?);
        let u_gamma2 = u.sobolev_norm(NormSpec::new(COMMUTATOR_GAMMA + 2.0)?);
        for &s in &cfg.norms {
            let f_s = f.sobolev_norm(NormSpec::new(s)?);
            // ‖Λ^s(u·∇f) − u·∇(Λ^s f)‖_{L²} / (‖u‖_{H^γ}‖f‖_{H^s})
            let mut t1 = prepared_u.advect(&f, ProductBand::Dealiased)?.apply_lambda(s);
            let t2 = prepared_u.advect(&f.apply_lambda(s), ProductBand::Dealiased)?;
            t1.axpy(-1.0, &t2);
            let commutator = t1.sobolev_norm(NormSpec::l2()) / (u_gamma * f_s);
            // ‖Λ^s((Δu)·∇ Λ^{−2} f)‖_{L²} / (‖u‖_{H^{γ+2}}‖f‖_{H^s})
            let low_a = prepared_lap
                .advect(&f.apply_lambda(-2.0), ProductBand::Dealiased)?
                .apply_lambda(s)
                .sobolev_norm(NormSpec::l2())
                / (u_gamma2 * f_s);
            // ‖Λ^{s−2}((Δu)·∇ f)‖_{L²} / (‖u‖_{H^{γ+2}}‖f‖_{H^s})
            let low_b = prepared_lap
                .advect(&f, ProductBand::Dealiased)?
                .apply_lambda(s - 2.0)
                .sobolev_norm(NormSpec::l2())
                / (u_gamma2 * f_s);
            let key = format!("N={n};s={s}");
            long_rows.push(LongRow::new("commutator", key.clone(), commutator));
            long_rows.push(LongRow::new("lower-order-a", key.clone(), low_a));
            long_rows.push(LongRow::new("lower-order-b", key.clone(), low_b));
            record_rows.push(serde_json::json!({
                "n": n,
                "s": s,
                "commutator": commutator,
                "lower_order_a": low_a,
                "lower_order_b": low_b,
            }));
        }
    }
    let record = serde_json::json!({
        "seed": seed,
        "kind": cfg.kind.as_str(),
        "ladder": ladder,
        "gamma": COMMUTATOR_GAMMA,
        "ratios": record_rows,
    });
    Ok(SeedOutcome { rows: Vec::new(), long_rows, record, checkpoint: None, dt: None })
}

fn run_matrix_oracle(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let stream = SeedStream::new(seed);
    let steps = cfg.horizon;
    let opts = SpectrumOptions { cluster_gap: 0.0, burn_in: 0.2 };

    // Triangular model: fixed log-diagonal (spread so the rates stay
    // separated), noisy strictly-upper part. The spectrum estimator sees
    // only products; the diagonal Birkhoff average is the exact oracle.
    let mut diag_rng = stream.stream("sampler", 0);
    let mut diag_log: Vec<f64> = (0..ORACLE_DIM).map(|_| diag_rng.gen_range(-0.8..0.8)).collect();
    diag_log.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (i, d) in diag_log.iter_mut().enumerate() {
        *d -= 0.06 * i as f64;
    }
    let tri_rng = stream.stream("sampler", 1);
    let spectrum_model = TriangularModel::new(diag_log.clone(), 0.3, tri_rng.clone())?;
    let mut birkhoff_model = TriangularModel::new(diag_log.clone(), 0.3, tri_rng)?;
    let mut euclid = MatrixCocycle::euclidean(spectrum_model);
    let mut spec_rng = stream.stream("initial-vector", 0);
    let record_euclid =
        leading_spectrum(&mut euclid, ORACLE_DIM, steps, "euclidean", seed, &mut spec_rng, &opts)?;
    let mut birkhoff = diagonal_birkhoff(&mut birkhoff_model, steps)?;
    birkhoff.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let chi_hat: Vec<f64> = record_euclid
        .lambda
        .iter()
        .map(|e| e.finite().unwrap_or(f64::NEG_INFINITY))
        .collect();
    let chi_err = chi_hat
        .iter()
        .zip(&birkhoff)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    // Block-triangular model: the quotient over the invariant slow block
    // must grow at the exact fast rate sum, with slowly degenerating
    // angles between the pushforward and the slow block.
    let mut block_rng = stream.stream("sampler", 2);
    let top: Vec<f64> = (0..ORACLE_BLOCK.0).map(|_| block_rng.gen_range(0.3..0.8)).collect();
    let bottom: Vec<f64> = (0..ORACLE_BLOCK.1).map(|_| block_rng.gen_range(-0.8..-0.3)).collect();
    let mut block = BlockTriangularModel::new(top, bottom, 0.3, 0.5, block_rng)?;
    let slow = block.slow_subspace();
    let fast_sum = block.fast_rate_sum();
    let quotient = quotient_volume_growth(&mut block, &slow, steps)?;
    let quotient_hat = quotient.estimate.value.finite().unwrap_or(f64::NEG_INFINITY);
    let quotient_err = (quotient_hat - fast_sum).abs();
    let angle_slope = quotient.angle_slope;

    // Same triangular realization measured in two distinct quadratic
    // norms: the spectra must agree.
    let mut weight_rng = stream.stream("sampler", 3);
    let w1 = DVector::from_fn(ORACLE_DIM, |_, _| weight_rng.gen_range(-1.0f64..1.0).exp());
    let w2 = DVector::from_fn(ORACLE_DIM, |_, _| weight_rng.gen_range(-1.0f64..1.0).exp());
    let norm1 = FiniteNorm::quadratic(w1)?;
    let norm2 = FiniteNorm::quadratic(w2)?;
    let pair_rng = stream.stream("sampler", 4);
    let model_n1 = TriangularModel::new(diag_log.clone(), 0.3, pair_rng.clone())?;
    let model_n2 = TriangularModel::new(diag_log.clone(), 0.3, pair_rng)?;
    let mut rng_n1 = stream.stream("initial-vector", 1);
    let mut rng_n2 = stream.stream("initial-vector", 2);
    let mut coc_n1 = MatrixCocycle::in_norm(model_n1, &norm1)?;
    let mut coc_n2 = MatrixCocycle::in_norm(model_n2, &norm2)?;
    let rec_n1 = leading_spectrum(&mut coc_n1, ORACLE_DIM, steps, "quadratic-1", seed, &mut rng_n1, &opts)?;
    let rec_n2 = leading_spectrum(&mut coc_n2, ORACLE_DIM, steps, "quadratic-2", seed, &mut rng_n2, &opts)?;
    let norm_gap = rec_n1
        .lambda
        .iter()
        .zip(&rec_n2.lambda)
        .map(|(a, b)| {
            let a = a.finite().unwrap_or(f64::NEG_INFINITY);
            let b = b.finite().unwrap_or(f64::NEG_INFINITY);
            if a == b {
                0.0
            } else {
                (a - b).abs()
            }
        })
        .fold(0.0f64, f64::max);

    let mut rows = Vec::new();
    for (i, (chi, se)) in chi_hat.iter().zip(&record_euclid.stderr).enumerate() {
        rows.push(ResultRow {
            n: steps,
            lambda: Some(Exponent::Finite(*chi)),
            stderr: Some(*se),
            sigma: Some(record_euclid.sigma[i]),
            note: format!("chi[{i}]"),
            ..Default::default()
        });
    }
    let mut long_rows = Vec::new();
    for (i, chi) in chi_hat.iter().enumerate() {
        long_rows.push(LongRow::new("chi-hat", format!("i={i}"), *chi));
        long_rows.push(LongRow::new("birkhoff", format!("i={i}"), birkhoff[i]));
    }
    long_rows.push(LongRow::new("chi-error", "", chi_err));
    long_rows.push(LongRow::new("quotient-hat", "", quotient_hat));
    long_rows.push(LongRow::new("quotient-oracle", "", fast_sum));
    long_rows.push(LongRow::new("quotient-error", "", quotient_err));
    long_rows.push(LongRow::new("angle-slope", "", angle_slope));
    long_rows.push(LongRow::new("norm-spectrum-gap", "", norm_gap));

    let record = serde_json::json!({
        "seed": seed,
        "kind": cfg.kind.as_str(),
        "steps": steps,
        "diag_log": diag_log,
        "chi_hat": chi_hat,
        "birkhoff": birkhoff,
        "chi_error_max": chi_err,
        "quotient_hat": quotient_hat,
        "quotient_oracle": fast_sum,
        "quotient_error": quotient_err,
        "angle_slope": angle_slope,
        "norm_spectrum_gap": norm_gap,
        "spectrum": record_euclid,
    });
    Ok(SeedOutcome { rows, long_rows, record, checkpoint: None, dt: None })
}

fn run_regularity_compare(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let grid = SpectralGrid::standard(cfg.grid_n)?;
    let stream = SeedStream::new(seed);
    let model_cfg = cfg.model.as_ref().ok_or_else(|| Error::Config("a [model] block is required".into()))?;
    let mut flow = build_flow(model_cfg, grid, cfg.nu, stream.stream("velocity", 0))?;
    let family = transport_family(cfg)?;
    let (s_b, s_v) = (cfg.norms[0], cfg.norms[1]);
    let epsilon = cfg.epsilon.unwrap_or(0.05);
    let delta = cfg.delta.unwrap_or(0.05);
    let probe_dim = cfg.probe_dim.unwrap_or(4).min(frame_dim(grid));
    let mut sampler = stream.stream("sampler", 0);
    let rep = k_delta_estimate(
        flow.as_mut(),
        family,
        s_b,
        s_v,
        epsilon,
        delta,
        cfg.horizon,
        probe_dim,
        &mut sampler,
    )?;

    let mut note = if rep.comparison_holds {
        "cross-norm-bound-ok".to_string()
    } else {
        "cross-norm-bound-violated".to_string()
    };
    if rep.low_confidence {
        note.push_str(";low-confidence");
    }
    if rep.scan.inconclusive {
        note.push_str(";n-delta-saturated");
    }
    let log_plus_k = rep.scan.k_delta.ln().max(0.0);
    let rows = vec![ResultRow {
        s: Some(s_v),
        kappa: cfg.kappa,
        n: cfg.horizon,
        lambda: Some(Exponent::Finite(rep.lambda1)),
        d_bar: Some(rep.d_bar_v),
        k_delta: Some(rep.scan.k_delta),
        n_delta: rep.scan.n_delta,
        note,
        ..Default::default()
    }];
    let mut long_rows = vec![
        LongRow::new("d-bar-v", "", rep.d_bar_v),
        LongRow::new("d-bar-b", "", rep.d_bar_b),
        LongRow::new("k-delta", "", rep.scan.k_delta),
        LongRow::new("log-plus-k-delta", "", log_plus_k),
        LongRow::new("lambda1", "", rep.lambda1),
    ];
    for (i, c) in rep.scan.cross_norms.iter().enumerate() {
        long_rows.push(LongRow::new("cross-norm", format!("n={i}"), *c));
    }
    let record = serde_json::json!({
        "seed": seed,
        "kind": cfg.kind.as_str(),
        "s_base": s_b,
        "s_strong": s_v,
        "report": rep,
    });
    Ok(SeedOutcome { rows, long_rows, record, checkpoint: None, dt: None })
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    match cfg.kind {
        ExperimentKind::PsaNormSweep | ExperimentKind::LnsNormSweep => run_norm_sweep(cfg, seed),
        ExperimentKind::KappaScaling => run_kappa_scaling(cfg, seed),
        ExperimentKind::EstimatesVerify => run_estimates_verify(cfg, seed),
        ExperimentKind::MatrixOracle => run_matrix_oracle(cfg, seed),
        ExperimentKind::RegularityCompare => run_regularity_compare(cfg, seed),
    }
}

/// Expected row counts, recorded in the manifest so a report can detect
/// partial results.
fn expected_rows(cfg: &ExperimentConfig) -> (usize, usize) {
    let seeds = cfg.seeds.len();
    match cfg.kind {
        ExperimentKind::PsaNormSweep | ExperimentKind::LnsNormSweep => {
            let s_count = sweep_norms(cfg).len();
            (seeds * s_count, seeds * s_count * cfg.horizon)
        }
        ExperimentKind::KappaScaling => {
            (0, seeds * cfg.kappa_list.len() * cfg.norms.len() * 2)
        }
        ExperimentKind::EstimatesVerify => (0, seeds * 3 * cfg.norms.len() * 3),
        ExperimentKind::MatrixOracle => (seeds * ORACLE_DIM, seeds * (2 * ORACLE_DIM + 6)),
        ExperimentKind::RegularityCompare => (seeds, seeds * (5 + cfg.horizon)),
    }
}

fn env_thread_cap() -> Result<Option<usize>> {
    match std::env::var("LYAPNORM_THREADS") {
        Ok(v) => {
            let t: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("LYAPNORM_THREADS must be a positive integer, got {v:?}")))?;
            if t == 0 {
                return Err(Error::Config("LYAPNORM_THREADS must be at least 1".into()));
            }
            Ok(Some(t))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(Error::Config("LYAPNORM_THREADS is not valid unicode".into()))
        }
    }
}

/// Runs the experiment described by a TOML config file. Thread count
/// comes from `LYAPNORM_THREADS`, defaulting to the machine parallelism;
/// it never affects the numeric artifacts.
pub fn run(config_path: &Path) -> Result<RunSummary> {
    let cfg = ExperimentConfig::load(config_path)?;
    run_config(&cfg)
}

/// Same as [`run`], from an in-memory config.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let threads = env_thread_cap()?
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1));
    run_config_with_threads(cfg, threads)
}

/// Same as [`run_config`] with an explicit worker count (used by tests to
/// verify thread-count independence without touching the environment).
pub fn run_config_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<RunSummary> {
    cfg.validate()?;
    if threads == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    let start = Instant::now();
    let out_dir = cfg.output_dir.clone();
    fs::create_dir_all(out_dir.join("records"))?;

    let n = cfg.seeds.len();
    let threads = threads.min(n).max(1);
    let slots: Vec<Mutex<Option<Result<SeedOutcome>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let outcome = run_seed(cfg, cfg.seeds[i]);
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    // Aggregation barrier: workers are done; write artifacts in seed order.
    let mut results = String::from(RESULTS_HEADER);
    results.push('\n');
    let mut long = String::from(LONG_HEADER);
    long.push('\n');
    let mut outputs = Vec::new();
    let mut dt_choices = Vec::new();
    let mut result_rows = 0usize;
    let mut long_rows = 0usize;
    let mut wrote_checkpoint_dir = false;
    for (i, slot) in slots.iter().enumerate() {
        let seed = cfg.seeds[i];
        let outcome = slot
            .lock()
            .unwrap()
            .take()
            .ok_or_else(|| Error::Numeric(format!("worker for seed {seed} produced no result")))??;
        for row in &outcome.rows {
            results.push_str(&row.to_line(&cfg.experiment, seed));
            results.push('\n');
            result_rows += 1;
        }
        for row in &outcome.long_rows {
            long.push_str(&row.to_line(&cfg.experiment, seed));
            long.push('\n');
            long_rows += 1;
        }
        let record_rel = format!("records/seed_{seed}.json");
        let mut text = serde_json::to_string_pretty(&outcome.record)?;
        text.push('\n');
        fs::write(out_dir.join(&record_rel), text)?;
        let checkpoint_rel = match &outcome.checkpoint {
            Some(field) => {
                if !wrote_checkpoint_dir {
                    fs::create_dir_all(out_dir.join("checkpoints"))?;
                    wrote_checkpoint_dir = true;
                }
                let rel = format!("checkpoints/seed_{seed}.lynf");
                checkpoint::save(&out_dir.join(&rel), field)?;
                Some(rel)
            }
            None => None,
        };
        outputs.push(OutputEntry { seed, record: record_rel, checkpoint: checkpoint_rel });
        if let Some((dt, halvings)) = outcome.dt {
            dt_choices.push(DtChoice { seed, dt, halvings });
        }
    }
    fs::write(out_dir.join("results.csv"), &results)?;
    fs::write(out_dir.join("long.csv"), &long)?;

    let (expected_result_rows, expected_long_rows) = expected_rows(cfg);
    let manifest = RunManifest {
        experiment: cfg.experiment.clone(),
        kind: cfg.kind,
        config_sha256: cfg.sha256()?,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        seeds: cfg.seeds.clone(),
        grid_n: cfg.grid_n,
        expected_result_rows,
        expected_long_rows,
        dt_choices,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        results_csv: "results.csv".into(),
        long_csv: "long.csv".into(),
        outputs,
        config: cfg.clone(),
    };
    let mut manifest_text = serde_json::to_string_pretty(&manifest)?;
    manifest_text.push('\n');
    fs::write(out_dir.join("manifest.json"), manifest_text)?;

    Ok(RunSummary {
        output_dir: out_dir,
        seeds: n,
        result_rows,
        long_rows,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One acceptance assertion evaluated by [`report`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// One aggregated table line (keyed by Sobolev order or metric).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableLine {
    pub key: String,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Aggregated view of a finished run with its assertion results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub kind: ExperimentKind,
    pub seeds: usize,
    pub result_rows: usize,
    pub long_rows: usize,
    pub checks: Vec<CheckLine>,
    pub table: Vec<TableLine>,
    pub metrics: BTreeMap<String, f64>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Human-readable rendering (one table line and one PASS/FAIL line
    /// each).
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "experiment {} ({}): {} seeds, {} result rows, {} long rows\n",
            self.experiment,
            self.kind.as_str(),
            self.seeds,
            self.result_rows,
            self.long_rows
        ));
        for line in &self.table {
            out.push_str(&format!(
                "  {}: {:+.6} ± {:.6} ({} values)\n",
                line.key, line.mean, line.stderr, line.count
            ));
        }
        for check in &self.checks {
            out.push_str(&format!(
                "{}: {} — {}\n",
                check.name,
                if check.passed { "PASS" } else { "FAIL" },
                check.detail
            ));
        }
        out
    }
}

/// Parsed `results.csv` row.
#[derive(Clone, Debug)]
struct ParsedRow {
    seed: u64,
    s: Option<f64>,
    #[allow(dead_code)]
    kappa: Option<f64>,
    lambda: Option<f64>,
    stderr: Option<f64>,
    note: String,
}

fn parse_opt_f64(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    if field == "-inf" {
        return Ok(Some(f64::NEG_INFINITY));
    }
    if field == "inf" {
        return Ok(Some(f64::INFINITY));
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::MissingResults(format!("unparseable numeric field {field:?} in results.csv")))
}

fn parse_results(text: &str) -> Result<Vec<ParsedRow>> {
    let mut rows = Vec::new();
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RESULTS_HEADER => {}
        _ => return Err(Error::MissingResults("results.csv is missing its header".into())),
    }
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(Error::MissingResults(format!(
                "results.csv row has {} fields, expected 13",
                fields.len()
            )));
        }
        rows.push(ParsedRow {
            seed: fields[1]
                .parse()
                .map_err(|_| Error::MissingResults("unparseable seed in results.csv".into()))?,
            s: parse_opt_f64(fields[2])?,
            kappa: parse_opt_f64(fields[3])?,
            lambda: parse_opt_f64(fields[5])?,
            stderr: parse_opt_f64(fields[6])?,
            note: fields[12].to_string(),
        });
    }
    Ok(rows)
}

/// Parsed `long.csv` row.
#[derive(Clone, Debug)]
struct ParsedLong {
    #[allow(dead_code)]
    seed: u64,
    metric: String,
    key: String,
    value: f64,
}

fn parse_long(text: &str) -> Result<Vec<ParsedLong>> {
    let mut rows = Vec::new();
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == LONG_HEADER => {}
        _ => return Err(Error::MissingResults("long.csv is missing its header".into())),
    }
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::MissingResults(format!(
                "long.csv row has {} fields, expected 5",
                fields.len()
            )));
        }
        rows.push(ParsedLong {
            seed: fields[1]
                .parse()
                .map_err(|_| Error::MissingResults("unparseable seed in long.csv".into()))?,
            metric: fields[2].to_string(),
            key: fields[3].to_string(),
            value: parse_opt_f64(fields[4])?
                .ok_or_else(|| Error::MissingResults("empty value in long.csv".into()))?,
        });
    }
    Ok(rows)
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    (mean, (var / m as f64).sqrt())
}

/// Least-squares slope of y against x.
fn lsq_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Grouping key for an f64 that is stable across the formatting
/// round-trip (rows were written with the shortest-roundtrip formatter).
fn f64_key(v: f64) -> String {
    fmt_f64(v)
}

struct SweepGroup {
    s: f64,
    mean: f64,
    combined_se: f64,
    count: usize,
}

fn sweep_groups(rows: &[ParsedRow]) -> Vec<SweepGroup> {
    let mut by_s: BTreeMap<String, (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in rows {
        let (Some(s), Some(l)) = (row.s, row.lambda) else { continue };
        let entry = by_s.entry(f64_key(s)).or_insert((s, Vec::new(), Vec::new()));
        entry.1.push(l);
        entry.2.push(row.stderr.unwrap_or(0.0));
    }
    by_s
        .into_values()
        .map(|(s, lambdas, stderrs)| {
            let m = lambdas.len();
            let (mean, se_emp) = mean_and_se(&lambdas);
            let se_pooled = stderrs.iter().map(|e| e * e).sum::<f64>().sqrt() / m as f64;
            SweepGroup { s, mean, combined_se: se_emp.max(se_pooled), count: m }
        })
        .collect()
}

fn check_norm_independence(groups: &[SweepGroup], checks: &mut Vec<CheckLine>) {
    let mut worst: Option<(f64, f64, f64, f64)> = None;
    let mut passed = true;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let diff = (groups[i].mean - groups[j].mean).abs();
            let allowance =
                (3.0 * (groups[i].combined_se.powi(2) + groups[j].combined_se.powi(2)).sqrt())
                    .max(1e-9);
            if diff > allowance {
                passed = false;
            }
            let ratio = diff / allowance;
            if worst.map_or(true, |w| ratio > w.0) {
                worst = Some((ratio, groups[i].s, groups[j].s, diff));
            }
        }
    }
    let detail = match worst {
        Some((ratio, si, sj, diff)) => format!(
            "worst pair s={si} vs s={sj}: |Δλ̂| = {diff:.3e} at {ratio:.2}× the 3-stderr allowance"
        ),
        None => "fewer than two norms; nothing to compare".into(),
    };
    checks.push(CheckLine { name: "norm-independence".into(), passed, detail });
}

fn group_long<'a>(
    long: &'a [ParsedLong],
    metric: &str,
) -> BTreeMap<String, Vec<&'a ParsedLong>> {
    let mut map: BTreeMap<String, Vec<&ParsedLong>> = BTreeMap::new();
    for row in long.iter().filter(|r| r.metric == metric) {
        map.entry(row.key.clone()).or_default().push(row);
    }
    map
}

fn key_field(key: &str, name: &str) -> Option<f64> {
    key.split(';')
        .find_map(|part| part.strip_prefix(&format!("{name}=")))
        .and_then(|v| v.parse().ok())
}

fn report_sweep(manifest: &RunManifest, rows: &[ParsedRow], rep: &mut Report) {
    let groups = sweep_groups(rows);
    for g in &groups {
        rep.table.push(TableLine {
            key: format!("s={}", g.s),
            mean: g.mean,
            stderr: g.combined_se,
            count: g.count,
        });
        rep.metrics.insert(format!("lambda.s={}", g.s), g.mean);
        rep.metrics.insert(format!("stderr.s={}", g.s), g.combined_se);
    }
    let stderr_max = groups.iter().map(|g| g.combined_se).fold(0.0f64, f64::max);
    rep.metrics.insert("stderr-max".into(), stderr_max);
    check_norm_independence(&groups, &mut rep.checks);

    if manifest.kind == ExperimentKind::PsaNormSweep {
        let kappa = manifest.config.kappa.unwrap_or(0.0);
        let mut worst = 0.0f64;
        let mut passed = true;
        let mut seen = false;
        for row in rows.iter().filter(|r| r.s == Some(0.0)) {
            seen = true;
            let l = row.lambda.unwrap_or(f64::INFINITY);
            let excess = l - (-kappa);
            worst = worst.max(excess);
            if excess > 1e-6 || row.note.contains("dissipation-violated") {
                passed = false;
            }
        }
        rep.checks.push(CheckLine {
            name: "l2-dissipation".into(),
            passed: passed && seen,
            detail: format!("max λ̂₁(L²) − (−κ) = {worst:.3e} over all seeds (bound 1e-6)"),
        });
        if matches!(manifest.config.model, Some(ModelConfig::Quiescent)) {
            let mut worst = 0.0f64;
            for row in rows {
                if let Some(l) = row.lambda {
                    worst = worst.max((l + kappa).abs());
                }
            }
            rep.checks.push(CheckLine {
                name: "heat-baseline".into(),
                passed: worst <= 1e-8,
                detail: format!("max |λ̂₁ + κ| = {worst:.3e} (bound 1e-8)"),
            });
        }
        if manifest.seeds.len() >= 2 {
            rep.checks.push(CheckLine {
                name: "stderr-bound".into(),
                passed: stderr_max <= 0.02,
                detail: format!("max combined stderr = {stderr_max:.4} (bound 0.02)"),
            });
        }
    }
}

fn report_kappa_scaling(manifest: &RunManifest, long: &[ParsedLong], rep: &mut Report) {
    for (metric, label) in [("opnorm-l2-to-hs", "smoothing"), ("opnorm-h-neg-s-to-l2", "dual")] {
        let grouped = group_long(long, metric);
        // mean over seeds at each (kappa, s), then log-log slope per s
        let mut by_s: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for (key, rows) in &grouped {
            let (Some(kappa), Some(s)) = (key_field(key, "kappa"), key_field(key, "s")) else {
                continue;
            };
            let mean = rows.iter().map(|r| r.value).sum::<f64>() / rows.len() as f64;
            by_s.entry(f64_key(s)).or_default().push((kappa.ln(), mean.ln()));
            rep.table.push(TableLine {
                key: format!("{label} {key}"),
                mean,
                stderr: mean_and_se(&rows.iter().map(|r| r.value).collect::<Vec<_>>()).1,
                count: rows.len(),
            });
        }
        for (s_key, mut points) in by_s {
            let s: f64 = s_key.parse().unwrap_or(f64::NAN);
            points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if points.len() < 2 {
                continue;
            }
            let slope = lsq_slope(&points);
            // The norms grow as κ shrinks, so the log-log slope is negative;
            // the regularization law bounds its magnitude by s/2.
            let magnitude = -slope;
            let bound = s / 2.0 + 0.1;
            rep.metrics.insert(format!("slope.{label}.s={s_key}"), slope);
            rep.checks.push(CheckLine {
                name: format!("kappa-slope-{label}(s={s_key})"),
                passed: magnitude <= bound,
                detail: format!("fitted log-log slope {slope:.4}, |slope| ≤ {bound} required"),
            });
        }
    }
    let _ = manifest;
}

fn report_estimates(manifest: &RunManifest, long: &[ParsedLong], rep: &mut Report) {
    let ladder = [manifest.grid_n / 4, manifest.grid_n / 2, manifest.grid_n];
    for metric in ["commutator", "lower-order-a", "lower-order-b"] {
        let grouped = group_long(long, metric);
        for &s in &manifest.config.norms {
            let mut maxima = Vec::new();
            for &n in &ladder {
                let key = format!("N={n};s={s}");
                let max = grouped
                    .get(&key)
                    .map(|rows| rows.iter().map(|r| r.value).fold(0.0f64, f64::max))
                    .unwrap_or(f64::NAN);
                rep.table.push(TableLine {
                    key: format!("{metric} {key} max"),
                    mean: max,
                    stderr: 0.0,
                    count: grouped.get(&key).map_or(0, |r| r.len()),
                });
                maxima.push(max);
            }
            let mut growth_max = 0.0f64;
            for w in maxima.windows(2) {
                growth_max = growth_max.max(w[1] / w[0] - 1.0);
            }
            rep.metrics.insert(format!("growth-max.{metric}.s={s}"), growth_max);
            rep.checks.push(CheckLine {
                name: format!("refinement-stability({metric},s={s})"),
                passed: growth_max.is_finite() && growth_max < 0.05,
                detail: format!(
                    "ensemble max grows {:.2}% per grid doubling (bound 5%)",
                    growth_max * 100.0
                ),
            });
        }
    }
}

fn report_matrix_oracle(long: &[ParsedLong], rep: &mut Report) {
    for (metric, name, bound, absolute) in [
        ("chi-error", "chi-birkhoff", 1e-2, false),
        ("quotient-error", "quotient-volume", 1e-2, false),
        ("angle-slope", "angle-slope", 1e-2, true),
        ("norm-spectrum-gap", "norm-invariance", 1e-2, false),
    ] {
        let values: Vec<f64> = long
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| if absolute { r.value.abs() } else { r.value })
            .collect();
        let worst = values.iter().copied().fold(0.0f64, f64::max);
        rep.metrics.insert(format!("{metric}.max"), worst);
        rep.table.push(TableLine {
            key: metric.into(),
            mean: worst,
            stderr: 0.0,
            count: values.len(),
        });
        rep.checks.push(CheckLine {
            name: name.into(),
            passed: !values.is_empty() && worst <= bound,
            detail: format!("max over seeds = {worst:.3e} (bound {bound})"),
        });
    }
}

fn report_regularity(rows: &[ParsedRow], long: &[ParsedLong], rep: &mut Report) {
    let violations = rows.iter().filter(|r| r.note.contains("cross-norm-bound-violated")).count();
    let low_confidence = rows.iter().filter(|r| r.note.contains("low-confidence")).count();
    let saturated = rows.iter().filter(|r| r.note.contains("n-delta-saturated")).count();
    rep.metrics.insert("violations".into(), violations as f64);
    rep.metrics.insert("low-confidence".into(), low_confidence as f64);
    rep.metrics.insert("n-delta-saturated".into(), saturated as f64);
    let logs: Vec<f64> =
        long.iter().filter(|r| r.metric == "log-plus-k-delta").map(|r| r.value).collect();
    for q in [1, 2] {
        let moment = if logs.is_empty() {
            f64::NAN
        } else {
            logs.iter().map(|v| v.powi(q)).sum::<f64>() / logs.len() as f64
        };
        rep.metrics.insert(format!("moment.q{q}"), moment);
        rep.table.push(TableLine {
            key: format!("mean (log⁺K_δ)^{q}"),
            mean: moment,
            stderr: 0.0,
            count: logs.len(),
        });
    }
    let k_max = long
        .iter()
        .filter(|r| r.metric == "k-delta")
        .map(|r| r.value)
        .fold(0.0f64, f64::max);
    rep.metrics.insert("k-delta-max".into(), k_max);
    rep.checks.push(CheckLine {
        name: "cross-norm-domination".into(),
        passed: violations == 0 && !rows.is_empty(),
        detail: format!(
            "{violations} violations over {} paths ({low_confidence} low-confidence, \
             {saturated} saturated scans)",
            rows.len()
        ),
    });
}

/// Reads a finished run directory, evaluates the experiment's acceptance
/// assertions, writes `report.json`, and returns the aggregate. Missing
/// or partial artifacts surface as [`Error::MissingResults`] (exit 4).
pub fn report(dir: &Path) -> Result<Report> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Err(Error::MissingResults(format!(
            "no manifest.json in {} — not a finished run directory",
            dir.display()
        )));
    }
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    let results_path = dir.join(&manifest.results_csv);
    let long_path = dir.join(&manifest.long_csv);
    if !results_path.exists() || !long_path.exists() {
        return Err(Error::MissingResults("results.csv or long.csv is missing".into()));
    }
    let rows = parse_results(&fs::read_to_string(results_path)?)?;
    let long = parse_long(&fs::read_to_string(long_path)?)?;
    if rows.len() != manifest.expected_result_rows || long.len() != manifest.expected_long_rows {
        return Err(Error::MissingResults(format!(
            "partial results: {} result rows (expected {}), {} long rows (expected {})",
            rows.len(),
            manifest.expected_result_rows,
            long.len(),
            manifest.expected_long_rows
        )));
    }
    for entry in &manifest.outputs {
        if !dir.join(&entry.record).exists() {
            return Err(Error::MissingResults(format!("missing per-seed record {}", entry.record)));
        }
    }
    for seed in &manifest.seeds {
        if !rows.iter().any(|r| r.seed == *seed) && manifest.expected_result_rows > 0 {
            return Err(Error::MissingResults(format!("no result rows for seed {seed}")));
        }
    }

    let mut rep = Report {
        experiment: manifest.experiment.clone(),
        kind: manifest.kind,
        seeds: manifest.seeds.len(),
        result_rows: rows.len(),
        long_rows: long.len(),
        checks: Vec::new(),
        table: Vec::new(),
        metrics: BTreeMap::new(),
    };
    match manifest.kind {
        ExperimentKind::PsaNormSweep | ExperimentKind::LnsNormSweep => {
            report_sweep(&manifest, &rows, &mut rep)
        }
        ExperimentKind::KappaScaling => report_kappa_scaling(&manifest, &long, &mut rep),
        ExperimentKind::EstimatesVerify => report_estimates(&manifest, &long, &mut rep),
        ExperimentKind::MatrixOracle => report_matrix_oracle(&long, &mut rep),
        ExperimentKind::RegularityCompare => report_regularity(&rows, &long, &mut rep),
    }

    let mut text = serde_json::to_string_pretty(&rep)?;
    text.push('\n');
    fs::write(dir.join("report.json"), text)?;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "lyapnorm-lab-{tag}-{}-{:?}",
            std::process::id(),
            std::thread::current().id()
        ));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    fn quiescent_config(tag: &str) -> ExperimentConfig {
        ExperimentConfig {
            experiment: format!("mini-{tag}"),
            kind: ExperimentKind::PsaNormSweep,
            grid_n: 8,
            kappa: Some(0.5),
            nu: None,
            norms: vec![-1.0, 0.0, 1.0],
            seeds: vec![7, 11],
            horizon: 120,
            kappa_list: Vec::new(),
            epsilon: None,
            delta: None,
            probe_dim: None,
            gamma_prime: None,
            output_dir: temp_dir(tag),
            model: Some(ModelConfig::Quiescent),
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut cfg = quiescent_config("roundtrip");
        cfg.epsilon = Some(0.05);
        cfg.kappa_list = vec![0.1, 0.01];
        let text = cfg.to_toml().unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let text2 = back.to_toml().unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn validation_rejects_missing_diffusivity_with_compactness_message() {
        let mut cfg = quiescent_config("kappa-zero");
        cfg.kappa = Some(0.0);
        let err = cfg.validate().unwrap_err();
        assert!(format!("{err}").contains("compact"), "message should cite compactness: {err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn validation_rejects_tiny_diffusivity_with_resolution_message() {
        let mut cfg = quiescent_config("kappa-tiny");
        cfg.kappa = Some(1e-5);
        let err = cfg.validate().unwrap_err();
        let text = format!("{err}");
        assert!(text.contains("dissipative"), "message should tie κ to the dissipative scale: {text}");
    }

    #[test]
    fn validation_rejects_bad_grid_norm_range_and_seeds() {
        let mut cfg = quiescent_config("bad-grid");
        cfg.grid_n = 33;
        assert!(cfg.validate().is_err());

        let mut cfg = quiescent_config("bad-norm");
        cfg.norms = vec![3.5];
        assert!(cfg.validate().is_err());

        let mut cfg = quiescent_config("no-seeds");
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = quiescent_config("dup-seeds");
        cfg.seeds = vec![3, 3];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn projection_preserves_coefficients_inside_the_coarse_band() {
        let fine = SpectralGrid::standard(32).unwrap();
        let coarse = SpectralGrid::standard(8).unwrap();
        let mut rng = SeedStream::new(5).stream("velocity", 0);
        let f = SpectralField::random_scalar(fine, &mut rng, coarse.k_max(), 1.0);
        let p = project_field(&f, coarse);
        for k in coarse.half_lattice() {
            if k.0.abs() as usize <= coarse.k_max() && k.1.abs() as usize <= coarse.k_max() {
                let a = f.coeff(0, k);
                let b = p.coeff(0, k);
                assert!((a - b).norm() < 1e-14, "coefficient mismatch at {k:?}");
            }
        }
        let nf = f.sobolev_norm(NormSpec::l2());
        let np = p.sobolev_norm(NormSpec::l2());
        assert!((nf - np).abs() < 1e-12 * nf.max(1.0));
    }

    #[test]
    fn quiescent_sweep_runs_reports_and_hits_the_heat_rate() {
        let cfg = quiescent_config("run");
        let summary = run_config_with_threads(&cfg, 2).unwrap();
        assert_eq!(summary.seeds, 2);
        assert_eq!(summary.result_rows, 6);
        let rep = report(&cfg.output_dir).unwrap();
        assert!(rep.all_passed(), "all checks should pass:\n{}", rep.render());
        assert!(rep.checks.iter().any(|c| c.name == "heat-baseline"));
        assert!(rep.checks.iter().any(|c| c.name == "l2-dissipation"));
        let lambda = rep.metrics.get("lambda.s=0").unwrap();
        assert!((lambda + 0.5).abs() < 1e-8, "λ̂₁(L²) = {lambda}");
        assert!(cfg.output_dir.join("manifest.json").exists());
        assert!(cfg.output_dir.join("checkpoints/seed_7.lynf").exists());
        let field = checkpoint::load(&cfg.output_dir.join("checkpoints/seed_7.lynf")).unwrap();
        assert_eq!(field.grid().n(), 8);
        let _ = fs::remove_dir_all(&cfg.output_dir);
    }

    #[test]
    fn identical_configs_are_byte_identical_across_thread_counts() {
        let mut cfg1 = quiescent_config("threads-1");
        cfg1.seeds = vec![1, 2, 3];
        let mut cfg2 = cfg1.clone();
        cfg2.output_dir = temp_dir("threads-2");
        run_config_with_threads(&cfg1, 1).unwrap();
        run_config_with_threads(&cfg2, 3).unwrap();
        let a = fs::read(cfg1.output_dir.join("results.csv")).unwrap();
        let b = fs::read(cfg2.output_dir.join("results.csv")).unwrap();
        assert_eq!(a, b, "results.csv must not depend on the worker count");
        let al = fs::read(cfg1.output_dir.join("long.csv")).unwrap();
        let bl = fs::read(cfg2.output_dir.join("long.csv")).unwrap();
        assert_eq!(al, bl, "long.csv must not depend on the worker count");
        let _ = fs::remove_dir_all(&cfg1.output_dir);
        let _ = fs::remove_dir_all(&cfg2.output_dir);
    }

    #[test]
    fn report_on_an_empty_directory_exits_with_missing_results() {
        let dir = temp_dir("empty");
        fs::create_dir_all(&dir).unwrap();
        let err = report(&dir).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn matrix_oracle_mini_run_matches_its_oracles_loosely() {
        let cfg = ExperimentConfig {
            experiment: "mini-matrix".into(),
            kind: ExperimentKind::MatrixOracle,
            grid_n: 8,
            kappa: None,
            nu: None,
            norms: Vec::new(),
            seeds: vec![1, 2],
            horizon: 3000,
            kappa_list: Vec::new(),
            epsilon: None,
            delta: None,
            probe_dim: None,
            gamma_prime: None,
            output_dir: temp_dir("matrix"),
            model: None,
        };
        run_config_with_threads(&cfg, 2).unwrap();
        let rep = report(&cfg.output_dir).unwrap();
        let chi_err = rep.metrics.get("chi-error.max").unwrap();
        assert!(*chi_err < 0.05, "chi error too large at 3000 steps: {chi_err}");
        let _ = fs::remove_dir_all(&cfg.output_dir);
    }

    #[test]
    fn estimates_verify_mini_run_produces_the_ratio_table() {
        let cfg = ExperimentConfig {
            experiment: "mini-estimates".into(),
            kind: ExperimentKind::EstimatesVerify,
            grid_n: 32,
            kappa: None,
            nu: None,
            norms: vec![1.0],
            seeds: vec![1, 2, 3],
            horizon: 1,
            kappa_list: Vec::new(),
            epsilon: None,
            delta: None,
            probe_dim: None,
            gamma_prime: None,
            output_dir: temp_dir("estimates"),
            model: None,
        };
        let summary = run_config_with_threads(&cfg, 2).unwrap();
        assert_eq!(summary.long_rows, 3 * 3 * 3);
        let rep = report(&cfg.output_dir).unwrap();
        assert!(rep.metrics.contains_key("growth-max.commutator.s=1"));
        let _ = fs::remove_dir_all(&cfg.output_dir);
    }

    #[test]
    fn kappa_scaling_mini_run_fits_slopes() {
        let cfg = ExperimentConfig {
            experiment: "mini-kappa".into(),
            kind: ExperimentKind::KappaScaling,
            grid_n: 16,
            kappa: None,
            nu: None,
            norms: vec![1.0],
            seeds: vec![4],
            horizon: 1,
            kappa_list: vec![0.1, 0.03],
            epsilon: None,
            delta: None,
            probe_dim: None,
            gamma_prime: None,
            output_dir: temp_dir("kappa"),
            model: Some(ModelConfig::SteadyShear { amplitude: 1.0, phase: 0.0 }),
        };
        run_config_with_threads(&cfg, 1).unwrap();
        let rep = report(&cfg.output_dir).unwrap();
        assert!(rep.metrics.contains_key("slope.smoothing.s=1"));
        assert!(rep.checks.iter().any(|c| c.name.starts_with("kappa-slope-smoothing")));
        let _ = fs::remove_dir_all(&cfg.output_dir);
    }

    #[test]
    fn regularity_compare_mini_run_reports_the_cross_norm_bound() {
        let cfg = ExperimentConfig {
            experiment: "mini-regularity".into(),
            kind: ExperimentKind::RegularityCompare,
            grid_n: 8,
            kappa: Some(0.2),
            nu: None,
            norms: vec![0.0, 1.0],
            seeds: vec![3, 5],
            horizon: 12,
            kappa_list: Vec::new(),
            epsilon: Some(0.05),
            delta: Some(0.05),
            probe_dim: Some(3),
            gamma_prime: None,
            output_dir: temp_dir("regularity"),
            model: Some(ModelConfig::Quiescent),
        };
        run_config_with_threads(&cfg, 2).unwrap();
        let rep = report(&cfg.output_dir).unwrap();
        let violations = rep.metrics.get("violations").unwrap();
        assert_eq!(*violations, 0.0, "quiescent paths must satisfy the bound:\n{}", rep.render());
        assert!(rep.metrics.contains_key("moment.q1"));
        let _ = fs::remove_dir_all(&cfg.output_dir);
    }

    #[test]
    fn partial_results_are_detected() {
        let cfg = quiescent_config("partial");
        run_config_with_threads(&cfg, 1).unwrap();
        // Truncate results.csv to simulate an interrupted run.
        let path = cfg.output_dir.join("results.csv");
        let text = fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(3).collect();
        fs::write(&path, truncated.join("\n") + "\n").unwrap();
        let err = report(&cfg.output_dir).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(format!("{err}").contains("partial"));
        let _ = fs::remove_dir_all(&cfg.output_dir);
    }
}
