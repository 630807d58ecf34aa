//! Estimators for Lyapunov exponents, spectra with multiplicity, volume
//! growth, Oseledets-filtration probes, and the regularity functions that
//! quantify how fast those asymptotic rates are realized.
//!
//! Every estimator works on real coordinate vectors in an isometric frame:
//! adapters conjugate the underlying dynamics so that the frame inner
//! product is plain Euclidean. For the Sobolev norm H^s the conjugation is
//! Λ^s (the |k|^s mode multiplier), which renders the whole scale of
//! s-dependent inner products numerically uniform; for a weighted
//! quadratic norm on R^n it is the diagonal whitener W, replacing each
//! step A by W·A·W⁻¹. Orthonormalizations, growth factors, and
//! determinants computed in the frame then equal their norm-intrinsic
//! counterparts exactly, and a single trajectory can be measured in many
//! norms at once through per-coordinate weight tables.
//!
//! Shared estimation discipline:
//! - one step map per call, applied to every vector of a block, with
//!   per-step renormalization and log growth factors kept as a series;
//! - the single-vector exponent averages the last half of its series,
//!   block spectra discard the first 20% — initial transients are exactly
//!   what the regularity functions quantify, so they must not bias the
//!   exponent estimates;
//! - standard errors come from block averaging with ≈ √n blocks;
//! - collapse to an exact zero vector reports −∞ through an explicit
//!   sentinel, never a large negative float.

use crate::cocycles::{record_unit_path, operator_norm, TransportFamily, UnitPropagator};
use crate::error::{Error, Result};
use crate::flows::FlowModel;
use crate::geometry::{bounded_complement, min_principal_angle_sin, quotient_step, FiniteNorm, Subspace};
use crate::matrices::MatrixModel;
use crate::spectral::{NormSpec, Rank, SpectralField, SpectralGrid};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A Lyapunov exponent estimate: finite, or the exact −∞ that singular
/// maps produce. Serialized as a JSON number, or the string "-inf".
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    MinusInfinity,
}

impl Exponent {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Exponent::Finite(x) => Some(*x),
            Exponent::MinusInfinity => None,
        }
    }

    pub fn is_minus_infinity(&self) -> bool {
        matches!(self, Exponent::MinusInfinity)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(x) => serializer.serialize_f64(*x),
            Exponent::MinusInfinity => serializer.serialize_str("-inf"),
        }
    }
}

struct ExponentVisitor;

impl<'de> Visitor<'de> for ExponentVisitor {
    type Value = Exponent;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a finite number or the string \"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
        Ok(Exponent::Finite(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
        Ok(Exponent::Finite(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
        Ok(Exponent::Finite(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
        if v == "-inf" {
            Ok(Exponent::MinusInfinity)
        } else {
            Err(E::custom("expected \"-inf\""))
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(ExponentVisitor)
    }
}

/// One exponent with its uncertainty and the per-step log growth series
/// it was fitted from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub value: Exponent,
    pub stderr: f64,
    pub series: Vec<f64>,
}

/// A linear cocycle presented one time step at a time: `step` draws the
/// next map from the driver and applies it to every vector of the block.
/// Implementations must act linearly; the PDE adapter spot-checks this.
pub trait BlockCocycle {
    fn dim(&self) -> usize;
    fn step(&mut self, block: &mut [DVector<f64>]) -> Result<()>;
}

/// Matrix-model adapter. With `in_norm`, the steps are conjugated by the
/// diagonal whitener of a weighted quadratic norm, so Euclidean frame
/// computations measure that norm.
pub struct MatrixCocycle<M: MatrixModel> {
    model: M,
    conjugation: Option<FiniteNorm>,
}

impl<M: MatrixModel> MatrixCocycle<M> {
    pub fn euclidean(model: M) -> Self {
        MatrixCocycle { model, conjugation: None }
    }

    pub fn in_norm(model: M, norm: &FiniteNorm) -> Result<Self> {
        if !norm.is_quadratic() {
            return Err(Error::Config(
                "frame conjugation needs a quadratic norm; ℓ^p norms have no isometric linear frame".into(),
            ));
        }
        if norm.dim() != model.dim() {
            return Err(Error::Shape("norm and model dimensions differ".into()));
        }
        Ok(MatrixCocycle { model, conjugation: Some(norm.clone()) })
    }
}

impl<M: MatrixModel> BlockCocycle for MatrixCocycle<M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn step(&mut self, block: &mut [DVector<f64>]) -> Result<()> {
        let a = self.model.sample_step();
        let a = match &self.conjugation {
            Some(norm) => norm.conjugate_matrix(&a),
            None => a,
        };
        for v in block.iter_mut() {
            if v.len() != a.ncols() {
                return Err(Error::Shape("block vector has wrong dimension".into()));
            }
            *v = &a * &*v;
        }
        Ok(())
    }
}

/// Real frame dimension of scalar fields on the grid: two coordinates per
/// half-lattice mode.
pub fn frame_dim(grid: SpectralGrid) -> usize {
    grid.side() * grid.side() - 1
}

/// Flattens Λ^s f into real frame coordinates: (√2·Re, √2·Im) per
/// half-lattice mode, so the Euclidean length equals ‖f‖_{H^s}.
pub fn field_to_frame(f: &SpectralField, s: f64) -> Result<DVector<f64>> {
    if f.rank() != Rank::Scalar {
        return Err(Error::Shape("frame coordinates are defined for scalar fields".into()));
    }
    let grid = f.grid();
    let g = f.apply_lambda(s);
    let mut x = DVector::zeros(frame_dim(grid));
    for (i, k) in grid.half_lattice().enumerate() {
        let c = g.coeff(0, k);
        x[2 * i] = std::f64::consts::SQRT_2 * c.re;
        x[2 * i + 1] = std::f64::consts::SQRT_2 * c.im;
    }
    Ok(x)
}

/// Inverse of [`field_to_frame`]: rebuilds the Hermitian-symmetric field
/// from frame coordinates and removes the Λ^s conjugation.
pub fn frame_to_field(x: &DVector<f64>, grid: SpectralGrid, s: f64) -> Result<SpectralField> {
    if x.len() != frame_dim(grid) {
        return Err(Error::Shape(format!(
            "frame vector has length {}, the grid needs {}",
            x.len(),
            frame_dim(grid)
        )));
    }
    let mut g = SpectralField::zero_scalar(grid);
    for (i, k) in grid.half_lattice().enumerate() {
        let c = Complex64::new(x[2 * i], x[2 * i + 1]) / std::f64::consts::SQRT_2;
        g.add_mode_pair(0, k, c);
    }
    Ok(g.apply_lambda(-s))
}

/// Weight table turning frame-coordinate lengths (taken in the `frame_s`
/// conjugation) into H^{target_s} norms: |k|^{target_s − frame_s} on both
/// coordinates of each mode.
pub fn sobolev_frame_weights(grid: SpectralGrid, frame_s: f64, target_s: f64) -> DVector<f64> {
    let mut w = DVector::zeros(frame_dim(grid));
    for (i, (k1, k2)) in grid.half_lattice().enumerate() {
        let knorm = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let weight = knorm.powf(target_s - frame_s);
        w[2 * i] = weight;
        w[2 * i + 1] = weight;
    }
    w
}

/// PDE adapter: records one unit of the velocity path per step, builds the
/// unit propagator, and carries frame vectors across it through the Λ^s
/// conjugation. Linearity of the propagator is spot-checked on the first
/// step and every 1000th thereafter.
pub struct PdeCocycle<'a> {
    model: &'a mut dyn FlowModel,
    family: TransportFamily,
    s: f64,
    dt: Option<f64>,
    grid: SpectralGrid,
    steps_done: u64,
    last_halvings: u32,
    last_dt: f64,
}

impl<'a> PdeCocycle<'a> {
    pub fn new(
        model: &'a mut dyn FlowModel,
        family: TransportFamily,
        norm: NormSpec,
    ) -> Result<Self> {
        Self::build(model, family, norm, None)
    }

    /// Same, with a caller-imposed substep (still CFL-checked per unit).
    pub fn with_dt(
        model: &'a mut dyn FlowModel,
        family: TransportFamily,
        norm: NormSpec,
        dt: f64,
    ) -> Result<Self> {
        Self::build(model, family, norm, Some(dt))
    }

    fn build(
        model: &'a mut dyn FlowModel,
        family: TransportFamily,
        norm: NormSpec,
        dt: Option<f64>,
    ) -> Result<Self> {
        if !(family.diffusivity() > 0.0) {
            return Err(Error::Config("diffusivity must be positive".into()));
        }
        let grid = model.grid();
        Ok(PdeCocycle {
            model,
            family,
            s: norm.s(),
            dt,
            grid,
            steps_done: 0,
            last_halvings: 0,
            last_dt: 0.0,
        })
    }

    pub fn grid(&self) -> SpectralGrid {
        self.grid
    }

    /// Substep halvings forced by the CFL guard on the most recent unit.
    pub fn last_halvings(&self) -> u32 {
        self.last_halvings
    }

    /// Substep actually used on the most recent unit (0 before any step).
    pub fn last_dt(&self) -> f64 {
        self.last_dt
    }

    pub fn vector_from_field(&self, f: &SpectralField) -> Result<DVector<f64>> {
        field_to_frame(f, self.s)
    }

    pub fn field_from_vector(&self, x: &DVector<f64>) -> Result<SpectralField> {
        frame_to_field(x, self.grid, self.s)
    }

    fn carry(&self, unit: &UnitPropagator, x: &DVector<f64>) -> Result<DVector<f64>> {
        let f = frame_to_field(x, self.grid, self.s)?;
        let g = unit.apply(&f)?;
        field_to_frame(&g, self.s)
    }
}

impl BlockCocycle for PdeCocycle<'_> {
    fn dim(&self) -> usize {
        frame_dim(self.grid)
    }

    fn step(&mut self, block: &mut [DVector<f64>]) -> Result<()> {
        let path = record_unit_path(self.model)?;
        let unit = match self.dt {
            None => self.family.prepare(&path)?,
            Some(dt) => self.family.prepare_with_dt(&path, dt)?,
        };
        self.last_halvings = unit.halvings();
        self.last_dt = unit.dt();
        let probe = if self.steps_done % 1000 == 0 && !block.is_empty() {
            if block.len() >= 2 {
                Some((block[0].clone() + &block[1], true))
            } else {
                Some((block[0].clone() * 2.0, false))
            }
        } else {
            None
        };
        for x in block.iter_mut() {
            *x = self.carry(&unit, x)?;
        }
        if let Some((combo, superposed)) = probe {
            let image = self.carry(&unit, &combo)?;
            let expected = if superposed {
                block[0].clone() + &block[1]
            } else {
                block[0].clone() * 2.0
            };
            let residual = (&image - &expected).norm();
            if residual > 1e-8 * expected.norm().max(1e-300) {
                return Err(Error::Numeric(format!(
                    "propagator failed the linearity spot-check (relative residual {:.2e})",
                    residual / expected.norm().max(1e-300)
                )));
            }
        }
        self.steps_done += 1;
        Ok(())
    }
}

/// Mean and block-averaged standard error of `series[skip..]`, using ≈√m
/// blocks. Fewer than two blocks yields stderr 0.
fn window_stats(series: &[f64], skip: usize) -> (f64, f64) {
    let skip = skip.min(series.len().saturating_sub(1));
    let window = &series[skip..];
    let m = window.len();
    let mean = window.iter().sum::<f64>() / m as f64;
    let blocks = (m as f64).sqrt().floor() as usize;
    if blocks < 2 {
        return (mean, 0.0);
    }
    let size = m / blocks;
    let mut block_means = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let chunk = &window[b * size..(b + 1) * size];
        block_means.push(chunk.iter().sum::<f64>() / size as f64);
    }
    let bm = block_means.iter().sum::<f64>() / blocks as f64;
    let var = block_means.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (blocks - 1) as f64;
    (mean, (var / blocks as f64).sqrt())
}

fn weighted_norm(v: &DVector<f64>, w: Option<&DVector<f64>>) -> f64 {
    match w {
        None => v.norm(),
        Some(w) => v
            .iter()
            .zip(w.iter())
            .map(|(x, wi)| (x * wi) * (x * wi))
            .sum::<f64>()
            .sqrt(),
    }
}

/// Top Lyapunov exponent along a single trajectory, measured
/// simultaneously in several norms given by per-coordinate weight tables
/// (`None` = the frame norm itself). One entry per table; the underlying
/// trajectory — and hence the trajectory noise — is shared, which is what
/// makes cross-norm differences of the estimates meaningful.
///
/// The per-step increments in each norm telescope: their sum over n steps
/// equals log(‖Aⁿv₀‖_w / ‖v₀‖_w) exactly, because the Euclidean
/// renormalization constants cancel in every norm.
pub fn top_exponent_weighted(
    c: &mut dyn BlockCocycle,
    v0: &DVector<f64>,
    steps: usize,
    weights: &[Option<&DVector<f64>>],
) -> Result<Vec<ExponentEstimate>> {
    top_exponent_weighted_tracked(c, v0, steps, weights).map(|(est, _)| est)
}

/// Same as [`top_exponent_weighted`], additionally returning the final
/// renormalized direction (unit Euclidean length in the engine frame), so
/// callers can checkpoint the state the trajectory converged to.
pub fn top_exponent_weighted_tracked(
    c: &mut dyn BlockCocycle,
    v0: &DVector<f64>,
    steps: usize,
    weights: &[Option<&DVector<f64>>],
) -> Result<(Vec<ExponentEstimate>, DVector<f64>)> {
    if steps < 50 {
        return Err(Error::Config(format!(
            "the exponent estimator needs at least 50 steps (got {steps})"
        )));
    }
    if v0.len() != c.dim() {
        return Err(Error::Shape("initial vector has the wrong dimension".into()));
    }
    if weights.is_empty() {
        return Err(Error::Config("at least one norm table is required".into()));
    }
    for w in weights.iter().flatten() {
        if w.len() != c.dim() {
            return Err(Error::Shape("norm weight table has the wrong dimension".into()));
        }
        if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Config("norm weights must be positive and finite".into()));
        }
    }
    let scale = v0.norm();
    if scale == 0.0 {
        return Err(Error::Config("initial vector must be nonzero".into()));
    }
    let mut v = v0 / scale;
    let mut prev: Vec<f64> = weights.iter().map(|w| weighted_norm(&v, *w)).collect();
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); weights.len()];
    let mut underflow = false;
    for _ in 0..steps {
        c.step(std::slice::from_mut(&mut v))?;
        let r = v.norm();
        if r == 0.0 {
            underflow = true;
            break;
        }
        for (j, w) in weights.iter().enumerate() {
            let nw = weighted_norm(&v, *w);
            series[j].push(nw.ln() - prev[j].ln());
            prev[j] = nw / r;
        }
        v /= r;
    }
    if underflow {
        let est = series
            .into_iter()
            .map(|s| ExponentEstimate {
                value: Exponent::MinusInfinity,
                stderr: 0.0,
                series: s,
            })
            .collect();
        return Ok((est, v));
    }
    let est = series
        .into_iter()
        .map(|s| {
            let (mean, stderr) = window_stats(&s, steps / 2);
            ExponentEstimate {
                value: Exponent::Finite(mean),
                stderr,
                series: s,
            }
        })
        .collect();
    Ok((est, v))
}

/// Top Lyapunov exponent in the frame norm: mean slope over the last half
/// of the log growth series, standard error from √n block averaging.
pub fn top_exponent(
    c: &mut dyn BlockCocycle,
    v0: &DVector<f64>,
    steps: usize,
) -> Result<ExponentEstimate> {
    Ok(top_exponent_weighted(c, v0, steps, &[None])?.remove(0))
}

/// Single-pass modified Gram–Schmidt. Returns the upper-triangular factor;
/// a zero diagonal entry marks a collapsed column (left as the zero
/// vector for the caller to handle).
fn mgs_factor(block: &mut [DVector<f64>]) -> DMatrix<f64> {
    let k = block.len();
    let mut r = DMatrix::zeros(k, k);
    for j in 0..k {
        for i in 0..j {
            let proj = block[i].dot(&block[j]);
            r[(i, j)] = proj;
            let qi = block[i].clone();
            block[j].axpy(-proj, &qi, 1.0);
        }
        let njj = block[j].norm();
        r[(j, j)] = njj;
        if njj > 0.0 {
            block[j] /= njj;
        }
    }
    r
}

fn random_unit_block(dim: usize, k: usize, rng: &mut ChaCha12Rng) -> Vec<DVector<f64>> {
    use rand::Rng;
    let mut block: Vec<DVector<f64>> = (0..k)
        .map(|_| DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    mgs_factor(&mut block);
    block
}

/// Options for [`leading_spectrum`].
#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    /// Gap below which adjacent exponents merge into one multiplicity
    /// cluster; ties break toward merging since estimation cannot certify
    /// exact multiplicities.
    pub cluster_gap: f64,
    /// Fraction of the series discarded before averaging.
    pub burn_in: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { cluster_gap: 0.02, burn_in: 0.2 }
    }
}

/// The estimated leading spectrum with its bookkeeping. Serializes to
/// JSON with this exact field order; identical (seed, config) inputs
/// produce identical bytes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovRecord {
    /// Label of the norm the spectrum was measured in.
    pub norm: String,
    pub seed: u64,
    pub steps: usize,
    pub block_dim: usize,
    /// χ_1 ≥ χ_2 ≥ … with multiplicity.
    pub lambda: Vec<Exponent>,
    pub stderr: Vec<f64>,
    /// Cluster sizes d_i (one per distinct exponent, −∞ its own cluster).
    pub multiplicities: Vec<usize>,
    /// Cumulative cluster dimensions M_i.
    pub cumulative_dims: Vec<usize>,
    /// Partial sums Σ_k = χ_1 + … + χ_k.
    pub sigma: Vec<Exponent>,
    /// Per-exponent log growth series (sorted order; collapsed columns
    /// truncate at the collapse step).
    pub series: Vec<Vec<f64>>,
    /// Running 1/n·Σ of the top series.
    pub running_slope: Vec<f64>,
    /// Mean over the last quarter minus the fitted value, per exponent.
    pub last_quarter_drift: Vec<f64>,
    /// Final orthonormal block in frame coordinates (sorted order): the
    /// current leading-subspace basis.
    pub filtration_basis: Vec<Vec<f64>>,
}

impl LyapunovRecord {
    /// Partial-sum consistency and concavity, as built: Σ_k matches the
    /// cumulative sums of lambda exactly and the increments never grow.
    pub fn check_partial_sums(&self, tol: f64) -> bool {
        let mut acc = 0.0;
        let mut finite = true;
        for (k, l) in self.lambda.iter().enumerate() {
            match (l, &self.sigma[k]) {
                (Exponent::Finite(x), Exponent::Finite(s)) if finite => {
                    acc += x;
                    if (acc - s).abs() > tol {
                        return false;
                    }
                }
                (Exponent::MinusInfinity, Exponent::MinusInfinity) => finite = false,
                (Exponent::Finite(_), Exponent::MinusInfinity) => return false,
                _ => {
                    if finite {
                        return false;
                    }
                }
            }
        }
        for w in self.lambda.windows(2) {
            match (w[0], w[1]) {
                (Exponent::Finite(a), Exponent::Finite(b)) => {
                    if b > a + tol {
                        return false;
                    }
                }
                (Exponent::MinusInfinity, Exponent::Finite(_)) => return false,
                _ => {}
            }
        }
        true
    }
}

/// Leading k Lyapunov exponents by block iteration: one step map per
/// iteration applied to an orthonormal block, per-step re-orthonormalization
/// in the frame inner product, exponents from the windowed means of the
/// log diagonal factors, multiplicities by gap clustering.
pub fn leading_spectrum(
    c: &mut dyn BlockCocycle,
    k: usize,
    steps: usize,
    norm_tag: &str,
    seed: u64,
    rng: &mut ChaCha12Rng,
    opts: &SpectrumOptions,
) -> Result<LyapunovRecord> {
    if k == 0 || k > c.dim() {
        return Err(Error::Config(format!(
            "block dimension must be between 1 and the cocycle dimension (got {k})"
        )));
    }
    if steps < 10 {
        return Err(Error::Config("the spectrum estimator needs at least 10 steps".into()));
    }
    if !(0.0..1.0).contains(&opts.burn_in) || !(opts.cluster_gap >= 0.0) {
        return Err(Error::Config("burn-in must lie in [0,1) and the cluster gap must be ≥ 0".into()));
    }
    let dim = c.dim();
    let mut block = random_unit_block(dim, k, rng);
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); k];
    let mut collapsed: Vec<bool> = vec![false; k];
    for _ in 0..steps {
        c.step(&mut block)?;
        let r = mgs_factor(&mut block);
        let mut refresh = false;
        for j in 0..k {
            let rjj = r[(j, j)];
            if rjj == 0.0 {
                collapsed[j] = true;
                refresh = true;
            } else if !collapsed[j] {
                series[j].push(rjj.ln());
            }
        }
        if refresh {
            // Keep the iteration well-posed: collapsed directions get a
            // fresh random vector orthonormalized against the block. Their
            // exponents stay −∞; the refresh only protects the others.
            use rand::Rng;
            for j in 0..k {
                if block[j].norm() == 0.0 {
                    block[j] = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                }
            }
            mgs_factor(&mut block);
        }
    }
    let skip = ((steps as f64) * opts.burn_in).ceil() as usize;
    struct Column {
        value: Exponent,
        stderr: f64,
        drift: f64,
        series: Vec<f64>,
        basis: Vec<f64>,
    }
    let mut columns: Vec<Column> = Vec::with_capacity(k);
    for j in 0..k {
        let s = std::mem::take(&mut series[j]);
        if collapsed[j] || s.is_empty() {
            columns.push(Column {
                value: Exponent::MinusInfinity,
                stderr: 0.0,
                drift: 0.0,
                series: s,
                basis: block[j].iter().cloned().collect(),
            });
        } else {
            let (mean, stderr) = window_stats(&s, skip);
            let (quarter_mean, _) = window_stats(&s, s.len() - (s.len() / 4).max(1));
            columns.push(Column {
                value: Exponent::Finite(mean),
                stderr,
                drift: quarter_mean - mean,
                series: s,
                basis: block[j].iter().cloned().collect(),
            });
        }
    }
    columns.sort_by(|a, b| match (a.value, b.value) {
        (Exponent::Finite(x), Exponent::Finite(y)) => y.partial_cmp(&x).unwrap(),
        (Exponent::Finite(_), Exponent::MinusInfinity) => std::cmp::Ordering::Less,
        (Exponent::MinusInfinity, Exponent::Finite(_)) => std::cmp::Ordering::Greater,
        (Exponent::MinusInfinity, Exponent::MinusInfinity) => std::cmp::Ordering::Equal,
    });
    let lambda: Vec<Exponent> = columns.iter().map(|c| c.value).collect();
    let mut multiplicities = Vec::new();
    let mut cumulative_dims = Vec::new();
    let mut cursor = 0usize;
    while cursor < k {
        let mut size = 1usize;
        while cursor + size < k {
            let same = match (lambda[cursor + size - 1], lambda[cursor + size]) {
                (Exponent::Finite(a), Exponent::Finite(b)) => (a - b) <= opts.cluster_gap,
                (Exponent::MinusInfinity, Exponent::MinusInfinity) => true,
                _ => false,
            };
            if same {
                size += 1;
            } else {
                break;
            }
        }
        multiplicities.push(size);
        cumulative_dims.push(cursor + size);
        cursor += size;
    }
    let mut sigma = Vec::with_capacity(k);
    let mut acc = 0.0;
    let mut acc_finite = true;
    for l in &lambda {
        match l {
            Exponent::Finite(x) if acc_finite => {
                acc += x;
                sigma.push(Exponent::Finite(acc));
            }
            _ => {
                acc_finite = false;
                sigma.push(Exponent::MinusInfinity);
            }
        }
    }
    let running_slope = {
        let top = &columns[0].series;
        let mut running = Vec::with_capacity(top.len());
        let mut sum = 0.0;
        for (n, a) in top.iter().enumerate() {
            sum += a;
            running.push(sum / (n + 1) as f64);
        }
        running
    };
    Ok(LyapunovRecord {
        norm: norm_tag.to_string(),
        seed,
        steps,
        block_dim: k,
        lambda,
        stderr: columns.iter().map(|c| c.stderr).collect(),
        multiplicities,
        cumulative_dims,
        sigma,
        series: columns.iter().map(|c| c.series.clone()).collect(),
        running_slope,
        last_quarter_drift: columns.iter().map(|c| c.drift).collect(),
        filtration_basis: columns.iter().map(|c| c.basis.clone()).collect(),
    })
}

/// Volume growth rate Σ_k of the cocycle on the subspace spanned by the
/// columns of `e0`: per-step frame-orthonormalization makes the log
/// determinants telescope, and the estimate is the full-series mean
/// (1/n × accumulated log det).
pub fn volume_growth(
    c: &mut dyn BlockCocycle,
    e0: &DMatrix<f64>,
    steps: usize,
) -> Result<ExponentEstimate> {
    if e0.nrows() != c.dim() || e0.ncols() == 0 || e0.ncols() > c.dim() {
        return Err(Error::Shape("initial subspace basis has the wrong shape".into()));
    }
    if steps == 0 {
        return Err(Error::Config("volume growth needs at least one step".into()));
    }
    let k = e0.ncols();
    let mut block: Vec<DVector<f64>> = (0..k).map(|j| e0.column(j).into_owned()).collect();
    let r0 = mgs_factor(&mut block);
    if (0..k).any(|j| r0[(j, j)] == 0.0) {
        return Err(Error::Shape("initial subspace basis is rank deficient".into()));
    }
    let mut series = Vec::with_capacity(steps);
    for _ in 0..steps {
        c.step(&mut block)?;
        let r = mgs_factor(&mut block);
        let mut log_det = 0.0;
        let mut collapse = false;
        for j in 0..k {
            let rjj = r[(j, j)];
            if rjj == 0.0 {
                collapse = true;
            } else {
                log_det += rjj.ln();
            }
        }
        if collapse {
            return Ok(ExponentEstimate {
                value: Exponent::MinusInfinity,
                stderr: 0.0,
                series,
            });
        }
        series.push(log_det);
    }
    let (mean, stderr) = window_stats(&series, 0);
    Ok(ExponentEstimate { value: Exponent::Finite(mean), stderr, series })
}

/// Quotient volume growth over a known invariant subspace F, plus the
/// transversality diagnostics for the pushforward of the complement.
#[derive(Clone, Debug)]
pub struct QuotientGrowth {
    pub estimate: ExponentEstimate,
    /// sin ∠_min(AⁿE, F) after each step.
    pub angle_series: Vec<f64>,
    /// Mean of (1/n)·log sin ∠_min over the last quarter; → 0 when the
    /// pushforward stays transverse to F.
    pub angle_slope: f64,
}

/// Growth rate of the quotient cocycle π_{E//F} A|_E for a matrix model
/// whose steps keep F invariant. E is the bounded complement of F; the
/// per-step quotient matrices compose to the projected n-step map, so
/// their log determinants accumulate the quotient volume growth Σ.
pub fn quotient_volume_growth(
    model: &mut dyn MatrixModel,
    f: &Subspace,
    steps: usize,
) -> Result<QuotientGrowth> {
    let n = model.dim();
    if f.ambient_dim() != n {
        return Err(Error::Shape("invariant subspace lives in a different space".into()));
    }
    if steps < 8 {
        return Err(Error::Config("quotient growth needs at least 8 steps".into()));
    }
    let complement = bounded_complement(f, &FiniteNorm::euclidean(n))?;
    let e = complement.subspace;
    let k = e.dim();
    let mut pushforward = e.orthonormal();
    let mut series = Vec::with_capacity(steps);
    let mut angle_series = Vec::with_capacity(steps);
    for _ in 0..steps {
        let a = model.sample_step();
        let qhat = quotient_step(&a, &e, &e, f, Some(f))?;
        let det = qhat.determinant();
        if det == 0.0 {
            let angle_slope = quarter_angle_slope(&angle_series);
            return Ok(QuotientGrowth {
                estimate: ExponentEstimate {
                    value: Exponent::MinusInfinity,
                    stderr: 0.0,
                    series,
                },
                angle_slope,
                angle_series,
            });
        }
        series.push(det.abs().ln());
        let mut cols: Vec<DVector<f64>> = (0..k).map(|j| {
            let av = &a * pushforward.column(j);
            av
        }).collect();
        let r = mgs_factor(&mut cols);
        if (0..k).any(|j| r[(j, j)] == 0.0) {
            return Err(Error::Numeric("pushforward of the complement collapsed".into()));
        }
        for (j, col) in cols.iter().enumerate() {
            pushforward.set_column(j, col);
        }
        let pushed = Subspace::new(pushforward.clone())?;
        angle_series.push(min_principal_angle_sin(&pushed, f, None));
    }
    let (mean, stderr) = window_stats(&series, 0);
    Ok(QuotientGrowth {
        estimate: ExponentEstimate { value: Exponent::Finite(mean), stderr, series },
        angle_slope: quarter_angle_slope(&angle_series),
        angle_series,
    })
}

fn quarter_angle_slope(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return 0.0;
    }
    let start = angles.len() - (angles.len() / 4).max(1);
    let window = &angles[start..];
    let sum: f64 = window
        .iter()
        .enumerate()
        .map(|(i, a)| a.max(1e-300).ln() / (start + i + 1) as f64)
        .sum();
    sum / window.len() as f64
}

/// Finite-horizon regularity functions on one trajectory. All values are
/// lower bounds of the true suprema: the horizon is finite and the
/// operator norms are probed on a finite-dimensional block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityEstimate {
    pub epsilon: f64,
    pub delta: f64,
    pub lambda1: f64,
    /// max_{n ≤ horizon} ‖Aⁿ‖·e^{−n(λ₁+ε)} — the transient-growth envelope.
    pub d_bar: f64,
    /// Worst-case lower-bound constant over sampled unit vectors with
    /// sin-angle weighting against the estimated slow subspace.
    pub d_under: f64,
    pub k_delta: f64,
    pub n_delta: Option<usize>,
    pub horizon: usize,
    pub probe_dim: usize,
    /// Finite-horizon suprema probed on a subspace: true values can only
    /// be larger.
    pub lower_bound: bool,
    pub inconclusive: bool,
}

impl RegularityEstimate {
    /// Pesin-set membership at level ℓ: max(D̄_ε, D_ε) ≤ ℓ.
    pub fn pesin_member(&self, ell: f64) -> bool {
        self.d_bar.max(self.d_under) <= ell
    }
}

/// Block probe carrying the rescaled triangular-product history
/// T_n = R_n···R_1 with A^n Q₀ = Q_n T_n, from which operator-norm lower
/// bounds and slow-subspace angles are read off.
struct GrowthProbe {
    block: Vec<DVector<f64>>,
    t: DMatrix<f64>,
    log_scale: f64,
    /// (T_n rescaled, accumulated log scale), entry 0 = (I, 0).
    history: Vec<(DMatrix<f64>, f64)>,
    /// ln r_11 per step: the top growth series.
    top_series: Vec<f64>,
}

impl GrowthProbe {
    fn new(dim: usize, b: usize, rng: &mut ChaCha12Rng) -> Self {
        let block = random_unit_block(dim, b, rng);
        GrowthProbe {
            block,
            t: DMatrix::identity(b, b),
            log_scale: 0.0,
            history: vec![(DMatrix::identity(b, b), 0.0)],
            top_series: Vec::new(),
        }
    }

    /// Re-orthonormalizes after the caller advanced the block one step and
    /// folds the triangular factor into the product history.
    fn record_step(&mut self) -> Result<()> {
        let r = mgs_factor(&mut self.block);
        let b = self.block.len();
        if (0..b).any(|j| r[(j, j)] == 0.0) {
            return Err(Error::Numeric(
                "probe block collapsed; regularity functions need an injective cocycle on the probe".into(),
            ));
        }
        self.top_series.push(r[(0, 0)].ln());
        self.t = &r * &self.t;
        let m = self.t.amax();
        if m == 0.0 {
            return Err(Error::Numeric("probe product collapsed".into()));
        }
        self.t /= m;
        self.log_scale += m.ln();
        self.history.push((self.t.clone(), self.log_scale));
        Ok(())
    }

    /// Windowed mean of the top growth series (last half).
    fn top_rate(&self) -> f64 {
        let (mean, _) = window_stats(&self.top_series, self.top_series.len() / 2);
        mean
    }

    /// max_n σ_max(T_n)·e^{ls_n − n·rate}: the D̄ envelope at λ+ε = rate.
    fn envelope(&self, rate: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (n, (t, ls)) in self.history.iter().enumerate() {
            let sigma = t.clone().singular_values()[0];
            let log_term = sigma.ln() + ls - n as f64 * rate;
            best = best.max(log_term);
        }
        best.exp()
    }

    /// sup over sampled unit probe vectors and n of
    /// e^{n·rate}·sin∠(v, F̂₂)/‖Aⁿv‖, with F̂₂ the span of the non-leading
    /// right-singular directions of the final product.
    fn angle_weighted_floor(
        &self,
        rate: f64,
        samples: usize,
        rng: &mut ChaCha12Rng,
    ) -> Result<f64> {
        use rand::Rng;
        let b = self.block.len();
        let (t_final, _) = self.history.last().expect("history is never empty");
        let svd = t_final.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let v_top = v_t.row(0).transpose();
        let mut candidates: Vec<DVector<f64>> = vec![v_top.clone()];
        for _ in 0..samples {
            let mut c = DVector::from_fn(b, |_, _| rng.sample::<f64, _>(StandardNormal));
            let n = c.norm();
            if n > 0.0 {
                c /= n;
                candidates.push(c);
            }
        }
        let mut best = f64::NEG_INFINITY;
        for c in &candidates {
            let sin_angle = c.dot(&v_top).abs();
            if sin_angle == 0.0 {
                continue;
            }
            for (n, (t, ls)) in self.history.iter().enumerate() {
                let image = t * c;
                let norm = image.norm();
                if norm == 0.0 {
                    return Err(Error::Numeric(
                        "probe image collapsed; the angle-weighted floor is unbounded".into(),
                    ));
                }
                let log_term = n as f64 * rate + sin_angle.ln() - (norm.ln() + ls);
                best = best.max(log_term);
            }
        }
        Ok(best.exp())
    }
}

/// Finite-horizon D̄_ε and D_ε on the trajectory the cocycle produces.
/// D̄_ε is the largest ratio of the probed n-step operator norm to
/// e^{n(λ₁+ε)}; D_ε weights sampled unit vectors by their sin-angle to the
/// estimated slow subspace. Both include the n = 0 term, so both are ≥ 1
/// when the probe spans a unit vector — and both are flagged lower bounds.
pub fn regularity_functions(
    c: &mut dyn BlockCocycle,
    epsilon: f64,
    lambda1_hat: f64,
    horizon: usize,
    probe_dim: usize,
    samples: usize,
    rng: &mut ChaCha12Rng,
) -> Result<RegularityEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    if horizon < 100 {
        return Err(Error::Config(format!(
            "regularity functions need a horizon of at least 100 steps (got {horizon})"
        )));
    }
    if probe_dim == 0 || probe_dim > c.dim() {
        return Err(Error::Config("probe dimension must be between 1 and the cocycle dimension".into()));
    }
    let mut probe = GrowthProbe::new(c.dim(), probe_dim, rng);
    for _ in 0..horizon {
        c.step(&mut probe.block)?;
        probe.record_step()?;
    }
    let d_bar = probe.envelope(lambda1_hat + epsilon);
    let d_under = probe.angle_weighted_floor(lambda1_hat - epsilon, samples.max(1), rng)?;
    Ok(RegularityEstimate {
        epsilon,
        delta: 0.0,
        lambda1: lambda1_hat,
        d_bar,
        d_under,
        k_delta: 1.0,
        n_delta: None,
        horizon,
        probe_dim,
        lower_bound: true,
        inconclusive: false,
    })
}

/// Scan of a per-step cross-norm series for violations of
/// ‖A_{Tⁿx}‖_{B→V} > e^{nδ}: the last violation time N_δ and
/// K_δ = 1 ∨ max_{i ≤ N_δ} of the series.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossNormScan {
    pub k_delta: f64,
    pub n_delta: Option<usize>,
    /// A violation at the final step means the horizon was too short to
    /// bracket N_δ.
    pub inconclusive: bool,
    pub cross_norms: Vec<f64>,
}

pub fn k_delta_from_series(cross_norms: &[f64], delta: f64) -> Result<CrossNormScan> {
    if !(delta > 0.0) {
        return Err(Error::Config("delta must be positive".into()));
    }
    if cross_norms.is_empty() {
        return Err(Error::Config("the cross-norm series is empty".into()));
    }
    if cross_norms.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Numeric("cross norms must be positive and finite".into()));
    }
    let mut n_delta = None;
    for (n, value) in cross_norms.iter().enumerate() {
        if *value > (n as f64 * delta).exp() {
            n_delta = Some(n);
        }
    }
    let k_delta = match n_delta {
        None => 1.0,
        Some(n) => cross_norms[..=n]
            .iter()
            .cloned()
            .fold(1.0f64, f64::max),
    };
    let inconclusive = n_delta == Some(cross_norms.len() - 1);
    Ok(CrossNormScan {
        k_delta,
        n_delta,
        inconclusive,
        cross_norms: cross_norms.to_vec(),
    })
}

/// The cross-norm comparison constant on one PDE path, together with the
/// two transient envelopes it links.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KDeltaReport {
    pub epsilon: f64,
    pub delta: f64,
    pub lambda1: f64,
    pub scan: CrossNormScan,
    /// D̄_ε measured in the stronger norm V = H^{s_v}.
    pub d_bar_v: f64,
    /// D̄_{ε+δ} measured in the base norm B = H^{s_b}.
    pub d_bar_b: f64,
    /// D̄_ε^V ≤ K_δ · D̄_{ε+δ}^B on this path.
    pub comparison_holds: bool,
    /// Set when any per-step operator-norm solve failed to converge.
    pub low_confidence: bool,
}

/// Measures the per-step cross norms ‖A_{Tⁿx}‖_{H^{s_b}→H^{s_v}} along one
/// velocity path, scans them for K_δ and N_δ, and verifies the transient
/// envelope comparison D̄_ε^V ≤ K_δ·D̄_{ε+δ}^B on the same path.
#[allow(clippy::too_many_arguments)]
pub fn k_delta_estimate(
    model: &mut dyn FlowModel,
    family: TransportFamily,
    s_b: f64,
    s_v: f64,
    epsilon: f64,
    delta: f64,
    horizon: usize,
    probe_dim: usize,
    rng: &mut ChaCha12Rng,
) -> Result<KDeltaReport> {
    NormSpec::new(s_b)?;
    NormSpec::new(s_v)?;
    if !(epsilon > 0.0) || !(delta > 0.0) {
        return Err(Error::Config("epsilon and delta must be positive".into()));
    }
    if horizon < 4 {
        return Err(Error::Config("the cross-norm scan needs a horizon of at least 4 steps".into()));
    }
    let grid = model.grid();
    let dim = frame_dim(grid);
    if probe_dim == 0 || probe_dim > dim {
        return Err(Error::Config("probe dimension must be between 1 and the frame dimension".into()));
    }
    let mut probe_b = GrowthProbe::new(dim, probe_dim, rng);
    let mut probe_v = GrowthProbe::new(dim, probe_dim, rng);
    let mut cross = Vec::with_capacity(horizon);
    let mut low_confidence = false;
    for _ in 0..horizon {
        let path = record_unit_path(model)?;
        let unit = family.prepare(&path)?;
        let norm = operator_norm(&[&unit], s_b, s_v, 20, rng)?;
        if !norm.converged {
            low_confidence = true;
        }
        cross.push(norm.value);
        for x in probe_b.block.iter_mut() {
            let f = frame_to_field(x, grid, s_b)?;
            *x = field_to_frame(&unit.apply(&f)?, s_b)?;
        }
        probe_b.record_step()?;
        for x in probe_v.block.iter_mut() {
            let f = frame_to_field(x, grid, s_v)?;
            *x = field_to_frame(&unit.apply(&f)?, s_v)?;
        }
        probe_v.record_step()?;
    }
    let lambda1 = probe_b.top_rate();
    let d_bar_b = probe_b.envelope(lambda1 + epsilon + delta);
    let d_bar_v = probe_v.envelope(lambda1 + epsilon);
    let scan = k_delta_from_series(&cross, delta)?;
    let comparison_holds = d_bar_v <= scan.k_delta * d_bar_b * (1.0 + 1e-9);
    Ok(KDeltaReport {
        epsilon,
        delta,
        lambda1,
        scan,
        d_bar_v,
        d_bar_b,
        comparison_holds,
        low_confidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{ShearRenewalFlow, SteadyFlow};
    use crate::matrices::{
        diagonal_birkhoff, straight_product_rates, BlockTriangularModel, ConstantMatrix,
        IidGaussianModel, TriangularModel,
    };
    use crate::rng::SeedStream;

    fn rng(label: &str, index: u64) -> ChaCha12Rng {
        SeedStream::new(0x4c59_4150).stream(label, index)
    }

    #[test]
    fn exponent_serializes_as_number_or_sentinel_string() {
        let finite = serde_json::to_string(&Exponent::Finite(0.5)).unwrap();
        assert_eq!(finite, "0.5");
        let inf = serde_json::to_string(&Exponent::MinusInfinity).unwrap();
        assert_eq!(inf, "\"-inf\"");
        let back: Exponent = serde_json::from_str(&inf).unwrap();
        assert!(back.is_minus_infinity());
        let back: Exponent = serde_json::from_str("0.5").unwrap();
        assert_eq!(back, Exponent::Finite(0.5));
    }

    #[test]
    fn diagonal_cocycle_top_exponent_is_exact() {
        let model = ConstantMatrix::diagonal(&[2.0, 0.5]).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let v0 = DVector::from_row_slice(&[1.0, 1.0]);
        let est = top_exponent(&mut c, &v0, 64).unwrap();
        let value = est.value.finite().unwrap();
        assert!((value - 2.0f64.ln()).abs() < 1e-12, "got {value}");
        assert!(est.stderr < 1e-12);
    }

    #[test]
    fn singular_map_reports_minus_infinity() {
        let model = ConstantMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let v0 = DVector::from_row_slice(&[0.0, 1.0]);
        let est = top_exponent(&mut c, &v0, 64).unwrap();
        assert!(est.value.is_minus_infinity());
    }

    #[test]
    fn quiescent_advection_diffusion_decays_at_kappa() {
        let grid = SpectralGrid::standard(8).unwrap();
        let mut flow = SteadyFlow::quiescent(grid);
        let kappa = 0.5;
        let mut c = PdeCocycle::new(
            &mut flow,
            TransportFamily::AdvectionDiffusion { kappa },
            NormSpec::l2(),
        )
        .unwrap();
        let mut lowest = SpectralField::zero_scalar(grid);
        lowest.add_mode_pair(0, (1, 0), Complex64::new(0.5, 0.0));
        let v0 = c.vector_from_field(&lowest).unwrap();
        let est = top_exponent(&mut c, &v0, 60).unwrap();
        let value = est.value.finite().unwrap();
        assert!((value + kappa).abs() < 1e-8, "got {value}");
    }

    #[test]
    fn gaussian_cocycle_matches_straight_product_oracle() {
        let steps = 4000;
        let model = IidGaussianModel::new(3, 1.0, rng("gauss", 0)).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let v0 = DVector::from_row_slice(&[0.3, -0.9, 0.5]);
        let est = top_exponent(&mut c, &v0, steps).unwrap();
        let mut oracle_model = IidGaussianModel::new(3, 1.0, rng("gauss", 1)).unwrap();
        let oracle = straight_product_rates(&mut oracle_model, steps).unwrap();
        let value = est.value.finite().unwrap();
        let tol = 3.0 * est.stderr.max(1e-3) * 2.0f64.sqrt();
        assert!(
            (value - oracle.top).abs() < tol,
            "estimate {value} vs oracle {} (tol {tol})",
            oracle.top
        );
    }

    #[test]
    fn multi_norm_series_share_the_trajectory() {
        let model = IidGaussianModel::new(3, 1.0, rng("multi", 0)).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let v0 = DVector::from_row_slice(&[1.0, 0.3, -0.2]);
        let ones = DVector::from_element(3, 1.0);
        let ests = top_exponent_weighted(&mut c, &v0, 64, &[None, Some(&ones)]).unwrap();
        assert_eq!(ests[0].series.len(), ests[1].series.len());
        for (a, b) in ests[0].series.iter().zip(ests[1].series.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn leading_spectrum_on_constant_diagonal_is_exact() {
        let model = ConstantMatrix::diagonal(&[2.0f64.exp(), 1.0f64.exp(), (-1.0f64).exp()]).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let record = leading_spectrum(
            &mut c,
            3,
            200,
            "euclidean",
            7,
            &mut rng("diag", 0),
            &SpectrumOptions::default(),
        )
        .unwrap();
        let expected = [2.0, 1.0, -1.0];
        for (l, e) in record.lambda.iter().zip(expected.iter()) {
            assert!((l.finite().unwrap() - e).abs() < 1e-10);
        }
        assert_eq!(record.multiplicities, vec![1, 1, 1]);
        assert_eq!(record.cumulative_dims, vec![1, 2, 3]);
        let sigma: Vec<f64> = record.sigma.iter().map(|s| s.finite().unwrap()).collect();
        assert!((sigma[0] - 2.0).abs() < 1e-10);
        assert!((sigma[1] - 3.0).abs() < 1e-10);
        assert!((sigma[2] - 2.0).abs() < 1e-10);
        assert!(record.check_partial_sums(1e-9));
    }

    #[test]
    fn leading_spectrum_matches_triangular_diagonal_birkhoff() {
        let steps = 10_000;
        let diag = vec![0.6, 0.0, -0.4];
        let model = TriangularModel::new(diag.clone(), 0.5, rng("tri", 0)).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let record = leading_spectrum(
            &mut c,
            3,
            steps,
            "euclidean",
            11,
            &mut rng("tri", 1),
            &SpectrumOptions::default(),
        )
        .unwrap();
        let mut oracle_model = TriangularModel::new(diag.clone(), 0.5, rng("tri", 0)).unwrap();
        let mut oracle = diagonal_birkhoff(&mut oracle_model, steps).unwrap();
        oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (l, a) in record.lambda.iter().zip(oracle.iter()) {
            assert!(
                (l.finite().unwrap() - a).abs() < 1e-2,
                "estimated {:?} vs oracle {a}",
                l
            );
        }
        assert!(record.check_partial_sums(1e-9));
    }

    #[test]
    fn rank_deficient_block_reports_trailing_minus_infinity() {
        let model = ConstantMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let record = leading_spectrum(
            &mut c,
            2,
            60,
            "euclidean",
            3,
            &mut rng("sing", 0),
            &SpectrumOptions::default(),
        )
        .unwrap();
        assert!((record.lambda[0].finite().unwrap()).abs() < 1e-10);
        assert!(record.lambda[1].is_minus_infinity());
        assert!(record.sigma[1].is_minus_infinity());
    }

    #[test]
    fn two_quadratic_norms_give_the_same_spectrum() {
        let steps = 10_000;
        let diag = vec![0.5, -0.1, -0.7];
        let make = || TriangularModel::new(diag.clone(), 0.4, rng("norms", 0)).unwrap();
        let mut euclid = MatrixCocycle::euclidean(make());
        let weights = DVector::from_row_slice(&[3.0, 0.2, 1.7]);
        let norm = FiniteNorm::quadratic(weights).unwrap();
        let mut weighted = MatrixCocycle::in_norm(make(), &norm).unwrap();
        let opts = SpectrumOptions::default();
        let r1 = leading_spectrum(&mut euclid, 3, steps, "euclidean", 5, &mut rng("norms", 1), &opts).unwrap();
        let r2 = leading_spectrum(&mut weighted, 3, steps, "weighted", 5, &mut rng("norms", 2), &opts).unwrap();
        for (a, b) in r1.lambda.iter().zip(r2.lambda.iter()) {
            assert!(
                (a.finite().unwrap() - b.finite().unwrap()).abs() < 1e-2,
                "spectra disagree across quadratic norms: {a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn volume_growth_on_constant_diagonal_is_exact() {
        let model = ConstantMatrix::diagonal(&[1.0f64.exp(), (-0.5f64).exp()]).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let e0 = DMatrix::identity(2, 2);
        let est = volume_growth(&mut c, &e0, 50).unwrap();
        assert!((est.value.finite().unwrap() - 0.5).abs() < 1e-12);
        let e_top = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let mut c = MatrixCocycle::euclidean(ConstantMatrix::diagonal(&[1.0f64.exp(), (-0.5f64).exp()]).unwrap());
        let est = volume_growth(&mut c, &e_top, 50).unwrap();
        assert!((est.value.finite().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn volume_growth_matches_spectrum_partial_sum() {
        let steps = 10_000;
        let make = |idx| IidGaussianModel::new(3, 1.0, rng("vol", idx)).unwrap();
        let mut c = MatrixCocycle::euclidean(make(0));
        let record = leading_spectrum(
            &mut c,
            3,
            steps,
            "euclidean",
            13,
            &mut rng("vol", 1),
            &SpectrumOptions::default(),
        )
        .unwrap();
        let sigma2 = record.sigma[1].finite().unwrap();
        let mut c = MatrixCocycle::euclidean(make(0));
        let e0 = DMatrix::from_fn(3, 2, |i, j| ((i * 3 + j) as f64 * 0.7).sin() + if i == j { 1.0 } else { 0.0 });
        let est = volume_growth(&mut c, &e0, steps).unwrap();
        let got = est.value.finite().unwrap();
        assert!(
            (got - sigma2).abs() < 1e-2,
            "volume growth {got} vs spectrum partial sum {sigma2}"
        );
    }

    #[test]
    fn quotient_growth_matches_fast_block_sum() {
        let steps = 10_000;
        let make = || {
            BlockTriangularModel::new(
                vec![0.5, 0.5],
                vec![-0.6, -1.0],
                0.3,
                0.5,
                rng("quot", 0),
            )
            .unwrap()
        };
        let mut model = make();
        let f = model.slow_subspace();
        let expected = model.fast_rate_sum();
        let growth = quotient_volume_growth(&mut model, &f, steps).unwrap();
        let got = growth.estimate.value.finite().unwrap();
        assert!((got - expected).abs() < 1e-2, "quotient rate {got} vs {expected}");
        assert!(growth.angle_slope.abs() < 1e-2, "angle slope {}", growth.angle_slope);

        // The quotient route and the generic-subspace route estimate the
        // same Σ_{M_1}.
        let mut c = MatrixCocycle::euclidean(make());
        let e0 = DMatrix::from_fn(4, 2, |i, j| ((i + 2 * j) as f64 * 0.9).cos() + if i == j { 1.0 } else { 0.0 });
        let est = volume_growth(&mut c, &e0, steps).unwrap();
        let generic = est.value.finite().unwrap();
        assert!((got - generic).abs() < 1e-2, "quotient {got} vs generic {generic}");
    }

    #[test]
    fn quotient_growth_on_block_diagonal_is_exact() {
        let mut model =
            BlockTriangularModel::new(vec![0.4], vec![-0.9], 0.0, 0.0, rng("quotd", 0)).unwrap();
        let f = model.slow_subspace();
        let growth = quotient_volume_growth(&mut model, &f, 64).unwrap();
        assert!((growth.estimate.value.finite().unwrap() - 0.4).abs() < 1e-12);
        for a in &growth.angle_series {
            assert!((a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn regularity_on_constant_diagonal_is_one() {
        let model = ConstantMatrix::diagonal(&[0.3f64.exp(), 0.1f64.exp()]).unwrap();
        let mut c = MatrixCocycle::euclidean(model);
        let est = regularity_functions(&mut c, 0.05, 0.3, 120, 2, 6, &mut rng("reg", 0)).unwrap();
        assert!((est.d_bar - 1.0).abs() < 1e-9, "d_bar {}", est.d_bar);
        assert!(est.d_under >= 1.0 - 1e-12);
        assert!(est.lower_bound);
        assert!(est.pesin_member(2.0));
    }

    #[test]
    fn regularity_envelope_is_monotone_in_epsilon() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 0.0, 0.9]);
        let make = || ConstantMatrix::new(a.clone()).unwrap();
        let mut c = MatrixCocycle::euclidean(make());
        let small = regularity_functions(&mut c, 0.05, 0.0, 150, 2, 6, &mut rng("mono", 0)).unwrap();
        let mut c = MatrixCocycle::euclidean(make());
        let large = regularity_functions(&mut c, 0.10, 0.0, 150, 2, 6, &mut rng("mono", 0)).unwrap();
        assert!(small.d_bar > 1.0, "transient growth should show up (d_bar {})", small.d_bar);
        assert!(large.d_bar <= small.d_bar + 1e-12);
        assert!(large.d_under <= small.d_under + 1e-12);
    }

    #[test]
    fn k_delta_scan_closed_forms() {
        let scan = k_delta_from_series(&[2.0; 8], 0.2).unwrap();
        assert_eq!(scan.n_delta, Some(3));
        assert!((scan.k_delta - 2.0).abs() < 1e-15);
        assert!(!scan.inconclusive);
        assert!((scan.n_delta.unwrap() as f64) <= 2.0f64.ln() / 0.2 + 1.0);

        let scan = k_delta_from_series(&[0.5; 6], 0.1).unwrap();
        assert_eq!(scan.n_delta, None);
        assert_eq!(scan.k_delta, 1.0);

        let scan = k_delta_from_series(&[10.0, 10.0, 10.0], 0.1).unwrap();
        assert!(scan.inconclusive);
    }

    #[test]
    fn quiescent_cross_norms_match_the_mode_scan() {
        let grid = SpectralGrid::standard(8).unwrap();
        let kappa = 0.02;
        let delta = 0.1;
        let scan_oracle = crate::reference::quiescent_norm_scan(grid, kappa, 0.0, 1.0);
        let mut flow = SteadyFlow::quiescent(grid);
        let report = k_delta_estimate(
            &mut flow,
            TransportFamily::AdvectionDiffusion { kappa },
            0.0,
            1.0,
            0.05,
            delta,
            14,
            2,
            &mut rng("kdelta", 0),
        )
        .unwrap();
        assert!((report.scan.k_delta - scan_oracle).abs() < 1e-6);
        let expected_n = (scan_oracle.ln() / delta).floor() as usize;
        assert_eq!(report.scan.n_delta, Some(expected_n));
        assert!(!report.scan.inconclusive);
        assert!(report.comparison_holds);
        assert!(!report.low_confidence);
    }

    #[test]
    fn spectrum_record_bytes_are_reproducible() {
        let run = || {
            let model = TriangularModel::new(vec![0.3, -0.2], 0.3, rng("repro", 0)).unwrap();
            let mut c = MatrixCocycle::euclidean(model);
            let record = leading_spectrum(
                &mut c,
                2,
                200,
                "euclidean",
                21,
                &mut rng("repro", 1),
                &SpectrumOptions::default(),
            )
            .unwrap();
            serde_json::to_vec(&record).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn pde_frame_roundtrip_is_isometric() {
        let grid = SpectralGrid::standard(8).unwrap();
        let f = SpectralField::random_scalar(grid, &mut rng("frame", 0), grid.k_max(), 1.5);
        for s in [-1.0, 0.0, 1.0] {
            let x = field_to_frame(&f, s).unwrap();
            let ns = NormSpec::new(s).unwrap();
            assert!((x.norm() - f.sobolev_norm(ns)).abs() < 1e-12);
            let back = frame_to_field(&x, grid, s).unwrap();
            for k in grid.half_lattice() {
                let diff = (back.coeff(0, k) - f.coeff(0, k)).norm();
                assert!(diff < 1e-12);
            }
        }
    }

    #[test]
    fn renewal_flow_spectra_agree_across_sobolev_norms() {
        let grid = SpectralGrid::standard(8).unwrap();
        let kappa = 0.2;
        let steps = 60;
        let mut estimates = Vec::new();
        for (i, s) in [-1.0, 0.0, 1.0].into_iter().enumerate() {
            let mut flow =
                ShearRenewalFlow::new(grid, 1.0, rng("renewal-flow", 100));
            let mut c = PdeCocycle::new(
                &mut flow,
                TransportFamily::AdvectionDiffusion { kappa },
                NormSpec::new(s).unwrap(),
            )
            .unwrap();
            let f0 = SpectralField::random_scalar(grid, &mut rng("renewal-v0", 200), grid.k_max(), 1.0);
            let v0 = c.vector_from_field(&f0).unwrap();
            let est = top_exponent(&mut c, &v0, steps).unwrap();
            estimates.push((i, est));
        }
        for i in 0..estimates.len() {
            for j in i + 1..estimates.len() {
                let (a, b) = (&estimates[i].1, &estimates[j].1);
                let (va, vb) = (a.value.finite().unwrap(), b.value.finite().unwrap());
                let tol = 3.0 * (a.stderr.hypot(b.stderr)).max(5e-3);
                assert!(
                    (va - vb).abs() < tol,
                    "norm pair ({i},{j}): {va} vs {vb}, tol {tol}"
                );
            }
        }
    }
}
