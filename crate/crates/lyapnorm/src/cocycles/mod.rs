//! Unit-time propagators for the two transport cocycles.
//!
//! Both systems evolve a mean-zero scalar on the dealiased band:
//!
//! * advection–diffusion: `d f/dt = -u . grad f + kappa Delta f`
//! * linearized vorticity dynamics about `u`:
//!   `d eta/dt = -u . grad eta - Delta u . grad Lambda^{-2} eta + nu Delta eta`
//!
//! The integrator is Strang splitting per substep: half a step of the exact
//! diffusion multiplier, one step of the cubic Taylor polynomial of the
//! frozen transport generator, then the second diffusion half.  The
//! transport polynomial `I + h A + h^2 A^2/2 + h^3 A^3/6` applied to the
//! skew-adjoint advection generator has `|R(i theta)| <= 1` exactly when
//! `theta <= sqrt(3)`, so under the CFL bound enforced here every substep
//! is an `L^2` contraction and the full unit operator satisfies
//! `||S||_{L^2} <= e^{-kappa}` structurally, not just asymptotically.
//!
//! Velocities are frozen per solver substep at the snapshot covering the
//! substep's start time, and the adjoint propagator replays the same
//! snapshots in reverse with the adjoint generator, making the duality
//! `<S f, g> = <f, S* g>` exact up to roundoff.
//!
//! All step sizes are dyadic (`2^-m`), so time accounting is exact in
//! binary floating point and solver runs are bit-reproducible.

use crate::error::{Error, Result};
use crate::flows::{dyadic_exponent, ticks_per_unit, FlowModel};
use crate::spectral::{
    heat_factor_table, NormSpec, PreparedVelocity, ProductBand, Rank, SpectralField, SpectralGrid,
};
use rand::Rng;

/// Default solver substep.
pub const DEFAULT_DT: f64 = 1.0 / 256.0;

/// Advective rotation per substep allowed by the planner; the cubic
/// transport polynomial is neutrally stable up to `sqrt(3) ~ 1.732`.
pub const CFL_LIMIT: f64 = 1.5;

const MAX_HALVINGS: u32 = 16;

/// One unit interval's worth of velocity snapshots, one per flow tick.
/// During `[t0 + i*tick, t0 + (i+1)*tick)` the velocity is `snaps[i]`.
#[derive(Clone)]
pub struct VelocityPath {
    tick: f64,
    snaps: Vec<SpectralField>,
}

impl VelocityPath {
    pub fn from_snapshots(tick: f64, snaps: Vec<SpectralField>) -> Result<Self> {
        let per_unit = ticks_per_unit(tick)?;
        if snaps.len() != per_unit {
            return Err(Error::Shape(format!(
                "a unit path at tick {tick} needs {per_unit} snapshots, got {}",
                snaps.len()
            )));
        }
        let grid = snaps[0].grid();
        for s in &snaps {
            if s.rank() != Rank::Vector || s.grid() != grid {
                return Err(Error::Shape(
                    "velocity snapshots must be vector fields on a common grid".into(),
                ));
            }
        }
        Ok(Self { tick, snaps })
    }

    /// A frozen (time-independent) unit path.
    pub fn frozen(u: SpectralField) -> Result<Self> {
        Self::from_snapshots(1.0, vec![u])
    }

    pub fn tick(&self) -> f64 {
        self.tick
    }

    pub fn snapshots(&self) -> &[SpectralField] {
        &self.snaps
    }

    pub fn grid(&self) -> SpectralGrid {
        self.snaps[0].grid()
    }
}

/// Records the next unit interval of a flow, advancing the model by one.
pub fn record_unit_path(model: &mut dyn FlowModel) -> Result<VelocityPath> {
    let tick = model.native_tick();
    let per_unit = ticks_per_unit(tick)?;
    let mut snaps = Vec::with_capacity(per_unit);
    for _ in 0..per_unit {
        snaps.push(model.velocity().clone());
        model.advance_tick()?;
    }
    VelocityPath::from_snapshots(tick, snaps)
}

/// Scalar advection–diffusion cocycle parameters.
#[derive(Clone, Copy, Debug)]
pub struct AdCocycle {
    kappa: f64,
    dt0: f64,
}

impl AdCocycle {
    pub fn new(kappa: f64) -> Result<Self> {
        Self::with_dt(kappa, DEFAULT_DT)
    }

    pub fn with_dt(kappa: f64, dt0: f64) -> Result<Self> {
        check_diffusivity(kappa)?;
        check_dt(dt0)?;
        Ok(Self { kappa, dt0 })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Plans the substep and precomputes everything needed to propagate
    /// scalars across this unit interval.
    pub fn prepare(&self, path: &VelocityPath) -> Result<UnitPropagator> {
        UnitPropagator::build(path, self.kappa, self.dt0, false, true)
    }

    /// Same, with a caller-imposed substep (still CFL-checked).
    pub fn prepare_with_dt(&self, path: &VelocityPath, dt: f64) -> Result<UnitPropagator> {
        check_dt(dt)?;
        UnitPropagator::build(path, self.kappa, dt, false, false)
    }
}

/// Linearized Navier–Stokes (vorticity form) cocycle parameters.
#[derive(Clone, Copy, Debug)]
pub struct LnsCocycle {
    nu: f64,
    dt0: f64,
}

impl LnsCocycle {
    pub fn new(nu: f64) -> Result<Self> {
        Self::with_dt(nu, DEFAULT_DT)
    }

    pub fn with_dt(nu: f64, dt0: f64) -> Result<Self> {
        check_diffusivity(nu)?;
        check_dt(dt0)?;
        Ok(Self { nu, dt0 })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn prepare(&self, path: &VelocityPath) -> Result<UnitPropagator> {
        UnitPropagator::build(path, self.nu, self.dt0, true, true)
    }

    pub fn prepare_with_dt(&self, path: &VelocityPath, dt: f64) -> Result<UnitPropagator> {
        check_dt(dt)?;
        UnitPropagator::build(path, self.nu, dt, true, false)
    }
}

/// Which linearized equation a velocity path drives: passive scalar
/// advection–diffusion, or the linearized vorticity equation with its
/// nonlocal lower-order term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransportFamily {
    AdvectionDiffusion { kappa: f64 },
    LinearizedNse { nu: f64 },
}

impl TransportFamily {
    pub fn diffusivity(&self) -> f64 {
        match self {
            TransportFamily::AdvectionDiffusion { kappa } => *kappa,
            TransportFamily::LinearizedNse { nu } => *nu,
        }
    }

    pub fn prepare(&self, path: &VelocityPath) -> Result<UnitPropagator> {
        match self {
            TransportFamily::AdvectionDiffusion { kappa } => AdCocycle::new(*kappa)?.prepare(path),
            TransportFamily::LinearizedNse { nu } => LnsCocycle::new(*nu)?.prepare(path),
        }
    }

    pub fn prepare_with_dt(&self, path: &VelocityPath, dt: f64) -> Result<UnitPropagator> {
        match self {
            TransportFamily::AdvectionDiffusion { kappa } => {
                AdCocycle::with_dt(*kappa, dt)?.prepare_with_dt(path, dt)
            }
            TransportFamily::LinearizedNse { nu } => {
                LnsCocycle::with_dt(*nu, dt)?.prepare_with_dt(path, dt)
            }
        }
    }
}

fn check_diffusivity(value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Config(format!(
            "diffusivity must be positive (got {value}); the inviscid transport cocycle \
             is an isometry family without compactness and is out of scope"
        )));
    }
    Ok(())
}

fn check_dt(dt: f64) -> Result<()> {
    match dyadic_exponent(dt) {
        Some(m) if m <= 0 => Ok(()),
        _ => Err(Error::Config(format!(
            "solver substep {dt} must be a dyadic fraction 2^-m with m >= 0"
        ))),
    }
}

/// A fully planned one-unit propagator: velocity snapshots prepared for
/// products, diffusion tables baked, substep fixed.  Apply it to as many
/// initial scalars as needed; applications are independent and read-only.
pub struct UnitPropagator {
    grid: SpectralGrid,
    dt: f64,
    substeps: usize,
    steps_per_tick: usize,
    velocity: Vec<PreparedVelocity>,
    lower: Option<Vec<PreparedVelocity>>,
    half_heat: Vec<f64>,
    halvings: u32,
}

impl UnitPropagator {
    fn build(path: &VelocityPath, diffusivity: f64, dt0: f64, with_lower: bool, plan: bool) -> Result<Self> {
        let grid = path.grid();
        let velocity: Vec<PreparedVelocity> =
            path.snapshots().iter().map(PreparedVelocity::new).collect::<Result<_>>()?;
        let lower: Option<Vec<PreparedVelocity>> = if with_lower {
            Some(
                path.snapshots()
                    .iter()
                    .map(|u| PreparedVelocity::new(&u.laplacian()))
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        };

        // Largest advective frequency the transport stage can see, plus the
        // L^2 bound of the lower-order coupling (|grad Lambda^{-2}| <= 1 on
        // the band, so its rate is bounded by max |Delta u|).
        let k_rad = std::f64::consts::SQRT_2 * grid.k_max() as f64;
        let mut rate = velocity.iter().map(|p| p.vmax()).fold(0.0f64, f64::max) * k_rad;
        if let Some(lower) = &lower {
            rate += lower.iter().map(|p| p.vmax()).fold(0.0f64, f64::max);
        }

        let mut dt = dt0.min(path.tick());
        let mut halvings = 0;
        if plan {
            while dt * rate > CFL_LIMIT {
                if halvings == MAX_HALVINGS {
                    return Err(Error::Numeric(format!(
                        "transport stability needs more than {MAX_HALVINGS} substep halvings \
                         (advective rate {rate:.3e}); reduce the velocity amplitude or resolution"
                    )));
                }
                dt /= 2.0;
                halvings += 1;
            }
        } else if dt * rate > CFL_LIMIT {
            return Err(Error::Numeric(format!(
                "substep {dt} violates the transport stability bound for advective rate {rate:.3e}"
            )));
        }

        let steps_per_tick = (path.tick() / dt).round() as usize;
        let substeps = (1.0 / dt).round() as usize;
        let half_heat = heat_factor_table(grid, diffusivity, dt / 2.0);
        Ok(Self { grid, dt, substeps, steps_per_tick, velocity, lower, half_heat, halvings })
    }

    pub fn grid(&self) -> SpectralGrid {
        self.grid
    }

    /// The substep the planner settled on.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// How many times the requested substep was halved for stability.
    pub fn halvings(&self) -> u32 {
        self.halvings
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    fn check_input(&self, f: &SpectralField) -> Result<()> {
        if f.rank() != Rank::Scalar || f.grid() != self.grid {
            return Err(Error::Shape(
                "propagator input must be a scalar field on the path's grid".into(),
            ));
        }
        Ok(())
    }

    /// Frozen transport generator at snapshot `j`:
    /// `A f = -P(u . grad f) [- P(Delta u . grad Lambda^{-2} f)]`.
    fn generator(&self, j: usize, f: &SpectralField) -> Result<SpectralField> {
        let mut out = self.velocity[j].advect(f, ProductBand::Dealiased)?;
        out.scale(-1.0);
        if let Some(lower) = &self.lower {
            let stretched = lower[j].advect(&f.apply_lambda(-2.0), ProductBand::Dealiased)?;
            out.axpy(-1.0, &stretched);
        }
        Ok(out)
    }

    /// Adjoint generator: `A* g = +P(u . grad g) [+ Lambda^{-2} P(Delta u . grad g)]`.
    fn generator_adjoint(&self, j: usize, g: &SpectralField) -> Result<SpectralField> {
        let mut out = self.velocity[j].advect(g, ProductBand::Dealiased)?;
        if let Some(lower) = &self.lower {
            let stretched = lower[j].advect(g, ProductBand::Dealiased)?.apply_lambda(-2.0);
            out.axpy(1.0, &stretched);
        }
        Ok(out)
    }

    fn substep(&self, j: usize, f: &mut SpectralField, adjoint: bool) -> Result<()> {
        f.apply_mode_factors(&self.half_heat);
        let h = self.dt;
        let k1 = if adjoint { self.generator_adjoint(j, f)? } else { self.generator(j, f)? };
        let k2 = if adjoint { self.generator_adjoint(j, &k1)? } else { self.generator(j, &k1)? };
        let k3 = if adjoint { self.generator_adjoint(j, &k2)? } else { self.generator(j, &k2)? };
        f.axpy(h, &k1);
        f.axpy(h * h / 2.0, &k2);
        f.axpy(h * h * h / 6.0, &k3);
        f.apply_mode_factors(&self.half_heat);
        Ok(())
    }

    /// Propagates a scalar across the unit interval.
    pub fn apply(&self, f0: &SpectralField) -> Result<SpectralField> {
        self.check_input(f0)?;
        let mut f = f0.clone();
        f.truncate_to(self.grid.k_max());
        for i in 0..self.substeps {
            let j = i / self.steps_per_tick;
            self.substep(j, &mut f, false)?;
        }
        Ok(f)
    }

    /// Applies the exact adjoint of [`Self::apply`] (same substeps, reversed
    /// snapshot order, adjoint generator).
    pub fn apply_adjoint(&self, g0: &SpectralField) -> Result<SpectralField> {
        self.check_input(g0)?;
        let mut g = g0.clone();
        g.truncate_to(self.grid.k_max());
        for i in 0..self.substeps {
            let j = (self.substeps - 1 - i) / self.steps_per_tick;
            self.substep(j, &mut g, true)?;
        }
        Ok(g)
    }
}

/// Records one unit of the flow and pushes a scalar through the
/// advection–diffusion dynamics across it.
pub fn solve_advection_diffusion_unit(
    kappa: f64,
    model: &mut dyn FlowModel,
    f0: &SpectralField,
) -> Result<SpectralField> {
    let path = record_unit_path(model)?;
    AdCocycle::new(kappa)?.prepare(&path)?.apply(f0)
}

/// Records one unit of the flow and pushes a vorticity perturbation through
/// the linearized dynamics across it.
pub fn solve_linearized_nse_unit(
    nu: f64,
    model: &mut dyn FlowModel,
    eta0: &SpectralField,
) -> Result<SpectralField> {
    let path = record_unit_path(model)?;
    LnsCocycle::new(nu)?.prepare(&path)?.apply(eta0)
}

/// Result of a cross-norm operator-norm estimate.
#[derive(Clone, Copy, Debug)]
pub struct OperatorNorm {
    /// Estimated norm `||S||_{H^{s_in} -> H^{s_out}}`.
    pub value: f64,
    /// Relative change of the estimate in the final iteration.
    pub rel_change: f64,
    /// Whether the iteration stabilized to near roundoff.
    pub converged: bool,
}

/// Operator norm of the composite propagator `units[n-1] o ... o units[0]`
/// between homogeneous Sobolev spaces, by Krylov-accelerated power iteration
/// on `M* M` where `M = Lambda^{s_out} S Lambda^{-s_in}` acts on `L^2`.
///
/// Each iteration applies `M* M` once (a forward solve and an adjoint solve
/// in the `L^2`-isometric frame); the iterates are kept orthonormal and the
/// top Rayleigh–Ritz value of the accumulated Krylov subspace is reported.
/// Ritz values increase monotonically with the subspace, so the estimate is
/// a certified lower bound of the true norm throughout, and the Chebyshev
/// convergence of the subspace handles near-degenerate top singular values
/// that stall the plain single-vector recurrence.
pub fn operator_norm<R: Rng>(
    units: &[&UnitPropagator],
    s_in: f64,
    s_out: f64,
    iters: usize,
    rng: &mut R,
) -> Result<OperatorNorm> {
    if units.is_empty() {
        return Err(Error::Config("operator norm needs at least one unit propagator".into()));
    }
    let grid = units[0].grid();
    if units.iter().any(|u| u.grid() != grid) {
        return Err(Error::Shape("all propagators must share one grid".into()));
    }
    if iters < 2 {
        return Err(Error::Config("the norm iteration needs at least two steps".into()));
    }

    let forward = |v: &SpectralField| -> Result<SpectralField> {
        let mut x = v.apply_lambda(-s_in);
        for unit in units {
            x = unit.apply(&x)?;
        }
        Ok(x.apply_lambda(s_out))
    };
    let backward = |w: &SpectralField| -> Result<SpectralField> {
        let mut z = w.apply_lambda(s_out);
        for unit in units.iter().rev() {
            z = unit.apply_adjoint(&z)?;
        }
        Ok(z.apply_lambda(-s_in))
    };

    let l2 = NormSpec::l2();
    let inner = |a: &SpectralField, b: &SpectralField| a.sobolev_inner(b, l2);

    let mut v = SpectralField::random_scalar(grid, rng, grid.k_max(), 0.5);
    let norm0 = v.sobolev_norm(l2);
    if norm0 == 0.0 {
        return Err(Error::Numeric("degenerate random start vector".into()));
    }
    v.scale(1.0 / norm0);

    // Lanczos recurrence for the symmetric positive operator M*M, with full
    // reorthogonalization for numerical hygiene.
    let mut basis: Vec<SpectralField> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut sigma = 0.0f64;
    let mut rel_change = f64::INFINITY;
    let mut converged = false;

    for step in 0..iters {
        let vj = basis.last().expect("basis is never empty").clone();
        let mut w = backward(&forward(&vj)?)?;
        let alpha = inner(&w, &vj)?;
        alphas.push(alpha);
        w.axpy(-alpha, &vj);
        if step > 0 {
            let beta_prev = betas[step - 1];
            let prev = &basis[step - 1];
            w.axpy(-beta_prev, prev);
        }
        for b in &basis {
            let overlap = inner(&w, b)?;
            if overlap != 0.0 {
                w.axpy(-overlap, b);
            }
        }

        let lambda_top = top_ritz_value(&alphas, &betas);
        let new_sigma = lambda_top.max(0.0).sqrt();
        rel_change = if new_sigma > 0.0 {
            (new_sigma - sigma).abs() / new_sigma
        } else {
            0.0
        };
        sigma = new_sigma;
        if step > 0 && rel_change < 1e-12 {
            converged = true;
            break;
        }

        let beta = w.sobolev_norm(l2);
        if beta <= 1e-14 * sigma.max(1.0) {
            // Invariant subspace exhausted: the Ritz value is exact.
            converged = true;
            rel_change = 0.0;
            break;
        }
        betas.push(beta);
        w.scale(1.0 / beta);
        basis.push(w);
    }

    Ok(OperatorNorm { value: sigma, rel_change, converged: converged || rel_change < 1e-9 })
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with the given
/// diagonal and subdiagonal.
fn top_ritz_value(alphas: &[f64], betas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut t = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = alphas[i];
        if i + 1 < n {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
}
