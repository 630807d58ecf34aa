//! Fourier-side arithmetic for mean-zero fields on the 2-torus.
//!
//! Fields are truncated Fourier series Σ_{k≠0} f̂(k) e^{i k·x} over the square
//! band |k_i| ≤ N/2, stored as full complex arrays with Hermitian symmetry
//! f̂(−k) = conj f̂(k) enforced on construction (so the field is real-valued),
//! and with the k = 0 coefficient structurally zero (mean-zero). On this
//! representation the homogeneous Sobolev norms
//!
//! ```text
//! ‖f‖_{H^s} = ( Σ_{k≠0} |k|^{2s} |f̂(k)|² )^{1/2}
//! ```
//!
//! are exact finite sums, the fractional derivative Λ^s is the multiplier
//! |k|^s, and the heat semigroup is the multiplier e^{−c|k|²t}.
//!
//! Nonlinear products (the advection term u·∇f) are pseudospectral: transform
//! to a 2N×2N collocation grid, multiply pointwise, transform back, and zero
//! all modes beyond the dealias cutoff K_max = ⌊dealias_fraction·N/2⌋ (2/3
//! rule by default). The doubled grid makes the retained convolution exact, so
//! skew-adjointness ⟨f, u·∇f⟩ = 0 for divergence-free u holds to roundoff —
//! the discrete counterpart of the energy identities the solvers rely on.
//! Velocities with only a few active modes (the shear models) take an exact
//! sparse-convolution path instead of FFTs; both paths agree to 1e−12.
//!
//! Orientation convention: ∇^⊥ = (−∂_y, ∂_x), vorticity w = curl u
//! = ∂_x u_2 − ∂_y u_1, and the Biot–Savart law is u = ∇^⊥Δ^{−1}w, i.e.
//! û(k) = i(k_2, −k_1)|k|^{−2} ŵ(k), which makes curl ∘ biot_savart the
//! identity on mean-zero scalars.

mod fft;
pub mod checkpoint;

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Truncation parameters for fields on T².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralGrid {
    n: usize,
    dealias_fraction: f64,
}

impl SpectralGrid {
    /// Grid with N modes per dimension (wavenumbers |k_i| ≤ N/2) and an
    /// explicit dealias fraction.
    pub fn new(n: usize, dealias_fraction: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Config(format!(
                "grid N must be even and ≥ 8, got {n}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        let grid = SpectralGrid { n, dealias_fraction };
        if grid.k_max() < 2 {
            return Err(Error::Config(format!(
                "dealias cutoff ⌊{dealias_fraction}·{n}/2⌋ < 2; enlarge N or the fraction"
            )));
        }
        Ok(grid)
    }

    /// Grid with the standard 2/3-rule dealias fraction.
    pub fn standard(n: usize) -> Result<Self> {
        SpectralGrid::new(n, 2.0 / 3.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-width of the stored band: wavenumbers run over |k_i| ≤ h.
    pub fn half(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Modes per dimension in storage (2·(N/2) + 1).
    pub fn side(&self) -> usize {
        self.n + 1
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Dealias cutoff: products are truncated to |k_i| ≤ K_max.
    pub fn k_max(&self) -> usize {
        (self.dealias_fraction * self.n as f64 / 2.0).floor() as usize
    }

    /// Storage index of wavenumber k.
    fn idx(&self, k: (i64, i64)) -> usize {
        let h = self.half();
        debug_assert!(k.0.abs() <= h && k.1.abs() <= h);
        ((k.0 + h) as usize) * self.side() + (k.1 + h) as usize
    }

    /// Wavenumber stored at flat index `i` within one component.
    fn wavenumber(&self, i: usize) -> (i64, i64) {
        let h = self.half();
        ((i / self.side()) as i64 - h, (i % self.side()) as i64 - h)
    }

    /// All retained nonzero wavenumbers, in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let h = self.half();
        (-h..=h)
            .flat_map(move |k1| (-h..=h).map(move |k2| (k1, k2)))
            .filter(|&k| k != (0, 0))
    }

    /// Representatives of the conjugate pairs {k, −k}: k1 > 0, or k1 = 0 and
    /// k2 > 0. Iteration order is fixed (ascending k1, then k2) so random
    /// draws consumed along it are reproducible.
    pub fn half_lattice(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let h = self.half();
        (0..=h).flat_map(move |k1| {
            let lo = if k1 == 0 { 1 } else { -h };
            (lo..=h).map(move |k2| (k1, k2))
        })
    }
}

fn k_norm_sq(k: (i64, i64)) -> f64 {
    (k.0 * k.0 + k.1 * k.1) as f64
}

/// Sobolev order s of a homogeneous H^s norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    s: f64,
}

impl NormSpec {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Config(format!("Sobolev order must be finite, got {s}")));
        }
        Ok(NormSpec { s })
    }

    pub fn l2() -> Self {
        NormSpec { s: 0.0 }
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Scalar field or 2-component vector field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
}

impl Rank {
    pub fn components(&self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 2,
        }
    }
}

/// A real, mean-zero field on T² in truncated Fourier representation.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: SpectralGrid,
    rank: Rank,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(grid: SpectralGrid, rank: Rank) -> Self {
        let len = grid.side() * grid.side() * rank.components();
        SpectralField {
            grid,
            rank,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn zero_scalar(grid: SpectralGrid) -> Self {
        Self::zero(grid, Rank::Scalar)
    }

    pub fn zero_vector(grid: SpectralGrid) -> Self {
        Self::zero(grid, Rank::Vector)
    }

    pub fn grid(&self) -> SpectralGrid {
        self.grid
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    /// Raw coefficient storage (component-major, row-major k₁ then k₂).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn component_slice(&self, c: usize) -> &[Complex64] {
        let len = self.grid.side() * self.grid.side();
        &self.coeffs[c * len..(c + 1) * len]
    }

    fn component_slice_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.side() * self.grid.side();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    pub fn coeff(&self, component: usize, k: (i64, i64)) -> Complex64 {
        self.component_slice(component)[self.grid.idx(k)]
    }

    /// Add c·e^{i k·x} + conj(c)·e^{−i k·x} to one component (keeps the field
    /// real). Each conjugate pair is supplied once, via either representative.
    pub fn add_mode_pair(&mut self, component: usize, k: (i64, i64), c: Complex64) {
        assert!(k != (0, 0), "mean-zero fields have no k = 0 mode");
        let (i, j) = (self.grid.idx(k), self.grid.idx((-k.0, -k.1)));
        let slice = self.component_slice_mut(component);
        slice[i] += c;
        slice[j] += c.conj();
    }

    /// In-place scaling by a real factor.
    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// In-place y += a·x.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert_eq!(self.grid, x.grid);
        debug_assert_eq!(self.rank, x.rank);
        for (y, xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += a * xv;
        }
    }

    /// Multiply every mode of every component by a real per-mode factor table
    /// (indexed like one component's storage). Used for diffusion multipliers.
    pub fn apply_mode_factors(&mut self, factors: &[f64]) {
        let len = self.grid.side() * self.grid.side();
        assert_eq!(factors.len(), len, "factor table must cover one component");
        for comp in 0..self.rank.components() {
            for (c, &f) in self.component_slice_mut(comp).iter_mut().zip(factors) {
                *c *= f;
            }
        }
    }

    /// Homogeneous Sobolev norm (Σ |k|^{2s} |f̂(k)|²)^{1/2}, all components.
    pub fn sobolev_norm(&self, ns: NormSpec) -> f64 {
        self.sobolev_inner(self, ns)
            .expect("same field, same grid")
            .max(0.0)
            .sqrt()
    }

    /// Homogeneous Sobolev inner product Σ |k|^{2s} f̂(k) conj(ĝ(k)) (real by
    /// Hermitian symmetry; the real part is returned).
    pub fn sobolev_inner(&self, other: &SpectralField, ns: NormSpec) -> Result<f64> {
        if self.grid != other.grid || self.rank != other.rank {
            return Err(Error::Shape(
                "inner product requires matching grids and ranks".into(),
            ));
        }
        let s = ns.s();
        let side = self.grid.side();
        let mut acc = 0.0;
        for comp in 0..self.rank.components() {
            let a = self.component_slice(comp);
            let b = other.component_slice(comp);
            for i in 0..side * side {
                let k = self.grid.wavenumber(i);
                if k == (0, 0) {
                    continue;
                }
                let w = if s == 0.0 { 1.0 } else { k_norm_sq(k).powf(s) };
                acc += w * (a[i] * b[i].conj()).re;
            }
        }
        if !acc.is_finite() {
            return Err(Error::Numeric("non-finite coefficients in inner product".into()));
        }
        Ok(acc)
    }

    /// Fractional derivative Λ^s: mode-wise multiplication by |k|^s.
    pub fn apply_lambda(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        if s == 0.0 {
            return out;
        }
        let side = self.grid.side();
        let grid = self.grid;
        for comp in 0..self.rank.components() {
            let slice = out.component_slice_mut(comp);
            for i in 0..side * side {
                let k = grid.wavenumber(i);
                if k == (0, 0) {
                    continue;
                }
                slice[i] *= k_norm_sq(k).powf(s / 2.0);
            }
        }
        out
    }

    /// Laplacian Δ: mode-wise multiplication by −|k|².
    pub fn laplacian(&self) -> SpectralField {
        let mut out = self.clone();
        let side = self.grid.side();
        let grid = self.grid;
        for comp in 0..self.rank.components() {
            let slice = out.component_slice_mut(comp);
            for i in 0..side * side {
                slice[i] *= -k_norm_sq(grid.wavenumber(i));
            }
        }
        out
    }

    /// Heat semigroup e^{c t Δ}: mode-wise factor e^{−c|k|²t}. Backward heat
    /// (c·t < 0) is rejected.
    pub fn heat_multiplier(&self, c: f64, t: f64) -> Result<SpectralField> {
        if c * t < 0.0 {
            return Err(Error::Numeric(
                "backward heat flow rejected (c·t must be ≥ 0)".into(),
            ));
        }
        let mut out = self.clone();
        out.apply_mode_factors(&heat_factor_table(self.grid, c, t));
        Ok(out)
    }

    /// Vorticity w = curl u = ∂_x u₂ − ∂_y u₁ of a vector field.
    pub fn curl(&self) -> Result<SpectralField> {
        if self.rank != Rank::Vector {
            return Err(Error::Shape("curl expects a vector field".into()));
        }
        let mut out = SpectralField::zero_scalar(self.grid);
        let side = self.grid.side();
        for i in 0..side * side {
            let k = self.grid.wavenumber(i);
            if k == (0, 0) {
                continue;
            }
            let (u1, u2) = (self.component_slice(0)[i], self.component_slice(1)[i]);
            out.coeffs[i] = Complex64::i() * (k.0 as f64 * u2 - k.1 as f64 * u1);
        }
        Ok(out)
    }

    /// Biot–Savart: the divergence-free velocity with curl w, via
    /// û(k) = i (k₂, −k₁) |k|^{−2} ŵ(k) (u = ∇^⊥Δ^{−1}w in the fixed
    /// orientation ∇^⊥ = (−∂_y, ∂_x)).
    pub fn biot_savart(&self) -> Result<SpectralField> {
        if self.rank != Rank::Scalar {
            return Err(Error::Shape("biot_savart expects a scalar vorticity".into()));
        }
        let mut out = SpectralField::zero_vector(self.grid);
        let side = self.grid.side();
        for i in 0..side * side {
            let k = self.grid.wavenumber(i);
            if k == (0, 0) {
                continue;
            }
            let w = self.coeffs[i];
            let factor = Complex64::i() / k_norm_sq(k);
            out.component_slice_mut(0)[i] = factor * k.1 as f64 * w;
            out.component_slice_mut(1)[i] = factor * (-k.0 as f64) * w;
        }
        Ok(out)
    }

    /// Largest |k·û(k)| over retained modes, relative to the field scale
    /// (max |k||û(k)|). Zero fields report 0.
    pub fn divergence_residual(&self) -> f64 {
        if self.rank != Rank::Vector {
            return 0.0;
        }
        let side = self.grid.side();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..side * side {
            let k = self.grid.wavenumber(i);
            if k == (0, 0) {
                continue;
            }
            let (u1, u2) = (self.component_slice(0)[i], self.component_slice(1)[i]);
            let div = (k.0 as f64 * u1 + k.1 as f64 * u2).norm();
            let mag = k_norm_sq(k).sqrt() * u1.norm().hypot(u2.norm());
            worst = worst.max(div);
            scale = scale.max(mag);
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Collocation values of one component on an m×m grid (x_ij = 2π(i,j)/m),
    /// row-major in the x index. m must exceed the stored band (m > N).
    pub fn collocation_component(&self, component: usize, m: usize) -> Vec<f64> {
        assert!(m > self.grid.n(), "collocation grid must resolve the band");
        let mut bins = vec![Complex64::new(0.0, 0.0); m * m];
        let side = self.grid.side();
        let slice = self.component_slice(component);
        for i in 0..side * side {
            let k = self.grid.wavenumber(i);
            if k == (0, 0) {
                continue;
            }
            let b1 = k.0.rem_euclid(m as i64) as usize;
            let b2 = k.1.rem_euclid(m as i64) as usize;
            bins[b1 * m + b2] += slice[i];
        }
        fft::fft2_inverse(m, &mut bins);
        bins.into_iter().map(|v| v.re).collect()
    }

    /// Build a mean-zero scalar from collocation values on an m×m grid,
    /// retaining modes with |k_i| ≤ cut. The m² bin sums are the plain DFT;
    /// Hermitian symmetry is re-enforced to absorb roundoff.
    pub fn scalar_from_collocation(
        grid: SpectralGrid,
        m: usize,
        values: &[f64],
        cut: usize,
    ) -> SpectralField {
        assert_eq!(values.len(), m * m);
        assert!(cut <= grid.n() / 2);
        let mut bins: Vec<Complex64> =
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::fft2_forward(m, &mut bins);
        let scale = 1.0 / (m * m) as f64;
        let mut out = SpectralField::zero_scalar(grid);
        let c = cut as i64;
        for k1 in -c..=c {
            for k2 in -c..=c {
                if (k1, k2) == (0, 0) {
                    continue;
                }
                let b1 = k1.rem_euclid(m as i64) as usize;
                let b2 = k2.rem_euclid(m as i64) as usize;
                out.coeffs[grid.idx((k1, k2))] = bins[b1 * m + b2] * scale;
            }
        }
        out.symmetrize();
        out
    }

    /// Replace coefficients by their Hermitian average (kills roundoff drift;
    /// a no-op on exactly real fields).
    pub fn symmetrize(&mut self) {
        let side = self.grid.side();
        let grid = self.grid;
        for comp in 0..self.rank.components() {
            let slice = self.component_slice_mut(comp);
            for i in 0..side * side {
                let k = grid.wavenumber(i);
                if k == (0, 0) {
                    slice[i] = Complex64::new(0.0, 0.0);
                    continue;
                }
                if k.0 > 0 || (k.0 == 0 && k.1 > 0) {
                    let j = grid.idx((-k.0, -k.1));
                    let avg = 0.5 * (slice[i] + slice[j].conj());
                    slice[i] = avg;
                    slice[j] = avg.conj();
                }
            }
        }
    }

    /// Largest Hermitian-symmetry violation |f̂(−k) − conj f̂(k)|.
    pub fn hermitian_residual(&self) -> f64 {
        let side = self.grid.side();
        let mut worst = 0.0f64;
        for comp in 0..self.rank.components() {
            let slice = self.component_slice(comp);
            for i in 0..side * side {
                let k = self.grid.wavenumber(i);
                let j = self.grid.idx((-k.0, -k.1));
                worst = worst.max((slice[i] - slice[j].conj()).norm());
            }
        }
        worst
    }

    /// Zero all modes with max(|k₁|, |k₂|) > cut.
    pub fn truncate_to(&mut self, cut: usize) {
        let side = self.grid.side();
        let c = cut as i64;
        for comp in 0..self.rank.components() {
            let grid = self.grid;
            let slice = self.component_slice_mut(comp);
            for i in 0..side * side {
                let k = grid.wavenumber(i);
                if k.0.abs() > c || k.1.abs() > c {
                    slice[i] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Random mean-zero scalar: independent complex Gaussians per conjugate
    /// pair on |k_i| ≤ k_cut (max-norm band), damped by |k|^{−decay}. Draws
    /// follow the fixed half-lattice order, so a given generator state always
    /// produces the same field.
    pub fn random_scalar<R: Rng>(
        grid: SpectralGrid,
        rng: &mut R,
        k_cut: usize,
        decay: f64,
    ) -> SpectralField {
        let mut out = SpectralField::zero_scalar(grid);
        let c = k_cut as i64;
        let modes: Vec<(i64, i64)> = grid.half_lattice().collect();
        for k in modes {
            if k.0.abs() > c || k.1.abs() > c {
                continue;
            }
            let g1: f64 = rng.sample(rand_distr::StandardNormal);
            let g2: f64 = rng.sample(rand_distr::StandardNormal);
            let amp = k_norm_sq(k).sqrt().powf(-decay);
            out.add_mode_pair(0, k, Complex64::new(g1, g2) * amp * 0.5);
        }
        out
    }

    /// Random divergence-free vector field: Biot–Savart of a random scalar.
    pub fn random_divergence_free<R: Rng>(
        grid: SpectralGrid,
        rng: &mut R,
        k_cut: usize,
        decay: f64,
    ) -> SpectralField {
        Self::random_scalar(grid, rng, k_cut, decay)
            .biot_savart()
            .expect("random scalar is a valid vorticity")
    }
}

/// Per-mode heat factors e^{−c|k|²t} in storage layout (one component).
pub fn heat_factor_table(grid: SpectralGrid, c: f64, t: f64) -> Vec<f64> {
    let side = grid.side();
    (0..side * side)
        .map(|i| {
            let k = grid.wavenumber(i);
            if k == (0, 0) {
                0.0
            } else {
                (-c * k_norm_sq(k) * t).exp()
            }
        })
        .collect()
}

/// Which output band a pseudospectral product keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductBand {
    /// Zero modes beyond the grid's dealias cutoff K_max (the 2/3 rule).
    Dealiased,
    /// Keep the full stored band |k_i| ≤ N/2 (for a-priori-estimate checks;
    /// exact when the inputs occupy at most half the stored band).
    Full,
}

/// Velocity prepared for repeated advection products: divergence verified,
/// collocation values cached, max speed extracted, and a sparse mode list
/// kept when the field has at most [`SPARSE_MODE_LIMIT`] active pairs.
pub struct PreparedVelocity {
    grid: SpectralGrid,
    colloc_m: usize,
    colloc: [Vec<f64>; 2],
    sparse: Option<Vec<((i64, i64), [Complex64; 2])>>,
    vmax: f64,
}

/// Velocities with at most this many active wavenumbers (counting each of ±k)
/// use exact sparse convolution instead of FFTs.
pub const SPARSE_MODE_LIMIT: usize = 8;

impl PreparedVelocity {
    pub fn new(u: &SpectralField) -> Result<Self> {
        if u.rank() != Rank::Vector {
            return Err(Error::Shape("advecting velocity must be a vector field".into()));
        }
        let res = u.divergence_residual();
        if res > 1e-10 {
            return Err(Error::Numeric(format!(
                "velocity is not divergence-free (relative residual {res:.2e})"
            )));
        }
        let grid = u.grid();
        let m = 2 * grid.n();
        let colloc = [u.collocation_component(0, m), u.collocation_component(1, m)];
        let vmax = colloc[0]
            .iter()
            .zip(&colloc[1])
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0f64, f64::max);
        let side = grid.side();
        let mut active = Vec::new();
        for i in 0..side * side {
            let k = grid.wavenumber(i);
            if k == (0, 0) {
                continue;
            }
            let (c1, c2) = (u.component_slice(0)[i], u.component_slice(1)[i]);
            if c1.norm() > 0.0 || c2.norm() > 0.0 {
                active.push((k, [c1, c2]));
                if active.len() > SPARSE_MODE_LIMIT {
                    break;
                }
            }
        }
        let sparse = (active.len() <= SPARSE_MODE_LIMIT).then_some(active);
        Ok(PreparedVelocity {
            grid,
            colloc_m: m,
            colloc,
            sparse,
            vmax,
        })
    }

    /// Largest pointwise speed max_x |u(x)| on the collocation grid.
    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    pub fn grid(&self) -> SpectralGrid {
        self.grid
    }

    /// The advection term u·∇f, truncated to the requested band.
    pub fn advect(&self, f: &SpectralField, band: ProductBand) -> Result<SpectralField> {
        if f.rank() != Rank::Scalar {
            return Err(Error::Shape("advect expects a scalar field".into()));
        }
        if f.grid() != self.grid {
            return Err(Error::Shape("advect requires matching grids".into()));
        }
        let cut = match band {
            ProductBand::Dealiased => self.grid.k_max(),
            ProductBand::Full => self.grid.n() / 2,
        };
        let mut out = match &self.sparse {
            Some(active) => self.advect_sparse(active, f, cut),
            None => self.advect_fft(f, cut),
        };
        out.symmetrize();
        Ok(out)
    }

    /// Exact convolution over the velocity's active modes:
    /// (u·∇f)^(k) = Σ_ℓ û(ℓ)·i(k−ℓ) f̂(k−ℓ).
    fn advect_sparse(
        &self,
        active: &[((i64, i64), [Complex64; 2])],
        f: &SpectralField,
        cut: usize,
    ) -> SpectralField {
        let grid = self.grid;
        let mut out = SpectralField::zero_scalar(grid);
        let h = grid.half();
        let c = cut as i64;
        for k1 in -c..=c {
            for k2 in -c..=c {
                if (k1, k2) == (0, 0) {
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for &(l, uc) in active {
                    let m = (k1 - l.0, k2 - l.1);
                    if m.0.abs() > h || m.1.abs() > h || m == (0, 0) {
                        continue;
                    }
                    let grad = Complex64::i()
                        * (uc[0] * m.0 as f64 + uc[1] * m.1 as f64);
                    acc += grad * f.coeff(0, m);
                }
                out.coeffs[grid.idx((k1, k2))] = acc;
            }
        }
        out
    }

    /// Pseudospectral product on the doubled collocation grid (exact for the
    /// stored band), truncated to |k_i| ≤ cut.
    fn advect_fft(&self, f: &SpectralField, cut: usize) -> SpectralField {
        let grid = self.grid;
        let m = self.colloc_m;
        // ∂_x f and ∂_y f in spectral form.
        let side = grid.side();
        let mut fx = SpectralField::zero_scalar(grid);
        let mut fy = SpectralField::zero_scalar(grid);
        for i in 0..side * side {
            let k = grid.wavenumber(i);
            if k == (0, 0) {
                continue;
            }
            let c = f.coeffs[i];
            fx.coeffs[i] = Complex64::i() * k.0 as f64 * c;
            fy.coeffs[i] = Complex64::i() * k.1 as f64 * c;
        }
        let gx = fx.collocation_component(0, m);
        let gy = fy.collocation_component(0, m);
        let prod: Vec<f64> = (0..m * m)
            .map(|i| self.colloc[0][i] * gx[i] + self.colloc[1][i] * gy[i])
            .collect();
        SpectralField::scalar_from_collocation(grid, m, &prod, cut)
    }
}

/// Dealiased advection term u·∇f (2/3 rule). `u` must be divergence-free.
pub fn advect(u: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    PreparedVelocity::new(u)?.advect(f, ProductBand::Dealiased)
}

/// Advection term kept on the full stored band, for a-priori-estimate checks.
/// Exact when u and f occupy at most half the stored band.
pub fn advect_full_band(u: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    PreparedVelocity::new(u)?.advect(f, ProductBand::Full)
}
