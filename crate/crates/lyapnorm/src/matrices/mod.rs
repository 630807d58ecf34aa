//! Finite-dimensional random matrix cocycles with analytically known
//! Lyapunov spectra.
//!
//! These models serve as ground truth for the exponent estimators: a
//! constant matrix has exponents equal to the logs of its singular-value
//! growth rates (for normal matrices, of its eigenvalue moduli), a
//! triangular cocycle with fixed diagonal `e^{a_i}` has exponents exactly
//! `a_i`, and a lower-block-triangular cocycle keeps the span of its
//! trailing coordinates invariant, giving a known flag subspace for the
//! quotient volume-growth route.
//!
//! The oracle helpers at the bottom deliberately avoid the step-by-step
//! QR machinery of the estimators: the straight product accumulates the
//! full matrix product (with periodic max-norm rescaling to dodge
//! overflow) and reads the top rate off one singular value decomposition
//! at the end, and the diagonal Birkhoff route averages `log|a_ii|`
//! directly. Agreement between those routes and the estimators is a
//! genuine cross-check, not a tautology.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// A stationary sequence of linear maps on R^n. `sample_step` draws the
/// next map and advances the internal driver state; a fixed seed gives a
/// reproducible sequence.
pub trait MatrixModel: Send {
    fn dim(&self) -> usize;
    fn sample_step(&mut self) -> DMatrix<f64>;
}

/// Repeats one fixed matrix forever. Exponents are exactly the logs of
/// the eigenvalue moduli when the matrix is normal (diagonal in all the
/// tests here).
#[derive(Clone, Debug)]
pub struct ConstantMatrix {
    a: DMatrix<f64>,
}

impl ConstantMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::Shape("constant cocycle needs a square matrix".into()));
        }
        Ok(ConstantMatrix { a })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Shape("diagonal cocycle needs at least one entry".into()));
        }
        Ok(ConstantMatrix {
            a: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries)),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

impl MatrixModel for ConstantMatrix {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn sample_step(&mut self) -> DMatrix<f64> {
        self.a.clone()
    }
}

/// Independent steps with i.i.d. Gaussian entries `scale · N(0,1)`.
/// Entries are drawn in column-major order so the sequence is a pure
/// function of the seed stream.
#[derive(Clone, Debug)]
pub struct IidGaussianModel {
    n: usize,
    scale: f64,
    rng: ChaCha12Rng,
}

impl IidGaussianModel {
    pub fn new(n: usize, scale: f64, rng: ChaCha12Rng) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("matrix dimension must be positive".into()));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Config("Gaussian entry scale must be positive and finite".into()));
        }
        Ok(IidGaussianModel { n, scale, rng })
    }
}

impl MatrixModel for IidGaussianModel {
    fn dim(&self) -> usize {
        self.n
    }

    fn sample_step(&mut self) -> DMatrix<f64> {
        let data: Vec<f64> = (0..self.n * self.n)
            .map(|_| {
                let g: f64 = self.rng.sample(StandardNormal);
                self.scale * g
            })
            .collect();
        DMatrix::from_vec(self.n, self.n, data)
    }
}

/// Upper-triangular steps with a fixed diagonal `e^{a_i}` and independent
/// uniform off-diagonal noise in `[-noise, noise]`. The Lyapunov spectrum
/// of any triangular cocycle equals the Birkhoff averages of the diagonal
/// logs, so here it is exactly `{a_i}`, regardless of the noise.
#[derive(Clone, Debug)]
pub struct TriangularModel {
    diag_log: Vec<f64>,
    noise: f64,
    rng: ChaCha12Rng,
}

impl TriangularModel {
    pub fn new(diag_log: Vec<f64>, noise: f64, rng: ChaCha12Rng) -> Result<Self> {
        if diag_log.is_empty() {
            return Err(Error::Shape("triangular cocycle needs at least one diagonal entry".into()));
        }
        if !(noise >= 0.0) || !noise.is_finite() {
            return Err(Error::Config("off-diagonal noise bound must be nonnegative".into()));
        }
        Ok(TriangularModel { diag_log, noise, rng })
    }

    /// The exact Lyapunov exponents, sorted nonincreasing.
    pub fn exponents(&self) -> Vec<f64> {
        let mut a = self.diag_log.clone();
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        a
    }
}

impl MatrixModel for TriangularModel {
    fn dim(&self) -> usize {
        self.diag_log.len()
    }

    fn sample_step(&mut self) -> DMatrix<f64> {
        let n = self.diag_log.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag_log[i].exp();
            for j in i + 1..n {
                a[(i, j)] = if self.noise > 0.0 {
                    self.rng.gen_range(-self.noise..=self.noise)
                } else {
                    0.0
                };
            }
        }
        a
    }
}

/// Lower-block-triangular steps
///
/// ```text
///   A = [ B  0 ]      B: fast_dim × fast_dim, upper-triangular diag e^{top_log}
///       [ C  D ]      D: upper-triangular diag e^{bottom_log}, C: coupling noise
/// ```
///
/// The span F of the trailing coordinates satisfies A·F ⊆ F at every
/// step, and since every `top_log` exceeds every `bottom_log`, F is
/// exactly the slow part of the Oseledets filtration: quotienting by F
/// isolates the fast exponents `top_log`, and generic subspaces pushed
/// forward stay transverse to F.
#[derive(Clone, Debug)]
pub struct BlockTriangularModel {
    top_log: Vec<f64>,
    bottom_log: Vec<f64>,
    noise: f64,
    coupling: f64,
    rng: ChaCha12Rng,
}

impl BlockTriangularModel {
    pub fn new(
        top_log: Vec<f64>,
        bottom_log: Vec<f64>,
        noise: f64,
        coupling: f64,
        rng: ChaCha12Rng,
    ) -> Result<Self> {
        if top_log.is_empty() || bottom_log.is_empty() {
            return Err(Error::Shape("both diagonal blocks need at least one entry".into()));
        }
        if !(noise >= 0.0) || !(coupling >= 0.0) || !noise.is_finite() || !coupling.is_finite() {
            return Err(Error::Config("noise and coupling bounds must be nonnegative".into()));
        }
        let top_min = top_log.iter().cloned().fold(f64::INFINITY, f64::min);
        let bottom_max = bottom_log.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(top_min > bottom_max) {
            return Err(Error::Config(format!(
                "fast block rates must strictly dominate the slow block \
                 (min fast rate {top_min} vs max slow rate {bottom_max}); \
                 otherwise the trailing coordinates are not the slow filtration subspace"
            )));
        }
        Ok(BlockTriangularModel { top_log, bottom_log, noise, coupling, rng })
    }

    /// Dimension of the fast (quotient) block.
    pub fn fast_dim(&self) -> usize {
        self.top_log.len()
    }

    /// Sum of the fast-block exponents; the exact quotient volume-growth rate.
    pub fn fast_rate_sum(&self) -> f64 {
        self.top_log.iter().sum()
    }

    /// The exact Lyapunov exponents of the full cocycle, sorted nonincreasing.
    pub fn exponents(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.top_log.iter().chain(self.bottom_log.iter()).cloned().collect();
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        a
    }

    /// Orthonormal basis of the invariant slow subspace F (trailing coordinates).
    pub fn slow_subspace(&self) -> crate::geometry::Subspace {
        let n = self.dim();
        let axes: Vec<usize> = (self.top_log.len()..n).collect();
        crate::geometry::Subspace::coordinate(n, &axes)
            .expect("trailing coordinate axes are always valid")
    }

    fn draw(&mut self, bound: f64) -> f64 {
        if bound > 0.0 {
            self.rng.gen_range(-bound..=bound)
        } else {
            0.0
        }
    }
}

impl MatrixModel for BlockTriangularModel {
    fn dim(&self) -> usize {
        self.top_log.len() + self.bottom_log.len()
    }

    fn sample_step(&mut self) -> DMatrix<f64> {
        let k = self.top_log.len();
        let n = k + self.bottom_log.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..k {
            a[(i, i)] = self.top_log[i].exp();
            for j in i + 1..k {
                a[(i, j)] = self.draw(self.noise);
            }
        }
        for i in k..n {
            a[(i, i)] = self.bottom_log[i - k].exp();
            for j in i + 1..n {
                a[(i, j)] = self.draw(self.noise);
            }
        }
        for i in k..n {
            for j in 0..k {
                a[(i, j)] = self.draw(self.coupling);
            }
        }
        a
    }
}

/// Growth rates read off a straight matrix product A_n···A_1.
#[derive(Clone, Copy, Debug)]
pub struct ProductRates {
    /// 1/n · log σ_max(A_n···A_1): the top Lyapunov exponent estimate.
    pub top: f64,
    /// 1/n · Σ log|det A_i|: the full volume growth rate (−∞ if any step
    /// is singular).
    pub log_det_rate: f64,
}

const RESCALE_EVERY: usize = 8;

/// Accumulates the straight product with periodic max-entry rescaling and
/// returns the top singular-value rate plus the per-step determinant rate.
/// Independent of the per-step orthonormalization used by the estimators.
pub fn straight_product_rates(model: &mut dyn MatrixModel, steps: usize) -> Result<ProductRates> {
    if steps == 0 {
        return Err(Error::Config("a straight product needs at least one step".into()));
    }
    let n = model.dim();
    let mut product = DMatrix::<f64>::identity(n, n);
    let mut log_scale = 0.0f64;
    let mut log_det = 0.0f64;
    for step in 1..=steps {
        let a = model.sample_step();
        log_det += a.determinant().abs().ln();
        product = &a * &product;
        if step % RESCALE_EVERY == 0 {
            let m = product.amax();
            if m == 0.0 {
                return Err(Error::Numeric(
                    "straight product collapsed to the zero matrix".into(),
                ));
            }
            product /= m;
            log_scale += m.ln();
        }
    }
    let sigma = product.svd(false, false).singular_values[0];
    if sigma == 0.0 {
        return Err(Error::Numeric("straight product collapsed to the zero matrix".into()));
    }
    Ok(ProductRates {
        top: (log_scale + sigma.ln()) / steps as f64,
        log_det_rate: log_det / steps as f64,
    })
}

/// Birkhoff averages of log|a_ii| along a trajectory of the model. For
/// triangular cocycles these are exactly the Lyapunov exponents (in the
/// model's own coordinate order, not sorted).
pub fn diagonal_birkhoff(model: &mut dyn MatrixModel, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Config("a Birkhoff average needs at least one step".into()));
    }
    let n = model.dim();
    let mut sums = vec![0.0f64; n];
    for _ in 0..steps {
        let a = model.sample_step();
        for (i, sum) in sums.iter_mut().enumerate() {
            *sum += a[(i, i)].abs().ln();
        }
    }
    for sum in &mut sums {
        *sum /= steps as f64;
    }
    Ok(sums)
}
