//! Finite-dimensional Banach-space geometry: subspaces measured under several
//! norms at once.
//!
//! The ambient space is R^n equipped with one or more norms of two kinds,
//! both diagonal in the coordinates:
//!
//! * quadratic: ‖x‖ = (Σ (w_i x_i)²)^{1/2} — an inner-product norm with
//!   whitening map W = diag(w); every quantity below has an exact
//!   linear-algebra path in the whitened frame;
//! * weighted ℓ^p, p ∈ [1, ∞): ‖x‖ = (Σ (w_i |x_i|)^p)^{1/p} — genuinely
//!   non-Hilbertian; quantities are estimated by search/sampling and returned
//!   as bracketed [`Estimate`]s (exact special cases, like ℓ¹ operator norms,
//!   are computed exactly).
//!
//! On top of that sit the comparison quantities for a pair of norms
//! ‖·‖_B ≤ ‖·‖_V: the equivalence constant α(E) of a subspace, Hausdorff
//! distances between unit spheres, angles, Busemann determinants (volume
//! ratios normalized so every unit ball has volume one), minimum norms,
//! oblique and simultaneous complements, and quotient-map matrices — the
//! ingredients that make determinant growth rates comparable across
//! nonequivalent norms.

mod complements;
mod ops;

pub use complements::{
    bounded_complement, min_principal_angle_sin, oblique_projector, quotient_step,
    simultaneous_complement, ComplementResult, ProjectorResult, SimultaneousComplement,
};
pub use ops::{
    alpha, angle_sin, busemann_det, hausdorff_distance, log_busemann_det, min_norm,
    restricted_operator_norm,
};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Which family a [`FiniteNorm`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    Quadratic,
    WeightedLp(f64),
}

/// A diagonal norm on R^n: quadratic (Σ (w_i x_i)²)^{1/2} or weighted ℓ^p
/// (Σ (w_i|x_i|)^p)^{1/p}.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteNorm {
    kind: NormKind,
    weights: DVector<f64>,
}

impl FiniteNorm {
    pub fn quadratic(weights: DVector<f64>) -> Result<Self> {
        validate_weights(&weights)?;
        Ok(FiniteNorm {
            kind: NormKind::Quadratic,
            weights,
        })
    }

    pub fn euclidean(n: usize) -> Self {
        FiniteNorm {
            kind: NormKind::Quadratic,
            weights: DVector::from_element(n, 1.0),
        }
    }

    pub fn weighted_lp(p: f64, weights: DVector<f64>) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("ℓ^p norms need p ∈ [1, ∞), got {p}")));
        }
        validate_weights(&weights)?;
        Ok(FiniteNorm {
            kind: NormKind::WeightedLp(p),
            weights,
        })
    }

    /// Fourier-like weight profile w_i = i^s (coordinates indexed from 1), the
    /// finite stand-in for an H^s ladder: s = 0 is the unweighted norm and
    /// larger s penalizes later coordinates.
    pub fn power_weights(n: usize, s: f64) -> DVector<f64> {
        DVector::from_fn(n, |i, _| ((i + 1) as f64).powf(s))
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, NormKind::Quadratic)
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Evaluate the norm.
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        debug_assert_eq!(v.len(), self.dim());
        match self.kind {
            NormKind::Quadratic => self
                .weights
                .iter()
                .zip(v.iter())
                .map(|(w, x)| (w * x) * (w * x))
                .sum::<f64>()
                .sqrt(),
            NormKind::WeightedLp(p) => self
                .weights
                .iter()
                .zip(v.iter())
                .map(|(w, x)| (w * x.abs()).powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }

    /// True when ‖·‖_other ≤ ‖·‖_self is guaranteed coordinatewise (requires
    /// the same kind).
    pub fn dominates(&self, other: &FiniteNorm) -> bool {
        self.kind == other.kind
            && self.dim() == other.dim()
            && self
                .weights
                .iter()
                .zip(other.weights.iter())
                .all(|(a, b)| a >= b)
    }

    /// Constants (c₁, c₂) with c₁|x|₂ ≤ ‖x‖ ≤ c₂|x|₂ on the ambient space.
    pub fn equivalence_bounds(&self) -> (f64, f64) {
        let wmin = self.weights.iter().cloned().fold(f64::INFINITY, f64::min);
        let wmax = self.weights.iter().cloned().fold(0.0f64, f64::max);
        match self.kind {
            NormKind::Quadratic => (wmin, wmax),
            NormKind::WeightedLp(p) => {
                let n = self.dim() as f64;
                // ‖y‖_p vs |y|₂: p ≤ 2 gives |y|₂ ≤ ‖y‖_p ≤ n^{1/p−1/2}|y|₂,
                // p ≥ 2 the reverse.
                let f = n.powf(1.0 / p - 0.5);
                if p <= 2.0 {
                    (wmin, wmax * f)
                } else {
                    (wmin * f, wmax)
                }
            }
        }
    }

    /// W v, the whitened image (quadratic norms: an isometry onto Euclidean).
    pub fn whiten_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(v.len(), |i, _| self.weights[i] * v[i])
    }

    /// W M (whiten each column).
    pub fn whiten_columns(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| self.weights[i] * m[(i, j)])
    }

    /// W A W^{-1}: the matrix of A in whitened coordinates, where the norm
    /// becomes the unweighted norm of the same kind.
    pub fn conjugate_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            self.weights[i] * a[(i, j)] / self.weights[j]
        })
    }
}

fn validate_weights(weights: &DVector<f64>) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Config("norm weights must be nonempty".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Config("norm weights must be positive and finite".into()));
    }
    Ok(())
}

/// R^n together with the norms under which it is measured.
#[derive(Clone, Debug)]
pub struct AmbientSpace {
    n: usize,
    norms: Vec<FiniteNorm>,
}

impl AmbientSpace {
    pub fn new(n: usize, norms: Vec<FiniteNorm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("ambient dimension must be ≥ 1".into()));
        }
        if norms.is_empty() {
            return Err(Error::Config("ambient space needs at least one norm".into()));
        }
        if let Some(bad) = norms.iter().find(|nm| nm.dim() != n) {
            return Err(Error::Shape(format!(
                "norm dimension {} does not match ambient dimension {n}",
                bad.dim()
            )));
        }
        Ok(AmbientSpace { n, norms })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn norms(&self) -> &[FiniteNorm] {
        &self.norms
    }

    pub fn subspace(&self, basis: DMatrix<f64>) -> Result<Subspace> {
        if basis.nrows() != self.n {
            return Err(Error::Shape(format!(
                "basis rows {} ≠ ambient dimension {}",
                basis.nrows(),
                self.n
            )));
        }
        Subspace::new(basis)
    }
}

/// A k-dimensional subspace of R^n, stored as an n×k full-column-rank basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wrap a basis, rejecting rank deficiency (columns are normalized before
    /// the singular-value test so scale does not mask collapse).
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (n, k) = basis.shape();
        if k == 0 || k > n {
            return Err(Error::Shape(format!(
                "subspace dimension must satisfy 1 ≤ k ≤ n, got k = {k}, n = {n}"
            )));
        }
        let mut scaled = basis.clone();
        for j in 0..k {
            let norm = scaled.column(j).norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::Shape("zero or non-finite basis column".into()));
            }
            scaled.column_mut(j).scale_mut(1.0 / norm);
        }
        let svals = scaled.svd(false, false).singular_values;
        let smin = svals.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin <= 1e-10 {
            return Err(Error::Shape(format!(
                "rank-deficient basis (σ_min = {smin:.2e} after column normalization)"
            )));
        }
        Ok(Subspace { basis })
    }

    /// Span of a single vector.
    pub fn line(v: DVector<f64>) -> Result<Self> {
        Subspace::new(DMatrix::from_columns(&[v]))
    }

    /// Span of the coordinate axes listed in `axes`.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let mut basis = DMatrix::zeros(n, axes.len());
        for (j, &i) in axes.iter().enumerate() {
            if i >= n {
                return Err(Error::Shape(format!("axis {i} out of range for n = {n}")));
            }
            basis[(i, j)] = 1.0;
        }
        Subspace::new(basis)
    }

    /// Random k-dimensional subspace (Gaussian basis — uniform on the
    /// Grassmannian).
    pub fn random<R: Rng>(n: usize, k: usize, rng: &mut R) -> Self {
        loop {
            let basis = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
            if let Ok(s) = Subspace::new(basis) {
                return s;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Euclidean-orthonormal basis (thin QR).
    pub fn orthonormal(&self) -> DMatrix<f64> {
        orthonormalize(&self.basis)
    }

    /// The image subspace A·E (errors if A collapses the rank).
    pub fn map(&self, a: &DMatrix<f64>) -> Result<Subspace> {
        if a.ncols() != self.ambient_dim() {
            return Err(Error::Shape("matrix/subspace dimension mismatch".into()));
        }
        Subspace::new(a * &self.basis)
    }
}

/// A computed scalar with its confidence bookkeeping: exact linear-algebra
/// paths return `exact = true`; sampling/search paths return whatever
/// enclosure is honestly known (`lower`/`upper` may be absent).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub exact: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            exact: true,
            lower: Some(value),
            upper: Some(value),
        }
    }

    /// A value only known to be ≤ the true quantity (e.g. best found by
    /// sphere search in a maximization).
    pub fn from_lower(value: f64) -> Self {
        Estimate {
            value,
            exact: false,
            lower: Some(value),
            upper: None,
        }
    }

    pub fn bracketed(value: f64, lower: f64, upper: f64) -> Self {
        Estimate {
            value,
            exact: false,
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

/// Thin-QR orthonormalization of a full-column-rank matrix.
pub(crate) fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().qr().q()
}

/// Absolute diagonal of the R factor (k-dimensional volume data of the
/// columns): |r_jj| over the thin QR of `m`.
pub(crate) fn qr_diag_abs(m: &DMatrix<f64>) -> Vec<f64> {
    let r = m.clone().qr().r();
    (0..r.ncols().min(r.nrows())).map(|j| r[(j, j)].abs()).collect()
}

/// Orthonormal basis of the Euclidean orthocomplement of col(z).
pub(crate) fn orthocomplement(z: &DMatrix<f64>) -> DMatrix<f64> {
    let n = z.nrows();
    let k = z.ncols();
    debug_assert!(k < n);
    // QR of [z | I]: the first k columns of Q span col(z); the remaining
    // n − k columns are an orthonormal completion.
    let mut extended = DMatrix::zeros(n, k + n);
    extended.view_mut((0, 0), (n, k)).copy_from(z);
    for i in 0..n {
        extended[(i, k + i)] = 1.0;
    }
    let q = extended.qr().q();
    q.columns(k, n - k).into_owned()
}

pub(crate) fn sigma_max(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
}

pub(crate) fn sigma_min(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn l1_matrix_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

fn linf_matrix_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// Operator norm of A : (R^n, ‖·‖) → (R^n, ‖·‖).
///
/// Quadratic norms and ℓ¹ are exact; other ℓ^p return the best sphere-search
/// value as a lower bracket and the Riesz–Thorin interpolation bound
/// ‖M‖₁^{1/p}‖M‖_∞^{1−1/p} (M the whitened matrix) as an upper bracket.
pub fn operator_norm(a: &DMatrix<f64>, norm: &FiniteNorm) -> Estimate {
    debug_assert_eq!(a.nrows(), norm.dim());
    debug_assert_eq!(a.ncols(), norm.dim());
    let m = norm.conjugate_matrix(a);
    match norm.kind {
        NormKind::Quadratic => Estimate::exact(sigma_max(&m)),
        NormKind::WeightedLp(p) if p == 1.0 => Estimate::exact(l1_matrix_norm(&m)),
        NormKind::WeightedLp(p) => {
            let upper = l1_matrix_norm(&m).powf(1.0 / p)
                * linf_matrix_norm(&m).powf(1.0 - 1.0 / p);
            let mut rng = crate::rng::SeedStream::new(0x6f70_6e6f).stream("operator-norm", 0);
            let n = a.ncols();
            let (_, best) = sphere_maximize(
                n,
                |c| {
                    let x = c.clone();
                    let denom = norm.norm(&x);
                    if denom == 0.0 {
                        return 0.0;
                    }
                    norm.norm(&(a * x)) / denom
                },
                &mut rng,
                8,
                120,
            );
            Estimate::bracketed(best, best, upper)
        }
    }
}

/// Multi-start projected ascent of `f` over the Euclidean unit sphere in R^k
/// (numerical gradients, backtracking step control). Returns the best point
/// and value found; deterministic for a given generator state.
pub(crate) fn sphere_maximize<R: Rng>(
    k: usize,
    f: impl Fn(&DVector<f64>) -> f64,
    rng: &mut R,
    starts: usize,
    iters: usize,
) -> (DVector<f64>, f64) {
    let mut best_x = DVector::zeros(k);
    let mut best = f64::NEG_INFINITY;
    for s in 0..starts {
        let mut x: DVector<f64> = if s == 0 {
            DVector::from_element(k, 1.0)
        } else {
            DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal))
        };
        let nrm = x.norm();
        if nrm == 0.0 {
            continue;
        }
        x /= nrm;
        let mut fx = f(&x);
        let mut step = 0.3;
        for _ in 0..iters {
            let h = 1e-6;
            let mut grad = DVector::zeros(k);
            for i in 0..k {
                let mut xp = x.clone();
                xp[i] += h;
                xp /= xp.norm();
                let mut xm = x.clone();
                xm[i] -= h;
                xm /= xm.norm();
                grad[i] = (f(&xp) - f(&xm)) / (2.0 * h);
            }
            if grad.norm() == 0.0 {
                break;
            }
            let mut cand = &x + step * &grad;
            let cn = cand.norm();
            if cn == 0.0 {
                step *= 0.4;
                continue;
            }
            cand /= cn;
            let fc = f(&cand);
            if fc > fx {
                x = cand;
                fx = fc;
                step = (step * 1.4).min(1.0);
            } else {
                step *= 0.4;
                if step < 1e-10 {
                    break;
                }
            }
        }
        if fx > best {
            best = fx;
            best_x = x;
        }
    }
    (best_x, best)
}

/// Multi-start unconstrained descent of a convex objective (numerical
/// gradients, backtracking). `init` seeds the first start.
pub(crate) fn descend<R: Rng>(
    init: &DVector<f64>,
    f: impl Fn(&DVector<f64>) -> f64,
    rng: &mut R,
    starts: usize,
    iters: usize,
) -> (DVector<f64>, f64) {
    let k = init.len();
    let mut best_x = init.clone();
    let mut best = f(init);
    for s in 0..starts {
        let mut x = if s == 0 {
            init.clone()
        } else {
            init + DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal)) * 0.5
        };
        let mut fx = f(&x);
        let mut step = 0.25;
        for _ in 0..iters {
            let h = 1e-6;
            let mut grad = DVector::zeros(k);
            for i in 0..k {
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                grad[i] = (f(&xp) - f(&xm)) / (2.0 * h);
            }
            let gn = grad.norm();
            if gn == 0.0 {
                break;
            }
            let cand = &x - (step / gn.max(1.0)) * &grad;
            let fc = f(&cand);
            if fc < fx {
                x = cand;
                fx = fc;
                step = (step * 1.4).min(1.0);
            } else {
                step *= 0.4;
                if step < 1e-12 {
                    break;
                }
            }
        }
        if fx < best {
            best = fx;
            best_x = x;
        }
    }
    (best_x, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn norm_evaluation_basic_cases() {
        let e = FiniteNorm::euclidean(3);
        let v = DVector::from_vec(vec![3.0, 0.0, 4.0]);
        assert!((e.norm(&v) - 5.0).abs() < 1e-14);

        let w = FiniteNorm::quadratic(DVector::from_vec(vec![2.0, 1.0, 1.0])).unwrap();
        assert!((w.norm(&v) - (36.0f64 + 16.0).sqrt()).abs() < 1e-14);

        let l1 = FiniteNorm::weighted_lp(1.0, DVector::from_element(3, 1.0)).unwrap();
        assert!((l1.norm(&v) - 7.0).abs() < 1e-14);

        let l3 = FiniteNorm::weighted_lp(3.0, DVector::from_element(3, 1.0)).unwrap();
        assert!((l3.norm(&v) - (27.0f64 + 64.0).powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_norms_rejected() {
        assert!(FiniteNorm::quadratic(DVector::from_vec(vec![1.0, 0.0])).is_err());
        assert!(FiniteNorm::quadratic(DVector::from_vec(vec![1.0, -1.0])).is_err());
        assert!(FiniteNorm::weighted_lp(0.5, DVector::from_element(2, 1.0)).is_err());
        assert!(FiniteNorm::weighted_lp(f64::INFINITY, DVector::from_element(2, 1.0)).is_err());
    }

    #[test]
    fn equivalence_bounds_enclose_the_norm() {
        let mut rng = SeedStream::new(5).stream("geom-test", 0);
        for p in [1.0, 1.5, 2.7] {
            let norm =
                FiniteNorm::weighted_lp(p, FiniteNorm::power_weights(5, 0.7)).unwrap();
            let (c1, c2) = norm.equivalence_bounds();
            for _ in 0..50 {
                let v = DVector::from_fn(5, |_, _| rng.sample::<f64, _>(StandardNormal));
                let nv = norm.norm(&v);
                let ev = v.norm();
                assert!(c1 * ev <= nv * (1.0 + 1e-12));
                assert!(nv <= c2 * ev * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn subspace_rank_validation() {
        let good = DMatrix::from_vec(3, 2, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(Subspace::new(good).is_ok());
        // Second column a multiple of the first.
        let bad = DMatrix::from_vec(3, 2, vec![1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        assert!(Subspace::new(bad).is_err());
        let zero = DMatrix::from_vec(2, 1, vec![0.0, 0.0]);
        assert!(Subspace::new(zero).is_err());
    }

    #[test]
    fn operator_norm_quadratic_is_weighted_sigma_max() {
        let a = DMatrix::from_vec(2, 2, vec![2.0, 0.0, 0.0, 0.5]);
        let norm = FiniteNorm::euclidean(2);
        let est = operator_norm(&a, &norm);
        assert!(est.exact);
        assert!((est.value - 2.0).abs() < 1e-12);

        // Weights reweight the off-diagonal reach: W A W^{-1} for
        // A = [[0, 1], [0, 0]], w = (3, 1) has entry 3 at (0, 1).
        let nilp = DMatrix::from_vec(2, 2, vec![0.0, 0.0, 1.0, 0.0]);
        let w = FiniteNorm::quadratic(DVector::from_vec(vec![3.0, 1.0])).unwrap();
        assert!((operator_norm(&nilp, &w).value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_l1_is_max_column_sum() {
        let a = DMatrix::from_vec(2, 2, vec![1.0, -2.0, 0.5, 0.25]);
        let norm = FiniteNorm::weighted_lp(1.0, DVector::from_element(2, 1.0)).unwrap();
        let est = operator_norm(&a, &norm);
        assert!(est.exact);
        assert!((est.value - 3.0).abs() < 1e-14); // column (1, −2)
    }

    #[test]
    fn operator_norm_lp_brackets_contain_sampled_ratios() {
        let mut rng = SeedStream::new(6).stream("geom-test", 1);
        let a = DMatrix::from_fn(4, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm =
            FiniteNorm::weighted_lp(1.7, FiniteNorm::power_weights(4, 0.5)).unwrap();
        let est = operator_norm(&a, &norm);
        assert!(!est.exact);
        let (lo, hi) = (est.lower.unwrap(), est.upper.unwrap());
        assert!(lo <= hi * (1.0 + 1e-12));
        for _ in 0..100 {
            let v = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
            let ratio = norm.norm(&(&a * &v)) / norm.norm(&v);
            assert!(ratio <= hi * (1.0 + 1e-9));
        }
    }

    #[test]
    fn orthocomplement_is_orthonormal_and_orthogonal() {
        let mut rng = SeedStream::new(7).stream("geom-test", 2);
        let z = DMatrix::from_fn(6, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let c = orthocomplement(&z);
        assert_eq!(c.shape(), (6, 4));
        let gram = c.transpose() * &c;
        assert!((gram - DMatrix::identity(4, 4)).norm() < 1e-12);
        assert!((z.transpose() * &c).norm() < 1e-12);
    }

    #[test]
    fn sphere_maximize_finds_matrix_top_singular_value() {
        let a = DMatrix::from_vec(3, 3, vec![1.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 2.0]);
        let mut rng = SeedStream::new(8).stream("geom-test", 3);
        let (_, best) = sphere_maximize(3, |x| (&a * x).norm(), &mut rng, 6, 150);
        assert!((best - 4.0).abs() < 1e-4);
    }
}
