//! Tour of the subspace geometry that makes Lyapunov spectra norm-robust:
//! Busemann determinants, norm-comparison constants α(E), sphere Hausdorff
//! distances, and bounded complements — each demonstrated on random instances
//! against the inequality it must satisfy, printing the worst observed slack.
//!
//! Notation: V = H¹-type weighted norm, B = L²-type norm on R^n, so
//! ‖·‖_B ≤ ‖·‖_V and α(E) = sup_{v∈E} ‖v‖_V/‖v‖_B measures how steeply the
//! norms diverge on E.

use lyapnorm::geometry::{
    alpha, bounded_complement, busemann_det, hausdorff_distance, log_busemann_det, min_norm,
    operator_norm, FiniteNorm, Subspace,
};
use lyapnorm::rng::SeedStream;
use lyapnorm::Result;
use nalgebra::DMatrix;
use rand_distr::StandardNormal;
use rand::Rng;

const DIM: usize = 8;
const TRIALS: u64 = 60;

fn norms() -> (FiniteNorm, FiniteNorm) {
    let v = FiniteNorm::quadratic(FiniteNorm::power_weights(DIM, 1.0)).unwrap();
    let b = FiniteNorm::quadratic(FiniteNorm::power_weights(DIM, 0.0)).unwrap();
    (v, b)
}

fn random_matrix<R: Rng>(rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(DIM, DIM, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// det(A₁A₂|E) = det(A₁|A₂E)·det(A₂|E): volumes compose along the orbit.
fn multiplicativity(v: &FiniteNorm) -> Result<f64> {
    let mut rng = SeedStream::new(11).stream("tour", 0);
    let mut worst = 0.0f64;
    for trial in 0..TRIALS {
        let e = Subspace::random(DIM, 2 + (trial as usize % 2), &mut rng);
        let (a1, a2) = (random_matrix(&mut rng), random_matrix(&mut rng));
        let lhs = log_busemann_det(&(&a1 * &a2), &e, v)?.unwrap();
        let rhs = log_busemann_det(&a1, &e.map(&a2)?, v)?.unwrap()
            + log_busemann_det(&a2, &e, v)?.unwrap();
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(worst)
}

/// m(A|E)^k ≤ det(A|E) ≤ ‖A‖^k: the determinant sits between the extreme
/// singular behaviors, in any norm.
fn sandwich(v: &FiniteNorm) -> Result<f64> {
    let mut rng = SeedStream::new(12).stream("tour", 1);
    let mut tightest = f64::INFINITY;
    for trial in 0..TRIALS {
        let k = 1 + (trial as usize % 3);
        let e = Subspace::random(DIM, k, &mut rng);
        let a = random_matrix(&mut rng);
        let det = busemann_det(&a, &e, v)?.value;
        let lo = min_norm(&a, &e, v)?.value.powi(k as i32);
        let hi = operator_norm(&a, v).value.powi(k as i32);
        assert!(lo <= det * (1.0 + 1e-9) && det <= hi * (1.0 + 1e-9));
        tightest = tightest.min((hi - lo) / det);
    }
    Ok(tightest)
}

/// det_B ≤ α(E)^k·det_V and det_V ≤ α(AE)^k·det_B: switching the volume's
/// norm costs at most the comparison constant per dimension.
fn det_comparison(v: &FiniteNorm, b: &FiniteNorm) -> Result<f64> {
    let mut rng = SeedStream::new(13).stream("tour", 2);
    let mut worst_margin = f64::INFINITY;
    for trial in 0..TRIALS {
        let k = 1 + (trial as usize % 2);
        let e = Subspace::random(DIM, k, &mut rng);
        let a = random_matrix(&mut rng);
        let det_b = busemann_det(&a, &e, b)?.value;
        let det_v = busemann_det(&a, &e, v)?.value;
        let a_e = alpha(&e, v, b)?.value.powi(k as i32);
        let a_ae = alpha(&e.map(&a)?, v, b)?.value.powi(k as i32);
        assert!(det_b <= a_e * det_v * (1.0 + 1e-9));
        assert!(det_v <= a_ae * det_b * (1.0 + 1e-9));
        worst_margin = worst_margin.min((a_e * det_v / det_b).min(a_ae * det_b / det_v));
    }
    Ok(worst_margin)
}

/// d_B(E,F) ≤ 2·max(α(E),α(F))·d_V(E,F): sphere distances in the weaker
/// norm are controlled by distances in the stronger one.
fn distance_comparison(v: &FiniteNorm, b: &FiniteNorm) -> Result<f64> {
    let mut rng = SeedStream::new(14).stream("tour", 3);
    let mut worst_ratio = 0.0f64;
    for _ in 0..TRIALS {
        let e = Subspace::random(DIM, 2, &mut rng);
        let f = Subspace::random(DIM, 2, &mut rng);
        let db = hausdorff_distance(&e, &f, b)?.value;
        let dv = hausdorff_distance(&e, &f, v)?.value;
        let cap = 2.0 * alpha(&e, v, b)?.value.max(alpha(&f, v, b)?.value);
        assert!(db <= cap * dv + 1e-12);
        if dv > 0.0 {
            worst_ratio = worst_ratio.max(db / (cap * dv));
        }
    }
    Ok(worst_ratio)
}

/// α is upper semicontinuous with an explicit modulus: moving E by less than
/// δ = ε/(α₀(α₀+ε)) in the V-metric raises α by at most ε.
fn semicontinuity(v: &FiniteNorm, b: &FiniteNorm) -> Result<(usize, f64)> {
    let mut rng = SeedStream::new(15).stream("tour", 4);
    let eps = 0.5;
    let mut checked = 0usize;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..TRIALS {
        let e0 = Subspace::random(DIM, 2, &mut rng);
        let a0 = alpha(&e0, v, b)?.value;
        let delta = eps / (a0 * (a0 + eps));
        let noise = DMatrix::from_fn(DIM, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut t = 0.5;
        for _ in 0..80 {
            if let Ok(e) = Subspace::new(e0.basis() + t * &noise) {
                if hausdorff_distance(&e, &e0, v)?.value < delta {
                    let a = alpha(&e, v, b)?.value;
                    assert!(a <= a0 + eps + 1e-9);
                    worst_excess = worst_excess.max(a - a0);
                    checked += 1;
                    break;
                }
            }
            t *= 0.7;
        }
    }
    Ok((checked, worst_excess))
}

fn main() -> Result<()> {
    let (v, b) = norms();
    println!("ambient dimension {DIM}, norms: V = H¹-weighted, B = Euclidean\n");

    let m = multiplicativity(&v)?;
    println!("determinant multiplicativity over {TRIALS} products: worst relative defect {m:.2e}");

    let s = sandwich(&v)?;
    println!("m(A|E)^k ≤ det ≤ ‖A‖^k held on {TRIALS} instances (tightest gap {s:.2} × det)");

    let margin = det_comparison(&v, &b)?;
    println!("two-norm determinant comparison held; tightest bound-to-value margin {margin:.3}");

    let ratio = distance_comparison(&v, &b)?;
    println!("d_B ≤ 2·max α·d_V held; largest d_B/(bound) ratio {ratio:.3}");

    let (checked, excess) = semicontinuity(&v, &b)?;
    println!("α-semicontinuity with δ = ε/(α₀(α₀+ε)) held on {checked} perturbations (worst α−α₀ = {excess:+.4}, ε = 0.5)");

    // Bounded complements: every k-dim subspace admits a complement whose
    // projector norm is controlled, uniformly over random draws.
    let mut rng = SeedStream::new(16).stream("tour", 5);
    let mut worst = 0.0f64;
    for _ in 0..TRIALS {
        let f = Subspace::random(DIM, 3, &mut rng);
        let c = bounded_complement(&f, &v)?;
        worst = worst.max(c.projector_norm.value);
    }
    println!("bounded complements of {TRIALS} random 3-dim subspaces: worst projector norm {worst:.3}");
    Ok(())
}
