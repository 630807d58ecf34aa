//! Independent dense oracles for cross-checking the spectral solvers.
//!
//! Everything here is deliberately low-tech: explicit coefficient formulas
//! for single-mode shear transport, dense matrix exponentials, and
//! brute-force mode scans.  None of it shares code with the FFT-based
//! production path, so agreement between the two routes is meaningful
//! evidence rather than a tautology.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flows::ShearAxis;
use crate::spectral::{SpectralField, SpectralGrid};

/// Fixed enumeration of the nonzero dealiased band: all wavenumbers with
/// `max(|k1|, |k2|) <= k_max`, scanned with `k1` ascending then `k2`.
pub fn band_modes(grid: SpectralGrid) -> Vec<(i64, i64)> {
    let c = grid.k_max() as i64;
    let mut out = Vec::new();
    for k1 in -c..=c {
        for k2 in -c..=c {
            if (k1, k2) != (0, 0) {
                out.push((k1, k2));
            }
        }
    }
    out
}

/// Flattens a scalar field's dealiased-band coefficients in [`band_modes`]
/// order.
pub fn field_to_band_vector(f: &SpectralField) -> DVector<Complex64> {
    let modes = band_modes(f.grid());
    DVector::from_iterator(modes.len(), modes.iter().map(|&k| f.coeff(0, k)))
}

fn ksq(k: (i64, i64)) -> f64 {
    (k.0 * k.0 + k.1 * k.1) as f64
}

/// Index lookup for [`band_modes`] order.
fn band_index(grid: SpectralGrid, k: (i64, i64)) -> Option<usize> {
    let c = grid.k_max() as i64;
    if k == (0, 0) || k.0.abs() > c || k.1.abs() > c {
        return None;
    }
    let width = 2 * c + 1;
    let raw = (k.0 + c) * width + (k.1 + c);
    // Positions after the hole at k = 0.
    let hole = c * width + c;
    Some(if raw < hole { raw as usize } else { raw as usize - 1 })
}

/// Dense generator of scalar advection–diffusion by a frozen single-mode
/// shear, on the dealiased band.
///
/// For the horizontal shear `u = (A sin(y + phi), 0)` the transport term
/// acts on coefficients as
///
/// ```text
/// (u . grad f)^(k1, k2) = (A k1 / 2) (e^{i phi} fhat(k1, k2-1)
///                                    - e^{-i phi} fhat(k1, k2+1))
/// ```
///
/// and the generator is `-P (u . grad) P + kappa Delta` with `P` the band
/// projection.  The vertical shear swaps the roles of the two indices.
pub fn ad_generator_shear(
    grid: SpectralGrid,
    kappa: f64,
    axis: ShearAxis,
    amplitude: f64,
    phase: f64,
) -> DMatrix<Complex64> {
    let modes = band_modes(grid);
    let m = modes.len();
    let mut g = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    let e_plus = Complex64::from_polar(1.0, phase);
    let e_minus = e_plus.conj();
    for (row, &k) in modes.iter().enumerate() {
        g[(row, row)] = Complex64::new(-kappa * ksq(k), 0.0);
        let (mult, src_minus, src_plus) = match axis {
            ShearAxis::Horizontal => (k.0 as f64, (k.0, k.1 - 1), (k.0, k.1 + 1)),
            ShearAxis::Vertical => (k.1 as f64, (k.0 - 1, k.1), (k.0 + 1, k.1)),
        };
        let a = 0.5 * amplitude * mult;
        if let Some(col) = band_index(grid, src_minus) {
            g[(row, col)] -= a * e_plus;
        }
        if let Some(col) = band_index(grid, src_plus) {
            g[(row, col)] += a * e_minus;
        }
    }
    g
}

/// Dense generator of the linearized vorticity dynamics about a frozen
/// single-mode shear.
///
/// On top of [`ad_generator_shear`] (with `nu` in place of `kappa`) the
/// row for `k` gains the lower-order coupling `-P (Delta u . grad) Lambda^{-2}`.
/// For the horizontal shear `Delta u = -u`, so the coupling is the advection
/// formula with opposite sign and a `1/|k_src|^2` weight at the source mode.
pub fn lns_generator_shear(
    grid: SpectralGrid,
    nu: f64,
    axis: ShearAxis,
    amplitude: f64,
    phase: f64,
) -> DMatrix<Complex64> {
    let modes = band_modes(grid);
    let mut g = ad_generator_shear(grid, nu, axis, amplitude, phase);
    let e_plus = Complex64::from_polar(1.0, phase);
    let e_minus = e_plus.conj();
    for (row, &k) in modes.iter().enumerate() {
        let (mult, src_minus, src_plus) = match axis {
            ShearAxis::Horizontal => (k.0 as f64, (k.0, k.1 - 1), (k.0, k.1 + 1)),
            ShearAxis::Vertical => (k.1 as f64, (k.0 - 1, k.1), (k.0 + 1, k.1)),
        };
        let a = 0.5 * amplitude * mult;
        if let Some(col) = band_index(grid, src_minus) {
            g[(row, col)] += a * e_plus / ksq(src_minus);
        }
        if let Some(col) = band_index(grid, src_plus) {
            g[(row, col)] -= a * e_minus / ksq(src_plus);
        }
    }
    g
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense matrix exponential by Padé order-13 approximation with scaling and
/// squaring (coefficients and threshold from the standard double-precision
/// tuning of the algorithm).
pub fn expm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    if a.nrows() != a.ncols() {
        return Err(Error::Shape("matrix exponential requires a square matrix".into()));
    }
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a.map(|c| c / 2.0f64.powi(s as i32));
    let id = DMatrix::from_diagonal_element(n, n, Complex64::new(1.0, 0.0));

    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (a6.map(|c| c * B[13]) + a4.map(|c| c * B[11]) + a2.map(|c| c * B[9]))
        + a6.map(|c| c * B[7])
        + a4.map(|c| c * B[5])
        + a2.map(|c| c * B[3])
        + id.map(|c| c * B[1]);
    let u = &scaled * u_inner;
    let v = &a6 * (a6.map(|c| c * B[12]) + a4.map(|c| c * B[10]) + a2.map(|c| c * B[8]))
        + a6.map(|c| c * B[6])
        + a4.map(|c| c * B[4])
        + a2.map(|c| c * B[2])
        + id.map(|c| c * B[0]);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("Padé denominator is singular".into()))?;
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}

/// Eigenvalues of a complex matrix, via the real Schur form of the standard
/// `2n x 2n` real embedding `[[Re, -Im], [Im, Re]]`.  The embedding's
/// spectrum is the union of the spectrum and its conjugate, which is
/// harmless for the real-part and modulus queries made of it.
pub fn complex_eigenvalues(a: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = a.nrows();
    let mut real = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = a[(i, j)];
            real[(i, j)] = c.re;
            real[(i, j + n)] = -c.im;
            real[(i + n, j)] = c.im;
            real[(i + n, j + n)] = c.re;
        }
    }
    real.complex_eigenvalues()
        .iter()
        .map(|c| Complex64::new(c.re, c.im))
        .collect()
}

/// Largest real part of the spectrum (growth abscissa of the frozen flow).
pub fn spectral_abscissa(a: &DMatrix<Complex64>) -> f64 {
    complex_eigenvalues(a)
        .iter()
        .map(|c| c.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Top singular value of the complex matrix (via the real embedding, whose
/// singular values each appear twice).
pub fn top_singular_value(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let m = a.ncols();
    let mut real = DMatrix::zeros(2 * n, 2 * m);
    for i in 0..n {
        for j in 0..m {
            let c = a[(i, j)];
            real[(i, j)] = c.re;
            real[(i, j + m)] = -c.im;
            real[(i + n, j)] = c.im;
            real[(i + n, j + m)] = c.re;
        }
    }
    real.singular_values()[0]
}

/// Exact operator norm of the quiescent unit solver between homogeneous
/// Sobolev scales: a diagonal multiplier maximized by brute scan,
/// `max_k |k|^{s_out - s_in} e^{-kappa |k|^2}` over the dealiased band.
pub fn quiescent_norm_scan(grid: SpectralGrid, kappa: f64, s_in: f64, s_out: f64) -> f64 {
    band_modes(grid)
        .iter()
        .map(|&k| ksq(k).powf(0.5 * (s_out - s_in)) * (-kappa * ksq(k)).exp())
        .fold(0.0, f64::max)
}

/// Birkhoff average of `log |values|` (the exact exponent route for
/// triangular products).
pub fn mean_log_abs(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs().ln()).sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::shear_velocity;
    use crate::rng::SeedStream;
    use crate::spectral::{NormSpec, PreparedVelocity, ProductBand};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn band_index_matches_enumeration() {
        let grid = SpectralGrid::standard(16).unwrap();
        let modes = band_modes(grid);
        for (i, &k) in modes.iter().enumerate() {
            assert_eq!(band_index(grid, k), Some(i));
        }
        assert_eq!(band_index(grid, (0, 0)), None);
        let c = grid.k_max() as i64;
        assert_eq!(band_index(grid, (c + 1, 0)), None);
    }

    #[test]
    fn expm_matches_scalar_exponentials_on_diagonal_matrices() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(-0.3, 0.0),
            c(0.2, 1.5),
            c(-4.0, -2.0),
        ]));
        let e = expm(&d).unwrap();
        for i in 0..3 {
            let expect = d[(i, i)].exp();
            assert!((e[(i, i)] - expect).norm() < 1e-14 * expect.norm());
        }
        assert!((e[(0, 1)]).norm() < 1e-16);
    }

    #[test]
    fn expm_of_nilpotent_and_rotation_blocks_is_exact() {
        let nilpotent = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e = expm(&nilpotent).unwrap();
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e[(1, 0)]).norm() < 1e-15);

        let t = 0.85;
        let skew = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-t, 0.0), c(t, 0.0), c(0.0, 0.0)]);
        let r = expm(&skew).unwrap();
        assert!((r[(0, 0)] - c(t.cos(), 0.0)).norm() < 1e-14);
        assert!((r[(1, 0)] - c(t.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_squares_large_inputs_correctly() {
        // A matrix well past the Padé threshold: check exp(A) = exp(A/2)^2.
        let mut rng = SeedStream::new(31).stream("oracle", 0);
        let n = 12;
        let a = DMatrix::from_fn(n, n, |_, _| {
            use rand::Rng;
            c(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0)
        });
        let whole = expm(&a).unwrap();
        let half = expm(&a.map(|x| x / 2.0)).unwrap();
        let squared = &half * &half;
        let denom = one_norm(&whole);
        assert!(one_norm(&(&whole - &squared)) < 1e-10 * denom);
    }

    #[test]
    fn complex_eigenvalues_recover_known_spectra() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(-1.0, 2.0), c(0.5, -0.25)]));
        let eigs = complex_eigenvalues(&d);
        for target in [c(-1.0, 2.0), c(0.5, -0.25)] {
            assert!(
                eigs.iter().any(|e| (e - target).norm() < 1e-10),
                "missing eigenvalue {target}"
            );
        }
        assert!((spectral_abscissa(&d) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn top_singular_value_matches_real_case() {
        let a = DMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)]);
        assert!((top_singular_value(&a) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ad_generator_agrees_with_spectral_transport_on_random_fields() {
        // Dual route: coefficient recursion vs the FFT product machinery.
        let grid = SpectralGrid::standard(16).unwrap();
        let kappa = 0.35;
        let amp = 1.4;
        let phase = 0.7;
        for axis in [ShearAxis::Horizontal, ShearAxis::Vertical] {
            let g = ad_generator_shear(grid, kappa, axis, amp, phase);
            let u = shear_velocity(grid, axis, amp, phase);
            let prepared = PreparedVelocity::new(&u).unwrap();
            let mut rng = SeedStream::new(5).stream("oracle", 1);
            let f = SpectralField::random_scalar(grid, &mut rng, grid.k_max(), 1.0);
            let transport = prepared.advect(&f, ProductBand::Dealiased).unwrap();
            let mut rhs = f.laplacian();
            rhs.scale(kappa);
            rhs.axpy(-1.0, &transport);
            let dense = &g * field_to_band_vector(&f);
            let direct = field_to_band_vector(&rhs);
            let scale = direct.norm().max(1.0);
            assert!(
                (dense - direct).norm() < 1e-12 * scale,
                "dense generator mismatch for {axis:?}"
            );
        }
    }

    #[test]
    fn lns_generator_agrees_with_spectral_transport_on_random_fields() {
        let grid = SpectralGrid::standard(16).unwrap();
        let nu = 0.05;
        let amp = 0.9;
        let phase = 1.9;
        for axis in [ShearAxis::Horizontal, ShearAxis::Vertical] {
            let g = lns_generator_shear(grid, nu, axis, amp, phase);
            let u = shear_velocity(grid, axis, amp, phase);
            let prepared = PreparedVelocity::new(&u).unwrap();
            let lower = PreparedVelocity::new(&u.laplacian()).unwrap();
            let mut rng = SeedStream::new(6).stream("oracle", 2);
            let f = SpectralField::random_scalar(grid, &mut rng, grid.k_max(), 1.0);
            let transport = prepared.advect(&f, ProductBand::Dealiased).unwrap();
            let stretched = lower.advect(&f.apply_lambda(-2.0), ProductBand::Dealiased).unwrap();
            let mut rhs = f.laplacian();
            rhs.scale(nu);
            rhs.axpy(-1.0, &transport);
            rhs.axpy(-1.0, &stretched);
            let dense = &g * field_to_band_vector(&f);
            let direct = field_to_band_vector(&rhs);
            let scale = direct.norm().max(1.0);
            assert!(
                (dense - direct).norm() < 1e-12 * scale,
                "dense linearized generator mismatch for {axis:?}"
            );
        }
    }

    #[test]
    fn quiescent_norm_scan_matches_hand_values() {
        let grid = SpectralGrid::standard(16).unwrap();
        let kappa = 0.5;
        // L2 -> L2: the |k| = 1 modes dominate.
        assert!((quiescent_norm_scan(grid, kappa, 0.0, 0.0) - (-kappa).exp()).abs() < 1e-15);
        // L2 -> H^2 with tiny kappa: growth |k|^2 e^{-kappa |k|^2} peaks inside the band.
        let got = quiescent_norm_scan(grid, 0.01, 0.0, 2.0);
        let brute = band_modes(grid)
            .iter()
            .map(|&k| ksq(k) * (-0.01 * ksq(k)).exp())
            .fold(0.0, f64::max);
        assert_eq!(got, brute);
        assert!(got > 1.0);
    }

    #[test]
    fn field_to_band_vector_roundtrips_norms() {
        let grid = SpectralGrid::standard(8).unwrap();
        let mut rng = SeedStream::new(77).stream("oracle", 3);
        let f = SpectralField::random_scalar(grid, &mut rng, grid.k_max(), 0.5);
        let v = field_to_band_vector(&f);
        let l2 = f.sobolev_norm(NormSpec::l2());
        assert!((v.norm() - l2).abs() < 1e-12 * l2.max(1e-30));
        assert_eq!(v.len(), band_modes(grid).len());
    }
}
