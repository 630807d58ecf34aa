//! Thin 2d FFT layer over `rustfft`.
//!
//! Transforms are unnormalized: `fft2_inverse` evaluates Σ_k c_k e^{+i k·x_j}
//! on the m×m collocation grid x_j = 2π j / m, and `fft2_forward` computes the
//! plain DFT sums Σ_j v_j e^{−i k·x_j} (callers divide by m² to recover
//! coefficients). Plans are cached per thread, so the functions stay pure from
//! the caller's point of view while repeated solves reuse twiddle tables.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(m: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry((m, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(m)
                } else {
                    planner.plan_fft_inverse(m)
                }
            })
            .clone()
    })
}

fn transpose(m: usize, data: &mut [Complex64]) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

fn fft2(m: usize, data: &mut [Complex64], forward: bool) {
    assert_eq!(data.len(), m * m, "fft2 expects an m×m buffer");
    let p = plan(m, forward);
    p.process(data); // rows
    transpose(m, data);
    p.process(data); // former columns
    transpose(m, data);
}

/// In-place unnormalized inverse transform (spectral bins → collocation values).
pub fn fft2_inverse(m: usize, data: &mut [Complex64]) {
    fft2(m, data, false);
}

/// In-place unnormalized forward transform (collocation values → m²·coefficients).
pub fn fft2_forward(m: usize, data: &mut [Complex64]) {
    fft2(m, data, true);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_roundtrip_scales_by_m_squared() {
        let m = 8;
        let mut data: Vec<Complex64> = (0..m * m)
            .map(|i| Complex64::new(i as f64, (i % 3) as f64 - 1.0))
            .collect();
        let original = data.clone();
        fft2_forward(m, &mut data);
        fft2_inverse(m, &mut data);
        let scale = (m * m) as f64;
        for (a, b) in data.iter().zip(&original) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_bin_is_a_plane_wave() {
        let m = 16;
        let mut data = vec![Complex64::new(0.0, 0.0); m * m];
        // bin (k1, k2) = (3, m−2) ≡ (3, −2)
        data[3 * m + (m - 2)] = Complex64::new(1.0, 0.0);
        fft2_inverse(m, &mut data);
        let (k1, k2) = (3.0, -2.0);
        for i in 0..m {
            for j in 0..m {
                let x = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                let y = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                let expected = Complex64::from_polar(1.0, k1 * x + k2 * y);
                assert!((data[i * m + j] - expected).norm() < 1e-10);
            }
        }
    }
}
