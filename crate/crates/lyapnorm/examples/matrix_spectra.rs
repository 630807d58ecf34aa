//! Finite matrix models where every Lyapunov quantity has a closed form.
//! A random upper-triangular cocycle has exponents equal to the Birkhoff
//! averages of its log diagonal — here constant, so known exactly — and a
//! block-triangular cocycle has an invariant slow subspace whose quotient
//! isolates the fast rates. This program estimates each quantity by block
//! iteration and prints it against the exact value, then re-measures the
//! spectrum in a different quadratic norm to show the estimates don't move.

use lyapnorm::lyapunov::{
    leading_spectrum, quotient_volume_growth, Exponent, MatrixCocycle, SpectrumOptions,
};
use lyapnorm::geometry::FiniteNorm;
use lyapnorm::matrices::{BlockTriangularModel, TriangularModel};
use lyapnorm::rng::SeedStream;
use lyapnorm::Result;
use nalgebra::DVector;

fn fmt(e: &Exponent) -> String {
    match e.finite() {
        Some(v) => format!("{v:+.4}"),
        None => "-inf".into(),
    }
}

fn main() -> Result<()> {
    let streams = SeedStream::new(2024);
    let steps = 20_000;

    // Upper-triangular: exponents are the sorted log diagonal.
    let diag_log = vec![0.6, 0.3, 0.05, -0.2, -0.45, -0.7];
    let model = TriangularModel::new(diag_log, 0.3, streams.stream("triangular", 0))?;
    let exact = model.exponents();
    let mut cocycle = MatrixCocycle::euclidean(model);
    let mut rng = streams.stream("block-init", 0);
    let opts = SpectrumOptions { cluster_gap: 0.0, ..SpectrumOptions::default() };
    let rec = leading_spectrum(&mut cocycle, 6, steps, "euclidean", 2024, &mut rng, &opts)?;
    println!("triangular cocycle, {steps} steps:");
    println!("  estimated χ: [{}]", rec.lambda.iter().map(fmt).collect::<Vec<_>>().join(", "));
    println!(
        "  exact     χ: [{}]",
        exact.iter().map(|v| format!("{v:+.4}")).collect::<Vec<_>>().join(", ")
    );
    let worst = rec
        .lambda
        .iter()
        .zip(&exact)
        .map(|(l, e)| (l.finite().unwrap() - e).abs())
        .fold(0.0f64, f64::max);
    println!("  worst |χ̂ − χ| = {worst:.4}");
    println!("  partial sums Σ_k consistent: {}", rec.check_partial_sums(1e-9));

    // Same model measured in a weighted quadratic norm: the spectrum is a
    // norm-independent quantity, so nothing may move beyond estimator noise.
    let model2 = TriangularModel::new(vec![0.6, 0.3, 0.05, -0.2, -0.45, -0.7], 0.3, streams.stream("triangular", 0))?;
    let weights = DVector::from_vec(vec![1.0, 2.5, 0.5, 3.0, 1.5, 0.8]);
    let norm = FiniteNorm::quadratic(weights)?;
    let mut cocycle2 = MatrixCocycle::in_norm(model2, &norm)?;
    let mut rng2 = streams.stream("block-init", 0);
    let rec2 = leading_spectrum(&mut cocycle2, 6, steps, "weighted", 2024, &mut rng2, &opts)?;
    let gap = rec
        .lambda
        .iter()
        .zip(&rec2.lambda)
        .map(|(a, b)| (a.finite().unwrap() - b.finite().unwrap()).abs())
        .fold(0.0f64, f64::max);
    println!("  re-measured in a weighted norm: max |χ̂ − χ̂′| = {gap:.2e}\n");

    // Block-triangular: quotient by the invariant slow subspace isolates the
    // fast block's volume growth.
    let model = BlockTriangularModel::new(
        vec![0.7, 0.4],
        vec![-0.4, -0.8],
        0.3,
        0.5,
        streams.stream("block-triangular", 0),
    )?;
    let oracle = model.fast_rate_sum();
    let slow = model.slow_subspace();
    let mut model = model;
    let growth = quotient_volume_growth(&mut model, &slow, steps)?;
    println!("block-triangular cocycle, quotient over the slow subspace:");
    println!(
        "  quotient volume rate: estimated {}, exact {oracle:+.4}",
        fmt(&growth.estimate.value)
    );
    println!(
        "  transversality: (1/n)·log sin∠ slope over the last quarter = {:+.5} (→ 0 when transverse)",
        growth.angle_slope
    );
    Ok(())
}
