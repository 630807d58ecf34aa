//! Norm-independence of λ₁ for a genuinely random base flow. The velocity is
//! a shear whose axis and phase are redrawn every unit of time, so the
//! time-one maps do not commute and no single eigenproblem gives the answer.
//! The sweep measures the top exponent in H⁻¹, L², and H¹; the report's
//! norm-independence check asserts the three agree within three combined
//! standard errors.
//!
//! `configs/renewal_norm_sweep.toml` is the full-size version (N = 64,
//! sixteen seeds); this copy is small enough to finish in a few seconds.

use lyapnorm::lab::{self, ExperimentConfig, ExperimentKind, ModelConfig};
use lyapnorm::Result;

fn main() -> Result<()> {
    let out = std::env::temp_dir().join("lyapnorm-example-renewal-sweep");
    let cfg = ExperimentConfig {
        experiment: "renewal-sweep-demo".into(),
        kind: ExperimentKind::PsaNormSweep,
        grid_n: 32,
        kappa: Some(0.05),
        nu: None,
        norms: vec![-1.0, 0.0, 1.0],
        seeds: vec![1, 2, 3, 4],
        horizon: 150,
        kappa_list: vec![],
        epsilon: None,
        delta: None,
        probe_dim: None,
        gamma_prime: None,
        output_dir: out.clone(),
        model: Some(ModelConfig::RenewalShear { amplitude: 2.0 }),
    };

    let summary = lab::run_config(&cfg)?;
    println!(
        "ran {} seeds × {} norms in {:.1}s",
        summary.seeds,
        cfg.norms.len(),
        summary.wall_seconds
    );

    let report = lab::report(&out)?;
    print!("{}", report.render());

    println!("\nper-norm means (exponents are per unit time):");
    for s in &cfg.norms {
        let lambda = report.metrics[&format!("lambda.s={s}")];
        let se = report.metrics[&format!("stderr.s={s}")];
        println!("  s = {s:+.1}: λ̂₁ = {lambda:+.6} ± {se:.6}");
    }
    Ok(())
}
