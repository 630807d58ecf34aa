//! Quiescent sanity check: with u ≡ 0 the advection–diffusion cocycle is the
//! bare heat semigroup, so the top Lyapunov exponent must equal −κ exactly —
//! and must not depend on which Sobolev norm measures growth, since every
//! H^s norm sees the same dominant mode decay.
//!
//! The full-size run lives in `configs/heat_baseline.toml`; this program runs
//! a smaller copy into a temporary directory and prints the report.

use lyapnorm::lab::{self, ExperimentConfig, ExperimentKind, ModelConfig};
use lyapnorm::Result;

fn main() -> Result<()> {
    let kappa = 0.5;
    let out = std::env::temp_dir().join("lyapnorm-example-heat-baseline");
    let cfg = ExperimentConfig {
        experiment: "heat-baseline-demo".into(),
        kind: ExperimentKind::PsaNormSweep,
        grid_n: 16,
        kappa: Some(kappa),
        nu: None,
        norms: vec![-1.0, 0.0, 1.0],
        seeds: vec![1, 2],
        horizon: 150,
        kappa_list: vec![],
        epsilon: None,
        delta: None,
        probe_dim: None,
        gamma_prime: None,
        output_dir: out.clone(),
        model: Some(ModelConfig::Quiescent),
    };

    let summary = lab::run_config(&cfg)?;
    println!(
        "ran {} seeds in {:.2}s → {}",
        summary.seeds,
        summary.wall_seconds,
        out.display()
    );

    let report = lab::report(&out)?;
    print!("{}", report.render());

    println!("\nmeasured top exponent vs the exact heat rate −κ = {:+.3}:", -kappa);
    for s in &cfg.norms {
        let key = format!("lambda.s={s}");
        let lambda = report.metrics[&key];
        println!("  s = {s:+.1}: λ̂₁ = {lambda:+.15} (error {:.2e})", (lambda + kappa).abs());
    }
    Ok(())
}
