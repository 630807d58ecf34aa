//! Norm-independence for the linearized 2d Navier–Stokes cocycle. The base
//! flow is the vorticity of a stochastically forced Navier–Stokes solution
//! (smooth band-limited forcing, Galerkin truncation); the cocycle transports
//! a vorticity perturbation along it, lower-order coupling included. The top
//! exponent is swept across H⁻¹, L², and H¹.
//!
//! The forcing spectrum decays fast (σ_k ∝ |k|⁻⁴): the explicit advection
//! substep is only stable while dt·‖u‖² ≲ 2ν, so at ν = 0.05 the stationary
//! velocity must stay small.
//!
//! `configs/stochastic_nse_sweep.toml` is the full-size version (eight seeds,
//! horizon 200); this copy trades statistics for speed.

use lyapnorm::lab::{self, ExperimentConfig, ExperimentKind, ModelConfig};
use lyapnorm::Result;

fn main() -> Result<()> {
    let out = std::env::temp_dir().join("lyapnorm-example-nse-sweep");
    let cfg = ExperimentConfig {
        experiment: "nse-sweep-demo".into(),
        kind: ExperimentKind::LnsNormSweep,
        grid_n: 16,
        kappa: None,
        nu: Some(0.05),
        norms: vec![-1.0, 0.0, 1.0],
        seeds: vec![1, 2],
        horizon: 80,
        kappa_list: vec![],
        epsilon: None,
        delta: None,
        probe_dim: None,
        gamma_prime: None,
        output_dir: out.clone(),
        model: Some(ModelConfig::StochasticNse {
            k_cut: 3,
            decay: 4.0,
            amplitude: 0.25,
            spin_up: 16,
        }),
    };

    let summary = lab::run_config(&cfg)?;
    println!("ran {} seeds in {:.1}s", summary.seeds, summary.wall_seconds);

    let report = lab::report(&out)?;
    print!("{}", report.render());

    println!("\nper-norm means:");
    for s in &cfg.norms {
        let lambda = report.metrics[&format!("lambda.s={s}")];
        let se = report.metrics[&format!("stderr.s={s}")];
        println!("  s = {s:+.1}: λ̂₁ = {lambda:+.6} ± {se:.6}");
    }
    Ok(())
}
