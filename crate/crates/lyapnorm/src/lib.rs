//! Lyapunov exponents of compact linear cocycles across a scale of Sobolev norms.
//!
//! The crate bundles three layers:
//!
//! * **Solvers** — a pseudospectral engine for mean-zero fields on the 2-torus
//!   ([`spectral`]), seeded stationary velocity models ([`flows`]), and the
//!   time-one solution operators of advection–diffusion and linearized 2d
//!   Navier–Stokes in vorticity form, together with their time-reversed
//!   adjoints ([`cocycles`]).
//! * **Geometry** — finite-dimensional subspace machinery under non-Euclidean
//!   norms: norm-comparison constants, Hausdorff distances between unit
//!   spheres, Busemann determinants, minimum norms, oblique and simultaneous
//!   complements, and quotient cocycles ([`geometry`]).
//! * **Estimators** — top exponents, spectra with multiplicity, volume growth,
//!   Oseledets-filtration diagnostics, and the regularity functions
//!   D̄_ε, D_ε, K_δ over any cocycle exposing a linear time-one action
//!   ([`lyapunov`], with synthetic matrix models in [`matrices`] and
//!   independent cross-check routines in [`reference`]).
//!
//! The experiment runner behind the `lyapnorm` binary lives in [`lab`]; it is
//! ordinary library code, so every experiment can also be driven from Rust.
//!
//! # Examples directory
//!
//! The `examples/` directory is the primary tour of the crate — one runnable
//! program per capability:
//!
//! ```text
//! examples/
//! ├── heat_baseline.rs        — u ≡ 0 exponents equal −κ in every norm
//! ├── frozen_shear_oracle.rs  — estimator vs dense-generator spectrum at N=16
//! ├── renewal_norm_sweep.rs   — norm-independence of λ₁ under a renewal shear
//! ├── stochastic_nse_sweep.rs — same for linearized NSE over a stochastic base
//! ├── kappa_scaling.rs        — κ^{−s/2} regularization slopes of ‖S¹‖
//! ├── estimate_stability.rs   — commutator/lower-order ratios under refinement
//! ├── banach_geometry_tour.rs — determinant/angle/complement inequalities
//! ├── matrix_spectra.rs       — triangular cocycles vs Birkhoff oracles
//! └── regularity_functions.rs — D̄_ε across norms and the K_δ comparison
//! ```
//!
//! Run one with `cargo run --release --example renewal_norm_sweep`.
//!
//! # Conventions
//!
//! Fields are real, mean-zero, and stored as full complex Fourier truncations
//! with Hermitian symmetry; the homogeneous Sobolev norms are
//! ‖f‖_{H^s} = (Σ_k |k|^{2s}|f̂(k)|²)^{1/2} over retained modes k ≠ 0. Time
//! steps are dyadic (1/2^m) so that trajectory composition and re-runs are
//! bit-exact. All randomness derives from one master seed through named
//! sub-streams; thread count never affects results.

pub mod cocycles;
pub mod error;
pub mod flows;
pub mod geometry;
pub mod lab;
pub mod lyapunov;
pub mod matrices;
pub mod reference;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
