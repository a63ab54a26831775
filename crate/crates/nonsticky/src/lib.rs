//! Monte Carlo laboratory for the Euler-Maruyama scheme on degenerate
//! one-dimensional SDEs `dX = sigma(X) dW` with non-sticky boundary
//! behaviour.
//!
//! The crate simulates the scheme with the off-zero initial shift,
//! couples resolutions through a dyadic Brownian lattice, estimates
//! occupation and local-time functionals, and checks the scheme's law
//! against an exact squared-Bessel sampler for CEV-type coefficients
//! `sigma(x) = |x|^alpha`, `alpha` in (0, 1/2).

pub mod brownian;
pub mod coefficients;
pub mod em;
pub mod estimators;
pub mod oracles;
pub mod rng;
pub mod studies;

pub use brownian::{generate_lattice, BrownianLattice};
pub use coefficients::{
    classify_level, evaluate_sigma, inverse_square_integral, CoefficientKind, CoefficientSpec,
    IntegrabilityVerdict, LevelClass,
};
pub use em::{
    fold_path, shift_initial, simulate_coupled_family, simulate_path, simulate_path_with, GridPath,
    SdeProblem, ShiftPolicy,
};
pub use estimators::{
    abs_sup_difference, local_time_estimate, occupation_near, occupation_profile, p_norm_aggregate,
    EstimatorKind, OccupationProfile, PNormEstimate,
};
pub use oracles::{
    besq_exact_sample, cev_nonsticky_exact_abs_sample, g_inverse, g_transform, BesqParams,
};
pub use rng::RngKey;
pub use studies::{
    run_abs_strong_cauchy, run_occupation_scaling, run_strong_cauchy, run_trap_control,
    run_weak_ks, two_sample_ks, ConvergenceReport, StudyConfig, StudyKind,
};
