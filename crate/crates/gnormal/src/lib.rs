//! Numerical toolkit for one-dimensional G-normal random variables
//! `X ~ N(0, [sigma_lo^2, sigma_hi^2])` under volatility uncertainty.
//!
//! The G-expectation `E[phi(X)]` is the value of a stochastic control
//! problem: volatility is steered inside `[sigma_lo, sigma_hi]` to maximize
//! the expected terminal measurement `phi`. This crate computes it with a
//! backward trinomial tree (equivalently, a monotone explicit finite
//! difference scheme for the G-heat equation), extracts the bang-bang
//! optimal volatility field, and then pushes probability mass forward
//! through the same transition structure to obtain the measurement-dependent
//! terminal law -- the *responsive distribution* of `X` under `phi`.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`grid`]: uncertainty parameters, parabolic mesh rule, CFL checks.
//! - [`payoff`]: built-in and parsed measurement functions with exact
//!   second derivatives.
//! - [`backward`]: the backward value recursion and optimal control field.
//! - [`auxiliary`]: discrete curvature `V = d2h U`, nonlinear flux
//!   `W = sigma^2(V) V`, and the derived standalone scheme for `W`.
//! - [`forward`]: forward mass propagation, densities, and the discrete
//!   Fokker-Planck weak-form identity.
//! - [`montecarlo`]: reproducible path sampling of the controlled chain.
//! - [`analysis`]: grid-refinement error norms and empirical rates.
//!
//! With the default `parallel` feature, per-level node updates and path
//! sampling run on rayon; the sequential fallback produces bit-identical
//! results.

pub mod analysis;
pub mod auxiliary;
pub mod backward;
pub mod error;
pub mod forward;
pub mod grid;
pub mod lattice;
pub mod montecarlo;
pub mod payoff;

mod exec;

pub use analysis::{
    conv_rate, l2_density_error, refine_study_curvature, refine_study_density, CurvatureRow,
    RefinementRow, Window,
};
pub use auxiliary::{
    control_convergence_report, curvature_from_solution, solve_w_scheme, CurvatureLattice,
    EquivalenceReport, WTerminal,
};
pub use backward::{
    control_at, expectation, solve_backward, solve_backward_with_form, BackwardSolution,
    UpdateForm, DEFAULT_SWITCH_TOL,
};
pub use error::{Error, Result};
pub use forward::{
    density, expectation_forward, propagate, weak_form_residual, DensityRow, DensityTable,
    DiscreteDistribution, ForwardRun, WeakFormReport,
};
pub use grid::{build_grid, GParams, Grid};
pub use lattice::Lattice;
pub use montecarlo::{
    histogram_rows, mean_check, sample_paths, tv_distance, HistogramRow, MeanCheck, SampleSet,
};
pub use payoff::{builtin_payoff, parse_payoff, payoff_from_spec, D2Source, Payoff};

/// Centered second difference `(left - 2 center + right) / h^2`.
///
/// Every module uses this single helper so that discrete curvatures computed
/// in different places agree bit-for-bit on identical inputs.
#[inline(always)]
pub fn central_second_diff(left: f64, center: f64, right: f64, h2: f64) -> f64 {
    (left - 2.0 * center + right) / h2
}

/// Bang-bang volatility selection: `sigma_hi_sq` where the discrete
/// curvature exceeds the switching tolerance, `sigma_lo_sq` otherwise
/// (ties and the band `|d| <= tol` take the lower branch).
#[inline(always)]
pub fn select_sigma_sq(d: f64, sigma_lo_sq: f64, sigma_hi_sq: f64, tol: f64) -> f64 {
    if d > tol {
        sigma_hi_sq
    } else {
        sigma_lo_sq
    }
}
