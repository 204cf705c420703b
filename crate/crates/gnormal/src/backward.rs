//! Backward trinomial tree for the G-expectation.
//!
//! Dynamic programming on the controlled trinomial chain: at each node the
//! one-step expectation is maximized over the variance interval, which is
//! linear in `sigma^2` and therefore attained at an endpoint. The recursion
//! is equivalently an explicit monotone finite difference scheme for the
//! backward G-heat equation
//!
//! ```text
//! U_i^n = U_i^{n+1} + (dt/2) * sigma^2(D) * D,    D = d2h U_i^{n+1},
//! ```
//!
//! with `sigma^2(D)` the bang-bang selection. The triangular domain needs no
//! boundary condition: node `(n, i)` depends only on level-`(n+1)` nodes
//! `i-1 ..= i+1`, all of which exist for `|i| <= n`.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::Grid;
use crate::lattice::Lattice;
use crate::payoff::Payoff;
use crate::{central_second_diff, select_sigma_sq};

/// Default switching tolerance: curvature within `[-tol, tol]` of zero takes
/// the lower variance, suppressing sign chatter from roundoff.
pub const DEFAULT_SWITCH_TOL: f64 = 1e-6;

/// Algebraically identical per-node update expressions; both are kept so the
/// scheme equivalence can be asserted numerically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum UpdateForm {
    /// `U + (dt/2) sigma^2 D` with `D` the centered second difference.
    #[default]
    Difference,
    /// Stochastic-row form `q U_left + (1 - 2q) U_center + q U_right`.
    Probability,
}

/// Value lattice, control lattice, and root value of one backward solve.
#[derive(Clone, Debug)]
pub struct BackwardSolution {
    /// `U_i^n` on the triangular domain, level `n` spanning `|i| <= n`.
    pub values: Lattice,
    /// Decision-time variances `sigma^2 in {sigma_lo_sq, sigma_hi_sq}` for
    /// levels `0 ..= N-1`; the control at `(n, i)` drives the transition
    /// from level `n` to `n+1` out of node `i`.
    pub controls: Lattice,
    /// Root value `U_0^0`, the G-expectation estimate.
    pub root: f64,
    pub grid: Grid,
    pub tol: f64,
}

/// One backward sweep from the terminal payoff to the root.
pub fn solve_backward(grid: &Grid, payoff: &Payoff, tol: f64) -> Result<BackwardSolution> {
    solve_backward_with_form(grid, payoff, tol, UpdateForm::default())
}

pub fn solve_backward_with_form(
    grid: &Grid,
    payoff: &Payoff,
    tol: f64,
    form: UpdateForm,
) -> Result<BackwardSolution> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "switching tolerance must be nonnegative, got {tol}"
        )));
    }
    if grid.cfl > grid.cfl_bound() {
        return Err(Error::CflViolation {
            cfl: grid.cfl,
            bound: grid.cfl_bound(),
        });
    }
    let n_steps = grid.n_steps;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); n_steps + 1];
    let mut controls: Vec<Vec<f64>> = vec![Vec::new(); n_steps];

    let n_half = n_steps as i64;
    let terminal = exec::map_nodes(2 * n_steps + 1, |k| payoff.eval(grid.x(k as i64 - n_half)));
    check_finite(&terminal, n_steps)?;
    let phi_sup = terminal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values[n_steps] = terminal;

    for n in (0..n_steps).rev() {
        let (row, ctrl) = step_level(
            &values[n + 1],
            grid.params.sigma_lo_sq,
            grid.params.sigma_hi_sq,
            grid.dt,
            grid.h,
            tol,
            form,
        );
        check_finite(&row, n)?;
        // discrete maximum principle: each update is a convex combination
        let sup = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            sup <= phi_sup + 1e-12,
            "stability bound violated: {sup} > {phi_sup}"
        );
        values[n] = row;
        controls[n] = ctrl;
    }

    let root = values[0][0];
    Ok(BackwardSolution {
        values: Lattice::from_levels(values),
        controls: Lattice::from_levels(controls),
        root,
        grid: *grid,
        tol,
    })
}

/// One backward step: consumes a row of half-width `m` and produces the
/// row of half-width `m - 1` together with the controls chosen at each node.
pub fn step_level(
    next: &[f64],
    sigma_lo_sq: f64,
    sigma_hi_sq: f64,
    dt: f64,
    h: f64,
    tol: f64,
    form: UpdateForm,
) -> (Vec<f64>, Vec<f64>) {
    debug_assert!(next.len() >= 3 && next.len() % 2 == 1);
    let h2 = h * h;
    let half_dt = 0.5 * dt;
    exec::map_nodes_pair(next.len() - 2, |k| {
        let (left, center, right) = (next[k], next[k + 1], next[k + 2]);
        let d = central_second_diff(left, center, right, h2);
        let sigma_sq = select_sigma_sq(d, sigma_lo_sq, sigma_hi_sq, tol);
        let value = match form {
            UpdateForm::Difference => center + half_dt * sigma_sq * d,
            UpdateForm::Probability => {
                let q = sigma_sq * dt / (2.0 * h2);
                q * left + (1.0 - 2.0 * q) * center + q * right
            }
        };
        (value, sigma_sq)
    })
}

/// The G-expectation estimate `U_0^0`.
pub fn expectation(sol: &BackwardSolution) -> f64 {
    sol.root
}

/// Decision-time control at `(n, i)`, valid for `0 <= n <= N-1`, `|i| <= n`.
pub fn control_at(sol: &BackwardSolution, n: usize, i: i64) -> Result<f64> {
    if n >= sol.grid.n_steps || i.abs() > n as i64 {
        return Err(Error::IndexOutOfLattice { level: n, node: i });
    }
    Ok(sol.controls.get(n, i).unwrap())
}

fn check_finite(row: &[f64], level: usize) -> Result<()> {
    let hw = (row.len() as i64 - 1) / 2;
    for (k, v) in row.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                level,
                node: k as i64 - hw,
            });
        }
    }
    Ok(())
}
