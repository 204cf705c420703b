//! Discrete curvature, nonlinear flux, and the derived flux scheme.
//!
//! The curvature `V_i^n = d2h U_i^n` drives the bang-bang control, and the
//! flux `W_i^n = sigma^2(V_i^n) V_i^n` satisfies its own explicit recursion
//! obtained by applying `d2h` to the value recursion (the two operators
//! commute on interior nodes):
//!
//! ```text
//! V_i^n = V_i^{n+1} + (dt/2) d2h W_i^{n+1},      W_i^n = sigma^2(V_i^n) V_i^n.
//! ```
//!
//! The textbook form of the step divides by `sigma^2(W_i^n)`, which
//! references the unknown sign of the output; evaluating the bracket
//! `B = W/sigma^2(W) + (dt/2) d2h W` first resolves that sign in one pass,
//! since `sigma^2 > 0` makes `sign(W_i^n) = sign(B)`. The standalone scheme
//! certifies that the control field extracted from the backward tree is the
//! one its own limit equation produces.

use crate::backward::BackwardSolution;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::Grid;
use crate::lattice::Lattice;
use crate::payoff::Payoff;
use crate::{central_second_diff, select_sigma_sq};

/// Curvature `V` and flux `W` rows; level `n` spans `|i| <= n - 1`
/// (level 0 is empty).
#[derive(Clone, Debug)]
pub struct CurvatureLattice {
    pub v: Lattice,
    pub w: Lattice,
    pub grid: Grid,
    pub tol: f64,
}

/// Terminal data for the flux scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WTerminal {
    /// `W_i^N = sigma^2(d2h phi) d2h phi` from lattice payoff values. This is
    /// the exact rearrangement of the backward tree and the default.
    #[default]
    DiscreteCurvature,
    /// `W_i^N = sigma^2(phi'') phi''` from the analytic second derivative;
    /// consistent with the same limit but offset from the tree data by
    /// O(h^2) at the terminal level.
    AnalyticSecondDerivative,
}

/// Classifies which variance branch produced a flux value. Scheme-generated
/// fluxes never land strictly between `sigma_lo_sq * tol` and
/// `sigma_hi_sq * tol`, so the midpoint threshold is rounding-safe.
#[inline(always)]
fn sigma_of_flux(w: f64, sigma_lo_sq: f64, sigma_hi_sq: f64, tol: f64) -> f64 {
    if w > 0.5 * (sigma_lo_sq + sigma_hi_sq) * tol {
        sigma_hi_sq
    } else {
        sigma_lo_sq
    }
}

/// Second-differences the value lattice of a finished backward solve.
pub fn curvature_from_solution(sol: &BackwardSolution) -> CurvatureLattice {
    let grid = sol.grid;
    let h2 = grid.h * grid.h;
    let (lo, hi) = (grid.params.sigma_lo_sq, grid.params.sigma_hi_sq);
    let n_steps = grid.n_steps;
    let mut v_levels: Vec<Vec<f64>> = Vec::with_capacity(n_steps + 1);
    let mut w_levels: Vec<Vec<f64>> = Vec::with_capacity(n_steps + 1);
    for n in 0..=n_steps {
        let row = sol.values.level(n);
        if row.len() < 3 {
            v_levels.push(Vec::new());
            w_levels.push(Vec::new());
            continue;
        }
        let (v_row, w_row) = exec::map_nodes_pair(row.len() - 2, |k| {
            let v = central_second_diff(row[k], row[k + 1], row[k + 2], h2);
            let w = select_sigma_sq(v, lo, hi, sol.tol) * v;
            (v, w)
        });
        v_levels.push(v_row);
        w_levels.push(w_row);
    }
    CurvatureLattice {
        v: Lattice::from_levels(v_levels),
        w: Lattice::from_levels(w_levels),
        grid,
        tol: sol.tol,
    }
}

/// One backward step of the flux scheme: half-width shrinks by one.
pub fn w_step(
    next: &[f64],
    sigma_lo_sq: f64,
    sigma_hi_sq: f64,
    dt: f64,
    h: f64,
    tol: f64,
) -> Vec<f64> {
    debug_assert!(next.len() >= 3 && next.len() % 2 == 1);
    let h2 = h * h;
    let half_dt = 0.5 * dt;
    exec::map_nodes(next.len() - 2, |k| {
        let (left, center, right) = (next[k], next[k + 1], next[k + 2]);
        let sigma_center = sigma_of_flux(center, sigma_lo_sq, sigma_hi_sq, tol);
        let bracket =
            center / sigma_center + half_dt * central_second_diff(left, center, right, h2);
        select_sigma_sq(bracket, sigma_lo_sq, sigma_hi_sq, tol) * bracket
    })
}

/// Runs the standalone flux scheme down to level 1 (level 0 has no interior
/// node). Returns the flux lattice `W`; level `n` spans `|i| <= n - 1`.
pub fn solve_w_scheme(
    grid: &Grid,
    payoff: &Payoff,
    tol: f64,
    terminal: WTerminal,
) -> Result<Lattice> {
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
    let (lo, hi) = (grid.params.sigma_lo_sq, grid.params.sigma_hi_sq);
    let h2 = grid.h * grid.h;
    let n_half = n_steps as i64;

    let terminal_row = match terminal {
        WTerminal::DiscreteCurvature => {
            let phi: Vec<f64> =
                exec::map_nodes(2 * n_steps + 1, |k| payoff.eval(grid.x(k as i64 - n_half)));
            exec::map_nodes(phi.len().saturating_sub(2), |k| {
                let v = central_second_diff(phi[k], phi[k + 1], phi[k + 2], h2);
                select_sigma_sq(v, lo, hi, tol) * v
            })
        }
        WTerminal::AnalyticSecondDerivative => {
            exec::map_nodes(2 * n_steps - 1, |k| {
                let d2 = payoff.eval_d2(grid.x(k as i64 - (n_half - 1)));
                select_sigma_sq(d2, lo, hi, tol) * d2
            })
        }
    };
    check_finite(&terminal_row, n_steps)?;
    let w_sup = terminal_row.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut levels: Vec<Vec<f64>> = vec![Vec::new(); n_steps + 1];
    levels[n_steps] = terminal_row;
    for n in (1..n_steps).rev() {
        let row = w_step(&levels[n + 1], lo, hi, grid.dt, grid.h, tol);
        check_finite(&row, n)?;
        let sup = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            sup <= w_sup + 1e-12 * w_sup.max(1.0),
            "flux stability bound violated at level {n}: {sup} > {w_sup}"
        );
        levels[n] = row;
    }
    Ok(Lattice::from_levels(levels))
}

/// Node-wise agreement between the standalone flux scheme and the flux
/// second-differenced out of the backward value lattice.
#[derive(Clone, Copy, Debug, Default)]
pub struct EquivalenceReport {
    /// `max |W_scheme - W_solution|` over common nodes.
    pub max_w_abs: f64,
    /// Same, scaled per node by `max(1, |a|, |b|)`.
    pub max_w_rel: f64,
    /// `max |V_implied - V_solution|` with `V_implied = W / sigma^2(W)`.
    pub max_v_abs: f64,
    pub max_v_rel: f64,
    pub nodes_compared: usize,
}

pub fn control_convergence_report(
    sol: &BackwardSolution,
    wlat: &Lattice,
) -> Result<EquivalenceReport> {
    let n_steps = sol.grid.n_steps;
    if wlat.n_levels() != n_steps + 1 {
        return Err(Error::GridMismatch(format!(
            "flux lattice has {} levels, solution has {}",
            wlat.n_levels(),
            n_steps + 1
        )));
    }
    for n in 1..=n_steps {
        if wlat.half_width(n) != Some(n as i64 - 1) {
            return Err(Error::GridMismatch(format!(
                "flux level {n} should span |i| <= {}",
                n - 1
            )));
        }
    }
    let curv = curvature_from_solution(sol);
    let (lo, hi) = (sol.grid.params.sigma_lo_sq, sol.grid.params.sigma_hi_sq);
    let mut report = EquivalenceReport::default();
    for n in 1..=n_steps {
        let from_scheme = wlat.level(n);
        let from_solution = curv.w.level(n);
        let v_solution = curv.v.level(n);
        for k in 0..from_scheme.len() {
            let (a, b) = (from_scheme[k], from_solution[k]);
            let dw = (a - b).abs();
            report.max_w_abs = report.max_w_abs.max(dw);
            report.max_w_rel = report.max_w_rel.max(dw / a.abs().max(b.abs()).max(1.0));
            let v_implied = a / sigma_of_flux(a, lo, hi, sol.tol);
            let dv = (v_implied - v_solution[k]).abs();
            report.max_v_abs = report.max_v_abs.max(dv);
            report.max_v_rel = report
                .max_v_rel
                .max(dv / v_implied.abs().max(v_solution[k].abs()).max(1.0));
            report.nodes_compared += 1;
        }
    }
    Ok(report)
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
