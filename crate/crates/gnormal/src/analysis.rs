//! Grid-refinement error norms and empirical convergence rates.
//!
//! Density studies compare terminal densities in a windowed discrete L2
//! norm against a fine reference run; curvature studies compare `V` and `W`
//! in the max norm at an intermediate time.
//!
//! Both norms are evaluated on the *reference* grid with the coarse field
//! extended to it (linearly for densities, piecewise-constantly for the
//! rough curvature/flux fields). Sampling on the coarse nodes instead is
//! unusable for a refinement ladder here: successive resolutions alternate
//! between node-aligned and sqrt(2)-offset lattices relative to the
//! reference, and the curvature fields carry O(1) spikes along the control
//! switching curves whose sampled height then depends on that alignment,
//! not on accuracy.

use crate::auxiliary::curvature_from_solution;
use crate::backward::{solve_backward, BackwardSolution};
use crate::error::{Error, Result};
use crate::forward::{density, propagate, DensityTable};
use crate::grid::{build_grid, GParams};
use crate::payoff::Payoff;

/// Closed interval used to window error norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParam(format!(
                "window bounds must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// One row of a density refinement study.
#[derive(Clone, Copy, Debug)]
pub struct RefinementRow {
    pub n_steps: usize,
    pub h: f64,
    pub error: f64,
    /// Empirical rate against the previous row; absent on the first row and
    /// when either error sits at roundoff level.
    pub rate: Option<f64>,
}

/// One row of a curvature/flux refinement study.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureRow {
    pub n_steps: usize,
    pub h: f64,
    pub err_v: f64,
    pub order_v: Option<f64>,
    pub err_w: f64,
    pub order_w: Option<f64>,
}

/// Windowed discrete L2 distance `sqrt(sum_j (f_coarse(x_j) - f_ref(x_j))^2 h_ref)`
/// quadratured over the reference nodes inside `window`, with the coarse
/// density linearly interpolated at each reference node. Both tables must
/// span the window.
pub fn l2_density_error(
    coarse: &DensityTable,
    reference: &DensityTable,
    window: Window,
) -> Result<f64> {
    let covered = |t: &DensityTable| t.x_min() <= window.lo && window.hi <= t.x_max();
    if !covered(coarse) || !covered(reference) {
        return Err(Error::WindowOutOfRange {
            lo: window.lo,
            hi: window.hi,
        });
    }
    let mut sum = 0.0f64;
    for row in &reference.rows {
        if !window.contains(row.x) {
            continue;
        }
        let f_coarse = coarse.density_at(row.x).ok_or(Error::WindowOutOfRange {
            lo: window.lo,
            hi: window.hi,
        })?;
        let diff = f_coarse - row.density;
        sum += diff * diff;
    }
    Ok((sum * reference.h).sqrt())
}

/// Empirical order `log(err_a / err_b) / log(h_a / h_b)`; either refinement
/// direction is accepted, so the result is symmetric under swapping.
pub fn conv_rate(err_a: f64, h_a: f64, err_b: f64, h_b: f64) -> Result<f64> {
    if !(err_a > 0.0 && err_b > 0.0 && h_a > 0.0 && h_b > 0.0) {
        return Err(Error::InvalidParam(
            "errors and spacings must be positive".into(),
        ));
    }
    if h_a == h_b {
        return Err(Error::InvalidParam(
            "spacings must differ to define a rate".into(),
        ));
    }
    Ok((err_a / err_b).ln() / (h_a / h_b).ln())
}

/// Errors below this are considered exhausted by roundoff; no rate is quoted.
const RATE_FLOOR: f64 = 1e-12;

fn rate_between(prev: &(f64, f64), cur: (f64, f64)) -> Option<f64> {
    let ((err_p, h_p), (err_c, h_c)) = (*prev, cur);
    if err_p <= RATE_FLOOR || err_c <= RATE_FLOOR {
        return None;
    }
    conv_rate(err_p, h_p, err_c, h_c).ok()
}

fn sorted_checked(n_list: &[usize], n_ref: usize) -> Result<Vec<usize>> {
    if n_list.is_empty() {
        return Err(Error::InvalidParam("n_list must be nonempty".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if n_ref <= *ns.last().unwrap() {
        return Err(Error::InvalidParam(format!(
            "reference resolution {n_ref} must exceed max(n_list)"
        )));
    }
    Ok(ns)
}

fn terminal_density(
    params: GParams,
    payoff: &Payoff,
    n: usize,
    ratio: f64,
) -> Result<(BackwardSolution, DensityTable)> {
    let grid = build_grid(params, n, ratio, false)?;
    let sol = solve_backward(&grid, payoff, crate::backward::DEFAULT_SWITCH_TOL)?;
    let run = propagate(&sol, false)?;
    Ok((sol, density(&run.terminal)))
}

/// Refinement study of terminal densities against a fine reference run.
pub fn refine_study_density(
    params: GParams,
    payoff: &Payoff,
    n_list: &[usize],
    n_ref: usize,
    ratio: f64,
    window: Window,
) -> Result<Vec<RefinementRow>> {
    let ns = sorted_checked(n_list, n_ref)?;
    let (_, reference) = terminal_density(params, payoff, n_ref, ratio)?;
    let mut rows: Vec<RefinementRow> = Vec::with_capacity(ns.len());
    let mut prev: Option<(f64, f64)> = None;
    for n in ns {
        let (sol, table) = terminal_density(params, payoff, n, ratio)?;
        let error = l2_density_error(&table, &reference, window)?;
        let rate = prev.as_ref().and_then(|p| rate_between(p, (error, sol.grid.h)));
        rows.push(RefinementRow {
            n_steps: n,
            h: sol.grid.h,
            error,
            rate,
        });
        prev = Some((error, sol.grid.h));
    }
    Ok(rows)
}

/// `V` and `W` rows of the level nearest `t_eval`, with the level's spacing
/// and leftmost coordinate.
struct CurvatureSlice {
    v: Vec<f64>,
    w: Vec<f64>,
    h: f64,
    x0: f64,
}

fn curvature_slice(sol: &BackwardSolution, t_eval: f64) -> CurvatureSlice {
    let grid = sol.grid;
    let level = ((t_eval / grid.dt).round() as usize).clamp(1, grid.n_steps);
    let curv = curvature_from_solution(sol);
    let hw = level as i64 - 1;
    CurvatureSlice {
        v: curv.v.level(level).to_vec(),
        w: curv.w.level(level).to_vec(),
        h: grid.h,
        x0: grid.x(-hw),
    }
}

impl CurvatureSlice {
    fn x_max(&self) -> f64 {
        self.x0 + (self.v.len() - 1) as f64 * self.h
    }

    /// Distance from `(ref_v, ref_w)` to the piecewise-constant extension
    /// of the slice at `x`. On a cell edge the extension jumps and has no
    /// single value, and grid-aligned resolutions put reference nodes on
    /// edges exactly, where the nearest-node choice would flip on one ulp
    /// of coordinate rounding; such nodes score against the closer of the
    /// two adjacent readings instead.
    fn pc_dist(&self, x: f64, ref_v: f64, ref_w: f64) -> (f64, f64) {
        let len = self.v.len();
        let u = (x - self.x0) / self.h;
        let on_edge = (u - u.floor() - 0.5).abs() <= 1e-9;
        if on_edge {
            let k0 = (u.floor().max(0.0) as usize).min(len - 1);
            let k1 = (u.ceil().max(0.0) as usize).min(len - 1);
            (
                (self.v[k0] - ref_v).abs().min((self.v[k1] - ref_v).abs()),
                (self.w[k0] - ref_w).abs().min((self.w[k1] - ref_w).abs()),
            )
        } else {
            let k = (u.round().max(0.0) as usize).min(len - 1);
            ((self.v[k] - ref_v).abs(), (self.w[k] - ref_w).abs())
        }
    }
}

/// Refinement study of the discrete curvature and flux at the level nearest
/// `t_eval`: the sup over reference nodes in the window of the difference
/// between the piecewise-constant extension of the coarse field and the
/// reference field, the discrete counterpart of the locally uniform
/// convergence this ladder certifies.
pub fn refine_study_curvature(
    params: GParams,
    payoff: &Payoff,
    n_list: &[usize],
    n_ref: usize,
    ratio: f64,
    t_eval: f64,
    window: Window,
) -> Result<Vec<CurvatureRow>> {
    let ns = sorted_checked(n_list, n_ref)?;
    let horizon = params.horizon;
    if !(t_eval > 0.0 && t_eval < horizon) {
        return Err(Error::InvalidParam(format!(
            "t_eval must lie strictly inside (0, {horizon}), got {t_eval}"
        )));
    }
    let ref_grid = build_grid(params, n_ref, ratio, false)?;
    let ref_sol = solve_backward(&ref_grid, payoff, crate::backward::DEFAULT_SWITCH_TOL)?;
    let reference = curvature_slice(&ref_sol, t_eval);
    drop(ref_sol);
    if reference.x0 > window.lo || reference.x_max() < window.hi {
        return Err(Error::WindowOutOfRange {
            lo: window.lo,
            hi: window.hi,
        });
    }

    let mut rows: Vec<CurvatureRow> = Vec::with_capacity(ns.len());
    let mut prev: Option<(f64, f64, f64)> = None; // (err_v, err_w, h)
    for n in ns {
        let grid = build_grid(params, n, ratio, false)?;
        let sol = solve_backward(&grid, payoff, crate::backward::DEFAULT_SWITCH_TOL)?;
        let slice = curvature_slice(&sol, t_eval);
        if slice.x0 > window.lo || slice.x_max() < window.hi {
            return Err(Error::WindowOutOfRange {
                lo: window.lo,
                hi: window.hi,
            });
        }
        let mut err_v = 0.0f64;
        let mut err_w = 0.0f64;
        for (j, (&rv, &rw)) in reference.v.iter().zip(&reference.w).enumerate() {
            let x = reference.x0 + j as f64 * reference.h;
            if !window.contains(x) {
                continue;
            }
            let (dv, dw) = slice.pc_dist(x, rv, rw);
            err_v = err_v.max(dv);
            err_w = err_w.max(dw);
        }
        let (order_v, order_w) = match prev {
            Some((pv, pw, ph)) => (
                rate_between(&(pv, ph), (err_v, grid.h)),
                rate_between(&(pw, ph), (err_w, grid.h)),
            ),
            None => (None, None),
        };
        rows.push(CurvatureRow {
            n_steps: n,
            h: grid.h,
            err_v,
            order_v,
            err_w,
            order_w,
        });
        prev = Some((err_v, err_w, grid.h));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::DensityRow;
    use crate::payoff::builtin_payoff;

    fn paper_params() -> GParams {
        GParams::new(0.04, 1.0, 1.0).unwrap()
    }

    fn synthetic_table(h: f64, n: usize, f: impl Fn(f64) -> f64) -> DensityTable {
        let rows = (-(n as i64)..=n as i64)
            .map(|i| {
                let x = i as f64 * h;
                DensityRow {
                    x,
                    mass: f(x) * h,
                    density: f(x),
                }
            })
            .collect();
        DensityTable { rows, h }
    }

    #[test]
    fn identical_tables_have_zero_error() {
        let t = synthetic_table(0.1, 30, |x| (-x * x).exp());
        let err = l2_density_error(&t, &t, Window::new(-2.0, 2.0).unwrap()).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn constant_offset_error_is_c_sqrt_length() {
        let h = 0.05;
        let base = synthetic_table(h, 100, |x| (-x * x).exp());
        let offset = synthetic_table(h, 100, |x| (-x * x).exp() + 0.3);
        let window = Window::new(-2.0, 2.0).unwrap();
        let err = l2_density_error(&offset, &base, window).unwrap();
        let count = offset.rows.iter().filter(|r| window.contains(r.x)).count();
        let exact = 0.3 * ((count as f64) * h).sqrt();
        assert!((err - exact).abs() <= 1e-12 * exact);
        // up to node-count discretization this is c * sqrt(window length)
        assert!((err - 0.3 * 4.0f64.sqrt()).abs() <= 0.01);
    }

    #[test]
    fn window_past_either_span_errors() {
        let wide = synthetic_table(0.5, 10, |_| 1.0); // span [-5, 5]
        let narrow = synthetic_table(0.1, 20, |_| 1.0); // span [-2, 2]
        let window = Window::new(-4.0, 4.0).unwrap();
        assert!(matches!(
            l2_density_error(&wide, &narrow, window),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(matches!(
            l2_density_error(&narrow, &wide, window),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(l2_density_error(&wide, &wide, window).is_ok());
    }

    #[test]
    fn rate_formula_reproduces_reported_values() {
        let r = conv_rate(5.949e-2, 0.110000, 3.448e-2, 0.077782).unwrap();
        assert!((r - 1.574).abs() <= 2e-3, "rate {r}");
        let r = conv_rate(1.739e-2, 0.055000, 8.566e-3, 0.038891).unwrap();
        assert!((r - 2.042).abs() <= 2e-3, "rate {r}");
        // halving both gives order exactly 1
        let r = conv_rate(0.5, 1.0, 0.25, 0.5).unwrap();
        assert!((r - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn rate_is_swap_symmetric_and_validated() {
        let a = conv_rate(0.1, 0.2, 0.04, 0.1).unwrap();
        let b = conv_rate(0.04, 0.1, 0.1, 0.2).unwrap();
        assert_eq!(a, b);
        assert!(conv_rate(-0.1, 0.2, 0.04, 0.1).is_err());
        assert!(conv_rate(0.1, 0.2, 0.04, 0.2).is_err());
    }

    #[test]
    fn single_entry_study_has_one_unrated_row() {
        let rows = refine_study_density(
            paper_params(),
            &builtin_payoff("sin3x").unwrap(),
            &[50],
            150,
            1.1,
            Window::new(-3.0, 3.0).unwrap(),
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].rate.is_none());
        assert!(rows[0].error > 0.0);
    }

    #[test]
    fn density_errors_shrink_under_refinement() {
        let rows = refine_study_density(
            paper_params(),
            &builtin_payoff("sin3x").unwrap(),
            &[50, 100, 200],
            800,
            1.1,
            Window::new(-3.0, 3.0).unwrap(),
        )
        .unwrap();
        assert!(rows[1].error < rows[0].error);
        assert!(rows[2].error < rows[1].error);
        assert!(rows[2].rate.is_some());
    }

    #[test]
    fn quadratic_payoff_density_errors_stay_small() {
        // constant-control family: only the O(h^2) shape correction differs
        let rows = refine_study_density(
            paper_params(),
            &builtin_payoff("square").unwrap(),
            &[50, 100],
            400,
            1.1,
            Window::new(-3.0, 3.0).unwrap(),
        )
        .unwrap();
        assert!(rows[0].error < 5e-3, "err {}", rows[0].error);
        assert!(rows[1].error < rows[0].error);
    }

    #[test]
    fn curvature_study_shrinks_and_validates_inputs() {
        let params = paper_params();
        let payoff = builtin_payoff("sin3x").unwrap();
        let window = Window::new(-2.0, 2.0).unwrap();
        let rows =
            refine_study_curvature(params, &payoff, &[50, 100], 400, 1.1, 0.5, window).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].err_w < rows[0].err_w);
        assert!(rows[1].order_w.is_some() && rows[0].order_w.is_none());
        assert!(matches!(
            refine_study_curvature(params, &payoff, &[50], 400, 1.1, 1.5, window),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            refine_study_curvature(params, &payoff, &[400], 400, 1.1, 0.5, window),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn terminal_time_curvature_errors_vanish() {
        // at t -> T both lattices share the payoff's second difference, so
        // only interpolation error of a smooth function remains
        let params = paper_params();
        let payoff = builtin_payoff("square").unwrap();
        let rows = refine_study_curvature(
            params,
            &payoff,
            &[100],
            400,
            1.1,
            0.999,
            Window::new(-2.0, 2.0).unwrap(),
        )
        .unwrap();
        assert!(rows[0].err_v <= 1e-8, "err_v {}", rows[0].err_v);
    }
}
