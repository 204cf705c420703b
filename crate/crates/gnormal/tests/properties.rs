//! Property tests for the scheme invariants: monotonicity of both backward
//! steps, conservation of the forward step, duality against random
//! measurements, and metric behavior of the error norms.

use proptest::prelude::*;

use gnormal::backward::{step_level, UpdateForm};
use gnormal::forward::DensityRow;
use gnormal::{
    build_grid, l2_density_error, parse_payoff, propagate, solve_backward, DensityTable, GParams,
    Window,
};

fn lattice_row(max_half_width: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_half_width).prop_flat_map(|hw| {
        prop::collection::vec(-100.0f64..100.0, 2 * hw + 1)
    })
}

/// Ordered pair (lower, upper) with lower[i] <= upper[i].
fn ordered_rows(max_half_width: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    lattice_row(max_half_width).prop_flat_map(|upper| {
        let len = upper.len();
        (
            Just(upper),
            prop::collection::vec(0.0f64..50.0, len),
        )
            .prop_map(|(upper, gaps)| {
                let lower: Vec<f64> = upper.iter().zip(&gaps).map(|(u, g)| u - g).collect();
                (lower, upper)
            })
    })
}

proptest! {
    /// One backward value step preserves entrywise order under cfl <= 1.
    #[test]
    fn backward_step_is_monotone((lower, upper) in ordered_rows(12), ratio in 1.0f64..2.0) {
        let grid = build_grid(GParams::new(0.04, 1.0, 1.0).unwrap(), 50, ratio, false).unwrap();
        for form in [UpdateForm::Difference, UpdateForm::Probability] {
            let (a, _) = step_level(&lower, 0.04, 1.0, grid.dt, grid.h, 0.0, form);
            let (b, _) = step_level(&upper, 0.04, 1.0, grid.dt, grid.h, 0.0, form);
            for (x, y) in a.iter().zip(&b) {
                // exact-arithmetic order survives up to accumulated rounding
                prop_assert!(x - y <= 1e-12 * x.abs().max(y.abs()).max(1.0));
            }
        }
    }

    /// One flux step preserves entrywise order under the strict bound cfl <= 1/2.
    #[test]
    fn flux_step_is_monotone((lower, upper) in ordered_rows(12), ratio in 1.5f64..3.0) {
        let grid = build_grid(GParams::new(0.04, 1.0, 1.0).unwrap(), 50, ratio, true).unwrap();
        let a = gnormal::auxiliary::w_step(&lower, 0.04, 1.0, grid.dt, grid.h, 0.0);
        let b = gnormal::auxiliary::w_step(&upper, 0.04, 1.0, grid.dt, grid.h, 0.0);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x - y <= 1e-12 * x.abs().max(y.abs()).max(1.0));
        }
    }

    /// A backward value step never exceeds the sup of its inputs.
    #[test]
    fn backward_step_respects_max_norm(row in lattice_row(12), ratio in 1.0f64..2.0) {
        let grid = build_grid(GParams::new(0.04, 1.0, 1.0).unwrap(), 50, ratio, false).unwrap();
        let sup = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (out, ctrl) = step_level(&row, 0.04, 1.0, grid.dt, grid.h, 1e-6, UpdateForm::Difference);
        for v in &out {
            prop_assert!(v.abs() <= sup * (1.0 + 1e-12));
        }
        for c in &ctrl {
            prop_assert!(*c == 0.04 || *c == 1.0);
        }
    }

    /// Forward mass stays a probability vector and reproduces the root value
    /// for random cubic measurements.
    #[test]
    fn duality_for_random_cubics(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        c in -3.0f64..3.0,
        n in 4usize..40,
    ) {
        let text = format!("{a} + {b}*x + {c}*x^3");
        let payoff = parse_payoff(&text).unwrap();
        let grid = build_grid(GParams::new(0.04, 1.0, 1.0).unwrap(), n, 1.1, false).unwrap();
        let sol = solve_backward(&grid, &payoff, 1e-6).unwrap();
        let run = propagate(&sol, true).unwrap();
        for dist in run.history.as_ref().unwrap() {
            prop_assert!((dist.total_mass() - 1.0).abs() <= 1e-12);
            prop_assert!(dist.masses.iter().all(|&p| p >= 0.0));
        }
        let forward: f64 = run
            .terminal
            .iter()
            .map(|(i, p)| p * payoff.eval(run.terminal.x(i)))
            .sum();
        prop_assert!((forward - sol.root).abs() <= 1e-12 * sol.root.abs().max(1.0));
    }

    /// Windowed L2 density error behaves like a metric on a fixed grid.
    #[test]
    fn density_error_is_metric_like(
        fa in prop::collection::vec(0.0f64..2.0, 41),
        fb in prop::collection::vec(0.0f64..2.0, 41),
        fc in prop::collection::vec(0.0f64..2.0, 41),
    ) {
        let h = 0.1;
        let table = |vals: &[f64]| DensityTable {
            rows: vals
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    let x = (k as i64 - 20) as f64 * h;
                    DensityRow { x, mass: d * h, density: d }
                })
                .collect(),
            h,
        };
        let (ta, tb, tc) = (table(&fa), table(&fb), table(&fc));
        let w = Window::new(-1.5, 1.5).unwrap();
        let dab = l2_density_error(&ta, &tb, w).unwrap();
        let dba = l2_density_error(&tb, &ta, w).unwrap();
        prop_assert!((dab - dba).abs() <= 1e-12 * dab.max(1.0));
        prop_assert_eq!(l2_density_error(&ta, &ta, w).unwrap(), 0.0);
        let dac = l2_density_error(&ta, &tc, w).unwrap();
        let dcb = l2_density_error(&tc, &tb, w).unwrap();
        prop_assert!(dab <= dac + dcb + 1e-12);
    }

    /// Parsed polynomials evaluate by Horner-equivalent composition.
    #[test]
    fn parser_evaluates_random_quadratics(
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        c in -5.0f64..5.0,
        x in -4.0f64..4.0,
    ) {
        let payoff = parse_payoff(&format!("{a} + {b}*x + {c}*x^2")).unwrap();
        let direct = a + b * x + c * x * x;
        prop_assert!((payoff.eval(x) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        let d2 = payoff.eval_d2(x);
        prop_assert!((d2 - 2.0 * c).abs() <= 1e-12 * c.abs().max(1.0));
    }
}
