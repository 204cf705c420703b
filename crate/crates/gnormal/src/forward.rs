//! Forward propagation of probability mass through the controlled tree.
//!
//! Starting from a unit mass at the origin, each level applies the
//! transition rows fixed by the stored decision-time controls:
//!
//! ```text
//! p_i^n = q_{i-1} p_{i-1}^{n-1} + (1 - 2 q_i) p_i^{n-1} + q_{i+1} p_{i+1}^{n-1},
//! q_j   = sigma_j^2(n-1) dt / (2 h^2),
//! ```
//!
//! so the forward chain is exactly the chain the backward recursion
//! optimized and `sum_i p_i^N phi(x_i)` reproduces the root value up to
//! roundoff. Rows are stochastic, hence mass is conserved without any `h`
//! weighting; the density view divides by `h`.

use crate::backward::BackwardSolution;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::Grid;
use crate::payoff::Payoff;
use crate::central_second_diff;

/// Probability masses on the nodes of one time level.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution {
    /// Time level `n`; masses cover `i = -n ..= n`.
    pub level: usize,
    pub masses: Vec<f64>,
    pub grid: Grid,
}

impl DiscreteDistribution {
    #[inline]
    pub fn half_width(&self) -> i64 {
        self.level as i64
    }

    /// Mass at node `i` (zero outside the triangle).
    pub fn mass(&self, i: i64) -> f64 {
        if i.abs() > self.half_width() {
            return 0.0;
        }
        self.masses[(i + self.half_width()) as usize]
    }

    pub fn x(&self, i: i64) -> f64 {
        self.grid.x(i)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(2)
    }

    fn moment(&self, k: i32) -> f64 {
        let hw = self.half_width();
        self.masses
            .iter()
            .enumerate()
            .map(|(j, &p)| p * self.grid.x(j as i64 - hw).powi(k))
            .sum()
    }

    /// `(node index, mass)` pairs in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let hw = self.half_width();
        self.masses
            .iter()
            .enumerate()
            .map(move |(j, &p)| (j as i64 - hw, p))
    }
}

/// Outcome of a forward run; per-level history is retained on request
/// (`history[n]` is the level-`n` distribution, including the terminal one).
#[derive(Clone, Debug)]
pub struct ForwardRun {
    pub terminal: DiscreteDistribution,
    pub history: Option<Vec<DiscreteDistribution>>,
}

/// Propagates the unit mass at the origin through all `N` levels.
pub fn propagate(sol: &BackwardSolution, keep_history: bool) -> Result<ForwardRun> {
    let grid = sol.grid;
    let n_steps = grid.n_steps;
    let dt_over_2h2 = grid.dt / (2.0 * grid.h * grid.h);

    let mut current = vec![1.0f64];
    let mut history: Vec<DiscreteDistribution> = Vec::new();
    if keep_history {
        history.push(DiscreteDistribution {
            level: 0,
            masses: current.clone(),
            grid,
        });
    }

    for n in 1..=n_steps {
        let prev = &current;
        let controls = sol.controls.level(n - 1);
        // target node i = k - n; source slice indices are shifted by the
        // narrower half-width of level n-1
        let next = exec::map_nodes(2 * n + 1, |k| {
            let mut acc = 0.0;
            if k >= 2 {
                // mass arriving from the left neighbor
                acc += controls[k - 2] * dt_over_2h2 * prev[k - 2];
            }
            if k >= 1 && k - 1 < prev.len() {
                let q = controls[k - 1] * dt_over_2h2;
                acc += (1.0 - 2.0 * q) * prev[k - 1];
            }
            if k < prev.len() {
                acc += controls[k] * dt_over_2h2 * prev[k];
            }
            acc
        });
        for (k, &p) in next.iter().enumerate() {
            let node = k as i64 - n as i64;
            if !p.is_finite() {
                return Err(Error::NonFiniteValue { level: n, node });
            }
            if p < 0.0 {
                return Err(Error::NegativeMass { level: n, node });
            }
        }
        current = next;
        if keep_history {
            history.push(DiscreteDistribution {
                level: n,
                masses: current.clone(),
                grid,
            });
        }
    }

    Ok(ForwardRun {
        terminal: DiscreteDistribution {
            level: n_steps,
            masses: current,
            grid,
        },
        history: if keep_history { Some(history) } else { None },
    })
}

/// Linear functional `sum_i p_i phi(x_i)` of the given level.
pub fn expectation_forward(dist: &DiscreteDistribution, payoff: &Payoff) -> f64 {
    dist.iter().map(|(i, p)| p * payoff.eval(dist.x(i))).sum()
}

/// One row of the density view: `density * h = mass` by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityRow {
    pub x: f64,
    pub mass: f64,
    pub density: f64,
}

/// Mass and density per node, sorted by position.
#[derive(Clone, Debug)]
pub struct DensityTable {
    pub rows: Vec<DensityRow>,
    /// Grid spacing of the generating lattice.
    pub h: f64,
}

impl DensityTable {
    pub fn x_min(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.x)
    }

    pub fn x_max(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.x)
    }

    /// Piecewise-linear density interpolant; `None` outside the table span.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        if self.rows.is_empty() || x < self.x_min() || x > self.x_max() {
            return None;
        }
        // uniform spacing h makes the bracketing index arithmetic; positions
        // landing on a node (up to rounding) take that node's value exactly
        let u = (x - self.x_min()) / self.h;
        if (u - u.round()).abs() <= 1e-9 {
            let j = (u.round() as usize).min(self.rows.len() - 1);
            return Some(self.rows[j].density);
        }
        let j = (u.floor() as usize).min(self.rows.len() - 2);
        let frac = u - j as f64;
        let (a, b) = (self.rows[j].density, self.rows[j + 1].density);
        Some(a + frac * (b - a))
    }
}

/// Density view of a distribution (all nodes, including zero-mass ones).
pub fn density(dist: &DiscreteDistribution) -> DensityTable {
    let h = dist.grid.h;
    let rows = dist
        .iter()
        .map(|(i, p)| DensityRow {
            x: dist.x(i),
            mass: p,
            density: p / h,
        })
        .collect();
    DensityTable { rows, h }
}

/// Residual and magnitude scale of the discrete Fokker-Planck weak form.
#[derive(Clone, Copy, Debug)]
pub struct WeakFormReport {
    /// `|sum_i (p_i^0 - p_i^N) psi_i h + sum_{n,i} p_i^n (sigma_i^n/2) d2h psi_i h dt|`;
    /// an exact rearrangement of the forward scheme, zero up to roundoff.
    pub residual: f64,
    /// Sum of absolute term magnitudes, for scaling tolerance checks.
    pub term_scale: f64,
}

/// Evaluates the summation-by-parts identity of the forward scheme against a
/// (time-independent) test function. Needs the per-level history.
pub fn weak_form_residual<F>(
    run: &ForwardRun,
    sol: &BackwardSolution,
    testfn: F,
) -> Result<WeakFormReport>
where
    F: Fn(f64) -> f64,
{
    let history = run.history.as_ref().ok_or(Error::HistoryMissing)?;
    let grid = sol.grid;
    let n_steps = grid.n_steps;
    if history.len() != n_steps + 1 {
        return Err(Error::GridMismatch(format!(
            "history holds {} levels, expected {}",
            history.len(),
            n_steps + 1
        )));
    }
    let h = grid.h;
    let h2 = h * h;

    let mut residual = 0.0f64;
    let mut scale = 0.0f64;

    // boundary terms: sum_i (p_i^0 - p_i^N) psi(x_i) h
    let initial: f64 = history[0]
        .iter()
        .map(|(i, p)| p * testfn(grid.x(i)))
        .sum::<f64>()
        * h;
    let terminal: f64 = history[n_steps]
        .iter()
        .map(|(i, p)| p * testfn(grid.x(i)))
        .sum::<f64>()
        * h;
    residual += initial - terminal;
    scale += initial.abs() + terminal.abs();

    // interior: sum_{n=0}^{N-1} sum_i p_i^n (sigma_i^2 / 2) d2h psi(x_i) h dt
    let weight = h * grid.dt;
    for n in 0..n_steps {
        let controls = sol.controls.level(n);
        let mut level_sum = 0.0f64;
        let mut level_abs = 0.0f64;
        for (j, (i, p)) in history[n].iter().enumerate() {
            let x = grid.x(i);
            let d2psi = central_second_diff(testfn(x - h), testfn(x), testfn(x + h), h2);
            let term = p * 0.5 * controls[j] * d2psi;
            level_sum += term;
            level_abs += term.abs();
        }
        residual += level_sum * weight;
        scale += level_abs * weight;
    }

    Ok(WeakFormReport {
        residual: residual.abs(),
        term_scale: scale,
    })
}
