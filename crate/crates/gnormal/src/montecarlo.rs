//! Reproducible Monte Carlo sampling of the optimally controlled chain.
//!
//! Each path owns a ChaCha8 stream keyed by `(seed, path index)`, so the
//! sample is a pure function of the seed no matter how the paths are
//! partitioned across threads. One uniform per step is mapped onto the
//! trinomial split in the fixed order down / stay / up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backward::BackwardSolution;
use crate::error::{Error, Result};
use crate::exec;
use crate::forward::DiscreteDistribution;

/// Terminal states and empirical law of a batch of simulated paths.
#[derive(Clone, Debug)]
pub struct SampleSet {
    /// Terminal node index of each path, in path order.
    pub terminal_indices: Vec<i32>,
    pub n_samples: usize,
    pub seed: u64,
    /// Empirical masses on the terminal level (counts / n_samples).
    pub histogram: DiscreteDistribution,
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&path.to_le_bytes());
    key[16..24].copy_from_slice(b"gn-paths");
    ChaCha8Rng::from_seed(key)
}

/// Simulates `n_samples` independent chains from the origin under the
/// stored control field.
pub fn sample_paths(sol: &BackwardSolution, n_samples: usize, seed: u64) -> SampleSet {
    assert!(n_samples >= 1, "need at least one path");
    let grid = sol.grid;
    let n_steps = grid.n_steps;
    let dt_over_2h2 = grid.dt / (2.0 * grid.h * grid.h);

    let terminal_indices = exec::map_paths(n_samples, |path| {
        let mut rng = path_rng(seed, path as u64);
        let mut i: i64 = 0;
        for n in 0..n_steps {
            let q = sol.controls.get(n, i).unwrap() * dt_over_2h2;
            let u: f64 = rng.random();
            if u < q {
                i -= 1;
            } else if u >= 1.0 - q {
                i += 1;
            }
        }
        i as i32
    });

    let mut counts = vec![0u64; 2 * n_steps + 1];
    for &i in &terminal_indices {
        counts[(i as i64 + n_steps as i64) as usize] += 1;
    }
    let inv_m = 1.0 / n_samples as f64;
    let masses = counts.iter().map(|&c| c as f64 * inv_m).collect();

    SampleSet {
        terminal_indices,
        n_samples,
        seed,
        histogram: DiscreteDistribution {
            level: n_steps,
            masses,
            grid,
        },
    }
}

/// `sum_i |a_i - b_i|` over two laws on the same level and grid.
pub fn tv_distance(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<f64> {
    if a.level != b.level || a.grid.h != b.grid.h {
        return Err(Error::GridMismatch(
            "distributions live on different lattices".into(),
        ));
    }
    Ok(a.masses
        .iter()
        .zip(&b.masses)
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// One row of the empirical histogram (zero-count nodes omitted).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramRow {
    pub x: f64,
    pub empirical_mass: f64,
    pub empirical_density: f64,
}

pub fn histogram_rows(set: &SampleSet) -> Vec<HistogramRow> {
    let h = set.histogram.grid.h;
    set.histogram
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(i, p)| HistogramRow {
            x: set.histogram.x(i),
            empirical_mass: p,
            empirical_density: p / h,
        })
        .collect()
}

/// Sampling-error check on the terminal mean, flagged at five standard
/// errors rather than failed: exceedances are possible, just very unlikely.
#[derive(Clone, Copy, Debug)]
pub struct MeanCheck {
    pub empirical_mean: f64,
    pub exact_mean: f64,
    /// Standard deviation of the exact terminal law.
    pub sigma_chain: f64,
    pub within_five_sigma: bool,
}

pub fn mean_check(set: &SampleSet, exact: &DiscreteDistribution) -> Result<MeanCheck> {
    if exact.level != set.histogram.level || exact.grid.h != set.histogram.grid.h {
        return Err(Error::GridMismatch(
            "sample and distribution lattices differ".into(),
        ));
    }
    let empirical_mean = set.histogram.mean();
    let exact_mean = exact.mean();
    let sigma_chain = (exact.second_moment() - exact_mean * exact_mean).max(0.0).sqrt();
    let tolerance = 5.0 * sigma_chain / (set.n_samples as f64).sqrt();
    Ok(MeanCheck {
        empirical_mean,
        exact_mean,
        sigma_chain,
        within_five_sigma: (empirical_mean - exact_mean).abs() <= tolerance,
    })
}
