//! Triangular per-level storage for tree-valued quantities.
//!
//! Level `n` holds a contiguous row of values centered at node 0. Value
//! lattices have half-width `n` (row length `2n + 1`); curvature and flux
//! lattices have half-width `n - 1` with an empty row at level 0.

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    levels: Vec<Vec<f64>>,
}

impl Lattice {
    /// Wraps per-level rows; every row must have odd length or be empty.
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Self {
        debug_assert!(levels.iter().all(|l| l.is_empty() || l.len() % 2 == 1));
        Self { levels }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Row of values at level `n`, node indices `-half_width ..= half_width`.
    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    /// Half-width of level `n`; `None` for an empty row.
    pub fn half_width(&self, n: usize) -> Option<i64> {
        let len = self.levels[n].len();
        if len == 0 {
            None
        } else {
            Some((len as i64 - 1) / 2)
        }
    }

    /// Value at `(n, i)` or `None` outside the stored row.
    pub fn get(&self, n: usize, i: i64) -> Option<f64> {
        let row = self.levels.get(n)?;
        let hw = (row.len() as i64 - 1) / 2;
        if row.is_empty() || i.abs() > hw {
            return None;
        }
        Some(row[(i + hw) as usize])
    }

    /// `(node index, value)` pairs of level `n` in ascending node order.
    pub fn iter_level(&self, n: usize) -> impl Iterator<Item = (i64, f64)> + '_ {
        let row = &self.levels[n];
        let hw = if row.is_empty() {
            0
        } else {
            (row.len() as i64 - 1) / 2
        };
        row.iter().enumerate().map(move |(k, &v)| (k as i64 - hw, v))
    }

    pub fn total_entries(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_entry_count_is_square() {
        // sum of (2n + 1) over n = 0..N equals (N + 1)^2
        for n_steps in [1usize, 4, 17] {
            let levels: Vec<Vec<f64>> = (0..=n_steps).map(|n| vec![0.0; 2 * n + 1]).collect();
            let lat = Lattice::from_levels(levels);
            assert_eq!(lat.total_entries(), (n_steps + 1) * (n_steps + 1));
        }
    }

    #[test]
    fn indexing_is_centered() {
        let lat = Lattice::from_levels(vec![vec![5.0], vec![1.0, 2.0, 3.0]]);
        assert_eq!(lat.get(0, 0), Some(5.0));
        assert_eq!(lat.get(1, -1), Some(1.0));
        assert_eq!(lat.get(1, 0), Some(2.0));
        assert_eq!(lat.get(1, 1), Some(3.0));
        assert_eq!(lat.get(1, 2), None);
        assert_eq!(lat.get(2, 0), None);
        let pairs: Vec<_> = lat.iter_level(1).collect();
        assert_eq!(pairs, vec![(-1, 1.0), (0, 2.0), (1, 3.0)]);
    }

    #[test]
    fn empty_level_has_no_width() {
        let lat = Lattice::from_levels(vec![vec![], vec![7.0]]);
        assert_eq!(lat.half_width(0), None);
        assert_eq!(lat.half_width(1), Some(0));
        assert_eq!(lat.get(0, 0), None);
    }
}
