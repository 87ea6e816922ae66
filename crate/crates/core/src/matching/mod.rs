//! Per-step order assignment: maximum-score bipartite matching under
//! degree constraints (each order to at most one driver, each driver at
//! most one new order), plus a nearest-driver greedy baseline and a
//! brute-force oracle for cross-checking the solver.

mod brute;
mod greedy;
mod solver;

pub use brute::brute_force_assignment;
pub use greedy::greedy_assignment;
pub use solver::solve_assignment;

use crate::routing::Point;

/// Dense driver × order score matrix. Infeasible pairs carry a sentinel
/// (`None`) that never enters arithmetic.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    n_drivers: usize,
    n_orders: usize,
    data: Vec<Option<f64>>,
}

impl ScoreMatrix {
    /// All pairs start infeasible.
    pub fn new(n_drivers: usize, n_orders: usize) -> Self {
        Self {
            n_drivers,
            n_orders,
            data: vec![None; n_drivers * n_orders],
        }
    }

    pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Self {
        let n_drivers = rows.len();
        let n_orders = rows.first().map_or(0, |r| r.len());
        let mut m = Self::new(n_drivers, n_orders);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_orders, "ragged score matrix");
            for (j, &s) in row.iter().enumerate() {
                if let Some(s) = s {
                    m.set(i, j, s);
                }
            }
        }
        m
    }

    pub fn n_drivers(&self) -> usize {
        self.n_drivers
    }

    pub fn n_orders(&self) -> usize {
        self.n_orders
    }

    pub fn set(&mut self, driver: usize, order: usize, score: f64) {
        debug_assert!(
            (0.0..=1.0).contains(&score),
            "score out of [0,1]: {score}"
        );
        self.data[driver * self.n_orders + order] = Some(score);
    }

    pub fn mark_infeasible(&mut self, driver: usize, order: usize) {
        self.data[driver * self.n_orders + order] = None;
    }

    pub fn get(&self, driver: usize, order: usize) -> Option<f64> {
        self.data[driver * self.n_orders + order]
    }

    pub fn is_empty(&self) -> bool {
        self.n_drivers == 0 || self.n_orders == 0
    }

    /// Mutable iteration over feasible entries (exploration noise hook).
    pub fn for_each_feasible_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for cell in &mut self.data {
            if let Some(v) = cell {
                f(v);
            }
        }
    }
}

/// Selected driver-order pairs. Both degree constraints hold by
/// construction of the producers; `validate_against` re-checks them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    /// (driver, order) pairs sorted by driver index.
    pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Total score summed in canonical (order, driver) order so equal pair
    /// sets always produce bit-identical totals.
    pub fn total_score(&self, scores: &ScoreMatrix) -> f64 {
        let mut by_order: Vec<(usize, usize)> =
            self.pairs.iter().map(|&(i, j)| (j, i)).collect();
        by_order.sort_unstable();
        by_order
            .iter()
            .map(|&(j, i)| scores.get(i, j).unwrap_or(0.0))
            .sum()
    }

    /// Check degree constraints and feasibility against a score matrix.
    pub fn validate_against(&self, scores: &ScoreMatrix) -> crate::Result<()> {
        let mut driver_used = vec![false; scores.n_drivers()];
        let mut order_used = vec![false; scores.n_orders()];
        for &(i, j) in &self.pairs {
            if i >= scores.n_drivers() || j >= scores.n_orders() {
                return Err(crate::Error::InvalidAssignment(format!(
                    "pair ({i},{j}) out of bounds"
                )));
            }
            if driver_used[i] {
                return Err(crate::Error::InvalidAssignment(format!(
                    "driver {i} assigned twice"
                )));
            }
            if order_used[j] {
                return Err(crate::Error::InvalidAssignment(format!(
                    "order {j} assigned twice"
                )));
            }
            if scores.get(i, j).is_none() {
                return Err(crate::Error::InvalidAssignment(format!(
                    "pair ({i},{j}) is infeasible"
                )));
            }
            driver_used[i] = true;
            order_used[j] = true;
        }
        Ok(())
    }
}

/// Inputs the greedy baseline needs about one driver.
#[derive(Debug, Clone, Copy)]
pub struct GreedyDriver {
    pub pos: Point,
    pub available: bool,
}
