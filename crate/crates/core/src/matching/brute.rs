//! Exhaustive assignment oracle for small instances.

use super::{Assignment, ScoreMatrix};
use crate::{Error, Result};

/// Search every constraint-satisfying 0-1 assignment and return the best by
/// total score, breaking ties toward the lexicographically smallest pair
/// sequence sorted by (order, driver). Guarded to 8×8.
pub fn brute_force_assignment(scores: &ScoreMatrix) -> Result<Assignment> {
    let n = scores.n_drivers();
    let w = scores.n_orders();
    if n > 8 || w > 8 {
        return Err(Error::OracleTooLarge { rows: n, cols: w });
    }

    struct Best {
        total: f64,
        pairs_by_order: Vec<(usize, usize)>,
    }
    let mut best = Best {
        total: f64::NEG_INFINITY,
        pairs_by_order: Vec::new(),
    };

    // Recurse over orders; each takes a free feasible driver or stays
    // unmatched. Pairs accumulate in (order, driver) order, so the running
    // total is already the canonical sum.
    fn recurse(
        scores: &ScoreMatrix,
        order: usize,
        driver_used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        total: f64,
        best: &mut Best,
    ) {
        if order == scores.n_orders() {
            let better = total > best.total
                || (total == best.total && current.as_slice() < best.pairs_by_order.as_slice());
            if better {
                best.total = total;
                best.pairs_by_order = current.clone();
            }
            return;
        }
        // Option: leave this order unmatched.
        recurse(scores, order + 1, driver_used, current, total, best);
        for driver in 0..scores.n_drivers() {
            if driver_used[driver] {
                continue;
            }
            if let Some(s) = scores.get(driver, order) {
                driver_used[driver] = true;
                current.push((order, driver));
                recurse(scores, order + 1, driver_used, current, total + s, best);
                current.pop();
                driver_used[driver] = false;
            }
        }
    }

    let mut driver_used = vec![false; n];
    let mut current = Vec::new();
    recurse(scores, 0, &mut driver_used, &mut current, 0.0, &mut best);

    Ok(Assignment::from_pairs(
        best.pairs_by_order.iter().map(|&(j, i)| (i, j)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_matrix_yields_empty() {
        let a = brute_force_assignment(&ScoreMatrix::new(0, 0)).unwrap();
        assert!(a.is_empty());
    }

    #[test]
    fn size_guard_rejects_oversize() {
        assert!(brute_force_assignment(&ScoreMatrix::new(9, 2)).is_err());
    }

    #[test]
    fn infeasible_row_excluded() {
        // 3 drivers x 2 orders, driver 0 fully occupied.
        let mut m = ScoreMatrix::new(3, 2);
        m.set(1, 0, 0.4);
        m.set(1, 1, 0.9);
        m.set(2, 0, 0.8);
        m.set(2, 1, 0.3);
        let a = brute_force_assignment(&m).unwrap();
        // Hand enumeration: best is (1,1)+(2,0) = 1.7.
        assert_eq!(a.pairs(), &[(1, 1), (2, 0)]);
    }

    #[test]
    fn tie_breaks_to_lexicographically_smallest() {
        // Both diagonals score 1.0; {(0,0),(1,1)} sorts before {(0,1),(1,0)}.
        let mut m = ScoreMatrix::new(2, 2);
        m.set(0, 0, 0.5);
        m.set(0, 1, 0.5);
        m.set(1, 0, 0.5);
        m.set(1, 1, 0.5);
        let a = brute_force_assignment(&m).unwrap();
        assert_eq!(a.pairs(), &[(0, 0), (1, 1)]);
    }
}
