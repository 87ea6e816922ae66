//! Maximum-score assignment via shortest augmenting paths with potentials
//! (Jonker-Volgenant on the cost form).
//!
//! Each order row gets a private zero-cost dummy column, so a maximum-weight
//! *partial* matching of the original problem is exactly a minimum-cost
//! *full* matching here, and infeasible pairs are skipped structurally —
//! no infinities or big-M constants enter the arithmetic. Column scans run
//! in ascending index order, which makes the result deterministic.

use super::{Assignment, ScoreMatrix};

pub fn solve_assignment(scores: &ScoreMatrix) -> Assignment {
    let n = scores.n_drivers();
    let w = scores.n_orders();
    if scores.is_empty() {
        return Assignment::default();
    }
    let m = n + w; // real drivers then one dummy per order

    // cost(row j, col i) = -score for feasible real pairs, 0 for the row's
    // own dummy, undefined (skipped) elsewhere.
    let cost = |row: usize, col: usize| -> Option<f64> {
        if col < n {
            scores.get(col, row).map(|s| -s)
        } else if col == n + row {
            Some(0.0)
        } else {
            None
        }
    };

    // 1-based columns; col 0 is the virtual start column.
    let mut row_potential = vec![0.0f64; w + 1];
    let mut col_potential = vec![0.0f64; m + 1];
    let mut matched_row = vec![0usize; m + 1]; // 0 = free
    let mut way = vec![0usize; m + 1];

    for row in 1..=w {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_to = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                if let Some(c) = cost(i0 - 1, j - 1) {
                    let cur = c - row_potential[i0] - col_potential[j];
                    if cur < min_to[j] {
                        min_to[j] = cur;
                        way[j] = j0;
                    }
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            debug_assert!(delta.is_finite(), "dummy column always reachable");
            for j in 0..=m {
                if used[j] {
                    row_potential[matched_row[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }

    let mut pairs = Vec::new();
    for col in 1..=n {
        let row = matched_row[col];
        if row != 0 {
            pairs.push((col - 1, row - 1)); // (driver, order)
        }
    }
    Assignment::from_pairs(pairs)
}
