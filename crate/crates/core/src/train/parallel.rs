//! Data-parallel execution lanes for the two hot loops: per-step candidate
//! scoring and per-batch gradient accumulation.
//!
//! Both lanes are written so the `parallel` (rayon) build and the
//! sequential fallback perform bit-identical arithmetic: scoring writes
//! into disjoint indexed rows, and gradients accumulate within fixed-size
//! chunks that are then reduced in chunk order. Results never depend on
//! the feature flag or the thread count. The `_seq` variants stay
//! available in parallel builds for the criterion benchmarks.

use crate::nn::{BackpropScratch, Grads, MlpParams, Scratch};

/// Samples per gradient chunk. Part of the numeric contract: changing it
/// changes summation order and therefore checkpoint bytes.
pub const GRAD_CHUNK: usize = 16;

/// Score `n_rows × cands_per_row` feature rows (flattened, row-major).
pub fn score_rows(
    net: &MlpParams,
    features: &[f64],
    n_rows: usize,
    cands_per_row: usize,
) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let dim = net.input_dim();
        debug_assert_eq!(features.len(), n_rows * cands_per_row * dim);
        let mut out = vec![0.0; n_rows * cands_per_row];
        out.par_chunks_mut(cands_per_row.max(1))
            .enumerate()
            .for_each_init(
                || Scratch::for_net(net),
                |scratch, (row, row_out)| {
                    let base = row * cands_per_row * dim;
                    for (k, slot) in row_out.iter_mut().enumerate() {
                        let f = &features[base + k * dim..base + (k + 1) * dim];
                        *slot = net.forward_into(f, scratch);
                    }
                },
            );
        out
    }
    #[cfg(not(feature = "parallel"))]
    {
        score_rows_seq(net, features, n_rows, cands_per_row)
    }
}

/// Sequential reference implementation of [`score_rows`].
pub fn score_rows_seq(
    net: &MlpParams,
    features: &[f64],
    n_rows: usize,
    cands_per_row: usize,
) -> Vec<f64> {
    let dim = net.input_dim();
    debug_assert_eq!(features.len(), n_rows * cands_per_row * dim);
    let mut out = vec![0.0; n_rows * cands_per_row];
    let mut scratch = Scratch::for_net(net);
    for row in 0..n_rows {
        let base = row * cands_per_row * dim;
        for k in 0..cands_per_row {
            let f = &features[base + k * dim..base + (k + 1) * dim];
            out[row * cands_per_row + k] = net.forward_into(f, &mut scratch);
        }
    }
    out
}

/// Per-chunk accumulator: gradients plus scalar telemetry.
pub struct ChunkAcc {
    pub grads: Grads,
    pub loss_sum: f64,
    pub kl_sum: f64,
}

impl ChunkAcc {
    fn zeros(net: &MlpParams) -> Self {
        Self {
            grads: Grads::zeros_like(net),
            loss_sum: 0.0,
            kl_sum: 0.0,
        }
    }

    fn merge(&mut self, other: &ChunkAcc) {
        self.grads.add_assign(&other.grads);
        self.loss_sum += other.loss_sum;
        self.kl_sum += other.kl_sum;
    }
}

/// Run `f(item, acc, scratch)` for `0..n_items` in fixed chunks of
/// [`GRAD_CHUNK`], reducing chunk results in index order. `init` builds a
/// per-thread scratch value.
pub fn accumulate_chunked<S, I, F>(net: &MlpParams, n_items: usize, init: I, f: F) -> ChunkAcc
where
    I: Fn() -> S + Sync,
    F: Fn(usize, &mut ChunkAcc, &mut S) + Sync,
    S: Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let n_chunks = n_items.div_ceil(GRAD_CHUNK).max(1);
        let partials: Vec<ChunkAcc> = (0..n_chunks)
            .into_par_iter()
            .map_init(&init, |scratch, c| {
                let mut acc = ChunkAcc::zeros(net);
                let end = ((c + 1) * GRAD_CHUNK).min(n_items);
                for item in c * GRAD_CHUNK..end {
                    f(item, &mut acc, scratch);
                }
                acc
            })
            .collect();
        let mut total = ChunkAcc::zeros(net);
        for p in &partials {
            total.merge(p);
        }
        total
    }
    #[cfg(not(feature = "parallel"))]
    {
        accumulate_chunked_seq(net, n_items, init, f)
    }
}

/// Sequential reference implementation of [`accumulate_chunked`]; uses the
/// same chunk boundaries and reduction order.
pub fn accumulate_chunked_seq<S, I, F>(net: &MlpParams, n_items: usize, init: I, f: F) -> ChunkAcc
where
    I: Fn() -> S,
    F: Fn(usize, &mut ChunkAcc, &mut S),
{
    let n_chunks = n_items.div_ceil(GRAD_CHUNK).max(1);
    let mut scratch = init();
    let mut total = ChunkAcc::zeros(net);
    for c in 0..n_chunks {
        let mut acc = ChunkAcc::zeros(net);
        let end = ((c + 1) * GRAD_CHUNK).min(n_items);
        for item in c * GRAD_CHUNK..end {
            f(item, &mut acc, &mut scratch);
        }
        total.merge(&acc);
    }
    total
}

/// Indexed parallel map with a per-thread scratch; output order is by
/// index, so results are mode-independent.
pub fn map_indexed<S, I, F, R>(n_items: usize, init: I, f: F) -> Vec<R>
where
    I: Fn() -> S + Sync,
    F: Fn(usize, &mut S) -> R + Sync,
    R: Send,
    S: Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_items)
            .into_par_iter()
            .map_init(&init, |scratch, i| f(i, scratch))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        (0..n_items).map(|i| f(i, &mut scratch)).collect()
    }
}
