use rayon::prelude::*;

use super::{check_counts, SelectionResult};
use crate::beamforming::rate;
use crate::error::{FasError, Result};
use crate::linalg::CMatrix;

/// Default cap on the number of (rx, tx) subset pairs enumerated.
pub const DEFAULT_COMBO_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// `C(N_tx, n_tx) * C(N_rx, n_rx)`, saturating.
pub fn combination_count(total_tx: usize, total_rx: usize, n_tx: usize, n_rx: usize) -> u128 {
    binomial(total_tx, n_tx).saturating_mul(binomial(total_rx, n_rx))
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = if k <= n {
        Some((0..k).collect::<Vec<_>>())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if succ[i] < n - k + i {
                succ[i] += 1;
                for j in i + 1..k {
                    succ[j] = succ[j - 1] + 1;
                }
                next = Some(succ);
                break;
            }
        }
        Some(cur)
    })
}

/// The subset pair maximizing the waterfilled rate. Ties go to the
/// lexicographically smallest (rx, tx) pair.
pub fn exhaustive_select(
    h: &CMatrix,
    n_tx: usize,
    n_rx: usize,
    snr: f64,
    combo_limit: u128,
) -> Result<SelectionResult> {
    let (total_rx, total_tx) = h.shape();
    check_counts(total_tx, total_rx, n_tx, n_rx)?;
    let count = combination_count(total_tx, total_rx, n_tx, n_rx);
    if count > combo_limit {
        return Err(FasError::TooManyCombinations {
            count,
            limit: combo_limit,
        });
    }
    let rx_sets: Vec<Vec<usize>> = subsets(total_rx, n_rx).collect();
    let tx_sets: Vec<Vec<usize>> = subsets(total_tx, n_tx).collect();

    let per_rx: Vec<Result<(f64, usize)>> = rx_sets
        .par_iter()
        .map(|rx| {
            let rows = h.select_rows(rx);
            let mut best = (f64::NEG_INFINITY, 0);
            for (t, tx) in tx_sets.iter().enumerate() {
                let r = rate(&rows.select_columns(tx), snr)?;
                if r > best.0 {
                    best = (r, t);
                }
            }
            Ok(best)
        })
        .collect();

    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (ri, res) in per_rx.into_iter().enumerate() {
        let (r, ti) = res?;
        if r > best.0 {
            best = (r, ri, ti);
        }
    }
    SelectionResult::new(
        tx_sets[best.2].clone(),
        rx_sets[best.1].clone(),
        total_tx,
        total_rx,
    )
}
