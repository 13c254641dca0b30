//! Port selection: which `n_tx` of `N_tx` and `n_rx` of `N_rx` ports carry
//! RF chains.

mod exhaustive;
mod greedy;
pub mod rrqr;

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::TrialSeed;
use crate::error::{FasError, Result};
use crate::linalg::CMatrix;

pub use exhaustive::{combination_count, exhaustive_select, DEFAULT_COMBO_LIMIT};
pub use greedy::{greedy_select, DEFAULT_MIN_SEPARATION};
pub use rrqr::{qr_mimo_fas_select, rrqr_select_columns, RrqrOutcome, SwapCriterion};

/// Active port indices (zero-based, ascending) on each side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectionResult {
    pub tx_ports: Vec<usize>,
    pub rx_ports: Vec<usize>,
}

impl SelectionResult {
    /// Sorts both index sets and checks they are distinct and in range.
    pub fn new(
        mut tx_ports: Vec<usize>,
        mut rx_ports: Vec<usize>,
        total_tx: usize,
        total_rx: usize,
    ) -> Result<Self> {
        for (ports, total, side) in [
            (&mut tx_ports, total_tx, "tx"),
            (&mut rx_ports, total_rx, "rx"),
        ] {
            ports.sort_unstable();
            if ports.is_empty() {
                return Err(FasError::domain(format!("{side} selection is empty")));
            }
            if ports.windows(2).any(|w| w[0] == w[1]) {
                return Err(FasError::domain(format!("{side} selection repeats a port")));
            }
            if let Some(&last) = ports.last() {
                if last >= total {
                    return Err(FasError::domain(format!(
                        "{side} port {last} out of range for {total} ports"
                    )));
                }
            }
        }
        Ok(Self { tx_ports, rx_ports })
    }

    /// Every port on both sides.
    pub fn full(total_tx: usize, total_rx: usize) -> Self {
        Self {
            tx_ports: (0..total_tx).collect(),
            rx_ports: (0..total_rx).collect(),
        }
    }
}

pub(crate) fn check_counts(
    total_tx: usize,
    total_rx: usize,
    n_tx: usize,
    n_rx: usize,
) -> Result<()> {
    if n_tx == 0 || n_rx == 0 {
        return Err(FasError::domain("active port counts must be at least 1"));
    }
    if n_tx > total_tx || n_rx > total_rx {
        return Err(FasError::domain(format!(
            "cannot activate {n_tx}x{n_rx} of {total_tx}x{total_rx} ports"
        )));
    }
    Ok(())
}

/// Rows `rx_ports`, columns `tx_ports` of `h`.
pub fn submatrix(h: &CMatrix, sel: &SelectionResult) -> Result<CMatrix> {
    let out_of_range = sel.rx_ports.iter().any(|&r| r >= h.nrows())
        || sel.tx_ports.iter().any(|&c| c >= h.ncols());
    if out_of_range {
        return Err(FasError::domain(format!(
            "selection does not fit a {}x{} channel",
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(h.select_rows(&sel.rx_ports).select_columns(&sel.tx_ports))
}

/// Uniformly random distinct subsets drawn from `rng`.
pub fn random_select_with(
    rng: &mut ChaCha8Rng,
    total_tx: usize,
    total_rx: usize,
    n_tx: usize,
    n_rx: usize,
) -> Result<SelectionResult> {
    check_counts(total_tx, total_rx, n_tx, n_rx)?;
    let tx = sample(rng, total_tx, n_tx).into_vec();
    let rx = sample(rng, total_rx, n_rx).into_vec();
    SelectionResult::new(tx, rx, total_tx, total_rx)
}

pub fn random_select(
    seed: TrialSeed,
    total_tx: usize,
    total_rx: usize,
    n_tx: usize,
    n_rx: usize,
) -> Result<SelectionResult> {
    random_select_with(&mut seed.rng(), total_tx, total_rx, n_tx, n_rx)
}
