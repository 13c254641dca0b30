//! Column subset selection by strong rank-revealing QR.
//!
//! Starting from a column-pivoted QR, the active block (first `n` columns of
//! the permutation) is improved by swapping one active and one inactive
//! column at a time, as long as the swap score `Omega` exceeds one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_counts, SelectionResult};
use crate::error::{FasError, Result};
use crate::linalg::{pseudo_inverse, singular_values, CMatrix};

/// Swap scores above `1 + SWAP_MARGIN` trigger a swap; the margin keeps
/// rounding noise from cycling between equivalent blocks.
const SWAP_MARGIN: f64 = 1e-10;

/// `S1` counts as singular when `sigma_min < SINGULAR_RTOL * sigma_max`.
const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapCriterion {
    /// `sqrt(|S1^+ S2|^2 + |s3_l|^2 + |row_k S1^+|^2)`.
    ThreeTermSum,
    /// `sqrt(|S1^+ S2|^2 + |s3_l|^2 |row_k S1^+|^2)`, the exact factor by
    /// which the swap changes the active block's singular-value product.
    #[default]
    DetRatio,
}

/// Column-pivoted factorization `M P = Q R`.
#[derive(Debug, Clone)]
pub struct RrqrState {
    /// `permutation[j]` is the original index of column `j` of `M P`.
    pub permutation: Vec<usize>,
    pub q: CMatrix,
    /// Upper triangular in its leading `steps` columns.
    pub r: CMatrix,
    pub steps: usize,
}

/// Applies Householder steps `0..steps` to `a` in place, optionally pivoting
/// on the largest remaining column norm (ties to the lowest position).
/// Returns the unit reflector vectors.
fn householder(
    a: &mut CMatrix,
    perm: &mut [usize],
    steps: usize,
    pivot: bool,
) -> Vec<Option<Vec<Complex64>>> {
    let (m, n) = a.shape();
    let mut reflectors = Vec::with_capacity(steps);
    for k in 0..steps.min(m).min(n) {
        if pivot {
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..n {
                let s: f64 = (k..m).map(|i| a[(i, j)].norm_sqr()).sum();
                if s > best_norm {
                    best = j;
                    best_norm = s;
                }
            }
            if best != k {
                a.swap_columns(k, best);
                perm.swap(k, best);
            }
        }
        let norm = (k..m).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vn;
        }
        for j in k + 1..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| vi.conj() * a[(k + t, j)])
                .sum();
            for (t, vi) in v.iter().enumerate() {
                a[(k + t, j)] -= vi * dot * 2.0;
            }
        }
        a[(k, k)] = alpha;
        for i in k + 1..m {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
        reflectors.push(Some(v));
    }
    reflectors
}

fn assemble_q(m: usize, reflectors: &[Option<Vec<Complex64>>]) -> CMatrix {
    let mut q = CMatrix::identity(m, m);
    for (k, v) in reflectors.iter().enumerate().rev() {
        let Some(v) = v else { continue };
        for j in 0..m {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| vi.conj() * q[(k + t, j)])
                .sum();
            for (t, vi) in v.iter().enumerate() {
                q[(k + t, j)] -= vi * dot * 2.0;
            }
        }
    }
    q
}

/// Full column-pivoted QR of `m`.
pub fn pivoted_qr(m: &CMatrix) -> Result<RrqrState> {
    if m.is_empty() {
        return Err(FasError::domain("cannot factor an empty matrix"));
    }
    let mut r = m.clone();
    let mut permutation: Vec<usize> = (0..m.ncols()).collect();
    let steps = m.nrows().min(m.ncols());
    let refl = householder(&mut r, &mut permutation, steps, true);
    let q = assemble_q(m.nrows(), &refl);
    Ok(RrqrState {
        permutation,
        q,
        r,
        steps,
    })
}

/// Unpivoted factorization of `M P` for a given permutation, triangular in
/// the leading `n` columns only.
fn refactor(m: &CMatrix, permutation: &[usize], n: usize) -> RrqrState {
    let mut r = m.select_columns(permutation);
    let mut perm = permutation.to_vec();
    let refl = householder(&mut r, &mut perm, n, false);
    let q = assemble_q(m.nrows(), &refl);
    RrqrState {
        permutation: perm,
        q,
        r,
        steps: n,
    }
}

/// Swap scores for every (active position `k`, inactive position `l`) pair
/// of an `n`-column active block.
pub fn omega_matrix(state: &RrqrState, n: usize, criterion: SwapCriterion) -> Result<DMatrix<f64>> {
    let (rows, cols) = state.r.shape();
    if n == 0 || n > rows.min(cols) || n > state.steps {
        return Err(FasError::domain(format!(
            "active block of {n} columns does not fit a factorization with {} triangular steps",
            state.steps.min(rows).min(cols)
        )));
    }
    let s1 = state.r.view((0, 0), (n, n)).into_owned();
    let s2 = state.r.view((0, n), (n, cols - n)).into_owned();
    let s3_norms: Vec<f64> = (n..cols)
        .map(|j| {
            (n..rows)
                .map(|i| state.r[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let sv = singular_values(&s1);
    let smax = sv[0];
    let smin = sv[sv.len() - 1];
    if !(smin >= SINGULAR_RTOL * smax) || smax == 0.0 {
        return Err(FasError::NumericalRank(format!(
            "active block is singular (sigma_min = {smin:e}, sigma_max = {smax:e})"
        )));
    }
    let s1_inv = pseudo_inverse(&s1, 0.0);
    let coupling = &s1_inv * &s2;
    let row_norms: Vec<f64> = (0..n).map(|k| s1_inv.row(k).norm()).collect();

    Ok(DMatrix::from_fn(n, cols - n, |k, l| {
        let a = coupling[(k, l)].norm_sqr();
        let g = s3_norms[l] * s3_norms[l];
        let w = row_norms[k] * row_norms[k];
        match criterion {
            SwapCriterion::ThreeTermSum => (a + g + w).sqrt(),
            SwapCriterion::DetRatio => (a + g * w).sqrt(),
        }
    }))
}

/// Result of [`rrqr_select_columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct RrqrOutcome {
    /// Selected original column indices, ascending.
    pub columns: Vec<usize>,
    pub swaps: usize,
    /// The swap budget ran out before every score dropped to one.
    pub truncated: bool,
    /// Sorted active sets: the initial pivoted choice, then one per swap.
    pub history: Vec<Vec<usize>>,
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Selects `n` columns of `m`. `max_swaps` defaults to `10 n (N - n)`.
///
/// When `n` exceeds the row count only `rows` columns can be independent;
/// the swap loop runs on a block of that size and the remaining slots go to
/// the largest-norm unselected columns. A singular starting block (rank of
/// `m` below the block size) ends the loop with the pivoted choice.
pub fn rrqr_select_columns(
    m: &CMatrix,
    n: usize,
    criterion: SwapCriterion,
    max_swaps: Option<usize>,
) -> Result<RrqrOutcome> {
    let (rows, cols) = m.shape();
    if n == 0 || n > cols {
        return Err(FasError::domain(format!(
            "cannot select {n} of {cols} columns"
        )));
    }
    if n == cols {
        let all: Vec<usize> = (0..cols).collect();
        return Ok(RrqrOutcome {
            columns: all.clone(),
            swaps: 0,
            truncated: false,
            history: vec![all],
        });
    }
    let block = n.min(rows);
    let mut permutation: Vec<usize> = (0..cols).collect();
    {
        let mut scratch = m.clone();
        householder(&mut scratch, &mut permutation, block, true);
    }
    let budget = max_swaps.unwrap_or(10 * block * (cols - block));
    let mut history = vec![sorted(&permutation[..block])];
    let mut swaps = 0;
    let mut truncated = false;

    loop {
        let state = refactor(m, &permutation, block);
        let omega = match omega_matrix(&state, block, criterion) {
            Ok(o) => o,
            Err(FasError::NumericalRank(_)) => break,
            Err(e) => return Err(e),
        };
        let mut best = (0, 0, f64::NEG_INFINITY);
        for k in 0..omega.nrows() {
            for l in 0..omega.ncols() {
                if omega[(k, l)] > best.2 {
                    best = (k, l, omega[(k, l)]);
                }
            }
        }
        if best.2 <= 1.0 + SWAP_MARGIN {
            break;
        }
        if swaps >= budget {
            truncated = true;
            break;
        }
        permutation.swap(best.0, block + best.1);
        swaps += 1;
        history.push(sorted(&permutation[..block]));
    }

    let mut columns = permutation[..block].to_vec();
    if n > block {
        let mut rest: Vec<usize> = permutation[block..].to_vec();
        let norm = |j: usize| m.column(j).norm_squared();
        rest.sort_by(|&a, &b| norm(b).total_cmp(&norm(a)).then(a.cmp(&b)));
        columns.extend_from_slice(&rest[..n - block]);
    }
    columns.sort_unstable();
    Ok(RrqrOutcome {
        columns,
        swaps,
        truncated,
        history,
    })
}

/// Two-stage selection: receive ports as columns of `H^H`, then transmit
/// ports as columns of the selected rows of `H`.
pub fn qr_mimo_fas_select(
    h: &CMatrix,
    n_tx: usize,
    n_rx: usize,
    criterion: SwapCriterion,
) -> Result<SelectionResult> {
    let (total_rx, total_tx) = h.shape();
    check_counts(total_tx, total_rx, n_tx, n_rx)?;
    let rx = rrqr_select_columns(&h.adjoint(), n_rx, criterion, None)?.columns;
    let rows = h.select_rows(&rx);
    let tx = rrqr_select_columns(&rows, n_tx, criterion, None)?.columns;
    SelectionResult::new(tx, rx, total_tx, total_rx)
}
