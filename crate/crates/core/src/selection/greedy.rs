use super::{check_counts, SelectionResult};
use crate::error::{FasError, Result};
use crate::geometry::SurfaceGeometry;
use crate::linalg::CMatrix;

/// Minimum port separation in wavelengths when none is given.
pub const DEFAULT_MIN_SEPARATION: f64 = 0.5;

fn pick(
    norms: &[f64],
    geom: &SurfaceGeometry,
    n: usize,
    separation: f64,
    side: &'static str,
) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let positions = geom.positions();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for p in order {
        let clear = chosen
            .iter()
            .all(|&q| crate::geometry::distance(&positions[p], &positions[q]) >= separation);
        if clear {
            chosen.push(p);
            if chosen.len() == n {
                return Ok(chosen);
            }
        }
    }
    Err(FasError::Infeasible {
        side,
        requested: n,
        available: chosen.len(),
        separation,
    })
}

/// Strongest rows (receive ports) then strongest columns (transmit ports)
/// of `h`, skipping any port closer than `separation` wavelengths to one
/// already picked on the same side.
pub fn greedy_select(
    h: &CMatrix,
    geom_tx: &SurfaceGeometry,
    geom_rx: &SurfaceGeometry,
    n_tx: usize,
    n_rx: usize,
    separation: f64,
) -> Result<SelectionResult> {
    let (total_rx, total_tx) = h.shape();
    if geom_rx.port_count() != total_rx || geom_tx.port_count() != total_tx {
        return Err(FasError::domain(format!(
            "channel is {total_rx}x{total_tx} but the geometries have {}x{} ports",
            geom_rx.port_count(),
            geom_tx.port_count()
        )));
    }
    if !(separation >= 0.0) {
        return Err(FasError::domain(format!(
            "separation must be nonnegative, got {separation}"
        )));
    }
    check_counts(total_tx, total_rx, n_tx, n_rx)?;
    let row_norms: Vec<f64> = h.row_iter().map(|r| r.norm()).collect();
    let col_norms: Vec<f64> = h.column_iter().map(|c| c.norm()).collect();
    let rx = pick(&row_norms, geom_rx, n_rx, separation, "rx")?;
    let tx = pick(&col_norms, geom_tx, n_tx, separation, "tx")?;
    SelectionResult::new(tx, rx, total_tx, total_rx)
}
