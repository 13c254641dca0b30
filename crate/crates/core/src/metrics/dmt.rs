//! Piecewise-linear diversity–multiplexing tradeoff curves.

use serde::{Deserialize, Serialize};

use crate::error::{FasError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmtCurve {
    /// `(r, d)` pairs with `r` strictly increasing and `d` strictly
    /// decreasing to zero.
    pub breakpoints: Vec<(f64, f64)>,
}

impl DmtCurve {
    /// Builds a curve, dropping duplicate and collinear interior points.
    fn from_points(points: Vec<(f64, f64)>) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for p in points {
            if out.last().is_some_and(|l| l.0 == p.0) {
                continue;
            }
            while out.len() >= 2 {
                let a = out[out.len() - 2];
                let b = out[out.len() - 1];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                if cross.abs() <= 1e-12 * (1.0 + a.1.abs()) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        Self { breakpoints: out }
    }

    pub fn max_diversity(&self) -> f64 {
        self.breakpoints[0].1
    }

    pub fn max_multiplexing(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].0
    }
}

/// Index `eta` in `0..n_min` minimizing `(a - eta)(b - eta) / (n_min - eta)`;
/// ties go to the smallest index.
fn knee(a: usize, b: usize, n_min: usize) -> usize {
    let mut best = (f64::INFINITY, 0);
    for eta in 0..n_min {
        let v = ((a - eta) * (b - eta)) as f64 / (n_min - eta) as f64;
        if v < best.0 {
            best = (v, eta);
        }
    }
    best.1
}

/// Optimal tradeoff of using `n_min` streams selected from an
/// `n_rx_total x n_tx_total` independent channel.
pub fn dmt_subset_selection(
    n_rx_total: usize,
    n_tx_total: usize,
    n_min: usize,
) -> Result<DmtCurve> {
    if n_min == 0 || n_min > n_rx_total.min(n_tx_total) {
        return Err(FasError::domain(format!(
            "stream count {n_min} must lie in 1..={}",
            n_rx_total.min(n_tx_total)
        )));
    }
    let k = knee(n_rx_total, n_tx_total, n_min);
    let mut pts: Vec<(f64, f64)> = (0..=k)
        .map(|r| (r as f64, ((n_rx_total - r) * (n_tx_total - r)) as f64))
        .collect();
    pts.push((n_min as f64, 0.0));
    Ok(DmtCurve::from_points(pts))
}

/// Outer bound for fluid-antenna surfaces with effective ranks
/// `rank_rx`, `rank_tx`.
pub fn dmt_mimo_fas(rank_rx: usize, rank_tx: usize, n_min: usize) -> Result<DmtCurve> {
    dmt_subset_selection(rank_rx, rank_tx, n_min)
}

/// Number of half-wavelength-spaced antennas that fit an aperture.
pub fn half_wavelength_grid_count(w1: f64, w2: f64) -> Result<usize> {
    if !(w1 >= 0.0 && w2 >= 0.0 && w1.is_finite() && w2.is_finite()) {
        return Err(FasError::domain(format!(
            "apertures must be finite and nonnegative, got {w1} x {w2}"
        )));
    }
    let per = |w: f64| (w / 0.5 + 1e-9).floor() as usize + 1;
    Ok(per(w1) * per(w2))
}

/// Conventional antenna selection on half-wavelength grids filling the
/// given apertures (`(w1, w2)` per side).
pub fn dmt_antenna_selection(
    rx_aperture: (f64, f64),
    tx_aperture: (f64, f64),
    n_min: usize,
) -> Result<DmtCurve> {
    let w_rx = half_wavelength_grid_count(rx_aperture.0, rx_aperture.1)?;
    let w_tx = half_wavelength_grid_count(tx_aperture.0, tx_aperture.1)?;
    dmt_subset_selection(w_rx, w_tx, n_min.min(w_rx).min(w_tx))
}

/// Classical `n_rx x n_tx` i.i.d. MIMO tradeoff.
pub fn dmt_traditional(n_rx: usize, n_tx: usize) -> Result<DmtCurve> {
    if n_rx == 0 || n_tx == 0 {
        return Err(FasError::domain("antenna counts must be at least 1"));
    }
    let pts = (0..=n_rx.min(n_tx))
        .map(|r| (r as f64, ((n_rx - r) * (n_tx - r)) as f64))
        .collect();
    Ok(DmtCurve::from_points(pts))
}

/// Linear interpolation of the curve at multiplexing gain `r`.
pub fn dmt_eval(curve: &DmtCurve, r: f64) -> Result<f64> {
    let bp = &curve.breakpoints;
    let last = bp[bp.len() - 1].0;
    if !(r >= 0.0 && r <= last) {
        return Err(FasError::domain(format!(
            "multiplexing gain {r} outside [0, {last}]"
        )));
    }
    for w in bp.windows(2) {
        let ((r0, d0), (r1, d1)) = (w[0], w[1]);
        if r <= r1 {
            return Ok(d0 + (d1 - d0) * (r - r0) / (r1 - r0));
        }
    }
    Ok(bp[bp.len() - 1].1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_selection_is_classical() {
        let c = dmt_subset_selection(4, 4, 4).unwrap();
        assert_eq!(
            c.breakpoints,
            vec![(0.0, 16.0), (1.0, 9.0), (2.0, 4.0), (3.0, 1.0), (4.0, 0.0)]
        );
        assert_eq!(c, dmt_traditional(4, 4).unwrap());
        let c = dmt_subset_selection(5, 7, 1).unwrap();
        assert_eq!(c.breakpoints, vec![(0.0, 35.0), (1.0, 0.0)]);
        assert!(dmt_subset_selection(3, 3, 4).is_err());
        assert!(dmt_subset_selection(3, 3, 0).is_err());
    }

    #[test]
    fn fluid_surface_bound() {
        let c = dmt_mimo_fas(23, 23, 4).unwrap();
        assert_eq!(dmt_eval(&c, 0.0).unwrap(), 529.0);
        assert_eq!(dmt_eval(&c, 4.0).unwrap(), 0.0);
        // the knee sits at eta = 0: 529/4 < 484/3
        assert_eq!(c.breakpoints, vec![(0.0, 529.0), (4.0, 0.0)]);
        assert!((dmt_eval(&c, 1.0).unwrap() - 396.75).abs() < 1e-12);
    }

    #[test]
    fn antenna_selection_counts() {
        assert_eq!(half_wavelength_grid_count(1.0, 1.0).unwrap(), 9);
        assert_eq!(half_wavelength_grid_count(0.4, 0.4).unwrap(), 1);
        let c = dmt_antenna_selection((1.0, 1.0), (1.0, 1.0), 4).unwrap();
        assert_eq!(c.max_diversity(), 81.0);
        assert_eq!(dmt_eval(&c, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn traditional_values() {
        let c = dmt_traditional(4, 4).unwrap();
        assert_eq!(c.max_diversity(), 16.0);
        assert_eq!(dmt_eval(&c, 4.0).unwrap(), 0.0);
        let c = dmt_traditional(2, 3).unwrap();
        assert_eq!(dmt_eval(&c, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn interpolation() {
        let c = dmt_traditional(4, 4).unwrap();
        assert_eq!(dmt_eval(&c, 2.0).unwrap(), 4.0);
        assert_eq!(dmt_eval(&c, 0.5).unwrap(), 12.5);
        assert_eq!(dmt_eval(&c, 3.5).unwrap(), 0.5);
        assert!(dmt_eval(&c, 4.1).is_err());
        assert!(dmt_eval(&c, -0.1).is_err());
    }

    #[test]
    fn collinear_points_merge() {
        let c = DmtCurve::from_points(vec![
            (0.0, 3.0),
            (1.0, 2.0),
            (2.0, 1.0),
            (2.0, 1.0),
            (3.0, 0.0),
        ]);
        assert_eq!(c.breakpoints, vec![(0.0, 3.0), (3.0, 0.0)]);
    }

    #[test]
    fn orderings_for_default_configuration() {
        let fas = dmt_mimo_fas(23, 23, 4).unwrap();
        let sel = dmt_antenna_selection((1.0, 1.0), (1.0, 1.0), 4).unwrap();
        let mimo = dmt_traditional(4, 4).unwrap();
        for i in 0..=40 {
            let r = i as f64 * 0.1;
            let (a, b, c) = (
                dmt_eval(&fas, r).unwrap(),
                dmt_eval(&sel, r).unwrap(),
                dmt_eval(&mimo, r).unwrap(),
            );
            assert!(a >= b && b >= c, "r = {r}: {a} {b} {c}");
        }
    }
}
