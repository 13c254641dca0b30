//! Reduction of a (numerically) rank-deficient correlation matrix to a
//! full-rank principal submatrix, with certificates that allow the removed
//! rows and columns to be rebuilt exactly.
//!
//! The retained ports are chosen by diagonally pivoted Cholesky: the port
//! with the largest Schur complement is kept next, until every remaining
//! Schur complement falls below `tol` times its diagonal entry. Each removed
//! port then gets a coefficient vector `v` with `J_red v = j`, where `j` is
//! that port's correlation with the retained set.
//!
//! Certificates are expressed in the *reduction frame*: retained ports in
//! ascending index order, followed by removed ports in ascending order. A
//! certificate at level `l` refers to the leading `l x l` block `J(l)` of the
//! frame matrix and carries `l - 1` coefficients with `J(l) [v; -1] ~ 0`.
//! Removal proceeds from the last frame position downward, so certificates
//! are stored with descending levels.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::correlation::check_symmetric;
use crate::error::{FasError, Result};

/// Default relative tolerance of the linear-dependence test.
pub const DEFAULT_REDUCTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCertificate {
    /// Size of the leading frame block this certificate reduces.
    pub level: usize,
    /// Coefficients over the first `level - 1` frame positions.
    pub coeffs: DVector<f64>,
}

impl ReductionCertificate {
    /// `[v; -1]`.
    pub fn extended(&self) -> DVector<f64> {
        let mut v = self.coeffs.clone().resize_vertically(self.level, 0.0);
        v[self.level - 1] = -1.0;
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Full-rank principal submatrix over the retained ports.
    pub reduced: DMatrix<f64>,
    /// One certificate per removed port, in removal order (descending level).
    pub certificates: Vec<ReductionCertificate>,
    /// Original indices of removed ports, aligned with `certificates`.
    pub removed: Vec<usize>,
    /// Original indices of the retained ports, ascending.
    pub retained: Vec<usize>,
}

impl Reduction {
    /// Frame permutation: frame position -> original index.
    pub fn frame(&self) -> Vec<usize> {
        frame_order(&self.retained, &self.removed)
    }
}

fn frame_order(retained: &[usize], removed: &[usize]) -> Vec<usize> {
    let mut tail = removed.to_vec();
    tail.sort_unstable();
    retained.iter().copied().chain(tail).collect()
}

/// Reduces `j` to a full-rank principal submatrix with certificates.
pub fn reduce_correlation(j: &DMatrix<f64>, tol: f64) -> Result<Reduction> {
    check_symmetric(j)?;
    if !(tol > 0.0) {
        return Err(FasError::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = j.nrows();
    if n == 0 {
        return Err(FasError::domain("cannot reduce an empty matrix"));
    }

    // Diagonally pivoted Cholesky; `schur[i]` is the residual variance of
    // port i after projecting out the ports kept so far.
    let mut schur: Vec<f64> = (0..n).map(|i| j[(i, i)]).collect();
    let mut factor: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut is_kept = vec![false; n];
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !is_kept[i]) {
            let rel = schur[i] / j[(i, i)].abs().max(f64::MIN_POSITIVE);
            if rel > tol && best.is_none_or(|(_, b)| schur[i] > b) {
                best = Some((i, schur[i]));
            }
        }
        let Some((p, d)) = best else { break };
        let pivot = d.sqrt();
        let col: Vec<f64> = (0..n)
            .map(|i| {
                if is_kept[i] || i == p {
                    return if i == p { pivot } else { 0.0 };
                }
                let dot: f64 = factor.iter().map(|f| f[i] * f[p]).sum();
                (j[(i, p)] - dot) / pivot
            })
            .collect();
        for i in (0..n).filter(|&i| !is_kept[i] && i != p) {
            schur[i] -= col[i] * col[i];
        }
        factor.push(col);
        kept.push(p);
        is_kept[p] = true;
        if kept.len() == n {
            break;
        }
    }
    if kept.is_empty() {
        // Every diagonal entry is negligible; keep the first port so the
        // reduced matrix is never empty.
        kept.push(0);
        is_kept[0] = true;
    }

    let mut retained = kept;
    retained.sort_unstable();
    let removed_asc: Vec<usize> = (0..n).filter(|&i| !is_kept[i]).collect();
    let r = retained.len();
    let reduced = DMatrix::from_fn(r, r, |a, b| j[(retained[a], retained[b])]);

    let chol = Cholesky::new(reduced.clone()).ok_or_else(|| {
        FasError::NumericalRank("retained submatrix is not positive definite".into())
    })?;

    let mut certificates = Vec::with_capacity(removed_asc.len());
    let mut removed = Vec::with_capacity(removed_asc.len());
    for (pos, &m) in removed_asc.iter().enumerate().rev() {
        let rhs = DVector::from_fn(r, |a, _| j[(retained[a], m)]);
        let v = chol.solve(&rhs);
        let level = r + pos + 1;
        let coeffs = v.resize_vertically(level - 1, 0.0);
        certificates.push(ReductionCertificate { level, coeffs });
        removed.push(m);
    }

    Ok(Reduction {
        reduced,
        certificates,
        removed,
        retained,
    })
}

/// Rebuilds the full matrix from a reduction. Certificates are replayed in
/// reverse removal order: `j_l = J_sub v_l`, `j_ll = j_l^T v_l`.
pub fn reconstruct_correlation(
    reduced: &DMatrix<f64>,
    certificates: &[ReductionCertificate],
    removed: &[usize],
) -> Result<DMatrix<f64>> {
    if !reduced.is_square() {
        return Err(FasError::domain("reduced matrix must be square"));
    }
    if certificates.len() != removed.len() {
        return Err(FasError::domain(format!(
            "{} certificates for {} removed ports",
            certificates.len(),
            removed.len()
        )));
    }
    let r = reduced.nrows();
    let n = r + removed.len();
    let mut seen = vec![false; n];
    for &m in removed {
        if m >= n || std::mem::replace(&mut seen[m], true) {
            return Err(FasError::domain(format!(
                "removed index {m} is out of range or repeated"
            )));
        }
    }
    let mut by_level: Vec<Option<&ReductionCertificate>> = vec![None; n + 1];
    for c in certificates {
        if c.level <= r || c.level > n || c.coeffs.len() != c.level - 1 {
            return Err(FasError::domain(format!(
                "certificate level {} with {} coefficients is inconsistent with sizes {r}/{n}",
                c.level,
                c.coeffs.len()
            )));
        }
        if by_level[c.level].replace(c).is_some() {
            return Err(FasError::domain(format!(
                "duplicate certificate level {}",
                c.level
            )));
        }
    }

    let mut frame = DMatrix::zeros(n, n);
    frame.view_mut((0, 0), (r, r)).copy_from(reduced);
    for (k, cert) in by_level
        .iter()
        .enumerate()
        .skip(r + 1)
        .map(|(l, c)| (l - 1, c))
    {
        let cert = cert.expect("levels validated above");
        let col = frame.view((0, 0), (k, k)) * &cert.coeffs;
        let diag = col.dot(&cert.coeffs);
        for i in 0..k {
            frame[(i, k)] = col[i];
            frame[(k, i)] = col[i];
        }
        frame[(k, k)] = diag;
    }

    let retained: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
    let order = frame_order(&retained, removed);
    let mut out = DMatrix::zeros(n, n);
    for (a, &ia) in order.iter().enumerate() {
        for (b, &ib) in order.iter().enumerate() {
            out[(ia, ib)] = frame[(a, b)];
        }
    }
    Ok(out)
}
