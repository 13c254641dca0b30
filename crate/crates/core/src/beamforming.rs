//! SVD beamforming, waterfilling power allocation and rate evaluation on a
//! selected subchannel. Rates are in bits/s/Hz (base-2 logarithms).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{FasError, Result};
use crate::linalg::{singular_values, CMatrix};

/// Optimal linear transceiver for a fixed subchannel `Hs = M S N^H`.
#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    /// Receive combiner `M^H` (`n_min x n_rx`).
    pub rx_combiner: CMatrix,
    /// Transmit precoder `N` (`n_tx x n_min`).
    pub tx_precoder: CMatrix,
    /// Singular values of the subchannel, descending.
    pub singular_values: Vec<f64>,
}

pub fn svd_beamform(h: &CMatrix) -> Result<BeamformingSolution> {
    if h.is_empty() {
        return Err(FasError::domain("cannot beamform on an empty channel"));
    }
    let svd = h.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let rx_combiner = CMatrix::from_fn(k, h.nrows(), |r, c| u[(c, order[r])].conj());
    let tx_precoder = CMatrix::from_fn(h.ncols(), k, |r, c| v_t[(order[c], r)].conj());
    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    Ok(BeamformingSolution {
        rx_combiner,
        tx_precoder,
        singular_values,
    })
}

/// Waterfilling result: `p_l = max(mu - 1/g_l, 0)` with `sum p_l = snr`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    pub water_level: f64,
}

/// Bisection stopping tolerance and upper bracket for [`waterfill`].
#[derive(Debug, Clone, Copy)]
pub struct WaterfillParams {
    pub tolerance: f64,
    pub mu_max: f64,
}

impl WaterfillParams {
    /// `eps = 1e-9 * snr`, `mu_max = snr + 1/min positive gain`: the root is
    /// always bracketed.
    pub fn for_gains(gains: &[f64], snr: f64) -> Self {
        let min_gain = gains
            .iter()
            .copied()
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min);
        Self {
            tolerance: 1e-9 * snr,
            mu_max: snr + 1.0 / min_gain,
        }
    }
}

/// Waterfilling over channel gains `gains` (squared singular values).
/// Zero gains receive no power.
pub fn waterfill(gains: &[f64], snr: f64, params: WaterfillParams) -> Result<PowerAllocation> {
    if !(snr > 0.0) {
        return Err(FasError::domain(format!("snr must be positive, got {snr}")));
    }
    if !gains.iter().any(|&g| g > 0.0) {
        return Err(FasError::domain(
            "waterfilling needs at least one positive gain",
        ));
    }
    let total = |mu: f64| -> f64 {
        gains
            .iter()
            .filter(|&&g| g > 0.0)
            .map(|&g| (mu - 1.0 / g).max(0.0))
            .sum()
    };
    if total(params.mu_max) < snr - params.tolerance {
        return Err(FasError::Interval {
            mu_max: params.mu_max,
            snr,
        });
    }
    let (mut lo, mut hi) = (0.0, params.mu_max);
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..400 {
        mu = 0.5 * (lo + hi);
        let s = total(mu);
        if (s - snr).abs() <= params.tolerance {
            break;
        }
        if s < snr {
            lo = mu;
        } else {
            hi = mu;
        }
    }
    let powers = gains
        .iter()
        .map(|&g| {
            if g > 0.0 {
                (mu - 1.0 / g).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(PowerAllocation {
        powers,
        water_level: mu,
    })
}

/// Waterfilled rate of a subchannel with the given singular values.
pub fn rate_from_singular_values(sv: &[f64], snr: f64) -> Result<f64> {
    let gains: Vec<f64> = sv.iter().map(|s| s * s).collect();
    if !gains.iter().any(|&g| g > 0.0) {
        return Ok(0.0);
    }
    let alloc = waterfill(&gains, snr, WaterfillParams::for_gains(&gains, snr))?;
    Ok(gains
        .iter()
        .zip(&alloc.powers)
        .map(|(g, p)| (1.0 + p * g).log2())
        .sum())
}

/// Rate with SVD beamforming and waterfilling.
pub fn rate(h: &CMatrix, snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(FasError::domain(format!("snr must be positive, got {snr}")));
    }
    rate_from_singular_values(&singular_values(h), snr)
}

/// Rate with the power split equally as `snr / streams` over the singular
/// modes.
pub fn rate_equal_power(h: &CMatrix, snr: f64, streams: usize) -> Result<f64> {
    if streams == 0 {
        return Err(FasError::domain("stream count must be at least 1"));
    }
    let p = snr / streams as f64;
    Ok(singular_values(h)
        .iter()
        .map(|s| (1.0 + p * s * s).log2())
        .sum())
}

/// `log2 det(I + H K H^H)` for a positive semidefinite input covariance `K`.
pub fn rate_general(h: &CMatrix, k: &CMatrix) -> Result<f64> {
    if !k.is_square() || k.nrows() != h.ncols() {
        return Err(FasError::domain(format!(
            "input covariance is {}x{}, channel has {} inputs",
            k.nrows(),
            k.ncols(),
            h.ncols()
        )));
    }
    let scale = k.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for i in 0..k.nrows() {
        for j in 0..=i {
            if (k[(i, j)] - k[(j, i)].conj()).norm() > 1e-9 * scale {
                return Err(FasError::domain("input covariance is not Hermitian"));
            }
        }
    }
    let eig = k.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-9 * scale) {
        return Err(FasError::domain(
            "input covariance is not positive semidefinite",
        ));
    }
    let m = CMatrix::identity(h.nrows(), h.nrows()) + h * k * h.adjoint();
    // Hermitian positive definite: log det via its eigenvalues.
    let e = m.symmetric_eigen();
    Ok(e.eigenvalues
        .iter()
        .map(|l| l.max(f64::MIN_POSITIVE).log2())
        .sum())
}

/// Optimal input covariance `K = N P N^H` for a beamforming solution.
pub fn input_covariance(sol: &BeamformingSolution, alloc: &PowerAllocation) -> CMatrix {
    let p = DVector::from_iterator(
        alloc.powers.len(),
        alloc.powers.iter().map(|&v| Complex64::new(v, 0.0)),
    );
    let n = &sol.tx_precoder;
    let mut scaled = n.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= p[j];
    }
    scaled * n.adjoint()
}
