//! Correlated Rayleigh channel synthesis with reproducible per-trial streams.
//!
//! A campaign seed and a trial index select an independent ChaCha stream
//! (the trial index is the stream id), so any trial can be regenerated on
//! any thread without replaying the ones before it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::EigenDecomposition;
use crate::error::{FasError, Result};
use crate::linalg::{to_complex, CMatrix};

/// Identifies the random stream of one Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialSeed {
    pub campaign: u64,
    pub trial: u64,
}

impl TrialSeed {
    pub fn new(campaign: u64, trial: u64) -> Self {
        Self { campaign, trial }
    }

    /// Fresh generator positioned at the start of this trial's stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.campaign);
        rng.set_stream(self.trial);
        rng
    }
}

/// Draws a pair of independent standard normals by the Box–Muller transform.
fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // u1 in (0, 1] keeps the logarithm finite.
    let u1 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    (radius * angle.cos(), radius * angle.sin())
}

/// Circularly-symmetric complex Gaussian matrix with unit-variance entries
/// (real and imaginary parts each of variance 1/2), filled column-major.
pub fn draw_gaussian_matrix_with(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(rows, cols);
    for z in m.iter_mut() {
        let (x, y) = box_muller(rng);
        *z = Complex64::new(x * scale, y * scale);
    }
    m
}

pub fn draw_gaussian_matrix(seed: TrialSeed, rows: usize, cols: usize) -> CMatrix {
    draw_gaussian_matrix_with(&mut seed.rng(), rows, cols)
}

/// Kronecker-correlated channel `H = delta * U_rx sqrt(L_rx) G sqrt(L_tx) U_tx^H`.
///
/// The colouring factors are real, so synthesis runs as real matrix
/// products on the real and imaginary parts of `G`. Modes may be truncated
/// (see [`with_mode_cutoff`](Self::with_mode_cutoff)), in which case `G`
/// has one row/column per kept mode rather than per port.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub rx: EigenDecomposition,
    pub tx: EigenDecomposition,
    pub path_loss_amplitude: f64,
    // delta * U_rx sqrt(L_rx) over kept modes, and (U_tx sqrt(L_tx))^T.
    left: DMatrix<f64>,
    right: DMatrix<f64>,
}

fn kept_modes(e: &EigenDecomposition, rel_tol: f64) -> usize {
    let top = e.values.iter().copied().fold(0.0, f64::max);
    e.values
        .iter()
        .filter(|&&v| v > rel_tol * top)
        .count()
        .max(1)
}

impl ChannelModel {
    pub fn new(rx: EigenDecomposition, tx: EigenDecomposition, delta: f64) -> Result<Self> {
        let (r_rx, r_tx) = (rx.dim(), tx.dim());
        Self::build(rx, tx, delta, r_rx, r_tx)
    }

    /// Drops eigenmodes below `rel_tol` times the largest eigenvalue on
    /// each side. The discarded covariance mass is at most
    /// `N * rel_tol * lambda_max` per side.
    pub fn with_mode_cutoff(
        rx: EigenDecomposition,
        tx: EigenDecomposition,
        delta: f64,
        rel_tol: f64,
    ) -> Result<Self> {
        if !(rel_tol >= 0.0) {
            return Err(FasError::domain(format!(
                "mode cutoff must be nonnegative, got {rel_tol}"
            )));
        }
        let (r_rx, r_tx) = (kept_modes(&rx, rel_tol), kept_modes(&tx, rel_tol));
        Self::build(rx, tx, delta, r_rx, r_tx)
    }

    fn build(
        rx: EigenDecomposition,
        tx: EigenDecomposition,
        delta: f64,
        r_rx: usize,
        r_tx: usize,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(FasError::domain(format!(
                "path loss amplitude must be positive, got {delta}"
            )));
        }
        let left = rx.sqrt_factor().columns(0, r_rx) * delta;
        let right = tx.sqrt_factor().columns(0, r_tx).transpose();
        Ok(Self {
            rx,
            tx,
            path_loss_amplitude: delta,
            left,
            right,
        })
    }

    /// Uncorrelated model with `n_rx x n_tx` ports.
    pub fn iid(n_rx: usize, n_tx: usize, delta: f64) -> Result<Self> {
        Self::new(
            EigenDecomposition::identity(n_rx),
            EigenDecomposition::identity(n_tx),
            delta,
        )
    }

    /// Shape of the i.i.d. seed matrix `G`.
    pub fn seed_shape(&self) -> (usize, usize) {
        (self.left.ncols(), self.right.nrows())
    }

    pub fn rx_ports(&self) -> usize {
        self.rx.dim()
    }

    pub fn tx_ports(&self) -> usize {
        self.tx.dim()
    }

    /// Maps an i.i.d. seed matrix through the correlation structure.
    pub fn synthesize(&self, g: &CMatrix) -> Result<CMatrix> {
        let (rows, cols) = self.seed_shape();
        if g.shape() != (rows, cols) {
            return Err(FasError::domain(format!(
                "seed matrix is {}x{}, channel expects {rows}x{cols}",
                g.nrows(),
                g.ncols(),
            )));
        }
        let re = &self.left * (g.map(|z| z.re) * &self.right);
        let im = &self.left * (g.map(|z| z.im) * &self.right);
        Ok(re.zip_map(&im, Complex64::new))
    }

    /// Draws and synthesizes the realization of one trial.
    pub fn realize(&self, seed: TrialSeed) -> ChannelRealization {
        self.realize_with(&mut seed.rng(), seed)
    }

    /// Same as [`realize`](Self::realize) but continues an existing stream,
    /// so several channels can share one trial's randomness.
    pub fn realize_with(&self, rng: &mut ChaCha8Rng, seed: TrialSeed) -> ChannelRealization {
        let (rows, cols) = self.seed_shape();
        let g = draw_gaussian_matrix_with(rng, rows, cols);
        let h = self
            .synthesize(&g)
            .expect("seed matrix drawn with model dimensions");
        ChannelRealization { h, seed }
    }

    /// `delta^2 (J_tx^T kron J_rx)`, the covariance of `vec(H)` (over the
    /// kept modes).
    pub fn vec_covariance(&self) -> CMatrix {
        let jrx = &self.left * self.left.transpose();
        let jtx = self.right.transpose() * &self.right;
        to_complex(&jtx.transpose().kronecker(&jrx))
    }
}

/// One channel draw and the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub seed: TrialSeed,
}

/// Sample covariance `E[vec(H) vec(H)^H]` over `trials` seeded realizations.
pub fn empirical_vec_covariance(model: &ChannelModel, trials: u64, seed: u64) -> Result<CMatrix> {
    if trials == 0 {
        return Err(FasError::domain("at least one trial is required"));
    }
    let dim = model.rx_ports() * model.tx_ports();
    // Fixed-size chunks keep the floating-point summation order independent
    // of the thread count.
    const CHUNK: u64 = 1024;
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<CMatrix> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = CMatrix::zeros(dim, dim);
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let h = model.realize(TrialSeed::new(seed, t)).h;
                let v = DMatrix::from_column_slice(dim, 1, h.as_slice());
                acc += &v * v.adjoint();
            }
            acc
        })
        .collect();
    let total = partials
        .into_iter()
        .fold(CMatrix::zeros(dim, dim), |a, b| a + b);
    Ok(total / Complex64::new(trials as f64, 0.0))
}
