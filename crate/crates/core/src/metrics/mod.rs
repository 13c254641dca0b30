//! Monte Carlo rate and outage statistics over seeded channel draws, and
//! closed-form DMT curves.
//!
//! Trial `t` of a run with seed `s` always uses the stream `(s, t)`, and
//! results are reduced in trial order, so estimates do not depend on how
//! trials are spread over threads.

mod dmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dmt::{
    dmt_antenna_selection, dmt_eval, dmt_mimo_fas, dmt_subset_selection, dmt_traditional,
    half_wavelength_grid_count, DmtCurve,
};

use crate::beamforming::{rate, rate_from_singular_values};
use crate::channel::{ChannelModel, TrialSeed};
use crate::correlation::{build_correlation_matrix, eigendecompose, EigenDecomposition};
use crate::coupling::{
    apply_coupling_liquid, apply_coupling_pixel, liquid_coupling, pixel_coupling, CouplingMatrices,
    DipoleSpec, SMatrixModel,
};
use crate::error::{FasError, Result};
use crate::geometry::{KernelId, SurfaceGeometry};
use crate::linalg::{singular_values, CMatrix};
use crate::selection::{
    exhaustive_select, greedy_select, qr_mimo_fas_select, random_select_with, submatrix,
    SelectionResult, SwapCriterion, DEFAULT_COMBO_LIMIT, DEFAULT_MIN_SEPARATION,
};

/// Eigenmodes below this fraction of the largest are dropped when
/// synthesizing channels for Monte Carlo runs.
pub const MODE_CUTOFF: f64 = 1e-12;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

fn default_combo_limit() -> u64 {
    DEFAULT_COMBO_LIMIT as u64
}

fn default_separation() -> f64 {
    DEFAULT_MIN_SEPARATION
}

/// Port selection strategy applied to every channel draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    Qr {
        #[serde(default)]
        criterion: SwapCriterion,
    },
    Exhaustive {
        #[serde(default = "default_combo_limit")]
        combo_limit: u64,
    },
    Greedy {
        #[serde(default = "default_separation")]
        separation: f64,
    },
    Random,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Qr {
            criterion: SwapCriterion::DetRatio,
        }
    }
}

fn default_path_loss() -> f64 {
    1.0
}

/// One end-to-end link configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    pub geom_tx: SurfaceGeometry,
    pub geom_rx: SurfaceGeometry,
    pub n_tx: usize,
    pub n_rx: usize,
    /// Path loss amplitude.
    #[serde(default = "default_path_loss")]
    pub path_loss: f64,
    #[serde(default)]
    pub strategy: Strategy,
    /// Transmit SNR, linear.
    pub snr: f64,
    #[serde(default)]
    pub kernel: KernelId,
}

impl LinkScenario {
    /// Same geometry and port counts on both ends.
    pub fn symmetric(geom: SurfaceGeometry, n: usize, strategy: Strategy, snr: f64) -> Self {
        Self {
            geom_tx: geom,
            geom_rx: geom,
            n_tx: n,
            n_rx: n,
            path_loss: 1.0,
            strategy,
            snr,
            kernel: KernelId::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geom_tx.validate()?;
        self.geom_rx.validate()?;
        if self.n_tx == 0 || self.n_tx > self.geom_tx.port_count() {
            return Err(FasError::domain(format!(
                "n_tx = {} must lie in 1..={}",
                self.n_tx,
                self.geom_tx.port_count()
            )));
        }
        if self.n_rx == 0 || self.n_rx > self.geom_rx.port_count() {
            return Err(FasError::domain(format!(
                "n_rx = {} must lie in 1..={}",
                self.n_rx,
                self.geom_rx.port_count()
            )));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(FasError::domain(format!(
                "snr must be positive, got {}",
                self.snr
            )));
        }
        if !(self.path_loss > 0.0 && self.path_loss.is_finite()) {
            return Err(FasError::domain(format!(
                "path loss amplitude must be positive, got {}",
                self.path_loss
            )));
        }
        Ok(())
    }

    pub fn n_min(&self) -> usize {
        self.n_tx.min(self.n_rx)
    }
}

/// Coupling model applied to each draw.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Coupling {
    #[default]
    None,
    Liquid {
        #[serde(default)]
        dipole: DipoleSpec,
    },
    Pixel {
        #[serde(default)]
        dipole: DipoleSpec,
        #[serde(default)]
        s_matrix: SMatrixModel,
    },
}

#[derive(Debug, Clone)]
enum PreparedCoupling {
    None,
    Liquid(DipoleSpec),
    Pixel(CouplingMatrices),
}

/// A scenario with its correlation structure and coupling precomputed.
#[derive(Debug, Clone)]
pub struct Link {
    pub scenario: LinkScenario,
    model: ChannelModel,
    coupling: PreparedCoupling,
}

fn side_eigen(geom: &SurfaceGeometry, kernel: KernelId) -> Result<EigenDecomposition> {
    let j = build_correlation_matrix(geom, kernel.kernel().as_ref());
    eigendecompose(j.matrix())
}

impl Link {
    pub fn new(scenario: LinkScenario) -> Result<Self> {
        Self::with_coupling(scenario, Coupling::None)
    }

    pub fn with_coupling(scenario: LinkScenario, coupling: Coupling) -> Result<Self> {
        scenario.validate()?;
        let rx = side_eigen(&scenario.geom_rx, scenario.kernel)?;
        let tx = if scenario.geom_tx == scenario.geom_rx {
            rx.clone()
        } else {
            side_eigen(&scenario.geom_tx, scenario.kernel)?
        };
        let model = ChannelModel::with_mode_cutoff(rx, tx, scenario.path_loss, MODE_CUTOFF)?;
        let coupling = match coupling {
            Coupling::None => PreparedCoupling::None,
            Coupling::Liquid { dipole } => PreparedCoupling::Liquid(dipole),
            Coupling::Pixel { dipole, s_matrix } => PreparedCoupling::Pixel(pixel_coupling(
                &scenario.geom_rx,
                &scenario.geom_tx,
                &s_matrix,
                &dipole,
            )?),
        };
        Ok(Self {
            scenario,
            model,
            coupling,
        })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    /// Selected (and coupled) subchannel of one trial.
    pub fn trial_subchannel(&self, seed: TrialSeed) -> Result<(SelectionResult, CMatrix)> {
        let sc = &self.scenario;
        let mut rng = seed.rng();
        let mut h = self.model.realize_with(&mut rng, seed).h;
        if let PreparedCoupling::Pixel(m) = &self.coupling {
            h = apply_coupling_pixel(&h, m)?;
        }
        let (total_rx, total_tx) = h.shape();
        let sel = match sc.strategy {
            Strategy::Qr { criterion } => qr_mimo_fas_select(&h, sc.n_tx, sc.n_rx, criterion)?,
            Strategy::Exhaustive { combo_limit } => {
                exhaustive_select(&h, sc.n_tx, sc.n_rx, sc.snr, u128::from(combo_limit))?
            }
            Strategy::Greedy { separation } => {
                greedy_select(&h, &sc.geom_tx, &sc.geom_rx, sc.n_tx, sc.n_rx, separation)?
            }
            Strategy::Random => random_select_with(&mut rng, total_tx, total_rx, sc.n_tx, sc.n_rx)?,
        };
        let mut hs = submatrix(&h, &sel)?;
        if let PreparedCoupling::Liquid(spec) = &self.coupling {
            let m = liquid_coupling(&sel, &sc.geom_rx, &sc.geom_tx, spec)?;
            hs = apply_coupling_liquid(&hs, &m)?;
        }
        Ok((sel, hs))
    }

    /// Whether the port choice is independent of the SNR, so one set of
    /// draws can serve a whole SNR sweep.
    pub fn selection_ignores_snr(&self) -> bool {
        !matches!(self.scenario.strategy, Strategy::Exhaustive { .. })
    }

    /// Waterfilled rate of one trial.
    pub fn trial_rate(&self, seed: TrialSeed) -> Result<f64> {
        let (_, hs) = self.trial_subchannel(seed)?;
        rate(&hs, self.scenario.snr)
    }
}

/// Per-trial rates of one run, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    pub rates: Vec<f64>,
    pub seed: u64,
}

/// Sample mean with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub half_width95: f64,
    pub trials: u64,
}

impl MeanEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            half_width95: Z95 * (var / n).sqrt(),
            trials: values.len() as u64,
        }
    }
}

/// Binomial proportion with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub probability: f64,
    pub trials: u64,
    pub half_width95: f64,
}

impl OutageEstimate {
    pub fn from_count(events: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = events as f64 / n;
        Self {
            probability: p,
            trials,
            half_width95: Z95 * (p * (1.0 - p) / n).sqrt(),
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (
            (self.probability - self.half_width95).max(0.0),
            (self.probability + self.half_width95).min(1.0),
        )
    }

    /// Below the range where the normal approximation is trustworthy.
    pub fn is_rare(&self) -> bool {
        self.probability > 0.0 && self.probability < 1e-4
    }
}

impl RateSample {
    pub fn trials(&self) -> u64 {
        self.rates.len() as u64
    }

    pub fn mean(&self) -> MeanEstimate {
        MeanEstimate::from_values(&self.rates)
    }

    /// Fraction of trials with rate strictly below `threshold`.
    pub fn outage(&self, threshold: f64) -> OutageEstimate {
        let events = self.rates.iter().filter(|&&r| r < threshold).count() as u64;
        OutageEstimate::from_count(events, self.trials())
    }

    pub fn q_outage_capacity(&self, q: f64) -> f64 {
        q * (1.0 - self.outage(q).probability)
    }

    pub fn median(&self) -> f64 {
        let mut v = self.rates.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(FasError::domain("at least one trial is required"));
    }
    Ok(())
}

/// Rates of trials `0..trials` under campaign seed `seed`.
pub fn sample_rates(link: &Link, trials: u64, seed: u64) -> Result<RateSample> {
    check_trials(trials)?;
    let rates = (0..trials)
        .into_par_iter()
        .map(|t| link.trial_rate(TrialSeed::new(seed, t)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RateSample { rates, seed })
}

/// Singular values of every trial's selected subchannel.
pub fn sample_spectra(link: &Link, trials: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_trials(trials)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let (_, hs) = link.trial_subchannel(TrialSeed::new(seed, t))?;
            Ok(singular_values(&hs))
        })
        .collect()
}

/// Rates at `snr` for previously sampled spectra.
pub fn rates_from_spectra(spectra: &[Vec<f64>], snr: f64, seed: u64) -> Result<RateSample> {
    let rates = spectra
        .par_iter()
        .map(|sv| rate_from_singular_values(sv, snr))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RateSample { rates, seed })
}

pub fn mean_rate(link: &Link, trials: u64, seed: u64) -> Result<MeanEstimate> {
    Ok(sample_rates(link, trials, seed)?.mean())
}

/// `P(rate < q)`.
pub fn outage_fixed_rate(link: &Link, q: f64, trials: u64, seed: u64) -> Result<OutageEstimate> {
    Ok(sample_rates(link, trials, seed)?.outage(q))
}

/// `P(rate < r log2 snr)`.
pub fn outage_multiplexing(link: &Link, r: f64, trials: u64, seed: u64) -> Result<OutageEstimate> {
    if !(r >= 0.0) {
        return Err(FasError::domain(format!(
            "multiplexing gain must be nonnegative, got {r}"
        )));
    }
    let threshold = r * link.scenario.snr.log2();
    Ok(sample_rates(link, trials, seed)?.outage(threshold))
}

/// `q (1 - P(rate < q))`.
pub fn q_outage_capacity(link: &Link, q: f64, trials: u64, seed: u64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(FasError::domain(format!("q must be nonnegative, got {q}")));
    }
    Ok(sample_rates(link, trials, seed)?.q_outage_capacity(q))
}

/// Paired difference estimate with a 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainEstimate {
    pub gain: f64,
    pub half_width95: f64,
    pub trials: u64,
}

/// `q (P_b - P_a)` where both links see the same trial streams.
pub fn q_outage_gain_from_samples(a: &RateSample, b: &RateSample, q: f64) -> Result<GainEstimate> {
    if a.rates.len() != b.rates.len() || a.seed != b.seed {
        return Err(FasError::domain(
            "samples must share seed and trial count for a paired comparison",
        ));
    }
    let diffs: Vec<f64> = a
        .rates
        .iter()
        .zip(&b.rates)
        .map(|(&ra, &rb)| q * (f64::from(u8::from(rb < q)) - f64::from(u8::from(ra < q))))
        .collect();
    let m = MeanEstimate::from_values(&diffs);
    Ok(GainEstimate {
        gain: m.mean,
        half_width95: m.half_width95,
        trials: m.trials,
    })
}

pub fn q_outage_gain(a: &Link, b: &Link, q: f64, trials: u64, seed: u64) -> Result<GainEstimate> {
    if !(q >= 0.0) {
        return Err(FasError::domain(format!("q must be nonnegative, got {q}")));
    }
    let sa = sample_rates(a, trials, seed)?;
    let sb = sample_rates(b, trials, seed)?;
    q_outage_gain_from_samples(&sa, &sb, q)
}
