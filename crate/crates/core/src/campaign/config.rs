use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::correlation::DEFAULT_RANK_THRESHOLD;
use crate::geometry::{KernelId, SurfaceGeometry};
use crate::metrics::{Coupling, LinkScenario, Strategy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    /// Mean rate against the number of active ports per side.
    #[serde(rename = "rate-vs-ns")]
    RateVsActive,
    /// Mean rate against the number of ports per side.
    #[serde(rename = "rate-vs-Ns")]
    RateVsPorts,
    #[serde(rename = "outage-vs-snr")]
    OutageVsSnr,
    #[serde(rename = "outage-vs-q")]
    OutageVsQ,
    #[serde(rename = "dmt")]
    Dmt,
    #[serde(rename = "q-outage")]
    QOutage,
    #[serde(rename = "table1")]
    Table1,
    #[serde(rename = "covariance-check")]
    CovarianceCheck,
}

impl Experiment {
    pub fn is_monte_carlo(self) -> bool {
        !matches!(self, Experiment::Dmt | Experiment::Table1)
    }

    /// Trial count used when the config does not set one.
    pub fn default_trials(self) -> u64 {
        match self {
            Experiment::RateVsActive | Experiment::RateVsPorts => 10_000,
            Experiment::Dmt | Experiment::Table1 => 0,
            _ => 100_000,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

fn one() -> f64 {
    1.0
}

fn default_snr_db() -> f64 {
    30.0
}

/// Link parameters of the main scheme, with the SNR in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geom_tx: SurfaceGeometry,
    pub geom_rx: SurfaceGeometry,
    pub n_tx: usize,
    pub n_rx: usize,
    #[serde(default = "one")]
    pub path_loss: f64,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default = "default_snr_db")]
    pub snr_db: f64,
    #[serde(default)]
    pub kernel: KernelId,
}

impl ScenarioConfig {
    pub fn to_scenario(&self) -> LinkScenario {
        LinkScenario {
            geom_tx: self.geom_tx,
            geom_rx: self.geom_rx,
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            path_loss: self.path_loss,
            strategy: self.strategy,
            snr: db_to_linear(self.snr_db),
            kernel: self.kernel,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// How the ports of a compared scheme are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayKind {
    /// The configured port grid.
    #[default]
    Fluid,
    /// Conventional MIMO: exactly `n` fixed antennas on a compact grid over
    /// the same aperture, all active.
    Mimo,
    /// Antenna selection: fixed antennas half a wavelength apart filling
    /// the aperture, `n` of them selected.
    HalfWavelength,
}

/// A scheme compared against the main one. Unset fields inherit from the
/// main scenario.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub label: String,
    #[serde(default)]
    pub array: ArrayKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_tx: Option<SurfaceGeometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_rx: Option<SurfaceGeometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
}

/// Explicit effective ranks for the DMT experiment; estimated from the
/// geometry when absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmtParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_rx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tx: Option<usize>,
}

fn default_label() -> String {
    "fas".into()
}

fn default_rank_threshold() -> f64 {
    DEFAULT_RANK_THRESHOLD
}

/// One experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    /// Metric prefix of the main scheme.
    #[serde(default = "default_label")]
    pub label: String,
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub baselines: Vec<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Values of the swept parameter; its meaning depends on the experiment
    /// (active ports, ports, SNR in dB, target rate, multiplexing gain,
    /// aperture side, trial count).
    #[serde(default)]
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub coupling: Coupling,
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Target rate of the outage-vs-snr experiment, bits/s/Hz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_threshold: Option<f64>,
    #[serde(default = "default_rank_threshold")]
    pub rank_threshold: f64,
    #[serde(default)]
    pub dmt: DmtParams,
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::FasError::Config {
            field: "<document>".into(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn trials(&self) -> u64 {
        self.trials
            .unwrap_or_else(|| self.experiment.default_trials())
    }
}
