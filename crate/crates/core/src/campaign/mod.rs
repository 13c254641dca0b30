//! Configuration-driven experiment runner producing CSV tables.
//!
//! Every row is `sweep,metric,value,trials,ci95,seed`. Rows are ordered by
//! sweep value, then by scheme (main scheme first, then baselines in config
//! order). Monte Carlo trials are keyed by `(seed, trial)`, so the output is
//! byte-identical for any thread count.

mod config;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    db_to_linear, ArrayKind, CampaignConfig, DmtParams, Experiment, ScenarioConfig, Variant,
    SCHEMA_VERSION,
};

use crate::channel::{empirical_vec_covariance, ChannelModel};
use crate::correlation::{build_correlation_matrix, eigendecompose, estimate_rank};
use crate::error::{FasError, Result};
use crate::geometry::SurfaceGeometry;
use crate::linalg::{frobenius, to_complex};
use crate::metrics::{
    dmt_antenna_selection, dmt_eval, dmt_mimo_fas, dmt_traditional, q_outage_gain_from_samples,
    rates_from_spectra, sample_rates, sample_spectra, Coupling, Link, LinkScenario, RateSample,
    Strategy,
};
use crate::selection::combination_count;

/// A config problem, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep: f64,
    pub metric: String,
    pub value: f64,
    pub trials: u64,
    pub ci95: f64,
    pub seed: u64,
}

/// A resolved scheme: label, link parameters and coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    pub label: String,
    pub field: String,
    pub array: ArrayKind,
    pub scenario: LinkScenario,
    pub coupling: Coupling,
}

/// `n1 x n2` with `n1 <= n2`, `n1` the largest divisor of `n` not above
/// its square root.
pub fn compact_grid(n: usize) -> (usize, usize) {
    let mut n1 = (n as f64).sqrt().floor() as usize;
    while n1 > 1 && !n.is_multiple_of(n1) {
        n1 -= 1;
    }
    let n1 = n1.max(1);
    (n1, n / n1)
}

/// Ports per dimension of a half-wavelength grid over aperture `w`.
pub fn half_wavelength_ports(w: f64) -> usize {
    (w / 0.5 + 1e-9).floor() as usize + 1
}

fn mimo_geometry(aperture: &SurfaceGeometry, n: usize) -> SurfaceGeometry {
    let (n1, n2) = compact_grid(n);
    SurfaceGeometry {
        n1,
        n2,
        w1: aperture.w1,
        w2: aperture.w2,
    }
}

fn half_wavelength_geometry(aperture: &SurfaceGeometry) -> SurfaceGeometry {
    let n1 = half_wavelength_ports(aperture.w1);
    let n2 = half_wavelength_ports(aperture.w2);
    SurfaceGeometry {
        n1,
        n2,
        w1: 0.5 * (n1 - 1) as f64,
        w2: 0.5 * (n2 - 1) as f64,
    }
}

fn coupled(c: &Coupling) -> bool {
    !matches!(c, Coupling::None)
}

/// Fluid grid with `ports` ports over the aperture of `g`. With coupling the
/// first dimension holds dipoles half a wavelength apart.
fn fluid_grid(g: &SurfaceGeometry, ports: usize, with_coupling: bool) -> SurfaceGeometry {
    let (n1, n2) = if with_coupling {
        let n1 = half_wavelength_ports(g.w1);
        (n1, ports / n1)
    } else {
        compact_grid(ports)
    };
    SurfaceGeometry {
        n1,
        n2,
        w1: g.w1,
        w2: g.w2,
    }
}

fn as_count(v: f64) -> Option<usize> {
    (v >= 1.0 && v.fract() == 0.0 && v <= 1e9).then_some(v as usize)
}

/// Resolves scheme `index` (0 = main, `i + 1` = `baselines[i]`) at sweep
/// value `sweep`.
pub fn resolve_scheme(cfg: &CampaignConfig, index: usize, sweep: Option<f64>) -> Scheme {
    let base = &cfg.scenario;
    let (label, field, variant) = if index == 0 {
        (cfg.label.clone(), "scenario".to_string(), None)
    } else {
        let v = &cfg.baselines[index - 1];
        (
            v.label.clone(),
            format!("baselines[{}]", index - 1),
            Some(v),
        )
    };
    let mut sc = base.to_scenario();
    let mut coupling = cfg.coupling;
    let mut array = ArrayKind::Fluid;
    if let Some(v) = variant {
        array = v.array;
        if let Some(s) = v.strategy {
            sc.strategy = s;
        }
        if let Some(g) = v.geom_tx {
            sc.geom_tx = g;
        }
        if let Some(g) = v.geom_rx {
            sc.geom_rx = g;
        }
        if let Some(n) = v.n_tx {
            sc.n_tx = n;
        }
        if let Some(n) = v.n_rx {
            sc.n_rx = n;
        }
        if let Some(k) = v.kernel {
            sc.kernel = k;
        }
        if let Some(c) = v.coupling {
            coupling = c;
        }
    }
    if let Some(value) = sweep {
        match cfg.experiment {
            Experiment::RateVsActive => {
                let n = as_count(value).unwrap_or(0);
                sc.n_tx = n;
                sc.n_rx = n;
            }
            Experiment::RateVsPorts if array == ArrayKind::Fluid => {
                // one layout for every scheme so coupled and uncoupled rates compare
                let dipoles = coupled(&cfg.coupling)
                    || cfg
                        .baselines
                        .iter()
                        .any(|b| b.coupling.is_some_and(|c| coupled(&c)));
                let ports = as_count(value).unwrap_or(0);
                sc.geom_tx = fluid_grid(&sc.geom_tx, ports, dipoles);
                sc.geom_rx = fluid_grid(&sc.geom_rx, ports, dipoles);
            }
            Experiment::OutageVsSnr => sc.snr = db_to_linear(value),
            _ => {}
        }
    }
    match array {
        ArrayKind::Fluid => {}
        ArrayKind::Mimo => {
            sc.geom_tx = mimo_geometry(&sc.geom_tx, sc.n_tx);
            sc.geom_rx = mimo_geometry(&sc.geom_rx, sc.n_rx);
        }
        ArrayKind::HalfWavelength => {
            sc.geom_tx = half_wavelength_geometry(&sc.geom_tx);
            sc.geom_rx = half_wavelength_geometry(&sc.geom_rx);
        }
    }
    Scheme {
        label,
        field,
        array,
        scenario: sc,
        coupling,
    }
}

fn sweep_points(cfg: &CampaignConfig) -> Vec<Option<f64>> {
    match cfg.experiment {
        Experiment::RateVsActive | Experiment::RateVsPorts | Experiment::OutageVsSnr => {
            cfg.sweep.iter().map(|&v| Some(v)).collect()
        }
        _ => vec![None],
    }
}

fn check_scheme(s: &Scheme, sweep: Option<f64>, out: &mut Vec<Diagnostic>) {
    let p = &s.field;
    let at = sweep
        .map(|v| format!(" (sweep value {v})"))
        .unwrap_or_default();
    let sc = &s.scenario;
    let mut geometry_ok = true;
    for (name, g) in [("geom_tx", &sc.geom_tx), ("geom_rx", &sc.geom_rx)] {
        if let Err(e) = g.validate() {
            out.push(Diagnostic::new(format!("{p}.{name}"), format!("{e}{at}")));
            geometry_ok = false;
        }
    }
    if !geometry_ok {
        return;
    }
    for (name, n, total) in [
        ("n_tx", sc.n_tx, sc.geom_tx.port_count()),
        ("n_rx", sc.n_rx, sc.geom_rx.port_count()),
    ] {
        if n == 0 || n > total {
            out.push(Diagnostic::new(
                format!("{p}.{name}"),
                format!("active ports {n} must lie in 1..={total} (ports on that side){at}"),
            ));
        }
    }
    if !(sc.path_loss > 0.0 && sc.path_loss.is_finite()) {
        out.push(Diagnostic::new(
            format!("{p}.path_loss"),
            "path loss amplitude must be positive and finite",
        ));
    }
    if !(sc.snr > 0.0 && sc.snr.is_finite()) {
        out.push(Diagnostic::new(
            "scenario.snr_db",
            format!("SNR must be finite{at}"),
        ));
    }
    match sc.strategy {
        Strategy::Exhaustive { combo_limit } => {
            let count = combination_count(
                sc.geom_tx.port_count(),
                sc.geom_rx.port_count(),
                sc.n_tx.min(sc.geom_tx.port_count()),
                sc.n_rx.min(sc.geom_rx.port_count()),
            );
            if count > u128::from(combo_limit) {
                out.push(Diagnostic::new(
                    format!("{p}.strategy.combo_limit"),
                    format!(
                        "exhaustive search needs {count} port combinations, above the limit of {combo_limit}{at}"
                    ),
                ));
            }
        }
        Strategy::Greedy { separation } if !(separation >= 0.0) => {
            out.push(Diagnostic::new(
                format!("{p}.strategy.separation"),
                "separation must be nonnegative",
            ));
        }
        _ => {}
    }
    if coupled(&s.coupling) && s.array == ArrayKind::Fluid {
        for (name, g) in [("geom_tx", &sc.geom_tx), ("geom_rx", &sc.geom_rx)] {
            let want = half_wavelength_ports(g.w1);
            if g.n1 != want {
                out.push(Diagnostic::new(
                    format!("{p}.{name}.n1"),
                    format!(
                        "dipole constraint: with coupling enabled n1 must be floor(w1/0.5)+1 = {want} for w1 = {}, got {}{at}",
                        g.w1, g.n1
                    ),
                ));
            }
        }
        if let Coupling::Liquid { dipole } | Coupling::Pixel { dipole, .. } = s.coupling {
            if (dipole.length - 0.5).abs() > 1e-12 {
                out.push(Diagnostic::new(
                    "coupling.dipole.length",
                    "only half-wave dipoles are supported",
                ));
            }
        }
    }
}

/// All problems that would stop [`run_campaign`]; empty when the config is
/// runnable.
pub fn validate_config(cfg: &CampaignConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if cfg.schema_version != SCHEMA_VERSION {
        out.push(Diagnostic::new(
            "schema_version",
            format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ),
        ));
    }
    if cfg.label.is_empty() {
        out.push(Diagnostic::new("label", "label must not be empty"));
    }
    for (i, b) in cfg.baselines.iter().enumerate() {
        if b.label.is_empty() || b.label == cfg.label {
            out.push(Diagnostic::new(
                format!("baselines[{i}].label"),
                "labels must be nonempty and distinct",
            ));
        }
        if cfg.baselines[..i].iter().any(|o| o.label == b.label) {
            out.push(Diagnostic::new(
                format!("baselines[{i}].label"),
                format!("duplicate label {}", b.label),
            ));
        }
    }
    if cfg.experiment.is_monte_carlo() && cfg.trials() == 0 {
        out.push(Diagnostic::new("trials", "at least one trial is required"));
    }
    if !(cfg.rank_threshold > 0.0) {
        out.push(Diagnostic::new(
            "rank_threshold",
            "threshold must be positive",
        ));
    }
    let needs_sweep = !matches!(
        cfg.experiment,
        Experiment::Dmt | Experiment::CovarianceCheck
    );
    if needs_sweep && cfg.sweep.is_empty() {
        out.push(Diagnostic::new(
            "sweep",
            format!(
                "experiment {} needs at least one sweep value",
                cfg.experiment
            ),
        ));
    }
    for (j, &v) in cfg.sweep.iter().enumerate() {
        let field = format!("sweep[{j}]");
        let bad = match cfg.experiment {
            Experiment::RateVsActive | Experiment::RateVsPorts | Experiment::CovarianceCheck => {
                as_count(v)
                    .is_none()
                    .then_some("must be a positive integer")
            }
            Experiment::OutageVsSnr => (!v.is_finite()).then_some("SNR in dB must be finite"),
            Experiment::OutageVsQ | Experiment::QOutage => {
                (!(v >= 0.0 && v.is_finite())).then_some("target rate must be nonnegative")
            }
            Experiment::Table1 => {
                (!(v > 0.0 && v.is_finite())).then_some("aperture side must be positive")
            }
            Experiment::Dmt => {
                let n_min = cfg.scenario.n_tx.min(cfg.scenario.n_rx) as f64;
                (!(v >= 0.0 && v <= n_min)).then_some("multiplexing gain must lie in [0, n_min]")
            }
        };
        if let Some(msg) = bad {
            out.push(Diagnostic::new(field, format!("{msg}, got {v}")));
        }
    }
    if cfg.experiment == Experiment::OutageVsSnr {
        match cfg.rate_threshold {
            None => out.push(Diagnostic::new(
                "rate_threshold",
                "outage-vs-snr needs a target rate",
            )),
            Some(q) if !(q >= 0.0 && q.is_finite()) => out.push(Diagnostic::new(
                "rate_threshold",
                format!("target rate must be nonnegative, got {q}"),
            )),
            _ => {}
        }
    }
    if cfg.experiment == Experiment::Dmt {
        let n_min = cfg.scenario.n_tx.min(cfg.scenario.n_rx);
        for (name, r) in [
            ("dmt.rank_rx", cfg.dmt.rank_rx),
            ("dmt.rank_tx", cfg.dmt.rank_tx),
        ] {
            if let Some(r) = r {
                if r < n_min {
                    out.push(Diagnostic::new(
                        name,
                        format!("effective rank {r} is below n_min = {n_min}"),
                    ));
                }
            }
        }
    }
    let structural = !matches!(cfg.experiment, Experiment::Table1 | Experiment::Dmt);
    if structural && out.iter().all(|d| !d.field.starts_with("sweep")) {
        for sweep in sweep_points(cfg) {
            for i in 0..=cfg.baselines.len() {
                check_scheme(&resolve_scheme(cfg, i, sweep), sweep, &mut out);
            }
        }
    } else if !structural {
        for (name, g) in [
            ("scenario.geom_tx", &cfg.scenario.geom_tx),
            ("scenario.geom_rx", &cfg.scenario.geom_rx),
        ] {
            if let Err(e) = g.validate() {
                out.push(Diagnostic::new(name, e.to_string()));
            }
        }
        if cfg.scenario.n_tx == 0 || cfg.scenario.n_rx == 0 {
            out.push(Diagnostic::new(
                "scenario.n_tx",
                "active port counts must be at least 1",
            ));
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|d| seen.insert((d.field.clone(), d.message.clone())));
    out
}

/// Execution settings that do not change results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutput {
    pub rows: Vec<ResultRow>,
    pub summary: serde_json::Value,
}

pub fn run_campaign(cfg: &CampaignConfig, opts: RunOptions) -> Result<CampaignOutput> {
    let diags = validate_config(cfg);
    if let Some(first) = diags.first() {
        let message = diags
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(FasError::Config {
            field: first.field.clone(),
            message,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| FasError::Config {
            field: "threads".into(),
            message: e.to_string(),
        })?;
    let rows = pool.install(|| run_rows(cfg))?;
    let summary = summarize(cfg, &rows);
    Ok(CampaignOutput { rows, summary })
}

fn row(sweep: f64, metric: String, value: f64, trials: u64, ci95: f64, seed: u64) -> ResultRow {
    ResultRow {
        sweep,
        metric,
        value,
        trials,
        ci95,
        seed,
    }
}

fn link_of(s: &Scheme) -> Result<Link> {
    Link::with_coupling(s.scenario.clone(), s.coupling)
}

fn run_rows(cfg: &CampaignConfig) -> Result<Vec<ResultRow>> {
    let trials = cfg.trials();
    let seed = cfg.seed;
    let schemes = cfg.baselines.len() + 1;
    let mut rows = Vec::new();
    match cfg.experiment {
        Experiment::RateVsActive | Experiment::RateVsPorts => {
            for &v in &cfg.sweep {
                for i in 0..schemes {
                    let s = resolve_scheme(cfg, i, Some(v));
                    let m = sample_rates(&link_of(&s)?, trials, seed)?.mean();
                    rows.push(row(
                        v,
                        format!("{}.mean_rate", s.label),
                        m.mean,
                        trials,
                        m.half_width95,
                        seed,
                    ));
                }
            }
        }
        Experiment::OutageVsSnr => {
            let q = cfg.rate_threshold.expect("validated");
            let mut table: Vec<Vec<ResultRow>> = vec![Vec::new(); cfg.sweep.len()];
            for i in 0..schemes {
                let s = resolve_scheme(cfg, i, None);
                let link = link_of(&s)?;
                let metric = format!("{}.outage", s.label);
                if link.selection_ignores_snr() {
                    let spectra = sample_spectra(&link, trials, seed)?;
                    for (j, &v) in cfg.sweep.iter().enumerate() {
                        let o = rates_from_spectra(&spectra, db_to_linear(v), seed)?.outage(q);
                        table[j].push(row(
                            v,
                            metric.clone(),
                            o.probability,
                            trials,
                            o.half_width95,
                            seed,
                        ));
                    }
                } else {
                    for (j, &v) in cfg.sweep.iter().enumerate() {
                        let s = resolve_scheme(cfg, i, Some(v));
                        let o = sample_rates(&link_of(&s)?, trials, seed)?.outage(q);
                        table[j].push(row(
                            v,
                            metric.clone(),
                            o.probability,
                            trials,
                            o.half_width95,
                            seed,
                        ));
                    }
                }
            }
            rows = table.into_iter().flatten().collect();
        }
        Experiment::OutageVsQ | Experiment::QOutage => {
            let samples: Vec<(String, RateSample)> = (0..schemes)
                .map(|i| {
                    let s = resolve_scheme(cfg, i, None);
                    Ok((s.label.clone(), sample_rates(&link_of(&s)?, trials, seed)?))
                })
                .collect::<Result<_>>()?;
            for &q in &cfg.sweep {
                for (label, sample) in &samples {
                    let o = sample.outage(q);
                    if cfg.experiment == Experiment::OutageVsQ {
                        rows.push(row(
                            q,
                            format!("{label}.outage"),
                            o.probability,
                            trials,
                            o.half_width95,
                            seed,
                        ));
                    } else {
                        rows.push(row(
                            q,
                            format!("{label}.q_outage_capacity"),
                            sample.q_outage_capacity(q),
                            trials,
                            q * o.half_width95,
                            seed,
                        ));
                    }
                }
                if cfg.experiment == Experiment::QOutage {
                    let (main, main_sample) = &samples[0];
                    for (label, sample) in &samples[1..] {
                        let g = q_outage_gain_from_samples(main_sample, sample, q)?;
                        rows.push(row(
                            q,
                            format!("{main}.q_outage_gain_vs_{label}"),
                            g.gain,
                            trials,
                            g.half_width95,
                            seed,
                        ));
                    }
                }
            }
        }
        Experiment::Dmt => {
            let sc = &cfg.scenario;
            let n_min = sc.n_tx.min(sc.n_rx);
            let rank = |given: Option<usize>, g: &SurfaceGeometry| -> Result<usize> {
                match given {
                    Some(r) => Ok(r),
                    None => {
                        let j = build_correlation_matrix(g, sc.kernel.kernel().as_ref());
                        Ok(estimate_rank(&eigendecompose(j.matrix())?, cfg.rank_threshold)?.rank)
                    }
                }
            };
            let rank_rx = rank(cfg.dmt.rank_rx, &sc.geom_rx)?;
            let rank_tx = rank(cfg.dmt.rank_tx, &sc.geom_tx)?;
            let curves = [
                ("d.mimo_fas", dmt_mimo_fas(rank_rx, rank_tx, n_min)?),
                (
                    "d.antenna_selection",
                    dmt_antenna_selection(
                        (sc.geom_rx.w1, sc.geom_rx.w2),
                        (sc.geom_tx.w1, sc.geom_tx.w2),
                        n_min,
                    )?,
                ),
                ("d.traditional", dmt_traditional(sc.n_rx, sc.n_tx)?),
            ];
            let sweep: Vec<f64> = if cfg.sweep.is_empty() {
                (0..=n_min).map(|r| r as f64).collect()
            } else {
                cfg.sweep.clone()
            };
            for r in sweep {
                for (name, c) in &curves {
                    let d = if r <= c.max_multiplexing() {
                        dmt_eval(c, r)?
                    } else {
                        0.0
                    };
                    rows.push(row(r, (*name).to_string(), d, 0, 0.0, seed));
                }
            }
        }
        Experiment::Table1 => {
            let g = &cfg.scenario.geom_rx;
            for &w in &cfg.sweep {
                let geom = SurfaceGeometry::new(g.n1, g.n2, w, w)?;
                let j = build_correlation_matrix(&geom, cfg.scenario.kernel.kernel().as_ref());
                let est = estimate_rank(&eigendecompose(j.matrix())?, cfg.rank_threshold)?;
                rows.push(row(w, "rank".into(), est.rank as f64, 0, 0.0, seed));
                rows.push(row(
                    w,
                    "truncation_error".into(),
                    est.truncation_error,
                    0,
                    0.0,
                    seed,
                ));
            }
        }
        Experiment::CovarianceCheck => {
            let s = resolve_scheme(cfg, 0, None);
            let sc = &s.scenario;
            let kernel = sc.kernel.kernel();
            let j_rx = build_correlation_matrix(&sc.geom_rx, kernel.as_ref()).into_inner();
            let j_tx = build_correlation_matrix(&sc.geom_tx, kernel.as_ref()).into_inner();
            let model =
                ChannelModel::new(eigendecompose(&j_rx)?, eigendecompose(&j_tx)?, sc.path_loss)?;
            // target built from the correlation matrices, not from the model's factors
            let exact = to_complex(&(j_tx.transpose().kronecker(&j_rx) * sc.path_loss.powi(2)));
            let counts: Vec<f64> = if cfg.sweep.is_empty() {
                vec![trials as f64]
            } else {
                cfg.sweep.clone()
            };
            for t in counts {
                let n = t as u64;
                let emp = empirical_vec_covariance(&model, n, seed)?;
                let err = frobenius(&(emp - &exact)) / frobenius(&exact);
                rows.push(row(
                    t,
                    "covariance.relative_error".into(),
                    err,
                    n,
                    0.0,
                    seed,
                ));
            }
        }
    }
    Ok(rows)
}

fn summarize(cfg: &CampaignConfig, rows: &[ResultRow]) -> serde_json::Value {
    let rare: Vec<serde_json::Value> = rows
        .iter()
        .filter(|r| r.metric.ends_with(".outage") && r.value > 0.0 && r.value < 1e-4)
        .map(|r| serde_json::json!({ "sweep": r.sweep, "metric": r.metric }))
        .collect();
    serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "config": cfg,
        "rows": rows.len(),
        "metrics": rows.iter().map(|r| r.metric.clone()).collect::<std::collections::BTreeSet<_>>(),
        "trials_per_point": if cfg.experiment.is_monte_carlo() { cfg.trials() } else { 0 },
        "rare_outage_points": rare,
    })
}

pub const CSV_HEADER: [&str; 6] = ["sweep", "metric", "value", "trials", "ci95", "seed"];

/// CSV text with LF line endings.
pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| FasError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.sweep.to_string(),
            r.metric.clone(),
            r.value.to_string(),
            r.trials.to_string(),
            r.ci95.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| FasError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| FasError::Io(e.to_string()))
}

/// Parses a results CSV back into rows.
pub fn csv_to_rows(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: &dyn fmt::Display| FasError::Io(format!("malformed results CSV: {e}"));
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(&e));
        out.push(ResultRow {
            sweep: num(0)?,
            metric: rec[1].to_string(),
            value: num(2)?,
            trials: rec[3].parse().map_err(|e| bad(&e))?,
            ci95: num(4)?,
            seed: rec[5].parse().map_err(|e| bad(&e))?,
        });
    }
    Ok(out)
}

/// Writes `results.csv` and `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, out: &CampaignOutput) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("results.csv");
    let json_path = dir.join("summary.json");
    std::fs::write(&csv_path, rows_to_csv(&out.rows)?)?;
    let mut json = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    json.push('\n');
    std::fs::write(&json_path, json)?;
    Ok((csv_path, json_path))
}
