//! C ABI for the `mimo-fas` simulation library.
//!
//! Conventions:
//! - every fallible function returns an [`MfasStatus`]; details of the most
//!   recent failure on the calling thread are available from
//!   [`mfas_last_error_message`]
//! - objects are opaque handles created by `*_new`/`*_from_*` functions and
//!   released by the matching `*_free`, which accepts null
//! - strings are NUL-terminated UTF-8; output buffers follow the
//!   "pass capacity, receive required length" pattern
//! - panics never cross the boundary; they surface as `MFAS_STATUS_PANIC`

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mimo_fas::beamforming::{waterfill, WaterfillParams};
use mimo_fas::campaign::{
    db_to_linear, rows_to_csv, run_campaign, validate_config, CampaignConfig, ResultRow, RunOptions,
};
use mimo_fas::correlation::{build_correlation_matrix, eigendecompose, estimate_rank};
use mimo_fas::geometry::{KernelId, SurfaceGeometry};
use mimo_fas::metrics::{
    dmt_antenna_selection, dmt_eval, dmt_mimo_fas, dmt_traditional, sample_rates, Link,
    LinkScenario, Strategy,
};
use mimo_fas::selection::{SwapCriterion, DEFAULT_COMBO_LIMIT, DEFAULT_MIN_SEPARATION};
use mimo_fas::FasError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfasStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    NumericalRank = 4,
    TooManyCombinations = 5,
    Infeasible = 6,
    Interval = 7,
    Config = 8,
    Io = 9,
    BufferTooSmall = 10,
    OutOfRange = 11,
    Panic = 12,
}

impl From<&FasError> for MfasStatus {
    fn from(e: &FasError) -> Self {
        match e {
            FasError::Domain(_) => MfasStatus::Domain,
            FasError::NumericalRank(_) => MfasStatus::NumericalRank,
            FasError::TooManyCombinations { .. } => MfasStatus::TooManyCombinations,
            FasError::Infeasible { .. } => MfasStatus::Infeasible,
            FasError::Interval { .. } => MfasStatus::Interval,
            FasError::Config { .. } => MfasStatus::Config,
            FasError::Io(_) => MfasStatus::Io,
        }
    }
}

/// Port grid of one side: `n1 x n2` ports over a `w1 x w2` aperture in
/// wavelengths.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MfasGeometry {
    pub n1: usize,
    pub n2: usize,
    pub w1: f64,
    pub w2: f64,
}

impl From<MfasGeometry> for SurfaceGeometry {
    fn from(g: MfasGeometry) -> Self {
        SurfaceGeometry {
            n1: g.n1,
            n2: g.n2,
            w1: g.w1,
            w2: g.w2,
        }
    }
}

/// Port selection strategy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfasStrategy {
    /// Rank-revealing QR selection.
    Qr = 0,
    /// Exhaustive search with the default combination limit.
    Exhaustive = 1,
    /// Norm-greedy selection with half-wavelength separation.
    Greedy = 2,
    Random = 3,
}

/// Link parameters. `snr_db` is the transmit SNR in dB.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MfasScenario {
    pub geom_tx: MfasGeometry,
    pub geom_rx: MfasGeometry,
    pub n_tx: usize,
    pub n_rx: usize,
    pub path_loss: f64,
    pub snr_db: f64,
    pub strategy: MfasStrategy,
}

impl From<MfasScenario> for LinkScenario {
    fn from(s: MfasScenario) -> Self {
        let strategy = match s.strategy {
            MfasStrategy::Qr => Strategy::Qr {
                criterion: SwapCriterion::DetRatio,
            },
            MfasStrategy::Exhaustive => Strategy::Exhaustive {
                combo_limit: DEFAULT_COMBO_LIMIT as u64,
            },
            MfasStrategy::Greedy => Strategy::Greedy {
                separation: DEFAULT_MIN_SEPARATION,
            },
            MfasStrategy::Random => Strategy::Random,
        };
        LinkScenario {
            geom_tx: s.geom_tx.into(),
            geom_rx: s.geom_rx.into(),
            n_tx: s.n_tx,
            n_rx: s.n_rx,
            path_loss: s.path_loss,
            strategy,
            snr: db_to_linear(s.snr_db),
            kernel: KernelId::default(),
        }
    }
}

/// A Monte Carlo estimate with its 95% half-width.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MfasEstimate {
    pub value: f64,
    pub ci95: f64,
    pub trials: u64,
}

/// One result row of a campaign.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MfasRow {
    pub sweep: f64,
    pub value: f64,
    pub trials: u64,
    pub ci95: f64,
    pub seed: u64,
}

/// Opaque link handle.
pub struct MfasLink {
    link: Link,
}

/// Opaque parsed campaign configuration.
pub struct MfasCampaign {
    config: CampaignConfig,
}

/// Opaque campaign results.
pub struct MfasResults {
    rows: Vec<ResultRow>,
    csv: String,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(MfasStatus, String);

impl From<FasError> for Failure {
    fn from(e: FasError) -> Self {
        Failure(MfasStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MfasStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MfasStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MfasStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            MfasStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies `text` plus a NUL into `buf` when it fits; always reports the
/// required size including the NUL through `needed`.
unsafe fn copy_string(
    text: &str,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> Result<(), Failure> {
    let size = text.len() + 1;
    if !needed.is_null() {
        needed.write(size);
    }
    if buf.is_null() || capacity < size {
        if buf.is_null() && capacity == 0 {
            // size query
            return Ok(());
        }
        return Err(Failure(
            MfasStatus::BufferTooSmall,
            format!("buffer holds {capacity} bytes, {size} needed"),
        ));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
    buf.add(text.len()).write(0);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mfas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf`.
///
/// Pass `buf = NULL, capacity = 0` to query the size (written to
/// `needed`, including the NUL).
///
/// # Safety
/// `buf` must be valid for `capacity` bytes or null; `needed` must be
/// writable or null.
#[no_mangle]
pub unsafe extern "C" fn mfas_last_error_message(
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> MfasStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match catch_unwind(AssertUnwindSafe(|| {
        copy_string(&msg, buf, capacity, needed)
    })) {
        Ok(Ok(())) => MfasStatus::Ok,
        Ok(Err(Failure(s, _))) => s,
        Err(_) => MfasStatus::Panic,
    }
}

/// Builds a link. On success `*out` owns a handle released by
/// [`mfas_link_free`].
///
/// # Safety
/// `scenario` must point to a valid scenario; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfas_link_new(
    scenario: *const MfasScenario,
    out: *mut *mut MfasLink,
) -> MfasStatus {
    guard(|| {
        if scenario.is_null() {
            return Err(null("scenario"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let link = Link::new(LinkScenario::from(*scenario))?;
        out.write(Box::into_raw(Box::new(MfasLink { link })));
        Ok(())
    })
}

/// # Safety
/// `link` must come from [`mfas_link_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mfas_link_free(link: *mut MfasLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Mean achievable rate over `trials` seeded draws, bits/s/Hz.
///
/// # Safety
/// `link` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfas_link_mean_rate(
    link: *const MfasLink,
    trials: u64,
    seed: u64,
    out: *mut MfasEstimate,
) -> MfasStatus {
    guard(|| {
        let link = link.as_ref().ok_or_else(|| null("link"))?;
        let m = sample_rates(&link.link, trials, seed)?.mean();
        write_out(
            out,
            MfasEstimate {
                value: m.mean,
                ci95: m.half_width95,
                trials: m.trials,
            },
            "out",
        )
    })
}

/// Probability that the rate falls below `rate_threshold`.
///
/// # Safety
/// `link` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfas_link_outage(
    link: *const MfasLink,
    rate_threshold: f64,
    trials: u64,
    seed: u64,
    out: *mut MfasEstimate,
) -> MfasStatus {
    guard(|| {
        let link = link.as_ref().ok_or_else(|| null("link"))?;
        if !(rate_threshold >= 0.0) {
            return Err(Failure(
                MfasStatus::Domain,
                format!("rate threshold must be nonnegative, got {rate_threshold}"),
            ));
        }
        let o = sample_rates(&link.link, trials, seed)?.outage(rate_threshold);
        write_out(
            out,
            MfasEstimate {
                value: o.probability,
                ci95: o.half_width95,
                trials: o.trials,
            },
            "out",
        )
    })
}

/// Effective rank of a surface's correlation matrix: eigenvalues at or
/// above `threshold`. `truncation_error` may be null.
///
/// # Safety
/// `geometry` must be valid; `rank` writable; `truncation_error` writable
/// or null.
#[no_mangle]
pub unsafe extern "C" fn mfas_estimate_rank(
    geometry: *const MfasGeometry,
    threshold: f64,
    rank: *mut usize,
    truncation_error: *mut f64,
) -> MfasStatus {
    guard(|| {
        let g = SurfaceGeometry::from(*geometry.as_ref().ok_or_else(|| null("geometry"))?);
        g.validate()?;
        let j = build_correlation_matrix(&g, KernelId::default().kernel().as_ref());
        let est = estimate_rank(&eigendecompose(j.matrix())?, threshold)?;
        write_out(rank, est.rank, "rank")?;
        if !truncation_error.is_null() {
            truncation_error.write(est.truncation_error);
        }
        Ok(())
    })
}

/// Which tradeoff curve [`mfas_dmt`] evaluates.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfasDmtKind {
    /// Fluid surfaces; `a`, `b` are the effective ranks.
    FluidSurface = 0,
    /// Half-wavelength antenna selection; `a`, `b` are ignored and the
    /// apertures come from `aperture_rx`/`aperture_tx`.
    AntennaSelection = 1,
    /// Classical i.i.d. MIMO; `a`, `b` are the antenna counts.
    Traditional = 2,
}

/// Diversity gain at multiplexing gain `r`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfas_dmt(
    kind: MfasDmtKind,
    a: usize,
    b: usize,
    n_min: usize,
    aperture_rx: f64,
    aperture_tx: f64,
    r: f64,
    out: *mut f64,
) -> MfasStatus {
    guard(|| {
        let curve = match kind {
            MfasDmtKind::FluidSurface => dmt_mimo_fas(a, b, n_min)?,
            MfasDmtKind::AntennaSelection => dmt_antenna_selection(
                (aperture_rx, aperture_rx),
                (aperture_tx, aperture_tx),
                n_min,
            )?,
            MfasDmtKind::Traditional => dmt_traditional(a, b)?,
        };
        write_out(out, dmt_eval(&curve, r)?, "out")
    })
}

/// Waterfilling over `len` gains with total power `snr`. `powers` receives
/// `len` values; `water_level` may be null.
///
/// # Safety
/// `gains` and `powers` must be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn mfas_waterfill(
    gains: *const f64,
    len: usize,
    snr: f64,
    powers: *mut f64,
    water_level: *mut f64,
) -> MfasStatus {
    guard(|| {
        if gains.is_null() {
            return Err(null("gains"));
        }
        if powers.is_null() {
            return Err(null("powers"));
        }
        let g = std::slice::from_raw_parts(gains, len);
        let alloc = waterfill(g, snr, WaterfillParams::for_gains(g, snr))?;
        ptr::copy_nonoverlapping(alloc.powers.as_ptr(), powers, len);
        if !water_level.is_null() {
            water_level.write(alloc.water_level);
        }
        Ok(())
    })
}

/// Parses a JSON campaign configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfas_campaign_from_json(
    json: *const c_char,
    out: *mut *mut MfasCampaign,
) -> MfasStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(MfasStatus::InvalidUtf8, e.to_string()))?;
        let config = CampaignConfig::from_json(text)?;
        out.write(Box::into_raw(Box::new(MfasCampaign { config })));
        Ok(())
    })
}

/// # Safety
/// `campaign` must come from [`mfas_campaign_from_json`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn mfas_campaign_free(campaign: *mut MfasCampaign) {
    if !campaign.is_null() {
        drop(Box::from_raw(campaign));
    }
}

/// Writes the configuration's diagnostics, one `field: message` per line
/// (empty when valid), and their count.
///
/// # Safety
/// `campaign` must be live; `count` writable; `buf`/`needed` as in
/// [`mfas_last_error_message`].
#[no_mangle]
pub unsafe extern "C" fn mfas_campaign_validate(
    campaign: *const MfasCampaign,
    count: *mut usize,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> MfasStatus {
    guard(|| {
        let c = campaign.as_ref().ok_or_else(|| null("campaign"))?;
        let diags = validate_config(&c.config);
        write_out(count, diags.len(), "count")?;
        let text: String = diags.iter().map(|d| format!("{d}\n")).collect();
        copy_string(&text, buf, capacity, needed)
    })
}

/// Runs a campaign on `threads` workers (0 = all cores).
///
/// # Safety
/// `campaign` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfas_campaign_run(
    campaign: *const MfasCampaign,
    threads: usize,
    out: *mut *mut MfasResults,
) -> MfasStatus {
    guard(|| {
        let c = campaign.as_ref().ok_or_else(|| null("campaign"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = RunOptions {
            threads: (threads > 0).then_some(threads),
        };
        let rows = run_campaign(&c.config, opts)?.rows;
        let csv = rows_to_csv(&rows)?;
        out.write(Box::into_raw(Box::new(MfasResults { rows, csv })));
        Ok(())
    })
}

/// # Safety
/// `results` must come from [`mfas_campaign_run`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn mfas_results_free(results: *mut MfasResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

/// Number of result rows; 0 for a null handle.
///
/// # Safety
/// `results` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn mfas_results_len(results: *const MfasResults) -> usize {
    results.as_ref().map_or(0, |r| r.rows.len())
}

/// Numeric fields of row `index`, and its metric name through
/// `metric`/`capacity`/`needed`.
///
/// # Safety
/// `results` must be live; `row` writable; string arguments as in
/// [`mfas_last_error_message`].
#[no_mangle]
pub unsafe extern "C" fn mfas_results_row(
    results: *const MfasResults,
    index: usize,
    row: *mut MfasRow,
    metric: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> MfasStatus {
    guard(|| {
        let r = results.as_ref().ok_or_else(|| null("results"))?;
        let src = r.rows.get(index).ok_or_else(|| {
            Failure(
                MfasStatus::OutOfRange,
                format!("row {index} outside 0..{}", r.rows.len()),
            )
        })?;
        write_out(
            row,
            MfasRow {
                sweep: src.sweep,
                value: src.value,
                trials: src.trials,
                ci95: src.ci95,
                seed: src.seed,
            },
            "row",
        )?;
        copy_string(&src.metric, metric, capacity, needed)
    })
}

/// The results as CSV text (header `sweep,metric,value,trials,ci95,seed`,
/// LF line endings).
///
/// # Safety
/// `results` must be live; string arguments as in
/// [`mfas_last_error_message`].
#[no_mangle]
pub unsafe extern "C" fn mfas_results_csv(
    results: *const MfasResults,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> MfasStatus {
    guard(|| {
        let r = results.as_ref().ok_or_else(|| null("results"))?;
        copy_string(&r.csv, buf, capacity, needed)
    })
}
