use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mimo_fas::campaign::{
    rows_to_csv, run_campaign, validate_config, write_outputs, CampaignConfig, DmtParams,
    Experiment, RunOptions, ScenarioConfig, SCHEMA_VERSION,
};
use mimo_fas::geometry::SurfaceGeometry;
use mimo_fas::metrics::Coupling;

#[derive(Parser)]
#[command(
    name = "mimo-fas",
    version,
    about = "MIMO fluid-antenna link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for results.csv and summary.json.
    #[arg(long, env = "MIMO_FAS_OUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a JSON config and list every problem found.
    Validate { config: PathBuf },
    /// Print diversity–multiplexing tradeoff curves as CSV.
    Dmt {
        /// Ports per side of a square surface.
        #[arg(long, default_value_t = 10)]
        ports: usize,
        /// Aperture side in wavelengths.
        #[arg(long, default_value_t = 1.0)]
        aperture: f64,
        /// Active ports per side.
        #[arg(long, default_value_t = 4)]
        active: usize,
        /// Effective rank per side; estimated from the geometry when absent.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Print effective rank against aperture side as CSV.
    Table1 {
        /// Ports per side of a square surface.
        #[arg(long, default_value_t = 10)]
        ports: usize,
        /// Aperture sides in wavelengths.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 3.0])]
        apertures: Vec<f64>,
        /// Relative eigenvalue threshold.
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
    },
}

fn load(path: &Path) -> Result<CampaignConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    CampaignConfig::from_json(&text).map_err(|e| e.to_string())
}

fn analytic_config(
    experiment: Experiment,
    ports: usize,
    aperture: f64,
    active: usize,
) -> Result<CampaignConfig, String> {
    let g = SurfaceGeometry::square(ports, aperture).map_err(|e| e.to_string())?;
    Ok(CampaignConfig {
        schema_version: SCHEMA_VERSION,
        experiment,
        label: "fas".into(),
        scenario: ScenarioConfig {
            geom_tx: g,
            geom_rx: g,
            n_tx: active,
            n_rx: active,
            path_loss: 1.0,
            strategy: Default::default(),
            snr_db: 30.0,
            kernel: Default::default(),
        },
        baselines: vec![],
        trials: None,
        seed: 0,
        sweep: vec![],
        coupling: Coupling::None,
        output: None,
        rate_threshold: None,
        rank_threshold: mimo_fas::correlation::DEFAULT_RANK_THRESHOLD,
        dmt: DmtParams::default(),
    })
}

fn report_diagnostics(cfg: &CampaignConfig) -> bool {
    let diags = validate_config(cfg);
    for d in &diags {
        eprintln!("error: {d}");
    }
    diags.is_empty()
}

fn print_csv(cfg: &CampaignConfig) -> Result<(), String> {
    if !report_diagnostics(cfg) {
        return Err("invalid parameters".into());
    }
    let out = run_campaign(cfg, RunOptions::default()).map_err(|e| e.to_string())?;
    print!("{}", rows_to_csv(&out.rows).map_err(|e| e.to_string())?);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = load(&config)?;
            if report_diagnostics(&cfg) {
                println!("ok: {} ({} experiment)", config.display(), cfg.experiment);
                Ok(())
            } else {
                Err("config is invalid".into())
            }
        }
        Command::Run { config, overrides } => {
            let mut cfg = load(&config)?;
            if let Some(s) = overrides.seed {
                cfg.seed = s;
            }
            if let Some(t) = overrides.trials {
                cfg.trials = Some(t);
            }
            if !report_diagnostics(&cfg) {
                return Err("config is invalid".into());
            }
            let dir = overrides
                .out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let out = run_campaign(
                &cfg,
                RunOptions {
                    threads: overrides.threads,
                },
            )
            .map_err(|e| e.to_string())?;
            let (csv, json) = write_outputs(&dir, &out).map_err(|e| e.to_string())?;
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(())
        }
        Command::Dmt {
            ports,
            aperture,
            active,
            rank,
        } => {
            let mut cfg = analytic_config(Experiment::Dmt, ports, aperture, active)?;
            cfg.dmt = DmtParams {
                rank_rx: rank,
                rank_tx: rank,
            };
            print_csv(&cfg)
        }
        Command::Table1 {
            ports,
            apertures,
            threshold,
        } => {
            let mut cfg = analytic_config(Experiment::Table1, ports, 1.0, 1)?;
            cfg.sweep = apertures;
            cfg.rank_threshold = threshold;
            print_csv(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
