//! `wgscatter`: spectra, 2D sweeps, cutoff maps and condition reports for a
//! V-type emitter in a rectangular waveguide.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};

use commands::{Outcome, Overrides};
use config::{Config, Format};
use output::{sibling, write_file};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] wgscatter::Error),
    #[error("oracle check failed: {0}")]
    Oracle(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use wgscatter::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Oracle(_) | CliError::Domain(E::OracleFailure(_)) => 4,
            CliError::Domain(E::InvalidParameter(_) | E::InvalidModeIndex { .. } | E::NotNormalized(_)) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wgscatter", version, about = "Single-photon scattering off a V-type emitter in a rectangular waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, `-` for stdout; overrides [output].path. Without either, the table goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size override (energy points, map points, mode count or oracle points).
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Keep the red Lamb shift of closed modes.
    #[arg(long, global = true)]
    red_shift: bool,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Mode catalogue with cutoffs and window edges.
    Modes,
    /// Reflectance and transmittance against input energy.
    Spectrum,
    /// Reflectance over input energy and omega1 or lambda2, with EIT/Fano loci.
    Sweep2d,
    /// Cutoffs against guide width, plus critical sizes.
    CutoffMap,
    /// EIT and Fano roots, regime and residual checks.
    Conditions,
    /// Analytic self-energy against the quadrature oracle.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Spectrum => "spectrum",
            Command::Sweep2d => "sweep2d",
            Command::CutoffMap => "cutoff-map",
            Command::Conditions => "conditions",
            Command::Verify => "verify",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = Config::load(path)?;
    let ov = Overrides { points: cli.points, red_shift: cli.red_shift };
    let outcome = match cli.command {
        Command::Modes => commands::modes(&cfg, &ov)?,
        Command::Spectrum => commands::spectrum(&cfg, &ov)?,
        Command::Sweep2d => commands::sweep2d(&cfg, &ov)?,
        Command::CutoffMap => commands::cutoff_map(&cfg, &ov)?,
        Command::Conditions => commands::conditions(&cfg, &ov)?,
        Command::Verify => commands::verify(&cfg, &ov)?,
    };
    let format = cli.format.unwrap_or(cfg.output.format);
    // `--out -` forces stdout even when the config names a file.
    let out = match &cli.out {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) => Some(p.clone()),
        None => cfg.output.path.as_ref().map(PathBuf::from),
    };
    emit(cli.command, &outcome, out.as_deref(), format)?;
    match outcome.oracle_failure {
        Some(msg) => Err(CliError::Oracle(msg)),
        None => Ok(()),
    }
}

fn emit(command: Command, outcome: &Outcome, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let body = match (&outcome.json_mirror, format) {
        (Some(json), Format::Json) => json.clone(),
        _ => outcome.table.render(format),
    };
    if let Some(text) = &outcome.text {
        print!("{text}");
    }
    let Some(path) = out else {
        if outcome.text.is_none() {
            print!("{body}");
        }
        if !outcome.extra_tables.is_empty() || outcome.json_mirror.is_some() {
            info!("{}: companion files need --out and were not written", command.name());
        }
        return Ok(());
    };
    write_file(path, &body)?;
    info!("wrote {}", path.display());
    for (suffix, table) in &outcome.extra_tables {
        let ext = if format == Format::Json { "json" } else { "csv" };
        let p = sibling(path, suffix, ext);
        write_file(&p, &table.render(format))?;
        info!("wrote {}", p.display());
    }
    if let (Some(json), Format::Csv) = (&outcome.json_mirror, format) {
        let p = sibling(path, "", "json");
        write_file(&p, json)?;
        info!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            error!("{} failed: {err}", cli.command.name());
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
