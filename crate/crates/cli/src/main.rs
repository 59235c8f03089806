use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use starnet_cli::config::NumberList;
use starnet_cli::{emit, reproduce, run_sweep, CliError, CliResult, OutputFormat, Scenario, Settings, SweepConfig};

/// Rate and fidelity sweeps for heralded W and Dicke state distribution
/// over a lossy star network.
#[derive(Debug, Parser)]
#[command(name = "starnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// Number of parties.
    #[arg(long)]
    n: Option<usize>,
    /// Heralding photon number.
    #[arg(long)]
    m: Option<usize>,
    /// Source amplitudes, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    b: Option<Vec<f64>>,
    /// Target fidelities, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    fidelity: Option<Vec<f64>>,
    /// Squeezing in dB, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    squeezing_db: Option<Vec<f64>>,
    #[arg(long)]
    dmin_km: Option<f64>,
    #[arg(long)]
    dmax_km: Option<f64>,
    #[arg(long)]
    step_km: Option<f64>,
    #[arg(long)]
    gamma_db_per_km: Option<f64>,
    /// Dark-count probability per gate.
    #[arg(long)]
    dark_count: Option<f64>,
    #[arg(long)]
    det_efficiency: Option<f64>,
    /// Per-source Fock cutoff for the truncated reference engine.
    #[arg(long)]
    cutoff: Option<u32>,
    /// JSON file of settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, value_enum, global = true)]
    format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the data behind one figure.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(starnet_cli::presets::PRESETS))]
        figure: String,
    },
}

impl Cli {
    fn flag_settings(&self) -> Settings {
        let list = |v: &Option<Vec<f64>>| v.clone().map(NumberList::Many);
        Settings {
            scenario: self.scenario,
            n: self.n,
            m: self.m,
            b: list(&self.b),
            fidelity: list(&self.fidelity),
            squeezing_db: list(&self.squeezing_db),
            dmin_km: self.dmin_km,
            dmax_km: self.dmax_km,
            step_km: self.step_km,
            gamma_db_per_km: self.gamma_db_per_km,
            dark_count: self.dark_count,
            det_efficiency: self.det_efficiency,
            cutoff: self.cutoff,
            format: self.format,
            out: self.out.clone(),
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let flags = cli.flag_settings();
    if let Some(Command::Reproduce { figure }) = &cli.command {
        let output_only = Settings { format: flags.format, out: flags.out.clone(), ..Default::default() };
        if flags != output_only || cli.config.is_some() {
            return Err(CliError::usage("reproduce accepts only --format and --out"));
        }
        let data = reproduce(figure)?;
        return emit(&data, flags.format.unwrap_or_default(), flags.out.as_deref());
    }
    let settings = match &cli.config {
        Some(path) => flags.over(Settings::from_file(path)?),
        None => flags,
    };
    let format = settings.format.unwrap_or_default();
    let out = settings.out.clone();
    let config = SweepConfig::from_settings(settings)?;
    log::info!("running {} sweep over {} distances", config.scenario.name(), config.grid.points().len());
    let data = run_sweep(&config)?;
    emit(&data, format, out.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
