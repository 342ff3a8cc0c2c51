use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use noma_isac::checks::CheckSettings;
use noma_isac::{Mode, ResourceSplit, SystemConfig};
use noma_isac_cli::{
    cmd_ecr, cmd_outage, cmd_region, cmd_selftest, cmd_sensing, load_config, CliError,
    CommandOutput, Format, SweepSpec,
};

/// Closed-form and simulated performance of two-user NOMA with integrated
/// sensing and communication (ISAC) versus frequency-division (FDSAC).
#[derive(Parser)]
#[command(name = "noma-isac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability vs SNR.
    Outage(SweepArgs),
    /// Ergodic communication rate vs SNR.
    Ecr(SweepArgs),
    /// Sensing rate vs SNR for ISAC and FDSAC.
    Sensing(SweepArgs),
    /// Sensing/communication rate region at one SNR.
    Region(RegionArgs),
    /// Run the validation battery at reduced trial counts.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Configuration file (key = value lines); defaults if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db_min: f64,
    #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
    snr_db_max: f64,
    #[arg(long, default_value_t = 5.0)]
    snr_db_step: f64,
    /// Monte Carlo trials per point (0 = closed forms only).
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 2023)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Isac)]
    mode: ModeArg,
    /// FDSAC communication bandwidth fraction.
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    /// FDSAC communication power fraction.
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    p_db: f64,
    #[arg(long, default_value_t = 101)]
    grid_n: usize,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = CheckSettings::reduced().trials)]
    trials: u64,
    #[arg(long, default_value_t = CheckSettings::reduced().seed)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Isac,
    Fdsac,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn config(path: &Option<PathBuf>) -> Result<SystemConfig, CliError> {
    match path {
        Some(p) => load_config(p),
        None => Ok(SystemConfig::default()),
    }
}

impl SweepArgs {
    fn split(&self) -> Result<ResourceSplit, CliError> {
        Ok(ResourceSplit::new(self.kappa, self.mu)?)
    }

    fn spec(&self) -> Result<SweepSpec, CliError> {
        let mode = match self.mode {
            ModeArg::Isac => Mode::Isac,
            ModeArg::Fdsac => Mode::Fdsac(self.split()?),
        };
        Ok(SweepSpec {
            snr_db_min: self.snr_db_min,
            snr_db_max: self.snr_db_max,
            snr_db_step: self.snr_db_step,
            trials: self.trials,
            seed: self.seed,
            mode,
        })
    }
}

fn emit(text: &str, path: &Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(out: CommandOutput, args: &OutputArgs) -> Result<(), CliError> {
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    emit(&out.table.render(args.format.into()), &args.output)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Outage(a) => {
            let out = cmd_outage(&config(&a.out.config)?, &a.spec()?)?;
            finish(out, &a.out)?;
        }
        Command::Ecr(a) => {
            let out = cmd_ecr(&config(&a.out.config)?, &a.spec()?)?;
            finish(out, &a.out)?;
        }
        Command::Sensing(a) => {
            let out = cmd_sensing(&config(&a.out.config)?, &a.spec()?, a.split()?)?;
            finish(out, &a.out)?;
        }
        Command::Region(a) => {
            let out = cmd_region(&config(&a.out.config)?, a.p_db, a.grid_n)?;
            finish(out, &a.out)?;
        }
        Command::Selftest(a) => {
            let cfg = config(&a.config)?;
            let report = cmd_selftest(
                &cfg,
                CheckSettings {
                    trials: a.trials.max(1),
                    seed: a.seed,
                },
            );
            emit(&report.render(), &a.output)?;
            if !report.all_passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
