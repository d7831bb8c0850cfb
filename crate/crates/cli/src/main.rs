use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use telegraph_cli::commands::report;

/// Entangled-pair telegraph simulator.
///
/// Settings come from an optional `key: value` config file; any flag given
/// on the command line overrides the file.
#[derive(Debug, Parser)]
#[command(name = "telegraph", version, allow_negative_numbers = true)]
struct Args {
    /// simulate, plan, transmit, nosignal-check, paradox or distributions
    command: String,

    /// Config file of `key: value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long = "x_max")]
    x_max: Option<String>,
    #[arg(long = "B")]
    bins: Option<String>,
    #[arg(long = "relative_phase")]
    relative_phase: Option<String>,
    #[arg(long = "M")]
    pairs_per_symbol: Option<String>,
    #[arg(long = "T")]
    period: Option<String>,
    #[arg(long = "N")]
    telegraphs: Option<String>,
    /// NaiveCollapse or UnitaryQM
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Message length for transmit.
    #[arg(long)]
    symbols: Option<String>,
    /// on or off, for simulate.
    #[arg(long)]
    detectors: Option<String>,
    /// state_dependent or privileged
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    v: Option<String>,
    #[arg(long)]
    beta0: Option<String>,
    #[arg(long = "X")]
    separation: Option<String>,
    /// negation or identity
    #[arg(long)]
    rule: Option<String>,
    #[arg(long = "output_dir")]
    output_dir: Option<String>,
}

impl Args {
    fn overrides(&self) -> Vec<(&str, &str)> {
        [
            ("seed", &self.seed),
            ("kappa", &self.kappa),
            ("w", &self.w),
            ("x_max", &self.x_max),
            ("B", &self.bins),
            ("relative_phase", &self.relative_phase),
            ("M", &self.pairs_per_symbol),
            ("T", &self.period),
            ("N", &self.telegraphs),
            ("mode", &self.mode),
            ("alpha", &self.alpha),
            ("symbols", &self.symbols),
            ("detectors", &self.detectors),
            ("strategy", &self.strategy),
            ("v", &self.v),
            ("beta0", &self.beta0),
            ("X", &self.separation),
            ("rule", &self.rule),
            ("output_dir", &self.output_dir),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let document = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => Some(text),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        },
        None => None,
    };
    match telegraph_cli::run(&args.command, document.as_deref(), &args.overrides()) {
        Ok(outcome) => {
            if let Err(e) = report(&outcome, std::io::stdout().lock()) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
