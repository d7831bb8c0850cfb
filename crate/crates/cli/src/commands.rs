//! Subcommand dispatch and report writing.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use telegraph_core::device::write_distributions_csv;
use telegraph_core::nosignal::{plug_in_mutual_information, verify_no_signaling};
use telegraph_core::protocol::{
    random_bits, required_sample_size, transmit_message, write_hits_csv,
};
use telegraph_core::relativity::paradox_report;
use telegraph_core::{SeedStream, Tolerance};

use crate::config::RunConfig;
use crate::error::CliError;

/// Exit status of `nosignal-check` when the verdict is fail.
pub const EXIT_SIGNALING: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Plan,
    Transmit,
    NosignalCheck,
    Paradox,
    Distributions,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::Plan,
        Command::Transmit,
        Command::NosignalCheck,
        Command::Paradox,
        Command::Distributions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Plan => "plan",
            Command::Transmit => "transmit",
            Command::NosignalCheck => "nosignal-check",
            Command::Paradox => "paradox",
            Command::Distributions => "distributions",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::UnknownCommand(s.to_string()))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    /// `key: value` lines for the terminal.
    pub summary: String,
}

struct Artifacts<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    fn new(dir: &'a Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Artifacts {
            dir,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(
        &mut self,
        name: &str,
        cfg: &RunConfig,
        key: &str,
        payload: &T,
    ) -> Result<(), CliError> {
        let mut doc = serde_json::Map::new();
        doc.insert("config".into(), to_value(cfg)?);
        doc.insert(key.into(), to_value(payload)?);
        let mut text =
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::io(self.dir.join(name), e))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV (or text) body behind the `# key: value` config preamble.
    fn with_preamble(
        &mut self,
        name: &str,
        cfg: &RunConfig,
        body: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let mut buf = cfg.preamble().into_bytes();
        body(&mut buf)?;
        self.write(name, &buf)
    }

    fn finish(self, exit_code: i32, summary: String) -> Outcome {
        Outcome {
            exit_code,
            files: self.files,
            summary,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v)
        .map_err(|e| CliError::Core(telegraph_core::Error::Export(e.to_string())))
}

fn key_values(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}

pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut out = Artifacts::new(&cfg.output_dir)?;
    let device = cfg.device();
    let root = SeedStream::new(cfg.seed);
    match cmd {
        Command::Simulate => {
            let t = transmit_message(
                &[cfg.detectors.bit()],
                &cfg.plan()?,
                cfg.mode,
                &device,
                root.child("simulate"),
            )?;
            let symbol = &t.symbols[0];
            out.with_preamble("hits.csv", cfg, |buf| {
                Ok(write_hits_csv(&symbol.hits, buf)?)
            })?;
            #[derive(Serialize)]
            struct Simulation<'a> {
                hit_count: usize,
                decision: &'a telegraph_core::DecisionResult,
            }
            let sim = Simulation {
                hit_count: symbol.hits.len(),
                decision: &symbol.decision,
            };
            out.json("decision.json", cfg, "simulation", &sim)?;
            let summary = key_values(&[
                ("hits", sim.hit_count.to_string()),
                ("log_lr", symbol.decision.log_lr.to_string()),
                (
                    "decided",
                    to_value(&symbol.decision.decided)?
                        .as_str()
                        .unwrap_or_default()
                        .to_string(),
                ),
                (
                    "fringe_statistic",
                    symbol.decision.fringe_statistic.to_string(),
                ),
            ]);
            Ok(out.finish(0, summary))
        }
        Command::Plan => {
            let plan = required_sample_size(&device, cfg.alpha, root)?;
            out.json("plan.json", cfg, "plan", &plan)?;
            let summary = key_values(&[
                ("alpha", cfg.alpha.to_string()),
                ("M_star", plan.sample_size.to_string()),
                ("trials", plan.trials.to_string()),
            ]);
            Ok(out.finish(0, summary))
        }
        Command::Transmit => {
            let stream = root.child("transmit");
            let bits = random_bits(cfg.symbols, stream);
            let t = transmit_message(&bits, &cfg.plan()?, cfg.mode, &device, stream)?;
            let pairs: Vec<(bool, bool)> = t.symbols.iter().map(|s| (s.sent, s.received)).collect();
            let mi = plug_in_mutual_information(&pairs)?;
            let errors = t.symbols.iter().filter(|s| s.sent != s.received).count();
            #[derive(Serialize)]
            struct Run {
                mutual_information_bits: f64,
                transcript: telegraph_core::protocol::Transcript,
            }
            let run = Run {
                mutual_information_bits: mi,
                transcript: t.transcript(cfg.seed),
            };
            out.json("transcript.json", cfg, "transmission", &run)?;
            let summary = key_values(&[
                ("symbols", t.symbols.len().to_string()),
                ("errors", errors.to_string()),
                ("error_rate", t.error_rate().to_string()),
                ("accuracy", (1.0 - t.error_rate()).to_string()),
                ("mutual_information_bits", mi.to_string()),
                ("mean_symbol_time", t.mean_symbol_time().to_string()),
                (
                    "ideal_symbol_time",
                    cfg.plan()?.ideal_symbol_time().to_string(),
                ),
            ]);
            out.with_preamble("summary.txt", cfg, |buf| {
                buf.extend_from_slice(summary.as_bytes());
                Ok(())
            })?;
            Ok(out.finish(0, summary))
        }
        Command::NosignalCheck => {
            let report = verify_no_signaling(&device, cfg.mode, Tolerance::default())?;
            let text = report.to_text();
            out.with_preamble("nosignal.txt", cfg, |buf| {
                buf.extend_from_slice(text.as_bytes());
                Ok(())
            })?;
            out.json("nosignal.json", cfg, "report", &report)?;
            let code = if report.passed() { 0 } else { EXIT_SIGNALING };
            Ok(out.finish(code, text))
        }
        Command::Paradox => {
            let report =
                paradox_report(cfg.frame_strategy()?, cfg.separation, cfg.automaton_rule())?;
            out.json("paradox.json", cfg, "paradox", &report)?;
            out.with_preamble("paradox_events.csv", cfg, |buf| {
                Ok(report.trace.write_csv(buf)?)
            })?;
            let summary = key_values(&[
                ("loop_advance", report.trace.loop_advance.to_string()),
                ("closed_loop", report.trace.closed_loop.to_string()),
                ("fixed_points", report.fixed_points.len().to_string()),
                ("contradiction", report.contradiction.to_string()),
            ]);
            Ok(out.finish(0, summary))
        }
        Command::Distributions => {
            out.with_preamble("distributions.csv", cfg, |buf| {
                Ok(write_distributions_csv(&device, buf)?)
            })?;
            Ok(out.finish(0, format!("bins: {}\n", cfg.bins)))
        }
    }
}

/// Parses an optional config document, applies flag overrides on top and
/// runs the named command.
pub fn run(
    command: &str,
    document: Option<&str>,
    overrides: &[(&str, &str)],
) -> Result<Outcome, CliError> {
    let cmd: Command = command.parse()?;
    let mut pairs = match document {
        Some(text) => crate::config::parse_document(text)?,
        None => Vec::new(),
    };
    pairs.extend_from_slice(overrides);
    let cfg = RunConfig::from_pairs(pairs)?;
    run_command(cmd, &cfg)
}

/// Writes the outcome to the terminal streams.
pub fn report<W: Write>(outcome: &Outcome, mut out: W) -> std::io::Result<()> {
    out.write_all(outcome.summary.as_bytes())?;
    for f in &outcome.files {
        writeln!(out, "wrote {}", f.display())?;
    }
    Ok(())
}
