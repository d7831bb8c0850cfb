//! Flat `key: value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use telegraph_core::protocol::DetectorConfig;
use telegraph_core::relativity::AutomatonRule;
use telegraph_core::{DeviceConfig, FrameStrategy, FrameVelocity, ModelMode, TransmissionPlan};

use crate::error::CliError;

/// Every key the parser accepts, in the order reports list them.
pub const KEYS: &[&str] = &[
    "seed",
    "kappa",
    "w",
    "x_max",
    "B",
    "relative_phase",
    "M",
    "T",
    "N",
    "mode",
    "alpha",
    "symbols",
    "detectors",
    "strategy",
    "v",
    "beta0",
    "X",
    "rule",
    "output_dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    StateDependent,
    Privileged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Negation,
    Identity,
}

/// Fully resolved run configuration.
///
/// The output directory is where reports go, not part of what they
/// describe, so it is left out of the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub kappa: f64,
    pub w: f64,
    pub x_max: f64,
    #[serde(rename = "B")]
    pub bins: usize,
    pub relative_phase: f64,
    #[serde(rename = "M")]
    pub pairs_per_symbol: usize,
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "N")]
    pub telegraphs: usize,
    pub mode: ModelMode,
    pub alpha: f64,
    /// Message length for `transmit`.
    pub symbols: usize,
    /// Detector setting for `simulate`.
    pub detectors: DetectorConfig,
    pub strategy: StrategyKind,
    pub v: f64,
    pub beta0: f64,
    #[serde(rename = "X")]
    pub separation: f64,
    pub rule: RuleKind,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = DeviceConfig::default();
        RunConfig {
            seed: 0,
            kappa: d.kappa,
            w: d.envelope_width,
            x_max: d.x_max,
            bins: d.bins,
            relative_phase: d.relative_phase,
            pairs_per_symbol: 1000,
            period: 1.0,
            telegraphs: 1,
            mode: ModelMode::UnitaryQM,
            alpha: 0.01,
            symbols: 1000,
            detectors: DetectorConfig::Off,
            strategy: StrategyKind::StateDependent,
            v: 0.5,
            beta0: 0.0,
            separation: 1.0,
            rule: RuleKind::Negation,
            output_dir: PathBuf::from("telegraph-out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

impl RunConfig {
    /// Applies one `key: value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        const REAL: &str = "a real number";
        const COUNT: &str = "a non-negative integer";
        match key {
            "seed" => self.seed = parse(key, value, "an unsigned 64-bit integer")?,
            "kappa" => self.kappa = parse(key, value, REAL)?,
            "w" => self.w = parse(key, value, REAL)?,
            "x_max" => self.x_max = parse(key, value, REAL)?,
            "B" => self.bins = parse(key, value, COUNT)?,
            "relative_phase" => self.relative_phase = parse(key, value, REAL)?,
            "M" => self.pairs_per_symbol = parse(key, value, COUNT)?,
            "T" => self.period = parse(key, value, REAL)?,
            "N" => self.telegraphs = parse(key, value, COUNT)?,
            "mode" => self.mode = parse(key, value, "NaiveCollapse or UnitaryQM")?,
            "alpha" => self.alpha = parse(key, value, REAL)?,
            "symbols" => self.symbols = parse(key, value, COUNT)?,
            "detectors" => {
                self.detectors = match value {
                    "on" => DetectorConfig::On,
                    "off" => DetectorConfig::Off,
                    _ => return Err(invalid(key, value, "on or off")),
                }
            }
            "strategy" => {
                self.strategy = match value {
                    "state_dependent" => StrategyKind::StateDependent,
                    "privileged" => StrategyKind::Privileged,
                    _ => return Err(invalid(key, value, "state_dependent or privileged")),
                }
            }
            "v" => self.v = parse(key, value, REAL)?,
            "beta0" => self.beta0 = parse(key, value, REAL)?,
            "X" => self.separation = parse(key, value, REAL)?,
            "rule" => {
                self.rule = match value {
                    "negation" => RuleKind::Negation,
                    "identity" => RuleKind::Identity,
                    _ => return Err(invalid(key, value, "negation or identity")),
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(CliError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies settings in order, then validates the result.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.device().validate()?;
        self.plan()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Constraint {
                field: "alpha",
                constraint: "0 < alpha < 1",
            });
        }
        if self.symbols == 0 {
            return Err(CliError::Constraint {
                field: "symbols",
                constraint: "symbols >= 1",
            });
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(CliError::Constraint {
                field: "X",
                constraint: "X > 0",
            });
        }
        for (field, constraint, beta) in [
            ("v", "|v| < 1", self.v),
            ("beta0", "|beta0| < 1", self.beta0),
        ] {
            if FrameVelocity::new(beta).is_err() {
                return Err(CliError::Constraint { field, constraint });
            }
        }
        Ok(())
    }

    pub fn device(&self) -> DeviceConfig {
        DeviceConfig {
            kappa: self.kappa,
            envelope_width: self.w,
            x_max: self.x_max,
            bins: self.bins,
            relative_phase: self.relative_phase,
        }
    }

    pub fn plan(&self) -> Result<TransmissionPlan, CliError> {
        Ok(TransmissionPlan::new(
            self.pairs_per_symbol,
            self.period,
            self.telegraphs,
        )?)
    }

    pub fn frame_strategy(&self) -> Result<FrameStrategy, CliError> {
        Ok(match self.strategy {
            StrategyKind::StateDependent => FrameStrategy::StateDependent {
                v: FrameVelocity::new(self.v)?,
            },
            StrategyKind::Privileged => FrameStrategy::Privileged {
                beta0: FrameVelocity::new(self.beta0)?,
            },
        })
    }

    pub fn automaton_rule(&self) -> AutomatonRule {
        match self.rule {
            RuleKind::Negation => AutomatonRule::NEGATION,
            RuleKind::Identity => AutomatonRule::IDENTITY,
        }
    }

    /// `(key, value)` pairs of everything that shapes the results.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let json = serde_json::to_value(self).expect("config serializes");
        KEYS.iter()
            .filter_map(|&k| {
                json.get(k).map(|v| {
                    let text = match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    (k, text)
                })
            })
            .collect()
    }

    /// The resolved config as `# key: value` comment lines.
    pub fn preamble(&self) -> String {
        self.resolved()
            .iter()
            .map(|(k, v)| format!("# {k}: {v}\n"))
            .collect()
    }
}

fn invalid(key: &str, value: &str, expected: &'static str) -> CliError {
    CliError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.resolved() {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

/// Splits a document into `(key, value)` pairs. Blank lines and lines
/// starting with `#` are skipped; a key may appear only once.
pub fn parse_document(text: &str) -> Result<Vec<(&str, &str)>, CliError> {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| CliError::Malformed {
            line: n + 1,
            text: raw.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Malformed {
                line: n + 1,
                text: raw.to_string(),
            });
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(CliError::DuplicateKey(key.to_string()));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    RunConfig::from_pairs(parse_document(text)?)
}
