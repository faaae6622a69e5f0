//! Run configuration: a flat `key = value` text format whose keys are the
//! command-line flag names without the leading dashes.
//!
//! ```text
//! # reference maser, drive sweep
//! command = sweep
//! gamma-u = 2
//! axis    = epsilon
//! from    = 0.01
//! to      = 1
//! points  = 200
//! log     = true
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explorer::{AxisRange, HeatmapSpec, McSpec, ParamRanges, Scale, SweepSpec};
use crate::params::{EngineParams, Param};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("key `{0}` given more than once")]
    Duplicate(String),

    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Point,
    Sweep,
    Heatmap,
    Montecarlo,
    Verify,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Point,
        Command::Sweep,
        Command::Heatmap,
        Command::Montecarlo,
        Command::Verify,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Point => "point",
            Command::Sweep => "sweep",
            Command::Heatmap => "heatmap",
            Command::Montecarlo => "montecarlo",
            Command::Verify => "verify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Raw engine parameters; validated into [`EngineParams`] by
/// [`RunConfig::params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamValues {
    pub gamma_u: f64,
    pub gamma_l: f64,
    pub n_u: f64,
    pub n_l: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl Default for ParamValues {
    fn default() -> Self {
        let p = EngineParams::reference();
        ParamValues {
            gamma_u: p.gamma_u(),
            gamma_l: p.gamma_l(),
            n_u: p.n_u(),
            n_l: p.n_l(),
            epsilon: p.epsilon(),
            delta: p.delta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub params: ParamValues,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Sweep axis; heatmaps always use ε along `from..to` and Δ along
    /// `delta_from..delta_to`.
    pub axis: Param,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
    pub delta_from: f64,
    pub delta_to: f64,
    pub delta_points: usize,
    pub samples: u64,
    pub bin_width: f64,
    pub hist_from: f64,
    pub hist_to: f64,
    pub min_driving: f64,
    pub with_bound: bool,
    pub oracle_tolerance: f64,
    /// Relative perturbation applied to the closed-form a₁ inside `verify`;
    /// nonzero only for mutation smoke tests.
    pub perturb_a1: f64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let mc = McSpec::default();
        let samples = match command {
            Command::Verify => 200,
            _ => mc.samples,
        };
        RunConfig {
            command,
            params: ParamValues::default(),
            format: Format::Json,
            out: None,
            seed: 0,
            axis: Param::Epsilon,
            from: 0.01,
            to: 1.0,
            points: 200,
            log: true,
            delta_from: 0.0,
            delta_to: 1.0,
            delta_points: 101,
            samples,
            bin_width: mc.bin_width,
            hist_from: mc.hist_lo,
            hist_to: mc.hist_hi,
            min_driving: mc.min_driving,
            with_bound: false,
            oracle_tolerance: 1e-6,
            perturb_a1: 0.0,
        }
    }

    /// Keys accepted by [`RunConfig::set`].
    pub const KEYS: [&'static str; 26] = [
        "command",
        "gamma-u",
        "gamma-l",
        "n-u",
        "n-l",
        "epsilon",
        "delta",
        "format",
        "out",
        "seed",
        "axis",
        "from",
        "to",
        "points",
        "log",
        "delta-from",
        "delta-to",
        "delta-points",
        "samples",
        "bin-width",
        "hist-from",
        "hist-to",
        "min-driving",
        "with-bound",
        "oracle-tolerance",
        "perturb-a1",
    ];

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = |reason: String| ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason,
        };
        let float = || -> Result<f64, ConfigError> {
            let v: f64 = value.parse().map_err(|e| invalid(format!("{e}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid("must be finite".into()))
            }
        };
        let uint = || -> Result<u64, ConfigError> { value.parse().map_err(|e| invalid(format!("{e}"))) };
        let boolean = || -> Result<bool, ConfigError> {
            match value {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(invalid("expected true or false".into())),
            }
        };
        match key {
            "command" => self.command = value.parse().map_err(invalid)?,
            "gamma-u" => self.params.gamma_u = float()?,
            "gamma-l" => self.params.gamma_l = float()?,
            "n-u" => self.params.n_u = float()?,
            "n-l" => self.params.n_l = float()?,
            "epsilon" => self.params.epsilon = float()?,
            "delta" => self.params.delta = float()?,
            "format" => self.format = value.parse().map_err(invalid)?,
            "out" => {
                if value.is_empty() {
                    return Err(invalid("empty path".into()));
                }
                self.out = Some(PathBuf::from(value))
            }
            "seed" => self.seed = uint()?,
            "axis" => self.axis = value.parse().map_err(invalid)?,
            "from" => self.from = float()?,
            "to" => self.to = float()?,
            "points" => self.points = usize::try_from(uint()?).map_err(|e| invalid(e.to_string()))?,
            "log" => self.log = boolean()?,
            "delta-from" => self.delta_from = float()?,
            "delta-to" => self.delta_to = float()?,
            "delta-points" => {
                self.delta_points = usize::try_from(uint()?).map_err(|e| invalid(e.to_string()))?
            }
            "samples" => self.samples = uint()?,
            "bin-width" => self.bin_width = float()?,
            "hist-from" => self.hist_from = float()?,
            "hist-to" => self.hist_to = float()?,
            "min-driving" => self.min_driving = float()?,
            "with-bound" => self.with_bound = boolean()?,
            "oracle-tolerance" => self.oracle_tolerance = float()?,
            "perturb-a1" => self.perturb_a1 = float()?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies parsed `key = value` entries in order.
    pub fn apply(&mut self, entries: &[(String, String)]) -> Result<(), ConfigError> {
        for (k, v) in entries {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<EngineParams, ConfigError> {
        let p = self.params;
        EngineParams::new(p.gamma_u, p.gamma_l, p.n_u, p.n_l, p.epsilon, p.delta)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    fn scale(&self) -> Scale {
        if self.log {
            Scale::Log
        } else {
            Scale::Linear
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let range = AxisRange {
            from: self.from,
            to: self.to,
            points: self.points,
            scale: self.scale(),
        };
        range.validate().map_err(ConfigError::Invalid)?;
        Ok(SweepSpec {
            base: self.params()?,
            axis: self.axis,
            range,
        })
    }

    pub fn heatmap_spec(&self) -> Result<HeatmapSpec, ConfigError> {
        let epsilon = AxisRange {
            from: self.from,
            to: self.to,
            points: self.points,
            scale: self.scale(),
        };
        let delta = AxisRange::linear(self.delta_from, self.delta_to, self.delta_points);
        epsilon.validate().map_err(|e| ConfigError::Invalid(format!("epsilon axis: {e}")))?;
        delta.validate().map_err(|e| ConfigError::Invalid(format!("delta axis: {e}")))?;
        Ok(HeatmapSpec {
            base: self.params()?,
            epsilon,
            delta,
        })
    }

    pub fn mc_spec(&self) -> Result<McSpec, ConfigError> {
        let spec = McSpec {
            ranges: ParamRanges::default(),
            samples: self.samples,
            seed: self.seed,
            bin_width: self.bin_width,
            hist_lo: self.hist_from,
            hist_hi: self.hist_to,
            min_driving: self.min_driving,
            with_bound: self.with_bound,
        };
        spec.validate().map_err(ConfigError::Invalid)?;
        Ok(spec)
    }

    /// Checks everything the configured command will need.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.oracle_tolerance >= 0.0) {
            return Err(ConfigError::Invalid("oracle-tolerance must be >= 0".into()));
        }
        match self.command {
            Command::Point => {
                self.params()?;
                if self.format == Format::Csv {
                    return Err(ConfigError::Invalid("point reports are JSON only".into()));
                }
            }
            Command::Sweep => {
                self.sweep_spec()?;
            }
            Command::Heatmap => {
                self.heatmap_spec()?;
            }
            Command::Montecarlo => {
                self.mc_spec()?;
            }
            Command::Verify => {
                if self.samples == 0 {
                    return Err(ConfigError::Invalid("verify needs at least one sample".into()));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the flat text format; parsing the result reproduces
    /// `self`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("command", self.command.to_string());
        kv("gamma-u", format!("{:?}", p.gamma_u));
        kv("gamma-l", format!("{:?}", p.gamma_l));
        kv("n-u", format!("{:?}", p.n_u));
        kv("n-l", format!("{:?}", p.n_l));
        kv("epsilon", format!("{:?}", p.epsilon));
        kv("delta", format!("{:?}", p.delta));
        kv(
            "format",
            match self.format {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            },
        );
        if let Some(out) = &self.out {
            kv("out", out.display().to_string());
        }
        kv("seed", self.seed.to_string());
        kv("axis", self.axis.to_string());
        kv("from", format!("{:?}", self.from));
        kv("to", format!("{:?}", self.to));
        kv("points", self.points.to_string());
        kv("log", self.log.to_string());
        kv("delta-from", format!("{:?}", self.delta_from));
        kv("delta-to", format!("{:?}", self.delta_to));
        kv("delta-points", self.delta_points.to_string());
        kv("samples", self.samples.to_string());
        kv("bin-width", format!("{:?}", self.bin_width));
        kv("hist-from", format!("{:?}", self.hist_from));
        kv("hist-to", format!("{:?}", self.hist_to));
        kv("min-driving", format!("{:?}", self.min_driving));
        kv("with-bound", self.with_bound.to_string());
        kv("oracle-tolerance", format!("{:?}", self.oracle_tolerance));
        kv("perturb-a1", format!("{:?}", self.perturb_a1));
        s
    }
}

/// Splits config text into `(key, value)` pairs.
///
/// Blank lines and lines starting with `#` are skipped; everything else must
/// be `key = value` with a known key, each key at most once.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                message: "missing key".into(),
            });
        }
        if !RunConfig::KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        if entries.iter().any(|(k, _)| k == key) {
            return Err(ConfigError::Duplicate(key.to_string()));
        }
        entries.push((key.to_string(), value.to_string()));
    }
    Ok(entries)
}

/// Parses a complete config file. `command` defaults to `fallback` when the
/// file does not name one.
pub fn parse_config(text: &str, fallback: Command) -> Result<RunConfig, ConfigError> {
    let entries = parse_config_text(text)?;
    let command = match entries.iter().find(|(k, _)| k == "command") {
        Some((_, v)) => v.parse().map_err(|reason| ConfigError::InvalidValue {
            key: "command".into(),
            value: v.clone(),
            reason,
        })?,
        None => fallback,
    };
    let mut cfg = RunConfig::new(command);
    cfg.apply(&entries)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example() {
        let text = "# comment\ncommand = sweep\n\ngamma-u = 2.5\naxis = delta\nlog = false\nfrom=-1\nto = 1\n";
        let cfg = parse_config(text, Command::Point).unwrap();
        assert_eq!(cfg.command, Command::Sweep);
        assert_eq!(cfg.params.gamma_u, 2.5);
        assert_eq!(cfg.axis, Param::Delta);
        assert!(!cfg.log);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert_eq!(
            parse_config_text("omega = 1"),
            Err(ConfigError::UnknownKey("omega".into()))
        );
        assert_eq!(
            parse_config_text("seed = 1\nseed = 2"),
            Err(ConfigError::Duplicate("seed".into()))
        );
        assert!(matches!(parse_config_text("seed 1"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config_text(" = 1"), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig::new(Command::Point);
        assert!(cfg.set("epsilon", "abc").is_err());
        assert!(cfg.set("epsilon", "inf").is_err());
        assert!(cfg.set("points", "-3").is_err());
        assert!(cfg.set("log", "maybe").is_err());
        assert!(cfg.set("format", "xml").is_err());
        cfg.set("gamma-u", "-1").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::new(Command::Montecarlo);
        cfg.set("epsilon", "0.1234567890123").unwrap();
        cfg.set("out", "/tmp/x.csv").unwrap();
        cfg.set("with-bound", "true").unwrap();
        let again = parse_config(&cfg.to_text(), Command::Point).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn keys_are_all_settable() {
        let cfg = RunConfig::new(Command::Sweep);
        let entries = parse_config_text(&cfg.to_text()).unwrap();
        let mut seen: Vec<&str> = entries.iter().map(|(k, _)| k.as_str()).collect();
        seen.push("out");
        for key in RunConfig::KEYS {
            assert!(seen.contains(&key), "{key}");
        }
    }

    #[test]
    fn command_specific_validation() {
        let mut cfg = RunConfig::new(Command::Point);
        cfg.format = Format::Csv;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(Command::Sweep);
        cfg.from = 0.0;
        assert!(cfg.validate().is_err());
        cfg.log = false;
        assert!(cfg.validate().is_ok());
        let mut cfg = RunConfig::new(Command::Montecarlo);
        cfg.bin_width = 0.0;
        assert!(cfg.validate().is_err());
    }
}
