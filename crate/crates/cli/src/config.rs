//! Run configuration: defaults, then the `--config` file, then flags.
//!
//! The config file is flat `key = value` text; `#` starts a comment. Keys
//! are the long flag names with `-` or `_`:
//!
//! ```text
//! format = json
//! seed = 7
//! slice_width = 30
//! significance = 0.01
//! math = true
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dyad::tsa::Significance;
use sha2::{Digest, Sha256};

use crate::{GlobalArgs, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub format: Format,
    pub out: PathBuf,
    /// Worker threads; 0 uses one per core.
    pub jobs: usize,
    pub seed: u64,
    pub slice_width: f64,
    pub significance: Significance,
    pub lag_order: usize,
    pub granger_lags: usize,
    pub diff_lag: usize,
    pub no_trend: bool,
    pub open_end: bool,
    pub math: bool,
    pub lexicon_dir: Option<PathBuf>,
    pub window: usize,
    pub stop_unit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            out: PathBuf::from("out"),
            jobs: 0,
            seed: 0,
            slice_width: dyad::corpus::SLICE_WIDTH,
            significance: Significance::One,
            lag_order: 3,
            granger_lags: 3,
            diff_lag: 0,
            no_trend: false,
            open_end: true,
            math: false,
            lexicon_dir: None,
            window: dyad::conceptnet::WINDOW_WORDS,
            stop_unit: dyad::conceptnet::STOP_UNIT_SENTENCES,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, UsageError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| UsageError(format!("config `{key}`: invalid value `{value}`: {e}")))
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        match key.replace('-', "_").as_str() {
            "format" => self.format = parse_value(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "jobs" => self.jobs = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "slice_width" => self.slice_width = parse_value(key, value)?,
            "significance" => self.significance = parse_value(key, value)?,
            "lag_order" => self.lag_order = parse_value(key, value)?,
            "lags" => self.granger_lags = parse_value(key, value)?,
            "diff_lag" => self.diff_lag = parse_value(key, value)?,
            "no_trend" => self.no_trend = parse_value(key, value)?,
            "closed_end" => self.open_end = !parse_value::<bool>(key, value)?,
            "math" => self.math = parse_value(key, value)?,
            "lexicon_dir" => self.lexicon_dir = Some(PathBuf::from(value)),
            "window" => self.window = parse_value(key, value)?,
            "stop_unit" => self.stop_unit = parse_value(key, value)?,
            _ => return Err(UsageError(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), UsageError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                UsageError(format!("config line {}: expected `key = value`", idx + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn resolve(args: &GlobalArgs) -> Result<Self, UsageError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| UsageError(format!("config file {}: {e}", path.display())))?;
            cfg.apply_file(&text)?;
        }
        if let Some(v) = args.format {
            cfg.format = v;
        }
        if let Some(v) = &args.out {
            cfg.out = v.clone();
        }
        if let Some(v) = args.jobs {
            cfg.jobs = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = args.slice_width {
            cfg.slice_width = v;
        }
        if let Some(v) = args.significance {
            cfg.significance = Significance::try_from(v).map_err(|e| UsageError(e.to_string()))?;
        }
        if let Some(v) = args.lag_order {
            cfg.lag_order = v;
        }
        if let Some(v) = args.lags {
            cfg.granger_lags = v;
        }
        if let Some(v) = args.diff_lag {
            cfg.diff_lag = v;
        }
        if let Some(v) = &args.lexicon_dir {
            cfg.lexicon_dir = Some(v.clone());
        }
        if let Some(v) = args.window {
            cfg.window = v;
        }
        if let Some(v) = args.stop_unit {
            cfg.stop_unit = v;
        }
        cfg.no_trend |= args.no_trend;
        cfg.math |= args.math;
        if args.closed_end {
            cfg.open_end = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        if !(self.slice_width > 0.0 && self.slice_width.is_finite()) {
            return Err(UsageError(format!(
                "slice width must be positive, got {}",
                self.slice_width
            )));
        }
        if self.lag_order == 0 || self.granger_lags == 0 {
            return Err(UsageError("lag orders must be at least 1".into()));
        }
        if self.window == 0 || self.stop_unit == 0 {
            return Err(UsageError("window and stop unit must be at least 1".into()));
        }
        if let Some(dir) = &self.lexicon_dir {
            if !dir.is_dir() {
                return Err(UsageError(format!(
                    "lexicon directory {} does not exist",
                    dir.display()
                )));
            }
        }
        Ok(())
    }

    /// Settings that influence results, one `key=value` per line in key
    /// order. Output location and thread count are excluded.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let lexicon = self
            .lexicon_dir
            .as_deref()
            .map(Path::display)
            .map(|d| d.to_string());
        let _ = writeln!(s, "closed_end={}", !self.open_end);
        let _ = writeln!(s, "diff_lag={}", self.diff_lag);
        let _ = writeln!(s, "format={}", self.format.extension());
        let _ = writeln!(s, "lag_order={}", self.lag_order);
        let _ = writeln!(s, "lags={}", self.granger_lags);
        let _ = writeln!(s, "lexicon_dir={}", lexicon.unwrap_or_default());
        let _ = writeln!(s, "math={}", self.math);
        let _ = writeln!(s, "no_trend={}", self.no_trend);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "significance={}", self.significance);
        let _ = writeln!(s, "slice_width={}", self.slice_width);
        let _ = writeln!(s, "stop_unit={}", self.stop_unit);
        let _ = writeln!(s, "window={}", self.window);
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn adf_spec(&self) -> dyad::AdfSpec {
        dyad::AdfSpec {
            lag_order: self.lag_order,
            include_drift: true,
            include_trend: !self.no_trend,
            significance: self.significance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("# comment\nformat = json\nslice-width = 15\nclosed_end = true\n")
            .unwrap();
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.slice_width, 15.0);
        assert!(!cfg.open_end);
        assert!(cfg.apply_file("bogus = 1").is_err());
        assert!(cfg.apply_file("significance = 0.02").is_err());
        assert!(cfg.apply_file("no equals sign").is_err());
    }

    #[test]
    fn hash_ignores_destination() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: "elsewhere".into(),
            jobs: 8,
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(
            a.hash(),
            RunConfig {
                seed: 1,
                ..RunConfig::default()
            }
            .hash()
        );
    }
}
