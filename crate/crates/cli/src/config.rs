//! Run configuration: defaults < preset < config file < command-line flags.

use std::path::{Path, PathBuf};

use cflab_core::{ExpansionMode, MersenneCatalog, SequenceKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 18 terms, 10^4 digits; minutes at most.
    Desk,
    /// 30 terms, 10^5 digits; hours for the full statistics battery.
    Stretch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Khinchin,
    Levy,
    Signs,
    Records,
    Kuzmin,
    Digits,
}

impl Statistic {
    pub fn running() -> Vec<Statistic> {
        vec![
            Statistic::Khinchin,
            Statistic::Levy,
            Statistic::Signs,
            Statistic::Records,
            Statistic::Kuzmin,
        ]
    }
}

/// Every field optional, as read from a file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PartialConfig {
    pub sequence: Option<SequenceKind>,
    pub terms: Option<usize>,
    pub precision: Option<u64>,
    pub mode: Option<ExpansionMode>,
    pub statistics: Option<Vec<Statistic>>,
    pub stride: Option<u64>,
    pub m_max: Option<u64>,
    pub out: Option<PathBuf>,
    pub checkpoint_interval: Option<u64>,
    pub preset: Option<Preset>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext {
            "json" => serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
            "toml" => toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
            _ => Err(CliError::Config(format!(
                "{}: config must end in .toml or .json",
                path.display()
            ))),
        }
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            sequence: over.sequence.or(self.sequence),
            terms: over.terms.or(self.terms),
            precision: over.precision.or(self.precision),
            mode: over.mode.or(self.mode),
            statistics: over.statistics.or(self.statistics),
            stride: over.stride.or(self.stride),
            m_max: over.m_max.or(self.m_max),
            out: over.out.or(self.out),
            checkpoint_interval: over.checkpoint_interval.or(self.checkpoint_interval),
            preset: over.preset.or(self.preset),
        }
    }

    fn preset_values(preset: Preset) -> PartialConfig {
        let (terms, precision) = match preset {
            Preset::Desk => (18, 10_000),
            Preset::Stretch => (30, 100_000),
        };
        PartialConfig {
            terms: Some(terms),
            precision: Some(precision),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub sequence: SequenceKind,
    pub terms: usize,
    pub precision: u64,
    pub mode: ExpansionMode,
    pub statistics: Vec<Statistic>,
    pub stride: u64,
    pub m_max: u64,
    pub out: PathBuf,
    pub checkpoint_interval: u64,
    pub preset: Option<Preset>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sequence: SequenceKind::Mersenne,
            terms: 12,
            precision: 60,
            mode: ExpansionMode::Certified,
            statistics: Statistic::running(),
            stride: 1000,
            m_max: 20,
            out: PathBuf::from("cflab-out"),
            checkpoint_interval: 10_000,
            preset: None,
        }
    }
}

impl RunConfig {
    /// `file` then `cli` on top of the defaults and any preset named in
    /// either.
    pub fn resolve(file: PartialConfig, cli: PartialConfig) -> RunConfig {
        let merged = file.overlay(cli);
        let base = match merged.preset {
            Some(p) => PartialConfig::preset_values(p).overlay(merged),
            None => merged,
        };
        let d = RunConfig::default();
        RunConfig {
            sequence: base.sequence.unwrap_or(d.sequence),
            terms: base.terms.unwrap_or(d.terms),
            precision: base.precision.unwrap_or(d.precision),
            mode: base.mode.unwrap_or(d.mode),
            statistics: base.statistics.unwrap_or(d.statistics),
            stride: base.stride.unwrap_or(d.stride),
            m_max: base.m_max.unwrap_or(d.m_max),
            out: base.out.unwrap_or(d.out),
            checkpoint_interval: base.checkpoint_interval.unwrap_or(d.checkpoint_interval),
            preset: base.preset,
        }
    }

    pub fn validate(&self, catalog: &MersenneCatalog) -> Result<(), CliError> {
        if self.precision < 1 {
            return Err(CliError::Config("precision must be at least 1".into()));
        }
        if self.stride < 1 {
            return Err(CliError::Config("stride must be at least 1".into()));
        }
        if self.terms < 1 {
            return Err(CliError::Config("terms must be at least 1".into()));
        }
        if self.m_max < 1 {
            return Err(CliError::Config("m-max must be at least 1".into()));
        }
        if self.checkpoint_interval < 1 {
            return Err(CliError::Config("checkpoint interval must be at least 1".into()));
        }
        let limit = match &self.sequence {
            SequenceKind::Mersenne | SequenceKind::Dyadic => Some(catalog.len()),
            SequenceKind::Custom(t) => Some(t.len()),
            _ => None,
        };
        if let Some(limit) = limit {
            if self.terms > limit {
                return Err(CliError::Config(format!(
                    "{} terms requested but the {} sequence has {limit}",
                    self.terms, self.sequence
                )));
            }
        }
        Ok(())
    }

    /// Short name used as the file prefix, e.g. `mersenne12`.
    pub fn constant_name(&self) -> String {
        format!("{}{}", self.sequence.name(), self.terms)
    }
}
