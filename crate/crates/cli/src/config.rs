//! Run configuration: a TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Example1,
    Example2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mortar {
    Dgq1,
    Dgq2,
    Matched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Multiscale,
    Fine,
    Both,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmresSection {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresSection {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub oracle: bool,
    pub spectral: bool,
    pub check_assumptions: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Times at which VTK snapshots are written; empty for none.
    pub vtk_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub case: Case,
    pub levels: Vec<u32>,
    pub mortar: Mortar,
    pub mode: Mode,
    pub out: PathBuf,
    pub gmres: GmresSection,
    pub diagnostics: DiagnosticsSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: Case::Example1,
            levels: vec![0, 1, 2],
            mortar: Mortar::Dgq1,
            mode: Mode::Both,
            out: PathBuf::from("results"),
            gmres: GmresSection::default(),
            diagnostics: DiagnosticsSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Deepest refinement level of the checkerboard study.
pub const MAX_LEVEL: u32 = 4;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.case == Case::Example1 {
            if self.levels.is_empty() {
                bail!("levels: empty level list");
            }
            if let Some(l) = self.levels.iter().find(|&&l| l > MAX_LEVEL) {
                bail!("levels: level {l} exceeds {MAX_LEVEL}");
            }
            if self.levels.windows(2).any(|w| w[0] >= w[1]) {
                bail!("levels: must be strictly increasing");
            }
        }
        if !(self.gmres.tol > 0.0 && self.gmres.tol < 1.0) {
            bail!("gmres.tol: must lie in (0, 1), got {}", self.gmres.tol);
        }
        if self.gmres.max_iter == 0 {
            bail!("gmres.max_iter: must be positive");
        }
        if let Some(t) = self
            .output
            .vtk_times
            .iter()
            .find(|t| !(0.0..=0.5).contains(*t))
        {
            bail!("output.vtk_times: {t} lies outside [0, 0.5]");
        }
        Ok(())
    }
}

/// A level list given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels(pub Vec<u32>);

/// Parses `a..b` (inclusive) or a comma-separated list.
pub fn parse_levels(s: &str) -> Result<Levels, String> {
    parse_level_list(s).map(Levels)
}

fn parse_level_list(s: &str) -> Result<Vec<u32>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad level range start in '{s}'"))?;
        let b: u32 = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| format!("bad level range end in '{s}'"))?;
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad level '{p}'")))
        .collect()
}
