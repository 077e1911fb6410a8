//! Run configuration, read from TOML and echoed into every artifact.
//!
//! ```toml
//! [operator]
//! N = 1
//! s = 0.5
//! m = 1.0
//!
//! [grid]
//! L = 40.0
//! n = 256
//!
//! [nonlinearity]
//! kind = "model"
//! c = 2.0
//!
//! [solver]
//! max_iter = 500
//! seed = 1
//!
//! [output]
//! dir = "out"
//! formats = ["json", "csv", "frlf"]
//! ```
//!
//! Every block and key is optional; missing ones take the defaults above
//! (solver defaults are those of [`SolverOptions`]).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::spectral_core::{Grid, OperatorParams};
use crate::symmetry_tools::FixedPointOptions;
use crate::variational::{Nonlinearity, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorBlock {
    #[serde(rename = "N", alias = "dim")]
    pub dim: usize,
    pub s: f64,
    pub m: f64,
}

impl Default for OperatorBlock {
    fn default() -> Self {
        OperatorBlock { dim: 1, s: 0.5, m: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    #[serde(rename = "L", alias = "length")]
    pub length: f64,
    pub n: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock { length: 40.0, n: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Frlf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: PathBuf::from("out"),
            formats: vec![OutputFormat::Json, OutputFormat::Csv, OutputFormat::Frlf],
        }
    }
}

impl OutputBlock {
    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorBlock,
    pub grid: GridBlock,
    pub nonlinearity: Nonlinearity,
    pub solver: SolverOptions,
    pub fixpoint: FixedPointOptions,
    pub output: OutputBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            operator: OperatorBlock::default(),
            grid: GridBlock::default(),
            nonlinearity: Nonlinearity::Model { c: 2.0 },
            solver: SolverOptions::default(),
            fixpoint: FixedPointOptions::default(),
            output: OutputBlock::default(),
        }
    }
}

fn keyed(key: &str, e: FracError) -> FracError {
    match e {
        FracError::Config(msg) | FracError::Domain(msg) => FracError::config(format!("{key}: {msg}")),
        other => other,
    }
}

impl RunConfig {
    /// Parses and validates; errors name the offending key.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let rendered = e.to_string();
            FracError::config(rendered.split_whitespace().collect::<Vec<_>>().join(" "))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FracError::Format(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let op = &self.operator;
        if !(1..=3).contains(&op.dim) {
            return Err(FracError::config(format!("operator.N must be 1, 2 or 3, got {}", op.dim)));
        }
        if !(op.s > 0.0 && op.s < 1.0) {
            return Err(FracError::config(format!("operator.s must lie in (0,1), got {}", op.s)));
        }
        if !(op.m.is_finite() && op.m > 0.0) {
            return Err(FracError::config(format!("operator.m must be positive, got {}", op.m)));
        }
        if !(self.grid.length.is_finite() && self.grid.length > 0.0) {
            return Err(FracError::config(format!("grid.L must be positive, got {}", self.grid.length)));
        }
        if self.grid.n < 2 || !self.grid.n.is_power_of_two() {
            return Err(FracError::config(format!("grid.n must be a power of two ≥ 2, got {}", self.grid.n)));
        }
        self.nonlinearity.validate().map_err(|e| keyed("nonlinearity", e))?;
        self.solver.validate()?;
        self.fixpoint.validate()?;
        if self.output.formats.is_empty() {
            return Err(FracError::config("output.formats must list at least one format"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<OperatorParams> {
        OperatorParams::new(self.operator.dim, self.operator.s, self.operator.m).map_err(|e| keyed("operator", e))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.operator.dim, self.grid.n, self.grid.length).map_err(|e| keyed("grid", e))
    }
}
