//! Scenario configuration: weights, cover names and pipeline settings.

use std::path::Path;

use landdiv::bandwidth::log_grid;
use landdiv::compositions::DEFAULT_ZERO_TOL;
use landdiv::kde::{DensityPath, DEFAULT_ETA};
use landdiv::mixture::{DEFAULT_MIN_COUNT, DEFAULT_PROBES, DEFAULT_SAFETY};
use landdiv::WeightVector;
use serde::{Deserialize, Serialize};

use crate::dataset::DEFAULT_SUM_TOL;
use crate::error::{io_err, CliError, CliResult};

pub const COVERS: [&str; 4] = ["semi-natural", "cropland", "groves", "urban"];
pub const URBAN_INDEX: usize = 3;

/// Appropriation percentages per cover for the built-in years.
pub const WEIGHTS_1956: [f64; 4] = [51.042, 78.880, 89.993, 95.730];
pub const WEIGHTS_1973: [f64; 4] = [43.958, 76.200, 85.322, 94.792];
pub const WEIGHTS_2000: [f64; 4] = [48.542, 74.978, 81.837, 93.958];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sizes {
    pub population: usize,
    pub resample: usize,
    pub sample: usize,
    pub uniform_samples: usize,
    pub envelope_probes: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Sizes {
            population: 1_000_000,
            resample: 10_000,
            sample: 10_000,
            uniform_samples: 1_000_000,
            envelope_probes: DEFAULT_PROBES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub name: String,
    pub weights: Vec<f64>,
    pub covers: Vec<String>,
    pub urban_index: Option<usize>,
    pub min_count: usize,
    pub eta: f64,
    pub bins: usize,
    pub zero_tol: f64,
    pub sum_tol: f64,
    /// Master seed; every stage derives its own seed from it.
    pub seed: u64,
    pub sizes: Sizes,
    pub lambda_grid: Vec<f64>,
    pub safety: f64,
    pub path: DensityPath,
    pub svg: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::builtin("1956").expect("built-in scenario")
    }
}

impl ScenarioConfig {
    pub fn builtin(name: &str) -> Option<Self> {
        let weights = match name {
            "1956" => WEIGHTS_1956,
            "1973" => WEIGHTS_1973,
            "2000" => WEIGHTS_2000,
            _ => return None,
        };
        Some(ScenarioConfig {
            name: name.to_string(),
            weights: weights.to_vec(),
            covers: COVERS.iter().map(|s| s.to_string()).collect(),
            urban_index: Some(URBAN_INDEX),
            min_count: DEFAULT_MIN_COUNT,
            eta: DEFAULT_ETA,
            bins: landdiv::curves::DEFAULT_BINS,
            zero_tol: DEFAULT_ZERO_TOL,
            sum_tol: DEFAULT_SUM_TOL,
            seed: 1,
            sizes: Sizes::default(),
            lambda_grid: log_grid(1e-4, 1e-1, 25),
            safety: DEFAULT_SAFETY,
            path: DensityPath::EulerMaclaurin,
            svg: false,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn weight_vector(&self) -> CliResult<WeightVector> {
        WeightVector::new(self.weights.clone()).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        let w = self.weight_vector()?;
        let bad = |m: String| Err(CliError::Input(m));
        if !self.covers.is_empty() && self.covers.len() != w.len() {
            return bad(format!("{} cover names for {} weights", self.covers.len(), w.len()));
        }
        if let Some(u) = self.urban_index {
            if u >= w.len() {
                return bad(format!("urban index {u} out of range"));
            }
        }
        if self.bins < 2 {
            return bad("bins must be at least 2".into());
        }
        if !(self.eta > 0.0) {
            return bad("eta must be positive".into());
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.windows(2).any(|p| p[0] >= p[1]) {
            return bad("lambda grid must be nonempty and strictly increasing".into());
        }
        if self.lambda_grid.iter().any(|l| !(*l > 0.0)) {
            return bad("bandwidths must be positive".into());
        }
        if self.sizes.sample == 0 || self.sizes.resample == 0 || self.sizes.population == 0 {
            return bad("sample sizes must be positive".into());
        }
        Ok(())
    }
}

/// Parses `lo:hi:count` (log-spaced) or a comma-separated list.
pub fn parse_lambda_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Input(format!("invalid lambda grid {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && n >= 1) {
            return Err(bad());
        }
        log_grid(lo, hi, n)
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<CliResult<Vec<f64>>>()?
    };
    if grid.is_empty() || grid.windows(2).any(|p| p[0] >= p[1]) || grid.iter().any(|l| !(*l > 0.0)) {
        return Err(bad());
    }
    Ok(grid)
}

/// Parses a comma-separated weight list.
pub fn parse_weights(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("invalid weight {v:?}")))
        })
        .collect()
}
