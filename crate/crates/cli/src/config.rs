//! Experiment configuration: one JSON object holding the sections a
//! subcommand may need. Parsing reports the JSON path of any offending
//! field; missing required sections are reported with their path too.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use multcalc::literal::{
    DeltaLiteral, DomainLiteral, FunctionalLiteral, GermLiteral, MultiplierLiteral, SeriesLiteral,
};
use multcalc::multiplier::EngineParams;

/// Exit status conventions: 0 all checks pass, 1 a check failed, 2 the
/// config or invocation is invalid.
pub const EXIT_CHECK_FAILURE: u8 = 1;
pub const EXIT_CONFIG_ERROR: u8 = 2;

#[derive(Debug, Clone, Deserialize)]
pub struct ZGridSpec {
    pub radii: usize,
    pub angles: usize,
}

impl Default for ZGridSpec {
    fn default() -> Self {
        ZGridSpec {
            radii: 5,
            angles: 8,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CompactFactorLiteral {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CompactLiteral {
    pub factors: Vec<CompactFactorLiteral>,
}

/// The full experiment configuration. Every section is optional at parse
/// time; each subcommand states which ones it requires.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Option<DomainLiteral>,
    pub multiplier: Option<MultiplierLiteral>,
    /// second multiplier for the compose subcommand
    pub compose_with: Option<MultiplierLiteral>,
    pub functional: Option<FunctionalLiteral>,
    pub germ: Option<GermLiteral>,
    pub series: Option<SeriesLiteral>,
    pub delta: Option<DeltaLiteral>,
    pub compact: Option<CompactLiteral>,
    #[serde(rename = "box")]
    pub bounds: Option<Vec<usize>>,
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub z_grid: Option<ZGridSpec>,
    pub z_count: Option<usize>,
    pub out: Option<PathBuf>,
    /// transform subcommand: also emit the moment roundtrip comparison
    pub roundtrip: Option<bool>,
    /// bench subcommand: pole of the study integrand
    pub pole: Option<[f64; 2]>,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub nodes: Option<usize>,
    pub bounds: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at {}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// Loads and parses the config, reporting the JSON path of the first
    /// offending field, then applies the command-line overrides.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: ".".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        let deserializer = &mut serde_json::Deserializer::from_str(&text);
        let mut config: ExperimentConfig =
            serde_path_to_error::deserialize(deserializer).map_err(|e| {
                let mut path = format!(".{}", e.path());
                let message = e.inner().to_string();
                // a missing field is reported at its parent; extend the
                // path down to the field itself
                if let Some(rest) = message.strip_prefix("missing field `") {
                    if let Some(field) = rest.split('`').next() {
                        if path == "." {
                            path = format!(".{field}");
                        } else {
                            path = format!("{path}.{field}");
                        }
                    }
                }
                ConfigError { path, message }
            })?;
        if let Some(nodes) = overrides.nodes {
            config.nodes = Some(nodes);
        }
        if let Some(bounds) = &overrides.bounds {
            config.bounds = Some(bounds.clone());
            if let Some(m) = &mut config.multiplier {
                m.bounds = bounds.clone();
            }
            if let Some(m) = &mut config.compose_with {
                m.bounds = bounds.clone();
            }
        }
        if let Some(seed) = overrides.seed {
            config.seed = Some(seed);
        }
        if let Some(tol) = overrides.tol {
            config.tol = Some(tol);
        }
        if let Some(out) = &overrides.out {
            config.out = Some(out.clone());
        }
        Ok(config)
    }

    pub fn require<'a, T>(
        &'a self,
        field: Option<&'a T>,
        path: &str,
    ) -> Result<&'a T, ConfigError> {
        field.ok_or_else(|| ConfigError {
            path: path.into(),
            message: "missing required section".into(),
        })
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-9)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    pub fn z_grid(&self) -> ZGridSpec {
        self.z_grid.clone().unwrap_or_default()
    }

    /// Engine knobs implied by the config.
    pub fn engine_params(&self) -> EngineParams {
        let grid = self.z_grid();
        EngineParams {
            nodes: self.nodes,
            membership_radii: grid.radii,
            membership_angles: grid.angles,
            ..EngineParams::default()
        }
    }

    pub fn compact(&self) -> Result<Option<multcalc::domains::CompactBox>, ConfigError> {
        match &self.compact {
            None => Ok(None),
            Some(lit) => {
                let factors = lit
                    .factors
                    .iter()
                    .map(|f| {
                        multcalc::domains::ClosedDisc::new(
                            multcalc::Complex64::new(f.center[0], f.center[1]),
                            f.radius,
                        )
                    })
                    .collect::<multcalc::Result<Vec<_>>>()
                    .map_err(|e| ConfigError {
                        path: ".compact".into(),
                        message: e.to_string(),
                    })?;
                multcalc::domains::CompactBox::new(factors)
                    .map(Some)
                    .map_err(|e| ConfigError {
                        path: ".compact".into(),
                        message: e.to_string(),
                    })
            }
        }
    }
}
