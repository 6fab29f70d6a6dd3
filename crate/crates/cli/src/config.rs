//! Scenario files. One TOML file describes one scenario; every section is
//! optional and missing values fall back to the defaults below.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub scenario: ScenarioSection,
    pub metric: Option<MetricSection>,
    #[serde(default)]
    pub geodesic: GeodesicSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub conjugate: ConjugateSection,
    #[serde(default)]
    pub verify: VerifySection,
    pub ppwave: Option<PpSection>,
    pub rosen: Option<RosenSection>,
    pub flow: Option<FlowSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// Built-in scenario name; ignored when `[metric]` is given.
    pub name: Option<String>,
}

/// An inline metric: coordinate names, the full component matrix as
/// expression strings, and a base point.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    #[serde(default = "MetricSection::default_label")]
    pub label: String,
    pub coordinates: Vec<String>,
    pub components: Vec<Vec<String>>,
    pub base: Option<Vec<f64>>,
}

impl MetricSection {
    fn default_label() -> String {
        "inline".into()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSection {
    pub x0: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    pub span: Option<[f64; 2]>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative and absolute tolerance of the adaptive integrator.
    pub ode: f64,
    /// Value-based classification flags.
    pub classify: f64,
    /// Derivative-based classification flags.
    pub derivative: f64,
    pub fd_step: f64,
    /// Singular-value threshold for conjugate points.
    pub conjugate: f64,
    /// Width at which conjugate-point refinement stops.
    pub refine: f64,
    /// Residual bound for theorem evidence.
    pub evidence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode: 1e-11,
            classify: 1e-7,
            derivative: 1e-6,
            fd_step: 1e-4,
            conjugate: 1e-7,
            refine: 1e-9,
            evidence: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConjugateSection {
    /// Defaults to the geodesic span.
    pub span: Option<[f64; 2]>,
    pub step: f64,
    /// Also count the index on the limit side and attach the bound.
    pub limit_index: bool,
}

impl Default for ConjugateSection {
    fn default() -> Self {
        Self {
            span: None,
            step: 5e-3,
            limit_index: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// `i`..`vii`, `focusing`, `morse`, `correspondence`, or `all`.
    pub items: Vec<String>,
    pub geodesics: usize,
    pub seed: u64,
    pub radius: f64,
    /// Horizon `T` of the focusing check.
    pub horizon: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            items: vec!["all".into()],
            geodesics: 16,
            seed: 7,
            radius: 0.5,
            horizon: 4.0,
        }
    }
}

/// A pp-wave given by `H` and the transverse signs, for `classify`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpSection {
    pub h: String,
    pub sigma: Vec<f64>,
    pub coordinates: Option<Vec<String>>,
    /// Chart points; when absent, `count` seeded random points are used.
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default = "PpSection::default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl PpSection {
    fn default_count() -> usize {
        20
    }
}

/// Rosen data `g_ij(t)` as expressions in `t`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosenSection {
    pub g: Vec<Vec<String>>,
    pub span: Option<[f64; 2]>,
    pub samples: Option<usize>,
    /// Initial frame at `t₀` (0 when the span contains it, else its left
    /// end); defaults to `g(t₀)^(−1/2)`.
    pub f0: Option<Vec<Vec<f64>>>,
}

/// A unit geodesic vector field and the start of one integral curve.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub z: Vec<String>,
    pub x0: Vec<f64>,
    pub span: Option<[f64; 2]>,
    pub samples: Option<usize>,
}

impl Config {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&src)
    }
}
