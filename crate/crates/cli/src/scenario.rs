//! Scenario files: fixtures, suite entries and integration overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use convexa::{IntegrationSpec, Method};
use serde::{Deserialize, Serialize};

use crate::suites::SuiteId;
use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default)]
    pub integration: SpecOverrides,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub fixtures: BTreeMap<String, FixtureSpec>,
    #[serde(default, rename = "suite")]
    pub suites: Vec<SuiteEntry>,
}

/// Optional replacements for the fields of [`IntegrationSpec`]; the seed
/// always comes from the scenario.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOverrides {
    pub method: Option<Method>,
    pub budget: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub truncation_level: Option<f64>,
}

impl SpecOverrides {
    pub fn apply(&self, mut spec: IntegrationSpec) -> IntegrationSpec {
        if let Some(m) = self.method {
            spec.method = m;
        }
        if let Some(b) = self.budget {
            spec.budget = b;
        }
        if let Some(t) = self.rel_tol {
            spec.rel_tol = t;
        }
        if let Some(t) = self.abs_tol {
            spec.abs_tol = t;
        }
        if let Some(t) = self.truncation_level {
            spec.truncation_level = t;
        }
        spec
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Relative paths resolve against the scenario file.
    pub dir: Option<PathBuf>,
    pub csv: Option<String>,
    pub json: Option<String>,
    pub profiles: Option<String>,
}

/// One suite run over a set of fixtures.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub name: SuiteId,
    /// Every compatible fixture when absent.
    pub fixtures: Option<Vec<String>>,
    pub lambdas: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    /// Random linear maps per fixture for the homogeneity rows.
    pub maps: Option<usize>,
    /// Midpoint log-convexity row of the asa-duality suite; on by default.
    pub log_convexity: Option<bool>,
    pub integration: Option<SpecOverrides>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FixtureSpec {
    /// `<A(x-c), x-c>/2 + offset`.
    Quadratic {
        diag: Option<Vec<f64>>,
        matrix: Option<Vec<Vec<f64>>>,
        center: Option<Vec<f64>>,
        offset: Option<f64>,
    },
    /// Quadratic with a random SPD matrix drawn from the scenario seed.
    RandomSpd { dim: usize, seed: Option<u64> },
    /// Seeded member of the smooth convex family.
    Seeded { dim: usize, seed: u64 },
    /// `Σ |x_i|^p / p`.
    Power { dim: usize, exponent: f64 },
    HingeSquared {
        diag: Vec<f64>,
        weight: f64,
        direction: Vec<f64>,
        bias: f64,
        positive_side: bool,
    },
    /// Gauge of a body fixture.
    Gauge { body: String },
    Ball { dim: usize },
    Ellipsoid {
        axes: Option<Vec<f64>>,
        matrix: Option<Vec<Vec<f64>>>,
    },
    #[serde(rename = "lq-ball")]
    LqBall { dim: usize, q: f64 },
    Cube { dim: usize },
    Polygon { vertices: Vec<[f64; 2]> },
    /// `f = c(1 - s<Mx,x>/2)_+^{α/s}`.
    #[serde(rename = "s-profile")]
    SProfile {
        s: f64,
        alpha: f64,
        scale: Option<f64>,
        diag: Option<Vec<f64>>,
        matrix: Option<Vec<Vec<f64>>>,
    },
    /// Normalized `(1 - s|Ax|²)_+^{1/(2s)}`.
    #[serde(rename = "s-equality")]
    SEquality {
        s: f64,
        diag: Option<Vec<f64>>,
        matrix: Option<Vec<Vec<f64>>>,
    },
    /// Two function fixtures, for the valuation suite.
    Pair { first: String, second: String },
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::Scenario(e.to_string()))?;
        s.check_references()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Scenario(format!("{}: {e}", path.display())))?;
        let mut s = Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Scenario(m) => CliError::Scenario(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(dir) = &s.output.dir {
            if dir.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                s.output.dir = Some(base.join(dir));
            }
        }
        Ok(s)
    }

    /// Every fixture named by a suite entry, a gauge or a pair must exist.
    fn check_references(&self) -> Result<(), CliError> {
        for (id, spec) in &self.fixtures {
            let refs: Vec<(&str, &String)> = match spec {
                FixtureSpec::Gauge { body } => vec![("body", body)],
                FixtureSpec::Pair { first, second } => vec![("first", first), ("second", second)],
                _ => Vec::new(),
            };
            for (key, r) in refs {
                if !self.fixtures.contains_key(r) {
                    return Err(CliError::Scenario(format!("fixtures.{id}.{key}: unknown fixture `{r}`")));
                }
            }
        }
        for (i, entry) in self.suites.iter().enumerate() {
            for f in entry.fixtures.iter().flatten() {
                if !self.fixtures.contains_key(f) {
                    return Err(CliError::Scenario(format!("suite[{i}].fixtures: unknown fixture `{f}`")));
                }
            }
        }
        Ok(())
    }

    /// Entries and fixtures of `other` appended to `self`; a fixture id
    /// defined differently in both is an error.
    pub fn merge(&mut self, other: Scenario) -> Result<(), CliError> {
        for (id, spec) in other.fixtures {
            match self.fixtures.get(&id) {
                Some(mine) if *mine != spec => {
                    return Err(CliError::Scenario(format!("fixtures.{id}: conflicting definitions")));
                }
                _ => {
                    self.fixtures.insert(id, spec);
                }
            }
        }
        self.suites.extend(other.suites);
        Ok(())
    }
}

const FULL: &str = include_str!("../scenarios/full.toml");
const GAUSSIAN_SMOKE: &str = include_str!("../scenarios/gaussian-smoke.toml");
const DUALITY: &str = include_str!("../scenarios/duality.toml");

/// Named scenarios shipped with the binary.
pub const BUILTIN_GROUPS: [(&str, &str); 2] = [
    ("gaussian-smoke", "equality cases on Gaussian fixtures"),
    ("duality", "log-concave duality on the seeded smooth family"),
];

/// `full`, `gaussian-smoke` or `duality`.
pub fn builtin(name: &str) -> Option<Scenario> {
    let text = match name {
        "full" => FULL,
        "gaussian-smoke" => GAUSSIAN_SMOKE,
        "duality" => DUALITY,
        _ => return None,
    };
    Some(Scenario::from_toml_str(text).expect("built-in scenarios parse"))
}
