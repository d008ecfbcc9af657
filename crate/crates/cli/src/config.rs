//! Run configuration files.
//!
//! A config is a TOML document with optional sections; every key mirrors a
//! command-line flag and flags win over file values. Unknown sections and
//! keys are rejected so typos cannot silently fall back to defaults.
//!
//! ```toml
//! [potential]
//! c = 0.0
//! d = 0.5
//! gamma = 1.0
//!
//! [affine]
//! alpha = 2.0
//! lambda = 2.0
//! delta = 3.0
//!
//! [simulation]
//! steps = 1000
//! paths = 10000
//! seed = 7
//! scheme = "auto"
//!
//! [output]
//! prefix = "runs/delta3"
//! format = "both"
//!
//! [tolerance]
//! residual = 1e-8
//! z = 4.0
//! ```

use std::path::{Path, PathBuf};

use hjb_iso::sde::Scheme;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub affine: AffineSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerance: ToleranceSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub phi: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub model: Option<String>,
    pub eta: Option<String>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub steps: Option<usize>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub stride: Option<usize>,
    pub start: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub prefix: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub residual: Option<f64>,
    pub z: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let c = RunConfig::parse(
            "[potential]\nc = 0.0\nd = 0.5\n[simulation]\nseed = 7\nscheme = \"besq-sum-of-squares\"\n",
        )
        .unwrap();
        assert_eq!(c.potential.d, Some(0.5));
        assert_eq!(c.simulation.scheme, Some(Scheme::BesqSumOfSquares));
        assert_eq!(c.affine, AffineSection::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse("[potential]\ngama = 1.0\n").is_err());
        assert!(RunConfig::parse("[potentials]\n").is_err());
    }
}
