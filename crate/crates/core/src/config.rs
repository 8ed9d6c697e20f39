//! TOML run configuration shared by every subcommand.
//!
//! ```toml
//! seed = 7
//! replicates = 2000
//!
//! [ensemble]                 # generate, verify
//! mu = [["geometric(0.5)"]]
//! nu = ["poisson(1)"]
//! roots = [3]
//! h_max = 12
//! forests = 10
//!
//! [mechanism]                # simulate and Brownian experiments
//! beta = [0.5]
//! alpha = [[0.0]]
//! delta = [1.0]
//! x = [0.0]
//!
//! [experiment]
//! name = "profile"
//! points = [1.0]
//! p_list = [50, 200]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{AdmissibleMechanism, ScalingFamily};
use crate::forest::OffspringEnsemble;
use crate::lab::{ExperimentKind, LabConfig};
use crate::law::Law;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub mu: Vec<Vec<Law>>,
    pub nu: Vec<Law>,
    pub roots: Vec<u64>,
    #[serde(default = "default_h_max")]
    pub h_max: u32,
    #[serde(default = "one")]
    pub forests: usize,
    #[serde(default)]
    pub convergence: bool,
}

fn default_h_max() -> u32 {
    10
}

fn one() -> usize {
    1
}

impl EnsembleSpec {
    pub fn ensemble(&self) -> Result<OffspringEnsemble> {
        let e = OffspringEnsemble { mu: self.mu.clone(), nu: self.nu.clone(), roots: self.roots.clone(), convergence: self.convergence };
        e.validate()?;
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableSpec {
    pub alpha: f64,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateMethod {
    /// Square-root SDE.
    Sde,
    /// Time-change construction.
    Lamperti,
    /// Reflected Brownian height of type `j`.
    Height,
    /// Left height of type `j`, with `U` from an SDE run.
    Leftheight,
    /// Terminal local times of the left height of type `j` at `levels`.
    Localtime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub method: SimulateMethod,
    /// Time or level horizon.
    #[serde(default = "unit")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub paths: usize,
    /// Type simulated by `height`, `leftheight` and `localtime`.
    #[serde(default = "one")]
    pub j: usize,
    /// Levels of `localtime`; defaults to `horizon`.
    #[serde(default)]
    pub levels: Vec<f64>,
    /// Report `localtime` as the semimartingale local time, which is
    /// `beta_j / 2` times the occupation density.
    #[serde(default)]
    pub semimartingale: bool,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentKind,
    /// Times (`height`, `leftheight`, `stable`) or levels (`profile`,
    /// `rayknight`) of the marginals.
    pub points: Vec<f64>,
    /// Scales for multi-scale experiments.
    #[serde(default)]
    pub p_list: Vec<u32>,
    /// Scale for single-scale experiments.
    #[serde(default)]
    pub p: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub mechanism: Option<AdmissibleMechanism>,
    #[serde(default)]
    pub stable: Option<StableSpec>,
    #[serde(default)]
    pub simulate: Option<SimulateSpec>,
    #[serde(default)]
    pub experiment: Option<ExperimentSpec>,
    /// Numerical settings; its `seed` is replaced by the top-level one.
    #[serde(default)]
    pub lab: LabConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_replicates() -> usize {
    1000
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields default")
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Schema checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = &self.ensemble {
            e.ensemble()?;
        }
        if let Some(m) = &self.mechanism {
            m.validate()?;
        }
        if let Some(s) = &self.stable {
            crate::family::stable_family(&s.c, s.alpha, 1)?;
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        let l = &self.lab;
        if !(l.dt > 0.0 && l.eps >= l.dt && l.u_horizon > 0.0 && l.cap_margin >= 0.0) {
            return Err(Error::Config(format!("lab: need dt > 0, eps >= dt, u_horizon > 0, cap_margin >= 0 (got {l:?})")));
        }
        if let Some(s) = &self.simulate {
            if !(s.horizon > 0.0) || s.paths == 0 {
                return Err(Error::Config("simulate: horizon and paths must be positive".into()));
            }
            if s.levels.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::Config("simulate: levels must be finite and nonnegative".into()));
            }
        }
        if let Some(x) = &self.experiment {
            if x.points.is_empty() || x.points.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::Config("experiment: points must be finite and nonnegative".into()));
            }
            if x.p_list.contains(&0) || x.p == Some(0) {
                return Err(Error::Config("experiment: scales must be positive".into()));
            }
        }
        Ok(())
    }

    /// The scaling family: `[stable]` if present, else `[mechanism]`.
    pub fn family(&self) -> Result<ScalingFamily> {
        match (&self.stable, &self.mechanism) {
            (Some(s), _) => Ok(ScalingFamily::Stable { alpha: s.alpha, c: s.c.clone() }),
            (None, Some(m)) => Ok(ScalingFamily::Brownian { mechanism: m.clone() }),
            (None, None) => Err(Error::Config("missing [mechanism] or [stable] section".into())),
        }
    }

    pub fn lab_config(&self) -> LabConfig {
        LabConfig { seed: self.seed, ..self.lab.clone() }
    }

    /// The configuration as JSON, for embedding in outputs.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_example() {
        let c = RunConfig::parse(
            r#"
            seed = 7
            [ensemble]
            mu = [["geometric(0.5)", "dirac(0)"], ["poisson(0.2)", "binomial(2,0.4)"]]
            nu = ["poisson(1)", "dirac(1)"]
            roots = [1, 0]
            [mechanism]
            beta = [0.5]
            alpha = [[0.0]]
            delta = [1.0]
            x = [0.0]
            [experiment]
            name = "profile"
            points = [1.0]
            p_list = [50, 200]
            [lab.thresholds]
            ks = 0.04
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.ensemble.as_ref().unwrap().h_max, 10);
        assert_eq!(c.lab.thresholds.ks, 0.04);
        assert_eq!(c.lab.thresholds.ks_coupled, 0.07);
        assert_eq!(c.lab_config().seed, 7);
        assert!(matches!(c.family().unwrap(), ScalingFamily::Brownian { .. }));
        let back = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn schema_errors_name_the_problem() {
        let err = RunConfig::parse("[ensemble]\nmu = [[\"explicit([0.5,0.4])\"]]\nnu = [\"dirac(0)\"]\nroots = [1]\n").unwrap_err();
        assert!(err.to_string().contains("explicit"), "{err}");
        let err = RunConfig::parse("sede = 3").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = RunConfig::parse("[experiment]\nname = \"bogus\"\npoints = [1.0]").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}
