//! Run configuration read from JSON.

use std::sync::Arc;

use isinglab::lattice::{BoundaryCondition, Lattice};
use isinglab::mcmc::{Estimator, Observable, Sampler, Start};
use isinglab::spin::{Model, ModelParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub model: ModelSpec,
    pub temperature: Option<Temperature>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub field: f64,
    pub temperatures: Option<Vec<Temperature>>,
    pub observables: Option<Vec<String>>,
    pub sampler: Option<Sampler>,
    pub n_sweeps: Option<u64>,
    /// Omitted: ten integrated autocorrelation times from a pilot run.
    pub burn_in: Option<u64>,
    pub batches: Option<usize>,
    #[serde(default)]
    pub global_flip: bool,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub start: Start,
    pub seed: Option<u64>,
    #[serde(default)]
    pub queries: Queries,
    pub onsager: Option<OnsagerSpec>,
    pub series: Option<SeriesSpec>,
    pub render: Option<RenderSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub d: Option<usize>,
    pub extents: Vec<usize>,
    pub boundary: Option<BoundarySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    // empty braces so that stray keys are rejected
    Free {},
    Periodic {},
    Fixed { pattern: Vec<i8> },
    AllPlus {},
    AllMinus {},
    /// Plus below `wall` along `axis`; defaults to the last axis and its midpoint.
    Dobrushin { axis: Option<usize>, wall: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Ising {},
    Potts { q: u8 },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Ising {}
    }
}

/// A temperature given as a number or as `"inf"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Temperature {
    Value(f64),
    Named(String),
}

impl Temperature {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Temperature::Value(t) => Ok(*t),
            Temperature::Named(s) if matches!(s.as_str(), "inf" | "infinity") => Ok(f64::INFINITY),
            Temperature::Named(s) => Err(CliError::Config(format!("temperature {s:?} is not a number or \"inf\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Queries {
    #[serde(default)]
    pub marginals: Vec<MarginalQuery>,
    #[serde(default)]
    pub correlations: Vec<Vec<usize>>,
    pub gibbs_window: Option<usize>,
    #[serde(default)]
    pub fkg: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalQuery {
    pub window: Vec<usize>,
    pub pattern: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnsagerSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub fit: Option<FitSpec>,
}

impl Default for OnsagerSpec {
    fn default() -> Self {
        OnsagerSpec { t_min: 0.1, t_max: 3.0, points: 30, fit: Some(FitSpec::default()) }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub min_distance: f64,
    pub max_distance: f64,
    pub points: usize,
}

impl Default for FitSpec {
    fn default() -> Self {
        FitSpec { min_distance: 1e-4, max_distance: 5e-2, points: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    /// Variable sets for the generating-function check, e.g. `[["s0", "s1*s2"]]`.
    #[serde(default)]
    pub generating: Vec<Vec<String>>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_halvings")]
    pub halvings: usize,
    /// Variable lists whose joint cumulant is computed both ways.
    #[serde(default)]
    pub cumulants: Vec<Vec<String>>,
    /// Variables whose first-order coefficient is checked against a derivative.
    #[serde(default)]
    pub calibrate: Vec<String>,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_order() -> usize {
    2
}

fn default_t0() -> f64 {
    0.2
}

fn default_halvings() -> usize {
    3
}

fn default_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    pub snapshot: Snapshot,
    #[serde(default)]
    pub overlay: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Snapshot {
    /// Raw states of every site in index order.
    States { states: Vec<i8> },
    /// Every free site in one state.
    Uniform { state: i8 },
    /// The zero-temperature configuration the boundary selects.
    Ground {},
    /// Final state of a chain after `sweeps` updates.
    Sample { sweeps: u64 },
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.check_shape()?;
        Ok(cfg)
    }

    fn check_shape(&self) -> Result<(), CliError> {
        if let Some(d) = self.lattice.d {
            if d != self.lattice.extents.len() {
                return Err(CliError::Config(format!(
                    "lattice.d = {d} but {} extents were given",
                    self.lattice.extents.len()
                )));
            }
        }
        if self.temperature.is_some() && self.beta.is_some() {
            return Err(CliError::Config("give either temperature or beta, not both".into()));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model, CliError> {
        match self.model {
            ModelSpec::Ising {} => Ok(Model::Ising),
            ModelSpec::Potts { q } => Model::potts(q).map_err(CliError::config),
        }
    }

    pub fn boundary(&self, default: BoundaryCondition) -> BoundaryCondition {
        let extents = &self.lattice.extents;
        match &self.lattice.boundary {
            None => default,
            Some(BoundarySpec::Free {}) => BoundaryCondition::Free,
            Some(BoundarySpec::Periodic {}) => BoundaryCondition::Periodic,
            Some(BoundarySpec::Fixed { pattern }) => BoundaryCondition::Fixed(pattern.clone()),
            Some(BoundarySpec::AllPlus {}) => BoundaryCondition::AllPlus,
            Some(BoundarySpec::AllMinus {}) => BoundaryCondition::AllMinus,
            Some(BoundarySpec::Dobrushin { axis, wall }) => {
                let axis = axis.unwrap_or(extents.len().saturating_sub(1));
                let below = wall.unwrap_or_else(|| extents.get(axis).map_or(0, |e| e / 2));
                BoundaryCondition::Dobrushin { axis, below }
            }
        }
    }

    pub fn lattice(&self) -> Result<Arc<Lattice>, CliError> {
        self.lattice_with_default(BoundaryCondition::Free)
    }

    pub fn lattice_with_default(&self, default: BoundaryCondition) -> Result<Arc<Lattice>, CliError> {
        Lattice::new(self.lattice.extents.clone(), self.boundary(default))
            .map(Arc::new)
            .map_err(CliError::config)
    }

    /// Parameters at the configured `temperature` or `beta`.
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let model = self.model()?;
        let built = match (&self.temperature, self.beta) {
            (Some(t), None) => ModelParams::new(model, t.value()?, self.field),
            (None, Some(b)) => ModelParams::from_beta(model, b, self.field),
            _ => return Err(CliError::Config("a temperature or beta is required".into())),
        };
        built.map_err(CliError::config)
    }

    pub fn params_at(&self, temperature: f64) -> Result<ModelParams, CliError> {
        ModelParams::new(self.model()?, temperature, self.field).map_err(CliError::config)
    }

    pub fn observables(&self) -> Result<Vec<Observable>, CliError> {
        match &self.observables {
            None => Ok(vec![Observable::AbsMagnetization, Observable::Energy]),
            Some(list) if list.is_empty() => Err(CliError::Config("observables list is empty".into())),
            Some(list) => list.iter().map(|o| Observable::parse(o).map_err(CliError::config)).collect(),
        }
    }

    pub fn seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.seed).unwrap_or(0)
    }
}
