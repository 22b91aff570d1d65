//! Spin configurations and the nearest-neighbour energy.
//!
//! Both models use the same pair energy: `-1` for equal neighbours and `+1`
//! for unequal ones. For Ising spins that is `-s * s'`; for Potts it fixes
//! `E_eq = -1`, `E_neq = +1`, so Q = 2 Potts is Ising with relabelled states.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Ising,
    Potts { q: u8 },
}

impl Model {
    pub fn potts(q: u8) -> Result<Model> {
        if q < 2 || q > i8::MAX as u8 {
            return Err(Error::InvalidParams(format!("potts needs 2 <= Q <= 127, got {q}")));
        }
        Ok(Model::Potts { q })
    }

    /// Number of values a site can take.
    pub fn state_count(self) -> usize {
        match self {
            Model::Ising => 2,
            Model::Potts { q } => q as usize,
        }
    }

    /// Allowed states in canonical order: `[+1, -1]` for Ising, `1..=Q` for Potts.
    pub fn states(self) -> Vec<i8> {
        match self {
            Model::Ising => vec![1, -1],
            Model::Potts { q } => (1..=q as i8).collect(),
        }
    }

    pub fn is_valid(self, state: i8) -> bool {
        match self {
            Model::Ising => state == 1 || state == -1,
            Model::Potts { q } => state >= 1 && state as u8 <= q,
        }
    }

    /// Plus maps to `+1` / Potts state 1, minus to `-1` / Potts state 2.
    pub fn resolve(self, pin: Pin) -> i8 {
        match (self, pin) {
            (_, Pin::State(s)) => s,
            (Model::Ising, Pin::Plus) => 1,
            (Model::Ising, Pin::Minus) => -1,
            (Model::Potts { .. }, Pin::Plus) => 1,
            (Model::Potts { .. }, Pin::Minus) => 2,
        }
    }

    pub fn plus(self) -> i8 {
        self.resolve(Pin::Plus)
    }

    fn check(self, state: i8) -> Result<()> {
        if self.is_valid(state) {
            Ok(())
        } else {
            Err(Error::InvalidState { state, model: self.to_string() })
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Ising => write!(f, "ising"),
            Model::Potts { q } => write!(f, "potts(q={q})"),
        }
    }
}

/// Energy of one edge.
#[inline(always)]
pub fn pair_energy(a: i8, b: i8) -> i64 {
    if a == b {
        -1
    } else {
        1
    }
}

/// The Ising pair energy written as a discrete squared gradient across a
/// unit-length edge: `-1 + |a - b|^2 / 2`.
pub fn pair_energy_gradient_form(a: i8, b: i8) -> f64 {
    let diff = f64::from(a) - f64::from(b);
    -1.0 + 0.5 * diff * diff
}

/// Temperature, field and model.
///
/// `temperature` may be `+inf` (all configurations equally likely) or `0`
/// (exact engine only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    pub temperature: f64,
    pub field: f64,
}

impl ModelParams {
    pub fn new(model: Model, temperature: f64, field: f64) -> Result<Self> {
        let params = ModelParams { model, temperature, field };
        params.validate()?;
        Ok(params)
    }

    pub fn ising(temperature: f64) -> Result<Self> {
        Self::new(Model::Ising, temperature, 0.0)
    }

    pub fn from_beta(model: Model, beta: f64, field: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParams(format!("beta must be >= 0, got {beta}")));
        }
        Self::new(model, 1.0 / beta, field)
    }

    pub fn validate(&self) -> Result<()> {
        if let Model::Potts { q } = self.model {
            Model::potts(q)?;
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(Error::InvalidParams(format!(
                "temperature must be >= 0 or +inf, got {}",
                self.temperature
            )));
        }
        if !self.field.is_finite() {
            return Err(Error::InvalidParams("field must be finite".into()));
        }
        if self.field != 0.0 && self.model != Model::Ising {
            return Err(Error::InvalidParams("an external field is only defined for Ising".into()));
        }
        Ok(())
    }

    /// `1/T`, with `T = inf` giving 0 and `T = 0` giving `inf`.
    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.temperature == 0.0
    }

    pub fn is_infinite_temperature(&self) -> bool {
        self.temperature == f64::INFINITY
    }
}

/// A state for every site of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfig {
    lattice: Arc<Lattice>,
    model: Model,
    states: Vec<i8>,
}

impl SpinConfig {
    /// Every free site set to `state`; frozen sites take their pinned value.
    pub fn uniform(lattice: Arc<Lattice>, model: Model, state: i8) -> Result<Self> {
        model.check(state)?;
        let states = vec![state; lattice.site_count()];
        Self::with_pins(lattice, model, states)
    }

    /// Free sites drawn uniformly from the model's states.
    pub fn random<R: Rng + ?Sized>(lattice: Arc<Lattice>, model: Model, rng: &mut R) -> Result<Self> {
        let values = model.states();
        let states = (0..lattice.site_count())
            .map(|_| values[rng.random_range(0..values.len())])
            .collect();
        Self::with_pins(lattice, model, states)
    }

    /// Takes the full state vector; frozen sites must already match their pins.
    pub fn from_states(lattice: Arc<Lattice>, model: Model, states: Vec<i8>) -> Result<Self> {
        if states.len() != lattice.site_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} states, got {}",
                lattice.site_count(),
                states.len()
            )));
        }
        for (site, &s) in states.iter().enumerate() {
            model.check(s)?;
            if let Some(pin) = lattice.pin(site) {
                if model.resolve(pin) != s {
                    return Err(Error::FrozenSite { site });
                }
            }
        }
        Ok(SpinConfig { lattice, model, states })
    }

    fn with_pins(lattice: Arc<Lattice>, model: Model, mut states: Vec<i8>) -> Result<Self> {
        for (site, slot) in states.iter_mut().enumerate() {
            if let Some(pin) = lattice.pin(site) {
                *slot = model.resolve(pin);
            }
        }
        Self::from_states(lattice, model, states)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn states(&self) -> &[i8] {
        &self.states
    }

    pub fn get(&self, site: usize) -> i8 {
        self.states[site]
    }

    /// Sets a free site. Frozen boundary sites are rejected.
    pub fn set(&mut self, site: usize, state: i8) -> Result<()> {
        self.check_move(site, state)?;
        self.states[site] = state;
        Ok(())
    }

    #[inline]
    pub(crate) fn set_unchecked(&mut self, site: usize, state: i8) {
        self.states[site] = state;
    }

    fn check_move(&self, site: usize, state: i8) -> Result<()> {
        self.lattice.check_site(site)?;
        self.model.check(state)?;
        if self.lattice.is_frozen(site) {
            return Err(Error::FrozenSite { site });
        }
        Ok(())
    }

    /// Sum of pair energies over all edges. Exact.
    pub fn coupling_energy(&self) -> i64 {
        self.lattice
            .edges()
            .iter()
            .map(|&(a, b)| pair_energy(self.states[a], self.states[b]))
            .sum()
    }

    /// Sum of Ising spins over the sites that feel the field (the free sites).
    pub fn field_magnetization(&self) -> i64 {
        self.lattice
            .free_sites()
            .iter()
            .map(|&s| i64::from(self.states[s]))
            .sum()
    }

    /// Total energy `coupling - h * sum(s)`; the field only acts on Ising spins.
    pub fn energy(&self, field: f64) -> f64 {
        let coupling = self.coupling_energy() as f64;
        if field == 0.0 || self.model != Model::Ising {
            coupling
        } else {
            coupling - field * self.field_magnetization() as f64
        }
    }

    /// Change of coupling energy if `site` took `new_state`, from incident edges.
    #[inline]
    pub fn coupling_delta(&self, site: usize, new_state: i8) -> i64 {
        let old = self.states[site];
        if old == new_state {
            return 0;
        }
        self.lattice
            .neighbor_slice(site)
            .iter()
            .map(|&n| {
                let s = self.states[n as usize];
                pair_energy(new_state, s) - pair_energy(old, s)
            })
            .sum()
    }

    /// `energy(after) - energy(before)` for setting `site` to `new_state`.
    pub fn energy_delta_flip(&self, site: usize, new_state: i8, field: f64) -> Result<f64> {
        self.check_move(site, new_state)?;
        let mut delta = self.coupling_delta(site, new_state) as f64;
        if field != 0.0 && self.model == Model::Ising {
            delta -= field * f64::from(new_state - self.states[site]);
        }
        Ok(delta)
    }

    /// `-Energy / T`, the unnormalised log Gibbs weight.
    pub fn boltzmann_log_weight(&self, params: &ModelParams) -> Result<f64> {
        params.validate()?;
        if params.is_zero_temperature() {
            return Err(Error::ZeroTemperature);
        }
        if params.is_infinite_temperature() {
            return Ok(0.0);
        }
        Ok(-self.energy(params.field) / params.temperature)
    }

    /// Every spin negated, including the boundary pins. Ising only.
    pub fn flipped(&self) -> Result<SpinConfig> {
        if self.model != Model::Ising {
            return Err(Error::Unsupported("global flip is defined for Ising spins".into()));
        }
        let boundary = match self.lattice.boundary() {
            crate::lattice::BoundaryCondition::Free | crate::lattice::BoundaryCondition::Periodic => {
                None
            }
            _ => {
                let sites = self.lattice.boundary_sites()?;
                Some(crate::lattice::BoundaryCondition::Fixed(
                    sites.iter().map(|&s| -self.states[s]).collect(),
                ))
            }
        };
        let lattice = match boundary {
            Some(bc) => Arc::new(self.lattice.with_boundary(bc)?),
            None => self.lattice.clone(),
        };
        let states = self.states.iter().map(|&s| -s).collect();
        SpinConfig::from_states(lattice, self.model, states)
    }
}
