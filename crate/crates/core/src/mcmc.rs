//! Markov chains targeting the finite-volume Gibbs measure.
//!
//! Two kernels are provided: a sequential-scan Metropolis sweep (one
//! proposal per free site in index order) and the Wolff single-cluster
//! update. Estimates use batch means over a fixed schedule, so a run is a
//! pure function of `(lattice, params, seed, schedule)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, Lattice};
use crate::spin::{pair_energy, Model, ModelParams, SpinConfig};

/// Minimum number of batches for batch-means error bars.
pub const MIN_BATCHES: usize = 32;

/// Derives the seed of chain `index` from a master seed (SplitMix64 finaliser).
pub fn chain_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Metropolis,
    Wolff,
}

/// How a chain is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// Every free site in the plus state.
    #[default]
    Cold,
    /// Free sites drawn uniformly.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub sampler: Sampler,
    /// Total updates, burn-in included.
    pub n_sweeps: u64,
    pub burn_in: u64,
    pub batches: usize,
    /// Mix in a global spin flip, proposed with probability 1/2 after each
    /// update and accepted with the Metropolis rule.
    pub global_flip: bool,
    pub estimator: Estimator,
}

/// How spin and correlation observables are read off a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// The observable's value on the current configuration.
    #[default]
    Raw,
    /// Its conditional expectation given every other spin, from the local
    /// Gibbs equations (Ising spins and correlations; others fall back to raw).
    Conditional,
}

impl Schedule {
    pub fn new(sampler: Sampler, n_sweeps: u64, burn_in: u64) -> Self {
        Schedule { sampler, n_sweeps, burn_in, batches: MIN_BATCHES, global_flip: false, estimator: Estimator::Raw }
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches;
        self
    }

    pub fn with_global_flip(mut self, on: bool) -> Self {
        self.global_flip = on;
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    fn validate(&self) -> Result<u64> {
        if self.batches < MIN_BATCHES {
            return Err(Error::InvalidArgument(format!(
                "at least {MIN_BATCHES} batches are required, got {}",
                self.batches
            )));
        }
        if self.n_sweeps <= self.burn_in {
            return Err(Error::InvalidArgument(format!(
                "n_sweeps ({}) must exceed burn_in ({})",
                self.n_sweeps, self.burn_in
            )));
        }
        let measured = self.n_sweeps - self.burn_in;
        if measured < self.batches as u64 {
            return Err(Error::InvalidArgument(format!(
                "{measured} post-burn-in sweeps cannot fill {} batches",
                self.batches
            )));
        }
        Ok(measured)
    }
}

/// Quantities measured after every update.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    /// Mean spin over all sites. For Potts, `(Q * max_fraction - 1) / (Q - 1)`.
    Magnetization,
    AbsMagnetization,
    /// Total energy per site.
    Energy,
    Spin(usize),
    Correlation(usize, usize),
    WindowMagnetization(Vec<usize>),
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::Magnetization => "m".into(),
            Observable::AbsMagnetization => "abs_m".into(),
            Observable::Energy => "energy".into(),
            Observable::Spin(v) => format!("spin:{v}"),
            Observable::Correlation(a, b) => format!("corr:{a},{b}"),
            Observable::WindowMagnetization(w) => {
                let list: Vec<String> = w.iter().map(|s| s.to_string()).collect();
                format!("window:{}", list.join(","))
            }
        }
    }

    /// Inverse of [`name`](Self::name).
    pub fn parse(text: &str) -> Result<Observable> {
        let bad = || Error::InvalidArgument(format!("unknown observable {text:?}"));
        let sites = |list: &str| -> Result<Vec<usize>> {
            list.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| bad())).collect()
        };
        Ok(match text.split_once(':') {
            None => match text {
                "m" => Observable::Magnetization,
                "abs_m" => Observable::AbsMagnetization,
                "energy" => Observable::Energy,
                _ => return Err(bad()),
            },
            Some(("spin", v)) => Observable::Spin(v.trim().parse().map_err(|_| bad())?),
            Some(("corr", list)) => match sites(list)?.as_slice() {
                &[a, b] => Observable::Correlation(a, b),
                _ => return Err(bad()),
            },
            Some(("window", list)) => Observable::WindowMagnetization(sites(list)?),
            _ => return Err(bad()),
        })
    }

    /// Rejects site indices outside the lattice and empty windows.
    pub fn check(&self, lattice: &Lattice) -> Result<()> {
        let sites: Vec<usize> = match self {
            Observable::Spin(v) => vec![*v],
            Observable::Correlation(a, b) => vec![*a, *b],
            Observable::WindowMagnetization(w) if w.is_empty() => {
                return Err(Error::InvalidArgument("empty window".into()))
            }
            Observable::WindowMagnetization(w) => w.clone(),
            _ => vec![],
        };
        sites.into_iter().try_for_each(|s| lattice.check_site(s))
    }
}

/// Monte Carlo estimate of one observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub observable: String,
    pub temperature: f64,
    pub mean: f64,
    pub std_error: f64,
    pub ess: f64,
    pub samples: u64,
    pub n_sweeps: u64,
    pub seed: u64,
}

/// A single Markov chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    config: SpinConfig,
    params: ModelParams,
    rng: ChaCha8Rng,
    seed: u64,
    sweeps: u64,
    coupling: i64,
    field_mag: i64,
    total_mag: i64,
    // exp(-beta * k) for k = 0..=max coupling delta, used when h = 0
    accept: Vec<f64>,
    in_cluster: Vec<bool>,
    stack: Vec<usize>,
    cluster: Vec<usize>,
    proposed: u64,
    accepted: u64,
}

impl ChainState {
    pub fn new(config: SpinConfig, params: ModelParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if params.is_zero_temperature() {
            return Err(Error::ZeroTemperature);
        }
        if params.model != config.model() {
            return Err(Error::InvalidParams("parameters and configuration disagree on the model".into()));
        }
        let lattice = config.lattice().clone();
        let max_degree = (0..lattice.site_count()).map(|s| lattice.degree(s)).max().unwrap_or(0);
        let beta = params.beta();
        let accept = (0..=2 * max_degree).map(|k| (-beta * k as f64).exp()).collect();
        let coupling = config.coupling_energy();
        let field_mag = if config.model() == Model::Ising { config.field_magnetization() } else { 0 };
        let total_mag = config.states().iter().map(|&s| i64::from(s)).sum();
        Ok(ChainState {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            sweeps: 0,
            coupling,
            field_mag,
            total_mag,
            accept,
            in_cluster: vec![false; lattice.site_count()],
            stack: Vec::new(),
            cluster: Vec::new(),
            proposed: 0,
            accepted: 0,
            config,
            params,
        })
    }

    /// A chain on `lattice` started as `start` prescribes.
    pub fn start(lattice: Arc<Lattice>, params: ModelParams, start: Start, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
        let config = match start {
            Start::Cold => SpinConfig::uniform(lattice, params.model, params.model.plus())?,
            Start::Random => SpinConfig::random(lattice, params.model, &mut rng)?,
        };
        ChainState::new(config, params, seed)
    }

    pub fn config(&self) -> &SpinConfig {
        &self.config
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Cached total energy.
    pub fn energy(&self) -> f64 {
        let h = self.params.field;
        if h == 0.0 {
            self.coupling as f64
        } else {
            self.coupling as f64 - h * self.field_mag as f64
        }
    }

    pub fn coupling_energy(&self) -> i64 {
        self.coupling
    }

    /// True when the cached energy and magnetization match a full recomputation.
    pub fn cache_is_consistent(&self) -> bool {
        let field_mag = if self.config.model() == Model::Ising { self.config.field_magnetization() } else { 0 };
        let total: i64 = self.config.states().iter().map(|&s| i64::from(s)).sum();
        self.coupling == self.config.coupling_energy() && self.field_mag == field_mag && self.total_mag == total
    }

    /// Metropolis acceptance probability for an energy change.
    pub fn acceptance_probability(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            1.0
        } else {
            (-self.params.beta() * delta).exp().min(1.0)
        }
    }

    /// One proposal per free site, in index order starting from a random free site.
    pub fn metropolis_sweep(&mut self) {
        let lattice = self.config.lattice().clone();
        let beta = self.params.beta();
        let h = if self.params.model == Model::Ising { self.params.field } else { 0.0 };
        let q = self.params.model.state_count() as i8;
        let potts = matches!(self.params.model, Model::Potts { .. });
        let free = lattice.free_sites();
        if free.is_empty() {
            self.sweeps += 1;
            return;
        }
        // a fixed starting site makes the sweep kernel reducible on the 2x2 free square
        let offset = self.rng.random_range(0..free.len());
        for &site in free[offset..].iter().chain(&free[..offset]) {
            let old = self.config.get(site);
            let new = if potts {
                let shift = self.rng.random_range(1..q);
                (old - 1 + shift) % q + 1
            } else {
                -old
            };
            let delta_c = self.config.coupling_delta(site, new);
            self.proposed += 1;
            let ok = if h == 0.0 {
                delta_c <= 0 || beta == 0.0 || self.rng.random::<f64>() < self.accept[delta_c as usize]
            } else {
                let delta = delta_c as f64 - h * f64::from(new - old);
                delta <= 0.0 || beta == 0.0 || self.rng.random::<f64>() < (-beta * delta).exp()
            };
            if ok {
                self.accepted += 1;
                self.config.set_unchecked(site, new);
                self.coupling += delta_c;
                if !potts {
                    self.field_mag += i64::from(new - old);
                }
                self.total_mag += i64::from(new - old);
            }
        }
        self.sweeps += 1;
    }

    fn check_wolff(&self) -> Result<()> {
        if self.params.model != Model::Ising {
            return Err(Error::Unsupported("the Wolff update is implemented for Ising spins".into()));
        }
        if self.params.field != 0.0 {
            return Err(Error::Unsupported("the Wolff update needs zero field".into()));
        }
        if !matches!(
            self.config.lattice().boundary(),
            BoundaryCondition::Free | BoundaryCondition::Periodic
        ) {
            return Err(Error::Unsupported(
                "the Wolff update needs a free or periodic boundary; frozen boundary spins would be flipped with the cluster".into(),
            ));
        }
        Ok(())
    }

    /// Bond probability `1 - exp(-2/T)` used to grow Wolff clusters.
    pub fn wolff_bond_probability(&self) -> f64 {
        -(-2.0 * self.params.beta()).exp_m1()
    }

    /// Grows one cluster from a uniform seed site and flips it. Returns the
    /// cluster size.
    pub fn wolff_update(&mut self) -> Result<usize> {
        self.check_wolff()?;
        let lattice = self.config.lattice().clone();
        let p_add = self.wolff_bond_probability();
        let seed_site = self.rng.random_range(0..lattice.site_count());
        let s = self.config.get(seed_site);

        self.cluster.clear();
        self.stack.clear();
        self.in_cluster[seed_site] = true;
        self.cluster.push(seed_site);
        self.stack.push(seed_site);
        while let Some(x) = self.stack.pop() {
            for &n in lattice.neighbor_slice(x) {
                let n = n as usize;
                if !self.in_cluster[n] && self.config.get(n) == s && self.rng.random::<f64>() < p_add {
                    self.in_cluster[n] = true;
                    self.cluster.push(n);
                    self.stack.push(n);
                }
            }
        }

        let mut delta = 0i64;
        for &x in &self.cluster {
            for &n in lattice.neighbor_slice(x) {
                let n = n as usize;
                if !self.in_cluster[n] {
                    let t = self.config.get(n);
                    delta += pair_energy(-s, t) - pair_energy(s, t);
                }
            }
        }
        for &x in &self.cluster {
            self.config.set_unchecked(x, -s);
            self.in_cluster[x] = false;
        }
        let size = self.cluster.len();
        self.coupling += delta;
        self.field_mag -= 2 * i64::from(s) * size as i64;
        self.total_mag -= 2 * i64::from(s) * size as i64;
        self.proposed += 1;
        self.accepted += 1;
        self.sweeps += 1;
        Ok(size)
    }

    /// Sites of the most recent Wolff cluster.
    pub fn last_cluster(&self) -> &[usize] {
        &self.cluster
    }

    /// Proposes flipping every free Ising spin, accepted with probability
    /// `min(1, exp(-dE/T))`. Returns whether the flip happened.
    pub fn global_flip_move(&mut self) -> Result<bool> {
        if self.params.model != Model::Ising {
            return Err(Error::Unsupported("the global flip is defined for Ising spins".into()));
        }
        let lattice = self.config.lattice().clone();
        let mut flipped = self.config.clone();
        for &s in lattice.free_sites() {
            flipped.set_unchecked(s, -flipped.get(s));
        }
        let coupling = flipped.coupling_energy();
        let delta = (coupling - self.coupling) as f64 + 2.0 * self.params.field * self.field_mag as f64;
        let ok = delta <= 0.0
            || self.params.beta() == 0.0
            || self.rng.random::<f64>() < (-self.params.beta() * delta).exp();
        if ok {
            let free_sum = self.field_mag_all_free(&flipped);
            self.total_mag += free_sum;
            self.config = flipped;
            self.coupling = coupling;
            self.field_mag = -self.field_mag;
        }
        Ok(ok)
    }

    // change of the all-site spin sum caused by flipping the free sites
    fn field_mag_all_free(&self, flipped: &SpinConfig) -> i64 {
        self.config
            .lattice()
            .free_sites()
            .iter()
            .map(|&s| i64::from(flipped.get(s)) - i64::from(self.config.get(s)))
            .sum()
    }

    /// One step of the scheduled kernel.
    pub fn step(&mut self, schedule: &Schedule) -> Result<()> {
        match schedule.sampler {
            Sampler::Metropolis => self.metropolis_sweep(),
            Sampler::Wolff => {
                self.wolff_update()?;
            }
        }
        if schedule.global_flip && self.rng.random::<bool>() {
            self.global_flip_move()?;
        }
        Ok(())
    }

    pub fn measure(&self, observable: &Observable) -> f64 {
        let n = self.config.lattice().site_count() as f64;
        match observable {
            Observable::Magnetization | Observable::AbsMagnetization => match self.params.model {
                Model::Ising if *observable == Observable::Magnetization => self.total_mag as f64 / n,
                Model::Ising => self.total_mag.unsigned_abs() as f64 / n,
                Model::Potts { q } => {
                    let mut counts = vec![0usize; q as usize];
                    for &s in self.config.states() {
                        counts[(s - 1) as usize] += 1;
                    }
                    let max = *counts.iter().max().unwrap_or(&0) as f64 / n;
                    (f64::from(q) * max - 1.0) / (f64::from(q) - 1.0)
                }
            },
            Observable::Energy => self.energy() / n,
            Observable::Spin(v) => f64::from(self.config.get(*v)),
            Observable::Correlation(a, b) => f64::from(self.config.get(*a)) * f64::from(self.config.get(*b)),
            Observable::WindowMagnetization(w) => {
                w.iter().map(|&s| f64::from(self.config.get(s))).sum::<f64>() / w.len() as f64
            }
        }
    }

    /// Local field on `site` from its neighbours other than `skip`, plus `h`.
    fn local_field(&self, site: usize, skip: Option<usize>) -> f64 {
        let lattice = self.config.lattice();
        let sum: i64 = lattice
            .neighbor_slice(site)
            .iter()
            .map(|&u| u as usize)
            .filter(|&u| Some(u) != skip)
            .map(|u| i64::from(self.config.get(u)))
            .sum();
        sum as f64 + self.params.field
    }

    /// `E[observable | all other spins]` for spins and pair correlations.
    pub fn measure_conditional(&self, observable: &Observable) -> f64 {
        self.conditional_from(observable, |v| self.conditional_spin(v))
    }

    /// Fills `out` with `E[s(v) | all other spins]` for every site, for reuse
    /// across many observables of the same state.
    pub fn conditional_spins(&self, out: &mut Vec<f64>) {
        let n = self.config.lattice().site_count();
        out.clear();
        out.extend((0..n).map(|v| self.conditional_spin(v)));
    }

    /// As [`ChainState::measure_conditional`], with one-site values taken from
    /// [`ChainState::conditional_spins`].
    pub fn measure_conditional_cached(&self, observable: &Observable, spins: &[f64]) -> f64 {
        self.conditional_from(observable, |v| spins[v])
    }

    fn conditional_spin(&self, v: usize) -> f64 {
        if self.params.model != Model::Ising || self.config.lattice().is_frozen(v) {
            f64::from(self.config.get(v))
        } else {
            (self.params.beta() * self.local_field(v, None)).tanh()
        }
    }

    fn conditional_from(&self, observable: &Observable, one: impl Fn(usize) -> f64) -> f64 {
        if self.params.model != Model::Ising {
            return self.measure(observable);
        }
        let lattice = self.config.lattice();
        let beta = self.params.beta();
        match *observable {
            Observable::Spin(v) => one(v),
            Observable::Correlation(a, b) if a == b => 1.0,
            Observable::Correlation(a, b) => {
                let adjacent = lattice.neighbor_slice(a).contains(&(b as u32));
                if !adjacent || lattice.is_frozen(a) || lattice.is_frozen(b) {
                    return one(a) * one(b);
                }
                // joint weight exp(x s_a + y s_b + beta s_a s_b)
                let x = beta * self.local_field(a, Some(b));
                let y = beta * self.local_field(b, Some(a));
                (0.5 * (2.0 * beta + ln_cosh(x + y) - ln_cosh(x - y))).tanh()
            }
            _ => self.measure(observable),
        }
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

struct BatchAccumulator {
    batch_len: u64,
    batch_sums: Vec<f64>,
    sum: f64,
    sum_sq: f64,
    count: u64,
}

impl BatchAccumulator {
    fn new(batches: usize, batch_len: u64) -> Self {
        BatchAccumulator { batch_len, batch_sums: vec![0.0; batches], sum: 0.0, sum_sq: 0.0, count: 0 }
    }

    #[inline]
    fn push(&mut self, batch: usize, x: f64) {
        self.batch_sums[batch] += x;
        self.sum += x;
        self.sum_sq += x * x;
        self.count += 1;
    }

    fn finish(&self) -> (f64, f64, f64) {
        let n = self.count as f64;
        let b = self.batch_sums.len() as f64;
        let means: Vec<f64> = self.batch_sums.iter().map(|s| s / self.batch_len as f64).collect();
        let mean = means.iter().sum::<f64>() / b;
        let var_means = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1.0);
        let se = (var_means / b).sqrt();
        let overall = self.sum / n;
        let var = ((self.sum_sq / n) - overall * overall).max(0.0) * n / (n - 1.0).max(1.0);
        let ess = if se > 0.0 { (var / (se * se)).min(n) } else { n };
        (mean, se, ess)
    }
}

/// Runs the schedule and estimates every observable from the same chain.
pub fn estimate_many(
    state: &mut ChainState,
    observables: &[Observable],
    schedule: &Schedule,
) -> Result<Vec<Estimate>> {
    let lattice = state.config.lattice().clone();
    for o in observables {
        o.check(&lattice)?;
    }
    let names: Vec<String> = observables.iter().map(Observable::name).collect();
    let conditional = schedule.estimator == Estimator::Conditional;
    let mut spins = Vec::new();
    estimate_with(state, &names, schedule, |chain, out| {
        if conditional {
            chain.conditional_spins(&mut spins);
        }
        for (o, slot) in observables.iter().zip(out.iter_mut()) {
            *slot = if conditional { chain.measure_conditional_cached(o, &spins) } else { chain.measure(o) };
        }
    })
}

/// Runs the schedule, calling `measure` after every post-burn-in update to
/// fill one value per name, and returns batch-means estimates.
pub fn estimate_with<F>(state: &mut ChainState, names: &[String], schedule: &Schedule, mut measure: F) -> Result<Vec<Estimate>>
where
    F: FnMut(&ChainState, &mut [f64]),
{
    let measured = schedule.validate()?;
    if schedule.sampler == Sampler::Wolff {
        state.check_wolff()?;
    }
    let batch_len = measured / schedule.batches as u64;
    let extra = measured - batch_len * schedule.batches as u64;
    for _ in 0..schedule.burn_in + extra {
        state.step(schedule)?;
    }
    let mut acc: Vec<BatchAccumulator> =
        names.iter().map(|_| BatchAccumulator::new(schedule.batches, batch_len)).collect();
    let mut values = vec![0.0; names.len()];
    for batch in 0..schedule.batches {
        for _ in 0..batch_len {
            state.step(schedule)?;
            measure(state, &mut values);
            for (a, &x) in acc.iter_mut().zip(&values) {
                a.push(batch, x);
            }
        }
    }
    Ok(names
        .iter()
        .zip(&acc)
        .map(|(name, a)| {
            let (mean, std_error, ess) = a.finish();
            Estimate {
                observable: name.clone(),
                temperature: state.params.temperature,
                mean,
                std_error,
                ess,
                samples: a.count,
                n_sweeps: schedule.n_sweeps,
                seed: state.seed,
            }
        })
        .collect())
}

pub fn estimate(state: &mut ChainState, observable: &Observable, schedule: &Schedule) -> Result<Estimate> {
    Ok(estimate_many(state, std::slice::from_ref(observable), schedule)?.remove(0))
}

/// Integrated autocorrelation time with Sokal's self-consistent window.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0 = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c: f64 = series[..n - lag]
            .iter()
            .zip(&series[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Burn-in of ten integrated autocorrelation times of the energy, from a
/// pilot run of `pilot` steps on a copy of the chain.
pub fn auto_burn_in(state: &ChainState, schedule: &Schedule, pilot: u64) -> Result<u64> {
    let mut probe = state.clone();
    let mut series = Vec::with_capacity(pilot as usize);
    for _ in 0..pilot {
        probe.step(schedule)?;
        series.push(probe.energy());
    }
    Ok((10.0 * integrated_autocorrelation(&series)).ceil() as u64)
}

/// Estimates at one temperature of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub temperature: f64,
    pub seed: u64,
    pub estimates: Result<Vec<Estimate>>,
}

/// One independent chain per temperature; chain `i` is seeded with
/// `chain_seed(master_seed, i)`. Points come back in input order.
#[allow(clippy::too_many_arguments)]
pub fn temperature_sweep(
    lattice: Arc<Lattice>,
    model: Model,
    field: f64,
    temperatures: &[f64],
    observables: &[Observable],
    schedule: &Schedule,
    start: Start,
    master_seed: u64,
) -> Vec<SweepPoint> {
    temperatures
        .par_iter()
        .enumerate()
        .map(|(i, &temperature)| {
            let seed = chain_seed(master_seed, i as u64);
            let estimates = ModelParams::new(model, temperature, field)
                .and_then(|p| ChainState::start(lattice.clone(), p, start, seed))
                .and_then(|mut chain| estimate_many(&mut chain, observables, schedule));
            SweepPoint { temperature, seed, estimates }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate;

    fn lat(extents: &[usize], bc: BoundaryCondition) -> Arc<Lattice> {
        Arc::new(Lattice::new(extents.to_vec(), bc).unwrap())
    }

    fn chain(extents: &[usize], bc: BoundaryCondition, t: f64, seed: u64) -> ChainState {
        ChainState::start(lat(extents, bc), ModelParams::ising(t).unwrap(), Start::Random, seed).unwrap()
    }

    #[test]
    fn infinite_temperature_accepts_everything() {
        let mut c = chain(&[6, 6], BoundaryCondition::Free, f64::INFINITY, 1);
        for _ in 0..20 {
            c.metropolis_sweep();
        }
        assert_eq!(c.acceptance_rate(), 1.0);
        assert_eq!(c.wolff_bond_probability(), 0.0);
        for _ in 0..20 {
            assert_eq!(c.wolff_update().unwrap(), 1);
        }
    }

    #[test]
    fn acceptance_rule() {
        let c = chain(&[3, 3], BoundaryCondition::Free, 2.0, 1);
        assert_eq!(c.acceptance_probability(-4.0), 1.0);
        assert_eq!(c.acceptance_probability(0.0), 1.0);
        assert!((c.acceptance_probability(4.0) - 0.135_335_283_236_612_7).abs() < 1e-15);
    }

    #[test]
    fn cold_wolff_takes_whole_component() {
        let mut c = chain(&[8, 8], BoundaryCondition::Periodic, 0.01, 3);
        assert_eq!(c.wolff_bond_probability(), 1.0);
        let partition = crate::clusters::decompose(c.config());
        let size = c.wolff_update().unwrap();
        let label = partition.labels[c.last_cluster()[0]];
        assert_eq!(size, partition.sizes[label as usize]);
    }

    #[test]
    fn wolff_preconditions() {
        let mut c = chain(&[5, 5], BoundaryCondition::AllPlus, 2.0, 1);
        assert!(matches!(c.wolff_update(), Err(Error::Unsupported(_))));
        let p = ModelParams::new(Model::Ising, 2.0, 0.1).unwrap();
        let mut c = ChainState::start(lat(&[4, 4], BoundaryCondition::Free), p, Start::Cold, 1).unwrap();
        assert!(matches!(c.wolff_update(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn energy_cache_stays_exact() {
        let mut c = chain(&[7, 6], BoundaryCondition::Periodic, 2.3, 5);
        let mut d = chain(&[5, 5], BoundaryCondition::dobrushin_default(&[5, 5]), 1.5, 6);
        let p = ModelParams::new(Model::potts(3).unwrap(), 1.0, 0.0).unwrap();
        let mut potts = ChainState::start(lat(&[5, 5], BoundaryCondition::Periodic), p, Start::Random, 7).unwrap();
        let h = ModelParams::new(Model::Ising, 1.8, 0.4).unwrap();
        let mut field = ChainState::start(lat(&[5, 5], BoundaryCondition::AllMinus), h, Start::Random, 8).unwrap();
        for i in 0..3000 {
            c.metropolis_sweep();
            c.wolff_update().unwrap();
            if i % 7 == 0 {
                c.global_flip_move().unwrap();
                field.global_flip_move().unwrap();
            }
            d.metropolis_sweep();
            potts.metropolis_sweep();
            field.metropolis_sweep();
        }
        assert!(c.cache_is_consistent());
        assert!(d.cache_is_consistent());
        assert!(potts.cache_is_consistent());
        assert!(field.cache_is_consistent());
        assert!((field.energy() - field.config().energy(0.4)).abs() < 1e-9);
        // boundary pins survive
        let pinned = SpinConfig::from_states(d.config().lattice().clone(), Model::Ising, d.config().states().to_vec());
        assert!(pinned.is_ok());
    }

    #[test]
    fn same_seed_same_stream() {
        let schedule = Schedule::new(Sampler::Metropolis, 2000, 100);
        let obs = [Observable::Energy, Observable::Magnetization];
        let run = |seed| {
            let mut c = chain(&[6, 6], BoundaryCondition::Periodic, 2.5, seed);
            estimate_many(&mut c, &obs, &schedule).unwrap()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn schedule_validation() {
        let mut c = chain(&[4, 4], BoundaryCondition::Free, 2.0, 1);
        let too_few = Schedule::new(Sampler::Metropolis, 110, 100);
        assert!(estimate(&mut c, &Observable::Energy, &too_few).is_err());
        let inverted = Schedule::new(Sampler::Metropolis, 100, 100);
        assert!(estimate(&mut c, &Observable::Energy, &inverted).is_err());
        let small_batches = Schedule::new(Sampler::Metropolis, 1000, 100).with_batches(8);
        assert!(estimate(&mut c, &Observable::Energy, &small_batches).is_err());
        assert!(estimate(&mut c, &Observable::Spin(99), &Schedule::new(Sampler::Metropolis, 1000, 10)).is_err());
    }

    #[test]
    fn observable_names_round_trip() {
        for o in [
            Observable::Magnetization,
            Observable::AbsMagnetization,
            Observable::Energy,
            Observable::Spin(3),
            Observable::Correlation(1, 7),
            Observable::WindowMagnetization(vec![4, 5, 6]),
        ] {
            assert_eq!(Observable::parse(&o.name()).unwrap(), o);
        }
        assert!(Observable::parse("corr:1").is_err());
        assert!(Observable::parse("bogus").is_err());
    }

    #[test]
    fn free_boundary_magnetization_is_zero_within_errors() {
        let mut c = chain(&[4, 4], BoundaryCondition::Free, 3.0, 11);
        let e = estimate(&mut c, &Observable::Spin(5), &Schedule::new(Sampler::Metropolis, 40_000, 1000)).unwrap();
        assert!(e.mean.abs() < 3.0 * e.std_error, "{e:?}");
        assert!(e.ess <= e.samples as f64);
    }

    #[test]
    fn chain_pair_correlation_matches_tanh() {
        let beta: f64 = 0.3;
        let mut c = chain(&[12], BoundaryCondition::Free, 1.0 / beta, 13);
        let e = estimate(&mut c, &Observable::Correlation(5, 6), &Schedule::new(Sampler::Metropolis, 100_000, 1000))
            .unwrap();
        assert!((e.mean - beta.tanh()).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn wolff_and_metropolis_agree_with_enumeration() {
        let t = 2.27;
        let l = lat(&[3, 3], BoundaryCondition::Free);
        let exact = enumerate(l.clone(), ModelParams::ising(t).unwrap()).unwrap().correlation(&[4, 0]).unwrap();
        let obs = Observable::Correlation(4, 0);
        let mut m = ChainState::start(l.clone(), ModelParams::ising(t).unwrap(), Start::Cold, 21).unwrap();
        let em = estimate(&mut m, &obs, &Schedule::new(Sampler::Metropolis, 200_000, 1000)).unwrap();
        let mut w = ChainState::start(l, ModelParams::ising(t).unwrap(), Start::Cold, 22).unwrap();
        let ew = estimate(&mut w, &obs, &Schedule::new(Sampler::Wolff, 200_000, 1000)).unwrap();
        let combined = (em.std_error.powi(2) + ew.std_error.powi(2)).sqrt();
        assert!((em.mean - ew.mean).abs() < 3.0 * combined);
        assert!((em.mean - exact).abs() < 3.0 * em.std_error);
        assert!((ew.mean - exact).abs() < 3.0 * ew.std_error);
    }

    #[test]
    fn potts_chain_matches_enumeration_energy() {
        let model = Model::potts(3).unwrap();
        let params = ModelParams::new(model, 1.5, 0.0).unwrap();
        let l = lat(&[2, 3], BoundaryCondition::Free);
        let table = enumerate(l.clone(), params).unwrap();
        let exact = table.expectation_int(|s| {
            l.edges().iter().map(|&(a, b)| pair_energy(s[a], s[b])).sum()
        }) / 6.0;
        let mut c = ChainState::start(l, params, Start::Random, 4).unwrap();
        let e = estimate(&mut c, &Observable::Energy, &Schedule::new(Sampler::Metropolis, 200_000, 1000)).unwrap();
        assert!((e.mean - exact).abs() < 3.0 * e.std_error, "{e:?} vs {exact}");
    }

    #[test]
    fn sweeps_are_ordered_and_reproducible() {
        let l = lat(&[8, 8], BoundaryCondition::Periodic);
        let schedule = Schedule::new(Sampler::Wolff, 600, 100);
        let obs = [Observable::AbsMagnetization];
        let a = temperature_sweep(l.clone(), Model::Ising, 0.0, &[1.5, 3.5], &obs, &schedule, Start::Cold, 7);
        let b = temperature_sweep(l.clone(), Model::Ising, 0.0, &[1.5, 3.5], &obs, &schedule, Start::Cold, 7);
        assert_eq!(a.len(), 2);
        assert_ne!(a[0].seed, a[1].seed);
        let ea = a[0].estimates.as_ref().unwrap();
        assert_eq!(ea, b[0].estimates.as_ref().unwrap());
        assert!(ea[0].mean > a[1].estimates.as_ref().unwrap()[0].mean);
        assert!(temperature_sweep(l, Model::Ising, 0.0, &[], &obs, &schedule, Start::Cold, 7).is_empty());
    }

    #[test]
    fn conditional_expectations_match_brute_force() {
        let l = lat(&[4, 4], BoundaryCondition::AllPlus);
        let p = ModelParams::new(Model::Ising, 1.7, 0.3).unwrap();
        let mut c = ChainState::start(l.clone(), p, Start::Random, 9).unwrap();
        for _ in 0..5 {
            c.metropolis_sweep();
            for (a, b) in [(5, 6), (5, 10), (5, 1), (6, 9), (5, 5)] {
                // enumerate the states of a and b with the rest held fixed
                let mut num = 0.0;
                let mut den = 0.0;
                let free = |s: usize| !l.is_frozen(s);
                let va: Vec<i8> = if free(a) { vec![1, -1] } else { vec![c.config().get(a)] };
                let vb: Vec<i8> = if free(b) { vec![1, -1] } else { vec![c.config().get(b)] };
                for &x in &va {
                    for &y in &vb {
                        let mut cfg = c.config().clone();
                        cfg.set_unchecked(a, x);
                        cfg.set_unchecked(b, y);
                        let w = cfg.boltzmann_log_weight(&p).unwrap().exp();
                        num += w * f64::from(cfg.get(a) * cfg.get(b));
                        den += w;
                    }
                }
                let got = c.measure_conditional(&Observable::Correlation(a, b));
                assert!((got - num / den).abs() < 1e-12, "({a},{b}): {got} vs {}", num / den);
            }
            let mut spins = Vec::new();
            c.conditional_spins(&mut spins);
            for o in [Observable::Spin(5), Observable::Spin(0), Observable::Correlation(5, 6), Observable::Correlation(5, 10)] {
                assert_eq!(c.measure_conditional_cached(&o, &spins), c.measure_conditional(&o));
            }
        }
    }

    #[test]
    fn conditional_estimator_resolves_rare_flips() {
        let t = 0.5;
        let l = lat(&[3, 3], BoundaryCondition::AllPlus);
        let exact = enumerate(l.clone(), ModelParams::ising(t).unwrap()).unwrap().correlation(&[4]).unwrap();
        let schedule = Schedule::new(Sampler::Metropolis, 10_000, 100).with_estimator(Estimator::Conditional);
        let mut c = ChainState::start(l, ModelParams::ising(t).unwrap(), Start::Cold, 1).unwrap();
        let e = estimate(&mut c, &Observable::Spin(4), &schedule).unwrap();
        assert!((e.mean - exact).abs() < 1e-12);
        assert!((e.mean - 8f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn autocorrelation_of_white_noise_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let series: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!((integrated_autocorrelation(&series) - 1.0).abs() < 0.1);
        let c = chain(&[6, 6], BoundaryCondition::Periodic, 2.5, 2);
        assert!(auto_burn_in(&c, &Schedule::new(Sampler::Metropolis, 10, 0), 2000).unwrap() >= 10);
    }
}
