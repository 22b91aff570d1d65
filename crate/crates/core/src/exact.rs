//! Exhaustive enumeration of every configuration of the free sites.
//!
//! Configurations are visited in reflected Gray-code order, so each step
//! changes one site and the energy is updated from that site's edges only.
//! Every configuration is filed under its level `(coupling energy, field
//! magnetization)`; all configurations on a level have the same weight, so
//! queries accumulate per-level integer counts (or sums) and weight them at
//! the end. Counts are exact and merge in any order, which keeps results
//! bit-identical across thread counts.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, Lattice};
use crate::spin::{pair_energy, Model, ModelParams, SpinConfig};

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_CAP: u128 = 1 << 30;

const UNREALIZED: u32 = u32::MAX;
const MAX_WINDOW_PATTERNS: usize = 1 << 16;

/// One realized `(coupling energy, field magnetization)` level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub coupling_energy: i64,
    pub magnetization: i64,
    pub count: u64,
    /// Log probability of any single configuration on this level.
    pub log_prob: f64,
}

impl Level {
    pub fn energy(&self, field: f64) -> f64 {
        if field == 0.0 {
            self.coupling_energy as f64
        } else {
            self.coupling_energy as f64 - field * self.magnetization as f64
        }
    }

    pub fn config_probability(&self) -> f64 {
        self.log_prob.exp()
    }
}

/// Exact Gibbs measure of a small lattice.
#[derive(Debug, Clone)]
pub struct EnumerationTable {
    lattice: Arc<Lattice>,
    params: ModelParams,
    base: Vec<i8>,
    values: Vec<i8>,
    prefix_len: usize,
    n_edges: i64,
    n_free: i64,
    m_slots: usize,
    dense: Vec<u32>,
    levels: Vec<Level>,
    probs: Vec<f64>,
    // levels sharing a weight are summed before weighting
    group_of: Vec<u32>,
    group_probs: Vec<f64>,
    log_z: f64,
    configurations: u128,
}

/// Enumerates with the default cap of 2^30 configurations.
pub fn enumerate(lattice: Arc<Lattice>, params: ModelParams) -> Result<EnumerationTable> {
    enumerate_with_cap(lattice, params, DEFAULT_CAP)
}

pub fn enumerate_with_cap(
    lattice: Arc<Lattice>,
    params: ModelParams,
    cap: u128,
) -> Result<EnumerationTable> {
    params.validate()?;
    let model = params.model;
    let n_free = lattice.free_sites().len();
    let q = model.state_count() as u128;
    let required = (0..n_free).try_fold(1u128, |acc, _| acc.checked_mul(q)).unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }

    let values = model.states();
    let base = SpinConfig::uniform(lattice.clone(), model, values[0])?.states().to_vec();
    let n_edges = lattice.edge_count() as i64;
    let m_slots = if model == Model::Ising { 2 * n_free + 1 } else { 1 };
    let raw_levels = (2 * n_edges as usize + 1) * m_slots;

    // fixed chunking, independent of the thread pool
    let prefix_len = if n_free <= 12 {
        0
    } else {
        let mut k = 0;
        while k < n_free - 8 && q.pow(k as u32 + 1) <= 64 {
            k += 1;
        }
        k
    };

    let mut table = EnumerationTable {
        lattice,
        params,
        base,
        values,
        prefix_len,
        n_edges,
        n_free: n_free as i64,
        m_slots,
        dense: Vec::new(),
        levels: Vec::new(),
        probs: Vec::new(),
        group_of: Vec::new(),
        group_probs: Vec::new(),
        log_z: 0.0,
        configurations: required,
    };

    let raw_counts = table
        .walk_chunks(
            || vec![0u64; raw_levels],
            |acc, _states, raw| acc[raw] += 1,
        )
        .into_iter()
        .reduce(|mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        })
        .unwrap_or_else(|| vec![0; raw_levels]);

    table.dense = vec![UNREALIZED; raw_levels];
    for (raw, &count) in raw_counts.iter().enumerate() {
        if count > 0 {
            table.dense[raw] = table.levels.len() as u32;
            let e = (raw / m_slots) as i64 - n_edges;
            let m = if model == Model::Ising { (raw % m_slots) as i64 - n_free as i64 } else { 0 };
            table.levels.push(Level { coupling_energy: e, magnetization: m, count, log_prob: 0.0 });
        }
    }
    table.assign_weights();
    Ok(table)
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

impl EnumerationTable {
    fn assign_weights(&mut self) {
        let field = self.params.field;
        if self.params.is_zero_temperature() {
            let ground = self
                .levels
                .iter()
                .map(|l| l.energy(field))
                .fold(f64::INFINITY, f64::min);
            let tol = 1e-9 * (1.0 + ground.abs());
            let is_ground = |l: &Level| (l.energy(field) - ground).abs() <= tol;
            let degeneracy: u64 = self.levels.iter().filter(|l| is_ground(l)).map(|l| l.count).sum();
            let lp = -(degeneracy as f64).ln();
            for level in &mut self.levels {
                level.log_prob = if is_ground(level) { lp } else { f64::NEG_INFINITY };
            }
            self.log_z = (degeneracy as f64).ln();
        } else {
            let beta = self.params.beta();
            let log_w = |l: &Level| if beta == 0.0 { 0.0 } else { -beta * l.energy(field) };
            self.log_z = log_sum_exp(self.levels.iter().map(|l| (l.count as f64).ln() + log_w(l)));
            let log_z = self.log_z;
            for level in &mut self.levels {
                level.log_prob = log_w(level) - log_z;
            }
        }
        self.probs = self.levels.iter().map(|l| l.log_prob.exp()).collect();

        self.group_of.clear();
        self.group_probs.clear();
        let by_energy = field == 0.0 || self.params.beta() == 0.0;
        let mut keys: std::collections::HashMap<i64, u32> = std::collections::HashMap::new();
        for (i, level) in self.levels.iter().enumerate() {
            let key = if by_energy { level.coupling_energy } else { i as i64 };
            let next = keys.len() as u32;
            let g = *keys.entry(key).or_insert(next);
            if g == next {
                self.group_probs.push(self.probs[i]);
            }
            self.group_of.push(g);
        }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `ln Z`. At `T = 0` this is the log of the ground-state degeneracy.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Number of enumerated configurations.
    pub fn configurations(&self) -> u128 {
        self.configurations
    }

    pub fn free_site_count(&self) -> usize {
        self.n_free as usize
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// `sum over configurations of P(config)`; should be 1.
    pub fn normalization(&self) -> f64 {
        self.levels.iter().zip(&self.probs).map(|(l, p)| l.count as f64 * p).sum()
    }

    /// Per-level sums weighted by the level probabilities. Levels with a
    /// common weight are added first, so exact cancellations stay exact.
    fn weigh(&self, per_level: impl Iterator<Item = f64>) -> f64 {
        let mut grouped = vec![0.0f64; self.group_probs.len()];
        for (v, &g) in per_level.zip(&self.group_of) {
            grouped[g as usize] += v;
        }
        grouped
            .iter()
            .zip(&self.group_probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(v, p)| v * p)
            .sum()
    }

    /// Gibbs probability of a single configuration.
    pub fn probability(&self, config: &SpinConfig) -> Result<f64> {
        if config.lattice().as_ref() != self.lattice.as_ref() || config.model() != self.params.model {
            return Err(Error::InvalidArgument("configuration is for a different lattice".into()));
        }
        let e = config.coupling_energy();
        let m = if self.params.model == Model::Ising { config.field_magnetization() } else { 0 };
        let raw = self.raw_level(e, m);
        Ok(match self.dense[raw] {
            UNREALIZED => 0.0,
            d => self.probs[d as usize],
        })
    }

    #[inline(always)]
    fn raw_level(&self, e: i64, m: i64) -> usize {
        let m_idx = if self.m_slots == 1 { 0 } else { (m + self.n_free) as usize };
        (e + self.n_edges) as usize * self.m_slots + m_idx
    }

    /// Visits every configuration with its raw level index. The configuration
    /// space is split into `Q^prefix_len` chunks, processed in parallel and
    /// returned in chunk order.
    fn walk_chunks<A, I, V>(&self, init: I, visit: V) -> Vec<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        V: Fn(&mut A, &[i8], usize) + Sync,
    {
        let q = self.values.len();
        let chunks = q.pow(self.prefix_len as u32);
        (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut acc = init();
                self.walk_chunk(chunk, &mut acc, &visit);
                acc
            })
            .collect()
    }

    fn walk_chunk<A, V>(&self, chunk: usize, acc: &mut A, visit: &V)
    where
        V: Fn(&mut A, &[i8], usize),
    {
        let lattice = &*self.lattice;
        let free = lattice.free_sites();
        let q = self.values.len();
        let gray_len = free.len() - self.prefix_len;
        let mut states = self.base.clone();
        let mut rest = chunk;
        for &site in &free[gray_len..] {
            states[site] = self.values[rest % q];
            rest /= q;
        }

        let mut e: i64 = lattice.edges().iter().map(|&(a, b)| pair_energy(states[a], states[b])).sum();
        let ising = self.params.model == Model::Ising;
        let mut m: i64 = if ising { free.iter().map(|&s| i64::from(states[s])).sum() } else { 0 };

        let mut digits = vec![0usize; gray_len];
        let mut dirs = vec![true; gray_len];
        visit(acc, &states, self.raw_level(e, m));
        loop {
            let mut j = 0;
            while j < gray_len {
                let up = dirs[j];
                if (up && digits[j] + 1 < q) || (!up && digits[j] > 0) {
                    break;
                }
                dirs[j] = !up;
                j += 1;
            }
            if j == gray_len {
                break;
            }
            digits[j] = if dirs[j] { digits[j] + 1 } else { digits[j] - 1 };
            let site = free[j];
            let old = states[site];
            let new = self.values[digits[j]];
            for &n in lattice.neighbor_slice(site) {
                let s = states[n as usize];
                e += pair_energy(new, s) - pair_energy(old, s);
            }
            if ising {
                m += i64::from(new - old);
            }
            states[site] = new;
            visit(acc, &states, self.raw_level(e, m));
        }
    }

    /// Exact `<f>` for a real-valued function of the full state vector.
    pub fn expectation<F>(&self, f: F) -> f64
    where
        F: Fn(&[i8]) -> f64 + Sync,
    {
        let n = self.levels.len();
        let dense = &self.dense;
        let sums = self
            .walk_chunks(
                || vec![0.0f64; n],
                |acc, states, raw| acc[dense[raw] as usize] += f(states),
            )
            .into_iter()
            .fold(vec![0.0f64; n], |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            });
        self.weigh(sums.into_iter())
    }

    /// Exact `<f>` for an integer-valued function; sums are accumulated exactly.
    pub fn expectation_int<F>(&self, f: F) -> f64
    where
        F: Fn(&[i8]) -> i64 + Sync,
    {
        let n = self.levels.len();
        let dense = &self.dense;
        let sums = self
            .walk_chunks(
                || vec![0i64; n],
                |acc, states, raw| acc[dense[raw] as usize] += f(states),
            )
            .into_iter()
            .fold(vec![0i64; n], |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            });
        self.weigh(sums.into_iter().map(|s| s as f64))
    }

    /// Log probabilities of the classes `0..n_classes` assigned by `class`.
    pub fn class_log_probabilities<F>(&self, n_classes: usize, class: F) -> Vec<f64>
    where
        F: Fn(&[i8]) -> usize + Sync,
    {
        let n = self.levels.len();
        let dense = &self.dense;
        let counts = self
            .walk_chunks(
                || vec![0u64; n_classes * n],
                |acc, states, raw| acc[class(states) * n + dense[raw] as usize] += 1,
            )
            .into_iter()
            .reduce(|mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            })
            .unwrap_or_else(|| vec![0; n_classes * n]);
        counts
            .chunks(n)
            .map(|row| {
                log_sum_exp(
                    row.iter()
                        .zip(&self.levels)
                        .filter(|(&c, _)| c > 0)
                        .map(|(&c, l)| (c as f64).ln() + l.log_prob),
                )
            })
            .collect()
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        sites.iter().try_for_each(|&s| self.lattice.check_site(s))
    }

    /// Pattern index of the states on `window`, first site most significant.
    fn pattern_index(&self, states: &[i8], window: &[usize]) -> usize {
        let q = self.values.len();
        window.iter().fold(0, |acc, &s| acc * q + self.value_index(states[s]))
    }

    #[inline]
    fn value_index(&self, state: i8) -> usize {
        match self.params.model {
            Model::Ising => usize::from(state != 1),
            Model::Potts { .. } => (state - 1) as usize,
        }
    }

    /// The pattern with index `index` on a window of `len` sites.
    pub fn pattern_from_index(&self, index: usize, len: usize) -> Vec<i8> {
        let q = self.values.len();
        let mut out = vec![0i8; len];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = self.values[rest % q];
            rest /= q;
        }
        out
    }

    /// Probability of every pattern on `window`, indexed as in
    /// [`pattern_from_index`](Self::pattern_from_index).
    pub fn window_distribution(&self, window: &[usize]) -> Result<Vec<f64>> {
        self.window_log_distribution(window)
            .map(|v| v.into_iter().map(f64::exp).collect())
    }

    fn window_log_distribution(&self, window: &[usize]) -> Result<Vec<f64>> {
        self.check_sites(window)?;
        let n_patterns = (0..window.len())
            .try_fold(1usize, |acc, _| acc.checked_mul(self.values.len()))
            .filter(|&n| n <= MAX_WINDOW_PATTERNS)
            .ok_or_else(|| Error::InvalidArgument("window has too many patterns".into()))?;
        Ok(self.class_log_probabilities(n_patterns, |states| self.pattern_index(states, window)))
    }

    /// Probability that the configuration restricted to `window` equals `pattern`.
    pub fn window_marginal(&self, window: &[usize], pattern: &[i8]) -> Result<f64> {
        if window.len() != pattern.len() {
            return Err(Error::InvalidArgument(format!(
                "window has {} sites but the pattern has {} states",
                window.len(),
                pattern.len()
            )));
        }
        self.check_sites(window)?;
        if let Some(&bad) = pattern.iter().find(|&&s| !self.params.model.is_valid(s)) {
            return Err(Error::InvalidState { state: bad, model: self.params.model.to_string() });
        }
        Ok(self.expectation_int(|states| {
            i64::from(window.iter().zip(pattern).all(|(&s, &p)| states[s] == p))
        }))
    }

    /// `<s(v1) ... s(vn)>` for Ising spins.
    pub fn correlation(&self, sites: &[usize]) -> Result<f64> {
        if self.params.model != Model::Ising {
            return Err(Error::Unsupported("spin correlations are defined for Ising".into()));
        }
        if sites.is_empty() {
            return Err(Error::InvalidArgument("correlation needs at least one site".into()));
        }
        self.check_sites(sites)?;
        Ok(self.expectation_int(|states| sites.iter().map(|&s| i64::from(states[s])).product()))
    }

    /// All one-point functions and the symmetric matrix of two-point functions.
    pub fn one_and_two_point(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if self.params.model != Model::Ising {
            return Err(Error::Unsupported("spin correlations are defined for Ising".into()));
        }
        let n = self.lattice.site_count();
        let one: Vec<f64> = (0..n).map(|s| self.correlation(&[s])).collect::<Result<_>>()?;
        let mut two = vec![vec![1.0; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let c = self.correlation(&[a, b])?;
                two[a][b] = c;
                two[b][a] = c;
            }
        }
        Ok((one, two))
    }

    /// Checks the local equilibrium equations on every placement of a cubic
    /// window of side `window_size` whose interior consists of free sites.
    ///
    /// For two patterns agreeing on the window frame,
    /// `exp(E(p)/T) P(p) = exp(E(p')/T) P(p')`, where `E` counts the edges
    /// touching the window interior plus the field on the interior.
    pub fn verify_gibbs_equations(&self, window_size: usize) -> Result<GibbsReport> {
        let lattice = &*self.lattice;
        let d = lattice.dim();
        let size: Vec<usize> = lattice.extents().iter().map(|&e| window_size.min(e)).collect();
        if window_size == 0 {
            return Err(Error::InvalidArgument("window size must be positive".into()));
        }
        let mut report = GibbsReport { windows_checked: 0, classes_checked: 0, max_violation: 0.0 };

        let placements: Vec<Vec<usize>> = {
            let counts: Vec<usize> =
                lattice.extents().iter().zip(&size).map(|(&e, &s)| e - s + 1).collect();
            let total: usize = counts.iter().product();
            (0..total)
                .map(|mut i| {
                    let mut origin = vec![0; d];
                    for axis in (0..d).rev() {
                        origin[axis] = i % counts[axis];
                        i /= counts[axis];
                    }
                    origin
                })
                .collect()
        };

        for origin in placements {
            let window = lattice.window(&origin, &size)?;
            let interior: Vec<bool> = window
                .iter()
                .map(|&s| {
                    (0..d).all(|a| {
                        let c = lattice.coord(s, a);
                        c > origin[a] && c + 1 < origin[a] + size[a]
                    })
                })
                .collect();
            if !interior.iter().any(|&x| x) {
                continue;
            }
            if window.iter().zip(&interior).any(|(&s, &inner)| inner && lattice.is_frozen(s)) {
                continue;
            }
            let log_probs = self.window_log_distribution(&window)?;
            report.windows_checked += 1;

            let position: std::collections::HashMap<usize, usize> =
                window.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let local_edges: Vec<(usize, usize)> = lattice
                .edges()
                .iter()
                .filter_map(|&(a, b)| {
                    let (ia, ib) = (position.get(&a)?, position.get(&b)?);
                    (interior[*ia] || interior[*ib]).then_some((*ia, *ib))
                })
                .collect();
            let field = if self.params.model == Model::Ising { self.params.field } else { 0.0 };

            let mut classes: std::collections::BTreeMap<Vec<i8>, Vec<(f64, f64)>> =
                std::collections::BTreeMap::new();
            for (index, &lp) in log_probs.iter().enumerate() {
                let pattern = self.pattern_from_index(index, window.len());
                let mut energy: f64 =
                    local_edges.iter().map(|&(a, b)| pair_energy(pattern[a], pattern[b]) as f64).sum();
                if field != 0.0 {
                    energy -= field
                        * pattern
                            .iter()
                            .zip(&interior)
                            .filter(|(_, &inner)| inner)
                            .map(|(&s, _)| f64::from(s))
                            .sum::<f64>();
                }
                let frame: Vec<i8> = pattern
                    .iter()
                    .zip(&interior)
                    .map(|(&s, &inner)| if inner { 0 } else { s })
                    .collect();
                classes.entry(frame).or_default().push((energy, lp));
            }

            for members in classes.values() {
                if members.iter().all(|&(_, lp)| lp == f64::NEG_INFINITY) {
                    continue;
                }
                report.classes_checked += 1;
                let violation = if self.params.is_zero_temperature() {
                    zero_temperature_violation(members)
                } else {
                    let beta = self.params.beta();
                    let scaled = |(e, lp): (f64, f64)| if beta == 0.0 { lp } else { lp + beta * e };
                    let reference = scaled(members[0]);
                    members
                        .iter()
                        .map(|&m| {
                            let s = scaled(m);
                            if s == f64::NEG_INFINITY || reference == f64::NEG_INFINITY {
                                f64::INFINITY
                            } else {
                                (s - reference).exp_m1().abs()
                            }
                        })
                        .fold(0.0, f64::max)
                };
                report.max_violation = report.max_violation.max(violation);
            }
        }
        Ok(report)
    }

    /// `<s(v)><s(v')> <= <s(v)s(v')>`.
    pub fn verify_fkg(&self, v: usize, w: usize) -> Result<FkgCheck> {
        if self.params.model != Model::Ising {
            return Err(Error::Unsupported("the FKG check is for Ising spins".into()));
        }
        if self.params.field < 0.0 {
            return Err(Error::Unsupported("the FKG check needs h >= 0".into()));
        }
        if !matches!(
            self.lattice.boundary(),
            BoundaryCondition::Free | BoundaryCondition::AllPlus | BoundaryCondition::Periodic
        ) {
            return Err(Error::Unsupported(format!(
                "the FKG check needs a free, all-plus or periodic boundary, not {}",
                self.lattice.boundary().kind()
            )));
        }
        let lhs = self.correlation(&[v])? * self.correlation(&[w])?;
        let rhs = self.correlation(&[v, w])?;
        Ok(FkgCheck { lhs, rhs, holds: lhs <= rhs + 1e-12 })
    }

    /// Degeneracies of the coupling energy, summed over field magnetization.
    pub fn energy_histogram(&self) -> EnergyHistogram {
        let mut levels: Vec<(i64, u64)> = Vec::new();
        for level in &self.levels {
            match levels.iter_mut().find(|(e, _)| *e == level.coupling_energy) {
                Some((_, c)) => *c += level.count,
                None => levels.push((level.coupling_energy, level.count)),
            }
        }
        levels.sort_unstable();
        EnergyHistogram { volume: self.free_site_count().max(1), levels }
    }

    /// Probability of each coupling-energy level, ascending in energy.
    pub fn energy_distribution(&self) -> Vec<(i64, f64)> {
        let mut out: Vec<(i64, f64)> = Vec::new();
        for (level, p) in self.levels.iter().zip(&self.probs) {
            let mass = level.count as f64 * p;
            match out.iter_mut().find(|(e, _)| *e == level.coupling_energy) {
                Some((_, m)) => *m += mass,
                None => out.push((level.coupling_energy, mass)),
            }
        }
        out.sort_by_key(|&(e, _)| e);
        out
    }

    /// The most probable coupling-energy level; ties go to the lower energy.
    pub fn most_probable_energy(&self) -> i64 {
        argmax_lowest(self.energy_distribution().into_iter())
    }
}

fn zero_temperature_violation(members: &[(f64, f64)]) -> f64 {
    let min = members.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * (1.0 + min.abs());
    let reference = members
        .iter()
        .find(|m| (m.0 - min).abs() <= tol)
        .map(|m| m.1)
        .unwrap_or(f64::NEG_INFINITY);
    members
        .iter()
        .map(|&(e, lp)| {
            let minimal = (e - min).abs() <= tol;
            match (minimal, lp == f64::NEG_INFINITY) {
                (false, true) => 0.0,
                (false, false) => f64::INFINITY,
                (true, true) => f64::INFINITY,
                (true, false) if reference == f64::NEG_INFINITY => f64::INFINITY,
                (true, false) => (lp - reference).exp_m1().abs(),
            }
        })
        .fold(0.0, f64::max)
}

fn argmax_lowest(values: impl Iterator<Item = (i64, f64)>) -> i64 {
    let mut best: Option<(i64, f64)> = None;
    for (e, v) in values {
        match best {
            Some((be, bv)) if v < bv || (v == bv && e > be) => {}
            _ => best = Some((e, v)),
        }
    }
    best.map(|b| b.0).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsReport {
    pub windows_checked: usize,
    pub classes_checked: usize,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkgCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Number of configurations per coupling-energy level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyHistogram {
    /// Number of free sites, used to normalise energies and entropies.
    pub volume: usize,
    /// `(energy, count)`, ascending in energy.
    pub levels: Vec<(i64, u64)>,
}

impl EnergyHistogram {
    /// `ln(count) / V` at a level.
    pub fn entropy(&self, energy: i64) -> Option<f64> {
        self.levels
            .iter()
            .find(|(e, _)| *e == energy)
            .map(|&(_, c)| (c as f64).ln() / self.volume as f64)
    }

    /// `-E/V + T S(E)` per level. At `T = inf` the profile is `S(E)` (the
    /// functional divided by `T`).
    pub fn free_energy_profile(&self, temperature: f64) -> Vec<(i64, f64)> {
        let v = self.volume as f64;
        self.levels
            .iter()
            .map(|&(e, c)| {
                let s = (c as f64).ln() / v;
                let value = if temperature == f64::INFINITY {
                    s
                } else if temperature == 0.0 {
                    -(e as f64) / v
                } else {
                    -(e as f64) / v + temperature * s
                };
                (e, value)
            })
            .collect()
    }

    /// Level maximising the free-energy functional; ties go to lower energy.
    pub fn free_energy_argmax(&self, temperature: f64) -> i64 {
        argmax_lowest(self.free_energy_profile(temperature).into_iter())
    }

    pub fn total(&self) -> u64 {
        self.levels.iter().map(|l| l.1).sum()
    }
}

/// Where the free-boundary side of a mixture comparison came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeSide {
    Enumerated,
    /// Too large to enumerate; odd quantities are zero by the global flip.
    Symmetry,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureReport {
    pub free_side: FreeSide,
    pub free_window_magnetization: f64,
    pub plus_window_magnetization: f64,
    pub minus_window_magnetization: f64,
    pub mixture_window_magnetization: f64,
    /// `max |<s s'>_free - <s s'>_plus|` over window pairs.
    pub max_even_correlation_gap: Option<f64>,
    /// `max |P_free(p) - (P_plus(p) + P_minus(p)) / 2|` over window patterns.
    pub max_marginal_gap: Option<f64>,
}

/// Compares the free-boundary measure on `window` with the equal mixture of
/// the all-plus and all-minus measures on the same box, at zero field.
pub fn free_measure_vs_mixture(
    extents: &[usize],
    temperature: f64,
    window: &[usize],
) -> Result<MixtureReport> {
    let params = ModelParams::ising(temperature)?;
    if params.is_zero_temperature() {
        return Err(Error::ZeroTemperature);
    }
    let table_for = |bc: BoundaryCondition| -> Result<EnumerationTable> {
        enumerate(Arc::new(Lattice::new(extents.to_vec(), bc)?), params)
    };
    let plus = table_for(BoundaryCondition::AllPlus)?;
    let minus = table_for(BoundaryCondition::AllMinus)?;
    if window.is_empty() {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    plus.check_sites(window)?;

    let window_m = |t: &EnumerationTable| {
        t.expectation_int(|s| window.iter().map(|&v| i64::from(s[v])).sum()) / window.len() as f64
    };
    let plus_m = window_m(&plus);
    let minus_m = window_m(&minus);

    let free = match table_for(BoundaryCondition::Free) {
        Ok(t) => Some(t),
        Err(Error::EnumerationCap { .. }) => None,
        Err(e) => return Err(e),
    };

    let (free_side, free_m, corr_gap, marginal_gap) = match &free {
        None => (FreeSide::Symmetry, 0.0, None, None),
        Some(free) => {
            let mut corr_gap = 0.0f64;
            for (i, &a) in window.iter().enumerate() {
                for &b in &window[i + 1..] {
                    let gap = (free.correlation(&[a, b])? - plus.correlation(&[a, b])?).abs();
                    corr_gap = corr_gap.max(gap);
                }
            }
            let pf = free.window_distribution(window)?;
            let pp = plus.window_distribution(window)?;
            let pm = minus.window_distribution(window)?;
            let marginal_gap = pf
                .iter()
                .zip(pp.iter().zip(&pm))
                .map(|(f, (p, m))| (f - 0.5 * (p + m)).abs())
                .fold(0.0, f64::max);
            (FreeSide::Enumerated, window_m(free), Some(corr_gap), Some(marginal_gap))
        }
    };

    Ok(MixtureReport {
        free_side,
        free_window_magnetization: free_m,
        plus_window_magnetization: plus_m,
        minus_window_magnetization: minus_m,
        mixture_window_magnetization: 0.5 * (plus_m + minus_m),
        max_even_correlation_gap: corr_gap,
        max_marginal_gap: marginal_gap,
    })
}
