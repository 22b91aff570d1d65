//! Sign clusters, interfaces and their low-temperature weights.

use std::collections::BTreeMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{enumerate_with_cap, EnumerationTable, DEFAULT_CAP};
use crate::lattice::{BoundaryCondition, Lattice};
use crate::spin::{Model, ModelParams, SpinConfig};

/// Maximal connected sets of equal-state neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterPartition {
    /// Cluster of every site. Labels are numbered by smallest member site.
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
    pub states: Vec<i8>,
}

impl ClusterPartition {
    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn same_cluster(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    /// Sizes in decreasing order.
    pub fn sorted_sizes(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

pub fn decompose(config: &SpinConfig) -> ClusterPartition {
    decompose_states(config.lattice(), config.states())
}

fn decompose_states(lattice: &Lattice, states: &[i8]) -> ClusterPartition {
    let n = lattice.site_count();
    let mut uf = UnionFind::<u32>::new(n);
    for &(a, b) in lattice.edges() {
        if states[a] == states[b] {
            uf.union(a as u32, b as u32);
        }
    }
    let roots = uf.into_labeling();
    let mut relabel = vec![u32::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    let mut cluster_states = Vec::new();
    for site in 0..n {
        let root = roots[site] as usize;
        if relabel[root] == u32::MAX {
            relabel[root] = sizes.len() as u32;
            sizes.push(0);
            cluster_states.push(states[site]);
        }
        let label = relabel[root];
        sizes[label as usize] += 1;
        labels.push(label);
    }
    ClusterPartition { labels, sizes, states: cluster_states }
}

/// Lattice edges whose endpoints disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interface {
    /// Indices into [`Lattice::edges`], ascending.
    pub edges: Vec<usize>,
    pub area: usize,
    /// Components of the dual-edge set: two interface edges are joined when
    /// they lie on a common plaquette.
    pub components: Vec<Vec<usize>>,
}

impl Interface {
    /// `-|edges| + 2 Area`, the zero-field energy this interface implies.
    pub fn implied_energy(&self, lattice: &Lattice) -> i64 {
        2 * self.area as i64 - lattice.edge_count() as i64
    }

    pub fn component_of(&self, edge: usize) -> Option<usize> {
        self.components.iter().position(|c| c.binary_search(&edge).is_ok())
    }
}

fn require_ising(config: &SpinConfig) -> Result<()> {
    match config.model() {
        Model::Ising => Ok(()),
        m => Err(Error::Unsupported(format!("interfaces are defined for Ising spins, not {m}"))),
    }
}

/// The four edges of every unit plaquette, as edge indices.
fn plaquettes(lattice: &Lattice) -> Vec<[usize; 4]> {
    let d = lattice.dim();
    let mut out = Vec::new();
    for x in 0..lattice.site_count() {
        for a in 0..d {
            for b in a + 1..d {
                let (Some(xa), Some(xb)) = (lattice.step(x, a), lattice.step(x, b)) else { continue };
                let edges = [
                    lattice.forward_edge(x, a),
                    lattice.forward_edge(x, b),
                    lattice.forward_edge(xa, b),
                    lattice.forward_edge(xb, a),
                ];
                if let [Some(e0), Some(e1), Some(e2), Some(e3)] = edges {
                    out.push([e0, e1, e2, e3]);
                }
            }
        }
    }
    out
}

pub fn interface(config: &SpinConfig) -> Result<Interface> {
    require_ising(config)?;
    let lattice = config.lattice();
    let s = config.states();
    let disagree: Vec<bool> = lattice.edges().iter().map(|&(a, b)| s[a] != s[b]).collect();
    let edges: Vec<usize> = (0..disagree.len()).filter(|&e| disagree[e]).collect();

    let mut uf = UnionFind::<usize>::new(lattice.edge_count());
    for p in plaquettes(lattice) {
        let mut first = None;
        for e in p.into_iter().filter(|&e| disagree[e]) {
            match first {
                None => first = Some(e),
                Some(f) => {
                    uf.union(f, e);
                }
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &edges {
        by_root.entry(uf.find_mut(e)).or_default().push(e);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
    components.sort_by_key(|c| c[0]);
    Ok(Interface { area: edges.len(), edges, components })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeierlsCheck {
    pub delta_area: i64,
    pub delta_energy: f64,
    /// Gibbs weight of the perturbed configuration over that of the base.
    pub ratio: f64,
    /// `exp(-2 dArea / T)`.
    pub expected: f64,
}

impl PeierlsCheck {
    /// Energy change exactly `2 dArea`, weight ratio equal up to rounding of the log weights.
    pub fn exact(&self) -> bool {
        self.delta_energy == 2.0 * self.delta_area as f64 && (self.ratio / self.expected - 1.0).abs() <= 1e-12
    }
}

/// Compares the Gibbs weight ratio of two zero-field configurations with the
/// area penalty `exp(-2 dArea / T)`.
pub fn peierls_weight_check(base: &SpinConfig, perturbed: &SpinConfig, temperature: f64) -> Result<PeierlsCheck> {
    require_ising(base)?;
    require_ising(perturbed)?;
    let (lb, lp) = (base.lattice(), perturbed.lattice());
    if lb.extents() != lp.extents() || lb.boundary() != lp.boundary() {
        return Err(Error::InvalidArgument("configurations live on different lattices or boundaries".into()));
    }
    let params = ModelParams::ising(temperature)?;
    let delta_area = interface(perturbed)?.area as i64 - interface(base)?.area as i64;
    let delta_energy = perturbed.energy(0.0) - base.energy(0.0);
    let ratio = (perturbed.boltzmann_log_weight(&params)? - base.boltzmann_log_weight(&params)?).exp();
    let expected = (-2.0 * delta_area as f64 * params.beta()).exp();
    Ok(PeierlsCheck { delta_area, delta_energy, ratio, expected })
}

/// Number of configurations at each interface area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceCensus {
    pub free_sites: usize,
    pub counts: BTreeMap<usize, u64>,
}

impl InterfaceCensus {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `ln(count) / area` for each positive area, the effective growth rate.
    pub fn growth_rates(&self) -> Vec<(usize, f64)> {
        self.counts
            .iter()
            .filter(|(&a, _)| a > 0)
            .map(|(&a, &c)| (a, (c as f64).ln() / a as f64))
            .collect()
    }
}

/// Exact census of interface areas over all configurations of the free sites.
pub fn interface_census(lattice: Arc<Lattice>) -> Result<InterfaceCensus> {
    interface_census_with_cap(lattice, DEFAULT_CAP)
}

pub fn interface_census_with_cap(lattice: Arc<Lattice>, cap: u128) -> Result<InterfaceCensus> {
    let edges = lattice.edge_count() as i64;
    let table = enumerate_with_cap(lattice, ModelParams::ising(f64::INFINITY)?, cap)?;
    let histogram = table.energy_histogram();
    let counts = histogram
        .levels
        .iter()
        .map(|&(e, c)| (((e + edges) / 2) as usize, c))
        .collect();
    Ok(InterfaceCensus { free_sites: table.free_site_count(), counts })
}

/// The interface component selected by a Dobrushin boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DobrushinInterface {
    pub edges: Vec<usize>,
    pub area: usize,
    /// Whether a single component joins every boundary edge crossing the wall.
    pub spanning: bool,
    /// Largest distance of a wall-axis interface edge from the flat wall.
    pub fluctuation: usize,
    pub min_level: usize,
    pub max_level: usize,
}

/// In `d = 2`, the interface component joining the two boundary edges that
/// cross the wall, or `None` when no component joins them. In `d >= 3`, the
/// union of the components touching the wall perimeter.
pub fn dobrushin_interface(config: &SpinConfig) -> Result<Option<DobrushinInterface>> {
    require_ising(config)?;
    let lattice = config.lattice();
    let &BoundaryCondition::Dobrushin { axis, below } = lattice.boundary() else {
        return Err(Error::InvalidArgument(format!(
            "a Dobrushin boundary is required, got {}",
            lattice.boundary().kind()
        )));
    };
    if lattice.dim() < 2 {
        return Err(Error::Unsupported("Dobrushin interfaces need d >= 2".into()));
    }
    let iface = interface(config)?;
    let anchors: Vec<usize> = lattice
        .edges()
        .iter()
        .enumerate()
        .filter(|&(_, &(a, b))| {
            lattice.is_frozen(a)
                && lattice.is_frozen(b)
                && crossing_level(lattice, a, b, axis) == Some(below)
        })
        .map(|(e, _)| e)
        .collect();
    let mut touched: Vec<usize> = anchors.iter().filter_map(|&e| iface.component_of(e)).collect();
    touched.sort_unstable();
    touched.dedup();
    let spanning = touched.len() == 1;
    if lattice.dim() == 2 && !spanning {
        return Ok(None);
    }
    let mut edges: Vec<usize> = touched.iter().flat_map(|&c| iface.components[c].iter().copied()).collect();
    edges.sort_unstable();
    let levels: Vec<usize> = edges
        .iter()
        .filter_map(|&e| {
            let (a, b) = lattice.edges()[e];
            crossing_level(lattice, a, b, axis)
        })
        .collect();
    let min_level = levels.iter().copied().min().unwrap_or(below);
    let max_level = levels.iter().copied().max().unwrap_or(below);
    let fluctuation = (below - min_level.min(below)).max(max_level.max(below) - below);
    Ok(Some(DobrushinInterface { area: edges.len(), edges, spanning, fluctuation, min_level, max_level }))
}

// For an edge along `axis`, the coordinate of its upper endpoint.
fn crossing_level(lattice: &Lattice, a: usize, b: usize, axis: usize) -> Option<usize> {
    let same_elsewhere = (0..lattice.dim()).all(|k| k == axis || lattice.coord(a, k) == lattice.coord(b, k));
    same_elsewhere.then(|| lattice.coord(a, axis).max(lattice.coord(b, axis)))
}

/// How well the sign-cluster partition alone reproduces correlations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForgettingReport {
    pub pairs: usize,
    /// `max |<s s'> - sum_P Prob(P) parity_P(s, s')|`, where the parity is
    /// `(-1)^(number of cluster boundaries crossed)`.
    pub max_even_gap: f64,
    /// `max |<s>|` against the zero a symmetric sign resampling gives; only
    /// for free or periodic boundaries at zero field.
    pub max_odd_gap: Option<f64>,
    /// `max |<s s'> - Prob(same cluster)|`. Not expected to vanish: clusters
    /// of equal signs also carry sign information between clusters.
    pub max_same_cluster_gap: f64,
}

/// Sign of `s_v s_w` read from the partition: adjacent clusters carry
/// opposite Ising signs, so the product is the parity of the cluster-graph
/// distance.
pub fn partition_parity(lattice: &Lattice, partition: &ClusterPartition, v: usize, w: usize) -> Option<i8> {
    let k = partition.cluster_count();
    let mut adjacency = vec![Vec::new(); k];
    for &(a, b) in lattice.edges() {
        let (la, lb) = (partition.labels[a] as usize, partition.labels[b] as usize);
        if la != lb {
            adjacency[la].push(lb);
            adjacency[lb].push(la);
        }
    }
    let start = partition.labels[v] as usize;
    let goal = partition.labels[w] as usize;
    let mut depth = vec![usize::MAX; k];
    depth[start] = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        if c == goal {
            return Some(if depth[c] % 2 == 0 { 1 } else { -1 });
        }
        for &n in &adjacency[c] {
            if depth[n] == usize::MAX {
                depth[n] = depth[c] + 1;
                queue.push_back(n);
            }
        }
    }
    None
}

/// Checks by enumeration that even correlations are functions of the
/// cluster partition and that odd ones vanish under symmetric resampling.
pub fn cluster_forgetting_check(table: &EnumerationTable) -> Result<ForgettingReport> {
    if table.params().model != Model::Ising {
        return Err(Error::Unsupported("cluster forgetting is checked for Ising spins".into()));
    }
    let lattice = table.lattice().clone();
    let n = lattice.site_count();
    let symmetric = table.params().field == 0.0
        && matches!(lattice.boundary(), BoundaryCondition::Free | BoundaryCondition::Periodic);
    let mut max_even_gap: f64 = 0.0;
    let mut max_same_cluster_gap: f64 = 0.0;
    let mut max_odd_gap: f64 = 0.0;
    let mut pairs = 0;
    for v in 0..n {
        if symmetric {
            max_odd_gap = max_odd_gap.max(table.correlation(&[v])?.abs());
        }
        for w in v + 1..n {
            pairs += 1;
            let direct = table.correlation(&[v, w])?;
            let from_partition = table.expectation(|s| {
                let p = decompose_states(&lattice, s);
                f64::from(partition_parity(&lattice, &p, v, w).unwrap_or(0))
            });
            let same = table.expectation(|s| {
                let p = decompose_states(&lattice, s);
                if p.same_cluster(v, w) { 1.0 } else { 0.0 }
            });
            max_even_gap = max_even_gap.max((direct - from_partition).abs());
            max_same_cluster_gap = max_same_cluster_gap.max((direct - same).abs());
        }
    }
    Ok(ForgettingReport { pairs, max_even_gap, max_odd_gap: symmetric.then_some(max_odd_gap), max_same_cluster_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lat(extents: &[usize], bc: BoundaryCondition) -> Arc<Lattice> {
        Arc::new(Lattice::new(extents.to_vec(), bc).unwrap())
    }

    fn ising(l: &Arc<Lattice>, states: Vec<i8>) -> SpinConfig {
        SpinConfig::from_states(l.clone(), Model::Ising, states).unwrap()
    }

    fn figure_pattern() -> SpinConfig {
        let rows = ["+-+-+", "++++-", "--++-", "----+"];
        let states = rows.iter().flat_map(|r| r.chars().map(|c| if c == '+' { 1 } else { -1 })).collect();
        ising(&lat(&[4, 5], BoundaryCondition::Free), states)
    }

    #[test]
    fn printed_pattern_clusters() {
        // hand flood fill: the large plus region, the lower-left minus block,
        // the right-hand minus pair and four isolated sites
        let p = decompose(&figure_pattern());
        assert_eq!(p.cluster_count(), 7);
        assert_eq!(p.sorted_sizes(), vec![8, 6, 2, 1, 1, 1, 1]);
        assert_eq!(p.labels[0], 0);
        assert_eq!(p.states[0], 1);
        assert!(p.same_cluster(0, 13));
        assert!(p.same_cluster(9, 14));
        assert!(!p.same_cluster(1, 3));
    }

    #[test]
    fn uniform_and_checkerboard() {
        let l = lat(&[5, 6], BoundaryCondition::Free);
        let plus = SpinConfig::uniform(l.clone(), Model::Ising, 1).unwrap();
        assert_eq!(decompose(&plus).cluster_count(), 1);
        let i = interface(&plus).unwrap();
        assert_eq!(i.area, 0);
        assert_eq!(plus.coupling_energy(), -(l.edge_count() as i64));
        let board = ising(&l, (0..30).map(|s| if (s / 6 + s % 6) % 2 == 0 { 1 } else { -1 }).collect());
        let p = decompose(&board);
        assert_eq!(p.cluster_count(), 30);
        assert_eq!(interface(&board).unwrap().area, l.edge_count());
    }

    #[test]
    fn energy_area_identity_on_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (extents, bc) in [
            (vec![6, 7], BoundaryCondition::Free),
            (vec![5, 5], BoundaryCondition::Periodic),
            (vec![4, 4, 4], BoundaryCondition::AllPlus),
            (vec![6, 6], BoundaryCondition::dobrushin_default(&[6, 6])),
        ] {
            let l = lat(&extents, bc);
            for _ in 0..250 {
                let c = SpinConfig::random(l.clone(), Model::Ising, &mut rng).unwrap();
                let i = interface(&c).unwrap();
                assert_eq!(c.coupling_energy(), i.implied_energy(&l));
                // interface edges are exactly the edges between clusters
                let p = decompose(&c);
                for (e, &(a, b)) in l.edges().iter().enumerate() {
                    assert_eq!(i.edges.binary_search(&e).is_ok(), !p.same_cluster(a, b));
                }
                let total: usize = i.components.iter().map(Vec::len).sum();
                assert_eq!(total, i.area);
            }
        }
    }

    #[test]
    fn single_flip_costs_four_edges() {
        let l = lat(&[5, 5], BoundaryCondition::AllPlus);
        let base = SpinConfig::uniform(l.clone(), Model::Ising, 1).unwrap();
        let mut bump = base.clone();
        bump.set(12, -1).unwrap();
        let check = peierls_weight_check(&base, &bump, 1.3).unwrap();
        assert_eq!(check.delta_area, 4);
        assert!((check.ratio - (-8.0f64 / 1.3).exp()).abs() < 1e-15);
        assert!(check.exact());
        let same = peierls_weight_check(&base, &base, 1.3).unwrap();
        assert_eq!((same.delta_area, same.ratio), (0, 1.0));
        assert_eq!(interface(&bump).unwrap().components.len(), 1);
    }

    #[test]
    fn raised_block_adds_twenty() {
        // 2x3 block raised by two layers above a flat wall in d = 3
        let extents = [6, 6, 8];
        let l = lat(&extents, BoundaryCondition::dobrushin_default(&extents));
        let ground: Vec<i8> = (0..l.site_count()).map(|s| if l.coord(s, 2) < 4 { 1 } else { -1 }).collect();
        let base = ising(&l, ground.clone());
        let mut raised = ground;
        for x in 2..4 {
            for y in 2..5 {
                for z in 4..6 {
                    raised[l.index(&[x, y, z]).unwrap()] = 1;
                }
            }
        }
        let raised = ising(&l, raised);
        for t in [0.5, 1.0, 2.0] {
            let c = peierls_weight_check(&base, &raised, t).unwrap();
            assert_eq!(c.delta_area, 20);
            assert_eq!(c.ratio, (-40.0 / t).exp());
            assert!(c.exact());
        }
    }

    #[test]
    fn mismatched_lattices_rejected() {
        let a = SpinConfig::uniform(lat(&[3, 3], BoundaryCondition::Free), Model::Ising, 1).unwrap();
        let b = SpinConfig::uniform(lat(&[3, 3], BoundaryCondition::AllPlus), Model::Ising, 1).unwrap();
        assert!(peierls_weight_check(&a, &b, 1.0).is_err());
    }

    #[test]
    fn census_matches_brute_force() {
        let l = lat(&[5, 5], BoundaryCondition::AllPlus);
        let census = interface_census(l.clone()).unwrap();
        assert_eq!(census.free_sites, 9);
        assert_eq!(census.total(), 512);
        assert_eq!(census.counts[&0], 1);
        let mut brute: BTreeMap<usize, u64> = BTreeMap::new();
        let free = l.free_sites().to_vec();
        for mask in 0u32..512 {
            let mut states = vec![1i8; 25];
            for (i, &s) in free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    states[s] = -1;
                }
            }
            *brute.entry(interface(&ising(&l, states)).unwrap().area).or_default() += 1;
        }
        assert_eq!(census.counts, brute);
        // one flipped site: 4 edges, 9 ways
        assert_eq!(census.counts[&4], 9);
        assert!(census.growth_rates().iter().all(|&(_, r)| r >= 0.0));
    }

    #[test]
    fn flat_wall_is_minimal() {
        let extents = [6, 6];
        let l = lat(&extents, BoundaryCondition::dobrushin_default(&extents));
        let flat = ising(&l, (0..36).map(|s| if l.coord(s, 1) < 3 { 1 } else { -1 }).collect());
        assert_eq!(interface(&flat).unwrap().area, 6);
        let wall = dobrushin_interface(&flat).unwrap().unwrap();
        assert!(wall.spanning);
        assert_eq!((wall.area, wall.fluctuation), (6, 0));

        let l3 = lat(&[4, 4, 6], BoundaryCondition::dobrushin_default(&[4, 4, 6]));
        let flat3 = ising(&l3, (0..96).map(|s| if l3.coord(s, 2) < 3 { 1 } else { -1 }).collect());
        assert_eq!(interface(&flat3).unwrap().area, 16);
        assert_eq!(dobrushin_interface(&flat3).unwrap().unwrap().fluctuation, 0);
    }

    #[test]
    fn stepped_wall_fluctuates() {
        let extents = [6, 8];
        let l = lat(&extents, BoundaryCondition::dobrushin_default(&extents));
        let states = (0..48)
            .map(|s| {
                let (r, c) = (l.coord(s, 0), l.coord(s, 1));
                let level = if (2..4).contains(&r) { 6 } else { 4 };
                if c < level { 1 } else { -1 }
            })
            .collect();
        let wall = dobrushin_interface(&ising(&l, states)).unwrap().unwrap();
        assert!(wall.spanning);
        assert_eq!((wall.min_level, wall.max_level, wall.fluctuation), (4, 6, 2));
        assert_eq!(wall.area, 6 + 4);
    }

    #[test]
    fn minimizers_have_minimal_area() {
        let extents = [4, 5];
        let l = lat(&extents, BoundaryCondition::dobrushin_default(&extents));
        let table = crate::exact::enumerate(l.clone(), ModelParams::ising(0.0).unwrap()).unwrap();
        let min_area = extents[0] as f64;
        let mean_area = table.expectation(|s| interface(&ising(&l, s.to_vec())).unwrap().area as f64);
        assert!((mean_area - min_area).abs() < 1e-12);
    }

    #[test]
    fn dobrushin_required() {
        let c = SpinConfig::uniform(lat(&[4, 4], BoundaryCondition::AllPlus), Model::Ising, 1).unwrap();
        assert!(dobrushin_interface(&c).is_err());
        let d1 = lat(&[6], BoundaryCondition::dobrushin_default(&[6]));
        let c = SpinConfig::uniform(d1, Model::Ising, 1).unwrap();
        assert!(matches!(dobrushin_interface(&c), Err(Error::Unsupported(_))));
    }

    #[test]
    fn partition_determines_even_correlations() {
        for (extents, t) in [(vec![3, 3], 2.27), (vec![2, 4], 0.8), (vec![7], 1.5)] {
            let l = lat(&extents, BoundaryCondition::Free);
            let table = crate::exact::enumerate(l, ModelParams::ising(t).unwrap()).unwrap();
            let r = cluster_forgetting_check(&table).unwrap();
            assert!(r.max_even_gap < 1e-10, "{r:?}");
            assert!(r.max_odd_gap.unwrap() < 1e-10);
            // same-cluster probability alone is not the correlation
            assert!(r.max_same_cluster_gap > 1e-3);
        }
    }

    proptest! {
        #[test]
        fn parity_matches_spins(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = lat(&[5, 4], BoundaryCondition::Free);
            let c = SpinConfig::random(l.clone(), Model::Ising, &mut rng).unwrap();
            let p = decompose(&c);
            for v in 0..20 {
                for w in 0..20 {
                    prop_assert_eq!(partition_parity(&l, &p, v, w), Some(c.get(v) * c.get(w)));
                }
            }
        }

        #[test]
        fn labels_contiguous_and_ordered(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = lat(&[4, 6], BoundaryCondition::Periodic);
            let c = SpinConfig::random(l.clone(), Model::Ising, &mut rng).unwrap();
            let p = decompose(&c);
            let mut next = 0;
            for &label in &p.labels {
                prop_assert!(label <= next);
                if label == next { next += 1; }
            }
            prop_assert_eq!(next as usize, p.cluster_count());
            prop_assert_eq!(p.sizes.iter().sum::<usize>(), 24);
            for &(a, b) in l.edges() {
                prop_assert_eq!(p.same_cluster(a, b), c.get(a) == c.get(b));
            }
        }
    }
}
