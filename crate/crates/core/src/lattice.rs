//! Finite cubic boxes with nearest-neighbour edges and boundary handling.
//!
//! Sites are numbered in row-major (lexicographic) order: the last axis
//! varies fastest. A 2D lattice with extents `[rows, cols]` therefore lays
//! out like an image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary prescription on the outer layer of a box.
///
/// `Fixed`, `AllPlus`, `AllMinus` and `Dobrushin` freeze every boundary site;
/// only interior sites fluctuate. `Free` and `Periodic` freeze nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Free,
    Periodic,
    /// One state per boundary site, in the order of [`Lattice::boundary_sites`].
    Fixed(Vec<i8>),
    AllPlus,
    AllMinus,
    /// Plus on boundary sites whose coordinate along `axis` is `< below`,
    /// minus on the rest. The wall sits at `below - 1/2`.
    Dobrushin { axis: usize, below: usize },
}

impl BoundaryCondition {
    /// Dobrushin wall on the last axis at half height.
    pub fn dobrushin_default(extents: &[usize]) -> Self {
        let axis = extents.len().saturating_sub(1);
        let below = extents.get(axis).copied().unwrap_or(0) / 2;
        BoundaryCondition::Dobrushin { axis, below }
    }

    /// True when the boundary layer is frozen.
    pub fn is_fixed_type(&self) -> bool {
        !matches!(self, BoundaryCondition::Free | BoundaryCondition::Periodic)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BoundaryCondition::Free => "free",
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::Fixed(_) => "fixed",
            BoundaryCondition::AllPlus => "all_plus",
            BoundaryCondition::AllMinus => "all_minus",
            BoundaryCondition::Dobrushin { .. } => "dobrushin",
        }
    }
}

/// The value a frozen boundary site is pinned to, before it is mapped onto a
/// concrete model's state set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pin {
    Plus,
    Minus,
    State(i8),
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    extents: Vec<usize>,
    strides: Vec<usize>,
    boundary: BoundaryCondition,
    n_sites: usize,
    edges: Vec<(usize, usize)>,
    // CSR neighbour lists
    nbr_offsets: Vec<u32>,
    nbr_targets: Vec<u32>,
    // edge index of (site, site + e_axis), NONE if absent
    forward_edge: Vec<u32>,
    // position of a site inside `boundary_list`, NONE for interior sites
    boundary_ordinal: Vec<u32>,
    boundary_list: Vec<usize>,
    free_list: Vec<usize>,
}

impl Lattice {
    pub fn new(extents: Vec<usize>, boundary: BoundaryCondition) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        if let Some(axis) = extents.iter().position(|&e| e == 0) {
            return Err(Error::InvalidLattice(format!("axis {axis} has extent 0")));
        }
        let d = extents.len();
        let n_sites = extents
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .filter(|&n| n < NONE as usize)
            .ok_or_else(|| Error::InvalidLattice("too many sites".into()))?;

        let periodic = boundary == BoundaryCondition::Periodic;
        if periodic {
            if let Some((axis, &extent)) = extents.iter().enumerate().find(|(_, &e)| e < 3) {
                return Err(Error::PeriodicTooSmall { axis, extent });
            }
        }

        let mut strides = vec![1usize; d];
        for axis in (0..d.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * extents[axis + 1];
        }

        let mut lattice = Lattice {
            extents,
            strides,
            boundary,
            n_sites,
            edges: Vec::new(),
            nbr_offsets: Vec::new(),
            nbr_targets: Vec::new(),
            forward_edge: vec![NONE; n_sites * d],
            boundary_ordinal: vec![NONE; n_sites],
            boundary_list: Vec::new(),
            free_list: Vec::new(),
        };

        // edges, in canonical sorted order
        let mut raw = Vec::with_capacity(n_sites * d);
        let mut coords = vec![0usize; d];
        for site in 0..n_sites {
            lattice.fill_coords(site, &mut coords);
            for axis in 0..d {
                let e = lattice.extents[axis];
                let next = if coords[axis] + 1 < e {
                    Some(site + lattice.strides[axis])
                } else if periodic {
                    Some(site + lattice.strides[axis] - e * lattice.strides[axis])
                } else {
                    None
                };
                if let Some(other) = next {
                    raw.push(((site.min(other), site.max(other)), site, axis));
                }
            }
        }
        raw.sort_unstable_by_key(|&(pair, _, _)| pair);
        lattice.edges = raw.iter().map(|&(pair, _, _)| pair).collect();
        for (idx, &(_, site, axis)) in raw.iter().enumerate() {
            lattice.forward_edge[site * d + axis] = idx as u32;
        }

        let mut adjacency = vec![Vec::<u32>::new(); n_sites];
        for &(a, b) in &lattice.edges {
            adjacency[a].push(b as u32);
            adjacency[b].push(a as u32);
        }
        lattice.nbr_offsets.push(0);
        for list in &mut adjacency {
            list.sort_unstable();
            lattice.nbr_targets.extend_from_slice(list);
            lattice.nbr_offsets.push(lattice.nbr_targets.len() as u32);
        }

        if !periodic {
            for site in 0..n_sites {
                lattice.fill_coords(site, &mut coords);
                let on_boundary = coords
                    .iter()
                    .zip(&lattice.extents)
                    .any(|(&c, &e)| c == 0 || c + 1 == e);
                if on_boundary {
                    lattice.boundary_ordinal[site] = lattice.boundary_list.len() as u32;
                    lattice.boundary_list.push(site);
                }
            }
        }
        lattice.free_list = if lattice.boundary.is_fixed_type() {
            (0..n_sites)
                .filter(|&s| lattice.boundary_ordinal[s] == NONE)
                .collect()
        } else {
            (0..n_sites).collect()
        };

        lattice.validate_boundary()?;
        Ok(lattice)
    }

    fn validate_boundary(&self) -> Result<()> {
        match &self.boundary {
            BoundaryCondition::Fixed(pattern) if pattern.len() != self.boundary_list.len() => {
                Err(Error::InvalidLattice(format!(
                    "fixed pattern has {} states but the lattice has {} boundary sites",
                    pattern.len(),
                    self.boundary_list.len()
                )))
            }
            BoundaryCondition::Dobrushin { axis, below } => {
                let Some(&extent) = self.extents.get(*axis) else {
                    return Err(Error::InvalidLattice(format!(
                        "dobrushin axis {axis} exceeds dimension {}",
                        self.dim()
                    )));
                };
                if *below == 0 || *below >= extent {
                    return Err(Error::InvalidLattice(format!(
                        "dobrushin wall must leave both halves non-empty (below = {below}, extent = {extent})"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.boundary
    }

    pub fn site_count(&self) -> usize {
        self.n_sites
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = self.nbr_offsets[site] as usize;
        let hi = self.nbr_offsets[site + 1] as usize;
        self.nbr_targets[lo..hi].iter().map(|&s| s as usize)
    }

    #[inline]
    pub(crate) fn neighbor_slice(&self, site: usize) -> &[u32] {
        let lo = self.nbr_offsets[site] as usize;
        let hi = self.nbr_offsets[site + 1] as usize;
        &self.nbr_targets[lo..hi]
    }

    pub fn degree(&self, site: usize) -> usize {
        (self.nbr_offsets[site + 1] - self.nbr_offsets[site]) as usize
    }

    /// Index of the edge `(site, site + e_axis)`, if that edge exists.
    pub fn forward_edge(&self, site: usize, axis: usize) -> Option<usize> {
        let idx = self.forward_edge[site * self.dim() + axis];
        (idx != NONE).then_some(idx as usize)
    }

    /// Neighbour of `site` one step forward along `axis`, with wrapping on
    /// periodic lattices.
    pub fn step(&self, site: usize, axis: usize) -> Option<usize> {
        let c = (site / self.strides[axis]) % self.extents[axis];
        if c + 1 < self.extents[axis] {
            Some(site + self.strides[axis])
        } else if self.boundary == BoundaryCondition::Periodic {
            Some(site + self.strides[axis] - self.extents[axis] * self.strides[axis])
        } else {
            None
        }
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.fill_coords(site, &mut out);
        out
    }

    #[inline]
    pub fn coord(&self, site: usize, axis: usize) -> usize {
        (site / self.strides[axis]) % self.extents[axis]
    }

    fn fill_coords(&self, site: usize, out: &mut [usize]) {
        for (axis, slot) in out.iter_mut().enumerate() {
            *slot = (site / self.strides[axis]) % self.extents[axis];
        }
    }

    pub fn index(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.dim() {
            return None;
        }
        coords
            .iter()
            .zip(&self.extents)
            .zip(&self.strides)
            .try_fold(0, |acc, ((&c, &e), &s)| (c < e).then_some(acc + c * s))
    }

    /// All site coordinates in index order.
    pub fn sites(&self) -> Vec<Vec<usize>> {
        (0..self.n_sites).map(|s| self.coords(s)).collect()
    }

    /// Sites with some coordinate at `0` or `extent - 1`.
    pub fn boundary_sites(&self) -> Result<&[usize]> {
        if self.boundary == BoundaryCondition::Periodic {
            return Err(Error::NoBoundary);
        }
        Ok(&self.boundary_list)
    }

    pub fn is_interior(&self, site: usize) -> bool {
        self.boundary_ordinal[site] == NONE
    }

    /// Sites that fluctuate: all sites for free/periodic boundaries, the
    /// interior otherwise.
    pub fn free_sites(&self) -> &[usize] {
        &self.free_list
    }

    pub fn is_frozen(&self, site: usize) -> bool {
        self.boundary.is_fixed_type() && self.boundary_ordinal[site] != NONE
    }

    /// The pinned value of a frozen boundary site.
    pub fn pin(&self, site: usize) -> Option<Pin> {
        if !self.is_frozen(site) {
            return None;
        }
        Some(match &self.boundary {
            BoundaryCondition::Fixed(pattern) => {
                Pin::State(pattern[self.boundary_ordinal[site] as usize])
            }
            BoundaryCondition::AllPlus => Pin::Plus,
            BoundaryCondition::AllMinus => Pin::Minus,
            BoundaryCondition::Dobrushin { axis, below } => {
                if self.coord(site, *axis) < *below {
                    Pin::Plus
                } else {
                    Pin::Minus
                }
            }
            BoundaryCondition::Free | BoundaryCondition::Periodic => unreachable!(),
        })
    }

    /// The same box with a different boundary condition.
    pub fn with_boundary(&self, boundary: BoundaryCondition) -> Result<Lattice> {
        Lattice::new(self.extents.clone(), boundary)
    }

    /// Sites of the axis-aligned box `[origin, origin + size)`, in index
    /// order. Fails if the box leaves the lattice.
    pub fn window(&self, origin: &[usize], size: &[usize]) -> Result<Vec<usize>> {
        if origin.len() != self.dim() || size.len() != self.dim() {
            return Err(Error::InvalidArgument("window rank differs from lattice dimension".into()));
        }
        for axis in 0..self.dim() {
            if size[axis] == 0 || origin[axis] + size[axis] > self.extents[axis] {
                return Err(Error::InvalidArgument(format!(
                    "window does not fit along axis {axis}"
                )));
            }
        }
        Ok((0..self.n_sites)
            .filter(|&s| {
                (0..self.dim()).all(|a| {
                    let c = self.coord(s, a);
                    c >= origin[a] && c < origin[a] + size[a]
                })
            })
            .collect())
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            Err(Error::SiteOutOfRange { site, sites: self.n_sites })
        } else {
            Ok(())
        }
    }
}
