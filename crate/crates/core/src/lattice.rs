//! Finite truncations of lattice domains `Ω ⊂ ℤ^d`.
//!
//! Balls are cubes in the max-norm throughout the crate. Every domain keeps
//! two boundary flags per site: `true_boundary` marks sites with a lattice
//! neighbour outside the untruncated `Ω` (where the Dirichlet condition is
//! exact) and `truncation` marks sites that lost a neighbour only because
//! the simulation box was cut off.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Lattice point; unused trailing coordinates are zero.
pub type Site = [i32; 3];

/// Default cap on the number of sites in a constructed domain.
pub const DEFAULT_SITE_BUDGET: usize = 5_000_000;

/// Generator that produced a domain, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// `{n : max_i |n_i| ≤ L}` inside `Ω = ℤ^d`.
    Box { dim: usize, half_width: usize },
    /// Width-one square spiral corridor in `ℤ²`.
    Spiral { turns: usize },
    /// `{1, …, length}` inside `Ω = ℤ⁺` (Dirichlet at 0).
    HalfLine { length: usize },
}

#[derive(Debug, Clone)]
pub struct LatticeDomain {
    kind: DomainKind,
    dim: usize,
    truncation_radius: usize,
    sites: Vec<Site>,
    lookup: BTreeMap<Site, usize>,
    nbr_start: Vec<usize>,
    nbrs: Vec<usize>,
    true_boundary: Vec<bool>,
    truncation: Vec<bool>,
}

/// Max-norm distance.
#[inline]
pub fn max_dist(a: &Site, b: &Site) -> u32 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

fn unit_steps(dim: usize) -> impl Iterator<Item = Site> {
    (0..dim).flat_map(|axis| {
        [-1, 1].into_iter().map(move |s| {
            let mut e = [0; 3];
            e[axis] = s;
            e
        })
    })
}

#[inline]
fn add(a: &Site, b: &Site) -> Site {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

impl LatticeDomain {
    pub fn build_box(dim: usize, half_width: usize) -> Result<Self> {
        Self::build_box_with_budget(dim, half_width, DEFAULT_SITE_BUDGET)
    }

    pub fn build_box_with_budget(dim: usize, half_width: usize, budget: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument("box dimension must be 1, 2 or 3"));
        }
        if half_width == 0 {
            return Err(Error::InvalidArgument("box half-width must be at least 1"));
        }
        let side = 2 * half_width as u128 + 1;
        let requested = side.pow(dim as u32);
        if requested > budget as u128 {
            return Err(Error::SiteBudget { requested, budget });
        }
        let l = half_width as i32;
        let n = requested as usize;
        let mut sites = Vec::with_capacity(n);
        let range = |active: bool| if active { -l..=l } else { 0..=0 };
        for x in range(true) {
            for y in range(dim >= 2) {
                for z in range(dim >= 3) {
                    sites.push([x, y, z]);
                }
            }
        }
        let truncation = sites.iter().map(|s| s.iter().any(|c| c.abs() == l)).collect();
        let true_boundary = vec![false; n];
        Ok(Self::from_sites(
            DomainKind::Box { dim, half_width },
            dim,
            half_width,
            sites,
            true_boundary,
            truncation,
            false,
        ))
    }

    /// Half-line `{1, …, length}`; site `n` has index `n - 1`.
    pub fn build_half_line(length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("half-line needs at least one site"));
        }
        if length > DEFAULT_SITE_BUDGET {
            return Err(Error::SiteBudget { requested: length as u128, budget: DEFAULT_SITE_BUDGET });
        }
        let sites: Vec<Site> = (1..=length as i32).map(|n| [n, 0, 0]).collect();
        let mut true_boundary = vec![false; length];
        let mut truncation = vec![false; length];
        true_boundary[0] = true;
        truncation[length - 1] = true;
        Ok(Self::from_sites(
            DomainKind::HalfLine { length },
            1,
            length,
            sites,
            true_boundary,
            truncation,
            false,
        ))
    }

    /// Square spiral corridor of width one separated by walls of width one,
    /// starting at the origin. Segment lengths run 2, 2, 4, 4, 6, 6, … with
    /// directions right, up, left, down; one turn is four segments, so
    /// `turns = k` gives `8k² + 4k + 1` sites.
    pub fn build_spiral(turns: usize) -> Result<Self> {
        if turns == 0 {
            return Err(Error::InvalidArgument("spiral needs at least one turn"));
        }
        let count = 8 * (turns as u128).pow(2) + 4 * turns as u128 + 1;
        if count > DEFAULT_SITE_BUDGET as u128 {
            return Err(Error::SiteBudget { requested: count, budget: DEFAULT_SITE_BUDGET });
        }
        let sites = spiral_path(turns);
        // one extra turn stands in for the infinite spiral
        let extended: BTreeMap<Site, usize> =
            spiral_path(turns + 1).into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        let own: BTreeMap<Site, usize> = sites.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut true_boundary = Vec::with_capacity(sites.len());
        let mut truncation = Vec::with_capacity(sites.len());
        for s in &sites {
            let mut wall = false;
            let mut cut = false;
            for e in unit_steps(2) {
                let nb = add(s, &e);
                match (extended.contains_key(&nb), own.contains_key(&nb)) {
                    (false, _) => wall = true,
                    (true, false) => cut = true,
                    _ => {}
                }
            }
            true_boundary.push(wall);
            truncation.push(cut);
        }
        // the next segment after the last turn starts at max-norm 2k
        let radius = 2 * turns - 1;
        Ok(Self::from_sites(DomainKind::Spiral { turns }, 2, radius, sites, true_boundary, truncation, true))
    }

    fn from_sites(
        kind: DomainKind,
        dim: usize,
        truncation_radius: usize,
        sites: Vec<Site>,
        true_boundary: Vec<bool>,
        truncation: Vec<bool>,
        needs_lookup: bool,
    ) -> Self {
        let lookup = if needs_lookup {
            sites.iter().enumerate().map(|(i, s)| (*s, i)).collect()
        } else {
            BTreeMap::new()
        };
        let mut dom = Self {
            kind,
            dim,
            truncation_radius,
            sites,
            lookup,
            nbr_start: Vec::new(),
            nbrs: Vec::new(),
            true_boundary,
            truncation,
        };
        let mut start = Vec::with_capacity(dom.sites.len() + 1);
        let mut nbrs = Vec::with_capacity(dom.sites.len() * 2 * dim);
        start.push(0);
        for s in &dom.sites {
            let mut row: Vec<usize> = unit_steps(dim).filter_map(|e| dom.index_of(&add(s, &e))).collect();
            row.sort_unstable();
            nbrs.extend_from_slice(&row);
            start.push(nbrs.len());
        }
        dom.nbr_start = start;
        dom.nbrs = nbrs;
        dom
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// The simulation box half-width `L`: every cube `C_R` about the origin
    /// with `R ≤ L` is represented without truncation loss.
    pub fn truncation_radius(&self) -> usize {
        self.truncation_radius
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, index: usize) -> Site {
        self.sites[index]
    }

    pub fn index_of(&self, site: &Site) -> Option<usize> {
        match self.kind {
            DomainKind::Box { dim, half_width } => {
                let l = half_width as i32;
                if site.iter().skip(dim).any(|&c| c != 0) || site.iter().take(dim).any(|c| c.abs() > l) {
                    return None;
                }
                let side = 2 * half_width + 1;
                let mut idx = 0usize;
                for &c in site.iter().take(dim) {
                    idx = idx * side + (c + l) as usize;
                }
                Some(idx)
            }
            DomainKind::HalfLine { length } => {
                let n = site[0];
                (site[1] == 0 && site[2] == 0 && n >= 1 && n as usize <= length).then(|| n as usize - 1)
            }
            DomainKind::Spiral { .. } => self.lookup.get(site).copied(),
        }
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.nbrs[self.nbr_start[index]..self.nbr_start[index + 1]]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.nbr_start[index + 1] - self.nbr_start[index]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| self.neighbors(i).iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.nbrs.len() / 2
    }

    pub fn is_true_boundary(&self, index: usize) -> bool {
        self.true_boundary[index]
    }

    pub fn is_truncation(&self, index: usize) -> bool {
        self.truncation[index]
    }

    /// Indices of the sites in the cube `C_R` about `center`, ascending.
    pub fn sites_in_ball(&self, radius: f64, center: &Site) -> Result<Vec<usize>> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument("ball radius must be non-negative"));
        }
        if radius > self.truncation_radius as f64 {
            return Err(Error::RadiusTooLarge { radius, limit: self.truncation_radius });
        }
        let r = radius as u32;
        Ok((0..self.len()).filter(|&i| max_dist(&self.sites[i], center) <= r).collect())
    }

    /// Max-norm distance of every site from `center`.
    pub fn distances_from(&self, center: &Site) -> Vec<u32> {
        self.sites.iter().map(|s| max_dist(s, center)).collect()
    }

    /// Smallest max-norm distance from `center` to a truncation-flagged site.
    pub fn distance_to_truncation(&self, center: &Site) -> Option<u32> {
        (0..self.len()).filter(|&i| self.truncation[i]).map(|i| max_dist(&self.sites[i], center)).min()
    }

    /// Chain order of a path-shaped domain, starting from the endpoint
    /// closest to the origin. For a spiral this is the corridor read from
    /// the inside out.
    pub fn unroll_spiral(&self) -> Result<Vec<usize>> {
        let n = self.len();
        if n == 1 {
            return Ok(vec![0]);
        }
        if self.edge_count() != n - 1 || (0..n).any(|i| self.degree(i) == 0 || self.degree(i) > 2) {
            return Err(Error::NotAPath);
        }
        let origin = [0; 3];
        let start = (0..n)
            .filter(|&i| self.degree(i) == 1)
            .min_by_key(|&i| (max_dist(&self.sites[i], &origin), i))
            .ok_or(Error::NotAPath)?;
        let mut order = Vec::with_capacity(n);
        let mut visited = vec![false; n];
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            if visited[cur] {
                return Err(Error::NotAPath);
            }
            visited[cur] = true;
            order.push(cur);
            match self.neighbors(cur).iter().copied().find(|&j| j != prev) {
                Some(next) if order.len() < n => {
                    prev = cur;
                    cur = next;
                }
                _ => break,
            }
        }
        if order.len() != n {
            return Err(Error::NotAPath);
        }
        Ok(order)
    }
}

fn spiral_path(turns: usize) -> Vec<Site> {
    const DIRS: [[i32; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];
    let mut path = Vec::with_capacity(8 * turns * turns + 4 * turns + 1);
    let (mut x, mut y) = (0i32, 0i32);
    path.push([x, y, 0]);
    for seg in 0..4 * turns {
        let len = 2 * (seg / 2 + 1);
        let [dx, dy] = DIRS[seg % 4];
        for _ in 0..len {
            x += dx;
            y += dy;
            path.push([x, y, 0]);
        }
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_counts() {
        let d = LatticeDomain::build_box(1, 2).unwrap();
        assert_eq!((d.len(), d.edge_count()), (5, 4));
        let d = LatticeDomain::build_box(2, 1).unwrap();
        assert_eq!((d.len(), d.edge_count()), (9, 12));
        let d = LatticeDomain::build_box(2, 100).unwrap();
        assert_eq!(d.len(), 201 * 201);
        assert!((0..d.len()).all(|i| !d.is_true_boundary(i)));
        let shell = (0..d.len()).filter(|&i| d.is_truncation(i)).count();
        assert_eq!(shell, 201 * 201 - 199 * 199);
    }

    #[test]
    fn box_rejects_bad_arguments() {
        assert!(matches!(LatticeDomain::build_box(4, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(LatticeDomain::build_box(1, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(LatticeDomain::build_box(3, 1000), Err(Error::SiteBudget { .. })));
    }

    #[test]
    fn index_map_is_a_bijection() {
        for d in [
            LatticeDomain::build_box(3, 3).unwrap(),
            LatticeDomain::build_spiral(3).unwrap(),
            LatticeDomain::build_half_line(17).unwrap(),
        ] {
            for (i, s) in d.sites().iter().enumerate() {
                assert_eq!(d.index_of(s), Some(i));
            }
        }
    }

    #[test]
    fn spiral_is_a_path_with_expected_length() {
        for k in 1..=10 {
            let d = LatticeDomain::build_spiral(k).unwrap();
            assert_eq!(d.len(), 8 * k * k + 4 * k + 1);
            let ends = (0..d.len()).filter(|&i| d.degree(i) == 1).count();
            assert_eq!(ends, 2);
            assert!((0..d.len()).all(|i| d.degree(i) <= 2));
            assert_eq!(d.edge_count(), d.len() - 1);
        }
    }

    #[test]
    fn spiral_unrolls_from_origin() {
        let d = LatticeDomain::build_spiral(1).unwrap();
        let order = d.unroll_spiral().unwrap();
        assert_eq!(d.site(order[0]), [0, 0, 0]);
        for w in order.windows(2) {
            assert_eq!(max_dist(&d.site(w[0]), &d.site(w[1])), 1);
        }
    }

    #[test]
    fn spiral_flags() {
        let d = LatticeDomain::build_spiral(2).unwrap();
        let order = d.unroll_spiral().unwrap();
        // only the outer end is cut off
        let cut: Vec<usize> = (0..d.len()).filter(|&i| d.is_truncation(i)).collect();
        assert_eq!(cut, vec![*order.last().unwrap()]);
        assert!((0..d.len()).all(|i| d.is_true_boundary(i)));
    }

    #[test]
    fn box_is_not_a_path() {
        let d = LatticeDomain::build_box(2, 2).unwrap();
        assert_eq!(d.unroll_spiral(), Err(Error::NotAPath));
    }

    #[test]
    fn cube_membership() {
        let d = LatticeDomain::build_box(1, 10).unwrap();
        assert_eq!(d.sites_in_ball(3.0, &[0; 3]).unwrap().len(), 7);
        let d = LatticeDomain::build_box(2, 10).unwrap();
        assert_eq!(d.sites_in_ball(2.0, &[0; 3]).unwrap().len(), 25);
        assert!(matches!(d.sites_in_ball(10.5, &[0; 3]), Err(Error::RadiusTooLarge { .. })));
    }
}
