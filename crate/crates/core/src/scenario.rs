//! Network model and exact delay evaluation.
//!
//! Node indices are zero-based inside the library; the base station is always
//! the last node (`N - 1`). Configuration files and CLI output use one-based
//! ids. Sizes are megabits, bandwidths megabits per second and delays seconds.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Megabits per megabyte.
pub const MBIT_PER_MB: f64 = 8.0;

/// Relative slack allowed when checking capacity constraints.
pub const CAPACITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Content {
    /// One-based content id.
    pub id: usize,
    /// Size in megabits.
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// One-based node id.
    pub id: usize,
    /// Storage capacity in megabits.
    pub storage_capacity: f64,
    pub user_count: u32,
    /// Access bandwidth shared by every user of the node (Mbit/s).
    pub user_bandwidth: f64,
    pub is_bs: bool,
}

/// Undirected link bandwidths between nodes plus the BS backhaul.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    links: BTreeMap<(usize, usize), f64>,
    neighbors: Vec<Vec<usize>>,
    pub backhaul_bandwidth: f64,
}

impl Topology {
    /// Builds a topology from zero-based `(a, b, bandwidth)` triples.
    pub fn new(node_count: usize, links: &[(usize, usize, f64)], backhaul_bandwidth: f64) -> Result<Self> {
        if !(backhaul_bandwidth > 0.0) {
            return Err(Error::NonPositive { what: "backhaul bandwidth", value: backhaul_bandwidth });
        }
        let mut map = BTreeMap::new();
        let mut neighbors = vec![Vec::new(); node_count];
        for &(a, b, bw) in links {
            if a >= node_count || b >= node_count {
                return Err(Error::Config(format!("link ({}, {}) references an unknown node", a + 1, b + 1)));
            }
            if a == b {
                return Err(Error::Config(format!("self-link on node {}", a + 1)));
            }
            if !(bw > 0.0) {
                return Err(Error::NonPositive { what: "link bandwidth", value: bw });
            }
            let key = (a.min(b), a.max(b));
            if map.insert(key, bw).is_some() {
                return Err(Error::DuplicateLink(key.0 + 1, key.1 + 1));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self { links: map, neighbors, backhaul_bandwidth })
    }

    pub fn bandwidth(&self, n: usize, m: usize) -> Option<f64> {
        self.links.get(&(n.min(m), n.max(m))).copied()
    }

    /// Directly connected nodes, ascending.
    pub fn neighbors(&self, n: usize) -> &[usize] {
        &self.neighbors[n]
    }

    /// Links as zero-based `(a, b, bandwidth)` with `a < b`, in ascending order.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.links.iter().map(|(&(a, b), &bw)| (a, b, bw))
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }
}

/// Where a request is served from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Local,
    Neighbor(usize),
    Cloud,
}

/// A validated network instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<Node>,
    pub contents: Vec<Content>,
    pub topology: Topology,
    /// Row-normalized frequency-of-access matrix, `foa[n][i]`.
    pub foa: Vec<Vec<f64>>,
}

impl Scenario {
    pub fn new(nodes: Vec<Node>, contents: Vec<Content>, topology: Topology, foa: Vec<Vec<f64>>) -> Result<Self> {
        let n_nodes = nodes.len();
        if n_nodes < 2 {
            return Err(Error::Config("need at least one MEN and the base station".into()));
        }
        if contents.is_empty() {
            return Err(Error::Config("need at least one content".into()));
        }
        for (k, node) in nodes.iter().enumerate() {
            if node.id != k + 1 {
                return Err(Error::Config(format!("node ids must be contiguous from 1, got {} at position {}", node.id, k + 1)));
            }
            if node.is_bs != (k + 1 == n_nodes) {
                return Err(Error::Config("exactly the last node must be the base station".into()));
            }
            if !(node.storage_capacity >= 0.0) {
                return Err(Error::Config(format!("node {} has negative capacity", node.id)));
            }
            if node.user_count < 1 {
                return Err(Error::Config(format!("node {} must serve at least one user", node.id)));
            }
            if !(node.user_bandwidth > 0.0) {
                return Err(Error::NonPositive { what: "user bandwidth", value: node.user_bandwidth });
            }
        }
        for (k, content) in contents.iter().enumerate() {
            if content.id != k + 1 {
                return Err(Error::Config(format!("content ids must be contiguous from 1, got {}", content.id)));
            }
            if !(content.size > 0.0) {
                return Err(Error::NonPositive { what: "content size", value: content.size });
            }
        }
        if topology.neighbors.len() != n_nodes {
            return Err(Error::Dimension("topology node count differs from node list".into()));
        }
        let bs = n_nodes - 1;
        for n in 0..bs {
            if topology.bandwidth(n, bs).is_none() {
                return Err(Error::DisconnectedNode(n + 1));
            }
        }
        if foa.len() != n_nodes || foa.iter().any(|row| row.len() != contents.len()) {
            return Err(Error::Dimension(format!("FoA must be {}x{}", n_nodes, contents.len())));
        }
        for (n, row) in foa.iter().enumerate() {
            if row.iter().any(|&f| !(f >= 0.0) || !f.is_finite()) {
                return Err(Error::Config(format!("node {} has a negative FoA entry", n + 1)));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("FoA row of node {} sums to {sum}, expected 1", n + 1)));
            }
        }
        Ok(Self { nodes, contents, topology, foa })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn content_count(&self) -> usize {
        self.contents.len()
    }

    /// Zero-based index of the base station.
    pub fn bs(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn size(&self, i: usize) -> f64 {
        self.contents[i].size
    }

    pub fn capacity(&self, n: usize) -> f64 {
        self.nodes[n].storage_capacity
    }

    pub fn neighbors(&self, n: usize) -> &[usize] {
        self.topology.neighbors(n)
    }

    /// Request weight `f_n^i * U_n`.
    pub fn weight(&self, n: usize, i: usize) -> f64 {
        self.foa[n][i] * f64::from(self.nodes[n].user_count)
    }

    /// Access delay on the user link.
    pub fn d_alpha(&self, n: usize, i: usize) -> f64 {
        self.size(i) / self.nodes[n].user_bandwidth
    }

    /// Delay when the content comes from the content server.
    pub fn d_delta(&self, n: usize, i: usize) -> f64 {
        let node = &self.nodes[n];
        let bs_link = if node.is_bs { None } else { self.topology.bandwidth(n, self.bs()) };
        delay_case3(self.size(i), node.user_bandwidth, bs_link, self.topology.backhaul_bandwidth)
    }

    /// Transfer time of content `i` over the link `n`–`m`.
    pub fn transfer(&self, n: usize, m: usize, i: usize) -> Option<f64> {
        self.topology.bandwidth(n, m).map(|bw| self.size(i) / bw)
    }

    /// Delay of one request for content `i` by a user at node `n` under the
    /// cooperative model, with the serving source.
    pub fn request_delay(&self, placement: &Placement, n: usize, i: usize) -> (f64, Source) {
        self.request_delay_with(n, i, |m| placement.get(m, i))
    }

    /// As [`Scenario::request_delay`], with `has(m)` telling whether node `m`
    /// holds content `i`. The delay depends on nothing else.
    pub fn request_delay_with(&self, n: usize, i: usize, has: impl Fn(usize) -> bool) -> (f64, Source) {
        let alpha = self.d_alpha(n, i);
        if has(n) {
            return (alpha, Source::Local);
        }
        let mut best: Option<(f64, usize)> = None;
        for &m in self.neighbors(n) {
            if has(m) {
                let t = self.transfer(n, m, i).expect("neighbor has a link");
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, m));
                }
            }
        }
        match best {
            Some((t, m)) => (alpha + t, Source::Neighbor(m)),
            None => (self.d_delta(n, i), Source::Cloud),
        }
    }

    /// Weighted delay of all requests for content `i` across the network,
    /// given which nodes hold it.
    pub fn column_delay(&self, i: usize, has: impl Fn(usize) -> bool + Copy) -> f64 {
        (0..self.node_count()).map(|n| self.weight(n, i) * self.request_delay_with(n, i, has).0).sum()
    }

    /// Weighted delay of all requests at node `n` (cooperative model).
    pub fn node_delay(&self, placement: &Placement, n: usize) -> f64 {
        (0..self.content_count())
            .map(|i| self.weight(n, i) * self.request_delay(placement, n, i).0)
            .sum()
    }

    /// Per-node weighted delays (cooperative model).
    pub fn node_delays(&self, placement: &Placement) -> Vec<f64> {
        (0..self.node_count()).map(|n| self.node_delay(placement, n)).collect()
    }

    /// Total average delay of the network for a feasible placement.
    pub fn total_average_delay(&self, placement: &Placement) -> Result<f64> {
        self.check_placement(placement)?;
        Ok(self.node_delays(placement).iter().sum())
    }

    /// Capacity and shape check.
    pub fn check_placement(&self, placement: &Placement) -> Result<()> {
        if placement.node_count() != self.node_count() || placement.content_count() != self.content_count() {
            return Err(Error::Dimension(format!(
                "placement is {}x{}, scenario is {}x{}",
                placement.node_count(),
                placement.content_count(),
                self.node_count(),
                self.content_count()
            )));
        }
        for n in 0..self.node_count() {
            let load = placement.load(self, n);
            let cap = self.capacity(n);
            if load > cap * (1.0 + CAPACITY_EPS) + CAPACITY_EPS {
                return Err(Error::InfeasiblePlacement { node: n + 1, load, capacity: cap });
            }
        }
        Ok(())
    }

    /// True when `n` could additionally store content `i` without exceeding its capacity.
    pub fn fits(&self, placement: &Placement, n: usize, i: usize) -> bool {
        let load = placement.load(self, n) + self.size(i);
        load <= self.capacity(n) * (1.0 + CAPACITY_EPS) + CAPACITY_EPS
    }
}

/// Case 1: the requesting node has the content.
pub fn delay_case1(size: f64, user_bandwidth: f64) -> Result<f64> {
    if !(user_bandwidth > 0.0) {
        return Err(Error::ZeroBandwidth);
    }
    Ok(size / user_bandwidth)
}

/// A directly connected node as seen from a requester.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborLink {
    pub node: usize,
    pub cached: bool,
    pub bandwidth: f64,
}

/// Case 2: fetch from the caching neighbor with the fastest link. Ties go to
/// the lowest node id; non-caching neighbors are never chosen.
pub fn delay_case2(size: f64, user_bandwidth: f64, neighbors: &[NeighborLink]) -> Result<(f64, usize)> {
    let alpha = delay_case1(size, user_bandwidth)?;
    let mut best: Option<(f64, usize)> = None;
    for link in neighbors.iter().filter(|l| l.cached) {
        if !(link.bandwidth > 0.0) {
            return Err(Error::ZeroBandwidth);
        }
        let t = size / link.bandwidth;
        let better = match best {
            None => true,
            Some((bt, bn)) => t < bt || (t == bt && link.node < bn),
        };
        if better {
            best = Some((t, link.node));
        }
    }
    best.map(|(t, node)| (alpha + t, node)).ok_or(Error::NoCachingNeighbor)
}

/// Case 3: fetch from the content server through the BS. `bs_link` is the
/// requester's link to the BS, or `None` when the requester is the BS.
pub fn delay_case3(size: f64, user_bandwidth: f64, bs_link: Option<f64>, backhaul: f64) -> f64 {
    let hop = bs_link.map_or(0.0, |l| size / l);
    size / user_bandwidth + hop + size / backhaul
}

/// Binary cache matrix `x[n][i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    nodes: usize,
    contents: usize,
    bits: Vec<bool>,
}

impl Placement {
    pub fn empty(nodes: usize, contents: usize) -> Self {
        Self { nodes, contents, bits: vec![false; nodes * contents] }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let nodes = rows.len();
        let contents = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == contents), "ragged placement rows");
        Self { nodes, contents, bits: rows.concat() }
    }

    /// Builds from a 0/1 integer matrix, handy in tests.
    pub fn from_matrix(rows: &[&[u8]]) -> Self {
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|&v| v != 0).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn content_count(&self) -> usize {
        self.contents
    }

    pub fn get(&self, n: usize, i: usize) -> bool {
        self.bits[n * self.contents + i]
    }

    pub fn set(&mut self, n: usize, i: usize, value: bool) {
        self.bits[n * self.contents + i] = value;
    }

    pub fn row(&self, n: usize) -> &[bool] {
        &self.bits[n * self.contents..(n + 1) * self.contents]
    }

    pub fn set_row(&mut self, n: usize, row: &[bool]) {
        self.bits[n * self.contents..(n + 1) * self.contents].copy_from_slice(row);
    }

    /// Flattened row-major view.
    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    /// Stored megabits at node `n`.
    pub fn load(&self, scenario: &Scenario, n: usize) -> f64 {
        self.row(n)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| scenario.size(i))
            .sum()
    }

    pub fn cached_count(&self, n: usize) -> usize {
        self.row(n).iter().filter(|&&b| b).count()
    }

    /// Number of contents stored on at least one node.
    pub fn distinct_contents(&self) -> usize {
        (0..self.contents).filter(|&i| (0..self.nodes).any(|n| self.get(n, i))).count()
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in 0..self.nodes {
            let row: String = self.row(n).iter().map(|&b| if b { '1' } else { '0' }).collect();
            writeln!(f, "node {:>3}: {}", n + 1, row)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn case1_divides() {
        assert_abs_diff_eq!(delay_case1(800.0, 10.0).unwrap(), 80.0);
        assert_abs_diff_eq!(delay_case1(0.0, 10.0).unwrap(), 0.0);
        assert_abs_diff_eq!(delay_case1(2400.0, 10.0).unwrap(), 240.0);
        assert!(matches!(delay_case1(800.0, 0.0), Err(Error::ZeroBandwidth)));
    }

    fn link(node: usize, cached: bool, bandwidth: f64) -> NeighborLink {
        NeighborLink { node, cached, bandwidth }
    }

    #[test]
    fn case2_picks_fastest_caching_neighbor() {
        let (d, m) = delay_case2(800.0, 10.0, &[link(1, true, 45.0), link(2, false, 45.0)]).unwrap();
        assert_abs_diff_eq!(d, 80.0 + 800.0 / 45.0, epsilon = 1e-12);
        assert_eq!(m, 1);
        assert_abs_diff_eq!(d, 97.78, epsilon = 5e-3);

        let (d, m) = delay_case2(800.0, 10.0, &[link(1, true, 10.0), link(2, true, 45.0)]).unwrap();
        assert_abs_diff_eq!(d, 97.78, epsilon = 5e-3);
        assert_eq!(m, 2);

        let (_, m) = delay_case2(800.0, 10.0, &[link(3, true, 45.0), link(2, true, 45.0)]).unwrap();
        assert_eq!(m, 2, "ties go to the lowest node id");

        assert!(matches!(
            delay_case2(800.0, 10.0, &[link(1, false, 45.0)]),
            Err(Error::NoCachingNeighbor)
        ));
    }

    #[test]
    fn case3_paths() {
        assert_abs_diff_eq!(delay_case3(800.0, 10.0, Some(10.0), 60.0), 173.333, epsilon = 1e-3);
        assert_abs_diff_eq!(delay_case3(800.0, 10.0, None, 60.0), 93.333, epsilon = 1e-3);
        assert_abs_diff_eq!(delay_case3(800.0, 10.0, Some(45.0), 60.0), 111.111, epsilon = 1e-3);
    }

    #[test]
    fn topology_rejects_duplicates_and_bad_bandwidth() {
        assert!(matches!(
            Topology::new(3, &[(0, 2, 10.0), (2, 0, 10.0)], 60.0),
            Err(Error::DuplicateLink(1, 3))
        ));
        assert!(matches!(Topology::new(2, &[(0, 1, 0.0)], 60.0), Err(Error::NonPositive { .. })));
        assert!(matches!(Topology::new(2, &[(0, 1, 5.0)], -1.0), Err(Error::NonPositive { .. })));
        let t = Topology::new(3, &[(0, 2, 10.0), (1, 2, 10.0), (0, 1, 45.0)], 60.0).unwrap();
        assert_eq!(t.neighbors(2), &[0, 1]);
        assert_eq!(t.bandwidth(1, 0), Some(45.0));
    }
}
