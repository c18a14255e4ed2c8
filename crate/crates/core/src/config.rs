//! Scenario configuration files and the seeded scenario generator.
//!
//! A config is a TOML document:
//!
//! ```toml
//! seed = 42
//! backhaul_mbps = 60.0
//!
//! [[nodes]]          # one entry per node; the last one is the BS
//! capacity_mb = 600.0
//! users = 5
//! user_mbps = 10.0
//!
//! [[links]]          # undirected, one-based node ids
//! a = 1
//! b = 2
//! mbps = 10.0
//!
//! [contents]
//! count = 30
//! size_min_mb = 50.0 # sizes drawn uniformly from the seed,
//! size_max_mb = 200.0 # or listed explicitly as `sizes_mb = [...]`
//!
//! [foa]
//! rule = "zipf"      # or "explicit" with `matrix = [[...], ...]`
//! shape = 0.1
//! shuffle = true
//! ```
//!
//! An optional `[solver]` table carries branch-and-bound and interior-point
//! settings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::popularity::zipf_foa;
use crate::scenario::{Content, Node, Scenario, Topology, MBIT_PER_MB};

const SIZE_STREAM: u64 = 0x51;
const TOPOLOGY_STREAM: u64 = 0x70;

/// Megabytes per gigabyte used by capacity axes.
pub const MB_PER_GB: f64 = 1000.0;

fn default_backhaul() -> f64 {
    60.0
}
fn default_users() -> u32 {
    5
}
fn default_user_mbps() -> f64 {
    10.0
}
fn default_shape() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    #[serde(default = "default_backhaul")]
    pub backhaul_mbps: f64,
    pub nodes: Vec<NodeConfig>,
    #[serde(default)]
    pub links: Vec<LinkConfig>,
    pub contents: ContentsConfig,
    #[serde(default)]
    pub foa: FoaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub capacity_mb: f64,
    #[serde(default = "default_users")]
    pub users: u32,
    #[serde(default = "default_user_mbps")]
    pub user_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub a: usize,
    pub b: usize,
    pub mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentsConfig {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes_mb: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_min_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_max_mb: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoaRule {
    Zipf,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoaConfig {
    pub rule: FoaRule,
    #[serde(default = "default_shape")]
    pub shape: f64,
    #[serde(default = "default_true")]
    pub shuffle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl Default for FoaConfig {
    fn default() -> Self {
        Self { rule: FoaRule::Zipf, shape: default_shape(), shuffle: true, matrix: None }
    }
}

/// Solver settings. Every field is optional in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub eta: f64,
    pub eta_mode: String,
    pub tau: f64,
    pub branching_rule: String,
    pub max_nodes: u64,
    pub seed: u64,
    pub kkt_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub gamma0: f64,
    pub gamma_factor: f64,
    pub max_outer: usize,
    pub max_cg: usize,
    pub multistarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eta: 0.01,
            eta_mode: "relative".into(),
            tau: 1e-4,
            branching_rule: "most_fractional".into(),
            max_nodes: 50_000,
            seed: 0,
            kkt_tolerance: 1e-8,
            feasibility_tolerance: 1e-8,
            gamma0: 0.1,
            gamma_factor: 0.2,
            max_outer: 100,
            max_cg: 200,
            multistarts: 3,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// Validates the config and draws every random quantity from `seed`.
    pub fn build(&self) -> Result<Scenario> {
        build_scenario(self)
    }
}

/// Turns a config into a validated scenario.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    let n_nodes = config.nodes.len();
    if n_nodes < 2 {
        return Err(Error::Config("need at least one MEN and the base station".into()));
    }
    let nodes: Vec<Node> = config
        .nodes
        .iter()
        .enumerate()
        .map(|(k, nc)| Node {
            id: k + 1,
            storage_capacity: nc.capacity_mb * MBIT_PER_MB,
            user_count: nc.users,
            user_bandwidth: nc.user_mbps,
            is_bs: k + 1 == n_nodes,
        })
        .collect();

    let mut links = Vec::with_capacity(config.links.len());
    for l in &config.links {
        if l.a == 0 || l.b == 0 || l.a > n_nodes || l.b > n_nodes {
            return Err(Error::Config(format!("link ({}, {}) references an unknown node", l.a, l.b)));
        }
        links.push((l.a - 1, l.b - 1, l.mbps));
    }
    let topology = Topology::new(n_nodes, &links, config.backhaul_mbps)?;

    let count = config.contents.count;
    if count == 0 {
        return Err(Error::Config("content count must be positive".into()));
    }
    let sizes_mb = match (&config.contents.sizes_mb, config.contents.size_min_mb, config.contents.size_max_mb) {
        (Some(sizes), _, _) => {
            if sizes.len() != count {
                return Err(Error::Config(format!("sizes_mb has {} entries, count is {count}", sizes.len())));
            }
            sizes.clone()
        }
        (None, Some(lo), Some(hi)) => {
            if !(lo > 0.0) || !(hi >= lo) {
                return Err(Error::Config(format!("bad size range [{lo}, {hi}]")));
            }
            sample_sizes(count, lo, hi, config.seed)
        }
        _ => return Err(Error::Config("contents need sizes_mb or size_min_mb/size_max_mb".into())),
    };
    let contents: Vec<Content> =
        sizes_mb.iter().enumerate().map(|(k, &mb)| Content { id: k + 1, size: mb * MBIT_PER_MB }).collect();

    let foa = match config.foa.rule {
        FoaRule::Zipf => {
            if !(config.foa.shape >= 0.0) {
                return Err(Error::Config("Zipf shape must be non-negative".into()));
            }
            zipf_foa(n_nodes, count, config.foa.shape, config.seed, config.foa.shuffle)
        }
        FoaRule::Explicit => {
            let matrix = config
                .foa
                .matrix
                .as_ref()
                .ok_or_else(|| Error::Config("explicit FoA needs a matrix".into()))?;
            if matrix.len() != n_nodes || matrix.iter().any(|r| r.len() != count) {
                return Err(Error::Config(format!("FoA matrix must be {n_nodes}x{count}")));
            }
            let mut rows = Vec::with_capacity(n_nodes);
            for (n, row) in matrix.iter().enumerate() {
                if row.iter().any(|&f| !(f >= 0.0)) {
                    return Err(Error::Config(format!("negative FoA entry on node {}", n + 1)));
                }
                let total: f64 = row.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::Config(format!("FoA row of node {} is all zero", n + 1)));
                }
                rows.push(row.iter().map(|f| f / total).collect());
            }
            rows
        }
    };

    Scenario::new(nodes, contents, topology, foa)
}

/// Content sizes in megabytes, uniform on `[lo, hi]` and rounded to whole
/// megabits. Draws are sequential, so the first `k` sizes do not depend on
/// `count`.
pub fn sample_sizes(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SIZE_STREAM);
    (0..count)
        .map(|_| {
            let mb = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            (mb * MBIT_PER_MB).round() / MBIT_PER_MB
        })
        .collect()
}

/// Parameters for generating families of scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioTemplate {
    /// Total node count including the BS.
    pub node_count: usize,
    pub content_count: usize,
    pub size_min_mb: f64,
    pub size_max_mb: f64,
    pub men_capacity_mb: f64,
    pub bs_capacity_mb: f64,
    pub users: u32,
    pub user_mbps: f64,
    pub men_men_mbps: f64,
    pub men_bs_mbps: f64,
    pub backhaul_mbps: f64,
    pub zipf_shape: f64,
    pub shuffle: bool,
    /// Expected number of MEN–MEN links per MEN.
    pub mean_degree: f64,
}

impl Default for ScenarioTemplate {
    fn default() -> Self {
        Self {
            node_count: 5,
            content_count: 200,
            size_min_mb: 100.0,
            size_max_mb: 300.0,
            men_capacity_mb: 5.0 * MB_PER_GB,
            bs_capacity_mb: 5.0 * MB_PER_GB,
            users: default_users(),
            user_mbps: default_user_mbps(),
            men_men_mbps: 45.0,
            men_bs_mbps: 10.0,
            backhaul_mbps: default_backhaul(),
            zipf_shape: default_shape(),
            shuffle: true,
            mean_degree: 2.0,
        }
    }
}

impl ScenarioTemplate {
    /// Four nodes, thirty contents of 50–200 MB, 600 MB MEN caches, a 1 GB
    /// BS cache and a full MEN mesh.
    pub fn case_study() -> Self {
        Self {
            node_count: 4,
            content_count: 30,
            size_min_mb: 50.0,
            size_max_mb: 200.0,
            men_capacity_mb: 600.0,
            bs_capacity_mb: 1.0 * MB_PER_GB,
            mean_degree: f64::INFINITY,
            ..Self::default()
        }
    }

    /// Sets every node's capacity, BS included.
    pub fn with_capacity_gb(mut self, gb: f64) -> Self {
        self.men_capacity_mb = gb * MB_PER_GB;
        self.bs_capacity_mb = gb * MB_PER_GB;
        self
    }

    /// Concrete config for one seed. The BS links to every MEN; each MEN pair
    /// is linked independently with probability `min(1, d / (k - 1))` for
    /// `k` MENs and mean degree `d`.
    pub fn to_config(&self, seed: u64) -> ScenarioConfig {
        let n = self.node_count;
        let men = n.saturating_sub(1);
        let mut nodes: Vec<NodeConfig> = (0..men)
            .map(|_| NodeConfig { capacity_mb: self.men_capacity_mb, users: self.users, user_mbps: self.user_mbps })
            .collect();
        nodes.push(NodeConfig { capacity_mb: self.bs_capacity_mb, users: self.users, user_mbps: self.user_mbps });

        let mut links: Vec<LinkConfig> =
            (1..=men).map(|a| LinkConfig { a, b: n, mbps: self.men_bs_mbps }).collect();
        if men >= 2 {
            let p = (self.mean_degree / (men - 1) as f64).min(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(TOPOLOGY_STREAM);
            for a in 1..=men {
                for b in a + 1..=men {
                    let draw: f64 = rng.gen();
                    if draw < p {
                        links.push(LinkConfig { a, b, mbps: self.men_men_mbps });
                    }
                }
            }
        }

        ScenarioConfig {
            seed,
            backhaul_mbps: self.backhaul_mbps,
            nodes,
            links,
            contents: ContentsConfig {
                count: self.content_count,
                sizes_mb: None,
                size_min_mb: Some(self.size_min_mb),
                size_max_mb: Some(self.size_max_mb),
            },
            foa: FoaConfig { rule: FoaRule::Zipf, shape: self.zipf_shape, shuffle: self.shuffle, matrix: None },
            solver: None,
        }
    }

    pub fn build(&self, seed: u64) -> Result<Scenario> {
        build_scenario(&self.to_config(seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 3
backhaul_mbps = 60.0

[[nodes]]
capacity_mb = 100.0
users = 1
user_mbps = 10.0

[[nodes]]
capacity_mb = 100.0
users = 1

[[links]]
a = 1
b = 2
mbps = 45.0

[contents]
count = 2
sizes_mb = [100.0, 100.0]

[foa]
rule = "explicit"
matrix = [[1.0, 1.0], [2.0, 2.0]]
"#;

    #[test]
    fn minimal_instance() {
        let s = ScenarioConfig::from_toml(SAMPLE).unwrap().build().unwrap();
        assert_eq!(s.node_count(), 2);
        assert_eq!(s.topology.link_count(), 1);
        assert_eq!(s.size(0), 800.0);
        assert_eq!(s.foa[1], vec![0.5, 0.5]);
        assert!(s.nodes[1].is_bs);
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let cfg = ScenarioConfig::from_toml(SAMPLE).unwrap();
        let once = cfg.to_toml().unwrap();
        let twice = ScenarioConfig::from_toml(&once).unwrap().to_toml().unwrap();
        assert_eq!(once, twice);

        let mut generated = ScenarioTemplate::case_study().to_config(9);
        generated.solver = Some(SolverConfig::default());
        let once = generated.to_toml().unwrap();
        let back = ScenarioConfig::from_toml(&once).unwrap();
        assert_eq!(back, generated);
        assert_eq!(back.to_toml().unwrap(), once);
    }

    #[test]
    fn missing_bs_link_is_rejected() {
        let mut cfg = ScenarioTemplate { node_count: 4, mean_degree: 0.0, ..Default::default() }.to_config(1);
        cfg.links.retain(|l| l.a != 3);
        assert!(matches!(build_scenario(&cfg), Err(Error::DisconnectedNode(3))));
    }

    #[test]
    fn duplicate_and_bad_values() {
        let mut cfg = ScenarioTemplate { node_count: 3, ..Default::default() }.to_config(1);
        cfg.links.push(LinkConfig { a: 3, b: 1, mbps: 5.0 });
        assert!(matches!(build_scenario(&cfg), Err(Error::DuplicateLink(1, 3))));

        let mut cfg = ScenarioTemplate { node_count: 3, ..Default::default() }.to_config(1);
        cfg.contents.sizes_mb = Some(vec![-1.0; 200]);
        assert!(matches!(build_scenario(&cfg), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn paper_scale_instance() {
        let t = ScenarioTemplate { content_count: 200, ..Default::default() };
        let s = t.build(42).unwrap();
        assert_eq!(s.foa.len(), 5);
        assert!(s.foa.iter().all(|r| r.len() == 200 && (r.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        assert!(s.contents.iter().all(|c| c.size >= 800.0 && c.size <= 2400.0));
        assert_eq!(t.build(42).unwrap(), s);
    }

    #[test]
    fn case_study_is_full_mesh() {
        let s = ScenarioTemplate::case_study().build(5).unwrap();
        assert_eq!(s.topology.link_count(), 6);
        assert_eq!(s.capacity(3), 8000.0);
        assert_eq!(s.capacity(0), 4800.0);
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let bad = SAMPLE.replace("seed = 3", "seed = 3\ncolour = 1");
        assert!(matches!(ScenarioConfig::from_toml(&bad), Err(Error::Config(_))));
    }
}
