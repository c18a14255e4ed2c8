#![allow(dead_code)]

use edgecache::config::{ScenarioConfig, ScenarioTemplate};
use edgecache::{Placement, Scenario};

/// One MEN and the BS, two 100 MB contents, 100 MB caches, b = 10,
/// MEN-BS link 45, backhaul 60, uniform FoA, one user each.
pub fn two_node() -> Scenario {
    two_node_with_capacity(100.0)
}

pub fn two_node_with_capacity(capacity_mb: f64) -> Scenario {
    let text = format!(
        r#"
seed = 0
backhaul_mbps = 60.0

[[nodes]]
capacity_mb = {capacity_mb}
users = 1
user_mbps = 10.0

[[nodes]]
capacity_mb = {capacity_mb}
users = 1
user_mbps = 10.0

[[links]]
a = 1
b = 2
mbps = 45.0

[contents]
count = 2
sizes_mb = [100.0, 100.0]

[foa]
rule = "explicit"
matrix = [[0.5, 0.5], [0.5, 0.5]]
"#
    );
    ScenarioConfig::from_toml(&text).unwrap().build().unwrap()
}

/// Small generated instance; capacity in GB for every node.
pub fn generated(nodes: usize, contents: usize, gb: f64, seed: u64) -> Scenario {
    ScenarioTemplate { node_count: nodes, content_count: contents, ..Default::default() }
        .with_capacity_gb(gb)
        .build(seed)
        .unwrap()
}

/// Every feasible placement of `s`, by brute force over all 0/1 matrices.
pub fn all_placements(s: &Scenario) -> Vec<Placement> {
    let (n, i) = (s.node_count(), s.content_count());
    let bits = n * i;
    assert!(bits <= 20, "too many placements to enumerate");
    let mut out = Vec::new();
    for mask in 0u64..(1 << bits) {
        let mut p = Placement::empty(n, i);
        for k in 0..bits {
            if mask >> k & 1 == 1 {
                p.set(k / i, k % i, true);
            }
        }
        if s.check_placement(&p).is_ok() {
            out.push(p);
        }
    }
    out
}

/// Minimum cooperative delay by brute force.
pub fn brute_force_optimum(s: &Scenario) -> f64 {
    all_placements(s).iter().map(|p| s.total_average_delay(p).unwrap()).fold(f64::INFINITY, f64::min)
}

/// One MEN and the BS with given content sizes and capacities (MB) and the
/// same FoA row at both nodes.
pub fn pair(sizes_mb: &[f64], capacity_mb: f64, foa: &[f64]) -> Scenario {
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
    let text = format!(
        r#"
seed = 0
backhaul_mbps = 60.0
[[nodes]]
capacity_mb = {capacity_mb:?}
users = 1
[[nodes]]
capacity_mb = {capacity_mb:?}
users = 1
[[links]]
a = 1
b = 2
mbps = 10.0
[contents]
count = {}
sizes_mb = [{}]
[foa]
rule = "explicit"
matrix = [[{}], [{}]]
"#,
        sizes_mb.len(),
        fmt(sizes_mb),
        fmt(foa),
        fmt(foa)
    );
    ScenarioConfig::from_toml(&text).unwrap().build().unwrap()
}
