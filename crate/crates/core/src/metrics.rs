//! Uniform request streams and cache hit rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scenario::{Placement, Scenario, Source};

const REQUEST_STREAM: u64 = 0x4E;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestStream {
    /// `(node, content)`, zero-based.
    pub requests: Vec<(usize, usize)>,
    pub seed: u64,
    pub count: usize,
}

/// Draws `count` requests with node and content independent and uniform.
pub fn generate_requests(s: &Scenario, count: usize, seed: u64) -> Result<RequestStream> {
    if count == 0 {
        return Err(Error::Config("request count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(REQUEST_STREAM);
    let requests = (0..count)
        .map(|_| (rng.gen_range(0..s.node_count()), rng.gen_range(0..s.content_count())))
        .collect();
    Ok(RequestStream { requests, seed, count })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitReport {
    pub requests: Vec<u64>,
    /// Share of each node's requests served from its own cache.
    pub local_hit: Vec<f64>,
    /// Share of each node's requests served by another cache: a neighbor
    /// holding the content when cooperative, the base station otherwise.
    pub global_hit: Vec<f64>,
    /// Network average for the non-cooperative model. The base station term
    /// is the share of each node's requests its cache serves, averaged over
    /// nodes.
    pub h_tot: f64,
    /// Network average for the cooperative model.
    pub h_star_tot: f64,
}

fn rate(hits: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

pub fn hit_rates(s: &Scenario, placement: &Placement, stream: &RequestStream, cooperative: bool) -> Result<HitReport> {
    s.check_placement(placement)?;
    let nodes = s.node_count();
    let bs = s.bs();
    let mut requests = vec![0u64; nodes];
    let mut local = vec![0u64; nodes];
    let mut neighbor = vec![0u64; nodes];
    let mut via_bs = vec![0u64; nodes];
    for &(n, i) in &stream.requests {
        if n >= nodes || i >= s.content_count() {
            return Err(Error::Dimension(format!("request ({}, {}) is out of range", n + 1, i + 1)));
        }
        requests[n] += 1;
        if placement.get(n, i) {
            local[n] += 1;
            continue;
        }
        if let (_, Source::Neighbor(_)) = s.request_delay(placement, n, i) {
            neighbor[n] += 1;
        }
        if placement.get(bs, i) {
            via_bs[n] += 1;
        }
    }
    let local_hit: Vec<f64> = (0..nodes).map(|n| rate(local[n], requests[n])).collect();
    let global_hit: Vec<f64> =
        (0..nodes).map(|n| rate(if cooperative { neighbor[n] } else { via_bs[n] }, requests[n])).collect();
    let h_n = (0..nodes).map(|n| rate(if n == bs { local[n] } else { via_bs[n] }, requests[n])).sum::<f64>() / nodes as f64;
    let h_tot = (local_hit[..bs].iter().sum::<f64>() + nodes as f64 * h_n) / nodes as f64;
    let h_star_tot = (0..nodes).map(|n| local_hit[n] + rate(neighbor[n], requests[n])).sum::<f64>() / nodes as f64;
    Ok(HitReport { requests, local_hit, global_hit, h_tot, h_star_tot })
}
