//! Baseline placements and the non-cooperative delay used to score them.

use std::fmt;
use std::str::FromStr;

use crate::distributed::{local_optimal_placement, noncooperative_request_delay};
use crate::error::{Error, Result};
use crate::scenario::{Placement, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Greedy,
    MostFoa,
    GuaranteedGreedy,
    LocallyOptimal,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Greedy, PolicyKind::MostFoa, PolicyKind::GuaranteedGreedy, PolicyKind::LocallyOptimal];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::MostFoa => "most-foa",
            PolicyKind::GuaranteedGreedy => "guaranteed-greedy",
            PolicyKind::LocallyOptimal => "locally-optimal",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Config(format!("unknown policy `{s}`")))
    }
}

/// Knobs for the variants left open by the policy descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PolicyOptions {
    /// Run guaranteed greedy independently at every node (base station
    /// first) instead of over the whole network.
    pub per_node_greedy: bool,
}

pub fn place(s: &Scenario, kind: PolicyKind) -> Placement {
    place_with(s, kind, PolicyOptions::default())
}

pub fn place_with(s: &Scenario, kind: PolicyKind, options: PolicyOptions) -> Placement {
    match kind {
        PolicyKind::Greedy => fill_in_order(s, |_| {
            let mut order: Vec<usize> = (0..s.content_count()).collect();
            order.sort_by(|&a, &b| s.size(a).total_cmp(&s.size(b)).then(a.cmp(&b)));
            order
        }),
        PolicyKind::MostFoa => fill_in_order(s, |n| {
            let mut order: Vec<usize> = (0..s.content_count()).collect();
            order.sort_by(|&a, &b| s.foa[n][b].total_cmp(&s.foa[n][a]).then(a.cmp(&b)));
            order
        }),
        PolicyKind::GuaranteedGreedy => {
            if options.per_node_greedy {
                per_node_greedy(s)
            } else {
                global_greedy(s)
            }
        }
        PolicyKind::LocallyOptimal => local_optimal_placement(s, None),
    }
}

/// Every node walks its own order and takes each content that still fits.
fn fill_in_order(s: &Scenario, order: impl Fn(usize) -> Vec<usize>) -> Placement {
    let mut placement = Placement::empty(s.node_count(), s.content_count());
    for n in 0..s.node_count() {
        for i in order(n) {
            if s.fits(&placement, n, i) {
                placement.set(n, i, true);
            }
        }
    }
    placement
}

/// Reduction of the non-cooperative network delay from adding `(n, i)`.
fn marginal_gain(s: &Scenario, placement: &Placement, n: usize, i: usize) -> f64 {
    let delay_of = |p: &Placement, m: usize| s.weight(m, i) * noncooperative_request_delay(s, p, m, i);
    let mut with = placement.clone();
    with.set(n, i, true);
    let affected: Vec<usize> = if n == s.bs() { (0..s.node_count()).collect() } else { vec![n] };
    affected.iter().map(|&m| delay_of(placement, m) - delay_of(&with, m)).sum()
}

/// Repeatedly adds the fitting pair with the largest gain per unit size.
fn greedy_over(s: &Scenario, placement: &mut Placement, nodes: &[usize]) {
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for &n in nodes {
            for i in 0..s.content_count() {
                if placement.get(n, i) || !s.fits(placement, n, i) {
                    continue;
                }
                let density = marginal_gain(s, placement, n, i) / s.size(i);
                if best.map_or(true, |(d, _, _)| density > d) {
                    best = Some((density, n, i));
                }
            }
        }
        match best {
            Some((_, n, i)) => placement.set(n, i, true),
            None => return,
        }
    }
}

fn global_greedy(s: &Scenario) -> Placement {
    let mut placement = Placement::empty(s.node_count(), s.content_count());
    let nodes: Vec<usize> = (0..s.node_count()).collect();
    greedy_over(s, &mut placement, &nodes);
    placement
}

fn per_node_greedy(s: &Scenario) -> Placement {
    let mut placement = Placement::empty(s.node_count(), s.content_count());
    greedy_over(s, &mut placement, &[s.bs()]);
    for n in 0..s.bs() {
        greedy_over(s, &mut placement, &[n]);
    }
    placement
}

/// Total delay when requests never use a neighbor other than the base
/// station.
pub fn noncooperative_delay(s: &Scenario, placement: &Placement) -> Result<f64> {
    s.check_placement(placement)?;
    let mut total = 0.0;
    for n in 0..s.node_count() {
        for i in 0..s.content_count() {
            total += s.weight(n, i) * noncooperative_request_delay(s, placement, n, i);
        }
    }
    Ok(total)
}

/// Per-node weighted delays under the non-cooperative model.
pub fn noncooperative_node_delays(s: &Scenario, placement: &Placement) -> Vec<f64> {
    (0..s.node_count())
        .map(|n| (0..s.content_count()).map(|i| s.weight(n, i) * noncooperative_request_delay(s, placement, n, i)).sum())
        .collect()
}
