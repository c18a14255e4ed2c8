//! Distributed caching: exact per-node knapsacks followed by one cooperation
//! pass that removes duplicates between neighbors.

use std::cell::RefCell;
use std::collections::BTreeSet;

use crate::scenario::{Placement, Scenario};

/// Exact 0-1 knapsack over integer weights. Returns the chosen items; among
/// optimal sets the one taking the lowest indices is preferred.
pub fn knapsack(weights: &[u64], values: &[f64], capacity: u64) -> Vec<bool> {
    let n = weights.len();
    let cap = capacity as usize;
    // Items are added back to front so that the forward reconstruction can
    // prefer taking the lower index whenever that stays optimal.
    let mut next = vec![0.0f64; cap + 1];
    let mut row = vec![0.0f64; cap + 1];
    let mut take = vec![false; n * (cap + 1)];
    for k in (0..n).rev() {
        let w = weights[k] as usize;
        for c in 0..=cap {
            let skip = next[c];
            row[c] = skip;
            if w <= c && values[k] > 0.0 {
                let with = next[c - w] + values[k];
                if with >= skip - 1e-12 * skip.abs().max(1.0) {
                    take[k * (cap + 1) + c] = true;
                    row[c] = with.max(skip);
                }
            }
        }
        std::mem::swap(&mut row, &mut next);
    }
    let mut chosen = vec![false; n];
    let mut c = cap;
    for k in 0..n {
        if take[k * (cap + 1) + c] {
            chosen[k] = true;
            c -= weights[k] as usize;
        }
    }
    chosen
}

/// Whole megabits needed by a size, rounded up. Generated sizes are already whole.
fn whole_mbit(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Delay of a request at `n` for `i` when nobody cooperates horizontally:
/// local, else through the base station when it holds the content, else the
/// content server.
pub fn noncooperative_request_delay(s: &Scenario, placement: &Placement, n: usize, i: usize) -> f64 {
    let bs = s.bs();
    if placement.get(n, i) {
        s.d_alpha(n, i)
    } else if n != bs && placement.get(bs, i) {
        s.d_alpha(n, i) + s.transfer(n, bs, i).expect("every MEN links to the base station")
    } else {
        s.d_delta(n, i)
    }
}

/// Per-content savings of node `n` caching alone, given the base station row.
pub fn local_savings(s: &Scenario, bs_row: Option<&[bool]>, n: usize) -> Vec<f64> {
    let bs = s.bs();
    let mut probe = Placement::empty(s.node_count(), s.content_count());
    if let Some(row) = bs_row {
        if n != bs {
            probe.set_row(bs, row);
        }
    }
    (0..s.content_count())
        .map(|i| s.weight(n, i) * (noncooperative_request_delay(s, &probe, n, i) - s.d_alpha(n, i)))
        .collect()
}

fn node_knapsack(s: &Scenario, n: usize, savings: &[f64]) -> Vec<bool> {
    let weights: Vec<u64> = (0..s.content_count()).map(|i| whole_mbit(s.size(i))).collect();
    let cap = (s.capacity(n) + 1e-9 * s.capacity(n).max(1.0)).floor() as u64;
    knapsack(&weights, savings, cap)
}

/// Per-node exact caching without cooperation: the base station row first,
/// then every MEN given that row.
pub fn local_optimal_placement(s: &Scenario, bs_placement: Option<&[bool]>) -> Placement {
    let bs = s.bs();
    let mut placement = Placement::empty(s.node_count(), s.content_count());
    let bs_row = match bs_placement {
        Some(row) => row.to_vec(),
        None => node_knapsack(s, bs, &local_savings(s, None, bs)),
    };
    placement.set_row(bs, &bs_row);
    for n in 0..bs {
        let row = node_knapsack(s, n, &local_savings(s, Some(&bs_row), n));
        placement.set_row(n, &row);
    }
    placement
}

/// Read access to the rows of one node and its neighbors. Every row read is
/// recorded.
pub struct NodeView<'a> {
    scenario: &'a Scenario,
    placement: &'a Placement,
    node: usize,
    reads: &'a RefCell<BTreeSet<usize>>,
}

impl NodeView<'_> {
    pub fn node(&self) -> usize {
        self.node
    }

    /// Whether node `m` holds content `i`. `m` must be this node or one of
    /// its neighbors.
    pub fn has(&self, m: usize, i: usize) -> bool {
        assert!(
            m == self.node || self.scenario.neighbors(self.node).contains(&m),
            "node {} read the row of non-neighbor {}",
            self.node + 1,
            m + 1
        );
        self.reads.borrow_mut().insert(m);
        self.placement.get(m, i)
    }

    pub fn load(&self) -> f64 {
        (0..self.scenario.content_count()).filter(|&i| self.has(self.node, i)).map(|i| self.scenario.size(i)).sum()
    }

    /// Weighted delay of this node's requests under the cooperative model.
    pub fn delay(&self) -> f64 {
        let s = self.scenario;
        (0..s.content_count())
            .map(|i| s.weight(self.node, i) * s.request_delay_with(self.node, i, |m| self.has(m, i)).0)
            .sum()
    }
}

/// Rows read by each node during a cooperation pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessLog {
    pub reads: Vec<BTreeSet<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub content: usize,
    pub node: usize,
    pub candidate: Option<usize>,
    pub accepted: bool,
    pub before: f64,
    pub after: f64,
}

impl RoundTrace {
    /// One line, ids one-based.
    pub fn line(&self) -> String {
        format!(
            "content={} node={} insert={} {} before={:.6} after={:.6}",
            self.content + 1,
            self.node + 1,
            self.candidate.map_or("-".to_string(), |c| (c + 1).to_string()),
            if self.accepted { "accepted" } else { "reverted" },
            self.before,
            self.after
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CooperationOutcome {
    pub placement: Placement,
    pub final_delay: f64,
    pub trace: Vec<RoundTrace>,
    /// Candidate contents examined while choosing insertions.
    pub evaluations: u64,
    pub access: AccessLog,
    pub passes: usize,
}

struct Network<'a> {
    scenario: &'a Scenario,
    reads: Vec<RefCell<BTreeSet<usize>>>,
}

impl<'a> Network<'a> {
    fn view<'b>(&'b self, placement: &'b Placement, n: usize) -> NodeView<'b> {
        NodeView { scenario: self.scenario, placement, node: n, reads: &self.reads[n] }
    }

    /// Network delay as the sum of the summaries each node reports.
    fn delay(&self, placement: &Placement) -> f64 {
        (0..self.scenario.node_count()).map(|n| self.view(placement, n).delay()).sum()
    }
}

/// Content node `n` inserts after evicting `evicted`, if any fits.
fn pick_candidate(view: &NodeView<'_>, evicted: usize, evaluations: &mut u64) -> Option<usize> {
    let s = view.scenario;
    let n = view.node;
    let room = s.capacity(n) - view.load();
    let fits = |c: usize| s.size(c) <= room * (1.0 + crate::scenario::CAPACITY_EPS) + crate::scenario::CAPACITY_EPS;
    let mut fresh: Option<usize> = None;
    let mut fallback: Option<usize> = None;
    for c in 0..s.content_count() {
        if c == evicted {
            continue;
        }
        *evaluations += 1;
        if view.has(n, c) || !fits(c) {
            continue;
        }
        let better = |cur: Option<usize>| cur.map_or(true, |b| s.foa[n][c] > s.foa[n][b]);
        if better(fallback) {
            fallback = Some(c);
        }
        if !s.neighbors(n).iter().any(|&m| view.has(m, c)) && better(fresh) {
            fresh = Some(c);
        }
    }
    fresh.or(fallback)
}

/// Cooperation pass over a feasible placement. With `until_stable`, passes
/// repeat until one accepts nothing.
pub fn cooperate_with(s: &Scenario, placement: &Placement, until_stable: bool) -> CooperationOutcome {
    let network = Network { scenario: s, reads: (0..s.node_count()).map(|_| RefCell::new(BTreeSet::new())).collect() };
    let mut current = placement.clone();
    let mut psi = network.delay(&current);
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut passes = 0;
    loop {
        passes += 1;
        let mut changed = false;
        for i in 0..s.content_count() {
            let mut tentative = current.clone();
            let mut moves = Vec::new();
            for n in 0..s.node_count() {
                let view = network.view(&tentative, n);
                let duplicated = view.has(n, i) && s.neighbors(n).iter().any(|&m| view.has(m, i));
                if !duplicated {
                    continue;
                }
                tentative.set(n, i, false);
                let candidate = pick_candidate(&network.view(&tentative, n), i, &mut evaluations);
                if let Some(c) = candidate {
                    tentative.set(n, c, true);
                }
                moves.push((n, candidate));
            }
            if moves.is_empty() {
                continue;
            }
            let after = network.delay(&tentative);
            let accepted = after < psi;
            for &(n, candidate) in &moves {
                trace.push(RoundTrace { content: i, node: n, candidate, accepted, before: psi, after });
            }
            if accepted {
                current = tentative;
                psi = after;
                changed = true;
            }
        }
        if !until_stable || !changed {
            break;
        }
    }
    CooperationOutcome {
        placement: current,
        final_delay: psi,
        trace,
        evaluations,
        access: AccessLog { reads: network.reads.into_iter().map(RefCell::into_inner).collect() },
        passes,
    }
}

/// Single cooperation pass; returns the placement and its total average delay.
pub fn cooperate(s: &Scenario, placement: &Placement) -> (Placement, f64) {
    let out = cooperate_with(s, placement, false);
    (out.placement, out.final_delay)
}

/// Local knapsacks followed by one cooperation pass.
pub fn distributed_placement(s: &Scenario) -> (Placement, f64) {
    cooperate(s, &local_optimal_placement(s, None))
}
