//! Depth-first branch and bound over the caching variables with interior-point
//! relaxations at every node.

use std::fmt::Write as _;
use std::time::Instant;

use crate::config::SolverConfig;
use crate::distributed::distributed_placement;
use crate::error::{Error, Result};
use crate::ipm::{solve_relaxation, Fixings, IpmParams, RelaxStatus};
use crate::scenario::{Placement, Scenario};
use crate::transform::{Assignment, MinlpProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchingRule {
    MostFractional,
    LowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaMode {
    /// `eta` is a fraction of the incumbent value.
    Relative,
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbParams {
    pub eta: f64,
    pub eta_mode: EtaMode,
    pub tau: f64,
    pub max_nodes: u64,
    pub branching_rule: BranchingRule,
    pub ipm: IpmParams,
}

impl Default for BnbParams {
    fn default() -> Self {
        Self {
            eta: 0.01,
            eta_mode: EtaMode::Relative,
            tau: 1e-4,
            max_nodes: 50_000,
            branching_rule: BranchingRule::MostFractional,
            ipm: IpmParams::default(),
        }
    }
}

impl BnbParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) {
            return Err(Error::Config(format!("eta must be non-negative, got {}", self.eta)));
        }
        if !(self.tau > 0.0 && self.tau < 0.5) {
            return Err(Error::Config(format!("tau must lie in (0, 0.5), got {}", self.tau)));
        }
        if self.max_nodes == 0 {
            return Err(Error::Config("max_nodes must be positive".into()));
        }
        Ok(())
    }

    /// Absolute tolerance for the incumbent value `upper`.
    pub fn tolerance(&self, upper: f64) -> f64 {
        match self.eta_mode {
            EtaMode::Relative => self.eta * upper.abs(),
            EtaMode::Absolute => self.eta,
        }
    }
}

impl TryFrom<&SolverConfig> for BnbParams {
    type Error = Error;

    fn try_from(c: &SolverConfig) -> Result<Self> {
        let eta_mode = match c.eta_mode.as_str() {
            "relative" => EtaMode::Relative,
            "absolute" => EtaMode::Absolute,
            other => return Err(Error::Config(format!("unknown eta_mode `{other}`"))),
        };
        let branching_rule = match c.branching_rule.as_str() {
            "most_fractional" => BranchingRule::MostFractional,
            "lowest_index" => BranchingRule::LowestIndex,
            other => return Err(Error::Config(format!("unknown branching_rule `{other}`"))),
        };
        let params = Self {
            eta: c.eta,
            eta_mode,
            tau: c.tau,
            max_nodes: c.max_nodes,
            branching_rule,
            ipm: IpmParams {
                kkt_tolerance: c.kkt_tolerance,
                feasibility_tolerance: c.feasibility_tolerance,
                gamma0: c.gamma0,
                gamma_factor: c.gamma_factor,
                max_outer: c.max_outer,
                max_cg: c.max_cg,
                multistarts: c.multistarts,
                seed: c.seed,
                ..IpmParams::default()
            },
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    EtaOptimal,
    NodeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::EtaOptimal => "eta_optimal",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub placement: Placement,
    /// Delivering neighbor per `(n, i)`, row-major; `None` when served locally
    /// or from the content server.
    pub delivery: Vec<Option<usize>>,
    /// Row-major `z` values of the incumbent.
    pub z_hat: Vec<f64>,
    pub objective: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub nodes_explored: u64,
    pub first_leaf_depth: usize,
    pub wall_time: f64,
    pub status: SolveStatus,
}

impl SolveReport {
    /// `key = value` record. Wall time is left out unless asked for, so the
    /// record is reproducible.
    pub fn to_record(&self, with_time: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "status = {}", self.status.as_str());
        let _ = writeln!(out, "objective = {:.9}", self.objective);
        let _ = writeln!(out, "lower_bound = {:.9}", self.lower_bound);
        let _ = writeln!(out, "upper_bound = {:.9}", self.upper_bound);
        let _ = writeln!(out, "nodes_explored = {}", self.nodes_explored);
        let _ = writeln!(out, "first_leaf_depth = {}", self.first_leaf_depth);
        if with_time {
            let _ = writeln!(out, "wall_time = {:.3}", self.wall_time);
        }
        let contents = self.placement.content_count();
        for n in 0..self.placement.node_count() {
            let row: Vec<&str> = self.placement.row(n).iter().map(|&b| if b { "1" } else { "0" }).collect();
            let _ = writeln!(out, "placement.{} = {}", n + 1, row.join(""));
            let via: Vec<String> = (0..contents)
                .map(|i| self.delivery[n * contents + i].map_or("-".to_string(), |m| (m + 1).to_string()))
                .collect();
            let _ = writeln!(out, "delivery.{} = {}", n + 1, via.join(","));
        }
        out
    }
}

/// Picks the branching variable among `candidates` (indices into `values`).
pub fn branch_variable(values: &[f64], candidates: &[usize], tau: f64, rule: BranchingRule) -> Result<usize> {
    let frac = |j: usize| (values[j] - values[j].round()).abs();
    let mut best: Option<usize> = None;
    for &j in candidates {
        if frac(j) < tau {
            continue;
        }
        match rule {
            BranchingRule::LowestIndex => return Ok(j),
            BranchingRule::MostFractional => {
                if best.map_or(true, |b| frac(j) > frac(b)) {
                    best = Some(j);
                }
            }
        }
    }
    best.ok_or(Error::AlreadyIntegral)
}

/// Caching gain of `(n, i)` under `placement`: weighted delay saved by
/// holding `i` at `n` compared with fetching it.
fn holding_gain(scenario: &Scenario, placement: &Placement, n: usize, i: usize) -> f64 {
    let mut without = placement.clone();
    without.set(n, i, false);
    scenario.weight(n, i) * (scenario.request_delay(&without, n, i).0 - scenario.d_alpha(n, i))
}

/// Rounds `x` at one half and evicts the lowest-gain contents of overfull
/// nodes. Returns the completed binary assignment, or `None` when no
/// feasible placement can be recovered.
pub fn round_and_repair(relaxed: &Assignment, problem: &MinlpProblem) -> Option<(Placement, Assignment)> {
    if relaxed.values.len() < problem.num_x() {
        return None;
    }
    let s = problem.scenario();
    let mut placement = problem.placement_of(&relaxed.values);
    for n in 0..s.node_count() {
        while !fits_row(s, &placement, n) {
            let victim = (0..s.content_count())
                .filter(|&i| placement.get(n, i))
                .map(|i| (holding_gain(s, &placement, n, i), i))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))?;
            placement.set(n, victim.1, false);
        }
    }
    s.check_placement(&placement).ok()?;
    let assignment = problem.assignment_of(&placement);
    Some((placement, assignment))
}

fn fits_row(s: &Scenario, placement: &Placement, n: usize) -> bool {
    let cap = s.capacity(n);
    placement.load(s, n) <= cap * (1.0 + crate::scenario::CAPACITY_EPS) + crate::scenario::CAPACITY_EPS
}

struct OpenNode {
    fixings: Fixings,
    warm: Vec<f64>,
    bound: f64,
    depth: usize,
}

struct Incumbent {
    placement: Placement,
    assignment: Assignment,
    value: f64,
}

/// Runs the tree search.
pub fn solve(problem: &MinlpProblem, params: &BnbParams) -> Result<SolveReport> {
    params.validate()?;
    let started = Instant::now();
    let s = problem.scenario();
    let num_x = problem.num_x();

    let mut incumbent: Option<Incumbent> = None;
    let offer = |placement: Placement, assignment: Assignment, incumbent: &mut Option<Incumbent>| {
        let Ok(value) = s.total_average_delay(&placement) else {
            return;
        };
        if incumbent.as_ref().map_or(true, |inc| value < inc.value) {
            *incumbent = Some(Incumbent { placement, assignment, value });
        }
    };

    // The root has no parent point; the distributed placement stands in and
    // is the first incumbent.
    let (seed_placement, _) = distributed_placement(s);
    let seed_assignment = problem.assignment_of(&seed_placement);
    let mut stack = vec![OpenNode {
        fixings: Fixings::none(problem.num_binary()),
        warm: seed_assignment.values.clone(),
        bound: f64::NEG_INFINITY,
        depth: 0,
    }];
    offer(seed_placement, seed_assignment, &mut incumbent);
    // Bounds of nodes closed only because they could not beat the incumbent
    // by more than the tolerance; they stay part of the global lower bound.
    let mut tolerance_closed = f64::INFINITY;
    let mut nodes_explored: u64 = 0;
    let mut first_leaf_depth: Option<usize> = None;
    let mut hit_limit = false;

    while let Some(node) = stack.pop() {
        if let Some(inc) = &incumbent {
            let open_min = stack.iter().map(|o| o.bound).fold(node.bound, f64::min).min(tolerance_closed);
            if inc.value - open_min.min(inc.value) <= params.tolerance(inc.value) {
                tolerance_closed = tolerance_closed.min(node.bound);
                stack.iter().for_each(|o| tolerance_closed = tolerance_closed.min(o.bound));
                stack.clear();
                break;
            }
        }
        if nodes_explored >= params.max_nodes {
            stack.push(node);
            hit_limit = true;
            break;
        }
        nodes_explored += 1;

        let warm = if node.warm.is_empty() { None } else { Some(node.warm.as_slice()) };
        let relaxed = solve_relaxation(problem, &node.fixings, &params.ipm, warm);
        if relaxed.status == RelaxStatus::Infeasible {
            first_leaf_depth.get_or_insert(node.depth);
            continue;
        }
        let bound = relaxed.objective.max(node.bound);

        if let Some((placement, assignment)) = round_and_repair(&relaxed.assignment, problem) {
            offer(placement, assignment, &mut incumbent);
        }

        let upper = incumbent.as_ref().map_or(f64::INFINITY, |inc| inc.value);
        if bound > upper {
            first_leaf_depth.get_or_insert(node.depth);
            continue;
        }
        if upper - bound <= params.tolerance(upper) {
            first_leaf_depth.get_or_insert(node.depth);
            tolerance_closed = tolerance_closed.min(bound);
            continue;
        }

        let candidates: Vec<usize> = (0..num_x).filter(|&j| node.fixings.get(j).is_none()).collect();
        match branch_variable(&relaxed.assignment.values, &candidates, params.tau, params.branching_rule) {
            Err(_) => {
                // Integral caching decisions: the best completion of this
                // subtree is the exact one.
                first_leaf_depth.get_or_insert(node.depth);
                let placement = problem.placement_of(&relaxed.assignment.values);
                if s.check_placement(&placement).is_ok() {
                    let assignment = problem.assignment_of(&placement);
                    offer(placement, assignment, &mut incumbent);
                }
            }
            Ok(zeta) => {
                for value in [false, true] {
                    stack.push(OpenNode {
                        fixings: node.fixings.with(zeta, value)?,
                        warm: relaxed.assignment.values.clone(),
                        bound,
                        depth: node.depth + 1,
                    });
                }
            }
        }
    }

    let wall_time = started.elapsed().as_secs_f64();
    let Some(inc) = incumbent else {
        if hit_limit {
            return Err(Error::SolverLimit(format!("node limit {} reached without a feasible placement", params.max_nodes)));
        }
        return Err(Error::Infeasible);
    };
    let open_min = stack.iter().map(|o| o.bound).fold(f64::INFINITY, f64::min);
    let lower_bound = open_min.min(tolerance_closed).min(inc.value);
    let status = if hit_limit && inc.value - lower_bound > params.tolerance(inc.value) {
        SolveStatus::NodeLimit
    } else {
        SolveStatus::EtaOptimal
    };
    let z_hat = problem.groups().iter().map(|g| inc.assignment.values[g.z]).collect();
    Ok(SolveReport {
        delivery: problem.delivery(&inc.assignment.values),
        z_hat,
        objective: inc.value,
        lower_bound,
        upper_bound: inc.value,
        placement: inc.placement,
        nodes_explored,
        first_leaf_depth: first_leaf_depth.unwrap_or(0),
        wall_time,
        status,
    })
}
