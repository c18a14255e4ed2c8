//! Seeded experiment sweeps over capacity, content count or node count, and
//! their CSV output.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::bnb::{self, BnbParams, SolveStatus};
use crate::config::ScenarioTemplate;
use crate::distributed::distributed_placement;
use crate::error::{Error, Result};
use crate::metrics::{generate_requests, hit_rates};
use crate::oracle::{exhaustive_optimal, OracleBudget};
use crate::policies::{noncooperative_delay, noncooperative_node_delays, place, PolicyKind};
use crate::scenario::{Placement, Scenario};
use crate::transform::{transform, BigM};

/// Largest binary-variable count (caching plus selection variables) for
/// which a centralized solve is attempted. Measured on one core with the
/// default parameters: three nodes and eight contents (72 binaries) already
/// take minutes per instance.
pub const CENTRALIZED_MAX_BINARIES: usize = 100;

/// Requests drawn per instance for the hit-rate columns.
pub const SWEEP_REQUESTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    Baseline(PolicyKind),
    Distributed,
    Centralized,
    Oracle,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Baseline(k) => k.name(),
            Policy::Distributed => "distributed",
            Policy::Centralized => "centralized",
            Policy::Oracle => "oracle",
        }
    }

    /// Whether the policy is scored with the cooperative delay model.
    pub fn cooperative(self) -> bool {
        !matches!(self, Policy::Baseline(_))
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distributed" => Ok(Policy::Distributed),
            "centralized" => Ok(Policy::Centralized),
            "oracle" => Ok(Policy::Oracle),
            other => other.parse().map(Policy::Baseline),
        }
    }
}

/// Parses a comma-separated policy list.
pub fn parse_policies(list: &str) -> Result<Vec<Policy>> {
    let out: Vec<Policy> = list.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::InvalidSweep("no policies given".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Every node's capacity, in GB.
    Capacity,
    ContentCount,
    /// Total node count, base station included.
    MenCount,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Capacity => "capacity",
            Axis::ContentCount => "content_count",
            Axis::MenCount => "men_count",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "capacity" => Ok(Axis::Capacity),
            "content_count" | "content-count" | "contents" => Ok(Axis::ContentCount),
            "men_count" | "men-count" | "nodes" => Ok(Axis::MenCount),
            other => Err(Error::InvalidSweep(format!("unknown axis `{other}`"))),
        }
    }
}

/// How to score and solve the rows of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub bnb: BnbParams,
    pub oracle: OracleBudget,
    /// Score baselines with the cooperative model too.
    pub cooperative_baselines: bool,
}

impl Default for Evaluation {
    fn default() -> Self {
        Self { bnb: BnbParams::default(), oracle: OracleBudget::default(), cooperative_baselines: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub fixed: ScenarioTemplate,
    pub policies: Vec<Policy>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub per_node: bool,
    pub evaluation: Evaluation,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("no axis values".into()));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSweep("axis values must be strictly increasing".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidSweep("repetitions must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidSweep("no policies given".into()));
        }
        for &v in &self.values {
            let whole = v.fract() == 0.0;
            match self.axis {
                Axis::Capacity if !(v >= 0.0) => {
                    return Err(Error::InvalidSweep(format!("capacity {v} is negative")));
                }
                Axis::ContentCount if !whole || v < 1.0 => {
                    return Err(Error::InvalidSweep(format!("content count {v} is not a positive integer")));
                }
                Axis::MenCount if !whole || v < 2.0 => {
                    return Err(Error::InvalidSweep(format!("node count {v} must be an integer of at least 2")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Template at one axis value.
    pub fn template_at(&self, value: f64) -> ScenarioTemplate {
        let t = self.fixed.clone();
        match self.axis {
            Axis::Capacity => t.with_capacity_gb(value),
            Axis::ContentCount => ScenarioTemplate { content_count: value as usize, ..t },
            Axis::MenCount => ScenarioTemplate { node_count: value as usize, ..t },
        }
    }
}

/// Binary variables a centralized solve of `s` would carry.
pub fn binary_count(s: &Scenario) -> usize {
    let links: usize = (0..s.node_count()).map(|n| s.neighbors(n).len()).sum();
    s.content_count() * (s.node_count() + links)
}

/// Refuses centralized solves beyond [`CENTRALIZED_MAX_BINARIES`].
pub fn check_tractable(s: &Scenario) -> Result<()> {
    let count = binary_count(s);
    if count > CENTRALIZED_MAX_BINARIES {
        return Err(Error::Intractable(format!(
            "centralized solve needs {count} binary variables ({} nodes, {} contents); the limit is {CENTRALIZED_MAX_BINARIES}",
            s.node_count(),
            s.content_count()
        )));
    }
    Ok(())
}

/// Outcome of one policy on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutcome {
    pub placement: Placement,
    pub objective: f64,
    pub node_delays: Vec<f64>,
    pub nodes_explored: Option<u64>,
    pub status: &'static str,
}

/// Runs `policy` on `s` and scores it.
pub fn run_policy(s: &Scenario, policy: Policy, evaluation: &Evaluation) -> Result<PolicyOutcome> {
    let (placement, nodes_explored, status) = match policy {
        Policy::Baseline(kind) => (place(s, kind), None, "ok"),
        Policy::Distributed => (distributed_placement(s).0, None, "ok"),
        Policy::Oracle => (exhaustive_optimal(s, evaluation.oracle)?.placement, None, "ok"),
        Policy::Centralized => {
            check_tractable(s)?;
            let report = bnb::solve(&transform(s, BigM::Auto), &evaluation.bnb)?;
            (report.placement, Some(report.nodes_explored), report.status.as_str())
        }
    };
    let cooperative = policy.cooperative() || evaluation.cooperative_baselines;
    let (objective, node_delays) = if cooperative {
        (s.total_average_delay(&placement)?, s.node_delays(&placement))
    } else {
        (noncooperative_delay(s, &placement)?, noncooperative_node_delays(s, &placement))
    };
    Ok(PolicyOutcome { placement, objective, node_delays, nodes_explored, status })
}

/// Default node budget of the case-study centralized solve. The four-node
/// instance is far past [`CENTRALIZED_MAX_BINARIES`], so the solve runs to
/// this budget and reports the incumbent.
pub const CASE_STUDY_MAX_NODES: u64 = 10;

/// One policy on one case-study instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudyRow {
    pub seed: u64,
    pub policy: Policy,
    pub objective: f64,
    pub placement: Placement,
    pub nodes_explored: Option<u64>,
    pub status: &'static str,
}

/// Centralized (under a node budget), distributed and locally-optimal
/// placements of the four-node, thirty-content instance for `seed`.
pub fn case_study(seed: u64, max_nodes: u64) -> Result<Vec<CaseStudyRow>> {
    let s = ScenarioTemplate::case_study().build(seed)?;
    let params = BnbParams { max_nodes, ..BnbParams::default() };
    let report = bnb::solve(&transform(&s, BigM::Auto), &params)?;
    let mut rows = vec![CaseStudyRow {
        seed,
        policy: Policy::Centralized,
        objective: report.objective,
        placement: report.placement,
        nodes_explored: Some(report.nodes_explored),
        status: report.status.as_str(),
    }];
    for policy in [Policy::Distributed, Policy::Baseline(PolicyKind::LocallyOptimal)] {
        let out = run_policy(&s, policy, &Evaluation::default())?;
        rows.push(CaseStudyRow {
            seed,
            policy,
            objective: out.objective,
            placement: out.placement,
            nodes_explored: None,
            status: out.status,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub policy: Policy,
    pub repetition: usize,
    pub seed: u64,
    pub objective: f64,
    pub h_tot: f64,
    pub h_star_tot: f64,
    pub nodes_explored: Option<u64>,
    pub status: &'static str,
    pub distinct_contents: usize,
    pub node_delays: Vec<f64>,
    pub wall_time: f64,
}

impl SweepRow {
    /// Average over nodes of the per-node weighted delay.
    pub fn mean_node_delay(&self) -> f64 {
        self.objective / self.node_delays.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    pub per_node: bool,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// True when some centralized row stopped at the node limit.
    pub fn hit_solver_limit(&self) -> bool {
        self.rows.iter().any(|r| r.status == SolveStatus::NodeLimit.as_str())
    }

    /// Mean objective of `policy` at `axis_value` over repetitions.
    pub fn mean_objective(&self, axis_value: f64, policy: Policy) -> Option<f64> {
        let picked: Vec<f64> =
            self.rows.iter().filter(|r| r.axis_value == axis_value && r.policy == policy).map(|r| r.objective).collect();
        (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

/// Worker count from `EDGECACHE_THREADS`, if set.
pub fn thread_limit() -> Option<usize> {
    std::env::var("EDGECACHE_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    spec.evaluation.bnb.validate()?;
    let mut jobs = Vec::new();
    for (vi, &value) in spec.values.iter().enumerate() {
        let template = spec.template_at(value);
        for rep in 0..spec.repetitions {
            let seed = spec.base_seed + rep as u64;
            let scenario = template.build(seed)?;
            if spec.policies.contains(&Policy::Centralized) {
                check_tractable(&scenario)?;
            }
            jobs.push((vi, value, rep, seed, scenario));
        }
    }
    let work = |(vi, value, rep, seed, scenario): &(usize, f64, usize, u64, Scenario)| -> Result<Vec<(usize, SweepRow)>> {
        let stream = generate_requests(scenario, SWEEP_REQUESTS, *seed)?;
        let mut out = Vec::new();
        for &policy in &spec.policies {
            let started = Instant::now();
            let outcome = run_policy(scenario, policy, &spec.evaluation)?;
            let wall_time = started.elapsed().as_secs_f64();
            let cooperative = policy.cooperative() || spec.evaluation.cooperative_baselines;
            let hits = hit_rates(scenario, &outcome.placement, &stream, cooperative)?;
            out.push((
                *vi,
                SweepRow {
                    axis_value: *value,
                    policy,
                    repetition: *rep,
                    seed: *seed,
                    objective: outcome.objective,
                    h_tot: hits.h_tot,
                    h_star_tot: hits.h_star_tot,
                    nodes_explored: outcome.nodes_explored,
                    status: outcome.status,
                    distinct_contents: outcome.placement.distinct_contents(),
                    node_delays: outcome.node_delays,
                    wall_time,
                },
            ));
        }
        Ok(out)
    };
    let results: Vec<Result<Vec<(usize, SweepRow)>>> = match thread_limit() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| jobs.par_iter().map(work).collect()),
        None => jobs.par_iter().map(work).collect(),
    };
    let mut keyed = Vec::new();
    for r in results {
        keyed.extend(r?);
    }
    let order = |p: Policy| spec.policies.iter().position(|&q| q == p).unwrap_or(usize::MAX);
    keyed.sort_by(|(va, a), (vb, b)| va.cmp(vb).then(order(a.policy).cmp(&order(b.policy))).then(a.repetition.cmp(&b.repetition)));
    Ok(SweepResult { axis: spec.axis, per_node: spec.per_node, rows: keyed.into_iter().map(|(_, r)| r).collect() })
}

/// `x` with six significant digits, in fixed notation when the exponent is
/// moderate and scientific otherwise; trailing zeros are dropped.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// CSV text of a sweep result.
pub fn to_csv(result: &SweepResult) -> Result<String> {
    let width = if result.per_node { result.rows.iter().map(|r| r.node_delays.len()).max().unwrap_or(0) } else { 0 };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "axis",
        "axis_value",
        "policy",
        "repetition",
        "seed",
        "objective",
        "mean_node_delay",
        "h_tot",
        "h_star_tot",
        "distinct_contents",
        "nodes_explored",
        "status",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=width).map(|n| format!("node_delay_{n}")));
    w.write_record(&header)?;
    for r in &result.rows {
        let mut rec = vec![
            result.axis.name().to_string(),
            format_sig6(r.axis_value),
            r.policy.name().to_string(),
            r.repetition.to_string(),
            r.seed.to_string(),
            format_sig6(r.objective),
            format_sig6(r.mean_node_delay()),
            format_sig6(r.h_tot),
            format_sig6(r.h_star_tot),
            r.distinct_contents.to_string(),
            r.nodes_explored.map_or(String::new(), |n| n.to_string()),
            r.status.to_string(),
        ];
        for n in 0..width {
            rec.push(r.node_delays.get(n).map_or(String::new(), |&d| format_sig6(d)));
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(result)?)?;
    Ok(())
}
