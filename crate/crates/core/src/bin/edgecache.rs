use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edgecache::bnb::{BnbParams, SolveStatus};
use edgecache::config::{ScenarioConfig, ScenarioTemplate, SolverConfig};
use edgecache::metrics::{generate_requests, hit_rates};
use edgecache::oracle::{exhaustive_optimal, OracleBudget};
use edgecache::policies::PolicyKind;
use edgecache::sweep::{
    self, emit_csv, format_sig6, parse_policies, run_policy, run_sweep, to_csv, Evaluation, Policy, SweepSpec,
    CASE_STUDY_MAX_NODES,
};
use edgecache::{Error, Scenario};

#[derive(Parser)]
#[command(name = "edgecache", version, about = "Cooperative edge caching experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario with one policy.
    Solve(SolveArgs),
    /// Exhaustive optimum of a small scenario.
    Oracle(OracleArgs),
    /// Seeded sweep over one axis.
    Sweep(SweepArgs),
    /// Hit rates of several policies on one uniform request stream.
    HitRates(HitArgs),
    /// The four-node, thirty-content comparison.
    CaseStudy(CaseArgs),
}

/// Where the scenario comes from: a scenario file, or a generator template
/// file (or the default template) plus a seed.
#[derive(Args, Clone)]
struct Source {
    /// Scenario TOML, or a template TOML when `--template` is given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat `--config` as a generator template.
    #[arg(long)]
    template: bool,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "distributed")]
    policy: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add per-node delay columns.
    #[arg(long)]
    per_node: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1 << 24)]
    budget: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// Template TOML with optional `[solver]` table.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "greedy,most-foa,guaranteed-greedy,locally-optimal,distributed")]
    policy: String,
    #[arg(long, default_value = "capacity")]
    axis: String,
    /// Comma-separated, strictly increasing.
    #[arg(long)]
    values: String,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Base seed; repetition `r` uses `seed + r`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    per_node: bool,
    /// Score baselines with the cooperative model.
    #[arg(long)]
    cooperative_baselines: bool,
}

#[derive(Args)]
struct HitArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "greedy,most-foa,guaranteed-greedy,locally-optimal,distributed")]
    policy: String,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    /// Report the greedy policy's global hits too.
    #[arg(long)]
    show_greedy_global: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CaseArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Node budget of the centralized solve.
    #[arg(long, default_value_t = CASE_STUDY_MAX_NODES)]
    max_nodes: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Template file for sweeps: the generator fields at the top level plus an
/// optional `[solver]` table.
#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    #[serde(flatten)]
    template: ScenarioTemplate,
    solver: Option<SolverConfig>,
}

fn load_template(path: &Path) -> Result<TemplateFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_scenario(source: &Source) -> Result<(Scenario, Option<SolverConfig>, u64), Error> {
    match (&source.config, source.template) {
        (Some(path), false) => {
            let mut config = ScenarioConfig::load(path)?;
            if let Some(seed) = source.seed {
                config.seed = seed;
            }
            Ok((config.build()?, config.solver.clone(), config.seed))
        }
        (path, _) => {
            let file = match path {
                Some(p) => load_template(p)?,
                None => TemplateFile::default(),
            };
            let seed = source.seed.unwrap_or(0);
            Ok((file.template.build(seed)?, file.solver, seed))
        }
    }
}

fn evaluation(solver: Option<&SolverConfig>) -> Result<Evaluation, Error> {
    let bnb = match solver {
        Some(c) => BnbParams::try_from(c)?,
        None => BnbParams::default(),
    };
    Ok(Evaluation { bnb, ..Evaluation::default() })
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

fn solve(args: &SolveArgs) -> Result<bool, Error> {
    let (scenario, solver, seed) = load_scenario(&args.source)?;
    let policy: Policy = args.policy.parse()?;
    let ev = evaluation(solver.as_ref())?;
    let outcome = run_policy(&scenario, policy, &ev)?;
    let mut header = vec!["policy", "seed", "objective", "mean_node_delay", "distinct_contents", "nodes_explored", "status"];
    let names: Vec<String> = (1..=scenario.node_count()).map(|n| format!("node_delay_{n}")).collect();
    if args.per_node {
        header.extend(names.iter().map(String::as_str));
    }
    let mut row = vec![
        policy.name().to_string(),
        seed.to_string(),
        format_sig6(outcome.objective),
        format_sig6(outcome.objective / scenario.node_count() as f64),
        outcome.placement.distinct_contents().to_string(),
        outcome.nodes_explored.map_or(String::new(), |n| n.to_string()),
        outcome.status.to_string(),
    ];
    if args.per_node {
        row.extend(outcome.node_delays.iter().map(|&d| format_sig6(d)));
    }
    write_out(args.out.as_deref(), &csv_text(&header, &[row])?)?;
    if args.out.is_some() {
        print!("{}", outcome.placement);
    }
    Ok(outcome.status != SolveStatus::NodeLimit.as_str())
}

fn oracle(args: &OracleArgs) -> Result<bool, Error> {
    let (scenario, _, _) = load_scenario(&args.source)?;
    let sol = exhaustive_optimal(&scenario, OracleBudget { max_enumerations: args.budget })?;
    println!("objective = {}", format_sig6(sol.objective));
    print!("{}", sol.placement);
    Ok(true)
}

fn sweep(args: &SweepArgs) -> Result<bool, Error> {
    let file = match &args.config {
        Some(p) => load_template(p)?,
        None => TemplateFile::default(),
    };
    let values: Vec<f64> = args
        .values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::InvalidSweep(format!("bad axis value `{v}`"))))
        .collect::<Result<_, _>>()?;
    let mut ev = evaluation(file.solver.as_ref())?;
    ev.cooperative_baselines = args.cooperative_baselines;
    let spec = SweepSpec {
        axis: args.axis.parse()?,
        values,
        fixed: file.template,
        policies: parse_policies(&args.policy)?,
        repetitions: args.reps,
        base_seed: args.seed,
        per_node: args.per_node,
        evaluation: ev,
    };
    let result = run_sweep(&spec)?;
    match &args.out {
        Some(path) => emit_csv(&result, path)?,
        None => print!("{}", to_csv(&result)?),
    }
    Ok(!result.hit_solver_limit())
}

fn hit(args: &HitArgs) -> Result<bool, Error> {
    let (scenario, solver, seed) = load_scenario(&args.source)?;
    let ev = evaluation(solver.as_ref())?;
    let stream = generate_requests(&scenario, args.count, seed)?;
    let mut rows = Vec::new();
    let mut complete = true;
    for policy in parse_policies(&args.policy)? {
        let outcome = run_policy(&scenario, policy, &ev)?;
        complete &= outcome.status != SolveStatus::NodeLimit.as_str();
        let report = hit_rates(&scenario, &outcome.placement, &stream, policy.cooperative())?;
        let hide_global = policy == Policy::Baseline(PolicyKind::Greedy) && !args.show_greedy_global;
        for n in 0..scenario.node_count() {
            rows.push(vec![
                policy.name().to_string(),
                (n + 1).to_string(),
                format_sig6(report.local_hit[n]),
                if hide_global { String::new() } else { format_sig6(report.global_hit[n]) },
                format_sig6(report.h_tot),
                format_sig6(report.h_star_tot),
                seed.to_string(),
                args.count.to_string(),
            ]);
        }
    }
    let header = ["policy", "n", "local_hit", "global_hit", "h_tot", "h_star_tot", "seed", "count"];
    write_out(args.out.as_deref(), &csv_text(&header, &rows)?)?;
    Ok(complete)
}

fn case_study(args: &CaseArgs) -> Result<bool, Error> {
    if args.reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut complete = true;
    for rep in 0..args.reps {
        for row in sweep::case_study(args.seed + rep as u64, args.max_nodes)? {
            complete &= row.status != SolveStatus::NodeLimit.as_str();
            let p = &row.placement;
            let cells: Vec<String> =
                (0..p.node_count()).map(|n| p.row(n).iter().map(|&b| if b { '1' } else { '0' }).collect()).collect();
            rows.push(vec![
                row.policy.name().to_string(),
                row.seed.to_string(),
                format_sig6(row.objective),
                p.distinct_contents().to_string(),
                p.content_count().to_string(),
                row.nodes_explored.map_or(String::new(), |n| n.to_string()),
                row.status.to_string(),
                cells.join(" "),
            ]);
        }
    }
    let header = ["policy", "seed", "objective", "distinct_contents", "content_count", "nodes_explored", "status", "placement"];
    write_out(args.out.as_deref(), &csv_text(&header, &rows)?)?;
    Ok(complete)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Intractable(_) | Error::BudgetExceeded { .. } => 3,
        Error::SolverLimit(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => oracle(a),
        Command::Sweep(a) => sweep(a),
        Command::HitRates(a) => hit(a),
        Command::CaseStudy(a) => case_study(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("edgecache: node limit reached; the reported placement is the best found");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("edgecache: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
