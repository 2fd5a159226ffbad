use std::time::Instant;

use boostkit::baselines::{best_of, high_degree_global, high_degree_local, more_seeds, pagerank_boost, DegreeVariant};
use boostkit::mc::{
    estimate_boost, estimate_paired, exact_best_boost, exact_delta, relevant_edge_count, EnumerationConfig,
    PairedEstimate, SpreadEstimate,
};
use boostkit::rng::{substream, Domain};
use boostkit::selector::{imm_select_seeds, prr_boost, prr_boost_full, prr_boost_lb, Counts, SelectionReport};
use boostkit::tree::{exhaustive_best_boost, greedy_boost, sigma, standing_assumption_violations, BidirectedTree};
use boostkit::tree_dp::{dp_boost_with, DpOptions};
use boostkit::{BoostError, Graph, NodeId, NodeSet};
use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::{load_graph, load_seeds, CliError, CliResult, ProbeArgs, SelectAlgo, SelectArgs, SweepArgs, TreeAlgo, TreeArgs};

fn name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn check_budget(graph: &Graph, seeds: &NodeSet, k: usize) -> CliResult<()> {
    if seeds.is_empty() {
        return Err(BoostError::EmptySeeds.into());
    }
    let available = graph.node_count() - seeds.len();
    if k > available {
        return Err(BoostError::InsufficientCandidates { needed: k, available }.into());
    }
    Ok(())
}

/// A baseline candidate and its Monte-Carlo boost.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    pub label: String,
    pub boost_set: NodeSet,
    pub boost: SpreadEstimate,
}

/// Report of `select`. Fields that do not apply to the algorithm are null.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectOutput {
    pub algorithm: String,
    pub k: usize,
    pub epsilon: f64,
    pub ell: f64,
    pub seed: u64,
    pub theta: Option<u64>,
    pub counts: Option<Counts>,
    pub boost_set: NodeSet,
    pub mu_hat: Option<f64>,
    pub delta_hat: Option<f64>,
    pub selection: Option<SelectionReport>,
    pub candidates: Option<Vec<Candidate>>,
    pub filled_by_id: Option<bool>,
    /// Exact boost, when the graph is small enough to enumerate.
    pub exact_delta: Option<f64>,
    pub evaluation: Option<PairedEstimate>,
    pub wall_millis: Option<f64>,
}

pub fn select(args: &SelectArgs) -> CliResult<String> {
    let graph = load_graph(&args.instance.graph, args.instance.beta)?;
    let seeds = load_seeds(&args.instance.seeds, &graph)?;
    to_json(&run_select(&graph, &seeds, args)?)
}

pub fn run_select(graph: &Graph, seeds: &NodeSet, args: &SelectArgs) -> CliResult<SelectOutput> {
    let k = args.instance.k;
    check_budget(graph, seeds, k)?;
    let (epsilon, ell, rng) = (args.sampling.epsilon, args.sampling.ell, args.sampling.rng);
    let cfg = EnumerationConfig::default();
    let start = Instant::now();
    let mut out = SelectOutput {
        algorithm: name(&args.algo),
        k,
        epsilon,
        ell,
        seed: rng,
        theta: None,
        counts: None,
        boost_set: NodeSet::new(),
        mu_hat: None,
        delta_hat: None,
        selection: None,
        candidates: None,
        filled_by_id: None,
        exact_delta: None,
        evaluation: None,
        wall_millis: None,
    };
    let with_report = |out: &mut SelectOutput, b: NodeSet, r: SelectionReport| {
        out.boost_set = b;
        out.theta = Some(r.theta);
        out.counts = Some(r.counts);
        out.mu_hat = Some(r.mu_hat);
        out.delta_hat = r.delta_hat;
        out.selection = Some(r);
    };
    match args.algo {
        SelectAlgo::PrrBoost => {
            let (b, r) = prr_boost(graph, seeds, k, epsilon, ell, rng)?;
            with_report(&mut out, b, r);
        }
        SelectAlgo::PrrBoostLb => {
            let (b, r) = prr_boost_lb(graph, seeds, k, epsilon, ell, rng)?;
            with_report(&mut out, b, r);
        }
        SelectAlgo::HighdegGlobal | SelectAlgo::HighdegLocal => {
            let variants = match args.variant {
                Some(i) => vec![DegreeVariant::from_index(i)?],
                None => DegreeVariant::ALL.to_vec(),
            };
            let sets: Vec<NodeSet> = variants
                .iter()
                .map(|&v| match args.algo {
                    SelectAlgo::HighdegGlobal => high_degree_global(graph, seeds, k, v),
                    _ => high_degree_local(graph, seeds, k, v),
                })
                .collect();
            if sets.len() > 1 && args.mc_trials == 0 {
                return Err(CliError::Usage("comparing degree variants needs --mc-trials > 0".into()));
            }
            let mut cands = Vec::new();
            let (best, _) = best_of(&sets, |b| {
                let est = estimate_boost(graph, seeds, b, args.mc_trials.max(1), rng)?;
                cands.push(est);
                Ok(est.mean)
            })?;
            out.boost_set = sets[best].clone();
            out.candidates = Some(
                variants
                    .iter()
                    .zip(sets)
                    .zip(cands)
                    .map(|((v, s), e)| Candidate { label: format!("variant-{}", *v as u8), boost_set: s, boost: e })
                    .collect(),
            );
        }
        SelectAlgo::Pagerank => out.boost_set = pagerank_boost(graph, seeds, k),
        SelectAlgo::MoreSeeds => {
            let (b, filled) = more_seeds(graph, seeds, k, epsilon, ell, rng)?;
            out.boost_set = b;
            out.filled_by_id = Some(filled);
        }
        SelectAlgo::Exact => {
            let (b, d) = exact_best_boost(graph, seeds, k, &cfg)?;
            out.boost_set = b;
            out.exact_delta = Some(d);
        }
    }
    if out.exact_delta.is_none() && relevant_edge_count(graph, seeds) <= cfg.max_edges {
        out.exact_delta = Some(exact_delta(graph, seeds, &out.boost_set, &cfg)?);
    }
    if args.mc_trials > 0 {
        out.evaluation = Some(estimate_paired(graph, seeds, &out.boost_set, args.mc_trials, rng)?);
    }
    if args.timings {
        out.wall_millis = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(out)
}

/// Report of `tree`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeOutput {
    pub algorithm: String,
    pub k: usize,
    pub boost_set: NodeSet,
    pub exact_delta: f64,
    pub sigma_base: f64,
    pub sigma: f64,
    pub epsilon: Option<f64>,
    pub root: Option<NodeId>,
    pub dp_value: Option<f64>,
    pub rounding_delta: Option<f64>,
    pub grid_points: Option<u32>,
    pub table_entries: Option<usize>,
    pub warnings: Vec<String>,
}

pub fn tree(args: &TreeArgs) -> CliResult<String> {
    let graph = load_graph(&args.instance.graph, args.instance.beta)?;
    let seeds = load_seeds(&args.instance.seeds, &graph)?;
    to_json(&run_tree(&graph, &seeds, args)?)
}

pub fn run_tree(graph: &Graph, seeds: &NodeSet, args: &TreeArgs) -> CliResult<TreeOutput> {
    let k = args.instance.k;
    let tree = BidirectedTree::from_graph(graph)?;
    check_budget(graph, seeds, k)?;
    let warnings = standing_assumption_violations(&tree, seeds)?
        .into_iter()
        .map(|v| format!("node {v} is activated with probability one once everything is boosted; treat it as a seed"))
        .collect();
    let mut out = TreeOutput {
        algorithm: name(&args.algo),
        k,
        boost_set: NodeSet::new(),
        exact_delta: 0.0,
        sigma_base: sigma(&tree, seeds, &NodeSet::new())?,
        sigma: 0.0,
        epsilon: None,
        root: None,
        dp_value: None,
        rounding_delta: None,
        grid_points: None,
        table_entries: None,
        warnings,
    };
    match args.algo {
        TreeAlgo::Greedy => out.boost_set = greedy_boost(&tree, seeds, k)?.0,
        TreeAlgo::Exact => out.boost_set = exhaustive_best_boost(&tree, seeds, k, args.max_subsets as u128)?.0,
        TreeAlgo::Dp => {
            let options = DpOptions { epsilon: args.epsilon, root: args.root.map(NodeId), refine: !args.no_refine };
            let dp = dp_boost_with(&tree, seeds, k, &options)?;
            out.epsilon = Some(args.epsilon);
            out.root = Some(dp.table.rooting().root);
            out.dp_value = Some(dp.value);
            out.rounding_delta = Some(dp.delta);
            out.grid_points = Some(dp.table.grid().top() + 1);
            out.table_entries = Some(dp.table.entry_count());
            out.boost_set = dp.boost_set;
        }
    }
    out.sigma = sigma(&tree, seeds, &out.boost_set)?;
    out.exact_delta = out.sigma - out.sigma_base;
    Ok(out)
}

/// One allocation of the seeding budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub repeat: u32,
    pub fraction: f64,
    /// Seeds bought: `floor(fraction * budget)`.
    pub s: usize,
    /// Boosts bought with the rest: `(budget - s) * ratio`.
    pub boosted: u64,
    /// Boosts actually placed (at most the number of non-seed nodes).
    pub boosted_applied: usize,
    pub sigma_estimate: f64,
    pub std_error: f64,
}

pub fn budget_sweep(args: &SweepArgs) -> CliResult<String> {
    let graph = load_graph(&args.graph, args.beta)?;
    let rows = sweep_rows(&graph, args)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of numbers is UTF-8"))
}

pub fn sweep_rows(graph: &Graph, args: &SweepArgs) -> CliResult<Vec<SweepRow>> {
    if args.grid.is_empty() {
        return Err(CliError::Usage("--grid needs at least one fraction".into()));
    }
    if let Some(f) = args.grid.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(CliError::Usage(format!("grid fraction {f} outside [0, 1]")));
    }
    if args.cost_ratio == 0 {
        return Err(CliError::Usage("--cost-ratio must be positive".into()));
    }
    if args.mc_trials == 0 {
        return Err(CliError::Usage("--mc-trials must be positive".into()));
    }
    let n = graph.node_count();
    let (eps, ell) = (args.sampling.epsilon, args.sampling.ell);
    let mut rows = Vec::new();
    for repeat in 0..args.repeat {
        let master = args.sampling.rng.wrapping_add(repeat as u64);
        for &fraction in &args.grid {
            // Slack keeps decimal fractions such as 0.29 * 100 from losing a seed.
            let s = ((fraction * args.seed_budget as f64 + 1e-9).floor() as usize).min(args.seed_budget);
            let boosted = (args.seed_budget - s) as u64 * args.cost_ratio;
            let applied = (boosted as usize).min(n.saturating_sub(s));
            let (sigma_estimate, std_error) = if s == 0 {
                (0.0, 0.0)
            } else {
                let seeds = imm_select_seeds(graph, s, eps, ell, master)?;
                let boost = if applied > 0 { prr_boost(graph, &seeds, applied, eps, ell, master)?.0 } else { NodeSet::new() };
                let est = estimate_paired(graph, &seeds, &boost, args.mc_trials, master)?.boosted;
                (est.mean, est.std_error)
            };
            rows.push(SweepRow { repeat, fraction, s, boosted, boosted_applied: applied, sigma_estimate, std_error });
        }
    }
    Ok(rows)
}

/// One perturbed boost set scored on the PRR-Boost batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeRow {
    pub index: usize,
    pub delta_hat: f64,
    pub mu_hat: f64,
    /// `mu_hat / delta_hat` (1 when both vanish).
    pub ratio: f64,
    /// Space-separated node ids.
    pub boost_set: String,
}

pub fn ratio_probe(args: &ProbeArgs) -> CliResult<String> {
    let graph = load_graph(&args.instance.graph, args.instance.beta)?;
    let seeds = load_seeds(&args.instance.seeds, &graph)?;
    let rows = probe_rows(&graph, &seeds, args)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of numbers is UTF-8"))
}

pub fn probe_rows(graph: &Graph, seeds: &NodeSet, args: &ProbeArgs) -> CliResult<Vec<ProbeRow>> {
    let k = args.instance.k;
    check_budget(graph, seeds, k)?;
    let (epsilon, ell, rng) = (args.sampling.epsilon, args.sampling.ell, args.sampling.rng);
    let run = prr_boost_full(graph, seeds, k, epsilon, ell, rng)?;
    let Some(batch) = run.batch else {
        return Err(if k == 0 {
            CliError::Usage("ratio probe needs k > 0".into())
        } else {
            BoostError::DegenerateMu.into()
        });
    };
    let solution = run.boost_set;
    let pool_all: Vec<NodeId> = graph.candidates(seeds);
    let row = |index: usize, b: &NodeSet| {
        let (d, m) = (batch.delta_hat(b), batch.mu_hat(b));
        let ratio = if d > 0.0 { m / d } else { 1.0 };
        let ids: Vec<String> = b.iter().map(|v| v.to_string()).collect();
        ProbeRow { index, delta_hat: d, mu_hat: m, ratio, boost_set: ids.join(" ") }
    };
    let first = row(0, &solution);
    let floor = 0.5 * first.delta_hat;
    let mut rows = vec![first];
    let members: Vec<NodeId> = solution.iter().collect();
    let outside: Vec<NodeId> = pool_all.iter().copied().filter(|v| !solution.contains(*v)).collect();
    for index in 1..args.sets {
        let mut r = substream(rng, Domain::Perturb, index as u64);
        let swaps = r.gen_range(1..=members.len()).min(outside.len());
        let mut keep = members.clone();
        keep.shuffle(&mut r);
        keep.truncate(members.len() - swaps);
        let mut add = outside.clone();
        add.shuffle(&mut r);
        let b: NodeSet = keep.into_iter().chain(add.into_iter().take(swaps)).collect();
        let candidate = row(index, &b);
        if args.keep_all || candidate.delta_hat >= floor {
            rows.push(candidate);
        }
    }
    Ok(rows)
}
