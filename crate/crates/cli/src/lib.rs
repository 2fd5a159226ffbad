//! Command-line drivers around `boostkit`: selection on general graphs and
//! trees, synthetic generators and the two experiment sweeps.

pub mod commands;
pub mod error;
pub mod generate;

use std::path::{Path, PathBuf};

use boostkit::{Graph, NodeSet};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "boostkit", version, about = "Select nodes to boost so influence spread grows the most")]
pub struct Cli {
    /// Worker threads for sampling and simulation (results do not depend on it).
    #[arg(long, env = "BOOSTKIT_THREADS", global = true)]
    pub threads: Option<usize>,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choose a boost set on a general graph and evaluate it.
    Select(SelectArgs),
    /// Choose a boost set on a bidirected tree.
    Tree(TreeArgs),
    /// Complete binary tree with Trivalency probabilities.
    GenTree(GenTreeArgs),
    /// Uniform random directed graph with Trivalency probabilities.
    GenGraph(GenGraphArgs),
    /// Split a seeding budget between seeds and boosts.
    BudgetSweep(SweepArgs),
    /// Perturb a PRR-Boost solution and report lower-bound ratios.
    RatioProbe(ProbeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SelectAlgo {
    PrrBoost,
    PrrBoostLb,
    HighdegGlobal,
    HighdegLocal,
    Pagerank,
    MoreSeeds,
    Exact,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TreeAlgo {
    Greedy,
    Dp,
    Exact,
}

#[derive(Clone, Debug, Args)]
pub struct Instance {
    /// Edge list: `src dst p p_boost` per line.
    #[arg(long)]
    pub graph: PathBuf,
    /// One seed id per line.
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(short = 'k')]
    pub k: usize,
    /// Replace every `p'` by `1 - (1 - p)^beta` after loading.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct Sampling {
    #[arg(long = "eps", default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    /// Master seed for every random stream.
    #[arg(long = "rng", default_value_t = 0)]
    pub rng: u64,
}

#[derive(Clone, Debug, Args)]
pub struct SelectArgs {
    #[arg(long, value_enum)]
    pub algo: SelectAlgo,
    #[command(flatten)]
    pub instance: Instance,
    #[command(flatten)]
    pub sampling: Sampling,
    /// Monte-Carlo trials for the final evaluation (0 skips it).
    #[arg(long, default_value_t = 20_000)]
    pub mc_trials: u64,
    /// Degree score 1-4 for the high-degree baselines; without it the best of
    /// the four is reported.
    #[arg(long)]
    pub variant: Option<u8>,
    /// Include wall-clock timings (makes the report run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Clone, Debug, Args)]
pub struct TreeArgs {
    #[arg(long, value_enum)]
    pub algo: TreeAlgo,
    #[command(flatten)]
    pub instance: Instance,
    #[arg(long = "eps", default_value_t = 0.5)]
    pub epsilon: f64,
    /// Root for the DP; chosen automatically when absent.
    #[arg(long)]
    pub root: Option<u32>,
    /// Skip the c/f range refinement of the DP.
    #[arg(long)]
    pub no_refine: bool,
    /// Cap on subsets examined by the exhaustive search.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_subsets: u64,
}

#[derive(Clone, Debug, Args)]
pub struct GenTreeArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long = "rng", default_value_t = 0)]
    pub rng: u64,
}

#[derive(Clone, Debug, Args)]
pub struct GenGraphArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub edges: usize,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long = "rng", default_value_t = 0)]
    pub rng: u64,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Total budget in units of seeds.
    #[arg(long, default_value_t = 100)]
    pub seed_budget: usize,
    /// Boosted users one seed costs.
    #[arg(long)]
    pub cost_ratio: u64,
    /// Fractions of the budget spent on seeds.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub sampling: Sampling,
    #[arg(long, default_value_t = 20_000)]
    pub mc_trials: u64,
    /// Independent repetitions, each with its own seed sets.
    #[arg(long, default_value_t = 1)]
    pub repeat: u32,
}

#[derive(Clone, Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[command(flatten)]
    pub sampling: Sampling,
    /// Perturbed sets to draw, the unperturbed solution included.
    #[arg(long, default_value_t = 300)]
    pub sets: usize,
    /// Keep rows whose estimated boost is below half that of the solution.
    #[arg(long)]
    pub keep_all: bool,
}

/// Runs a command and returns what it would print.
pub fn execute(command: &Command) -> CliResult<String> {
    match command {
        Command::Select(a) => commands::select(a),
        Command::Tree(a) => commands::tree(a),
        Command::GenTree(a) => Ok(generate::complete_binary_tree(a.nodes, a.beta, a.rng)?.to_edge_list()),
        Command::GenGraph(a) => Ok(generate::random_graph(a.nodes, a.edges, a.beta, a.rng)?.to_edge_list()),
        Command::BudgetSweep(a) => commands::budget_sweep(a),
        Command::RatioProbe(a) => commands::ratio_probe(a),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.to_owned(), source })
}

pub fn load_graph(path: &Path, beta: Option<f64>) -> CliResult<Graph> {
    let g = Graph::parse(&read(path)?).map_err(|source| CliError::Input { path: path.to_owned(), source })?;
    match beta {
        Some(b) => Ok(g.apply_beta_boost(b)?),
        None => Ok(g),
    }
}

pub fn load_seeds(path: &Path, graph: &Graph) -> CliResult<NodeSet> {
    graph.parse_node_set(&read(path)?).map_err(|source| CliError::Input { path: path.to_owned(), source })
}
