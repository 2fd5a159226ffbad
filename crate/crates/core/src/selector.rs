//! Sampling schedule and node selection on PRR-graph batches, plus classic
//! reverse-reachable (RR) sets for seed selection.

use std::f64::consts::{E, LN_2};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{BoostError, Result};
use crate::graph::{BoostGraph, NodeId, NodeSet};
use crate::num::Probability;
use crate::prr::{CriticalOutcome, PrrClassification, PrrGenerator, PrrGraph, RootChoice};
use crate::rng::{substream, Domain};

/// `ln C(n, k)` through log-gamma.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (n, k) = (n as f64, k as f64);
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Constants of the sampling schedule.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ImmParams {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub ell_prime: f64,
    pub alpha: f64,
    pub beta_imm: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub log_binom: f64,
}

impl ImmParams {
    /// Parameters for boosting, with `l' = l (1 + ln 3 / ln n)`.
    pub fn new(n: usize, k: usize, epsilon: f64, ell: f64) -> Result<Self> {
        Self::check_n(n)?;
        Self::with_ell_prime(n, k, epsilon, ell * (1.0 + 3f64.ln() / (n as f64).ln()))
    }

    fn check_n(n: usize) -> Result<()> {
        if n < 2 {
            return Err(BoostError::InvalidParameter(format!("the graph needs at least 2 nodes, got {n}")));
        }
        Ok(())
    }

    pub fn with_ell_prime(n: usize, k: usize, epsilon: f64, ell_prime: f64) -> Result<Self> {
        Self::check_n(n)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(BoostError::InvalidParameter(format!("epsilon must be in (0, 1), got {epsilon}")));
        }
        if !(ell_prime > 0.0) {
            return Err(BoostError::InvalidParameter(format!("ell must be positive, got {ell_prime}")));
        }
        if k == 0 || k > n {
            return Err(BoostError::InvalidParameter(format!("k must be in [1, {n}], got {k}")));
        }
        let ln_n = (n as f64).ln();
        let c = 1.0 - 1.0 / E;
        let log_binom = ln_binomial(n, k);
        let alpha = (ell_prime * ln_n + LN_2).sqrt();
        let beta_imm = (c * (log_binom + ell_prime * ln_n + LN_2)).sqrt();
        let eps1 = epsilon * alpha / (c * alpha + beta_imm);
        let eps2 = epsilon - c * eps1;
        Ok(ImmParams { n, k, epsilon, ell_prime, alpha, beta_imm, eps1, eps2, log_binom })
    }

    /// `eps' = sqrt(2) eps`, used while probing for a lower bound.
    pub fn eps_prime(&self) -> f64 {
        2f64.sqrt() * self.epsilon
    }

    pub fn lambda_prime(&self) -> f64 {
        let n = self.n as f64;
        let ep = self.eps_prime();
        (2.0 + 2.0 * ep / 3.0) * (self.log_binom + self.ell_prime * n.ln() + n.log2().ln()) * n / (ep * ep)
    }

    pub fn lambda_star(&self) -> f64 {
        let c = 1.0 - 1.0 / E;
        let t = c * self.alpha + self.beta_imm;
        2.0 * self.n as f64 * t * t / (self.epsilon * self.epsilon)
    }

    /// Number of probing rounds, at least one.
    pub fn rounds(&self) -> u32 {
        let l = (self.n as f64).log2().ceil() as u32;
        l.saturating_sub(1).max(1)
    }
}

/// A sample that contributes a set of nodes to max coverage.
pub trait CoverSet {
    fn cover_set(&self) -> &[NodeId];
}

impl CoverSet for PrrGraph {
    fn cover_set(&self) -> &[NodeId] {
        self.critical()
    }
}

/// Critical nodes of one boostable sample, without the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalSet(pub Vec<NodeId>);

impl CoverSet for CriticalSet {
    fn cover_set(&self) -> &[NodeId] {
        &self.0
    }
}

/// Nodes that reach the root through live edges, in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrSet(pub Vec<NodeId>);

impl CoverSet for RrSet {
    fn cover_set(&self) -> &[NodeId] {
        &self.0
    }
}

/// One draw of the sampler.
#[derive(Clone, Debug)]
pub enum Draw<T> {
    /// Contributes nothing for any boost set (activated, or already covered).
    Activated,
    Hopeless,
    Item(T),
}

/// Samples kept for selection. Samples that cannot contribute are only counted,
/// but they still count toward `theta`.
#[derive(Clone, Debug)]
pub struct SampleBatch<T> {
    pub items: Vec<T>,
    pub activated: u64,
    pub hopeless: u64,
    pub edges_visited: u64,
    pub params: ImmParams,
    /// Nodes never selected (the seeds).
    pub excluded: NodeSet,
    /// Lower bound on the optimum found while probing (1 if no round succeeded).
    pub lower_bound: f64,
}

impl<T> SampleBatch<T> {
    pub fn new(params: ImmParams, excluded: NodeSet) -> Self {
        SampleBatch {
            items: Vec::new(),
            activated: 0,
            hopeless: 0,
            edges_visited: 0,
            params,
            excluded,
            lower_bound: 1.0,
        }
    }

    pub fn theta(&self) -> u64 {
        self.items.len() as u64 + self.activated + self.hopeless
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Mean number of edges examined per sample.
    pub fn ept(&self) -> f64 {
        if self.theta() == 0 {
            0.0
        } else {
            self.edges_visited as f64 / self.theta() as f64
        }
    }

    fn scale(&self) -> f64 {
        if self.theta() == 0 {
            0.0
        } else {
            self.n() as f64 / self.theta() as f64
        }
    }

    /// Nodes eligible for selection, ascending.
    pub fn candidates(&self) -> Vec<NodeId> {
        (0..self.n()).map(NodeId::from).filter(|&v| !self.excluded.contains(v)).collect()
    }

    /// Appends samples `theta()..target`; sample `i` depends only on `i`.
    pub fn grow<G, I, D>(&mut self, target: u64, init: &I, draw: &D)
    where
        T: Send,
        I: Fn() -> G + Sync + Send,
        D: Fn(&mut G, u64) -> (Draw<T>, usize) + Sync + Send,
    {
        let start = self.theta();
        if target <= start {
            return;
        }
        let drawn: Vec<(Draw<T>, usize)> = (start..target).into_par_iter().map_init(init, |g, i| draw(g, i)).collect();
        for (d, visited) in drawn {
            self.edges_visited += visited as u64;
            match d {
                Draw::Activated => self.activated += 1,
                Draw::Hopeless => self.hopeless += 1,
                Draw::Item(t) => self.items.push(t),
            }
        }
    }
}

impl<T: CoverSet + Sync> SampleBatch<T> {
    /// `mu_hat(B) = n / theta * #{R : B meets C_R}`.
    pub fn mu_hat(&self, boost: &NodeSet) -> f64 {
        let hits = self.items.par_iter().filter(|r| r.cover_set().iter().any(|&v| boost.contains(v))).count();
        self.scale() * hits as f64
    }
}

impl SampleBatch<PrrGraph> {
    /// `delta_hat(B) = n / theta * sum_R f_R(B)`.
    pub fn delta_hat(&self, boost: &NodeSet) -> f64 {
        let mask = boost.to_mask(self.n());
        let hits = self.items.par_iter().filter(|r| r.f_eval(mask.as_slice())).count();
        self.scale() * hits as f64
    }
}

/// Free-function form of [`SampleBatch::mu_hat`].
pub fn mu_hat<T: CoverSet + Sync>(batch: &SampleBatch<T>, boost: &NodeSet) -> f64 {
    batch.mu_hat(boost)
}

/// Free-function form of [`SampleBatch::delta_hat`].
pub fn delta_hat(batch: &SampleBatch<PrrGraph>, boost: &NodeSet) -> f64 {
    batch.delta_hat(boost)
}

/// Outcome of greedy max coverage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub chosen: NodeSet,
    /// Samples covered by `chosen`.
    pub covered: u64,
    /// True if every sample was covered before `k` picks were made.
    pub exhausted: bool,
}

/// Greedy max coverage: pick the candidate covering the most uncovered sets,
/// smallest id on ties; once nothing more can be covered, pad with the
/// smallest unused ids.
pub fn greedy_cover<T: CoverSet>(items: &[T], n: usize, excluded: &NodeSet, k: usize) -> Result<Coverage> {
    let available = n - excluded.iter().filter(|v| v.index() < n).count();
    if k > available {
        return Err(BoostError::InsufficientCandidates { needed: k, available });
    }
    let blocked = excluded.to_mask(n);
    let mut index: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut count = vec![0u64; n];
    for (i, r) in items.iter().enumerate() {
        for &v in r.cover_set() {
            if v.index() < n && !blocked[v.index()] {
                index[v.index()].push(i as u32);
                count[v.index()] += 1;
            }
        }
    }
    let mut covered_flag = vec![false; items.len()];
    let mut taken = blocked;
    let mut chosen = Vec::with_capacity(k);
    let mut covered = 0u64;
    let mut exhausted = false;
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if !taken[v] && best.map_or(true, |b| count[v] > count[b]) {
                best = Some(v);
            }
        }
        let Some(v) = best else { break };
        if count[v] == 0 {
            exhausted = true;
        }
        taken[v] = true;
        chosen.push(NodeId::from(v));
        for &i in &index[v] {
            let i = i as usize;
            if !covered_flag[i] {
                covered_flag[i] = true;
                covered += 1;
                for &u in items[i].cover_set() {
                    if u.index() < n {
                        count[u.index()] = count[u.index()].saturating_sub(1);
                    }
                }
            }
        }
    }
    Ok(Coverage { chosen: chosen.into_iter().collect(), covered, exhausted })
}

/// Two-stage schedule: geometric probing for a lower bound on the optimum of
/// the coverage objective, then growth to `lambda* / LB` samples.
pub fn imm_schedule<T, G, I, D>(params: ImmParams, excluded: NodeSet, init: I, draw: D) -> Result<SampleBatch<T>>
where
    T: CoverSet + Send + Sync,
    I: Fn() -> G + Sync + Send,
    D: Fn(&mut G, u64) -> (Draw<T>, usize) + Sync + Send,
{
    let n = params.n;
    let k = params.k;
    let mut batch = SampleBatch::new(params, excluded);
    let ep = params.eps_prime();
    let lambda_prime = params.lambda_prime();
    let mut lb = None;
    let mut last_cover = 0;
    for i in 1..=params.rounds() {
        let x = n as f64 / 2f64.powi(i as i32);
        let theta_i = (lambda_prime / x).ceil() as u64;
        batch.grow(theta_i, &init, &draw);
        let cov = greedy_cover(&batch.items, n, &batch.excluded, k)?;
        last_cover = cov.covered;
        let est = n as f64 * cov.covered as f64 / batch.theta() as f64;
        if est >= (1.0 + ep) * x {
            lb = Some(est / (1.0 + ep));
            break;
        }
    }
    let probed = lb.is_some();
    let lb = lb.unwrap_or(1.0);
    batch.lower_bound = lb;
    let theta = (params.lambda_star() / lb).ceil() as u64;
    batch.grow(theta, &init, &draw);
    // Without a probed bound the batch is as large as it ever gets; nothing
    // coverable in it means there is (as far as sampling can tell) nothing to boost.
    if !probed && last_cover == 0 && greedy_cover(&batch.items, n, &batch.excluded, k)?.covered == 0 {
        return Err(BoostError::DegenerateMu);
    }
    Ok(batch)
}

fn check_instance<P: Probability>(graph: &BoostGraph<P>, seeds: &NodeSet, k: usize) -> Result<()> {
    if seeds.is_empty() {
        return Err(BoostError::EmptySeeds);
    }
    let n = graph.node_count();
    if let Some(v) = seeds.iter().find(|v| v.index() >= n) {
        return Err(BoostError::NodeOutOfRange { id: v.0 as u64, n });
    }
    let available = n - seeds.len();
    if k > available {
        return Err(BoostError::InsufficientCandidates { needed: k, available });
    }
    Ok(())
}

/// Samples PRR-graphs until the count bound for maximising `mu` holds.
pub fn sampling_lb<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    epsilon: f64,
    ell_prime: f64,
    master_seed: u64,
) -> Result<SampleBatch<PrrGraph>> {
    check_instance(graph, seeds, k)?;
    let params = ImmParams::with_ell_prime(graph.node_count(), k, epsilon, ell_prime)?;
    PrrGenerator::new(graph, seeds, k)?;
    imm_schedule(
        params,
        seeds.clone(),
        || PrrGenerator::new(graph, seeds, k).expect("validated above"),
        |g, i| {
            let mut rng = substream(master_seed, Domain::Prr, i);
            let s = g.generate(RootChoice::Random, &mut rng);
            let d = match s.class {
                PrrClassification::Activated => Draw::Activated,
                PrrClassification::Hopeless => Draw::Hopeless,
                PrrClassification::Boostable => Draw::Item(s.graph.expect("boostable sample has a graph")),
            };
            (d, s.edges_visited)
        },
    )
}

/// Same schedule, keeping only critical sets.
pub fn sampling_lb_critical<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    epsilon: f64,
    ell_prime: f64,
    master_seed: u64,
) -> Result<SampleBatch<CriticalSet>> {
    check_instance(graph, seeds, k)?;
    let params = ImmParams::with_ell_prime(graph.node_count(), k, epsilon, ell_prime)?;
    PrrGenerator::new(graph, seeds, k)?;
    imm_schedule(
        params,
        seeds.clone(),
        || PrrGenerator::new(graph, seeds, k).expect("validated above"),
        |g, i| {
            let mut rng = substream(master_seed, Domain::Prr, i);
            let (out, visited) = g.generate_critical(RootChoice::Random, &mut rng);
            let d = match out {
                CriticalOutcome::Activated => Draw::Activated,
                CriticalOutcome::NoCritical => Draw::Hopeless,
                CriticalOutcome::Critical(c) => Draw::Item(CriticalSet(c)),
            };
            (d, visited)
        },
    )
}

/// `B_mu`: greedy max coverage of the critical sets.
pub fn select_lb<T: CoverSet>(batch: &SampleBatch<T>, k: usize) -> Result<NodeSet> {
    Ok(greedy_cover(&batch.items, batch.n(), &batch.excluded, k)?.chosen)
}

/// `B_Delta` together with the gain (newly satisfied samples) of each pick.
pub fn select_delta_traced(batch: &SampleBatch<PrrGraph>, k: usize) -> Result<(NodeSet, Vec<u64>)> {
    let n = batch.n();
    let candidates = batch.candidates();
    if k > candidates.len() {
        return Err(BoostError::InsufficientCandidates { needed: k, available: candidates.len() });
    }
    let mut taken = batch.excluded.to_mask(n);
    let mut boost_mask = vec![false; n];
    // None once the sample's root is activated.
    let mut crit: Vec<Option<Vec<NodeId>>> = batch.items.iter().map(|r| Some(r.critical().to_vec())).collect();
    let mut chosen = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);
    for _ in 0..k {
        let count = crit
            .par_iter()
            .fold(
                || vec![0u64; n],
                |mut acc, c| {
                    if let Some(c) = c {
                        for v in c {
                            acc[v.index()] += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let mut best: Option<usize> = None;
        for v in 0..n {
            if !taken[v] && best.map_or(true, |b| count[v] > count[b]) {
                best = Some(v);
            }
        }
        let Some(v) = best else { break };
        let pick = NodeId::from(v);
        taken[v] = true;
        boost_mask[v] = true;
        chosen.push(pick);
        gains.push(count[v]);
        let mask = &boost_mask;
        crit.par_iter_mut().zip(batch.items.par_iter()).for_each(|(c, r)| {
            let Some(list) = c else { return };
            if list.binary_search(&pick).is_ok() {
                *c = None;
            } else if r.contains(pick) {
                *c = Some(r.critical_given(mask.as_slice()).expect("root not yet activated").into_vec());
            }
        });
    }
    Ok((chosen.into_iter().collect(), gains))
}

/// `B_Delta`: greedy on the exact marginal of `delta_hat`.
pub fn select_delta(batch: &SampleBatch<PrrGraph>, k: usize) -> Result<NodeSet> {
    Ok(select_delta_traced(batch, k)?.0)
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub activated: u64,
    pub hopeless: u64,
    pub boostable: u64,
}

/// Estimates of one candidate set.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoredSet {
    pub boost_set: NodeSet,
    pub mu_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
}

/// What a selection run did. Timings are kept apart from everything else so
/// runs can be compared for equality.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionReport {
    pub theta: u64,
    pub counts: Counts,
    pub boost_set: NodeSet,
    pub mu_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    pub b_delta: Option<ScoredSet>,
    pub b_mu: Option<ScoredSet>,
    pub lower_bound: f64,
    pub ept: f64,
    /// True when sampling found nothing to boost and the empty set was returned.
    pub degenerate: bool,
    #[serde(skip)]
    pub timings: Timings,
}

#[derive(Copy, Clone, Debug, Default)]
pub struct Timings {
    pub sampling_millis: f64,
    pub selection_millis: f64,
}

impl PartialEq for Timings {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl SelectionReport {
    fn empty(degenerate: bool) -> Self {
        SelectionReport {
            theta: 0,
            counts: Counts::default(),
            boost_set: NodeSet::new(),
            mu_hat: 0.0,
            delta_hat: Some(0.0),
            b_delta: None,
            b_mu: None,
            lower_bound: 0.0,
            ept: 0.0,
            degenerate,
            timings: Timings::default(),
        }
    }

    fn counts_of<T>(batch: &SampleBatch<T>) -> Counts {
        Counts { activated: batch.activated, hopeless: batch.hopeless, boostable: batch.items.len() as u64 }
    }
}

/// Result of [`prr_boost_full`]: the chosen set, its report, and the batch
/// (absent when nothing was sampled).
pub struct PrrBoostRun {
    pub boost_set: NodeSet,
    pub report: SelectionReport,
    pub batch: Option<SampleBatch<PrrGraph>>,
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Sandwich selection: sample, compute `B_mu` and `B_Delta`, keep the one with
/// the larger `delta_hat`.
pub fn prr_boost_full<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    epsilon: f64,
    ell: f64,
    master_seed: u64,
) -> Result<PrrBoostRun> {
    check_instance(graph, seeds, k)?;
    if k == 0 {
        return Ok(PrrBoostRun { boost_set: NodeSet::new(), report: SelectionReport::empty(false), batch: None });
    }
    let params = ImmParams::new(graph.node_count(), k, epsilon, ell)?;
    let t0 = Instant::now();
    let batch = match sampling_lb(graph, seeds, k, epsilon, params.ell_prime, master_seed) {
        Ok(b) => b,
        Err(BoostError::DegenerateMu) => {
            return Ok(PrrBoostRun { boost_set: NodeSet::new(), report: SelectionReport::empty(true), batch: None })
        }
        Err(e) => return Err(e),
    };
    let sampling_millis = millis(t0);
    let t1 = Instant::now();
    let b_mu = select_lb(&batch, k)?;
    let b_delta = select_delta(&batch, k)?;
    let score = |b: &NodeSet| ScoredSet { boost_set: b.clone(), mu_hat: batch.mu_hat(b), delta_hat: Some(batch.delta_hat(b)) };
    let s_delta = score(&b_delta);
    let s_mu = score(&b_mu);
    let best = if s_delta.delta_hat >= s_mu.delta_hat { &s_delta } else { &s_mu };
    let report = SelectionReport {
        theta: batch.theta(),
        counts: SelectionReport::counts_of(&batch),
        boost_set: best.boost_set.clone(),
        mu_hat: best.mu_hat,
        delta_hat: best.delta_hat,
        b_delta: Some(s_delta.clone()),
        b_mu: Some(s_mu.clone()),
        lower_bound: batch.lower_bound,
        ept: batch.ept(),
        degenerate: false,
        timings: Timings { sampling_millis, selection_millis: millis(t1) },
    };
    Ok(PrrBoostRun { boost_set: report.boost_set.clone(), report, batch: Some(batch) })
}

pub fn prr_boost<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    epsilon: f64,
    ell: f64,
    master_seed: u64,
) -> Result<(NodeSet, SelectionReport)> {
    let run = prr_boost_full(graph, seeds, k, epsilon, ell, master_seed)?;
    Ok((run.boost_set, run.report))
}

/// Lower-bound-only variant: samples critical sets and returns `B_mu`.
pub fn prr_boost_lb<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    epsilon: f64,
    ell: f64,
    master_seed: u64,
) -> Result<(NodeSet, SelectionReport)> {
    check_instance(graph, seeds, k)?;
    if k == 0 {
        let mut r = SelectionReport::empty(false);
        r.delta_hat = None;
        return Ok((NodeSet::new(), r));
    }
    let params = ImmParams::new(graph.node_count(), k, epsilon, ell)?;
    let t0 = Instant::now();
    let batch = match sampling_lb_critical(graph, seeds, k, epsilon, params.ell_prime, master_seed) {
        Ok(b) => b,
        Err(BoostError::DegenerateMu) => {
            let mut r = SelectionReport::empty(true);
            r.delta_hat = None;
            return Ok((NodeSet::new(), r));
        }
        Err(e) => return Err(e),
    };
    let sampling_millis = millis(t0);
    let t1 = Instant::now();
    let b_mu = select_lb(&batch, k)?;
    let mu = batch.mu_hat(&b_mu);
    let report = SelectionReport {
        theta: batch.theta(),
        counts: SelectionReport::counts_of(&batch),
        boost_set: b_mu.clone(),
        mu_hat: mu,
        delta_hat: None,
        b_delta: None,
        b_mu: Some(ScoredSet { boost_set: b_mu.clone(), mu_hat: mu, delta_hat: None }),
        lower_bound: batch.lower_bound,
        ept: batch.ept(),
        degenerate: false,
        timings: Timings { sampling_millis, selection_millis: millis(t1) },
    };
    Ok((b_mu, report))
}

/// Classic RR set: backward search over edges that are live with probability `p`.
pub fn sample_rr_set<P: Probability, R: Rng + ?Sized>(
    graph: &BoostGraph<P>,
    root: NodeId,
    rng: &mut R,
    seen: &mut Vec<u32>,
    stamp: u32,
) -> (RrSet, usize) {
    let mut nodes = vec![root];
    seen[root.index()] = stamp;
    let mut head = 0;
    let mut visited = 0;
    while head < nodes.len() {
        let u = nodes[head];
        head += 1;
        for &ei in graph.in_edges(u) {
            visited += 1;
            let e = graph.edge(ei as usize);
            if seen[e.src.index()] != stamp && rng.gen::<f64>() < e.p.as_f64() {
                seen[e.src.index()] = stamp;
                nodes.push(e.src);
            }
        }
    }
    nodes.sort_unstable();
    (RrSet(nodes), visited)
}

/// Greedy seed selection over RR sets that avoid `existing`; sets hitting
/// `existing` are counted in `theta` but never covered. Returns the chosen
/// nodes and whether every remaining set was covered before `k` picks.
pub fn rr_select<P: Probability>(
    graph: &BoostGraph<P>,
    existing: &NodeSet,
    k: usize,
    epsilon: f64,
    ell: f64,
    master_seed: u64,
) -> Result<(NodeSet, bool)> {
    let n = graph.node_count();
    let available = n - existing.iter().filter(|v| v.index() < n).count();
    if k > available {
        return Err(BoostError::InsufficientCandidates { needed: k, available });
    }
    if k == 0 {
        return Ok((NodeSet::new(), false));
    }
    ImmParams::check_n(n)?;
    let ell_adj = ell * (1.0 + LN_2 / (n as f64).ln());
    let params = ImmParams::with_ell_prime(n, k, epsilon, ell_adj)?;
    let hit = existing.to_mask(n);
    let result = imm_schedule(
        params,
        existing.clone(),
        || (vec![0u32; n], 0u32),
        |(seen, stamp), i| {
            *stamp = stamp.wrapping_add(1);
            if *stamp == 0 {
                seen.iter_mut().for_each(|s| *s = 0);
                *stamp = 1;
            }
            let mut rng = substream(master_seed, Domain::RrSet, i);
            let root = NodeId(rng.gen_range(0..n as u32));
            let (set, visited) = sample_rr_set(graph, root, &mut rng, seen, *stamp);
            if set.0.iter().any(|v| hit[v.index()]) {
                (Draw::Activated, visited)
            } else {
                (Draw::Item(set), visited)
            }
        },
    );
    match result {
        Ok(batch) => {
            let cov = greedy_cover(&batch.items, n, &batch.excluded, k)?;
            Ok((cov.chosen, cov.exhausted))
        }
        Err(BoostError::DegenerateMu) => {
            let fill: NodeSet = (0..n).map(NodeId::from).filter(|v| !existing.contains(*v)).take(k).collect();
            Ok((fill, true))
        }
        Err(e) => Err(e),
    }
}

/// Influential seeds by classic reverse-reachable sampling.
pub fn imm_select_seeds<P: Probability>(
    graph: &BoostGraph<P>,
    k: usize,
    epsilon: f64,
    ell: f64,
    master_seed: u64,
) -> Result<NodeSet> {
    let n = graph.node_count();
    if k >= n {
        return Err(BoostError::InvalidParameter(format!("need k < n for seed selection, got k={k}, n={n}")));
    }
    Ok(rr_select(graph, &NodeSet::new(), k, epsilon, ell, master_seed)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[u32]) -> NodeSet {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    fn params(n: usize) -> ImmParams {
        ImmParams::new(n, 1, 0.5, 1.0).unwrap()
    }

    #[test]
    fn binomial_via_gamma() {
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-10);
        assert!((ln_binomial(100, 5) - 75_287_520f64.ln()).abs() < 1e-9);
        assert!(ln_binomial(5, 0).abs() < 1e-12);
    }

    #[test]
    fn parameter_arithmetic() {
        let p = ImmParams::new(100, 5, 0.5, 1.0).unwrap();
        let ln_n = 100f64.ln();
        let ell_p = 1.0 + 3f64.ln() / ln_n;
        assert!((p.ell_prime - ell_p).abs() < 1e-12);
        let c = 1.0 - 1.0 / E;
        let a = (ell_p * ln_n + LN_2).sqrt();
        let b = (c * (75_287_520f64.ln() + ell_p * ln_n + LN_2)).sqrt();
        assert!((p.alpha - a).abs() < 1e-12);
        assert!((p.beta_imm - b).abs() < 1e-9);
        assert!(p.eps1 > 0.0 && p.eps1 < p.epsilon && p.eps2 > 0.0);
        // lambda* is the count bound (2 - 2/e) n ln(C(n,k) 2 n^l') / eps2^2.
        let bound = (2.0 - 2.0 / E) * 100.0 * (p.log_binom + LN_2 + ell_p * ln_n) / (p.eps2 * p.eps2);
        assert!((p.lambda_star() - bound).abs() / bound < 1e-12);
        assert!(ImmParams::new(1, 1, 0.5, 1.0).is_err());
        assert!(ImmParams::new(10, 1, 1.0, 1.0).is_err());
        assert!(ImmParams::new(10, 11, 0.5, 1.0).is_err());
    }

    #[test]
    fn greedy_cover_rules() {
        let items = vec![CriticalSet(vec![NodeId(1), NodeId(3)])];
        let c = greedy_cover(&items, 5, &NodeSet::new(), 1).unwrap();
        assert_eq!(c.chosen, set(&[1]));
        let items = vec![CriticalSet(vec![NodeId(2)]), CriticalSet(vec![NodeId(1), NodeId(2)])];
        let c = greedy_cover(&items, 3, &NodeSet::new(), 1).unwrap();
        assert_eq!((c.chosen, c.covered), (set(&[2]), 2));
        // Padding uses the smallest unused ids outside the excluded set.
        let c = greedy_cover(&items, 5, &set(&[0]), 3).unwrap();
        assert_eq!(c.chosen, set(&[1, 2, 3]));
        assert!(c.exhausted);
        assert!(matches!(
            greedy_cover(&items, 3, &set(&[0]), 3),
            Err(BoostError::InsufficientCandidates { needed: 3, available: 2 })
        ));
        let all = greedy_cover(&items, 3, &set(&[0]), 2).unwrap();
        assert_eq!(all.chosen, set(&[1, 2]));
    }

    fn fixture_batch() -> SampleBatch<PrrGraph> {
        let text = "root 0\n* 2 boost\n* 4 boost\n* 6 boost\n2 0 live\n3 0 live\n4 0 live\n6 3 boost\n";
        let prr = PrrGraph::from_dump(text, 2).unwrap();
        let mut b = SampleBatch::new(params(12), set(&[8, 10]));
        b.items.push(prr);
        b.activated = 1;
        b
    }

    #[test]
    fn estimators_on_fixture() {
        let b = fixture_batch();
        assert_eq!(b.theta(), 2);
        assert_eq!(b.mu_hat(&NodeSet::new()), 0.0);
        assert_eq!(b.delta_hat(&NodeSet::new()), 0.0);
        assert_eq!(b.mu_hat(&set(&[2])), 6.0);
        assert_eq!(b.delta_hat(&set(&[2])), 6.0);
        assert_eq!(b.mu_hat(&set(&[3, 6])), 0.0);
        assert_eq!(b.delta_hat(&set(&[3, 6])), 6.0);
        assert_eq!(select_lb(&b, 1).unwrap(), set(&[2]));
        assert_eq!(select_delta(&b, 1).unwrap(), set(&[2]));
        assert!(select_delta(&b, 0).unwrap().is_empty());
    }

    #[test]
    fn schedule_is_monotone_in_theta() {
        let p = params(64);
        assert!(p.rounds() >= 1);
        assert!(p.lambda_prime() > 0.0 && p.lambda_star() > 0.0);
    }
}
