//! Monte-Carlo estimation of boosted spread and exact enumeration oracles.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BoostError, Result};
use crate::graph::{BoostGraph, Edge, NodeId, NodeSet};
use crate::num::Probability;
use crate::rng::{substream, Domain};

/// Three-way edge outcome in a sampled world.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum EdgeState {
    Live,
    /// Live only if the destination is boosted.
    Boost,
    Blocked,
}

/// Draws the state of `e`: live w.p. `p`, boost-only w.p. `p' - p`, blocked otherwise.
#[inline]
pub fn draw_state<P: Probability, R: Rng + ?Sized>(e: &Edge<P>, rng: &mut R) -> EdgeState {
    let u: f64 = rng.gen();
    if u < e.p.as_f64() {
        EdgeState::Live
    } else if u < e.p_boost.as_f64() {
        EdgeState::Boost
    } else {
        EdgeState::Blocked
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpreadEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl SpreadEstimate {
    fn from_sums(sum: u64, sum_sq: u128, trials: u64) -> Self {
        let t = trials as f64;
        let mean = sum as f64 / t;
        let std_error = if trials > 1 {
            // Integer numerator keeps the B = {} case exactly zero.
            let num = (trials as u128) * sum_sq - (sum as u128) * (sum as u128);
            let var = num as f64 / (t * (t - 1.0));
            (var / t).sqrt()
        } else {
            0.0
        };
        SpreadEstimate { mean, std_error, trials }
    }
}

/// Estimates of `sigma(S, {})`, `sigma(S, B)` and their paired difference.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairedEstimate {
    pub base: SpreadEstimate,
    pub boosted: SpreadEstimate,
    pub boost: SpreadEstimate,
}

/// Reusable buffers for paired cascades on one graph.
pub struct PairedSimulator<'g, P> {
    graph: &'g BoostGraph<P>,
    seeds: Vec<NodeId>,
    boosted: Vec<bool>,
    active: Vec<u32>,
    stamp: u32,
    queue: Vec<NodeId>,
    deferred: Vec<NodeId>,
}

impl<'g, P: Probability> PairedSimulator<'g, P> {
    pub fn new(graph: &'g BoostGraph<P>, seeds: &NodeSet, boost: &NodeSet) -> Self {
        let n = graph.node_count();
        PairedSimulator {
            graph,
            seeds: seeds.iter().filter(|v| v.index() < n).collect(),
            boosted: boost.to_mask(n),
            active: vec![0; n],
            stamp: 0,
            queue: Vec::new(),
            deferred: Vec::new(),
        }
    }

    fn next_stamp(&mut self) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.active.iter_mut().for_each(|a| *a = 0);
            self.stamp = 1;
        }
    }

    /// One world shared by both cascades: returns `(base, boosted)` activation counts.
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (usize, usize) {
        self.next_stamp();
        let stamp = self.stamp;
        self.queue.clear();
        self.deferred.clear();
        for &s in &self.seeds {
            if self.active[s.index()] != stamp {
                self.active[s.index()] = stamp;
                self.queue.push(s);
            }
        }
        // Base cascade; boost-only edges into boosted nodes are parked.
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for &ei in self.graph.out_edges(u) {
                let e = self.graph.edge(ei as usize);
                let v = e.dst.index();
                if self.active[v] == stamp {
                    continue;
                }
                match draw_state(e, rng) {
                    EdgeState::Live => {
                        self.active[v] = stamp;
                        self.queue.push(e.dst);
                    }
                    EdgeState::Boost if self.boosted[v] => self.deferred.push(e.dst),
                    _ => {}
                }
            }
        }
        let base = self.queue.len();
        // Boosted cascade continues from the parked edges.
        for i in 0..self.deferred.len() {
            let v = self.deferred[i];
            if self.active[v.index()] != stamp {
                self.active[v.index()] = stamp;
                self.queue.push(v);
            }
        }
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for &ei in self.graph.out_edges(u) {
                let e = self.graph.edge(ei as usize);
                let v = e.dst.index();
                if self.active[v] == stamp {
                    continue;
                }
                let fires = match draw_state(e, rng) {
                    EdgeState::Live => true,
                    EdgeState::Boost => self.boosted[v],
                    EdgeState::Blocked => false,
                };
                if fires {
                    self.active[v] = stamp;
                    self.queue.push(e.dst);
                }
            }
        }
        (base, self.queue.len())
    }
}

/// Single paired draw.
pub fn simulate_paired<P: Probability, R: Rng + ?Sized>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    boost: &NodeSet,
    rng: &mut R,
) -> (usize, usize) {
    PairedSimulator::new(graph, seeds, boost).run(rng)
}

/// Paired Monte-Carlo estimate over `trials` worlds. Trial `i` uses its own
/// stream, and sums are integers, so the result is independent of the thread
/// count.
pub fn estimate_paired<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    boost: &NodeSet,
    trials: u64,
    master_seed: u64,
) -> Result<PairedEstimate> {
    if trials == 0 {
        return Err(BoostError::InvalidParameter("trials must be at least 1".into()));
    }
    #[derive(Default, Clone, Copy)]
    struct Acc {
        base: u64,
        base_sq: u128,
        boosted: u64,
        boosted_sq: u128,
        diff: u64,
        diff_sq: u128,
    }
    let acc = (0..trials)
        .into_par_iter()
        .fold(
            || (PairedSimulator::new(graph, seeds, boost), Acc::default()),
            |(mut sim, mut a), i| {
                let mut rng = substream(master_seed, Domain::MonteCarlo, i);
                let (b, x) = sim.run(&mut rng);
                let (b, x) = (b as u64, x as u64);
                let d = x - b;
                a.base += b;
                a.base_sq += (b as u128) * (b as u128);
                a.boosted += x;
                a.boosted_sq += (x as u128) * (x as u128);
                a.diff += d;
                a.diff_sq += (d as u128) * (d as u128);
                (sim, a)
            },
        )
        .map(|(_, a)| a)
        .reduce(Acc::default, |l, r| Acc {
            base: l.base + r.base,
            base_sq: l.base_sq + r.base_sq,
            boosted: l.boosted + r.boosted,
            boosted_sq: l.boosted_sq + r.boosted_sq,
            diff: l.diff + r.diff,
            diff_sq: l.diff_sq + r.diff_sq,
        });
    Ok(PairedEstimate {
        base: SpreadEstimate::from_sums(acc.base, acc.base_sq, trials),
        boosted: SpreadEstimate::from_sums(acc.boosted, acc.boosted_sq, trials),
        boost: SpreadEstimate::from_sums(acc.diff, acc.diff_sq, trials),
    })
}

/// Paired estimate of the boost `sigma(S, B) - sigma(S, {})`.
pub fn estimate_boost<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    boost: &NodeSet,
    trials: u64,
    master_seed: u64,
) -> Result<SpreadEstimate> {
    Ok(estimate_paired(graph, seeds, boost, trials, master_seed)?.boost)
}

/// Limits for the exhaustive oracles.
#[derive(Copy, Clone, Debug)]
pub struct EnumerationConfig {
    /// Maximum number of edges reachable from the seeds.
    pub max_edges: usize,
    /// Maximum number of candidate subsets.
    pub max_subsets: u128,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig { max_edges: 22, max_subsets: 1_000_000 }
    }
}

/// Edges whose source is reachable from `seeds` ignoring probabilities. Only
/// these can influence the outcome.
pub fn relevant_edge_count<P: Probability>(graph: &BoostGraph<P>, seeds: &NodeSet) -> usize {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut stack: Vec<NodeId> = seeds.iter().filter(|v| v.index() < n).collect();
    for v in &stack {
        seen[v.index()] = true;
    }
    let mut edges = 0;
    while let Some(u) = stack.pop() {
        for &ei in graph.out_edges(u) {
            edges += 1;
            let v = graph.edge(ei as usize).dst;
            if !seen[v.index()] {
                seen[v.index()] = true;
                stack.push(v);
            }
        }
    }
    edges
}

/// Exact `sigma_S(B)`: the expectation over every live/blocked world, where an
/// edge into a boosted node is live with `p'` and otherwise with `p`.
///
/// Worlds are enumerated lazily: only edges leaving an already active node
/// towards an inactive one are branched on, which sums the same probability
/// mass as the full `2^m` enumeration.
pub fn exact_sigma<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    boost: &NodeSet,
    config: &EnumerationConfig,
) -> Result<P> {
    let m = relevant_edge_count(graph, seeds);
    if m > config.max_edges {
        return Err(BoostError::EnumerationCap { edges: m, cap: config.max_edges });
    }
    let n = graph.node_count();
    let mut walker = WorldWalker {
        graph,
        boosted: boost.to_mask(n),
        active: vec![false; n],
        count: 0,
    };
    let mut pending = Vec::new();
    for s in seeds.iter().filter(|v| v.index() < n) {
        if !walker.active[s.index()] {
            walker.active[s.index()] = true;
            walker.count += 1;
            pending.extend_from_slice(graph.out_edges(s));
        }
    }
    Ok(walker.expect(pending))
}

struct WorldWalker<'g, P> {
    graph: &'g BoostGraph<P>,
    boosted: Vec<bool>,
    active: Vec<bool>,
    count: usize,
}

impl<P: Probability> WorldWalker<'_, P> {
    fn expect(&mut self, mut pending: Vec<u32>) -> P {
        let mut forced = Vec::new();
        let mut result = None;
        while let Some(ei) = pending.pop() {
            let e = self.graph.edge(ei as usize);
            let v = e.dst.index();
            if self.active[v] {
                continue;
            }
            let q = e.prob(self.boosted[v]);
            if q <= P::zero() {
                continue;
            }
            if q >= P::one() {
                self.active[v] = true;
                self.count += 1;
                forced.push(v);
                pending.extend_from_slice(self.graph.out_edges(e.dst));
                continue;
            }
            let mut live_pending = pending.clone();
            live_pending.extend_from_slice(self.graph.out_edges(e.dst));
            self.active[v] = true;
            self.count += 1;
            let live = self.expect(live_pending);
            self.active[v] = false;
            self.count -= 1;
            let blocked = self.expect(pending);
            result = Some(q * live + (P::one() - q) * blocked);
            break;
        }
        let r = result.unwrap_or_else(|| P::lit(self.count as f64));
        for v in forced {
            self.active[v] = false;
            self.count -= 1;
        }
        r
    }
}

/// Exact `Delta_S(B)`.
pub fn exact_delta<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    boost: &NodeSet,
    config: &EnumerationConfig,
) -> Result<P> {
    let base = exact_sigma(graph, seeds, &NodeSet::new(), config)?;
    Ok(exact_sigma(graph, seeds, boost, config)? - base)
}

/// Number of subsets of size at most `k` drawn from `c` items, saturating.
pub fn subsets_up_to(c: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for i in 0..=k.min(c) {
        total = total.saturating_add(term);
        term = term.saturating_mul((c - i) as u128) / (i as u128 + 1);
    }
    total
}

/// Exhaustive search over subsets of `candidates` (ascending) with at most `k`
/// members. Returns the lexicographically smallest maximiser of `eval`.
pub fn exact_best_boost_with<F>(
    candidates: &[NodeId],
    k: usize,
    max_subsets: u128,
    mut eval: F,
) -> Result<(NodeSet, f64)>
where
    F: FnMut(&NodeSet) -> Result<f64>,
{
    let total = subsets_up_to(candidates.len(), k);
    if total > max_subsets {
        return Err(BoostError::SubsetCap { subsets: total, cap: max_subsets });
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let empty = NodeSet::new();
    let mut best = (empty.clone(), eval(&empty)?);
    let mut chosen: Vec<NodeId> = Vec::with_capacity(k);
    fn dfs<F: FnMut(&NodeSet) -> Result<f64>>(
        cands: &[NodeId],
        start: usize,
        k: usize,
        chosen: &mut Vec<NodeId>,
        best: &mut (NodeSet, f64),
        eval: &mut F,
    ) -> Result<()> {
        if chosen.len() == k {
            return Ok(());
        }
        for i in start..cands.len() {
            chosen.push(cands[i]);
            let set = NodeSet::from_sorted_unchecked(chosen.clone());
            let val = eval(&set)?;
            if val > best.1 + 1e-12 {
                *best = (set, val);
            }
            dfs(cands, i + 1, k, chosen, best, eval)?;
            chosen.pop();
        }
        Ok(())
    }
    dfs(&sorted, 0, k, &mut chosen, &mut best, &mut eval)?;
    Ok(best)
}

/// Optimal boost set of size at most `k` among `V \ S` by exhaustive search
/// with the exact oracle.
pub fn exact_best_boost<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    config: &EnumerationConfig,
) -> Result<(NodeSet, f64)> {
    let candidates = graph.candidates(seeds);
    let base = exact_sigma(graph, seeds, &NodeSet::new(), config)?;
    exact_best_boost_with(&candidates, k, config.max_subsets, |b| {
        Ok((exact_sigma(graph, seeds, b, config)? - base).as_f64())
    })
}
