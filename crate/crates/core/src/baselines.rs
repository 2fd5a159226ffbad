//! Comparison heuristics: weighted degree (global and seed-local), PageRank on
//! the reversed influence graph, and spending the budget on extra seeds.

use std::collections::VecDeque;

use crate::error::{BoostError, Result};
use crate::graph::{BoostGraph, NodeId, NodeSet};
use crate::num::Probability;
use crate::selector::rr_select;

/// The four weighted-degree scores.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DegreeVariant {
    /// Sum of outgoing `p`.
    OutP = 1,
    /// Sum of outgoing `p` to nodes not yet boosted.
    OutPDiscounted = 2,
    /// Sum of incoming `p' - p`.
    InGain = 3,
    /// Sum of incoming `p' - p` from nodes not yet boosted.
    InGainDiscounted = 4,
}

impl DegreeVariant {
    pub const ALL: [DegreeVariant; 4] =
        [DegreeVariant::OutP, DegreeVariant::OutPDiscounted, DegreeVariant::InGain, DegreeVariant::InGainDiscounted];

    pub fn from_index(i: u8) -> Result<Self> {
        Self::ALL
            .get((i as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| BoostError::InvalidParameter(format!("degree variant must be 1..=4, got {i}")))
    }
}

fn degree_score<P: Probability>(graph: &BoostGraph<P>, u: NodeId, variant: DegreeVariant, boosted: &[bool]) -> f64 {
    match variant {
        DegreeVariant::OutP | DegreeVariant::OutPDiscounted => graph
            .out_edges(u)
            .iter()
            .map(|&e| graph.edge(e as usize))
            .filter(|e| variant == DegreeVariant::OutP || !boosted[e.dst.index()])
            .map(|e| e.p.as_f64())
            .sum(),
        DegreeVariant::InGain | DegreeVariant::InGainDiscounted => graph
            .in_edges(u)
            .iter()
            .map(|&e| graph.edge(e as usize))
            .filter(|e| variant == DegreeVariant::InGain || !boosted[e.src.index()])
            .map(|e| (e.p_boost - e.p).as_f64())
            .sum(),
    }
}

/// Greedy pick among nodes of the lowest available `level`, by score, then id.
fn greedy_by_level<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    variant: DegreeVariant,
    level: &[u32],
) -> NodeSet {
    let n = graph.node_count();
    let mut taken = seeds.to_mask(n);
    let mut boosted = vec![false; n];
    let k = k.min(taken.iter().filter(|&&t| !t).count());
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let lowest = (0..n).filter(|&v| !taken[v]).map(|v| level[v]).min().expect("candidates remain");
        let mut best: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| !taken[v] && level[v] == lowest) {
            let s = degree_score(graph, NodeId::from(v), variant, &boosted);
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((v, s));
            }
        }
        let (v, _) = best.expect("candidates remain");
        taken[v] = true;
        boosted[v] = true;
        chosen.push(NodeId::from(v));
    }
    chosen.into_iter().collect()
}

/// Highest weighted degree over the whole graph, recomputed after each pick.
pub fn high_degree_global<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    variant: DegreeVariant,
) -> NodeSet {
    greedy_by_level(graph, seeds, k, variant, &vec![0; graph.node_count()])
}

/// Like [`high_degree_global`], but nodes closer to the seeds (by out-hops)
/// are exhausted first; unreachable nodes come last.
pub fn high_degree_local<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    variant: DegreeVariant,
) -> NodeSet {
    let n = graph.node_count();
    let mut level = vec![u32::MAX; n];
    let mut q = VecDeque::new();
    for s in seeds.iter().filter(|v| v.index() < n) {
        level[s.index()] = 0;
        q.push_back(s);
    }
    while let Some(u) = q.pop_front() {
        for &e in graph.out_edges(u) {
            let v = graph.edge(e as usize).dst;
            if level[v.index()] == u32::MAX {
                level[v.index()] = level[u.index()] + 1;
                q.push_back(v);
            }
        }
    }
    greedy_by_level(graph, seeds, k, variant, &level)
}

pub const PAGERANK_RESTART: f64 = 0.15;
pub const PAGERANK_TOLERANCE: f64 = 1e-4;

/// PageRank of the walk that moves from `u` to an in-neighbour `v` with
/// probability `p_vu / rho(u)`, `rho(u)` being the total incoming `p`. Nodes
/// with `rho = 0` restart uniformly.
pub fn pagerank_scores<P: Probability>(graph: &BoostGraph<P>) -> Vec<f64> {
    let n = graph.node_count();
    if n == 0 {
        return Vec::new();
    }
    let rho: Vec<f64> = graph.nodes().map(|u| graph.in_edges(u).iter().map(|&e| graph.edge(e as usize).p.as_f64()).sum()).collect();
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    for _ in 0..10_000 {
        let dangling: f64 = (0..n).filter(|&u| rho[u] <= 0.0).map(|u| rank[u]).sum();
        let base = PAGERANK_RESTART * uniform + (1.0 - PAGERANK_RESTART) * dangling * uniform;
        let mut next = vec![base; n];
        for u in 0..n {
            if rho[u] <= 0.0 {
                continue;
            }
            let mass = (1.0 - PAGERANK_RESTART) * rank[u] / rho[u];
            for &e in graph.in_edges(NodeId::from(u)) {
                let e = graph.edge(e as usize);
                next[e.src.index()] += mass * e.p.as_f64();
            }
        }
        let diff: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        rank = next;
        if diff <= PAGERANK_TOLERANCE {
            break;
        }
    }
    rank
}

/// Top-`k` PageRank nodes outside the seed set, smallest id on ties.
pub fn pagerank_boost<P: Probability>(graph: &BoostGraph<P>, seeds: &NodeSet, k: usize) -> NodeSet {
    let scores = pagerank_scores(graph);
    let mut order: Vec<usize> = (0..graph.node_count()).filter(|&v| !seeds.contains(NodeId::from(v))).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.into_iter().take(k).map(NodeId::from).collect()
}

/// `k` additional seeds chosen by RR-set coverage, ignoring sets the current
/// seeds already reach. The flag is set when everything was covered early and
/// the rest was filled by id.
pub fn more_seeds<P: Probability>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    epsilon: f64,
    ell: f64,
    master_seed: u64,
) -> Result<(NodeSet, bool)> {
    let available = graph.nodes().filter(|v| !seeds.contains(*v)).count();
    rr_select(graph, seeds, k.min(available), epsilon, ell, master_seed)
}

/// Index and value of the best candidate under `evaluate`; the first wins ties.
pub fn best_of<F>(candidates: &[NodeSet], mut evaluate: F) -> Result<(usize, f64)>
where
    F: FnMut(&NodeSet) -> Result<f64>,
{
    if candidates.is_empty() {
        return Err(BoostError::InvalidParameter("no candidate sets to compare".into()));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, c) in candidates.iter().enumerate() {
        let v = evaluate(c)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{exact_delta, EnumerationConfig};

    fn set(ids: &[u32]) -> NodeSet {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    fn chain() -> BoostGraph<f64> {
        BoostGraph::parse("0 1 0.2 0.4\n1 2 0.1 0.2").unwrap()
    }

    #[test]
    fn in_gain_prefers_first_hop() {
        let g = chain();
        assert_eq!(high_degree_global(&g, &set(&[0]), 1, DegreeVariant::InGain), set(&[1]));
        for v in DegreeVariant::ALL {
            assert_eq!(high_degree_local(&g, &set(&[0]), 1, v), set(&[1]));
            assert_eq!(high_degree_local(&g, &set(&[0]), 2, v), set(&[1, 2]));
            assert_eq!(high_degree_global(&g, &set(&[0]), 5, v).len(), 2);
        }
    }

    #[test]
    fn zero_scores_fill_by_id() {
        let g = BoostGraph::<f64>::parse("0 1 0 0.5\n2 3 0 0.5").unwrap();
        assert_eq!(high_degree_global(&g, &set(&[3]), 2, DegreeVariant::OutP), set(&[0, 1]));
    }

    #[test]
    fn discount_matters_only_after_first_pick() {
        let g = BoostGraph::<f64>::parse("0 3 0.5 0.6\n0 4 0.5 0.6\n1 0 0.8 0.9\n2 5 0.6 0.7").unwrap();
        let s = set(&[5]);
        assert_eq!(
            high_degree_global(&g, &s, 1, DegreeVariant::OutP),
            high_degree_global(&g, &s, 1, DegreeVariant::OutPDiscounted)
        );
        assert_eq!(high_degree_global(&g, &s, 2, DegreeVariant::OutP), set(&[0, 1]));
        // Once 0 is boosted, node 1's only edge no longer counts.
        assert_eq!(high_degree_global(&g, &s, 2, DegreeVariant::OutPDiscounted), set(&[0, 2]));
    }

    #[test]
    fn local_rings_before_far_nodes() {
        // Node 5 is disconnected and has a large degree.
        let g = BoostGraph::<f64>::parse("0 1 0.1 0.2\n1 2 0.1 0.2\n5 6 0.9 1\n5 7 0.9 1").unwrap();
        assert_eq!(high_degree_local(&g, &set(&[0]), 2, DegreeVariant::OutP), set(&[1, 2]));
        assert!(high_degree_local(&g, &set(&[0]), 3, DegreeVariant::OutP).contains(NodeId(5)));
    }

    #[test]
    fn pagerank_symmetry_and_mass() {
        let g = BoostGraph::<f64>::parse("0 1 0.3 0.4\n1 0 0.3 0.4").unwrap();
        let s = pagerank_scores(&g);
        assert!((s[0] - s[1]).abs() < 1e-12);
        assert_eq!(pagerank_boost(&g, &NodeSet::new(), 1), set(&[0]));
        let g = chain();
        let s = pagerank_scores(&g);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pagerank_matches_dense_iteration() {
        let g = BoostGraph::<f64>::parse("0 1 0.2 0.4\n1 2 0.5 0.6\n2 0 0.3 0.3\n3 2 0.4 0.5\n1 4 0.1 0.1").unwrap();
        let n = 5;
        // Dense transition matrix of the reversed walk; dangling rows restart.
        let mut t = vec![vec![0.0; n]; n];
        for u in 0..n {
            let ins: Vec<_> = g.edges().iter().filter(|e| e.dst.index() == u).collect();
            let rho: f64 = ins.iter().map(|e| e.p).sum();
            if rho == 0.0 {
                t[u].iter_mut().for_each(|x| *x = 1.0 / n as f64);
            } else {
                for e in ins {
                    t[u][e.src.index()] += e.p / rho;
                }
            }
        }
        let mut r = vec![1.0 / n as f64; n];
        for _ in 0..2000 {
            let mut next = vec![0.15 / n as f64; n];
            for u in 0..n {
                for v in 0..n {
                    next[v] += 0.85 * r[u] * t[u][v];
                }
            }
            r = next;
        }
        let fast = pagerank_scores(&g);
        for v in 0..n {
            assert!((fast[v] - r[v]).abs() < 1e-3, "{v}: {} vs {}", fast[v], r[v]);
        }
    }

    #[test]
    fn pagerank_is_label_invariant() {
        let g = BoostGraph::<f64>::parse("0 1 0.2 0.4\n1 2 0.5 0.6\n2 0 0.3 0.3\n3 2 0.4 0.5").unwrap();
        let perm = [2u32, 0, 3, 1];
        let text: String = g
            .edges()
            .iter()
            .map(|e| format!("{} {} {} {}\n", perm[e.src.index()], perm[e.dst.index()], e.p, e.p_boost))
            .collect();
        let h = BoostGraph::<f64>::parse(&text).unwrap();
        let (a, b) = (pagerank_scores(&g), pagerank_scores(&h));
        for v in 0..4 {
            assert!((a[v] - b[perm[v] as usize]).abs() < 1e-12);
        }
    }

    #[test]
    fn more_seeds_on_chain_prefers_far_node() {
        let g = chain();
        let (b, _) = more_seeds(&g, &set(&[0]), 1, 0.5, 1.0, 2).unwrap();
        assert_eq!(b, set(&[2]));
    }

    #[test]
    fn more_seeds_when_seeds_cover_everything() {
        let g = BoostGraph::<f64>::parse("0 1 1 1\n0 2 1 1").unwrap();
        let (b, flag) = more_seeds(&g, &set(&[0]), 1, 0.5, 1.0, 2).unwrap();
        assert_eq!(b, set(&[1]));
        assert!(flag);
    }

    #[test]
    fn best_of_rules() {
        let g = chain();
        let cfg = EnumerationConfig::default();
        let cands = [set(&[2]), set(&[1]), set(&[2])];
        let (i, v) = best_of(&cands, |b| exact_delta(&g, &set(&[0]), b, &cfg)).unwrap();
        assert_eq!(cands[i], set(&[1]));
        assert!((v - 0.22).abs() < 1e-12);
        let same = [set(&[1]), set(&[1])];
        assert_eq!(best_of(&same, |_| Ok(1.0)).unwrap().0, 0);
        assert!(best_of(&[], |_| Ok(0.0)).is_err());
        assert!(DegreeVariant::from_index(0).is_err());
        assert_eq!(DegreeVariant::from_index(3).unwrap(), DegreeVariant::InGain);
    }
}
