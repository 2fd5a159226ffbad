//! Exact boosting on bidirected trees.
//!
//! For a fixed `(S, B)` the state holds, for every ordered adjacent pair,
//! `ap_B(u\v)` (activation probability of `u` once the branch through `v` is
//! cut) and `g_B(u\v)` (spread gained in that branch by seeding `u`). From those
//! the spread after boosting any single extra node follows in `O(deg(u))`.

use std::collections::VecDeque;

use crate::error::{BoostError, Result};
use crate::graph::{BoostGraph, NodeId, NodeSet};
use crate::mc::exact_best_boost_with;
use crate::num::Probability;

/// Ratio shortcuts are abandoned for a node whose `1 - ap(w\u) p_wu` drops
/// below this.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

/// One adjacency as seen from its owner `u`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Neighbor<P> {
    pub node: NodeId,
    /// Slot of `u` in `node`'s adjacency list.
    pub rev: u32,
    /// `p` and `p'` of the edge `node -> u`.
    pub p_in: P,
    pub p_in_boost: P,
    /// `p` and `p'` of the edge `u -> node`.
    pub p_out: P,
    pub p_out_boost: P,
}

/// Bidirected tree: every adjacency carries one edge in each direction and the
/// underlying undirected graph is connected and acyclic.
#[derive(Clone, Debug)]
pub struct BidirectedTree<P> {
    adj: Vec<Vec<Neighbor<P>>>,
    graph: BoostGraph<P>,
}

impl<P: Probability> BidirectedTree<P> {
    pub fn from_graph(graph: &BoostGraph<P>) -> Result<Self> {
        let n = graph.node_count();
        if n == 0 {
            return Err(BoostError::NotATree("graph has no nodes".into()));
        }
        for e in graph.edges() {
            if graph.find_edge(e.dst, e.src).is_none() {
                return Err(BoostError::NotATree(format!("edge {}->{} has no reverse edge", e.src, e.dst)));
            }
        }
        if graph.edge_count() != 2 * (n - 1) {
            return Err(BoostError::NotATree(format!(
                "{} nodes need {} directed edges, found {}",
                n,
                2 * (n - 1),
                graph.edge_count()
            )));
        }
        let mut adj: Vec<Vec<Neighbor<P>>> = vec![Vec::new(); n];
        for u in graph.nodes() {
            let mut list: Vec<Neighbor<P>> = graph
                .out_edges(u)
                .iter()
                .map(|&ei| {
                    let out = graph.edge(ei as usize);
                    let back = graph.edge(graph.find_edge(out.dst, u).expect("reverse checked"));
                    Neighbor {
                        node: out.dst,
                        rev: 0,
                        p_in: back.p,
                        p_in_boost: back.p_boost,
                        p_out: out.p,
                        p_out_boost: out.p_boost,
                    }
                })
                .collect();
            list.sort_by_key(|nb| nb.node);
            adj[u.index()] = list;
        }
        for u in 0..n {
            for i in 0..adj[u].len() {
                let v = adj[u][i].node.index();
                let rev = adj[v].iter().position(|nb| nb.node.index() == u).expect("reverse checked");
                adj[u][i].rev = rev as u32;
            }
        }
        let tree = BidirectedTree { adj, graph: graph.clone() };
        let (order, _) = tree.bfs(NodeId(0));
        if order.len() != n {
            return Err(BoostError::NotATree(format!("only {} of {} nodes are connected to node 0", order.len(), n)));
        }
        Ok(tree)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_graph(&BoostGraph::parse(text)?)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: NodeId) -> &[Neighbor<P>] {
        &self.adj[u.index()]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u.index()].len()
    }

    pub fn graph(&self) -> &BoostGraph<P> {
        &self.graph
    }

    /// Slot of `v` in `u`'s adjacency list.
    pub fn slot(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.adj[u.index()].binary_search_by_key(&v, |nb| nb.node).ok()
    }

    /// BFS order from `root` and, per node, the slot of its parent
    /// (`u32::MAX` for the root).
    pub fn bfs(&self, root: NodeId) -> (Vec<NodeId>, Vec<u32>) {
        let n = self.node_count();
        let mut parent_slot = vec![u32::MAX; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        seen[root.index()] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for nb in &self.adj[u.index()] {
                let v = nb.node.index();
                if !seen[v] {
                    seen[v] = true;
                    parent_slot[v] = nb.rev;
                    queue.push_back(nb.node);
                }
            }
        }
        (order, parent_slot)
    }

    fn check_set(&self, set: &NodeSet) -> Result<()> {
        match set.iter().find(|v| v.index() >= self.node_count()) {
            Some(v) => Err(BoostError::NodeOutOfRange { id: v.0 as u64, n: self.node_count() }),
            None => Ok(()),
        }
    }
}

/// How `ap_B(u\v)` and `g_B(u\v)` are derived once the first direction of a
/// node is known.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Shortcut {
    /// Divide out one factor, falling back to products near zero.
    Ratio,
    /// Division-free prefix/suffix products everywhere.
    Direct,
}

/// Activation probabilities and seeding gains for one `(S, B)`.
#[derive(Clone, Debug)]
pub struct TreeState<P> {
    seeds: Vec<bool>,
    boosted: Vec<bool>,
    ap: Vec<P>,
    ap_out: Vec<Vec<P>>,
    gain: Vec<Vec<P>>,
    direct_nodes: usize,
}

impl<P: Probability> TreeState<P> {
    pub fn ap(&self, u: NodeId) -> P {
        self.ap[u.index()]
    }

    /// `ap_B(u\v)` by slot of `v` in `u`'s list.
    pub fn ap_out(&self, u: NodeId, slot: usize) -> P {
        self.ap_out[u.index()][slot]
    }

    /// `g_B(u\v)` by slot; panics if gains were not computed.
    pub fn gain(&self, u: NodeId, slot: usize) -> P {
        self.gain[u.index()][slot]
    }

    pub fn has_gains(&self) -> bool {
        !self.gain.is_empty()
    }

    pub fn is_seed(&self, u: NodeId) -> bool {
        self.seeds[u.index()]
    }

    pub fn is_boosted(&self, u: NodeId) -> bool {
        self.boosted[u.index()]
    }

    /// `sigma_S(B) = sum_u ap_B(u)`.
    pub fn sigma(&self) -> P {
        self.ap.iter().copied().sum()
    }

    /// Nodes at which a ratio shortcut was abandoned for direct products.
    pub fn direct_nodes(&self) -> usize {
        self.direct_nodes
    }

    fn p_into(&self, u: usize, nb: &Neighbor<P>) -> P {
        if self.boosted[u] {
            nb.p_in_boost
        } else {
            nb.p_in
        }
    }

    fn p_from(&self, nb: &Neighbor<P>) -> P {
        if self.boosted[nb.node.index()] {
            nb.p_out_boost
        } else {
            nb.p_out
        }
    }
}

fn clamp01<P: Probability>(x: P) -> P {
    x.max(P::zero()).min(P::one())
}

/// Products of all factors but one, without division.
fn products_except<P: Probability>(factors: &[P]) -> Vec<P> {
    let d = factors.len();
    let mut out = vec![P::one(); d];
    let mut acc = P::one();
    for i in 0..d {
        out[i] = acc;
        acc = acc * factors[i];
    }
    acc = P::one();
    for i in (0..d).rev() {
        out[i] = out[i] * acc;
        acc = acc * factors[i];
    }
    out
}

/// For factors `D_i` and weights `c_i`, returns per `i` the value
/// `prod_{j!=i} D_j + sum_{w!=i} c_w prod_{x!=i,w} D_x`.
fn weighted_products_except<P: Probability>(factors: &[P], weights: &[P]) -> Vec<P> {
    let d = factors.len();
    let step = |(p, q): (P, P), i: usize| (p * factors[i], q * factors[i] + p * weights[i]);
    let mut prefix = vec![(P::one(), P::zero()); d + 1];
    for i in 0..d {
        prefix[i + 1] = step(prefix[i], i);
    }
    let mut out = vec![P::zero(); d];
    let mut suffix = (P::one(), P::zero());
    for i in (0..d).rev() {
        let (pp, qp) = prefix[i];
        let (ps, qs) = suffix;
        out[i] = pp * ps + qp * ps + pp * qs;
        suffix = step(suffix, i);
    }
    out
}

fn validate<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet, boost: &NodeSet) -> Result<()> {
    if seeds.is_empty() {
        return Err(BoostError::EmptySeeds);
    }
    tree.check_set(seeds)?;
    tree.check_set(boost)
}

/// Activation part of the state: `ap_B(u)` and `ap_B(u\v)` for all pairs.
pub fn compute_ap<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet, boost: &NodeSet) -> Result<TreeState<P>> {
    compute_ap_with(tree, seeds, boost, Shortcut::Ratio)
}

pub fn compute_ap_with<P: Probability>(
    tree: &BidirectedTree<P>,
    seeds: &NodeSet,
    boost: &NodeSet,
    mode: Shortcut,
) -> Result<TreeState<P>> {
    validate(tree, seeds, boost)?;
    let n = tree.node_count();
    let mut st = TreeState {
        seeds: seeds.to_mask(n),
        boosted: boost.to_mask(n),
        ap: vec![P::zero(); n],
        ap_out: tree.adj.iter().map(|a| vec![P::zero(); a.len()]).collect(),
        gain: Vec::new(),
        direct_nodes: 0,
    };
    let guard = P::lit(DENOMINATOR_GUARD);
    let (order, parent_slot) = tree.bfs(NodeId(0));

    // Towards the root: ap(u\parent) from the children's values.
    for &u in order.iter().rev() {
        let ui = u.index();
        let ps = parent_slot[ui] as usize;
        if parent_slot[ui] == u32::MAX {
            continue;
        }
        st.ap_out[ui][ps] = if st.seeds[ui] {
            P::one()
        } else {
            let miss = tree.adj[ui]
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != ps)
                .fold(P::one(), |acc, (_, nb)| acc * (P::one() - st.ap_out[nb.node.index()][nb.rev as usize] * st.p_into(ui, nb)));
            clamp01(P::one() - miss)
        };
    }

    // Away from the root: every incoming value is known when `u` is reached.
    let mut factors = Vec::new();
    for &u in &order {
        let ui = u.index();
        if st.seeds[ui] {
            st.ap[ui] = P::one();
            st.ap_out[ui].iter_mut().for_each(|x| *x = P::one());
            continue;
        }
        factors.clear();
        factors.extend(
            tree.adj[ui]
                .iter()
                .map(|nb| P::one() - st.ap_out[nb.node.index()][nb.rev as usize] * st.p_into(ui, nb)),
        );
        let miss = factors.iter().fold(P::one(), |a, &b| a * b);
        st.ap[ui] = clamp01(P::one() - miss);
        let ps = parent_slot[ui];
        let direct = mode == Shortcut::Direct || factors.iter().any(|&d| d < guard);
        if direct {
            st.direct_nodes += 1;
            for (i, rest) in products_except(&factors).into_iter().enumerate() {
                if i as u32 != ps {
                    st.ap_out[ui][i] = clamp01(P::one() - rest);
                }
            }
        } else {
            for (i, &d) in factors.iter().enumerate() {
                if i as u32 != ps {
                    st.ap_out[ui][i] = clamp01(P::one() - miss / d);
                }
            }
        }
    }
    Ok(st)
}

/// Fills `g_B(u\v)` for all pairs of an activation state.
pub fn compute_gains<P: Probability>(tree: &BidirectedTree<P>, state: &mut TreeState<P>) {
    compute_gains_with(tree, state, Shortcut::Ratio)
}

pub fn compute_gains_with<P: Probability>(tree: &BidirectedTree<P>, st: &mut TreeState<P>, mode: Shortcut) {
    let guard = P::lit(DENOMINATOR_GUARD);
    let (order, parent_slot) = tree.bfs(NodeId(0));
    st.gain = tree.adj.iter().map(|a| vec![P::zero(); a.len()]).collect();
    let mut factors = Vec::new();
    let mut weights = Vec::new();

    let load = |st: &TreeState<P>, ui: usize, factors: &mut Vec<P>, weights: &mut Vec<P>| {
        factors.clear();
        weights.clear();
        for nb in &tree.adj[ui] {
            let (w, back) = (nb.node.index(), nb.rev as usize);
            factors.push(P::one() - st.ap_out[w][back] * st.p_into(ui, nb));
            weights.push(st.p_from(nb) * st.gain[w][back]);
        }
    };

    for pass in 0..2 {
        let nodes: Box<dyn Iterator<Item = &NodeId>> =
            if pass == 0 { Box::new(order.iter().rev()) } else { Box::new(order.iter()) };
        for &u in nodes {
            let ui = u.index();
            let ps = parent_slot[ui];
            if st.seeds[ui] || (pass == 0 && ps == u32::MAX) {
                continue;
            }
            load(st, ui, &mut factors, &mut weights);
            let direct = mode == Shortcut::Direct || factors.iter().any(|&d| d < guard);
            if pass == 0 {
                // Only children have their gains towards `u` at this point.
                let ps = ps as usize;
                let g = if direct {
                    weighted_products_except(&factors, &weights)[ps]
                } else {
                    let sum = (0..factors.len()).filter(|&i| i != ps).fold(P::zero(), |a, i| a + weights[i] / factors[i]);
                    (P::one() - st.ap_out[ui][ps]) * (P::one() + sum)
                };
                st.gain[ui][ps] = g.max(P::zero());
                continue;
            }
            if direct {
                for (i, g) in weighted_products_except(&factors, &weights).into_iter().enumerate() {
                    if i as u32 != ps {
                        st.gain[ui][i] = g.max(P::zero());
                    }
                }
            } else {
                let total = (0..factors.len()).fold(P::zero(), |a, i| a + weights[i] / factors[i]);
                for i in 0..factors.len() {
                    if i as u32 != ps {
                        let g = (P::one() - st.ap_out[ui][i]) * (P::one() + total - weights[i] / factors[i]);
                        st.gain[ui][i] = g.max(P::zero());
                    }
                }
            }
        }
    }
}

/// Full state (activation probabilities and gains).
pub fn tree_state<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet, boost: &NodeSet) -> Result<TreeState<P>> {
    let mut st = compute_ap(tree, seeds, boost)?;
    compute_gains(tree, &mut st);
    Ok(st)
}

/// `sigma_S(B)` and, per node `u`, `sigma_S(B + u)`.
pub fn sigma_with_each_boost<P: Probability>(
    tree: &BidirectedTree<P>,
    seeds: &NodeSet,
    boost: &NodeSet,
) -> Result<(P, Vec<P>)> {
    let st = tree_state(tree, seeds, boost)?;
    Ok(sigma_plus_from_state(tree, &st))
}

pub fn sigma_plus_from_state<P: Probability>(tree: &BidirectedTree<P>, st: &TreeState<P>) -> (P, Vec<P>) {
    assert!(st.has_gains(), "gains must be computed first");
    let sigma = st.sigma();
    let mut plus = vec![sigma; tree.node_count()];
    let mut factors = Vec::new();
    for (ui, out) in plus.iter_mut().enumerate() {
        if st.seeds[ui] || st.boosted[ui] {
            continue;
        }
        factors.clear();
        factors.extend(
            tree.adj[ui]
                .iter()
                .map(|nb| P::one() - st.ap_out[nb.node.index()][nb.rev as usize] * nb.p_in_boost),
        );
        let miss = factors.iter().fold(P::one(), |a, &b| a * b);
        let mut value = sigma + (P::one() - miss - st.ap[ui]);
        for (i, rest) in products_except(&factors).into_iter().enumerate() {
            let nb = &tree.adj[ui][i];
            let dap = P::one() - rest - st.ap_out[ui][i];
            value = value + st.p_from(nb) * dap * st.gain[nb.node.index()][nb.rev as usize];
        }
        *out = value.max(sigma);
    }
    (sigma, plus)
}

pub fn sigma<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet, boost: &NodeSet) -> Result<P> {
    Ok(compute_ap(tree, seeds, boost)?.sigma())
}

/// `Delta_S(B) = sigma_S(B) - sigma_S(empty)`.
pub fn delta<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet, boost: &NodeSet) -> Result<P> {
    Ok(sigma(tree, seeds, boost)? - sigma(tree, seeds, &NodeSet::new())?)
}

/// Greedy-Boost: `k` rounds, each adding the node with the largest
/// `sigma_S(B + u)` (smallest id on ties). Returns `B` and `Delta_S(B)`.
pub fn greedy_boost<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet, k: usize) -> Result<(NodeSet, P)> {
    greedy_boost_traced(tree, seeds, k).map(|(b, d, _)| (b, d))
}

/// Greedy-Boost also returning `Delta_S` after each round.
pub fn greedy_boost_traced<P: Probability>(
    tree: &BidirectedTree<P>,
    seeds: &NodeSet,
    k: usize,
) -> Result<(NodeSet, P, Vec<P>)> {
    let n = tree.node_count();
    let base = sigma(tree, seeds, &NodeSet::new())?;
    let available = n - seeds.len();
    if k > available {
        return Err(BoostError::InsufficientCandidates { needed: k, available });
    }
    let tol = P::lit(1e-12);
    let mut boost = NodeSet::new();
    let mut trace = Vec::with_capacity(k);
    let mut current = base;
    for _ in 0..k {
        let (_, plus) = sigma_with_each_boost(tree, seeds, &boost)?;
        let mut best: Option<(usize, P)> = None;
        for (u, &val) in plus.iter().enumerate() {
            let v = NodeId(u as u32);
            if seeds.contains(v) || boost.contains(v) {
                continue;
            }
            if best.map_or(true, |(_, b)| val > b + tol) {
                best = Some((u, val));
            }
        }
        let (u, val) = best.expect("candidate count checked");
        boost.insert(NodeId(u as u32));
        current = val;
        trace.push(current - base);
    }
    if k > 0 {
        current = sigma(tree, seeds, &boost)?;
    }
    Ok((boost, current - base, trace))
}

/// Non-seed nodes that would be activated with probability one if every node
/// were boosted. Such nodes should have been merged into the seed set.
pub fn standing_assumption_violations<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet) -> Result<Vec<NodeId>> {
    let all: NodeSet = (0..tree.node_count()).map(NodeId::from).collect();
    let st = compute_ap(tree, seeds, &all)?;
    let limit = P::one() - P::lit(DENOMINATOR_GUARD);
    Ok((0..tree.node_count())
        .map(NodeId::from)
        .filter(|&v| !seeds.contains(v) && st.ap(v) >= limit)
        .collect())
}

/// Optimal boost set of size at most `k` by exhaustive search, with spreads
/// from the linear-time evaluator.
pub fn exhaustive_best_boost<P: Probability>(
    tree: &BidirectedTree<P>,
    seeds: &NodeSet,
    k: usize,
    max_subsets: u128,
) -> Result<(NodeSet, f64)> {
    let base = sigma(tree, seeds, &NodeSet::new())?;
    let candidates = tree.graph().candidates(seeds);
    exact_best_boost_with(&candidates, k, max_subsets, |b| Ok((sigma(tree, seeds, b)? - base).as_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{exact_sigma, EnumerationConfig};
    use crate::Edge;
    use proptest::prelude::*;

    fn set(ids: &[u32]) -> NodeSet {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    fn star() -> BidirectedTree<f64> {
        let mut text = String::new();
        for v in 1..=3 {
            text += &format!("0 {v} 0.1 0.19\n{v} 0 0.1 0.19\n");
        }
        BidirectedTree::parse(&text).unwrap()
    }

    /// Random tree: node `i > 0` attaches to a uniformly chosen earlier node.
    fn build_tree(parents: &[usize], probs: &[(f64, f64)]) -> BidirectedTree<f64> {
        let mut edges = Vec::new();
        for (i, &par) in parents.iter().enumerate() {
            let child = i + 1;
            let (a, b) = (probs[2 * i], probs[2 * i + 1]);
            edges.push(Edge { src: NodeId(par as u32), dst: NodeId(child as u32), p: a.0, p_boost: a.1 });
            edges.push(Edge { src: NodeId(child as u32), dst: NodeId(par as u32), p: b.0, p_boost: b.1 });
        }
        let g = BoostGraph::new(parents.len() + 1, edges).unwrap();
        BidirectedTree::from_graph(&g).unwrap()
    }

    fn arb_tree(max_n: usize) -> impl Strategy<Value = (BidirectedTree<f64>, NodeSet, NodeSet)> {
        (2..=max_n)
            .prop_flat_map(|n| {
                let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
                let probs = proptest::collection::vec(
                    prop_oneof![
                        (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| (a * b, a)),
                        Just((1.0, 1.0)),
                        Just((0.0, 0.0)),
                        (0.0..1.0f64).prop_map(|a| (a, 1.0)),
                    ],
                    2 * (n - 1),
                );
                let masks = proptest::collection::vec((proptest::bool::weighted(0.3), proptest::bool::weighted(0.4)), n);
                (parents, probs, masks)
            })
            .prop_map(|(parents, probs, masks)| {
                let tree = build_tree(&parents, &probs);
                let mut seeds: NodeSet = masks.iter().enumerate().filter(|m| m.1 .0).map(|m| NodeId::from(m.0)).collect();
                if seeds.is_empty() {
                    seeds.insert(NodeId(0));
                }
                let boost = masks.iter().enumerate().filter(|m| m.1 .1).map(|m| NodeId::from(m.0)).collect();
                (tree, seeds, boost)
            })
    }

    #[test]
    fn star_fixture_values() {
        let t = star();
        let s = set(&[1, 3]);
        let st = tree_state(&t, &s, &NodeSet::new()).unwrap();
        assert!((st.ap(NodeId(0)) - 0.19).abs() < 1e-12);
        let slot1 = t.slot(NodeId(0), NodeId(1)).unwrap();
        assert!((st.ap_out(NodeId(0), slot1) - 0.1).abs() < 1e-12);
        assert!((st.gain(NodeId(0), slot1) - 0.99).abs() < 1e-12);
        for seed in [1, 3] {
            assert_eq!(st.ap(NodeId(seed)), 1.0);
            assert_eq!(st.ap_out(NodeId(seed), 0), 1.0);
            assert_eq!(st.gain(NodeId(seed), 0), 0.0);
        }
    }

    #[test]
    fn leaf_gain_is_complement() {
        let t = BidirectedTree::<f64>::parse("0 1 0.3 0.5\n1 0 0.2 0.7").unwrap();
        let st = tree_state(&t, &set(&[0]), &NodeSet::new()).unwrap();
        // Leaf 1 cut from 0 has nothing to gain from but itself.
        assert!((st.gain(NodeId(1), 0) - (1.0 - st.ap_out(NodeId(1), 0))).abs() < 1e-15);
        assert_eq!(st.ap_out(NodeId(1), 0), 0.0);
        assert_eq!(st.gain(NodeId(1), 0), 1.0);
    }

    #[test]
    fn rejects_non_trees() {
        assert!(BidirectedTree::<f64>::parse("0 1 0.1 0.2").is_err());
        let cycle = "0 1 .1 .2\n1 0 .1 .2\n1 2 .1 .2\n2 1 .1 .2\n2 0 .1 .2\n0 2 .1 .2";
        assert!(BidirectedTree::<f64>::parse(cycle).is_err());
        let forest = "0 1 .1 .2\n1 0 .1 .2\n2 3 .1 .2\n3 2 .1 .2\n3 4 .1 .2\n4 3 .1 .2\n4 2 .1 .2\n2 4 .1 .2";
        assert!(BidirectedTree::<f64>::parse(forest).is_err());
        assert!(BidirectedTree::<f64>::parse("0 1 .1 .2\n1 0 .1 .2").is_ok());
    }

    #[test]
    fn guard_handles_certain_edges() {
        // Node 1 is activated for sure by seed 0; ratio shortcuts would divide by zero.
        let t = BidirectedTree::<f64>::parse("0 1 1 1\n1 0 1 1\n1 2 0.5 0.6\n2 1 0.5 0.6\n1 3 0.2 0.4\n3 1 0.1 0.3").unwrap();
        let s = set(&[0]);
        let st = tree_state(&t, &s, &NodeSet::new()).unwrap();
        assert!(st.direct_nodes() > 0);
        let oracle = exact_sigma(t.graph(), &s, &NodeSet::new(), &EnumerationConfig::default()).unwrap();
        assert!((st.sigma() - oracle).abs() < 1e-12);
        assert_eq!(standing_assumption_violations(&t, &s).unwrap(), vec![NodeId(1)]);
    }

    #[test]
    fn greedy_on_star_picks_center() {
        let t = star();
        let (b, d) = greedy_boost(&t, &set(&[1, 3]), 1).unwrap();
        assert_eq!(b, set(&[0]));
        let exact = exact_sigma(t.graph(), &set(&[1, 3]), &set(&[0]), &EnumerationConfig::default()).unwrap()
            - exact_sigma(t.graph(), &set(&[1, 3]), &NodeSet::new(), &EnumerationConfig::default()).unwrap();
        assert!((d - exact).abs() < 1e-12);
        assert_eq!(greedy_boost(&t, &set(&[1, 3]), 0).unwrap(), (NodeSet::new(), 0.0));
        assert!(greedy_boost(&t, &set(&[1, 3]), 3).is_err());
    }

    #[test]
    fn single_node_tree() {
        let g = BoostGraph::<f64>::new(1, Vec::new()).unwrap();
        let t = BidirectedTree::from_graph(&g).unwrap();
        let (s, plus) = sigma_with_each_boost(&t, &set(&[0]), &NodeSet::new()).unwrap();
        assert_eq!((s, plus), (1.0, vec![1.0]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_world_enumeration((t, s, b) in arb_tree(11)) {
            let cfg = EnumerationConfig { max_edges: 20, ..Default::default() };
            let (sigma, plus) = sigma_with_each_boost(&t, &s, &b).unwrap();
            let oracle = exact_sigma(t.graph(), &s, &b, &cfg).unwrap();
            prop_assert!((sigma - oracle).abs() < 1e-9, "{} vs {}", sigma, oracle);
            for u in 0..t.node_count() {
                let v = NodeId::from(u);
                let want = exact_sigma(t.graph(), &s, &b.with(v), &cfg).unwrap();
                prop_assert!((plus[u] - want).abs() < 1e-9, "node {}: {} vs {}", u, plus[u], want);
                prop_assert!(plus[u] >= sigma);
            }
        }

        #[test]
        fn ratio_and_direct_agree((t, s, b) in arb_tree(12)) {
            let mut fast = compute_ap_with(&t, &s, &b, Shortcut::Ratio).unwrap();
            let mut slow = compute_ap_with(&t, &s, &b, Shortcut::Direct).unwrap();
            compute_gains_with(&t, &mut fast, Shortcut::Ratio);
            compute_gains_with(&t, &mut slow, Shortcut::Direct);
            for u in 0..t.node_count() {
                let v = NodeId::from(u);
                prop_assert!((fast.ap(v) - slow.ap(v)).abs() < 1e-9);
                for i in 0..t.degree(v) {
                    prop_assert!((fast.ap_out(v, i) - slow.ap_out(v, i)).abs() < 1e-9);
                    prop_assert!((fast.gain(v, i) - slow.gain(v, i)).abs() < 1e-9);
                    prop_assert!((0.0..=1.0).contains(&fast.ap_out(v, i)));
                    prop_assert!(fast.gain(v, i) >= 0.0);
                }
            }
        }

        #[test]
        fn monotone_and_seed_absorbing((t, s, b) in arb_tree(12), extra in 0usize..12) {
            let v = NodeId::from(extra % t.node_count());
            let lo = sigma(&t, &s, &b).unwrap();
            let hi = sigma(&t, &s, &b.with(v)).unwrap();
            prop_assert!(hi >= lo - 1e-12);
            let seed = s.iter().next().unwrap();
            let (base, _) = sigma_with_each_boost(&t, &s, &b).unwrap();
            let (with_seed, _) = sigma_with_each_boost(&t, &s, &b.with(seed)).unwrap();
            prop_assert_eq!(base, with_seed);
        }
    }
}
