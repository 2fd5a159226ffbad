//! Directed graph with a base and a boosted probability on every edge.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{BoostError, Result};
use crate::num::{beta_boost, Probability};

/// Dense node index in `[0, n)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    /// Placeholder id for nodes that have no counterpart in the input graph.
    pub const SENTINEL: NodeId = NodeId(u32::MAX);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Membership test over node ids, implemented by [`NodeSet`] and boolean masks.
pub trait NodeFilter {
    fn has(&self, v: NodeId) -> bool;
}

impl NodeFilter for [bool] {
    #[inline]
    fn has(&self, v: NodeId) -> bool {
        self.get(v.index()).copied().unwrap_or(false)
    }
}

impl NodeFilter for Vec<bool> {
    #[inline]
    fn has(&self, v: NodeId) -> bool {
        self.as_slice().has(v)
    }
}

/// Sorted, duplicate-free set of node ids (seed sets and boost sets).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    pub fn from_sorted_unchecked(ids: Vec<NodeId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        NodeSet(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn insert(&mut self, v: NodeId) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    /// Copy with `v` added.
    pub fn with(&self, v: NodeId) -> Self {
        let mut out = self.clone();
        out.insert(v);
        out
    }

    pub fn union(&self, other: &NodeSet) -> Self {
        self.iter().chain(other.iter()).collect()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.iter().any(|v| other.contains(v))
    }

    /// Boolean mask of length `n`; ids `>= n` are ignored.
    pub fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for v in self.iter() {
            if v.index() < n {
                mask[v.index()] = true;
            }
        }
        mask
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        NodeSet(
            mask.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| NodeId::from(i))
                .collect(),
        )
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.0
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut v: Vec<NodeId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }
}

impl NodeFilter for NodeSet {
    #[inline]
    fn has(&self, v: NodeId) -> bool {
        self.contains(v)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Edge<P> {
    pub src: NodeId,
    pub dst: NodeId,
    pub p: P,
    pub p_boost: P,
}

impl<P: Probability> Edge<P> {
    /// Probability in effect when `dst` is (or is not) boosted.
    #[inline]
    pub fn prob(&self, dst_boosted: bool) -> P {
        if dst_boosted {
            self.p_boost
        } else {
            self.p
        }
    }
}

/// Immutable directed graph; adjacency lists hold edge indices.
#[derive(Clone, Debug)]
pub struct BoostGraph<P> {
    n: usize,
    edges: Vec<Edge<P>>,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
}

impl<P: Probability> BoostGraph<P> {
    /// Builds and validates a graph with `n` nodes.
    pub fn new(n: usize, edges: Vec<Edge<P>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            check_edge(i + 1, e, n)?;
            if !seen.insert((e.src, e.dst)) {
                return Err(BoostError::DuplicateEdge { src: e.src.0, dst: e.dst.0 });
            }
        }
        Ok(Self::build(n, edges))
    }

    fn build(n: usize, edges: Vec<Edge<P>>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out_adj[e.src.index()].push(i as u32);
            in_adj[e.dst.index()].push(i as u32);
        }
        BoostGraph { n, edges, out_adj, in_adj }
    }

    pub fn empty() -> Self {
        Self::build(0, Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<P>] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, idx: usize) -> &Edge<P> {
        &self.edges[idx]
    }

    /// Indices of edges leaving `v`.
    #[inline]
    pub fn out_edges(&self, v: NodeId) -> &[u32] {
        &self.out_adj[v.index()]
    }

    /// Indices of edges entering `v`.
    #[inline]
    pub fn in_edges(&self, v: NodeId) -> &[u32] {
        &self.in_adj[v.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId::from)
    }

    pub fn find_edge(&self, src: NodeId, dst: NodeId) -> Option<usize> {
        self.out_edges(src)
            .iter()
            .map(|&e| e as usize)
            .find(|&e| self.edges[e].dst == dst)
    }

    /// Parses whitespace-separated `src dst p p_boost` lines; `#` starts a comment
    /// line. The node count is one more than the largest id mentioned.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut edges = Vec::new();
        let mut seen = HashSet::new();
        let mut n = 0usize;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let Some((src, dst, p, pb)) = parse_edge_line(&line, lineno)? else {
                continue;
            };
            let src = to_node(src, lineno)?;
            let dst = to_node(dst, lineno)?;
            let e = Edge { src, dst, p: P::lit(p), p_boost: P::lit(pb) };
            check_probabilities(lineno, src, dst, p, pb)?;
            if src == dst {
                return Err(BoostError::SelfLoop(src.0));
            }
            if !seen.insert((src, dst)) {
                return Err(BoostError::DuplicateEdge { src: src.0, dst: dst.0 });
            }
            n = n.max(src.index() + 1).max(dst.index() + 1);
            edges.push(e);
        }
        Ok(Self::build(n, edges))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    /// Writes the edge list in the same format [`from_reader`](Self::from_reader)
    /// accepts. Probabilities use the shortest round-tripping representation.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(w, "{} {} {} {}", e.src, e.dst, e.p.as_f64(), e.p_boost.as_f64())?;
        }
        Ok(())
    }

    pub fn to_edge_list(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("edge list is ASCII")
    }

    /// Replaces every boosted probability by `1 - (1 - p)^beta`.
    pub fn apply_beta_boost(&self, beta: P) -> Result<Self> {
        if !(beta > P::one()) {
            return Err(BoostError::InvalidParameter(format!("beta must exceed 1, got {beta}")));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { p_boost: beta_boost(e.p, beta), ..*e })
            .collect();
        Ok(Self::build(self.n, edges))
    }

    /// Reads one node id per line (`#` comments allowed) into a sorted set.
    pub fn load_node_set<R: BufRead>(&self, reader: R) -> Result<NodeSet> {
        let ids = read_id_lines(reader)?;
        ids.into_iter()
            .map(|(lineno, id)| {
                if (id as usize) < self.n && id <= u32::MAX as u64 {
                    Ok(NodeId(id as u32))
                } else {
                    let _ = lineno;
                    Err(BoostError::NodeOutOfRange { id, n: self.n })
                }
            })
            .collect()
    }

    pub fn parse_node_set(&self, text: &str) -> Result<NodeSet> {
        self.load_node_set(text.as_bytes())
    }

    /// Nodes not in `excluded`.
    pub fn candidates(&self, excluded: &NodeSet) -> Vec<NodeId> {
        self.nodes().filter(|&v| !excluded.contains(v)).collect()
    }
}

impl<P: Probability> PartialEq for BoostGraph<P> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

/// Original-id table for inputs whose ids are sparse or not zero-based.
#[derive(Clone, Debug, Default)]
pub struct IdMap {
    original: Vec<u64>,
    dense: HashMap<u64, NodeId>,
}

impl IdMap {
    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn original(&self, v: NodeId) -> u64 {
        self.original[v.index()]
    }

    pub fn dense(&self, original: u64) -> Option<NodeId> {
        self.dense.get(&original).copied()
    }

    fn intern(&mut self, original: u64) -> NodeId {
        if let Some(&v) = self.dense.get(&original) {
            return v;
        }
        let v = NodeId::from(self.original.len());
        self.original.push(original);
        self.dense.insert(original, v);
        v
    }

    /// Loads an edge list whose ids are arbitrary non-negative integers,
    /// assigning dense ids in order of first appearance.
    pub fn load_graph<P: Probability, R: BufRead>(reader: R) -> Result<(BoostGraph<P>, IdMap)> {
        let mut map = IdMap::default();
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let Some((src, dst, p, pb)) = parse_edge_line(&line, lineno)? else {
                continue;
            };
            let src = map.intern(src);
            let dst = map.intern(dst);
            check_probabilities(lineno, src, dst, p, pb)?;
            edges.push(Edge { src, dst, p: P::lit(p), p_boost: P::lit(pb) });
        }
        let g = BoostGraph::new(map.len(), edges)?;
        Ok((g, map))
    }

    /// Loads a node-set file written in original ids.
    pub fn load_node_set<R: BufRead>(&self, reader: R) -> Result<NodeSet> {
        read_id_lines(reader)?
            .into_iter()
            .map(|(_, id)| {
                self.dense(id).ok_or(BoostError::NodeOutOfRange { id, n: self.len() })
            })
            .collect()
    }
}

fn parse_edge_line(line: &str, lineno: usize) -> Result<Option<(u64, u64, f64, f64)>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = trimmed.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(BoostError::Parse {
            line: lineno,
            message: format!("expected 4 fields `src dst p p_boost`, found {}", fields.len()),
        });
    }
    let int = |s: &str| {
        s.parse::<u64>().map_err(|_| BoostError::Parse {
            line: lineno,
            message: format!("`{s}` is not a node id"),
        })
    };
    let real = |s: &str| {
        s.parse::<f64>().map_err(|_| BoostError::Parse {
            line: lineno,
            message: format!("`{s}` is not a probability"),
        })
    };
    Ok(Some((int(fields[0])?, int(fields[1])?, real(fields[2])?, real(fields[3])?)))
}

fn to_node(id: u64, lineno: usize) -> Result<NodeId> {
    u32::try_from(id).map(NodeId).map_err(|_| BoostError::Parse {
        line: lineno,
        message: format!("node id {id} exceeds 32 bits"),
    })
}

fn check_probabilities(lineno: usize, src: NodeId, dst: NodeId, p: f64, pb: f64) -> Result<()> {
    for v in [p, pb] {
        if !(0.0..=1.0).contains(&v) {
            return Err(BoostError::ProbabilityRange { line: lineno, value: v });
        }
    }
    if p > pb {
        return Err(BoostError::BoostBelowBase { line: lineno, src: src.0, dst: dst.0, p, p_boost: pb });
    }
    Ok(())
}

fn check_edge<P: Probability>(lineno: usize, e: &Edge<P>, n: usize) -> Result<()> {
    for v in [e.src, e.dst] {
        if v.index() >= n {
            return Err(BoostError::NodeOutOfRange { id: v.0 as u64, n });
        }
    }
    if e.src == e.dst {
        return Err(BoostError::SelfLoop(e.src.0));
    }
    check_probabilities(lineno, e.src, e.dst, e.p.as_f64(), e.p_boost.as_f64())
}

fn read_id_lines<R: BufRead>(reader: R) -> Result<Vec<(usize, u64)>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let id = t.parse::<u64>().map_err(|_| BoostError::Parse {
            line: lineno + 1,
            message: format!("`{t}` is not a node id"),
        })?;
        out.push((lineno + 1, id));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CHAIN: &str = "0 1 0.2 0.4\n1 2 0.1 0.2\n";

    #[test]
    fn loads_chain() {
        let g = BoostGraph::<f64>::parse(CHAIN).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out_edges(NodeId(0)), &[0]);
        assert_eq!(g.in_edges(NodeId(2)), &[1]);
    }

    #[test]
    fn empty_stream() {
        let g = BoostGraph::<f64>::parse("").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (0, 0));
        let g = BoostGraph::<f64>::parse("# only a comment\n\n").unwrap();
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            BoostGraph::<f64>::parse("0 1 0.5 0.3"),
            Err(BoostError::BoostBelowBase { line: 1, .. })
        ));
        assert!(matches!(
            BoostGraph::<f64>::parse("0 1 0.1 0.2\n1 2 0.1 1.5"),
            Err(BoostError::ProbabilityRange { line: 2, .. })
        ));
        assert!(matches!(
            BoostGraph::<f64>::parse("0 1 0.1 0.2\n0 1 0.1 0.2"),
            Err(BoostError::DuplicateEdge { src: 0, dst: 1 })
        ));
        assert!(matches!(BoostGraph::<f64>::parse("3 3 0.1 0.2"), Err(BoostError::SelfLoop(3))));
        assert!(matches!(
            BoostGraph::<f64>::parse("0 1 0.1\n"),
            Err(BoostError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            BoostGraph::<f64>::parse("\n0 x 0.1 0.2\n"),
            Err(BoostError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn beta_transform() {
        let g = BoostGraph::<f64>::parse("0 1 0.1 0.1\n1 2 0 0\n2 0 0.5 0.5").unwrap();
        let b = g.apply_beta_boost(2.0).unwrap();
        assert!((b.edge(0).p_boost - 0.19).abs() < 1e-15);
        assert_eq!(b.edge(1).p_boost, 0.0);
        assert!((b.edge(2).p_boost - 0.75).abs() < 1e-15);
        assert_eq!(b.edge(0).p, 0.1);
        assert!(g.apply_beta_boost(1.0).is_err());
        assert!(g.apply_beta_boost(0.5).is_err());
    }

    #[test]
    fn node_sets() {
        let g = BoostGraph::<f64>::parse(CHAIN).unwrap();
        let s = g.parse_node_set("2\n0\n2").unwrap();
        assert_eq!(s.as_slice(), &[NodeId(0), NodeId(2)]);
        assert!(g.parse_node_set("").unwrap().is_empty());
        assert!(matches!(g.parse_node_set("5"), Err(BoostError::NodeOutOfRange { id: 5, n: 3 })));
        assert!(matches!(g.parse_node_set("1.5"), Err(BoostError::Parse { .. })));
        assert_eq!(g.parse_node_set("# seeds\n1\n").unwrap().as_slice(), &[NodeId(1)]);
    }

    #[test]
    fn sparse_ids_remap() {
        let text = "100 7 0.2 0.4\n7 3000 0.1 0.2\n";
        let (g, map) = IdMap::load_graph::<f64, _>(text.as_bytes()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(map.original(NodeId(0)), 100);
        assert_eq!(map.original(NodeId(2)), 3000);
        let s = map.load_node_set("3000\n100\n".as_bytes()).unwrap();
        assert_eq!(s.as_slice(), &[NodeId(0), NodeId(2)]);
        assert!(map.load_node_set("5".as_bytes()).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = BoostGraph<f64>> {
        (2usize..12).prop_flat_map(|n| {
            proptest::collection::btree_map(
                (0..n as u32, 0..n as u32),
                (0.0f64..=1.0, 0.0f64..=1.0),
                0..30,
            )
            .prop_map(move |m| {
                let edges = m
                    .into_iter()
                    .filter(|((s, d), _)| s != d)
                    .map(|((s, d), (a, b))| Edge {
                        src: NodeId(s),
                        dst: NodeId(d),
                        p: a.min(b),
                        p_boost: a.max(b),
                    })
                    .collect::<Vec<_>>();
                let n = edges.iter().map(|e| e.src.index().max(e.dst.index()) + 1).max().unwrap_or(0);
                BoostGraph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(g in arb_graph()) {
            let back = BoostGraph::<f64>::parse(&g.to_edge_list()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn beta_monotone(g in arb_graph(), b1 in 1.01f64..4.0, extra in 0.0f64..4.0) {
            let lo = g.apply_beta_boost(b1).unwrap();
            let hi = g.apply_beta_boost(b1 + extra).unwrap();
            for ((e, l), h) in g.edges().iter().zip(lo.edges()).zip(hi.edges()) {
                prop_assert_eq!(l.p, e.p);
                prop_assert!(l.p <= l.p_boost);
                prop_assert!(l.p_boost <= h.p_boost);
            }
        }
    }
}
