//! Potentially reverse-reachable (PRR) graphs.
//!
//! A sample fixes a random world and a random root `r`, then keeps the
//! non-blocked paths from seeds to `r` that need at most `k` boosts. Edges are
//! either live, or live only when their destination is boosted.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{BoostError, Result};
use crate::graph::{BoostGraph, NodeFilter, NodeId, NodeSet};
use crate::mc::{draw_state, EdgeState};
use crate::num::Probability;

const INF: u32 = u32::MAX;
/// Local index of the super-seed in a [`PrrGraph`].
pub const SUPER_SEED: u32 = 0;
/// Local index of the root in a [`PrrGraph`].
pub const ROOT: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PrrClassification {
    Activated,
    Hopeless,
    Boostable,
}

/// Supplies edge states to the backward search.
pub trait StatusSource {
    fn status(&mut self, edge: usize) -> EdgeState;
}

/// A fully drawn world, one state per edge of the graph.
#[derive(Clone, Debug)]
pub struct FixedWorld(pub Vec<EdgeState>);

impl FixedWorld {
    pub fn sample<P: Probability, R: Rng + ?Sized>(graph: &BoostGraph<P>, rng: &mut R) -> Self {
        FixedWorld(graph.edges().iter().map(|e| draw_state(e, rng)).collect())
    }

    /// Whether `root` is reachable from `seeds` when boost-only edges into
    /// `boost` count as live.
    pub fn reaches<P: Probability, F: NodeFilter + ?Sized>(
        &self,
        graph: &BoostGraph<P>,
        seeds: &NodeSet,
        boost: &F,
        root: NodeId,
    ) -> bool {
        let mut seen = seeds.to_mask(graph.node_count());
        let mut stack: Vec<NodeId> = seeds.iter().collect();
        while let Some(u) = stack.pop() {
            if u == root {
                return true;
            }
            for &ei in graph.out_edges(u) {
                let e = graph.edge(ei as usize);
                let fires = match self.0[ei as usize] {
                    EdgeState::Live => true,
                    EdgeState::Boost => boost.has(e.dst),
                    EdgeState::Blocked => false,
                };
                if fires && !seen[e.dst.index()] {
                    seen[e.dst.index()] = true;
                    stack.push(e.dst);
                }
            }
        }
        false
    }
}

impl StatusSource for FixedWorld {
    fn status(&mut self, edge: usize) -> EdgeState {
        self.0[edge]
    }
}

/// Draws states on first touch and remembers them for the rest of the sample.
struct LazyWorld<'a, P, R: ?Sized> {
    graph: &'a BoostGraph<P>,
    rng: &'a mut R,
    memo: &'a mut Vec<(u32, EdgeState)>,
    stamp: u32,
}

impl<P: Probability, R: Rng + ?Sized> StatusSource for LazyWorld<'_, P, R> {
    fn status(&mut self, edge: usize) -> EdgeState {
        let slot = &mut self.memo[edge];
        if slot.0 != self.stamp {
            *slot = (self.stamp, draw_state(self.graph.edge(edge), self.rng));
        }
        slot.1
    }
}

/// Where the root comes from.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RootChoice {
    /// Uniform over all nodes, drawn from the sample's stream before any edge.
    Random,
    Fixed(NodeId),
}

/// Result of the backward search, before compression. Local node 0 is the root.
#[derive(Clone, Debug)]
pub struct PrrRaw {
    pub nodes: Vec<NodeId>,
    pub is_seed: Vec<bool>,
    /// Boosts needed to reach the root from each node.
    pub d_r: Vec<u32>,
    /// `(src, dst, live)` over local indices.
    pub edges: Vec<(u32, u32, bool)>,
    pub k: u32,
}

impl PrrRaw {
    /// Boosted reachability of the root on the uncompressed sample.
    pub fn f_eval<F: NodeFilter + ?Sized>(&self, boost: &F) -> bool {
        let n = self.nodes.len();
        let out = adjacency(n, self.edges.iter().map(|&(a, b, l)| (a as usize, b as usize, l)));
        let mut seen = self.is_seed.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&v| self.is_seed[v]).collect();
        while let Some(u) = stack.pop() {
            if u == 0 {
                return true;
            }
            for &(v, live) in &out[u] {
                if !seen[v] && (live || boost.has(self.nodes[v])) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }
}

/// Outcome of phase I.
#[derive(Clone, Debug)]
pub enum PhaseOne {
    Activated,
    Hopeless,
    Raw(PrrRaw),
}

/// A compressed boostable sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrrGraph {
    k: u32,
    /// Local index to graph id; the super-seed maps to [`NodeId::SENTINEL`].
    global: Vec<NodeId>,
    out_off: Vec<u32>,
    out_adj: Vec<(u32, bool)>,
    in_off: Vec<u32>,
    in_adj: Vec<(u32, bool)>,
    critical: Vec<NodeId>,
}

impl PrrGraph {
    /// Builds from local edges. Local 0 is the super-seed, local 1 the root.
    pub fn from_parts(global: Vec<NodeId>, mut edges: Vec<(u32, u32, bool)>, k: u32) -> Result<Self> {
        let n = global.len();
        if n < 2 {
            return Err(BoostError::NotBoostable);
        }
        edges.sort_unstable();
        edges.dedup();
        let (out_off, out_adj) = csr(n, edges.iter().map(|&(a, b, l)| (a, b, l)));
        let (in_off, in_adj) = csr(n, edges.iter().map(|&(a, b, l)| (b, a, l)));
        let mut g = PrrGraph { k, global, out_off, out_adj, in_off, in_adj, critical: Vec::new() };
        g.critical = g.critical_given(&NodeSet::new()).map_err(|_| BoostError::NotBoostable)?.into_vec();
        Ok(g)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.global.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn root(&self) -> NodeId {
        self.global[ROOT as usize]
    }

    /// Graph id of a local node.
    pub fn global(&self, local: u32) -> NodeId {
        self.global[local as usize]
    }

    /// Graph ids of every boostable node (all locals except the super-seed).
    pub fn members(&self) -> &[NodeId] {
        &self.global[1..]
    }

    /// Whether graph node `v` appears in this sample (never true for seeds).
    pub fn contains(&self, v: NodeId) -> bool {
        self.members().contains(&v)
    }

    pub fn out_edges(&self, local: u32) -> &[(u32, bool)] {
        let l = local as usize;
        &self.out_adj[self.out_off[l] as usize..self.out_off[l + 1] as usize]
    }

    pub fn in_edges(&self, local: u32) -> &[(u32, bool)] {
        let l = local as usize;
        &self.in_adj[self.in_off[l] as usize..self.in_off[l + 1] as usize]
    }

    /// All edges as `(src, dst, live)` over local indices.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, bool)> + '_ {
        (0..self.node_count() as u32)
            .flat_map(move |u| self.out_edges(u).iter().map(move |&(v, l)| (u, v, l)))
    }

    /// Critical nodes: those whose boost alone activates the root. Sorted.
    pub fn critical(&self) -> &[NodeId] {
        &self.critical
    }

    #[inline]
    fn passes<F: NodeFilter + ?Sized>(&self, dst: u32, live: bool, boost: &F) -> bool {
        live || (dst != SUPER_SEED && boost.has(self.global[dst as usize]))
    }

    /// `f_R(B)`: is the root reachable from the super-seed under boost set `B`?
    pub fn f_eval<F: NodeFilter + ?Sized>(&self, boost: &F) -> bool {
        self.forward(boost)[ROOT as usize]
    }

    fn forward<F: NodeFilter + ?Sized>(&self, boost: &F) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[SUPER_SEED as usize] = true;
        let mut stack = vec![SUPER_SEED];
        while let Some(u) = stack.pop() {
            for &(v, live) in self.out_edges(u) {
                if !seen[v as usize] && self.passes(v, live, boost) {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    fn backward<F: NodeFilter + ?Sized>(&self, boost: &F) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[ROOT as usize] = true;
        let mut stack = vec![ROOT];
        while let Some(v) = stack.pop() {
            let v_boosted = self.passes(v, false, boost);
            for &(u, live) in self.in_edges(v) {
                if !seen[u as usize] && (live || v_boosted) {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Nodes `v` outside `B` with `f_R(B + v) = 1`, given `f_R(B) = 0`.
    ///
    /// With edges into `B` treated as live, `v` qualifies iff some boost-only
    /// edge `(u, v)` has `u` reachable from the super-seed and `v` reaching
    /// the root.
    pub fn critical_given<F: NodeFilter + ?Sized>(&self, boost: &F) -> Result<NodeSet> {
        let fwd = self.forward(boost);
        if fwd[ROOT as usize] {
            return Err(BoostError::RootActivated);
        }
        let bwd = self.backward(boost);
        let mut out = Vec::new();
        for u in 0..self.node_count() as u32 {
            if !fwd[u as usize] {
                continue;
            }
            for &(v, live) in self.out_edges(u) {
                if !live && bwd[v as usize] && !self.passes(v, false, boost) {
                    out.push(self.global[v as usize]);
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Text form: `root X`, `superseed ...`, then `src dst live|boost` lines
    /// with `*` for the super-seed.
    pub fn dump(&self, merged: Option<&[NodeId]>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "root {}", self.root());
        s.push_str("superseed");
        for v in merged.unwrap_or(&[]) {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
        let mut lines: Vec<(NodeId, NodeId, bool)> = self
            .edges()
            .map(|(a, b, l)| (self.global[a as usize], self.global[b as usize], l))
            .collect();
        lines.sort_unstable_by_key(|&(a, b, _)| (a != NodeId::SENTINEL, a, b));
        for (a, b, live) in lines {
            let name = |v: NodeId| if v == NodeId::SENTINEL { "*".to_string() } else { v.to_string() };
            let _ = writeln!(s, "{} {} {}", name(a), name(b), if live { "live" } else { "boost" });
        }
        s
    }

    /// Parses the [`dump`](Self::dump) format. The `superseed` line is optional.
    pub fn from_dump(text: &str, k: u32) -> Result<Self> {
        let mut root = None;
        let mut raw_edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |m: &str| BoostError::Parse { line: i + 1, message: m.to_string() };
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                [] => {}
                ["root", id] => root = Some(parse_id(id).ok_or_else(|| err("bad root id"))?),
                ["superseed", ..] => {}
                [a, b, st] => {
                    let live = match *st {
                        "live" => true,
                        "boost" => false,
                        _ => return Err(err("status must be live or boost")),
                    };
                    let a = if *a == "*" { NodeId::SENTINEL } else { parse_id(a).ok_or_else(|| err("bad id"))? };
                    let b = if *b == "*" { NodeId::SENTINEL } else { parse_id(b).ok_or_else(|| err("bad id"))? };
                    raw_edges.push((a, b, live));
                }
                _ => return Err(err("unrecognised line")),
            }
        }
        let root = root.ok_or(BoostError::Parse { line: 0, message: "missing root line".into() })?;
        let mut global = vec![NodeId::SENTINEL, root];
        let mut others: Vec<NodeId> = raw_edges
            .iter()
            .flat_map(|&(a, b, _)| [a, b])
            .filter(|&v| v != NodeId::SENTINEL && v != root)
            .collect();
        others.sort_unstable();
        others.dedup();
        global.extend(others);
        let local = |v: NodeId| global.iter().position(|&g| g == v).unwrap() as u32;
        let edges = raw_edges.iter().map(|&(a, b, l)| (local(a), local(b), l)).collect();
        PrrGraph::from_parts(global.clone(), edges, k)
    }
}

fn parse_id(s: &str) -> Option<NodeId> {
    s.parse::<u32>().ok().map(NodeId)
}

fn csr(n: usize, edges: impl Iterator<Item = (u32, u32, bool)> + Clone) -> (Vec<u32>, Vec<(u32, bool)>) {
    let mut off = vec![0u32; n + 1];
    for (a, _, _) in edges.clone() {
        off[a as usize + 1] += 1;
    }
    for i in 0..n {
        off[i + 1] += off[i];
    }
    let mut fill = off.clone();
    let mut adj = vec![(0u32, false); off[n] as usize];
    for (a, b, l) in edges {
        adj[fill[a as usize] as usize] = (b, l);
        fill[a as usize] += 1;
    }
    for i in 0..n {
        adj[off[i] as usize..off[i + 1] as usize].sort_unstable();
    }
    (off, adj)
}

fn adjacency(n: usize, edges: impl Iterator<Item = (usize, usize, bool)>) -> Vec<Vec<(usize, bool)>> {
    let mut out = vec![Vec::new(); n];
    for (a, b, l) in edges {
        out[a].push((b, l));
    }
    out
}

/// 0-1 BFS where live edges cost 0 and boost-only edges cost 1. `avoid` is
/// never entered.
fn zero_one(adj: &[Vec<(usize, bool)>], sources: &[usize], avoid: Option<usize>) -> Vec<u32> {
    let mut d = vec![INF; adj.len()];
    let mut q = VecDeque::new();
    for &s in sources {
        d[s] = 0;
        q.push_back(s);
    }
    while let Some(u) = q.pop_front() {
        for &(v, live) in &adj[u] {
            if Some(v) == avoid {
                continue;
            }
            let nd = d[u] + u32::from(!live);
            if nd < d[v] {
                d[v] = nd;
                if live {
                    q.push_front(v);
                } else {
                    q.push_back(v);
                }
            }
        }
    }
    d
}

fn reach(adj: &[Vec<(usize, bool)>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        for &(v, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Compresses a boostable raw sample.
pub fn compress(raw: &PrrRaw) -> Result<PrrGraph> {
    compress_traced(raw).map(|(g, _)| g)
}

/// Like [`compress`], also returning the graph ids merged into the super-seed.
pub fn compress_traced(raw: &PrrRaw) -> Result<(PrrGraph, Vec<NodeId>)> {
    let k = raw.k;
    let n = raw.nodes.len();
    let out = adjacency(n, raw.edges.iter().map(|&(a, b, l)| (a as usize, b as usize, l)));
    let seeds: Vec<usize> = (0..n).filter(|&v| raw.is_seed[v]).collect();
    let d_s = zero_one(&out, &seeds, None);
    if d_s[0] == 0 || d_s[0] > k {
        return Err(BoostError::NotBoostable);
    }

    // Part 1: merge X = {d_S = 0} into the super-seed.
    let in_x: Vec<bool> = d_s.iter().map(|&d| d == 0).collect();
    let mut merged: Vec<NodeId> = (0..n).filter(|&v| in_x[v]).map(|v| raw.nodes[v]).collect();
    merged.sort_unstable();
    let mut work_of = vec![usize::MAX; n];
    let mut globals = vec![NodeId::SENTINEL, raw.nodes[0]];
    work_of[0] = ROOT as usize;
    for v in 1..n {
        if !in_x[v] {
            work_of[v] = globals.len();
            globals.push(raw.nodes[v]);
        }
    }
    let mut dedup: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for &(a, b, live) in &raw.edges {
        let (a, b) = (a as usize, b as usize);
        if in_x[b] {
            continue;
        }
        let a = if in_x[a] { SUPER_SEED as usize } else { work_of[a] };
        let b = work_of[b];
        if a == ROOT as usize {
            continue;
        }
        *dedup.entry((a, b)).or_insert(false) |= live;
    }
    let mut edges: Vec<(usize, usize, bool)> = dedup.into_iter().map(|((a, b), l)| (a, b, l)).collect();
    let wn = globals.len();
    let mut alive = vec![true; wn];

    // Cleanup and part 2, repeated until nothing changes.
    loop {
        let before = (alive.clone(), edges.clone());
        let fwd = reach(&adjacency(wn, edges.iter().copied()), SUPER_SEED as usize);
        let bwd = reach(&adjacency(wn, edges.iter().map(|&(a, b, l)| (b, a, l))), ROOT as usize);
        for v in 0..wn {
            alive[v] = alive[v] && fwd[v] && bwd[v];
        }
        edges.retain(|&(a, b, _)| alive[a] && alive[b]);

        let out = adjacency(wn, edges.iter().copied());
        let inn = adjacency(wn, edges.iter().map(|&(a, b, l)| (b, a, l)));
        let d_s = zero_one(&out, &[SUPER_SEED as usize], None);
        let d_r = zero_one(&inn, &[ROOT as usize], Some(SUPER_SEED as usize));
        let shortcut: Vec<bool> = (0..wn).map(|v| v > ROOT as usize && alive[v] && d_r[v] == 0).collect();
        edges.retain(|&(a, _, _)| !shortcut[a]);
        edges.extend((0..wn).filter(|&v| shortcut[v]).map(|v| (v, ROOT as usize, true)));
        for v in (ROOT as usize + 1)..wn {
            if alive[v] && d_s[v].saturating_add(d_r[v]) > k {
                alive[v] = false;
            }
        }
        edges.retain(|&(a, b, _)| alive[a] && alive[b]);
        edges.sort_unstable();
        if (alive.clone(), edges.clone()) == before {
            break;
        }
    }

    let mut keep: Vec<usize> = ((ROOT as usize + 1)..wn).filter(|&v| alive[v]).collect();
    keep.sort_unstable_by_key(|&v| globals[v]);
    let mut final_of = vec![u32::MAX; wn];
    final_of[SUPER_SEED as usize] = SUPER_SEED;
    final_of[ROOT as usize] = ROOT;
    let mut global = vec![NodeId::SENTINEL, globals[ROOT as usize]];
    for v in keep {
        final_of[v] = global.len() as u32;
        global.push(globals[v]);
    }
    let local_edges = edges.iter().map(|&(a, b, l)| (final_of[a], final_of[b], l)).collect();
    Ok((PrrGraph::from_parts(global, local_edges, k)?, merged))
}

/// Compressed sample plus bookkeeping.
#[derive(Clone, Debug)]
pub struct PrrSample {
    pub class: PrrClassification,
    pub graph: Option<PrrGraph>,
    pub edges_visited: usize,
}

/// Critical set obtained without building the full sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CriticalOutcome {
    Activated,
    /// No seed within one boost of the root: the critical set is empty.
    NoCritical,
    Critical(Vec<NodeId>),
}

/// Per-thread generator with reusable buffers sized to the graph.
pub struct PrrGenerator<'g, P> {
    graph: &'g BoostGraph<P>,
    seed_mask: Vec<bool>,
    k: u32,
    stamp: u32,
    dist: Vec<(u32, u32)>,
    local: Vec<u32>,
    memo: Vec<(u32, EdgeState)>,
    queue: VecDeque<(u32, u32)>,
}

impl<'g, P: Probability> PrrGenerator<'g, P> {
    pub fn new(graph: &'g BoostGraph<P>, seeds: &NodeSet, k: usize) -> Result<Self> {
        if seeds.is_empty() {
            return Err(BoostError::EmptySeeds);
        }
        if k == 0 {
            return Err(BoostError::InvalidParameter("k must be at least 1 to sample PRR-graphs".into()));
        }
        if let Some(v) = seeds.iter().find(|v| v.index() >= graph.node_count()) {
            return Err(BoostError::NodeOutOfRange { id: v.0 as u64, n: graph.node_count() });
        }
        let n = graph.node_count();
        Ok(PrrGenerator {
            graph,
            seed_mask: seeds.to_mask(n),
            k: k.min(u32::MAX as usize - 1) as u32,
            stamp: 0,
            dist: vec![(0, INF); n],
            local: vec![0; n],
            memo: vec![(0, EdgeState::Blocked); graph.edge_count()],
            queue: VecDeque::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    fn bump(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.dist.iter_mut().for_each(|d| d.0 = 0);
            self.memo.iter_mut().for_each(|m| m.0 = 0);
            self.stamp = 1;
        }
        self.stamp
    }

    #[inline]
    fn d(&self, v: usize) -> u32 {
        let (s, d) = self.dist[v];
        if s == self.stamp {
            d
        } else {
            INF
        }
    }

    fn pick_root<R: Rng + ?Sized>(&self, choice: RootChoice, rng: &mut R) -> NodeId {
        match choice {
            RootChoice::Random => NodeId(rng.gen_range(0..self.graph.node_count() as u32)),
            RootChoice::Fixed(r) => r,
        }
    }

    /// Backward 0-1 search from `root` keeping edges within `limit` boosts.
    fn search<S: StatusSource>(&mut self, root: NodeId, limit: u32, world: &mut S) -> (PhaseOne, usize) {
        let stamp = self.stamp;
        let mut visited = 0;
        if self.seed_mask[root.index()] {
            return (PhaseOne::Activated, visited);
        }
        let mut nodes = vec![root];
        self.local[root.index()] = 0;
        self.dist[root.index()] = (stamp, 0);
        let mut edges: Vec<(u32, u32, bool)> = Vec::new();
        let mut seed_found = false;
        self.queue.clear();
        self.queue.push_back((root.0, 0));
        while let Some((u, du)) = self.queue.pop_front() {
            if du > self.d(u as usize) {
                continue;
            }
            let u_local = self.local[u as usize];
            for &ei in self.graph.in_edges(NodeId(u)) {
                visited += 1;
                let st = world.status(ei as usize);
                if st == EdgeState::Blocked {
                    continue;
                }
                let live = st == EdgeState::Live;
                let dv = du + u32::from(!live);
                if dv > limit {
                    continue;
                }
                let v = self.graph.edge(ei as usize).src;
                let vi = v.index();
                if self.dist[vi].0 != stamp {
                    self.dist[vi] = (stamp, INF);
                    self.local[vi] = nodes.len() as u32;
                    nodes.push(v);
                }
                edges.push((self.local[vi], u_local, live));
                if dv < self.dist[vi].1 {
                    self.dist[vi].1 = dv;
                    if self.seed_mask[vi] {
                        seed_found = true;
                        if dv == 0 {
                            return (PhaseOne::Activated, visited);
                        }
                    } else if dv == du {
                        self.queue.push_front((v.0, dv));
                    } else {
                        self.queue.push_back((v.0, dv));
                    }
                }
            }
        }
        if !seed_found {
            return (PhaseOne::Hopeless, visited);
        }
        let d_r: Vec<u32> = nodes.iter().map(|v| self.dist[v.index()].1).collect();
        // Nodes already live-connected to the root get one live edge to it.
        edges.retain(|&(a, _, _)| d_r[a as usize] != 0);
        edges.extend((1..nodes.len() as u32).filter(|&v| d_r[v as usize] == 0).map(|v| (v, 0, true)));
        let is_seed = nodes.iter().map(|v| self.seed_mask[v.index()]).collect();
        (PhaseOne::Raw(PrrRaw { nodes, is_seed, d_r, edges, k: limit }), visited)
    }

    /// Phase I against an explicit world.
    pub fn phase_one<S: StatusSource>(&mut self, root: NodeId, world: &mut S) -> (PhaseOne, usize) {
        self.bump();
        let k = self.k;
        self.search(root, k, world)
    }

    /// Full sample against an explicit world.
    pub fn generate_with<S: StatusSource>(&mut self, root: NodeId, world: &mut S) -> PrrSample {
        let (p1, edges_visited) = self.phase_one(root, world);
        finish(p1, edges_visited)
    }

    /// Full sample with lazily drawn edge states.
    pub fn generate<R: Rng + ?Sized>(&mut self, root: RootChoice, rng: &mut R) -> PrrSample {
        let stamp = self.bump();
        let root = self.pick_root(root, rng);
        let k = self.k;
        let mut memo = std::mem::take(&mut self.memo);
        let mut world = LazyWorld { graph: self.graph, rng, memo: &mut memo, stamp };
        let (p1, visited) = self.search(root, k, &mut world);
        self.memo = memo;
        finish(p1, visited)
    }

    /// Critical set only: the search stops at one boost, and the set is read
    /// off the raw sample. Draws a prefix of what [`generate`](Self::generate)
    /// draws on the same stream.
    pub fn generate_critical<R: Rng + ?Sized>(&mut self, root: RootChoice, rng: &mut R) -> (CriticalOutcome, usize) {
        let stamp = self.bump();
        let root = self.pick_root(root, rng);
        let mut memo = std::mem::take(&mut self.memo);
        let mut world = LazyWorld { graph: self.graph, rng, memo: &mut memo, stamp };
        let (p1, visited) = self.search(root, 1, &mut world);
        self.memo = memo;
        let out = match p1 {
            PhaseOne::Activated => CriticalOutcome::Activated,
            PhaseOne::Hopeless => CriticalOutcome::NoCritical,
            PhaseOne::Raw(raw) => {
                let crit = raw_critical(&raw);
                if crit.is_empty() {
                    CriticalOutcome::NoCritical
                } else {
                    CriticalOutcome::Critical(crit)
                }
            }
        };
        (out, visited)
    }
}

fn finish(p1: PhaseOne, edges_visited: usize) -> PrrSample {
    let (class, graph) = match p1 {
        PhaseOne::Activated => (PrrClassification::Activated, None),
        PhaseOne::Hopeless => (PrrClassification::Hopeless, None),
        PhaseOne::Raw(raw) => match compress(&raw) {
            Ok(g) => (PrrClassification::Boostable, Some(g)),
            // A seed was reached, but only through more than k boosts.
            Err(_) => (PrrClassification::Hopeless, None),
        },
    };
    PrrSample { class, graph, edges_visited }
}

/// Critical nodes of a raw sample: heads of boost-only edges whose tail is
/// live-reachable from a seed and which live-reach the root themselves.
fn raw_critical(raw: &PrrRaw) -> Vec<NodeId> {
    let n = raw.nodes.len();
    let out = adjacency(n, raw.edges.iter().map(|&(a, b, l)| (a as usize, b as usize, l)));
    let mut live_from_seed = raw.is_seed.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&v| raw.is_seed[v]).collect();
    while let Some(u) = stack.pop() {
        for &(v, live) in &out[u] {
            if live && !live_from_seed[v] {
                live_from_seed[v] = true;
                stack.push(v);
            }
        }
    }
    let crit: NodeSet = raw
        .edges
        .iter()
        .filter(|&&(a, b, live)| !live && live_from_seed[a as usize] && raw.d_r[b as usize] == 0)
        .map(|&(_, b, _)| raw.nodes[b as usize])
        .collect();
    crit.into_vec()
}

/// One sample: classification, compressed graph when boostable, and the
/// number of edges examined.
pub fn generate_prr<P: Probability, R: Rng + ?Sized>(
    graph: &BoostGraph<P>,
    seeds: &NodeSet,
    k: usize,
    root: RootChoice,
    rng: &mut R,
) -> Result<(PrrClassification, Option<PrrGraph>, usize)> {
    let s = PrrGenerator::new(graph, seeds, k)?.generate(root, rng);
    Ok((s.class, s.graph, s.edges_visited))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(ids: &[u32]) -> NodeSet {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn root_seed_is_activated() {
        let g = BoostGraph::<f64>::parse("0 1 0.5 0.6").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (c, r, _) = generate_prr(&g, &set(&[1]), 2, RootChoice::Fixed(NodeId(1)), &mut rng).unwrap();
        assert_eq!(c, PrrClassification::Activated);
        assert!(r.is_none());
    }

    #[test]
    fn zero_boost_is_hopeless() {
        let g = BoostGraph::<f64>::parse("0 1 0 0\n1 2 0 0").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for root in 1..3 {
            let (c, _, _) = generate_prr(&g, &set(&[0]), 2, RootChoice::Fixed(NodeId(root)), &mut rng).unwrap();
            assert_eq!(c, PrrClassification::Hopeless);
        }
    }

    #[test]
    fn single_boost_edge() {
        let g = BoostGraph::<f64>::parse("0 1 0 1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (c, r, visited) = generate_prr(&g, &set(&[0]), 1, RootChoice::Fixed(NodeId(1)), &mut rng).unwrap();
        assert_eq!(c, PrrClassification::Boostable);
        assert_eq!(visited, 1);
        let r = r.unwrap();
        assert_eq!(r.node_count(), 2);
        assert_eq!(r.edges().collect::<Vec<_>>(), vec![(SUPER_SEED, ROOT, false)]);
        assert_eq!(r.critical(), &[NodeId(1)]);
        assert!(r.f_eval(&set(&[1])));
        assert!(!r.f_eval(&set(&[0])));
    }

    #[test]
    fn too_many_boosts_is_hopeless() {
        let g = BoostGraph::<f64>::parse("0 1 0 1\n1 2 0 1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (c, _, _) = generate_prr(&g, &set(&[0]), 1, RootChoice::Fixed(NodeId(2)), &mut rng).unwrap();
        assert_eq!(c, PrrClassification::Hopeless);
        let (c, r, _) = generate_prr(&g, &set(&[0]), 2, RootChoice::Fixed(NodeId(2)), &mut rng).unwrap();
        assert_eq!(c, PrrClassification::Boostable);
        assert!(r.unwrap().critical().is_empty());
    }

    #[test]
    fn dump_round_trip() {
        let text = "root 5\nsuperseed\n* 2 boost\n* 3 boost\n2 5 live\n3 5 boost\n";
        let g = PrrGraph::from_dump(text, 2).unwrap();
        assert_eq!(g.dump(None), text);
        assert_eq!(g.critical(), &[NodeId(2)]);
        assert_eq!(g.critical_given(&set(&[3])).unwrap(), set(&[2, 5]));
        assert!(matches!(g.critical_given(&set(&[2])), Err(BoostError::RootActivated)));
        assert!(PrrGraph::from_dump("root 1\n* 1 live\n", 1).is_err());
    }

    #[test]
    fn memo_reuses_first_draw() {
        let g = BoostGraph::<f64>::parse("0 1 0.5 0.5").unwrap();
        let mut memo = vec![(0, EdgeState::Blocked); 1];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut w = LazyWorld { graph: &g, rng: &mut rng, memo: &mut memo, stamp: 1 };
        let first = w.status(0);
        for _ in 0..20 {
            assert_eq!(w.status(0), first);
        }
    }

    #[test]
    fn random_samples_are_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let n = rng.gen_range(3..12u32);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if a != b && rng.gen_bool(0.3) {
                        let p = rng.gen_range(0.0..0.6);
                        edges.push(Edge { src: NodeId(a), dst: NodeId(b), p, p_boost: p + rng.gen_range(0.0..0.4) });
                    }
                }
            }
            let g = BoostGraph::new(n as usize, edges).unwrap();
            let seeds = set(&[0]);
            let k = rng.gen_range(1..4);
            let world = FixedWorld::sample(&g, &mut rng);
            let root = NodeId(rng.gen_range(0..n));
            let mut gen = PrrGenerator::new(&g, &seeds, k).unwrap();
            let sample = gen.generate_with(root, &mut world.clone());
            let reached = world.reaches(&g, &seeds, &NodeSet::new(), root);
            assert_eq!(sample.class == PrrClassification::Activated, reached);
            if let Some(prr) = sample.graph {
                for _ in 0..20 {
                    let size = rng.gen_range(0..=k);
                    let b: NodeSet = (0..size).map(|_| NodeId(rng.gen_range(0..n))).collect();
                    assert_eq!(prr.f_eval(&b), world.reaches(&g, &seeds, &b, root));
                }
            }
        }
    }
}
