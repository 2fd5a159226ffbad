//! DP-Boost: rounded dynamic program over a rooted bidirected tree in which
//! every node has at most two children.
//!
//! `g'(v, kappa, c, f)` is the best boost inside the subtree of `v` using
//! exactly `kappa` units of budget, where `c` is the activation probability of
//! `v` from inside its subtree and `f` that of its parent from outside. Both
//! are kept on a grid of multiples of `delta` (plus the value 1).

use std::collections::BTreeMap;

use crate::error::{BoostError, Result};
use crate::graph::{NodeId, NodeSet};
use crate::num::Probability;
use crate::tree::{compute_ap, greedy_boost, BidirectedTree};

/// Grid points the DP is allowed to use beyond which it refuses to run.
pub const MAX_GRID_POINTS: u64 = 1 << 24;

/// Multiples of `delta` below one, followed by the value one itself.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RoundingGrid<P> {
    delta: P,
    top: u32,
}

impl<P: Probability> RoundingGrid<P> {
    pub fn new(delta: P) -> Result<Self> {
        if !(delta > P::zero() && delta < P::one()) {
            return Err(BoostError::InvalidParameter(format!("rounding step {delta} outside (0, 1)")));
        }
        let approx = (P::one() / delta).ceil().as_f64();
        if approx > MAX_GRID_POINTS as f64 {
            return Err(BoostError::InvalidParameter(format!(
                "rounding step {delta} needs {approx} grid points (limit {MAX_GRID_POINTS})"
            )));
        }
        let mut top = approx as u32;
        while top > 1 && P::lit((top - 1) as f64) * delta >= P::one() {
            top -= 1;
        }
        while P::lit(top as f64) * delta < P::one() {
            top += 1;
        }
        Ok(RoundingGrid { delta, top })
    }

    pub fn delta(&self) -> P {
        self.delta
    }

    /// Index of the value one; indices below it are `i * delta < 1`.
    pub fn top(&self) -> u32 {
        self.top
    }

    pub fn value(&self, i: u32) -> P {
        if i >= self.top {
            P::one()
        } else {
            P::lit(i as f64) * self.delta
        }
    }

    /// Index of the largest grid value not above `x`.
    pub fn round_down(&self, x: P) -> u32 {
        if x >= P::one() {
            return self.top;
        }
        if x <= P::zero() {
            return 0;
        }
        let mut i = (x / self.delta).floor().as_f64().min((self.top - 1) as f64) as u32;
        while i > 0 && self.value(i) > x {
            i -= 1;
        }
        while i + 1 < self.top && self.value(i + 1) <= x {
            i += 1;
        }
        i
    }
}

/// `sum_u sum_v p^(k)(u ~> v)`, diagonal terms included.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PathBoundSum<P> {
    pub total: P,
}

/// Along every tree path, the influence probability when the `k` edges with
/// the largest `p'/p` are boosted (edges with `p = 0` count as infinitely
/// profitable). One depth-first search per source.
pub fn pk_sum<P: Probability>(tree: &BidirectedTree<P>, k: usize) -> PathBoundSum<P> {
    let n = tree.node_count();
    let mut total = P::zero();
    for source in 0..n {
        total = total + P::one();
        let mut walk = PathWalk { k, prod: vec![P::one()], zero_boost: vec![P::one()], zeros: 0, ratios: Vec::new() };
        // (node, parent, next slot, pushed ratio)
        let mut stack: Vec<(usize, usize, usize, Option<P>)> = vec![(source, usize::MAX, 0, None)];
        while let Some(frame) = stack.last_mut() {
            let (u, parent, slot) = (frame.0, frame.1, frame.2);
            if slot == tree.degree(NodeId::from(u)) {
                let pushed = frame.3;
                stack.pop();
                if !stack.is_empty() {
                    walk.pop(pushed);
                }
                continue;
            }
            frame.2 += 1;
            let nb = tree.neighbors(NodeId::from(u))[slot];
            let v = nb.node.index();
            if v == parent || nb.p_out_boost <= P::zero() {
                continue;
            }
            let pushed = walk.push(nb.p_out, nb.p_out_boost);
            if walk.zeros > k {
                walk.pop(pushed);
                continue;
            }
            total = total + walk.value();
            stack.push((v, u, 0, pushed));
        }
    }
    PathBoundSum { total }
}

struct PathWalk<P> {
    k: usize,
    prod: Vec<P>,
    zero_boost: Vec<P>,
    zeros: usize,
    /// Finite ratios `p'/p`, descending.
    ratios: Vec<P>,
}

impl<P: Probability> PathWalk<P> {
    fn push(&mut self, p: P, p_boost: P) -> Option<P> {
        let (prod, zb) = (*self.prod.last().unwrap(), *self.zero_boost.last().unwrap());
        if p <= P::zero() {
            self.zeros += 1;
            self.prod.push(prod);
            self.zero_boost.push(zb * p_boost);
            None
        } else {
            let r = p_boost / p;
            let at = self.ratios.partition_point(|&x| x >= r);
            self.ratios.insert(at, r);
            self.prod.push(prod * p);
            self.zero_boost.push(zb);
            Some(r)
        }
    }

    fn pop(&mut self, pushed: Option<P>) {
        self.prod.pop();
        self.zero_boost.pop();
        match pushed {
            None => self.zeros -= 1,
            Some(r) => {
                let at = self.ratios.partition_point(|&x| x > r);
                self.ratios.remove(at);
            }
        }
    }

    fn value(&self) -> P {
        let slots = self.k - self.zeros;
        let boost = self.ratios.iter().take(slots).fold(P::one(), |a, &r| a * r);
        *self.prod.last().unwrap() * *self.zero_boost.last().unwrap() * boost
    }
}

/// `delta = eps * max(LB, 1) / sum p^(k)` with `LB` the Greedy-Boost value.
pub fn rounding_delta<P: Probability>(tree: &BidirectedTree<P>, seeds: &NodeSet, k: usize, epsilon: P) -> Result<P> {
    check_epsilon(epsilon)?;
    let budget = k.min(tree.node_count() - seeds.len().min(tree.node_count()));
    let (_, lb) = greedy_boost(tree, seeds, budget)?;
    Ok(delta_from(epsilon, lb, pk_sum(tree, k).total))
}

fn delta_from<P: Probability>(epsilon: P, lb: P, pk: P) -> P {
    epsilon * lb.max(P::one()) / pk
}

fn check_epsilon<P: Probability>(epsilon: P) -> Result<()> {
    if epsilon > P::zero() && epsilon < P::one() {
        Ok(())
    } else {
        Err(BoostError::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// A tree hung from a chosen root.
#[derive(Clone, Debug)]
pub struct Rooting {
    pub root: NodeId,
    /// Slot of the parent in each node's adjacency list; `u32::MAX` at the root.
    pub parent_slot: Vec<u32>,
    /// Children as adjacency slots, in adjacency order.
    pub children: Vec<Vec<u32>>,
    /// Children before parents.
    pub post_order: Vec<NodeId>,
}

impl Rooting {
    /// Roots the tree at `root`; fails if any node gets more than two children.
    pub fn new<P: Probability>(tree: &BidirectedTree<P>, root: NodeId) -> Result<Self> {
        if root.index() >= tree.node_count() {
            return Err(BoostError::NodeOutOfRange { id: root.0 as u64, n: tree.node_count() });
        }
        let (order, parent_slot) = tree.bfs(root);
        let n = tree.node_count();
        let mut children = vec![Vec::new(); n];
        for u in 0..n {
            children[u] = (0..tree.degree(NodeId::from(u)) as u32).filter(|&s| s != parent_slot[u]).collect();
        }
        if let Some(u) = (0..n).find(|&u| children[u].len() > 2) {
            return Err(BoostError::TooManyChildren { node: u as u32, children: children[u].len(), root: root.0 });
        }
        Ok(Rooting { root, parent_slot, children, post_order: order.into_iter().rev().collect() })
    }

    /// Root minimising the largest child count, smallest id on ties.
    pub fn auto<P: Probability>(tree: &BidirectedTree<P>) -> Result<Self> {
        let n = tree.node_count();
        let degrees: Vec<usize> = (0..n).map(|u| tree.degree(NodeId::from(u))).collect();
        let mut sorted = degrees.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let best = (0..n)
            .min_by_key(|&r| {
                // Largest degree among the other nodes, minus the parent edge.
                let other = if degrees[r] == sorted[0] { sorted.get(1) } else { sorted.first() };
                (degrees[r].max(other.map_or(0, |&d| d.saturating_sub(1))), r)
            })
            .expect("tree is non-empty");
        Self::new(tree, NodeId::from(best))
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v.index()].is_empty()
    }
}

/// Inclusive grid-index ranges of `c` and `f` per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranges {
    pub c: Vec<(u32, u32)>,
    pub f: Vec<(u32, u32)>,
}

impl Ranges {
    /// No refinement: every grid point is allowed.
    pub fn full<P: Probability>(n: usize, grid: &RoundingGrid<P>) -> Self {
        Ranges { c: vec![(0, grid.top()); n], f: vec![(0, grid.top()); n] }
    }
}

/// Probabilities of the edges into `v` given whether `v` is boosted.
struct Inbound<P> {
    parent: [P; 2],
    children: Vec<[P; 2]>,
}

fn inbound<P: Probability>(tree: &BidirectedTree<P>, rooting: &Rooting, v: usize) -> Inbound<P> {
    let adj = tree.neighbors(NodeId::from(v));
    let parent = match rooting.parent_slot[v] {
        u32::MAX => [P::zero(), P::zero()],
        s => [adj[s as usize].p_in, adj[s as usize].p_in_boost],
    };
    let children = rooting.children[v].iter().map(|&s| [adj[s as usize].p_in, adj[s as usize].p_in_boost]).collect();
    Inbound { parent, children }
}

/// `1 - (1 - a*p) * prod (1 - c_j * q_j)`, rounded down.
fn combine<P: Probability>(grid: &RoundingGrid<P>, a: P, p: P, terms: &[(P, P)]) -> u32 {
    let miss = terms.iter().fold(P::one() - a * p, |acc, &(c, q)| acc * (P::one() - c * q));
    grid.round_down(P::one() - miss)
}

/// Lower bounds with base probabilities, upper bounds with every node boosted.
pub fn refine_ranges<P: Probability>(
    tree: &BidirectedTree<P>,
    rooting: &Rooting,
    seeds: &NodeSet,
    grid: &RoundingGrid<P>,
) -> Ranges {
    let n = tree.node_count();
    let mut ranges = Ranges { c: vec![(0, 0); n], f: vec![(0, 0); n] };
    let bounds: Vec<Inbound<P>> = (0..n).map(|v| inbound(tree, rooting, v)).collect();
    for &v in &rooting.post_order {
        let vi = v.index();
        ranges.c[vi] = if seeds.contains(v) {
            (grid.top(), grid.top())
        } else if rooting.is_leaf(v) {
            (0, 0)
        } else {
            let side = |b: usize| {
                let terms: Vec<(P, P)> = rooting.children[vi]
                    .iter()
                    .zip(&bounds[vi].children)
                    .map(|(&s, q)| {
                        let w = tree.neighbors(v)[s as usize].node.index();
                        let c = if b == 0 { ranges.c[w].0 } else { ranges.c[w].1 };
                        (grid.value(c), q[b])
                    })
                    .collect();
                combine(grid, P::zero(), P::zero(), &terms)
            };
            (side(0), side(1))
        };
    }
    for &v in rooting.post_order.iter().rev() {
        let vi = v.index();
        let kids: Vec<usize> =
            rooting.children[vi].iter().map(|&s| tree.neighbors(v)[s as usize].node.index()).collect();
        for (i, &w) in kids.iter().enumerate() {
            ranges.f[w] = if seeds.contains(v) {
                (grid.top(), grid.top())
            } else {
                let side = |b: usize| {
                    let f = if b == 0 { ranges.f[vi].0 } else { ranges.f[vi].1 };
                    let terms: Vec<(P, P)> = kids
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(j, &x)| {
                            let c = if b == 0 { ranges.c[x].0 } else { ranges.c[x].1 };
                            (grid.value(c), bounds[vi].children[j][b])
                        })
                        .collect();
                    combine(grid, grid.value(f), bounds[vi].parent[b], &terms)
                };
                (side(0), side(1))
            };
        }
    }
    ranges
}

/// One finite table entry with its back-pointer.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DpEntry<P> {
    pub value: P,
    /// Whether `v` itself spends one unit of budget.
    pub boosted: bool,
    /// `(kappa, c, f)` chosen for each child, in child order.
    pub kids: [(u32, u32, u32); 2],
}

/// Entries of one `(kappa, c)` pair, indexed by `f` from the node's lower bound.
#[derive(Clone, Debug)]
struct Row<P> {
    cells: Vec<Option<DpEntry<P>>>,
}

/// The filled table. Missing entries stand for `-inf`.
#[derive(Clone, Debug)]
pub struct DpTable<P> {
    grid: RoundingGrid<P>,
    rooting: Rooting,
    ranges: Ranges,
    k: usize,
    seeds: Vec<bool>,
    rows: Vec<BTreeMap<(u32, u32), Row<P>>>,
    range_misses: u64,
}

impl<P: Probability> DpTable<P> {
    /// Bottom-up fill in post-order.
    pub fn build(
        tree: &BidirectedTree<P>,
        seeds: &NodeSet,
        k: usize,
        grid: RoundingGrid<P>,
        rooting: Rooting,
        ranges: Ranges,
    ) -> Result<Self> {
        let n = tree.node_count();
        let k = k.min(n);
        let base = compute_ap(tree, seeds, &NodeSet::new())?;
        let mut table = DpTable {
            grid,
            rooting,
            ranges,
            k,
            seeds: seeds.to_mask(n),
            rows: vec![BTreeMap::new(); n],
            range_misses: 0,
        };
        let order = table.rooting.post_order.clone();
        for v in order {
            let kids: Vec<usize> = table.rooting.children[v.index()]
                .iter()
                .map(|&s| tree.neighbors(v)[s as usize].node.index())
                .collect();
            let into = inbound(tree, &table.rooting, v.index());
            let ap0 = base.ap(v);
            if kids.is_empty() {
                table.fill_leaf(v.index(), &into, ap0);
            } else if table.seeds[v.index()] {
                table.fill_seed(v.index(), &kids);
            } else {
                table.fill_nonseed(v.index(), &kids, &into, ap0);
            }
        }
        Ok(table)
    }

    fn f_span(&self, v: usize) -> std::ops::RangeInclusive<u32> {
        self.ranges.f[v].0..=self.ranges.f[v].1
    }

    fn own_term(&self, c: P, f: P, p: P, ap0: P) -> P {
        (P::one() - (P::one() - c) * (P::one() - f * p) - ap0).max(P::zero())
    }

    fn put(&mut self, v: usize, kappa: u32, c: u32, f: u32, entry: DpEntry<P>) {
        let (lo, hi) = self.ranges.f[v];
        let row = self.rows[v]
            .entry((kappa, c))
            .or_insert_with(|| Row { cells: vec![None; (hi - lo + 1) as usize] });
        let cell = &mut row.cells[(f - lo) as usize];
        if cell.map_or(true, |old| entry.value > old.value) {
            *cell = Some(entry);
        }
    }

    fn fill_leaf(&mut self, v: usize, into: &Inbound<P>, ap0: P) {
        let seed = self.seeds[v];
        let c = if seed { self.grid.top() } else { 0 };
        let cval = self.grid.value(c);
        for kappa in 0..=self.k as u32 {
            let b = kappa > 0;
            for f in self.f_span(v) {
                let value = self.own_term(cval, self.grid.value(f), into.parent[b as usize], ap0);
                self.put(v, kappa, c, f, DpEntry { value, boosted: b && !seed, kids: [(0, 0, 0); 2] });
            }
        }
    }

    /// Best `(c, value)` of child `w` at `(kappa, f)`.
    fn best_over_c(&self, w: usize, kappa: u32, f: u32) -> Option<(u32, P)> {
        let lo = self.ranges.f[w].0;
        let mut best: Option<(u32, P)> = None;
        for (&(_, c), row) in self.rows[w].range((kappa, 0)..=(kappa, u32::MAX)) {
            let cell = f.checked_sub(lo).and_then(|i| row.cells.get(i as usize)).copied().flatten();
            if let Some(e) = cell {
                if best.map_or(true, |(_, b)| e.value > b) {
                    best = Some((c, e.value));
                }
            }
        }
        best
    }

    fn fill_seed(&mut self, v: usize, kids: &[usize]) {
        let top = self.grid.top();
        for kappa in 0..=self.k as u32 {
            let mut best: Option<(P, [(u32, u32, u32); 2])> = None;
            let splits = if kids.len() == 1 { 0..=0 } else { 0..=kappa };
            for k1 in splits {
                let k0 = kappa - k1;
                let Some((c0, v0)) = self.best_over_c(kids[0], k0, top) else { continue };
                let (second, v1) = if kids.len() == 2 {
                    let Some((c1, v1)) = self.best_over_c(kids[1], k1, top) else { continue };
                    ((k1, c1, top), v1)
                } else {
                    ((0, 0, 0), P::zero())
                };
                let total = v0 + v1;
                if best.map_or(true, |(b, _)| total > b) {
                    best = Some((total, [(k0, c0, top), second]));
                }
            }
            if let Some((value, kid_ptrs)) = best {
                for f in self.f_span(v) {
                    self.put(v, kappa, top, f, DpEntry { value, boosted: false, kids: kid_ptrs });
                }
            }
        }
    }

    fn keys(&self, w: usize) -> Vec<(u32, u32)> {
        self.rows[w].keys().copied().collect()
    }

    fn lookup(&mut self, w: usize, kappa: u32, c: u32, f: u32) -> Option<P> {
        let lo = self.ranges.f[w].0;
        let row = self.rows[w].get(&(kappa, c))?;
        match f.checked_sub(lo).and_then(|i| row.cells.get(i as usize)) {
            Some(cell) => cell.map(|e| e.value),
            None => {
                self.range_misses += 1;
                None
            }
        }
    }

    fn fill_nonseed(&mut self, v: usize, kids: &[usize], into: &Inbound<P>, ap0: P) {
        let grid = self.grid;
        let first = self.keys(kids[0]);
        let second = if kids.len() == 2 { self.keys(kids[1]) } else { vec![(0, 0)] };
        for b in 0..2u32 {
            let bi = b as usize;
            for &(k0, c0) in &first {
                let q0 = P::one() - grid.value(c0) * into.children[0][bi];
                for &(k1, c1) in &second {
                    let kappa = b + k0 + k1;
                    if kappa as usize > self.k {
                        continue;
                    }
                    let q1 = if kids.len() == 2 { P::one() - grid.value(c1) * into.children[1][bi] } else { P::one() };
                    let c = grid.round_down(P::one() - q0 * q1);
                    let cval = grid.value(c);
                    for f in self.f_span(v) {
                        let outside = P::one() - grid.value(f) * into.parent[bi];
                        let f0 = grid.round_down(P::one() - outside * q1);
                        let Some(g0) = self.lookup(kids[0], k0, c0, f0) else { continue };
                        let (f1, g1) = if kids.len() == 2 {
                            let f1 = grid.round_down(P::one() - outside * q0);
                            let Some(g1) = self.lookup(kids[1], k1, c1, f1) else { continue };
                            (f1, g1)
                        } else {
                            (0, P::zero())
                        };
                        let own = (P::one() - (P::one() - cval) * outside - ap0).max(P::zero());
                        let entry = DpEntry { value: g0 + g1 + own, boosted: b == 1, kids: [(k0, c0, f0), (k1, c1, f1)] };
                        self.put(v, kappa, c, f, entry);
                    }
                }
            }
        }
    }

    pub fn grid(&self) -> &RoundingGrid<P> {
        &self.grid
    }

    pub fn rooting(&self) -> &Rooting {
        &self.rooting
    }

    pub fn ranges(&self) -> &Ranges {
        &self.ranges
    }

    /// Budget the table was filled for (clamped to the node count).
    pub fn budget(&self) -> usize {
        self.k
    }

    /// Child lookups whose `f` fell outside the child's stored range.
    pub fn range_misses(&self) -> u64 {
        self.range_misses
    }

    pub fn get(&self, v: NodeId, kappa: u32, c: u32, f: u32) -> Option<&DpEntry<P>> {
        let lo = self.ranges.f[v.index()].0;
        let row = self.rows[v.index()].get(&(kappa, c))?;
        f.checked_sub(lo).and_then(|i| row.cells.get(i as usize)).and_then(|e| e.as_ref())
    }

    /// All finite entries of `v` as `((kappa, c, f), entry)`.
    pub fn entries(&self, v: NodeId) -> impl Iterator<Item = ((u32, u32, u32), &DpEntry<P>)> + '_ {
        let lo = self.ranges.f[v.index()].0;
        self.rows[v.index()].iter().flat_map(move |(&(kappa, c), row)| {
            row.cells
                .iter()
                .enumerate()
                .filter_map(move |(i, e)| e.as_ref().map(|e| ((kappa, c, lo + i as u32), e)))
        })
    }

    pub fn entry_count(&self) -> usize {
        (0..self.rows.len()).map(|v| self.entries(NodeId::from(v)).count()).sum()
    }

    /// `max_c g'(r, k, c, 0)` and the `c` attaining it.
    pub fn answer(&self) -> Option<(u32, P)> {
        let r = self.rooting.root.index();
        let lo = self.ranges.f[r].0;
        let mut best: Option<(u32, P)> = None;
        for (&(_, c), row) in self.rows[r].range((self.k as u32, 0)..=(self.k as u32, u32::MAX)) {
            if lo != 0 {
                break;
            }
            if let Some(e) = row.cells[0] {
                if best.map_or(true, |(_, b)| e.value > b) {
                    best = Some((c, e.value));
                }
            }
        }
        best
    }

    /// Boosted non-seed nodes along the back-pointers of `g'(v, kappa, c, f)`.
    pub fn reconstruct(&self, tree: &BidirectedTree<P>, v: NodeId, kappa: u32, c: u32, f: u32) -> NodeSet {
        let mut out = NodeSet::new();
        let mut stack = vec![(v, kappa, c, f)];
        while let Some((u, kappa, c, f)) = stack.pop() {
            let e = self.get(u, kappa, c, f).expect("back-pointer to a stored entry");
            if e.boosted && !self.seeds[u.index()] {
                out.insert(u);
            }
            for (i, &s) in self.rooting.children[u.index()].iter().enumerate() {
                let w = tree.neighbors(u)[s as usize].node;
                let (k, c, f) = e.kids[i];
                stack.push((w, k, c, f));
            }
        }
        out
    }
}

/// Options for [`dp_boost_with`].
#[derive(Copy, Clone, Debug)]
pub struct DpOptions<P> {
    pub epsilon: P,
    /// `None` picks the root automatically.
    pub root: Option<NodeId>,
    /// Restrict `c` and `f` to their refined ranges.
    pub refine: bool,
}

/// Result of DP-Boost.
#[derive(Clone, Debug)]
pub struct DpBoost<P> {
    pub boost_set: NodeSet,
    /// `max_c g'(r, k, c, 0)`, a lower bound on the boost of `boost_set`.
    pub value: P,
    pub delta: P,
    pub table: DpTable<P>,
}

pub fn dp_boost<P: Probability>(
    tree: &BidirectedTree<P>,
    seeds: &NodeSet,
    k: usize,
    epsilon: P,
    root: Option<NodeId>,
) -> Result<DpBoost<P>> {
    dp_boost_with(tree, seeds, k, &DpOptions { epsilon, root, refine: true })
}

pub fn dp_boost_with<P: Probability>(
    tree: &BidirectedTree<P>,
    seeds: &NodeSet,
    k: usize,
    options: &DpOptions<P>,
) -> Result<DpBoost<P>> {
    if seeds.is_empty() {
        return Err(BoostError::EmptySeeds);
    }
    if let Some(v) = seeds.iter().find(|v| v.index() >= tree.node_count()) {
        return Err(BoostError::NodeOutOfRange { id: v.0 as u64, n: tree.node_count() });
    }
    let rooting = match options.root {
        Some(r) => Rooting::new(tree, r)?,
        None => Rooting::auto(tree)?,
    };
    let delta = rounding_delta(tree, seeds, k, options.epsilon)?;
    let grid = RoundingGrid::new(delta)?;
    let ranges = if options.refine {
        refine_ranges(tree, &rooting, seeds, &grid)
    } else {
        Ranges::full(tree.node_count(), &grid)
    };
    let table = DpTable::build(tree, seeds, k, grid, rooting, ranges)?;
    let (c, value) = table.answer().expect("root entry with f = 0 always exists");
    let root = table.rooting().root;
    let boost_set = table.reconstruct(tree, root, table.budget() as u32, c, 0);
    Ok(DpBoost { boost_set, value, delta, table })
}
