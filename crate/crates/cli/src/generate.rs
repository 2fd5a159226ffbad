//! Synthetic inputs with Trivalency probabilities.

use std::collections::BTreeSet;

use boostkit::num::beta_boost;
use boostkit::rng::{substream, Domain};
use boostkit::{BoostError, Edge, Graph, NodeId};
use rand::seq::SliceRandom;
use rand::Rng;

pub const TRIVALENCY: [f64; 3] = [0.1, 0.01, 0.001];

fn edge<R: Rng>(rng: &mut R, src: usize, dst: usize, beta: f64) -> Edge<f64> {
    let p = *TRIVALENCY.choose(rng).expect("non-empty");
    Edge { src: NodeId::from(src), dst: NodeId::from(dst), p, p_boost: beta_boost(p, beta) }
}

fn check_beta(beta: f64) -> Result<(), BoostError> {
    if beta >= 1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(BoostError::InvalidParameter(format!("beta must be at least 1, got {beta}")))
    }
}

/// Complete binary tree on `n` nodes (node `i` hangs below `(i - 1) / 2`), each
/// undirected edge replaced by two directed ones.
pub fn complete_binary_tree(n: usize, beta: f64, seed: u64) -> Result<Graph, BoostError> {
    if n < 1 {
        return Err(BoostError::InvalidParameter("tree needs at least one node".into()));
    }
    check_beta(beta)?;
    let mut rng = substream(seed, Domain::Generator, 0);
    let mut edges = Vec::with_capacity(2 * (n - 1));
    for v in 1..n {
        let u = (v - 1) / 2;
        edges.push(edge(&mut rng, u, v, beta));
        edges.push(edge(&mut rng, v, u, beta));
    }
    Graph::new(n, edges)
}

/// `m` distinct directed edges drawn uniformly among ordered pairs of `n` nodes.
pub fn random_graph(n: usize, m: usize, beta: f64, seed: u64) -> Result<Graph, BoostError> {
    check_beta(beta)?;
    let pairs = n.saturating_mul(n.saturating_sub(1));
    if n < 2 || m > pairs {
        return Err(BoostError::InvalidParameter(format!("cannot place {m} edges among {n} nodes")));
    }
    let mut rng = substream(seed, Domain::Generator, 1);
    let mut chosen = BTreeSet::new();
    while chosen.len() < m {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            chosen.insert((a, b));
        }
    }
    let edges = chosen.into_iter().map(|(a, b)| edge(&mut rng, a, b, beta)).collect();
    Graph::new(n, edges)
}
