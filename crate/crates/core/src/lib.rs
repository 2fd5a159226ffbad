//! Boosting influence spread under the independent cascade model.
//!
//! Given a directed graph whose edges carry a base probability `p` and a
//! boosted probability `p'`, plus a fixed seed set, the crate selects `k`
//! nodes to boost so that the expected spread increase is maximised.
//!
//! * [`prr`] and [`selector`] sample potentially reverse-reachable graphs and
//!   run the sandwich selection on general graphs.
//! * [`tree`] and [`tree_dp`] solve the problem on bidirected trees, exactly
//!   (greedy with linear-time marginal gains) and with a rounded dynamic
//!   program.
//! * [`mc`] provides Monte-Carlo estimation and exact enumeration oracles.
//! * [`baselines`] holds the comparison heuristics.
//!
//! All numerical code is generic over [`Probability`]; the aliases below fix
//! the scalar to `f64`, which is what the command-line tools use.

pub mod baselines;
pub mod error;
pub mod graph;
pub mod mc;
pub mod num;
pub mod prr;
pub mod rng;
pub mod selector;
pub mod tree;
pub mod tree_dp;

pub use error::{BoostError, Result};
pub use graph::{BoostGraph, Edge, NodeFilter, NodeId, NodeSet};
pub use num::Probability;

/// Graph with double-precision probabilities.
pub type Graph = graph::BoostGraph<f64>;

/// Bidirected tree with double-precision probabilities.
pub type Tree = tree::BidirectedTree<f64>;
/// Per-node activation state of a tree under double precision.
pub type TreeState = tree::TreeState<f64>;
/// Rounded DP table under double precision.
pub type DpTable = tree_dp::DpTable<f64>;
