use thiserror::Error;

pub type Result<T> = std::result::Result<T, BoostError>;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: edge {src}->{dst} has p={p} > p'={p_boost}")]
    BoostBelowBase { line: usize, src: u32, dst: u32, p: f64, p_boost: f64 },

    #[error("line {line}: probability {value} outside [0, 1]")]
    ProbabilityRange { line: usize, value: f64 },

    #[error("duplicate edge {src}->{dst}")]
    DuplicateEdge { src: u32, dst: u32 },

    #[error("self-loop on node {0}")]
    SelfLoop(u32),

    #[error("node id {id} out of range for graph with {n} nodes")]
    NodeOutOfRange { id: u64, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("seed set is empty")]
    EmptySeeds,

    #[error("need {needed} candidate nodes but only {available} are available")]
    InsufficientCandidates { needed: usize, available: usize },

    #[error("{edges} relevant edges exceed the enumeration cap of {cap}")]
    EnumerationCap { edges: usize, cap: usize },

    #[error("{subsets} candidate subsets exceed the search cap of {cap}")]
    SubsetCap { subsets: u128, cap: u128 },

    #[error("PRR-graph is not boostable")]
    NotBoostable,

    #[error("root is already activated under the given boost set")]
    RootActivated,

    #[error("lower-bound objective is identically zero on the sampled batch; nothing to boost")]
    DegenerateMu,

    #[error("input is not a bidirected tree: {0}")]
    NotATree(String),

    #[error("node {node} has {children} children when rooted at {root}; DP-Boost needs at most 2 (try another --root)")]
    TooManyChildren { node: u32, children: usize, root: u32 },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}
