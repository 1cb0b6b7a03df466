use thiserror::Error;

use crate::config::ValidationErrors;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationErrors),

    #[error("empty sampling range: lo {lo} > hi {hi}")]
    EmptyRange { lo: u64, hi: u64 },

    #[error("no community sizes in [{min}, {max}] can add up to {n}")]
    InfeasibleCommunitySizes { n: usize, min: usize, max: usize },

    #[error(
        "node {node} (community degree {y}, background degree {z}) fits in no community with free spots"
    )]
    AssignmentInfeasible { node: usize, y: u32, z: u32 },

    #[error("rewiring stuck: {bad} bad hyperedges left and no good hyperedge to swap with")]
    Unrepairable { bad: usize },

    #[error("modularity is undefined without edges")]
    NoEdges,

    #[error("partition covers {found} nodes, expected {expected}")]
    PartitionSize { expected: usize, found: usize },
}
