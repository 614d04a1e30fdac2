//! Genotype distances between rule trees, and neighbour-joining trees
//! over them.

mod genotype;
mod matrix;
mod newick;
mod nj;
mod tree;

pub use genotype::{genotype_distance, signature_distance, Abstraction, GenotypeSignature};
pub use matrix::{distance_matrix, DistanceMatrix};
pub use newick::{from_newick, to_newick};
pub use nj::neighbor_joining;
pub use tree::{random_tree, Edge, PhyloTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhyloError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("distance matrix: {0}")]
    Matrix(String),
    #[error("newick at byte {offset}: {message}")]
    Newick { offset: usize, message: String },
}
