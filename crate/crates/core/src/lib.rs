pub mod agents;
pub mod classify;
pub mod corpus;
pub mod engine;
pub mod grammar;
pub mod metrics;
pub mod oracle;
pub mod phylo;
pub mod reconstruct;
