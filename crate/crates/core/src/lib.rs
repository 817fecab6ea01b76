//! Deciding NP query graphs with few oracle queries.
//!
//! A query graph is a DAG whose nodes are SAT queries: each node carries a CNF
//! over its input wires (the answers of its parent queries) and private proof
//! variables, and answers 1 iff some proof satisfies it. The result node's
//! answer decides the instance.
//!
//! The crate provides:
//!
//! - [`querygraph`]: the data model, the instance document format and direct
//!   topological evaluation.
//! - [`separator`]: exact balanced-separator search and separator trees.
//! - [`weighting`]: `c`-admissible weighting functions in exact big integers.
//! - [`compress`]: the separator-tree compression `G -> G' -> G'' -> G*`.
//! - [`oracle`]: the SAT oracle and the threshold oracle with query accounting.
//! - [`solver`]: binary search on the total solution weight and the two
//!   decision pipelines (compression and bounded depth).
//! - [`arithmetize`]: the polynomial encoding of the weighted objective, its
//!   multilinear extension and the weak-compression audit.
//! - [`instances`] and [`cli`]: seeded instance families and the `qw` front end.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod arithmetize;
pub mod cli;
pub mod compress;
pub mod instances;
pub mod oracle;
pub mod querygraph;
pub mod separator;
pub mod solver;
pub mod weighting;

mod error;

pub use error::Error;
pub use querygraph::{NodeId, QueryDag, QueryNode, QueryString};

pub type Result<T, E = Error> = std::result::Result<T, E>;
