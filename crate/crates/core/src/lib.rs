//! Answer-set solving for ground head-cycle-free logic programs, parameterized
//! by treewidth.
//!
//! The pipeline: parse a ground program, build its primal graph and positive
//! dependency graph, find a tree decomposition, and either solve directly by
//! dynamic programming over a nice decomposition ([`dp`]) or compile the
//! program first to a tight program and then to CNF, keeping the treewidth of
//! every intermediate under control ([`reduce`]). Brute-force ground truth for
//! all of it lives in [`oracle`].

pub mod bitset;
pub mod dp;
pub mod graphs;
pub mod instances;
pub mod oracle;
pub mod program;
pub mod reduce;
pub mod td;

pub use bitset::BitSet;
pub use program::{Program, Rule};
