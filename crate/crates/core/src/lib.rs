//! Step-graph and multicommodity-flow analysis of nondeterministic Turing
//! machines, with a brute-force oracle to check every stage against.

pub mod bundle;
pub mod cfg;
pub mod commodity;
pub mod decider;
pub mod difftest;
pub mod dot;
pub mod enumerate;
pub mod error;
pub mod fixtures;
pub mod lp;
pub mod machine;
pub mod oracle;
pub mod random;
pub mod reaching;
pub mod seqgraph;
pub mod step;

pub use error::{Error, ParseError, Result};
