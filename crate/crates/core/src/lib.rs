//! Exact inference in discrete Bayesian networks by message passing on
//! junction trees, with a brute-force oracle, posterior sampling and a
//! forward/backward HMM implementation that the general engine reproduces.

pub mod cli;
pub mod factor;
pub mod hmm;
pub mod io;
pub mod jtree;
pub mod model;
pub mod oracle;
pub mod pedigree;
pub mod propagation;
pub mod sampling;

pub use factor::Factor;
pub use jtree::{build_junction_tree, validate_junction_tree, JunctionTree};
pub use model::{Cpd, DiscreteNetwork, EvidenceSet, VarId, Variable};
pub use propagation::CompiledQuery;
