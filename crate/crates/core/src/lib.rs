//! Proper permutations of the symmetric group: statistics, exact censuses
//! of the joint (inversions, descents) law, Monte Carlo estimates, and
//! I-sphericality search over reduced words.

pub mod cli;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod perm;
pub mod spherical;

pub use error::{Error, Result};
pub use perm::{BlockDecomposition, DescentProfile, Permutation};
