//! Stable matchings under Mallows-distributed preferences.

pub mod analysis;
pub mod cli;
pub mod cutpoints;
pub mod error;
pub mod mallows;
pub mod perm;
pub mod matching;
pub mod prefs;
pub mod rng;

pub use error::{Error, Result};
pub use mallows::{MallowsParams, MallowsTable};
pub use perm::{IntInterval, LStats, LehmerCode, Permutation};
pub use prefs::{Person, PreferenceStructure, Role};
pub use matching::{Matching, StableCount, StableLattice};
pub use cutpoints::{BlockDecomposition, CutPosition, DecompositionMethod};
