//! Trie levels and leaves: hash and sorted dictionaries over offset vectors,
//! inline small vectors, contiguous ranges and counts.

mod leaf;
mod smallvec;
mod sorted_dict;
#[allow(clippy::module_inception)]
mod trie;

pub use leaf::{LeafIter, LeafKind, SMALLVEC_CAPACITIES};
pub use smallvec::SmallVec;
pub use sorted_dict::{OutOfOrder, SortedDict};
pub use trie::{build_trie, Entries, NodeRef, Trie};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DictKind {
    Hash,
    Sorted,
}

impl fmt::Display for DictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DictKind::Hash => "hash",
            DictKind::Sorted => "sorted",
        })
    }
}

impl FromStr for DictKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hash" => Ok(DictKind::Hash),
            "sorted" => Ok(DictKind::Sorted),
            _ => Err(format!("unknown dictionary kind {s:?}")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrieError {
    #[error("trie over {0} needs at least one key attribute")]
    NoLevels(String),
    #[error("relation {relation}: unknown attribute {attr}")]
    UnknownAttribute { relation: String, attr: String },
    #[error("relation {relation} is not declared sorted by {keys:?}")]
    NotSorted { relation: String, keys: Vec<String> },
    #[error("relation {0}: range leaves need sorted dictionaries")]
    RangeNeedsSorted(String),
    #[error("small vector capacity {0} is not one of 1, 2, 4, 8, 16")]
    UnsupportedCapacity(usize),
    #[error("relation {relation}: row {row} breaks a contiguous range")]
    NonContiguous { relation: String, row: usize },
    #[error("relation {relation}: row {row} arrived out of key order")]
    OutOfOrder { relation: String, row: usize },
}
