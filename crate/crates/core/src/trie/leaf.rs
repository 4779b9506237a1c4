use std::collections::hash_map;
use std::fmt;
use std::iter::Chain;
use std::ops::RangeInclusive;
use std::slice;
use std::str::FromStr;

use rustc_hash::FxHashMap;

use super::smallvec::SmallVec;
use crate::storage::RowOffset;

/// Inline capacities a `SmallVec` leaf can be built with.
pub const SMALLVEC_CAPACITIES: [usize; 5] = [1, 2, 4, 8, 16];

/// What a trie leaf stores about the rows that reach it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeafKind {
    /// Hash map from offset to multiplicity: the unoptimized baseline.
    OffsetMap,
    OffsetVec,
    /// Offsets with the first `N` stored inline.
    SmallVec(usize),
    /// Inclusive run `left..=right` of offsets; needs rows sorted on the keys.
    Range,
    /// Number of rows only.
    Count,
}

impl LeafKind {
    pub fn keeps_offsets(self) -> bool {
        self != LeafKind::Count
    }
}

impl fmt::Display for LeafKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafKind::OffsetMap => f.write_str("map"),
            LeafKind::OffsetVec => f.write_str("vec"),
            LeafKind::SmallVec(n) => write!(f, "smallvec:{n}"),
            LeafKind::Range => f.write_str("range"),
            LeafKind::Count => f.write_str("count"),
        }
    }
}

impl FromStr for LeafKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "map" => Ok(LeafKind::OffsetMap),
            "vec" => Ok(LeafKind::OffsetVec),
            "range" => Ok(LeafKind::Range),
            "count" => Ok(LeafKind::Count),
            "smallvec" => Ok(LeafKind::SmallVec(4)),
            _ => match s.strip_prefix("smallvec:").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => Ok(LeafKind::SmallVec(n)),
                _ => Err(format!("unknown leaf kind {s:?}")),
            },
        }
    }
}

/// All leaves of one trie, stored contiguously by kind.
#[derive(Clone, Debug)]
pub(crate) enum LeafStore {
    Map(Vec<FxHashMap<RowOffset, u32>>),
    Vec(Vec<Vec<RowOffset>>),
    Small1(Vec<SmallVec<RowOffset, 1>>),
    Small2(Vec<SmallVec<RowOffset, 2>>),
    Small4(Vec<SmallVec<RowOffset, 4>>),
    Small8(Vec<SmallVec<RowOffset, 8>>),
    Small16(Vec<SmallVec<RowOffset, 16>>),
    Range(Vec<(RowOffset, RowOffset)>),
    Count(Vec<u64>),
}

/// Offset `got` does not extend the run ending at `right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct NonContiguous {
    pub right: RowOffset,
    pub got: RowOffset,
}

macro_rules! each_offset_store {
    ($self:expr, $v:ident => $body:expr, $range:pat => $rbody:expr, $count:pat => $cbody:expr) => {
        match $self {
            LeafStore::Map($v) => $body,
            LeafStore::Vec($v) => $body,
            LeafStore::Small1($v) => $body,
            LeafStore::Small2($v) => $body,
            LeafStore::Small4($v) => $body,
            LeafStore::Small8($v) => $body,
            LeafStore::Small16($v) => $body,
            $range => $rbody,
            $count => $cbody,
        }
    };
}

impl LeafStore {
    /// `None` for a `SmallVec` capacity outside `SMALLVEC_CAPACITIES`.
    pub fn new(kind: LeafKind) -> Option<LeafStore> {
        Some(match kind {
            LeafKind::OffsetMap => LeafStore::Map(Vec::new()),
            LeafKind::OffsetVec => LeafStore::Vec(Vec::new()),
            LeafKind::SmallVec(1) => LeafStore::Small1(Vec::new()),
            LeafKind::SmallVec(2) => LeafStore::Small2(Vec::new()),
            LeafKind::SmallVec(4) => LeafStore::Small4(Vec::new()),
            LeafKind::SmallVec(8) => LeafStore::Small8(Vec::new()),
            LeafKind::SmallVec(16) => LeafStore::Small16(Vec::new()),
            LeafKind::SmallVec(_) => return None,
            LeafKind::Range => LeafStore::Range(Vec::new()),
            LeafKind::Count => LeafStore::Count(Vec::new()),
        })
    }

    pub fn len(&self) -> usize {
        each_offset_store!(self, v => v.len(), LeafStore::Range(v) => v.len(), LeafStore::Count(v) => v.len())
    }

    /// Creates a leaf holding one row and returns its index.
    pub fn push_new(&mut self, row: RowOffset) -> u32 {
        let idx = self.len() as u32;
        match self {
            LeafStore::Map(v) => {
                let mut m = FxHashMap::default();
                m.insert(row, 1);
                v.push(m);
            }
            LeafStore::Vec(v) => v.push(vec![row]),
            LeafStore::Small1(v) => v.push(std::iter::once(row).collect()),
            LeafStore::Small2(v) => v.push(std::iter::once(row).collect()),
            LeafStore::Small4(v) => v.push(std::iter::once(row).collect()),
            LeafStore::Small8(v) => v.push(std::iter::once(row).collect()),
            LeafStore::Small16(v) => v.push(std::iter::once(row).collect()),
            LeafStore::Range(v) => v.push((row, row)),
            LeafStore::Count(v) => v.push(1),
        }
        idx
    }

    pub fn insert(&mut self, leaf: u32, row: RowOffset) -> Result<(), NonContiguous> {
        let i = leaf as usize;
        match self {
            LeafStore::Map(v) => *v[i].entry(row).or_insert(0) += 1,
            LeafStore::Vec(v) => v[i].push(row),
            LeafStore::Small1(v) => v[i].push(row),
            LeafStore::Small2(v) => v[i].push(row),
            LeafStore::Small4(v) => v[i].push(row),
            LeafStore::Small8(v) => v[i].push(row),
            LeafStore::Small16(v) => v[i].push(row),
            LeafStore::Range(v) => {
                let right = v[i].1;
                if row != right + 1 {
                    return Err(NonContiguous { right, got: row });
                }
                v[i].1 = row;
            }
            LeafStore::Count(v) => v[i] += 1,
        }
        Ok(())
    }

    /// Number of rows that reached the leaf.
    pub fn multiplicity(&self, leaf: u32) -> u64 {
        let i = leaf as usize;
        match self {
            LeafStore::Map(v) => v[i].values().map(|&c| c as u64).sum(),
            LeafStore::Vec(v) => v[i].len() as u64,
            LeafStore::Small1(v) => v[i].len() as u64,
            LeafStore::Small2(v) => v[i].len() as u64,
            LeafStore::Small4(v) => v[i].len() as u64,
            LeafStore::Small8(v) => v[i].len() as u64,
            LeafStore::Small16(v) => v[i].len() as u64,
            LeafStore::Range(v) => (v[i].1 - v[i].0) as u64 + 1,
            LeafStore::Count(v) => v[i],
        }
    }

    /// The leaf's offsets, or `None` for a count leaf.
    pub fn offsets(&self, leaf: u32) -> Option<LeafIter<'_>> {
        let i = leaf as usize;
        Some(match self {
            LeafStore::Map(v) => LeafIter::Map(v[i].keys()),
            LeafStore::Vec(v) => LeafIter::Slice(v[i].iter()),
            LeafStore::Small1(v) => LeafIter::Small(v[i].iter()),
            LeafStore::Small2(v) => LeafIter::Small(v[i].iter()),
            LeafStore::Small4(v) => LeafIter::Small(v[i].iter()),
            LeafStore::Small8(v) => LeafIter::Small(v[i].iter()),
            LeafStore::Small16(v) => LeafIter::Small(v[i].iter()),
            LeafStore::Range(v) => LeafIter::Range(v[i].0..=v[i].1),
            LeafStore::Count(_) => return None,
        })
    }

    /// Offsets physically stored across all leaves (zero for ranges and counts).
    pub fn stored_offsets(&self) -> usize {
        each_offset_store!(self, v => v.iter().map(|l| l.len()).sum(), LeafStore::Range(_) => 0, LeafStore::Count(_) => 0)
    }
}

/// Offsets of one leaf, in insertion order (ascending for ranges, unspecified
/// for offset maps).
pub enum LeafIter<'a> {
    Map(hash_map::Keys<'a, RowOffset, u32>),
    Slice(slice::Iter<'a, RowOffset>),
    Small(Chain<slice::Iter<'a, RowOffset>, slice::Iter<'a, RowOffset>>),
    Range(RangeInclusive<RowOffset>),
}

impl Iterator for LeafIter<'_> {
    type Item = RowOffset;

    #[inline]
    fn next(&mut self) -> Option<RowOffset> {
        match self {
            LeafIter::Map(it) => it.next().copied(),
            LeafIter::Slice(it) => it.next().copied(),
            LeafIter::Small(it) => it.next().copied(),
            LeafIter::Range(it) => it.next(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse_and_print() {
        for k in [LeafKind::OffsetMap, LeafKind::OffsetVec, LeafKind::SmallVec(8), LeafKind::Range, LeafKind::Count] {
            assert_eq!(k.to_string().parse::<LeafKind>(), Ok(k));
        }
        assert_eq!("smallvec".parse::<LeafKind>(), Ok(LeafKind::SmallVec(4)));
        assert!("smallvec:0".parse::<LeafKind>().is_err());
        assert!(LeafStore::new(LeafKind::SmallVec(3)).is_none());
    }

    #[test]
    fn range_leaf() {
        let mut s = LeafStore::new(LeafKind::Range).unwrap();
        let l = s.push_new(2);
        assert_eq!(s.offsets(l).unwrap().collect::<Vec<_>>(), vec![2]);
        s.insert(l, 3).unwrap();
        assert_eq!(s.insert(l, 5), Err(NonContiguous { right: 3, got: 5 }));
        assert_eq!(s.multiplicity(l), 2);
    }

    #[test]
    fn count_and_map_leaves() {
        let mut c = LeafStore::new(LeafKind::Count).unwrap();
        let l = c.push_new(0);
        c.insert(l, 9).unwrap();
        assert_eq!(c.multiplicity(l), 2);
        assert!(c.offsets(l).is_none());
        let mut m = LeafStore::new(LeafKind::OffsetMap).unwrap();
        let l = m.push_new(4);
        m.insert(l, 1).unwrap();
        let mut got: Vec<_> = m.offsets(l).unwrap().collect();
        got.sort();
        assert_eq!(got, vec![1, 4]);
        assert_eq!(m.stored_offsets(), 2);
    }
}
