use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::ExecError;
use crate::storage::Relation;
use crate::trie::{DictKind, LeafKind};

/// Optimization toggles. With everything off the executor builds nested hash
/// maps whose leaves map offsets to multiplicities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Opts {
    /// Offset-vector leaves.
    pub o1: bool,
    /// Small-vector leaves with `smallvec` inline slots.
    pub o2: bool,
    /// Drop dead columns from the plan.
    pub o3: bool,
    /// Count leaves for relations whose offsets are never read.
    pub o4: bool,
    /// Factorized count and min aggregation.
    pub o5: bool,
    pub smallvec: usize,
}

impl Opts {
    pub fn all() -> Opts {
        Opts { o1: true, o2: true, o3: true, o4: true, o5: true, smallvec: 4 }
    }

    pub fn none() -> Opts {
        Opts { o1: false, o2: false, o3: false, o4: false, o5: false, smallvec: 4 }
    }

    /// `i` in 1..=5.
    pub fn get(&self, i: usize) -> bool {
        [self.o1, self.o2, self.o3, self.o4, self.o5][i - 1]
    }

    pub fn with(mut self, i: usize, on: bool) -> Opts {
        match i {
            1 => self.o1 = on,
            2 => self.o2 = on,
            3 => self.o3 = on,
            4 => self.o4 = on,
            5 => self.o5 = on,
            _ => panic!("no optimization O{i}"),
        }
        self
    }

    /// Leaf used where offsets are kept, before any override.
    pub fn offset_leaf(&self) -> LeafKind {
        if self.o2 {
            LeafKind::SmallVec(self.smallvec)
        } else if self.o1 {
            LeafKind::OffsetVec
        } else {
            LeafKind::OffsetMap
        }
    }
}

impl Default for Opts {
    fn default() -> Self {
        Opts::all()
    }
}

impl fmt::Display for Opts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on: Vec<String> = (1..=5).filter(|&i| self.get(i)).map(|i| format!("O{i}")).collect();
        if on.is_empty() {
            f.write_str("O0")
        } else {
            f.write_str(&on.join(","))
        }
    }
}

/// Parses `all`, `none`/`O0`, a comma list such as `O1,O3`, or a range such
/// as `O1..O5`.
impl FromStr for Opts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "all" | "" => return Ok(Opts::all()),
            "none" | "O0" | "o0" => return Ok(Opts::none()),
            _ => {}
        }
        let num = |t: &str| -> Result<usize, String> {
            let t = t.trim();
            t.strip_prefix(['O', 'o'])
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|i| (1..=5).contains(i))
                .ok_or_else(|| format!("unknown optimization {t:?}"))
        };
        let mut o = Opts::none();
        for part in s.split(',') {
            if let Some((a, b)) = part.split_once("..") {
                for i in num(a)?..=num(b)? {
                    o = o.with(i, true);
                }
            } else {
                o = o.with(num(part)?, true);
            }
        }
        Ok(o)
    }
}

/// Leaf selection for relations whose offsets are needed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LeafChoice {
    /// Follow the optimization toggles (and ranges on sorted levels).
    #[default]
    Auto,
    Fixed(LeafKind),
    /// Like `Auto`, but count leaves wherever offsets are unused, even with O4 off.
    CountWhereLegal,
}

impl FromStr for LeafChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(LeafChoice::Auto),
            "count-where-legal" => Ok(LeafChoice::CountWhereLegal),
            other => other.parse::<LeafKind>().map(LeafChoice::Fixed),
        }
    }
}

impl fmt::Display for LeafChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafChoice::Auto => f.write_str("auto"),
            LeafChoice::Fixed(k) => write!(f, "{k}"),
            LeafChoice::CountWhereLegal => f.write_str("count-where-legal"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicyKind {
    /// Hash dictionaries everywhere.
    Hash,
    /// Sorted dictionaries everywhere, sorting relations that are not already
    /// sorted on the trie keys.
    Sorted,
    /// Sorted dictionaries for base relations already sorted on the trie keys,
    /// hash dictionaries for everything else.
    Hybrid,
    /// A fixed structure per relation; relations not listed use hash.
    Explicit(BTreeMap<String, (DictKind, LeafKind)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructurePolicy {
    pub kind: PolicyKind,
    pub leaf: LeafChoice,
}

impl StructurePolicy {
    pub fn hash() -> StructurePolicy {
        StructurePolicy { kind: PolicyKind::Hash, leaf: LeafChoice::Auto }
    }

    pub fn sorted() -> StructurePolicy {
        StructurePolicy { kind: PolicyKind::Sorted, leaf: LeafChoice::Auto }
    }

    pub fn hybrid() -> StructurePolicy {
        StructurePolicy { kind: PolicyKind::Hybrid, leaf: LeafChoice::Auto }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PolicyKind::Hash => "hash",
            PolicyKind::Sorted => "sorted",
            PolicyKind::Hybrid => "hybrid",
            PolicyKind::Explicit(_) => "explicit",
        }
    }

    /// Picks the dictionary and leaf for a trie over `keys` of `rel`, and
    /// whether the relation must first be sorted on `keys`.
    pub fn choose(&self, rel: &Relation, keys: &[String], needs_offsets: bool, opts: &Opts) -> Result<Choice, ExecError> {
        let sorted_already = rel.is_sorted_on(keys);
        let count_ok = !needs_offsets && (opts.o4 || self.leaf == LeafChoice::CountWhereLegal);
        let (dict, sort) = match &self.kind {
            PolicyKind::Hash => (DictKind::Hash, false),
            PolicyKind::Sorted => (DictKind::Sorted, !sorted_already),
            PolicyKind::Hybrid if sorted_already && !rel.is_intermediate() => (DictKind::Sorted, false),
            PolicyKind::Hybrid => (DictKind::Hash, false),
            PolicyKind::Explicit(m) => match m.get(rel.name()) {
                Some(&(dict, leaf)) => {
                    if dict == DictKind::Sorted && !sorted_already {
                        return Err(ExecError::Policy(format!("{} is not sorted on {keys:?}", rel.name())));
                    }
                    if leaf == LeafKind::Range && dict != DictKind::Sorted {
                        return Err(ExecError::Policy(format!("{}: range leaves need sorted dictionaries", rel.name())));
                    }
                    if leaf == LeafKind::Count && needs_offsets {
                        return Err(ExecError::Policy(format!("{}: offsets are needed, count leaf illegal", rel.name())));
                    }
                    return Ok(Choice { dict, leaf, sort: false });
                }
                None => (DictKind::Hash, false),
            },
        };
        let leaf = if count_ok {
            LeafKind::Count
        } else {
            match self.leaf {
                LeafChoice::Fixed(LeafKind::Range) if dict != DictKind::Sorted => {
                    return Err(ExecError::Policy(format!("{}: range leaves need sorted dictionaries", rel.name())))
                }
                LeafChoice::Fixed(LeafKind::Count) if needs_offsets => {
                    return Err(ExecError::Policy(format!("{}: offsets are needed, count leaf illegal", rel.name())))
                }
                LeafChoice::Fixed(k) => k,
                _ if dict == DictKind::Sorted => LeafKind::Range,
                _ => opts.offset_leaf(),
            }
        };
        Ok(Choice { dict, leaf, sort })
    }
}

impl Default for StructurePolicy {
    fn default() -> Self {
        StructurePolicy::hash()
    }
}

impl FromStr for StructurePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hash" => Ok(StructurePolicy::hash()),
            "sorted" => Ok(StructurePolicy::sorted()),
            "hybrid" => Ok(StructurePolicy::hybrid()),
            _ => Err(format!("unknown dictionary policy {s:?} (hash, sorted, hybrid)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Choice {
    pub dict: DictKind,
    pub leaf: LeafKind,
    pub sort: bool,
}
