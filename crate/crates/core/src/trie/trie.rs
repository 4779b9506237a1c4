use std::collections::hash_map;
use std::fmt::Write as _;
use std::iter::Zip;
use std::slice;

use rustc_hash::FxHashMap;

use super::leaf::{LeafIter, LeafStore};
use super::sorted_dict::SortedDict;
use super::{DictKind, LeafKind, TrieError};
use crate::storage::{Relation, RowOffset, Value};

/// Child of a dictionary entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Inner(u32),
    Leaf(u32),
}

#[derive(Clone, Debug)]
enum Dict {
    Hash(FxHashMap<Value, NodeRef>),
    Sorted(SortedDict<Value, NodeRef>),
}

/// Nested dictionaries over a relation's key attributes, one level per
/// attribute, with leaves describing the rows under each key path.
#[derive(Clone, Debug)]
pub struct Trie {
    relation: String,
    attrs: Vec<String>,
    dict: DictKind,
    leaf: LeafKind,
    nodes: Vec<Dict>,
    leaves: LeafStore,
    insertions: u64,
}

/// Builds a trie over `key_attrs` of `rel`, inserting every row once in row
/// order.
pub fn build_trie(rel: &Relation, key_attrs: &[String], dict: DictKind, leaf: LeafKind) -> Result<Trie, TrieError> {
    if key_attrs.is_empty() {
        return Err(TrieError::NoLevels(rel.name().to_string()));
    }
    let cols = key_attrs
        .iter()
        .map(|a| {
            rel.attr_index(a)
                .ok_or_else(|| TrieError::UnknownAttribute { relation: rel.name().to_string(), attr: a.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if dict == DictKind::Sorted && !rel.is_sorted_on(key_attrs) {
        return Err(TrieError::NotSorted { relation: rel.name().to_string(), keys: key_attrs.to_vec() });
    }
    if leaf == LeafKind::Range && dict != DictKind::Sorted {
        return Err(TrieError::RangeNeedsSorted(rel.name().to_string()));
    }
    let leaves = LeafStore::new(leaf).ok_or_else(|| match leaf {
        LeafKind::SmallVec(n) => TrieError::UnsupportedCapacity(n),
        _ => unreachable!("only small vectors have a capacity"),
    })?;
    let mut t = Trie {
        relation: rel.name().to_string(),
        attrs: key_attrs.to_vec(),
        dict,
        leaf,
        nodes: vec![Trie::new_dict(dict)],
        leaves,
        insertions: 0,
    };
    let columns: Vec<_> = cols.iter().map(|&c| rel.column(c)).collect();
    let last = columns.len() - 1;
    for row in 0..rel.len() {
        let mut node = 0u32;
        for (lvl, col) in columns.iter().enumerate() {
            let key = col.get(row);
            let (child, fresh) = t.child_or_insert(node, key, lvl == last, row as RowOffset)?;
            match child {
                NodeRef::Inner(i) => node = i,
                NodeRef::Leaf(l) => {
                    if !fresh {
                        t.leaves.insert(l, row as RowOffset).map_err(|_| TrieError::NonContiguous {
                            relation: t.relation.clone(),
                            row,
                        })?;
                    }
                }
            }
        }
        t.insertions += 1;
    }
    Ok(t)
}

impl Trie {
    fn new_dict(kind: DictKind) -> Dict {
        match kind {
            DictKind::Hash => Dict::Hash(FxHashMap::default()),
            DictKind::Sorted => Dict::Sorted(SortedDict::new()),
        }
    }

    // Returns the child for `key`, creating it when absent. A fresh leaf
    // already holds `row`.
    fn child_or_insert(&mut self, node: u32, key: Value, leaf: bool, row: RowOffset) -> Result<(NodeRef, bool), TrieError> {
        let Trie { nodes, leaves, dict, relation, .. } = self;
        let next = nodes.len() as u32;
        let mut created = false;
        let mut make = || {
            created = true;
            if leaf {
                NodeRef::Leaf(leaves.push_new(row))
            } else {
                NodeRef::Inner(next)
            }
        };
        let child = match &mut nodes[node as usize] {
            Dict::Hash(m) => match m.entry(key) {
                hash_map::Entry::Occupied(e) => *e.get(),
                hash_map::Entry::Vacant(e) => *e.insert(make()),
            },
            Dict::Sorted(d) => *d
                .last_or_insert_with(key, make)
                .map_err(|_| TrieError::OutOfOrder { relation: relation.clone(), row: row as usize })?,
        };
        if created && !leaf {
            nodes.push(Trie::new_dict(*dict));
        }
        Ok((child, created))
    }

    pub fn root(&self) -> NodeRef {
        NodeRef::Inner(0)
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn depth(&self) -> usize {
        self.attrs.len()
    }

    pub fn dict_kind(&self) -> DictKind {
        self.dict
    }

    pub fn leaf_kind(&self) -> LeafKind {
        self.leaf
    }

    /// Rows inserted while building.
    pub fn insertions(&self) -> u64 {
        self.insertions
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Offsets physically held by leaves; zero for range and count leaves.
    pub fn stored_offsets(&self) -> usize {
        self.leaves.stored_offsets()
    }

    /// Number of keys in an inner node.
    pub fn len(&self, node: u32) -> usize {
        match &self.nodes[node as usize] {
            Dict::Hash(m) => m.len(),
            Dict::Sorted(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len(0) == 0
    }

    /// Looks `key` up in inner node `node`. Sorted levels add their key
    /// comparisons to `comparisons`.
    #[inline]
    pub fn get(&self, node: u32, key: &Value, comparisons: &mut u64) -> Option<NodeRef> {
        match &self.nodes[node as usize] {
            Dict::Hash(m) => m.get(key).copied(),
            Dict::Sorted(d) => d.get(key, comparisons).copied(),
        }
    }

    /// Entries of an inner node: ascending for sorted levels, unspecified
    /// order for hash levels.
    pub fn entries(&self, node: u32) -> Entries<'_> {
        match &self.nodes[node as usize] {
            Dict::Hash(m) => Entries::Hash(m.iter()),
            Dict::Sorted(d) => Entries::Sorted(d.iter()),
        }
    }

    /// Rows under a leaf.
    #[inline]
    pub fn multiplicity(&self, leaf: u32) -> u64 {
        self.leaves.multiplicity(leaf)
    }

    /// Offsets of a leaf; `None` for count leaves.
    #[inline]
    pub fn offsets(&self, leaf: u32) -> Option<LeafIter<'_>> {
        self.leaves.offsets(leaf)
    }

    /// One line per root-to-leaf path: `k1/k2 -> [o1, o2]` or `k1 -> count:c`,
    /// keys in iteration order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut path = Vec::new();
        self.dump_node(0, &mut path, &mut out);
        out
    }

    fn dump_node(&self, node: u32, path: &mut Vec<String>, out: &mut String) {
        for (k, child) in self.entries(node) {
            path.push(k.to_string());
            match child {
                NodeRef::Inner(i) => self.dump_node(i, path, out),
                NodeRef::Leaf(l) => {
                    let _ = write!(out, "{} -> ", path.join("/"));
                    match self.offsets(l) {
                        Some(it) => {
                            let offs: Vec<String> = it.map(|o| o.to_string()).collect();
                            let _ = writeln!(out, "[{}]", offs.join(", "));
                        }
                        None => {
                            let _ = writeln!(out, "count:{}", self.multiplicity(l));
                        }
                    }
                }
            }
            path.pop();
        }
    }

    /// Every key path with its leaf, in iteration order.
    pub fn paths(&self) -> Vec<(Vec<Value>, u32)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_paths(0, &mut path, &mut out);
        out
    }

    fn collect_paths(&self, node: u32, path: &mut Vec<Value>, out: &mut Vec<(Vec<Value>, u32)>) {
        for (k, child) in self.entries(node) {
            path.push(k.clone());
            match child {
                NodeRef::Inner(i) => self.collect_paths(i, path, out),
                NodeRef::Leaf(l) => out.push((path.clone(), l)),
            }
            path.pop();
        }
    }
}

pub enum Entries<'a> {
    Hash(hash_map::Iter<'a, Value, NodeRef>),
    Sorted(Zip<slice::Iter<'a, Value>, slice::Iter<'a, NodeRef>>),
}

impl<'a> Iterator for Entries<'a> {
    type Item = (&'a Value, NodeRef);

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Entries::Hash(it) => it.next().map(|(k, v)| (k, *v)),
            Entries::Sorted(it) => it.next().map(|(k, v)| (k, *v)),
        }
    }
}
