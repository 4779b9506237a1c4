use std::collections::{BTreeMap, BTreeSet};

use super::{validate_plan, AggregationSpec, Atom, ConjunctiveQuery, FreeJoinPlan, Subatom};

/// Column liveness for one plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Liveness {
    pub live: BTreeSet<String>,
    pub dead: BTreeSet<String>,
    /// The plan with dead variables removed. Positional bindings still refer
    /// to the original atoms.
    pub plan: FreeJoinPlan,
    /// Per relation: whether its trie must keep row offsets. A relation
    /// needs them only when a later node iterates its leaf.
    pub needs_offsets: BTreeMap<String, bool>,
}

/// A variable is live when the aggregate outputs it or a second atom joins on
/// it. An atom left with no live variable keeps its first one so its
/// multiplicity still reaches the result.
pub fn liveness(q: &ConjunctiveQuery, p: &FreeJoinPlan, agg: &AggregationSpec) -> Liveness {
    let mut live: BTreeSet<String> = BTreeSet::new();
    for v in q.vars() {
        if agg.output.contains(&v) || q.occurrences(&v) > 1 {
            live.insert(v);
        }
    }
    for atom in &q.atoms {
        if !atom.vars.iter().any(|v| live.contains(v)) {
            if let Some((_, s)) = p.subatoms_of(&atom.relation).next() {
                live.insert(s.vars[0].clone());
            }
        }
    }
    let dead = q.vars().into_iter().filter(|v| !live.contains(v)).collect();
    let plan = prune_plan(p, &live);
    debug_assert_eq!(validate_plan(&restrict(q, &live), &plan), Ok(()));
    let needs_offsets = needs_offsets(q, &plan);
    Liveness { live, dead, plan, needs_offsets }
}

/// Drops dead variables and emptied subatoms. A node whose driver disappears
/// hands its probes to the previous node, merging with any subatom of the
/// same atom already there.
pub fn prune_plan(p: &FreeJoinPlan, live: &BTreeSet<String>) -> FreeJoinPlan {
    let mut nodes: Vec<Vec<Subatom>> = Vec::new();
    for node in &p.nodes {
        let kept: Vec<Subatom> = node
            .iter()
            .map(|s| Subatom { relation: s.relation.clone(), vars: s.vars.iter().filter(|v| live.contains(*v)).cloned().collect() })
            .filter(|s| !s.vars.is_empty())
            .collect();
        if kept.is_empty() {
            continue;
        }
        let driver_kept = node[0].vars.iter().any(|v| live.contains(v));
        match nodes.last_mut() {
            Some(prev) if !driver_kept => {
                for s in kept {
                    match prev.iter_mut().find(|t| t.relation == s.relation) {
                        Some(t) => t.vars.extend(s.vars),
                        None => prev.push(s),
                    }
                }
            }
            _ => nodes.push(kept),
        }
    }
    FreeJoinPlan { nodes }
}

/// Whether each relation's trie must store offsets: it has a trie (more than
/// one subatom, or a single probe) and its last subatom is iterated.
pub fn needs_offsets(q: &ConjunctiveQuery, p: &FreeJoinPlan) -> BTreeMap<String, bool> {
    q.atoms
        .iter()
        .map(|a| {
            let positions: Vec<bool> = p
                .nodes
                .iter()
                .flat_map(|n| n.iter().enumerate().filter(|(_, s)| s.relation == a.relation).map(|(i, _)| i == 0))
                .collect();
            let has_trie = positions.len() > 1 || positions.first() == Some(&false);
            (a.relation.clone(), has_trie && positions.last() == Some(&true))
        })
        .collect()
}

fn restrict(q: &ConjunctiveQuery, live: &BTreeSet<String>) -> ConjunctiveQuery {
    let atoms = q
        .atoms
        .iter()
        .map(|a| Atom { relation: a.relation.clone(), vars: a.vars.iter().filter(|v| live.contains(*v)).cloned().collect() })
        .collect();
    ConjunctiveQuery {
        name: q.name.clone(),
        head: q.head.iter().filter(|v| live.contains(*v)).cloned().collect(),
        atoms,
    }
}
