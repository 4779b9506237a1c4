use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use rustc_hash::FxHashMap;

use super::aggregate::{factorized_combine, Partial};
use super::{ExecError, ExecStats, Opts, ResultBag, StructurePolicy, MIN_IDENTITY};
use crate::query::{liveness, needs_offsets, validate_plan, AggKind, AggregationSpec, ConjunctiveQuery, FreeJoinPlan};
use crate::storage::{Catalog, Relation, Value};
use crate::trie::{build_trie, NodeRef, Trie};

/// Executes a Free Join plan: builds one trie per relation that is probed or
/// revisited, then evaluates the nodes as nested loops. Each node iterates
/// its first subatom and probes the others; a relation's last subatom, when
/// probed, multiplies the assignment by its leaf multiplicity.
pub fn execute(
    q: &ConjunctiveQuery,
    plan: &FreeJoinPlan,
    catalog: &Catalog,
    agg: &AggregationSpec,
    policy: &StructurePolicy,
    opts: &Opts,
) -> Result<(ResultBag, ExecStats), ExecError> {
    validate_plan(q, plan)?;
    let kinds = q.bind(catalog)?;
    agg.check(q, Some(&kinds))?;
    let mut stats = ExecStats::default();
    let rels: Vec<Arc<Relation>> =
        q.atoms.iter().map(|a| catalog.get(&a.relation).expect("bound above").clone()).collect();
    if rels.iter().any(|r| r.is_empty()) {
        return Ok((empty_result(agg), stats));
    }

    let build = Instant::now();
    let (plan, offsets) = if opts.o3 {
        let l = liveness(q, plan, agg);
        (l.plan, l.needs_offsets)
    } else {
        (plan.clone(), needs_offsets(q, plan))
    };
    let compiled = Compiled::new(q, &plan, rels, &offsets, agg, policy, opts, &mut stats)?;
    stats.build_ms = build.elapsed().as_secs_f64() * 1e3;

    let run = Instant::now();
    let result = compiled.run(agg, opts, &mut stats);
    stats.exec_ms = run.elapsed().as_secs_f64() * 1e3;
    Ok((result, stats))
}

pub(crate) fn empty_result(agg: &AggregationSpec) -> ResultBag {
    match agg.kind {
        AggKind::FullTuples => ResultBag::Tuples { vars: agg.output.clone(), bag: Default::default() },
        AggKind::Count => ResultBag::Count(0),
        AggKind::Min => ResultBag::empty_min(agg.output.clone()),
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Trie(NodeRef),
    Row,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// Sole subatom of its relation: scan every row.
    Scan,
    /// Walk trie levels, one per variable.
    Levels,
    /// Last subatom of a relation with a trie: iterate the leaf's rows.
    Leaf,
}

#[derive(Debug)]
struct VarRef {
    id: usize,
    col: usize,
    bound: bool,
}

#[derive(Debug)]
struct Driver {
    atom: usize,
    slot: usize,
    prev: Option<usize>,
    mode: Mode,
    vars: Vec<VarRef>,
}

#[derive(Debug)]
struct Probe {
    atom: usize,
    slot: usize,
    prev: Option<usize>,
    keys: Vec<usize>,
    last: bool,
}

#[derive(Debug)]
struct Node {
    driver: Driver,
    probes: Vec<Probe>,
    /// Aggregate columns first bound here: (aggregate position, variable).
    agg_binds: Vec<(usize, usize)>,
}

struct Access {
    rel: Arc<Relation>,
    trie: Option<Trie>,
}

/// Nodes split into independent branches for factorized aggregation. After a
/// match at `node`, each chain in `rest` can be evaluated on its own.
#[derive(Debug)]
struct Chain {
    node: usize,
    rest: Vec<Chain>,
}

struct Compiled {
    atoms: Vec<Access>,
    nodes: Vec<Node>,
    nvars: usize,
    nslots: usize,
    out: Vec<usize>,
    chains: Vec<Chain>,
}

enum Acc {
    Tuples(FxHashMap<Vec<Value>, u64>),
    Count(u64),
    Min(Vec<i64>),
}

struct State {
    bind: Vec<Value>,
    slots: Vec<Slot>,
    stats: ExecStats,
    acc: Acc,
}

enum Sink<'a> {
    Emit,
    Chain(&'a Chain, &'a mut Partial),
}

impl Compiled {
    #[allow(clippy::too_many_arguments)]
    fn new(
        q: &ConjunctiveQuery,
        plan: &FreeJoinPlan,
        rels: Vec<Arc<Relation>>,
        offsets: &std::collections::BTreeMap<String, bool>,
        agg: &AggregationSpec,
        policy: &StructurePolicy,
        opts: &Opts,
        stats: &mut ExecStats,
    ) -> Result<Compiled, ExecError> {
        let vars = q.vars();
        let var_id: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();

        // Subatom slots, numbered in plan order; per atom, (node, is driver, slot).
        let mut per_atom: Vec<Vec<(usize, bool, usize)>> = vec![Vec::new(); q.atoms.len()];
        let mut slot_of: Vec<Vec<usize>> = Vec::new();
        let mut nslots = 0;
        for (k, node) in plan.nodes.iter().enumerate() {
            let mut row = Vec::new();
            for (i, s) in node.iter().enumerate() {
                let a = q.atom_index(&s.relation).expect("validated");
                per_atom[a].push((k, i == 0, nslots));
                row.push(nslots);
                nslots += 1;
            }
            slot_of.push(row);
        }

        let mut atoms = Vec::with_capacity(rels.len());
        for (a, rel) in rels.into_iter().enumerate() {
            let subs = &per_atom[a];
            let atom = &q.atoms[a];
            let last_is_driver = subs.last().is_some_and(|s| s.1);
            let level_subs = if last_is_driver { subs.len() - 1 } else { subs.len() };
            let mut levels = Vec::new();
            for &(k, _, slot) in &subs[..level_subs] {
                let pos = slot_of[k].iter().position(|&s| s == slot).expect("slot");
                for v in &plan.nodes[k][pos].vars {
                    let col = atom.vars.iter().position(|x| x == v).expect("validated");
                    levels.push(rel.attrs()[col].clone());
                }
            }
            if levels.is_empty() {
                atoms.push(Access { rel, trie: None });
                continue;
            }
            let choice = policy.choose(&rel, &levels, offsets[&atom.relation], opts)?;
            let rel = if choice.sort {
                stats.sort_operations += 1;
                if rel.is_intermediate() {
                    stats.intermediate_sorts += 1;
                }
                Arc::new(rel.sorted_copy(&levels)?)
            } else {
                rel
            };
            let trie = build_trie(&rel, &levels, choice.dict, choice.leaf)?;
            stats.trie_build_insertions += trie.insertions();
            stats.tries_built += 1;
            stats.max_trie_depth = stats.max_trie_depth.max(trie.depth() as u64);
            if rel.is_intermediate() && trie.depth() > 1 {
                stats.multi_level_intermediate_tries += 1;
            }
            atoms.push(Access { rel, trie: Some(trie) });
        }

        let agg_pos: HashMap<usize, usize> = if agg.kind == AggKind::Min {
            agg.output.iter().enumerate().map(|(i, v)| (var_id[v.as_str()], i)).collect()
        } else {
            HashMap::new()
        };
        let mut bound = vec![false; vars.len()];
        let mut first_bind = vec![usize::MAX; vars.len()];
        let mut nodes = Vec::with_capacity(plan.nodes.len());
        for (k, node) in plan.nodes.iter().enumerate() {
            let mut subs = node.iter().enumerate().map(|(i, s)| {
                let a = q.atom_index(&s.relation).expect("validated");
                let slot = slot_of[k][i];
                let idx = per_atom[a].iter().position(|p| p.2 == slot).expect("slot");
                let prev = idx.checked_sub(1).map(|j| per_atom[a][j].2);
                let last = idx + 1 == per_atom[a].len();
                (a, slot, prev, last, s)
            });
            let (a, slot, prev, last, s) = subs.next().expect("non-empty node");
            let mode = match (&atoms[a].trie, last) {
                (None, _) => Mode::Scan,
                (Some(_), true) => Mode::Leaf,
                (Some(_), false) => Mode::Levels,
            };
            let dvars: Vec<VarRef> = s
                .vars
                .iter()
                .map(|v| {
                    let id = var_id[v.as_str()];
                    let col = q.atoms[a].vars.iter().position(|x| x == v).expect("validated");
                    VarRef { id, col, bound: bound[id] }
                })
                .collect();
            let probes = subs
                .map(|(b, slot, prev, last, s)| Probe {
                    atom: b,
                    slot,
                    prev,
                    keys: s.vars.iter().map(|v| var_id[v.as_str()]).collect(),
                    last,
                })
                .collect();
            let mut agg_binds = Vec::new();
            for vr in &dvars {
                if !vr.bound {
                    bound[vr.id] = true;
                    first_bind[vr.id] = k;
                    if let Some(&p) = agg_pos.get(&vr.id) {
                        agg_binds.push((p, vr.id));
                    }
                }
            }
            nodes.push(Node { driver: Driver { atom: a, slot, prev, mode, vars: dvars }, probes, agg_binds });
        }

        let out = match agg.kind {
            AggKind::Count => Vec::new(),
            _ => agg.output.iter().map(|v| var_id[v.as_str()]).collect(),
        };
        let chains = if opts.o5 && agg.kind != AggKind::FullTuples {
            let deps = dependencies(plan, q, &first_bind, &var_id);
            split(&(0..plan.nodes.len()).collect::<Vec<_>>(), &deps)
        } else {
            Vec::new()
        };
        Ok(Compiled { atoms, nodes, nvars: vars.len(), nslots, out, chains })
    }

    fn run(&self, agg: &AggregationSpec, opts: &Opts, stats: &mut ExecStats) -> ResultBag {
        let acc = match agg.kind {
            AggKind::FullTuples => Acc::Tuples(FxHashMap::default()),
            AggKind::Count => Acc::Count(0),
            AggKind::Min => Acc::Min(vec![MIN_IDENTITY; agg.output.len()]),
        };
        let mut st = State {
            bind: vec![Value::Int(0); self.nvars],
            slots: vec![Slot::Trie(NodeRef::Inner(0)); self.nslots],
            stats: std::mem::take(stats),
            acc,
        };
        let result = if opts.o5 && agg.kind != AggKind::FullTuples {
            let cols = agg.output.len();
            let parts: Vec<Partial> = self
                .chains
                .iter()
                .map(|c| {
                    let mut p = Partial::new(cols);
                    self.node(&mut st, c.node, 1, &mut Sink::Chain(c, &mut p));
                    p
                })
                .collect();
            let total = factorized_combine(&parts);
            st.stats.output_tuples = total.count;
            match agg.kind {
                AggKind::Count => ResultBag::Count(total.count),
                _ if total.count == 0 => ResultBag::empty_min(agg.output.clone()),
                _ => ResultBag::Min {
                    vars: agg.output.clone(),
                    values: total.mins.iter().map(|m| m.unwrap_or(MIN_IDENTITY)).collect(),
                    empty: false,
                },
            }
        } else {
            self.node(&mut st, 0, 1, &mut Sink::Emit);
            match std::mem::replace(&mut st.acc, Acc::Count(0)) {
                Acc::Tuples(m) => ResultBag::Tuples { vars: agg.output.clone(), bag: m.into_iter().collect() },
                Acc::Count(c) => ResultBag::Count(c),
                Acc::Min(_) if st.stats.output_tuples == 0 => ResultBag::empty_min(agg.output.clone()),
                Acc::Min(values) => ResultBag::Min { vars: agg.output.clone(), values, empty: false },
            }
        };
        *stats = st.stats;
        result
    }

    fn node(&self, st: &mut State, k: usize, w: u64, sink: &mut Sink<'_>) {
        let d = &self.nodes[k].driver;
        let access = &self.atoms[d.atom];
        match d.mode {
            Mode::Scan => {
                for row in 0..access.rel.len() {
                    self.row_candidate(st, k, row as u32, w, sink);
                }
            }
            Mode::Leaf => {
                let Some(Slot::Trie(NodeRef::Leaf(l))) = d.prev.map(|p| st.slots[p]) else {
                    unreachable!("leaf driver without a leaf")
                };
                let trie = access.trie.as_ref().expect("leaf driver has a trie");
                for row in trie.offsets(l).expect("offsets kept for iterated leaves") {
                    self.row_candidate(st, k, row, w, sink);
                }
            }
            Mode::Levels => {
                let start = match d.prev.map(|p| st.slots[p]) {
                    None => 0,
                    Some(Slot::Trie(NodeRef::Inner(n))) => n,
                    other => unreachable!("level driver at {other:?}"),
                };
                self.levels(st, k, 0, start, w, sink);
            }
        }
    }

    #[inline]
    fn row_candidate(&self, st: &mut State, k: usize, row: u32, w: u64, sink: &mut Sink<'_>) {
        let d = &self.nodes[k].driver;
        let rel = &self.atoms[d.atom].rel;
        for v in &d.vars {
            let val = rel.column(v.col).get(row as usize);
            if v.bound {
                if val != st.bind[v.id] {
                    return;
                }
            } else {
                st.bind[v.id] = val;
            }
        }
        st.slots[d.slot] = Slot::Row;
        self.candidate(st, k, w, sink);
    }

    fn levels(&self, st: &mut State, k: usize, j: usize, node: u32, w: u64, sink: &mut Sink<'_>) {
        let d = &self.nodes[k].driver;
        let trie = self.atoms[d.atom].trie.as_ref().expect("level driver has a trie");
        let v = &d.vars[j];
        if v.bound {
            st.stats.probes += 1;
            if let Some(child) = trie.get(node, &st.bind[v.id], &mut st.stats.comparisons) {
                st.stats.probe_hits += 1;
                self.level_child(st, k, j, child, w, sink);
            }
        } else {
            for (key, child) in trie.entries(node) {
                st.bind[v.id] = key.clone();
                self.level_child(st, k, j, child, w, sink);
            }
        }
    }

    #[inline]
    fn level_child(&self, st: &mut State, k: usize, j: usize, child: NodeRef, w: u64, sink: &mut Sink<'_>) {
        let d = &self.nodes[k].driver;
        if j + 1 < d.vars.len() {
            let NodeRef::Inner(n) = child else { unreachable!("trie shallower than its subatoms") };
            self.levels(st, k, j + 1, n, w, sink);
        } else {
            st.slots[d.slot] = Slot::Trie(child);
            self.candidate(st, k, w, sink);
        }
    }

    // A complete driver binding: probe the rest of the node.
    fn candidate(&self, st: &mut State, k: usize, mut w: u64, sink: &mut Sink<'_>) {
        if k > 0 {
            st.stats.intermediate_tuples += 1;
        }
        for p in &self.nodes[k].probes {
            let trie = self.atoms[p.atom].trie.as_ref().expect("probed relations have tries");
            let mut cur = match p.prev.map(|s| st.slots[s]) {
                None => NodeRef::Inner(0),
                Some(Slot::Trie(r)) => r,
                Some(Slot::Row) => unreachable!("probe after a row"),
            };
            for &key in &p.keys {
                let NodeRef::Inner(n) = cur else { unreachable!("probe past a leaf") };
                st.stats.probes += 1;
                match trie.get(n, &st.bind[key], &mut st.stats.comparisons) {
                    Some(c) => {
                        st.stats.probe_hits += 1;
                        cur = c;
                    }
                    None => return,
                }
            }
            st.slots[p.slot] = Slot::Trie(cur);
            if p.last {
                let NodeRef::Leaf(l) = cur else { unreachable!("last probe ends at a leaf") };
                w *= trie.multiplicity(l);
            }
        }
        self.matched(st, k, w, sink);
    }

    fn matched(&self, st: &mut State, k: usize, w: u64, sink: &mut Sink<'_>) {
        match sink {
            Sink::Emit if k + 1 < self.nodes.len() => self.node(st, k + 1, w, &mut Sink::Emit),
            Sink::Emit => self.emit(st, w),
            Sink::Chain(chain, partial) => {
                let cols = partial.mins.len();
                let mut subs = Vec::with_capacity(chain.rest.len());
                for r in &chain.rest {
                    let mut p = Partial::new(cols);
                    self.node(st, r.node, 1, &mut Sink::Chain(r, &mut p));
                    if p.count == 0 {
                        return;
                    }
                    subs.push(p);
                }
                partial.count += w * subs.iter().map(|p| p.count).product::<u64>();
                for &(col, var) in &self.nodes[k].agg_binds {
                    st.stats.min_operations += 1;
                    partial.min_with(col, st.bind[var].as_int().expect("min over integers"));
                }
                for p in subs {
                    for (col, m) in p.mins.into_iter().enumerate() {
                        if let Some(v) = m {
                            st.stats.min_operations += 1;
                            partial.min_with(col, v);
                        }
                    }
                }
            }
        }
    }

    fn emit(&self, st: &mut State, w: u64) {
        st.stats.output_tuples += w;
        match &mut st.acc {
            Acc::Tuples(m) => {
                let t: Vec<Value> = self.out.iter().map(|&v| st.bind[v].clone()).collect();
                *m.entry(t).or_insert(0) += w;
            }
            Acc::Count(c) => *c += w,
            Acc::Min(vals) => {
                for (i, &v) in self.out.iter().enumerate() {
                    st.stats.min_operations += 1;
                    vals[i] = vals[i].min(st.bind[v].as_int().expect("min over integers"));
                }
            }
        }
    }
}

// deps[j] lists the earlier nodes node j relies on: nodes sharing a relation
// with it, or binding a variable it reads.
fn dependencies(
    plan: &FreeJoinPlan,
    q: &ConjunctiveQuery,
    first_bind: &[usize],
    var_id: &HashMap<&str, usize>,
) -> Vec<Vec<usize>> {
    let mut deps = vec![Vec::new(); plan.nodes.len()];
    for (j, dj) in deps.iter_mut().enumerate() {
        for i in 0..j {
            let shares_atom = plan.nodes[j].iter().any(|s| plan.nodes[i].iter().any(|t| t.relation == s.relation));
            let reads = plan.nodes[j]
                .iter()
                .flat_map(|s| s.vars.iter())
                .any(|v| first_bind[var_id[v.as_str()]] == i);
            if shares_atom || reads {
                dj.push(i);
            }
        }
    }
    debug_assert!(plan.nodes.iter().flatten().all(|s| q.atom(&s.relation).is_some()));
    deps
}

// Splits `set` (ascending node indices) into independent groups; each group
// becomes a chain headed by its first node.
fn split(set: &[usize], deps: &[Vec<usize>]) -> Vec<Chain> {
    let mut group: Vec<usize> = (0..set.len()).collect();
    fn find(g: &mut [usize], x: usize) -> usize {
        if g[x] != x {
            let r = find(g, g[x]);
            g[x] = r;
        }
        g[x]
    }
    for (jj, &j) in set.iter().enumerate() {
        for (ii, &i) in set[..jj].iter().enumerate() {
            if deps[j].contains(&i) {
                let (a, b) = (find(&mut group, ii), find(&mut group, jj));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
    for (ii, &i) in set.iter().enumerate() {
        let r = find(&mut group, ii);
        match out.iter_mut().find(|(g, _)| *g == r) {
            Some((_, members)) => members.push(i),
            None => out.push((r, vec![i])),
        }
    }
    out.into_iter().map(|(_, m)| Chain { node: m[0], rest: split(&m[1..], deps) }).collect()
}
