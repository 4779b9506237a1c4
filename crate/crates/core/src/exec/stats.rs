use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::Serialize;

/// Execution counters. All but the two durations are deterministic for a
/// fixed plan, policy and input.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExecStats {
    /// Dictionary lookups, one per trie level probed.
    pub probes: u64,
    pub probe_hits: u64,
    /// Candidates produced by node drivers after the first node, plus rows
    /// materialized into intermediate relations.
    pub intermediate_tuples: u64,
    /// Satisfying assignments before aggregation.
    pub output_tuples: u64,
    /// Key comparisons made by sorted-level lookups.
    pub comparisons: u64,
    pub trie_build_insertions: u64,
    pub build_ms: f64,
    pub exec_ms: f64,
    /// Relations sorted to satisfy a sorted-dictionary policy.
    pub sort_operations: u64,
    /// The subset of `sort_operations` applied to intermediate results.
    pub intermediate_sorts: u64,
    pub min_operations: u64,
    pub tries_built: u64,
    pub max_trie_depth: u64,
    /// Tries over intermediate relations with more than one level.
    pub multi_level_intermediate_tries: u64,
}

impl ExecStats {
    /// Flat `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let j = serde_json::to_value(self).expect("stats serialize");
        for (k, v) in j.as_object().expect("object") {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("stats serialize")
    }

    /// The counters with durations zeroed, for determinism checks.
    pub fn counters(&self) -> ExecStats {
        ExecStats { build_ms: 0.0, exec_ms: 0.0, ..self.clone() }
    }
}

impl AddAssign<&ExecStats> for ExecStats {
    fn add_assign(&mut self, o: &ExecStats) {
        self.probes += o.probes;
        self.probe_hits += o.probe_hits;
        self.intermediate_tuples += o.intermediate_tuples;
        self.output_tuples += o.output_tuples;
        self.comparisons += o.comparisons;
        self.trie_build_insertions += o.trie_build_insertions;
        self.build_ms += o.build_ms;
        self.exec_ms += o.exec_ms;
        self.sort_operations += o.sort_operations;
        self.intermediate_sorts += o.intermediate_sorts;
        self.min_operations += o.min_operations;
        self.tries_built += o.tries_built;
        self.max_trie_depth = self.max_trie_depth.max(o.max_trie_depth);
        self.multi_level_intermediate_tries += o.multi_level_intermediate_tries;
    }
}
