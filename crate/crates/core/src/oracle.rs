//! Brute-force reference evaluation. Shares only the storage and query types
//! with the executor.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exec::{ResultBag, MIN_IDENTITY};
use crate::query::{AggKind, AggregationSpec, ConjunctiveQuery, QueryError};
use crate::storage::{Catalog, Relation, Value};

/// Default limit on rows examined.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("enumeration exceeded the budget of {0} steps")]
    BudgetExceeded(u64),
}

/// Enumerates one row per atom (atoms in query order, rows in offset order),
/// keeping every combination whose shared variables agree, then aggregates.
pub fn nested_loop(q: &ConjunctiveQuery, catalog: &Catalog, agg: &AggregationSpec) -> Result<ResultBag, OracleError> {
    nested_loop_with_budget(q, catalog, agg, DEFAULT_BUDGET)
}

pub fn nested_loop_with_budget(
    q: &ConjunctiveQuery,
    catalog: &Catalog,
    agg: &AggregationSpec,
    budget: u64,
) -> Result<ResultBag, OracleError> {
    let kinds = q.bind(catalog)?;
    agg.check(q, Some(&kinds))?;
    let rels: Vec<&Relation> = q.atoms.iter().map(|a| catalog.get(&a.relation).expect("bound").as_ref()).collect();
    let mut e = Enum { q, rels: &rels, assignment: BTreeMap::new(), found: Vec::new(), steps: 0, budget };
    e.go(0)?;

    let pick = |a: &BTreeMap<String, Value>| -> Vec<Value> { agg.output.iter().map(|v| a[v].clone()).collect() };
    Ok(match agg.kind {
        AggKind::FullTuples => {
            let mut bag = BTreeMap::new();
            for a in &e.found {
                *bag.entry(pick(a)).or_insert(0u64) += 1;
            }
            ResultBag::Tuples { vars: agg.output.clone(), bag }
        }
        AggKind::Count => ResultBag::Count(e.found.len() as u64),
        AggKind::Min if e.found.is_empty() => ResultBag::empty_min(agg.output.clone()),
        AggKind::Min => {
            let mut values = vec![MIN_IDENTITY; agg.output.len()];
            for a in &e.found {
                for (m, v) in values.iter_mut().zip(pick(a)) {
                    *m = (*m).min(v.as_int().expect("checked integer"));
                }
            }
            ResultBag::Min { vars: agg.output.clone(), values, empty: false }
        }
    })
}

struct Enum<'a> {
    q: &'a ConjunctiveQuery,
    rels: &'a [&'a Relation],
    assignment: BTreeMap<String, Value>,
    found: Vec<BTreeMap<String, Value>>,
    steps: u64,
    budget: u64,
}

impl Enum<'_> {
    fn go(&mut self, i: usize) -> Result<(), OracleError> {
        if i == self.q.atoms.len() {
            self.found.push(self.assignment.clone());
            return Ok(());
        }
        let atom = &self.q.atoms[i];
        let rel = self.rels[i];
        for row in 0..rel.len() {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(OracleError::BudgetExceeded(self.budget));
            }
            let mut fresh = Vec::new();
            let mut ok = true;
            for (col, var) in atom.vars.iter().enumerate() {
                let v = rel.value(row, col);
                match self.assignment.get(var) {
                    Some(b) if *b != v => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        self.assignment.insert(var.clone(), v);
                        fresh.push(var);
                    }
                }
            }
            if ok {
                self.go(i + 1)?;
            }
            for var in fresh {
                self.assignment.remove(var);
            }
        }
        Ok(())
    }
}
