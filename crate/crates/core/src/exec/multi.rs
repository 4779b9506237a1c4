use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::engine::execute;
use super::{ExecError, ExecStats, Opts, ResultBag, StructurePolicy};
use crate::query::{
    convert_left_deep, decompose_bushy, optimize_plan, AggregationSpec, BushyPlan, ConjunctiveQuery, FreeJoinPlan,
    LeftDeepPlan, PlanMode, PlanStage,
};
use crate::storage::{Catalog, Kind, Relation};

/// How a left-deep binary plan is turned into the executed Free Join plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlanKind {
    /// The straightforward conversion, unoptimized.
    Binary,
    GenericJoin,
    FreeJoin,
}

impl PlanKind {
    pub const ALL: [PlanKind; 3] = [PlanKind::Binary, PlanKind::GenericJoin, PlanKind::FreeJoin];

    pub fn plan(self, q: &ConjunctiveQuery, ld: &LeftDeepPlan) -> Result<FreeJoinPlan, ExecError> {
        let binary = convert_left_deep(q, ld)?;
        Ok(match self {
            PlanKind::Binary => binary,
            PlanKind::GenericJoin => optimize_plan(q, &binary, PlanMode::GenericJoin)?,
            PlanKind::FreeJoin => optimize_plan(q, &binary, PlanMode::FreeJoin)?,
        })
    }
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanKind::Binary => "binary",
            PlanKind::GenericJoin => "gj",
            PlanKind::FreeJoin => "fj",
        })
    }
}

impl FromStr for PlanKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(PlanKind::Binary),
            "gj" | "generic-join" => Ok(PlanKind::GenericJoin),
            "fj" | "freejoin" | "free-join" => Ok(PlanKind::FreeJoin),
            _ => Err(format!("unknown plan kind {s:?} (binary, gj, fj)")),
        }
    }
}

/// One cell of the strategy matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub plan: PlanKind,
    pub policy: StructurePolicy,
    pub opts: Opts,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.plan, self.policy.name(), self.opts)?;
        if self.policy.leaf != Default::default() {
            write!(f, "/{}", self.policy.leaf)?;
        }
        Ok(())
    }
}

/// Runs the stages of a decomposed bushy plan in order, materializing each
/// intermediate (unsorted, rows repeated by multiplicity) before the next.
pub fn execute_multi(
    q: &ConjunctiveQuery,
    stages: &[PlanStage],
    catalog: &Catalog,
    agg: &AggregationSpec,
    strategy: &Strategy,
) -> Result<(ResultBag, ExecStats), ExecError> {
    let kinds = q.bind(catalog)?;
    let mut cat = catalog.clone();
    let mut total = ExecStats::default();
    let (last, inner) = stages.split_last().ok_or_else(|| ExecError::Policy("no stages to execute".into()))?;
    for stage in inner {
        let plan = strategy.plan.plan(&stage.query, &stage.plan)?;
        let full = AggregationSpec::full(&stage.query.head);
        let (bag, stats) = execute(&stage.query, &plan, &cat, &full, &strategy.policy, &strategy.opts)?;
        total += &stats;
        let rel = materialize(&stage.output, &stage.query.head, &kinds, &bag)?;
        total.intermediate_tuples += rel.len() as u64;
        cat.insert(rel);
    }
    let plan = strategy.plan.plan(&last.query, &last.plan)?;
    let (bag, stats) = execute(&last.query, &plan, &cat, agg, &strategy.policy, &strategy.opts)?;
    total += &stats;
    Ok((bag, total))
}

fn materialize(
    name: &str,
    head: &[String],
    kinds: &BTreeMap<String, Kind>,
    bag: &ResultBag,
) -> Result<Relation, ExecError> {
    let ResultBag::Tuples { bag, .. } = bag else { unreachable!("intermediates are full results") };
    let schema: Vec<(&str, Kind)> = head.iter().map(|v| (v.as_str(), kinds[v])).collect();
    let rows = bag.iter().flat_map(|(t, &m)| std::iter::repeat_n(t.clone(), m as usize));
    Ok(Relation::from_rows(name, &schema, rows)?.into_intermediate())
}

/// Plans and executes `q`. A bushy tree is decomposed into pipelines; without
/// one the atoms are joined left-deep in query order.
pub fn run(
    q: &ConjunctiveQuery,
    agg: &AggregationSpec,
    catalog: &Catalog,
    tree: Option<&BushyPlan>,
    strategy: &Strategy,
) -> Result<(ResultBag, ExecStats), ExecError> {
    match tree {
        Some(t) if !t.is_left_deep() => {
            let stages = decompose_bushy(q, t, &agg.output)?;
            execute_multi(q, &stages, catalog, agg, strategy)
        }
        _ => {
            let ld = match tree {
                Some(t) => LeftDeepPlan::new(t.leaves().into_iter().map(String::from)),
                None => LeftDeepPlan::from_query(q),
            };
            let plan = strategy.plan.plan(q, &ld)?;
            execute(q, &plan, catalog, agg, &strategy.policy, &strategy.opts)
        }
    }
}
