use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::{json, Value as Json};
use unijoin::exec::{execute, run as run_strategy, ExecStats, Opts, PlanKind, ResultBag, Strategy, StructurePolicy};
use unijoin::oracle::nested_loop;
use unijoin::query::{decompose_bushy, validate_plan, FreeJoinPlan, LeftDeepPlan};

use crate::input::{load, Input};
use crate::{Common, Verdict};

#[derive(Clone, Debug)]
pub enum PlanArg {
    Kind(PlanKind),
    File(PathBuf),
}

impl FromStr for PlanArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("file:") {
            Some(p) => Ok(PlanArg::File(p.into())),
            None => s.parse().map(PlanArg::Kind),
        }
    }
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// binary, gj, fj, or file:PATH for a hand-written plan.
    #[arg(long, default_value = "fj")]
    pub plan: PlanArg,
    /// Dictionary policy: hash, sorted or hybrid.
    #[arg(long, default_value = "hash")]
    pub dicts: StructurePolicy,
    /// Enabled optimizations, e.g. `O1,O3`, `O1..O5`, `all` or `none`.
    #[arg(long, default_value = "all")]
    pub opts: Opts,
    /// Print execution counters and timings.
    #[arg(long)]
    pub stats: bool,
    /// Print one JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Number of result tuples to list.
    #[arg(long, default_value_t = 10)]
    pub limit: usize,
}

/// The executed plans: one per pipeline, intermediates named `I1`, `I2`, ...
fn describe_plans(input: &Input, strategy: &Strategy, plan: &PlanArg) -> Result<Vec<(String, FreeJoinPlan)>> {
    let q = &input.query.query;
    if let PlanArg::File(p) = plan {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let fp = FreeJoinPlan::parse(&text).with_context(|| format!("{}", p.display()))?;
        return Ok(vec![(q.name.clone(), fp)]);
    }
    match &input.tree {
        Some(t) if !t.is_left_deep() => decompose_bushy(q, t, &input.query.agg.output)?
            .into_iter()
            .map(|s| Ok((s.output.clone(), strategy.plan.plan(&s.query, &s.plan)?)))
            .collect(),
        _ => {
            let ld = match &input.tree {
                Some(t) => LeftDeepPlan::new(t.leaves().into_iter().map(String::from)),
                None => LeftDeepPlan::from_query(q),
            };
            Ok(vec![(q.name.clone(), strategy.plan.plan(q, &ld)?)])
        }
    }
}

pub fn run(args: &RunArgs) -> Result<Verdict> {
    let input = load(&args.common)?;
    let q = &input.query.query;
    let agg = &input.query.agg;
    let policy = StructurePolicy { leaf: args.common.leaf, ..args.dicts.clone() };
    let kind = match &args.plan {
        PlanArg::Kind(k) => *k,
        PlanArg::File(_) => PlanKind::FreeJoin,
    };
    let strategy = Strategy { plan: kind, policy, opts: args.opts };
    let plans = describe_plans(&input, &strategy, &args.plan)?;

    let (bag, stats) = match &args.plan {
        PlanArg::File(_) => {
            if input.tree.as_ref().is_some_and(|t| !t.is_left_deep()) {
                bail!("a plan file describes one pipeline and cannot be combined with a bushy tree");
            }
            let plan = &plans[0].1;
            validate_plan(q, plan)?;
            execute(q, plan, &input.catalog, agg, &strategy.policy, &strategy.opts)?
        }
        PlanArg::Kind(_) => run_strategy(q, agg, &input.catalog, input.tree.as_ref(), &strategy)?,
    };

    let check = if args.common.check {
        let oracle = nested_loop(q, &input.catalog, agg)?;
        Some(bag.first_difference(&oracle))
    } else {
        None
    };

    let label = match &args.plan {
        PlanArg::File(p) => format!("file:{}/{}/{}", p.display(), strategy.policy.name(), strategy.opts),
        PlanArg::Kind(_) => strategy.to_string(),
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report_json(&input, &label, &plans, &bag, &stats, &check, args.limit))?);
    } else {
        print_report(&input, &label, &plans, &bag, &stats, &check, args);
    }
    Ok(match check {
        Some(Some(_)) => Verdict::CheckFailed,
        _ => Verdict::Ok,
    })
}

fn print_report(
    input: &Input,
    label: &str,
    plans: &[(String, FreeJoinPlan)],
    bag: &ResultBag,
    stats: &ExecStats,
    check: &Option<Option<String>>,
    args: &RunArgs,
) {
    println!("query    {}", input.query.query);
    println!("output   {}", input.query.agg);
    println!("strategy {label}");
    for (name, p) in plans {
        println!("plan     {name} = {p}");
    }
    print!("{}", bag.summary(args.limit));
    if args.stats {
        println!("-- stats");
        print!("{}", stats.to_kv());
    }
    match check {
        Some(None) => println!("check PASS"),
        Some(Some(d)) => println!("check FAIL: {d}"),
        None => {}
    }
}

fn report_json(
    input: &Input,
    label: &str,
    plans: &[(String, FreeJoinPlan)],
    bag: &ResultBag,
    stats: &ExecStats,
    check: &Option<Option<String>>,
    limit: usize,
) -> Json {
    let (verdict, diff) = match check {
        None => (Json::Null, Json::Null),
        Some(None) => (json!("PASS"), Json::Null),
        Some(Some(d)) => (json!("FAIL"), json!(d)),
    };
    json!({
        "query": input.query.query.to_string(),
        "aggregation": input.query.agg.to_string(),
        "strategy": label,
        "plans": plans.iter().map(|(n, p)| json!({"output": n, "plan": p.to_string()})).collect::<Vec<_>>(),
        "result": bag.to_json(limit),
        "stats": stats.to_json(),
        "check": verdict,
        "difference": diff,
    })
}
