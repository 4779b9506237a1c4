use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;
use unijoin::exec::{run, ExecStats, Opts, PlanKind, Strategy, StructurePolicy};
use unijoin::oracle::nested_loop;

use crate::input::load;
use crate::{Common, Verdict};

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated plan kinds.
    #[arg(long, default_value = "binary,gj,fj")]
    pub plans: String,
    /// Comma-separated dictionary policies.
    #[arg(long, default_value = "hash")]
    pub dicts: String,
    /// Optimization sets; repeat the flag for several cells, e.g. `--opts all --opts none`.
    #[arg(long, default_values = ["all"])]
    pub opts: Vec<Opts>,
    /// Runs per cell.
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    /// Write the JSON report to this file, or `-` to print it instead of the table.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn list<T: std::str::FromStr<Err = String>>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(anyhow::Error::msg))
        .collect()
}

struct Cell {
    strategy: Strategy,
    build_ms: f64,
    exec_ms: f64,
    counters: ExecStats,
    check: Option<bool>,
}

pub fn bench(args: &BenchArgs) -> Result<Verdict> {
    if args.repeat == 0 {
        bail!("--repeat must be positive");
    }
    let plans: Vec<PlanKind> = list(&args.plans).context("--plans")?;
    let dicts: Vec<StructurePolicy> = list(&args.dicts).context("--dicts")?;
    let mut matrix = Vec::new();
    for &plan in &plans {
        for d in &dicts {
            for &opts in &args.opts {
                let policy = StructurePolicy { leaf: args.common.leaf, ..d.clone() };
                matrix.push(Strategy { plan, policy, opts });
            }
        }
    }
    if matrix.is_empty() {
        bail!("nothing to benchmark: the strategy matrix is empty");
    }

    let input = load(&args.common)?;
    let (q, agg) = (&input.query.query, &input.query.agg);
    let oracle = if args.common.check { Some(nested_loop(q, &input.catalog, agg)?) } else { None };
    let mut cells = Vec::new();
    for strategy in matrix {
        let (mut build, mut exec) = (0.0, 0.0);
        let mut last = None;
        for _ in 0..args.repeat {
            let (bag, stats) = run(q, agg, &input.catalog, input.tree.as_ref(), &strategy)
                .with_context(|| format!("strategy {strategy}"))?;
            build += stats.build_ms;
            exec += stats.exec_ms;
            last = Some((bag, stats));
        }
        let (bag, stats) = last.expect("repeat is positive");
        let n = args.repeat as f64;
        cells.push(Cell {
            build_ms: build / n,
            exec_ms: exec / n,
            counters: stats.counters(),
            check: oracle.as_ref().map(|o| bag.first_difference(o).is_none()),
            strategy,
        });
    }

    let report = json!({
        "query": q.to_string(),
        "aggregation": agg.to_string(),
        "repeat": args.repeat,
        "cells": cells.iter().map(|c| {
            let mut counters = c.counters.to_json();
            if let Some(m) = counters.as_object_mut() {
                m.remove("build_ms");
                m.remove("exec_ms");
            }
            json!({
                "strategy": c.strategy.to_string(),
                "plan": c.strategy.plan.to_string(),
                "dicts": c.strategy.policy.name(),
                "leaf": c.strategy.policy.leaf.to_string(),
                "opts": c.strategy.opts.to_string(),
                "mean_build_ms": c.build_ms,
                "mean_exec_ms": c.exec_ms,
                "counters": counters,
                "check": c.check.map(|ok| if ok { "PASS" } else { "FAIL" }),
            })
        }).collect::<Vec<_>>(),
    });
    match args.json.as_deref() {
        Some(p) if p.as_os_str() == "-" => println!("{}", serde_json::to_string_pretty(&report)?),
        other => {
            print_table(&cells, args.repeat);
            if let Some(p) = other {
                std::fs::write(p, serde_json::to_string_pretty(&report)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
    }
    Ok(if cells.iter().any(|c| c.check == Some(false)) { Verdict::CheckFailed } else { Verdict::Ok })
}

fn print_table(cells: &[Cell], repeat: usize) {
    println!("mean of {repeat} runs");
    println!(
        "{:<28} {:>10} {:>10} {:>10} {:>12} {:>10} {:>10} {:>8}",
        "strategy", "build_ms", "exec_ms", "probes", "intermediate", "output", "min_ops", "check"
    );
    for c in cells {
        let s = &c.counters;
        let check = match c.check {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "-",
        };
        println!(
            "{:<28} {:>10.3} {:>10.3} {:>10} {:>12} {:>10} {:>10} {:>8}",
            c.strategy.to_string(),
            c.build_ms,
            c.exec_ms,
            s.probes,
            s.intermediate_tuples,
            s.output_tuples,
            s.min_operations,
            check
        );
    }
}
