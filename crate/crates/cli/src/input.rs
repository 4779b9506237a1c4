use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use unijoin::query::{parse_query, AggregationSpec, BushyPlan, ParsedQuery};
use unijoin::storage::Catalog;

use crate::Common;

pub struct Input {
    pub query: ParsedQuery,
    pub tree: Option<BushyPlan>,
    pub catalog: Catalog,
}

/// A query file holds one conjunctive query, possibly over several lines, and
/// at most one `tree <join tree>` line. `#` starts a comment.
pub fn read_query_file(path: &Path) -> Result<(ParsedQuery, Option<BushyPlan>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut query = String::new();
    let mut tree = None;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if let Some(t) = line.strip_prefix("tree ") {
            if tree.is_some() {
                bail!("{}: more than one tree line", path.display());
            }
            tree = Some(BushyPlan::parse(t).with_context(|| format!("{}: tree", path.display()))?);
        } else if !line.is_empty() {
            query.push_str(line);
            query.push(' ');
        }
    }
    let q = parse_query(&query).with_context(|| format!("{}: query", path.display()))?;
    Ok((q, tree))
}

pub fn parse_agg(text: &str, head: &[String]) -> Result<AggregationSpec> {
    Ok(match text {
        "full" => AggregationSpec::full(head),
        "count" => AggregationSpec::count(),
        _ => {
            let Some(vars) = text.strip_prefix("min:") else {
                bail!("unknown aggregation {text:?} (full, count, min:v1,v2)");
            };
            let vars: Vec<&str> = vars.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            if vars.is_empty() {
                bail!("min needs at least one variable");
            }
            AggregationSpec::min(&vars)
        }
    })
}

pub fn load(common: &Common) -> Result<Input> {
    let (mut query, mut tree) = read_query_file(&common.query)?;
    if let Some(t) = &common.tree {
        tree = Some(BushyPlan::parse(t).context("--tree")?);
    }
    if let Some(a) = &common.agg {
        query.agg = parse_agg(a, &query.query.head)?;
    }
    let catalog = Catalog::load_file(&common.catalog).with_context(|| format!("loading {}", common.catalog.display()))?;
    Ok(Input { query, tree, catalog })
}
