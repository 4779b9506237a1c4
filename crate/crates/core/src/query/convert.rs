use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use super::lexer::{Lexer, Token};
use super::{validate_plan, ConjunctiveQuery, FreeJoinPlan, QueryError, Subatom};

/// A left-deep binary plan: the order in which atoms are joined. Join
/// attributes are the variables each atom shares with the atoms before it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LeftDeepPlan {
    pub order: Vec<String>,
}

impl LeftDeepPlan {
    pub fn new<S: Into<String>>(order: impl IntoIterator<Item = S>) -> LeftDeepPlan {
        LeftDeepPlan { order: order.into_iter().map(Into::into).collect() }
    }

    /// Atoms in query order.
    pub fn from_query(q: &ConjunctiveQuery) -> LeftDeepPlan {
        LeftDeepPlan::new(q.atoms.iter().map(|a| a.relation.clone()))
    }

    /// Accepts `R,S,T` or `[R, S, T]`.
    pub fn parse(text: &str) -> Result<LeftDeepPlan, QueryError> {
        let mut lx = Lexer::new(text);
        let bracketed = matches!(lx.peek()?, Some((Token::LBracket, _)));
        if bracketed {
            lx.next()?;
        }
        let mut order = vec![lx.ident()?];
        while let Some((Token::Comma, _)) = lx.peek()? {
            lx.next()?;
            order.push(lx.ident()?);
        }
        if bracketed {
            lx.expect(Token::RBracket)?;
        }
        if let Some((t, pos)) = lx.peek()? {
            return Err(QueryError::Syntax { pos, message: format!("unexpected {t}") });
        }
        Ok(LeftDeepPlan { order })
    }

    pub(crate) fn check_coverage(&self, q: &ConjunctiveQuery) -> Result<(), QueryError> {
        let mut seen = HashSet::new();
        for r in &self.order {
            if q.atom(r).is_none() {
                return Err(QueryError::Coverage(format!("relation {r} is not in the query")));
            }
            if !seen.insert(r.as_str()) {
                return Err(QueryError::Coverage(format!("relation {r} is joined twice")));
            }
        }
        if let Some(a) = q.atoms.iter().find(|a| !seen.contains(a.relation.as_str())) {
            return Err(QueryError::Coverage(format!("relation {} is never joined", a.relation)));
        }
        Ok(())
    }
}

impl fmt::Display for LeftDeepPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.order.join(", "))
    }
}

impl FromStr for LeftDeepPlan {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LeftDeepPlan::parse(s)
    }
}

/// Straightforward binary-to-Free-Join conversion. Each node iterates the
/// columns a relation has not yet joined on and probes the next relation on
/// the variables it shares with the prefix. When a relation contributes no
/// new variables, the next probe joins the node that probed it.
pub fn convert_left_deep(q: &ConjunctiveQuery, ld: &LeftDeepPlan) -> Result<FreeJoinPlan, QueryError> {
    ld.check_coverage(q)?;
    let first = q.atom(&ld.order[0]).expect("coverage checked");
    let mut bound: HashSet<&str> = first.vars.iter().map(String::as_str).collect();
    let mut nodes = vec![vec![Subatom { relation: first.relation.clone(), vars: first.vars.clone() }]];
    for rel in &ld.order[1..] {
        let atom = q.atom(rel).expect("coverage checked");
        let (shared, rest): (Vec<String>, Vec<String>) =
            atom.vars.iter().cloned().partition(|v| bound.contains(v.as_str()));
        if shared.is_empty() {
            return Err(QueryError::CartesianProduct(rel.clone()));
        }
        nodes.last_mut().expect("non-empty").push(Subatom { relation: rel.clone(), vars: shared });
        bound.extend(atom.vars.iter().map(String::as_str));
        if !rest.is_empty() {
            nodes.push(vec![Subatom { relation: rel.clone(), vars: rest }]);
        }
    }
    Ok(FreeJoinPlan { nodes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlanMode {
    /// Hoist probes into the earliest node that binds their variables.
    FreeJoin,
    /// One intersection node per variable.
    GenericJoin,
}

impl FromStr for PlanMode {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "freejoin" | "fj" | "free-join" => Ok(PlanMode::FreeJoin),
            "generic-join" | "gj" | "genericjoin" => Ok(PlanMode::GenericJoin),
            _ => Err(QueryError::Invalid(format!("unknown plan mode {s:?}"))),
        }
    }
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanMode::FreeJoin => "freejoin",
            PlanMode::GenericJoin => "generic-join",
        })
    }
}

pub fn optimize_plan(q: &ConjunctiveQuery, p: &FreeJoinPlan, mode: PlanMode) -> Result<FreeJoinPlan, QueryError> {
    validate_plan(q, p)?;
    let out = match mode {
        PlanMode::GenericJoin => generic_join(q, p),
        PlanMode::FreeJoin => hoist_probes(p),
    };
    debug_assert_eq!(validate_plan(q, &out), Ok(()));
    Ok(out)
}

// Variables in first-appearance order; within a node, relations in the order
// they first appear in the input plan.
fn generic_join(q: &ConjunctiveQuery, p: &FreeJoinPlan) -> FreeJoinPlan {
    let rels = p.relations();
    let nodes = p
        .vars()
        .into_iter()
        .map(|v| {
            rels.iter()
                .filter(|r| q.atom(r).is_some_and(|a| a.contains(&v)))
                .map(|r| Subatom { relation: r.to_string(), vars: vec![v.clone()] })
                .collect()
        })
        .collect();
    FreeJoinPlan { nodes }
}

fn hoist_probes(p: &FreeJoinPlan) -> FreeJoinPlan {
    let mut nodes = p.nodes.clone();
    for k in 1..nodes.len() {
        let mut i = 1;
        while i < nodes[k].len() {
            let probe = &nodes[k][i];
            // Nodes before `lo` hold an earlier subatom of the same atom.
            let lo = (0..k).rev().find(|&j| nodes[j].iter().any(|s| s.relation == probe.relation)).map_or(0, |j| j + 1);
            let mut bound: HashSet<&str> = HashSet::new();
            let mut target = None;
            for (j, node) in nodes.iter().enumerate().take(k) {
                bound.extend(node[0].vars.iter().map(String::as_str));
                if j >= lo && probe.vars.iter().all(|v| bound.contains(v.as_str())) {
                    target = Some(j);
                    break;
                }
            }
            match target {
                Some(j) => {
                    let s = nodes[k].remove(i);
                    nodes[j].push(s);
                }
                None => i += 1,
            }
        }
    }
    FreeJoinPlan { nodes }
}
