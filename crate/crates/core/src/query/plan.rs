use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::lexer::{Lexer, Token};
use super::{ConjunctiveQuery, QueryError};

/// `R(y)` where `y` is a subset of the variables of the query atom over `R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subatom {
    pub relation: String,
    pub vars: Vec<String>,
}

impl Subatom {
    pub fn new(relation: impl Into<String>, vars: &[&str]) -> Subatom {
        Subatom { relation: relation.into(), vars: vars.iter().map(|v| v.to_string()).collect() }
    }
}

impl fmt::Display for Subatom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, self.vars.join(", "))
    }
}

/// An ordered list of nodes, each an ordered list of subatoms. The first
/// subatom of a node drives iteration; the others are probed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FreeJoinPlan {
    pub nodes: Vec<Vec<Subatom>>,
}

impl FreeJoinPlan {
    pub fn new(nodes: Vec<Vec<Subatom>>) -> FreeJoinPlan {
        FreeJoinPlan { nodes }
    }

    /// Parses either the bracketed list form `[[R(x,a),S(x)],[S(b)]]` or the
    /// plan-file form (one node per line, subatoms separated by commas, `#`
    /// comments allowed).
    pub fn parse(text: &str) -> Result<FreeJoinPlan, QueryError> {
        if text.trim_start().starts_with('[') {
            Self::parse_bracketed(text)
        } else {
            Self::parse_file(text)
        }
    }

    fn parse_bracketed(text: &str) -> Result<FreeJoinPlan, QueryError> {
        let mut lx = Lexer::new(text);
        lx.expect(Token::LBracket)?;
        let mut nodes = Vec::new();
        if let Some((Token::RBracket, _)) = lx.peek()? {
            lx.next()?;
        } else {
            loop {
                lx.expect(Token::LBracket)?;
                nodes.push(parse_subatoms(&mut lx, Some(Token::RBracket))?);
                lx.expect(Token::RBracket)?;
                match lx.next()? {
                    Some((Token::Comma, _)) => continue,
                    Some((Token::RBracket, _)) => break,
                    Some((t, pos)) => return Err(QueryError::Syntax { pos, message: format!("unexpected {t}") }),
                    None => return Err(QueryError::Syntax { pos: text.len(), message: "unterminated plan".into() }),
                }
            }
        }
        if let Some((t, pos)) = lx.peek()? {
            return Err(QueryError::Syntax { pos, message: format!("trailing input at {t}") });
        }
        Ok(FreeJoinPlan { nodes })
    }

    fn parse_file(text: &str) -> Result<FreeJoinPlan, QueryError> {
        let mut nodes = Vec::new();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let body = line.split('#').next().unwrap_or("");
            if !body.trim().is_empty() {
                let mut lx = Lexer::new(body);
                let node = parse_subatoms(&mut lx, None).map_err(|e| e.shifted(offset))?;
                if !lx.at_end().map_err(|e| e.shifted(offset))? {
                    let (t, pos) = lx.peek()?.expect("not at end");
                    return Err(QueryError::Syntax { pos: pos + offset, message: format!("unexpected {t}") });
                }
                nodes.push(node);
            }
            offset += line.len();
        }
        Ok(FreeJoinPlan { nodes })
    }

    /// Plan-file rendering: one node per line. `parse` reads it back exactly.
    pub fn to_plan_file(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            let parts: Vec<String> = node.iter().map(|s| format!("{}({})", s.relation, s.vars.join(","))).collect();
            out.push_str(&parts.join(", "));
            out.push('\n');
        }
        out
    }

    /// Subatoms of `relation` in node order, with their node indices.
    pub fn subatoms_of<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = (usize, &'a Subatom)> + 'a {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(move |(k, node)| node.iter().filter(move |s| s.relation == relation).map(move |s| (k, s)))
    }

    /// Relations in order of first appearance.
    pub fn relations(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in self.nodes.iter().flatten() {
            if !out.contains(&s.relation.as_str()) {
                out.push(&s.relation);
            }
        }
        out
    }

    /// Variables in order of first appearance.
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in self.nodes.iter().flatten() {
            for v in &s.vars {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }
}

fn parse_subatoms(lx: &mut Lexer<'_>, close: Option<Token>) -> Result<Vec<Subatom>, QueryError> {
    let mut node = Vec::new();
    loop {
        let relation = lx.ident()?;
        lx.expect(Token::LParen)?;
        let mut vars = Vec::new();
        if !matches!(lx.peek()?, Some((Token::RParen, _))) {
            loop {
                vars.push(lx.ident()?);
                if let Some((Token::Comma, _)) = lx.peek()? {
                    lx.next()?;
                } else {
                    break;
                }
            }
        }
        lx.expect(Token::RParen)?;
        node.push(Subatom { relation, vars });
        match lx.peek()? {
            Some((Token::Comma, _)) => {
                lx.next()?;
            }
            Some((t, _)) if Some(&t) == close.as_ref() => return Ok(node),
            None if close.is_none() => return Ok(node),
            Some((t, pos)) => return Err(QueryError::Syntax { pos, message: format!("unexpected {t}") }),
            None => return Err(QueryError::Syntax { pos: 0, message: "unterminated node".into() }),
        }
    }
}

impl fmt::Display for FreeJoinPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, node) in self.nodes.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (i, s) in node.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl FromStr for FreeJoinPlan {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FreeJoinPlan::parse(s)
    }
}

/// Why a plan is not a valid Free Join plan for a query. Node numbers are 1-based.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PlanViolation {
    #[error("plan has no nodes")]
    Empty,
    #[error("node {node} is empty")]
    EmptyNode { node: usize },
    #[error("node {node}: subatom of {relation} binds no variables")]
    EmptySubatom { node: usize, relation: String },
    #[error("node {node}: relation {relation} is not in the query")]
    UnknownRelation { node: usize, relation: String },
    #[error("node {node}: variable {var} is not bound by the atom over {relation}")]
    UnknownVariable { node: usize, relation: String, var: String },
    #[error("node {node}: relation {relation} has more than one subatom in the node")]
    RepeatedInNode { node: usize, relation: String },
    #[error("relation {relation}: subatoms are not disjoint, variable {var} appears in nodes {first} and {second}")]
    NotDisjoint { relation: String, var: String, first: usize, second: usize },
    #[error("relation {relation}: subatoms do not cover variables {missing:?}")]
    Incomplete { relation: String, missing: Vec<String> },
    #[error("node {node}: probe {relation} uses {var} before any node binds it")]
    UnboundProbe { node: usize, relation: String, var: String },
}

/// Checks the partition property and variable-introduction order of `plan`
/// against `q`, reporting the first violation found.
pub fn validate_plan(q: &ConjunctiveQuery, plan: &FreeJoinPlan) -> Result<(), PlanViolation> {
    if plan.nodes.is_empty() {
        return Err(PlanViolation::Empty);
    }
    for (k, node) in plan.nodes.iter().enumerate() {
        let n = k + 1;
        if node.is_empty() {
            return Err(PlanViolation::EmptyNode { node: n });
        }
        let mut rels = HashSet::new();
        for s in node {
            let atom = q
                .atom(&s.relation)
                .ok_or_else(|| PlanViolation::UnknownRelation { node: n, relation: s.relation.clone() })?;
            if s.vars.is_empty() {
                return Err(PlanViolation::EmptySubatom { node: n, relation: s.relation.clone() });
            }
            if let Some(v) = s.vars.iter().find(|v| !atom.contains(v)) {
                return Err(PlanViolation::UnknownVariable { node: n, relation: s.relation.clone(), var: v.clone() });
            }
            if !rels.insert(s.relation.as_str()) {
                return Err(PlanViolation::RepeatedInNode { node: n, relation: s.relation.clone() });
            }
        }
    }
    for atom in &q.atoms {
        let mut seen: Vec<(&str, usize)> = Vec::new();
        for (k, s) in plan.subatoms_of(&atom.relation) {
            for v in &s.vars {
                if let Some((_, first)) = seen.iter().find(|(sv, _)| *sv == v) {
                    return Err(PlanViolation::NotDisjoint {
                        relation: atom.relation.clone(),
                        var: v.clone(),
                        first: *first,
                        second: k + 1,
                    });
                }
                seen.push((v, k + 1));
            }
        }
        let missing: Vec<String> =
            atom.vars.iter().filter(|v| !seen.iter().any(|(sv, _)| sv == v)).cloned().collect();
        if !missing.is_empty() {
            return Err(PlanViolation::Incomplete { relation: atom.relation.clone(), missing });
        }
    }
    let mut bound: HashSet<&str> = HashSet::new();
    for (k, node) in plan.nodes.iter().enumerate() {
        bound.extend(node[0].vars.iter().map(String::as_str));
        for s in &node[1..] {
            if let Some(v) = s.vars.iter().find(|v| !bound.contains(v.as_str())) {
                return Err(PlanViolation::UnboundProbe { node: k + 1, relation: s.relation.clone(), var: v.clone() });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn clover() -> ConjunctiveQuery {
        parse_query("Q(x,a,b) :- R(x,a), S(x,b), T(x)").unwrap().query
    }

    fn plan(s: &str) -> FreeJoinPlan {
        s.parse().unwrap()
    }

    #[test]
    fn paper_plans_validate() {
        let q = clover();
        assert_eq!(validate_plan(&q, &plan("[[R(x,a),S(x),T(x)],[S(b)]]")), Ok(()));
        assert_eq!(validate_plan(&q, &plan("[[R(x),S(x),T(x)],[R(a)],[S(b)]]")), Ok(()));
        assert_eq!(validate_plan(&q, &plan("[[R(x,a),S(x)],[S(b),T(x)]]")), Ok(()));
    }

    #[test]
    fn overlapping_subatoms() {
        let err = validate_plan(&clover(), &plan("[[R(x),S(x)],[R(x),S(b),T(x)]]")).unwrap_err();
        assert_eq!(
            err,
            PlanViolation::NotDisjoint { relation: "R".into(), var: "x".into(), first: 1, second: 2 }
        );
    }

    #[test]
    fn other_violations() {
        let q = clover();
        assert!(matches!(validate_plan(&q, &plan("[[R(x,a),S(x)],[S(b)]]")), Err(PlanViolation::Incomplete { .. })));
        assert!(matches!(
            validate_plan(&q, &plan("[[R(x,a),S(b)],[S(x),T(x)]]")),
            Err(PlanViolation::UnboundProbe { node: 1, .. })
        ));
        assert!(matches!(validate_plan(&q, &plan("[[U(x)]]")), Err(PlanViolation::UnknownRelation { .. })));
        assert!(matches!(validate_plan(&q, &plan("[[R(z)]]")), Err(PlanViolation::UnknownVariable { .. })));
        assert!(matches!(
            validate_plan(&q, &plan("[[R(x),R(a),S(x,b),T(x)]]")),
            Err(PlanViolation::RepeatedInNode { .. })
        ));
        assert_eq!(validate_plan(&q, &FreeJoinPlan::default()), Err(PlanViolation::Empty));
    }

    #[test]
    fn display_and_file_roundtrip() {
        let p = plan("[[R(x,a),S(x)],[S(b),T(x)]]");
        assert_eq!(p.to_string(), "[[R(x, a), S(x)], [S(b), T(x)]]");
        let file = p.to_plan_file();
        assert_eq!(file, "R(x,a), S(x)\nS(b), T(x)\n");
        assert_eq!(FreeJoinPlan::parse(&file).unwrap(), p);
        assert_eq!(FreeJoinPlan::parse(&p.to_string()).unwrap(), p);
        assert_eq!(FreeJoinPlan::parse(&file).unwrap().to_plan_file(), file);
    }

    #[test]
    fn file_comments_and_errors() {
        let p = FreeJoinPlan::parse("# clover plan\nR(x, a), S(x), T(x)\n\nS(b)  # tail\n").unwrap();
        assert_eq!(p, plan("[[R(x,a),S(x),T(x)],[S(b)]]"));
        match FreeJoinPlan::parse("R(x)\nS(x) T(x)\n") {
            Err(QueryError::Syntax { pos, .. }) => assert_eq!(pos, 10),
            other => panic!("{other:?}"),
        }
    }
}
