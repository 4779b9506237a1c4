use std::collections::{BTreeMap, HashSet};
use std::fmt;

use super::lexer::{Lexer, Token};
use super::QueryError;
use crate::storage::{Catalog, Kind};

/// `R(x, a)`: a relation with variables bound positionally to its leading attributes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    pub vars: Vec<String>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, vars: &[&str]) -> Atom {
        Atom { relation: relation.into(), vars: vars.iter().map(|v| v.to_string()).collect() }
    }

    pub fn contains(&self, var: &str) -> bool {
        self.vars.iter().any(|v| v == var)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, self.vars.join(", "))
    }
}

/// `Q(head) :- atom, ..., atom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjunctiveQuery {
    pub name: String,
    pub head: Vec<String>,
    pub atoms: Vec<Atom>,
}

impl ConjunctiveQuery {
    /// Builds and validates a query: at least one atom, relation names unique,
    /// no repeated variable inside an atom, every head variable bound in the body.
    pub fn new(name: impl Into<String>, head: Vec<String>, atoms: Vec<Atom>) -> Result<Self, QueryError> {
        let q = ConjunctiveQuery { name: name.into(), head, atoms };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<(), QueryError> {
        if self.atoms.is_empty() {
            return Err(QueryError::Invalid("query has no atoms".into()));
        }
        let mut rels = HashSet::new();
        for atom in &self.atoms {
            if !rels.insert(atom.relation.as_str()) {
                return Err(QueryError::DuplicateRelation(atom.relation.clone()));
            }
            if atom.vars.is_empty() {
                return Err(QueryError::Invalid(format!("atom {} binds no variables", atom.relation)));
            }
            let mut seen = HashSet::new();
            for v in &atom.vars {
                if !seen.insert(v.as_str()) {
                    return Err(QueryError::RepeatedVariable { relation: atom.relation.clone(), var: v.clone() });
                }
            }
        }
        let mut seen = HashSet::new();
        for v in &self.head {
            if !self.atoms.iter().any(|a| a.contains(v)) {
                return Err(QueryError::HeadVariableNotInBody(v.clone()));
            }
            if !seen.insert(v.as_str()) {
                return Err(QueryError::Invalid(format!("head variable {v} repeated")));
            }
        }
        Ok(())
    }

    /// All variables, in order of first appearance in the body.
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for a in &self.atoms {
            for v in &a.vars {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// True when the head mentions every body variable.
    pub fn is_full(&self) -> bool {
        self.vars().iter().all(|v| self.head.contains(v))
    }

    pub fn atom(&self, relation: &str) -> Option<&Atom> {
        self.atoms.iter().find(|a| a.relation == relation)
    }

    pub fn atom_index(&self, relation: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.relation == relation)
    }

    /// Number of atoms mentioning `var`.
    pub fn occurrences(&self, var: &str) -> usize {
        self.atoms.iter().filter(|a| a.contains(var)).count()
    }

    /// Checks the query against a catalog and returns each variable's value kind.
    /// Relations must exist with enough attributes, and a variable shared by
    /// several atoms must range over columns of one kind.
    pub fn bind(&self, catalog: &Catalog) -> Result<BTreeMap<String, Kind>, QueryError> {
        let mut kinds: BTreeMap<String, Kind> = BTreeMap::new();
        for atom in &self.atoms {
            let rel = catalog
                .get(&atom.relation)
                .ok_or_else(|| QueryError::UnknownRelation(atom.relation.clone()))?;
            if atom.vars.len() > rel.arity() {
                return Err(QueryError::Arity {
                    relation: atom.relation.clone(),
                    arity: rel.arity(),
                    vars: atom.vars.len(),
                });
            }
            for (i, v) in atom.vars.iter().enumerate() {
                let k = rel.kind(i);
                match kinds.get(v) {
                    Some(prev) if *prev != k => {
                        return Err(QueryError::KindMismatch { var: v.clone(), first: *prev, second: k })
                    }
                    _ => {
                        kinds.insert(v.clone(), k);
                    }
                }
            }
        }
        Ok(kinds)
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) :- ", self.name, self.head.join(", "))?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AggKind {
    /// The bag of output tuples with multiplicities (a projection when the
    /// output does not cover every variable).
    FullTuples,
    /// Total number of satisfying assignments.
    Count,
    /// Column-wise minimum of each output variable.
    Min,
}

/// What the query returns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregationSpec {
    pub kind: AggKind,
    pub output: Vec<String>,
}

impl AggregationSpec {
    pub fn full(output: &[String]) -> AggregationSpec {
        AggregationSpec { kind: AggKind::FullTuples, output: output.to_vec() }
    }

    pub fn count() -> AggregationSpec {
        AggregationSpec { kind: AggKind::Count, output: Vec::new() }
    }

    pub fn min(vars: &[&str]) -> AggregationSpec {
        AggregationSpec { kind: AggKind::Min, output: vars.iter().map(|v| v.to_string()).collect() }
    }

    /// Output variables must be query variables; min needs integer variables.
    pub fn check(&self, q: &ConjunctiveQuery, kinds: Option<&BTreeMap<String, Kind>>) -> Result<(), QueryError> {
        for v in &self.output {
            if !q.atoms.iter().any(|a| a.contains(v)) {
                return Err(QueryError::HeadVariableNotInBody(v.clone()));
            }
            if self.kind == AggKind::Min {
                if let Some(k) = kinds.and_then(|k| k.get(v)) {
                    if *k != Kind::Int {
                        return Err(QueryError::MinNeedsInt(v.clone()));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for AggregationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AggKind::FullTuples => write!(f, "full({})", self.output.join(",")),
            AggKind::Count => f.write_str("count"),
            AggKind::Min => write!(f, "min({})", self.output.join(",")),
        }
    }
}

/// A parsed query together with its aggregation (full tuples over the head
/// unless the head carries `COUNT` or `MIN(..)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedQuery {
    pub query: ConjunctiveQuery,
    pub agg: AggregationSpec,
}

/// Parses `Head(v1,..,vk) :- Rel1(u..), Rel2(u..), ...`. The head may instead be
/// `Q(COUNT)` or `Q(MIN(v1,v2))`. A trailing `.` is allowed.
pub fn parse_query(text: &str) -> Result<ParsedQuery, QueryError> {
    let mut lx = Lexer::new(text);
    let name = lx.ident()?;
    lx.expect(Token::LParen)?;
    let (head, kind) = parse_head(&mut lx)?;
    lx.expect(Token::RParen)?;
    lx.expect(Token::Turnstile)?;
    let mut atoms = Vec::new();
    loop {
        let rel = lx.ident()?;
        lx.expect(Token::LParen)?;
        let vars = parse_var_list(&mut lx)?;
        lx.expect(Token::RParen)?;
        atoms.push(Atom { relation: rel, vars });
        match lx.peek()? {
            Some((Token::Comma, _)) => {
                lx.next()?;
            }
            Some((Token::Dot, _)) => {
                lx.next()?;
                break;
            }
            None => break,
            Some((t, pos)) => return Err(QueryError::Syntax { pos, message: format!("unexpected {t}") }),
        }
    }
    if let Some((t, pos)) = lx.peek()? {
        return Err(QueryError::Syntax { pos, message: format!("trailing input at {t}") });
    }
    let query = ConjunctiveQuery::new(name, head.clone(), atoms)?;
    let agg = AggregationSpec { kind, output: head };
    agg.check(&query, None)?;
    Ok(ParsedQuery { query, agg })
}

fn parse_head(lx: &mut Lexer<'_>) -> Result<(Vec<String>, AggKind), QueryError> {
    if let Some((Token::Ident(id), _)) = lx.peek()? {
        let upper = id.to_ascii_uppercase();
        if upper == "COUNT" {
            lx.next()?;
            if let Some((Token::LParen, _)) = lx.peek()? {
                lx.next()?;
                if let Some((Token::Star, _)) = lx.peek()? {
                    lx.next()?;
                }
                lx.expect(Token::RParen)?;
            }
            return Ok((Vec::new(), AggKind::Count));
        }
        if upper == "MIN" {
            lx.next()?;
            lx.expect(Token::LParen)?;
            let vars = parse_var_list(lx)?;
            lx.expect(Token::RParen)?;
            return Ok((vars, AggKind::Min));
        }
    }
    Ok((parse_var_list(lx)?, AggKind::FullTuples))
}

fn parse_var_list(lx: &mut Lexer<'_>) -> Result<Vec<String>, QueryError> {
    let mut vars = Vec::new();
    if let Some((Token::RParen, _)) = lx.peek()? {
        return Ok(vars);
    }
    loop {
        vars.push(lx.ident()?);
        match lx.peek()? {
            Some((Token::Comma, _)) => {
                lx.next()?;
            }
            _ => return Ok(vars),
        }
    }
}
