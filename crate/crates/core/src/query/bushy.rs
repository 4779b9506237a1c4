use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::lexer::{Lexer, Token};
use super::{Atom, ConjunctiveQuery, LeftDeepPlan, QueryError};

/// A binary join tree written `((R,S),(T,U))`. Leaves name query atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BushyPlan {
    Leaf(String),
    Join(Box<BushyPlan>, Box<BushyPlan>),
}

impl BushyPlan {
    pub fn join(l: BushyPlan, r: BushyPlan) -> BushyPlan {
        BushyPlan::Join(Box::new(l), Box::new(r))
    }

    /// The left-deep tree `(((R1,R2),R3),..)`.
    pub fn left_deep(ld: &LeftDeepPlan) -> BushyPlan {
        let mut it = ld.order.iter();
        let mut t = BushyPlan::Leaf(it.next().cloned().unwrap_or_default());
        for r in it {
            t = BushyPlan::join(t, BushyPlan::Leaf(r.clone()));
        }
        t
    }

    pub fn parse(text: &str) -> Result<BushyPlan, QueryError> {
        let mut lx = Lexer::new(text);
        let t = parse_tree(&mut lx)?;
        if let Some((t, pos)) = lx.peek()? {
            return Err(QueryError::Syntax { pos, message: format!("unexpected {t}") });
        }
        Ok(t)
    }

    pub fn leaves(&self) -> Vec<&str> {
        match self {
            BushyPlan::Leaf(r) => vec![r.as_str()],
            BushyPlan::Join(l, r) => {
                let mut v = l.leaves();
                v.extend(r.leaves());
                v
            }
        }
    }

    pub fn is_left_deep(&self) -> bool {
        match self {
            BushyPlan::Leaf(_) => true,
            BushyPlan::Join(l, r) => matches!(**r, BushyPlan::Leaf(_)) && l.is_left_deep(),
        }
    }

    fn vars(&self, q: &ConjunctiveQuery) -> BTreeSet<String> {
        self.leaves().iter().filter_map(|r| q.atom(r)).flat_map(|a| a.vars.iter().cloned()).collect()
    }
}

fn parse_tree(lx: &mut Lexer<'_>) -> Result<BushyPlan, QueryError> {
    match lx.peek()? {
        Some((Token::LParen, _)) => {
            lx.next()?;
            let l = parse_tree(lx)?;
            lx.expect(Token::Comma)?;
            let r = parse_tree(lx)?;
            lx.expect(Token::RParen)?;
            Ok(BushyPlan::join(l, r))
        }
        _ => Ok(BushyPlan::Leaf(lx.ident()?)),
    }
}

impl fmt::Display for BushyPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BushyPlan::Leaf(r) => f.write_str(r),
            BushyPlan::Join(l, r) => write!(f, "({l}, {r})"),
        }
    }
}

impl FromStr for BushyPlan {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BushyPlan::parse(s)
    }
}

/// One left-deep pipeline of a decomposed bushy plan. Every stage but the last
/// materializes an intermediate relation named `output` whose attributes are
/// the head of `query`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanStage {
    pub output: String,
    pub query: ConjunctiveQuery,
    pub plan: LeftDeepPlan,
}

impl PlanStage {
    pub fn is_final(&self, q: &ConjunctiveQuery) -> bool {
        self.output == q.name
    }
}

/// Post-order decomposition. Every right subtree that is not a leaf becomes a
/// stage producing `I1`, `I2`, ...; its attributes are the subtree variables
/// that are needed above it (by `needed` or by atoms outside the subtree).
/// The last stage computes the query itself.
pub fn decompose_bushy(q: &ConjunctiveQuery, bp: &BushyPlan, needed: &[String]) -> Result<Vec<PlanStage>, QueryError> {
    LeftDeepPlan::new(bp.leaves().into_iter().map(String::from)).check_coverage(q)?;
    let mut d = Decomposer { q, needed, stages: Vec::new(), next: 1 };
    let atoms = d.spine(bp)?;
    let plan = LeftDeepPlan::new(atoms.iter().map(|a| a.relation.clone()));
    let query = ConjunctiveQuery::new(q.name.clone(), q.head.clone(), atoms)?;
    d.stages.push(PlanStage { output: q.name.clone(), query, plan });
    Ok(d.stages)
}

struct Decomposer<'a> {
    q: &'a ConjunctiveQuery,
    needed: &'a [String],
    stages: Vec<PlanStage>,
    next: usize,
}

impl Decomposer<'_> {
    fn spine(&mut self, t: &BushyPlan) -> Result<Vec<Atom>, QueryError> {
        match t {
            BushyPlan::Leaf(r) => Ok(vec![self.q.atom(r).expect("coverage checked").clone()]),
            BushyPlan::Join(l, r) => {
                let lv = l.vars(self.q);
                if r.vars(self.q).is_disjoint(&lv) {
                    return Err(QueryError::CartesianProduct(r.to_string()));
                }
                let mut atoms = self.spine(l)?;
                match &**r {
                    BushyPlan::Leaf(_) => atoms.extend(self.spine(r)?),
                    sub => atoms.push(self.materialize(sub)?),
                }
                Ok(atoms)
            }
        }
    }

    fn materialize(&mut self, t: &BushyPlan) -> Result<Atom, QueryError> {
        let atoms = self.spine(t)?;
        let inside: BTreeSet<&str> = t.leaves().into_iter().collect();
        let outside: BTreeSet<&String> = self
            .q
            .atoms
            .iter()
            .filter(|a| !inside.contains(a.relation.as_str()))
            .flat_map(|a| a.vars.iter())
            .collect();
        let mut head: Vec<String> = Vec::new();
        for v in atoms.iter().flat_map(|a| a.vars.iter()) {
            if (outside.contains(v) || self.needed.contains(v)) && !head.contains(v) {
                head.push(v.clone());
            }
        }
        let name = loop {
            let n = format!("I{}", self.next);
            self.next += 1;
            if self.q.atom(&n).is_none() && n != self.q.name {
                break n;
            }
        };
        let plan = LeftDeepPlan::new(atoms.iter().map(|a| a.relation.clone()));
        let query = ConjunctiveQuery::new(name.clone(), head.clone(), atoms)?;
        self.stages.push(PlanStage { output: name.clone(), query, plan });
        Ok(Atom { relation: name, vars: head })
    }
}
