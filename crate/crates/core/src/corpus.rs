//! A fixed set of test queries and a generator of random instances for them.

use rand::Rng;

use crate::query::{parse_query, BushyPlan, ParsedQuery};
use crate::storage::generate::{maybe_sorted, random_relation};
use crate::storage::{Catalog, Kind};

#[derive(Clone, Copy, Debug)]
pub struct CorpusQuery {
    pub name: &'static str,
    pub text: &'static str,
    /// Join tree; `None` joins left-deep in atom order.
    pub tree: Option<&'static str>,
    /// Variables holding strings; all others hold integers.
    pub str_vars: &'static [&'static str],
}

impl CorpusQuery {
    pub fn parse(&self) -> ParsedQuery {
        parse_query(self.text).expect("corpus queries parse")
    }

    pub fn tree(&self) -> Option<BushyPlan> {
        self.tree.map(|t| t.parse().expect("corpus trees parse"))
    }

    pub fn kind(&self, var: &str) -> Kind {
        if self.str_vars.contains(&var) {
            Kind::Str
        } else {
            Kind::Int
        }
    }

    /// One random relation per atom, attributes named after the atom's
    /// variables, `rows` rows each over values `0..domain`. About half the
    /// relations come back sorted on a random attribute order.
    pub fn instance<R: Rng + ?Sized>(&self, rng: &mut R, rows: usize, domain: i64) -> Catalog {
        let q = self.parse().query;
        q.atoms
            .iter()
            .map(|a| {
                let schema: Vec<(&str, Kind)> = a.vars.iter().map(|v| (v.as_str(), self.kind(v))).collect();
                let n = rng.gen_range(0..=rows);
                let rel = random_relation(rng, &a.relation, &schema, n, domain);
                maybe_sorted(rng, rel)
            })
            .collect()
    }
}

pub fn corpus() -> Vec<CorpusQuery> {
    let q = |name, text, tree, str_vars| CorpusQuery { name, text, tree, str_vars };
    vec![
        q("clover", "Q(x,a,b) :- R(x,a), S(x,b), T(x)", None, &[]),
        q("clover_x", "Q(x) :- R(x,a), S(x,b), T(x)", None, &[]),
        q("clover_min", "Q(MIN(a,b)) :- R(x,a), S(x,b), T(x)", None, &[]),
        q("clover_count", "Q(COUNT) :- R(x,a), S(x,b), T(x)", None, &[]),
        q("triangle", "Q(a,b,c) :- R(a,b), S(b,c), T(c,a)", None, &[]),
        q("triangle_count", "Q(COUNT) :- R(a,b), S(b,c), T(c,a)", None, &[]),
        q("chain4", "Q(a,b,c,d,e) :- R(a,b), S(b,c), T(c,d), U(d,e)", None, &[]),
        q("chain_ends", "Q(a,e) :- R(a,b), S(b,c), T(c,d), U(d,e)", None, &[]),
        q("star", "Q(x,a,b,c,d) :- R(x,a), S(x,b), T(x,c), U(x,d)", None, &[]),
        q("star_min", "Q(MIN(a,d)) :- R(x,a), S(x,b), T(x,c), U(x,d)", None, &[]),
        q("bushy4", "Q(a,b,c,d,e) :- R(a,b), S(b,c), T(c,d), U(d,e)", Some("((R,S),(T,U))"), &[]),
        q("bushy_count", "Q(COUNT) :- R(a,b), S(b,c), T(c,d), U(d,e)", Some("((R,S),(T,U))"), &[]),
        q("bushy_min", "Q(MIN(a,e)) :- R(a,b), S(b,c), T(c,d), U(d,e)", Some("((R,S),(T,U))"), &[]),
        q("cycle4", "Q(a,b,c,d) :- R(a,b), S(b,c), T(c,d), U(d,a)", None, &[]),
        q("triangle_tail", "Q(a,b,c,d) :- R(a,b), S(b,c), T(c,a), U(c,d)", None, &[]),
        q("strings", "Q(n,m) :- Person(p,n), Knows(p,r), Named(r,m)", None, &["p", "r", "n", "m"]),
    ]
}
