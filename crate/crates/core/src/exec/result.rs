use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::storage::Value;

/// Result of a query under bag semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResultBag {
    /// Output tuple to multiplicity; every multiplicity is at least 1.
    Tuples { vars: Vec<String>, bag: BTreeMap<Vec<Value>, u64> },
    Count(u64),
    /// Column-wise minima. `empty` is set when no assignment satisfied the
    /// query, in which case every value is the identity `i64::MAX`.
    Min { vars: Vec<String>, values: Vec<i64>, empty: bool },
}

pub const MIN_IDENTITY: i64 = i64::MAX;

impl ResultBag {
    pub fn empty_min(vars: Vec<String>) -> ResultBag {
        let values = vec![MIN_IDENTITY; vars.len()];
        ResultBag::Min { vars, values, empty: true }
    }

    /// Distinct tuples (1 for aggregates).
    pub fn cardinality(&self) -> usize {
        match self {
            ResultBag::Tuples { bag, .. } => bag.len(),
            _ => 1,
        }
    }

    /// Number of satisfying assignments, where known.
    pub fn total_multiplicity(&self) -> Option<u64> {
        match self {
            ResultBag::Tuples { bag, .. } => Some(bag.values().sum()),
            ResultBag::Count(c) => Some(*c),
            ResultBag::Min { .. } => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ResultBag::Tuples { bag, .. } => bag.is_empty(),
            ResultBag::Count(c) => *c == 0,
            ResultBag::Min { empty, .. } => *empty,
        }
    }

    /// The first point where two results differ, if any.
    pub fn first_difference(&self, other: &ResultBag) -> Option<String> {
        match (self, other) {
            (ResultBag::Tuples { vars: va, bag: a }, ResultBag::Tuples { vars: vb, bag: b }) => {
                if va != vb {
                    return Some(format!("columns ({}) vs ({})", va.join(", "), vb.join(", ")));
                }
                let mut ia = a.iter().peekable();
                let mut ib = b.iter().peekable();
                loop {
                    match (ia.peek(), ib.peek()) {
                        (None, None) => return None,
                        (Some((t, m)), None) => return Some(format!("{} -> {m} vs absent", show(t))),
                        (None, Some((t, m))) => return Some(format!("{} -> absent vs {m}", show(t))),
                        (Some((ta, ma)), Some((tb, mb))) => match ta.cmp(tb) {
                            std::cmp::Ordering::Less => return Some(format!("{} -> {ma} vs absent", show(ta))),
                            std::cmp::Ordering::Greater => return Some(format!("{} -> absent vs {mb}", show(tb))),
                            std::cmp::Ordering::Equal if ma != mb => {
                                return Some(format!("{} -> {ma} vs {mb}", show(ta)))
                            }
                            std::cmp::Ordering::Equal => {
                                ia.next();
                                ib.next();
                            }
                        },
                    }
                }
            }
            _ if self == other => None,
            _ => Some(format!("{self} vs {other}")),
        }
    }

    /// Summary plus the first `k` tuples in lexicographic order.
    pub fn to_json(&self, k: usize) -> Json {
        match self {
            ResultBag::Tuples { vars, bag } => json!({
                "kind": "tuples",
                "vars": vars,
                "cardinality": bag.len(),
                "total_multiplicity": bag.values().sum::<u64>(),
                "tuples": bag.iter().take(k).map(|(t, m)| json!({"tuple": t, "multiplicity": m})).collect::<Vec<_>>(),
            }),
            ResultBag::Count(c) => json!({"kind": "count", "count": c}),
            ResultBag::Min { vars, values, empty } => json!({
                "kind": "min",
                "vars": vars,
                "empty": empty,
                "values": if *empty { Json::Null } else { json!(values) },
            }),
        }
    }

    /// Human summary with up to `k` tuples.
    pub fn summary(&self, k: usize) -> String {
        match self {
            ResultBag::Tuples { vars, bag } => {
                let mut s = format!(
                    "cardinality {} total multiplicity {}\n({})\n",
                    bag.len(),
                    bag.values().sum::<u64>(),
                    vars.join(", ")
                );
                for (t, m) in bag.iter().take(k) {
                    s.push_str(&format!("{} x{m}\n", show(t)));
                }
                if bag.len() > k {
                    s.push_str(&format!("... {} more\n", bag.len() - k));
                }
                s
            }
            other => format!("{other}\n"),
        }
    }
}

fn show(t: &[Value]) -> String {
    let parts: Vec<String> = t.iter().map(|v| format!("{v:?}")).collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for ResultBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResultBag::Tuples { bag, .. } => {
                write!(f, "{{")?;
                for (i, (t, m)) in bag.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{} -> {m}", show(t))?;
                }
                write!(f, "}}")
            }
            ResultBag::Count(c) => write!(f, "count {c}"),
            ResultBag::Min { empty: true, .. } => write!(f, "min empty"),
            ResultBag::Min { vars, values, .. } => {
                let parts: Vec<String> = vars.iter().zip(values).map(|(v, x)| format!("{v}={x}")).collect();
                write!(f, "min ({})", parts.join(", "))
            }
        }
    }
}

impl Serialize for ResultBag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json(usize::MAX).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(rows: &[(&[i64], u64)]) -> ResultBag {
        ResultBag::Tuples {
            vars: vec!["x".into()],
            bag: rows.iter().map(|(t, m)| (t.iter().map(|&v| Value::Int(v)).collect(), *m)).collect(),
        }
    }

    #[test]
    fn differences() {
        let a = bag(&[(&[1], 1), (&[2], 2)]);
        assert_eq!(a.first_difference(&a), None);
        assert_eq!(a.first_difference(&bag(&[(&[1], 1), (&[2], 3)])).unwrap(), "(2) -> 2 vs 3");
        assert_eq!(a.first_difference(&bag(&[(&[2], 2)])).unwrap(), "(1) -> 1 vs absent");
        assert!(ResultBag::Count(1).first_difference(&ResultBag::Count(2)).is_some());
        assert_eq!(a.total_multiplicity(), Some(3));
    }

    #[test]
    fn json_and_summary() {
        let a = bag(&[(&[1], 1), (&[2], 2)]);
        let j = a.to_json(1);
        assert_eq!(j["cardinality"], 2);
        assert_eq!(j["tuples"].as_array().unwrap().len(), 1);
        assert!(a.summary(1).contains("1 more"));
        let m = ResultBag::empty_min(vec!["a".into()]);
        assert!(m.is_empty());
        assert_eq!(m.to_json(0)["values"], Json::Null);
    }
}
