use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// The kind of an atomic value. Every column holds values of exactly one kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Int,
    Str,
}

impl Kind {
    pub fn parse(s: &str) -> Option<Kind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "int" | "i64" | "integer" => Some(Kind::Int),
            "str" | "string" | "text" => Some(Kind::Str),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Int => f.write_str("int"),
            Kind::Str => f.write_str("str"),
        }
    }
}

/// An atomic attribute value.
///
/// Values of the same kind are totally ordered. The derived order between kinds
/// (every `Int` sorts before every `Str`) only exists so that `Value` can be a
/// map key; mixed-kind comparisons are rejected when relations and queries are
/// validated, never relied upon.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Str(Arc<str>),
}

impl Value {
    pub fn kind(&self) -> Kind {
        match self {
            Value::Int(_) => Kind::Int,
            Value::Str(_) => Kind::Str,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Str(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Int(_) => None,
            Value::Str(s) => Some(s),
        }
    }

    /// Compares two values of the same kind; `None` for mixed kinds.
    pub fn checked_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    /// Parses a CSV field as a value of the given kind.
    pub fn parse_as(field: &str, kind: Kind) -> Result<Value, String> {
        match kind {
            Kind::Int => field
                .trim()
                .parse::<i64>()
                .map(Value::Int)
                .map_err(|e| format!("cannot parse {field:?} as int: {e}")),
            Kind::Str => Ok(Value::Str(Arc::from(field))),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(Arc::from(v))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            Value::Str(v) => s.serialize_str(v),
        }
    }
}

/// A column of values of a single kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Int(Vec<i64>),
    Str(Vec<Arc<str>>),
}

impl Column {
    pub fn empty(kind: Kind) -> Column {
        match kind {
            Kind::Int => Column::Int(Vec::new()),
            Kind::Str => Column::Str(Vec::new()),
        }
    }

    pub fn with_capacity(kind: Kind, cap: usize) -> Column {
        match kind {
            Kind::Int => Column::Int(Vec::with_capacity(cap)),
            Kind::Str => Column::Str(Vec::with_capacity(cap)),
        }
    }

    /// Builds a column from values, failing on the first value of another kind.
    pub fn from_values(kind: Kind, values: impl IntoIterator<Item = Value>) -> Result<Column, usize> {
        let mut col = Column::empty(kind);
        for (i, v) in values.into_iter().enumerate() {
            col.push(v).map_err(|_| i)?;
        }
        Ok(col)
    }

    pub fn kind(&self) -> Kind {
        match self {
            Column::Int(_) => Kind::Int,
            Column::Str(_) => Kind::Str,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Int(v) => v.len(),
            Column::Str(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, row: usize) -> Value {
        match self {
            Column::Int(v) => Value::Int(v[row]),
            Column::Str(v) => Value::Str(v[row].clone()),
        }
    }

    /// Compares the values at two rows of this column.
    #[inline]
    pub fn cmp_rows(&self, a: usize, b: usize) -> Ordering {
        match self {
            Column::Int(v) => v[a].cmp(&v[b]),
            Column::Str(v) => v[a].cmp(&v[b]),
        }
    }

    pub fn push(&mut self, value: Value) -> Result<(), Value> {
        match (self, value) {
            (Column::Int(c), Value::Int(v)) => c.push(v),
            (Column::Str(c), Value::Str(v)) => c.push(v),
            (_, v) => return Err(v),
        }
        Ok(())
    }

    /// A new column holding the rows at `rows`, in that order.
    pub fn gather(&self, rows: &[usize]) -> Column {
        match self {
            Column::Int(v) => Column::Int(rows.iter().map(|&r| v[r]).collect()),
            Column::Str(v) => Column::Str(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}
