use std::cmp::Ordering;
use std::collections::HashSet;

use super::value::{Column, Kind, Value};
use super::StorageError;

/// Zero-based index of a row inside a relation.
pub type RowOffset = u32;

/// A named, immutable, columnar table.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    name: String,
    attrs: Vec<String>,
    columns: Vec<Column>,
    len: usize,
    sorted_by: Option<Vec<String>>,
    intermediate: bool,
}

impl Relation {
    /// Creates a relation, checking the column-length, attribute-uniqueness and
    /// (if given) sortedness invariants.
    pub fn new(
        name: impl Into<String>,
        attrs: Vec<String>,
        columns: Vec<Column>,
        sorted_by: Option<Vec<String>>,
    ) -> Result<Relation, StorageError> {
        let name = name.into();
        if attrs.len() != columns.len() {
            return Err(StorageError::Shape(format!(
                "relation {name}: {} attributes but {} columns",
                attrs.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for a in &attrs {
            if !seen.insert(a.as_str()) {
                return Err(StorageError::DuplicateAttribute { relation: name, attr: a.clone() });
            }
        }
        let len = columns.first().map_or(0, Column::len);
        if let Some(c) = columns.iter().position(|c| c.len() != len) {
            return Err(StorageError::Shape(format!(
                "relation {name}: column {} has {} rows, expected {len}",
                attrs[c],
                columns[c].len()
            )));
        }
        if u32::try_from(len).is_err() {
            return Err(StorageError::Shape(format!("relation {name}: too many rows ({len})")));
        }
        let rel = Relation { name, attrs, columns, len, sorted_by: None, intermediate: false };
        match sorted_by {
            Some(keys) => rel.with_sorted_by(keys),
            None => Ok(rel),
        }
    }

    /// Builds a relation from row tuples; every row must match `schema`.
    pub fn from_rows(
        name: impl Into<String>,
        schema: &[(&str, Kind)],
        rows: impl IntoIterator<Item = Vec<Value>>,
    ) -> Result<Relation, StorageError> {
        let name = name.into();
        let mut columns: Vec<Column> = schema.iter().map(|(_, k)| Column::empty(*k)).collect();
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != schema.len() {
                return Err(StorageError::Parse {
                    row: r,
                    column: row.len(),
                    message: format!("expected {} fields, got {}", schema.len(), row.len()),
                });
            }
            for (c, v) in row.into_iter().enumerate() {
                columns[c].push(v).map_err(|v| StorageError::KindMismatch {
                    relation: name.clone(),
                    attr: schema[c].0.to_string(),
                    expected: schema[c].1,
                    found: v.kind(),
                })?;
            }
        }
        let attrs = schema.iter().map(|(a, _)| a.to_string()).collect();
        Relation::new(name, attrs, columns, None)
    }

    /// Convenience constructor for all-integer relations.
    pub fn from_int_rows(name: impl Into<String>, attrs: &[&str], rows: &[Vec<i64>]) -> Relation {
        let schema: Vec<(&str, Kind)> = attrs.iter().map(|a| (*a, Kind::Int)).collect();
        Relation::from_rows(name, &schema, rows.iter().map(|r| r.iter().map(|&v| Value::Int(v)).collect()))
            .expect("well-formed integer rows")
    }

    /// Attaches sortedness metadata after verifying the rows really are
    /// non-decreasing in lexicographic order over `keys`.
    pub fn with_sorted_by(mut self, keys: Vec<String>) -> Result<Relation, StorageError> {
        let cols = keys
            .iter()
            .map(|k| self.attr_index(k).ok_or_else(|| self.unknown(k)))
            .collect::<Result<Vec<_>, _>>()?;
        for row in 1..self.len {
            if self.cmp_rows_on(&cols, row - 1, row) == Ordering::Greater {
                return Err(StorageError::Unsorted { relation: self.name.clone(), row });
            }
        }
        self.sorted_by = Some(keys);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn column_by_name(&self, attr: &str) -> Option<&Column> {
        self.attr_index(attr).map(|i| &self.columns[i])
    }

    pub fn attr_index(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr)
    }

    pub fn kind(&self, idx: usize) -> Kind {
        self.columns[idx].kind()
    }

    pub fn sorted_by(&self) -> Option<&[String]> {
        self.sorted_by.as_deref()
    }

    /// True when the relation was produced by a join rather than loaded.
    pub fn is_intermediate(&self) -> bool {
        self.intermediate
    }

    /// Marks the relation as a materialized intermediate result. Any sortedness
    /// metadata is dropped: intermediates are never assumed sorted.
    pub fn into_intermediate(mut self) -> Relation {
        self.intermediate = true;
        self.sorted_by = None;
        self
    }

    /// True when `sorted_by` starts with `keys`.
    pub fn is_sorted_on(&self, keys: &[String]) -> bool {
        self.sorted_by.as_ref().is_some_and(|s| s.len() >= keys.len() && s[..keys.len()] == *keys)
    }

    pub fn value(&self, row: usize, col: usize) -> Value {
        self.columns[col].get(row)
    }

    pub fn row(&self, row: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.get(row)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<Value>> + '_ {
        (0..self.len).map(|r| self.row(r))
    }

    fn cmp_rows_on(&self, cols: &[usize], a: usize, b: usize) -> Ordering {
        for &c in cols {
            match self.columns[c].cmp_rows(a, b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// A copy of this relation with rows stably sorted by `keys`, carrying the
    /// matching `sorted_by` metadata.
    pub fn sorted_copy(&self, keys: &[String]) -> Result<Relation, StorageError> {
        let cols = keys
            .iter()
            .map(|k| self.attr_index(k).ok_or_else(|| self.unknown(k)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut perm: Vec<usize> = (0..self.len).collect();
        perm.sort_by(|&a, &b| self.cmp_rows_on(&cols, a, b));
        let columns = self.columns.iter().map(|c| c.gather(&perm)).collect();
        Ok(Relation {
            name: self.name.clone(),
            attrs: self.attrs.clone(),
            columns,
            len: self.len,
            sorted_by: Some(keys.to_vec()),
            intermediate: self.intermediate,
        })
    }

    /// Keeps only the rows at `rows` (in that order). Sortedness metadata is
    /// kept when `rows` is ascending, since a filtered sorted sequence stays sorted.
    pub fn gather(&self, rows: &[usize]) -> Relation {
        let ascending = rows.windows(2).all(|w| w[0] < w[1]);
        Relation {
            name: self.name.clone(),
            attrs: self.attrs.clone(),
            columns: self.columns.iter().map(|c| c.gather(rows)).collect(),
            len: rows.len(),
            sorted_by: if ascending { self.sorted_by.clone() } else { None },
            intermediate: self.intermediate,
        }
    }

    /// Same data under another name.
    pub fn renamed(&self, name: impl Into<String>) -> Relation {
        Relation { name: name.into(), ..self.clone() }
    }

    fn unknown(&self, attr: &str) -> StorageError {
        StorageError::UnknownAttribute { relation: self.name.clone(), attr: attr.to_string() }
    }
}

/// Comparison operator for a selection predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

/// `attr <op> value`.
#[derive(Clone, Debug, PartialEq)]
pub struct Predicate {
    pub op: CmpOp,
    pub value: Value,
}

impl Predicate {
    pub fn new(op: CmpOp, value: impl Into<Value>) -> Predicate {
        Predicate { op, value: value.into() }
    }

    pub fn eq(value: impl Into<Value>) -> Predicate {
        Predicate::new(CmpOp::Eq, value)
    }
}

/// Filters `rel` to the rows where `attr <op> value` holds, preserving row order
/// and sortedness metadata.
pub fn select(rel: &Relation, attr: &str, pred: &Predicate) -> Result<Relation, StorageError> {
    let col = rel.attr_index(attr).ok_or_else(|| rel.unknown(attr))?;
    let column = rel.column(col);
    if column.kind() != pred.value.kind() {
        return Err(StorageError::KindMismatch {
            relation: rel.name.clone(),
            attr: attr.to_string(),
            expected: column.kind(),
            found: pred.value.kind(),
        });
    }
    let rows: Vec<usize> = match (column, &pred.value) {
        (Column::Int(v), Value::Int(p)) => {
            (0..v.len()).filter(|&r| pred.op.holds(v[r].cmp(p))).collect()
        }
        (Column::Str(v), Value::Str(p)) => {
            (0..v.len()).filter(|&r| pred.op.holds(v[r].as_ref().cmp(p.as_ref()))).collect()
        }
        _ => unreachable!("kinds checked above"),
    };
    Ok(rel.gather(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(rel: &Relation) -> Vec<i64> {
        rel.column(0).iter().map(|v| v.as_int().unwrap()).collect()
    }

    #[test]
    fn select_single_match() {
        let r = Relation::from_int_rows("R", &["x"], &[vec![1], vec![2], vec![3]]);
        let out = select(&r, "x", &Predicate::eq(2)).unwrap();
        assert_eq!(xs(&out), vec![2]);
    }

    #[test]
    fn select_nothing_is_empty() {
        let r = Relation::from_int_rows("R", &["x"], &[vec![1], vec![2]]);
        let out = select(&r, "x", &Predicate::eq(9)).unwrap();
        assert!(out.is_empty());
        assert_eq!(out.attrs(), r.attrs());
    }

    #[test]
    fn select_keeps_duplicates_and_order() {
        let r = Relation::from_int_rows("R", &["x", "a"], &[vec![1, 10], vec![1, 11], vec![2, 12]]);
        let out = select(&r, "x", &Predicate::eq(1)).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out.row(0), vec![Value::Int(1), Value::Int(10)]);
        assert_eq!(out.row(1), vec![Value::Int(1), Value::Int(11)]);
    }

    #[test]
    fn select_preserves_sorted_by() {
        let r = Relation::from_int_rows("R", &["x"], &[vec![1], vec![2], vec![3], vec![4]])
            .with_sorted_by(vec!["x".into()])
            .unwrap();
        let out = select(&r, "x", &Predicate::new(CmpOp::Ne, 2)).unwrap();
        assert_eq!(out.sorted_by(), Some(&["x".to_string()][..]));
    }

    #[test]
    fn select_errors() {
        let r = Relation::from_int_rows("R", &["x"], &[vec![1]]);
        assert!(matches!(select(&r, "y", &Predicate::eq(1)), Err(StorageError::UnknownAttribute { .. })));
        assert!(matches!(select(&r, "x", &Predicate::eq("a")), Err(StorageError::KindMismatch { .. })));
    }

    #[test]
    fn range_predicates() {
        let r = Relation::from_int_rows("R", &["x"], &[vec![1], vec![2], vec![3]]);
        assert_eq!(xs(&select(&r, "x", &Predicate::new(CmpOp::Lt, 3)).unwrap()), vec![1, 2]);
        assert_eq!(xs(&select(&r, "x", &Predicate::new(CmpOp::Ge, 2)).unwrap()), vec![2, 3]);
        assert_eq!(xs(&select(&r, "x", &Predicate::new(CmpOp::Gt, 3)).unwrap()), Vec::<i64>::new());
        assert_eq!(xs(&select(&r, "x", &Predicate::new(CmpOp::Le, 1)).unwrap()), vec![1]);
    }

    #[test]
    fn duplicate_attrs_rejected() {
        let err = Relation::new(
            "R",
            vec!["x".into(), "x".into()],
            vec![Column::Int(vec![]), Column::Int(vec![])],
            None,
        );
        assert!(matches!(err, Err(StorageError::DuplicateAttribute { .. })));
    }

    #[test]
    fn sortedness_checked() {
        let r = Relation::from_int_rows("R", &["x", "y"], &[vec![1, 5], vec![1, 3], vec![2, 0]]);
        assert!(r.clone().with_sorted_by(vec!["x".into()]).is_ok());
        let err = r.clone().with_sorted_by(vec!["x".into(), "y".into()]).unwrap_err();
        assert!(matches!(err, StorageError::Unsorted { row: 1, .. }));
        let s = r.sorted_copy(&["x".into(), "y".into()]).unwrap();
        assert_eq!(s.row(0), vec![Value::Int(1), Value::Int(3)]);
        assert!(s.is_sorted_on(&["x".into()]));
        assert!(!s.is_sorted_on(&["y".into()]));
    }

    #[test]
    fn intermediates_drop_sortedness() {
        let r = Relation::from_int_rows("R", &["x"], &[vec![1]]).with_sorted_by(vec!["x".into()]).unwrap();
        let i = r.into_intermediate();
        assert!(i.is_intermediate());
        assert!(i.sorted_by().is_none());
    }
}
