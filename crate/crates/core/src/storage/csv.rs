use std::fs;
use std::path::Path;

use super::value::{Column, Kind, Value};
use super::{Relation, StorageError};

/// A declared column: attribute name and value kind.
pub type Schema = Vec<(String, Kind)>;

/// Parses a schema of the form `x:int,a:str`.
pub fn parse_schema(text: &str) -> Result<Schema, StorageError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|field| {
            let (name, kind) = field
                .split_once(':')
                .ok_or_else(|| StorageError::Schema(format!("expected attr:kind, got {field:?}")))?;
            let kind = Kind::parse(kind)
                .ok_or_else(|| StorageError::Schema(format!("unknown kind {kind:?} for {name}")))?;
            Ok((name.trim().to_string(), kind))
        })
        .collect()
}

/// Reads a headerless CSV file with a declared schema.
pub fn load_csv(
    path: impl AsRef<Path>,
    name: &str,
    schema: &[(String, Kind)],
    sorted_by: Option<Vec<String>>,
) -> Result<Relation, StorageError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| StorageError::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text, name, schema, sorted_by)
}

/// Parses CSV text: comma separated, no quoting, one row per line. Blank lines
/// are skipped. Rows are numbered from zero in error reports.
pub fn parse_csv(
    text: &str,
    name: &str,
    schema: &[(String, Kind)],
    sorted_by: Option<Vec<String>>,
) -> Result<Relation, StorageError> {
    let mut columns: Vec<Column> = schema.iter().map(|(_, k)| Column::empty(*k)).collect();
    let lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).filter(|l| !l.is_empty());
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != schema.len() {
            return Err(StorageError::Parse {
                row,
                column: fields.len().min(schema.len()),
                message: format!("expected {} fields, got {}", schema.len(), fields.len()),
            });
        }
        for (col, (field, (_, kind))) in fields.iter().zip(schema).enumerate() {
            let v = Value::parse_as(field, *kind)
                .map_err(|message| StorageError::Parse { row, column: col, message })?;
            columns[col].push(v).expect("parsed with the column kind");
        }
    }
    let attrs = schema.iter().map(|(a, _)| a.clone()).collect();
    Relation::new(name, attrs, columns, sorted_by)
}

/// Renders a relation as headerless CSV (the inverse of [`parse_csv`]).
pub fn to_csv(rel: &Relation) -> String {
    let mut out = String::new();
    for r in 0..rel.len() {
        for c in 0..rel.arity() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&rel.value(r, c).to_string());
        }
        out.push('\n');
    }
    out
}
