//! Columnar in-memory relations, atomic values and data ingestion.

mod catalog;
mod csv;
pub mod generate;
mod relation;
mod value;

pub use catalog::{Catalog, CatalogEntry};
pub use csv::{load_csv, parse_csv, parse_schema, to_csv, Schema};
pub use generate::gen_adversarial_triangle;
pub use relation::{select, CmpOp, Predicate, Relation, RowOffset};
pub use value::{Column, Kind, Value};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StorageError {
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },
    #[error("relation {relation}: rows not sorted as declared (violated at row {row})")]
    Unsorted { relation: String, row: usize },
    #[error("relation {relation}: duplicate attribute {attr}")]
    DuplicateAttribute { relation: String, attr: String },
    #[error("relation {relation}: unknown attribute {attr}")]
    UnknownAttribute { relation: String, attr: String },
    #[error("relation {relation}: attribute {attr} holds {expected} values, got {found}")]
    KindMismatch { relation: String, attr: String, expected: Kind, found: Kind },
    #[error("malformed relation: {0}")]
    Shape(String),
    #[error("bad schema: {0}")]
    Schema(String),
    #[error("catalog line {line}: {message}")]
    Catalog { line: usize, message: String },
    #[error("{0}")]
    Generator(String),
    #[error("i/o: {0}")]
    Io(String),
}
