use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::csv::{load_csv, parse_schema, Schema};
use super::{Relation, StorageError};

/// Relations available to a query, by name.
#[derive(Clone, Debug, Default)]
pub struct Catalog {
    relations: BTreeMap<String, Arc<Relation>>,
}

impl Catalog {
    pub fn new() -> Catalog {
        Catalog::default()
    }

    /// Registers `rel` under its own name, replacing any previous entry.
    pub fn insert(&mut self, rel: Relation) {
        self.relations.insert(rel.name().to_string(), Arc::new(rel));
    }

    pub fn insert_arc(&mut self, rel: Arc<Relation>) {
        self.relations.insert(rel.name().to_string(), rel);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Relation>> {
        self.relations.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Parses a catalog file and loads every CSV it names. Relative paths are
    /// resolved against the catalog file's directory.
    pub fn load_file(path: impl AsRef<Path>) -> Result<Catalog, StorageError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| StorageError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut catalog = Catalog::new();
        for entry in CatalogEntry::parse_all(&text)? {
            let csv = if entry.path.is_absolute() { entry.path.clone() } else { base.join(&entry.path) };
            let rel = load_csv(&csv, &entry.name, &entry.schema, entry.sorted_by.clone())?;
            catalog.insert(rel);
        }
        Ok(catalog)
    }
}

impl FromIterator<Relation> for Catalog {
    fn from_iter<I: IntoIterator<Item = Relation>>(iter: I) -> Self {
        let mut c = Catalog::new();
        for r in iter {
            c.insert(r);
        }
        c
    }
}

/// One catalog line: `name path attr:kind,attr:kind [sorted_by=a,b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub path: PathBuf,
    pub schema: Schema,
    pub sorted_by: Option<Vec<String>>,
}

impl CatalogEntry {
    /// Parses all entries; `#` starts a comment, blank lines are ignored and
    /// names must be unique.
    pub fn parse_all(text: &str) -> Result<Vec<CatalogEntry>, StorageError> {
        let mut entries: Vec<CatalogEntry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| StorageError::Catalog { line: i + 1, message };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if !(3..=4).contains(&parts.len()) {
                return Err(err(format!("expected `name path schema [sorted_by=..]`, got {line:?}")));
            }
            let schema = parse_schema(parts[2]).map_err(|e| err(e.to_string()))?;
            let sorted_by = match parts.get(3) {
                None => None,
                Some(p) => {
                    let keys = p
                        .strip_prefix("sorted_by=")
                        .ok_or_else(|| err(format!("expected sorted_by=..., got {p:?}")))?;
                    Some(keys.split(',').map(|k| k.trim().to_string()).collect())
                }
            };
            if entries.iter().any(|e| e.name == parts[0]) {
                return Err(err(format!("duplicate relation name {}", parts[0])));
            }
            entries.push(CatalogEntry {
                name: parts[0].to_string(),
                path: PathBuf::from(parts[1]),
                schema,
                sorted_by,
            });
        }
        Ok(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::Kind;

    #[test]
    fn parse_entries() {
        let text = "# clover\nR r.csv x:int,a:int sorted_by=x\nS s.csv x:int,b:str\n\n";
        let e = CatalogEntry::parse_all(text).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].sorted_by, Some(vec!["x".to_string()]));
        assert_eq!(e[1].schema[1], ("b".to_string(), Kind::Str));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = CatalogEntry::parse_all("R a.csv x:int\nR b.csv x:int").unwrap_err();
        assert!(matches!(err, StorageError::Catalog { line: 2, .. }));
    }

    #[test]
    fn load_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("r.csv"), "1,10\n2,20\n").unwrap();
        std::fs::write(dir.path().join("cat.txt"), "R r.csv x:int,a:int sorted_by=x\n").unwrap();
        let c = Catalog::load_file(dir.path().join("cat.txt")).unwrap();
        assert_eq!(c.get("R").unwrap().len(), 2);
        std::fs::write(dir.path().join("bad.txt"), "R nope.csv x:int\n").unwrap();
        assert!(Catalog::load_file(dir.path().join("bad.txt")).is_err());
    }
}
