use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::types::{Column, DatabaseInstance, Relation, Value};
use crate::error::{Error, Result};

/// JSON schema description: relations, their columns and types, and whether
/// each relation is an endogenous candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaDesc {
    pub relations: Vec<RelationDesc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationDesc {
    pub name: String,
    pub columns: Vec<Column>,
    #[serde(default = "default_true")]
    pub endogenous: bool,
    /// Table file, relative to the schema file. Defaults to `<name>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

fn default_true() -> bool {
    true
}

impl SchemaDesc {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Loads the schema file and the table files it references.
pub fn load_from_schema_file(path: impl AsRef<Path>) -> Result<DatabaseInstance> {
    let path = path.as_ref();
    let schema = SchemaDesc::from_file(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let files: Vec<PathBuf> = schema
        .relations
        .iter()
        .map(|r| dir.join(r.file.clone().unwrap_or_else(|| format!("{}.csv", r.name))))
        .collect();
    load_instance(&schema, &files)
}

/// Loads one comma-delimited file per relation. Files are matched to relations
/// by file stem, so their order does not matter.
pub fn load_instance(schema: &SchemaDesc, table_files: &[PathBuf]) -> Result<DatabaseInstance> {
    for (i, r) in schema.relations.iter().enumerate() {
        if schema.relations[..i].iter().any(|o| o.name == r.name) {
            return Err(Error::Schema(format!("duplicate relation name {:?}", r.name)));
        }
    }
    if table_files.len() != schema.relations.len() {
        return Err(Error::Schema(format!(
            "schema lists {} relations but {} table files were given",
            schema.relations.len(),
            table_files.len()
        )));
    }
    let mut relations = Vec::with_capacity(schema.relations.len());
    for desc in &schema.relations {
        let file = table_files
            .iter()
            .find(|p| p.file_stem().and_then(|s| s.to_str()) == Some(desc.name.as_str()))
            .ok_or_else(|| {
                Error::Schema(format!("no table file for relation {:?}", desc.name))
            })?;
        let rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(file)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(file, io),
                other => Error::Schema(format!("{}: {other:?}", file.display())),
            })?;
        relations.push(read_relation(desc, rdr)?);
    }
    DatabaseInstance::new(relations)
}

/// Parses one relation from CSV text (header row first).
pub fn relation_from_csv(desc: &RelationDesc, text: &str) -> Result<Relation> {
    let rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    read_relation(desc, rdr)
}

fn read_relation<R: std::io::Read>(desc: &RelationDesc, mut rdr: csv::Reader<R>) -> Result<Relation> {
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() != desc.columns.len() {
        return Err(Error::Schema(format!(
            "relation {:?}: file has {} columns, schema declares {}",
            desc.name,
            header.len(),
            desc.columns.len()
        )));
    }
    // position in file of each declared column
    let mut order = Vec::with_capacity(desc.columns.len());
    for col in &desc.columns {
        let pos = header.iter().position(|h| *h == col.name).ok_or_else(|| {
            Error::Schema(format!(
                "relation {:?}: column {:?} missing from file header",
                desc.name, col.name
            ))
        })?;
        order.push(pos);
    }
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Schema(format!(
                "relation {:?}: row {r} has {} cells, expected {}",
                desc.name,
                rec.len(),
                header.len()
            )));
        }
        let mut row = Vec::with_capacity(order.len());
        for (col, &pos) in desc.columns.iter().zip(&order) {
            let v = Value::parse(col.ty, &rec[pos]).map_err(|detail| Error::TypeMismatch {
                relation: desc.name.clone(),
                column: col.name.clone(),
                row: r,
                detail,
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Relation {
        name: desc.name.clone(),
        columns: desc.columns.clone(),
        rows,
        endogenous: desc.endogenous,
        first_id: 0,
    })
}
