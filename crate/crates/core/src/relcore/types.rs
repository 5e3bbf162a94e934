use std::cmp::Ordering;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Globally unique tuple identifier. Assigned relation-major in row order at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TupleId(pub u32);

impl fmt::Display for TupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Decimal,
    Text,
    /// Stored as days since 1970-01-01.
    Date,
}

impl ColumnType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Integer | ColumnType::Decimal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Dec(f64),
    Text(String),
    Date(i32),
}

const EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(1970, 1, 1) {
    Some(d) => d,
    None => panic!("epoch"),
};

/// Parses `YYYY-MM-DD` into days since the Unix epoch.
pub fn parse_date(s: &str) -> Option<i32> {
    let d = NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()?;
    Some((d - EPOCH).num_days() as i32)
}

pub fn format_date(days: i32) -> String {
    (EPOCH + chrono::Duration::days(days as i64))
        .format("%Y-%m-%d")
        .to_string()
}

impl Value {
    pub fn parse(ty: ColumnType, raw: &str) -> std::result::Result<Value, String> {
        let s = raw.trim();
        match ty {
            ColumnType::Integer => s
                .parse::<i64>()
                .map(Value::Int)
                .map_err(|_| format!("type mismatch: {s:?} is not an integer")),
            ColumnType::Decimal => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Value::Dec(v)),
                _ => Err(format!("type mismatch: {s:?} is not a decimal")),
            },
            ColumnType::Text => Ok(Value::Text(raw.to_string())),
            ColumnType::Date => parse_date(s)
                .map(Value::Date)
                .ok_or_else(|| format!("type mismatch: {s:?} is not a YYYY-MM-DD date")),
        }
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            Value::Int(_) => ColumnType::Integer,
            Value::Dec(_) => ColumnType::Decimal,
            Value::Text(_) => ColumnType::Text,
            Value::Date(_) => ColumnType::Date,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Dec(v) => Some(*v),
            _ => None,
        }
    }

    /// Ordering between comparable values. Integers and decimals compare numerically,
    /// dates with dates, text with text. Anything else is incomparable.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Date(a), Value::Date(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (a, b) => a.as_f64()?.partial_cmp(&b.as_f64()?),
        }
    }

    /// Hashable join key. Integral decimals collapse onto integers so `1 = 1.0` joins.
    pub fn key(&self) -> KeyPart {
        match self {
            Value::Int(v) => KeyPart::Int(*v),
            Value::Date(v) => KeyPart::Int(*v as i64),
            Value::Dec(v) => {
                if v.fract() == 0.0 && v.abs() < 9.0e15 {
                    KeyPart::Int(*v as i64)
                } else {
                    KeyPart::Bits(v.to_bits())
                }
            }
            Value::Text(s) => KeyPart::Text(s.clone()),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Dec(v) => v.to_string(),
            Value::Text(s) => s.clone(),
            Value::Date(d) => format_date(*d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum KeyPart {
    Int(i64),
    Bits(u64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

#[derive(Debug, Clone)]
pub struct Relation {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
    /// Whether this relation's tuples may be attributed (endogenous candidates).
    pub endogenous: bool,
    /// Id of the first row; row `i` has id `first_id + i`.
    pub first_id: u32,
}

impl Relation {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn id_of(&self, row: usize) -> TupleId {
        TupleId(self.first_id + row as u32)
    }

    pub fn ids(&self) -> impl Iterator<Item = TupleId> + '_ {
        (0..self.rows.len()).map(move |r| self.id_of(r))
    }

    pub fn contains(&self, id: TupleId) -> bool {
        id.0 >= self.first_id && ((id.0 - self.first_id) as usize) < self.rows.len()
    }
}

/// An immutable, loaded database instance.
#[derive(Debug, Clone)]
pub struct DatabaseInstance {
    relations: Vec<Relation>,
    total: u32,
}

/// Relation position plus row index of a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleLoc {
    pub relation: usize,
    pub row: usize,
}

impl DatabaseInstance {
    /// Builds an instance from relations given in order; ids are (re)assigned relation-major.
    pub fn new(mut relations: Vec<Relation>) -> Result<Self> {
        let mut next = 0u32;
        for (i, rel) in relations.iter_mut().enumerate() {
            if rel.name.is_empty() {
                return Err(Error::Schema(format!("relation #{i} has an empty name")));
            }
            for (r, row) in rel.rows.iter().enumerate() {
                if row.len() != rel.columns.len() {
                    return Err(Error::Schema(format!(
                        "relation {} row {r} has arity {} but {} columns are declared",
                        rel.name,
                        row.len(),
                        rel.columns.len()
                    )));
                }
                for (c, (v, col)) in row.iter().zip(&rel.columns).enumerate() {
                    if v.column_type() != col.ty {
                        return Err(Error::TypeMismatch {
                            relation: rel.name.clone(),
                            column: rel.columns[c].name.clone(),
                            row: r,
                            detail: format!("value {v:?} is not {:?}", col.ty),
                        });
                    }
                }
            }
            rel.first_id = next;
            next = next
                .checked_add(rel.rows.len() as u32)
                .ok_or_else(|| Error::Schema("too many tuples".into()))?;
        }
        for (i, a) in relations.iter().enumerate() {
            if relations[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Schema(format!("duplicate relation name {:?}", a.name)));
            }
        }
        Ok(DatabaseInstance {
            relations,
            total: next,
        })
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, idx: usize) -> &Relation {
        &self.relations[idx]
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn tuple_count(&self) -> usize {
        self.total as usize
    }

    pub fn locate(&self, id: TupleId) -> Option<TupleLoc> {
        if id.0 >= self.total {
            return None;
        }
        // relations are contiguous and ordered by first_id
        let relation = self
            .relations
            .partition_point(|r| r.first_id + r.rows.len() as u32 <= id.0);
        let rel = self.relations.get(relation)?;
        Some(TupleLoc {
            relation,
            row: (id.0 - rel.first_id) as usize,
        })
    }

    pub fn tuple(&self, id: TupleId) -> Option<&[Value]> {
        let loc = self.locate(id)?;
        Some(&self.relations[loc.relation].rows[loc.row])
    }

    /// Resolves `"name#row"` or a bare numeric id.
    pub fn resolve_ref(&self, s: &str) -> Result<TupleId> {
        if let Some((name, row)) = s.split_once('#') {
            let rel = self
                .relation_index(name)
                .ok_or_else(|| Error::Domain(format!("unknown relation {name:?}")))?;
            let row: usize = row
                .parse()
                .map_err(|_| Error::Domain(format!("bad row index in {s:?}")))?;
            let r = &self.relations[rel];
            if row >= r.len() {
                return Err(Error::Domain(format!("{s:?} is out of range")));
            }
            return Ok(r.id_of(row));
        }
        let id: u32 = s
            .parse()
            .map_err(|_| Error::Domain(format!("bad tuple reference {s:?}")))?;
        if id >= self.total {
            return Err(Error::Domain(format!("tuple id {id} does not exist")));
        }
        Ok(TupleId(id))
    }

    /// Human-readable label `relation#row`.
    pub fn label(&self, id: TupleId) -> String {
        match self.locate(id) {
            Some(loc) => format!("{}#{}", self.relations[loc.relation].name, loc.row),
            None => format!("?{id}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(name: &str, n: usize) -> Relation {
        Relation {
            name: name.into(),
            columns: vec![Column {
                name: "x".into(),
                ty: ColumnType::Integer,
            }],
            rows: (0..n).map(|i| vec![Value::Int(i as i64)]).collect(),
            endogenous: true,
            first_id: 0,
        }
    }

    #[test]
    fn ids_are_relation_major() {
        let db = DatabaseInstance::new(vec![rel("a", 3), rel("b", 0), rel("c", 2)]).unwrap();
        assert_eq!(db.tuple_count(), 5);
        assert_eq!(db.locate(TupleId(0)), Some(TupleLoc { relation: 0, row: 0 }));
        assert_eq!(db.locate(TupleId(3)), Some(TupleLoc { relation: 2, row: 0 }));
        assert_eq!(db.locate(TupleId(4)), Some(TupleLoc { relation: 2, row: 1 }));
        assert_eq!(db.locate(TupleId(5)), None);
        assert_eq!(db.resolve_ref("c#1").unwrap(), TupleId(4));
        assert_eq!(db.label(TupleId(2)), "a#2");
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(matches!(
            DatabaseInstance::new(vec![rel("a", 1), rel("a", 1)]),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn date_roundtrip() {
        let d = parse_date("1998-04-21").unwrap();
        assert_eq!(format_date(d), "1998-04-21");
        assert!(parse_date("1997-12-21").unwrap() < parse_date("1998-03-25").unwrap());
        assert_eq!(parse_date("1970-01-01"), Some(0));
    }

    #[test]
    fn mixed_numeric_compare_and_keys() {
        assert_eq!(Value::Int(2).compare(&Value::Dec(2.5)), Some(Ordering::Less));
        assert_eq!(Value::Text("a".into()).compare(&Value::Int(1)), None);
        assert_eq!(Value::Dec(3.0).key(), Value::Int(3).key());
    }

    #[test]
    fn bad_decimal_is_type_mismatch() {
        let e = Value::parse(ColumnType::Decimal, "abc").unwrap_err();
        assert!(e.contains("type mismatch"));
    }
}
