use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::{parse_date, ColumnType, DatabaseInstance, Value};
use crate::error::{Error, Result};

/// Declarative join-aggregate query: inner equi-joins, comparison predicates and
/// one aggregate over the join rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub relations: Vec<RelationRef>,
    #[serde(default)]
    pub equijoins: Vec<EquiJoin>,
    #[serde(default)]
    pub predicates: Vec<Predicate>,
    pub aggregate: Aggregate,
}

/// A relation in the FROM list, optionally aliased.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelationRef {
    Name(String),
    Aliased { name: String, alias: String },
}

impl RelationRef {
    pub fn name(&self) -> &str {
        match self {
            RelationRef::Name(n) => n,
            RelationRef::Aliased { name, .. } => name,
        }
    }

    fn alias(&self) -> Option<&str> {
        match self {
            RelationRef::Name(_) => None,
            RelationRef::Aliased { alias, .. } => Some(alias),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquiJoin {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub lhs: Operand,
    pub op: CmpOp,
    pub rhs: Operand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operand {
    Col(String),
    Int(i64),
    Dec(f64),
    Text(String),
    /// `YYYY-MM-DD`
    Date(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<>")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    Sum(Expr),
    Count,
    Exists,
}

/// Arithmetic over join-row columns: `+`, `-`, `*` and constants. No division.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expr {
    Col(String),
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl QuerySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("query serializes")
    }
}

// ---------------------------------------------------------------------------
// Bound form: names resolved to (query position, column index).

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColRef {
    pub pos: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundOperand {
    Col(ColRef),
    Const(Value),
}

impl BoundOperand {
    fn pos(&self) -> Option<usize> {
        match self {
            BoundOperand::Col(c) => Some(c.pos),
            BoundOperand::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPred {
    pub lhs: BoundOperand,
    pub op: CmpOp,
    pub rhs: BoundOperand,
}

impl BoundPred {
    /// Query positions the predicate touches, deduplicated.
    pub fn positions(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.lhs.pos().into_iter().chain(self.rhs.pos()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundExpr {
    Col(ColRef),
    Const(f64),
    Add(Box<BoundExpr>, Box<BoundExpr>),
    Sub(Box<BoundExpr>, Box<BoundExpr>),
    Mul(Box<BoundExpr>, Box<BoundExpr>),
    Neg(Box<BoundExpr>),
}

impl BoundExpr {
    /// Evaluates against one join row; `row_of(pos)` yields the tuple at a query position.
    pub fn eval<'a>(&self, row_of: &impl Fn(usize) -> &'a [Value]) -> f64 {
        match self {
            BoundExpr::Col(c) => row_of(c.pos)[c.col]
                .as_f64()
                .expect("numeric column checked at bind time"),
            BoundExpr::Const(v) => *v,
            BoundExpr::Add(a, b) => a.eval(row_of) + b.eval(row_of),
            BoundExpr::Sub(a, b) => a.eval(row_of) - b.eval(row_of),
            BoundExpr::Mul(a, b) => a.eval(row_of) * b.eval(row_of),
            BoundExpr::Neg(a) => -a.eval(row_of),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggKind {
    Sum,
    Count,
    Exists,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    /// Instance relation index for each query position.
    pub rels: Vec<usize>,
    /// Predicates touching at most one position (constant selections and same-tuple comparisons).
    pub local: Vec<Vec<BoundPred>>,
    /// Equi-join pairs across two distinct positions.
    pub joins: Vec<(ColRef, ColRef)>,
    /// Predicates across two distinct positions.
    pub cross: Vec<BoundPred>,
    pub kind: AggKind,
    pub expr: Option<BoundExpr>,
}

struct Scope<'a> {
    db: &'a DatabaseInstance,
    rels: Vec<usize>,
    names: Vec<(String, Option<String>)>,
}

impl Scope<'_> {
    fn column(&self, s: &str) -> Result<(ColRef, ColumnType)> {
        let (qual, col) = s
            .split_once('.')
            .ok_or_else(|| Error::Query(format!("column reference {s:?} must be relation.column")))?;
        let pos = self
            .names
            .iter()
            .position(|(_, a)| a.as_deref() == Some(qual))
            .or_else(|| self.names.iter().position(|(n, _)| n == qual))
            .ok_or_else(|| Error::Query(format!("{qual:?} is not a relation in the query")))?;
        let rel = self.db.relation(self.rels[pos]);
        let ci = rel
            .column_index(col)
            .ok_or_else(|| Error::Query(format!("relation {} has no column {col:?}", rel.name)))?;
        Ok((ColRef { pos, col: ci }, rel.columns[ci].ty))
    }

    fn operand(&self, o: &Operand) -> Result<(BoundOperand, ColumnType)> {
        Ok(match o {
            Operand::Col(s) => {
                let (c, t) = self.column(s)?;
                (BoundOperand::Col(c), t)
            }
            Operand::Int(v) => (BoundOperand::Const(Value::Int(*v)), ColumnType::Integer),
            Operand::Dec(v) => (BoundOperand::Const(Value::Dec(*v)), ColumnType::Decimal),
            Operand::Text(v) => (BoundOperand::Const(Value::Text(v.clone())), ColumnType::Text),
            Operand::Date(v) => {
                let d = parse_date(v)
                    .ok_or_else(|| Error::Query(format!("bad date constant {v:?}")))?;
                (BoundOperand::Const(Value::Date(d)), ColumnType::Date)
            }
        })
    }

    fn expr(&self, e: &Expr) -> Result<BoundExpr> {
        let bin = |a: &Expr, b: &Expr| -> Result<(Box<BoundExpr>, Box<BoundExpr>)> {
            Ok((Box::new(self.expr(a)?), Box::new(self.expr(b)?)))
        };
        Ok(match e {
            Expr::Col(s) => {
                let (c, t) = self.column(s)?;
                if !t.is_numeric() {
                    return Err(Error::Query(format!(
                        "arithmetic on non-numeric column {s:?} ({t:?})"
                    )));
                }
                BoundExpr::Col(c)
            }
            Expr::Const(v) => BoundExpr::Const(*v),
            Expr::Add(a, b) => {
                let (a, b) = bin(a, b)?;
                BoundExpr::Add(a, b)
            }
            Expr::Sub(a, b) => {
                let (a, b) = bin(a, b)?;
                BoundExpr::Sub(a, b)
            }
            Expr::Mul(a, b) => {
                let (a, b) = bin(a, b)?;
                BoundExpr::Mul(a, b)
            }
            Expr::Neg(a) => BoundExpr::Neg(Box::new(self.expr(a)?)),
        })
    }
}

fn comparable(a: ColumnType, b: ColumnType) -> bool {
    a == b || (a.is_numeric() && b.is_numeric())
}

impl BoundQuery {
    pub fn bind(q: &QuerySpec, db: &DatabaseInstance) -> Result<Self> {
        if q.relations.is_empty() {
            return Err(Error::Query("query lists no relations".into()));
        }
        let mut rels = Vec::with_capacity(q.relations.len());
        let mut names: Vec<(String, Option<String>)> = Vec::new();
        for r in &q.relations {
            let idx = db
                .relation_index(r.name())
                .ok_or_else(|| Error::Query(format!("unknown relation {:?}", r.name())))?;
            if rels.contains(&idx) {
                return Err(Error::Query(format!(
                    "relation {:?} is listed twice (self-joins are not supported)",
                    r.name()
                )));
            }
            rels.push(idx);
            names.push((r.name().to_string(), r.alias().map(str::to_string)));
        }
        let scope = Scope { db, rels, names };
        let n = scope.rels.len();
        let mut local = vec![Vec::new(); n];
        let mut joins = Vec::new();
        let mut cross = Vec::new();

        for j in &q.equijoins {
            let (a, ta) = scope.column(&j.left)?;
            let (b, tb) = scope.column(&j.right)?;
            if !comparable(ta, tb) {
                return Err(Error::Query(format!(
                    "cannot join {} ({ta:?}) with {} ({tb:?})",
                    j.left, j.right
                )));
            }
            if a.pos == b.pos {
                local[a.pos].push(BoundPred {
                    lhs: BoundOperand::Col(a),
                    op: CmpOp::Eq,
                    rhs: BoundOperand::Col(b),
                });
            } else {
                joins.push((a, b));
            }
        }
        for p in &q.predicates {
            let (lhs, tl) = scope.operand(&p.lhs)?;
            let (rhs, tr) = scope.operand(&p.rhs)?;
            if !comparable(tl, tr) {
                return Err(Error::Query(format!(
                    "cannot compare {tl:?} with {tr:?} in {:?} {} {:?}",
                    p.lhs, p.op, p.rhs
                )));
            }
            let bp = BoundPred { lhs, op: p.op, rhs };
            match bp.positions().as_slice() {
                [] => {
                    // constant-only predicate: keep it on position 0
                    local[0].push(bp);
                }
                [p] => local[*p].push(bp),
                _ => cross.push(bp),
            }
        }
        let (kind, expr) = match &q.aggregate {
            Aggregate::Sum(e) => (AggKind::Sum, Some(scope.expr(e)?)),
            Aggregate::Count => (AggKind::Count, None),
            Aggregate::Exists => (AggKind::Exists, None),
        };
        Ok(BoundQuery {
            rels: scope.rels,
            local,
            joins,
            cross,
            kind,
            expr,
        })
    }
}

pub(crate) fn operand_value<'a>(o: &'a BoundOperand, row_of: &impl Fn(usize) -> &'a [Value]) -> &'a Value {
    match o {
        BoundOperand::Col(c) => &row_of(c.pos)[c.col],
        BoundOperand::Const(v) => v,
    }
}

impl BoundPred {
    pub fn holds<'a>(&'a self, row_of: &impl Fn(usize) -> &'a [Value]) -> bool {
        let l = operand_value(&self.lhs, row_of);
        let r = operand_value(&self.rhs, row_of);
        l.compare(r).is_some_and(|o| self.op.holds(o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let q: QuerySpec = serde_json::from_str(
            r#"{
              "relations": [{"name": "customer", "alias": "c"}, "orders"],
              "equijoins": [{"left": "c.custkey", "right": "orders.custkey"}],
              "predicates": [{"lhs": {"col": "c.seg"}, "op": "=", "rhs": {"text": "AUTO"}},
                             {"lhs": {"col": "orders.d"}, "op": ">=", "rhs": {"date": "1998-01-01"}}],
              "aggregate": {"sum": {"mul": [{"col": "orders.p"}, {"sub": [{"const": 1.0}, {"col": "orders.q"}]}]}}
            }"#,
        )
        .unwrap();
        assert_eq!(q.relations.len(), 2);
        assert_eq!(q.predicates[1].op, CmpOp::Ge);
        let back: QuerySpec = serde_json::from_str(&q.to_json()).unwrap();
        assert_eq!(back, q);
        let c: Aggregate = serde_json::from_str(r#""count""#).unwrap();
        assert_eq!(c, Aggregate::Count);
    }
}
