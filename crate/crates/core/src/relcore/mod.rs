//! In-memory relational storage and evaluation of join-aggregate queries over
//! masked sub-instances.

mod eval;
mod load;
mod query;
mod types;

pub use eval::{aggregate, evaluate, Combinations, Mask, PreparedQuery};
pub use load::{load_from_schema_file, load_instance, relation_from_csv, RelationDesc, SchemaDesc};
pub use query::{
    AggKind, Aggregate, BoundExpr, BoundOperand, BoundPred, BoundQuery, CmpOp, ColRef, EquiJoin,
    Expr, Operand, Predicate, QuerySpec, RelationRef,
};
pub use types::{
    format_date, parse_date, Column, ColumnType, DatabaseInstance, KeyPart, Relation, TupleId,
    TupleLoc, Value,
};
