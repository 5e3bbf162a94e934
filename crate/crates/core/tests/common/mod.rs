//! Shared fixtures and independent reference implementations for the
//! integration tests. Nothing here calls the crate's evaluator.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use relshap::harness::{gen_instance, preset, GenSpec, GeneratedInstance, Preset, Scale};
use relshap::relcore::{
    Aggregate, CmpOp, DatabaseInstance, Expr, Operand, QuerySpec, TupleId, Value,
};

pub fn load(g: &GeneratedInstance) -> (Arc<DatabaseInstance>, QuerySpec) {
    (Arc::new(g.instance().unwrap()), g.query.clone())
}

pub fn example1() -> (Arc<DatabaseInstance>, QuerySpec) {
    load(&preset(Preset::Example1))
}

pub fn example1_const() -> (Arc<DatabaseInstance>, QuerySpec) {
    load(&preset(Preset::Example1Const))
}

pub fn star(seed: u64, fact: usize, orders: usize, customers: usize, skew: f64) -> (Arc<DatabaseInstance>, QuerySpec) {
    load(&gen_instance(&GenSpec::new(seed, Scale { fact, orders, customers }, skew)).unwrap())
}

/// Ids in the `example1` preset: lineitem 0..8, customer 8..10, orders 10..13.
pub const L1: TupleId = TupleId(0);
pub const L2: TupleId = TupleId(1);
pub const L3: TupleId = TupleId(2);
pub const L4: TupleId = TupleId(3);
pub const C1: TupleId = TupleId(8);
pub const O1: TupleId = TupleId(10);

// --- nested-loop reference evaluator -------------------------------------

struct Resolved<'a> {
    db: &'a DatabaseInstance,
    rels: Vec<usize>,
    aliases: Vec<String>,
}

impl<'a> Resolved<'a> {
    fn new(db: &'a DatabaseInstance, q: &QuerySpec) -> Self {
        let rels = q
            .relations
            .iter()
            .map(|r| db.relation_index(r.name()).expect("relation exists"))
            .collect();
        let aliases = q
            .relations
            .iter()
            .map(|r| match r {
                relshap::relcore::RelationRef::Name(n) => n.clone(),
                relshap::relcore::RelationRef::Aliased { alias, .. } => alias.clone(),
            })
            .collect();
        Resolved { db, rels, aliases }
    }

    fn column(&self, name: &str, rows: &[usize]) -> Value {
        let (a, c) = name.split_once('.').expect("qualified column");
        let pos = self
            .aliases
            .iter()
            .position(|x| x == a)
            .or_else(|| {
                self.rels
                    .iter()
                    .position(|&r| self.db.relation(r).name == a)
            })
            .expect("known alias");
        let rel = self.db.relation(self.rels[pos]);
        let ci = rel.columns.iter().position(|x| x.name == c).expect("known column");
        rel.rows[rows[pos]][ci].clone()
    }
}

fn num(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(*i as f64),
        Value::Dec(d) => Some(*d),
        _ => None,
    }
}

fn cmp(a: &Value, b: &Value) -> std::cmp::Ordering {
    match (a, b) {
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::Date(x), Value::Date(y)) => x.cmp(y),
        _ => num(a).unwrap().partial_cmp(&num(b).unwrap()).unwrap(),
    }
}

fn operand(r: &Resolved, o: &Operand, rows: &[usize]) -> Value {
    match o {
        Operand::Col(c) => r.column(c, rows),
        Operand::Int(i) => Value::Int(*i),
        Operand::Dec(d) => Value::Dec(*d),
        Operand::Text(s) => Value::Text(s.clone()),
        Operand::Date(s) => {
            let d = chrono_days(s);
            Value::Date(d)
        }
    }
}

/// Days since 1970-01-01 for `YYYY-MM-DD`, by civil-calendar arithmetic.
pub fn chrono_days(s: &str) -> i32 {
    let p: Vec<i64> = s.split('-').map(|x| x.parse().unwrap()).collect();
    let (y, m, d) = (p[0], p[1], p[2]);
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    (era * 146097 + doe - 719468) as i32
}

fn expr(r: &Resolved, e: &Expr, rows: &[usize]) -> f64 {
    match e {
        Expr::Col(c) => num(&r.column(c, rows)).unwrap(),
        Expr::Const(x) => *x,
        Expr::Add(a, b) => expr(r, a, rows) + expr(r, b, rows),
        Expr::Sub(a, b) => expr(r, a, rows) - expr(r, b, rows),
        Expr::Mul(a, b) => expr(r, a, rows) * expr(r, b, rows),
        Expr::Neg(a) => -expr(r, a, rows),
    }
}

fn holds(op: CmpOp, o: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Eq => o == Equal,
        CmpOp::Ne => o != Equal,
        CmpOp::Lt => o == Less,
        CmpOp::Le => o != Greater,
        CmpOp::Gt => o == Greater,
        CmpOp::Ge => o != Less,
    }
}

/// Every satisfying combination (one row per query relation), by nested loops
/// over the rows for which `present` holds.
pub fn brute_combinations(
    db: &DatabaseInstance,
    q: &QuerySpec,
    present: &dyn Fn(TupleId) -> bool,
) -> Vec<(Vec<TupleId>, f64)> {
    let r = Resolved::new(db, q);
    let k = r.rels.len();
    let mut out = Vec::new();
    let mut rows = vec![0usize; k];
    fn rec(
        r: &Resolved,
        q: &QuerySpec,
        present: &dyn Fn(TupleId) -> bool,
        depth: usize,
        rows: &mut Vec<usize>,
        out: &mut Vec<(Vec<TupleId>, f64)>,
    ) {
        if depth == rows.len() {
            let ok_j = q
                .equijoins
                .iter()
                .all(|j| cmp(&r.column(&j.left, rows), &r.column(&j.right, rows)).is_eq());
            let ok_p = q.predicates.iter().all(|p| {
                holds(p.op, cmp(&operand(r, &p.lhs, rows), &operand(r, &p.rhs, rows)))
            });
            if ok_j && ok_p {
                let ids = rows
                    .iter()
                    .enumerate()
                    .map(|(i, &row)| r.db.relation(r.rels[i]).id_of(row))
                    .collect();
                let term = match &q.aggregate {
                    Aggregate::Sum(e) => expr(r, e, rows),
                    _ => 1.0,
                };
                out.push((ids, term));
            }
            return;
        }
        let rel = r.db.relation(r.rels[depth]);
        for row in 0..rel.len() {
            if present(rel.id_of(row)) {
                rows[depth] = row;
                rec(r, q, present, depth + 1, rows, out);
            }
        }
    }
    rec(&r, q, present, 0, &mut rows, &mut out);
    out
}

pub fn brute_eval(db: &DatabaseInstance, q: &QuerySpec, present: &dyn Fn(TupleId) -> bool) -> f64 {
    let combos = brute_combinations(db, q, present);
    match q.aggregate {
        Aggregate::Exists => (!combos.is_empty()) as u8 as f64,
        _ => combos.iter().map(|c| c.1).sum(),
    }
}

/// Union of witness tuples over endogenous relations.
pub fn brute_lineage(db: &DatabaseInstance, q: &QuerySpec) -> BTreeSet<TupleId> {
    brute_combinations(db, q, &|_| true)
        .into_iter()
        .flat_map(|(w, _)| w)
        .filter(|id| db.relation(db.locate(*id).unwrap().relation).endogenous)
        .collect()
}

/// Shapley value over `players` by the subset formula with factorial weights,
/// evaluating each coalition with the nested-loop evaluator. Tuples of
/// endogenous relations outside `players` are absent.
pub fn brute_shapley(db: &DatabaseInstance, q: &QuerySpec, players: &[TupleId], t: TupleId) -> f64 {
    let n = players.len();
    let ti = players.iter().position(|&p| p == t).unwrap();
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    let others: Vec<TupleId> = players.iter().copied().filter(|&p| p != t).collect();
    let endo = |id: TupleId| db.relation(db.locate(id).unwrap().relation).endogenous;
    let mut phi = 0.0;
    for bits in 0u64..1 << others.len() {
        let s: BTreeSet<TupleId> = (0..others.len())
            .filter(|j| bits >> j & 1 == 1)
            .map(|j| others[j])
            .collect();
        let without = brute_eval(db, q, &|id| !endo(id) || s.contains(&id));
        let with = brute_eval(db, q, &|id| !endo(id) || s.contains(&id) || id == players[ti]);
        let k = s.len();
        phi += fact(k) * fact(n - k - 1) / fact(n) * (with - without);
    }
    phi
}
