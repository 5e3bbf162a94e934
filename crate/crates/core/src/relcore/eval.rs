use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::query::{AggKind, BoundPred, BoundQuery, ColRef, QuerySpec};
use super::types::{DatabaseInstance, KeyPart, TupleId, Value};
use crate::error::{Error, Result};

/// Per-relation set of tuples considered present. Relations without an entry
/// contribute all of their rows.
#[derive(Debug, Clone)]
pub struct Mask {
    restricted: Vec<Option<FixedBitSet>>,
}

impl Mask {
    /// Every tuple present.
    pub fn full(db: &DatabaseInstance) -> Self {
        Mask {
            restricted: vec![None; db.relations().len()],
        }
    }

    /// Restricts relation `rel` to exactly `ids`.
    pub fn restrict(
        &mut self,
        db: &DatabaseInstance,
        rel: usize,
        ids: impl IntoIterator<Item = TupleId>,
    ) -> Result<&mut Self> {
        let r = db.relation(rel);
        let mut set = FixedBitSet::with_capacity(r.len());
        for id in ids {
            if !r.contains(id) {
                return Err(Error::Domain(format!(
                    "tuple {id} does not belong to relation {}",
                    r.name
                )));
            }
            set.insert((id.0 - r.first_id) as usize);
        }
        self.restricted[rel] = Some(set);
        Ok(self)
    }

    /// Restricts by relation name.
    pub fn restrict_named(
        &mut self,
        db: &DatabaseInstance,
        name: &str,
        ids: impl IntoIterator<Item = TupleId>,
    ) -> Result<&mut Self> {
        let rel = db
            .relation_index(name)
            .ok_or_else(|| Error::Domain(format!("unknown relation {name:?}")))?;
        self.restrict(db, rel, ids)
    }

    /// Restricts relation `rel` to the rows set in `rows` (local row indices).
    pub fn restrict_rows(&mut self, rel: usize, rows: FixedBitSet) -> &mut Self {
        self.restricted[rel] = Some(rows);
        self
    }

    #[inline]
    pub fn allows(&self, rel: usize, row: usize) -> bool {
        match &self.restricted[rel] {
            None => true,
            Some(s) => s.contains(row),
        }
    }

    pub fn is_restricted(&self, rel: usize) -> bool {
        self.restricted[rel].is_some()
    }
}

/// Satisfying join combinations in canonical order.
///
/// Each combination's witness lists one id per query relation, sorted ascending
/// (equivalently by instance relation order). Combinations are sorted
/// lexicographically by witness; aggregates sum in this order.
#[derive(Debug, Clone, Default)]
pub struct Combinations {
    pub arity: usize,
    pub witnesses: Vec<TupleId>,
    pub terms: Vec<f64>,
}

impl Combinations {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn witness(&self, i: usize) -> &[TupleId] {
        &self.witnesses[i * self.arity..(i + 1) * self.arity]
    }
}

#[derive(Debug, Clone)]
struct Step {
    pos: usize,
    /// (already joined column, column of the new relation)
    keys: Vec<(ColRef, usize)>,
    /// cross predicates that become checkable once this step is joined
    checks: Vec<usize>,
}

/// A query bound to an instance with constant selections pre-applied and a join order fixed.
#[derive(Debug, Clone)]
pub struct PreparedQuery {
    pub bound: BoundQuery,
    /// Rows per query position that pass all single-relation predicates.
    candidates: Vec<Vec<u32>>,
    steps: Vec<Step>,
}

impl PreparedQuery {
    pub fn new(q: &QuerySpec, db: &DatabaseInstance) -> Result<Self> {
        let bound = BoundQuery::bind(q, db)?;
        let n = bound.rels.len();

        let mut candidates = Vec::with_capacity(n);
        for pos in 0..n {
            let rel = db.relation(bound.rels[pos]);
            let preds = &bound.local[pos];
            let rows: Vec<u32> = (0..rel.len())
                .filter(|&r| {
                    let row = rel.rows[r].as_slice();
                    preds.iter().all(|p| p.holds(&|_| row))
                })
                .map(|r| r as u32)
                .collect();
            candidates.push(rows);
        }

        // Greedy order: smallest candidate set first, then connected relations by size.
        let mut joined: Vec<usize> = Vec::with_capacity(n);
        let mut steps = Vec::with_capacity(n);
        let mut used_checks = vec![false; bound.cross.len()];
        while joined.len() < n {
            let connected = |p: usize| {
                bound.joins.iter().any(|(a, b)| {
                    (a.pos == p && joined.contains(&b.pos)) || (b.pos == p && joined.contains(&a.pos))
                })
            };
            let remaining = (0..n).filter(|p| !joined.contains(p));
            let next = if joined.is_empty() {
                remaining.min_by_key(|&p| (candidates[p].len(), p))
            } else {
                let conn: Vec<usize> = remaining.clone().filter(|&p| connected(p)).collect();
                if conn.is_empty() {
                    remaining.min_by_key(|&p| (candidates[p].len(), p))
                } else {
                    conn.into_iter().min_by_key(|&p| (candidates[p].len(), p))
                }
            }
            .expect("some relation remains");
            let keys: Vec<(ColRef, usize)> = bound
                .joins
                .iter()
                .filter_map(|(a, b)| {
                    if a.pos == next && joined.contains(&b.pos) {
                        Some((*b, a.col))
                    } else if b.pos == next && joined.contains(&a.pos) {
                        Some((*a, b.col))
                    } else {
                        None
                    }
                })
                .collect();
            joined.push(next);
            let checks: Vec<usize> = bound
                .cross
                .iter()
                .enumerate()
                .filter(|(i, p)| !used_checks[*i] && p.positions().iter().all(|q| joined.contains(q)))
                .map(|(i, _)| i)
                .collect();
            for &c in &checks {
                used_checks[c] = true;
            }
            steps.push(Step {
                pos: next,
                keys,
                checks,
            });
        }

        Ok(PreparedQuery {
            bound,
            candidates,
            steps,
        })
    }

    pub fn kind(&self) -> AggKind {
        self.bound.kind
    }

    /// Instance relation indices referenced by the query.
    pub fn relations(&self) -> &[usize] {
        &self.bound.rels
    }

    /// Enumerates all satisfying combinations of masked rows, canonically ordered.
    pub fn combinations(&self, db: &DatabaseInstance, mask: &Mask) -> Combinations {
        let n = self.bound.rels.len();
        let rels = &self.bound.rels;
        // partial join rows, flattened; column j holds the row of steps[j].pos
        let mut partial: Vec<u32> = Vec::new();
        let mut width = 0usize;
        // query position -> column in partial
        let mut col_of = vec![usize::MAX; n];

        for (j, step) in self.steps.iter().enumerate() {
            let rel_idx = rels[step.pos];
            let rel = db.relation(rel_idx);
            let rows: Vec<u32> = self.candidates[step.pos]
                .iter()
                .copied()
                .filter(|&r| mask.allows(rel_idx, r as usize))
                .collect();
            col_of[step.pos] = j;
            let mut next = Vec::new();

            let row_at = |part: &[u32], new_row: u32, pos: usize| -> &[Value] {
                let c = col_of[pos];
                let r = if c == j { new_row } else { part[c] };
                &db.relation(rels[pos]).rows[r as usize]
            };
            let passes = |part: &[u32], new_row: u32| {
                step.checks.iter().all(|&c| {
                    let p: &BoundPred = &self.bound.cross[c];
                    p.holds(&|pos| row_at(part, new_row, pos))
                })
            };

            if j == 0 {
                for &r in &rows {
                    if passes(&[], r) {
                        next.push(r);
                    }
                }
            } else if step.keys.is_empty() {
                for part in partial.chunks_exact(width) {
                    for &r in &rows {
                        if passes(part, r) {
                            next.extend_from_slice(part);
                            next.push(r);
                        }
                    }
                }
            } else {
                let mut table: HashMap<Vec<KeyPart>, Vec<u32>> = HashMap::with_capacity(rows.len());
                for &r in &rows {
                    let row = &rel.rows[r as usize];
                    let key: Vec<KeyPart> = step.keys.iter().map(|(_, c)| row[*c].key()).collect();
                    table.entry(key).or_default().push(r);
                }
                for part in partial.chunks_exact(width) {
                    let key: Vec<KeyPart> = step
                        .keys
                        .iter()
                        .map(|(other, _)| {
                            let rr = part[col_of[other.pos]];
                            db.relation(rels[other.pos]).rows[rr as usize][other.col].key()
                        })
                        .collect();
                    if let Some(matches) = table.get(&key) {
                        for &r in matches {
                            if passes(part, r) {
                                next.extend_from_slice(part);
                                next.push(r);
                            }
                        }
                    }
                }
            }
            partial = next;
            width = j + 1;
            if partial.is_empty() {
                break;
            }
        }

        let count = if width == n { partial.len() / n.max(1) } else { 0 };
        let mut witnesses = Vec::with_capacity(count * n);
        let mut terms = Vec::with_capacity(count);
        for part in partial.chunks_exact(n).take(count) {
            let start = witnesses.len();
            for (step, &row) in self.steps.iter().zip(part) {
                witnesses.push(db.relation(rels[step.pos]).id_of(row as usize));
            }
            witnesses[start..].sort_unstable();
            let term = match &self.bound.expr {
                Some(e) => e.eval(&|pos| {
                    let r = part[col_of[pos]];
                    db.relation(rels[pos]).rows[r as usize].as_slice()
                }),
                None => 1.0,
            };
            terms.push(term);
        }

        // canonical order
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_unstable_by(|&a, &b| witnesses[a * n..(a + 1) * n].cmp(&witnesses[b * n..(b + 1) * n]));
        let mut sorted_w = Vec::with_capacity(witnesses.len());
        let mut sorted_t = Vec::with_capacity(count);
        for i in order {
            sorted_w.extend_from_slice(&witnesses[i * n..(i + 1) * n]);
            sorted_t.push(terms[i]);
        }
        Combinations {
            arity: n,
            witnesses: sorted_w,
            terms: sorted_t,
        }
    }

    /// Aggregate value under `mask`.
    pub fn evaluate(&self, db: &DatabaseInstance, mask: &Mask) -> f64 {
        let c = self.combinations(db, mask);
        aggregate(self.bound.kind, c.terms.iter().copied())
    }
}

/// Folds terms in the given order. SUM of nothing is 0; EXISTS is 0/1.
pub fn aggregate(kind: AggKind, terms: impl Iterator<Item = f64>) -> f64 {
    match kind {
        AggKind::Sum => terms.fold(0.0, |acc, t| acc + t),
        AggKind::Count => terms.count() as f64,
        AggKind::Exists => {
            let mut terms = terms;
            if terms.next().is_some() {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// One-shot evaluation of `query` on the masked instance.
pub fn evaluate(query: &QuerySpec, db: &DatabaseInstance, mask: &Mask) -> Result<f64> {
    Ok(PreparedQuery::new(query, db)?.evaluate(db, mask))
}
