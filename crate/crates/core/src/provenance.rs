//! Witness-based lineage: which endogenous tuples participate in at least one
//! satisfying join combination, partitioned by relation.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Result;
use crate::relcore::{DatabaseInstance, Mask, PreparedQuery, QuerySpec, TupleId};

/// Endogenous tuples of one relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndogenousClass {
    /// Instance relation index.
    pub relation: usize,
    pub name: String,
    /// Sorted ascending.
    pub ids: Vec<TupleId>,
}

/// The player set N, split by relation. Classes follow instance relation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndogenousPartition {
    pub classes: Vec<EndogenousClass>,
}

impl EndogenousPartition {
    pub fn empty() -> Self {
        EndogenousPartition { classes: Vec::new() }
    }

    /// Number of endogenous relations r.
    pub fn relation_count(&self) -> usize {
        self.classes.len()
    }

    /// |N|
    pub fn player_count(&self) -> usize {
        self.classes.iter().map(|c| c.ids.len()).sum()
    }

    pub fn contains(&self, t: TupleId) -> bool {
        self.class_of(t).is_some()
    }

    /// Index of the class holding `t`.
    pub fn class_of(&self, t: TupleId) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.ids.binary_search(&t).is_ok())
    }

    /// Players in canonical order: class by class, ascending within a class.
    pub fn players(&self) -> impl Iterator<Item = TupleId> + '_ {
        self.classes.iter().flat_map(|c| c.ids.iter().copied())
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.ids.len()).collect()
    }
}

/// Membership test; callers short-circuit the attribution to 0 when false.
pub fn is_endogenous(partition: &EndogenousPartition, t: TupleId) -> bool {
    partition.contains(t)
}

pub fn compute_lineage(query: &QuerySpec, db: &DatabaseInstance) -> Result<EndogenousPartition> {
    let prepared = PreparedQuery::new(query, db)?;
    Ok(lineage_of(&prepared, db))
}

pub fn lineage_of(prepared: &PreparedQuery, db: &DatabaseInstance) -> EndogenousPartition {
    let combos = prepared.combinations(db, &Mask::full(db));
    let mut rels: Vec<usize> = prepared
        .relations()
        .iter()
        .copied()
        .filter(|&r| db.relation(r).endogenous)
        .collect();
    rels.sort_unstable();
    let mut sets: Vec<BTreeSet<TupleId>> = vec![BTreeSet::new(); rels.len()];
    for i in 0..combos.len() {
        for &id in combos.witness(i) {
            let loc = db.locate(id).expect("witness ids exist");
            if let Ok(k) = rels.binary_search(&loc.relation) {
                sets[k].insert(id);
            }
        }
    }
    EndogenousPartition {
        classes: rels
            .into_iter()
            .zip(sets)
            .map(|(relation, ids)| EndogenousClass {
                relation,
                name: db.relation(relation).name.clone(),
                ids: ids.into_iter().collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_partition_contains_nothing() {
        let p = EndogenousPartition::empty();
        assert!(!is_endogenous(&p, TupleId(0)));
        assert_eq!(p.player_count(), 0);
    }
}
