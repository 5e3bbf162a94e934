use serde::Serialize;

use crate::provenance::EndogenousPartition;
use crate::relcore::{PreparedQuery, TupleId};
use crate::samplers::RelationVector;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedStratum {
    pub vector: RelationVector,
    /// Every coalition in the stratum has a zero marginal contribution.
    pub pruned: bool,
}

/// Static schema-level pruning.
///
/// A stratum is pruned when some relation the join requires contributes no
/// tuples and the target is not from that relation: no witness can complete
/// with or without the target, so the marginal is identically zero. Data
/// values are never consulted.
pub fn prune_strata(
    strata: &[RelationVector],
    query: &PreparedQuery,
    partition: &EndogenousPartition,
    t: TupleId,
) -> Vec<AnnotatedStratum> {
    let target_class = partition.class_of(t);
    let required: Vec<bool> = partition
        .classes
        .iter()
        .map(|c| query.relations().contains(&c.relation))
        .collect();
    strata
        .iter()
        .map(|v| {
            let pruned = v
                .counts()
                .iter()
                .enumerate()
                .any(|(i, &s)| s == 0 && required[i] && target_class != Some(i));
            AnnotatedStratum {
                vector: v.clone(),
                pruned,
            }
        })
        .collect()
}
