use serde::Serialize;

use crate::error::{Error, Result};
use crate::samplers::RelationVector;

/// A coarsened stratum: the relation vectors whose per-relation counts fall in
/// one cross-product of bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumGroup {
    pub bins: Vec<u32>,
    /// Indices into the input strata list.
    pub members: Vec<usize>,
}

/// Bin of count `s` when `0..=bound` is split into `min(q, bound+1)` contiguous
/// bins of near-equal width.
pub fn bin_of(s: u32, bound: u32, q: u32) -> u32 {
    let values = bound as u64 + 1;
    let b = (q as u64).min(values);
    ((s as u64 * b) / values) as u32
}

/// Groups relation vectors by per-relation quantile bins. Groups come out in
/// lexicographic bin order; members keep input order.
pub fn bin_strata(strata: &[RelationVector], bounds: &[u32], q: u32) -> Result<Vec<StratumGroup>> {
    if q == 0 {
        return Err(Error::Config("quantile bin count must be at least 1".into()));
    }
    let mut groups: std::collections::BTreeMap<Vec<u32>, Vec<usize>> = Default::default();
    for (i, v) in strata.iter().enumerate() {
        if v.counts().len() != bounds.len() {
            return Err(Error::Domain("relation vector arity differs from bounds".into()));
        }
        let key: Vec<u32> = v
            .counts()
            .iter()
            .zip(bounds)
            .map(|(&s, &b)| bin_of(s, b, q))
            .collect();
        groups.entry(key).or_default().push(i);
    }
    Ok(groups
        .into_iter()
        .map(|(bins, members)| StratumGroup { bins, members })
        .collect())
}
