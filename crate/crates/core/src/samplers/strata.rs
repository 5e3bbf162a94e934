use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::provenance::EndogenousPartition;
use crate::relcore::TupleId;

/// Per-relation tuple counts (s_1, …, s_r) of a coalition; the stratum key of
/// relation-stratified sampling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationVector(pub Vec<u32>);

impl RelationVector {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    /// |s| = Σ s_i
    pub fn size(&self) -> usize {
        self.0.iter().map(|&s| s as usize).sum()
    }

    pub fn within(&self, bounds: &[u32]) -> bool {
        self.0.len() == bounds.len() && self.0.iter().zip(bounds).all(|(s, b)| s <= b)
    }
}

/// n_i′ for each relation: |E_i|, minus one for the target's own relation.
pub fn reduced_bounds(partition: &EndogenousPartition, t: TupleId) -> Result<Vec<u32>> {
    let tc = partition
        .class_of(t)
        .ok_or_else(|| Error::Domain(format!("tuple {t} is not endogenous")))?;
    Ok(partition
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| c.ids.len() as u32 - u32::from(i == tc))
        .collect())
}

/// Hard cap on the number of relation vectors materialized.
pub const MAX_STRATA: u64 = 5_000_000;

/// Grid size ∏(n_i′ + 1).
pub fn grid_size(bounds: &[u32]) -> u64 {
    bounds
        .iter()
        .fold(1u64, |acc, &b| acc.saturating_mul(b as u64 + 1))
}

/// Every relation vector of the grid ×_i {0..n_i′}, lexicographic with the
/// first relation most significant.
pub fn enumerate_strata(partition: &EndogenousPartition, t: TupleId) -> Result<Vec<RelationVector>> {
    let bounds = reduced_bounds(partition, t)?;
    enumerate_grid(&bounds)
}

pub fn enumerate_grid(bounds: &[u32]) -> Result<Vec<RelationVector>> {
    let total = grid_size(bounds);
    if total > MAX_STRATA {
        return Err(Error::Cap(format!(
            "{total} relation vectors exceed the cap of {MAX_STRATA}; use quantile bins"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![0u32; bounds.len()];
    loop {
        out.push(RelationVector(cur.clone()));
        // odometer increment from the last coordinate
        let mut i = bounds.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if cur[i] < bounds[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
    }
}

/// C(n, k) exactly.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 1..=k {
        c *= n - k + i;
        c /= i;
    }
    c
}

/// Row C(n, 0..=n).
pub fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n {
        c *= n - k;
        c /= k + 1;
        row.push(c.clone());
    }
    row
}

/// ∏_i C(n_i′, s_i)
pub fn stratum_card(v: &RelationVector, bounds: &[u32]) -> BigUint {
    v.counts()
        .iter()
        .zip(bounds)
        .fold(BigUint::one(), |acc, (&s, &b)| acc * binomial(b as u64, s as u64))
}

/// num/den as the nearest-ish f64, without overflowing through huge integers.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    assert!(!den.is_zero(), "ratio with zero denominator");
    let shift = (den.bits() as i64 - num.bits() as i64 + 64).max(0);
    let q: BigUint = (num << shift as usize) / den;
    let mut v = q.to_f64().unwrap_or(f64::INFINITY);
    // scale by 2^-shift in steps that stay normal
    let mut s = shift;
    while s > 0 {
        let step = s.min(1000);
        v *= 2f64.powi(-(step as i32));
        s -= step;
    }
    v
}

/// Probability that a coalition drawn by first picking a size uniformly from
/// 0..n−1 and then a uniform subset of that size lands in stratum `v`:
/// (1/n) · card(v) / C(n−1, |v|). Summing π_v·mean_v over strata gives the
/// Shapley value.
pub fn stratum_prob(v: &RelationVector, bounds: &[u32], n: usize) -> f64 {
    let card = stratum_card(v, bounds);
    prob_from_card(&card, v.size(), n)
}

pub(crate) fn prob_from_card(card: &BigUint, size: usize, n: usize) -> f64 {
    let by_size = binomial(n as u64 - 1, size as u64);
    ratio_to_f64(card, &by_size) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_is_lexicographic() {
        let g = enumerate_grid(&[1, 2]).unwrap();
        let flat: Vec<Vec<u32>> = g.into_iter().map(|v| v.0).collect();
        assert_eq!(
            flat,
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
    }

    #[test]
    fn degenerate_grids() {
        assert_eq!(enumerate_grid(&[3]).unwrap().len(), 4);
        assert_eq!(enumerate_grid(&[0, 0, 0]).unwrap(), vec![RelationVector(vec![0, 0, 0])]);
        assert_eq!(enumerate_grid(&[]).unwrap(), vec![RelationVector(vec![])]);
    }

    #[test]
    fn cards() {
        assert_eq!(stratum_card(&RelationVector(vec![2, 1]), &[4, 1]), BigUint::from(6u32));
        assert_eq!(stratum_card(&RelationVector(vec![0, 0]), &[4, 1]), BigUint::one());
        assert_eq!(binomial(5, 7), BigUint::zero());
        assert_eq!(binomial_row(4), [1u32, 4, 6, 4, 1].map(BigUint::from).to_vec());
    }

    #[test]
    fn ratio_precision() {
        let a = binomial(200, 100);
        let b = binomial(200, 99);
        // C(200,100)/C(200,99) = 101/100
        assert!((ratio_to_f64(&a, &b) - 1.01).abs() < 1e-15);
        assert!((ratio_to_f64(&b, &a) - 100.0 / 101.0).abs() < 1e-15);
        assert_eq!(ratio_to_f64(&BigUint::zero(), &a), 0.0);
    }
}
