use num_bigint::BigUint;
use serde::{Deserialize, Serialize, Serializer};

use super::RelationVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StratumKey {
    /// The single stratum of plain Monte Carlo.
    Uniform,
    /// Coalition size.
    Size(u32),
    Vector(RelationVector),
    /// A quantile-bin cross product of relation vectors.
    Bins(Vec<u32>),
}

/// Running count / mean / sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Pairwise combination of two accumulators.
    pub fn merge(&self, other: &Welford) -> Welford {
        let count = self.count + other.count;
        if count == 0 {
            return Welford::default();
        }
        let delta = other.mean - self.mean;
        let nb = other.count as f64 / count as f64;
        Welford {
            count,
            mean: self.mean + delta * nb,
            m2: self.m2 + other.m2 + delta * delta * (self.count as f64 * nb),
        }
    }

    /// Unbiased sample variance; 0 below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }
}

fn card_as_string<S: Serializer>(c: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

/// Per-stratum state carried through an estimation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumStats {
    pub key: StratumKey,
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    /// Weight of the stratum mean in the combined estimate.
    pub prob: f64,
    /// Number of coalitions in the stratum.
    #[serde(serialize_with = "card_as_string")]
    pub card: BigUint,
    /// Marginal contribution is identically zero; never sampled.
    pub pruned: bool,
    /// Every coalition was enumerated once; the mean is exact.
    pub exhausted: bool,
}

impl StratumStats {
    pub fn new(key: StratumKey, prob: f64, card: BigUint, pruned: bool) -> Self {
        StratumStats {
            key,
            count: 0,
            mean: 0.0,
            m2: 0.0,
            prob,
            card,
            pruned,
            exhausted: false,
        }
    }

    pub fn welford(&self) -> Welford {
        Welford {
            count: self.count,
            mean: self.mean,
            m2: self.m2,
        }
    }

    pub fn absorb(&mut self, w: &Welford) {
        let m = self.welford().merge(w);
        self.count = m.count;
        self.mean = m.mean;
        self.m2 = m.m2;
    }

    pub fn variance(&self) -> f64 {
        self.welford().variance()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Can still receive samples.
    pub fn eligible(&self) -> bool {
        !self.pruned && !self.exhausted
    }
}

/// Pooled statistics of two accumulators over the same stratum.
pub fn merge_stats(a: &StratumStats, b: &StratumStats) -> Result<StratumStats> {
    if a.key != b.key || a.card != b.card || a.prob.to_bits() != b.prob.to_bits() {
        return Err(Error::Domain(format!(
            "cannot merge stats of different strata {:?} and {:?}",
            a.key, b.key
        )));
    }
    let mut out = a.clone();
    out.absorb(&b.welford());
    out.exhausted = a.exhausted || b.exhausted;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(xs: &[f64]) -> Welford {
        let mut w = Welford::default();
        xs.iter().for_each(|&x| w.push(x));
        w
    }

    #[test]
    fn variance_matches_two_pass() {
        let xs = [1.0, 4.0, 9.0, 16.0, 25.0];
        let w = series(&xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((w.mean - mean).abs() < 1e-12);
        assert!((w.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let w = series(&[3.0, -1.5, 7.25]);
        assert_eq!(w.merge(&Welford::default()), w);
        assert_eq!(Welford::default().merge(&w), w);
    }

    #[test]
    fn merge_rejects_key_mismatch() {
        let a = StratumStats::new(StratumKey::Size(1), 0.5, BigUint::from(2u8), false);
        let b = StratumStats::new(StratumKey::Size(2), 0.5, BigUint::from(2u8), false);
        assert!(merge_stats(&a, &b).is_err());
    }
}
