//! Coalitions, marginal contributions, Shapley weights and exact oracles.

mod context;
mod exact;

pub use context::{Coalition, EvaluatorKind, GameContext};
pub use exact::{
    exact_all, exact_banzhaf, exact_banzhaf_capped, exact_shapley, exact_shapley_capped,
    exact_shapley_perm, permutation_contribution, ExactMethod, DEFAULT_EXACT_CAP, PERM_CAP,
};

use crate::error::{Error, Result};
use crate::relcore::TupleId;

/// s!(n−s−1)!/n!, the probability that a uniformly random ordering places
/// exactly a given s-set before the target. Computed as a running ratio so no
/// factorial is ever formed.
pub fn shapley_weight(s: usize, n: usize) -> Result<f64> {
    if n == 0 || s >= n {
        return Err(Error::Domain(format!("shapley_weight needs s < n, got s={s}, n={n}")));
    }
    // (1/n) · Π_{i=1..k} i/(n−1−k+i) with k = min(s, n−1−s)
    let k = s.min(n - 1 - s);
    let mut w = 1.0 / n as f64;
    for i in 1..=k {
        w *= i as f64 / (n - 1 - k + i) as f64;
    }
    Ok(w)
}

/// Δ_t(S) = v(S ∪ {t}) − v(S).
pub fn marginal(ctx: &GameContext, s: &Coalition, t: TupleId) -> Result<f64> {
    let p = ctx
        .player_index(t)
        .ok_or_else(|| Error::Domain(format!("tuple {t} is not an endogenous player")))?;
    if s.contains(p) {
        return Err(Error::Domain(format!("tuple {t} is already in the coalition")));
    }
    let without = ctx.value(s)?;
    let mut with = s.clone();
    with.insert(p);
    Ok(ctx.value(&with)? - without)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> f64 {
        (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
    }

    #[test]
    fn weight_endpoints() {
        assert!((shapley_weight(0, 6).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((shapley_weight(5, 6).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        // 2!·3!/6! = 12/720
        assert!((shapley_weight(2, 6).unwrap() - 12.0 / 720.0).abs() < 1e-15);
    }

    #[test]
    fn weight_normalization() {
        for n in [1usize, 2, 10, 40, 64] {
            let total: f64 = (0..n)
                .map(|s| binom(n as u64 - 1, s as u64) * shapley_weight(s, n).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
        }
    }

    #[test]
    fn weight_domain() {
        assert!(shapley_weight(6, 6).is_err());
        assert!(shapley_weight(0, 0).is_err());
    }

    #[test]
    fn weight_finite_at_64() {
        let w = shapley_weight(31, 64).unwrap();
        assert!(w > 0.0 && w.is_finite());
    }
}
