use itertools::Itertools;
use rayon::prelude::*;

use super::{shapley_weight, Coalition, GameContext};
use crate::error::{Error, Result};
use crate::relcore::TupleId;

/// Default cap on |N| for subset enumeration (2^(n-1) coalitions).
pub const DEFAULT_EXACT_CAP: usize = 24;
/// Cap on |N| for permutation enumeration (n! orderings).
pub const PERM_CAP: usize = 9;

/// Subsets per parallel work block. Partial sums are combined in block order.
const BLOCK_BITS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMethod {
    Subset,
    Permutation,
    Banzhaf,
}

impl std::str::FromStr for ExactMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subset" => Ok(ExactMethod::Subset),
            "perm" | "permutation" => Ok(ExactMethod::Permutation),
            "banzhaf" => Ok(ExactMethod::Banzhaf),
            _ => Err(Error::Config(format!("unknown exact method {s:?}"))),
        }
    }
}

/// Resolves the target. `Ok(None)` means a real tuple outside the player set (value 0).
fn target_player(ctx: &GameContext, t: TupleId) -> Result<Option<usize>> {
    if ctx.instance().locate(t).is_none() {
        return Err(Error::Domain(format!("tuple {t} does not exist")));
    }
    Ok(ctx.player_index(t))
}

fn check_cap(n: usize, cap: usize, what: &str) -> Result<()> {
    if n > cap {
        return Err(Error::Cap(format!(
            "{what} over {n} players exceeds the cap of {cap}"
        )));
    }
    Ok(())
}

/// Σ over subsets S of N∖{t} of weight(|S|)·Δ_t(S).
fn subset_sum(ctx: &GameContext, t: usize, weight: &(dyn Fn(usize) -> f64 + Sync)) -> Result<f64> {
    let n = ctx.n();
    let others: Vec<usize> = (0..n).filter(|&p| p != t).collect();
    let total: u64 = 1u64 << others.len();
    let block = 1u64 << BLOCK_BITS.min(others.len() as u32);
    let blocks = total / block;
    let partial: Vec<Result<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut s = Coalition::empty(n);
            let mut acc = 0.0;
            for bits in b * block..(b + 1) * block {
                s.clear();
                let mut size = 0;
                for (j, &p) in others.iter().enumerate() {
                    if bits >> j & 1 == 1 {
                        s.insert(p);
                        size += 1;
                    }
                }
                let without = ctx.value(&s)?;
                s.insert(t);
                let with = ctx.value(&s)?;
                acc += weight(size) * (with - without);
            }
            Ok(acc)
        })
        .collect();
    let mut sum = 0.0;
    for p in partial {
        sum += p?;
    }
    Ok(sum)
}

pub fn exact_shapley(ctx: &GameContext, t: TupleId) -> Result<f64> {
    exact_shapley_capped(ctx, t, DEFAULT_EXACT_CAP)
}

/// Shapley value by enumerating all 2^(n-1) coalitions without `t`.
pub fn exact_shapley_capped(ctx: &GameContext, t: TupleId, cap: usize) -> Result<f64> {
    let Some(p) = target_player(ctx, t)? else {
        return Ok(0.0);
    };
    let n = ctx.n();
    check_cap(n, cap, "exact Shapley")?;
    let weights: Vec<f64> = (0..n).map(|s| shapley_weight(s, n)).collect::<Result<_>>()?;
    subset_sum(ctx, p, &|s| weights[s])
}

pub fn exact_banzhaf(ctx: &GameContext, t: TupleId) -> Result<f64> {
    exact_banzhaf_capped(ctx, t, DEFAULT_EXACT_CAP)
}

pub fn exact_banzhaf_capped(ctx: &GameContext, t: TupleId, cap: usize) -> Result<f64> {
    let Some(p) = target_player(ctx, t)? else {
        return Ok(0.0);
    };
    let n = ctx.n();
    check_cap(n, cap, "exact Banzhaf")?;
    let scale = 0.5f64.powi(n as i32 - 1);
    Ok(subset_sum(ctx, p, &|_| 1.0)? * scale)
}

/// v(S) for every S ⊆ N, indexed by the bit pattern of S.
fn value_table(ctx: &GameContext) -> Result<Vec<f64>> {
    let n = ctx.n();
    (0u64..1 << n)
        .into_par_iter()
        .map(|bits| {
            let s = Coalition::from_players(n, (0..n).filter(|&j| bits >> j & 1 == 1));
            ctx.value(&s)
        })
        .collect()
}

/// Shapley value as the average over all n! orderings of the marginal
/// contribution to the prefix before `t`.
pub fn exact_shapley_perm(ctx: &GameContext, t: TupleId) -> Result<f64> {
    let Some(p) = target_player(ctx, t)? else {
        return Ok(0.0);
    };
    let n = ctx.n();
    check_cap(n, PERM_CAP, "permutation enumeration")?;
    let table = value_table(ctx)?;
    let mut sum = 0.0;
    let mut count = 0u64;
    for perm in (0..n).permutations(n) {
        let mut prefix = 0usize;
        for &q in &perm {
            if q == p {
                break;
            }
            prefix |= 1 << q;
        }
        sum += table[prefix | 1 << p] - table[prefix];
        count += 1;
    }
    Ok(sum / count as f64)
}

/// Contribution of `t` in a single ordering of (some of) the players.
pub fn permutation_contribution(ctx: &GameContext, order: &[TupleId], t: TupleId) -> Result<f64> {
    let pos = order
        .iter()
        .position(|&x| x == t)
        .ok_or_else(|| Error::Domain(format!("tuple {t} is not in the ordering")))?;
    let s = ctx.coalition_of(order[..pos].iter().copied())?;
    super::marginal(ctx, &s, t)
}

/// Exact values for every player from one table of 2^n evaluations.
pub fn exact_all(ctx: &GameContext, method: ExactMethod, cap: usize) -> Result<Vec<f64>> {
    let n = ctx.n();
    check_cap(n, cap.min(26), "exact enumeration of all players")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let table = value_table(ctx)?;
    let weights: Vec<f64> = match method {
        ExactMethod::Banzhaf => vec![0.5f64.powi(n as i32 - 1); n],
        _ => (0..n).map(|s| shapley_weight(s, n)).collect::<Result<_>>()?,
    };
    Ok((0..n)
        .into_par_iter()
        .map(|p| {
            let bit = 1usize << p;
            let mut acc = 0.0;
            for s in 0..table.len() {
                if s & bit == 0 {
                    acc += weights[s.count_ones() as usize] * (table[s | bit] - table[s]);
                }
            }
            acc
        })
        .collect())
}
