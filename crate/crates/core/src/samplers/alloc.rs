use num_bigint::BigUint;
use serde::Serialize;

use super::strata::ratio_to_f64;
use super::StratumStats;

/// Per-stratum sample counts for one cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub counts: Vec<u64>,
    /// Floor actually applied (lowered when the budget cannot cover it).
    pub floor: u64,
    pub warning: Option<String>,
}

impl Allocation {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Splits `budget` across eligible strata in proportion to `weights`, giving
/// every eligible stratum at least `floor`.
///
/// Strata whose proportional share falls below the floor are pinned to it and
/// the rest is re-shared among the others. Integer counts come from
/// largest-remainder rounding (ties to the lower index), so the counts sum to
/// the budget exactly. If every free weight is zero the remainder is shared
/// equally.
pub fn floor_weighted(weights: &[Option<f64>], budget: u64, floor: u64) -> Allocation {
    let eligible: Vec<usize> = (0..weights.len()).filter(|&i| weights[i].is_some()).collect();
    let mut counts = vec![0u64; weights.len()];
    let u = eligible.len() as u64;
    if u == 0 {
        return Allocation {
            counts,
            floor,
            warning: (budget > 0).then(|| "no eligible strata; budget left unused".to_string()),
        };
    }
    let mut warning = None;
    let floor_eff = if floor.saturating_mul(u) > budget {
        let f = budget / u;
        warning = Some(format!(
            "budget {budget} cannot give {floor} samples to each of {u} strata; floor lowered to {f}"
        ));
        f
    } else {
        floor
    };

    let mut pinned = vec![false; weights.len()];
    let mut target = vec![0f64; weights.len()];
    loop {
        let free: Vec<usize> = eligible.iter().copied().filter(|&i| !pinned[i]).collect();
        let n_pinned = u - free.len() as u64;
        let rest = (budget - floor_eff * n_pinned) as f64;
        for &i in &eligible {
            if pinned[i] {
                target[i] = floor_eff as f64;
            }
        }
        if free.is_empty() {
            break;
        }
        let w_sum: f64 = free.iter().map(|&i| weights[i].unwrap().max(0.0)).sum();
        for &i in &free {
            target[i] = if w_sum > 0.0 {
                rest * weights[i].unwrap().max(0.0) / w_sum
            } else {
                rest / free.len() as f64
            };
        }
        let newly: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&i| target[i] < floor_eff as f64)
            .collect();
        if newly.is_empty() {
            break;
        }
        for i in newly {
            pinned[i] = true;
        }
    }

    for &i in &eligible {
        counts[i] = (target[i].floor() as u64).max(floor_eff);
    }
    let mut assigned: u64 = counts.iter().sum();
    // shave overshoot from float noise, smallest remainders first
    if assigned > budget {
        let mut order: Vec<usize> = eligible.clone();
        order.sort_by(|&a, &b| {
            let ra = target[a] - target[a].floor();
            let rb = target[b] - target[b].floor();
            ra.total_cmp(&rb).then(b.cmp(&a))
        });
        for &i in order.iter().cycle() {
            if assigned == budget {
                break;
            }
            if counts[i] > floor_eff {
                counts[i] -= 1;
                assigned -= 1;
            }
        }
    }
    if assigned < budget {
        let mut order: Vec<usize> = eligible.clone();
        order.sort_by(|&a, &b| {
            let ra = target[a] - counts[a] as f64;
            let rb = target[b] - counts[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut k = 0;
        while assigned < budget {
            counts[order[k % order.len()]] += 1;
            assigned += 1;
            k += 1;
        }
    }
    Allocation {
        counts,
        floor: floor_eff,
        warning,
    }
}

/// Cardinalities as relative f64 weights (largest = 1).
pub(crate) fn card_weights(cards: &[&BigUint]) -> Vec<f64> {
    let max = cards.iter().max().copied().cloned().unwrap_or_default();
    cards
        .iter()
        .map(|c| if max == BigUint::default() { 0.0 } else { ratio_to_f64(c, &max) })
        .collect()
}

/// Budget proportional to stratum cardinality, with the exploration floor.
/// Pruned and exhausted strata receive nothing.
pub fn proportional_allocation(strata: &[StratumStats], budget: u64, floor: u64) -> Allocation {
    let cards: Vec<&BigUint> = strata.iter().map(|s| &s.card).collect();
    let w = card_weights(&cards);
    let weights: Vec<Option<f64>> = strata
        .iter()
        .zip(w)
        .map(|(s, w)| s.eligible().then_some(w))
        .collect();
    floor_weighted(&weights, budget, floor)
}

/// Neyman-style allocation: budget proportional to (stratum weight × σ̂).
///
/// The stratum weight is its coefficient `prob` in the combined estimate, so
/// this minimizes the variance of the stratified estimator. A stratum with
/// fewer than two samples borrows the largest σ̂ observed. When no stratum shows
/// any spread the proportional rule is used instead.
pub fn neyman_allocation(stats: &[StratumStats], budget: u64, floor: u64) -> Allocation {
    let observed = stats
        .iter()
        .filter(|s| s.eligible() && s.count >= 2)
        .map(|s| s.std_dev())
        .fold(0.0f64, f64::max);
    if observed <= 0.0 {
        return proportional_allocation(stats, budget, floor);
    }
    let weights: Vec<Option<f64>> = stats
        .iter()
        .map(|s| {
            s.eligible().then(|| {
                let sd = if s.count >= 2 { s.std_dev() } else { observed };
                s.prob * sd
            })
        })
        .collect();
    floor_weighted(&weights, budget, floor)
}

/// Splits `m` over `k` cycles. The first (cold-start) cycle gets at least
/// `cold_min` samples so every stratum can be visited once; the rest is spread
/// evenly, earlier cycles taking the remainder.
pub fn cycle_budgets(m: u64, k: u32, cold_min: u64) -> Vec<u64> {
    let k = k.max(1) as u64;
    if k == 1 {
        return vec![m];
    }
    let even = m / k + u64::from(!m.is_multiple_of(k));
    let cold = even.max(cold_min).min(m);
    let rest = m - cold;
    let tail = k - 1;
    let mut out = vec![cold];
    for j in 0..tail {
        out.push(rest / tail + u64::from(j < rest % tail));
    }
    out
}
