use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alloc::{cycle_budgets, neyman_allocation, proportional_allocation, Allocation};
use super::rng::unit_rng;
use super::stats::{StratumKey, StratumStats, Welford};
use super::strata::{binomial, binomial_row, enumerate_grid, prob_from_card, ratio_to_f64, reduced_bounds};
use super::RelationVector;
use crate::accel::{bin_strata, cached_eval, prune_strata, CoalitionCache, DEFAULT_CACHE_CAPACITY};
use crate::error::{Error, Result};
use crate::game::{shapley_weight, Coalition, GameContext};
use crate::relcore::TupleId;

/// Samples per parallel work unit. Each unit draws from its own stream.
const UNIT_SAMPLES: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mcs,
    Ss,
    Ass,
    Rss,
    Arss,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Mcs, Method::Ss, Method::Ass, Method::Rss, Method::Arss];

    pub fn is_adaptive(self) -> bool {
        matches!(self, Method::Ass | Method::Arss)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Mcs => "mcs",
            Method::Ss => "ss",
            Method::Ass => "ass",
            Method::Rss => "rss",
            Method::Arss => "arss",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub method: Method,
    /// Total number of sampled coalitions m.
    pub budget: u64,
    /// Allocation cycles k (adaptive methods only).
    #[serde(default = "defaults::cycles")]
    pub cycles: u32,
    /// Minimum samples per unpruned stratum per cycle.
    #[serde(default = "defaults::one")]
    pub floor: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::workers")]
    pub workers: usize,
    /// Quantile bins per relation (relation-stratified methods only).
    #[serde(default)]
    pub bins: Option<u32>,
    #[serde(default)]
    pub cache: bool,
    #[serde(default = "defaults::cache_capacity")]
    pub cache_capacity: usize,
    #[serde(default = "defaults::yes")]
    pub prune: bool,
    /// Enumerate a stratum exhaustively once its allocation reaches its cardinality.
    #[serde(default)]
    pub dedup: bool,
}

mod defaults {
    pub fn cycles() -> u32 {
        5
    }
    pub fn one() -> u64 {
        1
    }
    pub fn workers() -> usize {
        1
    }
    pub fn cache_capacity() -> usize {
        crate::accel::DEFAULT_CACHE_CAPACITY
    }
    pub fn yes() -> bool {
        true
    }
}

impl EstimatorConfig {
    pub fn new(method: Method, budget: u64, seed: u64) -> Self {
        EstimatorConfig {
            method,
            budget,
            cycles: 5,
            floor: 1,
            seed,
            workers: 1,
            bins: None,
            cache: false,
            cache_capacity: DEFAULT_CACHE_CAPACITY,
            prune: true,
            dedup: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("sample budget must be at least 1".into()));
        }
        if self.cycles == 0 {
            return Err(Error::Config("cycle count must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        if self.bins == Some(0) {
            return Err(Error::Config("quantile bin count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub target: TupleId,
    pub method: Method,
    pub value: f64,
    pub budget: u64,
    pub cycles: u32,
    pub floor: u64,
    pub seed: u64,
    pub workers: usize,
    /// |N|
    pub players: usize,
    pub strata: Vec<StratumStats>,
    /// Per-cycle, per-stratum sample counts.
    pub allocations: Vec<Vec<u64>>,
    pub samples_used: u64,
    pub wall_time_s: f64,
    pub evaluator_time_s: f64,
    pub evaluations: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    /// Target is outside the lineage; the value is 0 without sampling.
    pub null_player: bool,
    pub warnings: Vec<String>,
}

impl EstimateReport {
    /// Equal up to timings and cache counters.
    pub fn same_outcome(&self, other: &EstimateReport) -> bool {
        self.value.to_bits() == other.value.to_bits()
            && self.samples_used == other.samples_used
            && self.allocations == other.allocations
            && self.strata.len() == other.strata.len()
            && self.strata.iter().zip(&other.strata).all(|(a, b)| {
                a.key == b.key
                    && a.count == b.count
                    && a.mean.to_bits() == b.mean.to_bits()
                    && a.m2.to_bits() == b.m2.to_bits()
                    && a.prob.to_bits() == b.prob.to_bits()
                    && a.card == b.card
                    && a.pruned == b.pruned
                    && a.exhausted == b.exhausted
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Member {
    counts: Vec<u32>,
    /// cumulative selection probability (∝ card)
    cum: f64,
    /// importance factor restoring the estimator weights inside a group
    factor: f64,
}

#[derive(Debug, Clone)]
enum Sampler {
    /// Each other player independently with probability 1/2; value scaled by `weights[|S|]`.
    Uniform { weights: Vec<f64> },
    Size(usize),
    Members(Vec<Member>),
    Pruned,
}

impl Sampler {
    fn enumerable(&self) -> bool {
        matches!(self, Sampler::Size(_)) || matches!(self, Sampler::Members(m) if m.len() == 1)
    }
}

struct Pools {
    target: usize,
    others: Vec<usize>,
    by_class: Vec<Vec<usize>>,
}

impl Pools {
    fn new(ctx: &GameContext, target: usize) -> Self {
        let others: Vec<usize> = (0..ctx.n()).filter(|&p| p != target).collect();
        let mut by_class = vec![Vec::new(); ctx.partition().relation_count()];
        for &p in &others {
            by_class[ctx.player_class(p)].push(p);
        }
        Pools {
            target,
            others,
            by_class,
        }
    }

    fn choose_counts(&self, counts: &[u32], rng: &mut impl Rng, s: &mut Coalition) {
        for (pool, &k) in self.by_class.iter().zip(counts) {
            for i in index::sample(rng, pool.len(), k as usize) {
                s.insert(pool[i]);
            }
        }
    }

    /// Draws one coalition into `s` (cleared by the caller); returns its value factor.
    fn draw(&self, sampler: &Sampler, rng: &mut impl Rng, s: &mut Coalition) -> f64 {
        match sampler {
            Sampler::Uniform { weights } => {
                let mut size = 0;
                let mut bits = 0u64;
                for (j, &p) in self.others.iter().enumerate() {
                    if j % 64 == 0 {
                        bits = rng.next_u64();
                    }
                    if bits & 1 == 1 {
                        s.insert(p);
                        size += 1;
                    }
                    bits >>= 1;
                }
                weights[size]
            }
            Sampler::Size(k) => {
                for i in index::sample(rng, self.others.len(), *k) {
                    s.insert(self.others[i]);
                }
                1.0
            }
            Sampler::Members(members) => {
                let m = if members.len() == 1 {
                    &members[0]
                } else {
                    let u: f64 = rng.gen();
                    let i = members.partition_point(|m| m.cum <= u).min(members.len() - 1);
                    &members[i]
                };
                self.choose_counts(&m.counts, rng, s);
                m.factor
            }
            Sampler::Pruned => unreachable!("pruned strata are never sampled"),
        }
    }

    /// Visits every coalition of an enumerable stratum.
    fn for_each(&self, sampler: &Sampler, n: usize, f: &mut dyn FnMut(&mut Coalition) -> Result<()>) -> Result<()> {
        let mut s = Coalition::empty(n);
        match sampler {
            Sampler::Size(k) => {
                for combo in self.others.iter().copied().combinations(*k) {
                    s.clear();
                    combo.into_iter().for_each(|p| s.insert(p));
                    f(&mut s)?;
                }
            }
            Sampler::Members(m) if m.len() == 1 => {
                let per_class: Vec<Vec<Vec<usize>>> = self
                    .by_class
                    .iter()
                    .zip(&m[0].counts)
                    .map(|(pool, &k)| pool.iter().copied().combinations(k as usize).collect())
                    .collect();
                for pick in per_class.iter().map(|c| c.iter()).multi_cartesian_product() {
                    s.clear();
                    pick.into_iter().flatten().for_each(|&p| s.insert(p));
                    f(&mut s)?;
                }
                if per_class.is_empty() {
                    s.clear();
                    f(&mut s)?;
                }
            }
            _ => return Err(Error::Domain("stratum cannot be enumerated".into())),
        }
        Ok(())
    }
}

struct RunEval<'a> {
    ctx: &'a GameContext,
    cache: CoalitionCache,
    nanos: AtomicU64,
    evals: AtomicU64,
}

impl RunEval<'_> {
    fn value(&self, s: &Coalition) -> Result<f64> {
        let start = Instant::now();
        let v = cached_eval(&self.cache, self.ctx, s);
        self.nanos
            .fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
        self.evals.fetch_add(1, Ordering::Relaxed);
        v
    }

    /// Δ_t(S), leaving `s` unchanged.
    fn delta(&self, s: &mut Coalition, t: usize) -> Result<f64> {
        let without = self.value(s)?;
        s.insert(t);
        let with = self.value(s);
        s.remove(t);
        Ok(with? - without)
    }
}

struct Design {
    stats: Vec<StratumStats>,
    samplers: Vec<Sampler>,
}

/// 2^(n−1)·w(s, n) for s in 0..n.
fn mcs_weights(n: usize) -> Result<Vec<f64>> {
    if n <= 60 {
        let scale = (1u64 << (n - 1)) as f64;
        return (0..n).map(|s| Ok(scale * shapley_weight(s, n)?)).collect();
    }
    // log space: (n−1)ln2 − ln n − ln C(n−1, s)
    let base = (n - 1) as f64 * std::f64::consts::LN_2 - (n as f64).ln();
    let mut ln_c = 0.0;
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        if s > 0 {
            ln_c += ((n - s) as f64).ln() - (s as f64).ln();
        }
        out.push((base - ln_c).exp());
    }
    Ok(out)
}

fn design_mcs(n: usize) -> Result<Design> {
    let card = BigUint::one() << (n - 1);
    Ok(Design {
        stats: vec![StratumStats::new(StratumKey::Uniform, 1.0, card, false)],
        samplers: vec![Sampler::Uniform {
            weights: mcs_weights(n)?,
        }],
    })
}

fn design_size(n: usize) -> Design {
    let prob = 1.0 / n as f64;
    let row = binomial_row(n as u64 - 1);
    let stats = row
        .into_iter()
        .enumerate()
        .map(|(k, card)| StratumStats::new(StratumKey::Size(k as u32), prob, card, false))
        .collect();
    Design {
        stats,
        samplers: (0..n).map(Sampler::Size).collect(),
    }
}

fn design_relation(ctx: &GameContext, t: TupleId, cfg: &EstimatorConfig) -> Result<Design> {
    let n = ctx.n();
    let partition = ctx.partition();
    let bounds = reduced_bounds(partition, t)?;
    let vectors = enumerate_grid(&bounds)?;
    let pruned: Vec<bool> = if cfg.prune {
        prune_strata(&vectors, ctx.query(), partition, t)
            .into_iter()
            .map(|a| a.pruned)
            .collect()
    } else {
        vec![false; vectors.len()]
    };
    let rows: Vec<Vec<BigUint>> = bounds.iter().map(|&b| binomial_row(b as u64)).collect();
    let card_of = |v: &RelationVector| -> BigUint {
        v.counts()
            .iter()
            .enumerate()
            .fold(BigUint::one(), |acc, (i, &s)| acc * &rows[i][s as usize])
    };
    let single = |v: &RelationVector| Member {
        counts: v.0.clone(),
        cum: 1.0,
        factor: 1.0,
    };

    let mut stats = Vec::new();
    let mut samplers = Vec::new();
    match cfg.bins {
        None => {
            for (v, &p) in vectors.iter().zip(&pruned) {
                let card = card_of(v);
                let prob = prob_from_card(&card, v.size(), n);
                stats.push(StratumStats::new(StratumKey::Vector(v.clone()), prob, card, p));
                samplers.push(if p { Sampler::Pruned } else { Sampler::Members(vec![single(v)]) });
            }
        }
        Some(q) => {
            let live: Vec<RelationVector> = vectors
                .iter()
                .zip(&pruned)
                .filter(|(_, &p)| !p)
                .map(|(v, _)| v.clone())
                .collect();
            for g in bin_strata(&live, &bounds, q)? {
                let cards: Vec<BigUint> = g.members.iter().map(|&i| card_of(&live[i])).collect();
                let probs: Vec<f64> = g
                    .members
                    .iter()
                    .zip(&cards)
                    .map(|(&i, c)| prob_from_card(c, live[i].size(), n))
                    .collect();
                if g.members.len() == 1 {
                    let v = &live[g.members[0]];
                    stats.push(StratumStats::new(
                        StratumKey::Vector(v.clone()),
                        probs[0],
                        cards[0].clone(),
                        false,
                    ));
                    samplers.push(Sampler::Members(vec![single(v)]));
                    continue;
                }
                let card_g: BigUint = cards.iter().sum();
                let prob_g: f64 = probs.iter().sum();
                let mut acc = 0.0;
                let mut members: Vec<Member> = g
                    .members
                    .iter()
                    .zip(cards.iter().zip(&probs))
                    .map(|(&i, (c, &p))| {
                        acc += ratio_to_f64(c, &card_g);
                        Member {
                            counts: live[i].0.clone(),
                            cum: acc,
                            factor: ratio_to_f64(&card_g, c) * p / prob_g,
                        }
                    })
                    .collect();
                if let Some(last) = members.last_mut() {
                    last.cum = 1.0;
                }
                stats.push(StratumStats::new(StratumKey::Bins(g.bins), prob_g, card_g, false));
                samplers.push(Sampler::Members(members));
            }
            for (v, _) in vectors.iter().zip(&pruned).filter(|(_, &p)| p) {
                let card = card_of(v);
                let prob = prob_from_card(&card, v.size(), n);
                stats.push(StratumStats::new(StratumKey::Vector(v.clone()), prob, card, true));
                samplers.push(Sampler::Pruned);
            }
        }
    }
    Ok(Design { stats, samplers })
}

enum UnitKind {
    Sample { block: u64, count: u64 },
    Exhaust,
}

struct Unit {
    stratum: usize,
    kind: UnitKind,
}

/// Allocation for one cycle. With dedup, strata whose allocation covers their
/// cardinality are enumerated instead and the freed budget is re-shared.
fn allocate_cycle(
    stats: &mut [StratumStats],
    samplers: &[Sampler],
    budget: u64,
    floor: u64,
    neyman: bool,
    dedup: bool,
    warnings: &mut Vec<String>,
) -> (Vec<u64>, Vec<usize>) {
    let mut left = budget;
    let mut exhausted_now: Vec<usize> = Vec::new();
    loop {
        let a: Allocation = if neyman {
            neyman_allocation(stats, left, floor)
        } else {
            proportional_allocation(stats, left, floor)
        };
        let newly: Vec<usize> = if dedup {
            (0..stats.len())
                .filter(|&i| {
                    stats[i].eligible()
                        && a.counts[i] > 0
                        && samplers[i].enumerable()
                        && stats[i].card <= BigUint::from(a.counts[i])
                })
                .collect()
        } else {
            Vec::new()
        };
        if newly.is_empty() {
            if let Some(w) = a.warning {
                warnings.push(w);
            }
            let mut counts = a.counts;
            for &i in &exhausted_now {
                counts[i] = stats[i].card.to_u64().expect("exhausted card fits the budget");
            }
            return (counts, exhausted_now);
        }
        for i in newly {
            stats[i].exhausted = true;
            left -= stats[i].card.to_u64().expect("card below allocation");
            exhausted_now.push(i);
        }
    }
}

fn null_report(t: TupleId, cfg: &EstimatorConfig, n: usize, start: Instant) -> EstimateReport {
    EstimateReport {
        target: t,
        method: cfg.method,
        value: 0.0,
        budget: cfg.budget,
        cycles: cfg.cycles,
        floor: cfg.floor,
        seed: cfg.seed,
        workers: cfg.workers,
        players: n,
        strata: Vec::new(),
        allocations: Vec::new(),
        samples_used: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        evaluator_time_s: 0.0,
        evaluations: 0,
        cache_hits: 0,
        cache_misses: 0,
        null_player: true,
        warnings: vec!["target is not in the lineage; value is 0".into()],
    }
}

/// Runs the estimator selected by `cfg.method`.
pub fn run_estimate(ctx: &GameContext, t: TupleId, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let start = Instant::now();
    if ctx.instance().locate(t).is_none() {
        return Err(Error::Domain(format!("tuple {t} does not exist")));
    }
    let Some(target) = ctx.player_index(t) else {
        return Ok(null_report(t, cfg, ctx.n(), start));
    };
    let n = ctx.n();
    let design = match cfg.method {
        Method::Mcs => design_mcs(n)?,
        Method::Ss | Method::Ass => design_size(n),
        Method::Rss | Method::Arss => design_relation(ctx, t, cfg)?,
    };
    let cycles = if cfg.method.is_adaptive() { cfg.cycles } else { 1 };
    let pools = Pools::new(ctx, target);
    let eval = RunEval {
        ctx,
        cache: CoalitionCache::new(if cfg.cache { cfg.cache_capacity } else { 0 }),
        nanos: AtomicU64::new(0),
        evals: AtomicU64::new(0),
    };
    let Design {
        mut stats,
        samplers,
    } = design;

    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let live = stats.iter().filter(|s| s.eligible()).count() as u64;
    let budgets = cycle_budgets(cfg.budget, cycles, cfg.floor.saturating_mul(live));
    let mut warnings = Vec::new();
    let mut allocations = Vec::with_capacity(budgets.len());
    let mut samples_used = 0u64;

    for (cycle, &budget) in budgets.iter().enumerate() {
        let (counts, exhaust) = allocate_cycle(
            &mut stats,
            &samplers,
            budget,
            cfg.floor,
            cycle > 0,
            cfg.dedup,
            &mut warnings,
        );
        let mut units = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            if exhaust.contains(&i) {
                units.push(Unit {
                    stratum: i,
                    kind: UnitKind::Exhaust,
                });
                continue;
            }
            let mut block = 0;
            let mut left = c;
            while left > 0 {
                let take = left.min(UNIT_SAMPLES);
                units.push(Unit {
                    stratum: i,
                    kind: UnitKind::Sample { block, count: take },
                });
                left -= take;
                block += 1;
            }
        }
        let run_unit = |u: &Unit| -> Result<Welford> {
            let mut w = Welford::default();
            let sampler = &samplers[u.stratum];
            match u.kind {
                UnitKind::Sample { block, count } => {
                    let mut rng = unit_rng(cfg.seed, u.stratum as u64, cycle as u64, block);
                    let mut s = Coalition::empty(n);
                    for _ in 0..count {
                        s.clear();
                        let factor = pools.draw(sampler, &mut rng, &mut s);
                        let d = eval.delta(&mut s, pools.target)?;
                        w.push(factor * d);
                    }
                }
                UnitKind::Exhaust => {
                    pools.for_each(sampler, n, &mut |s| {
                        let d = eval.delta(s, pools.target)?;
                        w.push(d);
                        Ok(())
                    })?;
                }
            }
            Ok(w)
        };
        let results: Vec<Result<Welford>> = match &pool {
            Some(p) => p.install(|| units.par_iter().map(run_unit).collect()),
            None => units.iter().map(run_unit).collect(),
        };
        for (u, r) in units.iter().zip(results) {
            let w = r?;
            samples_used += w.count;
            stats[u.stratum].absorb(&w);
        }
        allocations.push(counts);
    }

    let mut value = 0.0;
    for s in &stats {
        if s.pruned {
            continue;
        }
        if s.count == 0 {
            warnings.push(format!("stratum {:?} received no samples; its mean is taken as 0", s.key));
            continue;
        }
        value += s.prob * s.mean;
    }

    Ok(EstimateReport {
        target: t,
        method: cfg.method,
        value,
        budget: cfg.budget,
        cycles: cfg.cycles,
        floor: cfg.floor,
        seed: cfg.seed,
        workers: cfg.workers,
        players: n,
        strata: stats,
        allocations,
        samples_used,
        wall_time_s: start.elapsed().as_secs_f64(),
        evaluator_time_s: eval.nanos.load(Ordering::Relaxed) as f64 * 1e-9,
        evaluations: eval.evals.load(Ordering::Relaxed),
        cache_hits: eval.cache.hits(),
        cache_misses: eval.cache.misses(),
        null_player: false,
        warnings,
    })
}

fn expect_method(cfg: &EstimatorConfig, m: Method) -> Result<()> {
    if cfg.method != m {
        return Err(Error::Config(format!(
            "configuration is for {} but {} was requested",
            cfg.method, m
        )));
    }
    Ok(())
}

/// Plain Monte Carlo over uniformly random coalitions of N∖{t}.
pub fn run_mcs(ctx: &GameContext, t: TupleId, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    expect_method(cfg, Method::Mcs)?;
    run_estimate(ctx, t, cfg)
}

/// Size-stratified sampling with proportional allocation.
pub fn run_ss(ctx: &GameContext, t: TupleId, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    expect_method(cfg, Method::Ss)?;
    run_estimate(ctx, t, cfg)
}

/// Size strata with Neyman reallocation after a proportional first cycle.
pub fn run_ass(ctx: &GameContext, t: TupleId, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    expect_method(cfg, Method::Ass)?;
    run_estimate(ctx, t, cfg)
}

/// Relation-vector strata with proportional allocation.
pub fn run_rss(ctx: &GameContext, t: TupleId, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    expect_method(cfg, Method::Rss)?;
    run_estimate(ctx, t, cfg)
}

/// Relation-vector strata with Neyman reallocation after a proportional first cycle.
pub fn run_arss(ctx: &GameContext, t: TupleId, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    expect_method(cfg, Method::Arss)?;
    run_estimate(ctx, t, cfg)
}

/// Draws a uniform coalition from stratum `v`: `s_i` distinct tuples of each
/// relation, never the target.
pub fn sample_coalition(
    v: &RelationVector,
    partition: &crate::provenance::EndogenousPartition,
    t: TupleId,
    rng: &mut impl Rng,
) -> Result<Coalition> {
    let bounds = reduced_bounds(partition, t)?;
    if !v.within(&bounds) {
        return Err(Error::Domain(format!("relation vector {:?} is out of bounds {bounds:?}", v.0)));
    }
    let n = partition.player_count();
    let mut offset = 0;
    let mut s = Coalition::empty(n);
    for (c, &k) in partition.classes.iter().zip(v.counts()) {
        let pool: Vec<usize> = c
            .ids
            .iter()
            .enumerate()
            .filter(|(_, &id)| id != t)
            .map(|(j, _)| offset + j)
            .collect();
        for i in index::sample(rng, pool.len(), k as usize) {
            s.insert(pool[i]);
        }
        offset += c.ids.len();
    }
    Ok(s)
}

/// C(n−1, k) for callers that only need one value.
pub fn size_card(n: usize, k: usize) -> BigUint {
    binomial(n as u64 - 1, k as u64)
}
