use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};

use fixedbitset::FixedBitSet;
use lru::LruCache;
use parking_lot::Mutex;

use crate::error::Result;
use crate::game::{Coalition, GameContext};

pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 20;

/// Bounded LRU map from a coalition's canonical bit vector to v(S).
///
/// Lookups and inserts may race across workers; a lost insert only causes a
/// re-evaluation that produces the same value.
pub struct CoalitionCache {
    inner: Option<Mutex<LruCache<FixedBitSet, f64>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl CoalitionCache {
    /// Capacity 0 disables caching.
    pub fn new(capacity: usize) -> Self {
        CoalitionCache {
            inner: NonZeroUsize::new(capacity).map(|c| Mutex::new(LruCache::new(c))),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn disabled() -> Self {
        Self::new(0)
    }

    pub fn is_enabled(&self) -> bool {
        self.inner.is_some()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.inner.as_ref().map_or(0, |m| m.lock().len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &FixedBitSet) -> Option<f64> {
        self.inner.as_ref()?.lock().get(key).copied()
    }

    fn put(&self, key: FixedBitSet, v: f64) {
        if let Some(m) = &self.inner {
            m.lock().put(key, v);
        }
    }
}

impl std::fmt::Debug for CoalitionCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoalitionCache")
            .field("enabled", &self.is_enabled())
            .field("hits", &self.hits())
            .field("misses", &self.misses())
            .finish()
    }
}

/// v(S) through the cache.
pub fn cached_eval(cache: &CoalitionCache, ctx: &GameContext, s: &Coalition) -> Result<f64> {
    if !cache.is_enabled() {
        cache.misses.fetch_add(1, Ordering::Relaxed);
        return ctx.value(s);
    }
    if let Some(v) = cache.get(s.bits()) {
        cache.hits.fetch_add(1, Ordering::Relaxed);
        return Ok(v);
    }
    cache.misses.fetch_add(1, Ordering::Relaxed);
    let v = ctx.value(s)?;
    cache.put(s.bits().clone(), v);
    Ok(v)
}
