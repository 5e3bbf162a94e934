//! Per-sample cost reduction: compiled witness views, coalition caching,
//! static stratum pruning and quantile binning of relation vectors.

mod bins;
mod cache;
mod prune;
mod view;

pub use bins::{bin_of, bin_strata, StratumGroup};
pub use cache::{cached_eval, CoalitionCache, DEFAULT_CACHE_CAPACITY};
pub use prune::{prune_strata, AnnotatedStratum};
pub use view::{compile_prepared, compile_view, eval_compiled, CompiledView, PlayerView, DEFAULT_VIEW_CAP};
