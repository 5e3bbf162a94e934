//! Synthetic instances, error metrics and repeated-run benchmarks.

mod bench;
mod gen;
mod metrics;

pub use bench::{run_bench, run_bench_on, BenchCell, BenchResult, BenchSpec, TargetBench};
pub use gen::{gen_instance, preset, GenSpec, GeneratedInstance, Preset, Scale};
pub use metrics::{mean_abs_error, mean_se, mre, mse};
