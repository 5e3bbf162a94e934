use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mean_abs_error, mre};
use crate::error::{Error, Result};
use crate::game::{exact_shapley_capped, EvaluatorKind, GameContext, DEFAULT_EXACT_CAP};
use crate::relcore::{load_from_schema_file, QuerySpec, TupleId};
use crate::samplers::{run_estimate, EstimatorConfig, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub schema: PathBuf,
    pub query: PathBuf,
    /// Tuple references (`relation#row` or numeric ids).
    pub targets: Vec<String>,
    pub methods: Vec<Method>,
    pub budgets: Vec<u64>,
    pub reps: u32,
    /// Repetition r runs with seed `seed + r`.
    pub seed: u64,
    #[serde(default = "default_cycles")]
    pub cycles: u32,
    #[serde(default = "default_floor")]
    pub floor: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub evaluator: EvaluatorKind,
    #[serde(default)]
    pub no_exact: bool,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
    /// Run (method, budget) cells concurrently; timings then overlap.
    #[serde(default)]
    pub parallel_cells: bool,
}

fn default_cycles() -> u32 {
    5
}
fn default_floor() -> u64 {
    1
}
fn default_workers() -> usize {
    1
}
fn default_exact_cap() -> usize {
    DEFAULT_EXACT_CAP
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.methods.is_empty() || self.budgets.is_empty() || self.targets.is_empty() {
            return Err(Error::Config("methods, budgets and targets must be nonempty".into()));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("budgets must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchCell {
    pub method: Method,
    pub budget: u64,
    pub estimates: Vec<f64>,
    pub seconds: Vec<f64>,
    pub evaluator_seconds: Vec<f64>,
    /// Only when the exact value is known and nonzero.
    pub mre: Option<f64>,
    /// Mean absolute error, whenever the exact value is known.
    pub abs_error: Option<f64>,
    pub mean_wall_s: f64,
    pub mean_evaluator_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetBench {
    pub target: TupleId,
    pub label: String,
    pub exact: Option<f64>,
    pub oracle_time_s: Option<f64>,
    pub cells: Vec<BenchCell>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub players: usize,
    pub empty_value: f64,
    pub full_value: f64,
    pub targets: Vec<TargetBench>,
}

impl BenchResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench result serializes")
    }

    /// Flat table: target,method,budget,rep,estimate,seconds
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["target", "method", "budget", "rep", "estimate", "seconds"])
            .expect("in-memory write");
        for t in &self.targets {
            for c in &t.cells {
                for (r, (e, s)) in c.estimates.iter().zip(&c.seconds).enumerate() {
                    w.write_record([
                        t.target.to_string(),
                        c.method.to_string(),
                        c.budget.to_string(),
                        r.to_string(),
                        e.to_string(),
                        s.to_string(),
                    ])
                    .expect("in-memory write");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Cells for `target`, keyed by (method, budget).
    pub fn cell(&self, target: TupleId, method: Method, budget: u64) -> Option<&BenchCell> {
        self.targets
            .iter()
            .find(|t| t.target == target)?
            .cells
            .iter()
            .find(|c| c.method == method && c.budget == budget)
    }
}

/// Loads the instance and query named in `spec` and runs it.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchResult> {
    spec.validate()?;
    let db = Arc::new(load_from_schema_file(&spec.schema)?);
    let query = QuerySpec::from_file(&spec.query)?;
    let ctx = GameContext::new(db, &query, spec.evaluator)?;
    run_bench_on(&ctx, spec)
}

/// Runs `spec` against an already-built context; the schema and query paths are ignored.
pub fn run_bench_on(ctx: &GameContext, spec: &BenchSpec) -> Result<BenchResult> {
    spec.validate()?;
    let targets: Vec<TupleId> = spec
        .targets
        .iter()
        .map(|r| ctx.instance().resolve_ref(r))
        .collect::<Result<_>>()?;
    if !spec.no_exact && ctx.n() > spec.exact_cap {
        return Err(Error::Cap(format!(
            "exact reference over {} players exceeds the cap of {}; rerun with no_exact",
            ctx.n(),
            spec.exact_cap
        )));
    }
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let (exact, oracle_time_s) = if spec.no_exact {
            (None, None)
        } else {
            let start = Instant::now();
            let v = exact_shapley_capped(ctx, t, spec.exact_cap)?;
            (Some(v), Some(start.elapsed().as_secs_f64()))
        };
        let grid: Vec<(Method, u64)> = spec
            .methods
            .iter()
            .flat_map(|&m| spec.budgets.iter().map(move |&b| (m, b)))
            .collect();
        let run_cell = |&(method, budget): &(Method, u64)| run_cell(ctx, spec, t, method, budget, exact);
        let cells: Vec<Result<(BenchCell, Vec<String>)>> = if spec.parallel_cells {
            grid.par_iter().map(run_cell).collect()
        } else {
            grid.iter().map(run_cell).collect()
        };
        let mut warnings = Vec::new();
        let mut done = Vec::with_capacity(cells.len());
        for c in cells {
            let (cell, w) = c?;
            warnings.extend(w);
            done.push(cell);
        }
        if exact == Some(0.0) {
            warnings.push("exact value is 0; relative error suppressed, absolute error reported".into());
        }
        out.push(TargetBench {
            target: t,
            label: ctx.instance().label(t),
            exact,
            oracle_time_s,
            cells: done,
            warnings,
        });
    }
    Ok(BenchResult {
        players: ctx.n(),
        empty_value: ctx.empty_value(),
        full_value: ctx.full_value()?,
        targets: out,
    })
}

fn run_cell(
    ctx: &GameContext,
    spec: &BenchSpec,
    t: TupleId,
    method: Method,
    budget: u64,
    exact: Option<f64>,
) -> Result<(BenchCell, Vec<String>)> {
    let mut estimates = Vec::with_capacity(spec.reps as usize);
    let mut seconds = Vec::with_capacity(spec.reps as usize);
    let mut evaluator_seconds = Vec::with_capacity(spec.reps as usize);
    let mut warnings = Vec::new();
    for r in 0..spec.reps as u64 {
        let mut cfg = EstimatorConfig::new(method, budget, spec.seed.wrapping_add(r));
        cfg.cycles = spec.cycles;
        cfg.floor = spec.floor;
        cfg.workers = spec.workers;
        let rep = run_estimate(ctx, t, &cfg)?;
        estimates.push(rep.value);
        seconds.push(rep.wall_time_s);
        evaluator_seconds.push(rep.evaluator_time_s.min(rep.wall_time_s));
        if r == 0 {
            warnings.extend(rep.warnings.into_iter().map(|w| format!("{method}@{budget}: {w}")));
        }
    }
    let k = spec.reps as f64;
    let cell = BenchCell {
        method,
        budget,
        mre: exact.filter(|&e| e != 0.0).map(|e| mre(&estimates, e)).transpose()?,
        abs_error: exact.map(|e| mean_abs_error(&estimates, e)).transpose()?,
        mean_wall_s: seconds.iter().sum::<f64>() / k,
        mean_evaluator_s: evaluator_seconds.iter().sum::<f64>() / k,
        estimates,
        seconds,
        evaluator_seconds,
    };
    Ok((cell, warnings))
}
