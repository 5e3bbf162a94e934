use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relshap::game::{
    exact_banzhaf_capped, exact_shapley_capped, exact_shapley_perm, EvaluatorKind, ExactMethod,
    GameContext, DEFAULT_EXACT_CAP,
};
use relshap::harness::{gen_instance, preset, run_bench, BenchSpec, GenSpec, Preset, Scale};
use relshap::provenance::compute_lineage;
use relshap::relcore::{load_from_schema_file, DatabaseInstance, QuerySpec};
use relshap::samplers::{run_estimate, EstimatorConfig, Method};
use relshap::{Error, Result};

#[derive(Parser)]
#[command(name = "relshap", version, about = "Shapley attribution of query answers to database tuples")]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sampling and enumeration.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output path (a directory for `gen`, a report file otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic star instance (schema, tables, query).
    Gen(GenArgs),
    /// Print the endogenous lineage of a query, grouped by relation.
    Provenance(Input),
    /// Exact value by exhaustive enumeration.
    Exact(ExactArgs),
    /// Sampled estimate with a full report.
    Estimate(EstimateArgs),
    /// Repeated estimates over methods and budgets.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Input {
    /// Schema JSON; tables are read next to it.
    #[arg(long)]
    schema: PathBuf,
    /// Query JSON.
    #[arg(long)]
    query: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Fixed instance instead of a random one: example1 or example1-const.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = 100)]
    fact: usize,
    #[arg(long, default_value_t = 10)]
    orders: usize,
    #[arg(long, default_value_t = 5)]
    customers: usize,
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    /// Query every AUTO order instead of just the first one.
    #[arg(long)]
    no_focus: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExactFlag {
    Subset,
    Perm,
    Banzhaf,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    input: Input,
    /// Tuple id or `relation#row`.
    #[arg(long)]
    target: String,
    #[arg(long, value_enum, default_value = "subset")]
    method: ExactFlag,
    /// Largest player count accepted.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    cap: usize,
    #[arg(long, default_value = "compiled")]
    evaluator: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    target: String,
    #[arg(long)]
    method: String,
    #[arg(long)]
    budget: u64,
    #[arg(long, default_value_t = 5)]
    cycles: u32,
    #[arg(long, default_value_t = 1)]
    floor: u64,
    #[arg(long, default_value = "compiled")]
    evaluator: String,
    /// Coalition cache entries; 0 disables the cache.
    #[arg(long, default_value_t = 0)]
    cache_capacity: usize,
    #[arg(long, value_enum, default_value = "on")]
    prune: OnOff,
    /// Quantile bins per relation for relation-vector strata.
    #[arg(long)]
    bins: Option<u32>,
    /// Enumerate strata whose allocation covers all their coalitions.
    #[arg(long)]
    dedup: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Bench specification JSON; other flags are ignored when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "mcs,ss,ass,rss,arss")]
    methods: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    budgets: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    reps: u32,
    #[arg(long, default_value_t = 5)]
    cycles: u32,
    #[arg(long, default_value_t = 1)]
    floor: u64,
    #[arg(long, default_value = "compiled")]
    evaluator: String,
    /// Skip the exact reference (required above the oracle cap).
    #[arg(long)]
    no_exact: bool,
    /// Run cells concurrently.
    #[arg(long)]
    parallel_cells: bool,
}

fn load(input: &Input) -> Result<(Arc<DatabaseInstance>, QuerySpec)> {
    Ok((
        Arc::new(load_from_schema_file(&input.schema)?),
        QuerySpec::from_file(&input.query)?,
    ))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn init_pool(workers: usize) -> Result<()> {
    if workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    // Enumeration uses the global pool; a second init (tests, embedding) is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_pool(cli.workers)?;
    match cli.cmd {
        Cmd::Gen(a) => {
            let dir = cli
                .out
                .ok_or_else(|| Error::Config("gen needs --out DIR".into()))?;
            let g = match a.preset {
                Some(p) => preset(p.parse::<Preset>()?),
                None => gen_instance(&GenSpec {
                    seed: cli.seed,
                    scale: Scale {
                        fact: a.fact,
                        orders: a.orders,
                        customers: a.customers,
                    },
                    skew: a.skew,
                    focus: !a.no_focus,
                })?,
            };
            for p in g.write_to(&dir)? {
                println!("{}", p.display());
            }
        }
        Cmd::Provenance(input) => {
            let (db, q) = load(&input)?;
            let part = compute_lineage(&q, &db)?;
            let mut text = String::new();
            for c in &part.classes {
                let ids: Vec<String> = c.ids.iter().map(|id| db.label(*id)).collect();
                text += &format!("{} ({}): {}\n", c.name, c.ids.len(), ids.join(" "));
            }
            text += &format!("players: {}\n", part.player_count());
            print!("{text}");
            if let Some(out) = &cli.out {
                write_out(out, &text)?;
            }
        }
        Cmd::Exact(a) => {
            let (db, q) = load(&a.input)?;
            let t = db.resolve_ref(&a.target)?;
            let ctx = GameContext::new(db, &q, a.evaluator.parse::<EvaluatorKind>()?)?;
            let start = Instant::now();
            let (name, v) = match a.method {
                ExactFlag::Subset => ("shapley", exact_shapley_capped(&ctx, t, a.cap)?),
                ExactFlag::Perm => ("shapley", exact_shapley_perm(&ctx, t)?),
                ExactFlag::Banzhaf => ("banzhaf", exact_banzhaf_capped(&ctx, t, a.cap)?),
            };
            let secs = start.elapsed().as_secs_f64();
            let method = match a.method {
                ExactFlag::Subset => ExactMethod::Subset,
                ExactFlag::Perm => ExactMethod::Permutation,
                ExactFlag::Banzhaf => ExactMethod::Banzhaf,
            };
            let report = serde_json::json!({
                "target": t,
                "label": ctx.instance().label(t),
                "kind": name,
                "method": format!("{method:?}").to_lowercase(),
                "value": v,
                "players": ctx.n(),
                "seconds": secs,
            });
            println!("{name}({}) = {v} [{} players, {secs:.3} s]", ctx.instance().label(t), ctx.n());
            if let Some(out) = &cli.out {
                write_out(out, &serde_json::to_string_pretty(&report)?)?;
            }
        }
        Cmd::Estimate(a) => {
            let (db, q) = load(&a.input)?;
            let t = db.resolve_ref(&a.target)?;
            let ctx = GameContext::new(db, &q, a.evaluator.parse::<EvaluatorKind>()?)?;
            let mut cfg = EstimatorConfig::new(a.method.parse::<Method>()?, a.budget, cli.seed);
            cfg.cycles = a.cycles;
            cfg.floor = a.floor;
            cfg.workers = cli.workers;
            cfg.cache = a.cache_capacity > 0;
            cfg.cache_capacity = a.cache_capacity;
            cfg.prune = a.prune == OnOff::On;
            cfg.bins = a.bins;
            cfg.dedup = a.dedup;
            let rep = run_estimate(&ctx, t, &cfg)?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}({}) ≈ {} [{} samples, {:.3} s]",
                rep.method,
                ctx.instance().label(t),
                rep.value,
                rep.samples_used,
                rep.wall_time_s
            );
            if let Some(out) = &cli.out {
                write_out(out, &rep.to_json())?;
            }
        }
        Cmd::Bench(a) => {
            let spec = match &a.spec {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    serde_json::from_str::<BenchSpec>(&text)?
                }
                None => BenchSpec {
                    schema: a
                        .schema
                        .clone()
                        .ok_or_else(|| Error::Config("bench needs --spec or --schema".into()))?,
                    query: a
                        .query
                        .clone()
                        .ok_or_else(|| Error::Config("bench needs --spec or --query".into()))?,
                    targets: a.targets.clone(),
                    methods: a
                        .methods
                        .iter()
                        .map(|m| m.parse())
                        .collect::<Result<_>>()?,
                    budgets: a.budgets.clone(),
                    reps: a.reps,
                    seed: cli.seed,
                    cycles: a.cycles,
                    floor: a.floor,
                    workers: cli.workers,
                    evaluator: a.evaluator.parse()?,
                    no_exact: a.no_exact,
                    exact_cap: DEFAULT_EXACT_CAP,
                    parallel_cells: a.parallel_cells,
                },
            };
            let res = run_bench(&spec)?;
            for t in &res.targets {
                println!("target {} exact={:?}", t.label, t.exact);
                for c in &t.cells {
                    let err = match (c.mre, c.abs_error) {
                        (Some(m), _) => format!("mre={m:.6}"),
                        (None, Some(e)) => format!("abs_err={e:.6}"),
                        _ => "no reference".into(),
                    };
                    println!(
                        "  {:<5} m={:<8} {} wall={:.4}s eval={:.4}s",
                        c.method, c.budget, err, c.mean_wall_s, c.mean_evaluator_s
                    );
                }
                for w in &t.warnings {
                    eprintln!("warning: {w}");
                }
            }
            if let Some(out) = &cli.out {
                write_out(out, &res.to_json())?;
                write_out(&out.with_extension("csv"), &res.to_csv())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
