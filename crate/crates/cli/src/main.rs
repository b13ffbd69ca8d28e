//! `curvegrid`: build, query, audit and benchmark curve indexes.

mod input;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use curvegrid::audit::{self, BenchQueries};
use curvegrid::index_file::AnyIndex;
use curvegrid::{
    AsrsIndex, AsrsOutcome, AsymIndex, AsymParams, Error, Metric, QueryOutcome, SymIndex, TwdIndex, DEFAULT_BUDGET,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Printed when a query falls outside the grid of the index.
const REJECTED: &str = "REJECTED_OUTSIDE_GRID";

#[derive(Parser)]
#[command(name = "curvegrid", version, about = "Grid-hash indexes for polygonal curves under the Fréchet distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Asym,
    Sym,
    Asrs,
    Twd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Continuous,
    Discrete,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Continuous => Metric::Continuous,
            MetricArg::Discrete => Metric::Discrete,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build an index and write it to a file.
    Build {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Curve file (asym, sym, asrs): one {"id", "points"} record per line.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// Point file (twd): one {"region", "t"} record per line.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: f64,
        /// Query size (asym, asrs).
        #[arg(long)]
        k: Option<usize>,
        /// Minimum point count per region (twd).
        #[arg(long)]
        theta: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value = "continuous")]
        metric: MetricArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query an index with curves from a file, or with a time window.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
    },
    /// Verify an index against brute-force references.
    Check {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare query cost and time of the index against a linear scan.
    Bench {
        #[arg(long)]
        index: PathBuf,
        /// Query curves, or time windows for twd; random queries when absent.
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Number of random queries when no query file is given.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::Io(_) | Error::Json(_) | Error::Format(_) | Error::OutOfBounds(_) => 4,
        _ => 2,
    }
}

fn required<T>(v: Option<T>, flag: &str, kind: &str) -> curvegrid::Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for kind {kind}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build { kind, curves, points, delta, eps, k, theta, budget, metric, out } => {
            build(kind, curves, points, delta, eps, k, theta, budget, metric.into(), out)
        }
        Command::Query { index, query, from, to } => run_query(index, query, from, to),
        Command::Check { index, trials, seed } => check(index, trials, seed),
        Command::Bench { index, query, reps, trials, seed } => bench(index, query, reps, trials, seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build(
    kind: Kind,
    curves: Option<PathBuf>,
    points: Option<PathBuf>,
    delta: Option<f64>,
    eps: f64,
    k: Option<usize>,
    theta: Option<usize>,
    budget: u64,
    metric: Metric,
    out: PathBuf,
) -> curvegrid::Result<u8> {
    let started = Instant::now();
    let index = match kind {
        Kind::Asym => {
            let (delta, k) = (required(delta, "delta", "asym")?, required(k, "k", "asym")?);
            let curves = input::curves(&required(curves, "curves", "asym")?)?;
            let params = AsymParams::new(delta, eps, k).with_metric(metric).with_budget(budget);
            AnyIndex::Asym(AsymIndex::build(curves, params)?)
        }
        Kind::Sym => {
            if metric != Metric::Discrete {
                eprintln!("note: the symmetric index uses the discrete metric");
            }
            let delta = required(delta, "delta", "sym")?;
            let curves = input::curves(&required(curves, "curves", "sym")?)?;
            let params = curvegrid::anns_sym::SymParams::new(delta, eps).with_budget(budget);
            AnyIndex::Sym(SymIndex::build(curves, params)?)
        }
        Kind::Asrs => {
            let (delta, k) = (required(delta, "delta", "asrs")?, required(k, "k", "asrs")?);
            let mut curves = input::curves(&required(curves, "curves", "asrs")?)?;
            if curves.len() != 1 {
                return Err(Error::InvalidParameter(format!(
                    "kind asrs indexes exactly one curve, the file has {}",
                    curves.len()
                )));
            }
            let params = AsymParams::new(delta, eps, k).with_budget(budget);
            AnyIndex::Asrs(AsrsIndex::build(curves.remove(0), params)?)
        }
        Kind::Twd => {
            let theta = required(theta, "theta", "twd")?;
            let points = input::points(&required(points, "points", "twd")?)?;
            AnyIndex::Twd(TwdIndex::build(points, theta, eps)?)
        }
    };
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    index.save(&out)?;
    let mut summary = match &index {
        AnyIndex::Asym(i) => json!({
            "buckets": i.bucket_count(),
            "stored": i.stored_entries(),
            "cells_per_axis": i.grid().cells_per_axis(),
            "lattice_points": i.grid().lattice_point_count().to_string(),
            "path_capacity": i.path_capacity().to_string(),
            "diameter_estimate": i.diameter_estimate(),
        }),
        AnyIndex::Sym(i) => json!({
            "buckets": i.bucket_count(),
            "stored": i.stored_entries(),
            "cell": i.cell(),
            "marked_radius": i.params().r_marked(),
        }),
        AnyIndex::Asrs(i) => json!({
            "buckets": i.bucket_count(),
            "stored": i.stored_entries(),
            "cells_per_axis": i.grid().cells_per_axis(),
            "lattice_points": i.grid().lattice_point_count().to_string(),
            "path_capacity": i.path_capacity().to_string(),
            "diameter_estimate": i.diameter_estimate(),
        }),
        AnyIndex::Twd(i) => json!({
            "buckets": i.buckets().count(),
            "steps": i.steps(),
            "windows": i.window_count(),
            "step": i.step(),
        }),
    };
    summary["kind"] = json!(index.kind());
    summary["elapsed_ms"] = json!(elapsed_ms);
    println!("{summary}");
    Ok(0)
}

fn run_query(index: PathBuf, query: Option<PathBuf>, from: Option<f64>, to: Option<f64>) -> curvegrid::Result<u8> {
    let index = AnyIndex::load(index)?;
    let mut lines: Vec<String> = Vec::new();
    if let AnyIndex::Twd(i) = &index {
        let (from, to) = (required(from, "from", "twd")?, required(to, "to", "twd")?);
        let s = i.query(from, to)?;
        lines.extend(s.inner.iter().map(|r| format!("S1\t{r}")));
        lines.extend(s.outer.iter().map(|r| format!("S2\t{r}")));
    } else {
        let queries = input::curves(&required(query, "query", index.kind())?)?;
        let many = queries.len() > 1;
        for q in &queries {
            if many {
                lines.push(format!("# {}", q.id()));
            }
            lines.extend(answer(&index, q)?);
        }
    }
    for l in lines {
        println!("{l}");
    }
    Ok(0)
}

fn answer(index: &AnyIndex, q: &curvegrid::Curve) -> curvegrid::Result<Vec<String>> {
    let ids = |curves: &[curvegrid::Curve], hits: &[usize]| {
        let mut v: Vec<String> = hits.iter().map(|&h| curves[h].id().to_string()).collect();
        v.sort();
        v
    };
    Ok(match index {
        AnyIndex::Asym(i) => match i.query(q)? {
            QueryOutcome::Hits(h) => ids(i.curves(), &h),
            QueryOutcome::RejectedOutsideGrid => vec![REJECTED.to_string()],
        },
        AnyIndex::Sym(i) => ids(i.curves(), &i.query(q)?),
        AnyIndex::Asrs(i) => match i.query(q)? {
            AsrsOutcome::Ranges(mut r) => {
                r.sort_by(|a, b| a.start.total_cmp(&b.start));
                r.iter().map(ToString::to_string).collect()
            }
            AsrsOutcome::RejectedOutsideGrid => vec![REJECTED.to_string()],
        },
        AnyIndex::Twd(_) => unreachable!("windows are handled by the caller"),
    })
}

fn check(index: PathBuf, trials: usize, seed: u64) -> curvegrid::Result<u8> {
    let index = AnyIndex::load(index)?;
    let report = audit::check(&index, trials, seed)?;
    for v in &report.violations {
        println!("VIOLATION {v}");
    }
    println!(
        "{}",
        json!({
            "kind": index.kind(),
            "entries_checked": report.entries_checked,
            "trials": report.trials,
            "seed": seed,
            "violations": report.violations.len(),
        })
    );
    Ok(if report.passed() { 0 } else { 1 })
}

fn bench(index: PathBuf, query: Option<PathBuf>, reps: usize, trials: usize, seed: u64) -> curvegrid::Result<u8> {
    if reps == 0 {
        return Err(Error::InvalidParameter("--reps must be at least 1".into()));
    }
    let index = AnyIndex::load(index)?;
    let queries = match (&index, query) {
        (AnyIndex::Twd(_), Some(path)) => BenchQueries::Windows(input::windows(&path)?),
        (_, Some(path)) => BenchQueries::Curves(input::curves(&path)?),
        (_, None) => random_queries(&index, trials, seed),
    };
    let report = audit::bench(&index, &queries, reps)?;
    let first = report.costs.first().copied().unwrap_or_default();
    println!(
        "{}",
        json!({
            "kind": index.kind(),
            "catalog": report.catalog,
            "queries": report.queries,
            "reps": report.reps,
            "ops_per_query": first,
            "constant_cost": report.constant_cost(),
            "index_ns_per_query": report.index_ns_per_query,
            "scan_ns_per_query": report.scan_ns_per_query,
        })
    );
    Ok(0)
}

fn random_queries(index: &AnyIndex, count: usize, seed: u64) -> BenchQueries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves_from = |pool: &[curvegrid::Curve], k: Option<usize>, delta: f64| {
        (0..count)
            .map(|_| {
                let src = &pool[rng.gen_range(0..pool.len())];
                let k = k.unwrap_or_else(|| rng.gen_range(1..=src.len()));
                audit::perturbed_query(&mut rng, src, k, delta)
            })
            .collect()
    };
    match index {
        AnyIndex::Asym(i) => BenchQueries::Curves(curves_from(i.curves(), Some(i.params().k), i.params().delta)),
        AnyIndex::Sym(i) if i.curves().is_empty() => BenchQueries::Curves(Vec::new()),
        AnyIndex::Sym(i) => BenchQueries::Curves(curves_from(i.curves(), None, i.params().delta)),
        AnyIndex::Asrs(i) => {
            BenchQueries::Curves(curves_from(std::slice::from_ref(i.curve()), Some(i.params().k), i.params().delta))
        }
        AnyIndex::Twd(i) => {
            let s = i.time_scale();
            let (lo, hi) = i.span();
            let raw = |v: f64| v / s.scale + s.offset;
            BenchQueries::Windows(
                (0..count)
                    .map(|_| {
                        let a = rng.gen_range(lo..=hi);
                        let b = rng.gen_range(lo..=hi);
                        (raw(a.min(b)), raw(a.max(b)) + (hi - lo).max(1e-9) / s.scale * 1e-3)
                    })
                    .collect(),
            )
        }
    }
}
