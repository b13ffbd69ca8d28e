//! Cross-checks of a built index against the brute-force oracles, and a
//! small benchmark of index lookups against linear scans.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asrs::extract_inclusion_minimal;
use crate::geometry::{discrete_frechet, Curve, Metric};
use crate::index_file::AnyIndex;
use crate::oracle::{sampled_subcurve_witness, scan_near_neighbors, window_regions};
use crate::{AsrsIndex, AsymIndex, QueryCost, QueryOutcome, Result, SymIndex, TwdIndex};

/// Resolution of the sampled witness search used when auditing range search.
const WITNESS_RESOLUTION: f64 = 0.1;

/// A broken guarantee, with enough context to reproduce it.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Randomized trial number, or `None` for a structural check.
    pub trial: Option<usize>,
    pub message: String,
    pub instance: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.trial {
            Some(t) => write!(f, "trial {t}: {} [{}]", self.message, self.instance),
            None => write!(f, "bucket check: {} [{}]", self.message, self.instance),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub entries_checked: usize,
    pub trials: usize,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn structural(&mut self, message: String, instance: String) {
        self.violations.push(Violation { trial: None, message, instance });
    }

    fn trial(&mut self, trial: usize, message: String, instance: String) {
        self.violations.push(Violation { trial: Some(trial), message, instance });
    }
}

fn curve_text(c: &Curve) -> String {
    serde_json::to_string(&c.to_vertices()).unwrap_or_default()
}

/// Random query curve of `k` vertices that follows `source` with uniform
/// noise of at most `noise` per coordinate.
pub fn perturbed_query(rng: &mut impl Rng, source: &Curve, k: usize, noise: f64) -> Curve {
    let n = source.len() as f64;
    let mut params: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..=n)).collect();
    params.sort_by(f64::total_cmp);
    if k >= 2 {
        params[0] = 1.0;
        params[k - 1] = n;
    }
    let pts = params
        .iter()
        .map(|&s| source.point_at(s).into_iter().map(|x| x + rng.gen_range(-noise..=noise)).collect())
        .collect();
    Curve::new("query", pts).expect("finite query")
}

/// Audits `index`: verifies every stored entry against its bucket, then runs
/// `trials` random queries from `seed` against the oracles.
pub fn check(index: &AnyIndex, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport { trials, ..CheckReport::default() };
    match index {
        AnyIndex::Asym(i) => check_asym(i, trials, &mut rng, &mut report)?,
        AnyIndex::Sym(i) => check_sym(i, trials, &mut rng, &mut report)?,
        AnyIndex::Asrs(i) => check_asrs(i, trials, &mut rng, &mut report)?,
        AnyIndex::Twd(i) => check_twd(i, trials, &mut rng, &mut report),
    }
    Ok(report)
}

fn check_asym(i: &AsymIndex, trials: usize, rng: &mut ChaCha8Rng, report: &mut CheckReport) -> Result<()> {
    let p = *i.params();
    let mut buckets: Vec<_> = i.buckets().collect();
    buckets.sort_by(|a, b| a.0.cmp(b.0));
    for (key, ids) in buckets {
        let path = i.path_curve(key)?;
        for &id in ids {
            report.entries_checked += 1;
            let c = &i.curves()[id as usize];
            if !p.metric.decide(c, &path, p.store_threshold())? {
                report.structural(format!("curve {} is farther than {} from its path", c.id(), p.store_threshold()), key.to_string());
            }
        }
    }
    for t in 0..trials {
        let src = &i.curves()[rng.gen_range(0..i.curves().len())];
        let noise = p.delta * rng.gen_range(0.0..1.5);
        let q = perturbed_query(rng, src, p.k, noise);
        let (near, stretched) = scan_near_neighbors(i.curves(), &q, p.delta, p.eps, p.metric)?;
        match i.query(&q)? {
            QueryOutcome::RejectedOutsideGrid => {
                if let Some(&c) = near.first() {
                    report.trial(t, format!("rejected but curve {} is within delta", i.curves()[c].id()), curve_text(&q));
                }
            }
            QueryOutcome::Hits(hits) => {
                for c in hits.iter().filter(|c| stretched.binary_search(c).is_err()) {
                    report.trial(t, format!("returned curve {} beyond (1+eps)delta", i.curves()[*c].id()), curve_text(&q));
                }
                for c in near.iter().filter(|c| hits.binary_search(c).is_err()) {
                    report.trial(t, format!("missed curve {} within delta", i.curves()[*c].id()), curve_text(&q));
                }
            }
        }
    }
    Ok(())
}

fn check_sym(i: &SymIndex, trials: usize, rng: &mut ChaCha8Rng, report: &mut CheckReport) -> Result<()> {
    let p = *i.params();
    let mut buckets: Vec<_> = i.buckets().collect();
    buckets.sort_by(|a, b| a.0.cmp(b.0));
    for (key, ids) in buckets {
        let path = i.path_curve(key)?;
        for &id in ids {
            report.entries_checked += 1;
            let c = &i.curves()[id as usize];
            if !Metric::Discrete.decide(c, &path, p.r_outer())? {
                report.structural(format!("curve {} is farther than {} from its path", c.id(), p.r_outer()), key.to_string());
            }
        }
    }
    if i.curves().is_empty() {
        return Ok(());
    }
    for t in 0..trials {
        let src = &i.curves()[rng.gen_range(0..i.curves().len())];
        let k = rng.gen_range(1..=src.len() + 2);
        let noise = p.delta * rng.gen_range(0.0..1.5);
        let q = perturbed_query(rng, src, k, noise);
        let hits = i.query(&q)?;
        for (c, curve) in i.curves().iter().enumerate() {
            let d = discrete_frechet(curve, &q)?;
            let hit = hits.binary_search(&c).is_ok();
            if hit && d > p.guarantee() * (1.0 + 1e-9) {
                report.trial(t, format!("returned curve {} at distance {d}", curve.id()), curve_text(&q));
            }
            if !hit && d <= p.delta {
                report.trial(t, format!("missed curve {} at distance {d}", curve.id()), curve_text(&q));
            }
        }
    }
    Ok(())
}

fn check_asrs(i: &AsrsIndex, trials: usize, rng: &mut ChaCha8Rng, report: &mut CheckReport) -> Result<()> {
    let p = *i.params();
    let curve = i.curve();
    let mut buckets: Vec<_> = i.buckets().collect();
    buckets.sort_by(|a, b| a.0.cmp(b.0));
    for (key, ranges) in buckets {
        let path = i.path_curve(key)?;
        for (j, r) in ranges.iter().enumerate() {
            report.entries_checked += 1;
            if !Metric::Continuous.decide(&r.subcurve(curve), &path, p.store_threshold())? {
                report.structural(format!("range {r} is farther than {} from its path", p.store_threshold()), key.to_string());
            }
            if ranges[..j].iter().any(|o| o.overlaps(r)) {
                report.structural(format!("range {r} overlaps another range of its bucket"), key.to_string());
            }
        }
    }
    for t in 0..trials {
        // a random stretch of the curve, perturbed
        let n = curve.len() as f64;
        let (a, b) = (rng.gen_range(1.0..=n), rng.gen_range(1.0..=n));
        let src = curve.subcurve(a.min(b), a.max(b));
        let noise = p.delta * rng.gen_range(0.0..1.0);
        let q = perturbed_query(rng, &src, p.k, noise);
        let out = i.query(&q)?;
        for r in out.ranges() {
            if !Metric::Continuous.decide(&r.subcurve(curve), &q, (1.0 + p.eps) * p.delta)? {
                report.trial(t, format!("returned range {r} beyond (1+eps)delta"), curve_text(&q));
            }
        }
        if out.ranges().is_empty() {
            if let Some(w) = sampled_subcurve_witness(curve, &q, p.delta, WITNESS_RESOLUTION)? {
                report.trial(t, format!("no range returned but {w} is within delta"), curve_text(&q));
            }
        }
    }
    Ok(())
}

fn check_twd(i: &TwdIndex, trials: usize, rng: &mut ChaCha8Rng, report: &mut CheckReport) {
    let steps = i.steps();
    for a in 0..=steps {
        for b in a..=steps {
            report.entries_checked += 1;
            let expected = window_regions(i.points(), i.theta(), i.endpoint_time(a), i.endpoint_time(b));
            let stored: Vec<&String> = i.bucket(a, b).iter().collect();
            if stored != expected.iter().collect::<Vec<_>>() {
                report.structural(format!("window {a}-{b} stores {stored:?}, recount gives {expected:?}"), format!("{a}-{b}"));
            }
        }
    }
    let (t_min, t_max) = i.span();
    let scale = i.time_scale();
    let pad = (t_max - t_min).max(i.step());
    for t in 0..trials {
        let x = rng.gen_range(t_min - pad..t_max + pad);
        let y = rng.gen_range(t_min - pad..t_max + pad);
        if x == y {
            continue;
        }
        let (q1, q2) = (x.min(y), x.max(y));
        // queries take raw times
        let raw = |v: f64| v / scale.scale + scale.offset;
        let Ok(s) = i.query(raw(q1), raw(q2)) else { continue };
        let (n1, n2) = (scale.apply(raw(q1)), scale.apply(raw(q2)));
        let exact = window_regions(i.points(), i.theta(), n1, n2);
        if !s.inner.is_subset(&exact) || !exact.is_subset(&s.outer) {
            report.trial(
                t,
                format!("sandwich broken: inner {:?}, exact {:?}, outer {:?}", s.inner, exact, s.outer),
                format!("[{}, {}]", raw(q1), raw(q2)),
            );
        }
    }
}

/// Queries for [`bench`].
#[derive(Clone, Debug)]
pub enum BenchQueries {
    Curves(Vec<Curve>),
    Windows(Vec<(f64, f64)>),
}

impl BenchQueries {
    pub fn len(&self) -> usize {
        match self {
            BenchQueries::Curves(c) => c.len(),
            BenchQueries::Windows(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    /// Catalog size scanned by the baseline: curves, curve vertices, or points.
    pub catalog: usize,
    pub queries: usize,
    pub reps: usize,
    /// Operation counts of the first repetition of each query, one per query.
    pub costs: Vec<QueryCost>,
    pub index_ns_per_query: f64,
    pub scan_ns_per_query: f64,
}

impl BenchReport {
    /// Whether every query spent exactly the same operations.
    pub fn constant_cost(&self) -> bool {
        self.costs.windows(2).all(|w| w[0] == w[1])
    }
}

/// Times `reps` passes over `queries` through the index and through the
/// corresponding linear scan.
pub fn bench(index: &AnyIndex, queries: &BenchQueries, reps: usize) -> Result<BenchReport> {
    if reps == 0 {
        return Err(crate::Error::invalid("reps must be at least 1"));
    }
    if queries.is_empty() {
        return Err(crate::Error::invalid("no benchmark queries"));
    }
    let mut costs = Vec::with_capacity(queries.len());
    let started = Instant::now();
    for rep in 0..reps {
        match (index, queries) {
            (AnyIndex::Asym(i), BenchQueries::Curves(qs)) => {
                for q in qs {
                    let (_, c) = i.query_with_cost(q)?;
                    if rep == 0 {
                        costs.push(c);
                    }
                }
            }
            (AnyIndex::Sym(i), BenchQueries::Curves(qs)) => {
                for q in qs {
                    let (_, c) = i.query_with_cost(q)?;
                    if rep == 0 {
                        costs.push(c);
                    }
                }
            }
            (AnyIndex::Asrs(i), BenchQueries::Curves(qs)) => {
                for q in qs {
                    let (_, c) = i.query_with_cost(q)?;
                    if rep == 0 {
                        costs.push(c);
                    }
                }
            }
            (AnyIndex::Twd(i), BenchQueries::Windows(ws)) => {
                for &(a, b) in ws {
                    let (_, c) = i.query_with_cost(a, b)?;
                    if rep == 0 {
                        costs.push(c);
                    }
                }
            }
            _ => return Err(crate::Error::invalid("query type does not match the index kind")),
        }
    }
    let index_ns = started.elapsed().as_nanos() as f64;

    let started = Instant::now();
    let mut sink = 0usize;
    for _ in 0..reps {
        match (index, queries) {
            (AnyIndex::Asym(i), BenchQueries::Curves(qs)) => {
                let p = i.params();
                for q in qs {
                    sink += scan_near_neighbors(i.curves(), q, p.delta, p.eps, p.metric)?.0.len();
                }
            }
            (AnyIndex::Sym(i), BenchQueries::Curves(qs)) => {
                let p = i.params();
                for q in qs {
                    sink += scan_near_neighbors(i.curves(), q, p.delta, p.eps, Metric::Discrete)?.0.len();
                }
            }
            (AnyIndex::Asrs(i), BenchQueries::Curves(qs)) => {
                for q in qs {
                    sink += extract_inclusion_minimal(i.curve(), q, i.params().delta)?.len();
                }
            }
            (AnyIndex::Twd(i), BenchQueries::Windows(ws)) => {
                let s = i.time_scale();
                for &(a, b) in ws {
                    sink += window_regions(i.points(), i.theta(), s.apply(a), s.apply(b)).len();
                }
            }
            _ => unreachable!("checked above"),
        }
    }
    std::hint::black_box(sink);
    let scan_ns = started.elapsed().as_nanos() as f64;

    let catalog = match index {
        AnyIndex::Asym(i) => i.curves().len(),
        AnyIndex::Sym(i) => i.curves().len(),
        AnyIndex::Asrs(i) => i.curve().len(),
        AnyIndex::Twd(i) => i.points().len(),
    };
    let total = (queries.len() * reps) as f64;
    Ok(BenchReport {
        catalog,
        queries: queries.len(),
        reps,
        costs,
        index_ns_per_query: index_ns / total,
        scan_ns_per_query: scan_ns / total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anns_asym::AsymParams;
    use crate::grid::PathKey;
    use crate::twd::StampedPoint;

    fn corpus() -> Vec<Curve> {
        vec![
            Curve::new("a", vec![vec![0.0, 0.0], vec![0.6, 0.2]]).unwrap(),
            Curve::new("b", vec![vec![0.4, 0.5], vec![0.1, 0.9], vec![0.3, 0.2]]).unwrap(),
        ]
    }

    #[test]
    fn fresh_indexes_pass() {
        let asym = AnyIndex::Asym(AsymIndex::build(corpus(), AsymParams::new(1.0, 1.0, 2)).unwrap());
        let r = check(&asym, 50, 7).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.entries_checked, match &asym { AnyIndex::Asym(i) => i.stored_entries(), _ => 0 });
        let pts = (0..20).map(|i| StampedPoint::new(format!("r{}", i % 3), i as f64 / 40.0)).collect();
        let twd = AnyIndex::Twd(TwdIndex::build(pts, 2, 0.2).unwrap());
        assert!(check(&twd, 200, 1).unwrap().passed());
    }

    #[test]
    fn corrupted_bucket_is_reported() {
        let idx = AsymIndex::build(corpus(), AsymParams::new(1.0, 1.0, 1)).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&AnyIndex::Asym(idx.clone()).to_json().unwrap()).unwrap();
        // a far corner of the grid holds nothing
        let r = idx.grid().cells_per_axis();
        let key = PathKey::from_coords([&[r, r][..]]);
        doc["buckets"][key.as_str()] = serde_json::json!(["a"]);
        let bad = AnyIndex::from_json(&doc.to_string()).unwrap();
        let report = check(&bad, 0, 0).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].to_string().contains(key.as_str()));
    }

    #[test]
    fn same_seed_same_report() {
        let asym = AnyIndex::Asym(AsymIndex::build(corpus(), AsymParams::new(1.0, 0.5, 2)).unwrap());
        assert_eq!(check(&asym, 30, 3).unwrap(), check(&asym, 30, 3).unwrap());
    }

    #[test]
    fn bench_counts_are_constant() {
        let asym = AnyIndex::Asym(AsymIndex::build(corpus(), AsymParams::new(1.0, 1.0, 2)).unwrap());
        let qs = BenchQueries::Curves(corpus().into_iter().map(|c| perturbed_query(&mut ChaCha8Rng::seed_from_u64(1), &c, 2, 0.1)).collect());
        let r = bench(&asym, &qs, 3).unwrap();
        assert!(r.constant_cost());
        assert_eq!(r.costs[0], QueryCost { roundings: 4, keys: 1, lookups: 1, ..QueryCost::default() });
        assert!(bench(&asym, &qs, 0).is_err());
    }
}
