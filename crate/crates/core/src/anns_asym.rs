//! Asymmetric `(1+ε)δ` near-neighbor index: the query size `k` is fixed at
//! build time.
//!
//! Build covers the data with a bounded grid whose side is proportional to
//! either `δ` or the estimated diameter, and stores every curve in the bucket
//! of every length-`k` grid path within `(1+ε/2)δ` of it. A query rounds each
//! of its vertices to a lattice corner and reads one bucket.

use std::collections::HashMap;

use crate::geometry::{approx_diameter, is_free, ColumnReach, Curve, DiscreteReach, Metric};
use crate::grid::{Grid, LatticePoint, PathKey, DEFAULT_BUDGET};
use crate::{Error, QueryCost, Result};

/// Candidate lattice points are prefiltered with this much extra radius; the
/// exact decision still has the final word.
const FILTER_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymParams {
    pub delta: f64,
    pub eps: f64,
    pub k: usize,
    pub metric: Metric,
    pub budget: u64,
}

impl AsymParams {
    pub fn new(delta: f64, eps: f64, k: usize) -> Self {
        Self { delta, eps, k, metric: Metric::Continuous, budget: DEFAULT_BUDGET }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Threshold a curve must meet against a grid path to enter its bucket.
    pub fn store_threshold(&self) -> f64 {
        (1.0 + self.eps / 2.0) * self.delta
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.eps > 0.0 && self.eps <= self.delta) {
            return Err(Error::invalid(format!(
                "eps must satisfy 0 < eps <= delta, got eps = {} and delta = {}",
                self.eps, self.delta
            )));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        Ok(())
    }
}

/// Side `L'` and cell side `ℓ` of the build grid for the given parameters and
/// diameter estimate.
pub fn grid_layout(delta: f64, eps: f64, dim: usize, diameter: f64) -> (f64, f64) {
    let cell = eps * delta / (2.0 * (dim as f64).sqrt());
    let half = if diameter <= delta { 4.0 * delta } else { 4.0 * delta * diameter / eps };
    (2.0 * half, cell)
}

/// Result of a near-neighbor query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryOutcome {
    /// Catalog positions of the reported curves, ascending.
    Hits(Vec<usize>),
    /// Some query vertex lies outside the grid, so every indexed curve is
    /// farther than `δ` from the query.
    RejectedOutsideGrid,
}

impl QueryOutcome {
    pub fn hits(&self) -> &[usize] {
        match self {
            QueryOutcome::Hits(h) => h,
            QueryOutcome::RejectedOutsideGrid => &[],
        }
    }
}

#[derive(Clone, Debug)]
pub struct AsymIndex {
    params: AsymParams,
    grid: Grid,
    diameter_estimate: f64,
    curves: Vec<Curve>,
    buckets: HashMap<PathKey, Vec<u32>>,
}

impl AsymIndex {
    pub fn build(curves: Vec<Curve>, params: AsymParams) -> Result<Self> {
        params.validate()?;
        crate::geometry::validate_corpus(&curves)?;
        let vertices: Vec<&[f64]> = curves.iter().flat_map(Curve::vertices).collect();
        let diameter_estimate = approx_diameter(&vertices, 0)?;
        let dim = curves[0].dim();
        let (side, cell) = grid_layout(params.delta, params.eps, dim, diameter_estimate);
        let grid = Grid::new(curves[0].vertex(0), side, cell)?;
        let required = grid.path_count(params.k);
        if required > params.budget as u128 {
            return Err(Error::BudgetExceeded { required, budget: params.budget, curve: None });
        }

        let mut buckets: HashMap<PathKey, Vec<u32>> = HashMap::new();
        for (idx, curve) in curves.iter().enumerate() {
            let search = PathSearch::new(&grid, curve, params.store_threshold(), params.k);
            search.run(params.metric, |path| {
                buckets.entry(PathKey::new(path)).or_default().push(idx as u32);
            });
        }
        Ok(Self { params, grid, diameter_estimate, curves, buckets })
    }

    pub(crate) fn from_parts(
        params: AsymParams,
        grid: Grid,
        diameter_estimate: f64,
        curves: Vec<Curve>,
        buckets: HashMap<PathKey, Vec<u32>>,
    ) -> Self {
        Self { params, grid, diameter_estimate, curves, buckets }
    }

    pub fn query(&self, q: &Curve) -> Result<QueryOutcome> {
        self.query_with_cost(q).map(|(outcome, _)| outcome)
    }

    /// Rounds every vertex of `q` onto the grid and returns the matching
    /// bucket, together with the operations spent.
    pub fn query_with_cost(&self, q: &Curve) -> Result<(QueryOutcome, QueryCost)> {
        if q.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch { expected: self.grid.dim(), got: q.dim() });
        }
        if q.len() != self.params.k {
            return Err(Error::QuerySizeMismatch { expected: self.params.k, got: q.len() });
        }
        let mut cost = QueryCost::default();
        let mut path = Vec::with_capacity(q.len());
        for v in q.vertices() {
            cost.roundings += v.len();
            match self.grid.round(v)? {
                Some(lp) => path.push(lp),
                None => return Ok((QueryOutcome::RejectedOutsideGrid, cost)),
            }
        }
        let key = PathKey::new(&path);
        cost.keys += 1;
        cost.lookups += 1;
        let hits = self
            .buckets
            .get(&key)
            .map(|ids| ids.iter().map(|&i| i as usize).collect())
            .unwrap_or_default();
        Ok((QueryOutcome::Hits(hits), cost))
    }

    pub fn params(&self) -> &AsymParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn diameter_estimate(&self) -> f64 {
        self.diameter_estimate
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Total number of stored curve ids over all buckets.
    pub fn stored_entries(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn bucket(&self, key: &PathKey) -> Option<&[u32]> {
        self.buckets.get(key).map(Vec::as_slice)
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&PathKey, &[u32])> {
        self.buckets.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Number of length-`k` grid paths the builder had to consider.
    pub fn path_capacity(&self) -> u128 {
        self.grid.path_count(self.params.k)
    }

    /// A grid path embedded back into space as a curve.
    pub fn path_curve(&self, key: &PathKey) -> Result<Curve> {
        let pts = key
            .lattice_points()?
            .iter()
            .map(|lp| self.grid.to_point(lp))
            .collect::<Result<Vec<_>>>()?;
        Curve::new(key.as_str(), pts)
    }
}

/// Depth-first enumeration of the grid paths within a threshold of one curve.
///
/// Produces exactly the paths `C` of the full `k`-fold lattice product with
/// `decide(P, C, threshold)`, in lexicographic order. Prefixes whose partial
/// free space is already unreachable are cut, and each position only draws
/// from lattice points that can possibly be matched there.
pub(crate) struct PathSearch<'a> {
    grid: &'a Grid,
    curve: &'a Curve,
    threshold: f64,
    k: usize,
}

struct Candidate {
    lp: LatticePoint,
    at: Vec<f64>,
}

impl<'a> PathSearch<'a> {
    pub(crate) fn new(grid: &'a Grid, curve: &'a Curve, threshold: f64, k: usize) -> Self {
        Self { grid, curve, threshold, k }
    }

    fn candidates(&self, pts: Vec<LatticePoint>) -> Vec<Candidate> {
        pts.into_iter().map(|lp| Candidate { at: self.grid.embed(lp.coords()), lp }).collect()
    }

    fn near_vertex(&self, i: usize) -> Vec<Candidate> {
        let v = self.curve.vertex(i);
        self.candidates(self.grid.points_near_segment(v, v, self.threshold * (1.0 + FILTER_SLACK)))
    }

    fn near_union(&self, segments: impl Iterator<Item = (usize, usize)>) -> Vec<Candidate> {
        let r = self.threshold * (1.0 + FILTER_SLACK);
        let mut pts: Vec<LatticePoint> = segments
            .flat_map(|(a, b)| self.grid.points_near_segment(self.curve.vertex(a), self.curve.vertex(b), r))
            .collect();
        pts.sort();
        pts.dedup();
        self.candidates(pts)
    }

    pub(crate) fn run(&self, metric: Metric, mut emit: impl FnMut(&[LatticePoint])) {
        let m = self.curve.len();
        let first = self.near_vertex(0);
        let last = self.near_vertex(m - 1);
        let middle = match metric {
            Metric::Continuous => self.near_union((0..m.saturating_sub(1)).map(|i| (i, i + 1)).chain([(0, 0)])),
            Metric::Discrete => self.near_union((0..m).map(|i| (i, i))),
        };
        let layers: Vec<&[Candidate]> = (0..self.k)
            .map(|j| if j + 1 == self.k { &last[..] } else if j == 0 { &first[..] } else { &middle[..] })
            .collect();
        // the first layer doubles as the last one when k = 1
        let layers: Vec<&[Candidate]> =
            if self.k == 1 { vec![&first[..]] } else { layers };
        let mut prefix: Vec<LatticePoint> = Vec::with_capacity(self.k);
        match metric {
            Metric::Discrete => self.dfs_discrete(&layers, None, &mut prefix, &mut emit),
            Metric::Continuous if m == 1 || self.k == 1 => self.dfs_point(&layers, &mut prefix, &mut emit),
            Metric::Continuous => self.dfs_continuous(&layers, None, &mut prefix, &mut Vec::new(), &mut emit),
        }
    }

    /// One of the two curves is a single point: every pair of vertices must be free.
    fn dfs_point(&self, layers: &[&[Candidate]], prefix: &mut Vec<LatticePoint>, emit: &mut impl FnMut(&[LatticePoint])) {
        let depth = prefix.len();
        for c in layers[depth] {
            let ok = if self.curve.len() == 1 {
                is_free(self.curve.vertex(0), &c.at, self.threshold)
            } else {
                self.curve.vertices().all(|v| is_free(v, &c.at, self.threshold))
            };
            if !ok {
                continue;
            }
            prefix.push(c.lp.clone());
            if depth + 1 == self.k {
                emit(prefix);
            } else {
                self.dfs_point(layers, prefix, emit);
            }
            prefix.pop();
        }
    }

    fn dfs_continuous(
        &self,
        layers: &[&[Candidate]],
        column: Option<&ColumnReach>,
        prefix: &mut Vec<LatticePoint>,
        points: &mut Vec<Vec<f64>>,
        emit: &mut impl FnMut(&[LatticePoint]),
    ) {
        let depth = prefix.len();
        for c in layers[depth] {
            let next = match column {
                None => ColumnReach::start(self.curve, &c.at, self.threshold),
                Some(col) => col.advance(self.curve, points.last().expect("non-empty prefix"), &c.at, self.threshold),
            };
            if depth + 1 == self.k {
                if next.reaches_top() {
                    prefix.push(c.lp.clone());
                    emit(prefix);
                    prefix.pop();
                }
                continue;
            }
            if next.is_dead() {
                continue;
            }
            prefix.push(c.lp.clone());
            points.push(c.at.clone());
            self.dfs_continuous(layers, Some(&next), prefix, points, emit);
            points.pop();
            prefix.pop();
        }
    }

    fn dfs_discrete(
        &self,
        layers: &[&[Candidate]],
        reach: Option<&DiscreteReach>,
        prefix: &mut Vec<LatticePoint>,
        emit: &mut impl FnMut(&[LatticePoint]),
    ) {
        let depth = prefix.len();
        for c in layers[depth] {
            let next = match reach {
                None => DiscreteReach::start(self.curve, &c.at, self.threshold),
                Some(r) => r.advance(self.curve, &c.at, self.threshold),
            };
            if depth + 1 == self.k {
                if next.reaches_end() {
                    prefix.push(c.lp.clone());
                    emit(prefix);
                    prefix.pop();
                }
                continue;
            }
            if next.is_dead() {
                continue;
            }
            prefix.push(c.lp.clone());
            self.dfs_discrete(layers, Some(&next), prefix, emit);
            prefix.pop();
        }
    }
}
