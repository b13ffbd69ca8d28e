//! Symmetric `(5+ε)δ` near-neighbor index under the discrete Fréchet
//! distance: the query size is only known at query time.
//!
//! Every data vertex `p_j` marks the lattice points in the ball
//! `B(p_j, r)` with `r = (1+ε'/2)δ` and `ε' = ε/3`. A curve is stored under
//! every lattice path that
//!
//! - starts at a point marked by `p_1`,
//! - visits points marked by strictly increasing vertices of the curve,
//! - has all edges longer than `μ = 2r`, and
//! - is within discrete Fréchet distance `3r` of the curve.
//!
//! A query rounds each vertex down onto the lattice and μ-simplifies the
//! result, absorbing any trailing vertices into the last kept one. That path
//! always has the shape above when the query is within `δ` of the curve.

use std::collections::HashMap;

use crate::geometry::{dist2, simplify_mu_strict_indices, validate_corpus, Curve, DiscreteReach};
use crate::grid::{ball_lattice_points, embed_pitch, round_to_pitch, LatticePoint, PathKey, DEFAULT_BUDGET};
use crate::{Error, QueryCost, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymParams {
    pub delta: f64,
    pub eps: f64,
    pub budget: u64,
}

impl SymParams {
    pub fn new(delta: f64, eps: f64) -> Self {
        Self { delta, eps, budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// The internal slack `ε/3`.
    pub fn eps_int(&self) -> f64 {
        self.eps / 3.0
    }

    /// Lattice pitch for dimension `dim`.
    pub fn cell(&self, dim: usize) -> f64 {
        self.eps_int() * self.delta / (2.0 * (dim as f64).sqrt())
    }

    /// Radius of the marked balls.
    pub fn r_marked(&self) -> f64 {
        (1.0 + self.eps_int() / 2.0) * self.delta
    }

    /// Simplification radius applied to rounded queries.
    pub fn mu(&self) -> f64 {
        2.0 * self.r_marked()
    }

    /// Discrete Fréchet bound between a curve and each of its stored paths.
    pub fn r_outer(&self) -> f64 {
        3.0 * self.r_marked()
    }

    /// Distance bound for every reported curve.
    pub fn guarantee(&self) -> f64 {
        (5.0 + self.eps) * self.delta
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SymIndex {
    params: SymParams,
    dim: Option<usize>,
    curves: Vec<Curve>,
    buckets: HashMap<PathKey, Vec<u32>>,
}

impl SymIndex {
    pub fn build(curves: Vec<Curve>, params: SymParams) -> Result<Self> {
        params.validate()?;
        if curves.is_empty() {
            return Ok(Self { params, dim: None, curves, buckets: HashMap::new() });
        }
        validate_corpus(&curves)?;
        let dim = curves[0].dim();
        let mut buckets: HashMap<PathKey, Vec<u32>> = HashMap::new();
        for (idx, curve) in curves.iter().enumerate() {
            let search = SymSearch::new(curve, &params);
            let required = search.node_bound();
            if required > params.budget as u128 {
                return Err(Error::BudgetExceeded {
                    required,
                    budget: params.budget,
                    curve: Some(curve.id().to_string()),
                });
            }
            search.run(|path| buckets.entry(PathKey::new(path)).or_default().push(idx as u32));
        }
        Ok(Self { params, dim: Some(dim), curves, buckets })
    }

    pub(crate) fn from_parts(
        params: SymParams,
        curves: Vec<Curve>,
        buckets: HashMap<PathKey, Vec<u32>>,
    ) -> Self {
        let dim = curves.first().map(Curve::dim);
        Self { params, dim, curves, buckets }
    }

    /// Catalog positions of the reported curves, ascending.
    pub fn query(&self, q: &Curve) -> Result<Vec<usize>> {
        self.query_with_cost(q).map(|(hits, _)| hits)
    }

    pub fn query_with_cost(&self, q: &Curve) -> Result<(Vec<usize>, QueryCost)> {
        let mut cost = QueryCost::default();
        let Some(dim) = self.dim else {
            return Ok((Vec::new(), cost));
        };
        if q.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: q.dim() });
        }
        let (path, comparisons) = self.simplified_query_path(q);
        cost.roundings = q.len() * dim;
        cost.comparisons = comparisons;
        cost.keys = 1;
        cost.lookups = 1;
        let hits = self
            .buckets
            .get(&PathKey::new(&path))
            .map(|ids| ids.iter().map(|&i| i as usize).collect())
            .unwrap_or_default();
        Ok((hits, cost))
    }

    /// The rounded and simplified lattice path a query is looked up under,
    /// plus the number of distance comparisons spent simplifying it.
    pub fn simplified_query_path(&self, q: &Curve) -> (Vec<LatticePoint>, usize) {
        let ell = self.cell();
        let rounded: Vec<LatticePoint> = q.vertices().map(|v| round_to_pitch(v, ell)).collect();
        let coords = rounded.iter().flat_map(|lp| embed_pitch(lp.coords(), ell)).collect();
        let embedded = Curve::from_flat("rounded", q.dim(), coords).expect("rounded query is a valid curve");
        let kept = simplify_mu_strict_indices(&embedded, self.params.mu());
        (kept.into_iter().map(|i| rounded[i].clone()).collect(), q.len() - 1)
    }

    pub fn params(&self) -> &SymParams {
        &self.params
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Lattice pitch, or zero for an empty index.
    pub fn cell(&self) -> f64 {
        self.dim.map_or(0.0, |d| self.params.cell(d))
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn stored_entries(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn bucket(&self, key: &PathKey) -> Option<&[u32]> {
        self.buckets.get(key).map(Vec::as_slice)
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&PathKey, &[u32])> {
        self.buckets.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Marked lattice points of every vertex of curve `i`.
    pub fn marked_points(&self, i: usize) -> Vec<Vec<LatticePoint>> {
        SymSearch::new(&self.curves[i], &self.params).marked.into_iter().map(|m| m.points).collect()
    }

    /// A lattice path embedded back into space.
    pub fn path_curve(&self, key: &PathKey) -> Result<Curve> {
        let ell = self.cell();
        let pts = key.lattice_points()?.iter().map(|lp| embed_pitch(lp.coords(), ell)).collect();
        Curve::new(key.as_str(), pts)
    }
}

struct Marked {
    points: Vec<LatticePoint>,
    at: Vec<Vec<f64>>,
}

/// Depth-first enumeration of the stored paths of one curve.
///
/// Each path is reached through the lexicographically smallest vertex
/// assignment, so no path is produced twice.
struct SymSearch<'a> {
    curve: &'a Curve,
    marked: Vec<Marked>,
    r2: f64,
    mu2: f64,
    outer: f64,
}

impl<'a> SymSearch<'a> {
    fn new(curve: &'a Curve, params: &SymParams) -> Self {
        let ell = params.cell(curve.dim());
        let r = params.r_marked();
        let marked = curve
            .vertices()
            .map(|v| {
                let points = ball_lattice_points(v, r, ell);
                let at = points.iter().map(|lp| embed_pitch(lp.coords(), ell)).collect();
                Marked { points, at }
            })
            .collect();
        Self { curve, marked, r2: r * r, mu2: params.mu() * params.mu(), outer: params.r_outer() }
    }

    /// Upper bound on the number of search nodes: assignments ending at
    /// vertex `j` number `|g'_j|` times all assignments ending earlier.
    fn node_bound(&self) -> u128 {
        let mut total: u128 = 0;
        for (j, m) in self.marked.iter().enumerate() {
            let w = if j == 0 { m.points.len() as u128 } else { (m.points.len() as u128).saturating_mul(total) };
            total = total.saturating_add(w);
        }
        total
    }

    fn marked_by(&self, j: usize, at: &[f64]) -> bool {
        dist2(at, self.curve.vertex(j)) <= self.r2
    }

    fn run(&self, mut emit: impl FnMut(&[LatticePoint])) {
        let mut path = Vec::new();
        for (c, at) in self.marked[0].points.iter().zip(&self.marked[0].at) {
            let reach = DiscreteReach::start(self.curve, at, self.outer);
            if reach.is_dead() {
                continue;
            }
            path.push(c.clone());
            self.dfs(0, at, &reach, &mut path, &mut emit);
            path.pop();
        }
    }

    fn dfs(
        &self,
        f: usize,
        last: &[f64],
        reach: &DiscreteReach,
        path: &mut Vec<LatticePoint>,
        emit: &mut impl FnMut(&[LatticePoint]),
    ) {
        if reach.reaches_end() {
            emit(path);
        }
        for next in f + 1..self.marked.len() {
            let m = &self.marked[next];
            for (c, at) in m.points.iter().zip(&m.at) {
                if (f + 1..next).any(|j| self.marked_by(j, at)) || dist2(last, at) <= self.mu2 {
                    continue;
                }
                let step = reach.advance(self.curve, at, self.outer);
                if step.is_dead() {
                    continue;
                }
                path.push(c.clone());
                self.dfs(next, at, &step, path, emit);
                path.pop();
            }
        }
    }
}
