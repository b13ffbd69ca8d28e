//! Approximate subtrajectory range search over one long curve `P`.
//!
//! Build enumerates the grid paths of the asymmetric index that lie within
//! `(1+ε/2)δ` of some subcurve of `P`, and stores the inclusion-minimal such
//! subcurves in the path's bucket. A query rounds onto the grid exactly like
//! [`crate::AsymIndex`] and returns the bucket.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::anns_asym::{grid_layout, AsymParams};
use crate::geometry::{approx_diameter, free_interval, is_free, ColumnReach, Curve, Interval, Metric};
use crate::grid::{Grid, LatticePoint, PathKey};
use crate::{Error, QueryCost, Result};

/// Closed parameter range `[start, end]` of `P`, one-based like
/// [`Curve::point_at`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubcurveRange {
    pub start: f64,
    pub end: f64,
}

impl SubcurveRange {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn subcurve(&self, p: &Curve) -> Curve {
        p.subcurve(self.start, self.end)
    }

    pub fn overlaps(&self, other: &SubcurveRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for SubcurveRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for SubcurveRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("malformed subcurve range {s:?}"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let start: f64 = a.parse().map_err(|_| bad())?;
        let end: f64 = b.parse().map_err(|_| bad())?;
        if !(start.is_finite() && end.is_finite() && start <= end) {
            return Err(bad());
        }
        Ok(Self { start, end })
    }
}

/// Maximal free intervals of the column of `c` over `P`, as zero-based
/// parameter pairs. `P` must have at least two vertices.
fn column_intervals(p: &Curve, c: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..p.len() - 1 {
        if let Some(iv) = free_interval(c, p.vertex(i), p.vertex(i + 1), threshold) {
            let (lo, hi) = (i as f64 + iv.lo, i as f64 + iv.hi);
            match out.last_mut() {
                Some(last) if last.1 == lo => last.1 = hi,
                _ => out.push((lo, hi)),
            }
        }
    }
    out
}

fn reversed(c: &Curve) -> Curve {
    let verts: Vec<Vec<f64>> = c.vertices().rev().map(<[f64]>::to_vec).collect();
    Curve::new(c.id(), verts).expect("reversal of a valid curve")
}

/// Parameters of the first column (zero-based) from which the last column is
/// reachable, as closed intervals.
fn backward_reach(p: &Curve, c: &Curve, threshold: f64) -> Vec<(f64, f64)> {
    let (pr, cr) = (reversed(p), reversed(c));
    let n = p.len();
    let mut col = ColumnReach::all_free(&pr, cr.vertex(0), threshold);
    for j in 0..cr.len() - 1 {
        if col.is_dead() {
            return Vec::new();
        }
        col = col.advance(&pr, cr.vertex(j), cr.vertex(j + 1), threshold);
    }
    let top = (n - 1) as f64;
    let mut out: Vec<(f64, f64)> = col
        .edges
        .iter()
        .enumerate()
        .filter_map(|(i, iv)| {
            iv.map(|Interval { lo, hi }| {
                let base = (n - 2 - i) as f64;
                (base + (1.0 - hi), base + (1.0 - lo))
            })
        })
        .collect();
    if col.bottom {
        out.push((top, top));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Disjoint inclusion-minimal subcurves of `P` within `threshold` of `C`.
///
/// Sweeps the maximal free intervals of the first column bottom to top. From
/// each it starts at the highest point that still reaches the last column,
/// and ends at the lowest point of the last column reachable from there. The
/// sweep only accepts starts strictly above the previous end.
pub fn extract_inclusion_minimal(p: &Curve, c: &Curve, threshold: f64) -> Result<Vec<SubcurveRange>> {
    p.check_dim(c)?;
    if threshold < 0.0 {
        return Ok(Vec::new());
    }
    if p.len() == 1 {
        let near = c.vertices().all(|v| is_free(p.vertex(0), v, threshold));
        return Ok(if near { vec![SubcurveRange::new(1.0, 1.0)] } else { Vec::new() });
    }
    if c.len() == 1 {
        return Ok(column_intervals(p, c.vertex(0), threshold)
            .into_iter()
            .map(|(_, hi)| SubcurveRange::new(hi + 1.0, hi + 1.0))
            .collect());
    }
    let back = backward_reach(p, c, threshold);
    let mut out = Vec::new();
    let mut prev_end = f64::NEG_INFINITY;
    for (a, b) in column_intervals(p, c.vertex(0), threshold) {
        let start = back
            .iter()
            .filter(|&&(lo, hi)| lo <= b && hi >= a)
            .map(|&(_, hi)| hi.min(b))
            .fold(f64::NEG_INFINITY, f64::max);
        if start.is_nan() || start <= prev_end {
            continue;
        }
        let mut col = ColumnReach::from_point(p, c.vertex(0), threshold, start);
        for j in 0..c.len() - 1 {
            if col.is_dead() {
                break;
            }
            col = col.advance(p, c.vertex(j), c.vertex(j + 1), threshold);
        }
        // an empty exit only happens when rounding noise disagrees with the
        // backward sweep at a tangency
        if let Some(end) = col.lowest() {
            out.push(SubcurveRange::new(start + 1.0, end + 1.0));
            prev_end = end;
        }
    }
    Ok(out)
}

/// Result of a range-search query.
#[derive(Clone, Debug, PartialEq)]
pub enum AsrsOutcome {
    Ranges(Vec<SubcurveRange>),
    RejectedOutsideGrid,
}

impl AsrsOutcome {
    pub fn ranges(&self) -> &[SubcurveRange] {
        match self {
            AsrsOutcome::Ranges(r) => r,
            AsrsOutcome::RejectedOutsideGrid => &[],
        }
    }
}

#[derive(Clone, Debug)]
pub struct AsrsIndex {
    params: AsymParams,
    grid: Grid,
    diameter_estimate: f64,
    curve: Curve,
    buckets: HashMap<PathKey, Vec<SubcurveRange>>,
}

impl AsrsIndex {
    /// Builds the index over `p`. Only the continuous metric is supported.
    pub fn build(p: Curve, params: AsymParams) -> Result<Self> {
        params.validate()?;
        if params.metric != Metric::Continuous {
            return Err(Error::invalid("subtrajectory search supports the continuous metric only"));
        }
        let vertices: Vec<&[f64]> = p.vertices().collect();
        let diameter_estimate = approx_diameter(&vertices, 0)?;
        let (side, cell) = grid_layout(params.delta, params.eps, p.dim(), diameter_estimate);
        let grid = Grid::new(p.vertex(0), side, cell)?;
        let required = grid.path_count(params.k);
        if required > params.budget as u128 {
            return Err(Error::BudgetExceeded { required, budget: params.budget, curve: None });
        }
        let threshold = params.store_threshold();
        let mut buckets = HashMap::new();
        let search = RangeSearch::new(&grid, &p, threshold, params.k);
        search.run(|path, at| {
            let c = Curve::new("path", at.to_vec()).expect("grid path is a valid curve");
            let ranges = extract_inclusion_minimal(&p, &c, threshold).expect("matching dimensions");
            if !ranges.is_empty() {
                buckets.insert(PathKey::new(path), ranges);
            }
        });
        Ok(Self { params, grid, diameter_estimate, curve: p, buckets })
    }

    pub(crate) fn from_parts(
        params: AsymParams,
        grid: Grid,
        diameter_estimate: f64,
        curve: Curve,
        buckets: HashMap<PathKey, Vec<SubcurveRange>>,
    ) -> Self {
        Self { params, grid, diameter_estimate, curve, buckets }
    }

    pub fn query(&self, q: &Curve) -> Result<AsrsOutcome> {
        self.query_with_cost(q).map(|(o, _)| o)
    }

    pub fn query_with_cost(&self, q: &Curve) -> Result<(AsrsOutcome, QueryCost)> {
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
                None => return Ok((AsrsOutcome::RejectedOutsideGrid, cost)),
            }
        }
        cost.keys += 1;
        cost.lookups += 1;
        let ranges = self.buckets.get(&PathKey::new(&path)).cloned().unwrap_or_default();
        Ok((AsrsOutcome::Ranges(ranges), cost))
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

    /// Number of length-`k` grid paths the builder had to consider.
    pub fn path_capacity(&self) -> u128 {
        self.grid.path_count(self.params.k)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn stored_entries(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn bucket(&self, key: &PathKey) -> Option<&[SubcurveRange]> {
        self.buckets.get(key).map(Vec::as_slice)
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&PathKey, &[SubcurveRange])> {
        self.buckets.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn path_curve(&self, key: &PathKey) -> Result<Curve> {
        let pts = key
            .lattice_points()?
            .iter()
            .map(|lp| self.grid.to_point(lp))
            .collect::<Result<Vec<_>>>()?;
        Curve::new(key.as_str(), pts)
    }
}

/// Enumerates grid paths within `threshold` of some subcurve of `P`, pruning
/// prefixes whose free space (with every free point of the first column as a
/// source) is already empty.
struct RangeSearch<'a> {
    curve: &'a Curve,
    threshold: f64,
    k: usize,
    candidates: Vec<(LatticePoint, Vec<f64>)>,
}

impl<'a> RangeSearch<'a> {
    fn new(grid: &Grid, curve: &'a Curve, threshold: f64, k: usize) -> Self {
        let r = threshold * (1.0 + 1e-6);
        let mut pts: Vec<LatticePoint> = if curve.len() == 1 {
            grid.points_near_segment(curve.vertex(0), curve.vertex(0), r)
        } else {
            (0..curve.len() - 1)
                .flat_map(|i| grid.points_near_segment(curve.vertex(i), curve.vertex(i + 1), r))
                .collect()
        };
        pts.sort();
        pts.dedup();
        let candidates = pts.into_iter().map(|lp| (lp.clone(), grid.embed(lp.coords()))).collect();
        Self { curve, threshold, k, candidates }
    }

    fn run(&self, mut visit: impl FnMut(&[LatticePoint], &[Vec<f64>])) {
        let mut path = Vec::with_capacity(self.k);
        let mut at = Vec::with_capacity(self.k);
        self.dfs(None, &mut path, &mut at, &mut visit);
    }

    fn dfs(
        &self,
        column: Option<&ColumnReach>,
        path: &mut Vec<LatticePoint>,
        at: &mut Vec<Vec<f64>>,
        visit: &mut impl FnMut(&[LatticePoint], &[Vec<f64>]),
    ) {
        for (lp, x) in &self.candidates {
            let next = if self.curve.len() == 1 {
                if !is_free(self.curve.vertex(0), x, self.threshold) {
                    continue;
                }
                None
            } else {
                let col = match column {
                    None => ColumnReach::all_free(self.curve, x, self.threshold),
                    Some(c) => c.advance(self.curve, at.last().expect("non-empty prefix"), x, self.threshold),
                };
                if col.is_dead() {
                    continue;
                }
                Some(col)
            };
            path.push(lp.clone());
            at.push(x.clone());
            if path.len() == self.k {
                visit(path, at);
            } else {
                self.dfs(next.as_ref(), path, at, visit);
            }
            at.pop();
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::continuous_frechet_decide;

    fn curve(id: &str, pts: &[(f64, f64)]) -> Curve {
        Curve::new(id, pts.iter().map(|&(x, y)| vec![x, y]).collect()).unwrap()
    }

    #[test]
    fn range_text_round_trip() {
        let r = SubcurveRange::new(1.25, 3.0000000000000004);
        assert_eq!(r.to_string().parse::<SubcurveRange>().unwrap(), r);
        assert!("3:1".parse::<SubcurveRange>().is_err());
        assert!("x".parse::<SubcurveRange>().is_err());
    }

    #[test]
    fn short_segment_on_long_line() {
        let p = Curve::new("p", (0..=10).map(|i| vec![i as f64, 0.0]).collect()).unwrap();
        let c = curve("c", &[(2.0, 0.0), (3.0, 0.0)]);
        let ranges = extract_inclusion_minimal(&p, &c, 0.1).unwrap();
        assert_eq!(ranges.len(), 1);
        let r = ranges[0];
        assert!(r.start >= 2.9 - 1e-9 && r.end <= 4.1 + 1e-9, "{r}");
        assert!(continuous_frechet_decide(&r.subcurve(&p), &c, 0.1).unwrap());
        // the sampled witness of the oracle lies within the same stretch
        let w = crate::oracle::sampled_subcurve_witness(&p, &c, 0.1, 1e-2).unwrap().unwrap();
        assert!(w.overlaps(&r));
    }

    #[test]
    fn too_far_gives_nothing() {
        let p = curve("p", &[(0.0, 0.0), (10.0, 0.0)]);
        let c = curve("c", &[(2.0, 1.0), (3.0, 1.0)]);
        assert!(extract_inclusion_minimal(&p, &c, 0.9).unwrap().is_empty());
    }

    #[test]
    fn identical_curves_have_a_zero_distance_range() {
        let p = curve("p", &[(0.0, 0.0), (3.0, 1.0), (5.0, -1.0)]);
        let ranges = extract_inclusion_minimal(&p, &p, 0.0).unwrap();
        assert_eq!(ranges, vec![SubcurveRange::new(1.0, 3.0)]);
    }

    #[test]
    fn repeated_visits_give_disjoint_ranges() {
        let p = curve("p", &[(0.0, 0.0), (4.0, 0.0), (4.0, 3.0), (0.0, 3.0), (0.0, 0.2), (4.0, 0.2)]);
        let c = curve("c", &[(1.0, 0.1), (3.0, 0.1)]);
        let ranges = extract_inclusion_minimal(&p, &c, 0.5).unwrap();
        assert_eq!(ranges.len(), 2);
        assert!(ranges[0].end < ranges[1].start);
        for r in &ranges {
            assert!(continuous_frechet_decide(&r.subcurve(&p), &c, 0.5).unwrap());
        }
    }

    #[test]
    fn point_curve_with_point_paths() {
        let p = curve("p", &[(0.2, 0.3)]);
        let idx = AsrsIndex::build(p.clone(), AsymParams::new(1.0, 1.0, 1)).unwrap();
        let g = idx.grid();
        let expected = g
            .all_points()
            .iter()
            .filter(|lp| {
                let x = g.to_point(lp).unwrap();
                ((x[0] - 0.2f64).powi(2) + (x[1] - 0.3f64).powi(2)).sqrt() <= 1.5
            })
            .count();
        assert_eq!(idx.bucket_count(), expected);
        assert!(idx.buckets().all(|(_, r)| r == [SubcurveRange::new(1.0, 1.0)]));
    }

    #[test]
    fn verbatim_subcurve_is_found() {
        let p = curve("p", &[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0), (1.5, 0.5), (1.2, 0.9)]);
        let idx = AsrsIndex::build(p.clone(), AsymParams::new(2.0, 2.0, 2)).unwrap();
        let q = curve("q", &[(0.5, 0.5), (1.0, 0.0)]);
        let out = idx.query(&q).unwrap();
        assert!(!out.ranges().is_empty());
        for r in out.ranges() {
            assert!(continuous_frechet_decide(&r.subcurve(&p), &q, 6.0).unwrap());
        }
        let far = curve("f", &[(500.0, 0.0), (4.0, 0.0)]);
        assert_eq!(idx.query(&far).unwrap(), AsrsOutcome::RejectedOutsideGrid);
    }
}
