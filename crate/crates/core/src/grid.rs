//! Axis-aligned lattices, vertex rounding and grid-path keys.
//!
//! Two lattices are used: a bounded [`Grid`] centred on a data vertex (the
//! asymmetric and subtrajectory indexes), and the unbounded lattice of a
//! given pitch anchored at the coordinate origin (the symmetric index).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{dist2, point_segment_dist2};
use crate::{Error, Result};

/// Default cap on the number of grid-point sequences a builder may enumerate.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Lattice coordinates this close (relative) to an integer snap onto it.
const SNAP: f64 = 1e-9;

/// Integer lattice coordinates, in units of the cell side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

/// Canonical text key of a grid path: coordinates joined by `,`, vertices
/// joined by `|`, e.g. `1,2|3,4`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathKey(String);

impl PathKey {
    pub fn new(seq: &[LatticePoint]) -> Self {
        Self::from_coords(seq.iter().map(|lp| lp.coords()))
    }

    pub fn from_coords<'a>(seq: impl IntoIterator<Item = &'a [i64]>) -> Self {
        let mut key = String::new();
        for (i, lp) in seq.into_iter().enumerate() {
            if i > 0 {
                key.push('|');
            }
            for (j, a) in lp.iter().enumerate() {
                if j > 0 {
                    key.push(',');
                }
                write!(key, "{a}").expect("writing to a String");
            }
        }
        PathKey(key)
    }

    /// Parses and validates a key in the canonical text format.
    pub fn parse(text: &str) -> Result<Self> {
        let key = PathKey(text.to_owned());
        let seq = key.lattice_points()?;
        if PathKey::new(&seq) != key {
            return Err(Error::Format(format!("non-canonical path key {text:?}")));
        }
        Ok(key)
    }

    pub fn lattice_points(&self) -> Result<Vec<LatticePoint>> {
        self.0
            .split('|')
            .map(|v| {
                v.split(',')
                    .map(|a| a.parse::<i64>().map_err(|e| Error::Format(format!("path key {:?}: {e}", self.0))))
                    .collect::<Result<Vec<_>>>()
                    .map(LatticePoint)
            })
            .collect()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for PathKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical injective key of a lattice-point sequence.
pub fn path_key(seq: &[LatticePoint]) -> PathKey {
    PathKey::new(seq)
}

/// Floor that snaps values within rounding noise of an integer onto it.
pub(crate) fn snap_floor(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r as i64
    } else {
        x.floor() as i64
    }
}

pub(crate) fn snap_ceil(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r as i64
    } else {
        x.ceil() as i64
    }
}

/// Bounded lattice covering the axis-aligned hypercube of side `L'` centred
/// at `origin`, with cell side `ℓ`.
///
/// Lattice point `a ∈ [0, R]^d` sits at `origin − L'/2 + ℓ·a`, where
/// `R = ⌈L'/ℓ⌉`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    origin: Vec<f64>,
    side: f64,
    cell: f64,
    cells_per_axis: i64,
    min: Vec<f64>,
}

impl Grid {
    pub fn new(center: &[f64], side: f64, cell: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::invalid("grid dimension must be at least 1"));
        }
        if !(cell.is_finite() && cell > 0.0) {
            return Err(Error::invalid(format!("cell side must be positive, got {cell}")));
        }
        if !(side.is_finite() && side >= cell) {
            return Err(Error::invalid(format!("grid side {side} must be at least the cell side {cell}")));
        }
        let cells = snap_ceil(side / cell).max(1);
        Ok(Self {
            origin: center.to_vec(),
            side,
            cell,
            cells_per_axis: cells,
            min: center.iter().map(|c| c - side / 2.0).collect(),
        })
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Full extent `L'` along each axis.
    pub fn side(&self) -> f64 {
        self.side
    }

    /// Cell side `ℓ`.
    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    /// `R = ⌈L'/ℓ⌉`.
    pub fn cells_per_axis(&self) -> i64 {
        self.cells_per_axis
    }

    pub fn min_corner(&self) -> &[f64] {
        &self.min
    }

    /// `(R + 1)^d`, saturating.
    pub fn lattice_point_count(&self) -> u128 {
        saturating_pow((self.cells_per_axis + 1) as u128, self.dim())
    }

    /// `((R + 1)^d)^k`: the number of length-`k` grid paths, saturating.
    pub fn path_count(&self, k: usize) -> u128 {
        saturating_pow(self.lattice_point_count(), k)
    }

    /// Rounds `q` to the lower corner of its cell, or `None` when `q` lies
    /// outside the lattice's extent.
    pub fn round(&self, q: &[f64]) -> Result<Option<LatticePoint>> {
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: q.len() });
        }
        let top = self.cells_per_axis as f64;
        let mut coords = Vec::with_capacity(q.len());
        for (qi, mi) in q.iter().zip(&self.min) {
            let x = (qi - mi) / self.cell;
            if !(x >= -SNAP && x <= top * (1.0 + SNAP) + SNAP) {
                return Ok(None);
            }
            coords.push(snap_floor(x).clamp(0, self.cells_per_axis));
        }
        Ok(Some(LatticePoint(coords)))
    }

    pub fn to_point(&self, lp: &LatticePoint) -> Result<Vec<f64>> {
        if lp.0.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: lp.0.len() });
        }
        if lp.0.iter().any(|&a| a < 0 || a > self.cells_per_axis) {
            return Err(Error::OutOfBounds(lp.0.clone()));
        }
        Ok(self.embed(&lp.0))
    }

    pub(crate) fn embed(&self, a: &[i64]) -> Vec<f64> {
        a.iter().zip(&self.min).map(|(&ai, mi)| mi + self.cell * ai as f64).collect()
    }

    /// Every lattice point, in lexicographic order.
    pub fn all_points(&self) -> Vec<LatticePoint> {
        let lo = vec![0; self.dim()];
        let hi = vec![self.cells_per_axis; self.dim()];
        let mut out = Vec::new();
        for_each_in_box(&lo, &hi, |a| out.push(LatticePoint(a.to_vec())));
        out
    }

    /// Lattice points within `radius` of the segment `a b` (a point when
    /// `a == b`), lexicographically ordered.
    pub fn points_near_segment(&self, a: &[f64], b: &[f64], radius: f64) -> Vec<LatticePoint> {
        let r2 = radius * radius;
        let (lo, hi): (Vec<i64>, Vec<i64>) = (0..self.dim())
            .map(|i| {
                let low = a[i].min(b[i]) - radius;
                let high = a[i].max(b[i]) + radius;
                let l = ((low - self.min[i]) / self.cell).floor() as i64;
                let h = ((high - self.min[i]) / self.cell).ceil() as i64;
                (l.max(0), h.min(self.cells_per_axis))
            })
            .unzip();
        let mut out = Vec::new();
        for_each_in_box(&lo, &hi, |c| {
            if point_segment_dist2(&self.embed(c), a, b) <= r2 {
                out.push(LatticePoint(c.to_vec()));
            }
        });
        out
    }
}

pub(crate) fn saturating_pow(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Visits every integer vector in the box `[lo, hi]` in lexicographic order.
/// Nothing is visited if the box is empty along some axis.
pub(crate) fn for_each_in_box(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let d = lo.len();
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut axis = d;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if cur[axis] < hi[axis] {
                cur[axis] += 1;
                break;
            }
            cur[axis] = lo[axis];
        }
    }
}

/// Floor rounding onto the origin-anchored lattice of pitch `ell`.
pub fn round_to_pitch(q: &[f64], ell: f64) -> LatticePoint {
    LatticePoint(q.iter().map(|x| snap_floor(x / ell)).collect())
}

/// Position of an origin-anchored lattice point of pitch `ell`.
pub fn embed_pitch(lp: &[i64], ell: f64) -> Vec<f64> {
    lp.iter().map(|&a| a as f64 * ell).collect()
}

/// Points of the origin-anchored lattice of pitch `ell` inside the closed
/// ball `B(center, radius)`, lexicographically ordered.
pub fn ball_lattice_points(center: &[f64], radius: f64, ell: f64) -> Vec<LatticePoint> {
    let lo: Vec<i64> = center.iter().map(|c| ((c - radius) / ell).floor() as i64).collect();
    let hi: Vec<i64> = center.iter().map(|c| ((c + radius) / ell).ceil() as i64).collect();
    let r2 = radius * radius;
    let mut out = Vec::new();
    for_each_in_box(&lo, &hi, |a| {
        if dist2(&embed_pitch(a, ell), center) <= r2 {
            out.push(LatticePoint(a.to_vec()));
        }
    });
    out
}

/// Cartesian product of lattice-point sets, in lexicographic order of the
/// coordinate tuples.
#[derive(Debug)]
pub struct PathIter {
    sets: Vec<Vec<LatticePoint>>,
    cursor: Vec<usize>,
    done: bool,
}

impl Iterator for PathIter {
    type Item = Vec<LatticePoint>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.cursor.iter().zip(&self.sets).map(|(&i, s)| s[i].clone()).collect();
        let mut axis = self.sets.len();
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            self.cursor[axis] += 1;
            if self.cursor[axis] < self.sets[axis].len() {
                break;
            }
            self.cursor[axis] = 0;
        }
        Some(item)
    }
}

/// Enumerates every sequence `⟨c_1, …, c_k⟩` with `c_i` drawn from the i-th
/// set. Fails before enumerating anything when the product exceeds `budget`.
pub fn enumerate_paths(point_sets: &[Vec<LatticePoint>], budget: u64) -> Result<PathIter> {
    if point_sets.is_empty() {
        return Err(Error::invalid("grid paths need at least one vertex"));
    }
    let sets: Vec<Vec<LatticePoint>> = point_sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort();
            s.dedup();
            s
        })
        .collect();
    let required = sets.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget, curve: None });
    }
    let done = required == 0;
    Ok(PathIter { cursor: vec![0; sets.len()], sets, done })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: &[i64]) -> LatticePoint {
        LatticePoint(a.to_vec())
    }

    #[test]
    fn grid_sizes() {
        let g = Grid::new(&[0.0, 0.0], 8.0, 0.5).unwrap();
        assert_eq!(g.cells_per_axis(), 16);
        assert_eq!(g.lattice_point_count(), 289);
        let g = Grid::new(&[1.0, 1.0], 2.0, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = g.all_points().iter().map(|p| g.to_point(p).unwrap()).collect();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![0.0, 0.0]);
        assert_eq!(pts[8], vec![2.0, 2.0]);
        let g = Grid::new(&[0.0], 1.5, 1.5).unwrap();
        assert_eq!(g.cells_per_axis(), 1);
        assert!(Grid::new(&[0.0], 1.0, 1.5).is_err());
        assert!(Grid::new(&[0.0], 1.0, 0.0).is_err());
        assert!(Grid::new(&[0.0], 1.0, -1.0).is_err());
    }

    #[test]
    fn rounding() {
        let g = Grid::new(&[0.0, 0.0], 8.0, 1.0).unwrap();
        assert_eq!(g.round(&[0.3, 0.7]).unwrap(), Some(lp(&[4, 4])));
        assert_eq!(g.round(&[1.0, 2.0]).unwrap(), Some(lp(&[5, 6])));
        assert_eq!(g.round(&[5.0, 0.0]).unwrap(), None);
        assert_eq!(g.round(&[4.0, -4.0]).unwrap(), Some(lp(&[8, 0])));
        assert!(g.round(&[0.0]).is_err());
    }

    #[test]
    fn lattice_round_trip_corners() {
        let g = Grid::new(&[0.3, -1.7, 2.0], 5.0, 0.7).unwrap();
        let r = g.cells_per_axis();
        for a in [lp(&[0, 0, 0]), lp(&[r, r, r])] {
            assert_eq!(g.round(&g.to_point(&a).unwrap()).unwrap(), Some(a));
        }
        assert!(matches!(g.to_point(&lp(&[0, r + 1, 0])), Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn enumeration_counts() {
        let a = vec![lp(&[0]), lp(&[1]), lp(&[2])];
        let b = vec![lp(&[5]), lp(&[4])];
        let all: Vec<_> = enumerate_paths(&[a.clone(), b], 100).unwrap().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![lp(&[0]), lp(&[4])]);
        assert_eq!(all[5], vec![lp(&[2]), lp(&[5])]);
        let five: Vec<_> = (0..5).map(|i| lp(&[i])).collect();
        assert_eq!(enumerate_paths(&[five], 100).unwrap().count(), 5);
        let hundred: Vec<_> = (0..100).map(|i| lp(&[i])).collect();
        let err = enumerate_paths(&[hundred.clone(), hundred.clone(), hundred], 100_000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { required: 1_000_000, .. }));
    }

    #[test]
    fn ball_points() {
        let pts = ball_lattice_points(&[0.0, 0.0], 1.0, 1.0);
        assert_eq!(pts, vec![lp(&[-1, 0]), lp(&[0, -1]), lp(&[0, 0]), lp(&[0, 1]), lp(&[1, 0])]);
        assert_eq!(ball_lattice_points(&[2.0, -1.0], 0.0, 1.0), vec![lp(&[2, -1])]);
        assert!(ball_lattice_points(&[0.5, 0.0], 0.0, 1.0).is_empty());
    }

    #[test]
    fn keys() {
        assert_eq!(path_key(&[lp(&[0, 0])]).as_str(), "0,0");
        assert_eq!(path_key(&[lp(&[1, 2]), lp(&[3, 4])]).as_str(), "1,2|3,4");
        assert_eq!(path_key(&[lp(&[-1, 2])]).lattice_points().unwrap(), vec![lp(&[-1, 2])]);
        assert!(PathKey::parse("1,2|3,x").is_err());
        assert!(PathKey::parse("01,2").is_err());
        assert!(PathKey::parse("1,2|3,4").is_ok());
    }

    #[test]
    fn keys_injective_on_small_lattice() {
        let pts: Vec<LatticePoint> = (0..3).flat_map(|x| (0..3).map(move |y| lp(&[x, y]))).collect();
        let mut seqs: Vec<Vec<LatticePoint>> = pts.iter().map(|p| vec![p.clone()]).collect();
        for a in &pts {
            for b in &pts {
                seqs.push(vec![a.clone(), b.clone()]);
            }
        }
        let keys: std::collections::HashSet<PathKey> = seqs.iter().map(|s| path_key(s)).collect();
        assert_eq!(keys.len(), seqs.len());
    }
}
