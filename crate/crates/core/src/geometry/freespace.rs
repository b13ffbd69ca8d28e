//! Free-space diagram primitives and the continuous Fréchet decision.
//!
//! The diagram of `P` (vertical, parameter `s`) against `C` (horizontal,
//! parameter `t`) is swept one column at a time. A column sits on a vertex
//! of `C` and holds, for every edge of `P`, the part of that edge's free
//! interval reachable by a monotone path from the chosen sources.

use super::{dist2, Curve, FREE_SLACK};
use crate::Result;

/// Negative discriminants this close to zero (relative) are tangencies.
const DISCRIMINANT_TOL: f64 = 1e-12;

/// Closed sub-interval of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const FULL: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ∩ [lo, 1]`.
    pub fn clip_below(self, lo: f64) -> Option<Interval> {
        (self.hi >= lo).then(|| Interval { lo: self.lo.max(lo), hi: self.hi })
    }
}

const START_TOL: f64 = 1e-12;

#[inline]
fn radius2(threshold: f64) -> f64 {
    threshold * threshold * (1.0 + FREE_SLACK)
}

/// Whether `a` and `b` are within `threshold` of each other (closed).
#[inline]
pub fn is_free(a: &[f64], b: &[f64], threshold: f64) -> bool {
    dist2(a, b) <= radius2(threshold)
}

/// Parameters `t ∈ [0, 1]` with `‖a + t(b − a) − c‖ ≤ threshold`.
///
/// Endpoint membership is decided by direct distance tests, so a corner of
/// the diagram is free on every edge it belongs to or on none.
pub fn free_interval(c: &[f64], a: &[f64], b: &[f64], threshold: f64) -> Option<Interval> {
    let r2 = radius2(threshold);
    let free0 = dist2(a, c) <= r2;
    let free1 = dist2(b, c) <= r2;
    if free0 && free1 {
        // the free part of a segment is convex
        return Some(Interval::FULL);
    }
    // roots use the exact radius so that interval ends lie on the sphere and
    // pass the slackened point test when re-checked
    let (mut qa, mut qb, mut qc) = (0.0, 0.0, -threshold * threshold);
    for i in 0..c.len() {
        let u = b[i] - a[i];
        let w = a[i] - c[i];
        qa += u * u;
        qb += 2.0 * u * w;
        qc += w * w;
    }
    if qa == 0.0 {
        return None;
    }
    let mut disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_TOL * (qb * qb + (4.0 * qa * qc).abs()) {
            return match (free0, free1) {
                (true, _) => Some(Interval { lo: 0.0, hi: 0.0 }),
                (_, true) => Some(Interval { lo: 1.0, hi: 1.0 }),
                _ => None,
            };
        }
        disc = 0.0;
    }
    let (t1, t2) = roots(qa, qb, qc, disc.sqrt());
    match (free0, free1) {
        (true, false) => Some(Interval { lo: 0.0, hi: t2.clamp(0.0, 1.0) }),
        (false, true) => Some(Interval { lo: t1.clamp(0.0, 1.0), hi: 1.0 }),
        _ => {
            let (lo, hi) = (t1.max(0.0), t2.min(1.0));
            (lo <= hi).then_some(Interval { lo, hi })
        }
    }
}

fn roots(qa: f64, qb: f64, qc: f64, sq: f64) -> (f64, f64) {
    let q = -0.5 * (qb + qb.signum() * sq);
    if q == 0.0 {
        return (0.0, 0.0);
    }
    let (x, y) = (q / qa, qc / q);
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Reachable free space on one column of the diagram of `P` against `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnReach {
    /// Reachable part of each edge of `P` on this column.
    pub edges: Vec<Option<Interval>>,
    /// Whether the bottom corner `(s = 0)` of the column is reachable along
    /// the bottom boundary.
    pub bottom: bool,
}

impl ColumnReach {
    /// First column of a diagram whose only source is the corner `(0, 0)`.
    /// `p` must have at least two vertices.
    pub fn start(p: &Curve, c0: &[f64], threshold: f64) -> Self {
        Self::from_point(p, c0, threshold, 0.0)
    }

    /// First column with a single source at parameter `s0 ∈ [0, n-1]`
    /// (zero-based) on the column; everything above it along the column is
    /// reachable while the column stays free.
    pub fn from_point(p: &Curve, c0: &[f64], threshold: f64, s0: f64) -> Self {
        let n = p.len();
        let mut edges = vec![None; n - 1];
        let first = (s0.floor() as usize).min(n - 2);
        let u0 = s0 - first as f64;
        let bottom = s0 == 0.0 && is_free(p.vertex(0), c0, threshold);
        let mut lo = u0;
        for (i, slot) in edges.iter_mut().enumerate().skip(first) {
            let iv = free_interval(c0, p.vertex(i), p.vertex(i + 1), threshold);
            // s0 - floor(s0) can overshoot the interval end by rounding noise
            if let Some(iv) = iv {
                if lo > iv.hi && lo - iv.hi <= START_TOL {
                    lo = iv.hi;
                }
            }
            match iv {
                Some(iv) if iv.contains(lo) => {
                    let reach = Interval { lo, hi: iv.hi };
                    *slot = Some(reach);
                    if reach.hi < 1.0 {
                        break;
                    }
                    lo = 0.0;
                }
                _ => break,
            }
        }
        Self { edges, bottom }
    }

    /// First column where every free point is a source.
    pub fn all_free(p: &Curve, c0: &[f64], threshold: f64) -> Self {
        let edges: Vec<_> = (0..p.len() - 1)
            .map(|i| free_interval(c0, p.vertex(i), p.vertex(i + 1), threshold))
            .collect();
        Self { edges, bottom: is_free(p.vertex(0), c0, threshold) }
    }

    pub fn is_dead(&self) -> bool {
        !self.bottom && self.edges.iter().all(Option::is_none)
    }

    /// Whether the top corner `(s = n-1)` of this column is reachable.
    pub fn reaches_top(&self) -> bool {
        matches!(self.edges.last(), Some(Some(iv)) if iv.hi == 1.0)
    }

    /// Smallest reachable parameter on this column, zero-based.
    pub fn lowest(&self) -> Option<f64> {
        if self.bottom {
            return Some(0.0);
        }
        self.edges.iter().enumerate().find_map(|(i, iv)| iv.map(|iv| i as f64 + iv.lo))
    }

    /// Propagates through the cells between the column at `ca` and the column
    /// at `cb`, returning the reachable space on the latter.
    pub fn advance(&self, p: &Curve, ca: &[f64], cb: &[f64], threshold: f64) -> Self {
        let n = p.len();
        let mut edges = vec![None; n - 1];
        // reachable part of the row s = i between the two columns
        let mut row = if self.bottom {
            free_interval(p.vertex(0), ca, cb, threshold).filter(|iv| iv.lo == 0.0)
        } else {
            None
        };
        let bottom = matches!(row, Some(iv) if iv.hi == 1.0);
        for (i, slot) in edges.iter_mut().enumerate() {
            let left = self.edges[i];
            if left.is_none() && row.is_none() {
                continue;
            }
            let right_free = free_interval(cb, p.vertex(i), p.vertex(i + 1), threshold);
            let top_free = free_interval(p.vertex(i + 1), ca, cb, threshold);
            *slot = match (row, left) {
                (Some(_), _) => right_free,
                (None, Some(l)) => right_free.and_then(|f| f.clip_below(l.lo)),
                _ => None,
            };
            row = match (left, row) {
                (Some(_), _) => top_free,
                (None, Some(r)) => top_free.and_then(|f| f.clip_below(r.lo)),
                _ => None,
            };
        }
        Self { edges, bottom }
    }
}

/// Decides `δ_F(P, Q) ≤ threshold` by monotone reachability through the free
/// space diagram. Distances exactly at the threshold count as free.
pub fn continuous_frechet_decide(p: &Curve, q: &Curve, threshold: f64) -> Result<bool> {
    p.check_dim(q)?;
    if threshold < 0.0 {
        return Ok(false);
    }
    if p.len() == 1 {
        return Ok(q.vertices().all(|v| is_free(p.vertex(0), v, threshold)));
    }
    if q.len() == 1 {
        return Ok(p.vertices().all(|v| is_free(q.vertex(0), v, threshold)));
    }
    let mut column = ColumnReach::start(p, q.vertex(0), threshold);
    for j in 0..q.len() - 1 {
        if column.is_dead() {
            return Ok(false);
        }
        column = column.advance(p, q.vertex(j), q.vertex(j + 1), threshold);
    }
    Ok(column.reaches_top())
}
