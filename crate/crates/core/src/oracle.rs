//! Brute-force references for the indexes. Deliberately naive; they share
//! only the geometric primitives with the index builders.

use std::collections::{BTreeMap, BTreeSet};

use crate::asrs::SubcurveRange;
use crate::geometry::{dist, Curve, Metric};
use crate::twd::StampedPoint;
use crate::Result;

/// Linear scan over `curves`. Returns the catalog positions within `δ` of
/// `q` and those within `(1+ε)δ`, both ascending.
pub fn scan_near_neighbors(
    curves: &[Curve],
    q: &Curve,
    delta: f64,
    eps: f64,
    metric: Metric,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut within = Vec::new();
    let mut stretched = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        if metric.decide(c, q, (1.0 + eps) * delta)? {
            stretched.push(i);
            if metric.decide(c, q, delta)? {
                within.push(i);
            }
        }
    }
    Ok((within, stretched))
}

/// Exact diameter by comparing every pair of points.
pub fn exact_diameter(points: &[&[f64]]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(dist(a, b));
        }
    }
    best
}

/// Searches the parameter pairs `(s, e)` of `P` on a lattice of the given
/// resolution (plus every vertex parameter) for a subcurve within `delta` of
/// `Q`. Finding nothing does not prove that no subcurve exists.
pub fn sampled_subcurve_witness(
    p: &Curve,
    q: &Curve,
    delta: f64,
    resolution: f64,
) -> Result<Option<SubcurveRange>> {
    p.check_dim(q)?;
    let n = p.len() as f64;
    let steps = ((n - 1.0) / resolution).round() as usize;
    let mut params: Vec<f64> = (0..=steps).map(|i| (1.0 + i as f64 * resolution).min(n)).collect();
    params.extend((1..=p.len()).map(|i| i as f64));
    params.sort_by(f64::total_cmp);
    params.dedup();
    let first = q.vertex(0);
    let last = q.vertex(q.len() - 1);
    for (i, &s) in params.iter().enumerate() {
        if dist(&p.point_at(s), first) > delta * (1.0 + 1e-9) {
            continue;
        }
        for &e in &params[i..] {
            if dist(&p.point_at(e), last) > delta * (1.0 + 1e-9) {
                continue;
            }
            if Metric::Continuous.decide(&p.subcurve(s, e), q, delta)? {
                return Ok(Some(SubcurveRange::new(s, e)));
            }
        }
    }
    Ok(None)
}

/// Regions with at least `theta` points in the closed window `[q1, q2]`.
pub fn window_regions(points: &[StampedPoint], theta: usize, q1: f64, q2: f64) -> BTreeSet<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in points {
        if q1 <= p.t && p.t <= q2 {
            *counts.entry(&p.region).or_default() += 1;
        }
    }
    counts.into_iter().filter(|&(_, c)| c >= theta).map(|(r, _)| r.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::continuous_frechet_decide;

    fn curve(id: &str, pts: &[(f64, f64)]) -> Curve {
        Curve::new(id, pts.iter().map(|&(x, y)| vec![x, y]).collect()).unwrap()
    }

    #[test]
    fn scan_trivia() {
        let q = curve("q", &[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(scan_near_neighbors(&[], &q, 1.0, 0.5, Metric::Continuous).unwrap(), (vec![], vec![]));
        let cs = [curve("a", &[(0.0, 1.2), (1.0, 1.2)]), q.clone()];
        let (w, s) = scan_near_neighbors(&cs, &q, 1.0, 0.5, Metric::Continuous).unwrap();
        assert_eq!((w, s), (vec![1], vec![0, 1]));
    }

    #[test]
    fn diameter_trivia() {
        let sq: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]];
        assert_eq!(exact_diameter(&sq), 2f64.sqrt());
        assert_eq!(exact_diameter(&[&[3.0, 4.0]]), 0.0);
    }

    #[test]
    fn witness_trivia() {
        let p = curve("p", &[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]);
        let q = curve("q", &[(1.0, 1.0), (2.0, 0.0)]);
        let w = sampled_subcurve_witness(&p, &q, 1e-6, 0.1).unwrap().unwrap();
        assert!(continuous_frechet_decide(&w.subcurve(&p), &q, 1e-6).unwrap());
        let far = curve("f", &[(100.0, 100.0), (101.0, 100.0)]);
        assert_eq!(sampled_subcurve_witness(&p, &far, 1.0, 0.1).unwrap(), None);
    }

    #[test]
    fn window_trivia() {
        let pts = vec![StampedPoint::new("a", 0.1), StampedPoint::new("b", 0.5), StampedPoint::new("b", 0.6)];
        assert_eq!(window_regions(&pts, 1, 0.0, 0.9).len(), 2);
        assert!(window_regions(&pts, 1, 0.2, 0.4).is_empty());
        assert_eq!(window_regions(&pts, 2, 0.5, 0.6), BTreeSet::from(["b".to_string()]));
    }
}
