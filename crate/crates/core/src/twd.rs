//! Approximate time-window density queries.
//!
//! Given region-labelled timestamped points, a query window `[q1, q2]` asks
//! for the regions with at least `θ` points inside it. Build discretizes the
//! data's time span into steps of `ε·t_max`, precomputes the answer for every
//! pair of step endpoints, and answers a query with the two snapped windows
//! nearest to it: the inner one gives `S1 ⊆ S*` and the outer one `S* ⊆ S2`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, QueryCost, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StampedPoint {
    pub region: String,
    pub t: f64,
}

impl StampedPoint {
    pub fn new(region: impl Into<String>, t: f64) -> Self {
        Self { region: region.into(), t }
    }
}

/// Affine map applied to raw timestamps at ingestion, `t ↦ (t − offset)·scale`.
/// Identity when every raw time already lies in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeScale {
    pub offset: f64,
    pub scale: f64,
}

impl TimeScale {
    pub const IDENTITY: TimeScale = TimeScale { offset: 0.0, scale: 1.0 };

    /// Identity if all times are in `[0, 1)`, otherwise the map sending the
    /// observed range onto `[0, 1/2]`.
    pub fn fit(times: impl Iterator<Item = f64> + Clone) -> Self {
        let lo = times.clone().fold(f64::INFINITY, f64::min);
        let hi = times.fold(f64::NEG_INFINITY, f64::max);
        if lo >= 0.0 && hi < 1.0 {
            Self::IDENTITY
        } else if hi > lo {
            Self { offset: lo, scale: 0.5 / (hi - lo) }
        } else {
            Self { offset: lo, scale: 1.0 }
        }
    }

    pub fn apply(&self, t: f64) -> f64 {
        (t - self.offset) * self.scale
    }
}

/// Pair of answers for one query window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sandwich {
    pub inner: BTreeSet<String>,
    pub outer: BTreeSet<String>,
}

/// Pair of endpoint indices `(i, j)` with `i <= j`.
pub type Window = (usize, usize);

#[derive(Clone, Debug)]
pub struct TwdIndex {
    theta: usize,
    eps: f64,
    scale: TimeScale,
    t_min: f64,
    t_max: f64,
    steps: usize,
    points: Vec<StampedPoint>,
    buckets: BTreeMap<(usize, usize), Vec<String>>,
}

impl TwdIndex {
    /// Builds over raw timestamps, rescaling them into `[0, 1)` when needed.
    pub fn build(points: Vec<StampedPoint>, theta: usize, eps: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("no points"));
        }
        if let Some(p) = points.iter().find(|p| !p.t.is_finite()) {
            return Err(Error::invalid(format!("non-finite time {} for region {:?}", p.t, p.region)));
        }
        let scale = TimeScale::fit(points.iter().map(|p| p.t));
        let points: Vec<StampedPoint> =
            points.into_iter().map(|p| StampedPoint { t: scale.apply(p.t), ..p }).collect();
        Self::build_normalized(points, theta, eps, scale)
    }

    fn build_normalized(points: Vec<StampedPoint>, theta: usize, eps: f64, scale: TimeScale) -> Result<Self> {
        if theta == 0 {
            return Err(Error::invalid("theta must be at least 1"));
        }
        let t_min = points.iter().map(|p| p.t).fold(f64::INFINITY, f64::min);
        let t_max = points.iter().map(|p| p.t).fold(f64::NEG_INFINITY, f64::max);
        if t_max <= 0.0 {
            return Err(Error::invalid("all points at time 0: the time step would be 0"));
        }
        if !(eps > 0.0 && eps < 1.0 / t_max - 1.0) {
            return Err(Error::invalid(format!(
                "eps must satisfy 0 < eps < 1/t_max - 1 = {}, got {eps}",
                1.0 / t_max - 1.0
            )));
        }
        let steps = ((t_max - t_min) / (eps * t_max)).ceil() as usize;
        let mut index = Self { theta, eps, scale, t_min, t_max, steps, points, buckets: BTreeMap::new() };

        let ends: Vec<f64> = (0..=steps).map(|i| index.endpoint_time(i)).collect();
        let mut by_region: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for p in &index.points {
            by_region.entry(&p.region).or_default().push(p.t);
        }
        for times in by_region.values_mut() {
            times.sort_by(f64::total_cmp);
        }
        let mut buckets = BTreeMap::new();
        for i in 0..=steps {
            for j in i..=steps {
                let (lo, hi) = (ends[i], ends[j]);
                let regions: Vec<String> = by_region
                    .iter()
                    .filter(|(_, ts)| ts.partition_point(|&x| x <= hi) - ts.partition_point(|&x| x < lo) >= theta)
                    .map(|(r, _)| r.to_string())
                    .collect();
                if !regions.is_empty() {
                    buckets.insert((i, j), regions);
                }
            }
        }
        index.buckets = buckets;
        Ok(index)
    }

    pub(crate) fn from_parts(
        theta: usize,
        eps: f64,
        scale: TimeScale,
        points: Vec<StampedPoint>,
        buckets: BTreeMap<(usize, usize), Vec<String>>,
    ) -> Result<Self> {
        let mut index = Self::build_normalized(points, theta, eps, scale)?;
        index.buckets = buckets;
        Ok(index)
    }

    /// Query over raw timestamps (the ingestion scale is applied first).
    pub fn query(&self, q1: f64, q2: f64) -> Result<Sandwich> {
        self.query_with_cost(q1, q2).map(|(s, _)| s)
    }

    pub fn query_with_cost(&self, q1: f64, q2: f64) -> Result<(Sandwich, QueryCost)> {
        if !(q1.is_finite() && q2.is_finite()) || q1 >= q2 {
            return Err(Error::InvalidQuery(format!("window [{q1}, {q2}] must satisfy q1 < q2")));
        }
        let (inner, outer) = self.snapped(self.scale.apply(q1), self.scale.apply(q2));
        let cost = QueryCost { roundings: 4, clamps: 2, lookups: 2, ..QueryCost::default() };
        let get = |w: Option<(usize, usize)>| -> BTreeSet<String> {
            w.and_then(|w| self.buckets.get(&w)).map(|r| r.iter().cloned().collect()).unwrap_or_default()
        };
        Ok((Sandwich { inner: get(inner), outer: get(outer) }, cost))
    }

    /// Inner and outer endpoint windows of a normalized query; the inner one is
    /// absent when it would be inverted.
    ///
    /// The rounded index is only a starting guess: it is corrected by direct
    /// comparison with the endpoint times, so window membership agrees exactly
    /// with comparing raw times.
    pub fn snapped(&self, q1: f64, q2: f64) -> (Option<Window>, Option<Window>) {
        let n = self.steps as i64;
        let guess = |q: f64| ((q - self.t_min) / self.step()).clamp(-1.0, n as f64 + 1.0);
        let at = |i: i64| self.endpoint_time(i as usize);
        let first_at_or_above = |q: f64| {
            let mut i = (guess(q).ceil() as i64).clamp(0, n + 1);
            while i > 0 && at(i - 1) >= q {
                i -= 1;
            }
            while i <= n && at(i) < q {
                i += 1;
            }
            i
        };
        let last_at_or_below = |q: f64| {
            let mut j = (guess(q).floor() as i64).clamp(-1, n);
            while j < n && at(j + 1) <= q {
                j += 1;
            }
            while j >= 0 && at(j) > q {
                j -= 1;
            }
            j
        };
        let (in_lo, in_hi) = (first_at_or_above(q1), last_at_or_below(q2));
        let inner = (in_lo <= in_hi).then_some((in_lo as usize, in_hi as usize));
        let out_lo = last_at_or_below(q1).max(0) as usize;
        let out_hi = first_at_or_above(q2).min(n) as usize;
        (inner, Some((out_lo, out_hi.max(out_lo))))
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn time_scale(&self) -> TimeScale {
        self.scale
    }

    /// Normalized earliest and latest times.
    pub fn span(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn step(&self) -> f64 {
        self.eps * self.t_max
    }

    /// Number of subintervals `|C|`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Shifted endpoint times `t_min + t_max + i·ℓ_t`.
    pub fn endpoints(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.t_max + self.endpoint_time(i)).collect()
    }

    /// Unshifted normalized time of endpoint `i`.
    ///
    /// The last endpoint never falls below `t_max`, even under rounding.
    pub fn endpoint_time(&self, i: usize) -> f64 {
        let t = self.t_min + i as f64 * self.step();
        if i == self.steps {
            t.max(self.t_max)
        } else {
            t
        }
    }

    pub fn window_count(&self) -> usize {
        (self.steps + 1) * (self.steps + 2) / 2
    }

    /// Normalized points.
    pub fn points(&self) -> &[StampedPoint] {
        &self.points
    }

    pub fn bucket(&self, i: usize, j: usize) -> &[String] {
        self.buckets.get(&(i, j)).map_or(&[], Vec::as_slice)
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<String>)> {
        self.buckets.iter()
    }
}
