//! Curve model and the Fréchet primitives the indexes are built on.

mod frechet;
mod freespace;
mod simplify;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use frechet::{discrete_frechet, discrete_frechet_decide, DiscreteReach};
pub use freespace::{continuous_frechet_decide, free_interval, is_free, ColumnReach, Interval};
pub use simplify::{simplify_mu, simplify_mu_indices, simplify_mu_strict, simplify_mu_strict_indices};

/// Relative slack applied to the squared threshold when testing whether a
/// pair of points is free. Absorbs rounding on points that sit exactly on
/// the boundary of a free region.
pub const FREE_SLACK: f64 = 1e-10;

/// A polygonal curve: a non-empty sequence of vertices in `d` dimensions.
///
/// The curve is parametrized over `[1, n]`: `P(i) = p_i` for integer `i` and
/// each edge is traversed linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    id: String,
    dim: usize,
    coords: Vec<f64>,
}

impl Curve {
    pub fn new(id: impl Into<String>, vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices.first().ok_or(Error::EmptyInput("curve has no vertices"))?.len();
        let mut coords = Vec::with_capacity(dim * vertices.len());
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            coords.extend_from_slice(v);
        }
        Self::from_flat(id, dim, coords)
    }

    pub fn from_flat(id: impl Into<String>, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("curve dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(Error::EmptyInput("curve has no vertices"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Format(format!(
                "{} coordinates do not split into {dim}-dimensional vertices",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(Self { id: id.into(), dim, coords })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = &[f64]> + DoubleEndedIterator + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vertices(&self) -> Vec<Vec<f64>> {
        self.vertices().map(<[f64]>::to_vec).collect()
    }

    /// The point `P(s)` for a parameter `s` in `[1, n]` (clamped).
    pub fn point_at(&self, s: f64) -> Vec<f64> {
        let last = (self.len() - 1) as f64;
        let s = (s - 1.0).clamp(0.0, last);
        let i = (s.floor() as usize).min(self.len().saturating_sub(2));
        let t = s - i as f64;
        if self.len() == 1 || t == 0.0 {
            return self.vertex(i).to_vec();
        }
        if t == 1.0 {
            return self.vertex(i + 1).to_vec();
        }
        lerp(self.vertex(i), self.vertex(i + 1), t)
    }

    /// The subcurve `P[start..end]` for parameters `1 <= start <= end <= n`.
    pub fn subcurve(&self, start: f64, end: f64) -> Curve {
        let mut coords = self.point_at(start);
        if end > start {
            for v in 1..=self.len() {
                let at = v as f64;
                if at > start && at < end {
                    coords.extend_from_slice(self.vertex(v - 1));
                }
            }
            coords.extend(self.point_at(end));
        }
        Curve { id: format!("{}[{start}:{end}]", self.id), dim: self.dim, coords }
    }

    pub(crate) fn check_dim(&self, other: &Curve) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }
}

/// Which Fréchet variant an index is built for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Continuous,
    Discrete,
}

impl Metric {
    /// Decides whether the distance between `p` and `q` is at most `threshold`.
    pub fn decide(self, p: &Curve, q: &Curve, threshold: f64) -> Result<bool> {
        match self {
            Metric::Continuous => continuous_frechet_decide(p, q, threshold),
            Metric::Discrete => discrete_frechet_decide(p, q, threshold),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Continuous => "continuous",
            Metric::Discrete => "discrete",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Metric::Continuous),
            "discrete" => Ok(Metric::Discrete),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Squared distance from `c` to the segment `a b`.
pub fn point_segment_dist2(c: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut uu = 0.0;
    let mut uw = 0.0;
    for i in 0..c.len() {
        let u = b[i] - a[i];
        uu += u * u;
        uw += u * (c[i] - a[i]);
    }
    if uu == 0.0 {
        return dist2(c, a);
    }
    let t = (uw / uu).clamp(0.0, 1.0);
    c.iter()
        .zip(a.iter().zip(b))
        .map(|(ci, (ai, bi))| {
            let d = ai + t * (bi - ai) - ci;
            d * d
        })
        .sum()
}

pub(crate) fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

/// Checks that a corpus is non-empty, of uniform dimension and has unique ids.
pub(crate) fn validate_corpus(curves: &[Curve]) -> Result<()> {
    let first = curves.first().ok_or(Error::EmptyInput("no curves"))?;
    let mut ids = std::collections::HashSet::new();
    for c in curves {
        if c.dim() != first.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), got: c.dim() });
        }
        if !ids.insert(c.id()) {
            return Err(Error::invalid(format!("duplicate curve id {:?}", c.id())));
        }
    }
    Ok(())
}

/// Greedy diameter estimate: the largest distance from `vertices[seed]` to any
/// vertex. Always within a factor two of the exact diameter.
pub fn approx_diameter(vertices: &[&[f64]], seed: usize) -> Result<f64> {
    let anchor = vertices.get(seed).ok_or_else(|| {
        if vertices.is_empty() {
            Error::EmptyInput("no vertices")
        } else {
            Error::invalid(format!("seed {seed} out of range for {} vertices", vertices.len()))
        }
    })?;
    Ok(vertices.iter().map(|v| dist2(anchor, v)).fold(0.0, f64::max).sqrt())
}
