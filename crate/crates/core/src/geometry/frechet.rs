use super::{dist2, is_free, Curve};
use crate::Result;

/// Exact discrete Fréchet distance by the `O(mk)` coupling dynamic program.
pub fn discrete_frechet(p: &Curve, q: &Curve) -> Result<f64> {
    p.check_dim(q)?;
    let k = q.len();
    // squared distances; sqrt once at the end
    let mut prev = vec![0.0f64; k];
    let mut cur = vec![0.0f64; k];
    for (i, pv) in p.vertices().enumerate() {
        for j in 0..k {
            let d = dist2(pv, q.vertex(j));
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => d.max(cur[j - 1]),
                (_, 0) => d.max(prev[0]),
                _ => d.max(prev[j].min(prev[j - 1]).min(cur[j - 1])),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[k - 1].sqrt())
}

/// Boolean coupling reachability over the vertices of `P`, one column per
/// vertex of the other curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteReach(pub Vec<bool>);

impl DiscreteReach {
    pub fn start(p: &Curve, c0: &[f64], threshold: f64) -> Self {
        let mut alive = true;
        DiscreteReach(
            p.vertices()
                .map(|v| {
                    alive = alive && is_free(v, c0, threshold);
                    alive
                })
                .collect(),
        )
    }

    pub fn advance(&self, p: &Curve, c: &[f64], threshold: f64) -> Self {
        let mut next = Vec::with_capacity(self.0.len());
        for (i, v) in p.vertices().enumerate() {
            let from = self.0[i] || (i > 0 && (self.0[i - 1] || next[i - 1]));
            next.push(from && is_free(v, c, threshold));
        }
        DiscreteReach(next)
    }

    pub fn is_dead(&self) -> bool {
        !self.0.contains(&true)
    }

    pub fn reaches_end(&self) -> bool {
        self.0.last() == Some(&true)
    }
}

/// Decides `δ_dF(P, Q) ≤ threshold` with the same closed boundary convention
/// as the continuous decision.
pub fn discrete_frechet_decide(p: &Curve, q: &Curve, threshold: f64) -> Result<bool> {
    p.check_dim(q)?;
    let mut reach = DiscreteReach::start(p, q.vertex(0), threshold);
    for c in q.vertices().skip(1) {
        if reach.is_dead() {
            return Ok(false);
        }
        reach = reach.advance(p, c, threshold);
    }
    Ok(reach.reaches_end())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(pts: &[(f64, f64)]) -> Curve {
        Curve::new("c", pts.iter().map(|&(x, y)| vec![x, y]).collect()).unwrap()
    }

    #[test]
    fn identical_and_offset() {
        let p = curve(&[(0.0, 0.0), (1.0, 0.0)]);
        let q = curve(&[(0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(discrete_frechet(&p, &p).unwrap(), 0.0);
        assert_eq!(discrete_frechet(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn tent_against_segment() {
        // Exhaustive enumeration of the monotone couplings of this 2x3
        // instance gives sqrt(2): the apex (1,1) must be paired with an
        // endpoint of P.
        let p = curve(&[(0.0, 0.0), (2.0, 0.0)]);
        let q = curve(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        assert_eq!(discrete_frechet(&p, &q).unwrap(), 2f64.sqrt());
        assert_eq!(discrete_frechet(&q, &p).unwrap(), 2f64.sqrt());
    }

    #[test]
    fn decide_matches_value() {
        let p = curve(&[(0.0, 0.0), (2.0, 0.0)]);
        let q = curve(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        assert!(discrete_frechet_decide(&p, &q, 2f64.sqrt()).unwrap());
        assert!(!discrete_frechet_decide(&p, &q, 1.41).unwrap());
    }
}
