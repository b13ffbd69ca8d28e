#![allow(dead_code)]

use curvegrid::Curve;
use rand::Rng;

pub fn curve(id: &str, pts: &[(f64, f64)]) -> Curve {
    Curve::new(id, pts.iter().map(|&(x, y)| vec![x, y]).collect()).unwrap()
}

/// Random curve with `m` vertices uniform in the square `[lo, hi]^2`.
pub fn random_curve(rng: &mut impl Rng, id: impl Into<String>, m: usize, lo: f64, hi: f64) -> Curve {
    let pts = (0..m).map(|_| vec![rng.gen_range(lo..=hi), rng.gen_range(lo..=hi)]).collect();
    Curve::new(id, pts).unwrap()
}

/// Random corpus of `n` curves with between 1 and `max_m` vertices each.
pub fn random_corpus(rng: &mut impl Rng, n: usize, max_m: usize, lo: f64, hi: f64) -> Vec<Curve> {
    (0..n)
        .map(|i| {
            let m = rng.gen_range(1..=max_m);
            random_curve(rng, format!("c{i}"), m, lo, hi)
        })
        .collect()
}

/// Query of `k` vertices that walks the vertices of `p` in order (with
/// repetition or skipping) and adds noise of at most `noise` per vertex.
pub fn vertex_walk_query(rng: &mut impl Rng, p: &Curve, k: usize, noise: f64) -> Curve {
    let m = p.len();
    let mut idx: Vec<usize> = (0..k).map(|_| rng.gen_range(0..m)).collect();
    idx.sort_unstable();
    if k >= m {
        // cover every vertex so a close coupling exists
        for (j, slot) in idx.iter_mut().enumerate().take(m) {
            *slot = j;
        }
        idx.sort_unstable();
    }
    idx[0] = 0;
    let pts = idx
        .iter()
        .map(|&j| {
            let r = noise * rng.gen_range(0.0..=1.0f64).sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![p.vertex(j)[0] + r * a.cos(), p.vertex(j)[1] + r * a.sin()]
        })
        .collect();
    Curve::new("q", pts).unwrap()
}
