use super::{dist2, Curve};

/// Indices of the vertices kept by the greedy μ-simplification.
///
/// Starting from the first vertex `u`, the next kept vertex is the first one
/// strictly outside the ball `B(u, μ)`; the last vertex is always kept.
pub fn simplify_mu_indices(p: &Curve, mu: f64) -> Vec<usize> {
    let mut kept = simplify_mu_strict_indices(p, mu);
    let last = p.len() - 1;
    if kept.last() != Some(&last) {
        kept.push(last);
    }
    kept
}

/// Like [`simplify_mu_indices`], but trailing vertices that never leave the
/// final ball are absorbed into its center instead of being appended, so
/// every edge of the result is longer than `μ`.
pub fn simplify_mu_strict_indices(p: &Curve, mu: f64) -> Vec<usize> {
    let mu2 = mu * mu;
    let mut kept = vec![0];
    let mut u = 0;
    for v in 1..p.len() {
        if dist2(p.vertex(v), p.vertex(u)) > mu2 {
            kept.push(v);
            u = v;
        }
    }
    kept
}

/// Greedy μ-simplification: `δ_dF(P, P') ≤ μ` and every edge of `P'` except
/// possibly the last is longer than `μ`.
pub fn simplify_mu(p: &Curve, mu: f64) -> Curve {
    select(p, &simplify_mu_indices(p, mu))
}

/// μ-simplification in which every edge of the result is longer than `μ`.
/// Still within discrete Fréchet distance `μ` of the input.
pub fn simplify_mu_strict(p: &Curve, mu: f64) -> Curve {
    select(p, &simplify_mu_strict_indices(p, mu))
}

fn select(p: &Curve, idx: &[usize]) -> Curve {
    let coords = idx.iter().flat_map(|&i| p.vertex(i).iter().copied()).collect();
    Curve::from_flat(p.id().to_owned(), p.dim(), coords).expect("subsequence of a valid curve")
}
