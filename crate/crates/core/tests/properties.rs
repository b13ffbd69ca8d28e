mod common;

use curvegrid::geometry::{
    approx_diameter, continuous_frechet_decide, discrete_frechet, discrete_frechet_decide, dist, simplify_mu,
    simplify_mu_strict,
};
use curvegrid::grid::{ball_lattice_points, embed_pitch, LatticePoint, PathKey};
use curvegrid::oracle::exact_diameter;
use curvegrid::{Curve, Grid};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn curve_strategy(max_len: usize) -> impl Strategy<Value = Curve> {
    prop::collection::vec((coord(), coord()), 1..=max_len)
        .prop_map(|pts| Curve::new("c", pts.into_iter().map(|(x, y)| vec![x, y]).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn discrete_distance_is_symmetric(p in curve_strategy(6), q in curve_strategy(6)) {
        prop_assert_eq!(discrete_frechet(&p, &q).unwrap(), discrete_frechet(&q, &p).unwrap());
    }

    #[test]
    fn discrete_triangle_inequality(p in curve_strategy(5), q in curve_strategy(5), r in curve_strategy(5)) {
        let pq = discrete_frechet(&p, &q).unwrap();
        let qr = discrete_frechet(&q, &r).unwrap();
        let pr = discrete_frechet(&p, &r).unwrap();
        prop_assert!(pr <= (pq + qr) * (1.0 + 1e-12));
    }

    #[test]
    fn decisions_accept_their_distance(p in curve_strategy(6), q in curve_strategy(6)) {
        let d = discrete_frechet(&p, &q).unwrap();
        prop_assert!(discrete_frechet_decide(&p, &q, d).unwrap());
        // the continuous distance never exceeds the discrete one
        prop_assert!(continuous_frechet_decide(&p, &q, d).unwrap());
        if d > 1e-9 {
            prop_assert!(!discrete_frechet_decide(&p, &q, d * (1.0 - 1e-6)).unwrap());
        }
    }

    #[test]
    fn continuous_decision_is_monotone(p in curve_strategy(5), q in curve_strategy(5), a in 0.0..15.0f64, b in 0.0..15.0f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        if continuous_frechet_decide(&p, &q, lo).unwrap() {
            prop_assert!(continuous_frechet_decide(&p, &q, hi).unwrap());
        }
    }

    #[test]
    fn continuous_lower_bounded_by_endpoints(p in curve_strategy(5), q in curve_strategy(5)) {
        let n = p.len() - 1;
        let k = q.len() - 1;
        let ends = dist(p.vertex(0), q.vertex(0)).max(dist(p.vertex(n), q.vertex(k)));
        if ends > 1e-9 {
            prop_assert!(!continuous_frechet_decide(&p, &q, ends * (1.0 - 1e-6)).unwrap());
        }
    }

    #[test]
    fn simplification_contract(p in curve_strategy(12), mu in 0.01..8.0f64) {
        let s = simplify_mu(&p, mu);
        prop_assert!(discrete_frechet_decide(&p, &s, mu).unwrap());
        prop_assert_eq!(s.vertex(0), p.vertex(0));
        prop_assert_eq!(s.vertex(s.len() - 1), p.vertex(p.len() - 1));
        for i in 0..s.len().saturating_sub(2) {
            prop_assert!(dist(s.vertex(i), s.vertex(i + 1)) > mu);
        }
        let strict = simplify_mu_strict(&p, mu);
        prop_assert!(discrete_frechet_decide(&p, &strict, mu).unwrap());
        for i in 0..strict.len() - 1 {
            prop_assert!(dist(strict.vertex(i), strict.vertex(i + 1)) > mu);
        }
    }

    #[test]
    fn diameter_estimate_within_factor_two(
        pts in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 1..40),
        seed in 0usize..40,
    ) {
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let seed = seed % refs.len();
        let est = approx_diameter(&refs, seed).unwrap();
        let exact = exact_diameter(&refs);
        prop_assert!(exact / 2.0 <= est + 1e-9 && est <= exact + 1e-9);
    }

    #[test]
    fn ball_matches_scan(cx in -3.0..3.0f64, cy in -3.0..3.0f64, r in 0.0..2.0f64, ell in 0.1..1.0f64) {
        let got = ball_lattice_points(&[cx, cy], r, ell);
        let mut want = Vec::new();
        let span = (3.0 + r) / ell + 2.0;
        let span = span.ceil() as i64;
        for a in -span..=span {
            for b in -span..=span {
                let x = embed_pitch(&[a, b], ell);
                if (x[0] - cx).powi(2) + (x[1] - cy).powi(2) <= r * r {
                    want.push(LatticePoint(vec![a, b]));
                }
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn rounding_stays_within_a_cell(x in -4.0..4.0f64, y in -4.0..4.0f64) {
        let g = Grid::new(&[0.0, 0.0], 8.0, 0.3).unwrap();
        let lp = g.round(&[x, y]).unwrap().unwrap();
        let c = g.to_point(&lp).unwrap();
        prop_assert!(c[0] <= x + 1e-9 && x - c[0] < 0.3 + 1e-9);
        prop_assert!(c[1] <= y + 1e-9 && y - c[1] < 0.3 + 1e-9);
        prop_assert!(dist(&c, &[x, y]) <= 0.3 * 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn path_keys_round_trip(seq in prop::collection::vec(prop::collection::vec(-50i64..50, 3), 1..5)) {
        let pts: Vec<LatticePoint> = seq.into_iter().map(LatticePoint).collect();
        let key = PathKey::new(&pts);
        prop_assert_eq!(PathKey::parse(key.as_str()).unwrap().lattice_points().unwrap(), pts);
    }
}
