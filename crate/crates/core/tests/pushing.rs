use std::f64::consts::PI;

use dehn::complex2::{chart, from_chart, standard_model, BARYCENTER};
use dehn::pushing::{
    choose_center, common_side, estimate_alpha, normal_form, push_chain, pushing_constants, radial_integral,
    radial_integral_quadrature, radial_project, random_path, simplex_seed, wilson, PLChain, Piece, PushError,
    DEFAULT_R,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

// Signed area enclosed by a 1-cycle, summed over its segments.
fn shoelace(pieces: &[Piece], sign: i64) -> f64 {
    pieces
        .iter()
        .map(|p| match p {
            Piece::Segment { points, multiplicity, .. } => {
                (sign * multiplicity) as f64 * 0.5 * cross(chart(points[0]), chart(points[1]))
            }
            other => panic!("unexpected piece {:?}", other),
        })
        .sum()
}

fn signed_area(pieces: &[Piece]) -> f64 {
    pieces
        .iter()
        .map(|p| match p {
            Piece::Triangle { points, multiplicity, .. } => {
                let [a, b, c] = [chart(points[0]), chart(points[1]), chart(points[2])];
                *multiplicity as f64 * 0.5 * cross([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]])
            }
            other => panic!("unexpected piece {:?}", other),
        })
        .sum()
}

#[test]
fn constant_examples() {
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    assert!((k.big_k - 13.0 * PI * DEFAULT_R * DEFAULT_R).abs() < 1e-12);
    assert_eq!(k.v0, 14);
    assert!((k.ball_volume - PI * DEFAULT_R * DEFAULT_R).abs() < 1e-15);
    let c = k.c.unwrap();
    assert!(c >= k.c_r.unwrap() && c >= k.c_s.unwrap());
    assert!((c - 190.5).abs() < 0.5, "{}", c);
    let d = pushing_constants(2, 3, 0.05).unwrap();
    assert_eq!(d.v0, 38);
    assert!(d.c.is_none());
    assert!(matches!(pushing_constants(2, 2, 0.05), Err(PushError::Unsupported(2, 2))));
}

#[test]
fn quadrature_matches_closed_form() {
    for (k, i) in [(1, 2), (2, 3)] {
        for rho in [0.01, 0.1, 0.3] {
            let exact = radial_integral(k, i, rho);
            let quad = radial_integral_quadrature(k, i, rho);
            assert!((quad - exact).abs() <= 1e-6 * exact, "{} {} {}", k, i, rho);
        }
    }
}

#[test]
fn chord_through_the_disc_becomes_one_arc() {
    let r = DEFAULT_R;
    let o = chart(BARYCENTER);
    let q = PLChain::new(
        1,
        vec![Piece::segment(0, from_chart([o[0] - 0.4, o[1]]), from_chart([o[0] + 0.4, o[1]]), 1)],
    );
    let u = from_chart([o[0], o[1] + 0.05]);
    let p = radial_project(&q, u, r);
    let arcs: Vec<&Piece> = p.pieces.iter().filter(|x| matches!(x, Piece::Arc { .. })).collect();
    assert_eq!(arcs.len(), 1);
    // The chord is seen from u under a half turn minus twice the offset angle.
    let expected = 2.0 * r * (PI - 2.0 * (0.05 / (2.0 * r)).asin());
    assert!((arcs[0].size() - expected).abs() < 1e-9);
    let tri = standard_model("single_triangle", 0).unwrap();
    assert_eq!(p.boundary_points(&tri), q.boundary_points(&tri));
}

#[test]
fn tiny_segment_bad_set_matches_closed_form() {
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    let o = chart(BARYCENTER);
    let eps = 1e-5;
    let q = PLChain::new(1, vec![Piece::segment(0, from_chart(o), from_chart([o[0] + eps, o[1]]), 1)]);
    for v in [4.0, 8.0, 16.0] {
        let a = estimate_alpha(&q, &k, v, 40_000, 11);
        let exact = 2.0 * PI * DEFAULT_R * DEFAULT_R / (v * v);
        assert!(a.low <= exact && exact <= a.high, "v {}: {} not in [{}, {}]", v, exact, a.low, a.high);
        assert!(a.low * v <= k.big_k);
    }
}

#[test]
fn rejection_rate_is_bounded_for_a_diameter() {
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    let q = PLChain::new(1, vec![Piece::segment(0, [1.0, 0.0, 0.0], [0.0, 0.5, 0.5], 1)]);
    let a = estimate_alpha(&q, &k, k.v0 as f64, 4000, 3);
    assert!(a.high / k.ball_volume <= 13.0 / 14.0);
    let (mut rejected, mut accepted) = (0usize, 0usize);
    for seed in 0..200 {
        rejected += choose_center(&q, &k, seed).unwrap().rejected;
        accepted += 1;
    }
    assert!(rejected as f64 / ((rejected + accepted) as f64) <= 13.0 / 14.0);
}

#[test]
fn wilson_interval_edges() {
    assert_eq!(wilson(0, 100).0, 0.0);
    assert_eq!(wilson(100, 100).1, 1.0);
    let (lo, hi) = wilson(50, 100);
    assert!(lo < 0.5 && 0.5 < hi);
}

#[test]
fn edge_paths_are_fixed() {
    let c = standard_model("disc_grid", 2).unwrap();
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    // Along the bottom row of the grid, then up the diagonal of face 1.
    let t = PLChain::new(
        1,
        vec![
            Piece::segment(0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1),
            Piece::segment(1, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 2),
        ],
    );
    let out = push_chain(&t, &c, &k, 4).unwrap();
    assert_eq!(out.r, t);
    assert!(out.s.pieces.is_empty());
    assert!(out.certificate.all_ok());
}

#[test]
fn bent_path_homotopy_encloses_the_right_area() {
    let c = standard_model("single_triangle", 0).unwrap();
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    let mid = [0.2, 0.2, 0.6];
    let t = PLChain::new(
        1,
        vec![Piece::segment(0, [1.0, 0.0, 0.0], mid, 1), Piece::segment(0, mid, [0.0, 1.0, 0.0], 1)],
    );
    let out = push_chain(&t, &c, &k, 7).unwrap();
    assert!(out.certificate.all_ok());
    assert!(out.r.pieces.iter().all(|p| p.endpoints().is_some_and(|(a, b)| common_side(a, b).is_some())));
    let enclosed = shoelace(&t.pieces, 1) + shoelace(&out.r.pieces, -1);
    assert!((signed_area(&out.s.pieces) - enclosed).abs() < 1e-6, "{} vs {}", signed_area(&out.s.pieces), enclosed);
    assert!(enclosed.abs() > 0.1);
}

#[test]
fn one_hundred_random_loops() {
    let c = standard_model("disc_grid", 3).unwrap();
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_path(&c, 8, true, &mut rng);
        assert!(t.boundary_points(&c).is_empty());
        let out = push_chain(&t, &c, &k, seed).unwrap();
        assert!(out.certificate.all_ok(), "seed {}", seed);
        assert!(out.r.boundary_points(&c).is_empty());
        worst = worst.max(out.certificate.observed_c);
    }
    assert!(worst <= k.c.unwrap());
}

#[test]
fn pushing_is_deterministic() {
    let c = standard_model("disc_grid", 2).unwrap();
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = random_path(&c, 5, false, &mut rng);
    let a = push_chain(&t, &c, &k, 7).unwrap();
    let b = push_chain(&t, &c, &k, 7).unwrap();
    assert_eq!(a.r.to_json(), b.r.to_json());
    assert_eq!(a.certificate.to_json(), b.certificate.to_json());
    assert_ne!(simplex_seed(7, 0), simplex_seed(7, 1));
}

#[test]
fn normal_form_spots_a_mismatch() {
    let c = standard_model("single_triangle", 0).unwrap();
    let t = vec![Piece::segment(0, [1.0, 0.0, 0.0], [0.2, 0.2, 0.6], 1)];
    let same: Vec<Piece> = t.iter().cloned().chain([Piece::segment(0, [0.2, 0.2, 0.6], [1.0, 0.0, 0.0], 1)]).collect();
    assert!(normal_form(&c, &same).is_empty());
    // Splitting the segment in two still cancels.
    let mid = [0.6, 0.1, 0.3];
    let split = vec![
        Piece::segment(0, [1.0, 0.0, 0.0], mid, 1),
        Piece::segment(0, mid, [0.2, 0.2, 0.6], 1),
        Piece::segment(0, [0.2, 0.2, 0.6], [1.0, 0.0, 0.0], 1),
    ];
    assert!(normal_form(&c, &split).is_empty());
    let shifted = vec![
        Piece::segment(0, [1.0, 0.0, 0.0], [0.2, 0.2, 0.6], 1),
        Piece::segment(0, [0.2, 0.21, 0.59], [1.0, 0.0, 0.0], 1),
    ];
    assert!(!normal_form(&c, &shifted).is_empty());
    let on_edge = vec![Piece::segment(0, [1.0, 0.0, 0.0], [0.5, 0.5, 0.0], 2)];
    let r = normal_form(&c, &on_edge);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].multiplicity.abs(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn v0_does_not_depend_on_r(r in 0.001f64..0.13) {
        prop_assert_eq!(pushing_constants(1, 2, r).unwrap().v0, 14);
        prop_assert_eq!(pushing_constants(2, 3, r * 0.7).unwrap().v0, 38);
    }

    #[test]
    fn pushed_paths_meet_every_bound(seed in any::<u64>(), steps in 1usize..8, closed in any::<bool>()) {
        let c = standard_model("disc_grid", 2).unwrap();
        let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_path(&c, steps, closed, &mut rng);
        let out = push_chain(&t, &c, &k, seed).unwrap();
        prop_assert!(out.certificate.boundary_ok);
        prop_assert!(out.certificate.skeleton_ok);
        prop_assert!(out.certificate.homotopy_ok);
        prop_assert!(out.certificate.bounds_ok);
        prop_assert_eq!(out.images.len(), t.flatten().pieces.len());
    }

    #[test]
    fn chain_json_round_trips(seed in any::<u64>()) {
        let c = standard_model("disc_grid", 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_path(&c, 4, false, &mut rng);
        prop_assert_eq!(PLChain::from_json(&t.to_json()).unwrap(), t);
    }
}
