use dehn::complex2::{standard_model, Complex2, Location, OrientedEdge, TRIANGLE_AREA};
use dehn::diagram::{collapse, degenerate_area, VanKampenDiagram};
use dehn::plmaps::{
    combinatorialize, component_degrees, disc_to_degenerate_diagram, edges_touched, generic_edge_points, preimage_count,
    push_loop, random_aligned_map, random_folded_map, PLDiscMap, PLLoop, TriangleImage,
};
use dehn::pushing::{pushing_constants, random_path, Piece, DEFAULT_R};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const E: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn on_edge(c: &Complex2, e: usize, t0: f64, t1: f64) -> Piece {
    let f = c.faces_containing(Location::Edge { edge: e, t: 0.5 })[0];
    let a = c.bary_in(f, Location::Edge { edge: e, t: t0 }).unwrap();
    let b = c.bary_in(f, Location::Edge { edge: e, t: t1 }).unwrap();
    Piece::segment(f, a, b, 1)
}

fn tri() -> Complex2 {
    standard_model("single_triangle", 0).unwrap()
}

#[test]
fn preimage_counts() {
    let c = tri();
    let once = PLLoop::new((0..3).map(|e| on_edge(&c, e, 0.0, 1.0)).collect());
    let p = generic_edge_points(&c, &once, 1).unwrap();
    assert_eq!(p.len(), 3);
    assert!(p.values().all(|&t| (1.0 / 3.0..=2.0 / 3.0).contains(&t)));
    assert_eq!(preimage_count(&c, &once, 0, p[&0]).unwrap(), 1);
    let zigzag = PLLoop::new(vec![
        on_edge(&c, 0, 0.0, 1.0),
        on_edge(&c, 0, 1.0, 0.0),
        on_edge(&c, 0, 0.0, 1.0),
        on_edge(&c, 1, 0.0, 1.0),
        on_edge(&c, 2, 0.0, 1.0),
    ]);
    let p = generic_edge_points(&c, &zigzag, 2).unwrap();
    assert_eq!(preimage_count(&c, &zigzag, 0, p[&0]).unwrap(), 3);
    let wiggle = PLLoop::new(vec![on_edge(&c, 0, 0.2, 0.7), on_edge(&c, 0, 0.7, 0.2)]);
    let p = generic_edge_points(&c, &wiggle, 3).unwrap();
    assert_eq!(preimage_count(&c, &wiggle, 1, p[&1]).unwrap(), 0);
}

#[test]
fn combinatorialize_examples() {
    let c = tri();
    let whole = PLLoop::new((0..3).map(|e| on_edge(&c, e, 0.0, 1.0)).collect());
    let s = combinatorialize(&whole, &c, 4).unwrap();
    assert_eq!(s.zeta.edges, (0..3).map(OrientedEdge::fwd).collect::<Vec<_>>());
    let wiggle = PLLoop::new(vec![on_edge(&c, 0, 0.05, 0.95), on_edge(&c, 0, 0.95, 0.05)]);
    assert!(combinatorialize(&wiggle, &c, 4).unwrap().zeta.is_empty());
    let retreat = PLLoop::new(vec![
        on_edge(&c, 0, 0.0, 0.9),
        on_edge(&c, 0, 0.9, 0.1),
        on_edge(&c, 0, 0.1, 1.0),
        on_edge(&c, 1, 0.0, 1.0),
        on_edge(&c, 2, 0.0, 1.0),
    ]);
    let s = combinatorialize(&retreat, &c, 4).unwrap();
    assert_eq!(s.zeta.edges.iter().filter(|e| e.edge == 0).count(), 1);
    assert!(s.certificate.length_ok && s.certificate.count_ok);
}

#[test]
fn loops_leaving_the_skeleton_are_rejected() {
    let c = tri();
    let mid = [0.4, 0.3, 0.3];
    let eta = PLLoop::new(vec![Piece::segment(0, E[0], mid, 1), Piece::segment(0, mid, E[0], 1)]);
    assert!(combinatorialize(&eta, &c, 0).is_err());
    let open = PLLoop::new(vec![on_edge(&c, 0, 0.0, 1.0)]);
    assert!(combinatorialize(&open, &c, 0).is_err());
}

#[test]
fn degree_examples() {
    let c = tri();
    let id = PLDiscMap::from_diagram(&VanKampenDiagram::identity(&c).unwrap()).unwrap();
    let r = component_degrees(&id, 0).unwrap();
    assert_eq!((r.components.len(), r.components[0].degree), (1, 1));
    assert!((r.components[0].area - TRIANGLE_AREA).abs() < 1e-12);
    let fold = PLDiscMap {
        vertices: 4,
        triangles: vec![[0, 1, 2], [1, 3, 2]],
        images: vec![
            TriangleImage { simplex: 0, points: vec![E[0], E[1], E[2]] },
            TriangleImage { simplex: 0, points: vec![E[1], E[0], E[2]] },
        ],
        target: c.clone(),
    };
    let r = component_degrees(&fold, 1).unwrap();
    assert_eq!(r.components[0].degree, 0);
    assert!((r.total_area - 3f64.sqrt()).abs() < 1e-12);
    assert!(r.all_ok());
    // Six sectors around the barycenter, going twice around.
    let o = [1.0 / 3.0; 3];
    let wrap = PLDiscMap {
        vertices: 7,
        triangles: (0..6).map(|i| [6, i, (i + 1) % 6]).collect(),
        images: (0..6).map(|i| TriangleImage { simplex: 0, points: vec![o, E[i % 3], E[(i + 1) % 3]] }).collect(),
        target: c,
    };
    let r = component_degrees(&wrap, 2).unwrap();
    assert_eq!(r.components[0].degree, 2);
    assert!((r.total_area - 3f64.sqrt()).abs() < 1e-12);
    assert!(r.all_ok());
}

#[test]
fn three_positive_triangles_give_area_three() {
    // Three faces of the 2-grid: both halves of the first square and the
    // upper half of the second.
    let g = standard_model("disc_grid", 2).unwrap();
    let d = VanKampenDiagram::from_triangles(5, &[[0, 1, 3], [0, 3, 2], [1, 4, 3]], &[0, 1, 3, 4, 5], &g).unwrap();
    let f = PLDiscMap::from_diagram(&d).unwrap();
    let (dd, cert) = disc_to_degenerate_diagram(&f, 0).unwrap();
    assert_eq!(degenerate_area(&dd), 3);
    assert_eq!(cert.total_abs_degree, 3);
    assert!(cert.equality);
    assert!((cert.scaled_area - 3.0).abs() < 1e-12);
}

#[test]
fn skeleton_disc_has_area_zero() {
    let c = tri();
    let f = PLDiscMap {
        vertices: 3,
        triangles: vec![[0, 1, 2]],
        images: vec![TriangleImage { simplex: 0, points: vec![E[0], E[1], E[1]] }],
        target: c,
    };
    let (d, cert) = disc_to_degenerate_diagram(&f, 0).unwrap();
    assert_eq!(degenerate_area(&d), 0);
    assert_eq!(cert.total_abs_degree, 0);
    assert!(cert.equality);
}

#[test]
fn fold_gives_strict_inequality() {
    let c = tri();
    let fold = PLDiscMap {
        vertices: 4,
        triangles: vec![[0, 1, 2], [1, 3, 2]],
        images: vec![
            TriangleImage { simplex: 0, points: vec![E[0], E[1], E[2]] },
            TriangleImage { simplex: 0, points: vec![E[1], E[0], E[2]] },
        ],
        target: c,
    };
    let (d, cert) = disc_to_degenerate_diagram(&fold, 0).unwrap();
    assert_eq!((degenerate_area(&d), cert.total_abs_degree), (2, 0));
    assert!(!cert.equality);
    let r = collapse(&d).unwrap();
    assert!(r.area_after <= 2);
}

#[test]
fn unaligned_maps_are_rejected() {
    let f = PLDiscMap {
        vertices: 3,
        triangles: vec![[0, 1, 2]],
        images: vec![TriangleImage { simplex: 0, points: vec![E[0], E[1], [0.2, 0.3, 0.5]] }],
        target: tri(),
    };
    assert!(component_degrees(&f, 0).is_ok());
    assert!(disc_to_degenerate_diagram(&f, 0).is_err());
}

#[test]
fn disc_map_json_round_trip() {
    let g = standard_model("disc_grid", 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = random_folded_map(&g, 3, &mut rng);
    assert_eq!(PLDiscMap::from_json(&f.to_json()).unwrap(), f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn degrees_bound_area(seed in any::<u64>(), grid in 1usize..=4, aligned in any::<bool>()) {
        let g = standard_model("disc_grid", 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = if aligned {
            random_aligned_map(&g, grid + 1, &mut rng).unwrap()
        } else {
            random_folded_map(&g, grid, &mut rng)
        };
        let r = component_degrees(&f, seed).unwrap();
        for c in &r.components {
            prop_assert!(c.samples.iter().all(|&d| d == c.degree));
            prop_assert!(c.area >= TRIANGLE_AREA * c.degree.unsigned_abs() as f64 - 1e-9);
        }
    }

    #[test]
    fn aligned_maps_collapse_below_their_degenerate_area(seed in any::<u64>()) {
        let g = standard_model("disc_grid", 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_aligned_map(&g, 4, &mut rng).unwrap();
        let (d, cert) = disc_to_degenerate_diagram(&f, seed).unwrap();
        prop_assert!(cert.degenerate_area as i64 >= cert.total_abs_degree);
        let r = collapse(&d).unwrap();
        prop_assert!(!r.output.is_degenerate());
        prop_assert!(r.area_after <= degenerate_area(&d));
    }

    #[test]
    fn pushed_loops_straighten_within_the_constant(seed in any::<u64>(), steps in 2usize..8) {
        let c = standard_model("disc_grid", 3).unwrap();
        let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = PLLoop::new(random_path(&c, steps, true, &mut rng).pieces);
        let (eta, cert) = push_loop(&gamma, &c, &k, seed).unwrap();
        prop_assert!(cert.all_ok());
        let s = combinatorialize(&eta, &c, seed).unwrap();
        prop_assert!(s.zeta.is_valid(&c));
        prop_assert!(s.certificate.length_ok);
        let touched = edges_touched(&c, &eta).unwrap();
        prop_assert!(s.zeta.edges.iter().all(|e| touched.contains(&e.edge)));
        let bound = k.c.unwrap() * gamma.length() / s.certificate.ell_min;
        prop_assert!(s.zeta.len() as f64 <= bound + 1e-9);
    }
}
