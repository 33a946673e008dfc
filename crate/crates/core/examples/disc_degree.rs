//! Signed degrees of PL disc maps and the area bound they imply.

use dehn::complex2::{standard_model, TRIANGLE_AREA};
use dehn::diagram::{collapse, VanKampenDiagram};
use dehn::plmaps::{component_degrees, disc_to_degenerate_diagram, random_aligned_map, random_folded_map, PLDiscMap, TriangleImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let tri = standard_model("single_triangle", 0).unwrap();
    let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    let id = PLDiscMap::from_diagram(&VanKampenDiagram::identity(&tri).unwrap()).unwrap();
    println!("identity:\n{}", component_degrees(&id, 0).unwrap().table());

    // Two triangles glued along a side and folded onto the same simplex.
    let fold = PLDiscMap {
        vertices: 4,
        triangles: vec![[0, 1, 2], [1, 3, 2]],
        images: vec![
            TriangleImage { simplex: 0, points: vec![e[0], e[1], e[2]] },
            TriangleImage { simplex: 0, points: vec![e[1], e[0], e[2]] },
        ],
        target: tri.clone(),
    };
    println!("fold:\n{}", component_degrees(&fold, 0).unwrap().table());
    let (d, cert) = disc_to_degenerate_diagram(&fold, 0).unwrap();
    println!("fold as a diagram: area {} against total |degree| {}, collapsed area {}\n",
        cert.degenerate_area, cert.total_abs_degree, collapse(&d).unwrap().area_after);

    let grid = standard_model("disc_grid", 2).unwrap();
    println!("seed  kind     components  Σ|d|  area/(√3/2)");
    for seed in 0..6u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (kind, f) = if seed % 2 == 0 {
            ("folded", random_folded_map(&grid, 3, &mut rng))
        } else {
            ("aligned", random_aligned_map(&grid, 4, &mut rng).unwrap())
        };
        let r = component_degrees(&f, seed).unwrap();
        assert!(r.all_ok());
        println!("{:>4}  {:<8} {:>10} {:>5} {:>12.3}",
            seed, kind, r.components.len(), r.total_abs_degree, r.total_area / TRIANGLE_AREA);
    }
}
