//! Builds degenerate van Kampen diagrams with random moves and collapses
//! them back to combinatorial ones.

use dehn::complex2::standard_model;
use dehn::diagram::{apply_move, collapse, degenerate_area, DegenerateGenerator, Move, VanKampenDiagram};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let target = standard_model("disc_grid", 2).unwrap();
    println!("target: {} vertices, {} edges, {} faces, euler {}",
        target.vertex_count(), target.edges().len(), target.faces().len(), target.euler_characteristic());
    let start = VanKampenDiagram::identity(&target).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sphere = apply_move(&start, Move::FoldedSphere, &mut rng).unwrap().expect("a triangle to fold into");
    let r = collapse(&sphere).unwrap();
    println!("folded sphere: area {} -> {}, spheres excised {} with euler {:?}",
        degenerate_area(&sphere), r.area_after, r.excised_sphere_count, r.excised_euler);

    println!("\nseed  faces  degenerate  combinatorial  spheres");
    let generator = DegenerateGenerator { max_moves: 6 };
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = generator.generate(&start, &mut rng).unwrap();
        let r = collapse(&d).unwrap();
        assert_eq!(r.output.boundary_word(), d.boundary_word());
        println!("{:>4} {:>6} {:>11} {:>14} {:>8}",
            seed, d.domain().faces().len(), degenerate_area(&d), r.area_after, r.excised_sphere_count);
    }
}
