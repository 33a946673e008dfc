//! Closed PL loop -> pushed loop in the 1-skeleton -> combinatorial loop.
//! In the disc every loop straightens to a null-homotopic edge loop; the
//! annulus keeps the winding.

use dehn::complex2::standard_model;
use dehn::plmaps::{combinatorialize, push_loop, PLLoop};
use dehn::pushing::{pushing_constants, random_path, DEFAULT_R};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    for (model, size) in [("disc_grid", 3), ("annulus", 2)] {
        let c = standard_model(model, size).unwrap();
        println!("{}:{}", model, size);
        println!("seed  len(γ)   len(η)  |ζ|  bound C·len(γ)/ℓ_min  ζ");
        for seed in 0..6 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gamma = PLLoop::new(random_path(&c, 9, true, &mut rng).pieces);
            let (eta, cert) = push_loop(&gamma, &c, &k, seed).unwrap();
            assert!(cert.all_ok());
            let s = combinatorialize(&eta, &c, seed).unwrap();
            let bound = k.c.unwrap() * gamma.length() / s.certificate.ell_min;
            let edges: Vec<String> = s.zeta.edges.iter().map(|e| e.to_string()).collect();
            println!("{:>4} {:>7.3} {:>8.3} {:>4}  {:>19.1}  {}",
                seed, gamma.length(), eta.length(), s.zeta.len(), bound, edges.join(" "));
        }
        println!();
    }
}
