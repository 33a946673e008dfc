//! Pushes a random PL path off the 2-cells of a triangulated disc and
//! prints the certificate, then estimates the bad-center measure.

use dehn::complex2::standard_model;
use dehn::pushing::{estimate_alpha, push_chain, pushing_constants, random_path, DEFAULT_R};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    println!("r = {}  K = {:.6}  v0 = {}  C = {:.2}", k.r, k.big_k, k.v0, k.c.unwrap());
    let k3 = pushing_constants(2, 3, 0.05).unwrap();
    println!("(k,i) = (2,3): K = {:.6e}  v0 = {}", k3.big_k, k3.v0);

    let c = standard_model("disc_grid", 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let t = random_path(&c, 6, false, &mut rng);
    println!("\nT: {} segments, length {:.4}", t.pieces.len(), t.volume());
    let out = push_chain(&t, &c, &k, 7).unwrap();
    println!("{}", out.certificate.table());
    println!("R: {} pieces, S: {} triangles", out.r.pieces.len(), out.s.pieces.len());

    println!("\n    v   hits/n        alpha  95% CI               alpha*v <= K");
    for m in [1, 2, 4] {
        let v = (m * k.v0) as f64;
        let a = estimate_alpha(&t, &k, v, 4000, 3);
        println!("{:>5} {:>5}/{:<5} {:>9.6}  [{:.6}, {:.6}]  {}",
            v, a.hits, a.samples, a.estimate, a.low, a.high, a.low * v <= k.big_k);
    }
}
