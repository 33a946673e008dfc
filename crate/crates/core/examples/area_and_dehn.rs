//! Exact areas of a few words and the Dehn function of three small groups.

use dehn::diagram::enumerate_area_oracle_word;
use dehn::presentation::{combinatorial_area, dehn_function, AreaLimits, Presentation};

fn main() {
    let z2 = Presentation::parse("gen a b\nrel abAB\n").expect("valid presentation");
    println!("presentation:\n{}", z2.serialize());
    for text in ["abAB", "aabbAABB", "aaabbbAAABBB", "ab"] {
        let w = z2.parse_word(text).unwrap();
        let r = combinatorial_area(&w, &z2, AreaLimits::default()).unwrap();
        let oracle = enumerate_area_oracle_word(&w, &z2, 9).unwrap();
        println!("{:<14} {:<18} diagram oracle {:?} ({} nodes)", text, r.status.to_string(), oracle, r.nodes_expanded);
    }

    // A tight area limit gives a certified lower bound instead of a value.
    let w = z2.parse_word("aabbAABB").unwrap();
    let tight = AreaLimits { max_area: 2, ..AreaLimits::default() };
    println!("with max_area 2: {}", combinatorial_area(&w, &z2, tight).unwrap().status);

    for (name, p, n) in [
        ("free group on a, b", Presentation::free(2), 8),
        ("cyclic group of order 3", Presentation::cyclic(3), 9),
        ("Z^2", z2.clone(), 8),
    ] {
        let t = dehn_function(&p, n, AreaLimits::default());
        println!("\n{} (all exact: {})", name, t.all_exact());
        println!("  n  delta  witness");
        for e in t.entries.iter().filter(|e| e.n > 0) {
            println!("{:>3} {:>6}  {}", e.n, e.value, p.format_word(&e.witness));
        }
    }
}
