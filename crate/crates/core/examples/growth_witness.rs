//! Comparing growth functions symbolically and through sampled tables.

use dehn::growth::{dominates_symbolic, equivalent, equivalent_tables, find_witness, int, SymbolicGrowth, WitnessGrid};
use dehn::growth::GrowthTable;

fn main() {
    let family = [
        SymbolicGrowth::poly(1, 1),
        SymbolicGrowth::poly(7, 2),
        SymbolicGrowth::poly(1, 3),
        SymbolicGrowth::exp(2),
        SymbolicGrowth::exp(10),
    ];
    println!("f ≼ g (symbolic):");
    for f in &family {
        let row: Vec<String> = family
            .iter()
            .map(|g| if dominates_symbolic(f, g).holds() { "yes".into() } else { "-".into() })
            .collect();
        println!("  {:<10} {}", f.to_string(), row.join("  "));
    }
    println!("7n^2 ≡ n^2: {}", equivalent(&family[1], &SymbolicGrowth::poly(1, 2)));
    println!("2^n ≡ 10^n: {}", equivalent(&family[3], &family[4]));

    // n^2 + 5n against n^2 on 1..20: the witness absorbs 5n into D.
    let f = GrowthTable::from_values(1, (1..=20).map(|n| int(n * n + 5 * n))).unwrap();
    let g = SymbolicGrowth::poly(1, 2).table(1, 20);
    match find_witness(&f, &g, WitnessGrid::default()).unwrap() {
        Some(w) => println!("n^2+5n ≼ n^2 with {}", w),
        None => println!("no witness"),
    }
    let r = equivalent_tables(&f, &g, WitnessGrid::default()).unwrap();
    println!("tables equivalent: {}", r.equivalent());

    let e = SymbolicGrowth::exp(2).table(1, 12);
    let sq = SymbolicGrowth::poly(1, 2).table(1, 12);
    let found = find_witness(&e, &sq, WitnessGrid { max_exp: 3 }).unwrap();
    println!("2^n ≼ n^2 on 1..12 with constants ≤ 8: {}", found.is_some());

    let mut csv = Vec::new();
    f.write_csv(&mut csv).unwrap();
    println!("\nCSV form:\n{}", String::from_utf8(csv).unwrap().lines().take(4).collect::<Vec<_>>().join("\n"));
}
