//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Tolerances: areas, degrees and tables are exact; geometric comparisons
//! use 1e-9; quadrature agreement uses 1e-6 relative error.

use std::time::Instant;

use dehn::complex2::{standard_model, TRIANGLE_AREA};
use dehn::diagram::{
    apply_move, collapse, collapse_boundary_loop, degenerate_area, enumerate_area_oracle_word, DegenerateGenerator,
    Move, VanKampenDiagram,
};
use dehn::growth::{dominates_symbolic, equivalent, find_witness, SymbolicGrowth, WitnessGrid};
use dehn::plmaps::{
    combinatorialize, component_degrees, disc_to_degenerate_diagram, push_loop, random_aligned_map,
    random_folded_map, PLDiscMap, PLLoop,
};
use dehn::presentation::{combinatorial_area, dehn_function, AreaLimits, AreaStatus, Presentation, Word};
use dehn::pushing::{
    common_side, estimate_alpha, push_chain, pushing_constants, radial_integral, radial_integral_quadrature,
    random_path, PLChain, Piece, DEFAULT_R,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QUADRATURE_TOL: f64 = 1e-6;
const GEOMETRY_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Outcome {
    if ok {
        Ok(msg.into())
    } else {
        Err(msg.into())
    }
}

fn word(p: &Presentation, s: &str) -> Word {
    p.parse_word(s).unwrap()
}

fn exact_areas() -> Outcome {
    let z2 = Presentation::z2();
    let c3 = Presentation::cyclic(3);
    let cases: Vec<(&Presentation, String, u64)> = vec![
        (&z2, "abAB".into(), 1),
        (&z2, "aabbAABB".into(), 4),
        (&z2, "aaabbbAAABBB".into(), 9),
        (&c3, "aaa".into(), 1),
        (&c3, "aaaaaa".into(), 2),
        (&c3, "aaaaaaaaa".into(), 3),
    ];
    for (p, w, expected) in cases {
        let w = word(p, &w);
        let got = combinatorial_area(&w, p, AreaLimits::default()).unwrap().status;
        let oracle = enumerate_area_oracle_word(&w, p, expected as usize).unwrap();
        if got != AreaStatus::Exact(expected) || oracle != Some(expected) {
            return Err(format!("{}: search {:?}, oracle {:?}, expected {}", p.format_word(&w), got, oracle, expected));
        }
    }
    Ok("6 words, search = oracle = expected".into())
}

fn dehn_tables() -> Outcome {
    let l = AreaLimits::default();
    let z2 = dehn_function(&Presentation::z2(), 8, l);
    let free = dehn_function(&Presentation::free(2), 10, l);
    let c3 = dehn_function(&Presentation::cyclic(3), 9, l);
    let ok = z2.all_exact()
        && free.all_exact()
        && c3.all_exact()
        && z2.value(4) == Some(1)
        && z2.value(8) == Some(4)
        && (0..=10).all(|n| free.value(n) == Some(0))
        && (1..=3).all(|k| c3.value(3 * k) == Some(k));
    check(
        ok,
        format!(
            "Z2 d(4)={:?} d(8)={:?}; free max {:?}; C3 d(3,6,9)={:?}",
            z2.value(4),
            z2.value(8),
            free.entries.iter().map(|e| e.value).max(),
            [3, 6, 9].map(|n| c3.value(n))
        ),
    )
}

/// The eight test functions for the growth calculus.
pub fn growth_family() -> Vec<SymbolicGrowth> {
    vec![
        SymbolicGrowth::Zero,
        SymbolicGrowth::poly(1, 0),
        SymbolicGrowth::poly(1, 1),
        SymbolicGrowth::poly(3, 1),
        SymbolicGrowth::poly(1, 2),
        SymbolicGrowth::poly(3, 2),
        SymbolicGrowth::poly(1, 3),
        SymbolicGrowth::exp(2),
    ]
}

fn growth_calculus() -> Outcome {
    let family = growth_family();
    let grid = WitnessGrid { max_exp: 2 };
    let mut disagreements = Vec::new();
    for f in &family {
        for g in &family {
            let symbolic = dominates_symbolic(f, g).holds();
            let table = find_witness(&f.table(1, 30), &g.table(1, 30), grid).unwrap().is_some();
            if symbolic != table {
                disagreements.push(format!("{} vs {}: symbolic {} table {}", f, g, symbolic, table));
            }
        }
    }
    let mut relation_ok = true;
    for f in &family {
        relation_ok &= equivalent(f, f);
        for g in &family {
            relation_ok &= equivalent(f, g) == equivalent(g, f);
            for h in &family {
                if equivalent(f, g) && equivalent(g, h) {
                    relation_ok &= equivalent(f, h);
                }
            }
        }
    }
    check(
        disagreements.is_empty() && relation_ok,
        format!("64 pairs, {} disagreements {:?}; equivalence relation {}", disagreements.len(), disagreements, relation_ok),
    )
}

fn pushing_constant_values() -> Outcome {
    let pi = std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for r in [0.01, 0.05, 0.09, DEFAULT_R] {
        let a = pushing_constants(1, 2, r).unwrap();
        ok &= a.v0 == 14 && ((a.big_k - 13.0 * pi * r * r) / a.big_k).abs() < 1e-12;
        let q = radial_integral_quadrature(1, 2, 3.0 * r);
        worst = worst.max((q - radial_integral(1, 2, 3.0 * r)).abs() / radial_integral(1, 2, 3.0 * r));
    }
    for r in [0.01, 0.05, 0.07] {
        let b = pushing_constants(2, 3, r).unwrap();
        ok &= b.v0 == 38 && ((b.big_k - 148.0 / 3.0 * pi * r.powi(3)) / b.big_k).abs() < 1e-12;
        let q = radial_integral_quadrature(2, 3, 3.0 * r);
        worst = worst.max((q - radial_integral(2, 3, 3.0 * r)).abs() / radial_integral(2, 3, 3.0 * r));
    }
    let k = pushing_constants(1, 2, 0.09).unwrap().big_k;
    ok &= (k - 0.33080).abs() < 1e-5;
    check(ok && worst < QUADRATURE_TOL, format!("K(1,2,0.09)={:.5}, v0 14 and 38, quadrature rel err {:.2e}", k, worst))
}

// Interior part of a chain inside each simplex.
fn interior_parts(t: &PLChain) -> Vec<PLChain> {
    let mut by: std::collections::BTreeMap<usize, Vec<Piece>> = Default::default();
    for p in &t.pieces {
        let (a, b) = p.endpoints().unwrap();
        if common_side(a, b).is_none() {
            by.entry(p.simplex()).or_default().push(p.clone());
        }
    }
    by.into_values().map(|v| PLChain::new(1, v)).collect()
}

fn pushing_statistics() -> Outcome {
    let c = standard_model("disc_grid", 3).unwrap();
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    let cc = k.c.unwrap();
    let mut worst_c: f64 = 0.0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps = rng.gen_range(1..=8);
        let t = random_path(&c, steps, seed % 2 == 0, &mut rng);
        let out = match push_chain(&t, &c, &k, seed) {
            Ok(o) => o,
            Err(e) => return Err(format!("seed {}: {}", seed, e)),
        };
        let cert = &out.certificate;
        let hard = cert
            .records
            .iter()
            .all(|r| r.vol_projected <= k.v0 as f64 * r.vol_q);
        let skeleton = out.r.pieces.iter().all(|p| {
            let (a, b) = p.endpoints().unwrap();
            (0..3).any(|j| a[j].abs() <= GEOMETRY_TOL && b[j].abs() <= GEOMETRY_TOL)
        });
        let ok = hard
            && skeleton
            && out.r.boundary_points(&c) == t.boundary_points(&c)
            && cert.homotopy_ok
            && cert.vol_r <= cc * cert.vol_t
            && cert.vol_s <= cc * cert.vol_t;
        if !ok {
            return Err(format!("seed {}: certificate failed", seed));
        }
        worst_c = worst_c.max(cert.observed_c);
    }
    // Statistical side: alpha(v)·v ≤ K at the lower end of the 95% interval.
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let t = random_path(&c, 6, false, &mut rng);
        for (i, q) in interior_parts(&t).iter().enumerate() {
            for v in [k.v0 as f64, 2.0 * k.v0 as f64, 4.0 * k.v0 as f64] {
                let a = estimate_alpha(q, &k, v, 1000, seed * 100 + i as u64);
                worst_ratio = worst_ratio.max(a.estimate * v / k.big_k);
                if a.low * v > k.big_k {
                    violations += 1;
                }
            }
        }
    }
    check(
        violations == 0,
        format!(
            "200 chains certified, max observed C {:.3} (C = {:.1}); max alpha*v/K {:.4}",
            worst_c, cc, worst_ratio
        ),
    )
}

fn collapse_soundness() -> Outcome {
    let mut spheres = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = standard_model("disc_grid", 2 + (seed % 2) as usize).unwrap();
        let start = VanKampenDiagram::identity(&target).unwrap();
        let d = DegenerateGenerator { max_moves: 6 }.generate(&start, &mut rng).unwrap();
        let r = match collapse(&d) {
            Ok(r) => r,
            Err(e) => return Err(format!("seed {}: {}", seed, e)),
        };
        let valid = VanKampenDiagram::new(
            r.output.domain().clone(),
            r.output.boundary().to_vec(),
            r.output.map().clone(),
            false,
            r.output.target().clone(),
        )
        .is_ok();
        let ok = valid
            && !r.output.is_degenerate()
            && r.output.boundary_word() == collapse_boundary_loop(&d.boundary_loop())
            && r.area_after <= degenerate_area(&d)
            && r.excised_euler.iter().all(|&x| x == 2);
        if !ok {
            return Err(format!("seed {}: unsound collapse", seed));
        }
        spheres += r.excised_sphere_count;
    }
    Ok(format!("200 diagrams, {} spheres excised, all with euler 2", spheres))
}

// Aligned maps whose homeomorphic triangles all keep their orientation.
fn oriented_aligned_map(seed: u64) -> PLDiscMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = standard_model("disc_grid", 2).unwrap();
    let mut d = VanKampenDiagram::identity(&target).unwrap();
    for _ in 0..rng.gen_range(1..=6) {
        let m = [Move::Stellar, Move::EdgeSplit, Move::VertexSplit][rng.gen_range(0..3)];
        d = apply_move(&d, m, &mut rng).unwrap().unwrap_or(d);
    }
    PLDiscMap::from_diagram(&d).unwrap()
}

fn degree_bound() -> Outcome {
    let target = standard_model("disc_grid", 2).unwrap();
    let mut components = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = if seed % 2 == 0 {
            random_folded_map(&target, 2 + (seed % 3) as usize, &mut rng)
        } else {
            random_aligned_map(&target, 5, &mut rng).unwrap()
        };
        let r = component_degrees(&f, seed).unwrap();
        for c in &r.components {
            if c.area < TRIANGLE_AREA * c.degree.unsigned_abs() as f64 - GEOMETRY_TOL || c.samples.iter().any(|&d| d != c.degree) {
                return Err(format!("seed {}: component in simplex {} fails", seed, c.simplex));
            }
        }
        components += r.components.len();
    }
    for seed in 0..50u64 {
        let f = oriented_aligned_map(seed);
        if (0..f.triangles.len()).any(|i| f.sign(i) < 0) {
            return Err(format!("seed {}: orientation flipped", seed));
        }
        let r = component_degrees(&f, seed).unwrap();
        let (d, cert) = disc_to_degenerate_diagram(&f, seed).unwrap();
        let tight = r
            .components
            .iter()
            .all(|c| (c.area - TRIANGLE_AREA * c.degree.unsigned_abs() as f64).abs() <= GEOMETRY_TOL);
        if !tight || !cert.equality || degenerate_area(&d) as i64 != r.total_abs_degree {
            return Err(format!("seed {}: aligned map not tight", seed));
        }
    }
    Ok(format!("100 maps, {} components within bound; 50 aligned maps tight", components))
}

fn end_to_end() -> Outcome {
    let c = standard_model("disc_grid", 3).unwrap();
    let k = pushing_constants(1, 2, DEFAULT_R).unwrap();
    let cc = k.c.unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps = rng.gen_range(2..=8);
        let gamma = PLLoop::new(random_path(&c, steps, true, &mut rng).pieces);
        let (eta, _) = push_loop(&gamma, &c, &k, seed).map_err(|e| format!("seed {}: {}", seed, e))?;
        let s = combinatorialize(&eta, &c, seed).map_err(|e| format!("seed {}: {}", seed, e))?;
        let cert = &s.certificate;
        let bound = cc * gamma.length() / cert.ell_min;
        let ok = s.zeta.is_valid(&c)
            && cert.straightened_length <= eta.length() + GEOMETRY_TOL
            && eta.length() <= cc * gamma.length() + GEOMETRY_TOL
            && (cert.comb_length as f64) <= bound;
        if !ok {
            return Err(format!("seed {}: |zeta| {} bound {:.2}", seed, cert.comb_length, bound));
        }
        if gamma.length() > 0.0 {
            worst = worst.max(cert.comb_length as f64 * cert.ell_min / gamma.length());
        }
    }
    check(true, format!("50 loops; max |zeta|*ell_min/len {:.3} against C = {:.1}", worst, cc))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let files = support::write_inputs(p);
    let mut runs = 0;
    for args in support::commands(&files) {
        let mut outs = Vec::new();
        for rep in 0..2 {
            let out = p.join(format!("run{}_{}", runs, rep));
            let mut argv: Vec<String> = vec!["dehn".into()];
            argv.extend(args.iter().cloned());
            argv.extend(["--out".into(), out.display().to_string()]);
            let code = dehn::cli::run(argv);
            if code == 1 {
                return Err(format!("{:?} failed", args));
            }
            outs.push(support::read_dir(&out));
        }
        if outs[0] != outs[1] {
            return Err(format!("{:?} differs between runs", args));
        }
        runs += 1;
    }
    Ok(format!("{} commands byte-identical across reruns", runs))
}

mod support;

// Runs without the test harness so the lines are never captured.
fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("exact areas", exact_areas),
        ("dehn tables", dehn_tables),
        ("growth calculus", growth_calculus),
        ("pushing constants", pushing_constant_values),
        ("pushing statistics", pushing_statistics),
        ("collapse soundness", collapse_soundness),
        ("degree bound", degree_bound),
        ("end to end straightening", end_to_end),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(msg) => println!("[{}] PASS {} ({:.1}s): {}", i + 1, name, secs, msg),
            Err(msg) => {
                println!("[{}] FAIL {} ({:.1}s): {}", i + 1, name, secs, msg);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {:?}", failed);
        std::process::exit(1);
    }
}
