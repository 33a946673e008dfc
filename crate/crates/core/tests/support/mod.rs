//! Input files shared by the CLI tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dehn::complex2::standard_model;
use dehn::diagram::{DegenerateGenerator, VanKampenDiagram};
use dehn::plmaps::{random_folded_map, PLLoop};
use dehn::pushing::random_path;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Inputs {
    pub z2: PathBuf,
    pub c3: PathBuf,
    pub table: PathBuf,
    pub diagram: PathBuf,
    pub triangle: PathBuf,
    pub chain: PathBuf,
    pub loop_file: PathBuf,
    pub discmap: PathBuf,
}

pub fn write_inputs(dir: &Path) -> Inputs {
    let put = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = standard_model("disc_grid", 3).unwrap();
    let target = standard_model("disc_grid", 2).unwrap();
    let d = DegenerateGenerator { max_moves: 4 }
        .generate(&VanKampenDiagram::identity(&target).unwrap(), &mut rng)
        .unwrap();
    let squares: Vec<String> = (1..=20).map(|n| format!("{},{}", n, n * n + 3)).collect();
    Inputs {
        z2: put("z2.pres", "gen a b\nrel abAB\n".into()),
        c3: put("c3.pres", "gen a\nrel aaa\n".into()),
        table: put("table.csv", format!("n,value\n{}\n", squares.join("\n"))),
        diagram: put("diagram.json", d.to_json()),
        triangle: put("tri.cx", standard_model("single_triangle", 0).unwrap().serialize()),
        chain: put("chain.json", random_path(&grid, 6, false, &mut rng).to_json()),
        loop_file: put(
            "loop.json",
            PLLoop::new(random_path(&grid, 6, true, &mut rng).pieces).to_json(),
        ),
        discmap: put("discmap.json", random_folded_map(&target, 3, &mut rng).to_json()),
    }
}

pub fn commands(f: &Inputs) -> Vec<Vec<String>> {
    let s = |p: &PathBuf| p.display().to_string();
    let v = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<String>>();
    let mut out = vec![
        [v(&["area"]), vec![s(&f.z2)], v(&["aabbAABB", "--format", "json"])].concat(),
        [v(&["dehn"]), vec![s(&f.c3)], v(&["--n", "6"])].concat(),
        [v(&["classify"]), vec![s(&f.table)], v(&["--format", "json"])].concat(),
        [v(&["reduce"]), vec![s(&f.diagram)]].concat(),
        [v(&["push", "disc_grid:3"]), vec![s(&f.chain)], v(&["--seed", "7"])].concat(),
        [v(&["straighten", "disc_grid:3"]), vec![s(&f.loop_file)], v(&["--seed", "7"])].concat(),
        [v(&["degree"]), vec![s(&f.discmap)], v(&["--format", "csv"])].concat(),
        [v(&["alpha"]), vec![s(&f.chain)], v(&["--v", "14", "--samples", "500", "--seed", "3"])].concat(),
    ];
    out.push([v(&["area"]), vec![s(&f.c3)], v(&["aaaaaa"])].concat());
    out
}

pub fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        out.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap());
    }
    out
}
