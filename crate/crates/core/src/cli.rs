//! Command-line front end.
//!
//! Exit codes: 0 success, 1 malformed input, 2 undecided within limits.
//! With `--out DIR` every file is written into `DIR`; the report goes to
//! `DIR/report.{json,csv,txt}`. Without it the report goes to stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::complex2::{standard_model, Complex2};
use crate::diagram::{collapse, VanKampenDiagram};
use crate::growth::{equivalent_tables, format_rational, GrowthTable, SymbolicGrowth, WitnessConstants, WitnessGrid};
use crate::plmaps::{combinatorialize, component_degrees, push_loop, PLDiscMap, PLLoop};
use crate::presentation::{combinatorial_area, dehn_function, free_reduce, AreaLimits, AreaStatus, Presentation};
use crate::pushing::{estimate_alpha, push_chain, pushing_constants, PLChain, Piece, DEFAULT_R};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "dehn", about = "Combinatorial and geometric Dehn functions at desk scale")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest area the search will certify
    #[arg(long = "limit-area", global = true)]
    pub limit_area: Option<usize>,
    /// Longest intermediate word the search may visit
    #[arg(long = "limit-wordlen", global = true)]
    pub limit_wordlen: Option<usize>,
    #[arg(long, global = true, default_value_t = 4000)]
    pub samples: usize,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Area of a word.
    Area { presentation: PathBuf, word: String },
    /// Dehn function table up to `--n`.
    Dehn {
        presentation: PathBuf,
        #[arg(long)]
        n: u64,
    },
    /// Growth class of a table `n,value`.
    Classify { table: PathBuf },
    /// Collapse a degenerate diagram.
    Reduce { diagram: PathBuf },
    /// Push a 1-chain into the 1-skeleton.
    Push {
        complex: String,
        chain: PathBuf,
        #[arg(long, default_value_t = DEFAULT_R)]
        r: f64,
    },
    /// Make a loop combinatorial, pushing it first if needed.
    Straighten {
        complex: String,
        #[arg(name = "loop")]
        loop_file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_R)]
        r: f64,
    },
    /// Signed degrees of a disc map.
    Degree { discmap: PathBuf },
    /// Measure of the bad center set.
    Alpha {
        chain: PathBuf,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = DEFAULT_R)]
        r: f64,
    },
}

/// Why a command failed, mapped to the exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Undecided(Report),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

/// What a command produces: the report in each format and extra files.
#[derive(Debug)]
struct Report {
    json: Value,
    csv: String,
    table: String,
    files: Vec<(String, String)>,
    default_format: Format,
}

impl Report {
    fn new(json: Value, csv: String, table: String) -> Self {
        Self {
            json,
            csv,
            table,
            files: Vec::new(),
            default_format: Format::Table,
        }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("report serializes") + "\n",
            Format::Csv => self.csv.clone(),
            Format::Table => self.table.clone(),
        }
    }
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (report, code) = match execute(&config) {
        Ok(r) => (r, 0),
        Err(Failure::Undecided(r)) => (r, 2),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {}", msg);
            return 1;
        }
    };
    let format = config.format.unwrap_or(report.default_format);
    match emit(&config, &report, format) {
        Ok(()) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            1
        }
    }
}

fn emit(config: &RunConfig, report: &Report, format: Format) -> Result<(), String> {
    let text = report.render(format);
    match &config.out {
        None => {
            print!("{}", text);
            Ok(())
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {}", dir.display(), e))?;
            let ext = match format {
                Format::Json => "json",
                Format::Csv => "csv",
                Format::Table => "txt",
            };
            let mut files = report.files.clone();
            files.push((format!("report.{}", ext), text));
            for (name, content) in files {
                let path = dir.join(name);
                fs::write(&path, content).map_err(|e| format!("{}: {}", path.display(), e))?;
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))
}

/// A complex file, or a standard model written `name` or `name:size`.
fn load_complex(arg: &str) -> Result<Complex2, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(Complex2::parse(&read(path)?)?);
    }
    let (name, size) = match arg.split_once(':') {
        Some((n, s)) => (n, s.parse::<usize>().map_err(|_| Failure::Input(format!("bad model size `{}`", s)))?),
        None => (arg, 1),
    };
    standard_model(name, size).map_err(|_| Failure::Input(format!("no complex file or model named `{}`", arg)))
}

fn limits(config: &RunConfig) -> AreaLimits {
    let mut l = AreaLimits::default();
    if let Some(a) = config.limit_area {
        l.max_area = a;
    }
    if config.limit_wordlen.is_some() {
        l.max_word_length = config.limit_wordlen;
    }
    l
}

fn execute(config: &RunConfig) -> Result<Report, Failure> {
    match &config.command {
        Command::Area { presentation, word } => area(config, presentation, word),
        Command::Dehn { presentation, n } => dehn(config, presentation, *n),
        Command::Classify { table } => classify(table),
        Command::Reduce { diagram } => reduce(diagram),
        Command::Push { complex, chain, r } => push(config, complex, chain, *r),
        Command::Straighten { complex, loop_file, r } => straighten(config, complex, loop_file, *r),
        Command::Degree { discmap } => degree(config, discmap),
        Command::Alpha { chain, v, r } => alpha(config, chain, *v, *r),
    }
}

fn area(config: &RunConfig, presentation: &Path, word: &str) -> Result<Report, Failure> {
    let p = Presentation::parse(&read(presentation)?)?;
    let w = free_reduce(&p.parse_word(word)?);
    let result = combinatorial_area(&w, &p, limits(config))?;
    let (kind, value) = match &result.status {
        AreaStatus::Exact(a) => ("Exact", Some(*a)),
        AreaStatus::LowerBound(a) => ("LowerBound", Some(*a)),
        AreaStatus::NotNullhomotopic => ("NotNullhomotopic", None),
        AreaStatus::Unknown(_) => ("Unknown", None),
    };
    let detail = match &result.status {
        AreaStatus::Unknown(why) => why.clone(),
        _ => String::new(),
    };
    let json = json!({
        "word": p.format_word(&w),
        "status": kind,
        "area": value,
        "detail": detail,
        "nodes_expanded": result.nodes_expanded,
        "max_word_length_reached": result.max_word_length_reached,
    });
    let csv = format!(
        "word,status,area\n{},{},{}\n",
        p.format_word(&w),
        kind,
        value.map(|v| v.to_string()).unwrap_or_default()
    );
    let report = Report::new(json, csv, format!("{}\n", result.status));
    match result.status {
        AreaStatus::Exact(_) | AreaStatus::NotNullhomotopic => Ok(report),
        _ => Err(Failure::Undecided(report)),
    }
}

fn dehn(config: &RunConfig, presentation: &Path, n: u64) -> Result<Report, Failure> {
    let p = Presentation::parse(&read(presentation)?)?;
    let t = dehn_function(&p, n, limits(config));
    let mut csv = Vec::new();
    t.table().write_csv(&mut csv)?;
    let mut table = format!("{:>4} {:>6} {:>6}  witness\n", "n", "delta", "exact");
    for e in &t.entries {
        let _ = writeln!(table, "{:>4} {:>6} {:>6}  {}", e.n, e.value, e.exact, p.format_word(&e.witness));
    }
    let rows: Vec<Value> = t
        .entries
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "value": e.value,
                "exact": e.exact,
                "witness": p.format_word(&e.witness),
                "words_checked": e.words_checked,
            })
        })
        .collect();
    let mut report = Report::new(json!({ "entries": rows }), String::from_utf8(csv)?, table);
    report.default_format = Format::Csv;
    if t.all_exact() {
        Ok(report)
    } else {
        Err(Failure::Undecided(report))
    }
}

/// Reference classes for `classify`, smallest first.
pub fn reference_classes() -> Vec<(&'static str, SymbolicGrowth)> {
    vec![
        ("linear", SymbolicGrowth::poly(1, 1)),
        ("quadratic", SymbolicGrowth::poly(1, 2)),
        ("cubic", SymbolicGrowth::poly(1, 3)),
        ("quartic", SymbolicGrowth::poly(1, 4)),
        ("exponential", SymbolicGrowth::exp(2)),
    ]
}

/// Witness grid used by `classify`: constants in `{0, 1, 2, 4}`.
pub const CLASSIFY_GRID: WitnessGrid = WitnessGrid { max_exp: 2 };

fn witness_json(w: &Option<WitnessConstants>) -> Value {
    match w {
        None => Value::Null,
        Some(w) => json!({
            "A": format_rational(&w.a),
            "B": format_rational(&w.b),
            "C": format_rational(&w.c),
            "D": format_rational(&w.d),
            "E": format_rational(&w.e),
            "clamped": w.clamped,
        }),
    }
}

fn classify(path: &Path) -> Result<Report, Failure> {
    let f = GrowthTable::read_csv(read(path)?.as_bytes())?;
    let (lo, hi) = f.domain();
    let mut rows = Vec::new();
    let mut csv = String::from("class,below,above\n");
    let mut table = String::new();
    let mut class = None;
    for (name, g) in reference_classes() {
        let r = equivalent_tables(&f, &g.table(lo, hi), CLASSIFY_GRID)?;
        if class.is_none() && r.equivalent() {
            class = Some(name);
        }
        let show = |w: &Option<WitnessConstants>| w.as_ref().map(|w| w.to_string()).unwrap_or("none".into());
        let _ = writeln!(table, "{:<12} f < g: {:<40} g < f: {}", name, show(&r.forward), show(&r.backward));
        let _ = writeln!(csv, "{},{},{}", name, r.forward.is_some(), r.backward.is_some());
        rows.push(json!({
            "class": name,
            "f_below_g": witness_json(&r.forward),
            "g_below_f": witness_json(&r.backward),
        }));
    }
    let _ = writeln!(table, "class: {}", class.unwrap_or("unclassified"));
    let json = json!({ "class": class, "domain": [lo, hi], "comparisons": rows });
    let report = Report::new(json, csv, table);
    if class.is_some() {
        Ok(report)
    } else {
        Err(Failure::Undecided(report))
    }
}

fn reduce(path: &Path) -> Result<Report, Failure> {
    let d = VanKampenDiagram::from_json(&read(path)?)?;
    let r = collapse(&d)?;
    let json = json!({
        "area_before": r.area_before,
        "area_after": r.area_after,
        "excised_sphere_count": r.excised_sphere_count,
        "excised_euler": r.excised_euler,
        "boundary_length": r.output.boundary().len(),
    });
    let csv = format!(
        "area_before,area_after,excised_sphere_count\n{},{},{}\n",
        r.area_before, r.area_after, r.excised_sphere_count
    );
    let table = format!(
        "area {} -> {}, excised spheres {} (euler {:?})\n",
        r.area_before, r.area_after, r.excised_sphere_count, r.excised_euler
    );
    let mut report = Report::new(json, csv, table);
    report.files.push(("reduced.json".into(), r.output.to_json()));
    Ok(report)
}

fn push(config: &RunConfig, complex: &str, chain: &Path, r: f64) -> Result<Report, Failure> {
    let c = load_complex(complex)?;
    let t = PLChain::from_json(&read(chain)?)?;
    let k = pushing_constants(1, 2, r)?;
    let out = push_chain(&t, &c, &k, config.seed)?;
    let cert = &out.certificate;
    let mut csv = String::from("simplex,vol_q,vol_projected,vol_r,vol_s,rejected\n");
    for rec in &cert.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            rec.simplex, rec.vol_q, rec.vol_projected, rec.vol_r, rec.vol_s, rec.rejected
        );
    }
    let mut report = Report::new(serde_json::to_value(cert)?, csv, cert.table());
    report.files.push(("R.json".into(), out.r.to_json()));
    report.files.push(("S.json".into(), out.s.to_json()));
    report.files.push(("certificate.json".into(), cert.to_json()));
    Ok(report)
}

fn straighten(config: &RunConfig, complex: &str, path: &Path, r: f64) -> Result<Report, Failure> {
    let c = load_complex(complex)?;
    let gamma = PLLoop::from_json(&read(path)?)?;
    gamma.validate(&c)?;
    let in_skeleton = gamma
        .pieces
        .iter()
        .all(|p| p.endpoints().is_some_and(|(a, b)| crate::pushing::common_side(a, b).is_some()));
    let (eta, pushed) = if in_skeleton {
        (gamma.clone(), None)
    } else {
        let k = pushing_constants(1, 2, r)?;
        let (eta, cert) = push_loop(&gamma, &c, &k, config.seed)?;
        (eta, Some(cert))
    };
    let s = combinatorialize(&eta, &c, config.seed)?;
    let cert = &s.certificate;
    let edges: Vec<String> = s.zeta.edges.iter().map(|e| e.to_string()).collect();
    let json = json!({
        "zeta": edges,
        "pushed": pushed.is_some(),
        "gamma_length": gamma.length(),
        "push_constant": pushed.as_ref().and_then(|p| p.constants.c),
        "certificate": cert,
    });
    let csv = format!(
        "eta_length,straightened_length,comb_length,ell_min,length_ok,count_ok\n{},{},{},{},{},{}\n",
        cert.eta_length, cert.straightened_length, cert.comb_length, cert.ell_min, cert.length_ok, cert.count_ok
    );
    let table = format!(
        "zeta: {}\nlength {:.6} -> {:.6}, |zeta| = {} <= {:.3} (ell_min {:.6})\n",
        if edges.is_empty() { "(empty)".to_string() } else { edges.join(" ") },
        cert.eta_length,
        cert.straightened_length,
        cert.comb_length,
        cert.eta_length / cert.ell_min,
        cert.ell_min
    );
    let mut report = Report::new(json, csv, table);
    report.files.push((
        "zeta.json".into(),
        serde_json::to_string_pretty(&s.zeta)? + "\n",
    ));
    report.files.push(("certificate.json".into(), serde_json::to_string_pretty(cert)? + "\n"));
    if pushed.is_some() {
        report.files.push(("eta.json".into(), eta.to_json()));
    }
    Ok(report)
}

fn degree(config: &RunConfig, path: &Path) -> Result<Report, Failure> {
    let f = PLDiscMap::from_json(&read(path)?)?;
    let r = component_degrees(&f, config.seed)?;
    let mut csv = String::from("simplex,triangles,degree,area,bound_ok\n");
    for c in &r.components {
        let _ = writeln!(csv, "{},{},{},{},{}", c.simplex, c.triangles.len(), c.degree, c.area, c.bound_ok);
    }
    Ok(Report::new(serde_json::to_value(&r)?, csv, r.table()))
}

fn alpha(config: &RunConfig, path: &Path, v: f64, r: f64) -> Result<Report, Failure> {
    let chain = PLChain::from_json(&read(path)?)?.flatten();
    let k = pushing_constants(1, 2, r)?;
    let mut by_simplex: std::collections::BTreeMap<usize, Vec<Piece>> = Default::default();
    for p in chain.pieces {
        by_simplex.entry(p.simplex()).or_default().push(p);
    }
    let mut rows = Vec::new();
    let mut csv = String::from("simplex,v,samples,hits,estimate,low,high,bound\n");
    let mut table = format!(
        "{:>7} {:>8} {:>8} {:>12} {:>12} {:>12} {:>10}\n",
        "simplex", "v", "hits", "alpha", "low", "high", "K/v"
    );
    for (s, pieces) in by_simplex {
        let q = PLChain::new(1, pieces);
        let seed = crate::pushing::simplex_seed(config.seed, s);
        let a = estimate_alpha(&q, &k, v, config.samples, seed);
        let bound = k.big_k / v;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            s, a.v, a.samples, a.hits, a.estimate, a.low, a.high, bound
        );
        let _ = writeln!(
            table,
            "{:>7} {:>8} {:>8} {:>12.6e} {:>12.6e} {:>12.6e} {:>10.6}",
            s, a.v, a.hits, a.estimate, a.low, a.high, bound
        );
        let mut row = serde_json::to_value(&a)?;
        row["simplex"] = json!(s);
        row["bound"] = json!(bound);
        rows.push(row);
    }
    Ok(Report::new(json!({ "K": k.big_k, "rows": rows }), csv, table))
}
