//! Finite presentations, free reduction, and exact combinatorial area.
//!
//! A letter is a signed generator index: `+(i+1)` is generator `i`, `-(i+1)`
//! its inverse. In text, generators are lowercase ASCII letters and the
//! uppercase letter denotes the inverse, so `abAB` is the commutator of `a`
//! and `b`.
//!
//! Areas are computed by a memoized depth-bounded search over cyclic words.
//! One move removes a 2-cell that has an edge on the boundary of the
//! diagram: a subword `u` of the current word which is also a subword of a
//! cyclic conjugate `u·s` of a relator (or its inverse) is replaced by
//! `s⁻¹`, and the result is cyclically reduced. Only cells touching the
//! first letter of the canonical rotation are tried; when that letter is a
//! bridge of the diagram the word splits into two independent subproblems
//! at zero cost. The budget is raised one cell at a time, so the first
//! success is the minimal area subject to the intermediate word-length bound.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::growth::{int, GrowthTable};

pub type Letter = i32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresentationError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(char),
    #[error("relator {0} is empty")]
    EmptyRelator(usize),
    #[error("relator {0} is not cyclically reduced")]
    NotCyclicallyReduced(usize),
    #[error("word is not freely reduced")]
    NotReduced,
    #[error("letter {0} does not name a generator")]
    BadLetter(Letter),
}

/// A word in the free group on the generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced() && (self.0.len() < 2 || self.0[0] != -self.0[self.0.len() - 1])
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    pub fn pow(&self, k: usize) -> Self {
        Self(self.0.repeat(k))
    }

    /// Cyclic permutation starting at position `i`.
    pub fn rotate(&self, i: usize) -> Self {
        if self.0.is_empty() {
            return self.clone();
        }
        let i = i % self.0.len();
        let mut v = self.0[i..].to_vec();
        v.extend_from_slice(&self.0[..i]);
        Self(v)
    }

    /// Sum of exponents of generator `g` (0-based).
    pub fn exponent_sum(&self, g: usize) -> i64 {
        let key = g as Letter + 1;
        self.0
            .iter()
            .map(|&l| {
                if l == key {
                    1
                } else if l == -key {
                    -1
                } else {
                    0
                }
            })
            .sum()
    }
}

/// Removes adjacent cancelling pairs.
pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in &w.0 {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Free reduction followed by removal of cancelling first/last pairs.
pub fn cyclic_reduce(w: &Word) -> Word {
    let r = free_reduce(w);
    let v = &r.0;
    let mut i = 0;
    let mut j = v.len();
    while j - i >= 2 && v[i] == -v[j - 1] {
        i += 1;
        j -= 1;
    }
    Word(v[i..j].to_vec())
}

// Canonical representative of the cyclic word and its inverse. Area is
// invariant under both cyclic permutation and inversion.
fn canonical(letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len();
    if n == 0 {
        return Vec::new();
    }
    let inv: Vec<Letter> = letters.iter().rev().map(|l| -l).collect();
    let mut best = letters.to_vec();
    let mut buf = Vec::with_capacity(n);
    for src in [letters, &inv[..]] {
        for i in 0..n {
            buf.clear();
            buf.extend_from_slice(&src[i..]);
            buf.extend_from_slice(&src[..i]);
            if buf < best {
                best.clone_from(&buf);
            }
        }
    }
    best
}

/// A finite presentation `⟨generators | relators⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    names: Vec<char>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(names: Vec<char>, relators: Vec<Word>) -> Result<Self, PresentationError> {
        for &c in &names {
            if !c.is_ascii_lowercase() {
                return Err(PresentationError::UnknownGenerator(c));
            }
        }
        let n = names.len() as Letter;
        for (i, r) in relators.iter().enumerate() {
            if r.is_empty() {
                return Err(PresentationError::EmptyRelator(i));
            }
            if let Some(&l) = r.0.iter().find(|&&l| l == 0 || l.abs() > n) {
                return Err(PresentationError::BadLetter(l));
            }
            if !r.is_cyclically_reduced() {
                return Err(PresentationError::NotCyclicallyReduced(i));
            }
        }
        Ok(Self { names, relators })
    }

    /// Free group on `n` generators `a, b, …`.
    pub fn free(n: usize) -> Self {
        Self::new(default_names(n), Vec::new()).unwrap()
    }

    /// `⟨a | aⁿ⟩`.
    pub fn cyclic(n: usize) -> Self {
        Self::new(default_names(1), vec![Word(vec![1; n])]).unwrap()
    }

    /// `⟨a, b | aba⁻¹b⁻¹⟩`.
    pub fn z2() -> Self {
        Self::new(default_names(2), vec![Word(vec![1, 2, -1, -2])]).unwrap()
    }

    pub fn generator_count(&self) -> usize {
        self.names.len()
    }

    pub fn generator_names(&self) -> &[char] {
        &self.names
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn max_relator_len(&self) -> usize {
        self.relators.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Parses `gen a b` / `rel abAB` lines. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        let mut names: Option<Vec<char>> = None;
        let mut raw_relators: Vec<(usize, String)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("gen") => {
                    if names.is_some() {
                        return Err(PresentationError::Parse {
                            line: line_no,
                            msg: "duplicate `gen` line".into(),
                        });
                    }
                    let mut gens = Vec::new();
                    for p in parts {
                        let mut chars = p.chars();
                        match (chars.next(), chars.next()) {
                            (Some(c), None) if c.is_ascii_lowercase() && !gens.contains(&c) => gens.push(c),
                            _ => {
                                return Err(PresentationError::Parse {
                                    line: line_no,
                                    msg: format!("bad generator `{}`", p),
                                })
                            }
                        }
                    }
                    names = Some(gens);
                }
                Some("rel") => {
                    let body: Vec<&str> = parts.collect();
                    if body.len() != 1 {
                        return Err(PresentationError::Parse {
                            line: line_no,
                            msg: "`rel` takes exactly one word".into(),
                        });
                    }
                    raw_relators.push((line_no, body[0].to_string()));
                }
                Some(other) => {
                    return Err(PresentationError::Parse {
                        line: line_no,
                        msg: format!("unknown directive `{}`", other),
                    })
                }
                None => {}
            }
        }
        let names = names.ok_or(PresentationError::Parse {
            line: 0,
            msg: "missing `gen` line".into(),
        })?;
        let mut relators = Vec::new();
        for (line, text) in raw_relators {
            let w = parse_word_with(&names, &text).map_err(|e| PresentationError::Parse {
                line,
                msg: e.to_string(),
            })?;
            relators.push(w);
        }
        Self::new(names, relators)
    }

    /// Canonical text form; `parse(serialize(p)) == p` and serializing a
    /// parsed canonical text reproduces it byte for byte.
    pub fn serialize(&self) -> String {
        let mut out = String::from("gen");
        for c in &self.names {
            out.push(' ');
            out.push(*c);
        }
        out.push('\n');
        for r in &self.relators {
            out.push_str("rel ");
            out.push_str(&self.format_word(r));
            out.push('\n');
        }
        out
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, PresentationError> {
        parse_word_with(&self.names, text)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.0.iter()
            .map(|&l| {
                let c = self.names[(l.unsigned_abs() - 1) as usize];
                if l > 0 {
                    c
                } else {
                    c.to_ascii_uppercase()
                }
            })
            .collect()
    }

    /// Cyclic conjugates of every relator and its inverse, deduplicated and
    /// sorted.
    pub fn relator_variants(&self) -> Vec<Word> {
        let mut set = BTreeSet::new();
        for r in &self.relators {
            for w in [r.clone(), r.inverse()] {
                for i in 0..w.len() {
                    set.insert(w.rotate(i));
                }
            }
        }
        set.into_iter().collect()
    }

    /// A normal-form oracle for the word problem, when the presentation is a
    /// free group or a direct product of cyclic groups.
    pub fn word_problem_oracle(&self) -> Option<WordProblemOracle> {
        if self.relators.is_empty() {
            return Some(WordProblemOracle::Free);
        }
        let n = self.names.len();
        let mut orders = vec![0u64; n];
        let mut commuting = vec![vec![false; n]; n];
        for r in &self.relators {
            let l = &r.0;
            if l.iter().all(|&x| x == l[0]) {
                let g = (l[0].unsigned_abs() - 1) as usize;
                orders[g] = gcd(orders[g], l.len() as u64);
            } else if l.len() == 4 && l[2] == -l[0] && l[3] == -l[1] && l[0].abs() != l[1].abs() {
                let (x, y) = ((l[0].unsigned_abs() - 1) as usize, (l[1].unsigned_abs() - 1) as usize);
                commuting[x][y] = true;
                commuting[y][x] = true;
            } else {
                return None;
            }
        }
        let all_commute = (0..n).all(|i| (0..n).all(|j| i == j || commuting[i][j]));
        all_commute.then_some(WordProblemOracle::Abelian { orders })
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, c) in self.names.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, " |")?;
        for (i, r) in self.relators.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { " " } else { ", " }, self.format_word(r))?;
        }
        write!(f, "⟩")
    }
}

fn default_names(n: usize) -> Vec<char> {
    (0..n).map(|i| (b'a' + i as u8) as char).collect()
}

fn parse_word_with(names: &[char], text: &str) -> Result<Word, PresentationError> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| {
            let lower = c.to_ascii_lowercase();
            let idx = names
                .iter()
                .position(|&n| n == lower)
                .ok_or(PresentationError::UnknownGenerator(c))? as Letter
                + 1;
            Ok(if c.is_ascii_uppercase() { -idx } else { idx })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Word)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Decides triviality of words in the supported families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordProblemOracle {
    Free,
    /// Direct product of cyclic groups; order 0 means infinite cyclic.
    Abelian { orders: Vec<u64> },
}

impl WordProblemOracle {
    pub fn is_trivial(&self, w: &Word) -> bool {
        match self {
            Self::Free => free_reduce(w).is_empty(),
            Self::Abelian { orders } => orders.iter().enumerate().all(|(g, &n)| {
                let s = w.exponent_sum(g);
                if n == 0 {
                    s == 0
                } else {
                    s.rem_euclid(n as i64) == 0
                }
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AreaLimits {
    pub max_area: usize,
    /// Intermediate word-length bound; `None` means `2·|w| + 2·max relator length`.
    pub max_word_length: Option<usize>,
    /// Cap on distinct cyclic words visited.
    pub max_states: usize,
}

impl Default for AreaLimits {
    fn default() -> Self {
        Self {
            max_area: 16,
            max_word_length: None,
            max_states: 4_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AreaStatus {
    Exact(u64),
    /// No filling with fewer cells exists within the word-length bound.
    LowerBound(u64),
    NotNullhomotopic,
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AreaResult {
    pub status: AreaStatus,
    pub nodes_expanded: u64,
    pub max_word_length_reached: usize,
}

impl AreaResult {
    pub fn exact(&self) -> Option<u64> {
        match self.status {
            AreaStatus::Exact(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for AreaStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(a) => write!(f, "Exact {}", a),
            Self::LowerBound(a) => write!(f, "LowerBound {}", a),
            Self::NotNullhomotopic => write!(f, "NotNullhomotopic"),
            Self::Unknown(why) => write!(f, "Unknown ({})", why),
        }
    }
}

/// Minimal number of relator applications needed to reduce `w` to the
/// empty word.
pub fn combinatorial_area(
    w: &Word,
    p: &Presentation,
    limits: AreaLimits,
) -> Result<AreaResult, PresentationError> {
    if !w.is_reduced() {
        return Err(PresentationError::NotReduced);
    }
    let n = p.generator_count() as Letter;
    if let Some(&l) = w.0.iter().find(|&&l| l == 0 || l.abs() > n) {
        return Err(PresentationError::BadLetter(l));
    }
    let oracle = p.word_problem_oracle();
    if let Some(o) = &oracle {
        if !o.is_trivial(w) {
            return Ok(AreaResult {
                status: AreaStatus::NotNullhomotopic,
                nodes_expanded: 0,
                max_word_length_reached: w.len(),
            });
        }
    }
    Ok(AreaSearch::new(p).run(w, limits, oracle.is_some()))
}

/// Reusable search context (relator variants are computed once).
pub struct AreaSearch {
    variants: Vec<Vec<Letter>>,
    max_rel: usize,
}

#[derive(Clone, Copy)]
enum Memo {
    Exact(u32),
    AtLeast(u32),
}

struct Run<'a> {
    search: &'a AreaSearch,
    bound: usize,
    max_states: usize,
    memo: HashMap<Vec<Letter>, Memo>,
    nodes: u64,
    max_len: usize,
    budget_cut: bool,
    overflow: bool,
}

impl AreaSearch {
    pub fn new(p: &Presentation) -> Self {
        Self {
            variants: p.relator_variants().into_iter().map(|w| w.0).collect(),
            max_rel: p.max_relator_len(),
        }
    }

    /// `known_trivial` records that a word-problem oracle confirmed `w = 1`;
    /// exhausting the bounded state space then yields `Unknown` rather than
    /// `NotNullhomotopic`.
    pub fn run(&self, w: &Word, limits: AreaLimits, known_trivial: bool) -> AreaResult {
        let start = canonical(&cyclic_reduce(w).0);
        let bound = limits
            .max_word_length
            .unwrap_or(2 * w.len() + 2 * self.max_rel)
            .max(start.len());
        let mut run = Run {
            search: self,
            bound,
            max_states: limits.max_states,
            memo: HashMap::new(),
            nodes: 0,
            max_len: start.len(),
            budget_cut: false,
            overflow: false,
        };
        let finish = |run: &Run, status| AreaResult {
            status,
            nodes_expanded: run.nodes,
            max_word_length_reached: run.max_len,
        };
        if start.is_empty() {
            return finish(&run, AreaStatus::Exact(0));
        }
        for budget in 0..=limits.max_area as u32 {
            run.budget_cut = false;
            let found = run.solve(&start, budget);
            if run.overflow {
                let why = format!(
                    "state limit {} reached at budget {}",
                    limits.max_states, budget
                );
                return finish(&run, AreaStatus::Unknown(why));
            }
            if let Some(a) = found {
                return finish(&run, AreaStatus::Exact(a as u64));
            }
            if !run.budget_cut {
                let why = if known_trivial {
                    format!("no filling within word length {}", bound)
                } else {
                    format!(
                        "search space exhausted within word length {}; triviality undecided",
                        bound
                    )
                };
                return finish(&run, AreaStatus::Unknown(why));
            }
        }
        finish(&run, AreaStatus::LowerBound(limits.max_area as u64 + 1))
    }

    // Successors of the canonical cyclic word `h` obtained by removing one
    // cell whose boundary run contains the first letter of `h`.
    fn cell_moves(&self, h: &[Letter], bound: usize, out: &mut Vec<Vec<Letter>>) {
        let m = h.len();
        let mut buf: Vec<Letter> = Vec::with_capacity(m + self.max_rel);
        for c in &self.variants {
            // The run u = c[..ul] starts at position `i` and covers position 0.
            for back in 0..c.len().min(m) {
                let i = (m - back) % m;
                let mut ul = 0;
                while ul < c.len() && ul < m && c[ul] == h[(i + ul) % m] {
                    ul += 1;
                    if ul <= back {
                        continue;
                    }
                    buf.clear();
                    buf.extend(c[ul..].iter().rev().map(|l| -l));
                    buf.extend((0..m - ul).map(|k| h[(i + ul + k) % m]));
                    let reduced = cyclic_reduce(&Word(std::mem::take(&mut buf)));
                    if reduced.len() <= bound {
                        out.push(canonical(&reduced.0));
                    }
                    buf = reduced.0;
                }
            }
        }
        out.sort();
        out.dedup();
    }
}

impl Run<'_> {
    // Exact area of the canonical cyclic word `h` if it is at most `budget`.
    //
    // The first boundary edge of a filling either lies on a cell, which a
    // cell move removes, or is a bridge traversed twice, which splits `h`
    // into two independently filled words.
    fn solve(&mut self, h: &[Letter], budget: u32) -> Option<u32> {
        if h.is_empty() {
            return Some(0);
        }
        match self.memo.get(h) {
            Some(&Memo::Exact(a)) => return (a <= budget).then_some(a),
            Some(&Memo::AtLeast(b)) if b > budget => {
                self.budget_cut = true;
                return None;
            }
            _ => {}
        }
        if self.overflow {
            return None;
        }
        self.nodes += 1;
        self.max_len = self.max_len.max(h.len());
        let m = h.len();
        let mut best: Option<u32> = None;
        for j in 2..m.saturating_sub(1) {
            if h[j] != -h[0] {
                continue;
            }
            let cap = best.map_or(budget, |b| b - 1);
            let alpha = canonical(&cyclic_reduce(&Word(h[1..j].to_vec())).0);
            let beta = canonical(&cyclic_reduce(&Word(h[j + 1..].to_vec())).0);
            if let Some(a) = self.solve(&alpha, cap) {
                if let Some(b) = self.solve(&beta, cap - a) {
                    best = Some(a + b);
                    if a + b == 0 {
                        break;
                    }
                }
            }
        }
        if best != Some(0) {
            if budget == 0 {
                self.budget_cut = true;
            } else {
                let mut children = Vec::new();
                self.search.cell_moves(h, self.bound, &mut children);
                for c in children {
                    let cap = best.map_or(budget, |b| b - 1);
                    if cap == 0 {
                        self.budget_cut = true;
                        break;
                    }
                    if let Some(a) = self.solve(&c, cap - 1) {
                        best = Some(a + 1);
                    }
                }
            }
        }
        let entry = match best {
            Some(a) => Memo::Exact(a),
            None => Memo::AtLeast(budget + 1),
        };
        self.memo.insert(h.to_vec(), entry);
        if self.memo.len() > self.max_states {
            self.overflow = true;
        }
        best
    }
}

/// One row of a computed Dehn function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DehnEntry {
    pub n: u64,
    pub value: u64,
    /// Every contributing area was exact.
    pub exact: bool,
    /// A word of length ≤ n realizing `value`.
    pub witness: Word,
    pub words_checked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DehnTable {
    pub entries: Vec<DehnEntry>,
}

impl DehnTable {
    pub fn table(&self) -> GrowthTable {
        GrowthTable::from_values(0, self.entries.iter().map(|e| int(e.value as i64)))
            .expect("dehn entries start at 0")
    }

    pub fn value(&self, n: u64) -> Option<u64> {
        self.entries.get(n as usize).map(|e| e.value)
    }

    pub fn all_exact(&self) -> bool {
        self.entries.iter().all(|e| e.exact)
    }
}

/// `δ(n)` for `n = 0..=n_max`: the largest area of a nullhomotopic word of
/// length at most `n`.
///
/// Only cyclically reduced words are filled, one per cyclic/inverse class;
/// any other reduced word has the area of a strictly shorter one. Without a
/// word-problem oracle, nullhomotopy is decided by the bounded search and
/// undecided words flag their row as non-exact.
pub fn dehn_function(p: &Presentation, n_max: u64, limits: AreaLimits) -> DehnTable {
    let oracle = p.word_problem_oracle();
    let search = AreaSearch::new(p);
    let gens = p.generator_count() as Letter;
    let letters: Vec<Letter> = (1..=gens).flat_map(|g| [g, -g]).collect();
    let mut memo: HashMap<Vec<Letter>, AreaStatus> = HashMap::new();
    let mut entries = vec![DehnEntry {
        n: 0,
        value: 0,
        exact: true,
        witness: Word::empty(),
        words_checked: 1,
    }];
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for n in 1..=n_max {
        let prev = entries.last().unwrap().clone();
        let mut entry = DehnEntry { n, ..prev };
        entry.words_checked = 0;
        let mut next_layer = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next_layer.push(v);
            }
        }
        for w in &next_layer {
            entry.words_checked += 1;
            let word = Word(w.clone());
            if !word.is_cyclically_reduced() {
                continue;
            }
            if let Some(o) = &oracle {
                if !o.is_trivial(&word) {
                    continue;
                }
            }
            let key = canonical(w);
            let status = memo
                .entry(key)
                .or_insert_with(|| search.run(&word, limits, oracle.is_some()).status)
                .clone();
            match status {
                AreaStatus::Exact(a) => {
                    if a > entry.value {
                        entry.value = a;
                        entry.witness = word;
                    }
                }
                AreaStatus::NotNullhomotopic => {}
                AreaStatus::LowerBound(_) | AreaStatus::Unknown(_) => entry.exact = false,
            }
        }
        layer = next_layer;
        entries.push(entry);
    }
    DehnTable { entries }
}
