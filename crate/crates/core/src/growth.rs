//! Growth functions and the preorder `f ≺ g`.
//!
//! `f ≺ g` holds when there are non-negative constants with
//! `f(n) ≤ A·g(B·n + C) + D·n + E` for every `n`. Two growth functions are
//! equivalent when each dominates the other.
//!
//! Two views are supported. [`SymbolicGrowth`] is a small closed family
//! (zero, polynomials, exponentials) on which the preorder is decided
//! exactly. [`GrowthTable`] holds sampled values (for instance a Dehn
//! function computed at desk scale); [`find_witness`] searches a geometric
//! grid of constants for a certificate that holds on every sample.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error)]
pub enum GrowthError {
    #[error("polynomial coefficient must be positive")]
    NonPositiveCoefficient,
    #[error("exponential base must be greater than one")]
    BaseNotAboveOne,
    #[error("growth table is empty")]
    EmptyTable,
    #[error("growth table needs at least two samples")]
    TooShort,
    #[error("growth table domain must be contiguous and start at 0 or 1 (found {0})")]
    BadDomain(String),
    #[error("growth table values must be non-negative (n = {0})")]
    NegativeValue(u64),
    #[error("tables have mismatched domains")]
    MismatchedDomains,
    #[error("csv: {0}")]
    Csv(String),
    #[error("cannot parse rational value `{0}`")]
    BadValue(String),
}

/// A member of the exactly decidable growth family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolicGrowth {
    Zero,
    Polynomial { coefficient: Rational, degree: u32 },
    Exponential { base: Rational },
}

impl SymbolicGrowth {
    pub fn polynomial(coefficient: Rational, degree: u32) -> Result<Self, GrowthError> {
        if !coefficient.is_positive() {
            return Err(GrowthError::NonPositiveCoefficient);
        }
        Ok(Self::Polynomial { coefficient, degree })
    }

    pub fn exponential(base: Rational) -> Result<Self, GrowthError> {
        if base <= Rational::one() {
            return Err(GrowthError::BaseNotAboveOne);
        }
        Ok(Self::Exponential { base })
    }

    /// Shorthand for integer coefficients and bases.
    pub fn poly(coefficient: i64, degree: u32) -> Self {
        Self::polynomial(int(coefficient), degree).expect("positive coefficient")
    }

    pub fn exp(base: i64) -> Self {
        Self::exponential(int(base)).expect("base above one")
    }

    /// Exact value at `n`, with the convention `0^0 = 1`.
    pub fn eval(&self, n: u64) -> Rational {
        match self {
            Self::Zero => Rational::zero(),
            Self::Polynomial {
                coefficient,
                degree,
            } => coefficient * pow(&Rational::from_integer(BigInt::from(n)), *degree as u64),
            Self::Exponential { base } => pow(base, n),
        }
    }

    /// Samples the function on `start..=end`.
    pub fn table(&self, start: u64, end: u64) -> GrowthTable {
        let samples = (start..=end).map(|n| (n, self.eval(n))).collect();
        GrowthTable { samples }
    }
}

impl fmt::Display for SymbolicGrowth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "0"),
            Self::Polynomial {
                coefficient,
                degree,
            } => write!(f, "{}·n^{}", coefficient, degree),
            Self::Exponential { base } => write!(f, "{}^n", base),
        }
    }
}

/// Constants certifying `f(n) ≤ A·g(B·n + C) + D·n + E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessConstants {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    pub e: Rational,
    /// Sampled domain the certificate was checked on; `None` for symbolic
    /// witnesses, which hold for every `n`.
    pub domain: Option<(u64, u64)>,
    /// Some argument `B·n + C` fell past the end of `g`'s table and was
    /// clamped to its last sample.
    pub clamped: bool,
}

impl WitnessConstants {
    fn symbolic(a: Rational, b: i64, c: i64, d: Rational, e: Rational) -> Self {
        Self {
            a,
            b: int(b),
            c: int(c),
            d,
            e,
            domain: None,
            clamped: false,
        }
    }

    /// Checks the inequality exactly on `range` for two symbolic functions.
    /// Only meaningful when `B` and `C` are integers.
    pub fn holds_on(&self, f: &SymbolicGrowth, g: &SymbolicGrowth, range: std::ops::RangeInclusive<u64>) -> bool {
        let (b, c) = match (self.b.to_integer().to_u64(), self.c.to_integer().to_u64()) {
            (Some(b), Some(c)) if self.b.is_integer() && self.c.is_integer() => (b, c),
            _ => return false,
        };
        range.into_iter().all(|n| {
            let rhs = &self.a * g.eval(b * n + c) + &self.d * int(n as i64) + &self.e;
            f.eval(n) <= rhs
        })
    }
}

impl fmt::Display for WitnessConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A={} B={} C={} D={} E={}",
            self.a, self.b, self.c, self.d, self.e
        )?;
        if let Some((lo, hi)) = self.domain {
            write!(f, " on n={}..{}", lo, hi)?;
        }
        if self.clamped {
            write!(f, " (clamped)")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DominanceResult {
    Holds(WitnessConstants),
    Fails(String),
}

impl DominanceResult {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds(_))
    }
}

/// Decides `f ≺ g` exactly within the symbolic family.
pub fn dominates_symbolic(f: &SymbolicGrowth, g: &SymbolicGrowth) -> DominanceResult {
    use SymbolicGrowth::*;
    let one = Rational::one;
    let zero = Rational::zero;
    match (f, g) {
        (Zero, _) => DominanceResult::Holds(WitnessConstants::symbolic(one(), 1, 0, zero(), zero())),
        (
            Polynomial {
                coefficient: c,
                degree: p,
            },
            Polynomial {
                coefficient: c2,
                degree: q,
            },
        ) if p <= q => DominanceResult::Holds(WitnessConstants::symbolic(
            c / c2,
            1,
            0,
            zero(),
            c.clone(),
        )),
        // At most linear: absorbed by D·n + E.
        (
            Polynomial {
                coefficient: c,
                degree: p,
            },
            _,
        ) if *p <= 1 => {
            DominanceResult::Holds(WitnessConstants::symbolic(one(), 1, 0, c.clone(), c.clone()))
        }
        (
            Polynomial {
                coefficient: c,
                degree: p,
            },
            Exponential { base },
        ) => {
            let a = c * max_poly_over_exp(*p, base);
            DominanceResult::Holds(WitnessConstants::symbolic(a, 1, 0, zero(), zero()))
        }
        (Polynomial { degree: p, .. }, Polynomial { degree: q, .. }) => DominanceResult::Fails(
            format!("degree {} exceeds both degree {} and the linear term", p, q),
        ),
        (Polynomial { degree: p, .. }, Zero) => {
            DominanceResult::Fails(format!("degree {} is superlinear", p))
        }
        (Exponential { base: b1 }, Exponential { base: b2 }) => {
            let b = base_change_exponent(b1, b2);
            DominanceResult::Holds(WitnessConstants::symbolic(one(), b as i64, 0, zero(), zero()))
        }
        (Exponential { .. }, _) => {
            DominanceResult::Fails("exponential growth exceeds every polynomial".to_string())
        }
    }
}

/// `f ≡ g` on the symbolic family.
pub fn equivalent(f: &SymbolicGrowth, g: &SymbolicGrowth) -> bool {
    dominates_symbolic(f, g).holds() && dominates_symbolic(g, f).holds()
}

// Smallest B with b2^B ≥ b1.
fn base_change_exponent(b1: &Rational, b2: &Rational) -> u64 {
    let estimate = (ratio_f64(b1).ln() / ratio_f64(b2).ln()).ceil().max(1.0) as u64;
    let mut b = estimate.saturating_sub(1).max(1);
    while pow(b2, b) < *b1 {
        b += 1;
    }
    b
}

// max over n ≥ 0 of n^p / base^n, exactly. The ratio of consecutive terms is
// (1 + 1/n)^p / base, so the sequence decreases once n ≥ 1/(base^{1/p} − 1).
fn max_poly_over_exp(p: u32, base: &Rational) -> Rational {
    if p == 0 {
        return Rational::one();
    }
    let b = ratio_f64(base);
    let turn = 1.0 / (b.powf(1.0 / p as f64) - 1.0);
    let last = turn.ceil() as u64 + 2;
    (0..=last)
        .map(|n| pow(&int(n as i64), p as u64) / pow(base, n))
        .max()
        .unwrap_or_else(Rational::one)
}

/// Sampled growth values, `n ↦ value`, on a contiguous domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthTable {
    samples: BTreeMap<u64, Rational>,
}

impl GrowthTable {
    pub fn new(samples: BTreeMap<u64, Rational>) -> Result<Self, GrowthError> {
        let first = *samples.keys().next().ok_or(GrowthError::EmptyTable)?;
        if first > 1 {
            return Err(GrowthError::BadDomain(format!("starts at {}", first)));
        }
        for (i, (n, v)) in samples.iter().enumerate() {
            if *n != first + i as u64 {
                return Err(GrowthError::BadDomain(format!("gap before {}", n)));
            }
            if v.is_negative() {
                return Err(GrowthError::NegativeValue(*n));
            }
        }
        Ok(Self { samples })
    }

    pub fn from_values(start: u64, values: impl IntoIterator<Item = Rational>) -> Result<Self, GrowthError> {
        Self::new(
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| (start + i as u64, v))
                .collect(),
        )
    }

    pub fn domain(&self) -> (u64, u64) {
        (
            *self.samples.keys().next().unwrap(),
            *self.samples.keys().next_back().unwrap(),
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, n: u64) -> Option<&Rational> {
        self.samples.get(&n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.samples.iter().map(|(n, v)| (*n, v))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, GrowthError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers().map_err(|e| GrowthError::Csv(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "n" || &headers[1] != "value" {
            return Err(GrowthError::Csv("expected header `n,value`".to_string()));
        }
        let mut samples = BTreeMap::new();
        for record in rdr.records() {
            let record = record.map_err(|e| GrowthError::Csv(e.to_string()))?;
            let n: u64 = record[0]
                .trim()
                .parse()
                .map_err(|_| GrowthError::Csv(format!("bad n `{}`", &record[0])))?;
            samples.insert(n, parse_rational(record[1].trim())?);
        }
        Self::new(samples)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), GrowthError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| GrowthError::Csv(e.to_string());
        wtr.write_record(["n", "value"]).map_err(err)?;
        for (n, v) in self.iter() {
            wtr.write_record([n.to_string(), format_rational(v)])
                .map_err(err)?;
        }
        wtr.flush().map_err(|e| GrowthError::Csv(e.to_string()))
    }

    // g(m) with m clamped into the domain; the flag reports clamping.
    fn clamped(&self, m: &Rational) -> (&Rational, bool) {
        let (lo, hi) = self.domain();
        let idx = m.floor().to_integer().to_u64().unwrap_or(u64::MAX);
        if idx > hi {
            (self.samples.get(&hi).unwrap(), true)
        } else {
            (self.samples.get(&idx.max(lo)).unwrap(), false)
        }
    }
}

/// Geometric grid `{0, 1, 2, 4, …, 2^max_exp}` for the witness search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessGrid {
    pub max_exp: u32,
}

impl Default for WitnessGrid {
    fn default() -> Self {
        Self { max_exp: 10 }
    }
}

impl WitnessGrid {
    pub fn values(&self) -> Vec<Rational> {
        std::iter::once(0)
            .chain((0..=self.max_exp).map(|k| 1i64 << k))
            .map(int)
            .collect()
    }

    pub fn max(&self) -> Rational {
        int(1i64 << self.max_exp)
    }
}

/// Searches the grid for constants with `f(n) ≤ A·g(B·n + C) + D·n + E` at
/// every sampled `n`.
///
/// `A`, `B` range over the positive grid values, `C` and `E` over the whole
/// grid, in lexicographic order. For each choice the least admissible `D` is
/// solved exactly and accepted if it does not exceed the grid maximum. `None`
/// means "no witness within bounds", not a disproof.
pub fn find_witness(
    f: &GrowthTable,
    g: &GrowthTable,
    grid: WitnessGrid,
) -> Result<Option<WitnessConstants>, GrowthError> {
    if f.is_empty() || g.is_empty() {
        return Err(GrowthError::EmptyTable);
    }
    if f.domain() != g.domain() {
        return Err(GrowthError::MismatchedDomains);
    }
    if f.len() < 2 {
        return Err(GrowthError::TooShort);
    }
    let values = grid.values();
    let d_max = grid.max();
    let positive: Vec<&Rational> = values.iter().filter(|v| v.is_positive()).collect();
    for a in &positive {
        for b in &positive {
            for c in &values {
                // g(B·n + C) is independent of A and E; evaluate it once.
                let mut clamped = false;
                let g_shift: Vec<(u64, &Rational, Rational)> = f
                    .iter()
                    .map(|(n, fv)| {
                        let m = *b * int(n as i64) + c;
                        let (gv, cl) = g.clamped(&m);
                        clamped |= cl;
                        (n, fv, gv.clone())
                    })
                    .collect();
                for e in &values {
                    if let Some(d) = least_d(&g_shift, a, e) {
                        if d <= d_max {
                            return Ok(Some(WitnessConstants {
                                a: (*a).clone(),
                                b: (*b).clone(),
                                c: c.clone(),
                                d,
                                e: e.clone(),
                                domain: Some(f.domain()),
                                clamped,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

// Least D ≥ 0 with f(n) ≤ A·g + D·n + E on all samples; None if n = 0 fails.
fn least_d(samples: &[(u64, &Rational, Rational)], a: &Rational, e: &Rational) -> Option<Rational> {
    let mut d = Rational::zero();
    for (n, fv, gv) in samples {
        let slack = *fv - a * gv - e;
        if *n == 0 {
            if slack.is_positive() {
                return None;
            }
        } else {
            let need = slack / int(*n as i64);
            if need > d {
                d = need;
            }
        }
    }
    Some(d)
}

/// Both directions of the table witness search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub forward: Option<WitnessConstants>,
    pub backward: Option<WitnessConstants>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.forward.is_some() && self.backward.is_some()
    }
}

pub fn equivalent_tables(
    f: &GrowthTable,
    g: &GrowthTable,
    grid: WitnessGrid,
) -> Result<EquivalenceReport, GrowthError> {
    Ok(EquivalenceReport {
        forward: find_witness(f, g, grid)?,
        backward: find_witness(g, f, grid)?,
    })
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn pow(base: &Rational, exp: u64) -> Rational {
    let mut result = Rational::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    result
}

fn ratio_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::MAX) / r.denom().to_f64().unwrap_or(1.0)
}

/// Accepts integers, `p/q` and plain decimals such as `2.5`.
pub fn parse_rational(s: &str) -> Result<Rational, GrowthError> {
    let bad = || GrowthError::BadValue(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", whole, frac);
        let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rational::new(numer, denom));
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> Vec<SymbolicGrowth> {
        vec![
            SymbolicGrowth::Zero,
            SymbolicGrowth::poly(1, 0),
            SymbolicGrowth::poly(1, 1),
            SymbolicGrowth::poly(3, 1),
            SymbolicGrowth::poly(1, 2),
            SymbolicGrowth::poly(7, 2),
            SymbolicGrowth::poly(1, 3),
            SymbolicGrowth::exp(2),
            SymbolicGrowth::exp(3),
            SymbolicGrowth::exp(10),
        ]
    }

    #[test]
    fn linear_vs_quadratic() {
        let r = dominates_symbolic(&SymbolicGrowth::poly(1, 1), &SymbolicGrowth::poly(1, 2));
        let DominanceResult::Holds(w) = r else {
            panic!("expected witness")
        };
        assert_eq!((w.a, w.b, w.c, w.d, w.e), (int(1), int(1), int(0), int(0), int(1)));
    }

    #[test]
    fn exponential_base_change() {
        let r = dominates_symbolic(&SymbolicGrowth::exp(3), &SymbolicGrowth::exp(2));
        let DominanceResult::Holds(w) = r else {
            panic!("expected witness")
        };
        assert_eq!(w.b, int(2));
    }

    #[test]
    fn exponential_beats_polynomials() {
        for d in 1..=6 {
            assert!(!dominates_symbolic(&SymbolicGrowth::exp(2), &SymbolicGrowth::poly(1, d)).holds());
        }
        assert!(!dominates_symbolic(&SymbolicGrowth::poly(1, 3), &SymbolicGrowth::poly(1, 2)).holds());
    }

    #[test]
    fn symbolic_equivalences() {
        assert!(equivalent(&SymbolicGrowth::poly(7, 2), &SymbolicGrowth::poly(1, 2)));
        assert!(equivalent(&SymbolicGrowth::exp(2), &SymbolicGrowth::exp(10)));
        assert!(!equivalent(&SymbolicGrowth::poly(1, 1), &SymbolicGrowth::poly(1, 2)));
        assert!(equivalent(&SymbolicGrowth::poly(1, 0), &SymbolicGrowth::poly(1, 1)));
        assert!(equivalent(&SymbolicGrowth::poly(5, 1), &SymbolicGrowth::poly(1, 1)));
    }

    #[test]
    fn symbolic_witnesses_hold_numerically() {
        let fam = family();
        for f in &fam {
            for g in &fam {
                if let DominanceResult::Holds(w) = dominates_symbolic(f, g) {
                    assert!(w.holds_on(f, g, 0..=40), "{} ≺ {} with {}", f, g, w);
                }
            }
        }
    }

    #[test]
    fn preorder_axioms() {
        let fam = family();
        for f in &fam {
            assert!(dominates_symbolic(f, f).holds());
            for g in &fam {
                for h in &fam {
                    if dominates_symbolic(f, g).holds() && dominates_symbolic(g, h).holds() {
                        assert!(dominates_symbolic(f, h).holds(), "{} {} {}", f, g, h);
                    }
                }
                assert_eq!(equivalent(f, g), equivalent(g, f));
            }
        }
    }

    #[test]
    fn table_witness_matches_example() {
        let f = GrowthTable::from_values(1, (1..=20).map(|n| int(n * n + 5 * n))).unwrap();
        let g = GrowthTable::from_values(1, (1..=20).map(|n| int(n * n))).unwrap();
        let w = find_witness(&f, &g, WitnessGrid::default()).unwrap().unwrap();
        assert_eq!((w.a, w.b, w.c, w.d, w.e), (int(1), int(1), int(0), int(5), int(0)));
        let same = find_witness(&g, &g, WitnessGrid::default()).unwrap().unwrap();
        assert_eq!((same.a, same.b, same.c, same.d, same.e), (int(1), int(1), int(0), int(0), int(0)));
    }

    #[test]
    fn exponential_table_has_no_small_witness() {
        let f = GrowthTable::from_values(1, (1..=12).map(|n| int(1 << n))).unwrap();
        let g = GrowthTable::from_values(1, (1..=12).map(|n| int(n * n))).unwrap();
        assert!(find_witness(&f, &g, WitnessGrid { max_exp: 3 }).unwrap().is_none());
    }

    #[test]
    fn table_errors() {
        let f = GrowthTable::from_values(1, (1..=5).map(int)).unwrap();
        let g = GrowthTable::from_values(0, (0..=5).map(int)).unwrap();
        assert!(matches!(
            find_witness(&f, &g, WitnessGrid::default()),
            Err(GrowthError::MismatchedDomains)
        ));
        assert!(matches!(GrowthTable::new(BTreeMap::new()), Err(GrowthError::EmptyTable)));
        let one = GrowthTable::from_values(1, [int(1)]).unwrap();
        assert!(matches!(
            find_witness(&one, &one, WitnessGrid::default()),
            Err(GrowthError::TooShort)
        ));
        let gap: BTreeMap<u64, Rational> = [(1, int(1)), (3, int(2))].into_iter().collect();
        assert!(matches!(GrowthTable::new(gap), Err(GrowthError::BadDomain(_))));
    }

    #[test]
    fn csv_round_trip() {
        let t = GrowthTable::from_values(0, [int(0), int(1), Rational::new(3.into(), 2.into())]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "n,value\n0,0\n1,1\n2,3/2\n");
        assert_eq!(GrowthTable::read_csv(&buf[..]).unwrap(), t);
        assert_eq!(parse_rational("2.25").unwrap(), Rational::new(9.into(), 4.into()));
    }
}
