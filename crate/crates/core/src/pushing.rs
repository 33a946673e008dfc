//! Pushing PL 1-chains into the 1-skeleton.
//!
//! Inside each 2-simplex σ the part `Q` of the chain is first projected
//! radially from a center `u ∈ B(O, r)` onto the circle `∂B(u, 2r)`, then
//! radially from the barycenter `O` onto `∂σ`. The center is drawn by
//! rejection sampling until `vol(π_u Q) ≤ v₀·vol(Q)`. The swept regions of
//! both projections form the 2-chain `S` with `∂S = T − R`.
//!
//! Geometry happens in the isometric planar chart of the standard simplex;
//! chain coordinates are barycentric.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::complex2::{chart, distance, from_chart, Complex2, Location, BARYCENTER, CIRCUMRADIUS};
use crate::growth::parse_rational;

/// Largest sagitta allowed when an arc is replaced by chords.
pub const FLATTEN_ERROR: f64 = 1e-6;
/// Default projection radius for the standard triangle.
pub const DEFAULT_R: f64 = 0.12;
/// Sampling budget of [`choose_center`].
pub const REJECTION_BUDGET: usize = 100_000;

const EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PushError {
    #[error("unsupported dimensions k={0}, i={1}")]
    Unsupported(u32, u32),
    #[error("radius {r} too large: 3r must stay below the inradius {inradius}")]
    RadiusTooLarge { r: f64, inradius: f64 },
    #[error("complex is not simplicial")]
    NotSimplicial,
    #[error("piece {0} refers to a missing simplex")]
    BadSimplex(usize),
    #[error("piece {0} leaves its simplex")]
    OutsideSimplex(usize),
    #[error("expected a chain of dimension {expected}, got {got}")]
    Dimension { expected: u8, got: u8 },
    #[error("boundary of the chain is not in the 0-skeleton")]
    BoundaryNotInSkeleton,
    #[error("center lies on the chain after {0} perturbations")]
    CenterOnChain(usize),
    #[error("rejection budget exhausted after {0} samples")]
    RejectionBudget(usize),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("json: {0}")]
    Json(String),
}

fn de_coord<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Coord {
        Num(f64),
        Text(String),
    }
    match Coord::deserialize(d)? {
        Coord::Num(x) => Ok(x),
        Coord::Text(s) => parse_rational(&s)
            .ok()
            .and_then(|q| q.to_f64())
            .ok_or_else(|| serde::de::Error::custom(format!("bad coordinate `{}`", s))),
    }
}

#[derive(Deserialize)]
struct Coord3(
    #[serde(deserialize_with = "de_coord")] f64,
    #[serde(deserialize_with = "de_coord")] f64,
    #[serde(deserialize_with = "de_coord")] f64,
);

fn de_point<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 3], D::Error> {
    let Coord3(a, b, c) = Coord3::deserialize(d)?;
    Ok([a, b, c])
}

pub(crate) fn de_points<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<[f64; 3]>, D::Error> {
    let raw: Vec<Coord3> = Vec::deserialize(d)?;
    Ok(raw.into_iter().map(|Coord3(a, b, c)| [a, b, c]).collect())
}

/// One weighted affine piece of a chain, in the barycentric coordinates of
/// its simplex. Arc angles are measured in the planar chart; the arc runs
/// from `start` to `end`, counterclockwise when `end > start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Piece {
    Segment {
        simplex: usize,
        #[serde(deserialize_with = "de_points")]
        points: Vec<[f64; 3]>,
        multiplicity: i64,
    },
    Arc {
        simplex: usize,
        #[serde(deserialize_with = "de_point")]
        center: [f64; 3],
        #[serde(deserialize_with = "de_coord")]
        radius: f64,
        #[serde(deserialize_with = "de_coord")]
        start: f64,
        #[serde(deserialize_with = "de_coord")]
        end: f64,
        multiplicity: i64,
    },
    Triangle {
        simplex: usize,
        #[serde(deserialize_with = "de_points")]
        points: Vec<[f64; 3]>,
        multiplicity: i64,
    },
}

impl Piece {
    pub fn segment(simplex: usize, a: [f64; 3], b: [f64; 3], multiplicity: i64) -> Self {
        Self::Segment {
            simplex,
            points: vec![a, b],
            multiplicity,
        }
    }

    pub fn triangle(simplex: usize, a: [f64; 3], b: [f64; 3], c: [f64; 3], multiplicity: i64) -> Self {
        Self::Triangle {
            simplex,
            points: vec![a, b, c],
            multiplicity,
        }
    }

    pub fn simplex(&self) -> usize {
        match self {
            Self::Segment { simplex, .. } | Self::Arc { simplex, .. } | Self::Triangle { simplex, .. } => *simplex,
        }
    }

    pub fn multiplicity(&self) -> i64 {
        match self {
            Self::Segment { multiplicity, .. }
            | Self::Arc { multiplicity, .. }
            | Self::Triangle { multiplicity, .. } => *multiplicity,
        }
    }

    /// Length or area, without multiplicity.
    pub fn size(&self) -> f64 {
        match self {
            Self::Segment { points, .. } => distance(points[0], points[1]),
            Self::Arc { radius, start, end, .. } => radius * (end - start).abs(),
            Self::Triangle { points, .. } => triangle_area(chart(points[0]), chart(points[1]), chart(points[2])).abs(),
        }
    }

    /// Start and end point of a 1-dimensional piece.
    pub fn endpoints(&self) -> Option<([f64; 3], [f64; 3])> {
        match self {
            Self::Segment { points, .. } => Some((points[0], points[1])),
            Self::Arc {
                center,
                radius,
                start,
                end,
                ..
            } => {
                let c = chart(*center);
                let at = |t: f64| from_chart([c[0] + radius * t.cos(), c[1] + radius * t.sin()]);
                Some((at(*start), at(*end)))
            }
            Self::Triangle { .. } => None,
        }
    }

    fn dimension(&self) -> u8 {
        match self {
            Self::Triangle { .. } => 2,
            _ => 1,
        }
    }
}

fn triangle_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PLChain {
    pub dimension: u8,
    pub pieces: Vec<Piece>,
}

/// Boundary of a 1-chain as signed canonical points.
pub type PointChain = BTreeMap<PointKey, i64>;

/// A canonical point of a simplicial complex, rounded to 1e-9.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointKey {
    Vertex(usize),
    Edge(usize, i64),
    Face(usize, i64, i64),
}

const QUANTUM: f64 = 1e9;

pub fn point_key(c: &Complex2, face: usize, b: [f64; 3]) -> PointKey {
    match c.locate(face, b, 1e-10) {
        Location::Vertex(v) => PointKey::Vertex(v),
        Location::Edge { edge, t } => PointKey::Edge(edge, (t * QUANTUM).round() as i64),
        Location::Face { face, bary } => {
            PointKey::Face(face, (bary[0] * QUANTUM).round() as i64, (bary[1] * QUANTUM).round() as i64)
        }
    }
}

impl PLChain {
    pub fn new(dimension: u8, pieces: Vec<Piece>) -> Self {
        Self { dimension, pieces }
    }

    pub fn volume(&self) -> f64 {
        self.pieces.iter().map(|p| p.multiplicity().unsigned_abs() as f64 * p.size()).sum()
    }

    /// Checks dimensions, simplex indices and that every point lies in its
    /// closed simplex.
    pub fn validate(&self, c: &Complex2) -> Result<(), PushError> {
        for (i, p) in self.pieces.iter().enumerate() {
            if p.dimension() != self.dimension {
                return Err(PushError::Dimension {
                    expected: self.dimension,
                    got: p.dimension(),
                });
            }
            if p.simplex() >= c.faces().len() {
                return Err(PushError::BadSimplex(i));
            }
            let pts: Vec<[f64; 3]> = match p {
                Piece::Segment { points, .. } | Piece::Triangle { points, .. } => {
                    if points.len() != usize::from(p.dimension()) + 1 {
                        return Err(PushError::OutsideSimplex(i));
                    }
                    points.clone()
                }
                Piece::Arc { .. } => {
                    let (a, b) = p.endpoints().unwrap();
                    vec![a, b]
                }
            };
            for b in pts {
                if b.iter().any(|&x| x < -1e-9) || ((b[0] + b[1] + b[2]) - 1.0).abs() > 1e-9 {
                    return Err(PushError::OutsideSimplex(i));
                }
            }
        }
        Ok(())
    }

    /// Signed endpoints of a 1-chain, `end − start`.
    pub fn boundary_points(&self, c: &Complex2) -> PointChain {
        let mut out = PointChain::new();
        for p in &self.pieces {
            if let Some((a, b)) = p.endpoints() {
                let m = p.multiplicity();
                *out.entry(point_key(c, p.simplex(), b)).or_default() += m;
                *out.entry(point_key(c, p.simplex(), a)).or_default() -= m;
            }
        }
        out.retain(|_, m| *m != 0);
        out
    }

    /// Boundary of a 2-chain as a 1-chain of segments.
    pub fn boundary(&self) -> PLChain {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            if let Piece::Triangle {
                simplex,
                points,
                multiplicity,
            } = p
            {
                for k in 0..3 {
                    pieces.push(Piece::segment(*simplex, points[k], points[(k + 1) % 3], *multiplicity));
                }
            }
        }
        PLChain::new(1, pieces)
    }

    /// Replaces arcs by chord polylines with sagitta at most [`FLATTEN_ERROR`].
    pub fn flatten(&self) -> PLChain {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            match p {
                Piece::Arc {
                    simplex,
                    center,
                    radius,
                    start,
                    end,
                    multiplicity,
                } => {
                    let c = chart(*center);
                    let pts = arc_points(c, *radius, *start, *end);
                    for w in pts.windows(2) {
                        pieces.push(Piece::segment(*simplex, from_chart(w[0]), from_chart(w[1]), *multiplicity));
                    }
                }
                other => pieces.push(other.clone()),
            }
        }
        PLChain::new(self.dimension, pieces)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, PushError> {
        serde_json::from_str(text).map_err(|e| PushError::Json(e.to_string()))
    }
}

fn chord_step(radius: f64) -> f64 {
    2.0 * (1.0 - FLATTEN_ERROR / radius).clamp(-1.0, 1.0).acos()
}

fn arc_points(c: [f64; 2], radius: f64, start: f64, end: f64) -> Vec<[f64; 2]> {
    let n = ((end - start).abs() / chord_step(radius)).ceil().max(1.0) as usize;
    (0..=n)
        .map(|j| {
            let t = start + (end - start) * j as f64 / n as f64;
            [c[0] + radius * t.cos(), c[1] + radius * t.sin()]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushingConstants {
    pub k: u32,
    pub i: u32,
    pub r: f64,
    /// `(2r)^k ∫_{B(O,3r)} ‖u‖^{-k} du + vol_i(B(O,r))`.
    #[serde(rename = "K")]
    pub big_k: f64,
    pub v0: u64,
    pub ball_volume: f64,
    /// Closest approach of the flattened `π_u Q` to `O`.
    pub rho_min: f64,
    /// `v₀ · 2R_c / ρ_min`, bounding `vol(R)/vol(T)`.
    pub c_r: Option<f64>,
    /// `v₀ · (r + R_c² / (2ρ_min))`, bounding `vol(S)/vol(T)`.
    pub c_s: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

/// Inradius of the standard `i`-simplex (side `√2`).
pub fn simplex_inradius(i: u32) -> f64 {
    let n = i as f64;
    2f64.sqrt() / (2.0 * n * (n + 1.0)).sqrt()
}

fn unit_ball_volume(i: u32) -> f64 {
    match i {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

/// `∫_{B(0,ρ)} ‖u‖^{-k} du` in closed form.
pub fn radial_integral(k: u32, i: u32, rho: f64) -> f64 {
    // Surface measure of the unit sphere times ∫₀^ρ s^{i-1-k} ds.
    let sphere = i as f64 * unit_ball_volume(i);
    sphere * rho.powi((i - k) as i32) / (i - k) as f64
}

/// The same integral by Gauss–Legendre quadrature in polar or spherical
/// coordinates, evaluating `‖u‖^{-k}` at the Cartesian point.
pub fn radial_integral_quadrature(k: u32, i: u32, rho: f64) -> f64 {
    let (x, w) = gauss_legendre(24);
    let map = |t: f64, lo: f64, hi: f64| 0.5 * (hi - lo) * t + 0.5 * (hi + lo);
    let half = |lo: f64, hi: f64| 0.5 * (hi - lo);
    let mut total = 0.0;
    for (&ts, &ws) in x.iter().zip(&w) {
        let s = map(ts, 0.0, rho);
        for (&ta, &wa) in x.iter().zip(&w) {
            let theta = map(ta, 0.0, 2.0 * PI);
            if i == 2 {
                let u = [s * theta.cos(), s * theta.sin()];
                let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
                total += ws * wa * half(0.0, rho) * half(0.0, 2.0 * PI) * norm.powi(-(k as i32)) * s;
            } else {
                for (&tp, &wp) in x.iter().zip(&w) {
                    let phi = map(tp, 0.0, PI);
                    let u = [s * phi.sin() * theta.cos(), s * phi.sin() * theta.sin(), s * phi.cos()];
                    let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                    total += ws
                        * wa
                        * wp
                        * half(0.0, rho)
                        * half(0.0, 2.0 * PI)
                        * half(0.0, PI)
                        * norm.powi(-(k as i32))
                        * s
                        * s
                        * phi.sin();
                }
            }
        }
    }
    total
}

// Nodes and weights on [-1, 1] by Newton iteration on Legendre polynomials.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

pub fn pushing_constants(k: u32, i: u32, r: f64) -> Result<PushingConstants, PushError> {
    if !matches!((k, i), (1, 2) | (2, 3)) {
        return Err(PushError::Unsupported(k, i));
    }
    let inradius = simplex_inradius(i);
    if !(r > 0.0 && 3.0 * r < inradius) {
        return Err(PushError::RadiusTooLarge { r, inradius });
    }
    let ball_volume = unit_ball_volume(i) * r.powi(i as i32);
    let big_k = (2.0 * r).powi(k as i32) * radial_integral(k, i, 3.0 * r) + ball_volume;
    // Smallest integer with K/v0 < vol(B); the ratio is an integer here, so
    // round before comparing to dodge floating noise.
    let ratio = big_k / ball_volume;
    let v0 = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as u64 + 1
    } else {
        ratio.ceil() as u64
    };
    let (rho_min, c_r, c_s, c) = if (k, i) == (1, 2) {
        let rho = 2.0 * r * (chord_step(2.0 * r) / 2.0).cos() - r;
        let v = v0 as f64;
        let c_r = v * 2.0 * CIRCUMRADIUS / rho;
        let c_s = v * (r + CIRCUMRADIUS * CIRCUMRADIUS / (2.0 * rho));
        (rho, Some(c_r), Some(c_s), Some(c_r.max(c_s)))
    } else {
        (r, None, None, None)
    };
    Ok(PushingConstants {
        k,
        i,
        r,
        big_k,
        v0,
        ball_volume,
        rho_min,
        c_r,
        c_s,
        c,
    })
}

/// A segment of `Q` in chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Seg {
    a: [f64; 2],
    b: [f64; 2],
    m: i64,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

// Pieces of a segment relative to the disc B(u, rad): parameter intervals
// with a flag telling whether they lie inside.
fn split_at_circle(s: &Seg, u: [f64; 2], rad: f64) -> Vec<(f64, f64, bool)> {
    let d = sub(s.b, s.a);
    let f = sub(s.a, u);
    let a = d[0] * d[0] + d[1] * d[1];
    let b = 2.0 * (f[0] * d[0] + f[1] * d[1]);
    let c = f[0] * f[0] + f[1] * f[1] - rad * rad;
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc <= 0.0 {
        return vec![(0.0, 1.0, false)];
    }
    let sq = disc.sqrt();
    let t1 = ((-b - sq) / (2.0 * a)).max(0.0);
    let t2 = ((-b + sq) / (2.0 * a)).min(1.0);
    if t1 >= t2 {
        return vec![(0.0, 1.0, false)];
    }
    let mut out = Vec::new();
    if t1 > 0.0 {
        out.push((0.0, t1, false));
    }
    out.push((t1, t2, true));
    if t2 < 1.0 {
        out.push((t2, 1.0, false));
    }
    out
}

// Signed angle swept, seen from u, going from x to y.
fn sweep(u: [f64; 2], x: [f64; 2], y: [f64; 2]) -> f64 {
    let (p, q) = (sub(x, u), sub(y, u));
    cross(p, q).atan2(p[0] * q[0] + p[1] * q[1])
}

/// `vol(π_u Q)` with exact arcs.
fn projected_volume(q: &[Seg], u: [f64; 2], rad: f64) -> f64 {
    let mut total = 0.0;
    for s in q {
        for (t0, t1, inside) in split_at_circle(s, u, rad) {
            let (x, y) = (lerp(s.a, s.b, t0), lerp(s.a, s.b, t1));
            let len = if inside { rad * sweep(u, x, y).abs() } else { norm(sub(y, x)) };
            total += s.m.unsigned_abs() as f64 * len;
        }
    }
    total
}

fn min_distance(q: &[Seg], u: [f64; 2]) -> f64 {
    q.iter()
        .map(|s| {
            let d = sub(s.b, s.a);
            let l2 = d[0] * d[0] + d[1] * d[1];
            let t = if l2 == 0.0 {
                0.0
            } else {
                (((u[0] - s.a[0]) * d[0] + (u[1] - s.a[1]) * d[1]) / l2).clamp(0.0, 1.0)
            };
            norm(sub(u, lerp(s.a, s.b, t)))
        })
        .fold(f64::INFINITY, f64::min)
}

fn sample_ball<R: Rng>(rng: &mut R, o: [f64; 2], r: f64) -> [f64; 2] {
    loop {
        let x = rng.gen_range(-1.0..1.0);
        let y = rng.gen_range(-1.0..1.0);
        if x * x + y * y < 1.0 {
            return [o[0] + r * x, o[1] + r * y];
        }
    }
}

fn chart_segments(q: &[Piece]) -> Vec<Seg> {
    q.iter()
        .filter_map(|p| match p {
            Piece::Segment { points, multiplicity, .. } => Some(Seg {
                a: chart(points[0]),
                b: chart(points[1]),
                m: *multiplicity,
            }),
            _ => None,
        })
        .collect()
}

/// Projects the segments of `q` (all in one simplex) radially from `u`
/// onto the circle `∂B(u, 2r)`. Parts outside the disc are kept; parts
/// inside become exact arcs.
pub fn radial_project(q: &PLChain, u: [f64; 3], r: f64) -> PLChain {
    let uc = chart(u);
    let rad = 2.0 * r;
    let mut pieces = Vec::new();
    for p in &q.pieces {
        let Piece::Segment { simplex, points, multiplicity } = p else {
            pieces.push(p.clone());
            continue;
        };
        let s = Seg {
            a: chart(points[0]),
            b: chart(points[1]),
            m: *multiplicity,
        };
        for (t0, t1, inside) in split_at_circle(&s, uc, rad) {
            let (x, y) = (lerp(s.a, s.b, t0), lerp(s.a, s.b, t1));
            if inside {
                let start = sub(x, uc)[1].atan2(sub(x, uc)[0]);
                pieces.push(Piece::Arc {
                    simplex: *simplex,
                    center: u,
                    radius: rad,
                    start,
                    end: start + sweep(uc, x, y),
                    multiplicity: s.m,
                });
            } else {
                pieces.push(Piece::segment(*simplex, from_chart(x), from_chart(y), s.m));
            }
        }
    }
    PLChain::new(1, pieces)
}

/// Outcome of center selection in one simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterChoice {
    pub center: [f64; 3],
    pub rejected: usize,
    pub perturbations: usize,
}

/// Samples `u ∈ B(O, r)` until `vol(π_u Q) ≤ v₀·vol(Q)`. Returns `O` at
/// once when `vol(Q) = 0`.
pub fn choose_center(q: &PLChain, constants: &PushingConstants, seed: u64) -> Result<CenterChoice, PushError> {
    let segs = chart_segments(&q.pieces);
    let vol_q = q.volume();
    if vol_q == 0.0 {
        return Ok(CenterChoice {
            center: BARYCENTER,
            rejected: 0,
            perturbations: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = chart(BARYCENTER);
    let r = constants.r;
    let mut rejected = 0;
    let mut perturbations = 0;
    while rejected < REJECTION_BUDGET {
        let mut u = sample_ball(&mut rng, o, r);
        let mut tries = 0;
        while min_distance(&segs, u) < EPS {
            if tries == 10 {
                return Err(PushError::CenterOnChain(tries));
            }
            tries += 1;
            let nudge = sample_ball(&mut rng, [0.0, 0.0], 1e-6 * r);
            let moved = [u[0] + nudge[0], u[1] + nudge[1]];
            if norm(sub(moved, o)) < r {
                u = moved;
            }
        }
        perturbations += tries;
        if projected_volume(&segs, u, 2.0 * r) <= constants.v0 as f64 * vol_q {
            return Ok(CenterChoice {
                center: from_chart(u),
                rejected,
                perturbations,
            });
        }
        rejected += 1;
    }
    Err(PushError::RejectionBudget(REJECTION_BUDGET))
}

/// Monte-Carlo estimate of the measure of the bad set `A_v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub v: f64,
    pub samples: usize,
    pub hits: usize,
    pub estimate: f64,
    /// Wilson 95% interval, in area units.
    pub low: f64,
    pub high: f64,
}

pub fn estimate_alpha(q: &PLChain, constants: &PushingConstants, v: f64, samples: usize, seed: u64) -> AlphaEstimate {
    let samples = samples.max(100);
    let segs = chart_segments(&q.pieces);
    let vol_q = q.volume();
    let area = constants.ball_volume;
    let mut hits = 0;
    if vol_q > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = chart(BARYCENTER);
        for _ in 0..samples {
            let u = sample_ball(&mut rng, o, constants.r);
            if projected_volume(&segs, u, 2.0 * constants.r) > v * vol_q {
                hits += 1;
            }
        }
    }
    let (low, high) = wilson(hits, samples);
    AlphaEstimate {
        v,
        samples,
        hits,
        estimate: area * hits as f64 / samples as f64,
        low: area * low,
        high: area * high,
    }
}

/// Wilson score interval at 95%.
pub fn wilson(hits: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = hits as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()) / denom;
    let low = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if hits as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

/// What happened in one simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub simplex: usize,
    pub center: [f64; 3],
    pub vol_q: f64,
    pub vol_projected: f64,
    pub vol_r: f64,
    pub vol_s: f64,
    pub rejected: usize,
    pub perturbations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushCertificate {
    pub constants: PushingConstants,
    pub seed: u64,
    pub records: Vec<SimplexRecord>,
    pub vol_t: f64,
    pub vol_r: f64,
    pub vol_s: f64,
    /// `max(vol R, vol S) / vol T`.
    pub observed_c: f64,
    pub boundary_ok: bool,
    pub skeleton_ok: bool,
    pub homotopy_ok: bool,
    pub bounds_ok: bool,
}

impl PushCertificate {
    pub fn all_ok(&self) -> bool {
        self.boundary_ok
            && self.skeleton_ok
            && self.homotopy_ok
            && self.bounds_ok
            && self.records.iter().all(|r| r.vol_projected <= self.constants.v0 as f64 * r.vol_q + 1e-12)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes") + "\n"
    }

    /// Human-readable table of the per-simplex records.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:>7} {:>10} {:>12} {:>10} {:>10} {:>8}\n",
            "simplex", "vol Q", "vol pi_u Q", "vol R", "vol S", "rejected"
        );
        for r in &self.records {
            out.push_str(&format!(
                "{:>7} {:>10.6} {:>12.6} {:>10.6} {:>10.6} {:>8}\n",
                r.simplex, r.vol_q, r.vol_projected, r.vol_r, r.vol_s, r.rejected
            ));
        }
        out.push_str(&format!(
            "total   T {:.6}  R {:.6}  S {:.6}  observed C {:.4}  C {:.4}\n",
            self.vol_t,
            self.vol_r,
            self.vol_s,
            self.observed_c,
            self.constants.c.unwrap_or(f64::NAN)
        ));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushOutcome {
    pub r: PLChain,
    pub s: PLChain,
    pub certificate: PushCertificate,
    /// Image in `R` of each piece of `T`, in order.
    pub images: Vec<Vec<Piece>>,
}

/// Side of a face (index of the opposite corner) containing both points.
pub fn common_side(a: [f64; 3], b: [f64; 3]) -> Option<usize> {
    (0..3).find(|&j| a[j].abs() <= 1e-10 && b[j].abs() <= 1e-10)
}

/// Per-simplex seed derived from the run seed.
pub fn simplex_seed(seed: u64, simplex: usize) -> u64 {
    let mut z = seed ^ (simplex as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// Radial projection from O onto ∂σ, in barycentric coordinates.
fn project_from_o(p: [f64; 3]) -> [f64; 3] {
    let d = [p[0] - BARYCENTER[0], p[1] - BARYCENTER[1], p[2] - BARYCENTER[2]];
    let j = (0..3).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
    if d[j] >= 0.0 {
        return p;
    }
    let s = (1.0 / 3.0) / (-d[j]);
    let mut q = [0.0; 3];
    for k in 0..3 {
        q[k] = BARYCENTER[k] + s * d[k];
        if q[k].abs() < EPS {
            q[k] = 0.0;
        }
    }
    q[j] = 0.0;
    let total: f64 = q.iter().sum();
    [q[0] / total, q[1] / total, q[2] / total]
}

// Splits [p, q] where the side hit by the ray from O changes.
fn split_at_vertex_rays(p: [f64; 3], q: [f64; 3]) -> Vec<[f64; 3]> {
    let d = |x: [f64; 3], k: usize| x[k] - BARYCENTER[k];
    let mut ts = Vec::new();
    for (j, k) in [(0, 1), (1, 2), (0, 2)] {
        let (g0, g1) = (d(p, j) - d(p, k), d(q, j) - d(q, k));
        if (g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0) {
            let t = g0 / (g0 - g1);
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])];
            let l = 3 - j - k;
            // Only where both coordinates are the smallest is the ray a vertex ray.
            if d(x, j) < d(x, l) && t > EPS && t < 1.0 - EPS {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    let mut pts = vec![p];
    for t in ts {
        pts.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])]);
    }
    pts.push(q);
    pts
}

// Adds the convex quad (a, b, c, d) as two triangles.
fn push_quad(s: &mut Vec<Piece>, f: usize, q: [[f64; 3]; 4], m: i64) {
    for t in [[q[0], q[1], q[2]], [q[0], q[2], q[3]]] {
        let area = triangle_area(chart(t[0]), chart(t[1]), chart(t[2])).abs();
        if area > 1e-18 {
            s.push(Piece::triangle(f, t[0], t[1], t[2], m));
        }
    }
}

/// Pushes a 1-chain whose boundary lies in the 0-skeleton into the
/// 1-skeleton, building the homotopy 2-chain and verifying the result.
pub fn push_chain(t: &PLChain, c: &Complex2, constants: &PushingConstants, seed: u64) -> Result<PushOutcome, PushError> {
    if !c.is_simplicial() {
        return Err(PushError::NotSimplicial);
    }
    if t.dimension != 1 {
        return Err(PushError::Dimension { expected: 1, got: t.dimension });
    }
    if (constants.k, constants.i) != (1, 2) {
        return Err(PushError::Unsupported(constants.k, constants.i));
    }
    t.validate(c)?;
    let t = t.flatten();
    if t.boundary_points(c).keys().any(|k| !matches!(k, PointKey::Vertex(_))) {
        return Err(PushError::BoundaryNotInSkeleton);
    }
    let rad = 2.0 * constants.r;
    let uc_step = chord_step(rad);
    // Q for each simplex: indices of interior pieces.
    let mut q_of: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in t.pieces.iter().enumerate() {
        let Piece::Segment { simplex, points, .. } = p else { unreachable!() };
        if distance(points[0], points[1]) > 0.0 && common_side(points[0], points[1]).is_none() {
            q_of.entry(*simplex).or_default().push(i);
        }
    }
    let mut images: Vec<Vec<Piece>> = vec![Vec::new(); t.pieces.len()];
    let mut s_pieces = Vec::new();
    let mut records = Vec::new();
    for (i, p) in t.pieces.iter().enumerate() {
        let Piece::Segment { points, .. } = p else { unreachable!() };
        if distance(points[0], points[1]) > 0.0 && common_side(points[0], points[1]).is_some() {
            images[i].push(p.clone());
        }
    }
    for (&f, idx) in &q_of {
        let q = PLChain::new(1, idx.iter().map(|&i| t.pieces[i].clone()).collect());
        let choice = choose_center(&q, constants, simplex_seed(seed, f))?;
        let uc = chart(choice.center);
        let segs = chart_segments(&q.pieces);
        let vol_projected = projected_volume(&segs, uc, rad);
        let s_start = s_pieces.len();
        let mut vol_r = 0.0;
        for (&i, s) in idx.iter().zip(&segs) {
            // π_u of this piece as a polyline in chart coordinates.
            let mut poly: Vec<[f64; 2]> = Vec::new();
            for (t0, t1, inside) in split_at_circle(s, uc, rad) {
                let (x, y) = (lerp(s.a, s.b, t0), lerp(s.a, s.b, t1));
                let (x, y) = (if t0 == 0.0 { s.a } else { x }, if t1 == 1.0 { s.b } else { y });
                if !inside {
                    if poly.last() != Some(&x) {
                        poly.push(x);
                    }
                    poly.push(y);
                    continue;
                }
                let dx = sub(x, uc);
                let start = dx[1].atan2(dx[0]);
                let total = sweep(uc, x, y);
                let n = (total.abs() / uc_step).ceil().max(1.0) as usize;
                let on_circle = |z: [f64; 2]| (norm(sub(z, uc)) - rad).abs() < 1e-12;
                let mut xs = Vec::with_capacity(n + 1);
                let mut ps = Vec::with_capacity(n + 1);
                for j in 0..=n {
                    let th = start + total * j as f64 / n as f64;
                    // End directions come from the points themselves so that
                    // consecutive pieces agree exactly.
                    let unit = |z: [f64; 2]| {
                        let w = sub(z, uc);
                        [w[0] / norm(w), w[1] / norm(w)]
                    };
                    let dir = match j {
                        0 => unit(x),
                        _ if j == n => unit(y),
                        _ => [th.cos(), th.sin()],
                    };
                    let xj = if j == 0 {
                        x
                    } else if j == n {
                        y
                    } else {
                        // Where the ray from u at angle th meets the segment line.
                        let e = sub(s.b, s.a);
                        let tt = cross(sub(uc, s.a), dir) / cross(e, dir);
                        lerp(s.a, s.b, tt)
                    };
                    let pj = if (j == 0 || j == n) && on_circle(xj) {
                        xj
                    } else {
                        [uc[0] + rad * dir[0], uc[1] + rad * dir[1]]
                    };
                    xs.push(xj);
                    ps.push(pj);
                }
                for j in 0..n {
                    let quad = [xs[j], xs[j + 1], ps[j + 1], ps[j]].map(from_chart);
                    push_quad(&mut s_pieces, f, quad, s.m);
                }
                if poly.last() != Some(&ps[0]) {
                    poly.push(ps[0]);
                }
                poly.extend_from_slice(&ps[1..]);
            }
            // Radial projection from O onto ∂σ.
            let bary: Vec<[f64; 3]> = poly
                .iter()
                .enumerate()
                .map(|(k, &z)| {
                    let (a, b) = t.pieces[i].endpoints().unwrap();
                    if k == 0 && z == s.a {
                        a
                    } else if k + 1 == poly.len() && z == s.b {
                        b
                    } else {
                        from_chart(z)
                    }
                })
                .collect();
            for w in bary.windows(2) {
                let pts = split_at_vertex_rays(w[0], w[1]);
                for v in pts.windows(2) {
                    let (a, b) = (v[0], v[1]);
                    let (pa, pb) = (project_from_o(a), project_from_o(b));
                    push_quad(&mut s_pieces, f, [a, b, pb, pa], s.m);
                    if distance(pa, pb) > 0.0 {
                        let piece = Piece::segment(f, pa, pb, s.m);
                        vol_r += piece.size() * s.m.unsigned_abs() as f64;
                        images[i].push(piece);
                    }
                }
            }
        }
        let vol_s = PLChain::new(2, s_pieces[s_start..].to_vec()).volume();
        records.push(SimplexRecord {
            simplex: f,
            center: choice.center,
            vol_q: q.volume(),
            vol_projected,
            vol_r,
            vol_s,
            rejected: choice.rejected,
            perturbations: choice.perturbations,
        });
    }
    let r = PLChain::new(1, images.iter().flatten().cloned().collect());
    let s = PLChain::new(2, s_pieces);
    let vol_t = t.volume();
    let (vol_r, vol_s) = (r.volume(), s.volume());
    let boundary_ok = r.boundary_points(c) == t.boundary_points(c);
    let skeleton_ok = r.pieces.iter().all(|p| {
        let (a, b) = p.endpoints().unwrap();
        (0..3).any(|j| a[j].abs() <= 1e-9 && b[j].abs() <= 1e-9)
    });
    let mut diff = t.pieces.clone();
    diff.extend(r.pieces.iter().map(|p| negate(p)));
    diff.extend(s.boundary().pieces.iter().map(|p| negate(p)));
    let residual = normal_form(c, &diff);
    let homotopy_ok = residual.is_empty();
    let cc = constants.c.unwrap();
    let bounds_ok = vol_r <= cc * vol_t + 1e-12 && vol_s <= cc * vol_t + 1e-12;
    let certificate = PushCertificate {
        constants: constants.clone(),
        seed,
        records,
        vol_t,
        vol_r,
        vol_s,
        observed_c: if vol_t > 0.0 { vol_r.max(vol_s) / vol_t } else { 0.0 },
        boundary_ok,
        skeleton_ok,
        homotopy_ok,
        bounds_ok,
    };
    if !certificate.all_ok() {
        return Err(PushError::Verification(format!(
            "boundary {} skeleton {} homotopy {} (residual {:?}) bounds {}",
            boundary_ok,
            skeleton_ok,
            homotopy_ok,
            residual.first(),
            bounds_ok
        )));
    }
    Ok(PushOutcome {
        r,
        s,
        certificate,
        images,
    })
}

fn negate(p: &Piece) -> Piece {
    let mut q = p.clone();
    match &mut q {
        Piece::Segment { multiplicity, .. } | Piece::Arc { multiplicity, .. } | Piece::Triangle { multiplicity, .. } => {
            *multiplicity = -*multiplicity
        }
    }
    q
}

/// A maximal interval of a carrier line with non-zero total multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub carrier: String,
    pub from: f64,
    pub to: f64,
    pub multiplicity: i64,
}

/// Normal form of a 1-chain of segments: on every carrier line, the net
/// multiplicity of each elementary interval. A segment inside a face joins
/// the first carrier line that passes through both of its ends; segments on
/// a side of a face use the global edge as carrier. Returns the intervals that do not cancel.
pub fn normal_form(c: &Complex2, pieces: &[Piece]) -> Vec<Residual> {
    const TOL: f64 = 1e-9;
    let mut edge_groups: BTreeMap<usize, Vec<(f64, f64, i64)>> = BTreeMap::new();
    let mut lines: BTreeMap<usize, Vec<([f64; 2], [f64; 2], i64)>> = BTreeMap::new();
    for p in pieces {
        let Piece::Segment { simplex, points, multiplicity } = p else { continue };
        let (a, b) = (points[0], points[1]);
        if distance(a, b) <= TOL {
            continue;
        }
        if let Some(j) = common_side(a, b) {
            let e = c.faces()[*simplex][(j + 1) % 3];
            let param = |x: [f64; 3]| match c.locate(*simplex, x, 1e-10) {
                Location::Vertex(v) => {
                    if c.edges()[e.edge].0 == v {
                        0.0
                    } else {
                        1.0
                    }
                }
                Location::Edge { t, .. } => t,
                Location::Face { .. } => f64::NAN,
            };
            let (ta, tb) = (param(a), param(b));
            let (lo, hi, m) = if ta <= tb { (ta, tb, *multiplicity) } else { (tb, ta, -*multiplicity) };
            edge_groups.entry(e.edge).or_default().push((lo, hi, m));
        } else {
            lines.entry(*simplex).or_default().push((chart(a), chart(b), *multiplicity));
        }
    }
    let mut out = Vec::new();
    for (e, group) in edge_groups {
        residual_on_line(&format!("edge {}", e), &group, 1e-8, &mut out);
    }
    for (f, mut segs) in lines {
        // Long segments first, so each carrier is fixed by a well
        // conditioned direction; others join the closest carrier that has
        // both ends on it. Chords of one arc meet at small angles, so a very
        // short piece can be within tolerance of a neighbouring chord too.
        segs.sort_by(|x, y| norm(sub(y.1, y.0)).total_cmp(&norm(sub(x.1, x.0))));
        let mut carriers: Vec<([f64; 2], f64, Vec<(f64, f64, i64)>)> = Vec::new();
        for (pa, pb, m) in segs {
            let gap = |dir: [f64; 2], off: f64| (cross(dir, pa) - off).abs().max((cross(dir, pb) - off).abs());
            let best = carriers
                .iter()
                .enumerate()
                .map(|(k, (dir, off, _))| (k, gap(*dir, *off)))
                .filter(|&(_, g)| g < 1e-8)
                .min_by(|x, y| x.1.total_cmp(&y.1));
            let k = match best.map(|(k, _)| k) {
                Some(k) => k,
                None => {
                    let d = sub(pb, pa);
                    let dir = [d[0] / norm(d), d[1] / norm(d)];
                    carriers.push((dir, cross(dir, pa), Vec::new()));
                    carriers.len() - 1
                }
            };
            let (dir, _, group) = &mut carriers[k];
            let (sa, sb) = (dir[0] * pa[0] + dir[1] * pa[1], dir[0] * pb[0] + dir[1] * pb[1]);
            group.push(if sa <= sb { (sa, sb, m) } else { (sb, sa, -m) });
        }
        for (dir, off, group) in carriers {
            let name = format!("face {} line {:.6}/{:.6}", f, dir[1].atan2(dir[0]), off);
            residual_on_line(&name, &group, 1e-8, &mut out);
        }
    }
    out
}

fn residual_on_line(carrier: &str, group: &[(f64, f64, i64)], tol: f64, out: &mut Vec<Residual>) {
    let mut cuts: Vec<f64> = group.iter().flat_map(|g| [g.0, g.1]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < tol);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < tol {
            continue;
        }
        let m: i64 = group
            .iter()
            .filter(|g| g.0 <= lo + tol && g.1 >= hi - tol)
            .map(|g| g.2)
            .sum();
        if m != 0 {
            out.push(Residual {
                carrier: carrier.to_string(),
                from: lo,
                to: hi,
                multiplicity: m,
            });
        }
    }
}

/// Random PL path of `steps` segments from a vertex to a vertex, each
/// segment inside one closed triangle. With `closed`, the path returns to
/// its first vertex along edges.
pub fn random_path<R: Rng>(c: &Complex2, steps: usize, closed: bool, rng: &mut R) -> PLChain {
    let start = rng.gen_range(0..c.vertex_count());
    let mut loc = Location::Vertex(start);
    let mut pieces = Vec::new();
    for step in 0..=steps {
        let faces = c.faces_containing(loc);
        let f = faces[rng.gen_range(0..faces.len())];
        let from = c.bary_in(f, loc).unwrap();
        let to = if step == steps {
            let mut b = [0.0; 3];
            b[rng.gen_range(0..3)] = 1.0;
            b
        } else {
            match rng.gen_range(0..10) {
                0 => {
                    let mut b = [0.0; 3];
                    b[rng.gen_range(0..3)] = 1.0;
                    b
                }
                1 | 2 => {
                    let j = rng.gen_range(0..3);
                    let t: f64 = rng.gen_range(0.05..0.95);
                    let mut b = [0.0; 3];
                    b[(j + 1) % 3] = t;
                    b[(j + 2) % 3] = 1.0 - t;
                    b
                }
                _ => {
                    let (x, y): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                    let (x, y) = if x + y > 1.0 { (1.0 - x, 1.0 - y) } else { (x, y) };
                    [1.0 - x - y, x, y]
                }
            }
        };
        if distance(from, to) > 1e-9 {
            pieces.push(Piece::segment(f, from, to, 1));
        }
        loc = c.locate(f, to, 1e-12);
    }
    if closed {
        let Location::Vertex(mut v) = loc else { unreachable!() };
        // Walk back to the start along a shortest edge path.
        let adj = c.vertex_edges();
        let mut prev = vec![usize::MAX; c.vertex_count()];
        let mut queue = std::collections::VecDeque::from([start]);
        prev[start] = start;
        while let Some(x) = queue.pop_front() {
            for &e in &adj[x] {
                let (a, b) = c.edges()[e];
                let y = if a == x { b } else { a };
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        while v != start {
            let w = prev[v];
            let e = c.edge_between(v, w).unwrap();
            let f = c.faces_containing(Location::Edge { edge: e.edge, t: 0.5 })[0];
            let (a, b) = (
                c.bary_in(f, Location::Vertex(v)).unwrap(),
                c.bary_in(f, Location::Vertex(w)).unwrap(),
            );
            pieces.push(Piece::segment(f, a, b, 1));
            v = w;
        }
    }
    PLChain::new(1, pieces)
}
