//! Loops in the 1-skeleton made combinatorial, and signed degrees of PL
//! disc maps.
//!
//! A loop in the 1-skeleton is cut at one generic point `p_e` per edge.
//! Between two consecutive cut points it stays in the open star of one
//! vertex, so the sequence of signed crossings is an edge loop; cancelling
//! back-and-forth crossings gives the combinatorial loop.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex2::{chart, Complex2, Location, OrientedEdge, SIDE, TRIANGLE_AREA};
use crate::diagram::{root, DiagramError, FaceImage, VanKampenDiagram};
use crate::pushing::{common_side, de_points, point_key, push_chain, PLChain, Piece, PushCertificate, PushError, PushingConstants};

/// Distance below which a point counts as lying on a side.
pub const SKELETON_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PlError {
    #[error("loop is not closed at piece {0}")]
    NotClosed(usize),
    #[error("piece {0} leaves the 1-skeleton")]
    ExitsSkeleton(usize),
    #[error("piece {0} is not a segment")]
    NotSegment(usize),
    #[error("piece {0} refers to a missing simplex")]
    BadSimplex(usize),
    #[error("crossing sequence breaks at {0}")]
    Broken(usize),
    #[error("disc map: {0}")]
    BadDisc(String),
    #[error("triangle {0} is not aligned with its simplex")]
    Unaligned(usize),
    #[error("no generic point found in simplex {0}")]
    NoGenericPoint(usize),
    #[error(transparent)]
    Push(#[from] PushError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("json: {0}")]
    Json(String),
}

/// A closed PL path; consecutive pieces share endpoints.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PLLoop {
    pub pieces: Vec<Piece>,
}

impl PLLoop {
    pub fn new(pieces: Vec<Piece>) -> Self {
        Self { pieces }
    }

    pub fn length(&self) -> f64 {
        self.as_chain().volume()
    }

    pub fn as_chain(&self) -> PLChain {
        PLChain::new(1, self.pieces.clone())
    }

    /// Checks that every piece is a segment of a known simplex and that
    /// the path closes up.
    pub fn validate(&self, c: &Complex2) -> Result<(), PlError> {
        for (i, p) in self.pieces.iter().enumerate() {
            if !matches!(p, Piece::Segment { .. }) {
                return Err(PlError::NotSegment(i));
            }
            if p.simplex() >= c.faces().len() {
                return Err(PlError::BadSimplex(i));
            }
        }
        let n = self.pieces.len();
        for i in 0..n {
            let (p, q) = (&self.pieces[i], &self.pieces[(i + 1) % n]);
            let end = point_key(c, p.simplex(), p.endpoints().unwrap().1);
            let start = point_key(c, q.simplex(), q.endpoints().unwrap().0);
            if end != start {
                return Err(PlError::NotClosed(i));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("loop serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, PlError> {
        serde_json::from_str(text).map_err(|e| PlError::Json(e.to_string()))
    }
}

/// A closed edge path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinatorialLoop {
    pub edges: Vec<OrientedEdge>,
}

impl CombinatorialLoop {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_valid(&self, c: &Complex2) -> bool {
        let n = self.edges.len();
        (0..n).all(|i| c.end(self.edges[i]) == c.start(self.edges[(i + 1) % n]))
    }
}

// A piece of a 1-skeleton loop as an interval of a global edge.
#[derive(Clone, Copy, Debug)]
struct EdgeRun {
    edge: usize,
    from: f64,
    to: f64,
}

fn edge_runs(c: &Complex2, eta: &PLLoop) -> Result<Vec<EdgeRun>, PlError> {
    eta.validate(c)?;
    let mut runs = Vec::new();
    for (i, p) in eta.pieces.iter().enumerate() {
        let (a, b) = p.endpoints().unwrap();
        let f = p.simplex();
        let k = match common_side(a, b) {
            Some(k) => k,
            None => {
                // Degenerate pieces at a single point are harmless.
                if point_key(c, f, a) == point_key(c, f, b) {
                    continue;
                }
                return Err(PlError::ExitsSkeleton(i));
            }
        };
        let e = c.faces()[f][(k + 1) % 3];
        let param = |x: [f64; 3]| match c.locate(f, x, SKELETON_TOL) {
            Location::Vertex(v) => Some(if c.edges()[e.edge].0 == v { 0.0 } else { 1.0 }),
            Location::Edge { edge, t } if edge == e.edge => Some(t),
            _ => None,
        };
        let (Some(from), Some(to)) = (param(a), param(b)) else {
            return Err(PlError::ExitsSkeleton(i));
        };
        if from != to {
            runs.push(EdgeRun { edge: e.edge, from, to });
        }
    }
    Ok(runs)
}

/// One interior parameter per edge, uniform in the middle third and away
/// from every segment endpoint of `eta` on that edge.
pub fn generic_edge_points(c: &Complex2, eta: &PLLoop, seed: u64) -> Result<BTreeMap<usize, f64>, PlError> {
    let runs = edge_runs(c, eta)?;
    let mut excluded: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &runs {
        excluded.entry(r.edge).or_default().extend([r.from, r.to]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for e in 0..c.edges().len() {
        let bad = excluded.get(&e).map(Vec::as_slice).unwrap_or(&[]);
        let t = loop {
            let t: f64 = rng.gen_range(1.0 / 3.0..2.0 / 3.0);
            if bad.iter().all(|&x| (x - t).abs() > 1e-6) {
                break t;
            }
        };
        out.insert(e, t);
    }
    Ok(out)
}

/// Number of parameters at which `eta` passes through the point `t` of
/// `edge`, for generic `t`.
pub fn preimage_count(c: &Complex2, eta: &PLLoop, edge: usize, t: f64) -> Result<usize, PlError> {
    Ok(edge_runs(c, eta)?
        .iter()
        .filter(|r| r.edge == edge && (r.from - t) * (r.to - t) < 0.0)
        .count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthCertificate {
    pub eta_length: f64,
    /// Length of the combinatorial loop, every edge having length `√2`.
    pub straightened_length: f64,
    pub crossings: usize,
    pub comb_length: usize,
    /// Shortest distance from a cut point to an end of its edge.
    pub ell_min: f64,
    pub length_ok: bool,
    pub count_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Straightened {
    pub zeta: CombinatorialLoop,
    pub points: BTreeMap<usize, f64>,
    pub certificate: LengthCertificate,
}

/// Replaces a loop in the 1-skeleton by a combinatorial loop.
pub fn combinatorialize(eta: &PLLoop, c: &Complex2, seed: u64) -> Result<Straightened, PlError> {
    let points = generic_edge_points(c, eta, seed)?;
    let runs = edge_runs(c, eta)?;
    let mut crossings = Vec::new();
    for r in &runs {
        let p = points[&r.edge];
        if (r.from - p) * (r.to - p) < 0.0 {
            crossings.push(OrientedEdge::new(r.edge, r.to > r.from));
        }
    }
    let n = crossings.len();
    for i in 0..n {
        if c.end(crossings[i]) != c.start(crossings[(i + 1) % n]) {
            return Err(PlError::Broken(i));
        }
    }
    // An arc leaving a cut point and coming back to it collapses.
    let mut zeta: Vec<OrientedEdge> = Vec::new();
    for e in crossings.iter().copied() {
        if zeta.last() == Some(&e.reversed()) {
            zeta.pop();
        } else {
            zeta.push(e);
        }
    }
    while zeta.len() >= 2 && zeta[0] == zeta[zeta.len() - 1].reversed() {
        zeta.pop();
        zeta.remove(0);
    }
    let ell_min = points
        .values()
        .map(|&t| t.min(1.0 - t) * SIDE)
        .fold(f64::INFINITY, f64::min);
    let eta_length = eta.length();
    let straightened_length = zeta.len() as f64 * SIDE;
    let certificate = LengthCertificate {
        eta_length,
        straightened_length,
        crossings: n,
        comb_length: zeta.len(),
        ell_min,
        length_ok: straightened_length <= eta_length + 1e-9,
        count_ok: zeta.len() as f64 <= eta_length / ell_min + 1e-9,
    };
    Ok(Straightened {
        zeta: CombinatorialLoop { edges: zeta },
        points,
        certificate,
    })
}

/// Pushes a loop into the 1-skeleton, keeping the order of its pieces.
pub fn push_loop(
    gamma: &PLLoop,
    c: &Complex2,
    constants: &PushingConstants,
    seed: u64,
) -> Result<(PLLoop, PushCertificate), PlError> {
    gamma.validate(c)?;
    let out = push_chain(&gamma.as_chain(), c, constants, seed)?;
    let pieces = out.images.into_iter().flatten().collect();
    Ok((PLLoop::new(pieces), out.certificate))
}

/// Where one domain triangle goes: three points of a target simplex, in
/// barycentric coordinates, listed in the domain's counterclockwise order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleImage {
    pub simplex: usize,
    #[serde(deserialize_with = "de_points")]
    pub points: Vec<[f64; 3]>,
}

/// A PL map from a triangulated disc to a simplicial complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLDiscMap {
    pub vertices: usize,
    pub triangles: Vec<[usize; 3]>,
    pub images: Vec<TriangleImage>,
    pub target: Complex2,
}

fn signed_area(p: &[[f64; 3]]) -> f64 {
    let (a, b, c) = (chart(p[0]), chart(p[1]), chart(p[2]));
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

impl PLDiscMap {
    /// Checks that the domain is a coherently oriented disc and that
    /// adjacent triangles agree on shared vertices.
    pub fn validate(&self) -> Result<(), PlError> {
        let bad = |s: String| Err(PlError::BadDisc(s));
        if self.images.len() != self.triangles.len() {
            return bad("one image per triangle required".into());
        }
        let mut darts = BTreeSet::new();
        let mut seen: BTreeMap<usize, crate::pushing::PointKey> = BTreeMap::new();
        for (i, (t, im)) in self.triangles.iter().zip(&self.images).enumerate() {
            if im.simplex >= self.target.faces().len() || im.points.len() != 3 {
                return bad(format!("triangle {} has a malformed image", i));
            }
            for k in 0..3 {
                if t[k] >= self.vertices || t[k] == t[(k + 1) % 3] {
                    return bad(format!("triangle {} has bad vertices", i));
                }
                if !darts.insert((t[k], t[(k + 1) % 3])) {
                    return bad(format!("edge {}-{} used twice in the same direction", t[k], t[(k + 1) % 3]));
                }
                let b = im.points[k];
                if b.iter().any(|&x| x < -1e-9) || (b.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return bad(format!("triangle {} leaves its simplex", i));
                }
                let key = point_key(&self.target, im.simplex, b);
                if *seen.entry(t[k]).or_insert(key) != key {
                    return bad(format!("vertex {} has two images", t[k]));
                }
            }
        }
        // Connected with Euler characteristic one.
        let mut undirected: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        for &(a, b) in &darts {
            undirected.insert((a.min(b), a.max(b)));
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            parent[ra] = rb;
        }
        let roots: BTreeSet<usize> = (0..self.vertices).map(|v| root(&mut parent, v)).collect();
        let chi = self.vertices as i64 - undirected.len() as i64 + self.triangles.len() as i64;
        if roots.len() != 1 || chi != 1 {
            return bad(format!("domain is not a disc (components {}, euler {})", roots.len(), chi));
        }
        Ok(())
    }

    /// Orientation of a triangle's image, zero when degenerate.
    pub fn sign(&self, i: usize) -> i8 {
        let a = signed_area(&self.images[i].points);
        if a > 1e-12 {
            1
        } else if a < -1e-12 {
            -1
        } else {
            0
        }
    }

    pub fn image_area(&self, i: usize) -> f64 {
        signed_area(&self.images[i].points).abs()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.image_area(i)).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("disc map serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, PlError> {
        let m: Self = serde_json::from_str(text).map_err(|e| PlError::Json(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// The PL map induced by a simplicial diagram, sending each vertex to
    /// its image vertex inside a face containing the whole triangle.
    pub fn from_diagram(d: &VanKampenDiagram) -> Result<Self, PlError> {
        let dom = d.domain();
        let target = d.target();
        let vmap = &d.map().vertices;
        let mut triangles = Vec::new();
        let mut images = Vec::new();
        for f in 0..dom.faces().len() {
            let vs = dom.face_vertices(f);
            let imgs: Vec<usize> = vs.iter().map(|&v| vmap[v]).collect();
            let simplex = (0..target.faces().len())
                .find(|&g| {
                    let tv = target.face_vertices(g);
                    imgs.iter().all(|x| tv.contains(x))
                })
                .ok_or_else(|| PlError::BadDisc(format!("face {} has no target simplex", f)))?;
            let tv = target.face_vertices(simplex);
            let points = imgs
                .iter()
                .map(|x| {
                    let mut b = [0.0; 3];
                    b[tv.iter().position(|y| y == x).unwrap()] = 1.0;
                    b
                })
                .collect();
            triangles.push([vs[0], vs[1], vs[2]]);
            images.push(TriangleImage { simplex, points });
        }
        let m = Self {
            vertices: dom.vertex_count(),
            triangles,
            images,
            target: target.clone(),
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub simplex: usize,
    pub triangles: Vec<usize>,
    pub degree: i64,
    /// Degree measured at each generic point.
    pub samples: Vec<i64>,
    pub area: f64,
    pub bound_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub components: Vec<ComponentReport>,
    pub total_abs_degree: i64,
    pub total_area: f64,
}

impl DegreeReport {
    pub fn all_ok(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.bound_ok && c.samples.iter().all(|&d| d == c.degree))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:>7} {:>9} {:>6} {:>10} {:>5}\n", "simplex", "triangles", "degree", "area", "ok");
        for c in &self.components {
            out.push_str(&format!(
                "{:>7} {:>9} {:>6} {:>10.6} {:>5}\n",
                c.simplex,
                c.triangles.len(),
                c.degree,
                c.area,
                c.bound_ok
            ));
        }
        out.push_str(&format!("total |d| {}  area {:.6}\n", self.total_abs_degree, self.total_area));
        out
    }
}

/// Number of generic points at which each degree is measured.
pub const DEGREE_SAMPLES: usize = 5;

fn on_boundary(points: &[[f64; 3]]) -> bool {
    (0..3).any(|j| points.iter().all(|p| p[j].abs() <= SKELETON_TOL))
}

fn segment_distance(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0)
    };
    (q[0] - a[0] - t * d[0]).hypot(q[1] - a[1] - t * d[1])
}

fn strictly_inside(q: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    let s = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
    let (x, y, z) = (s(t[0], t[1]), s(t[1], t[2]), s(t[2], t[0]));
    (x > 0.0 && y > 0.0 && z > 0.0) || (x < 0.0 && y < 0.0 && z < 0.0)
}

/// Signed degree of each component of the preimage of each open simplex.
pub fn component_degrees(f: &PLDiscMap, seed: u64) -> Result<DegreeReport, PlError> {
    f.validate()?;
    let n = f.triangles.len();
    let relevant: Vec<bool> = (0..n).map(|i| !on_boundary(&f.images[i].points)).collect();
    // Triangles meeting the open simplex, joined across shared domain edges.
    let mut by_edge: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (i, t) in f.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push((i, k));
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for sides in by_edge.values() {
        if let [(i, _), (j, _)] = sides[..] {
            if relevant[i] && relevant[j] && f.images[i].simplex == f.images[j].simplex {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in (0..n).filter(|&i| relevant[i]) {
        comps.entry(root(&mut parent, i)).or_default().push(i);
    }
    let mut comps: Vec<Vec<usize>> = comps.into_values().collect();
    comps.sort_by_key(|c| (f.images[c[0]].simplex, c[0]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components = Vec::new();
    for tris in comps {
        let simplex = f.images[tris[0]].simplex;
        let charts: Vec<[[f64; 2]; 3]> = tris
            .iter()
            .map(|&i| {
                let p = &f.images[i].points;
                [chart(p[0]), chart(p[1]), chart(p[2])]
            })
            .collect();
        let mut samples = Vec::new();
        let mut attempts = 0;
        while samples.len() < DEGREE_SAMPLES {
            attempts += 1;
            if attempts > 100_000 {
                return Err(PlError::NoGenericPoint(simplex));
            }
            let (x, y): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let (x, y) = if x + y > 1.0 { (1.0 - x, 1.0 - y) } else { (x, y) };
            let b = [1.0 - x - y, x, y];
            if b.iter().any(|&v| v < 1e-6) {
                continue;
            }
            let q = chart(b);
            let generic = charts
                .iter()
                .all(|t| (0..3).all(|k| segment_distance(q, t[k], t[(k + 1) % 3]) > 1e-7));
            if !generic {
                continue;
            }
            let d: i64 = tris
                .iter()
                .zip(&charts)
                .filter(|(_, t)| strictly_inside(q, **t))
                .map(|(&i, _)| i64::from(f.sign(i)))
                .sum();
            samples.push(d);
        }
        let area: f64 = tris.iter().map(|&i| f.image_area(i)).sum();
        let degree = samples[0];
        components.push(ComponentReport {
            simplex,
            triangles: tris,
            degree,
            samples,
            area,
            bound_ok: area >= TRIANGLE_AREA * degree.unsigned_abs() as f64 - 1e-9,
        });
    }
    let total_abs_degree = components.iter().map(|c| c.degree.abs()).sum();
    let total_area = components.iter().map(|c| c.area).sum();
    Ok(DegreeReport {
        components,
        total_abs_degree,
        total_area,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscCertificate {
    /// Number of triangles mapped homeomorphically.
    pub degenerate_area: usize,
    pub total_abs_degree: i64,
    pub geometric_area: f64,
    /// `(2/√3) · geometric area`.
    pub scaled_area: f64,
    pub equality: bool,
}

/// Reads an aligned disc map as a degenerate diagram.
pub fn disc_to_degenerate_diagram(f: &PLDiscMap, seed: u64) -> Result<(VanKampenDiagram, DiscCertificate), PlError> {
    f.validate()?;
    let mut vimg = vec![usize::MAX; f.vertices];
    for (i, (t, im)) in f.triangles.iter().zip(&f.images).enumerate() {
        let tv = f.target.face_vertices(im.simplex);
        for k in 0..3 {
            let p = im.points[k];
            let corner = (0..3).find(|&j| (p[j] - 1.0).abs() <= SKELETON_TOL).ok_or(PlError::Unaligned(i))?;
            vimg[t[k]] = tv[corner];
        }
    }
    let d = VanKampenDiagram::from_triangles(f.vertices, &f.triangles, &vimg, &f.target)?;
    let report = component_degrees(f, seed)?;
    let degenerate_area = d.map().faces.iter().filter(|x| matches!(x, FaceImage::Face(_))).count();
    let geometric_area = f.area();
    let certificate = DiscCertificate {
        degenerate_area,
        total_abs_degree: report.total_abs_degree,
        geometric_area,
        scaled_area: geometric_area / TRIANGLE_AREA,
        equality: degenerate_area as i64 == report.total_abs_degree,
    };
    Ok((d, certificate))
}

/// Random disc map: the grid disc with boundary vertices sent to corners
/// and interior vertices to random points of one simplex of `target`.
/// Interior points land on corners and sides with positive probability,
/// producing folds and degenerate pieces.
pub fn random_folded_map<R: Rng>(target: &Complex2, grid: usize, rng: &mut R) -> PLDiscMap {
    let domain = crate::complex2::standard_model("disc_grid", grid).expect("grid is valid");
    let simplex = rng.gen_range(0..target.faces().len());
    let boundary: BTreeSet<usize> = domain
        .boundary_edges()
        .iter()
        .flat_map(|&e| [domain.edges()[e].0, domain.edges()[e].1])
        .collect();
    let points: Vec<[f64; 3]> = (0..domain.vertex_count())
        .map(|v| match if boundary.contains(&v) { 0 } else { rng.gen_range(0..6) } {
            0 => {
                let mut b = [0.0; 3];
                b[rng.gen_range(0..3)] = 1.0;
                b
            }
            1 => {
                let j = rng.gen_range(0..3);
                let t: f64 = rng.gen_range(0.0..1.0);
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
        })
        .collect();
    let triangles: Vec<[usize; 3]> = (0..domain.faces().len())
        .map(|f| {
            let v = domain.face_vertices(f);
            [v[0], v[1], v[2]]
        })
        .collect();
    let images = triangles
        .iter()
        .map(|t| TriangleImage {
            simplex,
            points: t.iter().map(|&v| points[v]).collect(),
        })
        .collect();
    PLDiscMap {
        vertices: domain.vertex_count(),
        triangles,
        images,
        target: target.clone(),
    }
}

/// Random aligned disc map from a randomly modified identity diagram.
pub fn random_aligned_map<R: Rng>(target: &Complex2, moves: usize, rng: &mut R) -> Result<PLDiscMap, PlError> {
    let start = VanKampenDiagram::identity(target)?;
    let d = crate::diagram::DegenerateGenerator { max_moves: moves }.generate(&start, rng)?;
    PLDiscMap::from_diagram(&d)
}

/// Whether the edges of `zeta` all come from edges met by `eta`.
pub fn edges_touched(c: &Complex2, eta: &PLLoop) -> Result<BTreeSet<usize>, PlError> {
    Ok(edge_runs(c, eta)?.iter().map(|r| r.edge).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::standard_model;

    fn on_edge(c: &Complex2, e: usize, t0: f64, t1: f64) -> Piece {
        let f = c.faces_containing(Location::Edge { edge: e, t: 0.5 })[0];
        let a = c.bary_in(f, Location::Edge { edge: e, t: t0 }).unwrap();
        let b = c.bary_in(f, Location::Edge { edge: e, t: t1 }).unwrap();
        Piece::segment(f, a, b, 1)
    }

    #[test]
    fn whole_edges_stay_the_same() {
        let c = standard_model("single_triangle", 0).unwrap();
        let eta = PLLoop::new((0..3).map(|e| on_edge(&c, e, 0.0, 1.0)).collect());
        let s = combinatorialize(&eta, &c, 3).unwrap();
        assert_eq!(s.zeta.edges, (0..3).map(OrientedEdge::fwd).collect::<Vec<_>>());
        assert!(s.certificate.length_ok && s.certificate.count_ok);
    }

    #[test]
    fn oscillation_inside_an_edge_collapses() {
        let c = standard_model("single_triangle", 0).unwrap();
        let eta = PLLoop::new(vec![on_edge(&c, 0, 0.1, 0.9), on_edge(&c, 0, 0.9, 0.1)]);
        let s = combinatorialize(&eta, &c, 1).unwrap();
        assert!(s.zeta.is_empty());
        assert_eq!(s.certificate.crossings, 2);
    }

    #[test]
    fn back_and_forth_then_across() {
        let c = standard_model("single_triangle", 0).unwrap();
        let eta = PLLoop::new(vec![
            on_edge(&c, 0, 0.0, 0.8),
            on_edge(&c, 0, 0.8, 0.2),
            on_edge(&c, 0, 0.2, 1.0),
            on_edge(&c, 1, 0.0, 1.0),
            on_edge(&c, 2, 0.0, 1.0),
        ]);
        let s = combinatorialize(&eta, &c, 5).unwrap();
        assert_eq!(preimage_count(&c, &eta, 0, s.points[&0]).unwrap(), 3);
        assert_eq!(preimage_count(&c, &eta, 1, s.points[&1]).unwrap(), 1);
        assert_eq!(s.zeta.len(), 3);
    }

    #[test]
    fn identity_disc_has_degree_one() {
        let c = standard_model("single_triangle", 0).unwrap();
        let f = PLDiscMap::from_diagram(&VanKampenDiagram::identity(&c).unwrap()).unwrap();
        let r = component_degrees(&f, 0).unwrap();
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.components[0].degree, 1);
        assert!((r.components[0].area - TRIANGLE_AREA).abs() < 1e-12);
        let (d, cert) = disc_to_degenerate_diagram(&f, 0).unwrap();
        assert_eq!(d.area(), 1);
        assert!(cert.equality);
    }

    #[test]
    fn folds_cancel_and_wraps_add() {
        let c = standard_model("single_triangle", 0).unwrap();
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        // Two domain triangles sharing the side 1-2, both sent onto σ.
        let fold = PLDiscMap {
            vertices: 4,
            triangles: vec![[0, 1, 2], [1, 3, 2]],
            images: vec![
                TriangleImage { simplex: 0, points: vec![e[0], e[1], e[2]] },
                TriangleImage { simplex: 0, points: vec![e[1], e[0], e[2]] },
            ],
            target: c.clone(),
        };
        let r = component_degrees(&fold, 1).unwrap();
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.components[0].degree, 0);
        assert!((r.total_area - 2.0 * TRIANGLE_AREA).abs() < 1e-12);
        let (d, cert) = disc_to_degenerate_diagram(&fold, 1).unwrap();
        assert_eq!(d.area(), 2);
        assert!(!cert.equality);
        // A hexagon wrapped twice around the barycenter.
        let o = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        let wrap = PLDiscMap {
            vertices: 7,
            triangles: (0..6).map(|i| [6, i, (i + 1) % 6]).collect(),
            images: (0..6)
                .map(|i| TriangleImage { simplex: 0, points: vec![o, e[i % 3], e[(i + 1) % 3]] })
                .collect(),
            target: c,
        };
        let r = component_degrees(&wrap, 2).unwrap();
        assert_eq!(r.components[0].degree, 2);
        assert!(r.components[0].samples.iter().all(|&d| d == 2));
        assert!((r.total_area - 2.0 * TRIANGLE_AREA).abs() < 1e-12);
    }

    #[test]
    fn random_maps_satisfy_the_bound() {
        let c = standard_model("disc_grid", 2).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_folded_map(&c, 2, &mut rng);
            assert!(component_degrees(&f, seed).unwrap().all_ok());
            let g = random_aligned_map(&c, 4, &mut rng).unwrap();
            assert!(component_degrees(&g, seed).unwrap().all_ok());
        }
    }

    #[test]
    fn pushed_loops_become_combinatorial() {
        let c = standard_model("disc_grid", 3).unwrap();
        let k = crate::pushing::pushing_constants(1, 2, crate::pushing::DEFAULT_R).unwrap();
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gamma = PLLoop::new(crate::pushing::random_path(&c, 5, true, &mut rng).pieces);
            let (eta, cert) = push_loop(&gamma, &c, &k, seed).unwrap();
            let s = combinatorialize(&eta, &c, seed).unwrap();
            assert!(s.zeta.is_valid(&c));
            assert!(s.certificate.length_ok && s.certificate.count_ok);
            assert!(eta.length() <= k.c.unwrap() * gamma.length() + 1e-9);
            assert!(cert.all_ok());
            let touched = edges_touched(&c, &eta).unwrap();
            assert!(s.zeta.edges.iter().all(|e| touched.contains(&e.edge)));
        }
    }
}
