//! Polygonal and simplicial 2-complexes.
//!
//! Every 2-simplex carries the same metric: the standard embedding with
//! vertices `e₁, e₂, e₃` in 3-space. A point of a face is therefore given by
//! its barycentric coordinates, which are also its ambient coordinates. The
//! face vertex order is the start vertex of each oriented edge of the
//! attaching cycle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::{Presentation, PresentationError};

/// Side length of the standard 2-simplex.
pub const SIDE: f64 = std::f64::consts::SQRT_2;
/// Area of the standard 2-simplex, `√3/2`. Switching to the side-one
/// equilateral normalization means changing this and [`SIDE`].
pub const TRIANGLE_AREA: f64 = 0.866_025_403_784_438_6;
/// Inradius `1/√6`.
pub const INRADIUS: f64 = 0.408_248_290_463_863;
/// Circumradius `√(2/3)`, the largest distance from the barycenter to the boundary.
pub const CIRCUMRADIUS: f64 = 0.816_496_580_927_726;
/// Barycenter of the standard simplex.
pub const BARYCENTER: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("edge {edge} has endpoint {vertex} but there are {count} vertices")]
    BadVertex { edge: usize, vertex: usize, count: usize },
    #[error("face {face} refers to missing edge {edge}")]
    BadEdge { face: usize, edge: usize },
    #[error("face {0} has an empty attaching cycle")]
    EmptyFace(usize),
    #[error("face {0} is not a closed edge path")]
    OpenCycle(usize),
    #[error("not simplicial: {0}")]
    NotSimplicial(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// An edge together with a traversal direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OrientedEdge {
    pub edge: usize,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn new(edge: usize, forward: bool) -> Self {
        Self { edge, forward }
    }

    pub fn fwd(edge: usize) -> Self {
        Self::new(edge, true)
    }

    pub fn rev(edge: usize) -> Self {
        Self::new(edge, false)
    }

    pub fn reversed(self) -> Self {
        Self::new(self.edge, !self.forward)
    }
}

impl fmt::Display for OrientedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.edge, if self.forward { '+' } else { '-' })
    }
}

impl FromStr for OrientedEdge {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (num, sign) = s.split_at(s.len().saturating_sub(1));
        let forward = match sign {
            "+" => true,
            "-" => false,
            _ => return Err(format!("`{}` should end in + or -", s)),
        };
        let edge = num.parse().map_err(|_| format!("bad edge index in `{}`", s))?;
        Ok(Self { edge, forward })
    }
}

impl TryFrom<String> for OrientedEdge {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<OrientedEdge> for String {
    fn from(e: OrientedEdge) -> String {
        e.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawComplex", into = "RawComplex")]
pub struct Complex2 {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    faces: Vec<Vec<OrientedEdge>>,
    simplicial: bool,
}

#[derive(Serialize, Deserialize)]
struct RawComplex {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    faces: Vec<Vec<OrientedEdge>>,
}

impl TryFrom<RawComplex> for Complex2 {
    type Error = ComplexError;
    fn try_from(r: RawComplex) -> Result<Self, ComplexError> {
        Complex2::new(r.vertices, r.edges, r.faces)
    }
}

impl From<Complex2> for RawComplex {
    fn from(c: Complex2) -> Self {
        RawComplex {
            vertices: c.vertex_count,
            edges: c.edges,
            faces: c.faces,
        }
    }
}

impl Complex2 {
    /// Validates the attaching cycles and infers the simplicial flag.
    pub fn new(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        faces: Vec<Vec<OrientedEdge>>,
    ) -> Result<Self, ComplexError> {
        let mut c = Self {
            vertex_count,
            edges,
            faces,
            simplicial: false,
        };
        c.check_cycles()?;
        c.simplicial = c.simplicial_violation().is_none();
        Ok(c)
    }

    /// Like [`Complex2::new`], but a claimed simplicial flag must hold.
    pub fn with_flag(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        faces: Vec<Vec<OrientedEdge>>,
        simplicial: bool,
    ) -> Result<Self, ComplexError> {
        let mut c = Self::new(vertex_count, edges, faces)?;
        if simplicial && !c.simplicial {
            return Err(ComplexError::NotSimplicial(c.simplicial_violation().unwrap()));
        }
        c.simplicial = simplicial;
        Ok(c)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn faces(&self) -> &[Vec<OrientedEdge>] {
        &self.faces
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    pub fn start(&self, e: OrientedEdge) -> usize {
        let (t, h) = self.edges[e.edge];
        if e.forward {
            t
        } else {
            h
        }
    }

    pub fn end(&self, e: OrientedEdge) -> usize {
        self.start(e.reversed())
    }

    /// Start vertices of the attaching cycle of face `f`, in order.
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        self.faces[f].iter().map(|&e| self.start(e)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// The oriented edge running from `u` to `v`, if there is one.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<OrientedEdge> {
        self.edges.iter().enumerate().find_map(|(i, &(t, h))| {
            if (t, h) == (u, v) {
                Some(OrientedEdge::fwd(i))
            } else if (t, h) == (v, u) {
                Some(OrientedEdge::rev(i))
            } else {
                None
            }
        })
    }

    /// Faces containing each edge, with the position of the edge in the cycle.
    pub fn edge_faces(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (f, cycle) in self.faces.iter().enumerate() {
            for (k, e) in cycle.iter().enumerate() {
                out[e.edge].push((f, k));
            }
        }
        out
    }

    /// Faces containing each vertex.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for f in 0..self.faces.len() {
            let mut vs = self.face_vertices(f);
            vs.sort_unstable();
            vs.dedup();
            for v in vs {
                out[v].push(f);
            }
        }
        out
    }

    /// Edges whose closure contains each vertex.
    pub fn vertex_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for (i, &(t, h)) in self.edges.iter().enumerate() {
            out[t].push(i);
            if h != t {
                out[h].push(i);
            }
        }
        out
    }

    /// Edges lying on exactly one face.
    pub fn boundary_edges(&self) -> Vec<usize> {
        self.edge_faces()
            .iter()
            .enumerate()
            .filter(|(_, fs)| fs.len() == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// Re-checks every invariant, including the simplicial ones when the
    /// flag is set.
    pub fn validate(&self) -> Result<(), ComplexError> {
        self.check_cycles()?;
        if self.simplicial {
            if let Some(why) = self.simplicial_violation() {
                return Err(ComplexError::NotSimplicial(why));
            }
        }
        Ok(())
    }

    fn check_cycles(&self) -> Result<(), ComplexError> {
        for (i, &(t, h)) in self.edges.iter().enumerate() {
            for v in [t, h] {
                if v >= self.vertex_count {
                    return Err(ComplexError::BadVertex {
                        edge: i,
                        vertex: v,
                        count: self.vertex_count,
                    });
                }
            }
        }
        for (f, cycle) in self.faces.iter().enumerate() {
            if cycle.is_empty() {
                return Err(ComplexError::EmptyFace(f));
            }
            if let Some(e) = cycle.iter().find(|e| e.edge >= self.edges.len()) {
                return Err(ComplexError::BadEdge { face: f, edge: e.edge });
            }
            let m = cycle.len();
            if (0..m).any(|k| self.end(cycle[k]) != self.start(cycle[(k + 1) % m])) {
                return Err(ComplexError::OpenCycle(f));
            }
        }
        Ok(())
    }

    /// First simplicial invariant that fails, if any.
    pub fn simplicial_violation(&self) -> Option<String> {
        let mut pairs = BTreeSet::new();
        for (i, &(t, h)) in self.edges.iter().enumerate() {
            if t == h {
                return Some(format!("edge {} is a loop", i));
            }
            if !pairs.insert((t.min(h), t.max(h))) {
                return Some(format!("edge {} repeats the endpoints {}-{}", i, t, h));
            }
        }
        let mut triples = BTreeSet::new();
        for f in 0..self.faces.len() {
            if self.faces[f].len() != 3 {
                return Some(format!("face {} has {} sides", f, self.faces[f].len()));
            }
            let mut vs = self.face_vertices(f);
            vs.sort_unstable();
            if vs[0] == vs[1] || vs[1] == vs[2] {
                return Some(format!("face {} repeats a vertex", f));
            }
            if !triples.insert(vs.clone()) {
                return Some(format!("face {} repeats the vertex triple {:?}", f, vs));
            }
        }
        None
    }

    /// Canonical text form: `V n`, then one `E tail head` per edge, then one
    /// `F` line per face listing signed edges.
    pub fn serialize(&self) -> String {
        let mut out = format!("V {}\n", self.vertex_count);
        for (t, h) in &self.edges {
            out.push_str(&format!("E {} {}\n", t, h));
        }
        for cycle in &self.faces {
            let items: Vec<String> = cycle.iter().map(|e| e.to_string()).collect();
            out.push_str(&format!("F {}\n", items.join(" ")));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ComplexError> {
        let mut vertex_count = None;
        let mut edges = Vec::new();
        let mut faces = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let bad = |msg: String| ComplexError::Parse { line, msg };
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let tag = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("`{}` is not an index", s)));
            match tag {
                "V" => {
                    if rest.len() != 1 || vertex_count.is_some() {
                        return Err(bad("expected a single `V n` line".into()));
                    }
                    vertex_count = Some(num(rest[0])?);
                }
                "E" => {
                    if rest.len() != 2 {
                        return Err(bad("expected `E tail head`".into()));
                    }
                    edges.push((num(rest[0])?, num(rest[1])?));
                }
                "F" => {
                    let cycle = rest
                        .iter()
                        .map(|s| s.parse::<OrientedEdge>().map_err(&bad))
                        .collect::<Result<Vec<_>, _>>()?;
                    faces.push(cycle);
                }
                other => return Err(bad(format!("unknown section `{}`", other))),
            }
        }
        let vertex_count = vertex_count.ok_or(ComplexError::Parse {
            line: 0,
            msg: "missing `V n` line".into(),
        })?;
        Self::new(vertex_count, edges, faces)
    }
}

impl fmt::Display for Complex2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// One vertex, one loop edge per generator and one face per relator spelled
/// along those loops.
pub fn presentation_complex(p: &Presentation) -> Result<Complex2, ComplexError> {
    let edges = vec![(0, 0); p.generator_count()];
    let faces = p
        .relators()
        .iter()
        .map(|r| {
            r.letters()
                .iter()
                .map(|&l| OrientedEdge::new(l.unsigned_abs() as usize - 1, l > 0))
                .collect()
        })
        .collect();
    Complex2::new(1, edges, faces)
}

/// A subdivision together with the face of the input containing each new face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    pub complex: Complex2,
    pub provenance: Vec<usize>,
}

/// Cones every face from a new center, then applies barycentric passes until
/// the simplicial invariants hold. Simplicial input is returned unchanged.
pub fn triangulate(c: &Complex2) -> Triangulation {
    if c.simplicial {
        return Triangulation {
            complex: c.clone(),
            provenance: (0..c.faces.len()).collect(),
        };
    }
    let mut t = cone(c);
    while !t.complex.simplicial {
        let next = barycentric(&t.complex);
        t = Triangulation {
            provenance: next.provenance.iter().map(|&f| t.provenance[f]).collect(),
            complex: next.complex,
        };
    }
    t
}

fn cone(c: &Complex2) -> Triangulation {
    let mut vertex_count = c.vertex_count;
    let mut edges = c.edges.clone();
    let mut faces = Vec::new();
    let mut provenance = Vec::new();
    for (f, cycle) in c.faces.iter().enumerate() {
        let center = vertex_count;
        vertex_count += 1;
        // One spoke per corner, so repeated boundary vertices stay separate.
        let first = edges.len();
        for &e in cycle {
            edges.push((center, c.start(e)));
        }
        let m = cycle.len();
        for k in 0..m {
            faces.push(vec![
                cycle[k],
                OrientedEdge::rev(first + (k + 1) % m),
                OrientedEdge::fwd(first + k),
            ]);
            provenance.push(f);
        }
    }
    Triangulation {
        complex: Complex2::new(vertex_count, edges, faces).expect("coning preserves cycles"),
        provenance,
    }
}

/// One barycentric pass over a complex whose faces are all triangles.
fn barycentric(c: &Complex2) -> Triangulation {
    let nv = c.vertex_count;
    let ne = c.edges.len();
    let mid = |e: usize| nv + e;
    let mut vertex_count = nv + ne;
    let mut edges = Vec::new();
    for (i, &(t, h)) in c.edges.iter().enumerate() {
        edges.push((t, mid(i)));
        edges.push((mid(i), h));
    }
    let half = |e: OrientedEdge, second: bool| {
        // Oriented half of `e` running from its start to the midpoint, or
        // from the midpoint to its end.
        match (e.forward, second) {
            (true, false) => OrientedEdge::fwd(2 * e.edge),
            (true, true) => OrientedEdge::fwd(2 * e.edge + 1),
            (false, false) => OrientedEdge::rev(2 * e.edge + 1),
            (false, true) => OrientedEdge::rev(2 * e.edge),
        }
    };
    let mut faces = Vec::new();
    let mut provenance = Vec::new();
    for (f, cycle) in c.faces.iter().enumerate() {
        let center = vertex_count;
        vertex_count += 1;
        let m = cycle.len();
        let corner0 = edges.len();
        for &e in cycle {
            edges.push((center, c.start(e)));
        }
        let mid0 = edges.len();
        for &e in cycle {
            edges.push((center, mid(e.edge)));
        }
        for k in 0..m {
            let e = cycle[k];
            faces.push(vec![
                half(e, false),
                OrientedEdge::rev(mid0 + k),
                OrientedEdge::fwd(corner0 + k),
            ]);
            faces.push(vec![
                half(e, true),
                OrientedEdge::rev(corner0 + (k + 1) % m),
                OrientedEdge::fwd(mid0 + k),
            ]);
            provenance.extend([f, f]);
        }
    }
    Triangulation {
        complex: Complex2::new(vertex_count, edges, faces).expect("subdivision preserves cycles"),
        provenance,
    }
}

/// Deterministic triangulated test models: `disc_grid`, `single_triangle`
/// and `annulus`. Faces are oriented counterclockwise in [`model_layout`].
pub fn standard_model(name: &str, size: usize) -> Result<Complex2, ComplexError> {
    match name {
        "disc_grid" => Ok(disc_grid(size)),
        "single_triangle" => Ok(single_triangle()),
        "annulus" => Ok(annulus(size)),
        other => Err(ComplexError::UnknownModel(other.to_string())),
    }
}

/// Planar positions of the vertices of a standard model.
pub fn model_layout(name: &str, size: usize) -> Result<Vec<[f64; 2]>, ComplexError> {
    match name {
        "disc_grid" => {
            let n = size.max(1);
            Ok((0..=n)
                .flat_map(|j| (0..=n).map(move |i| [i as f64, j as f64]))
                .collect())
        }
        "single_triangle" => Ok(vec![[0.0, 0.0], [SIDE, 0.0], [SIDE / 2.0, SIDE * 0.75f64.sqrt()]]),
        "annulus" => {
            let n = size.max(1);
            Ok((0..=n)
                .flat_map(|j| {
                    (0..6).map(move |k| {
                        let a = std::f64::consts::PI * (k as f64) / 3.0 + 0.5 * j as f64;
                        let rad = 1.0 + j as f64;
                        [rad * a.cos(), rad * a.sin()]
                    })
                })
                .collect())
        }
        other => Err(ComplexError::UnknownModel(other.to_string())),
    }
}

fn disc_grid(n: usize) -> Complex2 {
    let n = n.max(1);
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut index = HashMap::new();
    let mut edges = Vec::new();
    let mut add = |a: usize, b: usize| {
        index.insert((a, b), edges.len());
        edges.push((a, b));
    };
    for j in 0..=n {
        for i in 0..n {
            add(v(i, j), v(i + 1, j));
        }
    }
    for j in 0..n {
        for i in 0..=n {
            add(v(i, j), v(i, j + 1));
        }
    }
    for j in 0..n {
        for i in 0..n {
            add(v(i, j), v(i + 1, j + 1));
        }
    }
    let e = |a: usize, b: usize| OrientedEdge::fwd(index[&(a, b)]);
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..n {
            faces.push(vec![
                e(v(i, j), v(i + 1, j)),
                e(v(i + 1, j), v(i + 1, j + 1)),
                e(v(i, j), v(i + 1, j + 1)).reversed(),
            ]);
            faces.push(vec![
                e(v(i, j), v(i + 1, j + 1)),
                e(v(i, j + 1), v(i + 1, j + 1)).reversed(),
                e(v(i, j), v(i, j + 1)).reversed(),
            ]);
        }
    }
    Complex2::new((n + 1) * (n + 1), edges, faces).expect("grid is valid")
}

fn single_triangle() -> Complex2 {
    Complex2::new(
        3,
        vec![(0, 1), (1, 2), (2, 0)],
        vec![vec![OrientedEdge::fwd(0), OrientedEdge::fwd(1), OrientedEdge::fwd(2)]],
    )
    .expect("triangle is valid")
}

fn annulus(n: usize) -> Complex2 {
    let n = n.max(1);
    let v = |j: usize, k: usize| j * 6 + k % 6;
    let mut index = BTreeMap::new();
    let mut edges = Vec::new();
    let mut add = |a: usize, b: usize| {
        index.insert((a, b), edges.len());
        edges.push((a, b));
    };
    for j in 0..=n {
        for k in 0..6 {
            add(v(j, k), v(j, k + 1));
        }
    }
    for j in 0..n {
        for k in 0..6 {
            add(v(j, k), v(j + 1, k));
            add(v(j, k), v(j + 1, k + 1));
        }
    }
    let e = |a: usize, b: usize| OrientedEdge::fwd(index[&(a, b)]);
    let mut faces = Vec::new();
    for j in 0..n {
        for k in 0..6 {
            faces.push(vec![
                e(v(j, k), v(j, k + 1)),
                e(v(j, k + 1), v(j + 1, k + 1)),
                e(v(j, k), v(j + 1, k + 1)).reversed(),
            ]);
            faces.push(vec![
                e(v(j, k), v(j + 1, k + 1)),
                e(v(j + 1, k), v(j + 1, k + 1)).reversed(),
                e(v(j, k), v(j + 1, k)).reversed(),
            ]);
        }
    }
    Complex2::new(6 * (n + 1), edges, faces).expect("annulus is valid")
}

/// Planar chart of the standard simplex: `e₁ ↦ (0,0)`, `e₂ ↦ (√2,0)`,
/// `e₃ ↦ (√2/2, √6/2)`. The chart is an isometry.
pub fn chart(b: [f64; 3]) -> [f64; 2] {
    let h = SIDE * 0.75f64.sqrt();
    [b[1] * SIDE + b[2] * SIDE / 2.0, b[2] * h]
}

pub fn from_chart(p: [f64; 2]) -> [f64; 3] {
    let h = SIDE * 0.75f64.sqrt();
    let b2 = p[1] / h;
    let b1 = (p[0] - b2 * SIDE / 2.0) / SIDE;
    [1.0 - b1 - b2, b1, b2]
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Where a point of a simplicial complex lives, canonically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Vertex(usize),
    /// Parameter `t ∈ (0,1)` measured from the tail of the edge.
    Edge { edge: usize, t: f64 },
    Face { face: usize, bary: [f64; 3] },
}

impl Complex2 {
    /// Canonical location of the point with barycentric coordinates `b` in
    /// face `f`; coordinates within `tol` of zero are snapped.
    pub fn locate(&self, f: usize, b: [f64; 3], tol: f64) -> Location {
        let vs = self.face_vertices(f);
        let zero: Vec<bool> = b.iter().map(|x| x.abs() <= tol).collect();
        let nonzero: Vec<usize> = (0..3).filter(|&j| !zero[j]).collect();
        match nonzero.len() {
            0 | 1 => {
                let j = nonzero.first().copied().unwrap_or_else(|| {
                    (0..3).max_by(|&a, &c| b[a].total_cmp(&b[c])).unwrap()
                });
                Location::Vertex(vs[j])
            }
            2 => {
                let (j, k) = (nonzero[0], nonzero[1]);
                // The side from corner j to corner k is cycle[j] when k = j+1.
                let (e, from_start) = if k == j + 1 {
                    (self.faces[f][j], true)
                } else {
                    (self.faces[f][2], false)
                };
                let s = b[j] + b[k];
                // Fraction of the way from the start of the oriented side.
                let along = if from_start { b[k] / s } else { b[j] / s };
                let t = if e.forward { along } else { 1.0 - along };
                Location::Edge { edge: e.edge, t }
            }
            _ => {
                let s = b[0] + b[1] + b[2];
                Location::Face {
                    face: f,
                    bary: [b[0] / s, b[1] / s, b[2] / s],
                }
            }
        }
    }

    /// Barycentric coordinates of `loc` inside face `f`, if `f` contains it.
    pub fn bary_in(&self, f: usize, loc: Location) -> Option<[f64; 3]> {
        let vs = self.face_vertices(f);
        match loc {
            Location::Vertex(v) => {
                let j = vs.iter().position(|&x| x == v)?;
                let mut b = [0.0; 3];
                b[j] = 1.0;
                Some(b)
            }
            Location::Edge { edge, t } => {
                let (tail, head) = self.edges[edge];
                let jt = vs.iter().position(|&x| x == tail)?;
                let jh = vs.iter().position(|&x| x == head)?;
                if !self.faces[f].iter().any(|e| e.edge == edge) {
                    return None;
                }
                let mut b = [0.0; 3];
                b[jt] = 1.0 - t;
                b[jh] = t;
                Some(b)
            }
            Location::Face { face, bary } => (face == f).then_some(bary),
        }
    }

    /// Faces whose closure contains `loc`.
    pub fn faces_containing(&self, loc: Location) -> Vec<usize> {
        match loc {
            Location::Vertex(v) => (0..self.faces.len())
                .filter(|&f| self.face_vertices(f).contains(&v))
                .collect(),
            Location::Edge { edge, .. } => (0..self.faces.len())
                .filter(|&f| self.faces[f].iter().any(|e| e.edge == edge))
                .collect(),
            Location::Face { face, .. } => vec![face],
        }
    }
}
