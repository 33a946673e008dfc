//! Van Kampen diagrams, combinatorial and degenerate, and their collapse.
//!
//! Planarity is carried by darts. Every face cycle is read with the face on
//! its left, and the boundary cycle with the diagram on its left, so the
//! outer face is the reversed boundary. A diagram is valid when every dart
//! lies on exactly one of these cycles, the rotation `σ(d) = φ(d⁻¹)` has a
//! single orbit at every vertex, the domain is connected and `χ = 1`.
//!
//! A degenerate diagram is a simplicial map from a triangulated disc to a
//! simplicial target; its area counts the triangles that land on a
//! 2-simplex. [`collapse`] turns it into a combinatorial diagram with the
//! same boundary word.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex2::{presentation_complex, Complex2, ComplexError, OrientedEdge};
use crate::presentation::{Presentation, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("boundary is not a closed edge path")]
    OpenBoundary,
    #[error("dart {0} lies on {1} cycles")]
    DartCount(OrientedEdge, usize),
    #[error("vertex {0} has {1} rotation orbits")]
    Rotation(usize, usize),
    #[error("domain is disconnected")]
    Disconnected,
    #[error("euler characteristic is {0}, expected 1")]
    Euler(i64),
    #[error("map: {0}")]
    Map(String),
    #[error("boundary edge {0} is mapped to a vertex")]
    BoundaryCollapsed(usize),
    #[error("edge {0} has more than two sides after collapsing")]
    NonManifold(usize),
    #[error("excised component has euler characteristic {0}, expected 2")]
    NotSphere(i64),
    #[error("input is not a degenerate diagram over a simplicial target")]
    NotSimplicial,
    #[error("triangle list does not bound a disc: {0}")]
    NotADisc(String),
    #[error("oracle state limit {0} reached")]
    ResourceLimit(usize),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeImage {
    Edge(OrientedEdge),
    Vertex(usize),
}

impl EdgeImage {
    pub fn reversed(self) -> Self {
        match self {
            Self::Edge(e) => Self::Edge(e.reversed()),
            v => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceImage {
    Face(usize),
    Edge(usize),
    Vertex(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMap {
    pub edges: Vec<EdgeImage>,
    pub faces: Vec<FaceImage>,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanKampenDiagram {
    domain: Complex2,
    boundary: Vec<OrientedEdge>,
    map: CellMap,
    degenerate: bool,
    target: Complex2,
}

// Keys are in alphabetical order so the JSON is canonical.
#[derive(Serialize, Deserialize)]
struct RawDiagram {
    boundary: Vec<OrientedEdge>,
    degenerate: bool,
    edges: Vec<(usize, usize)>,
    faces: Vec<Vec<OrientedEdge>>,
    map: CellMap,
    rotation: Vec<Vec<OrientedEdge>>,
    target: Complex2,
    vertices: usize,
}

fn dart(e: OrientedEdge) -> usize {
    2 * e.edge + usize::from(!e.forward)
}

fn undart(d: usize) -> OrientedEdge {
    OrientedEdge::new(d / 2, d % 2 == 0)
}

impl VanKampenDiagram {
    pub fn new(
        domain: Complex2,
        boundary: Vec<OrientedEdge>,
        map: CellMap,
        degenerate: bool,
        target: Complex2,
    ) -> Result<Self, DiagramError> {
        let d = Self {
            domain,
            boundary,
            map,
            degenerate,
            target,
        };
        d.validate()?;
        Ok(d)
    }

    /// Builds a degenerate (or combinatorial) diagram from counterclockwise
    /// vertex triples and a vertex map into a simplicial target. The
    /// boundary starts at its smallest vertex.
    pub fn from_triangles(
        vertex_count: usize,
        triangles: &[[usize; 3]],
        images: &[usize],
        target: &Complex2,
    ) -> Result<Self, DiagramError> {
        if !target.is_simplicial() {
            return Err(DiagramError::NotSimplicial);
        }
        if images.len() != vertex_count {
            return Err(DiagramError::Map("one image per vertex required".into()));
        }
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut faces = Vec::new();
        for t in triangles {
            let mut cycle = Vec::new();
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                cycle.push(OrientedEdge::new(e, a < b));
            }
            faces.push(cycle);
        }
        let domain = Complex2::new(vertex_count, edges, faces)?;
        let mut used = vec![0usize; 2 * domain.edges().len()];
        for cycle in domain.faces() {
            for &e in cycle {
                used[dart(e)] += 1;
            }
        }
        let mut next: BTreeMap<usize, OrientedEdge> = BTreeMap::new();
        for d in 0..used.len() {
            if used[d] == 1 && used[d ^ 1] == 0 {
                let e = undart(d);
                if next.insert(domain.start(e), e).is_some() {
                    return Err(DiagramError::NotADisc(format!(
                        "boundary pinches at vertex {}",
                        domain.start(e)
                    )));
                }
            }
        }
        let mut boundary = Vec::new();
        if let Some((&first, _)) = next.iter().next() {
            let mut v = first;
            loop {
                let e = next[&v];
                boundary.push(e);
                v = domain.end(e);
                if v == first || boundary.len() > next.len() {
                    break;
                }
            }
            if boundary.len() != next.len() {
                return Err(DiagramError::NotADisc("boundary has several cycles".into()));
            }
        }
        let map = simplicial_cell_map(&domain, images, target)?;
        let degenerate = map.faces.iter().any(|f| !matches!(f, FaceImage::Face(_)))
            || map.edges.iter().any(|e| matches!(e, EdgeImage::Vertex(_)));
        Self::new(domain, boundary, map, degenerate, target.clone())
    }

    /// The identity diagram of a simplicial disc.
    pub fn identity(target: &Complex2) -> Result<Self, DiagramError> {
        let triangles: Vec<[usize; 3]> = (0..target.faces().len())
            .map(|f| {
                let v = target.face_vertices(f);
                [v[0], v[1], v[2]]
            })
            .collect();
        let images: Vec<usize> = (0..target.vertex_count()).collect();
        Self::from_triangles(target.vertex_count(), &triangles, &images, target)
    }

    pub fn domain(&self) -> &Complex2 {
        &self.domain
    }

    pub fn boundary(&self) -> &[OrientedEdge] {
        &self.boundary
    }

    pub fn map(&self) -> &CellMap {
        &self.map
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn target(&self) -> &Complex2 {
        &self.target
    }

    pub fn image_of(&self, e: OrientedEdge) -> EdgeImage {
        let img = self.map.edges[e.edge];
        if e.forward {
            img
        } else {
            img.reversed()
        }
    }

    /// Images of the boundary darts, in order.
    pub fn boundary_loop(&self) -> Vec<EdgeImage> {
        self.boundary.iter().map(|&e| self.image_of(e)).collect()
    }

    /// Boundary word after dropping collapsed edges.
    pub fn boundary_word(&self) -> Vec<OrientedEdge> {
        collapse_boundary_loop(&self.boundary_loop())
    }

    /// Triangles mapped homeomorphically onto a 2-cell.
    pub fn area(&self) -> usize {
        degenerate_area(self)
    }

    /// Counterclockwise outgoing darts at every vertex.
    pub fn rotation(&self) -> Vec<Vec<OrientedEdge>> {
        let (phi, _) = self.face_permutation();
        let mut out = vec![Vec::new(); self.domain.vertex_count()];
        let mut seen = vec![false; phi.len()];
        for d in 0..phi.len() {
            if seen[d] || phi[d] == usize::MAX {
                continue;
            }
            let v = self.domain.start(undart(d));
            if !out[v].is_empty() {
                continue;
            }
            let mut x = d;
            loop {
                seen[x] = true;
                out[v].push(undart(x));
                x = phi[x ^ 1];
                if x == d || x == usize::MAX || seen[x] {
                    break;
                }
            }
        }
        out
    }

    // Successor of each dart along the cycle containing it, and the number
    // of cycles through each dart.
    fn face_permutation(&self) -> (Vec<usize>, Vec<usize>) {
        let n = 2 * self.domain.edges().len();
        let mut phi = vec![usize::MAX; n];
        let mut count = vec![0usize; n];
        let outer: Vec<OrientedEdge> = self.boundary.iter().rev().map(|e| e.reversed()).collect();
        for cycle in self.domain.faces().iter().chain(std::iter::once(&outer)) {
            let m = cycle.len();
            for k in 0..m {
                let d = dart(cycle[k]);
                count[d] += 1;
                phi[d] = dart(cycle[(k + 1) % m]);
            }
        }
        (phi, count)
    }

    pub fn validate(&self) -> Result<(), DiagramError> {
        self.domain.validate()?;
        let c = &self.domain;
        let m = self.boundary.len();
        if self.boundary.iter().any(|e| e.edge >= c.edges().len()) {
            return Err(DiagramError::OpenBoundary);
        }
        if (0..m).any(|k| c.end(self.boundary[k]) != c.start(self.boundary[(k + 1) % m])) {
            return Err(DiagramError::OpenBoundary);
        }
        if m == 0 && (c.vertex_count() != 1 || !c.edges().is_empty() || !c.faces().is_empty()) {
            return Err(DiagramError::OpenBoundary);
        }
        let (phi, count) = self.face_permutation();
        if let Some(d) = (0..count.len()).find(|&d| count[d] != 1) {
            return Err(DiagramError::DartCount(undart(d), count[d]));
        }
        let mut orbits = vec![0usize; c.vertex_count()];
        let mut seen = vec![false; phi.len()];
        for d in 0..phi.len() {
            if seen[d] {
                continue;
            }
            orbits[c.start(undart(d))] += 1;
            let mut x = d;
            while !seen[x] {
                seen[x] = true;
                x = phi[x ^ 1];
            }
        }
        if !c.edges().is_empty() {
            if let Some(v) = (0..orbits.len()).find(|&v| orbits[v] != 1) {
                return Err(DiagramError::Rotation(v, orbits[v]));
            }
        }
        let mut reach = vec![false; c.vertex_count()];
        let adj = c.vertex_edges();
        let mut stack = vec![0];
        reach[0] = true;
        while let Some(v) = stack.pop() {
            for &e in &adj[v] {
                let (t, h) = c.edges()[e];
                for u in [t, h] {
                    if !reach[u] {
                        reach[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        if reach.iter().any(|r| !r) {
            return Err(DiagramError::Disconnected);
        }
        if c.euler_characteristic() != 1 {
            return Err(DiagramError::Euler(c.euler_characteristic()));
        }
        self.validate_map()
    }

    fn validate_map(&self) -> Result<(), DiagramError> {
        let (c, t, map) = (&self.domain, &self.target, &self.map);
        let bad = |s: String| Err(DiagramError::Map(s));
        if map.vertices.len() != c.vertex_count()
            || map.edges.len() != c.edges().len()
            || map.faces.len() != c.faces().len()
        {
            return bad("cell map sizes do not match the domain".into());
        }
        if let Some(v) = map.vertices.iter().find(|&&v| v >= t.vertex_count()) {
            return bad(format!("vertex image {} is not a target vertex", v));
        }
        for (i, &(a, b)) in c.edges().iter().enumerate() {
            let (fa, fb) = (map.vertices[a], map.vertices[b]);
            match map.edges[i] {
                EdgeImage::Edge(e) => {
                    if e.edge >= t.edges().len() || t.start(e) != fa || t.end(e) != fb {
                        return bad(format!("edge {} image {} disagrees with its endpoints", i, e));
                    }
                }
                EdgeImage::Vertex(v) => {
                    if !self.degenerate {
                        return bad(format!("edge {} collapses in a combinatorial diagram", i));
                    }
                    if fa != v || fb != v {
                        return bad(format!("edge {} collapses to {} but its ends do not", i, v));
                    }
                }
            }
        }
        for f in 0..c.faces().len() {
            let images: Vec<EdgeImage> = c.faces()[f].iter().map(|&e| self.image_of(e)).collect();
            let verts: BTreeSet<usize> = c.face_vertices(f).iter().map(|&v| map.vertices[v]).collect();
            match map.faces[f] {
                FaceImage::Face(k) => {
                    if k >= t.faces().len() || face_orientation(&images, &t.faces()[k]).is_none() {
                        return bad(format!("face {} is not mapped homeomorphically onto {}", f, k));
                    }
                }
                FaceImage::Edge(e) => {
                    let (a, b) = *t
                        .edges()
                        .get(e)
                        .ok_or_else(|| DiagramError::Map(format!("no target edge {}", e)))?;
                    if !self.degenerate || verts != BTreeSet::from([a, b]) || a == b {
                        return bad(format!("face {} does not collapse onto edge {}", f, e));
                    }
                }
                FaceImage::Vertex(v) => {
                    if !self.degenerate || verts != BTreeSet::from([v]) {
                        return bad(format!("face {} does not collapse onto vertex {}", f, v));
                    }
                }
            }
        }
        if self.degenerate && !(c.is_simplicial() && t.is_simplicial()) {
            return Err(DiagramError::NotSimplicial);
        }
        Ok(())
    }

    /// `+1` or `-1` for faces mapped homeomorphically, by orientation.
    pub fn face_sign(&self, f: usize) -> Option<i8> {
        let FaceImage::Face(k) = self.map.faces[f] else { return None };
        let images: Vec<EdgeImage> = self.domain.faces()[f].iter().map(|&e| self.image_of(e)).collect();
        face_orientation(&images, &self.target.faces()[k])
    }

    pub fn to_json(&self) -> String {
        let raw = RawDiagram {
            boundary: self.boundary.clone(),
            degenerate: self.degenerate,
            edges: self.domain.edges().to_vec(),
            faces: self.domain.faces().to_vec(),
            map: self.map.clone(),
            rotation: self.rotation(),
            target: self.target.clone(),
            vertices: self.domain.vertex_count(),
        };
        serde_json::to_string_pretty(&raw).expect("diagram serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, DiagramError> {
        let raw: RawDiagram = serde_json::from_str(text).map_err(|e| DiagramError::Json(e.to_string()))?;
        let domain = Complex2::new(raw.vertices, raw.edges, raw.faces)?;
        let d = Self::new(domain, raw.boundary, raw.map, raw.degenerate, raw.target)?;
        if d.rotation() != raw.rotation {
            return Err(DiagramError::Json("rotation does not match the faces".into()));
        }
        Ok(d)
    }

    /// Counterclockwise vertex triples of a triangular domain.
    fn triangles(&self) -> Vec<[usize; 3]> {
        (0..self.domain.faces().len())
            .map(|f| {
                let v = self.domain.face_vertices(f);
                [v[0], v[1], v[2]]
            })
            .collect()
    }
}

// Whether the face images spell the target cycle, up to rotation, forwards
// (+1) or backwards (-1).
fn face_orientation(images: &[EdgeImage], cycle: &[OrientedEdge]) -> Option<i8> {
    let m = cycle.len();
    if images.len() != m {
        return None;
    }
    let darts: Option<Vec<OrientedEdge>> = images
        .iter()
        .map(|i| match i {
            EdgeImage::Edge(e) => Some(*e),
            EdgeImage::Vertex(_) => None,
        })
        .collect();
    let darts = darts?;
    let reversed: Vec<OrientedEdge> = darts.iter().rev().map(|e| e.reversed()).collect();
    for s in 0..m {
        if (0..m).all(|k| darts[(s + k) % m] == cycle[k]) {
            return Some(1);
        }
        if (0..m).all(|k| reversed[(s + k) % m] == cycle[k]) {
            return Some(-1);
        }
    }
    None
}

fn simplicial_cell_map(domain: &Complex2, images: &[usize], target: &Complex2) -> Result<CellMap, DiagramError> {
    let mut target_faces: HashMap<Vec<usize>, usize> = HashMap::new();
    for f in 0..target.faces().len() {
        let mut v = target.face_vertices(f);
        v.sort_unstable();
        target_faces.insert(v, f);
    }
    let mut edges = Vec::new();
    for &(a, b) in domain.edges() {
        let (fa, fb) = (images[a], images[b]);
        if fa == fb {
            edges.push(EdgeImage::Vertex(fa));
        } else {
            let e = target
                .edge_between(fa, fb)
                .ok_or_else(|| DiagramError::Map(format!("no target edge {}-{}", fa, fb)))?;
            edges.push(EdgeImage::Edge(e));
        }
    }
    let mut faces = Vec::new();
    for f in 0..domain.faces().len() {
        let mut v: Vec<usize> = domain.face_vertices(f).iter().map(|&x| images[x]).collect();
        v.sort_unstable();
        v.dedup();
        faces.push(match v.len() {
            1 => FaceImage::Vertex(v[0]),
            2 => FaceImage::Edge(target.edge_between(v[0], v[1]).unwrap().edge),
            _ => FaceImage::Face(
                *target_faces
                    .get(&v)
                    .ok_or_else(|| DiagramError::Map(format!("no target face on {:?}", v)))?,
            ),
        });
    }
    Ok(CellMap {
        edges,
        faces,
        vertices: images.to_vec(),
    })
}

/// Boundary 1-simplices mapped homeomorphically onto an edge.
pub fn degenerate_length(boundary_loop: &[EdgeImage]) -> usize {
    boundary_loop.iter().filter(|e| matches!(e, EdgeImage::Edge(_))).count()
}

/// 2-simplices mapped homeomorphically onto a 2-cell.
pub fn degenerate_area(d: &VanKampenDiagram) -> usize {
    d.map.faces.iter().filter(|f| matches!(f, FaceImage::Face(_))).count()
}

/// Drops every 1-simplex that maps to a vertex.
pub fn collapse_boundary_loop(boundary_loop: &[EdgeImage]) -> Vec<OrientedEdge> {
    boundary_loop
        .iter()
        .filter_map(|e| match e {
            EdgeImage::Edge(e) => Some(*e),
            EdgeImage::Vertex(_) => None,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseReport {
    pub output: VanKampenDiagram,
    pub excised_sphere_count: usize,
    /// Euler characteristic of each excised component.
    pub excised_euler: Vec<i64>,
    pub area_before: usize,
    pub area_after: usize,
}

// Working state of a collapse: vertex classes, edge aliases and faces.
struct Collapse {
    vparent: Vec<usize>,
    edges: Vec<(usize, usize)>,
    alias: Vec<Option<OrientedEdge>>,
    dead: Vec<bool>,
    faces: Vec<Option<Vec<OrientedEdge>>>,
    boundary: Vec<OrientedEdge>,
    images: Vec<usize>,
}

impl Collapse {
    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.vparent[r] != r {
            r = self.vparent[r];
        }
        let mut x = v;
        while self.vparent[x] != r {
            let n = self.vparent[x];
            self.vparent[x] = r;
            x = n;
        }
        r
    }

    fn resolve(&self, mut e: OrientedEdge) -> OrientedEdge {
        while let Some(a) = self.alias[e.edge] {
            e = if e.forward { a } else { a.reversed() };
        }
        e
    }

    fn start(&mut self, e: OrientedEdge) -> usize {
        let (t, h) = self.edges[e.edge];
        self.find(if e.forward { t } else { h })
    }

    fn cycle(&mut self, f: usize) -> Option<Vec<OrientedEdge>> {
        let c = self.faces[f].clone()?;
        Some(c.into_iter().map(|e| self.resolve(e)).collect())
    }

    // Contracts one connected component of the preimage of a vertex.
    fn contract(&mut self, lverts: &BTreeSet<usize>, ledges: &BTreeSet<usize>) -> Result<(), DiagramError> {
        for &e in ledges {
            if self.boundary.iter().any(|b| self.resolve(*b).edge == e) {
                return Err(DiagramError::BoundaryCollapsed(e));
            }
        }
        let mut bigons = Vec::new();
        for f in 0..self.faces.len() {
            let Some(cycle) = self.cycle(f) else { continue };
            let inside: Vec<bool> = cycle.iter().map(|e| ledges.contains(&e.edge)).collect();
            match inside.iter().filter(|&&x| x).count() {
                0 => {}
                1 => {
                    let k = inside.iter().position(|&x| x).unwrap();
                    let m = cycle.len();
                    let rest: Vec<OrientedEdge> = (1..m).map(|s| cycle[(k + s) % m]).collect();
                    bigons.push((f, rest));
                }
                // Every vertex lies in L, so the whole simplex goes to the point.
                _ => self.faces[f] = None,
            }
        }
        let p = *lverts.iter().next().unwrap();
        for &v in lverts {
            let r = self.find(v);
            self.vparent[r] = p;
        }
        for &e in ledges {
            self.dead[e] = true;
        }
        for (f, rest) in bigons {
            let d1 = self.resolve(rest[0]);
            let d2 = self.resolve(rest[1]);
            if d1.edge == d2.edge {
                // Both remaining sides are one edge: the simplex folds into a sphere.
                self.faces[f] = Some(vec![d1, d2]);
                continue;
            }
            self.alias[d2.edge] = Some(if d2.forward { d1.reversed() } else { d1 });
            self.dead[d2.edge] = true;
            self.faces[f] = None;
        }
        Ok(())
    }
}

pub(crate) fn root(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    p[x] = r;
    r
}

/// Normalizes a degenerate diagram into a combinatorial one with the same
/// boundary word.
///
/// For each target vertex in index order, each connected component `L` of
/// its preimage (in order of smallest vertex) is contracted to a point.
/// Simplices with all vertices in `L` go to that point, simplices with one
/// edge in `L` are folded onto their remaining edge. Capping the boundary
/// with a virtual face turns the result into a wedge of spheres; every
/// component without the cap must have `χ = 2` and is excised.
pub fn collapse(d: &VanKampenDiagram) -> Result<CollapseReport, DiagramError> {
    d.validate()?;
    let area_before = degenerate_area(d);
    if !d.degenerate {
        return Ok(CollapseReport {
            output: d.clone(),
            excised_sphere_count: 0,
            excised_euler: Vec::new(),
            area_before,
            area_after: area_before,
        });
    }
    for &b in &d.boundary {
        if matches!(d.image_of(b), EdgeImage::Vertex(_)) {
            return Err(DiagramError::BoundaryCollapsed(b.edge));
        }
    }
    let c = &d.domain;
    let mut w = Collapse {
        vparent: (0..c.vertex_count()).collect(),
        edges: c.edges().to_vec(),
        alias: vec![None; c.edges().len()],
        dead: vec![false; c.edges().len()],
        faces: c.faces().iter().cloned().map(Some).collect(),
        boundary: d.boundary.clone(),
        images: d.map.vertices.clone(),
    };
    loop {
        let mut changed = false;
        for v in 0..d.target.vertex_count() {
            // Components of the preimage of v, joined along degenerate edges.
            let mut comp: BTreeMap<usize, (BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
            let mut dsu: Vec<usize> = (0..c.vertex_count()).collect();
            let mut ledges = Vec::new();
            for e in 0..w.edges.len() {
                if w.dead[e] {
                    continue;
                }
                let (a, b) = w.edges[e];
                let (a, b) = (w.find(a), w.find(b));
                if w.images[a] == v && w.images[b] == v {
                    ledges.push((e, a, b));
                    let (ra, rb) = (root(&mut dsu, a), root(&mut dsu, b));
                    dsu[ra.max(rb)] = ra.min(rb);
                }
            }
            for (e, a, b) in ledges {
                let r = root(&mut dsu, a);
                let entry = comp.entry(r).or_default();
                entry.0.insert(a);
                entry.0.insert(b);
                entry.1.insert(e);
            }
            for (_, (lverts, ledges)) in comp {
                w.contract(&lverts, &ledges)?;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Components of the capped complex, joined along shared edges.
    let nf = w.faces.len();
    let cap = nf;
    let mut dsu: Vec<usize> = (0..=nf).collect();
    let mut sides: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut darts: HashMap<OrientedEdge, usize> = HashMap::new();
    let outer: Vec<OrientedEdge> = w.boundary.iter().rev().map(|&e| w.resolve(e).reversed()).collect();
    let cycles: Vec<(usize, Vec<OrientedEdge>)> = (0..nf)
        .filter_map(|f| w.cycle(f).map(|c| (f, c)))
        .chain(std::iter::once((cap, outer)))
        .collect();
    for (f, cycle) in &cycles {
        for &e in cycle {
            *darts.entry(e).or_default() += 1;
            sides.entry(e.edge).or_default().push(*f);
        }
    }
    if let Some((e, _)) = darts.iter().filter(|(_, &n)| n > 1).min() {
        return Err(DiagramError::NonManifold(e.edge));
    }
    for fs in sides.values() {
        if fs.len() > 2 {
            return Err(DiagramError::NonManifold(
                *sides.iter().find(|(_, v)| v.len() > 2).unwrap().0,
            ));
        }
        for &f in &fs[1..] {
            let (a, b) = (root(&mut dsu, fs[0]), root(&mut dsu, f));
            dsu[a] = b;
        }
    }
    let kept_root = root(&mut dsu, cap);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (f, _) in &cycles {
        if *f != cap {
            let r = root(&mut dsu, *f);
            groups.entry(r).or_default().push(*f);
        }
    }
    let mut excised_euler = Vec::new();
    let mut kept = Vec::new();
    for (r, fs) in groups {
        if r == kept_root {
            kept = fs;
            continue;
        }
        let mut vs = BTreeSet::new();
        let mut es = BTreeSet::new();
        for &f in &fs {
            for e in w.cycle(f).unwrap() {
                es.insert(e.edge);
                let s = w.start(e);
                vs.insert(s);
            }
        }
        let chi = vs.len() as i64 - es.len() as i64 + fs.len() as i64;
        if chi != 2 {
            return Err(DiagramError::NotSphere(chi));
        }
        excised_euler.push(chi);
    }
    // Renumber what survives.
    let boundary: Vec<OrientedEdge> = w.boundary.iter().map(|&e| w.resolve(e)).collect();
    let mut vset = BTreeSet::new();
    let mut eset = BTreeSet::new();
    let kept_cycles: Vec<Vec<OrientedEdge>> = kept.iter().map(|&f| w.cycle(f).unwrap()).collect();
    for e in kept_cycles.iter().flatten().chain(boundary.iter()) {
        eset.insert(e.edge);
        let s = w.start(*e);
        vset.insert(s);
    }
    if vset.is_empty() {
        let v = w.find(0);
        vset.insert(v);
    }
    let vnew: BTreeMap<usize, usize> = vset.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let enew: BTreeMap<usize, usize> = eset.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let edges: Vec<(usize, usize)> = eset
        .iter()
        .map(|&e| {
            let (a, b) = w.edges[e];
            (vnew[&w.find(a)], vnew[&w.find(b)])
        })
        .collect();
    let renum = |e: &OrientedEdge| OrientedEdge::new(enew[&e.edge], e.forward);
    let faces: Vec<Vec<OrientedEdge>> = kept_cycles.iter().map(|c| c.iter().map(renum).collect()).collect();
    let boundary: Vec<OrientedEdge> = boundary.iter().map(renum).collect();
    let images: Vec<usize> = vset.iter().map(|&v| w.images[v]).collect();
    let domain = Complex2::new(vset.len(), edges, faces)?;
    let map = simplicial_cell_map(&domain, &images, &d.target)?;
    let output = VanKampenDiagram::new(domain, boundary, map, false, d.target.clone())?;
    Ok(CollapseReport {
        area_after: degenerate_area(&output),
        output,
        excised_sphere_count: excised_euler.len(),
        excised_euler,
        area_before,
    })
}

/// Random inverse-collapse moves applied to a simplicial diagram.
///
/// The moves never touch the boundary: stellar subdivision of a triangle,
/// subdivision of an interior edge, splitting an interior vertex along a
/// new degenerate edge, and inserting a folded sphere into a triangle. The
/// last one raises the area by two; collapsing removes that sphere again.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegenerateGenerator {
    pub max_moves: usize,
}

impl Default for DegenerateGenerator {
    fn default() -> Self {
        Self { max_moves: 5 }
    }
}

/// Which inverse-collapse move to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Stellar,
    EdgeSplit,
    VertexSplit,
    FoldedSphere,
}

impl DegenerateGenerator {
    /// Applies between one and `max_moves` random moves.
    pub fn generate<R: Rng>(&self, start: &VanKampenDiagram, rng: &mut R) -> Result<VanKampenDiagram, DiagramError> {
        let moves = rng.gen_range(1..=self.max_moves.max(1));
        let mut d = start.clone();
        for _ in 0..moves {
            let all = [Move::Stellar, Move::EdgeSplit, Move::VertexSplit, Move::FoldedSphere];
            let m = all[rng.gen_range(0..all.len())];
            d = apply_move(&d, m, rng)?.unwrap_or(d);
        }
        Ok(d)
    }
}

/// Applies one move at a random place; `None` when the move has nowhere to go.
pub fn apply_move<R: Rng>(d: &VanKampenDiagram, m: Move, rng: &mut R) -> Result<Option<VanKampenDiagram>, DiagramError> {
    if d.domain.faces().iter().any(|f| f.len() != 3) || !d.target.is_simplicial() {
        return Err(DiagramError::NotSimplicial);
    }
    let mut tris = d.triangles();
    let mut images = d.map.vertices.clone();
    let mut n = d.domain.vertex_count();
    let boundary_edges: BTreeSet<usize> = d.boundary.iter().map(|e| e.edge).collect();
    let boundary_verts: BTreeSet<usize> = d.boundary.iter().map(|&e| d.domain.start(e)).collect();
    match m {
        Move::Stellar => {
            let t = rng.gen_range(0..tris.len());
            let [x, y, z] = tris[t];
            let c = n;
            n += 1;
            images.push(images[[x, y, z][rng.gen_range(0..3)]]);
            tris[t] = [x, y, c];
            tris.push([y, z, c]);
            tris.push([z, x, c]);
        }
        Move::EdgeSplit => {
            let interior: Vec<usize> = (0..d.domain.edges().len()).filter(|e| !boundary_edges.contains(e)).collect();
            if interior.is_empty() {
                return Ok(None);
            }
            let (a, b) = d.domain.edges()[interior[rng.gen_range(0..interior.len())]];
            let mid = n;
            n += 1;
            images.push(images[if rng.gen_bool(0.5) { a } else { b }]);
            let mut extra = Vec::new();
            for t in tris.iter_mut() {
                for k in 0..3 {
                    let (p, q, r) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                    if (p, q) == (a, b) || (p, q) == (b, a) {
                        *t = [p, mid, r];
                        extra.push([mid, q, r]);
                        break;
                    }
                }
            }
            tris.extend(extra);
        }
        Move::VertexSplit => {
            let interior: Vec<usize> = (0..n).filter(|v| !boundary_verts.contains(v)).collect();
            if interior.is_empty() {
                return Ok(None);
            }
            let v = interior[rng.gen_range(0..interior.len())];
            // Counterclockwise link of v: (v, a, b) means b follows a.
            let fan: Vec<usize> = (0..tris.len()).filter(|&t| tris[t].contains(&v)).collect();
            let mut next = BTreeMap::new();
            let mut tri_of = BTreeMap::new();
            for &t in &fan {
                let k = tris[t].iter().position(|&x| x == v).unwrap();
                let (a, b) = (tris[t][(k + 1) % 3], tris[t][(k + 2) % 3]);
                next.insert(a, b);
                tri_of.insert(a, t);
            }
            let first = *next.keys().next().unwrap();
            let mut ring = vec![first];
            while ring.len() < next.len() {
                ring.push(next[ring.last().unwrap()]);
            }
            let k = ring.len();
            if k < 3 {
                return Ok(None);
            }
            let i = rng.gen_range(0..k);
            let span = rng.gen_range(1..k);
            let vp = n;
            n += 1;
            images.push(images[v]);
            for s in 0..span {
                let a = ring[(i + s) % k];
                let t = tri_of[&a];
                for x in tris[t].iter_mut() {
                    if *x == v {
                        *x = vp;
                    }
                }
            }
            let (ni, nj) = (ring[i], ring[(i + span) % k]);
            tris.push([v, ni, vp]);
            tris.push([v, vp, nj]);
        }
        Move::FoldedSphere => {
            let t = rng.gen_range(0..tris.len());
            let [x, y, z] = tris[t];
            let (a, b, c, dd, e) = (n, n + 1, n + 2, n + 3, n + 4);
            n += 5;
            images.extend([images[x], images[x], images[x], images[y], images[z]]);
            tris[t] = [x, y, a];
            tris.extend([
                [y, b, a],
                [y, z, b],
                [z, c, b],
                [z, x, c],
                [x, a, c],
                [a, b, dd],
                [b, e, dd],
                [b, c, e],
                [c, a, e],
                [a, dd, e],
            ]);
        }
    }
    let out = VanKampenDiagram::from_triangles(n, &tris, &images, &d.target)?;
    if out.boundary_loop() != d.boundary_loop() {
        return Err(DiagramError::Map("move changed the boundary".into()));
    }
    Ok(Some(out))
}

/// Minimal number of cells in a van Kampen diagram for the closed edge path
/// `w` over `target`, found by building diagrams from the boundary inward;
/// `None` if none has at most `max_cells` cells.
///
/// The first edge of the current hole is either glued to a new cell, which
/// replaces it by the rest of that cell's boundary, or zipped with a later
/// edge running the other way, which splits the hole in two. No free
/// reduction is performed: cancellation only happens by zipping.
pub fn enumerate_area_oracle(w: &[OrientedEdge], target: &Complex2, max_cells: usize) -> Result<Option<u64>, DiagramError> {
    const STATE_LIMIT: usize = 2_000_000;
    let m = w.len();
    if (0..m).any(|k| w[k].edge >= target.edges().len() || target.end(w[k]) != target.start(w[(k + 1) % m])) {
        return Err(DiagramError::OpenBoundary);
    }
    let mut cells: Vec<Vec<Vec<u32>>> = vec![Vec::new(); 2 * target.edges().len()];
    let mut seen = BTreeSet::new();
    for cycle in target.faces() {
        let fwd: Vec<u32> = cycle.iter().map(|&e| dart(e) as u32).collect();
        let bwd: Vec<u32> = fwd.iter().rev().map(|d| d ^ 1).collect();
        for c in [fwd, bwd] {
            for s in 0..c.len() {
                let rot: Vec<u32> = c[s..].iter().chain(&c[..s]).copied().collect();
                if seen.insert(rot.clone()) {
                    cells[rot[0] as usize].push(rot);
                }
            }
        }
    }
    let mut oracle = Oracle {
        cells,
        memo: HashMap::new(),
        limit: STATE_LIMIT,
        overflow: false,
    };
    let start = min_rotation(&w.iter().map(|&e| dart(e) as u32).collect::<Vec<_>>());
    for budget in 0..=max_cells as u32 {
        let r = oracle.fill(&start, budget);
        if oracle.overflow {
            return Err(DiagramError::ResourceLimit(STATE_LIMIT));
        }
        if let Some(a) = r {
            return Ok(Some(a as u64));
        }
    }
    Ok(None)
}

/// [`enumerate_area_oracle`] for a word over a presentation.
pub fn enumerate_area_oracle_word(w: &Word, p: &Presentation, max_cells: usize) -> Result<Option<u64>, DiagramError> {
    let target = presentation_complex(p)?;
    let path: Vec<OrientedEdge> = w
        .letters()
        .iter()
        .map(|&l| OrientedEdge::new(l.unsigned_abs() as usize - 1, l > 0))
        .collect();
    enumerate_area_oracle(&path, &target, max_cells)
}

fn min_rotation(h: &[u32]) -> Vec<u32> {
    let n = h.len();
    let best = (0..n)
        .min_by(|&a, &b| (0..n).map(|k| h[(a + k) % n]).cmp((0..n).map(|k| h[(b + k) % n])))
        .unwrap_or(0);
    (0..n).map(|k| h[(best + k) % n]).collect()
}

struct Oracle {
    cells: Vec<Vec<Vec<u32>>>,
    memo: HashMap<Vec<u32>, (bool, u32)>,
    limit: usize,
    overflow: bool,
}

impl Oracle {
    // Fewest cells filling the hole `h`, if at most `budget`.
    fn fill(&mut self, h: &[u32], budget: u32) -> Option<u32> {
        if h.is_empty() {
            return Some(0);
        }
        match self.memo.get(h) {
            Some(&(true, a)) => return (a <= budget).then_some(a),
            Some(&(false, b)) if b > budget => return None,
            _ => {}
        }
        if self.overflow {
            return None;
        }
        let mut best: Option<u32> = None;
        for j in 1..h.len() {
            if h[j] != h[0] ^ 1 {
                continue;
            }
            let cap = best.map_or(budget, |b| b - 1);
            let alpha = min_rotation(&h[1..j]);
            let beta = min_rotation(&h[j + 1..]);
            if let Some(a) = self.fill(&alpha, cap) {
                if let Some(b) = self.fill(&beta, cap - a) {
                    best = Some(a + b);
                    if a + b == 0 {
                        break;
                    }
                }
            }
        }
        if best != Some(0) && budget > 0 {
            let cells = self.cells[(h[0] ^ 1) as usize].clone();
            for c in cells {
                let cap = best.map_or(budget, |b| b - 1);
                if cap == 0 {
                    break;
                }
                let hole: Vec<u32> = c[1..].iter().chain(&h[1..]).copied().collect();
                if let Some(a) = self.fill(&min_rotation(&hole), cap - 1) {
                    best = Some(a + 1);
                }
            }
        }
        self.memo.insert(h.to_vec(), best.map_or((false, budget + 1), |a| (true, a)));
        if self.memo.len() > self.limit {
            self.overflow = true;
        }
        best
    }
}
