//! Conformal quadrilateral subdomain meshes.
//!
//! Every subdomain is a straight-edged quadrilateral with counter-clockwise
//! corners. Local edge `e` runs from corner `e` to corner `(e + 1) % 4`.
//! Edges owned by a single quad lie on the outer boundary and must carry a
//! tag; edges shared by two quads are interfaces.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Classification of one local edge of a quad.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Outer boundary piece; the index refers into [`Mesh::tags`].
    Outer { tag: usize },
    /// Shared with `neighbor`'s local edge `neighbor_edge`.
    Interface { neighbor: usize, neighbor_edge: usize },
}

/// Bilinear quadrilateral geometry with corners in counter-clockwise order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadGeometry {
    pub corners: [Point2; 4],
}

const CORNER_SIGNS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

impl QuadGeometry {
    pub fn new(corners: [Point2; 4]) -> Self {
        Self { corners }
    }

    /// Bilinear map from the reference square `[-1, 1]²`.
    pub fn map(&self, xi: f64, eta: f64) -> Point2 {
        let mut p = Point2::default();
        for (c, &(sx, sy)) in self.corners.iter().zip(CORNER_SIGNS.iter()) {
            let n = 0.25 * (1.0 + sx * xi) * (1.0 + sy * eta);
            p = p + *c * n;
        }
        p
    }

    /// Columns of the Jacobian: (∂r/∂ξ, ∂r/∂η).
    pub fn tangents(&self, xi: f64, eta: f64) -> (Point2, Point2) {
        let mut dxi = Point2::default();
        let mut deta = Point2::default();
        for (c, &(sx, sy)) in self.corners.iter().zip(CORNER_SIGNS.iter()) {
            dxi = dxi + *c * (0.25 * sx * (1.0 + sy * eta));
            deta = deta + *c * (0.25 * sy * (1.0 + sx * xi));
        }
        (dxi, deta)
    }

    pub fn jacobian(&self, xi: f64, eta: f64) -> f64 {
        let (a, b) = self.tangents(xi, eta);
        a.cross(b)
    }

    /// Area by 2×2 Gauss integration of the bilinear Jacobian (exact).
    pub fn area(&self) -> f64 {
        let g = 1.0 / 3f64.sqrt();
        [(-g, -g), (g, -g), (g, g), (-g, g)]
            .iter()
            .map(|&(a, b)| self.jacobian(a, b))
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                d = d.max(self.corners[i].dist(self.corners[j]));
            }
        }
        d
    }

    pub fn edge(&self, e: usize) -> (Point2, Point2) {
        (self.corners[e], self.corners[(e + 1) % 4])
    }

    /// Reference coordinates of the point of local edge `e` at edge
    /// parameter `s ∈ [-1, 1]` (`s = -1` at corner `e`).
    pub fn edge_param(e: usize, s: f64) -> (f64, f64) {
        match e {
            0 => (s, -1.0),
            1 => (1.0, s),
            2 => (-s, 1.0),
            _ => (-1.0, -s),
        }
    }

    /// Inverse bilinear map by Newton iteration. Returns `None` when the
    /// iteration fails to converge.
    pub fn inverse_map(&self, p: Point2) -> Option<(f64, f64)> {
        let (mut xi, mut eta) = (0.0, 0.0);
        let scale = self.diameter();
        for _ in 0..60 {
            let r = self.map(xi, eta) - p;
            if r.norm() <= 1e-15 * scale {
                return Some((xi, eta));
            }
            let (a, b) = self.tangents(xi, eta);
            let det = a.cross(b);
            if det.abs() < 1e-300 {
                return None;
            }
            let dxi = (r.x * b.y - r.y * b.x) / det;
            let deta = (a.x * r.y - a.y * r.x) / det;
            xi -= dxi;
            eta -= deta;
            if !xi.is_finite() || !eta.is_finite() || xi.abs() > 1e6 || eta.abs() > 1e6 {
                return None;
            }
            if dxi.abs().max(deta.abs()) < 1e-15 {
                return Some((xi, eta));
            }
        }
        let r = self.map(xi, eta) - p;
        (r.norm() <= 1e-10 * scale).then_some((xi, eta))
    }

    pub fn validate(&self) -> Result<()> {
        if self.corners.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateQuad("non-finite corner".into()));
        }
        let g = 1.0 / 3f64.sqrt();
        for &(a, b) in &[(-g, -g), (g, -g), (g, g), (-g, g)] {
            let j = self.jacobian(a, b);
            if j <= 0.0 || !j.is_finite() {
                return Err(Error::DegenerateQuad(format!(
                    "non-positive Jacobian {j:e} at ({a:.3}, {b:.3})"
                )));
            }
        }
        for (e, f) in [(0, 2), (1, 3)] {
            let (a0, a1) = self.edge(e);
            let (b0, b1) = self.edge(f);
            if segments_cross(a0, a1, b0, b1) {
                return Err(Error::DegenerateQuad(format!("edges {e} and {f} intersect")));
            }
        }
        Ok(())
    }
}

fn segments_cross(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> bool {
    let d1 = (a1 - a0).cross(b0 - a0);
    let d2 = (a1 - a0).cross(b1 - a0);
    let d3 = (b1 - b0).cross(a0 - b0);
    let d4 = (b1 - b0).cross(a1 - b0);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point2>,
    pub quads: Vec<[usize; 4]>,
    pub edge_kinds: Vec<[EdgeKind; 4]>,
    pub tags: Vec<String>,
}

impl Mesh {
    /// Builds and validates a mesh. `outer_tags` lists `(quad, local edge,
    /// tag)` for every outer edge; untagged edges must be shared by exactly
    /// two quads.
    pub fn new(
        nodes: Vec<Point2>,
        quads: Vec<[usize; 4]>,
        outer_tags: &[(usize, usize, String)],
    ) -> Result<Self> {
        if quads.is_empty() {
            return Err(Error::Mesh("mesh has no quads".into()));
        }
        for (i, p) in nodes.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Mesh(format!("node {i} has non-finite coordinates")));
            }
        }
        let mut used = vec![false; nodes.len()];
        for (q, corners) in quads.iter().enumerate() {
            for &c in corners {
                if c >= nodes.len() {
                    return Err(Error::Mesh(format!(
                        "quad {q} references missing node {c} (mesh has {} nodes)",
                        nodes.len()
                    )));
                }
                used[c] = true;
            }
            let mut sorted = *corners;
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Mesh(format!("quad {q} repeats a corner node")));
            }
            QuadGeometry::new(corners.map(|c| nodes[c]))
                .validate()
                .map_err(|e| Error::Mesh(format!("quad {q}: {e}")))?;
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!("node {i} is not used by any quad")));
        }

        let mut owners: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (q, c) in quads.iter().enumerate() {
            for e in 0..4 {
                let (a, b) = (c[e], c[(e + 1) % 4]);
                owners.entry((a.min(b), a.max(b))).or_default().push((q, e));
            }
        }

        let mut tags: Vec<String> = Vec::new();
        let mut tag_of: HashMap<(usize, usize), usize> = HashMap::new();
        for (q, e, tag) in outer_tags {
            if *q >= quads.len() || *e >= 4 {
                return Err(Error::Mesh(format!("tag references missing edge ({q}, {e})")));
            }
            if tag.is_empty() || tag.chars().any(char::is_whitespace) {
                return Err(Error::Mesh(format!("invalid tag {tag:?} on edge ({q}, {e})")));
            }
            let idx = match tags.iter().position(|t| t == tag) {
                Some(i) => i,
                None => {
                    tags.push(tag.clone());
                    tags.len() - 1
                }
            };
            if tag_of.insert((*q, *e), idx).is_some() {
                return Err(Error::Mesh(format!("edge ({q}, {e}) tagged twice")));
            }
        }

        let mut edge_kinds = vec![[EdgeKind::Outer { tag: usize::MAX }; 4]; quads.len()];
        for (q, c) in quads.iter().enumerate() {
            for e in 0..4 {
                let (a, b) = (c[e], c[(e + 1) % 4]);
                let list = &owners[&(a.min(b), a.max(b))];
                match list.len() {
                    1 => {
                        let tag = tag_of.get(&(q, e)).ok_or_else(|| {
                            Error::Mesh(format!("outer edge ({q}, {e}) has no tag"))
                        })?;
                        edge_kinds[q][e] = EdgeKind::Outer { tag: *tag };
                    }
                    2 => {
                        if tag_of.contains_key(&(q, e)) {
                            return Err(Error::Mesh(format!(
                                "edge ({q}, {e}) is shared by two quads but carries a tag"
                            )));
                        }
                        let (nq, ne) = if list[0] == (q, e) { list[1] } else { list[0] };
                        let nc = quads[nq];
                        if nc[ne] != b || nc[(ne + 1) % 4] != a {
                            return Err(Error::Mesh(format!(
                                "quads {q} and {nq} traverse their shared edge in the same direction"
                            )));
                        }
                        edge_kinds[q][e] = EdgeKind::Interface { neighbor: nq, neighbor_edge: ne };
                    }
                    n => {
                        return Err(Error::Mesh(format!(
                            "edge between nodes {a} and {b} is shared by {n} quads"
                        )))
                    }
                }
            }
        }

        Ok(Self { nodes, quads, edge_kinds, tags })
    }

    pub fn quad_count(&self) -> usize {
        self.quads.len()
    }

    pub fn geometry(&self, q: usize) -> QuadGeometry {
        QuadGeometry::new(self.quads[q].map(|c| self.nodes[c]))
    }

    pub fn tag_name(&self, tag: usize) -> &str {
        &self.tags[tag]
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.nodes {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.dist(hi)
    }

    pub fn area(&self) -> f64 {
        (0..self.quads.len()).map(|q| self.geometry(q).area()).sum()
    }

    /// Outer edges as `(quad, local edge, tag)` in quad order.
    pub fn outer_edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (q, kinds) in self.edge_kinds.iter().enumerate() {
            for (e, k) in kinds.iter().enumerate() {
                if let EdgeKind::Outer { tag } = k {
                    out.push((q, e, *tag));
                }
            }
        }
        out
    }
}

/// Builds a mesh whose outer edges are tagged by a classifier on the edge
/// midpoint. Quads with clockwise corners are reoriented.
fn assemble_tagged(
    nodes: Vec<Point2>,
    mut quads: Vec<[usize; 4]>,
    classify: impl Fn(Point2) -> String,
) -> Result<Mesh> {
    for q in &mut quads {
        let g = QuadGeometry::new(q.map(|c| nodes[c]));
        if g.area() < 0.0 {
            q.swap(1, 3);
        }
    }
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for c in &quads {
        for e in 0..4 {
            let (a, b) = (c[e], c[(e + 1) % 4]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut tags = Vec::new();
    for (q, c) in quads.iter().enumerate() {
        for e in 0..4 {
            let (a, b) = (c[e], c[(e + 1) % 4]);
            if count[&(a.min(b), a.max(b))] == 1 {
                let mid = nodes[a].lerp(nodes[b], 0.5);
                tags.push((q, e, classify(mid)));
            }
        }
    }
    Mesh::new(nodes, quads, &tags)
}

/// Uniform `nx × ny` grid over a rectangle with outer edges tagged
/// `left`, `right`, `bottom` and `top`.
pub fn generate_rectangle(
    nx: usize,
    ny: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("rectangle needs nx, ny >= 1"));
    }
    let (x0, x1) = x_range;
    let (y0, y1) = y_range;
    if !(x1 > x0) || !(y1 > y0) || !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
        return Err(Error::invalid(format!(
            "degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]"
        )));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { y1 } else { y0 + (y1 - y0) * j as f64 / ny as f64 };
        for i in 0..=nx {
            let x = if i == nx { x1 } else { x0 + (x1 - x0) * i as f64 / nx as f64 };
            nodes.push(Point2::new(x, y));
        }
    }
    let mut quads = Vec::with_capacity(nx * ny);
    let mut tags = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let q = quads.len();
            quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            if j == 0 {
                tags.push((q, 0, "bottom".to_string()));
            }
            if i == nx - 1 {
                tags.push((q, 1, "right".to_string()));
            }
            if j == ny - 1 {
                tags.push((q, 2, "top".to_string()));
            }
            if i == 0 {
                tags.push((q, 3, "left".to_string()));
            }
        }
    }
    Mesh::new(nodes, quads, &tags)
}

/// Structured annulus: `nr` rings of `ntheta` quads, periodic in θ, outer
/// edges tagged `inner` and `outer`.
pub fn generate_annulus(nr: usize, ntheta: usize, r_in: f64, r_out: f64) -> Result<Mesh> {
    if nr == 0 || ntheta < 3 {
        return Err(Error::invalid("annulus needs nr >= 1 and ntheta >= 3"));
    }
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(Error::invalid(format!("invalid annulus radii {r_in}, {r_out}")));
    }
    let id = |i: usize, j: usize| i * ntheta + (j % ntheta);
    let mut nodes = Vec::with_capacity((nr + 1) * ntheta);
    for i in 0..=nr {
        let r = if i == nr { r_out } else { r_in + (r_out - r_in) * i as f64 / nr as f64 };
        for j in 0..ntheta {
            let th = std::f64::consts::TAU * j as f64 / ntheta as f64;
            nodes.push(Point2::new(r * th.cos(), r * th.sin()));
        }
    }
    let mut quads = Vec::with_capacity(nr * ntheta);
    let mut tags = Vec::new();
    for i in 0..nr {
        for j in 0..ntheta {
            let q = quads.len();
            quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            if i == nr - 1 {
                tags.push((q, 1, "outer".to_string()));
            }
            if i == 0 {
                tags.push((q, 3, "inner".to_string()));
            }
        }
    }
    Mesh::new(nodes, quads, &tags)
}

/// Deduplicates nodes produced by independent block generators.
struct NodePool {
    nodes: Vec<Point2>,
    index: HashMap<(i64, i64), usize>,
    quantum: f64,
}

impl NodePool {
    fn new(scale: f64) -> Self {
        Self { nodes: Vec::new(), index: HashMap::new(), quantum: 1e-9 * scale }
    }

    fn insert(&mut self, p: Point2) -> usize {
        let key = ((p.x / self.quantum).round() as i64, (p.y / self.quantum).round() as i64);
        *self.index.entry(key).or_insert_with(|| {
            self.nodes.push(p);
            self.nodes.len() - 1
        })
    }
}

/// Butterfly (O-grid) disk: a central `n_core × n_core` square block
/// surrounded by four `n_core × n_ring` transition blocks reaching the rim.
/// All outer edges are tagged `rim`.
pub fn generate_disk(n_core: usize, n_ring: usize, radius: f64) -> Result<Mesh> {
    if n_core == 0 || n_ring == 0 {
        return Err(Error::invalid("disk needs n_core, n_ring >= 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("invalid disk radius {radius}")));
    }
    // Half-width chosen so core cells and ring cells have similar size.
    let a = radius * n_core as f64 / (n_core + 2 * n_ring) as f64;
    let mut pool = NodePool::new(radius);

    let mut quads = Vec::with_capacity(n_core * n_core + 4 * n_core * n_ring);
    let core = |i: usize, j: usize| {
        Point2::new(
            -a + 2.0 * a * i as f64 / n_core as f64,
            -a + 2.0 * a * j as f64 / n_core as f64,
        )
    };
    for j in 0..n_core {
        for i in 0..n_core {
            let c = [core(i, j), core(i + 1, j), core(i + 1, j + 1), core(i, j + 1)];
            quads.push(c.map(|p| pool.insert(p)));
        }
    }

    // Side s: square side from corner s to corner s+1 (counter-clockwise),
    // arc between the matching diagonal directions.
    let sq = [Point2::new(-a, -a), Point2::new(a, -a), Point2::new(a, a), Point2::new(-a, a)];
    let quarter = std::f64::consts::FRAC_PI_2;
    for s in 0..4 {
        let start = sq[s];
        let end = sq[(s + 1) % 4];
        let th0 = -3.0 * std::f64::consts::FRAC_PI_4 + quarter * s as f64;
        let node = |i: usize, k: usize| {
            let t = i as f64 / n_core as f64;
            let inner = start.lerp(end, t);
            let th = th0 + quarter * t;
            let outer = Point2::new(radius * th.cos(), radius * th.sin());
            if k == n_ring {
                outer
            } else {
                inner.lerp(outer, k as f64 / n_ring as f64)
            }
        };
        for k in 0..n_ring {
            for i in 0..n_core {
                let c = [node(i, k), node(i + 1, k), node(i + 1, k + 1), node(i, k + 1)];
                quads.push(c.map(|p| pool.insert(p)));
            }
        }
    }
    assemble_tagged(pool.nodes, quads, |_| "rim".to_string())
}

/// Star-shaped boundary points `r(θ) = R (1 + 0.2 cos3θ + 0.02 cos5θ +
/// 0.4 sin8θ + 0.4 sin4θ + 0.1 sin15θ)` at `θ_j = 2πj / n_points`.
pub fn star_boundary(n_points: usize, radius: f64) -> Result<Vec<Point2>> {
    if n_points < 3 {
        return Err(Error::invalid("star boundary needs at least 3 points"));
    }
    Ok((0..n_points)
        .map(|j| {
            let th = std::f64::consts::TAU * j as f64 / n_points as f64;
            let r = star_radius(th, radius);
            Point2::new(r * th.cos(), r * th.sin())
        })
        .collect())
}

pub fn star_radius(theta: f64, radius: f64) -> f64 {
    radius
        * (1.0 + 0.2 * (3.0 * theta).cos() + 0.02 * (5.0 * theta).cos()
            + 0.4 * (8.0 * theta).sin()
            + 0.4 * (4.0 * theta).sin()
            + 0.1 * (15.0 * theta).sin())
}

const MESH_MAGIC: &str = "ldbem-mesh 1";

/// Serializes a mesh to the line-oriented text format.
pub fn export_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MESH_MAGIC}");
    let _ = writeln!(s, "nodes {}", mesh.nodes.len());
    for p in &mesh.nodes {
        // `{}` on f64 prints the shortest representation that round-trips.
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    let _ = writeln!(s, "quads {}", mesh.quads.len());
    for q in &mesh.quads {
        let _ = writeln!(s, "{} {} {} {}", q[0], q[1], q[2], q[3]);
    }
    let outer = mesh.outer_edges();
    let _ = writeln!(s, "tags {}", outer.len());
    for (q, e, t) in outer {
        let _ = writeln!(s, "{q} {e} {}", mesh.tags[t]);
    }
    s
}

/// Parses the text mesh format. Blank lines and `#` comments are ignored.
pub fn import_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, message: String| Error::Parse { line, message };

    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| perr(text.lines().count().max(1), format!("unexpected end of file, expected {what}")))
    };

    let (ln, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["ldbem-mesh", "1"] {
        return Err(perr(ln, format!("expected header {MESH_MAGIC:?}, found {header:?}")));
    }

    let section = |ln: usize, line: &str, name: &str| -> Result<usize> {
        let mut it = line.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(k), Some(n), None) if k == name => n
                .parse::<usize>()
                .map_err(|_| perr(ln, format!("invalid {name} count {n:?}"))),
            _ => Err(perr(ln, format!("expected `{name} <count>`, found {line:?}"))),
        }
    };

    let (ln, l) = next("nodes section")?;
    let n_nodes = section(ln, l, "nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = next("node coordinates")?;
        let v: Vec<&str> = l.split_whitespace().collect();
        if v.len() != 2 {
            return Err(perr(ln, format!("expected `<x> <y>`, found {l:?}")));
        }
        let x: f64 = v[0].parse().map_err(|_| perr(ln, format!("invalid number {:?}", v[0])))?;
        let y: f64 = v[1].parse().map_err(|_| perr(ln, format!("invalid number {:?}", v[1])))?;
        nodes.push(Point2::new(x, y));
    }

    let (ln, l) = next("quads section")?;
    let n_quads = section(ln, l, "quads")?;
    let mut quads = Vec::with_capacity(n_quads);
    for q in 0..n_quads {
        let (ln, l) = next("quad connectivity")?;
        let v: Vec<&str> = l.split_whitespace().collect();
        if v.len() != 4 {
            return Err(perr(ln, format!("quad {q}: expected 4 node indices, found {l:?}")));
        }
        let mut c = [0usize; 4];
        for (slot, s) in c.iter_mut().zip(&v) {
            *slot = s.parse().map_err(|_| perr(ln, format!("quad {q}: invalid node index {s:?}")))?;
        }
        if let Some(&bad) = c.iter().find(|&&i| i >= n_nodes) {
            return Err(perr(ln, format!("quad {q} references missing node {bad}")));
        }
        quads.push(c);
    }

    let (ln, l) = next("tags section")?;
    let n_tags = section(ln, l, "tags")?;
    let mut tags = Vec::with_capacity(n_tags);
    for _ in 0..n_tags {
        let (ln, l) = next("edge tag")?;
        let v: Vec<&str> = l.split_whitespace().collect();
        if v.len() != 3 {
            return Err(perr(ln, format!("expected `<quad> <edge> <tag>`, found {l:?}")));
        }
        let q: usize = v[0].parse().map_err(|_| perr(ln, format!("invalid quad index {:?}", v[0])))?;
        let e: usize = v[1].parse().map_err(|_| perr(ln, format!("invalid edge index {:?}", v[1])))?;
        if q >= n_quads || e > 3 {
            return Err(perr(ln, format!("tag references missing edge ({q}, {e})")));
        }
        tags.push((q, e, v[2].to_string()));
    }
    if let Some((ln, l)) = lines.next() {
        return Err(perr(ln, format!("unexpected trailing content {l:?}")));
    }
    Mesh::new(nodes, quads, &tags)
}

/// One shared edge: `a` and `b` are `(quad, local edge)` with `a.0 < b.0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterfacePair {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

#[derive(Clone, Debug, Default)]
pub struct Topology {
    pub pairs: Vec<InterfacePair>,
    /// Outer edges grouped by tag name.
    pub outer: BTreeMap<String, Vec<(usize, usize)>>,
}

/// Lists every interface exactly once and verifies that the two sides
/// traverse the same segment in opposite directions.
pub fn build_topology(mesh: &Mesh) -> Result<Topology> {
    let tol = 1e-9 * mesh.diameter();
    let mut topo = Topology::default();
    for (q, kinds) in mesh.edge_kinds.iter().enumerate() {
        for (e, kind) in kinds.iter().enumerate() {
            match *kind {
                EdgeKind::Outer { tag } => {
                    topo.outer.entry(mesh.tags[tag].clone()).or_default().push((q, e));
                }
                EdgeKind::Interface { neighbor, neighbor_edge } => {
                    match mesh.edge_kinds[neighbor][neighbor_edge] {
                        EdgeKind::Interface { neighbor: bq, neighbor_edge: be } if bq == q && be == e => {}
                        _ => {
                            return Err(Error::Mesh(format!(
                                "interface ({q}, {e}) is not mirrored by ({neighbor}, {neighbor_edge})"
                            )))
                        }
                    }
                    if q < neighbor {
                        let (a0, a1) = mesh.geometry(q).edge(e);
                        let (b0, b1) = mesh.geometry(neighbor).edge(neighbor_edge);
                        if a0.dist(b1) > tol || a1.dist(b0) > tol {
                            return Err(Error::Mesh(format!(
                                "interface corners of ({q}, {e}) and ({neighbor}, {neighbor_edge}) do not coincide"
                            )));
                        }
                        topo.pairs.push(InterfacePair { a: (q, e), b: (neighbor, neighbor_edge) });
                    }
                }
            }
        }
    }
    Ok(topo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interface_count(m: &Mesh) -> usize {
        build_topology(m).unwrap().pairs.len()
    }

    #[test]
    fn rectangle_counts() {
        let m = generate_rectangle(16, 16, (0.0, 1.0), (0.0, 2.0)).unwrap();
        assert_eq!(m.quad_count(), 256);

        let m = generate_rectangle(1, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert_eq!(m.quad_count(), 1);
        assert_eq!(m.outer_edges().len(), 4);
        assert_eq!(interface_count(&m), 0);

        let m = generate_rectangle(2, 2, (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert_eq!(m.quad_count(), 4);
        assert_eq!(interface_count(&m), 4);
        assert_eq!(m.outer_edges().len(), 8);

        let m = generate_rectangle(2, 1, (0.0, 2.0), (0.0, 1.0)).unwrap();
        assert_eq!(interface_count(&m), 1);
    }

    #[test]
    fn rectangle_rejects_degenerate_range() {
        assert!(generate_rectangle(2, 2, (1.0, 1.0), (0.0, 1.0)).is_err());
        assert!(generate_rectangle(0, 2, (0.0, 1.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn rectangle_area_exact() {
        let m = generate_rectangle(7, 5, (-1.0, 2.5), (0.5, 3.0)).unwrap();
        assert!((m.area() - 3.5 * 2.5).abs() < 1e-12);
    }

    #[test]
    fn annulus_counts_and_radii() {
        let m = generate_annulus(6, 98, 1.0, 2.0).unwrap();
        assert_eq!(m.quad_count(), 588);
        for p in &m.nodes {
            let r = p.norm();
            assert!(r >= 1.0 - 1e-12 && r <= 2.0 + 1e-12);
        }

        let m = generate_annulus(1, 4, 1.0, 2.0).unwrap();
        assert_eq!(m.quad_count(), 4);
        for kinds in &m.edge_kinds {
            let n = kinds.iter().filter(|k| matches!(k, EdgeKind::Interface { .. })).count();
            assert_eq!(n, 2);
        }

        let m = generate_annulus(1, 3, 1.0, 2.0).unwrap();
        assert_eq!(interface_count(&m), 3);
    }

    #[test]
    fn annulus_rejects_bad_radii() {
        assert!(generate_annulus(2, 8, 2.0, 1.0).is_err());
        assert!(generate_annulus(2, 8, 0.0, 1.0).is_err());
        assert!(generate_annulus(2, 2, 1.0, 2.0).is_err());
    }

    #[test]
    fn annulus_area_converges() {
        let exact = std::f64::consts::PI * (4.0 - 1.0);
        let coarse = (generate_annulus(2, 16, 1.0, 2.0).unwrap().area() - exact).abs();
        let fine = (generate_annulus(2, 64, 1.0, 2.0).unwrap().area() - exact).abs();
        assert!(fine < coarse);
        assert!(fine / exact < 0.01);
    }

    #[test]
    fn disk_counts_and_rim() {
        let m = generate_disk(10, 8, 2.0).unwrap();
        assert_eq!(m.quad_count(), 420);
        let m = generate_disk(1, 1, 1.0).unwrap();
        assert_eq!(m.quad_count(), 5);

        let m = generate_disk(6, 4, 2.0).unwrap();
        for (q, e, _) in m.outer_edges() {
            let (a, b) = m.geometry(q).edge(e);
            assert!((a.norm() - 2.0).abs() < 1e-12);
            assert!((b.norm() - 2.0).abs() < 1e-12);
        }
        // Inscribed regular 24-gon.
        let exact = 12.0 * 4.0 * (std::f64::consts::TAU / 24.0).sin();
        assert!((m.area() - exact).abs() < 1e-12, "{} vs {exact}", m.area());
    }

    #[test]
    fn star_points() {
        let pts = star_boundary(200, 0.4).unwrap();
        assert_eq!(pts.len(), 200);
        assert!((pts[0].x - 0.488).abs() < 1e-12);
        assert_eq!(star_radius(1.234, 0.4), star_radius(1.234, 0.4));
        assert!(star_boundary(2, 0.4).is_err());
    }

    #[test]
    fn export_import_round_trip() {
        for m in [
            generate_rectangle(2, 2, (0.0, 1.0), (0.0, 1.0)).unwrap(),
            generate_annulus(2, 7, 0.5, 1.5).unwrap(),
            generate_disk(3, 2, 1.3).unwrap(),
        ] {
            let back = import_mesh(&export_mesh(&m)).unwrap();
            assert_eq!(back.quads, m.quads);
            assert_eq!(back.edge_kinds, m.edge_kinds);
            assert_eq!(back.tags, m.tags);
            for (a, b) in back.nodes.iter().zip(&m.nodes) {
                assert!(a.dist(*b) <= 1e-15);
            }
        }
    }

    #[test]
    fn import_hand_written_quad() {
        let text = "ldbem-mesh 1\nnodes 4\n0 0\n1 0\n1 1\n0 1\nquads 1\n0 1 2 3\ntags 4\n0 0 south\n0 1 east\n0 2 north\n0 3 west\n";
        let m = import_mesh(text).unwrap();
        assert_eq!(m.quad_count(), 1);
        assert_eq!(m.outer_edges().len(), 4);
        assert_eq!(m.tags.len(), 4);
    }

    #[test]
    fn import_errors_name_location() {
        let missing = "ldbem-mesh 1\nnodes 3\n0 0\n1 0\n1 1\nquads 1\n0 1 2 3\ntags 0\n";
        let err = import_mesh(missing).unwrap_err().to_string();
        assert!(err.contains("quad 0"), "{err}");
        assert!(err.contains("line 7"), "{err}");

        let bad_num = "ldbem-mesh 1\nnodes 1\n0 zero\n";
        assert!(import_mesh(bad_num).unwrap_err().to_string().contains("line 3"));

        let untagged = "ldbem-mesh 1\nnodes 4\n0 0\n1 0\n1 1\n0 1\nquads 1\n0 1 2 3\ntags 3\n0 0 a\n0 1 a\n0 2 a\n";
        assert!(import_mesh(untagged).unwrap_err().to_string().contains("no tag"));
    }

    #[test]
    fn rejects_edge_shared_by_three_quads() {
        let nodes = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, -1.0),
            Point2::new(0.0, -1.0),
            Point2::new(0.0, 0.5),
            Point2::new(1.0, 0.5),
        ];
        // Three quads all using the segment 0-1.
        let quads = vec![[0, 1, 2, 3], [5, 4, 1, 0], [0, 1, 7, 6]];
        let err = Mesh::new(nodes, quads, &[]).unwrap_err().to_string();
        assert!(err.contains("3 quads"), "{err}");
    }

    #[test]
    fn rejects_clockwise_quad() {
        let nodes = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ];
        let tags: Vec<_> = (0..4).map(|e| (0, e, "b".to_string())).collect();
        assert!(Mesh::new(nodes, vec![[0, 1, 2, 3]], &tags).is_err());
    }

    #[test]
    fn inverse_map_recovers_reference_point() {
        let g = QuadGeometry::new([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.2),
            Point2::new(2.3, 1.7),
            Point2::new(-0.1, 1.2),
        ]);
        let p = g.map(0.3, -0.6);
        let (xi, eta) = g.inverse_map(p).unwrap();
        assert!((xi - 0.3).abs() < 1e-13 && (eta + 0.6).abs() < 1e-13);
    }
}
