//! Conforming triangulations with edge connectivity and boundary tags.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::tensor::{self, Point, Vec2};
use crate::{Error, Result};

/// Displacement components prescribed on a Dirichlet edge. Components that
/// are not prescribed carry a traction instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Components {
    X,
    Y,
    Both,
}

impl Components {
    /// Diagonal of the projector onto the constrained components.
    pub fn mask(self) -> [f64; 2] {
        match self {
            Components::X => [1.0, 0.0],
            Components::Y => [0.0, 1.0],
            Components::Both => [1.0, 1.0],
        }
    }

    pub fn contains(self, comp: usize) -> bool {
        self.mask()[comp] != 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Interior,
    Dirichlet(Components),
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints in the order they appear in the owner triangle.
    pub endpoints: [usize; 2],
    pub owner: usize,
    /// Local edge index `k` in the owner, joining local vertices `k` and `k+1`.
    pub owner_local: usize,
    pub neighbor: Option<usize>,
    pub neighbor_local: Option<usize>,
    /// Unit normal pointing out of the owner.
    pub normal: Vec2,
    pub length: f64,
    pub midpoint: Point,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Longest edge of each triangle.
    pub element_diameters: Vec<f64>,
    pub boundary_tags: Vec<BoundaryTag>,
    /// Global edge index of local edge `k` of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds connectivity. Boundary edges start out tagged `Neumann`.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(Error::InvalidDimensions("mesh needs vertices and triangles"));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::NonConforming("triangle references a missing vertex"));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::InvertedTriangle { triangle: t });
            }
        }

        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                if let Some(&idx) = lookup.get(&key) {
                    let edge = &mut edges[idx];
                    if edge.neighbor.is_some() {
                        return Err(Error::NonConforming("edge shared by more than two triangles"));
                    }
                    if edge.endpoints != [b, a] {
                        return Err(Error::NonConforming("inconsistent orientation across an edge"));
                    }
                    edge.neighbor = Some(t);
                    edge.neighbor_local = Some(k);
                    local[k] = idx;
                } else {
                    let pa = vertices[a];
                    let pb = vertices[b];
                    let d = tensor::sub(pb, pa);
                    let length = tensor::norm(d);
                    let idx = edges.len();
                    edges.push(Edge {
                        endpoints: [a, b],
                        owner: t,
                        owner_local: k,
                        neighbor: None,
                        neighbor_local: None,
                        normal: [d[1] / length, -d[0] / length],
                        length,
                        midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                    });
                    lookup.insert(key, idx);
                    local[k] = idx;
                }
            }
            triangle_edges.push(local);
        }

        let element_diameters = triangle_edges
            .iter()
            .map(|te| te.iter().map(|&e| edges[e].length).fold(0.0, f64::max))
            .collect();
        let boundary_tags = edges
            .iter()
            .map(|e| if e.is_boundary() { BoundaryTag::Neumann } else { BoundaryTag::Interior })
            .collect();
        Ok(Self { vertices, triangles, edges, element_diameters, boundary_tags, triangle_edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Mesh size `h = max h_e`.
    pub fn h(&self) -> f64 {
        self.element_diameters.iter().copied().fold(0.0, f64::max)
    }

    fn edges_where(&self, pred: impl Fn(BoundaryTag) -> bool + 'static) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| pred(self.boundary_tags[e]))
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges_where(|t| t == BoundaryTag::Interior)
    }

    pub fn dirichlet_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges_where(|t| matches!(t, BoundaryTag::Dirichlet(_)))
    }

    pub fn neumann_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges_where(|t| t == BoundaryTag::Neumann)
    }

    /// Interior plus Dirichlet edges: the edges that carry jump terms.
    pub fn penalized_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges_where(|t| t != BoundaryTag::Neumann)
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].is_boundary())
    }

    /// Index of the vertex within `tol` of `p`.
    pub fn find_vertex(&self, p: Point, tol: f64) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| (v[0] - p[0]).abs() <= tol && (v[1] - p[1]).abs() <= tol)
            .ok_or(Error::PointNotInMesh)
    }

    /// Triangles having `v` as a vertex, in ascending order.
    pub fn triangles_at_vertex(&self, v: usize) -> Vec<usize> {
        (0..self.triangles.len()).filter(|&t| self.triangles[t].contains(&v)).collect()
    }
}

/// Retags the boundary. Each predicate receives the edge's endpoint
/// coordinates. Every boundary edge must match exactly one predicate.
pub fn classify_edges<D, N>(mut mesh: Mesh, dirichlet: D, neumann: N) -> Result<Mesh>
where
    D: Fn(Point, Point) -> Option<Components>,
    N: Fn(Point, Point) -> bool,
{
    for e in 0..mesh.edges.len() {
        let edge = &mesh.edges[e];
        if !edge.is_boundary() {
            mesh.boundary_tags[e] = BoundaryTag::Interior;
            continue;
        }
        let a = mesh.vertices[edge.endpoints[0]];
        let b = mesh.vertices[edge.endpoints[1]];
        mesh.boundary_tags[e] = match (dirichlet(a, b), neumann(a, b)) {
            (Some(_), true) => return Err(Error::OverlappingBoundaryTags { edge: e }),
            (Some(c), false) => BoundaryTag::Dirichlet(c),
            (None, true) => BoundaryTag::Neumann,
            (None, false) => return Err(Error::UncoveredBoundaryEdge { edge: e }),
        };
    }
    Ok(mesh)
}

/// Structured grid of `nx × ny` cells on `[0, length] × [origin_y, origin_y + height]`,
/// each cell split along its lower-left to upper-right diagonal.
pub fn rect_mesh(length: f64, height: f64, nx: usize, ny: usize, origin_y: f64) -> Result<Mesh> {
    if !(length > 0.0) || !(height > 0.0) || nx == 0 || ny == 0 {
        return Err(Error::InvalidDimensions("rectangle needs positive sizes and cell counts"));
    }
    mapped_grid(nx, ny, |s, t| [s * length, origin_y + t * height])
}

/// Tapered panel with corners (0,0), (48,44), (48,60), (0,44) meshed by an
/// `n × n` grid mapped bilinearly from the unit square. The left edge is
/// clamped; all other edges are traction boundaries.
pub fn cook_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidDimensions("cook mesh needs n >= 1"));
    }
    let corners = cook_corners();
    let mesh = mapped_grid(n, n, |s, t| {
        let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
        let mut p = [0.0; 2];
        for (wi, c) in w.iter().zip(corners.iter()) {
            p[0] += wi * c[0];
            p[1] += wi * c[1];
        }
        p
    })?;
    classify_edges(
        mesh,
        |a, b| (a[0] == 0.0 && b[0] == 0.0).then_some(Components::Both),
        |a, b| !(a[0] == 0.0 && b[0] == 0.0),
    )
}

/// Corners of the Cook panel, counter-clockwise from the clamped bottom.
pub fn cook_corners() -> [Point; 4] {
    [[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]]
}

fn mapped_grid(nx: usize, ny: usize, map: impl Fn(f64, f64) -> Point) -> Result<Mesh> {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // Pin the last node to exactly 1 so boundary coordinates are exact.
            let s = if i == nx { 1.0 } else { i as f64 / nx as f64 };
            let t = if j == ny { 1.0 } else { j as f64 / ny as f64 };
            vertices.push(map(s, t));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Mesh::new(vertices, triangles)
}
