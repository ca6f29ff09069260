//! Vector-valued Lagrange spaces on triangles and the quadrature rules used
//! to integrate over elements and edges.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::Mesh;
use crate::tensor::{Mat2, Point, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Cg1,
    Cg2,
    Dg1,
}

impl SpaceKind {
    pub fn nodes_per_element(self) -> usize {
        match self {
            SpaceKind::Cg1 | SpaceKind::Dg1 => 3,
            SpaceKind::Cg2 => 6,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            SpaceKind::Cg1 | SpaceKind::Dg1 => 1,
            SpaceKind::Cg2 => 2,
        }
    }

    pub fn is_discontinuous(self) -> bool {
        self == SpaceKind::Dg1
    }
}

/// Quadrature on the reference triangle `(0,0), (1,0), (0,1)` (weights sum
/// to 1/2) or on the reference edge `[0, 1]` (points have one coordinate,
/// weights sum to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn symmetric_orbits(degree: usize, orbits: &[(f64, f64)], centroid: Option<f64>, six: &[(f64, f64, f64)]) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if let Some(w) = centroid {
        points.push([1.0 / 3.0, 1.0 / 3.0]);
        weights.push(0.5 * w);
    }
    for &(a, w) in orbits {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [b, a], [a, b]] {
            points.push(p);
            weights.push(0.5 * w);
        }
    }
    for &(a, b, w) in six {
        let c = 1.0 - a - b;
        for p in [[a, b], [b, a], [b, c], [c, b], [c, a], [a, c]] {
            points.push(p);
            weights.push(0.5 * w);
        }
    }
    QuadratureRule { points, weights, degree }
}

/// Symmetric rules with positive weights, exact to the requested degree.
pub fn element_quadrature(degree: usize) -> Result<QuadratureRule> {
    match degree {
        1 => Ok(symmetric_orbits(1, &[], Some(1.0), &[])),
        2 => Ok(symmetric_orbits(2, &[(1.0 / 6.0, 1.0 / 3.0)], None, &[])),
        3 | 4 => Ok(symmetric_orbits(
            4,
            &[
                (0.445_948_490_915_964_886_3, 0.223_381_589_678_011_465_7),
                (0.091_576_213_509_770_743_46, 0.109_951_743_655_321_867_6),
            ],
            None,
            &[],
        )),
        5 => {
            let r = libm::sqrt(15.0);
            Ok(symmetric_orbits(
                5,
                &[((6.0 - r) / 21.0, (155.0 - r) / 1200.0), ((6.0 + r) / 21.0, (155.0 + r) / 1200.0)],
                Some(9.0 / 40.0),
                &[],
            ))
        }
        6 => Ok(symmetric_orbits(
            6,
            &[
                (0.249_286_745_170_910_421_3, 0.116_786_275_726_379_366_0),
                (0.063_089_014_491_502_228_34, 0.050_844_906_370_206_816_92),
            ],
            None,
            &[(0.053_145_049_844_816_947_35, 0.310_352_451_033_784_405_4, 0.082_851_075_618_373_575_19)],
        )),
        _ => Err(Error::UnsupportedDegree { degree }),
    }
}

/// Gauss–Legendre rule on `[0, 1]` with the fewest points exact to `degree`.
/// Degree 1 is the one-point midpoint rule.
pub fn edge_quadrature(degree: usize) -> Result<QuadratureRule> {
    let n = match degree {
        0 => return Err(Error::UnsupportedDegree { degree }),
        d if d <= 9 => (d + 2) / 2,
        _ => return Err(Error::UnsupportedDegree { degree }),
    };
    let (nodes, w): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let x = 1.0 / libm::sqrt(3.0);
            (vec![-x, x], vec![1.0, 1.0])
        }
        3 => {
            let x = libm::sqrt(0.6);
            (vec![-x, 0.0, x], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let r = 2.0 / 7.0 * libm::sqrt(1.2);
            let (x1, x2) = (libm::sqrt(3.0 / 7.0 - r), libm::sqrt(3.0 / 7.0 + r));
            let s = libm::sqrt(30.0);
            let (w1, w2) = ((18.0 + s) / 36.0, (18.0 - s) / 36.0);
            (vec![-x2, -x1, x1, x2], vec![w2, w1, w1, w2])
        }
        _ => {
            let r = 2.0 * libm::sqrt(10.0 / 7.0);
            let (x1, x2) = (libm::sqrt(5.0 - r) / 3.0, libm::sqrt(5.0 + r) / 3.0);
            let s = 13.0 * libm::sqrt(70.0);
            let (w1, w2) = ((322.0 + s) / 900.0, (322.0 - s) / 900.0);
            (vec![-x2, -x1, 0.0, x1, x2], vec![w2, w1, 128.0 / 225.0, w1, w2])
        }
    };
    Ok(QuadratureRule {
        points: nodes.iter().map(|x| [0.5 * (x + 1.0), 0.0]).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
        degree: 2 * n - 1,
    })
}

/// Edge average `∫₀¹ v(s) ds` of a trace given on the reference edge: the
/// L²-projection onto constants. Exact for polynomial traces up to degree 9.
pub fn pi0_edge(trace: impl Fn(f64) -> f64) -> f64 {
    let rule = edge_quadrature(9).expect("degree 9 edge rule");
    rule.points.iter().zip(&rule.weights).map(|(p, w)| w * trace(p[0])).sum()
}

/// Affine data of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_bary: [Vec2; 3],
}

impl ElementGeometry {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grad_bary = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        Self { vertices, area: 0.5 * det, grad_bary }
    }

    pub fn of(mesh: &Mesh, t: usize) -> Self {
        Self::new(mesh.triangle_points(t))
    }

    /// Physical point of reference coordinates `(ξ, η)`.
    pub fn map(&self, xi: [f64; 2]) -> Point {
        let [p0, p1, p2] = self.vertices;
        [
            p0[0] + xi[0] * (p1[0] - p0[0]) + xi[1] * (p2[0] - p0[0]),
            p0[1] + xi[0] * (p1[1] - p0[1]) + xi[1] * (p2[1] - p0[1]),
        ]
    }

    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let p0 = self.vertices[0];
        let d = [x[0] - p0[0], x[1] - p0[1]];
        let l1 = self.grad_bary[1][0] * d[0] + self.grad_bary[1][1] * d[1];
        let l2 = self.grad_bary[2][0] * d[0] + self.grad_bary[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn centroid(&self) -> Point {
        let [a, b, c] = self.vertices;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }
}

/// Local P2 midpoint nodes sit on these vertex pairs.
pub const P2_EDGE_VERTICES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Scalar basis values and gradients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeValues {
    pub count: usize,
    pub values: [f64; 6],
    pub grads: [Vec2; 6],
}

pub fn p1_shape(geom: &ElementGeometry, bary: [f64; 3]) -> ShapeValues {
    let mut s = ShapeValues { count: 3, values: [0.0; 6], grads: [[0.0; 2]; 6] };
    s.values[..3].copy_from_slice(&bary);
    s.grads[..3].copy_from_slice(&geom.grad_bary);
    s
}

pub fn p2_shape(geom: &ElementGeometry, bary: [f64; 3]) -> ShapeValues {
    let g = &geom.grad_bary;
    let mut s = ShapeValues { count: 6, values: [0.0; 6], grads: [[0.0; 2]; 6] };
    for i in 0..3 {
        let l = bary[i];
        s.values[i] = l * (2.0 * l - 1.0);
        let f = 4.0 * l - 1.0;
        s.grads[i] = [f * g[i][0], f * g[i][1]];
    }
    for (k, [i, j]) in P2_EDGE_VERTICES.iter().copied().enumerate() {
        s.values[3 + k] = 4.0 * bary[i] * bary[j];
        s.grads[3 + k] = [
            4.0 * (bary[i] * g[j][0] + bary[j] * g[i][0]),
            4.0 * (bary[i] * g[j][1] + bary[j] * g[i][1]),
        ];
    }
    s
}

/// A vector-valued Lagrange space with interleaved components:
/// global dof `2·node + component`.
#[derive(Debug, Clone)]
pub struct FunctionSpace<'a> {
    pub kind: SpaceKind,
    pub mesh: &'a Mesh,
    num_nodes: usize,
    element_nodes: Vec<usize>,
}

impl<'a> FunctionSpace<'a> {
    pub fn new(kind: SpaceKind, mesh: &'a Mesh) -> Self {
        let nt = mesh.num_triangles();
        let npe = kind.nodes_per_element();
        let mut element_nodes = Vec::with_capacity(nt * npe);
        let num_nodes = match kind {
            SpaceKind::Cg1 => {
                for tri in &mesh.triangles {
                    element_nodes.extend_from_slice(tri);
                }
                mesh.num_vertices()
            }
            SpaceKind::Dg1 => {
                element_nodes.extend(0..3 * nt);
                3 * nt
            }
            SpaceKind::Cg2 => {
                let nv = mesh.num_vertices();
                for (t, tri) in mesh.triangles.iter().enumerate() {
                    element_nodes.extend_from_slice(tri);
                    // Local P2 edge k joins local vertices (k, k+1): the mesh's local edge k.
                    for k in 0..3 {
                        element_nodes.push(nv + mesh.triangle_edges[t][k]);
                    }
                }
                nv + mesh.num_edges()
            }
        };
        Self { kind, mesh, num_nodes, element_nodes }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dof_count(&self) -> usize {
        2 * self.num_nodes
    }

    pub fn nodes_per_element(&self) -> usize {
        self.kind.nodes_per_element()
    }

    pub fn element_nodes(&self, t: usize) -> &[usize] {
        let npe = self.nodes_per_element();
        &self.element_nodes[t * npe..(t + 1) * npe]
    }

    /// Global dofs of an element, ordered `(node 0, x), (node 0, y), (node 1, x), …`.
    pub fn element_dofs(&self, t: usize) -> Vec<usize> {
        self.element_nodes(t).iter().flat_map(|&n| [2 * n, 2 * n + 1]).collect()
    }

    pub fn geometry(&self, t: usize) -> ElementGeometry {
        ElementGeometry::of(self.mesh, t)
    }

    pub fn shape_at_bary(&self, geom: &ElementGeometry, bary: [f64; 3]) -> ShapeValues {
        match self.kind {
            SpaceKind::Cg1 | SpaceKind::Dg1 => p1_shape(geom, bary),
            SpaceKind::Cg2 => p2_shape(geom, bary),
        }
    }

    /// Basis values and gradients of element `t` at physical point `x`.
    pub fn shape_eval(&self, t: usize, x: Point) -> Result<ShapeValues> {
        let geom = self.geometry(t);
        let bary = geom.barycentric(x);
        if bary.iter().any(|&l| !(-1e-12..=1.0 + 1e-12).contains(&l)) {
            return Err(Error::PointOutsideElement { element: t });
        }
        Ok(self.shape_at_bary(&geom, bary))
    }

    /// Physical location of each local node of element `t`.
    pub fn element_node_points(&self, t: usize) -> Vec<Point> {
        let [a, b, c] = self.mesh.triangle_points(t);
        let mut pts = vec![a, b, c];
        if self.kind == SpaceKind::Cg2 {
            for [i, j] in P2_EDGE_VERTICES {
                let (p, q) = ([a, b, c][i], [a, b, c][j]);
                pts.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            }
        }
        pts
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(Point) -> Vec2) -> Vec<f64> {
        let mut out = vec![0.0; self.dof_count()];
        for t in 0..self.mesh.num_triangles() {
            for (node, x) in self.element_nodes(t).iter().zip(self.element_node_points(t)) {
                let v = f(x);
                out[2 * node] = v[0];
                out[2 * node + 1] = v[1];
            }
        }
        out
    }

    /// Value and gradient (`∂u_i/∂x_j` at `[i][j]`) of a discrete field.
    pub fn evaluate(&self, coeffs: &[f64], t: usize, geom: &ElementGeometry, bary: [f64; 3]) -> (Vec2, Mat2) {
        let shape = self.shape_at_bary(geom, bary);
        let mut u = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for (a, &node) in self.element_nodes(t).iter().enumerate() {
            for c in 0..2 {
                let coef = coeffs[2 * node + c];
                u[c] += coef * shape.values[a];
                grad[c][0] += coef * shape.grads[a][0];
                grad[c][1] += coef * shape.grads[a][1];
            }
        }
        (u, grad)
    }
}
