//! Norms, errors against analytic fields, convergence rates and the edge
//! average interpolant.

use alloc::vec;
use alloc::vec::Vec;

use crate::femspace::{edge_quadrature, element_quadrature, ElementGeometry, FunctionSpace, QuadratureRule, SpaceKind};
use crate::material::FiberDirection;
use crate::mesh::{BoundaryTag, Mesh};
use crate::tensor::{self, Mat2, Point, Vec2};
use crate::{Error, Result};

/// An analytic displacement field with its gradient `∂u_i/∂x_j` at `[i][j]`.
pub trait ExactField {
    fn value(&self, x: Point) -> Vec2;
    fn gradient(&self, x: Point) -> Mat2;
}

/// [`ExactField`] built from two closures.
pub struct FnField<U, G> {
    pub u: U,
    pub grad: G,
}

impl<U: Fn(Point) -> Vec2, G: Fn(Point) -> Mat2> ExactField for FnField<U, G> {
    fn value(&self, x: Point) -> Vec2 {
        (self.u)(x)
    }
    fn gradient(&self, x: Point) -> Mat2 {
        (self.grad)(x)
    }
}

/// The affine field `u(x) = A x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineField {
    pub a: Mat2,
    pub b: Vec2,
}

impl ExactField for AffineField {
    fn value(&self, x: Point) -> Vec2 {
        tensor::add(tensor::mat_vec(&self.a, x), self.b)
    }
    fn gradient(&self, _x: Point) -> Mat2 {
        self.a
    }
}

/// The zero field.
pub struct Zero;

impl ExactField for Zero {
    fn value(&self, _x: Point) -> Vec2 {
        [0.0; 2]
    }
    fn gradient(&self, _x: Point) -> Mat2 {
        [[0.0; 2]; 2]
    }
}

const ERROR_DEGREE: usize = 5;

fn bary_of(xi: [f64; 2]) -> [f64; 3] {
    [1.0 - xi[0] - xi[1], xi[0], xi[1]]
}

fn element_rule() -> QuadratureRule {
    element_quadrature(ERROR_DEGREE).expect("rule")
}

fn edge_rule() -> QuadratureRule {
    edge_quadrature(ERROR_DEGREE).expect("rule")
}

/// Five-point Gauss on four equal panels, for edge averages of non-polynomial
/// fields that must hold to near round-off.
fn fine_edge_rule() -> QuadratureRule {
    const PANELS: usize = 4;
    let base = edge_quadrature(9).expect("rule");
    let mut points = Vec::with_capacity(PANELS * base.len());
    let mut weights = Vec::with_capacity(PANELS * base.len());
    for k in 0..PANELS {
        for (s, w) in base.points.iter().zip(&base.weights) {
            points.push([(k as f64 + s[0]) / PANELS as f64, 0.0]);
            weights.push(w / PANELS as f64);
        }
    }
    QuadratureRule { points, weights, degree: base.degree }
}

fn frob2(m: &Mat2) -> f64 {
    m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]
}

fn mat_sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// `‖v‖_DG` of the difference between a discrete field and an analytic one:
/// `Σ_e ‖ε(v)‖² + ½ Σ_{E ∈ Γ_iD} h_E⁻¹ ‖⌊v⌋‖²`. The analytic field is assumed
/// continuous, so only its Dirichlet-edge trace enters the jumps.
pub fn dg_error(space: &FunctionSpace, coeffs: &[f64], exact: &dyn ExactField) -> f64 {
    let mesh = space.mesh;
    let rule = element_rule();
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let geom = space.geometry(t);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let (_, gh) = space.evaluate(coeffs, t, &geom, bary_of(*xi));
            let d = mat_sub(&gh, &exact.gradient(geom.map(*xi)));
            total += 2.0 * geom.area * w * frob2(&tensor::sym(&d));
        }
    }
    let erule = edge_rule();
    for e in mesh.penalized_edges() {
        let edge = &mesh.edges[e];
        let mask = match mesh.boundary_tags[e] {
            BoundaryTag::Dirichlet(c) => c.mask(),
            _ => [1.0, 1.0],
        };
        let gi = space.geometry(edge.owner);
        let ge = edge.neighbor.map(|nb| (nb, space.geometry(nb)));
        let [a, b] = edge.endpoints;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let mut sum = 0.0;
        for (s, w) in erule.points.iter().zip(&erule.weights) {
            let x = [pa[0] + s[0] * (pb[0] - pa[0]), pa[1] + s[0] * (pb[1] - pa[1])];
            let (ui, _) = space.evaluate(coeffs, edge.owner, &gi, gi.barycentric(x));
            let other = match &ge {
                Some((nb, g)) => space.evaluate(coeffs, *nb, g, g.barycentric(x)).0,
                None => exact.value(x),
            };
            let m = [mask[0] * (ui[0] - other[0]), mask[1] * (ui[1] - other[1])];
            sum += w * edge.length * tensor::dot(m, m);
        }
        total += 0.5 * sum / edge.length;
    }
    libm::sqrt(total)
}

/// `‖v‖_DG` of a discrete field.
pub fn dg_norm(space: &FunctionSpace, coeffs: &[f64]) -> f64 {
    dg_error(space, coeffs, &Zero)
}

/// Elementwise H¹ comparison with an analytic field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Error {
    /// Broken H¹ seminorm of the error.
    pub seminorm: f64,
    pub l2: f64,
    /// `sqrt(seminorm² + l2²)`.
    pub full: f64,
    /// `full` divided by the full H¹ norm of the analytic field.
    pub relative: f64,
}

pub fn broken_h1_error(space: &FunctionSpace, coeffs: &[f64], exact: &dyn ExactField) -> Result<H1Error> {
    let rule = element_rule();
    let (mut semi, mut l2, mut ref_semi, mut ref_l2) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..space.mesh.num_triangles() {
        let geom = space.geometry(t);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let x = geom.map(*xi);
            let (uh, gh) = space.evaluate(coeffs, t, &geom, bary_of(*xi));
            let (u, g) = (exact.value(x), exact.gradient(x));
            let w = 2.0 * geom.area * w;
            semi += w * frob2(&mat_sub(&gh, &g));
            let d = tensor::sub(uh, u);
            l2 += w * tensor::dot(d, d);
            ref_semi += w * frob2(&g);
            ref_l2 += w * tensor::dot(u, u);
        }
    }
    let reference = libm::sqrt(ref_semi + ref_l2);
    if !(reference > 0.0) {
        return Err(Error::ZeroReference);
    }
    let full = libm::sqrt(semi + l2);
    Ok(H1Error { seminorm: libm::sqrt(semi), l2: libm::sqrt(l2), full, relative: full / reference })
}

/// Observed orders `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn convergence_rates(levels: &[(f64, f64)]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::InvalidSequence("at least two levels are needed"));
    }
    for w in levels.windows(2) {
        if !(w[1].0 < w[0].0) || !(w[1].0 > 0.0) {
            return Err(Error::InvalidSequence("mesh sizes must be positive and strictly decreasing"));
        }
    }
    if levels.iter().any(|&(_, e)| !(e > 0.0)) {
        return Err(Error::InvalidSequence("errors must be positive"));
    }
    Ok(levels.windows(2).map(|w| libm::log(w[0].1 / w[1].1) / libm::log(w[0].0 / w[1].0)).collect())
}

/// Order observed between the first and last of the final `count` levels.
pub fn rate_over_last(levels: &[(f64, f64)], count: usize) -> Result<f64> {
    if count < 2 || levels.len() < count {
        return Err(Error::InvalidSequence("not enough levels for the requested window"));
    }
    let window = &levels[levels.len() - count..];
    convergence_rates(window)?;
    let (first, last) = (window[0], window[count - 1]);
    Ok(libm::log(first.1 / last.1) / libm::log(first.0 / last.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecord {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub dg_err: f64,
    pub h1_rel_err: f64,
    pub l2_err: f64,
}

/// Errors over a refinement sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub records: Vec<ErrorRecord>,
}

impl ErrorReport {
    /// Rate of the relative H¹ error between consecutive levels; the first
    /// level has none.
    pub fn rates_h1(&self) -> Vec<Option<f64>> {
        let mut out = vec![None];
        for w in self.records.windows(2) {
            let pair = [(w[0].h, w[0].h1_rel_err), (w[1].h, w[1].h1_rel_err)];
            out.push(convergence_rates(&pair).ok().map(|r| r[0]));
        }
        out.truncate(self.records.len());
        out
    }

    /// H¹ rate over the final `count` levels.
    pub fn h1_rate_over_last(&self, count: usize) -> Result<f64> {
        let pairs: Vec<_> = self.records.iter().map(|r| (r.h, r.h1_rel_err)).collect();
        rate_over_last(&pairs, count)
    }

    pub fn finest(&self) -> Option<&ErrorRecord> {
        self.records.last()
    }
}

/// Value of a discrete field at a mesh vertex; for discontinuous fields the
/// average over the elements sharing the vertex.
pub fn vertex_value(space: &FunctionSpace, coeffs: &[f64], vertex: usize) -> Vec2 {
    let mesh = space.mesh;
    let tris = mesh.triangles_at_vertex(vertex);
    let mut sum = [0.0; 2];
    for &t in &tris {
        let j = mesh.triangles[t].iter().position(|&v| v == vertex).expect("vertex");
        let node = space.element_nodes(t)[j];
        sum[0] += coeffs[2 * node];
        sum[1] += coeffs[2 * node + 1];
    }
    tensor::scale(1.0 / tris.len() as f64, sum)
}

/// Edge averages `h_E⁻¹ ∫_E u ds` of local edge `k = (v_k, v_{k+1})`.
fn edge_averages(mesh: &Mesh, t: usize, u: &dyn Fn(Point) -> Vec2) -> [Vec2; 3] {
    let rule = fine_edge_rule();
    let pts = mesh.triangle_points(t);
    let mut out = [[0.0; 2]; 3];
    for (k, avg) in out.iter_mut().enumerate() {
        let (pa, pb) = (pts[k], pts[(k + 1) % 3]);
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let v = u([pa[0] + s[0] * (pb[0] - pa[0]), pa[1] + s[0] * (pb[1] - pa[1])]);
            avg[0] += w * v[0];
            avg[1] += w * v[1];
        }
    }
    out
}

/// The DG1 field that takes, on each element, the edge averages of `u` at
/// the three edge midpoints.
pub fn midpoint_interpolant(space: &FunctionSpace, u: &dyn Fn(Point) -> Vec2) -> Result<Vec<f64>> {
    if space.kind != SpaceKind::Dg1 {
        return Err(Error::WrongSpace { expected: "DG1" });
    }
    let mesh = space.mesh;
    let mut coeffs = vec![0.0; space.dof_count()];
    for t in 0..mesh.num_triangles() {
        let m = edge_averages(mesh, t, u);
        for (j, &node) in space.element_nodes(t).iter().enumerate() {
            // Vertex j lies on edges j and j+2 and opposite edge j+1.
            let (a, b, c) = (m[j], m[(j + 2) % 3], m[(j + 1) % 3]);
            coeffs[2 * node] = a[0] + b[0] - c[0];
            coeffs[2 * node + 1] = a[1] + b[1] - c[1];
        }
    }
    Ok(coeffs)
}

/// Largest absolute defining residuals of the edge-average interpolant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolantReport {
    /// `|∫_E (u − Πu) ds|` over all element edges.
    pub edge_mean: f64,
    /// `|∫_E (u − Πu)·n ds|`.
    pub edge_normal: f64,
    /// `|∫_Ω_e ∇·(u − Πu) dx|`.
    pub divergence: f64,
    /// `|∫_Ω_e M:ε(u − Πu) dx|`.
    pub fibre_strain: f64,
}

impl InterpolantReport {
    pub fn max(&self) -> f64 {
        self.edge_mean.max(self.edge_normal).max(self.divergence).max(self.fibre_strain)
    }
}

/// `rule` repeated on the `4^levels` congruent subtriangles of the reference
/// triangle.
fn composite_rule(rule: &QuadratureRule, levels: u32) -> QuadratureRule {
    let mut cells = vec![[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(4 * cells.len());
        for [a, b, c] in cells {
            let mid = |p: [f64; 2], q: [f64; 2]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]);
        }
        cells = next;
    }
    let share = 1.0 / cells.len() as f64;
    let mut points = Vec::with_capacity(cells.len() * rule.len());
    let mut weights = Vec::with_capacity(cells.len() * rule.len());
    for [a, b, c] in &cells {
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            points.push([
                a[0] + xi[0] * (b[0] - a[0]) + xi[1] * (c[0] - a[0]),
                a[1] + xi[0] * (b[1] - a[1]) + xi[1] * (c[1] - a[1]),
            ]);
            weights.push(share * w);
        }
    }
    QuadratureRule { points, weights, degree: rule.degree }
}

pub fn interpolant_properties_check(space: &FunctionSpace, exact: &dyn ExactField, fiber: &FiberDirection) -> Result<InterpolantReport> {
    let u = |x: Point| exact.value(x);
    let coeffs = midpoint_interpolant(space, &u)?;
    let mesh = space.mesh;
    let m = fiber.structural_tensor();
    let erule = fine_edge_rule();
    // The element identities are exact, so the integrals are taken on a
    // refined composite rule to keep quadrature error below the check.
    let trule = composite_rule(&element_quadrature(6).expect("rule"), 2);
    let mut report = InterpolantReport { edge_mean: 0.0, edge_normal: 0.0, divergence: 0.0, fibre_strain: 0.0 };
    for t in 0..mesh.num_triangles() {
        let geom = space.geometry(t);
        let pts = geom.vertices;
        for k in 0..3 {
            let (pa, pb) = (pts[k], pts[(k + 1) % 3]);
            let d = tensor::sub(pb, pa);
            let len = tensor::norm(d);
            let n = [d[1] / len, -d[0] / len];
            let mut mean = [0.0; 2];
            for (s, w) in erule.points.iter().zip(&erule.weights) {
                let x = [pa[0] + s[0] * d[0], pa[1] + s[0] * d[1]];
                let (uh, _) = space.evaluate(&coeffs, t, &geom, geom.barycentric(x));
                let diff = tensor::sub(exact.value(x), uh);
                mean = tensor::add(mean, tensor::scale(w * len, diff));
            }
            report.edge_mean = report.edge_mean.max(mean[0].abs()).max(mean[1].abs());
            report.edge_normal = report.edge_normal.max(tensor::dot(mean, n).abs());
        }
        let (mut div, mut fib) = (0.0, 0.0);
        let (_, gh) = space.evaluate(&coeffs, t, &geom, [1.0 / 3.0; 3]);
        for (xi, w) in trule.points.iter().zip(&trule.weights) {
            let g = mat_sub(&exact.gradient(geom.map(*xi)), &gh);
            let w = 2.0 * geom.area * w;
            div += w * tensor::trace(&g);
            fib += w * tensor::ddot(&m, &tensor::sym(&g));
        }
        report.divergence = report.divergence.max(div.abs());
        report.fibre_strain = report.fibre_strain.max(fib.abs());
    }
    Ok(report)
}

/// Interpolation errors of the edge-average interpolant on one mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationErrors {
    pub h: f64,
    pub l2: f64,
    pub h1_seminorm: f64,
    pub divergence: f64,
    pub fibre_strain: f64,
    /// `|u − Πu|₂` and `|u|₂`, which coincide because `Πu` is linear.
    pub second_seminorm: (f64, f64),
    /// `|∇·(u − Πu)|₁` and `|∇·u|₁`.
    pub divergence_seminorm: (f64, f64),
    /// `|M:ε(u − Πu)|₁` and `|M:ε(u)|₁`.
    pub fibre_strain_seminorm: (f64, f64),
}

/// Observed rates over a mesh sequence together with the per-mesh data.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationReport {
    pub levels: Vec<InterpolationErrors>,
    pub l2_rate: f64,
    pub h1_rate: f64,
    pub divergence_rate: f64,
    pub fibre_strain_rate: f64,
    /// Largest relative mismatch in the three seminorm identities.
    pub identity_mismatch: f64,
}

/// Second derivatives `∂²u_i/∂x_j∂x_k` at `[i][j][k]`.
pub type Hessian = [[[f64; 2]; 2]; 2];

pub fn interpolation_estimate_check(
    meshes: &[Mesh],
    exact: &dyn ExactField,
    hessian: &dyn Fn(Point) -> Hessian,
    fiber: &FiberDirection,
) -> Result<InterpolationReport> {
    if meshes.len() < 2 {
        return Err(Error::InvalidSequence("at least two meshes are needed"));
    }
    let m = fiber.structural_tensor();
    let rule = element_quadrature(6).expect("rule");
    let u = |x: Point| exact.value(x);
    let mut levels = Vec::new();
    for mesh in meshes {
        let space = FunctionSpace::new(SpaceKind::Dg1, mesh);
        let coeffs = midpoint_interpolant(&space, &u)?;
        let (mut l2, mut h1, mut div, mut fib) = (0.0, 0.0, 0.0, 0.0);
        let (mut d2, mut dd, mut df) = (0.0, 0.0, 0.0);
        let (mut d2_err, mut dd_err, mut df_err) = (0.0, 0.0, 0.0);
        for t in 0..mesh.num_triangles() {
            let geom: ElementGeometry = space.geometry(t);
            // Πu is linear on the element, so its second derivatives vanish.
            let pi_hessian: Hessian = [[[0.0; 2]; 2]; 2];
            for (xi, w) in rule.points.iter().zip(&rule.weights) {
                let x = geom.map(*xi);
                let w = 2.0 * geom.area * w;
                let (uh, gh) = space.evaluate(&coeffs, t, &geom, bary_of(*xi));
                let e = tensor::sub(exact.value(x), uh);
                let g = mat_sub(&exact.gradient(x), &gh);
                l2 += w * tensor::dot(e, e);
                h1 += w * frob2(&g);
                let tr = tensor::trace(&g);
                div += w * tr * tr;
                let mf = tensor::ddot(&m, &tensor::sym(&g));
                fib += w * mf * mf;

                let hu = hessian(x);
                let mut he = [[[0.0; 2]; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            he[i][j][k] = hu[i][j][k] - pi_hessian[i][j][k];
                        }
                    }
                }
                let second = |h: &Hessian| h.iter().flatten().flatten().map(|v| v * v).sum::<f64>();
                // Gradient of ∇·u: ∂_k (∂_i u_i).
                let grad_div = |h: &Hessian| [h[0][0][0] + h[1][1][0], h[0][0][1] + h[1][1][1]];
                // Gradient of M:ε(u) = M_ij ∂_j u_i (M symmetric).
                let grad_fib = |h: &Hessian| {
                    let mut out = [0.0; 2];
                    for (k, o) in out.iter_mut().enumerate() {
                        for i in 0..2 {
                            for j in 0..2 {
                                *o += m[i][j] * h[i][j][k];
                            }
                        }
                    }
                    out
                };
                d2 += w * second(&hu);
                d2_err += w * second(&he);
                let (a, b) = (grad_div(&hu), grad_div(&he));
                dd += w * tensor::dot(a, a);
                dd_err += w * tensor::dot(b, b);
                let (a, b) = (grad_fib(&hu), grad_fib(&he));
                df += w * tensor::dot(a, a);
                df_err += w * tensor::dot(b, b);
            }
        }
        levels.push(InterpolationErrors {
            h: mesh.h(),
            l2: libm::sqrt(l2),
            h1_seminorm: libm::sqrt(h1),
            divergence: libm::sqrt(div),
            fibre_strain: libm::sqrt(fib),
            second_seminorm: (libm::sqrt(d2_err), libm::sqrt(d2)),
            divergence_seminorm: (libm::sqrt(dd_err), libm::sqrt(dd)),
            fibre_strain_seminorm: (libm::sqrt(df_err), libm::sqrt(df)),
        });
    }
    let rate = |f: &dyn Fn(&InterpolationErrors) -> f64| {
        let pairs: Vec<_> = levels.iter().map(|l| (l.h, f(l))).collect();
        rate_over_last(&pairs, pairs.len())
    };
    let rel = |(a, b): (f64, f64)| if b > 0.0 { (a - b).abs() / b } else { a };
    let identity_mismatch = levels
        .iter()
        .map(|l| rel(l.second_seminorm).max(rel(l.divergence_seminorm)).max(rel(l.fibre_strain_seminorm)))
        .fold(0.0, f64::max);
    Ok(InterpolationReport {
        l2_rate: rate(&|l| l.l2)?,
        h1_rate: rate(&|l| l.h1_seminorm)?,
        divergence_rate: rate(&|l| l.divergence)?,
        fibre_strain_rate: rate(&|l| l.fibre_strain)?,
        identity_mismatch,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{classify_edges, rect_mesh, Components};
    use proptest::prelude::*;

    fn unit_triangle() -> Mesh {
        Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn dg_norm_examples() {
        let mesh = unit_triangle();
        let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
        assert_eq!(dg_norm(&space, &vec![0.0; 6]), 0.0);
        let stretch = space.interpolate(|x| [x[0], 0.0]);
        assert!((dg_norm(&space, &stretch).powi(2) - 0.5).abs() < 1e-14);
        let rotation = space.interpolate(|x| [-x[1], x[0]]);
        assert!(dg_norm(&space, &rotation) < 1e-14);
    }

    #[test]
    fn rates() {
        let r = convergence_rates(&[(0.04, 4e-2), (0.02, 2e-2), (0.01, 1e-2)]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 1.0).abs() < 1e-14);
        let r = convergence_rates(&[(0.1, 1.0), (0.05, 0.25)]).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-14);
        assert!(matches!(convergence_rates(&[(0.1, 1.0)]), Err(Error::InvalidSequence(_))));
        assert!(matches!(convergence_rates(&[(0.1, 1.0), (0.2, 0.5)]), Err(Error::InvalidSequence(_))));
        let last = rate_over_last(&[(0.4, 9.0), (0.2, 4.0), (0.1, 2.0), (0.05, 1.0)], 3).unwrap();
        assert!((last - 1.0).abs() < 1e-14);
    }

    #[test]
    fn h1_error_examples() {
        let mesh = rect_mesh(1.0, 1.0, 3, 3, 0.0).unwrap();
        let lin = AffineField { a: [[0.1, 0.2], [0.3, -0.1]], b: [0.5, -0.2] };
        for kind in [SpaceKind::Cg1, SpaceKind::Cg2, SpaceKind::Dg1] {
            let space = FunctionSpace::new(kind, &mesh);
            let c = space.interpolate(|x| lin.value(x));
            assert!(broken_h1_error(&space, &c, &lin).unwrap().full < 1e-12);
            // A constant shift leaves the seminorm unchanged.
            let shifted = space.interpolate(|x| tensor::add(lin.value(x), [1.0, 2.0]));
            let e = broken_h1_error(&space, &shifted, &lin).unwrap();
            assert!(e.seminorm < 1e-12 && (e.l2 - libm::sqrt(5.0)).abs() < 1e-12);
        }
        let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
        assert_eq!(broken_h1_error(&space, &vec![0.0; space.dof_count()], &Zero), Err(Error::ZeroReference));

        let quad = FnField { u: |x: Point| [x[0] * x[0], 0.0], grad: |x: Point| [[2.0 * x[0], 0.0], [0.0, 0.0]] };
        let err = |n: usize| {
            let mesh = rect_mesh(1.0, 1.0, n, n, 0.0).unwrap();
            let space = FunctionSpace::new(SpaceKind::Cg1, &mesh);
            let c = space.interpolate(|x| quad.value(x));
            broken_h1_error(&space, &c, &quad).unwrap().seminorm
        };
        let ratio = err(8) / err(16);
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn interpolant_examples() {
        let mesh = unit_triangle();
        let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
        let c = midpoint_interpolant(&space, &|x: Point| [x[0] * x[0], 0.0]).unwrap();
        let geom = space.geometry(0);
        let (v, _) = space.evaluate(&c, 0, &geom, geom.barycentric([0.5, 0.0]));
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-15);

        let mesh = rect_mesh(2.0, 1.0, 3, 2, 0.0).unwrap();
        let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
        let lin = AffineField { a: [[0.1, 0.2], [0.3, -0.1]], b: [0.5, -0.2] };
        let c = midpoint_interpolant(&space, &|x| lin.value(x)).unwrap();
        let nodal = space.interpolate(|x| lin.value(x));
        for (a, b) in c.iter().zip(&nodal) {
            assert!((a - b).abs() < 1e-14);
        }
        let report = interpolant_properties_check(&space, &lin, &FiberDirection::from_angle(0.3)).unwrap();
        assert!(report.max() < 1e-14);
    }

    #[test]
    fn vertex_average() {
        let mesh = rect_mesh(1.0, 1.0, 1, 1, 0.0).unwrap();
        let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
        let mut c = vec![0.0; space.dof_count()];
        // Vertex 0 is local vertex 0 of both triangles.
        c[0] = 1.0;
        c[6] = 3.0;
        assert_eq!(vertex_value(&space, &c, 0), [2.0, 0.0]);
    }

    #[test]
    fn dirichlet_jump_uses_mask() {
        let mesh = rect_mesh(1.0, 1.0, 1, 1, 0.0).unwrap();
        let left = |a: Point, b: Point| a[0] == 0.0 && b[0] == 0.0;
        let mesh = classify_edges(mesh, |a, b| left(a, b).then_some(Components::X), |a, b| !left(a, b)).unwrap();
        let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
        // A vertical translation is invisible to an x-only constraint.
        let c = space.interpolate(|_| [0.0, 1.0]);
        assert!(dg_norm(&space, &c) < 1e-15);
        let c = space.interpolate(|_| [1.0, 0.0]);
        // ½ · (1/h) · h · 1 with h = 1.
        assert!((dg_norm(&space, &c).powi(2) - 0.5).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn quadratic_fields_satisfy_interpolant_identities(
            c in proptest::array::uniform12(-1.0f64..1.0), angle in 0.0f64..3.14159) {
            let mesh = rect_mesh(2.0, 1.0, 3, 2, -0.5).unwrap();
            let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
            let field = FnField {
                u: move |x: Point| [
                    c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1],
                    c[6] + c[7] * x[0] + c[8] * x[1] + c[9] * x[0] * x[0] + c[10] * x[0] * x[1] + c[11] * x[1] * x[1],
                ],
                grad: move |x: Point| [
                    [c[1] + 2.0 * c[3] * x[0] + c[4] * x[1], c[2] + c[4] * x[0] + 2.0 * c[5] * x[1]],
                    [c[7] + 2.0 * c[9] * x[0] + c[10] * x[1], c[8] + c[10] * x[0] + 2.0 * c[11] * x[1]],
                ],
            };
            let report = interpolant_properties_check(&space, &field, &FiberDirection::from_angle(angle)).unwrap();
            prop_assert!(report.max() < 1e-13, "{:?}", report);
        }

        #[test]
        fn dg_norm_is_positive_with_dirichlet_edges(v in proptest::collection::vec(-1.0f64..1.0, 48)) {
            let mesh = rect_mesh(1.0, 1.0, 2, 2, 0.0).unwrap();
            let left = |a: Point, b: Point| a[0] == 0.0 && b[0] == 0.0;
            let mesh = classify_edges(mesh, |a, b| left(a, b).then_some(Components::Both), |a, b| !left(a, b)).unwrap();
            let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
            prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
            prop_assert!(dg_norm(&space, &v) > 0.0);
        }
    }
}
