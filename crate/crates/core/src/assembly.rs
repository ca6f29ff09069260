//! Sparse system assembly for the conforming and interior penalty methods.
//!
//! Jumps are `⌊v⌋ = (v_i − v_e) ⊗ n` with `n` pointing out of the edge owner
//! `Ω_i`. On a Dirichlet edge only the prescribed components enter the jump,
//! `⌊v⌋ = (P v) ⊗ n`; the remaining components see the traction instead.
//! Every jump penalty carries the factor `1/h_E`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::femspace::{edge_quadrature, element_quadrature, FunctionSpace, QuadratureRule, ShapeValues, SpaceKind};
use crate::material::{voigt_matrix, FiberDirection, MaterialParams};
use crate::mesh::{BoundaryTag, Components, Mesh};
use crate::sparse::CsrMatrix;
use crate::tensor::{self, Mat2, Mat3, Point, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Cg1,
    Cg2,
    Nipg,
    Sipg,
    Iipg,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Cg1, Method::Cg2, Method::Nipg, Method::Sipg, Method::Iipg];
    pub const DG: [Method; 3] = [Method::Nipg, Method::Sipg, Method::Iipg];

    /// Weight of the adjoint edge term; `None` for conforming methods.
    pub fn theta(self) -> Option<f64> {
        match self {
            Method::Nipg => Some(1.0),
            Method::Sipg => Some(-1.0),
            Method::Iipg => Some(0.0),
            Method::Cg1 | Method::Cg2 => None,
        }
    }

    pub fn space_kind(self) -> SpaceKind {
        match self {
            Method::Cg1 => SpaceKind::Cg1,
            Method::Cg2 => SpaceKind::Cg2,
            _ => SpaceKind::Dg1,
        }
    }

    pub fn is_dg(self) -> bool {
        self.theta().is_some()
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, Method::Nipg | Method::Iipg)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Cg1 => "CG1",
            Method::Cg2 => "CG2",
            Method::Nipg => "NIPG",
            Method::Sipg => "SIPG",
            Method::Iipg => "IIPG",
        }
    }

    /// Case-insensitive inverse of [`Method::name`].
    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }
}

/// Penalty weights of the five constitutive groups of the jump term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationParams {
    pub k_mu: f64,
    pub k_lambda: f64,
    pub k_alpha: f64,
    pub k_beta: f64,
    pub k_gamma: f64,
}

impl Default for StabilizationParams {
    fn default() -> Self {
        Self { k_mu: 10.0, k_lambda: 100.0, k_alpha: 10.0, k_beta: 100.0, k_gamma: 10.0 }
    }
}

impl StabilizationParams {
    pub fn uniform(k: f64) -> Self {
        Self { k_mu: k, k_lambda: k, k_alpha: k, k_beta: k, k_gamma: k }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidStabilization { name, value });
            }
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.named().iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min)
    }

    fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("k_mu", self.k_mu),
            ("k_lambda", self.k_lambda),
            ("k_alpha", self.k_alpha),
            ("k_beta", self.k_beta),
            ("k_gamma", self.k_gamma),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub under_integrate_beta: bool,
    pub stab: StabilizationParams,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        Self { method, under_integrate_beta: false, stab: StabilizationParams::default() }
    }

    pub fn under_integrated(method: Method) -> Self {
        Self { under_integrate_beta: true, ..Self::new(method) }
    }

    pub fn theta(&self) -> Option<f64> {
        self.method.theta()
    }

    /// Short label such as `SIPG-UI`.
    pub fn label(&self) -> alloc::string::String {
        let mut s = alloc::string::String::from(self.method.name());
        if self.under_integrate_beta && self.method.is_dg() {
            s.push_str("-UI");
        }
        s
    }
}

/// A displacement component pinned at a mesh vertex, imposed strongly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointConstraint {
    pub vertex: usize,
    pub components: Components,
    pub value: Vec2,
}

pub type VectorField<'f> = &'f dyn Fn(Point) -> Vec2;
/// Traction as a function of position and outward unit normal.
pub type TractionField<'f> = &'f dyn Fn(Point, Vec2) -> Vec2;

/// Data of the boundary value problem. Missing body force or traction means
/// zero; missing Dirichlet data is an error when Dirichlet edges exist.
#[derive(Clone, Default)]
pub struct LoadSpec<'f> {
    pub body_force: Option<VectorField<'f>>,
    pub traction: Option<TractionField<'f>>,
    pub dirichlet: Option<VectorField<'f>>,
    pub point_constraints: Vec<PointConstraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Dofs fixed by strong elimination, ascending.
    pub constrained: Vec<usize>,
    /// The matrix is symmetric by construction.
    pub symmetric: bool,
}

type Triplets = Vec<(usize, usize, f64)>;

/// Voigt column of the strain of basis function `(node a, component c)`.
fn strain_column(grad: Vec2, c: usize) -> [f64; 3] {
    if c == 0 {
        [grad[0], 0.0, grad[1]]
    } else {
        [0.0, grad[1], grad[0]]
    }
}

fn stress_of(cmat: &Mat3, grad: Vec2, c: usize) -> Mat2 {
    tensor::stress_from_voigt(tensor::mat3_vec(cmat, strain_column(grad, c)))
}

fn physical_weight(rule_weight: f64, area: f64) -> f64 {
    2.0 * area * rule_weight
}

fn bary_of(xi: [f64; 2]) -> [f64; 3] {
    [1.0 - xi[0] - xi[1], xi[0], xi[1]]
}

fn element_rule(space: &FunctionSpace) -> QuadratureRule {
    element_quadrature(2 * (space.kind.degree() - 1)).unwrap_or_else(|_| element_quadrature(1).expect("rule"))
}

fn add_element_stiffness(space: &FunctionSpace, cmat: &Mat3, t: usize, out: &mut Triplets) {
    let rule = element_rule(space);
    let geom = space.geometry(t);
    let dofs = space.element_dofs(t);
    let n = dofs.len();
    let mut local = vec![0.0; n * n];
    let mut cols = vec![[0.0; 3]; n];
    let mut stresses = vec![[0.0; 3]; n];
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let shape = space.shape_at_bary(&geom, bary_of(*xi));
        let w = physical_weight(*w, geom.area);
        for a in 0..n {
            cols[a] = strain_column(shape.grads[a / 2], a % 2);
            stresses[a] = tensor::mat3_vec(cmat, cols[a]);
        }
        for a in 0..n {
            for b in 0..n {
                let e = cols[a];
                let s = stresses[b];
                local[a * n + b] += w * (e[0] * s[0] + e[1] * s[1] + e[2] * s[2]);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            out.push((dofs[a], dofs[b], local[a * n + b]));
        }
    }
}

fn add_body_force(space: &FunctionSpace, f: &dyn Fn(Point) -> Vec2, t: usize, rhs: &mut [f64]) {
    let rule = element_quadrature(2 * space.kind.degree() + 3).expect("rule");
    let geom = space.geometry(t);
    let nodes = space.element_nodes(t);
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let shape = space.shape_at_bary(&geom, bary_of(*xi));
        let w = physical_weight(*w, geom.area);
        let fx = f(geom.map(*xi));
        for (a, &node) in nodes.iter().enumerate() {
            rhs[2 * node] += w * fx[0] * shape.values[a];
            rhs[2 * node + 1] += w * fx[1] * shape.values[a];
        }
    }
}

fn edge_point(mesh: &Mesh, e: usize, s: f64) -> Point {
    let [a, b] = mesh.edges[e].endpoints;
    let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
    [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
}

fn mask_of(tag: BoundaryTag) -> [f64; 2] {
    match tag {
        BoundaryTag::Dirichlet(c) => c.mask(),
        BoundaryTag::Interior => [1.0, 1.0],
        BoundaryTag::Neumann => [0.0, 0.0],
    }
}

/// Traction boundary contribution `∫ t · (I − P) v` over Neumann edges and
/// over the free components of Dirichlet edges.
fn add_traction(space: &FunctionSpace, traction: &dyn Fn(Point, Vec2) -> Vec2, rhs: &mut [f64]) {
    let mesh = space.mesh;
    let rule = edge_quadrature(2 * space.kind.degree() + 3).expect("rule");
    for e in mesh.boundary_edges() {
        let free = mask_of(mesh.boundary_tags[e]).map(|m| 1.0 - m);
        if free == [0.0, 0.0] {
            continue;
        }
        let edge = &mesh.edges[e];
        let geom = space.geometry(edge.owner);
        let nodes = space.element_nodes(edge.owner);
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = edge_point(mesh, e, s[0]);
            let tr = traction(x, edge.normal);
            let shape = space.shape_at_bary(&geom, geom.barycentric(x));
            let w = w * edge.length;
            for (a, &node) in nodes.iter().enumerate() {
                for c in 0..2 {
                    rhs[2 * node + c] += w * free[c] * tr[c] * shape.values[a];
                }
            }
        }
    }
}

/// Folds strong constraints into the system: constrained rows and columns
/// are replaced by a scaled identity and the known values are lifted into the
/// right-hand side.
fn apply_constraints(
    n: usize,
    mut triplets: Triplets,
    mut rhs: Vec<f64>,
    fixed: &BTreeMap<usize, f64>,
    symmetric: bool,
) -> LinearSystem {
    let mut is_fixed = vec![false; n];
    let mut value = vec![0.0; n];
    for (&d, &v) in fixed {
        is_fixed[d] = true;
        value[d] = v;
    }
    let mut diag_sum = 0.0;
    let mut diag_count = 0usize;
    triplets.retain(|&(r, c, v)| {
        if is_fixed[r] {
            return false;
        }
        if is_fixed[c] {
            rhs[r] -= v * value[c];
            return false;
        }
        if r == c {
            diag_sum += v.abs();
            diag_count += 1;
        }
        true
    });
    let scale = if diag_count > 0 && diag_sum > 0.0 { diag_sum / diag_count as f64 } else { 1.0 };
    for (&d, &v) in fixed {
        triplets.push((d, d, scale));
        rhs[d] = scale * v;
    }
    LinearSystem {
        matrix: CsrMatrix::from_triplets(n, n, &triplets),
        rhs,
        constrained: fixed.keys().copied().collect(),
        symmetric,
    }
}

fn point_constraint_dofs(space: &FunctionSpace, pcs: &[PointConstraint], fixed: &mut BTreeMap<usize, f64>) {
    let mesh = space.mesh;
    for pc in pcs {
        let nodes: Vec<usize> = if space.kind.is_discontinuous() {
            mesh.triangles_at_vertex(pc.vertex)
                .into_iter()
                .map(|t| {
                    let j = mesh.triangles[t].iter().position(|&v| v == pc.vertex).expect("vertex");
                    space.element_nodes(t)[j]
                })
                .collect()
        } else {
            vec![pc.vertex]
        };
        for node in nodes {
            for c in 0..2 {
                if pc.components.contains(c) {
                    fixed.insert(2 * node + c, pc.value[c]);
                }
            }
        }
    }
}

fn check_dirichlet_data(mesh: &Mesh, loads: &LoadSpec) -> Result<()> {
    if loads.dirichlet.is_none() && mesh.dirichlet_edges().next().is_some() {
        return Err(Error::MissingBoundaryData("Dirichlet edges present but no boundary displacement given"));
    }
    Ok(())
}

/// Conforming Galerkin system with strongly imposed Dirichlet data.
pub fn assemble_cg(space: &FunctionSpace, params: &MaterialParams, fiber: &FiberDirection, loads: &LoadSpec) -> Result<LinearSystem> {
    if space.kind.is_discontinuous() {
        return Err(Error::WrongSpace { expected: "CG1 or CG2" });
    }
    let mesh = space.mesh;
    check_dirichlet_data(mesh, loads)?;
    let cmat = voigt_matrix(params, fiber).0;
    let n = space.dof_count();
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * 4 * space.nodes_per_element().pow(2));
    let mut rhs = vec![0.0; n];
    for t in 0..mesh.num_triangles() {
        add_element_stiffness(space, &cmat, t, &mut triplets);
        if let Some(f) = loads.body_force {
            add_body_force(space, f, t, &mut rhs);
        }
    }
    if let Some(tr) = loads.traction {
        add_traction(space, tr, &mut rhs);
    }

    let mut fixed = BTreeMap::new();
    if let Some(g) = loads.dirichlet {
        for e in mesh.dirichlet_edges() {
            let BoundaryTag::Dirichlet(comps) = mesh.boundary_tags[e] else { continue };
            let edge = &mesh.edges[e];
            let t = edge.owner;
            let nodes = space.element_nodes(t);
            let pts = space.element_node_points(t);
            let k = edge.owner_local;
            let mut local = vec![k, (k + 1) % 3];
            if space.kind == SpaceKind::Cg2 {
                local.push(3 + k);
            }
            for a in local {
                let v = g(pts[a]);
                for c in 0..2 {
                    if comps.contains(c) {
                        fixed.insert(2 * nodes[a] + c, v[c]);
                    }
                }
            }
        }
    }
    point_constraint_dofs(space, &loads.point_constraints, &mut fixed);
    Ok(apply_constraints(n, triplets, rhs, &fixed, true))
}

/// Traces of the basis functions of the elements adjacent to an edge.
struct EdgeTrace {
    dofs: Vec<usize>,
    /// Masked, signed jump vector of each dof at each quadrature point.
    jump: Vec<Vec<Vec2>>,
    /// Averaged traction `{σ(φ)} n` of each dof at each quadrature point.
    traction: Vec<Vec<Vec2>>,
    weights: Vec<f64>,
    points: Vec<Point>,
}

fn edge_trace(space: &FunctionSpace, cmat: &Mat3, e: usize, rule: &QuadratureRule) -> EdgeTrace {
    let mesh = space.mesh;
    let edge = &mesh.edges[e];
    let mask = mask_of(mesh.boundary_tags[e]);
    let n = edge.normal;
    let sides: Vec<(usize, f64)> = match edge.neighbor {
        Some(nb) => vec![(edge.owner, 1.0), (nb, -1.0)],
        None => vec![(edge.owner, 1.0)],
    };
    let avg = if sides.len() == 2 { 0.5 } else { 1.0 };
    let mut dofs = Vec::new();
    for &(t, _) in &sides {
        dofs.extend(space.element_dofs(t));
    }
    let nq = rule.len();
    let mut jump = vec![Vec::with_capacity(dofs.len()); nq];
    let mut traction = vec![Vec::with_capacity(dofs.len()); nq];
    let points: Vec<Point> = rule.points.iter().map(|s| edge_point(mesh, e, s[0])).collect();
    for &(t, sign) in &sides {
        let geom = space.geometry(t);
        for (q, x) in points.iter().enumerate() {
            let shape: ShapeValues = space.shape_at_bary(&geom, geom.barycentric(*x));
            for a in 0..shape.count {
                for c in 0..2 {
                    let mut m = [0.0; 2];
                    m[c] = sign * mask[c] * shape.values[a];
                    jump[q].push(m);
                    let sigma = stress_of(cmat, shape.grads[a], c);
                    traction[q].push(tensor::scale(avg, tensor::mat_vec(&sigma, n)));
                }
            }
        }
    }
    EdgeTrace {
        dofs,
        jump,
        traction,
        weights: rule.weights.iter().map(|w| w * edge.length).collect(),
        points,
    }
}

/// The jump penalty written as `wᵀ Q m` for trial jump `m` and test jump `w`,
/// split into the β group and everything else.
fn penalty_matrices(params: &MaterialParams, fiber: &FiberDirection, stab: &StabilizationParams, n: Vec2) -> (Mat2, Mat2) {
    let a = fiber.vector();
    let an = tensor::dot(a, n);
    let nn = tensor::outer(n, n);
    let aa = tensor::outer(a, a);
    let na_an = tensor::mat_add(&tensor::outer(n, a), &tensor::outer(a, n));
    let mut q = tensor::mat_scale(stab.k_lambda * params.lambda, &nn);
    q = tensor::mat_add(&q, &tensor::mat_scale(stab.k_mu * params.mu_t, &tensor::IDENTITY));
    q = tensor::mat_add(&q, &tensor::mat_scale(stab.k_alpha * params.alpha * an, &na_an));
    let shear = tensor::mat_add(&tensor::mat_scale(an * an, &tensor::IDENTITY), &aa);
    q = tensor::mat_add(&q, &tensor::mat_scale(stab.k_gamma * params.gamma, &shear));
    let q_beta = tensor::mat_scale(stab.k_beta * params.beta * an * an, &aa);
    (q, q_beta)
}

fn quad_form(w: Vec2, q: &Mat2, m: Vec2) -> f64 {
    tensor::dot(w, tensor::mat_vec(q, m))
}

fn dg_edge_rule() -> QuadratureRule {
    edge_quadrature(3).expect("rule")
}

fn midpoint_rule() -> QuadratureRule {
    edge_quadrature(1).expect("rule")
}

/// Matrix of the interior penalty bilinear form, without strong constraints.
pub fn dg_bilinear_matrix(space: &FunctionSpace, params: &MaterialParams, fiber: &FiberDirection, config: &MethodConfig) -> Result<CsrMatrix> {
    let triplets = dg_bilinear_triplets(space, params, fiber, config)?;
    let n = space.dof_count();
    Ok(CsrMatrix::from_triplets(n, n, &triplets))
}

fn dg_bilinear_triplets(space: &FunctionSpace, params: &MaterialParams, fiber: &FiberDirection, config: &MethodConfig) -> Result<Triplets> {
    if !space.kind.is_discontinuous() {
        return Err(Error::WrongSpace { expected: "DG1" });
    }
    let theta = config.theta().ok_or(Error::WrongSpace { expected: "an interior penalty method" })?;
    config.stab.validate()?;
    let mesh = space.mesh;
    let cmat = voigt_matrix(params, fiber).0;
    let mut triplets = Vec::with_capacity(36 * mesh.num_triangles() + 144 * mesh.num_edges());
    for t in 0..mesh.num_triangles() {
        add_element_stiffness(space, &cmat, t, &mut triplets);
    }

    let full = dg_edge_rule();
    let mid = midpoint_rule();
    for e in mesh.penalized_edges() {
        let edge = &mesh.edges[e];
        let inv_h = 1.0 / edge.length;
        let (q_other, q_beta) = penalty_matrices(params, fiber, &config.stab, edge.normal);
        let mut q_full = q_other;
        if config.under_integrate_beta {
            q_full = tensor::mat_add(&q_full, &tensor::mat_scale(config.stab.k_mu * params.mu_t, &tensor::IDENTITY));
        } else {
            q_full = tensor::mat_add(&q_full, &q_beta);
        }
        let tr = edge_trace(space, &cmat, e, &full);
        let nd = tr.dofs.len();
        let mut local = vec![0.0; nd * nd];
        for q in 0..tr.weights.len() {
            let w = tr.weights[q];
            for v in 0..nd {
                let mv = tr.jump[q][v];
                let tv = tr.traction[q][v];
                for u in 0..nd {
                    let mu = tr.jump[q][u];
                    let tu = tr.traction[q][u];
                    local[v * nd + u] += w
                        * (-tensor::dot(tu, mv) + theta * tensor::dot(mu, tv) + inv_h * quad_form(mv, &q_full, mu));
                }
            }
        }
        if config.under_integrate_beta {
            let trm = edge_trace(space, &cmat, e, &mid);
            let w = trm.weights[0];
            for v in 0..nd {
                for u in 0..nd {
                    local[v * nd + u] += w * inv_h * quad_form(trm.jump[0][v], &q_beta, trm.jump[0][u]);
                }
            }
        }
        for v in 0..nd {
            for u in 0..nd {
                let val = local[v * nd + u];
                if val != 0.0 {
                    triplets.push((tr.dofs[v], tr.dofs[u], val));
                }
            }
        }
    }
    Ok(triplets)
}

/// Interior penalty system on a DG1 space.
pub fn assemble_dg(
    space: &FunctionSpace,
    params: &MaterialParams,
    fiber: &FiberDirection,
    config: &MethodConfig,
    loads: &LoadSpec,
) -> Result<LinearSystem> {
    let mesh = space.mesh;
    check_dirichlet_data(mesh, loads)?;
    let triplets = dg_bilinear_triplets(space, params, fiber, config)?;
    let theta = config.theta().expect("checked by the bilinear assembly");
    let cmat = voigt_matrix(params, fiber).0;
    let n = space.dof_count();
    let mut rhs = vec![0.0; n];
    if let Some(f) = loads.body_force {
        for t in 0..mesh.num_triangles() {
            add_body_force(space, f, t, &mut rhs);
        }
    }
    if let Some(tr) = loads.traction {
        add_traction(space, tr, &mut rhs);
    }
    if let Some(g) = loads.dirichlet {
        let rule = edge_quadrature(5).expect("rule");
        let mid = midpoint_rule();
        let a = fiber.vector();
        for e in mesh.dirichlet_edges() {
            let edge = &mesh.edges[e];
            let mask = mask_of(mesh.boundary_tags[e]);
            let inv_h = 1.0 / edge.length;
            let an = tensor::dot(a, edge.normal);
            let (q_other, q_beta) = penalty_matrices(params, fiber, &config.stab, edge.normal);
            let mut q_full = q_other;
            if config.under_integrate_beta {
                q_full = tensor::mat_add(&q_full, &tensor::mat_scale(config.stab.k_mu * params.mu_t, &tensor::IDENTITY));
            } else {
                q_full = tensor::mat_add(&q_full, &q_beta);
            }
            let tr = edge_trace(space, &cmat, e, &rule);
            let mut g_avg = [0.0; 2];
            for q in 0..tr.weights.len() {
                let gx = g(tr.points[q]);
                let gm = [mask[0] * gx[0], mask[1] * gx[1]];
                let w = tr.weights[q];
                g_avg = tensor::add(g_avg, tensor::scale(w / edge.length, gm));
                for v in 0..tr.dofs.len() {
                    rhs[tr.dofs[v]] += w * (theta * tensor::dot(gm, tr.traction[q][v]) + inv_h * quad_form(tr.jump[q][v], &q_full, gm));
                }
            }
            if config.under_integrate_beta {
                let trm = edge_trace(space, &cmat, e, &mid);
                let w = trm.weights[0];
                let ag = tensor::dot(a, g_avg);
                let coef = config.stab.k_beta * params.beta * an * an;
                for v in 0..trm.dofs.len() {
                    rhs[trm.dofs[v]] += w * inv_h * coef * ag * tensor::dot(a, trm.jump[0][v]);
                }
            }
        }
    }
    let mut fixed = BTreeMap::new();
    point_constraint_dofs(space, &loads.point_constraints, &mut fixed);
    Ok(apply_constraints(n, triplets, rhs, &fixed, config.method.is_symmetric()))
}

/// Dispatches on the method.
pub fn assemble(
    space: &FunctionSpace,
    params: &MaterialParams,
    fiber: &FiberDirection,
    config: &MethodConfig,
    loads: &LoadSpec,
) -> Result<LinearSystem> {
    if config.method.space_kind() != space.kind {
        return Err(Error::WrongSpace {
            expected: match config.method.space_kind() {
                SpaceKind::Cg1 => "CG1",
                SpaceKind::Cg2 => "CG2",
                SpaceKind::Dg1 => "DG1",
            },
        });
    }
    if config.method.is_dg() {
        assemble_dg(space, params, fiber, config, loads)
    } else {
        assemble_cg(space, params, fiber, loads)
    }
}

/// Gram matrix of the DG norm
/// `Σ_e ‖ε(v)‖² + ½ Σ_{E ∈ Γ_iD} h_E⁻¹ ‖⌊v⌋‖²`.
pub fn dg_norm_matrix(space: &FunctionSpace) -> CsrMatrix {
    let mesh = space.mesh;
    // Identity stiffness on engineering strain with the shear slot halved
    // gives ε:ε.
    let gram = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]];
    let mut triplets = Vec::new();
    for t in 0..mesh.num_triangles() {
        add_element_stiffness(space, &gram, t, &mut triplets);
    }
    let rule = edge_quadrature(2 * space.kind.degree()).expect("rule");
    for e in mesh.penalized_edges() {
        let tr = edge_trace(space, &gram, e, &rule);
        let coef = 0.5 / mesh.edges[e].length;
        let nd = tr.dofs.len();
        for v in 0..nd {
            for u in 0..nd {
                let val: f64 = (0..rule.len()).map(|q| tr.weights[q] * tensor::dot(tr.jump[q][v], tr.jump[q][u])).sum();
                if val != 0.0 {
                    triplets.push((tr.dofs[v], tr.dofs[u], coef * val));
                }
            }
        }
    }
    let n = space.dof_count();
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Advisory check of the sufficient coercivity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    /// Smallest of the five penalty weights.
    pub k_min: f64,
    /// Threshold applied to `k_min` for the symmetric and incomplete methods.
    pub threshold: f64,
    /// Sufficient condition of the fully integrated scheme.
    pub full_sufficient: bool,
    /// `2 k_β |β| / μ_t`, compared against `k_μ` for the under-integrated scheme.
    pub ui_ratio: f64,
    /// `None` unless the β term is under-integrated.
    pub ui_sufficient: Option<bool>,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.full_sufficient && self.ui_sufficient.unwrap_or(true)
    }
}

pub const DEFAULT_PENALTY_THRESHOLD: f64 = 10.0;

pub fn check_coercivity_params(config: &MethodConfig, params: &MaterialParams, threshold: f64) -> AdmissibilityReport {
    let k_min = config.stab.min();
    let full_sufficient = match config.theta() {
        Some(theta) if theta == 1.0 => k_min > 0.0,
        Some(_) => k_min >= threshold,
        None => true,
    };
    let ui_ratio = 2.0 * config.stab.k_beta * params.beta.abs() / params.mu_t;
    let ui_sufficient = (config.under_integrate_beta && config.method.is_dg()).then_some(ui_ratio <= config.stab.k_mu);
    AdmissibilityReport { k_min, threshold, full_sufficient, ui_ratio, ui_sufficient }
}

/// How [`numeric_coercivity`] estimates the coercivity constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoercivityEstimate {
    /// Smallest generalized eigenvalue of the symmetric part against the DG norm.
    Eigen,
    /// Smallest Rayleigh quotient over random fields.
    Sampled { samples: usize, seed: u64 },
}

/// Estimates `K` in `a_h(v, v) ≥ K ‖v‖²_DG` on the given mesh. Fields with
/// zero DG norm are excluded.
pub fn numeric_coercivity(
    space: &FunctionSpace,
    params: &MaterialParams,
    fiber: &FiberDirection,
    config: &MethodConfig,
    estimate: CoercivityEstimate,
) -> Result<f64> {
    let a = dg_bilinear_matrix(space, params, fiber, config)?.to_dense();
    let g = dg_norm_matrix(space).to_dense();
    let n = a.len();
    let sym = |i: usize, j: usize| 0.5 * (a[i][j] + a[j][i]);
    let k = match estimate {
        CoercivityEstimate::Eigen => generalized_min_eigenvalue(n, &sym, &g)?,
        CoercivityEstimate::Sampled { samples, seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gmax = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut best = f64::INFINITY;
            let mut v = vec![0.0; n];
            for _ in 0..samples {
                for x in v.iter_mut() {
                    *x = rng.random_range(-1.0..1.0);
                }
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        num += v[i] * sym(i, j) * v[j];
                        den += v[i] * g[i][j] * v[j];
                    }
                }
                if den > 1e-12 * gmax {
                    best = best.min(num / den);
                }
            }
            best
        }
    };
    if !(k > 0.0) {
        return Err(Error::NonPositive { estimate: k });
    }
    Ok(k)
}

fn generalized_min_eigenvalue(n: usize, a: &dyn Fn(usize, usize) -> f64, g: &[Vec<f64>]) -> Result<f64> {
    use faer::{Mat, Side};
    let gm = Mat::<f64>::from_fn(n, n, |i, j| g[i][j]);
    let evd = gm.self_adjoint_eigen(Side::Lower).map_err(|_| Error::SingularSystem("eigen-decomposition failed"))?;
    let s = evd.S();
    let u = evd.U();
    let lmax = (0..n).map(|i| s[i]).fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| s[i] > 1e-10 * lmax).collect();
    let m = keep.len();
    // Columns of the whitened basis V Λ^{-1/2} restricted to the range of G.
    let w = Mat::<f64>::from_fn(n, m, |i, k| u[(i, keep[k])] / libm::sqrt(s[keep[k]]));
    let am = Mat::<f64>::from_fn(n, n, |i, j| a(i, j));
    let reduced = w.transpose() * &am * &w;
    let sym = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (reduced[(i, j)] + reduced[(j, i)]));
    let ev = sym.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::SingularSystem("eigen-decomposition failed"))?;
    Ok(ev.iter().copied().fold(f64::INFINITY, f64::min))
}
