//! The property suite behind `tidg verify`: patch tests, an independent
//! isotropic IPDG matrix, the edge-average interpolant, discrete coercivity,
//! the β = 0 reduction of the under-integrated scheme, penalty validation,
//! the beam reference solution and the solver residual.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tidg_core::analysis::{
    broken_h1_error, interpolant_properties_check, interpolation_estimate_check, AffineField, ExactField, FnField, Hessian,
    InterpolationReport,
};
use tidg_core::assembly::{
    assemble, dg_bilinear_matrix, numeric_coercivity, CoercivityEstimate, LoadSpec, Method, MethodConfig, StabilizationParams,
};
use tidg_core::bench::{
    beam_exact_solution, high_p_grid, material_from, moderate_p_grid, BEAM_HEIGHT, BEAM_LENGTH, BEAM_LOAD, DEFAULT_NU,
};
use tidg_core::femspace::{FunctionSpace, SpaceKind};
use tidg_core::material::{apply_stress, stability_check, EngineeringConstants, FiberDirection, MaterialParams};
use tidg_core::mesh::{classify_edges, rect_mesh, BoundaryTag, Components, Mesh};
use tidg_core::solver::solve;
use tidg_core::sparse::CsrMatrix;
use tidg_core::tensor::{self, Mat2, Point, Vec2};

/// Seed of the random materials drawn by [`patch_test`].
pub const PATCH_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }

    fn from_result(name: &'static str, result: tidg_core::Result<(bool, String)>) -> Self {
        match result {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<28} {:<4}  {}", self.name, if self.passed { "PASS" } else { "FAIL" }, self.detail)
    }
}

/// Rectangle `[0, 2] × [0, 1]` (4×3 cells): left edge clamped, bottom edge
/// constrained vertically, remaining edges loaded by traction.
pub fn mixed_boundary_mesh() -> tidg_core::Result<Mesh> {
    let mesh = rect_mesh(2.0, 1.0, 4, 3, 0.0)?;
    let left = |a: Point, b: Point| a[0] == 0.0 && b[0] == 0.0;
    let bottom = |a: Point, b: Point| a[1] == 0.0 && b[1] == 0.0;
    classify_edges(
        mesh,
        |a, b| {
            if left(a, b) {
                Some(Components::Both)
            } else if bottom(a, b) {
                Some(Components::Y)
            } else {
                None
            }
        },
        |a, b| !left(a, b) && !bottom(a, b),
    )
}

/// Stable materials with `p ∈ [1, 10⁴]` (log-uniform) and `â ∈ [0, π]`.
pub fn random_materials(count: usize, seed: u64) -> Vec<(EngineeringConstants, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let ec = EngineeringConstants::new(
            rng.random_range(1.0..300.0),
            10f64.powf(rng.random_range(0.0..4.0)),
            rng.random_range(0.5..2.0),
            rng.random_range(0.1..0.45),
            rng.random_range(0.1..0.45),
        );
        let angle = rng.random_range(0.0..PI);
        if stability_check(&ec).passed() && material_from(&ec).is_ok() {
            out.push((ec, angle));
        }
    }
    out
}

fn patch_field() -> AffineField {
    AffineField { a: [[0.02, -0.013], [0.007, -0.011]], b: [0.3, -0.2] }
}

/// Broken H¹ error of the discrete solution of an affine problem.
pub fn patch_error(mesh: &Mesh, config: &MethodConfig, params: &MaterialParams, fiber: &FiberDirection) -> tidg_core::Result<f64> {
    let exact = patch_field();
    let sigma = apply_stress(params, fiber, &tensor::sym(&exact.a));
    let g = |x: Point| exact.value(x);
    let traction = |_x: Point, n: Vec2| tensor::mat_vec(&sigma, n);
    let loads = LoadSpec { body_force: None, traction: Some(&traction), dirichlet: Some(&g), point_constraints: Vec::new() };
    let space = FunctionSpace::new(config.method.space_kind(), mesh);
    let system = assemble(&space, params, fiber, config, &loads)?;
    let report = solve(&system, 1e-12)?;
    Ok(broken_h1_error(&space, &report.solution, &exact)?.full)
}

/// Every method, fully and under-integrated, on `count` random materials.
pub fn patch_test(count: usize, seed: u64) -> tidg_core::Result<(usize, f64)> {
    let mesh = mixed_boundary_mesh()?;
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for (ec, angle) in random_materials(count, seed) {
        let params = material_from(&ec)?;
        let fiber = FiberDirection::from_angle(angle);
        for method in Method::ALL {
            for ui in [false, true] {
                let config = MethodConfig { under_integrate_beta: ui, ..MethodConfig::new(method) };
                worst = worst.max(patch_error(&mesh, &config, &params, &fiber)?);
                cases += 1;
            }
        }
    }
    Ok((cases, worst))
}

/// Isotropic (`α = β = γ = 0`) interior penalty matrix on a DG1 space,
/// assembled from closed-form P1 integrals: constant strains on elements,
/// midpoint values for the consistency terms and the exact edge mass matrix
/// for the penalty.
pub fn isotropic_reference_matrix(space: &FunctionSpace, lambda: f64, mu: f64, config: &MethodConfig) -> CsrMatrix {
    let mesh = space.mesh;
    let theta = config.theta().expect("DG method");
    let k = &config.stab;
    let k_mu = if config.under_integrate_beta { 2.0 * k.k_mu } else { k.k_mu };
    let mut triplets = Vec::new();

    // Gradient of each vertex hat function, from the opposite edge.
    let grads = |t: usize| -> [Vec2; 3] {
        let [a, b, c] = mesh.triangles[t].map(|v| mesh.vertices[v]);
        let two_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let opp = [(b, c), (c, a), (a, b)];
        opp.map(|(p, q)| [(p[1] - q[1]) / two_area, (q[0] - p[0]) / two_area])
    };
    // Displacement gradient of basis (vertex j, component c).
    let grad_u = |g: &[Vec2; 3], j: usize, c: usize| -> Mat2 {
        let mut m = [[0.0; 2]; 2];
        m[c] = g[j];
        m
    };
    let stress = |du: &Mat2| -> Mat2 {
        let eps = tensor::sym(du);
        let tr = eps[0][0] + eps[1][1];
        [[lambda * tr + 2.0 * mu * eps[0][0], 2.0 * mu * eps[0][1]], [2.0 * mu * eps[1][0], lambda * tr + 2.0 * mu * eps[1][1]]]
    };

    for t in 0..mesh.num_triangles() {
        let g = grads(t);
        let [a, b, c] = mesh.triangles[t].map(|v| mesh.vertices[v]);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        let dofs = space.element_dofs(t);
        for (i, &di) in dofs.iter().enumerate() {
            let ev = tensor::sym(&grad_u(&g, i / 2, i % 2));
            for (j, &dj) in dofs.iter().enumerate() {
                let s = stress(&grad_u(&g, j / 2, j % 2));
                triplets.push((di, dj, area * tensor::ddot(&s, &ev)));
            }
        }
    }

    for (e, edge) in mesh.edges.iter().enumerate() {
        let mask = match mesh.boundary_tags[e] {
            BoundaryTag::Interior => [1.0, 1.0],
            BoundaryTag::Dirichlet(c) => c.mask(),
            BoundaryTag::Neumann => continue,
        };
        let [va, vb] = edge.endpoints;
        let (pa, pb) = (mesh.vertices[va], mesh.vertices[vb]);
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        // Unit normal pointing out of the owner.
        let mut n = [(pb[1] - pa[1]) / len, (pa[0] - pb[0]) / len];
        let owner_centre = mesh.triangles[edge.owner].iter().fold([0.0, 0.0], |s, &v| tensor::add(s, tensor::scale(1.0 / 3.0, mesh.vertices[v])));
        if tensor::dot(n, tensor::sub(pa, owner_centre)) < 0.0 {
            n = tensor::scale(-1.0, n);
        }
        let mut sides = vec![(edge.owner, 1.0)];
        if let Some(nb) = edge.neighbor {
            sides.push((nb, -1.0));
        }
        let avg = if sides.len() == 2 { 0.5 } else { 1.0 };
        // Per basis function: dof, component, signed masked trace at the two
        // endpoints, averaged traction.
        let mut basis: Vec<(usize, usize, [f64; 2], Vec2)> = Vec::new();
        for &(t, sign) in &sides {
            let g = grads(t);
            let dofs = space.element_dofs(t);
            for (i, &d) in dofs.iter().enumerate() {
                let (j, c) = (i / 2, i % 2);
                let v = mesh.triangles[t][j];
                let trace = [if v == va { 1.0 } else { 0.0 }, if v == vb { 1.0 } else { 0.0 }].map(|x| sign * mask[c] * x);
                let traction = tensor::scale(avg, tensor::mat_vec(&stress(&grad_u(&g, j, c)), n));
                basis.push((d, c, trace, traction));
            }
        }
        let q = tensor::mat_add(&tensor::mat_scale(k.k_lambda * lambda, &tensor::outer(n, n)), &tensor::mat_scale(k_mu * mu, &tensor::IDENTITY));
        for &(dv, cv, tv, sv) in &basis {
            for &(du, cu, tu, su) in &basis {
                let mid_v = 0.5 * (tv[0] + tv[1]);
                let mid_u = 0.5 * (tu[0] + tu[1]);
                let consistency = -len * su[cv] * mid_v;
                let adjoint = theta * len * mid_u * sv[cu];
                let mass = len / 6.0 * (2.0 * tv[0] * tu[0] + tv[0] * tu[1] + tv[1] * tu[0] + 2.0 * tv[1] * tu[1]);
                let penalty = q[cv][cu] * mass / len;
                triplets.push((dv, du, consistency + adjoint + penalty));
            }
        }
    }
    let n = space.dof_count();
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Largest entrywise difference between two matrices relative to the largest
/// entry of the reference.
pub fn relative_difference(a: &CsrMatrix, reference: &CsrMatrix) -> f64 {
    let diff = a.add_scaled(-1.0, reference);
    diff.max_abs() / reference.max_abs()
}

/// At `p = q = 1` the library matrix against [`isotropic_reference_matrix`]
/// for the three methods, fully and under-integrated. Returns the worst
/// relative difference.
pub fn isotropic_equivalence() -> tidg_core::Result<f64> {
    let mesh = mixed_boundary_mesh()?;
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let params = material_from(&EngineeringConstants::equal_poisson(250.0, 1.0, 0.3))?;
    let mut worst: f64 = 0.0;
    for angle in [0.0, 0.7, 2.3] {
        let fiber = FiberDirection::from_angle(angle);
        for method in Method::DG {
            for config in [MethodConfig::new(method), MethodConfig::under_integrated(method)] {
                let a = dg_bilinear_matrix(&space, &params, &fiber, &config)?;
                let r = isotropic_reference_matrix(&space, params.lambda, params.mu_t, &config);
                worst = worst.max(relative_difference(&a, &r));
            }
        }
    }
    Ok(worst)
}

fn smooth_u(x: Point) -> Vec2 {
    [x[0].sin() * x[1].cos(), x[0] * x[0] * x[1] + (0.5 * x[1]).exp()]
}

fn smooth_grad(x: Point) -> Mat2 {
    [[x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin()], [2.0 * x[0] * x[1], x[0] * x[0] + 0.5 * (0.5 * x[1]).exp()]]
}

fn smooth_hessian(x: Point) -> Hessian {
    let (s, c) = (x[0].sin(), x[0].cos());
    let (sy, cy) = (x[1].sin(), x[1].cos());
    [[[-s * cy, -c * sy], [-c * sy, -s * cy]], [[2.0 * x[1], 2.0 * x[0]], [2.0 * x[0], 0.25 * (0.5 * x[1]).exp()]]]
}

fn unit_squares(ns: &[usize]) -> tidg_core::Result<Vec<Mesh>> {
    ns.iter().map(|&n| rect_mesh(1.0, 1.0, n, n, 0.0)).collect()
}

/// Worst edge-average/divergence/fibre-strain residual of the interpolant
/// over three meshes and three fibre angles, and the interpolation rates on
/// four nested meshes.
pub fn interpolant_check() -> tidg_core::Result<(f64, InterpolationReport)> {
    let exact = FnField { u: smooth_u, grad: smooth_grad };
    let mut worst: f64 = 0.0;
    for angle in [0.0, 0.4, 1.9] {
        let fiber = FiberDirection::from_angle(angle);
        for mesh in unit_squares(&[4, 8, 16])? {
            let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
            worst = worst.max(interpolant_properties_check(&space, &exact, &fiber)?.max());
        }
    }
    let rates = interpolation_estimate_check(&unit_squares(&[4, 8, 16, 32])?, &exact, &smooth_hessian, &FiberDirection::from_angle(0.7))?;
    Ok((worst, rates))
}

/// Whether an interpolation report meets the rate targets.
pub fn interpolation_rates_pass(r: &InterpolationReport) -> bool {
    r.l2_rate >= 1.9 && r.h1_rate >= 0.9 && r.divergence_rate >= 0.9 && r.fibre_strain_rate >= 0.9 && r.identity_mismatch <= 1e-10
}

/// Unit square, `n × n` cells, clamped on the left and free elsewhere.
pub fn clamped_square(n: usize) -> tidg_core::Result<Mesh> {
    let left = |a: Point, b: Point| a[0] == 0.0 && b[0] == 0.0;
    classify_edges(rect_mesh(1.0, 1.0, n, n, 0.0)?, |a, b| left(a, b).then_some(Components::Both), |a, b| !left(a, b))
}

pub const COERCIVITY_P: [f64; 3] = [1.0, 3.0, 1e4];
pub const COERCIVITY_NU: [f64; 2] = [0.3, DEFAULT_NU];
pub const COERCIVITY_ANGLES: [f64; 5] = [0.0, PI / 8.0, PI / 3.0, PI / 2.0, 5.0 * PI / 6.0];

/// NIPG with all penalties 10; SIPG and IIPG with the default penalties.
pub fn coercivity_configs() -> [MethodConfig; 3] {
    let nipg = MethodConfig { stab: StabilizationParams::uniform(10.0), ..MethodConfig::new(Method::Nipg) };
    [nipg, MethodConfig::new(Method::Sipg), MethodConfig::new(Method::Iipg)]
}

/// Smallest discrete coercivity constant over the material and method grid
/// on an 18-triangle mesh, with the label of the minimizing case.
pub fn coercivity_grid() -> tidg_core::Result<(f64, String)> {
    let mesh = clamped_square(3)?;
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let mut worst = (f64::INFINITY, String::new());
    for nu in COERCIVITY_NU {
        for p in COERCIVITY_P {
            let params = material_from(&EngineeringConstants::equal_poisson(1.0, p, nu))?;
            for angle in COERCIVITY_ANGLES {
                let fiber = FiberDirection::from_angle(angle);
                for config in coercivity_configs() {
                    let k = numeric_coercivity(&space, &params, &fiber, &config, CoercivityEstimate::Eigen)?;
                    if k < worst.0 {
                        worst = (k, format!("{} p={p} nu={nu} angle={angle:.4}", config.label()));
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// With `β = 0` the under-integrated scheme differs from the full scheme only
/// by its extra `k_μ μ_t` penalty, so it must equal the full scheme with `k_μ`
/// doubled. Returns the worst relative difference over the three methods.
pub fn beta_zero_equivalence() -> tidg_core::Result<f64> {
    let mesh = mixed_boundary_mesh()?;
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let params = MaterialParams::new(3.0, 1.0, 1.7, 0.4, 0.0);
    let fiber = FiberDirection::from_angle(1.1);
    let mut worst: f64 = 0.0;
    for method in Method::DG {
        let ui = MethodConfig::under_integrated(method);
        let mut full = MethodConfig::new(method);
        full.stab.k_mu *= 2.0;
        let a = dg_bilinear_matrix(&space, &params, &fiber, &ui)?;
        let b = dg_bilinear_matrix(&space, &params, &fiber, &full)?;
        worst = worst.max(relative_difference(&a, &b));
    }
    Ok(worst)
}

/// Assembles with `k_β = −1` and returns the error the library raised.
pub fn negative_penalty_fixture() -> Option<tidg_core::Error> {
    let mesh = clamped_square(1).ok()?;
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let mut config = MethodConfig::new(Method::Sipg);
    config.stab.k_beta = -1.0;
    let zero = |_: Point| [0.0, 0.0];
    let loads = LoadSpec { body_force: None, traction: None, dirichlet: Some(&zero), point_constraints: Vec::new() };
    assemble(&space, &MaterialParams::isotropic(1.0, 1.0), &FiberDirection::from_angle(0.0), &config, &loads).err()
}

/// Every `p` of the beam sweeps.
pub fn beam_p_values() -> Vec<f64> {
    let mut ps = vec![1.0001, 3.0, 1e4];
    ps.extend(moderate_p_grid());
    ps.extend(high_p_grid());
    ps
}

pub const BEAM_ANGLES: [f64; 5] = [PI / 8.0, PI / 3.0, 3.0 * PI / 4.0, 5.0 * PI / 6.0, PI / 2.0];

/// Worst self-check residual of the beam reference solution over the sweep
/// grid, at 50 seeded random points.
pub fn beam_self_checks() -> tidg_core::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let half = 0.5 * BEAM_HEIGHT;
    let points: Vec<Point> = (0..50).map(|_| [rng.random_range(0.0..BEAM_LENGTH), rng.random_range(-half..half)]).collect();
    let mut worst: f64 = 0.0;
    for p in beam_p_values() {
        let params = material_from(&EngineeringConstants::equal_poisson(tidg_core::bench::BEAM_E_T, p, DEFAULT_NU))?;
        for angle in BEAM_ANGLES {
            let exact = beam_exact_solution(&params, &FiberDirection::from_angle(angle), BEAM_LOAD, BEAM_LENGTH, BEAM_HEIGHT)?;
            worst = worst.max(exact.self_check(&points).max());
        }
    }
    Ok(worst)
}

/// Solves a patch system and recomputes `‖b − Ax‖ / ‖b‖` by a plain row loop.
pub fn solver_residual_check() -> tidg_core::Result<f64> {
    let mesh = mixed_boundary_mesh()?;
    let params = material_from(&EngineeringConstants::new(250.0, 1e4, 1.0, 0.4, 0.4))?;
    let fiber = FiberDirection::from_angle(2.2);
    let exact = patch_field();
    let sigma = apply_stress(&params, &fiber, &tensor::sym(&exact.a));
    let g = |x: Point| exact.value(x);
    let traction = |_x: Point, n: Vec2| tensor::mat_vec(&sigma, n);
    let loads = LoadSpec { body_force: None, traction: Some(&traction), dirichlet: Some(&g), point_constraints: Vec::new() };
    let mut worst: f64 = 0.0;
    for method in Method::ALL {
        let space = FunctionSpace::new(method.space_kind(), &mesh);
        let system = assemble(&space, &params, &fiber, &MethodConfig::new(method), &loads)?;
        let x = solve(&system, 1e-12)?.solution;
        let mut num = 0.0;
        for (r, b) in system.rhs.iter().enumerate() {
            let ax: f64 = system.matrix.row(r).map(|(c, v)| v * x[c]).sum();
            num += (b - ax) * (b - ax);
        }
        let den: f64 = system.rhs.iter().map(|b| b * b).sum();
        worst = worst.max((num / den).sqrt());
    }
    Ok(worst)
}

/// Runs every check.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    out.push(CheckOutcome::from_result(
        "patch test",
        patch_test(5, PATCH_SEED).map(|(n, e)| (e <= 1e-9, format!("{n} cases, max broken H1 error {e:.2e} (limit 1e-9)"))),
    ));
    out.push(CheckOutcome::from_result(
        "isotropic IPDG reference",
        isotropic_equivalence().map(|d| (d <= 1e-13, format!("max relative entry difference {d:.2e} (limit 1e-13)"))),
    ));
    out.push(CheckOutcome::from_result(
        "interpolant properties",
        interpolant_check().map(|(res, rates)| {
            (
                res <= 1e-10 && interpolation_rates_pass(&rates),
                format!(
                    "residual {res:.2e}; rates L2 {:.2} H1 {:.2} div {:.2} fibre {:.2}",
                    rates.l2_rate, rates.h1_rate, rates.divergence_rate, rates.fibre_strain_rate
                ),
            )
        }),
    ));
    out.push(CheckOutcome::from_result(
        "discrete coercivity",
        coercivity_grid().map(|(k, case)| (k > 0.0, format!("min estimate {k:.3e} at {case}"))),
    ));
    out.push(CheckOutcome::from_result(
        "beta = 0 reduction",
        beta_zero_equivalence().map(|d| (d <= 1e-13, format!("max relative entry difference {d:.2e}"))),
    ));
    let fixture = negative_penalty_fixture();
    let surfaced = matches!(fixture, Some(tidg_core::Error::InvalidStabilization { name: "k_beta", .. }));
    out.push(CheckOutcome::new(
        "negative penalty rejected",
        surfaced,
        fixture.map(|e| e.to_string()).unwrap_or_else(|| "assembly accepted k_beta = -1".into()),
    ));
    out.push(CheckOutcome::from_result(
        "beam reference self-checks",
        beam_self_checks().map(|r| (r <= 1e-11, format!("max residual {r:.2e} (limit 1e-11)"))),
    ));
    out.push(CheckOutcome::from_result(
        "solver residual",
        solver_residual_check().map(|r| (r <= 1e-9, format!("max relative residual {r:.2e}"))),
    ));
    out
}

/// Text table of the outcomes.
pub fn table(outcomes: &[CheckOutcome]) -> String {
    let mut s = format!("{:<28} {:<4}  {}\n", "check", "", "detail");
    for o in outcomes {
        s.push_str(&o.to_string());
        s.push('\n');
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    s.push_str(&format!("{passed}/{} checks passed\n", outcomes.len()));
    s
}
