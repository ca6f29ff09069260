//! The two benchmark problems: Cook's tapered membrane and the cantilever
//! beam in pure bending with its closed-form solution.

use alloc::string::String;
use alloc::vec::Vec;

use crate::analysis::{broken_h1_error, dg_error, vertex_value, ErrorRecord, ErrorReport, ExactField, H1Error};
use crate::assembly::{assemble, LoadSpec, MethodConfig, PointConstraint};
use crate::femspace::FunctionSpace;
use crate::material::{
    compliance_matrix, derive_params, derive_params_special, stability_check, voigt_matrix, EngineeringConstants,
    FiberDirection, MaterialParams, StabilityReport,
};
use crate::mesh::{classify_edges, cook_mesh, rect_mesh, Components, Mesh};
use crate::solver::{solve, SolveReport};
use crate::tensor::{self, Mat2, Mat3, Point, Vec2};
use crate::{Error, Result};

pub const DEFAULT_NU: f64 = 0.49995;

pub const COOK_E_T: f64 = 250.0;
pub const COOK_TRACTION: f64 = 100.0;
pub const COOK_TIP: Point = [48.0, 60.0];

pub const BEAM_LENGTH: f64 = 10.0;
pub const BEAM_HEIGHT: f64 = 2.0;
pub const BEAM_E_T: f64 = 1500.0;
pub const BEAM_LOAD: f64 = 3000.0;
pub const BEAM_TIP: Point = [10.0, 1.0];
/// Corner where the vertical displacement is pinned.
pub const BEAM_PIN: Point = [0.0, -1.0];

/// Moduli for the engineering constants, using the equal-Poisson closed form
/// when it applies.
pub fn material_from(ec: &EngineeringConstants) -> Result<MaterialParams> {
    if ec.q == 1.0 && ec.nu_t == ec.nu_l {
        derive_params_special(ec.e_t, ec.p, ec.nu_t)
    } else {
        derive_params(ec)
    }
}

/// Twelve equally spaced values on `[1, 5]`.
pub fn moderate_p_grid() -> Vec<f64> {
    (0..12).map(|i| 1.0 + 4.0 * i as f64 / 11.0).collect()
}

/// Twelve logarithmically spaced values on `[10, 10⁵]`.
pub fn high_p_grid() -> Vec<f64> {
    (0..12)
        .map(|i| if i == 11 { 1e5 } else { libm::pow(10.0, 1.0 + 4.0 * i as f64 / 11.0) })
        .collect()
}

/// Closed-form pure-bending state of the beam `[0, L] × [−H/2, H/2]`.
///
/// The stress is `σ11 = −c y`, `σ22 = σ12 = 0` with `c = 2t/H`, so the end
/// load peaks at `t` on the top and bottom fibres. Integrating `ε = S σ`
/// with `S` the plane-strain compliance and fixing the constants by
/// `u_x(0, y) = −(t/H) S31 (y² − H²/4)` and `u_y(0, −H/2) = 0` gives
///
/// `u_x = −S11 c x y − S31 c (y² − H²/4)/2`,
/// `u_y = S11 c x²/2 − S21 c (y² − H²/4)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamExact {
    pub compliance: Mat3,
    pub stiffness: Mat3,
    pub c: f64,
    pub length: f64,
    pub height: f64,
}

pub fn beam_exact_solution(params: &MaterialParams, fiber: &FiberDirection, t: f64, length: f64, height: f64) -> Result<BeamExact> {
    Ok(BeamExact {
        compliance: compliance_matrix(params, fiber)?,
        stiffness: voigt_matrix(params, fiber).0,
        c: 2.0 * t / height,
        length,
        height,
    })
}

impl BeamExact {
    pub fn stress(&self, x: Point) -> Mat2 {
        [[-self.c * x[1], 0.0], [0.0, 0.0]]
    }

    /// Prescribed horizontal displacement on the clamped end.
    pub fn dirichlet_x(&self, y: f64) -> f64 {
        let t = 0.5 * self.c * self.height;
        -(t / self.height) * self.compliance[2][0] * (y * y - 0.25 * self.height * self.height)
    }

    pub fn traction(&self, x: Point, n: Vec2) -> Vec2 {
        tensor::mat_vec(&self.stress(x), n)
    }

    /// Stress recovered as `C ε(u)` with the strain of the closed form
    /// carried in double-double, so the stiff fibre entries of `C` do not
    /// amplify the rounding of the strain.
    fn end_stress(&self, x: Point) -> [f64; 3] {
        let s = &self.compliance;
        let cy = tensor::two_prod(self.c, x[1]);
        let cx = tensor::two_prod(self.c, x[0]);
        // ε11 = −S11 c y, ε22 = −S21 c y, 2ε12 = (−S11 c x − S31 c y) + S11 c x.
        let e11 = dd_scale(-s[0][0], cy);
        let e22 = dd_scale(-s[1][0], cy);
        let e12 = dd_add(dd_add(dd_scale(-s[0][0], cx), dd_scale(-s[2][0], cy)), dd_scale(s[0][0], cx));
        let parts = [e11.0, e11.1, e22.0, e22.1, e12.0, e12.1];
        let mut out = [0.0; 3];
        for (j, row) in self.stiffness.iter().enumerate() {
            let coeffs = [row[0], row[0], row[1], row[1], row[2], row[2]];
            out[j] = tensor::dot_compensated(0.0, &coeffs, &parts);
        }
        out
    }

    /// Residuals of the defining relations at `points`.
    pub fn self_check(&self, points: &[Point]) -> BeamCheck {
        let s = &self.compliance;
        let mut strain: f64 = 0.0;
        let mut traction: f64 = 0.0;
        let strain_scale = self.c * 0.5 * self.height * tensor::mat3_max_abs(s);
        for &x in points {
            let sigma = self.stress(x);
            let target = tensor::mat3_vec(s, [sigma[0][0], sigma[1][1], sigma[0][1]]);
            let eps = tensor::strain_to_voigt(&tensor::sym(&self.gradient(x)));
            for k in 0..3 {
                strain = strain.max((eps[k] - target[k]).abs() / strain_scale);
            }
            // Stress recovered from the displacement on the loaded end.
            let end = [self.length, x[1]];
            let sv = self.end_stress(end);
            let load = -self.c * end[1];
            let t_scale = self.c * 0.5 * self.height;
            traction = traction.max((sv[0] - load).abs() / t_scale).max(sv[2].abs() / t_scale);
        }
        let mut dirichlet: f64 = 0.0;
        let d_scale = self.c * self.height * self.height * tensor::mat3_max_abs(s);
        for &x in points {
            let y = x[1];
            dirichlet = dirichlet.max((self.value([0.0, y])[0] - self.dirichlet_x(y)).abs() / d_scale);
        }
        dirichlet = dirichlet.max(self.value([0.0, -0.5 * self.height])[1].abs() / d_scale);
        BeamCheck { strain, dirichlet, traction }
    }
}

/// `a · (hi + lo)` as a double-double.
fn dd_scale(a: f64, b: (f64, f64)) -> (f64, f64) {
    let (p, e) = tensor::two_prod(a, b.0);
    let (s, f) = tensor::two_sum(p, e + a * b.1);
    (s, f)
}

fn dd_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (s, e) = tensor::two_sum(a.0, b.0);
    tensor::two_sum(s, e + a.1 + b.1)
}

impl ExactField for BeamExact {
    fn value(&self, x: Point) -> Vec2 {
        let s = &self.compliance;
        let c = self.c;
        let q = x[1] * x[1] - 0.25 * self.height * self.height;
        [
            -s[0][0] * c * x[0] * x[1] - 0.5 * s[2][0] * c * q,
            0.5 * s[0][0] * c * x[0] * x[0] - 0.5 * s[1][0] * c * q,
        ]
    }

    fn gradient(&self, x: Point) -> Mat2 {
        let s = &self.compliance;
        let c = self.c;
        [
            [-s[0][0] * c * x[1], -s[0][0] * c * x[0] - s[2][0] * c * x[1]],
            [s[0][0] * c * x[0], -s[1][0] * c * x[1]],
        ]
    }
}

/// Scaled residuals of the beam solution: strain–stress relation, clamped
/// end data and end load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamCheck {
    pub strain: f64,
    pub dirichlet: f64,
    pub traction: f64,
}

impl BeamCheck {
    pub fn max(&self) -> f64 {
        self.strain.max(self.dirichlet).max(self.traction)
    }
}

/// Beam mesh at refinement level `ℓ`: `(10, 2)·2^ℓ` cells, left end
/// constrained horizontally, all other edges traction boundaries.
pub fn beam_mesh(level: u32) -> Result<Mesh> {
    let k = 1usize << level;
    let mesh = rect_mesh(BEAM_LENGTH, BEAM_HEIGHT, 10 * k, 2 * k, -0.5 * BEAM_HEIGHT)?;
    let left = |a: Point, b: Point| a[0] == 0.0 && b[0] == 0.0;
    classify_edges(mesh, |a, b| left(a, b).then_some(Components::X), |a, b| !left(a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSolution {
    pub tip: Vec2,
    pub ndof: usize,
    pub h: f64,
    pub solve: SolveReport,
}

pub fn solve_cook(n: usize, params: &MaterialParams, fiber: &FiberDirection, config: &MethodConfig, tol: f64) -> Result<BenchSolution> {
    let mesh = cook_mesh(n)?;
    let zero = |_: Point| [0.0, 0.0];
    let traction = |x: Point, _n: Vec2| if (x[0] - 48.0).abs() < 1e-9 { [0.0, COOK_TRACTION] } else { [0.0, 0.0] };
    let loads = LoadSpec { body_force: None, traction: Some(&traction), dirichlet: Some(&zero), point_constraints: Vec::new() };
    let space = FunctionSpace::new(config.method.space_kind(), &mesh);
    let system = assemble(&space, params, fiber, config, &loads)?;
    let report = solve(&system, tol)?;
    let tip = vertex_value(&space, &report.solution, mesh.find_vertex(COOK_TIP, 1e-9)?);
    Ok(BenchSolution { tip, ndof: space.dof_count(), h: mesh.h(), solve: report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSolution {
    pub bench: BenchSolution,
    pub dg_err: f64,
    pub h1: H1Error,
    /// Largest edge-average mismatch `|avg(u_x) − avg(g)|` on the clamped end.
    pub dirichlet_mismatch: f64,
}

pub fn solve_beam(level: u32, params: &MaterialParams, fiber: &FiberDirection, config: &MethodConfig, tol: f64) -> Result<BeamSolution> {
    let exact = beam_exact_solution(params, fiber, BEAM_LOAD, BEAM_LENGTH, BEAM_HEIGHT)?;
    let mesh = beam_mesh(level)?;
    let g = |x: Point| exact.value(x);
    let traction = |x: Point, n: Vec2| exact.traction(x, n);
    let loads = LoadSpec {
        body_force: None,
        traction: Some(&traction),
        dirichlet: Some(&g),
        point_constraints: alloc::vec![PointConstraint {
            vertex: mesh.find_vertex(BEAM_PIN, 1e-9)?,
            components: Components::Y,
            value: [0.0, 0.0],
        }],
    };
    let space = FunctionSpace::new(config.method.space_kind(), &mesh);
    let system = assemble(&space, params, fiber, config, &loads)?;
    let report = solve(&system, tol)?;
    let tip = vertex_value(&space, &report.solution, mesh.find_vertex(BEAM_TIP, 1e-9)?);
    let dg_err = dg_error(&space, &report.solution, &exact);
    let h1 = broken_h1_error(&space, &report.solution, &exact)?;
    let mut dirichlet_mismatch: f64 = 0.0;
    for e in mesh.dirichlet_edges() {
        let edge = &mesh.edges[e];
        let geom = space.geometry(edge.owner);
        let [a, b] = edge.endpoints;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let mut avg = 0.0;
        let rule = crate::femspace::edge_quadrature(5)?;
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = [pa[0] + s[0] * (pb[0] - pa[0]), pa[1] + s[0] * (pb[1] - pa[1])];
            let (uh, _) = space.evaluate(&report.solution, edge.owner, &geom, geom.barycentric(x));
            avg += w * (uh[0] - exact.dirichlet_x(x[1]));
        }
        dirichlet_mismatch = dirichlet_mismatch.max(avg.abs());
    }
    Ok(BeamSolution {
        bench: BenchSolution { tip, ndof: space.dof_count(), h: mesh.h(), solve: report },
        dg_err,
        h1,
        dirichlet_mismatch,
    })
}

/// Beam errors over levels `0..levels`.
pub fn beam_convergence(levels: u32, params: &MaterialParams, fiber: &FiberDirection, config: &MethodConfig, tol: f64) -> Result<(ErrorReport, Vec<BeamSolution>)> {
    let mut report = ErrorReport::default();
    let mut runs = Vec::new();
    for level in 0..levels {
        let run = solve_beam(level, params, fiber, config, tol)?;
        report.records.push(ErrorRecord {
            level: level as usize,
            h: run.bench.h,
            ndof: run.bench.ndof,
            dg_err: run.dg_err,
            h1_rel_err: run.h1.relative,
            l2_err: run.h1.l2,
        });
        runs.push(run);
    }
    Ok((report, runs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Benchmark {
    Cook,
    Beam,
}

impl Benchmark {
    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Cook => "cook",
            Benchmark::Beam => "beam",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Benchmark::Cook, Benchmark::Beam].into_iter().find(|b| b.name().eq_ignore_ascii_case(s))
    }

    pub fn default_e_t(self) -> f64 {
        match self {
            Benchmark::Cook => COOK_E_T,
            Benchmark::Beam => BEAM_E_T,
        }
    }
}

/// Parameters of a benchmark sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub benchmark: Benchmark,
    pub methods: Vec<MethodConfig>,
    pub p_values: Vec<f64>,
    pub angles: Vec<f64>,
    pub nu: f64,
    pub q: f64,
    /// Cook: grid `n = 2^level`. Beam: `(10, 2)·2^level` cells.
    pub levels: Vec<u32>,
    pub tol: f64,
}

/// One solved sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TipDisplacementRecord {
    pub benchmark: Benchmark,
    pub method: String,
    pub p: f64,
    pub angle: f64,
    pub nu: f64,
    pub level: u32,
    pub h: f64,
    pub ndof: usize,
    pub tip_point: Point,
    pub tip_uy: f64,
    /// Beam only.
    pub dg_err: Option<f64>,
    pub h1_rel_err: Option<f64>,
    pub l2_err: Option<f64>,
}

/// A sweep cell that was not run.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub method: String,
    pub p: f64,
    pub angle: f64,
    pub level: u32,
    pub reason: Error,
}

/// One cell of the Cartesian product of a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub method: MethodConfig,
    pub p: f64,
    pub angle: f64,
    pub level: u32,
}

impl BenchmarkCase {
    /// Cells in a fixed order: method, then p, then angle, then level.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for &p in &self.p_values {
                for &angle in &self.angles {
                    for &level in &self.levels {
                        out.push(SweepCell { method, p, angle, level });
                    }
                }
            }
        }
        out
    }

    pub fn constants(&self, p: f64) -> EngineeringConstants {
        EngineeringConstants::new(self.benchmark.default_e_t(), p, self.q, self.nu, self.nu)
    }

    pub fn stability(&self, p: f64) -> StabilityReport {
        stability_check(&self.constants(p))
    }

    /// Solves one cell; unstable materials yield `StabilityViolation`.
    pub fn run_cell(&self, cell: &SweepCell) -> Result<TipDisplacementRecord> {
        self.solve_cell(cell).map(|(record, _)| record)
    }

    /// As [`BenchmarkCase::run_cell`], also returning the discrete solution.
    pub fn solve_cell(&self, cell: &SweepCell) -> Result<(TipDisplacementRecord, BenchSolution)> {
        let ec = self.constants(cell.p);
        if !stability_check(&ec).passed() {
            return Err(Error::StabilityViolation);
        }
        let params = material_from(&ec)?;
        let fiber = FiberDirection::from_angle(cell.angle);
        let (tip_point, bench, dg_err, h1, l2) = match self.benchmark {
            Benchmark::Cook => {
                let sol = solve_cook(1usize << cell.level, &params, &fiber, &cell.method, self.tol)?;
                (COOK_TIP, sol, None, None, None)
            }
            Benchmark::Beam => {
                let sol = solve_beam(cell.level, &params, &fiber, &cell.method, self.tol)?;
                (BEAM_TIP, sol.bench, Some(sol.dg_err), Some(sol.h1.relative), Some(sol.h1.l2))
            }
        };
        let record = TipDisplacementRecord {
            benchmark: self.benchmark,
            method: cell.method.label(),
            p: cell.p,
            angle: cell.angle,
            nu: self.nu,
            level: cell.level,
            h: bench.h,
            ndof: bench.ndof,
            tip_point,
            tip_uy: bench.tip[1],
            dg_err,
            h1_rel_err: h1,
            l2_err: l2,
        };
        Ok((record, bench))
    }

    /// Serial sweep. Failed cells are collected and the sweep continues.
    pub fn run(&self) -> (Vec<TipDisplacementRecord>, Vec<SkippedCell>) {
        let mut records = Vec::new();
        let mut skipped = Vec::new();
        for cell in self.cells() {
            match self.run_cell(&cell) {
                Ok(r) => records.push(r),
                Err(reason) => skipped.push(SkippedCell {
                    method: cell.method.label(),
                    p: cell.p,
                    angle: cell.angle,
                    level: cell.level,
                    reason,
                }),
            }
        }
        (records, skipped)
    }
}

pub fn run_cook(case: &BenchmarkCase) -> (Vec<TipDisplacementRecord>, Vec<SkippedCell>) {
    debug_assert_eq!(case.benchmark, Benchmark::Cook);
    case.run()
}

pub fn run_beam(case: &BenchmarkCase) -> (Vec<TipDisplacementRecord>, Vec<SkippedCell>) {
    debug_assert_eq!(case.benchmark, Benchmark::Beam);
    case.run()
}
