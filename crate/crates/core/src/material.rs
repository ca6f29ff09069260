//! Transversely isotropic constitutive law in plane strain.
//!
//! The elasticity tensor is
//! `C = λ I⊗I + 2μ_t 𝕀 + β M⊗M + α (I⊗M + M⊗I) + γ 𝕄`, with `M = a⊗a` the
//! structural tensor of the fibre direction `a` and `𝕄R = MR + RM`. Plane
//! strain keeps the in-plane components only; the fibre always lies in the
//! plane.

use crate::tensor::{self, Mat2, Mat3, Vec2};
use crate::{Error, Result};

/// Engineering description of a transversely isotropic material.
///
/// `p = E_l / E_t` and `q = μ_l / μ_t`. Constructors do not reject unstable
/// combinations; use [`stability_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineeringConstants {
    pub e_t: f64,
    pub p: f64,
    pub q: f64,
    pub nu_t: f64,
    pub nu_l: f64,
}

impl EngineeringConstants {
    pub fn new(e_t: f64, p: f64, q: f64, nu_t: f64, nu_l: f64) -> Self {
        Self { e_t, p, q, nu_t, nu_l }
    }

    /// Equal Poisson ratios and equal shear moduli (`q = 1`).
    pub fn equal_poisson(e_t: f64, p: f64, nu: f64) -> Self {
        Self::new(e_t, p, 1.0, nu, nu)
    }
}

/// The five Lamé-like moduli of the law plus the derived `γ = 2(μ_l − μ_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu_t: f64,
    pub mu_l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu_t: f64, mu_l: f64, alpha: f64, beta: f64) -> Self {
        Self { lambda, mu_t, mu_l, alpha, beta, gamma: 2.0 * (mu_l - mu_t) }
    }

    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        Self::new(lambda, mu, mu, 0.0, 0.0)
    }

    pub fn is_isotropic(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0 && self.gamma == 0.0
    }
}

fn check_denominator(den: f64, scale: f64) -> Result<()> {
    if !(den.abs() > 1e-14 * scale) {
        return Err(Error::DegenerateDenominator { value: den });
    }
    Ok(())
}

/// Converts engineering constants into the moduli of the law.
pub fn derive_params(ec: &EngineeringConstants) -> Result<MaterialParams> {
    let EngineeringConstants { e_t, p, q, nu_t, nu_l } = *ec;
    let plane = (1.0 - nu_t) * p - 2.0 * nu_l * nu_l;
    let den = (1.0 + nu_t) * plane;
    let scale = (1.0 + nu_t.abs()) * ((1.0 - nu_t).abs() * p.abs() + 2.0 * nu_l * nu_l);
    check_denominator(den, scale)?;

    let mu_t = e_t / (2.0 * (1.0 + nu_t));
    let mu_l = q * e_t / (2.0 * (1.0 + nu_t));
    let lambda = (nu_t * p + nu_l * nu_l) / den * e_t;
    let alpha = ((nu_l - nu_t + nu_t * nu_l) * p - nu_l * nu_l) / den * e_t;
    let beta = ((1.0 - nu_t * nu_t) * p * p
        + (-2.0 * nu_t * nu_l + 2.0 * q * nu_t - 2.0 * nu_l + 1.0 - 2.0 * q) * p
        - (1.0 - 4.0 * q) * nu_l * nu_l)
        / den
        * e_t;
    Ok(MaterialParams::new(lambda, mu_t, mu_l, alpha, beta))
}

/// Specialization of [`derive_params`] to `ν_t = ν_l = ν` and `q = 1`.
///
/// The `(p − 1)` factors are kept explicit so `p = 1` yields exactly zero
/// anisotropic moduli.
pub fn derive_params_special(e_t: f64, p: f64, nu: f64) -> Result<MaterialParams> {
    let plane = (1.0 - nu) * p - 2.0 * nu * nu;
    let den = (1.0 + nu) * plane;
    let scale = (1.0 + nu.abs()) * ((1.0 - nu).abs() * p.abs() + 2.0 * nu * nu);
    check_denominator(den, scale)?;

    let mu = e_t / (2.0 * (1.0 + nu));
    let lambda = nu * (p + nu) / den * e_t;
    let alpha = nu * nu * (p - 1.0) / den * e_t;
    let beta = (p - 1.0) * ((1.0 - nu * nu) * p - 3.0 * nu * nu) / den * e_t;
    Ok(MaterialParams::new(lambda, mu, mu, alpha, beta))
}

/// Outcome of the pointwise stability conditions on engineering constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `E_t > 0`, `μ_t > 0` and `μ_l > 0`.
    pub moduli_positive: bool,
    /// `p > ν_l²`.
    pub fibre_stiffness: bool,
    /// `(1 − ν_t) p − 2ν_l² > 0`.
    pub plane_condition: bool,
    pub plane_margin: f64,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.moduli_positive && self.fibre_stiffness && self.plane_condition
    }
}

pub fn stability_check(ec: &EngineeringConstants) -> StabilityReport {
    let mu_t = ec.e_t / (2.0 * (1.0 + ec.nu_t));
    let mu_l = ec.q * mu_t;
    let plane_margin = (1.0 - ec.nu_t) * ec.p - 2.0 * ec.nu_l * ec.nu_l;
    StabilityReport {
        moduli_positive: ec.e_t > 0.0 && mu_t > 0.0 && mu_l > 0.0,
        fibre_stiffness: ec.p > ec.nu_l * ec.nu_l,
        plane_condition: plane_margin > 0.0,
        plane_margin,
    }
}

/// In-plane fibre direction given by its angle to the x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberDirection {
    angle: f64,
    a: Vec2,
    m: Mat2,
}

impl FiberDirection {
    /// The angle is reduced to `[0, π)`: `a` and `−a` describe the same fibre.
    ///
    /// The reduced angle is snapped to the grid `j·π/2⁴⁴`, so `θ` and the
    /// rounded `θ + π` give bitwise identical fibre data, while dyadic
    /// fractions of π such as `π/2` or `3π/4` are kept exactly. An angle whose
    /// `θ/π` sits within rounding of a grid midpoint can land one step away
    /// from its `θ + π` partner.
    pub fn from_angle(angle: f64) -> Self {
        use core::f64::consts::PI;
        const STEPS: f64 = (1u64 << 44) as f64;
        let turns = angle / PI;
        let frac = turns - libm::floor(turns);
        let mut j = libm::round(frac * STEPS);
        if j >= STEPS {
            j = 0.0;
        }
        let reduced = j * PI / STEPS;
        let a = [libm::cos(reduced), libm::sin(reduced)];
        Self { angle: reduced, a, m: tensor::outer(a, a) }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn vector(&self) -> Vec2 {
        self.a
    }

    /// `M = a ⊗ a`.
    pub fn structural_tensor(&self) -> Mat2 {
        self.m
    }
}

/// Plane-strain stiffness on engineering strain `(ε11, ε22, 2ε12)` giving
/// stress `(σ11, σ22, σ12)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoigtMatrix(pub Mat3);

impl VoigtMatrix {
    pub fn entries(&self) -> &Mat3 {
        &self.0
    }

    pub fn apply(&self, strain: [f64; 3]) -> [f64; 3] {
        tensor::mat3_vec(&self.0, strain)
    }
}

pub fn voigt_matrix(params: &MaterialParams, fiber: &FiberDirection) -> VoigtMatrix {
    let MaterialParams { lambda, mu_t, alpha, beta, gamma, .. } = *params;
    let [c, s] = fiber.a;
    let (c2, s2, cs) = (c * c, s * s, c * s);

    let c11 = lambda + 2.0 * mu_t + beta * c2 * c2 + 2.0 * (alpha + gamma) * c2;
    let c22 = lambda + 2.0 * mu_t + beta * s2 * s2 + 2.0 * (alpha + gamma) * s2;
    let c12 = lambda + alpha + beta * c2 * s2;
    let c13 = (beta * c2 + alpha + gamma) * cs;
    let c23 = (beta * s2 + alpha + gamma) * cs;
    let c33 = mu_t + beta * c2 * s2 + 0.5 * gamma;
    VoigtMatrix([[c11, c12, c13], [c12, c22, c23], [c13, c23, c33]])
}

/// Stress from strain by direct evaluation of the tensor expression.
pub fn apply_stress(params: &MaterialParams, fiber: &FiberDirection, eps: &Mat2) -> Mat2 {
    let m = &fiber.m;
    let tr = tensor::trace(eps);
    let m_eps = tensor::ddot(m, eps);
    let mut sigma = tensor::mat_scale(params.lambda * tr, &tensor::IDENTITY);
    sigma = tensor::mat_add(&sigma, &tensor::mat_scale(2.0 * params.mu_t, eps));
    sigma = tensor::mat_add(&sigma, &tensor::mat_scale(params.beta * m_eps, m));
    let coupling = tensor::mat_add(
        &tensor::mat_scale(m_eps, &tensor::IDENTITY),
        &tensor::mat_scale(tr, m),
    );
    sigma = tensor::mat_add(&sigma, &tensor::mat_scale(params.alpha, &coupling));
    let shear = tensor::mat_add(&tensor::mat_mul(eps, m), &tensor::mat_mul(m, eps));
    tensor::mat_add(&sigma, &tensor::mat_scale(params.gamma, &shear))
}

fn cholesky3(m: &Mat3) -> Option<Mat3> {
    let mut l = [[0.0; 3]; 3];
    let scale = tensor::mat3_max_abs(m);
    for j in 0..3 {
        let mut d = m[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 1e-14 * scale) {
            return None;
        }
        l[j][j] = libm::sqrt(d);
        for i in j + 1..3 {
            let mut v = m[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v / l[j][j];
        }
    }
    Some(l)
}

/// Inverse of the plane-strain stiffness: maps stress `(σ11, σ22, σ12)` to
/// engineering strain. Row/column 3 is the shear slot.
pub fn compliance_matrix(params: &MaterialParams, fiber: &FiberDirection) -> Result<Mat3> {
    let c = voigt_matrix(params, fiber).0;
    cholesky3(&c).ok_or(Error::SingularMatrix)?;
    let cof = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        c[r0][c0] * c[r1][c1] - c[r0][c1] * c[r1][c0]
    };
    let det = c[0][0] * cof(0, 0) + c[0][1] * cof(0, 1) + c[0][2] * cof(0, 2);
    let mut s = [[0.0; 3]; 3];
    for (i, row) in s.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cof(j, i) / det;
        }
    }
    // Newton steps S ← S + S (I − C S) with a compensated residual recover
    // the accuracy lost to the spread between fibre and matrix stiffness.
    for _ in 0..2 {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let col = [s[0][j], s[1][j], s[2][j]];
                let delta = if i == j { 1.0 } else { 0.0 };
                r[i][j] = tensor::dot_compensated(delta, &c[i].map(|v| -v), &col);
            }
        }
        let corr = tensor::mat3_mul(&s, &r);
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += corr[i][j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..i {
            let v = 0.5 * (s[i][j] + s[j][i]);
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    Ok(s)
}

fn eigenvalues_2x2(a: f64, b: f64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let r = libm::hypot(half_diff, b);
    // The smaller root via the product avoids cancellation.
    let big = if mean >= 0.0 { mean + r } else { mean - r };
    let det = a * d - b * b;
    let small = if big != 0.0 { det / big } else { 0.0 };
    if big >= small {
        [small, big]
    } else {
        [big, small]
    }
}

/// Eigenvalues of a symmetric 3×3 matrix in ascending order.
pub fn symmetric_eigenvalues(m: &Mat3) -> [f64; 3] {
    let mut out = if m[0][2] == 0.0 && m[1][2] == 0.0 {
        let [e0, e1] = eigenvalues_2x2(m[0][0], m[0][1], m[1][1]);
        [e0, e1, m[2][2]]
    } else {
        jacobi_eigenvalues(*m)
    };
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    out
}

fn jacobi_eigenvalues(mut a: Mat3) -> [f64; 3] {
    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= 1e-34 * diag || off == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / libm::sqrt(t * t + 1.0);
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}

/// Smallest eigenvalue `Λ_min` of the stiffness matrix.
pub fn min_eigenvalue(vm: &VoigtMatrix) -> f64 {
    symmetric_eigenvalues(&vm.0)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn voigt_by_tensor(params: &MaterialParams, fiber: &FiberDirection) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let sigma = apply_stress(params, fiber, &tensor::strain_from_voigt(e));
            out[0][j] = sigma[0][0];
            out[1][j] = sigma[1][1];
            out[2][j] = sigma[0][1];
        }
        out
    }

    #[test]
    fn isotropic_engineering_constants() {
        let p = derive_params(&EngineeringConstants::equal_poisson(1.0, 1.0, 0.3)).unwrap();
        assert_relative_eq!(p.lambda, 0.576_923_076_923_076_9, max_relative = 1e-14);
        assert_relative_eq!(p.mu_t, 0.384_615_384_615_384_6, max_relative = 1e-14);
        assert_relative_eq!(p.mu_l, 0.384_615_384_615_384_6, max_relative = 1e-14);
        // Lamé formula cross-check.
        assert_relative_eq!(p.lambda, 0.3 / (1.3 * 0.4), max_relative = 1e-14);
        assert!(p.alpha.abs() < 1e-15 && p.beta.abs() < 1e-15);
        assert_eq!(p.gamma, 0.0);
    }

    #[test]
    fn shear_ratio_sets_gamma() {
        let p = derive_params(&EngineeringConstants::new(1.0, 1.0, 2.0, 0.3, 0.3)).unwrap();
        assert_relative_eq!(p.gamma, 0.769_230_769_230_769_2, max_relative = 1e-14);
        assert_eq!(p.gamma, 2.0 * (p.mu_l - p.mu_t));
    }

    #[test]
    fn special_form_matches_general() {
        let s = derive_params_special(1.0, 1.0, 0.3).unwrap();
        assert_eq!((s.alpha, s.beta, s.gamma), (0.0, 0.0, 0.0));
        let g = derive_params(&EngineeringConstants::equal_poisson(1.0, 1.0, 0.3)).unwrap();
        assert_relative_eq!(s.lambda, g.lambda, max_relative = 1e-14);

        // Values from a 40-digit evaluation of the closed forms.
        let s = derive_params_special(250.0, 10.0, 0.49995).unwrap();
        assert_relative_eq!(s.lambda, 194.404_634_783_206_894_6, max_relative = 1e-13);
        assert_relative_eq!(s.mu_t, 83.336_111_203_706_790_2, max_relative = 1e-14);
        assert_relative_eq!(s.alpha, 83.308_337_129_108_098_86, max_relative = 1e-13);
        assert_relative_eq!(s.beta, 2_249.991_669_166_287_089, max_relative = 1e-13);
        let g = derive_params(&EngineeringConstants::equal_poisson(250.0, 10.0, 0.49995)).unwrap();
        for (a, b) in [(s.lambda, g.lambda), (s.alpha, g.alpha), (s.beta, g.beta), (s.mu_t, g.mu_t)] {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn beta_grows_linearly_in_p() {
        let b1 = derive_params_special(1.0, 1e8, 0.3).unwrap().beta;
        let b2 = derive_params_special(1.0, 2e8, 0.3).unwrap().beta;
        assert!(((b2 / b1) - 2.0).abs() < 0.01);
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        // (1 - ν) p = 2ν² at ν = 0.5, p = 1.
        let err = derive_params_special(1.0, 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::DegenerateDenominator { .. }));
    }

    #[test]
    fn stability_examples() {
        let ok = stability_check(&EngineeringConstants::equal_poisson(1.0, 1.0, 0.49995));
        assert!(ok.passed());
        assert_relative_eq!(ok.plane_margin, 1.49995e-4, max_relative = 1e-9);

        let bad = stability_check(&EngineeringConstants::equal_poisson(1.0, 0.5, 0.49995));
        assert!(!bad.plane_condition && !bad.passed());

        let neg = stability_check(&EngineeringConstants::equal_poisson(-1.0, 1.0, 0.3));
        assert!(!neg.moduli_positive && !neg.passed());
    }

    #[test]
    fn isotropic_voigt_form() {
        let params = MaterialParams::isotropic(1.3, 0.7);
        for angle in [0.0, 0.4, 2.0] {
            let c = voigt_matrix(&params, &FiberDirection::from_angle(angle)).0;
            let expected = [[2.7, 1.3, 0.0], [1.3, 2.7, 0.0], [0.0, 0.0, 0.7]];
            for i in 0..3 {
                for j in 0..3 {
                    assert!((c[i][j] - expected[i][j]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn fibre_aligned_uniaxial_stress() {
        let params = MaterialParams::new(1.1, 0.4, 0.9, 0.3, 5.0);
        let c = voigt_matrix(&params, &FiberDirection::from_angle(0.0));
        let sigma = c.apply([1.0, 0.0, 0.0]);
        let expected = params.lambda + 2.0 * params.mu_t + params.beta + 2.0 * params.alpha + 2.0 * params.gamma;
        assert_relative_eq!(sigma[0], expected, max_relative = 1e-15);
    }

    #[test]
    fn stress_examples() {
        let params = MaterialParams::isotropic(2.0, 3.0);
        let fiber = FiberDirection::from_angle(0.3);
        assert_eq!(apply_stress(&params, &fiber, &[[0.0; 2]; 2]), [[0.0; 2]; 2]);
        let s = apply_stress(&params, &fiber, &tensor::IDENTITY);
        assert_relative_eq!(s[0][0], 10.0, max_relative = 1e-15);
        assert_relative_eq!(s[1][1], 10.0, max_relative = 1e-15);
        assert!(s[0][1].abs() < 1e-15);
    }

    #[test]
    fn compliance_examples() {
        let params = MaterialParams::isotropic(1.0, 0.5);
        let s = compliance_matrix(&params, &FiberDirection::from_angle(1.0)).unwrap();
        assert_relative_eq!(s[2][2], 2.0, max_relative = 1e-13);

        let params = derive_params(&EngineeringConstants::new(1.0, 3.0, 2.0, 0.25, 0.3)).unwrap();
        for angle in [0.0, PI / 2.0] {
            let s = compliance_matrix(&params, &FiberDirection::from_angle(angle)).unwrap();
            assert!(s[2][0].abs() < 1e-15);
        }
        // 40-digit inverse of the same stiffness at π/6.
        let s = compliance_matrix(&params, &FiberDirection::from_angle(PI / 6.0)).unwrap();
        assert_relative_eq!(s[0][0], 0.427_968_75, max_relative = 1e-12);
        assert_relative_eq!(s[2][0], -0.209_469_894_540_361_097_7, max_relative = 1e-12);
        assert_relative_eq!(s[2][1], -0.322_414_040_950_581_637_9, max_relative = 1e-12);
        assert_relative_eq!(s[2][2], 1.445_625, max_relative = 1e-12);

        let unstable = MaterialParams::isotropic(-2.0, 0.5);
        assert_eq!(
            compliance_matrix(&unstable, &FiberDirection::from_angle(0.0)),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn eigenvalue_examples() {
        let iso = voigt_matrix(&MaterialParams::isotropic(1.0, 1.0), &FiberDirection::from_angle(0.0));
        assert_relative_eq!(min_eigenvalue(&iso), 1.0, max_relative = 1e-14);
        let id = VoigtMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(min_eigenvalue(&id), 1.0);
        let d = VoigtMatrix([[5.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 7.0]]);
        assert_eq!(min_eigenvalue(&d), 2.0);

        let params = derive_params(&EngineeringConstants::new(1.0, 3.0, 2.0, 0.25, 0.3)).unwrap();
        let c = voigt_matrix(&params, &FiberDirection::from_angle(PI / 6.0));
        let ev = symmetric_eigenvalues(&c.0);
        assert_relative_eq!(ev[0], 0.627_053_951_666_263_415_0, max_relative = 1e-12);
        assert_relative_eq!(ev[1], 1.460_213_982_727_508_141, max_relative = 1e-12);
        assert_relative_eq!(ev[2], 3.039_000_181_548_257_429, max_relative = 1e-12);
    }

    #[test]
    fn unstable_isotropic_has_nonpositive_spectrum() {
        // ν > 1/2 and E_t < 0 are outside the stable set.
        for (e, nu) in [(1.0, 0.6), (-1.0, 0.3)] {
            let ec = EngineeringConstants::equal_poisson(e, 1.0, nu);
            assert!(!stability_check(&ec).passed());
            let params = derive_params(&ec).unwrap();
            let c = voigt_matrix(&params, &FiberDirection::from_angle(0.7));
            assert!(min_eigenvalue(&c) <= 0.0);
        }
    }

    fn stable_constants() -> impl Strategy<Value = EngineeringConstants> {
        (0.1f64..10.0, 1.0f64..1e4, 0.2f64..5.0, -0.4f64..0.49, -0.4f64..0.49)
            .prop_filter("stable", |(e, p, q, nt, nl)| {
                stability_check(&EngineeringConstants::new(*e, *p, *q, *nt, *nl)).passed()
            })
            .prop_map(|(e, p, q, nt, nl)| EngineeringConstants::new(e, p, q, nt, nl))
    }

    proptest! {
        #[test]
        fn voigt_matches_tensor_expression(ec in stable_constants(), angle in 0.0..PI,
                                           e in proptest::array::uniform3(-1.0f64..1.0)) {
            let params = derive_params(&ec).unwrap();
            let fiber = FiberDirection::from_angle(angle);
            let c = voigt_matrix(&params, &fiber);
            let via_matrix = c.apply(e);
            let sigma = apply_stress(&params, &fiber, &tensor::strain_from_voigt(e));
            let via_tensor = [sigma[0][0], sigma[1][1], sigma[0][1]];
            let scale = tensor::mat3_max_abs(&c.0) * (e[0].abs() + e[1].abs() + e[2].abs()).max(1e-300);
            for k in 0..3 {
                prop_assert!((via_matrix[k] - via_tensor[k]).abs() <= 1e-13 * scale);
            }
            prop_assert!((sigma[0][1] - sigma[1][0]).abs() <= 1e-13 * scale);
            let by_columns = voigt_by_tensor(&params, &fiber);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((by_columns[i][j] - c.0[i][j]).abs() <= 1e-13 * tensor::mat3_max_abs(&c.0));
                    prop_assert!((c.0[i][j] - c.0[j][i]).abs() <= 1e-14 * tensor::mat3_max_abs(&c.0));
                }
            }
        }

        #[test]
        fn stable_materials_have_positive_spectrum(ec in stable_constants(), angle in 0.0..PI) {
            let params = derive_params(&ec).unwrap();
            let c = voigt_matrix(&params, &FiberDirection::from_angle(angle));
            prop_assert!(min_eigenvalue(&c) > 1e-12 * tensor::mat3_max_abs(&c.0));
        }

        #[test]
        fn stress_is_linear(ec in stable_constants(), angle in 0.0..PI,
                            e1 in proptest::array::uniform3(-1.0f64..1.0),
                            e2 in proptest::array::uniform3(-1.0f64..1.0), s in -3.0f64..3.0) {
            let params = derive_params(&ec).unwrap();
            let fiber = FiberDirection::from_angle(angle);
            let a = tensor::strain_from_voigt(e1);
            let b = tensor::strain_from_voigt(e2);
            let combined = tensor::mat_add(&a, &tensor::mat_scale(s, &b));
            let lhs = apply_stress(&params, &fiber, &combined);
            let rhs = tensor::mat_add(&apply_stress(&params, &fiber, &a),
                                      &tensor::mat_scale(s, &apply_stress(&params, &fiber, &b)));
            let scale = tensor::mat3_max_abs(&voigt_matrix(&params, &fiber).0) * 10.0;
            for i in 0..2 { for j in 0..2 {
                prop_assert!((lhs[i][j] - rhs[i][j]).abs() <= 1e-13 * scale);
            }}
        }

        #[test]
        fn fibre_sign_flip_is_invisible(ec in stable_constants(), angle in 0.0..PI) {
            let params = derive_params(&ec).unwrap();
            let f0 = FiberDirection::from_angle(angle);
            let f1 = FiberDirection::from_angle(angle + PI);
            // θ/π and (θ+π)/π can straddle a rounding midpoint of the snap grid,
            // in which case the two directions are one grid step apart.
            let step = PI / (1u64 << 44) as f64;
            let gap = (f0.angle() - f1.angle()).abs();
            prop_assert!(gap <= 1.5 * step || (PI - gap) <= 1.5 * step);
            let c0 = voigt_matrix(&params, &f0).0;
            let c1 = voigt_matrix(&params, &f1).0;
            let scale = tensor::mat3_max_abs(&c0);
            let tol = if f0.angle() == f1.angle() { 0.0 } else { 8.0 * step * scale };
            for i in 0..3 { for j in 0..3 {
                prop_assert!((c0[i][j] - c1[i][j]).abs() <= tol);
            }}
        }

        #[test]
        fn compliance_round_trip(ec in stable_constants(), angle in 0.0..PI,
                                 e in proptest::array::uniform3(-1.0f64..1.0)) {
            let params = derive_params(&ec).unwrap();
            let fiber = FiberDirection::from_angle(angle);
            let c = voigt_matrix(&params, &fiber).0;
            let s = compliance_matrix(&params, &fiber).unwrap();
            let sc = tensor::mat3_mul(&s, &c);
            for i in 0..3 { for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((sc[i][j] - target).abs() <= 1e-12 * (1.0 + tensor::mat3_max_abs(&c) * tensor::mat3_max_abs(&s)) );
            }}
            let back = tensor::mat3_vec(&c, tensor::mat3_vec(&s, e));
            let mag = e.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let cond = tensor::mat3_max_abs(&c) * tensor::mat3_max_abs(&s);
            for k in 0..3 {
                prop_assert!((back[k] - e[k]).abs() <= 1e-12 * mag * cond.max(1.0));
            }
        }
    }
}
