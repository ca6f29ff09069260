//! Fixed-size 2D vector and 2×2 tensor helpers.

pub type Point = [f64; 2];
pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn outer(a: Vec2, b: Vec2) -> Mat2 {
    [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]]
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[inline]
pub fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

#[inline]
pub fn mat_scale(s: f64, a: &Mat2) -> Mat2 {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

/// Double contraction `A : B`.
#[inline]
pub fn ddot(a: &Mat2, b: &Mat2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

#[inline]
pub fn trace(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

#[inline]
pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

#[inline]
pub fn sym(a: &Mat2) -> Mat2 {
    let off = 0.5 * (a[0][1] + a[1][0]);
    [[a[0][0], off], [off, a[1][1]]]
}

/// Engineering-shear Voigt vector `(ε11, ε22, 2ε12)` of a symmetric strain.
#[inline]
pub fn strain_to_voigt(eps: &Mat2) -> [f64; 3] {
    [eps[0][0], eps[1][1], eps[0][1] + eps[1][0]]
}

#[inline]
pub fn strain_from_voigt(e: [f64; 3]) -> Mat2 {
    [[e[0], 0.5 * e[2]], [0.5 * e[2], e[1]]]
}

/// Stress tensor from its Voigt vector `(σ11, σ22, σ12)`.
#[inline]
pub fn stress_from_voigt(s: [f64; 3]) -> Mat2 {
    [[s[0], s[2]], [s[2], s[1]]]
}

#[inline]
pub fn mat3_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, row) in m.iter().enumerate() {
        out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Largest absolute entry.
pub fn mat3_max_abs(m: &Mat3) -> f64 {
    m.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Error-free sum: `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free product: `a · b = p + e` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

/// `c + Σ aᵢ bᵢ` evaluated as if in twice the working precision.
pub fn dot_compensated(c: f64, a: &[f64], b: &[f64]) -> f64 {
    let (mut s, mut err) = (c, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (p, pe) = two_prod(*x, *y);
        let (t, te) = two_sum(s, p);
        s = t;
        err += te + pe;
    }
    s + err
}

/// `m v` with compensated row sums.
pub fn mat3_vec_compensated(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [dot_compensated(0.0, &m[0], &v), dot_compensated(0.0, &m[1], &v), dot_compensated(0.0, &m[2], &v)]
}
