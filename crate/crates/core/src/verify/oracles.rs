//! Independent reference values used by the self-checks.

use std::f64::consts::PI;

/// Carlson's symmetric elliptic integral R_F(x, y, z) by the duplication
/// theorem, for non-negative arguments with at most one zero.
pub fn carlson_rf(x0: f64, y0: f64, z0: f64) -> f64 {
    let (mut x, mut y, mut z) = (x0, y0, z0);
    let a0 = (x0 + y0 + z0) / 3.0;
    let mut a = a0;
    // stop once 4^{-n} Q < A_n, Q = (3ε)^{-1/6} max|A_0 − ·|
    let q = (3.0 * f64::EPSILON).powf(-1.0 / 6.0)
        * (a0 - x0).abs().max((a0 - y0).abs()).max((a0 - z0).abs());
    let mut pow4 = 1.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        pow4 *= 0.25;
    }
    let xs = (a0 - x0) * pow4 / a;
    let ys = (a0 - y0) * pow4 / a;
    let zs = -xs - ys;
    let e2 = xs * ys - zs * zs;
    let e3 = xs * ys * zs;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt()
}

/// 𝔢(a) for d = 3 through the identity 𝔢(a) = 2 R_F(a₁², a₂², a₃²).
pub fn efrak_d3(a: [f64; 3]) -> f64 {
    2.0 * carlson_rf(a[0] * a[0], a[1] * a[1], a[2] * a[2])
}

/// Capacity (normalised so the unit ball has 4π) of the prolate spheroid
/// with semi-axes (a, b, b), a > b: 8πc / ln((a+c)/(a−c)), c = √(a²−b²).
pub fn prolate_capacity(a: f64, b: f64) -> f64 {
    let c = ((a - b) * (a + b)).sqrt();
    8.0 * PI * c / ((a + c) / (a - c)).ln()
}
