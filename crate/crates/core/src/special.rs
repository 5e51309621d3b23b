//! Gamma function and related elementary special functions.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Γ(k/2) by the recursion Γ(z+1) = zΓ(z) from Γ(1) = 1 and Γ(1/2) = √π.
    fn gamma_half_exact(k: u32) -> f64 {
        let (mut z, mut g) = if k % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
        while 2.0 * z < k as f64 {
            g *= z;
            z += 1.0;
        }
        g
    }

    #[test]
    fn half_integer_values_match_recursion() {
        for k in 1..=100u32 {
            let exact = gamma_half_exact(k);
            let ln_err = (ln_gamma(k as f64 / 2.0) - exact.ln()).abs();
            assert!(
                ln_err <= 1e-13 * exact.ln().abs().max(1.0),
                "k={k}: ln err {ln_err:e}"
            );
            if k <= 60 {
                let rel = (gamma(k as f64 / 2.0) - exact).abs() / exact;
                assert!(rel < 1e-13, "k={k}: rel err {rel:e}");
            }
        }
    }

    #[test]
    fn reflection_branch() {
        // Γ(1/4) = 3.6256099082219083119...
        assert!((gamma(0.25) - 3.625_609_908_221_908_3).abs() < 1e-13);
        // Γ(-1/2) = -2√π
        assert!((ln_gamma(-0.5) - (2.0 * PI.sqrt()).ln()).abs() < 1e-13);
    }
}
