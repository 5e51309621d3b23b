//! Closed forms and quadrature for torsion, capacity and the functionals
//! G_q (Newtonian, d ≥ 3) and H_q (logarithmic, d = 2) on ellipsoids.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{require_newtonian, Error, Result};
use crate::geometry::{ball_constants, AxisVector};
use crate::quadrature::{integrate, Integral};

/// Accuracy settings for the capacity integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-11,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-4) {
            return Err(Error::InvalidArgument(format!(
                "rel_tol must lie in (0, 1e-4], got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::InvalidArgument(format!(
                "max_subdivisions must be at least 16, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }
}

/// Capacity, torsion, measure and the assembled functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub d: usize,
    pub q: f64,
    pub cap: f64,
    pub torsion: f64,
    pub measure: f64,
    pub g_q: f64,
}

/// Exponent of the measure in G_q: 1 + q + 2(q−1)/d.
pub fn measure_exponent(q: f64, d: usize) -> f64 {
    1.0 + q + 2.0 * (q - 1.0) / d as f64
}

/// 𝔢(a) = ∫₀^∞ Π(a_i² + t)^{−1/2} dt together with the quadrature report.
///
/// With t = a_d²(v⁻² − 1) and b_i = a_i/a_d the integral becomes
/// 2a_d^{2−d} ∫₀¹ v^{d−3} Π(1 + v²(b_i² − 1))^{−1/2} dv, whose integrand is
/// smooth and bounded on the closed interval; the product is accumulated as a
/// sum of logarithms.
pub fn efrak_detailed(a: &AxisVector, cfg: &QuadratureConfig) -> Result<Integral> {
    let d = a.dim();
    require_newtonian("the capacity integral", d)?;
    cfg.validate()?;
    let ad = a.smallest();
    let c: Vec<f64> = a.as_slice()[..d - 1]
        .iter()
        .map(|ai| ((ai - ad) / ad) * ((ai + ad) / ad))
        .filter(|c| *c > 0.0)
        .collect();
    let power = (d - 3) as i32;
    let f = |v: f64| {
        let v2 = v * v;
        let ln_prod: f64 = c.iter().map(|ci| (v2 * ci).ln_1p()).sum();
        v.powi(power) * (-0.5 * ln_prod).exp()
    };
    let r = integrate(f, 0.0, 1.0, cfg.rel_tol, cfg.max_subdivisions);
    let scale = 2.0 * ad.powi(2 - d as i32);
    Ok(Integral {
        value: scale * r.value,
        error: scale * r.error,
        ..r
    })
}

/// 𝔢(a), failing if the requested relative accuracy is not reached.
pub fn efrak(a: &AxisVector, cfg: &QuadratureConfig) -> Result<f64> {
    let r = efrak_detailed(a, cfg)?;
    if !r.converged {
        return Err(Error::ToleranceNotMet {
            achieved: r.error / r.value.abs(),
            requested: cfg.rel_tol,
            subdivisions: r.subdivisions,
        });
    }
    Ok(r.value)
}

/// cap(Ē(a)) = 2κ_d / ((d−2) 𝔢(a)).
pub fn cap_ellipsoid(a: &AxisVector, cfg: &QuadratureConfig) -> Result<f64> {
    let d = a.dim();
    let kappa = ball_constants(d)?.kappa()?;
    Ok(2.0 * kappa / ((d as f64 - 2.0) * efrak(a, cfg)?))
}

fn ln_torsion_ellipsoid(a: &AxisVector) -> f64 {
    let d = a.dim();
    let omega = ball_constants(d).expect("axis vectors have d >= 2").omega;
    let ad = a.smallest();
    // Σ a_i^{-2} = a_d^{-2} Σ (a_d/a_i)²
    let ln_sum = -2.0 * ad.ln() + a.as_slice().iter().map(|ai| (ad / ai).powi(2)).sum::<f64>().ln();
    omega.ln() - (d as f64 + 2.0).ln() + a.ln_product() - ln_sum
}

/// T(E(a)) = ω_d/(d+2) · Π a_i · (Σ a_i^{−2})^{−1}.
pub fn torsion_ellipsoid(a: &AxisVector) -> f64 {
    let d = a.dim();
    let omega = ball_constants(d).expect("axis vectors have d >= 2").omega;
    let prod = a.product();
    let sum: f64 = a.as_slice().iter().map(|ai| ai.powi(-2)).sum();
    let direct = omega * prod / ((d as f64 + 2.0) * sum);
    if direct.is_normal() && prod.is_normal() && sum.is_normal() {
        direct
    } else {
        ln_torsion_ellipsoid(a).exp()
    }
}

/// Torsion function of E(a) at `x` (principal coordinates), zero outside.
pub fn torsion_function_at(a: &AxisVector, x: &[f64]) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: x.len() });
    }
    let inv: f64 = a.as_slice().iter().map(|ai| ai.powi(-2)).sum();
    let r: f64 = x.iter().zip(a.as_slice()).map(|(xi, ai)| (xi / ai).powi(2)).sum();
    Ok((0.5 / inv * (1.0 - r)).max(0.0))
}

/// Assembles G_q = cap · T^q / |Ω|^{1+q+2(q−1)/d}.
pub fn g_q(cap: f64, torsion: f64, measure: f64, q: f64, d: usize) -> Result<FunctionalValue> {
    for (name, v) in [("capacity", cap), ("torsion", torsion), ("measure", measure)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be finite, got {q}")));
    }
    let ln_g = cap.ln() + q * torsion.ln() - measure_exponent(q, d) * measure.ln();
    Ok(FunctionalValue {
        d,
        q,
        cap,
        torsion,
        measure,
        g_q: ln_g.exp(),
    })
}

/// G_q(B_1) = κ_d τ_d^q / ω_d^{1+q+2(q−1)/d}.
pub fn g_q_ball(d: usize, q: f64) -> Result<f64> {
    let c = ball_constants(d)?;
    Ok(g_q(c.kappa()?, c.tau, c.omega, q, d)?.g_q)
}

/// G_q of the ellipsoid E(a).
///
/// The functional is evaluated on the normalized axes (Π a_i = 1) so that it
/// stays representable for extreme aspect ratios; cap, T and |E| are reported
/// for `a` itself.
pub fn g_q_ellipsoid(a: &AxisVector, q: f64, cfg: &QuadratureConfig) -> Result<FunctionalValue> {
    let d = a.dim();
    let c = ball_constants(d)?;
    let kappa = c.kappa()?;
    let n = a.normalized();
    let df = d as f64;
    let ln_cap_n = (2.0 * kappa / (df - 2.0)).ln() - efrak(&n, cfg)?.ln();
    let ln_g = ln_cap_n + q * ln_torsion_ellipsoid(&n) - measure_exponent(q, d) * c.omega.ln();

    let t = a.ln_product() / df;
    let cap = (ln_cap_n + (df - 2.0) * t).exp();
    let torsion = torsion_ellipsoid(a);
    let measure = c.omega * a.product();
    Ok(FunctionalValue {
        d,
        q,
        cap,
        torsion,
        measure,
        g_q: ln_g.exp(),
    })
}

/// (T/|E|^{(d+2)/d}) / (τ_d/ω_d^{(d+2)/d}); at most 1, with equality at balls.
pub fn saint_venant_ratio(a: &AxisVector) -> f64 {
    let n = a.normalized();
    let c = ball_constants(a.dim()).expect("axis vectors have d >= 2");
    // |E(n)| = ω_d, so the measure powers cancel against the ball reference
    (ln_torsion_ellipsoid(&n) - c.tau.ln()).exp()
}

/// (cap/|E|^{(d−2)/d}) / (κ_d/ω_d^{(d−2)/d}); at least 1, with equality at balls.
pub fn isocapacitary_ratio(a: &AxisVector, cfg: &QuadratureConfig) -> Result<f64> {
    let d = a.dim() as f64;
    let n = a.normalized();
    // cap(E(n))/κ_d = 2/((d−2)𝔢(n))
    Ok(2.0 / ((d - 2.0) * efrak(&n, cfg)?))
}

/// Logarithmic capacity of the closed ellipse with semi-axes a1, a2.
pub fn logcap_ellipse(a1: f64, a2: f64) -> Result<f64> {
    let (a1, a2) = ordered_pair(a1, a2)?;
    Ok(0.5 * (a1 + a2))
}

/// H_q = cap · T^q / |Ω|^{(1+4q)/2}.
pub fn h_q(cap: f64, torsion: f64, measure: f64, q: f64) -> Result<f64> {
    for (name, v) in [("capacity", cap), ("torsion", torsion), ("measure", measure)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    Ok((cap.ln() + q * torsion.ln() - 0.5 * (1.0 + 4.0 * q) * measure.ln()).exp())
}

/// H_q of the unit disc, assembled from cap = 1, T = π/8, |B_1| = π.
pub fn h_q_ball(q: f64) -> f64 {
    let c = ball_constants(2).expect("d = 2 is valid");
    h_q(1.0, c.tau, c.omega, q).expect("ball inputs are positive")
}

/// Planar functional values for the ellipse with semi-axes a1 ≥ a2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarValue {
    pub q: f64,
    pub logcap: f64,
    pub torsion: f64,
    pub measure: f64,
    pub h_q: f64,
}

pub fn h_q_ellipse(a1: f64, a2: f64, q: f64) -> Result<PlanarValue> {
    let (a1, a2) = ordered_pair(a1, a2)?;
    let axes = AxisVector::new(vec![a1, a2])?;
    let logcap = 0.5 * (a1 + a2);
    let torsion = torsion_ellipsoid(&axes);
    let measure = PI * a1 * a2;
    // scale-free form: normalize a2 = 1 for the functional itself
    let r = a1 / a2;
    let h = h_q(
        0.5 * (r + 1.0),
        torsion_ellipsoid(&AxisVector::new(vec![r, 1.0])?),
        PI * r,
        q,
    )?;
    Ok(PlanarValue {
        q,
        logcap,
        torsion,
        measure,
        h_q: h,
    })
}

fn ordered_pair(a1: f64, a2: f64) -> Result<(f64, f64)> {
    if !(a1.is_finite() && a2.is_finite() && a1 > 0.0 && a2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ellipse semi-axes must be positive, got ({a1}, {a2})"
        )));
    }
    Ok((a1.max(a2), a1.min(a2)))
}
