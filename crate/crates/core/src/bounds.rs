//! Theorem constants, elementary inequalities and certified G_q intervals.

use serde::{Serialize, Serializer};

use crate::error::{require_newtonian, Error, Result};
use crate::exact::{self, measure_exponent, QuadratureConfig};
use crate::geometry::{AxisVector, Body};
use crate::john;

/// Positive number held as its natural logarithm, so constants such as
/// `2·3^8·e^{2187}` stay representable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogNum {
    ln: f64,
}

impl LogNum {
    pub fn from_ln(ln: f64) -> Self {
        LogNum { ln }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("expected a positive finite value, got {v}")));
        }
        Ok(LogNum { ln: v.ln() })
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// The value as a double; `inf` or `0` when out of range.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    pub fn is_representable(&self) -> bool {
        let v = self.value();
        v.is_finite() && v > f64::MIN_POSITIVE
    }

    pub fn mul(self, other: LogNum) -> LogNum {
        LogNum { ln: self.ln + other.ln }
    }

    /// Decimal rendering with `sig` significant digits, or `log10 = …` when
    /// the value does not fit in a double.
    pub fn render(&self, sig: usize) -> String {
        if self.is_representable() {
            format_sig(self.value(), sig)
        } else {
            format!("log10 = {}", format_sig(self.log10(), sig))
        }
    }
}

impl Serialize for LogNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LogNum", 2)?;
        st.serialize_field("value", &self.is_representable().then(|| self.value()))?;
        st.serialize_field("log10", &self.log10())?;
        st.end()
    }
}

/// Formats `x` with `sig` significant digits, switching to exponent form for
/// very large or small magnitudes.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{:.*e}", sig.saturating_sub(1), x);
        return trim_mantissa(&s);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn trim_mantissa(s: &str) -> String {
    match s.split_once('e') {
        Some((m, e)) if m.contains('.') => {
            format!("{}e{}", m.trim_end_matches('0').trim_end_matches('.'), e)
        }
        _ => s.to_string(),
    }
}

/// A theorem constant, or a marker that the requested exponent lies outside
/// the theorem's range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TheoremConstant {
    Value(LogNum),
    NotApplicable { reason: String },
}

impl TheoremConstant {
    fn when(ok: bool, reason: &str, ln: impl FnOnce() -> f64) -> Self {
        if ok {
            TheoremConstant::Value(LogNum::from_ln(ln()))
        } else {
            TheoremConstant::NotApplicable { reason: reason.to_string() }
        }
    }

    pub fn log_value(&self) -> Option<LogNum> {
        match self {
            TheoremConstant::Value(v) => Some(*v),
            TheoremConstant::NotApplicable { .. } => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.log_value().map(|v| v.value())
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, TheoremConstant::Value(_))
    }

    pub fn render(&self, sig: usize) -> String {
        match self {
            TheoremConstant::Value(v) => v.render(sig),
            TheoremConstant::NotApplicable { reason } => format!("n/a ({reason})"),
        }
    }
}

/// Constants of the convex-body theorems in dimension `d` at exponent `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremConstants {
    pub d: usize,
    pub q: f64,
    /// Coefficient of G_q(B_1) bounding the convex supremum (q ≥ 1).
    pub thm2_sup_coeff: TheoremConstant,
    /// diam/inradius bound for a maximiser (q > 1).
    pub thm2_diam_ratio: TheoremConstant,
    /// diam/inradius bound for a maximiser at d = 3, q = 1: 2·3^8·e^{3^7}.
    pub thm2_d3q1_diam_ratio: TheoremConstant,
    /// Coefficient of G_q(B_1) bounding the convex infimum (0 < q ≤ q_c).
    pub thm3_inf_coeff: TheoremConstant,
    /// diam/inradius bound for a minimiser (0 < q < q_c).
    pub thm3_diam_ratio: TheoremConstant,
    /// q_c = (d−2)/(2(d−1)).
    pub q_critical: f64,
    pub g_q_ball: f64,
}

pub fn q_critical(d: usize) -> f64 {
    (d as f64 - 2.0) / (2.0 * (d as f64 - 1.0))
}

/// ln of 2^{(d+2)/2} d^{3q−2+d(q+1)} / (d−2).
fn ln_thm2_coeff(d: f64, q: f64) -> f64 {
    0.5 * (d + 2.0) * 2f64.ln() + (3.0 * q - 2.0 + d * (q + 1.0)) * d.ln() - (d - 2.0).ln()
}

/// ln of 2 d^{d+(d+2)q}.
fn ln_thm3_base(d: f64, q: f64) -> f64 {
    2f64.ln() + (d + (d + 2.0) * q) * d.ln()
}

pub fn theorem_constants(d: usize, q: f64) -> Result<TheoremConstants> {
    require_newtonian("theorem constants", d)?;
    if !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be finite, got {q}")));
    }
    let df = d as f64;
    let qc = q_critical(d);
    Ok(TheoremConstants {
        d,
        q,
        thm2_sup_coeff: TheoremConstant::when(q >= 1.0, "requires q >= 1", || ln_thm2_coeff(df, q)),
        thm2_diam_ratio: TheoremConstant::when(q > 1.0, "requires q > 1", || {
            (2.0 * df).ln() + df / (2.0 * (q - 1.0)) * ln_thm2_coeff(df, q)
        }),
        thm2_d3q1_diam_ratio: TheoremConstant::when(d == 3 && q == 1.0, "requires d = 3 and q = 1", || {
            2f64.ln() + 8.0 * 3f64.ln() + 2187.0
        }),
        thm3_inf_coeff: TheoremConstant::when(q > 0.0 && q <= qc, "requires 0 < q <= q_critical", || {
            -ln_thm3_base(df, q)
        }),
        thm3_diam_ratio: TheoremConstant::when(q > 0.0 && q < qc, "requires 0 < q < q_critical", || {
            (2.0 * df).ln() + df * (df - 1.0) / (df - 2.0 - 2.0 * q * (df - 1.0)) * ln_thm3_base(df, q)
        }),
        q_critical: qc,
        g_q_ball: exact::g_q_ball(d, q)?,
    })
}

/// Constants of the planar theorem at exponent `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem4Constants {
    pub q: f64,
    pub h_q_ball: f64,
    /// 2^{1+5q} H_q(B_1), bounding the supremum (q ≥ 1/2).
    pub sup_bound: TheoremConstant,
    /// 2^{14q}/(2q−1), diam/inradius of a maximiser (q > 1/2).
    pub max_diam_ratio: TheoremConstant,
    /// 2^{−2(1+2q)} H_q(B_1), bounding the infimum (q ≤ 1/2).
    pub inf_bound: TheoremConstant,
    /// 2^{2(3+2q)/(1−2q)}, diam/inradius of a minimiser (q < 1/2).
    pub min_diam_ratio: TheoremConstant,
}

pub fn theorem4_constants(q: f64) -> Result<Theorem4Constants> {
    if !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be finite, got {q}")));
    }
    let h = exact::h_q_ball(q);
    let ln2 = 2f64.ln();
    Ok(Theorem4Constants {
        q,
        h_q_ball: h,
        sup_bound: TheoremConstant::when(q >= 0.5, "requires q >= 1/2", || (1.0 + 5.0 * q) * ln2 + h.ln()),
        max_diam_ratio: TheoremConstant::when(q > 0.5, "requires q > 1/2", || {
            14.0 * q * ln2 - (2.0 * q - 1.0).ln()
        }),
        inf_bound: TheoremConstant::when(q <= 0.5, "requires q <= 1/2", || -2.0 * (1.0 + 2.0 * q) * ln2 + h.ln()),
        min_diam_ratio: TheoremConstant::when(q < 0.5, "requires q < 1/2", || {
            2.0 * (3.0 + 2.0 * q) / (1.0 - 2.0 * q) * ln2
        }),
    })
}

/// Lower and upper envelopes for H_q of a planar convex body whose John
/// ellipse has semi-axes `a1 ≥ a2`: 2^{−2(1+2q)} H_q(B_1) (a2/a1)^{q−1/2}
/// and 2^{1+5q} H_q(B_1) (a2/a1)^{q−1/2}.
pub fn h_q_ellipse_bounds(a1: f64, a2: f64, q: f64) -> Result<(f64, f64)> {
    if !(a1.is_finite() && a2.is_finite() && a1 >= a2 && a2 > 0.0) {
        return Err(Error::InvalidArgument(format!("need a1 >= a2 > 0, got ({a1}, {a2})")));
    }
    let h = exact::h_q_ball(q).ln();
    let shape = (q - 0.5) * (a2 / a1).ln();
    let ln2 = 2f64.ln();
    Ok((
        (-2.0 * (1.0 + 2.0 * q) * ln2 + h + shape).exp(),
        ((1.0 + 5.0 * q) * ln2 + h + shape).exp(),
    ))
}

/// 2^{−d/2} (Π a_i)^{−1} a_d² ≤ 𝔢(a).
pub fn efrak_lower(a: &AxisVector) -> Result<f64> {
    let d = a.dim();
    require_newtonian("capacity integral bounds", d)?;
    Ok((-0.5 * d as f64 * 2f64.ln() - a.ln_product() + 2.0 * a.smallest().ln()).exp())
}

/// 𝔢(a) ≤ 4 (Π_{i≤d−2} a_i^{−1}) log(e a_{d−2}/a_{d−1}).
pub fn efrak_upper(a: &AxisVector) -> Result<f64> {
    let d = a.dim();
    require_newtonian("capacity integral bounds", d)?;
    let s = a.as_slice();
    let ln_prod: f64 = s[..d - 2].iter().map(|x| x.ln()).sum();
    let log_term = 1.0 + (s[d - 3] / s[d - 2]).ln();
    Ok(4.0 * (-ln_prod).exp() * log_term)
}

/// Outcome of [`elementary_log_inequalities`]: both sides of each inequality
/// and whether it holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogInequalities {
    /// (1−x)^{−1} log(1/x) versus log(e/x).
    pub first: (f64, f64, bool),
    /// x^{1/(d−1)} log(e/x) versus d − 1.
    pub second: (f64, f64, bool),
}

pub fn elementary_log_inequalities(x: f64, d: usize) -> Result<LogInequalities> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("x must lie in (0, 1), got {x}")));
    }
    require_newtonian("the elementary inequalities", d)?;
    let l1 = -x.ln() / (1.0 - x);
    let r1 = 1.0 - x.ln();
    let l2 = x.powf(1.0 / (d as f64 - 1.0)) * (1.0 - x.ln());
    let r2 = d as f64 - 1.0;
    Ok(LogInequalities {
        first: (l1, r1, l1 <= r1),
        second: (l2, r2, l2 <= r2),
    })
}

/// Certified interval for G_q of a convex body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sandwich {
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
    pub measure: f64,
    pub inner_axes: AxisVector,
    pub outer_axes: AxisVector,
}

impl Sandwich {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// [lower, upper] for G_q(body) from the enclosing-ellipsoid sandwich
/// E_in ⊆ body ⊆ E_out: capacity and torsion are monotone under inclusion
/// and the measure is exact. Ellipsoids and balls give a zero-width interval.
pub fn sandwich_g_q(body: &Body, q: f64, cfg: &QuadratureConfig) -> Result<Sandwich> {
    body.require_newtonian("a capacity sandwich")?;
    let d = body.dim();
    let (inner, outer) = match body {
        Body::Ball(b) => {
            let a = AxisVector::uniform(d, b.radius)?;
            (a.clone(), a)
        }
        Body::Ellipsoid(e) => (e.axes.clone(), e.axes.clone()),
        Body::Polytope(p) => john::sandwich_axes(p.vertices(), john::DEFAULT_TOL)?,
        Body::Union(_) => return Err(Error::UnsupportedBody("a capacity sandwich of a non-convex union")),
    };
    let measure = body.volume()?;
    if inner == outer {
        let v = exact::g_q_ellipsoid(&outer, q, cfg)?.g_q;
        return Ok(Sandwich {
            q,
            lower: v,
            upper: v,
            measure,
            inner_axes: inner,
            outer_axes: outer,
        });
    }
    let cap_in = exact::cap_ellipsoid(&inner, cfg)?;
    let cap_out = exact::cap_ellipsoid(&outer, cfg)?;
    let t_in = exact::torsion_ellipsoid(&inner);
    let t_out = exact::torsion_ellipsoid(&outer);
    let (t_lo, t_hi) = if q >= 0.0 { (t_in, t_out) } else { (t_out, t_in) };
    let p = measure_exponent(q, d);
    let assemble = |c: f64, t: f64| (c.ln() + q * t.ln() - p * measure.ln()).exp();
    Ok(Sandwich {
        q,
        lower: assemble(cap_in, t_lo),
        upper: assemble(cap_out, t_hi),
        measure,
        inner_axes: inner,
        outer_axes: outer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn theorem_constant_examples() {
        let c = theorem_constants(3, 2.0).unwrap();
        let want = 2f64.powf(2.5) * 3f64.powi(13);
        assert!((c.thm2_sup_coeff.value().unwrap() - want).abs() / want < 1e-13);
        assert!((want - 9.018e6).abs() < 1e3);
        assert_eq!(c.q_critical, 0.25);
        // q = 2 is outside the minimisation theorem
        assert!(!c.thm3_inf_coeff.is_applicable());
        assert!(!c.thm2_d3q1_diam_ratio.is_applicable());
        let dr = c.thm2_diam_ratio.value().unwrap();
        assert!((dr - 6.0 * want.powf(1.5)).abs() / dr < 1e-12);

        let c = theorem_constants(3, 0.25).unwrap();
        let v = c.thm3_inf_coeff.value().unwrap();
        assert!((v - 1.0 / (2.0 * 3f64.powf(4.25))).abs() < 1e-16);
        // the boundary exponent admits the bound but not the minimiser estimate
        assert!(!c.thm3_diam_ratio.is_applicable());
        assert!(!c.thm2_sup_coeff.is_applicable());
    }

    #[test]
    fn critical_exponent() {
        assert_eq!(q_critical(3), 0.25);
        assert!((q_critical(4) - 1.0 / 3.0).abs() < 1e-16);
        assert!(theorem_constants(2, 1.0).is_err());
    }

    #[test]
    fn huge_constant_is_rendered_in_log_form() {
        let c = theorem_constants(3, 1.0).unwrap();
        let v = c.thm2_d3q1_diam_ratio.log_value().unwrap();
        let want = (2.0 * 6561f64).log10() + 2187.0 / std::f64::consts::LN_10;
        assert!((v.log10() - want).abs() < 1e-10);
        assert!(!v.is_representable());
        assert!(v.render(12).starts_with("log10 = 953.9"), "{}", v.render(12));
        assert_eq!(c.thm2_sup_coeff.render(12), format_sig(2f64.powf(2.5) * 3f64.powi(7), 12));
        assert!(c.thm2_diam_ratio.render(12).starts_with("n/a"));
    }

    #[test]
    fn theorem4_examples() {
        let c = theorem4_constants(1.0).unwrap();
        let want = 64.0 / (8.0 * PI.powf(1.5));
        assert!((c.sup_bound.value().unwrap() - want).abs() < 1e-13);
        assert!((want - 1.4366).abs() < 1e-4);
        assert!((c.max_diam_ratio.value().unwrap() - 16384.0).abs() < 1e-9);
        assert!(!c.inf_bound.is_applicable());
        let c = theorem4_constants(0.0).unwrap();
        assert!((c.inf_bound.value().unwrap() - 0.25 / PI.sqrt()).abs() < 1e-15);
        assert!((c.min_diam_ratio.value().unwrap() - 64.0).abs() < 1e-12);
        let c = theorem4_constants(0.5).unwrap();
        assert!(c.sup_bound.is_applicable() && c.inf_bound.is_applicable());
        assert!(!c.max_diam_ratio.is_applicable() && !c.min_diam_ratio.is_applicable());
    }

    #[test]
    fn efrak_bound_examples() {
        let ball = AxisVector::uniform(3, 1.0).unwrap();
        assert!((efrak_lower(&ball).unwrap() - 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((efrak_upper(&ball).unwrap() - 4.0).abs() < 1e-15);
        let a = AxisVector::new(vec![2.0, 1.0, 1.0]).unwrap();
        assert!((efrak_lower(&a).unwrap() - 2f64.powf(-1.5) / 2.0).abs() < 1e-15);
        assert!((efrak_upper(&a).unwrap() - 2.0 * (2.0 * std::f64::consts::E).ln()).abs() < 1e-14);
        let e = exact::efrak(&a, &QuadratureConfig::default()).unwrap();
        assert!(efrak_lower(&a).unwrap() < e && e < efrak_upper(&a).unwrap());
        let t = 3.7;
        let s = a.scaled(t);
        assert!((efrak_lower(&s).unwrap() / efrak_lower(&a).unwrap() - 1.0 / t).abs() < 1e-14);
        assert!((efrak_upper(&s).unwrap() / efrak_upper(&a).unwrap() - 1.0 / t).abs() < 1e-14);
    }

    #[test]
    fn log_inequality_examples() {
        let r = elementary_log_inequalities(0.5, 3).unwrap();
        assert!((r.first.0 - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((r.first.1 - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!(r.first.2);
        let r = elementary_log_inequalities(1.0 - 1e-9, 3).unwrap();
        assert!((r.first.0 - 1.0).abs() < 1e-6);
        let x = (-2.0f64).exp();
        let r = elementary_log_inequalities(x, 3).unwrap();
        assert!((r.second.0 - 3.0 / std::f64::consts::E).abs() < 1e-14);
        assert!(r.second.2);
        assert!(elementary_log_inequalities(1.0, 3).is_err());
    }

    #[test]
    fn planar_envelopes() {
        let (lo, hi) = h_q_ellipse_bounds(1.0, 1.0, 0.5).unwrap();
        let h = exact::h_q_ball(0.5);
        assert!((lo - h / 16.0).abs() < 1e-16 && (hi - h * 2f64.powf(3.5)).abs() < 1e-14);
        assert!(lo < h && h < hi);
        let (lo_small, _) = h_q_ellipse_bounds(1e6, 1.0, 0.2).unwrap();
        let (lo_big, _) = h_q_ellipse_bounds(10.0, 1.0, 0.2).unwrap();
        assert!(lo_small > lo_big);
        let (_, hi_small) = h_q_ellipse_bounds(1e6, 1.0, 1.0).unwrap();
        assert!(hi_small < 1e-2);
        assert!(h_q_ellipse_bounds(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let cfg = QuadratureConfig::default();
        let e = Body::ellipsoid(AxisVector::uniform(3, 1.0).unwrap());
        let s = sandwich_g_q(&e, 1.0, &cfg).unwrap();
        assert!((s.lower - 0.2).abs() < 1e-14 && s.lower == s.upper);

        let cube = Body::cube(3, 1.0).unwrap();
        for q in [-1.0, 0.0, 1.0, 2.0] {
            let s = sandwich_g_q(&cube, q, &cfg).unwrap();
            assert!(s.lower < s.upper);
            let allowed = 3f64.powi(1) * 3f64.powf(5.0 * q.abs()) * (1.0 + 1e-6);
            assert!(s.upper / s.lower <= allowed, "q={q}: {}", s.upper / s.lower);
        }
        let u = Body::union(vec![
            Body::ball(3, 1.0).unwrap(),
            Body::ball_at(vec![3.0, 0.0, 0.0], 1.0).unwrap(),
        ])
        .unwrap();
        assert!(sandwich_g_q(&u, 1.0, &cfg).is_err());
    }
}
