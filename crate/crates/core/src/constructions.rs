//! Extremal families: the pancake union, ball-packed cubes, prolate and
//! oblate ellipsoids and the multi-collapsed ellipsoids, with their
//! closed-form bounds.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::bounds::q_critical;
use crate::error::{require_newtonian, Error, Result};
use crate::exact::{self, measure_exponent, QuadratureConfig};
use crate::geometry::{ball_constants, AxisVector, Body};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Exact,
    Lower,
    Upper,
    Asymptotic,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
            BoundKind::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Pancake,
    BallPacking,
    Prolate,
    Oblate,
    MultiCollapse { k: usize },
}

/// One member of a family.
///
/// `value` is the headline number and `bound_kind` says what it is. The
/// optional columns carry everything known at the parameter: the exact G_q
/// (ellipsoids only), a closed-form bound of kind `bound_side`, and the
/// small-parameter asymptote.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub family: Family,
    pub parameter: f64,
    pub d: usize,
    pub q: f64,
    #[serde(serialize_with = "body_doc")]
    pub body: Option<Body>,
    pub value: f64,
    pub bound_kind: BoundKind,
    pub exact: Option<f64>,
    pub bound: Option<f64>,
    pub bound_side: Option<BoundKind>,
    pub asymptote: Option<f64>,
    pub cap: Option<f64>,
    pub torsion: Option<f64>,
    pub measure: Option<f64>,
    pub note: Option<String>,
}

fn body_doc<S: Serializer>(b: &Option<Body>, s: S) -> std::result::Result<S::Ok, S::Error> {
    b.as_ref().map(Body::to_doc).serialize(s)
}

impl FamilyPoint {
    /// exact/asymptote when both exist, otherwise exact/bound.
    pub fn ratio(&self) -> Option<f64> {
        match (self.exact, self.asymptote, self.bound) {
            (Some(e), Some(a), _) => Some(e / a),
            (Some(e), None, Some(b)) => Some(e / b),
            _ => None,
        }
    }
}

fn check_eps(eps: f64, open_above: bool) -> Result<()> {
    let ok = eps > 0.0 && if open_above { eps < 1.0 } else { eps <= 1.0 };
    if !ok {
        let range = if open_above { "(0, 1)" } else { "(0, 1]" };
        return Err(Error::InvalidArgument(format!("parameter must lie in {range}, got {eps}")));
    }
    Ok(())
}

/// C(d) = 4π^{(d−1)/2} Γ((d−1)/2) / (Γ(d/2) Γ((d−2)/2)); C(3) = 8.
pub fn pancake_constant(d: usize) -> f64 {
    let df = d as f64;
    (4f64.ln() + 0.5 * (df - 1.0) * PI.ln() + ln_gamma(0.5 * (df - 1.0))
        - ln_gamma(0.5 * df)
        - ln_gamma(0.5 * (df - 2.0)))
    .exp()
}

/// L_ε = (2ω_d ε)^{1/(1−d)}: the pancake E(L_ε, …, L_ε, ε) has measure 1/2.
pub fn pancake_width(eps: f64, d: usize) -> Result<f64> {
    let omega = ball_constants(d)?.omega;
    Ok((2.0 * omega * eps).powf(1.0 / (1.0 - d as f64)))
}

/// Ω = B′ ⊔ E(L_ε, …, L_ε, ε) with |B′| = |E| = 1/2.
///
/// For q ≥ 0 the bound is C(d) T(B′)^q (2ω_d ε)^{(d−2)/(1−d)}, from
/// cap(Ω̄) ≥ cap(Ē) and T(Ω) ≥ T(B′). For q < 0 the torsion factor uses the
/// exact T(Ω)^q = (T(B′) + T(E))^q instead, since T(Ω) ≥ T(B′) no longer
/// bounds T(Ω)^q from below.
pub fn pancake(eps: f64, q: f64, d: usize) -> Result<FamilyPoint> {
    require_newtonian("the pancake construction", d)?;
    check_eps(eps, true)?;
    let c = ball_constants(d)?;
    let df = d as f64;
    let l = pancake_width(eps, d)?;
    let r = (1.0 / (2.0 * c.omega)).powf(1.0 / df);
    let mut axes = vec![l; d];
    axes[d - 1] = eps;
    let axes = AxisVector::new(axes)?;
    let t_ball = c.tau * r.powf(df + 2.0);
    let t_pancake = exact::torsion_ellipsoid(&axes);
    let torsion = if q >= 0.0 { t_ball } else { t_ball + t_pancake };
    let bound = pancake_constant(d) * torsion.powf(q) * (2.0 * c.omega * eps).powf((df - 2.0) / (1.0 - df));

    let mut center = vec![0.0; d];
    center[0] = l + 2.0 * r;
    let body = Body::union(vec![Body::ellipsoid(axes), Body::ball_at(center, r)?])?;
    Ok(FamilyPoint {
        family: Family::Pancake,
        parameter: eps,
        d,
        q,
        body: Some(body),
        value: bound,
        bound_kind: BoundKind::Lower,
        exact: None,
        bound: Some(bound),
        bound_side: Some(BoundKind::Lower),
        asymptote: None,
        cap: None,
        torsion: Some(t_ball + t_pancake),
        measure: Some(1.0),
        note: None,
    })
}

/// Largest N for which [`ball_packing`] materialises the N^d balls.
pub const PACKING_BODY_LIMIT: usize = 4096;

/// Q_N: N^d balls of radius 1/(2N) packed in the unit cube. The returned
/// upper bound is 2^{d−2} ω_d^{−(1+q+2(q−1)/d)} cap(Q̄) τ_d^q N^{−2q}.
pub fn ball_packing(n: usize, q: f64, d: usize, cap_cube: f64) -> Result<FamilyPoint> {
    require_newtonian("the ball packing", d)?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if !(cap_cube > 0.0 && cap_cube.is_finite()) {
        return Err(Error::InvalidArgument(format!("cube capacity must be positive, got {cap_cube}")));
    }
    let c = ball_constants(d)?;
    let df = d as f64;
    let nf = n as f64;
    let torsion = 2f64.powf(-df - 2.0) * c.tau / (nf * nf);
    let measure = c.omega / 2f64.powi(d as i32);
    let bound = (((df - 2.0) * 2f64.ln() - measure_exponent(q, d) * c.omega.ln()) + cap_cube.ln() + q * c.tau.ln()
        - 2.0 * q * nf.ln())
    .exp();

    let count = n.checked_pow(d as u32);
    let body = match count {
        Some(m) if m <= PACKING_BODY_LIMIT => {
            let r = 0.5 / nf;
            let mut parts = Vec::with_capacity(m);
            for idx in 0..m {
                let mut k = idx;
                let center = (0..d)
                    .map(|_| {
                        let i = k % n;
                        k /= n;
                        (i as f64 + 0.5) / nf
                    })
                    .collect();
                parts.push(Body::ball_at(center, r)?);
            }
            Some(Body::union(parts)?)
        }
        _ => None,
    };
    Ok(FamilyPoint {
        family: Family::BallPacking,
        parameter: nf,
        d,
        q,
        body,
        value: bound,
        bound_kind: BoundKind::Upper,
        exact: None,
        bound: Some(bound),
        bound_side: Some(BoundKind::Upper),
        asymptote: None,
        cap: Some(cap_cube),
        torsion: Some(torsion),
        measure: Some(measure),
        note: Some("capacity is that of the enclosing unit cube".into()),
    })
}

/// Small-ε asymptote of G_q(E(1, ε, …, ε)) from cap ≈ 4π/log(1/ε) (d = 3) or
/// cap ≈ 2π^{d/2}(d−3)ε^{d−3}/Γ(d/2) (d > 3), together with the exact
/// T = ω_d ε^{d+1} / ((d+2)(d−1+ε²)) and |E| = ω_d ε^{d−1}.
pub fn prolate_asymptote(eps: f64, q: f64, d: usize) -> Result<f64> {
    require_newtonian("the prolate asymptote", d)?;
    check_eps(eps, true)?;
    let c = ball_constants(d)?;
    let df = d as f64;
    let ln_cap = if d == 3 {
        (4.0 * PI).ln() - (-eps.ln()).ln()
    } else {
        (2.0 * (df - 3.0)).ln() + 0.5 * df * PI.ln() - ln_gamma(0.5 * df) + (df - 3.0) * eps.ln()
    };
    let ln_t = c.omega.ln() - (df + 2.0).ln() + (df + 1.0) * eps.ln() - (df - 1.0 + eps * eps).ln();
    let ln_m = c.omega.ln() + (df - 1.0) * eps.ln();
    Ok((ln_cap + q * ln_t - measure_exponent(q, d) * ln_m).exp())
}

fn collapsed_axes(d: usize, k: usize, eps: f64) -> Result<AxisVector> {
    let mut a = vec![1.0; d];
    for x in a.iter_mut().skip(d - k) {
        *x = eps;
    }
    AxisVector::new(a)
}

fn ellipsoid_point(
    family: Family,
    parameter: f64,
    axes: AxisVector,
    q: f64,
    cfg: &QuadratureConfig,
) -> Result<FamilyPoint> {
    let v = exact::g_q_ellipsoid(&axes, q, cfg)?;
    Ok(FamilyPoint {
        family,
        parameter,
        d: axes.dim(),
        q,
        body: Some(Body::ellipsoid(axes)),
        value: v.g_q,
        bound_kind: BoundKind::Exact,
        exact: Some(v.g_q),
        bound: None,
        bound_side: None,
        asymptote: None,
        cap: Some(v.cap),
        torsion: Some(v.torsion),
        measure: Some(v.measure),
        note: None,
    })
}

/// E(1, ε, …, ε): exact G_q plus its small-ε asymptote (ε < 1).
pub fn prolate_family(eps: f64, q: f64, d: usize, cfg: &QuadratureConfig) -> Result<FamilyPoint> {
    require_newtonian("the prolate family", d)?;
    check_eps(eps, false)?;
    let mut p = ellipsoid_point(Family::Prolate, eps, collapsed_axes(d, d - 1, eps)?, q, cfg)?;
    if eps < 1.0 {
        p.asymptote = Some(prolate_asymptote(eps, q, d)?);
    }
    Ok(p)
}

/// Whether the oblate upper bound tends to 0 as a_d ↓ 0, i.e. q > q_c.
pub fn oblate_bound_vanishes(q: f64, d: usize) -> bool {
    q > q_critical(d)
}

/// E(a_1, …, a_1, a_d) with a_1^{d−1} a_d = 1: exact G_q and the upper bound
/// κ_d a_d^{−(d−2)/(d−1)+2q} / (ω_d^{1+2(q−1)/d} (d+2)^q) for q ≥ 0, or
/// κ_d a_1^{d−2} T^q / ω_d^{1+q+2(q−1)/d} (exact T) for q < 0.
pub fn oblate_family(a_d: f64, q: f64, d: usize, cfg: &QuadratureConfig) -> Result<FamilyPoint> {
    require_newtonian("the oblate family", d)?;
    check_eps(a_d, false)?;
    let c = ball_constants(d)?;
    let kappa = c.kappa()?;
    let df = d as f64;
    let a1 = a_d.powf(-1.0 / (df - 1.0));
    let mut a = vec![a1; d];
    a[d - 1] = a_d;
    let axes = AxisVector::new(a)?;
    let bound = if q >= 0.0 {
        (kappa.ln() - (1.0 + 2.0 * (q - 1.0) / df) * c.omega.ln() - q * (df + 2.0).ln()
            + (2.0 * q - (df - 2.0) / (df - 1.0)) * a_d.ln())
        .exp()
    } else {
        let t = exact::torsion_ellipsoid(&axes);
        (kappa.ln() + (df - 2.0) * a1.ln() + q * t.ln() - measure_exponent(q, d) * c.omega.ln()).exp()
    };
    let mut p = ellipsoid_point(Family::Oblate, a_d, axes, q, cfg)?;
    p.bound = Some(bound);
    p.bound_side = Some(BoundKind::Upper);
    p.note = Some(if oblate_bound_vanishes(q, d) {
        "upper bound tends to 0 as a_d -> 0 (q above critical)".into()
    } else {
        "upper bound does not tend to 0 (q at or below critical)".into()
    });
    Ok(p)
}

/// E(1, …, 1, ε, …, ε) with `k` collapsed axes: exact G_1.
pub fn multi_collapse_family(k: usize, eps: f64, d: usize, cfg: &QuadratureConfig) -> Result<FamilyPoint> {
    require_newtonian("the collapsed family", d)?;
    if k == 0 || k >= d {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= d-1, got k = {k}, d = {d}")));
    }
    check_eps(eps, false)?;
    ellipsoid_point(Family::MultiCollapse { k }, eps, collapsed_axes(d, k, eps)?, 1.0, cfg)
}

/// Parameters of a sweep plus the family-specific inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub grid: Vec<f64>,
    pub q: f64,
    pub d: usize,
    /// Capacity of the unit cube, used by the ball packing.
    pub cap_cube: f64,
}

/// Evaluates the family on every grid value in parallel; output is sorted
/// by decreasing parameter for the ε-families and increasing N for the
/// packing. Ellipsoid sweeps stop at the first parameter whose capacity
/// integral cannot be resolved to the configured tolerance.
pub fn sweep(spec: &SweepSpec, cfg: &QuadratureConfig) -> Result<Vec<FamilyPoint>> {
    let mut grid = spec.grid.clone();
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("grid values must be finite".into()));
    }
    match spec.family {
        Family::BallPacking => grid.sort_by(f64::total_cmp),
        _ => grid.sort_by(|a, b| b.total_cmp(a)),
    }
    grid.dedup();
    let results: Vec<Result<FamilyPoint>> = grid
        .par_iter()
        .map(|&x| match spec.family {
            Family::Pancake => pancake(x, spec.q, spec.d),
            Family::BallPacking => {
                if x < 1.0 || x.fract() != 0.0 {
                    return Err(Error::InvalidArgument(format!("N must be a positive integer, got {x}")));
                }
                ball_packing(x as usize, spec.q, spec.d, spec.cap_cube)
            }
            Family::Prolate => prolate_family(x, spec.q, spec.d, cfg),
            Family::Oblate => oblate_family(x, spec.q, spec.d, cfg),
            Family::MultiCollapse { k } => multi_collapse_family(k, x, spec.d, cfg),
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(p) => out.push(p),
            Err(Error::ToleranceNotMet { .. }) if !out.is_empty() => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Sweep output as CSV with columns
/// `parameter,exact,bound,bound_kind,asymptote,ratio`.
pub fn to_csv(points: &[FamilyPoint]) -> String {
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
    let mut s = String::from("parameter,exact,bound,bound_kind,asymptote,ratio\n");
    for p in points {
        let kind = p.bound_side.unwrap_or(p.bound_kind).as_str();
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(Some(p.parameter)),
            fmt(p.exact),
            fmt(p.bound),
            kind,
            fmt(p.asymptote),
            fmt(p.ratio())
        ));
    }
    s
}

/// Monte Carlo capacity of the closed unit cube shipped with the library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeCapacity {
    pub value: f64,
    pub std_error: f64,
    pub walkers: usize,
    pub seed: u64,
    pub shell_eps: f64,
    pub method: String,
}

const CUBE_CAPACITY_JSON: &str = include_str!("../data/unit_cube_capacity.json");

pub fn unit_cube_capacity() -> CubeCapacity {
    serde_json::from_str(CUBE_CAPACITY_JSON).expect("bundled cube capacity file is valid")
}
