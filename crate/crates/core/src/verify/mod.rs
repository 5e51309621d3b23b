//! Self-checks against closed forms, independent oracles and the theorem
//! inequalities. Each criterion reports a deterministic detail line; runtimes
//! are measured but never serialized.

pub mod oracles;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, theorem4_constants, theorem_constants};
use crate::constructions;
use crate::error::{Error, Result};
use crate::exact::{self, QuadratureConfig};
use crate::geometry::{ball_constants, cube_vertices, AxisVector, Body, Polytope};
use crate::john;
use crate::montecarlo::{self, uniform_direction, uniform_in_unit_ball, WosConfig};
use crate::optimize::{self, Direction, OptimizeConfig};

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Identifiers of the criteria run by [`run_criterion`].
pub const CRITERIA: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn timed(id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> CriterionResult {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let slow = elapsed > limit;
    CriterionResult {
        id,
        title: title.to_string(),
        passed: passed && !slow,
        detail: if slow {
            format!("{detail}; exceeded the {} s budget", limit.as_secs())
        } else {
            detail
        },
        elapsed,
    }
}

fn rng_for(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(u64::from(id) + 1)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Semi-axes log-uniform in `[lo, hi]`.
pub fn random_axes<R: Rng + ?Sized>(rng: &mut R, d: usize, lo: f64, hi: f64) -> AxisVector {
    let (a, b) = (lo.ln(), hi.ln());
    AxisVector::new((0..d).map(|_| rng.random_range(a..b).exp()).collect()).expect("positive axes")
}

/// Hull of m ∈ [d+2, 40] points uniform in a randomly rotated ellipsoid
/// with aspect ratio at most 20.
pub fn random_polytope<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<Polytope> {
    let m = rng.random_range(d + 2..=40);
    let ratio = rng.random_range(1.0..20.0f64);
    let axes: Vec<f64> = (0..d).map(|k| ratio.powf(-(k as f64) / (d - 1) as f64)).collect();
    // random orthonormal frame by Gram–Schmidt
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d);
    while frame.len() < d {
        let mut v = uniform_direction(rng, d);
        for u in &frame {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            frame.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let points = (0..m)
        .map(|_| {
            let z = uniform_in_unit_ball(rng, d);
            let mut x = shift.clone();
            for k in 0..d {
                for i in 0..d {
                    x[i] += axes[k] * z[k] * frame[k][i];
                }
            }
            x
        })
        .collect();
    Polytope::new(points)
}

fn ball_identities() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let (mut e_err, mut c_err, mut t_ok) = (0f64, 0f64, true);
    for d in 3..=10 {
        let ones = AxisVector::uniform(d, 1.0)?;
        let c = ball_constants(d)?;
        e_err = e_err.max(rel(exact::efrak(&ones, &cfg)?, 2.0 / (d as f64 - 2.0)));
        c_err = c_err.max(rel(exact::cap_ellipsoid(&ones, &cfg)?, c.kappa()?));
        t_ok &= exact::torsion_ellipsoid(&ones) == c.tau;
    }
    outcome(
        e_err <= 1e-10 && c_err <= 1e-9 && t_ok,
        format!("d=3..10: max rel err efrak {e_err:.3e}, capacity {c_err:.3e}; torsion equals tau: {t_ok}"),
    )
}

fn carlson_oracle(seed: u64) -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let mut rng = rng_for(seed, 2);
    let mut worst = 0f64;
    for _ in 0..100 {
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..10.0)).collect();
        let axes = AxisVector::new(a)?;
        let s = axes.as_slice();
        let want = oracles::efrak_d3([s[0], s[1], s[2]]);
        worst = worst.max(rel(exact::efrak(&axes, &cfg)?, want));
    }
    outcome(worst <= 1e-10, format!("100 axis vectors: max rel err {worst:.3e}"))
}

fn prolate_closed_form() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let mut worst = 0f64;
    for a in [1.5, 2.0, 5.0, 50.0] {
        let cap = exact::cap_ellipsoid(&AxisVector::new(vec![a, 1.0, 1.0])?, &cfg)?;
        worst = worst.max(rel(cap, oracles::prolate_capacity(a, 1.0)));
    }
    outcome(worst <= 1e-9, format!("a in {{1.5, 2, 5, 50}}: max rel err {worst:.3e}"))
}

fn inequality_suite(seed: u64) -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let mut rng = rng_for(seed, 4);
    let samples: Vec<AxisVector> = (0..1000).map(|i| random_axes(&mut rng, 3 + i % 3, 0.1, 10.0)).collect();
    let below_one = [0.0, -0.5, -2.0];
    let sup_qs = [1.0, 1.5, 2.0];
    let inf_qs = [0.1, 0.25];
    let violations: Vec<Vec<&'static str>> = samples
        .par_iter()
        .map(|a| -> Result<Vec<&'static str>> {
            let d = a.dim();
            let mut v = Vec::new();
            if exact::saint_venant_ratio(a) > 1.0 + 1e-12 {
                v.push("saint-venant");
            }
            let e = exact::efrak(a, &cfg)?;
            if !(bounds::efrak_lower(a)? <= e && e <= bounds::efrak_upper(a)?) {
                v.push("efrak bounds");
            }
            let cap = exact::cap_ellipsoid(a, &cfg)?;
            let t = exact::torsion_ellipsoid(a);
            let m = a.product() * ball_constants(d)?.omega;
            if exact::isocapacitary_ratio(a, &cfg)? < 1.0 - 1e-12 {
                v.push("isocapacitary");
            }
            let g = |q: f64| exact::g_q(cap, t, m, q, d).map(|f| f.g_q);
            for q in below_one {
                if g(q)? < exact::g_q_ball(d, q)? * (1.0 - 1e-10) {
                    v.push("ball minimises G_q, q <= 0");
                }
            }
            for q in sup_qs {
                let c = theorem_constants(d, q)?;
                let coeff = c.thm2_sup_coeff.log_value().ok_or_else(|| Error::NotApplicable("sup".into()))?;
                if g(q)?.ln() > coeff.ln() + c.g_q_ball.ln() {
                    v.push("supremum bound");
                }
            }
            for q in inf_qs {
                let c = theorem_constants(d, q)?;
                let coeff = c.thm3_inf_coeff.log_value().ok_or_else(|| Error::NotApplicable("inf".into()))?;
                if g(q)?.ln() < coeff.ln() + c.g_q_ball.ln() {
                    v.push("infimum bound");
                }
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let total: usize = violations.iter().map(Vec::len).sum();
    let first = violations.iter().flatten().next().copied().unwrap_or("none");
    outcome(total == 0, format!("1000 ellipsoids, d in {{3,4,5}}: {total} violations (first: {first})"))
}

fn regime_directions() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let ball = exact::g_q_ball(3, 0.5)?;
    let grid: Vec<f64> = (2..=12).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect();
    let prolate: Vec<constructions::FamilyPoint> =
        grid.iter().map(|&e| constructions::prolate_family(e, 0.5, 3, &cfg)).collect::<Result<_>>()?;
    let up = prolate.windows(2).all(|w| w[1].value > w[0].value);
    let ratio = prolate.last().and_then(|p| p.ratio()).unwrap_or(f64::NAN);
    let oblate: Vec<constructions::FamilyPoint> =
        grid.iter().map(|&e| constructions::oblate_family(e, 0.5, 3, &cfg)).collect::<Result<_>>()?;
    let down = oblate.windows(2).all(|w| w[1].value < w[0].value);
    let oblate_last = oblate.last().map(|p| p.value / ball).unwrap_or(f64::NAN);
    let pancake = constructions::pancake(1e-4, 1.0, 3)?;
    let pancake_ratio = pancake.value / exact::g_q_ball(3, 1.0)?;
    let cap_cube = constructions::unit_cube_capacity().value;
    let mut packing_err = 0f64;
    for q in [0.5, 1.0, 2.0] {
        for n in [1usize, 2, 5, 16] {
            let a = constructions::ball_packing(n, q, 3, cap_cube)?.value;
            let b = constructions::ball_packing(2 * n, q, 3, cap_cube)?.value;
            packing_err = packing_err.max(rel(b / a, 2f64.powf(-2.0 * q)));
        }
    }
    outcome(
        up && (ratio - 1.0).abs() <= 0.1 && down && oblate_last < 0.01 && pancake_ratio > 10.0 && packing_err <= 1e-12,
        format!(
            "prolate increasing: {up}, exact/asymptote at 1e-6 = {ratio:.6}; oblate decreasing: {down}, final/ball = {oblate_last:.3e}; \
             pancake/ball at 1e-4 = {pancake_ratio:.4}; packing halving rel err {packing_err:.3e}"
        ),
    )
}

fn monte_carlo_oracles(seed: u64) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| {
        let cfg = WosConfig {
            walkers: 100_000,
            shell_eps: Some(1e-3),
            seed,
            ..WosConfig::default()
        };
        let mut slowest = Duration::ZERO;
        let mut clock = |f: &dyn Fn() -> Result<montecarlo::Estimate>| {
            let start = Instant::now();
            let r = f();
            slowest = slowest.max(start.elapsed());
            r
        };
        let ball = Body::ball(3, 1.0)?;
        let prolate = Body::ellipsoid(AxisVector::new(vec![2.0, 1.0, 1.0])?);
        let torsion = clock(&|| montecarlo::wos_torsion(&ball, &cfg))?;
        // launched from the unit sphere every walk starts on the ball; a
        // wider launch sphere makes the hit probability non-trivial
        let cap = clock(&|| montecarlo::wos_capacity(&ball, &WosConfig { launch_factor: 2.0, ..cfg }))?;
        let cap_p = clock(&|| montecarlo::wos_capacity(&prolate, &cfg))?;
        let fast = slowest <= Duration::from_secs(30);
        let et = torsion.relative_error(4.0 * PI / 45.0);
        let ec = cap.relative_error(4.0 * PI);
        let ep = cap_p.relative_error(oracles::prolate_capacity(2.0, 1.0));
        outcome(
            et <= 0.02 && ec <= 0.02 && ep <= 0.03 && fast,
            format!(
                "ball torsion {:.6} ± {:.2e} (rel err {et:.3e}); ball capacity {:.6} ± {:.2e} (rel err {ec:.3e}); \
                 E(2,1,1) capacity {:.6} ± {:.2e} (rel err {ep:.3e}); every run within 30 s: {fast}",
                torsion.value, torsion.std_error, cap.value, cap.std_error, cap_p.value, cap_p.std_error
            ),
        )
    })
}

fn mvee_checks(seed: u64) -> Result<Outcome> {
    let r = john::mvee(&cube_vertices(3, 1.0), john::DEFAULT_TOL)?;
    let cube_err = r.semi_axes.as_slice().iter().map(|a| (a - 3f64.sqrt() / 2.0).abs()).fold(0.0, f64::max);

    let mut rng = rng_for(seed, 7);
    let mut failures = 0;
    for i in 0..50 {
        let d = 3 + i % 2;
        let p = random_polytope(&mut rng, d)?;
        let e = john::mvee(p.vertices(), john::DEFAULT_TOL)?;
        let outer_ok = p.vertices().iter().all(|v| e.level(v) <= 1.0 + 1e-9);
        let inner_ok = (0..200).all(|_| {
            let z = uniform_direction(&mut rng, d);
            p.contains_with_tolerance(&e.point_on_scaled(&z, e.inner_factor), 1e-9)
        });
        failures += usize::from(!(outer_ok && inner_ok));
    }

    let cube = Body::cube(3, 1.0)?;
    let s = bounds::sandwich_g_q(&cube, 1.0, &QuadratureConfig::default())?;
    let mc = montecarlo::g_q_monte_carlo(
        &cube,
        1.0,
        &WosConfig {
            seed,
            ..WosConfig::default()
        },
    )?;
    let sigma = mc.g_q.std_error;
    let bracket = s.lower - 3.0 * sigma <= mc.g_q.value && mc.g_q.value <= s.upper + 3.0 * sigma;
    outcome(
        cube_err <= 1e-6 && failures == 0 && bracket,
        format!(
            "cube axes err {cube_err:.3e}; random polytopes failing containment: {failures}/50; \
             cube G_1 sandwich [{:.6}, {:.6}] vs Monte Carlo {:.6} ± {:.2e}",
            s.lower, s.upper, mc.g_q.value, sigma
        ),
    )
}

fn optimizer_checks() -> Result<Outcome> {
    let cfg = OptimizeConfig::default();
    let wall = optimize::DEFAULT_WALL;
    let min = optimize::optimize_ellipsoid(-1.0, 3, Direction::Minimize, wall, &cfg)?;
    let ball_ok = !min.degenerated
        && min.aspect_ratio() <= 1.0 + 1e-3
        && (min.best_value - exact::g_q_ball(3, -1.0)?).abs() <= 1e-8;

    let max = optimize::optimize_ellipsoid(2.0, 3, Direction::Maximize, wall, &cfg)?;
    let c = theorem_constants(3, 2.0)?;
    let sup = c.thm2_sup_coeff.value().unwrap_or(f64::INFINITY) * c.g_q_ball;
    let diam = if max.degenerated { None } else { Some(optimize::check_extremal_diam_ratio(&max)?) };
    let max_ok = !max.degenerated && max.best_value <= sup && diam.as_ref().is_some_and(|c| c.holds);

    let up = optimize::optimize_ellipsoid(0.5, 3, Direction::Maximize, wall, &cfg)?;
    let down = optimize::optimize_ellipsoid(0.5, 3, Direction::Minimize, wall, &cfg)?;
    outcome(
        ball_ok && max_ok && up.degenerated && down.degenerated,
        format!(
            "q=-1 min: aspect {:.9}, value {:.12}; q=2 max: degenerated {}, value {:.9} (bound {sup:.6e}), diam/inradius {}; \
             q=0.5 degenerated max/min: {}/{}",
            min.aspect_ratio(),
            min.best_value,
            max.degenerated,
            max.best_value,
            diam.map(|c| format!("{:.6}", c.ratio)).unwrap_or_else(|| "n/a".into()),
            up.degenerated,
            down.degenerated
        ),
    )
}

fn planar_suite(seed: u64) -> Result<Outcome> {
    let mut ball_err = 0f64;
    for q in [0.0, 0.5, 1.0] {
        let want = 8f64.powf(-q) * PI.powf(-(q + 0.5));
        ball_err = ball_err.max(rel(exact::h_q_ball(q), want));
        ball_err = ball_err.max(rel(exact::h_q_ellipse(1.0, 1.0, q)?.h_q, want));
    }
    let mut rng = rng_for(seed, 9);
    let mut violations = 0;
    for _ in 0..500 {
        let a = random_axes(&mut rng, 2, 0.01, 10.0);
        let q = rng.random_range(0.0..2.0);
        let (a1, a2) = (a.as_slice()[0], a.as_slice()[1]);
        let h = exact::h_q_ellipse(a1, a2, q)?.h_q;
        let (lo, hi) = bounds::h_q_ellipse_bounds(a1, a2, q)?;
        violations += usize::from(!(lo <= h && h <= hi));
    }
    let wall = optimize::DEFAULT_WALL;
    // sup = ∞ below q = 1/2, inf = 0 above it
    let sup_escapes = optimize::optimize_ellipse_planar(0.25, Direction::Maximize, wall)?.degenerated;
    let inf_escapes = optimize::optimize_ellipse_planar(1.0, Direction::Minimize, wall)?.degenerated;
    let bounded = theorem4_constants(1.0)?.sup_bound.value().unwrap_or(0.0)
        >= optimize::optimize_ellipse_planar(1.0, Direction::Maximize, wall)?.best_value;
    outcome(
        ball_err <= 1e-12 && violations == 0 && sup_escapes && inf_escapes && bounded,
        format!(
            "disc rel err {ball_err:.3e}; envelope violations {violations}/500; \
             q=0.25 max degenerates: {sup_escapes}; q=1 min degenerates: {inf_escapes}; q=1 max within bound: {bounded}"
        ),
    )
}

/// Runs criterion `id` (1–9).
pub fn run_criterion(id: u32, seed: u64) -> Result<CriterionResult> {
    let s = Duration::from_secs;
    Ok(match id {
        1 => timed(1, "ball identities", s(1), ball_identities),
        2 => timed(2, "Carlson oracle for efrak (d=3)", s(5), || carlson_oracle(seed)),
        3 => timed(3, "prolate capacity closed form", s(5), prolate_closed_form),
        4 => timed(4, "inequality suite on random ellipsoids", s(60), || inequality_suite(seed)),
        5 => timed(5, "regime directions of the constructions", s(30), regime_directions),
        6 => timed(6, "walk-on-spheres oracles", s(90), || monte_carlo_oracles(seed)),
        7 => timed(7, "enclosing ellipsoid and sandwich", s(60), || mvee_checks(seed)),
        8 => timed(8, "extremal ellipsoid search", s(300), optimizer_checks),
        9 => timed(9, "planar suite", s(10), || planar_suite(seed)),
        _ => return Err(Error::InvalidArgument(format!("unknown criterion {id}"))),
    })
}

/// Runs criteria 1–9 in order.
pub fn run_all(seed: u64) -> VerifyReport {
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .map(|&id| run_criterion(id, seed).expect("known criterion"))
        .collect();
    VerifyReport {
        seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}
