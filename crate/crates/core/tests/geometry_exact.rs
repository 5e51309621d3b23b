use std::f64::consts::PI;

use capacity_torsion::bounds::{self, elementary_log_inequalities, theorem_constants};
use capacity_torsion::exact::{self, QuadratureConfig};
use capacity_torsion::geometry::{ball_constants, AxisVector, Body};
use capacity_torsion::montecarlo::uniform_in_body;
use capacity_torsion::verify::{oracles, random_axes, random_polytope};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn axes_strategy(d: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    d.prop_flat_map(|d| prop::collection::vec(-2.3f64..2.3, d))
        .prop_map(|logs| logs.into_iter().map(f64::exp).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_scales_with_t_to_the_d(a in axes_strategy(2..=6), t in -6.9f64..6.9, seed in 0u64..1000) {
        let t = t.exp();
        let e = Body::ellipsoid(AxisVector::new(a.clone()).unwrap());
        let d = a.len() as i32;
        prop_assert!(rel(e.scale(t).unwrap().volume().unwrap(), t.powi(d) * e.volume().unwrap()) <= 1e-12);
        let b = Body::ball(a.len(), a[0]).unwrap();
        prop_assert!(rel(b.scale(t).unwrap().volume().unwrap(), t.powi(d) * b.volume().unwrap()) <= 1e-12);
        if a.len() >= 3 && a.len() <= 4 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = Body::Polytope(random_polytope(&mut rng, a.len()).unwrap());
            prop_assert!(rel(p.scale(t).unwrap().volume().unwrap(), t.powi(d) * p.volume().unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn axis_vector_is_order_insensitive(mut a in axes_strategy(2..=8), rot in 0usize..8) {
        let sorted = AxisVector::new(a.clone()).unwrap();
        let n = a.len();
        a.rotate_left(rot % n);
        a.reverse();
        prop_assert_eq!(&AxisVector::new(a).unwrap(), &sorted);
        prop_assert_eq!(&AxisVector::new(sorted.as_slice().to_vec()).unwrap(), &sorted);
    }

    #[test]
    fn inradius_at_most_half_diameter(a in axes_strategy(2..=5), seed in 0u64..1000) {
        let e = Body::ellipsoid(AxisVector::new(a.clone()).unwrap());
        prop_assert!(e.inradius().unwrap().upper() <= e.diameter().unwrap() / 2.0 * (1.0 + 1e-15));
        if a.len() >= 3 && a.len() <= 4 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = Body::Polytope(random_polytope(&mut rng, a.len()).unwrap());
            prop_assert!(p.inradius().unwrap().upper() <= p.diameter().unwrap() / 2.0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn efrak_and_capacity_scaling(a in axes_strategy(3..=7), t in -4.6f64..4.6) {
        let t = t.exp();
        let a = AxisVector::new(a).unwrap();
        let ta = a.scaled(t);
        let d = a.dim() as f64;
        let e = exact::efrak(&a, &cfg()).unwrap();
        let et = exact::efrak(&ta, &cfg()).unwrap();
        prop_assert!((et - t.powf(2.0 - d) * e).abs() / et <= 1e-9);
        let c = exact::cap_ellipsoid(&a, &cfg()).unwrap();
        prop_assert!(rel(exact::cap_ellipsoid(&ta, &cfg()).unwrap(), t.powf(d - 2.0) * c) <= 1e-9);
        prop_assert!(rel(exact::torsion_ellipsoid(&ta), t.powf(d + 2.0) * exact::torsion_ellipsoid(&a)) <= 1e-13);
    }

    #[test]
    fn g_q_is_scale_invariant(a in axes_strategy(3..=6), t in -4.6f64..4.6, q in -2.0f64..3.0) {
        let a = AxisVector::new(a).unwrap();
        let g = exact::g_q_ellipsoid(&a, q, &cfg()).unwrap().g_q;
        let gt = exact::g_q_ellipsoid(&a.scaled(t.exp()), q, &cfg()).unwrap().g_q;
        prop_assert!(rel(gt, g) <= 1e-9);
    }

    #[test]
    fn sandwich_of_an_ellipsoid_is_exact(a in axes_strategy(3..=5), q in -2.0f64..3.0) {
        let axes = AxisVector::new(a).unwrap();
        let s = bounds::sandwich_g_q(&Body::ellipsoid(axes.clone()), q, &cfg()).unwrap();
        let g = exact::g_q_ellipsoid(&axes, q, &cfg()).unwrap().g_q;
        prop_assert_eq!(s.lower, s.upper);
        prop_assert!(rel(s.lower, g) <= 1e-9);
    }

    #[test]
    fn ball_minimises_g_q_for_nonpositive_q(a in axes_strategy(3..=5), q in -3.0f64..=0.0) {
        let axes = AxisVector::new(a).unwrap();
        let d = axes.dim();
        let g = exact::g_q_ellipsoid(&axes, q, &cfg()).unwrap().g_q;
        let ball = exact::g_q_ball(d, q).unwrap();
        prop_assert!(g >= ball * (1.0 - 1e-12));
        if axes.aspect_ratio() > 1.01 {
            prop_assert!(g > ball * (1.0 + 1e-8));
        }
    }
}

#[test]
fn ball_equality_case() {
    for d in 3..=6 {
        for q in [0.0, -0.5, -2.0] {
            let g = exact::g_q_ellipsoid(&AxisVector::uniform(d, 0.7).unwrap(), q, &cfg()).unwrap().g_q;
            assert!(rel(g, exact::g_q_ball(d, q).unwrap()) <= 1e-8);
        }
    }
}

#[test]
fn ellipsoid_volume_matches_rejection_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = AxisVector::new(vec![1.5, 1.0, 0.4]).unwrap();
    let body = Body::ellipsoid(a.clone());
    let n = 1_000_000;
    let box_volume = 8.0 * a.product();
    let hits = (0..n)
        .filter(|_| {
            let x: Vec<f64> = a.as_slice().iter().map(|ai| rng.random_range(-ai..*ai)).collect();
            body.contains(&x)
        })
        .count() as f64;
    let p = hits / n as f64;
    let estimate = p * box_volume;
    let se = box_volume * (p * (1.0 - p) / n as f64).sqrt();
    assert!((estimate - body.volume().unwrap()).abs() <= 3.0 * se, "{estimate} ± {se}");
    // sampled points of the body lie inside it
    assert!((0..1000).all(|_| body.contains(&uniform_in_body(&body, &mut rng))));
}

#[test]
fn monotonicity_under_inclusion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..1000 {
        let d = 3 + i % 3;
        let a = random_axes(&mut rng, d, 0.1, 10.0);
        // grow each axis independently, then re-sort: still componentwise larger
        let b = AxisVector::new(a.as_slice().iter().map(|x| x * rng.random_range(1.0..3.0)).collect()).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x <= y));
        assert!(exact::torsion_ellipsoid(&a) <= exact::torsion_ellipsoid(&b));
        assert!(exact::cap_ellipsoid(&a, &cfg()).unwrap() <= exact::cap_ellipsoid(&b, &cfg()).unwrap());
    }
}

#[test]
fn saint_venant_and_isocapacitary_are_strict_off_the_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..1000 {
        let a = random_axes(&mut rng, 3 + i % 4, 0.2, 5.0);
        let sv = exact::saint_venant_ratio(&a);
        let iso = exact::isocapacitary_ratio(&a, &cfg()).unwrap();
        assert!(sv <= 1.0 + 1e-14 && iso >= 1.0 - 1e-12);
        if a.aspect_ratio() > 1.01 {
            assert!(sv < 1.0 - 1e-6, "{a:?}: {sv}");
            assert!(iso > 1.0 + 1e-6, "{a:?}: {iso}");
        }
    }
}

#[test]
fn efrak_envelopes_on_random_axes() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let a = random_axes(&mut rng, 3 + i % 5, 1e-2, 1e2);
        let e = exact::efrak(&a, &cfg()).unwrap();
        let (lo, hi) = (bounds::efrak_lower(&a).unwrap(), bounds::efrak_upper(&a).unwrap());
        assert!(lo <= e * (1.0 + 1e-12) && e <= hi * (1.0 + 1e-12), "{a:?}: {lo} {e} {hi}");
    }
}

#[test]
fn carlson_oracle_on_wide_axes() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let a = random_axes(&mut rng, 3, 1e-3, 1e3);
        let s = a.as_slice();
        let want = oracles::efrak_d3([s[0], s[1], s[2]]);
        assert!(rel(exact::efrak(&a, &cfg()).unwrap(), want) <= 1e-10, "{a:?}");
    }
}

#[test]
fn theorem_bounds_on_random_ellipsoids_and_polytopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..300 {
        let d = 3 + i % 3;
        let a = random_axes(&mut rng, d, 0.01, 10.0);
        for q in [1.0, 1.5, 2.0, 3.0] {
            let c = theorem_constants(d, q).unwrap();
            let bound = c.thm2_sup_coeff.log_value().unwrap().ln() + c.g_q_ball.ln();
            assert!(exact::g_q_ellipsoid(&a, q, &cfg()).unwrap().g_q.ln() <= bound);
        }
        let qc = bounds::q_critical(d);
        for q in [0.05, 0.5 * qc, qc] {
            let c = theorem_constants(d, q).unwrap();
            let bound = c.thm3_inf_coeff.log_value().unwrap().ln() + c.g_q_ball.ln();
            assert!(exact::g_q_ellipsoid(&a, q, &cfg()).unwrap().g_q.ln() >= bound);
        }
    }
    for i in 0..30 {
        let d = 3 + i % 2;
        let p = Body::Polytope(random_polytope(&mut rng, d).unwrap());
        for q in [1.0, 2.0] {
            let s = bounds::sandwich_g_q(&p, q, &cfg()).unwrap();
            let c = theorem_constants(d, q).unwrap();
            assert!(s.upper <= c.thm2_sup_coeff.value().unwrap() * c.g_q_ball);
            assert!(s.lower <= s.upper);
        }
    }
}

#[test]
fn elementary_log_inequalities_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..100_000 {
        let x: f64 = rng.random_range(f64::EPSILON..1.0);
        let r = elementary_log_inequalities(x, 3 + i % 6).unwrap();
        assert!(r.first.2 && r.second.2, "x = {x}: {r:?}");
    }
}

#[test]
fn planar_envelopes_bracket_ellipses() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..2000 {
        let a = random_axes(&mut rng, 2, 1e-3, 1e3);
        let q = rng.random_range(0.0..3.0);
        let (a1, a2) = (a.as_slice()[0], a.as_slice()[1]);
        let h = exact::h_q_ellipse(a1, a2, q).unwrap().h_q;
        let (lo, hi) = bounds::h_q_ellipse_bounds(a1, a2, q).unwrap();
        assert!(lo <= h && h <= hi, "({a1}, {a2}), q = {q}");
    }
    // disc values
    for q in [0.0, 0.5, 1.0] {
        assert!(rel(exact::h_q_ball(q), 8f64.powf(-q) * PI.powf(-(q + 0.5))) <= 1e-14);
    }
}

#[test]
fn ball_constants_known_values() {
    let c = ball_constants(3).unwrap();
    assert!(rel(c.omega, 4.0 * PI / 3.0) <= 1e-13);
    assert!(rel(c.kappa().unwrap(), 4.0 * PI) <= 1e-13);
    assert!(ball_constants(2).unwrap().kappa().is_err());
}
