use std::f64::consts::PI;

use capacity_torsion::constructions;
use capacity_torsion::geometry::{cube_vertices, AxisVector, Body};
use capacity_torsion::john::{self, mvee};
use capacity_torsion::montecarlo::{self, uniform_direction, WosConfig};
use capacity_torsion::verify::random_polytope;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wos(walkers: usize, seed: u64) -> WosConfig {
    WosConfig {
        walkers,
        seed,
        ..WosConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mvee_contains_points_and_inner_ellipsoid_lies_in_hull(seed in 0u64..10_000, d in 3usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(&mut rng, d).unwrap();
        let tol = john::DEFAULT_TOL;
        let e = mvee(p.vertices(), tol).unwrap();
        for v in p.vertices() {
            prop_assert!(e.level(v) <= 1.0 + 10.0 * tol);
        }
        for _ in 0..10_000 {
            let z = uniform_direction(&mut rng, d);
            prop_assert!(p.contains_with_tolerance(&e.point_on_scaled(&z, e.inner_factor), 1e-9));
        }
        prop_assert!(e.inner_factor >= 1.0 / d as f64 * (1.0 - 1e-3));
    }

    #[test]
    fn mvee_is_affine_equivariant(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        let p = random_polytope(&mut rng, d).unwrap();
        let a: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 2.0 } else { 0.0 } + rng.random_range(-0.5..0.5)).collect())
            .collect();
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mapped: Vec<Vec<f64>> = p
            .vertices()
            .iter()
            .map(|v| (0..d).map(|i| shift[i] + (0..d).map(|j| a[i][j] * v[j]).sum::<f64>()).collect())
            .collect();
        let e0 = mvee(p.vertices(), 1e-10).unwrap();
        let e1 = mvee(&mapped, 1e-10).unwrap();
        let ratio = e1.semi_axes.product() / e0.semi_axes.product();
        prop_assert!((ratio / det.abs() - 1.0).abs() <= 1e-6, "ratio {ratio} det {det}");
    }
}

#[test]
fn mvee_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_polytope(&mut rng, 4).unwrap();
    assert_eq!(mvee(p.vertices(), 1e-8).unwrap(), mvee(p.vertices(), 1e-8).unwrap());
}

#[test]
fn estimates_are_bit_identical_across_runs_and_thread_counts() {
    let body = Body::ellipsoid(AxisVector::new(vec![2.0, 1.0, 0.5]).unwrap());
    let cfg = wos(30_000, 42);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| (montecarlo::wos_capacity(&body, &cfg).unwrap(), montecarlo::wos_torsion(&body, &cfg).unwrap()))
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(4));
    let other = montecarlo::wos_capacity(&body, &wos(30_000, 43)).unwrap();
    assert_ne!(one.0.value, other.value);
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let ball = Body::ball(3, 1.0).unwrap();
    let small = montecarlo::wos_torsion(&ball, &wos(50_000, 1)).unwrap();
    let big = montecarlo::wos_torsion(&ball, &wos(200_000, 1)).unwrap();
    let ratio = small.std_error / big.std_error;
    assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "{ratio}");
}

#[test]
fn shell_bias_is_below_one_standard_error() {
    let ball = Body::ball(3, 1.0).unwrap();
    let cfg = |eps: f64| WosConfig {
        walkers: 1_000_000,
        shell_eps: Some(eps),
        launch_factor: 2.0,
        seed: 21,
        ..WosConfig::default()
    };
    let a = montecarlo::wos_capacity(&ball, &cfg(1e-3)).unwrap();
    let b = montecarlo::wos_capacity(&ball, &cfg(5e-4)).unwrap();
    assert!((a.value - b.value).abs() < a.std_error, "{a:?} {b:?}");
}

#[test]
fn ball_capacity_at_several_launch_radii() {
    let r = 0.8;
    let ball = Body::ball(3, r).unwrap();
    let want = 4.0 * PI * r;
    for (i, launch) in [1.25, 2.0, 3.0, 5.0].into_iter().enumerate() {
        let cfg = WosConfig {
            launch_factor: launch,
            ..wos(200_000, 100 + i as u64)
        };
        let e = montecarlo::wos_capacity(&ball, &cfg).unwrap();
        assert!(e.agrees_with(want, 3.0), "launch {launch}: {e:?}");
    }
    // d = 4: κ_4 r² with κ_4 = 4π²
    let ball4 = Body::ball(4, 1.0).unwrap();
    let e = montecarlo::wos_capacity(&ball4, &WosConfig { launch_factor: 2.0, ..wos(200_000, 7) }).unwrap();
    assert!(e.agrees_with(4.0 * PI * PI, 3.0), "{e:?}");
}

#[test]
fn torsion_is_positive_and_monotone_on_nested_bodies() {
    let inner = Body::ellipsoid(AxisVector::new(vec![0.9, 0.6, 0.4]).unwrap());
    let middle = Body::ball(3, 0.95).unwrap();
    // [-1, 1]^3, centred like the others
    let outer = Body::polytope(cube_vertices(3, 2.0).iter().map(|v| v.iter().map(|x| x - 1.0).collect()).collect())
        .unwrap();
    let est: Vec<_> = [&inner, &middle, &outer]
        .iter()
        .map(|b| montecarlo::wos_torsion(b, &wos(100_000, 5)).unwrap())
        .collect();
    for w in est.windows(2) {
        assert!(w[0].value > 0.0);
        assert!(w[0].value <= w[1].value + 3.0 * (w[0].std_error + w[1].std_error), "{est:?}");
    }
}

#[test]
fn pancake_lower_bound_is_below_monte_carlo() {
    for eps in [0.2, 0.1, 0.05] {
        let p = constructions::pancake(eps, 1.0, 3).unwrap();
        let body = p.body.clone().unwrap();
        let mc = montecarlo::g_q_monte_carlo(&body, 1.0, &wos(100_000, 9)).unwrap();
        assert!(p.bound.unwrap() <= mc.g_q.value + 3.0 * mc.g_q.std_error, "eps {eps}: {} vs {:?}", p.bound.unwrap(), mc.g_q);
    }
}
