use capacity_torsion::bounds::{q_critical, theorem_constants};
use capacity_torsion::constructions::{self, BoundKind, Family, SweepSpec};
use capacity_torsion::exact::{self, QuadratureConfig};
use capacity_torsion::geometry::AxisVector;
use capacity_torsion::optimize::{self, Direction, OptimizeConfig, DEFAULT_WALL};
use proptest::prelude::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn decades(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 10f64.powi(-k)).collect()
}

#[test]
fn upper_bounds_dominate_exact_values() {
    for d in [3, 4, 5] {
        for q in [-1.0, -0.2, 0.0, 0.3, 0.5, 1.0, 2.0] {
            for a_d in decades(0, 6) {
                let p = constructions::oblate_family(a_d, q, d, &cfg()).unwrap();
                assert_eq!(p.bound_side, Some(BoundKind::Upper));
                assert!(p.exact.unwrap() <= p.bound.unwrap() * (1.0 + 1e-12), "d {d} q {q} a_d {a_d}: {p:?}");
            }
        }
    }
}

#[test]
fn power_law_identities() {
    let cap = constructions::unit_cube_capacity().value;
    for d in [3, 4, 6] {
        for q in [-1.0, 0.25, 1.0, 3.0] {
            for n in [1usize, 3, 10] {
                let a = constructions::ball_packing(n, q, d, cap).unwrap().bound.unwrap();
                let b = constructions::ball_packing(2 * n, q, d, cap).unwrap().bound.unwrap();
                assert!((b / a / 2f64.powf(-2.0 * q) - 1.0).abs() <= 1e-12);
            }
            if q >= 0.0 {
                // pancake bound ∝ ε^{(d−2)/(1−d)} at fixed q
                let e1 = constructions::pancake(1e-2, q, d).unwrap().bound.unwrap();
                let e2 = constructions::pancake(1e-4, q, d).unwrap().bound.unwrap();
                let want = 100f64.powf((d as f64 - 2.0) / (d as f64 - 1.0));
                assert!((e2 / e1 / want - 1.0).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn divergence_and_vanishing_directions() {
    let cap = constructions::unit_cube_capacity().value;
    for d in [3, 4] {
        // pancake lower bound grows without limit for every q
        for q in [-1.0, 0.0, 0.5, 2.0] {
            let b: Vec<f64> = decades(1, 8).iter().map(|&e| constructions::pancake(e, q, d).unwrap().value).collect();
            assert!(b.windows(2).all(|w| w[1] > w[0]), "pancake d {d} q {q}: {b:?}");
        }
        // packing upper bound vanishes for q > 0
        for q in [0.1, 1.0] {
            let b: Vec<f64> = (1..=6).map(|n| constructions::ball_packing(n, q, d, cap).unwrap().value).collect();
            assert!(b.windows(2).all(|w| w[1] < w[0]));
        }
        // prolate G_q grows for q < 1 (near q = 1 only eventually: the log factor dominates early)
        for q in [-0.5, 0.0, 0.5] {
            let g: Vec<f64> = decades(1, 6)
                .iter()
                .map(|&e| constructions::prolate_family(e, q, d, &cfg()).unwrap().value)
                .collect();
            assert!(g.windows(2).all(|w| w[1] > w[0]), "prolate d {d} q {q}: {g:?}");
        }
        // oblate upper bound vanishes above the critical exponent
        let q = q_critical(d) + 0.2;
        assert!(constructions::oblate_bound_vanishes(q, d));
        let b: Vec<f64> = decades(1, 6)
            .iter()
            .map(|&e| constructions::oblate_family(e, q, d, &cfg()).unwrap().bound.unwrap())
            .collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
        assert!(!constructions::oblate_bound_vanishes(q_critical(d), d));
    }
}

#[test]
fn sweep_orders_output_and_matches_pointwise() {
    let spec = SweepSpec {
        family: Family::Prolate,
        grid: vec![1e-3, 1e-1, 1e-2],
        q: 0.5,
        d: 3,
        cap_cube: constructions::unit_cube_capacity().value,
    };
    let pts = constructions::sweep(&spec, &cfg()).unwrap();
    let params: Vec<f64> = pts.iter().map(|p| p.parameter).collect();
    assert_eq!(params, vec![1e-1, 1e-2, 1e-3]);
    for p in &pts {
        assert_eq!(p.value, constructions::prolate_family(p.parameter, 0.5, 3, &cfg()).unwrap().value);
    }
    let csv = constructions::to_csv(&pts);
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("parameter,exact,bound,bound_kind,asymptote,ratio\n"));
}

#[test]
fn minimisation_reaches_the_ball_for_nonpositive_q() {
    let cfg = OptimizeConfig::default();
    for d in [3, 4] {
        for q in [0.0, -1.0, -2.5] {
            let r = optimize::optimize_ellipsoid(q, d, Direction::Minimize, DEFAULT_WALL, &cfg).unwrap();
            assert!(!r.degenerated);
            assert!(r.aspect_ratio() <= 1.0 + 1e-3, "d {d} q {q}: {:?}", r.best_axes);
            for s in &r.starts {
                assert!(s.aspect_ratio <= 1.0 + 1e-3, "d {d} q {q}: start {} ended at {}", s.index, s.aspect_ratio);
            }
            assert!((r.best_value - exact::g_q_ball(d, q).unwrap()).abs() <= 1e-8 * r.best_value);
        }
    }
}

#[test]
fn maximisation_above_one_is_bounded() {
    let cfg = OptimizeConfig::default();
    for q in [1.5, 2.0] {
        let r = optimize::optimize_ellipsoid(q, 3, Direction::Maximize, DEFAULT_WALL, &cfg).unwrap();
        assert!(!r.degenerated);
        let c = theorem_constants(3, q).unwrap();
        assert!(r.best_value <= c.thm2_sup_coeff.value().unwrap() * c.g_q_ball);
        let check = optimize::check_extremal_diam_ratio(&r).unwrap();
        assert!(check.holds);
        // the reported value is a fresh evaluation at the reported axes
        let fresh = exact::g_q_ellipsoid(&r.best_axes, q, &QuadratureConfig::default()).unwrap().g_q;
        assert!((r.best_value - fresh).abs() <= 1e-10 * fresh);
        assert!((r.best_axes.product() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn degenerate_runs_sit_on_the_wall() {
    let cfg = OptimizeConfig::default();
    for wall in [100.0, DEFAULT_WALL] {
        let r = optimize::optimize_ellipsoid(0.5, 3, Direction::Maximize, wall, &cfg).unwrap();
        assert!(r.degenerated && r.aspect_ratio() >= wall);
        let fresh = exact::g_q_ellipsoid(&r.best_axes, 0.5, &QuadratureConfig::default()).unwrap().g_q;
        assert!((r.best_value - fresh).abs() <= 1e-10 * fresh);
    }
    assert!(optimize::optimize_ellipsoid(0.5, 3, Direction::Maximize, 5.0, &cfg).is_err());
    assert!(optimize::optimize_ellipsoid(0.5, 2, Direction::Maximize, DEFAULT_WALL, &cfg).is_err());
}

#[test]
fn regime_table_rows() {
    let rows = optimize::regime_table(&[-1.0, 0.5], 3, DEFAULT_WALL, &OptimizeConfig::default()).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!((rows[0].q, rows[0].direction), (-1.0, Direction::Maximize));
    assert!(rows[1].direction == Direction::Minimize && !rows[1].degenerated);
    assert!((rows[1].ratio - 1.0).abs() <= 1e-8);
    assert!(rows[2].degenerated && rows[3].degenerated);
    let planar = optimize::regime_table(&[0.25, 1.0], 2, DEFAULT_WALL, &OptimizeConfig::default()).unwrap();
    assert!(planar[0].degenerated && !planar[2].degenerated && planar[3].degenerated);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // the optimizer evaluates G_q at log-axes normalized to Σ log a_i = 0
    #[test]
    fn renormalizing_axes_keeps_the_value(logs in prop::collection::vec(-4.0f64..4.0, 3..=6), q in -2.0f64..3.0) {
        let a = AxisVector::new(logs.iter().map(|x| x.exp()).collect()).unwrap();
        let g = exact::g_q_ellipsoid(&a, q, &cfg()).unwrap().g_q;
        let gn = exact::g_q_ellipsoid(&a.normalized(), q, &cfg()).unwrap().g_q;
        prop_assert!((g - gn).abs() <= 1e-9 * g);
    }
}
