use std::process::{Command, Output};

use capacity_torsion::bounds::theorem_constants;
use capacity_torsion::exact::{self, QuadratureConfig};
use capacity_torsion::geometry::{AxisVector, Body};
use capacity_torsion::montecarlo::{self, WosConfig};
use serde_json::Value;

fn captor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_captor"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = captor(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v["value"].as_f64().unwrap_or_else(|| panic!("no value in {v}"))
}

#[test]
fn eval_unit_ball() {
    let v = json(&["eval", "--ellipsoid", "1,1,1", "--q", "1", "--json"]);
    assert!((num(&v["results"]["g_q"]) - 0.2).abs() < 1e-12);
    assert_eq!(v["results"]["torsion"]["provenance"], "exact");
    assert_eq!(v["tool"], "captor");
    assert!(v["timestamp"].is_null());
}

#[test]
fn eval_ellipse_log_capacity() {
    let out = captor(&["eval", "--ellipse", "2,1", "--q", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("logcap")).unwrap();
    assert_eq!(line.split_whitespace().nth(1), Some("1.5"));
}

#[test]
fn planar_ellipsoid_is_a_usage_error() {
    let out = captor(&["eval", "--ellipsoid", "1,1", "--q", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires d >= 3"));
}

#[test]
fn malformed_input_exit_codes() {
    for args in [
        &["eval", "--body", "{\"kind\": \"torus\"}", "--q", "1"][..],
        &["eval", "--ellipsoid", "1,x,1", "--q", "1"],
        &["eval", "--ellipsoid", "1,-1,1", "--q", "1"],
        &["sequence", "--family", "moebius", "--q", "1"],
        &["bounds", "--d", "1", "--q", "1"],
        &["frobnicate"],
    ] {
        assert_eq!(captor(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bounds_report_the_critical_exponent() {
    let v = json(&["bounds", "--d", "3", "--q", "0.25", "--json"]);
    assert_eq!(num(&v["results"]["q_critical"]), 0.25);
    let c = theorem_constants(3, 0.25).unwrap();
    let inf = &v["results"]["thm3_inf_coeff"];
    assert_eq!(num(inf), c.thm3_inf_coeff.value().unwrap());
    assert_eq!(inf["provenance"], "bound");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = std::env::temp_dir().join(format!("captor-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "# sweep defaults\nd = 4\nq=0.5\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = json(&["bounds", "--config", p, "--json"]);
    assert_eq!(num(&from_file["results"]["q_critical"]), 1.0 / 3.0);
    assert_eq!(from_file["config"]["d"], "4");
    let overridden = json(&["bounds", "--config", p, "--d", "3", "--json"]);
    assert_eq!(num(&overridden["results"]["q_critical"]), 0.25);
    assert_eq!(overridden["results"]["q"], 0.5);

    std::fs::write(&path, "colour = blue\n").unwrap();
    assert_eq!(captor(&["bounds", "--config", p]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn prolate_sequence_is_monotone_and_sorted() {
    let out = captor(&["sequence", "--family", "prolate", "--d", "3", "--q", "0.5", "--eps", "1e-1..1e-6", "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 > w[0].1), "{rows:?}");
}

#[test]
fn mc_ball_capacity() {
    let v = json(&["mc", "--body", "ball", "--d", "3", "--walkers", "100000", "--seed", "7", "--json"]);
    let cap = &v["results"]["capacity"];
    let (value, se) = (num(cap), cap["std_error"].as_f64().unwrap());
    assert!(se > 0.0);
    assert!((value - 4.0 * std::f64::consts::PI).abs() <= 3.0 * se, "{value} ± {se}");
    assert_eq!(cap["provenance"], "monte-carlo");
}

#[test]
fn json_round_trips_bit_exactly() {
    // exact and quadrature values
    let v = json(&["eval", "--ellipsoid", "3,1.5,0.25", "--q", "0.75", "--json"]);
    let axes: Vec<f64> = v["results"]["axes"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let a = AxisVector::new(axes).unwrap();
    let g = exact::g_q_ellipsoid(&a, 0.75, &QuadratureConfig::default()).unwrap();
    assert_eq!(num(&v["results"]["g_q"]), g.g_q);
    assert_eq!(num(&v["results"]["capacity"]), g.cap);
    assert_eq!(num(&v["results"]["torsion"]), exact::torsion_ellipsoid(&a));

    // bound values
    let v = json(&["bounds", "--d", "5", "--q", "1.5", "--json"]);
    let c = theorem_constants(5, 1.5).unwrap();
    assert_eq!(num(&v["results"]["g_q_ball"]), c.g_q_ball);
    assert_eq!(num(&v["results"]["thm2_sup_coeff"]), c.thm2_sup_coeff.value().unwrap());

    // Monte Carlo with the same seed
    let v = json(&["mc", "--ellipsoid", "2,1,1", "--walkers", "5000", "--seed", "11", "--quantity", "torsion", "--json"]);
    let body: Body = Body::ellipsoid(AxisVector::new(vec![2.0, 1.0, 1.0]).unwrap());
    let cfg = WosConfig {
        walkers: 5000,
        seed: 11,
        ..WosConfig::default()
    };
    let t = montecarlo::wos_torsion(&body, &cfg).unwrap();
    assert_eq!(num(&v["results"]["torsion"]), t.value);
    assert_eq!(v["results"]["torsion"]["std_error"].as_f64().unwrap(), t.std_error);
}

#[test]
fn output_is_byte_reproducible() {
    let args = ["sequence", "--family", "oblate", "--d", "3", "--q", "0.5", "--eps", "1e-1..1e-4", "--json"];
    assert_eq!(captor(&args).stdout, captor(&args).stdout);
}

#[test]
fn verify_is_deterministic() {
    let vector = || {
        let out = captor(&["verify", "--seed", "7", "--json"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["results"]["criteria"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["id"].as_u64().unwrap(), c["passed"].as_bool().unwrap()))
            .collect::<Vec<_>>()
    };
    let first = vector();
    assert_eq!(first.len(), 9);
    assert_eq!(first, vector());
}
