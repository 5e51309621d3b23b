//! Derivative-free search for extremal ellipsoids of G_q (d ≥ 3) and
//! ellipses of H_q (d = 2).
//!
//! Ellipsoids are parameterized by log-axes x with Σx_i = 0, written in an
//! orthonormal basis of that hyperplane, which removes the scale gauge.
//! Points whose aspect ratio exceeds the wall are projected radially back to
//! it and charged the excess log-ratio, so a run that wants to degenerate
//! comes to rest on the wall.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{theorem4_constants, theorem_constants, LogNum, TheoremConstant};
use crate::error::{require_newtonian, Error, Result};
use crate::exact::{self, QuadratureConfig};
use crate::geometry::AxisVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Maximize => -1.0,
            Direction::Minimize => 1.0,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Maximize => "maximize",
            Direction::Minimize => "minimize",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" | "maximize" | "maximise" => Ok(Direction::Maximize),
            "min" | "minimize" | "minimise" => Ok(Direction::Minimize),
            _ => Err(Error::InvalidArgument(format!("unknown direction {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeConfig {
    pub quadrature: QuadratureConfig,
    /// Random starts in addition to the ball.
    pub random_starts: usize,
    pub seed: u64,
    pub value_tol: f64,
    pub simplex_tol: f64,
    pub restarts: usize,
    pub max_evals: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            quadrature: QuadratureConfig::default(),
            random_starts: 8,
            seed: 0x5eed_0001,
            value_tol: 1e-10,
            simplex_tol: 1e-6,
            restarts: 2,
            max_evals: 20_000,
        }
    }
}

pub const DEFAULT_WALL: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub axes: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartSummary {
    pub index: usize,
    pub value: f64,
    pub aspect_ratio: f64,
    pub evaluations: usize,
}

/// Outcome of an extremal search, restricted to ellipsoids (ellipses).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub q: f64,
    pub d: usize,
    pub direction: Direction,
    /// Normalized so that the product of the semi-axes is 1.
    pub best_axes: AxisVector,
    pub best_value: f64,
    pub degenerated: bool,
    pub wall: f64,
    /// Best vertex after each iteration of the winning start.
    pub trace: Vec<TracePoint>,
    pub starts: Vec<StartSummary>,
}

impl RegimeReport {
    pub fn aspect_ratio(&self) -> f64 {
        self.best_axes.aspect_ratio()
    }
}

struct NmOutcome {
    x: Vec<f64>,
    f: f64,
    evals: usize,
    trace: Vec<(Vec<f64>, f64)>,
}

/// Nelder–Mead with standard coefficients. Stops when the spread of vertex
/// values is below `value_tol` and the simplex diameter below `simplex_tol`,
/// or after `max_evals` evaluations.
fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    value_tol: f64,
    simplex_tol: f64,
    max_evals: usize,
) -> NmOutcome {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    let mut trace = Vec::new();
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]).then(a.cmp(b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        trace.push((simplex[0].clone(), values[0]));

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (spread <= value_tol && diameter <= simplex_tol) || evals >= max_evals {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let reflected = lerp(&centroid, &simplex[n], -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = lerp(&centroid, &simplex[n], -2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = lerp(&centroid, &reflected, 0.5);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = lerp(&centroid, &simplex[n], 0.5);
            let fc = f(&c);
            (c, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
            values[i] = f(&simplex[i]);
        }
        evals += n;
    }
    NmOutcome {
        x: simplex[0].clone(),
        f: values[0],
        evals,
        trace,
    }
}

/// Orthonormal basis of {x : Σx_i = 0} (Helmert vectors), as columns.
fn sum_zero_basis(d: usize) -> Vec<Vec<f64>> {
    (1..d)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            (0..d)
                .map(|i| match i.cmp(&k) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(k as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

fn log_axes(basis: &[Vec<f64>], y: &[f64], d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for (col, yk) in basis.iter().zip(y) {
        for (xi, ci) in x.iter_mut().zip(col) {
            *xi += yk * ci;
        }
    }
    x
}

fn spread(x: &[f64]) -> f64 {
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Projects log-axes onto the wall if they lie beyond it; returns the
/// projected point and the excess log-ratio.
fn clamp_to_wall(x: &[f64], ln_wall: f64) -> (Vec<f64>, f64) {
    let s = spread(x);
    if s <= ln_wall {
        (x.to_vec(), 0.0)
    } else {
        (x.iter().map(|v| v * ln_wall / s).collect(), s - ln_wall)
    }
}

fn axes_from_logs(x: &[f64]) -> Result<AxisVector> {
    AxisVector::new(x.iter().map(|v| v.exp()).collect())
}

const FAILED_EVALUATION: f64 = 1e6;

/// Multi-start Nelder–Mead search for the extremal ellipsoid of G_q.
pub fn optimize_ellipsoid(
    q: f64,
    d: usize,
    direction: Direction,
    wall: f64,
    cfg: &OptimizeConfig,
) -> Result<RegimeReport> {
    require_newtonian("ellipsoid optimization", d)?;
    check_wall(wall)?;
    let ln_wall = wall.ln();
    let basis = sum_zero_basis(d);
    let sign = direction.sign();
    let quad = cfg.quadrature;
    let objective = |y: &[f64]| -> f64 {
        let (x, excess) = clamp_to_wall(&log_axes(&basis, y, d), ln_wall);
        match axes_from_logs(&x).and_then(|a| exact::g_q_ellipsoid(&a, q, &quad)) {
            Ok(v) => sign * v.g_q.ln() + excess,
            Err(_) => FAILED_EVALUATION + excess,
        }
    };

    let mut starts = vec![vec![0.0; d - 1]];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_starts {
        starts.push((0..d - 1).map(|_| rng.random_range(-2.0..2.0)).collect());
    }
    let runs: Vec<(NmOutcome, usize)> = starts
        .par_iter()
        .map(|y0| {
            let mut best = nelder_mead(&objective, y0, 0.5, cfg.value_tol, cfg.simplex_tol, cfg.max_evals);
            let mut evals = best.evals;
            let mut step = 0.05;
            for _ in 0..cfg.restarts {
                let again = nelder_mead(&objective, &best.x, step, cfg.value_tol, cfg.simplex_tol, cfg.max_evals);
                evals += again.evals;
                if again.f <= best.f {
                    let mut trace = best.trace;
                    trace.extend(again.trace);
                    best = NmOutcome { trace, ..again };
                }
                step *= 0.1;
            }
            (best, evals)
        })
        .collect();

    let summaries: Vec<StartSummary> = runs
        .iter()
        .enumerate()
        .map(|(index, (r, evals))| {
            let (x, _) = clamp_to_wall(&log_axes(&basis, &r.x, d), ln_wall);
            StartSummary {
                index,
                value: (sign * r.f).exp(),
                aspect_ratio: spread(&x).exp(),
                evaluations: *evals,
            }
        })
        .collect();
    let (winner, _) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.f.total_cmp(&b.1 .0.f).then(a.0.cmp(&b.0)))
        .expect("at least one start");
    let best = &runs[winner].0;

    let (mut x, _) = clamp_to_wall(&log_axes(&basis, &best.x, d), ln_wall);
    let degenerated = spread(&x) >= ln_wall - 1e-6;
    if degenerated {
        let s = spread(&x);
        x.iter_mut().for_each(|v| *v *= ln_wall * (1.0 + 1e-12) / s);
    }
    let best_axes = axes_from_logs(&x)?.normalized();
    let best_value = exact::g_q_ellipsoid(&best_axes, q, &quad)?.g_q;
    let trace = best
        .trace
        .iter()
        .map(|(y, f)| {
            let (x, _) = clamp_to_wall(&log_axes(&basis, y, d), ln_wall);
            TracePoint {
                axes: axes_from_logs(&x).map(|a| a.as_slice().to_vec()).unwrap_or_default(),
                value: (sign * f).exp(),
            }
        })
        .collect();
    Ok(RegimeReport {
        q,
        d,
        direction,
        best_axes,
        best_value,
        degenerated,
        wall,
        trace,
        starts: summaries,
    })
}

fn check_wall(wall: f64) -> Result<()> {
    if !(wall >= 10.0 && wall.is_finite()) {
        return Err(Error::InvalidArgument(format!("wall must be at least 10, got {wall}")));
    }
    Ok(())
}

/// Number of grid points for the planar search over log(a_1/a_2).
pub const PLANAR_GRID: usize = 401;

/// Extremal ellipse of H_q over aspect ratios in [1, wall]: a log-spaced
/// grid followed by golden-section refinement around the best grid point.
pub fn optimize_ellipse_planar(q: f64, direction: Direction, wall: f64) -> Result<RegimeReport> {
    check_wall(wall)?;
    if !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be finite, got {q}")));
    }
    let ln_wall = wall.ln();
    let sign = direction.sign();
    let f = |t: f64| -> f64 { sign * exact::h_q_ellipse(t.exp(), 1.0, q).map(|v| v.h_q.ln()).unwrap_or(f64::INFINITY) };
    let h = ln_wall / (PLANAR_GRID - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..PLANAR_GRID)
        .map(|i| {
            let t = if i == PLANAR_GRID - 1 { ln_wall } else { i as f64 * h };
            (t, f(t))
        })
        .collect();
    let (ibest, _) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .unwrap();
    let mut trace: Vec<TracePoint> = Vec::new();
    let push = |trace: &mut Vec<TracePoint>, t: f64| {
        trace.push(TracePoint {
            axes: vec![(0.5 * t).exp(), (-0.5 * t).exp()],
            value: (sign * f(t)).exp(),
        })
    };
    let t_best = if ibest == PLANAR_GRID - 1 {
        ln_wall
    } else if ibest == 0 && f(0.0) <= f(h * 1e-3) {
        0.0
    } else {
        // golden section on the bracketing grid cell pair
        let (mut a, mut b) = (grid[ibest.saturating_sub(1)].0, grid[(ibest + 1).min(PLANAR_GRID - 1)].0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut e = a + g * (b - a);
        let (mut fc, mut fe) = (f(c), f(e));
        while b - a > 1e-12 * (1.0 + a.abs()) {
            if fc <= fe {
                b = e;
                e = c;
                fe = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + g * (b - a);
                fe = f(e);
            }
            push(&mut trace, 0.5 * (a + b));
        }
        let t = 0.5 * (a + b);
        if f(t) <= grid[ibest].1 {
            t
        } else {
            grid[ibest].0
        }
    };
    let degenerated = t_best >= ln_wall - 1e-9;
    let best_axes = AxisVector::new(vec![(0.5 * t_best).exp(), (-0.5 * t_best).exp()])?;
    let s = best_axes.as_slice();
    let best_value = exact::h_q_ellipse(s[0], s[1], q)?.h_q;
    Ok(RegimeReport {
        q,
        d: 2,
        direction,
        best_axes,
        best_value,
        degenerated,
        wall,
        trace,
        starts: vec![StartSummary {
            index: 0,
            value: best_value,
            aspect_ratio: t_best.exp(),
            evaluations: PLANAR_GRID,
        }],
    })
}

/// Comparison of an extremal ellipsoid's diam/inradius with the theorem bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiamRatioCheck {
    /// diam(E)/r(E) = 2a_1/a_d.
    pub ratio: f64,
    pub bound: LogNum,
    pub holds: bool,
}

/// Checks diam/inradius of the report's extremal ellipsoid against the
/// matching theorem constant; not applicable when q is outside the range in
/// which an extremal body is known to exist.
pub fn check_extremal_diam_ratio(report: &RegimeReport) -> Result<DiamRatioCheck> {
    if report.degenerated {
        return Err(Error::InvalidArgument("the search degenerated; no extremal body to check".into()));
    }
    let q = report.q;
    let constant = if report.d == 2 {
        let c = theorem4_constants(q)?;
        match report.direction {
            Direction::Maximize => c.max_diam_ratio,
            Direction::Minimize => c.min_diam_ratio,
        }
    } else {
        let c = theorem_constants(report.d, q)?;
        match report.direction {
            Direction::Maximize if c.thm2_d3q1_diam_ratio.is_applicable() => c.thm2_d3q1_diam_ratio,
            Direction::Maximize => c.thm2_diam_ratio,
            Direction::Minimize => c.thm3_diam_ratio,
        }
    };
    let bound = match constant {
        TheoremConstant::Value(v) => v,
        TheoremConstant::NotApplicable { reason } => return Err(Error::NotApplicable(reason)),
    };
    let ratio = 2.0 * report.best_axes.aspect_ratio();
    Ok(DiamRatioCheck {
        ratio,
        bound,
        holds: ratio.ln() <= bound.ln(),
    })
}

/// One row of a regime table; `ratio` is best_value over the ball value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    pub q: f64,
    pub direction: Direction,
    pub degenerated: bool,
    pub best_value: f64,
    pub ratio: f64,
}

/// Both search directions for every `q`, in input order.
pub fn regime_table(qs: &[f64], d: usize, wall: f64, cfg: &OptimizeConfig) -> Result<Vec<RegimeRow>> {
    let mut rows = Vec::new();
    for &q in qs {
        for direction in [Direction::Maximize, Direction::Minimize] {
            let (report, ball) = if d == 2 {
                (optimize_ellipse_planar(q, direction, wall)?, exact::h_q_ball(q))
            } else {
                (optimize_ellipsoid(q, d, direction, wall, cfg)?, exact::g_q_ball(d, q)?)
            };
            rows.push(RegimeRow {
                q,
                direction,
                degenerated: report.degenerated,
                best_value: report.best_value,
                ratio: report.best_value / ball,
            });
        }
    }
    Ok(rows)
}
