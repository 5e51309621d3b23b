//! Walk-on-spheres estimators for torsional rigidity and Newtonian capacity.
//!
//! Walkers are independent and each draws from its own ChaCha stream keyed by
//! (seed, purpose, walker index). Walkers are processed in fixed chunks whose
//! statistics are merged in index order, so results are bit-identical for any
//! number of worker threads.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::measure_exponent;
use crate::geometry::{ball_constants, Body};

const CHUNK: usize = 4096;
const TAG_TORSION: u64 = 1;
const TAG_CAPACITY: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WosConfig {
    pub walkers: usize,
    /// Absolute absorption-shell thickness; `None` means 1e−3 × the radius of
    /// the body's enclosing sphere.
    pub shell_eps: Option<f64>,
    /// Radius beyond which the survival coin is tossed, as a multiple of the
    /// launch radius.
    pub escape_factor: f64,
    /// Launch-sphere radius as a multiple of the enclosing radius.
    pub launch_factor: f64,
    pub seed: u64,
    pub max_steps: usize,
}

impl Default for WosConfig {
    fn default() -> Self {
        WosConfig {
            walkers: 100_000,
            shell_eps: None,
            escape_factor: 4.0,
            launch_factor: 1.0,
            seed: 0,
            max_steps: 1_000_000,
        }
    }
}

impl WosConfig {
    fn resolve_shell(&self, body: &Body) -> Result<f64> {
        if self.walkers == 0 {
            return Err(Error::InvalidArgument("walkers must be at least 1".into()));
        }
        if !(self.escape_factor >= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "escape radius must be at least twice the launch radius, got factor {}",
                self.escape_factor
            )));
        }
        if !(self.launch_factor >= 1.0 && self.launch_factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "launch factor must be at least 1, got {}",
                self.launch_factor
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        let (_, radius) = body.bounding_sphere();
        match self.shell_eps {
            None => Ok(1e-3 * radius),
            Some(e) if e > 0.0 && e <= 1e-2 * 2.0 * radius => Ok(e),
            Some(e) => Err(Error::InvalidArgument(format!(
                "shell_eps must lie in (0, 1e-2 x diameter = {:.3e}], got {e}",
                2e-2 * radius
            ))),
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub shell_eps: f64,
    /// Walkers stopped by `max_steps` (scored as they stood).
    pub truncated: usize,
    pub bias_note: String,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }

    pub fn relative_error(&self, target: f64) -> f64 {
        (self.value - target).abs() / target.abs()
    }
}

/// Running mean and sum of squared deviations (Welford), merged with Chan's
/// pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    n: usize,
    mean: f64,
    m2: f64,
    truncated: usize,
}

impl Stats {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Stats) -> Stats {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Stats {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
            truncated: self.truncated + other.truncated,
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for walker `index` of the run `(seed, tag)`.
pub fn walker_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(tag));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

fn run_walkers(n: usize, seed: u64, tag: u64, walk: impl Fn(&mut ChaCha8Rng) -> (f64, bool) + Sync) -> Stats {
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Stats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = Stats::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = walker_rng(seed, tag, i as u64);
                let (score, truncated) = walk(&mut rng);
                s.push(score);
                s.truncated += usize::from(truncated);
            }
            s
        })
        .collect();
    partial.into_iter().fold(Stats::default(), Stats::merge)
}

/// Uniformly distributed unit vector.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point of the unit ball.
pub fn uniform_in_unit_ball<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let r = rng.random::<f64>().powf(1.0 / d as f64);
    uniform_direction(rng, d).into_iter().map(|x| r * x).collect()
}

/// Uniform point of the body (rejection from the bounding box for polytopes,
/// volume-weighted part selection for unions).
pub fn uniform_in_body<R: Rng + ?Sized>(body: &Body, rng: &mut R) -> Vec<f64> {
    match body {
        Body::Ball(b) => uniform_in_unit_ball(rng, b.center.len())
            .iter()
            .zip(&b.center)
            .map(|(x, c)| c + b.radius * x)
            .collect(),
        Body::Ellipsoid(e) => {
            let y: Vec<f64> = uniform_in_unit_ball(rng, e.axes.dim())
                .iter()
                .zip(e.axes.as_slice())
                .map(|(x, a)| a * x)
                .collect();
            e.to_global(&y)
        }
        Body::Polytope(p) => {
            let (lo, hi) = p.bounding_box();
            loop {
                let x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
                if p.contains(&x) {
                    return x;
                }
            }
        }
        Body::Union(parts) => {
            let vols: Vec<f64> = parts.iter().map(|p| p.volume().unwrap_or(0.0)).collect();
            let total: f64 = vols.iter().sum();
            let mut t = rng.random::<f64>() * total;
            for (p, v) in parts.iter().zip(&vols) {
                if t < *v {
                    return uniform_in_body(p, rng);
                }
                t -= v;
            }
            uniform_in_body(parts.last().unwrap(), rng)
        }
    }
}

fn torsion_walk(body: &Body, x0: Vec<f64>, eps: f64, max_steps: usize, rng: &mut ChaCha8Rng) -> (f64, bool) {
    let d = x0.len();
    let mut x = x0;
    let mut acc = 0.0;
    for _ in 0..max_steps {
        let r = body.boundary_distance(&x);
        if r < eps {
            return (acc, false);
        }
        // mean exit time of a ball of radius r is r²/d; u = E[τ]/2
        acc += r * r / (2.0 * d as f64);
        for (xi, ui) in x.iter_mut().zip(uniform_direction(rng, d)) {
            *xi += r * ui;
        }
    }
    (acc, true)
}

/// T(Ω) = |Ω| · E[u(X)] for X uniform in Ω, with u estimated by one walk per
/// sample point.
pub fn wos_torsion(body: &Body, cfg: &WosConfig) -> Result<Estimate> {
    let eps = cfg.resolve_shell(body)?;
    let volume = body.volume()?;
    let stats = run_walkers(cfg.walkers, cfg.seed, TAG_TORSION, |rng| {
        let x = uniform_in_body(body, rng);
        torsion_walk(body, x, eps, cfg.max_steps, rng)
    });
    Ok(Estimate {
        value: volume * stats.mean,
        std_error: volume * stats.std_error(),
        n: stats.n,
        shell_eps: eps,
        truncated: stats.truncated,
        bias_note: format!("walks absorbed at distance {eps:.3e} from the boundary; bias O(shell_eps), downward"),
    })
}

/// Re-entry point on the sphere |y − c| = radius for a walker at `x` outside
/// it, drawn from the harmonic measure seen from `x`: invert `x` into the
/// ball and sample the interior Poisson kernel ∝ |x* − y|^{−d} by rejection.
fn reenter<R: Rng + ?Sized>(rng: &mut R, x: &[f64], c: &[f64], radius: f64) -> Vec<f64> {
    let d = x.len();
    let rel: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
    let r2: f64 = rel.iter().map(|v| v * v).sum();
    let inv: Vec<f64> = rel.iter().map(|v| v * radius * radius / r2).collect();
    let s = (radius * radius) / r2.sqrt();
    loop {
        let y: Vec<f64> = uniform_direction(rng, d).into_iter().map(|u| radius * u).collect();
        let dist = y.iter().zip(&inv).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if rng.random::<f64>() < ((radius - s) / dist).powi(d as i32) {
            return y.iter().zip(c).map(|(a, b)| a + b).collect();
        }
    }
}

/// cap(K) = κ_d R^{d−2} P(hit K) for walkers started uniformly on a sphere
/// S_R enclosing K.
pub fn wos_capacity(body: &Body, cfg: &WosConfig) -> Result<Estimate> {
    body.require_newtonian("Monte Carlo capacity")?;
    let eps = cfg.resolve_shell(body)?;
    let d = body.dim();
    let kappa = ball_constants(d)?.kappa()?;
    let (center, r0) = body.bounding_sphere();
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument("could not enclose the body in a sphere".into()));
    }
    let radius = cfg.launch_factor * r0;
    let escape = cfg.escape_factor * radius;
    let stats = run_walkers(cfg.walkers, cfg.seed, TAG_CAPACITY, |rng| {
        let mut x: Vec<f64> = uniform_direction(rng, d)
            .iter()
            .zip(&center)
            .map(|(u, c)| c + radius * u)
            .collect();
        for _ in 0..cfg.max_steps {
            let dist = body.boundary_distance(&x);
            if dist < eps {
                return (1.0, false);
            }
            let rc = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if rc > escape {
                // the walker ever returns to S_R with probability (R/|x−c|)^{d−2}
                if rng.random::<f64>() >= (radius / rc).powi(d as i32 - 2) {
                    return (0.0, false);
                }
                x = reenter(rng, &x, &center, radius);
                continue;
            }
            for (xi, ui) in x.iter_mut().zip(uniform_direction(rng, d)) {
                *xi += dist * ui;
            }
        }
        (0.0, true)
    });
    let scale = kappa * radius.powi(d as i32 - 2);
    Ok(Estimate {
        value: scale * stats.mean,
        std_error: scale * stats.std_error(),
        n: stats.n,
        shell_eps: eps,
        truncated: stats.truncated,
        bias_note: format!("walks absorbed at distance {eps:.3e} from the body; bias O(shell_eps), upward"),
    })
}

/// Monte Carlo G_q with its components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GqEstimate {
    pub q: f64,
    pub g_q: Estimate,
    pub cap: Estimate,
    pub torsion: Estimate,
    pub measure: f64,
}

/// G_q from independent capacity and torsion runs and the exact measure; the
/// standard error follows from the delta method,
/// (σ_G/G)² = (σ_C/C)² + q²(σ_T/T)².
pub fn g_q_monte_carlo(body: &Body, q: f64, cfg: &WosConfig) -> Result<GqEstimate> {
    let cap = wos_capacity(body, cfg)?;
    let torsion = wos_torsion(body, cfg)?;
    let measure = body.volume()?;
    if !(cap.value > 0.0 && torsion.value > 0.0) {
        return Err(Error::InvalidArgument("Monte Carlo estimate is zero; increase walkers".into()));
    }
    let d = body.dim();
    let value = (cap.value.ln() + q * torsion.value.ln() - measure_exponent(q, d) * measure.ln()).exp();
    let rel = ((cap.std_error / cap.value).powi(2) + (q * torsion.std_error / torsion.value).powi(2)).sqrt();
    Ok(GqEstimate {
        q,
        g_q: Estimate {
            value,
            std_error: value * rel,
            n: cap.n,
            shell_eps: cap.shell_eps,
            truncated: cap.truncated + torsion.truncated,
            bias_note: "delta-method combination of the capacity and torsion runs".into(),
        },
        cap,
        torsion,
        measure,
    })
}
