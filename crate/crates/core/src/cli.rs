//! Argument parsing, config merging and output formatting for `captor`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use capacity_torsion::bounds::{self, format_sig, theorem4_constants, theorem_constants, TheoremConstant};
use capacity_torsion::constructions::{self, Family, SweepSpec};
use capacity_torsion::exact::{self, QuadratureConfig};
use capacity_torsion::geometry::{AxisVector, Body};
use capacity_torsion::montecarlo::{self, Estimate, WosConfig};
use capacity_torsion::optimize::{self, Direction, OptimizeConfig};
use capacity_torsion::verify;
use capacity_torsion::Error;

const SIG: usize = 12;

#[derive(Parser, Debug)]
#[command(name = "captor", version, about = "Capacity-torsion functionals of ellipsoids and convex bodies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Dimension
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Exponent q
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<f64>,
    /// Emit a JSON manifest
    #[arg(long, global = true)]
    json: bool,
    /// Emit CSV
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    walkers: Option<usize>,
    /// Absolute absorption-shell thickness for walk on spheres
    #[arg(long = "eps-shell", global = true)]
    eps_shell: Option<f64>,
    /// Relative tolerance of the capacity quadrature
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// key=value file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Capacity, torsion, measure and G_q (H_q for ellipses) of a body
    Eval(EvalArgs),
    /// Theorem constants at (d, q)
    Bounds(CommonOnly),
    /// Evaluate a construction over a parameter grid
    Sequence(SequenceArgs),
    /// Walk-on-spheres estimates
    Mc(McArgs),
    /// Search for the extremal ellipsoid
    Optimize(OptimizeArgs),
    /// Run the self-check suite
    Verify(CommonOnly),
}

#[derive(Args, Debug)]
pub struct CommonOnly {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated semi-axes of a centred ellipsoid
    #[arg(long, conflicts_with_all = ["ellipse", "body"])]
    ellipsoid: Option<String>,
    /// Semi-axes a1,a2 of a planar ellipse
    #[arg(long, conflicts_with = "body")]
    ellipse: Option<String>,
    /// Body document: inline JSON or a path to a JSON file
    #[arg(long)]
    body: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Pancake,
    Packing,
    Prolate,
    Oblate,
    MultiCollapse,
}

#[derive(Args, Debug)]
pub struct SequenceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Grid: a list `0.1,0.01` or a log range `1e-1..1e-6`
    #[arg(long)]
    eps: Option<String>,
    /// Points per decade for log ranges
    #[arg(long)]
    per_decade: Option<usize>,
    /// Packing sizes: a list `1,2,4` or an inclusive range `1..16`
    #[arg(long)]
    n: Option<String>,
    /// Number of collapsing directions for multi-collapse
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Quantity {
    Capacity,
    Torsion,
    Gq,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    common: Common,
    /// `ball`, `cube`, inline JSON or a path to a JSON file
    #[arg(long)]
    body: Option<String>,
    /// Comma-separated semi-axes of a centred ellipsoid
    #[arg(long, conflicts_with = "body")]
    ellipsoid: Option<String>,
    #[arg(long, value_enum)]
    quantity: Option<Quantity>,
    /// Launch sphere radius as a multiple of the enclosing radius
    #[arg(long)]
    launch_factor: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DirectionArg {
    Max,
    Min,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Aspect-ratio wall (at least 10)
    #[arg(long)]
    wall: Option<f64>,
    /// Comma-separated q values: emit a regime table instead of one report
    #[arg(long, allow_hyphen_values = true)]
    table: Option<String>,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ToleranceNotMet { .. }
            | Error::MveeNoConvergence { .. }
            | Error::Hull(_)
            | Error::LinearProgram(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// What a command produced: text for the terminal and a JSON payload for
/// `--json`; `exit` is nonzero when a verification failed.
pub struct Output {
    pub text: String,
    pub results: Value,
    pub exit: i32,
}

/// Flags merged over the config file.
struct Settings {
    values: BTreeMap<String, String>,
    csv: bool,
}

const CONFIG_KEYS: [&str; 14] = [
    "d", "q", "seed", "walkers", "eps-shell", "tol", "wall", "direction", "family", "eps", "per-decade", "n", "k",
    "launch-factor",
];

impl Settings {
    fn load(common: &Common) -> CliResult<Settings> {
        let mut values = BTreeMap::new();
        if let Some(path) = &common.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Failure::usage(format!("config line {}: expected key=value", n + 1)))?;
                let key = k.trim().replace('_', "-");
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(Failure::usage(format!("config line {}: unknown key {key:?}", n + 1)));
                }
                values.insert(key, v.trim().to_string());
            }
        }
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        };
        set("d", common.d.map(|x| x.to_string()));
        set("q", common.q.map(|x| x.to_string()));
        set("seed", common.seed.map(|x| x.to_string()));
        set("walkers", common.walkers.map(|x| x.to_string()));
        set("eps-shell", common.eps_shell.map(|x| x.to_string()));
        set("tol", common.tol.map(|x| x.to_string()));
        Ok(Settings { values, csv: common.csv })
    }

    fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| Failure::usage(format!("invalid value for {key}: {v:?}"))))
            .transpose()
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?.ok_or_else(|| Failure::usage(format!("missing --{key}")))
    }

    fn quadrature(&self) -> CliResult<QuadratureConfig> {
        let mut cfg = QuadratureConfig::default();
        if let Some(t) = self.get::<f64>("tol")? {
            cfg.rel_tol = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn wos(&self) -> CliResult<WosConfig> {
        let mut cfg = WosConfig::default();
        if let Some(w) = self.get("walkers")? {
            cfg.walkers = w;
        }
        cfg.shell_eps = self.get("eps-shell")?;
        if let Some(s) = self.get("seed")? {
            cfg.seed = s;
        }
        if let Some(l) = self.get("launch-factor")? {
            cfg.launch_factor = l;
        }
        Ok(cfg)
    }

    fn to_json(&self) -> Value {
        json!(self.values)
    }
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::usage(format!("not a number: {x:?}"))))
        .collect()
}

fn parse_grid(s: &str, per_decade: usize) -> CliResult<Vec<f64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_list(a)?[0], parse_list(b)?[0]);
        if !(a > 0.0 && b > 0.0) {
            return Err(Failure::usage("log ranges need positive endpoints"));
        }
        let (la, lb) = (a.log10(), b.log10());
        let steps = ((lb - la).abs() * per_decade as f64).round().max(1.0) as usize;
        Ok((0..=steps)
            .map(|i| 10f64.powf(la + (lb - la) * i as f64 / steps as f64))
            .collect())
    } else {
        parse_list(s)
    }
}

fn parse_ints(s: &str) -> CliResult<Vec<f64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| Failure::usage(format!("bad range start {a:?}")))?;
        let b: usize = b.trim().parse().map_err(|_| Failure::usage(format!("bad range end {b:?}")))?;
        Ok((a.min(b)..=a.max(b)).map(|n| n as f64).collect())
    } else {
        parse_list(s)
    }
}

fn read_body(spec: &str, d: Option<usize>) -> CliResult<Body> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(Path::new(spec))
            .map_err(|e| Failure::usage(format!("cannot read body file {spec}: {e}")))?
    };
    Ok(Body::from_json(&text, d)?)
}

#[derive(Serialize)]
struct Tagged {
    value: f64,
    provenance: &'static str,
}

fn tagged(value: f64, provenance: &'static str) -> Value {
    json!(Tagged { value, provenance })
}

fn line(out: &mut String, name: &str, value: f64, provenance: &str) {
    let _ = writeln!(out, "{name:<14} {:>20}  [{provenance}]", format_sig(value, SIG));
}

fn estimate_line(out: &mut String, name: &str, e: &Estimate) {
    let _ = writeln!(
        out,
        "{name:<14} {:>20} ± {}  [monte-carlo, n = {}, shell {}]",
        format_sig(e.value, SIG),
        format_sig(e.std_error, 4),
        e.n,
        format_sig(e.shell_eps, 4)
    );
}

fn constant_json(c: &TheoremConstant) -> Value {
    let mut v = serde_json::to_value(c).expect("constants serialize");
    if let Value::Object(m) = &mut v {
        m.insert("provenance".into(), json!("bound"));
    }
    v
}

fn constant_line(out: &mut String, name: &str, c: &TheoremConstant) {
    let _ = writeln!(out, "{name:<22} {}  [bound]", c.render(SIG));
}

fn eval(args: &EvalArgs, s: &Settings) -> CliResult<Output> {
    let q: f64 = s.require("q")?;
    let d: Option<usize> = s.get("d")?;
    let cfg = s.quadrature()?;
    let mut text = String::new();

    if let Some(spec) = &args.ellipse {
        let a = parse_list(spec)?;
        if a.len() != 2 {
            return Err(Failure::usage("--ellipse takes two semi-axes"));
        }
        let (a1, a2) = (a[0].max(a[1]), a[0].min(a[1]));
        let v = exact::h_q_ellipse(a1, a2, q)?;
        line(&mut text, "logcap", v.logcap, "exact");
        line(&mut text, "torsion", v.torsion, "exact");
        line(&mut text, "measure", v.measure, "exact");
        line(&mut text, "H_q", v.h_q, "exact");
        let results = json!({
            "kind": "ellipse", "axes": [a1, a2], "q": q,
            "logcap": tagged(v.logcap, "exact"), "torsion": tagged(v.torsion, "exact"),
            "measure": tagged(v.measure, "exact"), "h_q": tagged(v.h_q, "exact"),
        });
        return Ok(Output { text, results, exit: 0 });
    }

    let body = match (&args.ellipsoid, &args.body) {
        (Some(spec), _) => Body::ellipsoid(AxisVector::new(parse_list(spec)?)?),
        (None, Some(spec)) => read_body(spec, d)?,
        (None, None) => return Err(Failure::usage("give --ellipsoid, --ellipse or --body")),
    };
    if let Some(d) = d {
        if d != body.dim() {
            return Err(Error::DimensionMismatch { expected: d, got: body.dim() }.into());
        }
    }
    if body.dim() < 3 {
        return Err(Failure::usage(format!(
            "Newtonian capacity requires d >= 3 (got d = {}); use --ellipse for planar ellipses",
            body.dim()
        )));
    }
    let axes = match &body {
        Body::Ball(b) => Some(AxisVector::uniform(b.center.len(), b.radius)?),
        Body::Ellipsoid(e) => Some(e.axes.clone()),
        _ => None,
    };
    if let Some(a) = axes {
        let v = exact::g_q_ellipsoid(&a, q, &cfg)?;
        line(&mut text, "capacity", v.cap, "quadrature");
        line(&mut text, "torsion", v.torsion, "exact");
        line(&mut text, "measure", v.measure, "exact");
        line(&mut text, "G_q", v.g_q, "quadrature");
        let results = json!({
            "kind": "ellipsoid", "axes": a.as_slice(), "q": q, "d": a.dim(),
            "capacity": tagged(v.cap, "quadrature"), "torsion": tagged(v.torsion, "exact"),
            "measure": tagged(v.measure, "exact"), "g_q": tagged(v.g_q, "quadrature"),
        });
        return Ok(Output { text, results, exit: 0 });
    }
    if let Body::Union(_) = body {
        return Err(Failure::usage("eval has no certified value for unions; use `mc`"));
    }
    let sw = bounds::sandwich_g_q(&body, q, &cfg)?;
    let diam = body.diameter()?;
    line(&mut text, "measure", sw.measure, "exact");
    line(&mut text, "diameter", diam, "exact");
    line(&mut text, "G_q lower", sw.lower, "bound");
    line(&mut text, "G_q upper", sw.upper, "bound");
    let results = json!({
        "kind": "polytope", "q": q, "d": body.dim(),
        "measure": tagged(sw.measure, "exact"), "diameter": tagged(diam, "exact"),
        "g_q_lower": tagged(sw.lower, "bound"), "g_q_upper": tagged(sw.upper, "bound"),
        "inner_axes": sw.inner_axes.as_slice(), "outer_axes": sw.outer_axes.as_slice(),
    });
    Ok(Output { text, results, exit: 0 })
}

fn bounds_cmd(s: &Settings) -> CliResult<Output> {
    let d: usize = s.require("d")?;
    let q: f64 = s.require("q")?;
    let mut text = String::new();
    if d == 2 {
        let c = theorem4_constants(q)?;
        line(&mut text, "H_q(B_1)", c.h_q_ball, "exact");
        constant_line(&mut text, "sup_bound", &c.sup_bound);
        constant_line(&mut text, "max_diam_ratio", &c.max_diam_ratio);
        constant_line(&mut text, "inf_bound", &c.inf_bound);
        constant_line(&mut text, "min_diam_ratio", &c.min_diam_ratio);
        let results = json!({
            "d": 2, "q": q, "h_q_ball": tagged(c.h_q_ball, "exact"),
            "sup_bound": constant_json(&c.sup_bound), "max_diam_ratio": constant_json(&c.max_diam_ratio),
            "inf_bound": constant_json(&c.inf_bound), "min_diam_ratio": constant_json(&c.min_diam_ratio),
        });
        return Ok(Output { text, results, exit: 0 });
    }
    let c = theorem_constants(d, q)?;
    line(&mut text, "q_critical", c.q_critical, "exact");
    line(&mut text, "G_q(B_1)", c.g_q_ball, "exact");
    constant_line(&mut text, "thm2_sup_coeff", &c.thm2_sup_coeff);
    constant_line(&mut text, "thm2_diam_ratio", &c.thm2_diam_ratio);
    constant_line(&mut text, "thm2_d3q1_diam_ratio", &c.thm2_d3q1_diam_ratio);
    constant_line(&mut text, "thm3_inf_coeff", &c.thm3_inf_coeff);
    constant_line(&mut text, "thm3_diam_ratio", &c.thm3_diam_ratio);
    let results = json!({
        "d": d, "q": q,
        "q_critical": tagged(c.q_critical, "exact"), "g_q_ball": tagged(c.g_q_ball, "exact"),
        "thm2_sup_coeff": constant_json(&c.thm2_sup_coeff),
        "thm2_diam_ratio": constant_json(&c.thm2_diam_ratio),
        "thm2_d3q1_diam_ratio": constant_json(&c.thm2_d3q1_diam_ratio),
        "thm3_inf_coeff": constant_json(&c.thm3_inf_coeff),
        "thm3_diam_ratio": constant_json(&c.thm3_diam_ratio),
    });
    Ok(Output { text, results, exit: 0 })
}

fn sequence(args: &SequenceArgs, s: &mut Settings) -> CliResult<Output> {
    s.set("family", args.family.map(|f| format!("{f:?}").to_lowercase()));
    s.set("eps", args.eps.clone());
    s.set("per-decade", args.per_decade.map(|x| x.to_string()));
    s.set("n", args.n.clone());
    s.set("k", args.k.map(|x| x.to_string()));
    let d: usize = s.require("d")?;
    let family_name: String = s.require("family")?;
    let family = match family_name.as_str() {
        "pancake" => Family::Pancake,
        "packing" => Family::BallPacking,
        "prolate" => Family::Prolate,
        "oblate" => Family::Oblate,
        "multicollapse" | "multi-collapse" => Family::MultiCollapse { k: s.require("k")? },
        other => return Err(Failure::usage(format!("unknown family {other:?}"))),
    };
    let q: f64 = match family {
        Family::MultiCollapse { .. } => s.get("q")?.unwrap_or(1.0),
        _ => s.require("q")?,
    };
    let grid = match family {
        Family::BallPacking => parse_ints(&s.get::<String>("n")?.unwrap_or_else(|| "1..8".into()))?,
        _ => parse_grid(
            &s.get::<String>("eps")?.unwrap_or_else(|| "1e-1..1e-6".into()),
            s.get("per-decade")?.unwrap_or(1),
        )?,
    };
    let spec = SweepSpec {
        family,
        grid,
        q,
        d,
        cap_cube: constructions::unit_cube_capacity().value,
    };
    let points = constructions::sweep(&spec, &s.quadrature()?)?;
    let provenance = |p: &constructions::FamilyPoint| if p.exact.is_some() { "quadrature" } else { "bound" };
    let mut text = String::new();
    let _ = writeln!(text, "{:>14} {:>20} {:>11} {:>20} {:>20}", "parameter", "value", "kind", "asymptote", "ratio");
    for p in &points {
        let opt = |x: Option<f64>| x.map(|v| format_sig(v, SIG)).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            text,
            "{:>14} {:>20} {:>11} {:>20} {:>20}",
            format_sig(p.parameter, 6),
            format_sig(p.value, SIG),
            p.bound_kind.as_str(),
            opt(p.asymptote),
            opt(p.ratio())
        );
    }
    let csv = constructions::to_csv(&points);
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            let mut v = serde_json::to_value(p).expect("points serialize");
            if let Value::Object(m) = &mut v {
                m.insert("provenance".into(), json!(provenance(p)));
                m.insert("ratio".into(), json!(p.ratio()));
            }
            v
        })
        .collect();
    Ok(Output {
        text: if s.csv { csv.clone() } else { text },
        results: json!({ "family": family_name, "d": d, "q": q, "points": rows, "csv": csv }),
        exit: 0,
    })
}

fn mc(args: &McArgs, s: &mut Settings) -> CliResult<Output> {
    s.set("launch-factor", args.launch_factor.map(|x| x.to_string()));
    let d: Option<usize> = s.get("d")?;
    let body = match (&args.ellipsoid, args.body.as_deref()) {
        (Some(spec), _) => Body::ellipsoid(AxisVector::new(parse_list(spec)?)?),
        (None, Some("ball")) => Body::ball(d.unwrap_or(3), 1.0)?,
        (None, Some("cube")) => Body::cube(d.unwrap_or(3), 1.0)?,
        (None, Some(spec)) => read_body(spec, d)?,
        (None, None) => return Err(Failure::usage("give --body or --ellipsoid")),
    };
    let mut cfg = s.wos()?;
    // launching from the ball's own boundary would absorb every walker at once
    if matches!(body, Body::Ball(_)) && s.get::<f64>("launch-factor")?.is_none() {
        cfg.launch_factor = 2.0;
    }
    let q: Option<f64> = s.get("q")?;
    let quantity = args.quantity;
    let mut text = String::new();
    let mut results = serde_json::Map::new();
    results.insert("body".into(), json!(body.to_doc()));
    results.insert("walkers".into(), json!(cfg.walkers));
    results.insert("seed".into(), json!(cfg.seed));
    let mut put = |name: &str, e: &Estimate, text: &mut String| {
        estimate_line(text, name, e);
        let mut v = serde_json::to_value(e).expect("estimates serialize");
        if let Value::Object(m) = &mut v {
            m.insert("provenance".into(), json!("monte-carlo"));
        }
        results.insert(name.to_string(), v);
    };
    match (quantity, q) {
        (Some(Quantity::Gq), None) => return Err(Failure::usage("G_q needs --q")),
        (Some(Quantity::Gq), Some(q)) | (None, Some(q)) => {
            let g = montecarlo::g_q_monte_carlo(&body, q, &cfg)?;
            put("capacity", &g.cap, &mut text);
            put("torsion", &g.torsion, &mut text);
            put("g_q", &g.g_q, &mut text);
            line(&mut text, "measure", g.measure, "exact");
            results.insert("measure".into(), tagged(g.measure, "exact"));
            results.insert("q".into(), json!(q));
        }
        (Some(Quantity::Capacity), _) => put("capacity", &montecarlo::wos_capacity(&body, &cfg)?, &mut text),
        (Some(Quantity::Torsion), _) => put("torsion", &montecarlo::wos_torsion(&body, &cfg)?, &mut text),
        (None, None) => {
            put("capacity", &montecarlo::wos_capacity(&body, &cfg)?, &mut text);
            put("torsion", &montecarlo::wos_torsion(&body, &cfg)?, &mut text);
        }
    }
    Ok(Output { text, results: Value::Object(results), exit: 0 })
}

fn optimize_cmd(args: &OptimizeArgs, s: &mut Settings) -> CliResult<Output> {
    s.set(
        "direction",
        args.direction.map(|d| match d {
            DirectionArg::Max => "maximize".to_string(),
            DirectionArg::Min => "minimize".to_string(),
        }),
    );
    s.set("wall", args.wall.map(|x| x.to_string()));
    let d: usize = s.require("d")?;
    let wall: f64 = s.get("wall")?.unwrap_or(optimize::DEFAULT_WALL);
    let mut cfg = OptimizeConfig {
        quadrature: s.quadrature()?,
        ..OptimizeConfig::default()
    };
    if let Some(seed) = s.get("seed")? {
        cfg.seed = seed;
    }
    let mut text = String::new();
    if let Some(table) = &args.table {
        let rows = optimize::regime_table(&parse_list(table)?, d, wall, &cfg)?;
        let mut csv = String::from("q,direction,degenerated,best_value,ratio\n");
        for r in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                format_sig(r.q, SIG),
                r.direction,
                r.degenerated,
                format_sig(r.best_value, SIG),
                format_sig(r.ratio, SIG)
            );
        }
        return Ok(Output {
            text: csv.clone(),
            results: json!({ "d": d, "wall": wall, "rows": rows, "provenance": "quadrature",
                             "note": "ellipsoid-restricted search; values bound the convex extremum from one side" }),
            exit: 0,
        });
    }
    let q: f64 = s.require("q")?;
    let direction: Direction = s
        .get::<String>("direction")?
        .ok_or_else(|| Failure::usage("missing --direction"))?
        .parse()?;
    let report = if d == 2 {
        optimize::optimize_ellipse_planar(q, direction, wall)?
    } else {
        optimize::optimize_ellipsoid(q, d, direction, wall, &cfg)?
    };
    let check = optimize::check_extremal_diam_ratio(&report).ok();
    let provenance = if d == 2 { "exact" } else { "quadrature" };
    let name = if d == 2 { "H_q" } else { "G_q" };
    let _ = writeln!(text, "direction      {direction}");
    let _ = writeln!(
        text,
        "axes           {}",
        report.best_axes.as_slice().iter().map(|a| format_sig(*a, SIG)).collect::<Vec<_>>().join(", ")
    );
    line(&mut text, name, report.best_value, provenance);
    line(&mut text, "aspect ratio", report.aspect_ratio(), provenance);
    let _ = writeln!(text, "degenerated    {}", report.degenerated);
    if let Some(c) = &check {
        let _ = writeln!(
            text,
            "diam/inradius  {} <= {}: {}",
            format_sig(c.ratio, SIG),
            c.bound.render(SIG),
            c.holds
        );
    }
    let _ = writeln!(text, "(search restricted to ellipsoids)");
    Ok(Output {
        text,
        results: json!({ "report": report, "value": tagged(report.best_value, provenance), "diam_ratio_check": check }),
        exit: 0,
    })
}

fn verify_cmd(s: &Settings) -> CliResult<Output> {
    let seed: u64 = s.get("seed")?.unwrap_or(7);
    let report = verify::run_all(seed);
    let mut text = String::new();
    for c in &report.criteria {
        let _ = writeln!(
            text,
            "[{}] {:>2}. {} ({:.1} s): {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            c.elapsed.as_secs_f64(),
            c.detail
        );
    }
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    let _ = writeln!(text, "{} of {} criteria passed", report.criteria.len() - failed, report.criteria.len());
    Ok(Output {
        text,
        results: serde_json::to_value(&report).expect("reports serialize"),
        exit: if report.passed { 0 } else { 1 },
    })
}

fn manifest(argv: &[String], s: &Settings, results: Value) -> Value {
    let timestamp = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse::<u64>().ok());
    json!({
        "tool": "captor",
        "version": env!("CARGO_PKG_VERSION"),
        "command_line": argv,
        "config": s.to_json(),
        "seed": s.values.get("seed").and_then(|v| v.parse::<u64>().ok()),
        "timestamp": timestamp,
        "results": results,
    })
}

/// Runs the parsed command; returns what to print and the exit code.
pub fn run(cli: Cli, argv: &[String]) -> CliResult<(String, i32)> {
    let common = match &cli.command {
        Command::Eval(a) => &a.common,
        Command::Bounds(a) | Command::Verify(a) => &a.common,
        Command::Sequence(a) => &a.common,
        Command::Mc(a) => &a.common,
        Command::Optimize(a) => &a.common,
    };
    let json_out = common.json;
    let mut s = Settings::load(common)?;
    let out = match &cli.command {
        Command::Eval(a) => eval(a, &s)?,
        Command::Bounds(_) => bounds_cmd(&s)?,
        Command::Sequence(a) => sequence(a, &mut s)?,
        Command::Mc(a) => mc(a, &mut s)?,
        Command::Optimize(a) => optimize_cmd(a, &mut s)?,
        Command::Verify(_) => verify_cmd(&s)?,
    };
    let text = if json_out {
        let mut t = serde_json::to_string_pretty(&manifest(argv, &s, out.results)).expect("manifests serialize");
        t.push('\n');
        t
    } else {
        out.text
    };
    Ok((text, out.exit))
}
