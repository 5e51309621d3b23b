//! Balls, ellipsoids, polytopes and their elementary measurements.

mod distance;
pub mod polytope;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_newtonian, Error, Result};
use crate::special::ln_gamma;

pub use distance::ellipsoid_boundary_distance;
pub use polytope::{cube_vertices, Halfspace, Polytope};

/// Measure, torsion and capacity of the unit ball in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallConstants {
    pub d: usize,
    /// ω_d = π^{d/2} / Γ((d+2)/2)
    pub omega: f64,
    /// τ_d = ω_d / (d(d+2))
    pub tau: f64,
    kappa: Option<f64>,
}

impl BallConstants {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall {
                what: "ball constants",
                required: 2,
                got: d,
            });
        }
        let df = d as f64;
        let omega = (0.5 * df * PI.ln() - ln_gamma(0.5 * df + 1.0)).exp();
        let tau = omega / (df * (df + 2.0));
        let kappa = (d >= 3).then(|| (4f64.ln() + 0.5 * df * PI.ln() - ln_gamma(0.5 * df - 1.0)).exp());
        Ok(BallConstants { d, omega, tau, kappa })
    }

    /// κ_d = 4π^{d/2} / Γ((d−2)/2), the capacity of the closed unit ball.
    pub fn kappa(&self) -> Result<f64> {
        self.kappa.ok_or(Error::DimensionTooSmall {
            what: "Newtonian capacity",
            required: 3,
            got: self.d,
        })
    }
}

pub fn ball_constants(d: usize) -> Result<BallConstants> {
    BallConstants::new(d)
}

/// Semi-axes of an ellipsoid, stored in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AxisVector(Vec<f64>);

impl AxisVector {
    pub fn new(mut axes: Vec<f64>) -> Result<Self> {
        if axes.len() < 2 {
            return Err(Error::DimensionTooSmall {
                what: "an axis vector",
                required: 2,
                got: axes.len(),
            });
        }
        if let Some(bad) = axes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "semi-axes must be positive and finite, got {bad}"
            )));
        }
        axes.sort_by(|a, b| b.total_cmp(a));
        Ok(AxisVector(axes))
    }

    /// All semi-axes equal to `r`.
    pub fn uniform(d: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn largest(&self) -> f64 {
        self.0[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.0.last().unwrap()
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.largest() / self.smallest()
    }

    pub fn product(&self) -> f64 {
        self.ln_product().exp()
    }

    pub fn ln_product(&self) -> f64 {
        self.0.iter().map(|a| a.ln()).sum()
    }

    pub fn scaled(&self, t: f64) -> AxisVector {
        AxisVector(self.0.iter().map(|a| a * t).collect())
    }

    /// Rescaled so that the product of the semi-axes is 1.
    pub fn normalized(&self) -> AxisVector {
        self.scaled((-self.ln_product() / self.dim() as f64).exp())
    }
}

impl TryFrom<Vec<f64>> for AxisVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        AxisVector::new(v)
    }
}

impl From<AxisVector> for Vec<f64> {
    fn from(a: AxisVector) -> Self {
        a.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Ellipsoid `{x : Σ (R(x−c))_i² / a_i² < 1}`; rows of `R` are the principal directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub axes: AxisVector,
    pub center: Vec<f64>,
    pub rotation: Option<Vec<Vec<f64>>>,
}

impl Ellipsoid {
    /// Coordinates of `x` in the principal frame.
    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        match &self.rotation {
            None => shifted,
            Some(rows) => rows.iter().map(|r| polytope::dot(r, &shifted)).collect(),
        }
    }

    pub fn to_global(&self, y: &[f64]) -> Vec<f64> {
        let d = y.len();
        let mut x = self.center.clone();
        match &self.rotation {
            None => x.iter_mut().zip(y).for_each(|(a, b)| *a += b),
            Some(rows) => {
                for (k, row) in rows.iter().enumerate() {
                    for j in 0..d {
                        x[j] += row[j] * y[k];
                    }
                }
            }
        }
        x
    }
}

/// Interior radius, either exact or bracketed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Inradius {
    Exact { value: f64 },
    Bounds { lower: f64, upper: f64 },
}

impl Inradius {
    pub fn lower(&self) -> f64 {
        match *self {
            Inradius::Exact { value } => value,
            Inradius::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Inradius::Exact { value } => value,
            Inradius::Bounds { upper, .. } => upper,
        }
    }
}

/// Shapes accepted by the functionals.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
    Union(Vec<Body>),
}

impl Body {
    pub fn ball(d: usize, radius: f64) -> Result<Body> {
        Body::ball_at(vec![0.0; d], radius)
    }

    pub fn ball_at(center: Vec<f64>, radius: f64) -> Result<Body> {
        if center.len() < 2 {
            return Err(Error::DimensionTooSmall {
                what: "a ball",
                required: 2,
                got: center.len(),
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Body::Ball(Ball { center, radius }))
    }

    pub fn ellipsoid(axes: AxisVector) -> Body {
        let d = axes.dim();
        Body::Ellipsoid(Ellipsoid {
            axes,
            center: vec![0.0; d],
            rotation: None,
        })
    }

    /// Ellipsoid with arbitrary center and principal frame. `axes[k]` is the
    /// semi-axis along `rotation[k]`; both are reordered together.
    pub fn ellipsoid_at(
        axes: Vec<f64>,
        center: Vec<f64>,
        rotation: Option<Vec<Vec<f64>>>,
    ) -> Result<Body> {
        let d = axes.len();
        if center.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: center.len() });
        }
        let rotation = match rotation {
            None => None,
            Some(rows) => {
                check_orthonormal(&rows, d)?;
                let mut paired: Vec<(f64, Vec<f64>)> = axes.iter().copied().zip(rows).collect();
                paired.sort_by(|a, b| b.0.total_cmp(&a.0));
                Some(paired.into_iter().map(|(_, r)| r).collect())
            }
        };
        Ok(Body::Ellipsoid(Ellipsoid {
            axes: AxisVector::new(axes)?,
            center,
            rotation,
        }))
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Body> {
        Ok(Body::Polytope(Polytope::new(vertices)?))
    }

    /// The cube `[0, side]^d`.
    pub fn cube(d: usize, side: f64) -> Result<Body> {
        Body::polytope(cube_vertices(d, side))
    }

    /// Disjoint union; nested unions are flattened. Parts may touch but their
    /// interiors must be separated by a bounding-sphere or bounding-box test.
    pub fn union(parts: Vec<Body>) -> Result<Body> {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Body::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.is_empty() {
            return Err(Error::InvalidArgument("empty union".into()));
        }
        let d = flat[0].dim();
        if let Some(bad) = flat.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
        }
        for i in 0..flat.len() {
            for j in i + 1..flat.len() {
                if !separated(&flat[i], &flat[j]) {
                    return Err(Error::NotDisjoint(format!("parts {i} and {j}")));
                }
            }
        }
        Ok(Body::Union(flat))
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Ball(b) => b.center.len(),
            Body::Ellipsoid(e) => e.axes.dim(),
            Body::Polytope(p) => p.dim(),
            Body::Union(parts) => parts[0].dim(),
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Body::Union(_))
    }

    pub fn volume(&self) -> Result<f64> {
        let d = self.dim();
        let omega = BallConstants::new(d)?.omega;
        Ok(match self {
            Body::Ball(b) => omega * b.radius.powi(d as i32),
            Body::Ellipsoid(e) => omega * e.axes.product(),
            Body::Polytope(p) => p.volume(),
            Body::Union(parts) => {
                let mut total = 0.0;
                for p in parts {
                    total += p.volume()?;
                }
                total
            }
        })
    }

    pub fn diameter(&self) -> Result<f64> {
        match self {
            Body::Ball(b) => Ok(2.0 * b.radius),
            Body::Ellipsoid(e) => Ok(2.0 * e.axes.largest()),
            Body::Polytope(p) => Ok(p.diameter()),
            Body::Union(_) => Err(Error::UnsupportedBody("diameter of a union")),
        }
    }

    /// Exact for balls, ellipsoids and polytopes with d ≤ 4; polytopes in
    /// higher dimension get the bracket from the enclosing-ellipsoid sandwich.
    pub fn inradius(&self) -> Result<Inradius> {
        match self {
            Body::Ball(b) => Ok(Inradius::Exact { value: b.radius }),
            Body::Ellipsoid(e) => Ok(Inradius::Exact { value: e.axes.smallest() }),
            Body::Polytope(p) if p.dim() <= 4 => {
                let (r, _) = p.chebyshev_ball()?;
                Ok(Inradius::Exact { value: r })
            }
            Body::Polytope(p) => {
                let (inner, outer) = crate::john::sandwich_axes(p.vertices(), crate::john::DEFAULT_TOL)?;
                Ok(Inradius::Bounds {
                    lower: inner.smallest(),
                    upper: outer.smallest(),
                })
            }
            Body::Union(_) => Err(Error::UnsupportedBody("inradius of a union")),
        }
    }

    /// Homothety `x ↦ t·x` about the origin.
    pub fn scale(&self, t: f64) -> Result<Body> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {t}")));
        }
        Ok(match self {
            Body::Ball(b) => Body::Ball(Ball {
                center: b.center.iter().map(|c| c * t).collect(),
                radius: b.radius * t,
            }),
            Body::Ellipsoid(e) => Body::Ellipsoid(Ellipsoid {
                axes: e.axes.scaled(t),
                center: e.center.iter().map(|c| c * t).collect(),
                rotation: e.rotation.clone(),
            }),
            Body::Polytope(p) => Body::Polytope(p.scaled(t)),
            Body::Union(parts) => Body::Union(
                parts.iter().map(|p| p.scale(t)).collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    /// Open-set membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Body::Ball(b) => polytope::dist2(x, &b.center) < b.radius * b.radius,
            Body::Ellipsoid(e) => {
                let y = e.to_local(x);
                y.iter()
                    .zip(e.axes.as_slice())
                    .map(|(v, a)| (v / a) * (v / a))
                    .sum::<f64>()
                    < 1.0
            }
            Body::Polytope(p) => p.contains(x),
            Body::Union(parts) => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Lower bound on the Euclidean distance from `x` to the boundary.
    /// Exact for balls and ellipsoids (up to root-finding tolerance) and for
    /// polytopes from inside.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Body::Ball(b) => (polytope::dist2(x, &b.center).sqrt() - b.radius).abs(),
            Body::Ellipsoid(e) => ellipsoid_boundary_distance(e.axes.as_slice(), &e.to_local(x)),
            Body::Polytope(p) => p.boundary_distance(x),
            Body::Union(parts) => match parts.iter().find(|p| p.contains(x)) {
                Some(p) => p.boundary_distance(x),
                None => parts
                    .iter()
                    .map(|p| p.boundary_distance(x))
                    .fold(f64::INFINITY, f64::min),
            },
        }
    }

    /// Some sphere `(center, radius)` containing the closure.
    pub fn bounding_sphere(&self) -> (Vec<f64>, f64) {
        match self {
            Body::Ball(b) => (b.center.clone(), b.radius),
            Body::Ellipsoid(e) => (e.center.clone(), e.axes.largest()),
            Body::Polytope(p) => {
                let (lo, hi) = p.bounding_box();
                let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let r = p
                    .vertices()
                    .iter()
                    .map(|v| polytope::dist2(v, &c))
                    .fold(0.0, f64::max)
                    .sqrt();
                (c, r)
            }
            Body::Union(parts) => {
                let spheres: Vec<_> = parts.iter().map(|p| p.bounding_sphere()).collect();
                let d = self.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for (c, r) in &spheres {
                    for k in 0..d {
                        lo[k] = lo[k].min(c[k] - r);
                        hi[k] = hi[k].max(c[k] + r);
                    }
                }
                let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let r = spheres
                    .iter()
                    .map(|(ci, ri)| polytope::dist2(ci, &c).sqrt() + ri)
                    .fold(0.0, f64::max);
                (c, r)
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Body::Ball(b) => (
                b.center.iter().map(|c| c - b.radius).collect(),
                b.center.iter().map(|c| c + b.radius).collect(),
            ),
            Body::Ellipsoid(e) => {
                let d = e.axes.dim();
                let a = e.axes.as_slice();
                let half: Vec<f64> = match &e.rotation {
                    None => a.to_vec(),
                    Some(rows) => (0..d)
                        .map(|j| (0..d).map(|k| (a[k] * rows[k][j]).powi(2)).sum::<f64>().sqrt())
                        .collect(),
                };
                (
                    e.center.iter().zip(&half).map(|(c, h)| c - h).collect(),
                    e.center.iter().zip(&half).map(|(c, h)| c + h).collect(),
                )
            }
            Body::Polytope(p) => p.bounding_box(),
            Body::Union(parts) => {
                let d = self.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for p in parts {
                    let (l, h) = p.bounding_box();
                    for k in 0..d {
                        lo[k] = lo[k].min(l[k]);
                        hi[k] = hi[k].max(h[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Parses a body document. `default_dim` supplies the dimension of balls
    /// that carry neither `dim` nor `center`.
    pub fn from_json(text: &str, default_dim: Option<usize>) -> Result<Body> {
        let doc: BodyDoc = serde_json::from_str(text)?;
        Body::from_doc(doc, default_dim)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("body documents always serialize")
    }

    pub fn from_doc(doc: BodyDoc, default_dim: Option<usize>) -> Result<Body> {
        match doc {
            BodyDoc::Ball { radius, dim, center } => {
                let center = match (center, dim.or(default_dim)) {
                    (Some(c), Some(d)) if c.len() != d => {
                        return Err(Error::DimensionMismatch { expected: d, got: c.len() })
                    }
                    (Some(c), _) => c,
                    (None, Some(d)) => vec![0.0; d],
                    (None, None) => {
                        return Err(Error::Parse("ball needs \"dim\", \"center\" or a default dimension".into()))
                    }
                };
                Body::ball_at(center, radius)
            }
            BodyDoc::Ellipsoid { axes, center, rotation } => {
                let d = axes.len();
                Body::ellipsoid_at(axes, center.unwrap_or_else(|| vec![0.0; d]), rotation)
            }
            BodyDoc::Vpolytope { vertices } => Body::polytope(vertices),
            BodyDoc::Union { parts } => Body::union(
                parts
                    .into_iter()
                    .map(|p| Body::from_doc(p, default_dim))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    pub fn to_doc(&self) -> BodyDoc {
        let nonzero = |c: &Vec<f64>| c.iter().any(|x| *x != 0.0).then(|| c.clone());
        match self {
            Body::Ball(b) => BodyDoc::Ball {
                radius: b.radius,
                dim: Some(b.center.len()),
                center: nonzero(&b.center),
            },
            Body::Ellipsoid(e) => BodyDoc::Ellipsoid {
                axes: e.axes.as_slice().to_vec(),
                center: nonzero(&e.center),
                rotation: e.rotation.clone(),
            },
            Body::Polytope(p) => BodyDoc::Vpolytope {
                vertices: p.vertices().to_vec(),
            },
            Body::Union(parts) => BodyDoc::Union {
                parts: parts.iter().map(Body::to_doc).collect(),
            },
        }
    }

    /// Capacity precondition shared by the Newtonian routines.
    pub fn require_newtonian(&self, what: &'static str) -> Result<()> {
        require_newtonian(what, self.dim())
    }
}

/// JSON form of a [`Body`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodyDoc {
    Ball {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Ellipsoid {
        axes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<Vec<Vec<f64>>>,
    },
    Vpolytope {
        vertices: Vec<Vec<f64>>,
    },
    Union {
        parts: Vec<BodyDoc>,
    },
}

fn check_orthonormal(rows: &[Vec<f64>], d: usize) -> Result<()> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument(format!("rotation must be {d}x{d}")));
    }
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            if (polytope::dot(&rows[i], &rows[j]) - target).abs() > 1e-9 {
                return Err(Error::InvalidArgument("rotation rows are not orthonormal".into()));
            }
        }
    }
    Ok(())
}

fn separated(a: &Body, b: &Body) -> bool {
    let (ca, ra) = a.bounding_sphere();
    let (cb, rb) = b.bounding_sphere();
    let slack = 1e-12 * (ra + rb);
    if polytope::dist2(&ca, &cb).sqrt() >= ra + rb - slack {
        return true;
    }
    let (la, ha) = a.bounding_box();
    let (lb, hb) = b.bounding_box();
    (0..a.dim()).any(|k| ha[k] <= lb[k] + slack || hb[k] <= la[k] + slack)
}
