//! Vertex-represented convex polytopes.
//!
//! The hull is computed once at construction: a triangulated facet list gives
//! the exact volume (cones over an interior point) and a deduplicated
//! half-space description used for membership, interior distances and the
//! Chebyshev-ball linear program.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use qhull::Qh;

use crate::error::{Error, Result};

/// Closed half-space `normal · x ≤ offset` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Signed distance of `x` to the bounding hyperplane, positive inside.
    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    facets: Vec<Halfspace>,
    volume: f64,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = vertices.first().map(Vec::len).unwrap_or(0);
        if d < 2 {
            return Err(Error::DegeneratePolytope(
                "vertices must have at least two coordinates".into(),
            ));
        }
        if let Some(bad) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DegeneratePolytope("non-finite coordinate".into()));
        }
        if vertices.len() < d + 1 {
            return Err(Error::DegeneratePolytope(format!(
                "{} vertices cannot span dimension {d}",
                vertices.len()
            )));
        }
        let (facets, volume) = hull(&vertices)?;
        Ok(Polytope {
            vertices,
            facets,
            volume,
        })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                best = best.max(dist2(p, q));
            }
        }
        best.sqrt()
    }

    /// Open-set membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.facets.iter().all(|h| h.slack(x) > 0.0)
    }

    /// Membership with an absolute slack `tol` on every facet.
    pub fn contains_with_tolerance(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|h| h.slack(x) >= -tol)
    }

    /// Lower bound on the distance from `x` to the boundary: exact inside,
    /// the largest facet violation outside.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let mut min_slack = f64::INFINITY;
        for h in &self.facets {
            min_slack = min_slack.min(h.slack(x));
        }
        min_slack.abs()
    }

    /// Radius and center of the largest inscribed ball.
    pub fn chebyshev_ball(&self) -> Result<(f64, Vec<f64>)> {
        let d = self.dim();
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let xs: Vec<_> = (0..d)
            .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        let r = lp.add_var(1.0, (0.0, f64::INFINITY));
        for h in &self.facets {
            let mut terms: Vec<_> = xs.iter().copied().zip(h.normal.iter().copied()).collect();
            terms.push((r, 1.0));
            lp.add_constraint(terms.as_slice(), ComparisonOp::Le, h.offset);
        }
        let sol = lp
            .solve()
            .map_err(|e| Error::LinearProgram(e.to_string()))?;
        let center = xs.iter().map(|v| *sol.var_value(*v)).collect();
        Ok((sol.objective(), center))
    }

    pub fn scaled(&self, t: f64) -> Polytope {
        let d = self.dim() as i32;
        Polytope {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|x| x * t).collect())
                .collect(),
            facets: self
                .facets
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal.clone(),
                    offset: h.offset * t,
                })
                .collect(),
            volume: self.volume * t.powi(d),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.vertices {
            for k in 0..d {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }
}

fn hull(points: &[Vec<f64>]) -> Result<(Vec<Halfspace>, f64)> {
    let d = points[0].len();
    let qh = Qh::builder()
        .qhull_args(["Qt"])
        .map_err(|e| Error::Hull(format!("{e:?}")))?
        .build_from_iter(points.iter().map(|p| p.iter().copied()))
        .map_err(|e| Error::DegeneratePolytope(format!("qhull: {e:?}")))?;

    let n = points.len() as f64;
    let interior: Vec<f64> = (0..d)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n)
        .collect();
    let factorial: f64 = (1..=d).map(|k| k as f64).product();

    let mut volume = 0.0;
    let mut facets: Vec<Halfspace> = Vec::new();
    for f in qh.facets() {
        let Some(normal) = f.normal() else { continue };
        let verts: Vec<usize> = f
            .vertices()
            .map(|set| set.iter().filter_map(|v| v.index(&qh)).collect())
            .unwrap_or_default();
        if verts.len() != d {
            return Err(Error::Hull(format!(
                "expected simplicial facet with {d} vertices, got {}",
                verts.len()
            )));
        }
        let m = DMatrix::from_fn(d, d, |r, c| points[verts[c]][r] - interior[r]);
        volume += m.determinant().abs() / factorial;

        let h = Halfspace {
            normal: normal.to_vec(),
            offset: -f.offset(),
        };
        let duplicate = facets.iter().any(|g| {
            (g.offset - h.offset).abs() <= 1e-12 * (1.0 + h.offset.abs())
                && g.normal
                    .iter()
                    .zip(&h.normal)
                    .all(|(a, b)| (a - b).abs() <= 1e-12)
        });
        if !duplicate {
            facets.push(h);
        }
    }
    if !(volume > 0.0) || facets.len() < d + 1 {
        return Err(Error::DegeneratePolytope("zero volume".into()));
    }
    Ok((facets, volume))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Vertices of the axis-aligned cube `[0, side]^d`.
pub fn cube_vertices(d: usize, side: f64) -> Vec<Vec<f64>> {
    (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|k| if mask >> k & 1 == 1 { side } else { 0.0 })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube() {
        let p = Polytope::new(cube_vertices(3, 1.0)).unwrap();
        assert!((p.volume() - 1.0).abs() < 1e-12);
        assert_eq!(p.facets().len(), 6);
        assert!((p.diameter() - 3f64.sqrt()).abs() < 1e-12);
        let (r, c) = p.chebyshev_ball().unwrap();
        assert!((r - 0.5).abs() < 1e-9);
        for x in c {
            assert!((x - 0.5).abs() < 1e-9);
        }
        assert!(p.contains(&[0.5, 0.5, 0.5]));
        assert!(!p.contains(&[1.5, 0.5, 0.5]));
        assert!((p.boundary_distance(&[0.2, 0.5, 0.5]) - 0.2).abs() < 1e-12);
        assert!((p.boundary_distance(&[1.3, 0.5, 0.5]) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn simplex_volume_and_interior_points() {
        let mut pts = vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        pts.push(vec![0.1, 0.1, 0.1, 0.1]);
        let p = Polytope::new(pts).unwrap();
        assert!((p.volume() - 1.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn flat_input_is_rejected() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(
            Polytope::new(pts),
            Err(Error::DegeneratePolytope(_))
        ));
        assert!(Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn scaling_is_consistent_with_rebuild() {
        let p = Polytope::new(cube_vertices(3, 1.0)).unwrap();
        let s = p.scaled(3.0);
        let rebuilt = Polytope::new(cube_vertices(3, 3.0)).unwrap();
        assert!((s.volume() - 27.0).abs() < 1e-10);
        assert!((s.volume() - rebuilt.volume()).abs() < 1e-10);
        assert!((s.boundary_distance(&[1.0, 1.5, 1.5]) - 1.0).abs() < 1e-12);
    }
}
