//! Minimum-volume enclosing ellipsoids and the John sandwich.
//!
//! The MVEE is computed by Khachiyan's multiplicative-weights scheme on the
//! lifted points `(p, 1)`, with Todd–Yildirim away steps. For weights `u`
//! with mean `c` and covariance `Σ`, the returned outer ellipsoid is
//! `{x : (x−c)ᵀΣ⁻¹(x−c) ≤ R²}` where `R² = max_i (p_i−c)ᵀΣ⁻¹(p_i−c)`, so it
//! contains every point by construction. Along any direction `w` the points
//! have weighted mean zero, variance `σ² = wᵀΣw` and magnitude at most `Rσ`,
//! hence (Bhatia–Davis) their maximum is at least `σ/R`: the outer ellipsoid
//! shrunk by `R²` lies in the convex hull. At the optimum `R² = d`, which is
//! the factor of John's theorem; away from it `R² ≥ d`, so the inner ellipsoid
//! reported here is always certified.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::AxisVector;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 1_000_000;
const REFRESH_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MveeResult {
    pub center: Vec<f64>,
    /// `M` with ellipsoid `{x : (x−c)ᵀ M (x−c) ≤ 1}`.
    pub shape_matrix: Vec<Vec<f64>>,
    pub semi_axes: AxisVector,
    /// Unit principal directions, aligned with `semi_axes`.
    pub principal_axes: Vec<Vec<f64>>,
    /// `1/R²`: the outer ellipsoid scaled by this factor about the center lies
    /// in the hull. Equals `1/d` at exact optimality.
    pub inner_factor: f64,
    pub iterations: usize,
    pub gap: f64,
}

impl MveeResult {
    /// `(x−c)ᵀ M (x−c)`; at most 1 on the closed outer ellipsoid.
    pub fn level(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.shape_matrix
            .iter()
            .zip(&y)
            .map(|(row, yi)| yi * row.iter().zip(&y).map(|(m, yj)| m * yj).sum::<f64>())
            .sum()
    }

    /// Axes of the certified inner ellipsoid.
    pub fn inner_axes(&self) -> AxisVector {
        self.semi_axes.scaled(self.inner_factor)
    }

    /// Point of the ellipsoid scaled by `s` whose principal coordinates are
    /// `s·a_k·z_k` for a unit vector `z`.
    pub fn point_on_scaled(&self, z: &[f64], s: f64) -> Vec<f64> {
        let mut x = self.center.clone();
        for (k, dir) in self.principal_axes.iter().enumerate() {
            let w = s * self.semi_axes.as_slice()[k] * z[k];
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi += w * di;
            }
        }
        x
    }
}

/// Minimum-volume enclosing ellipsoid of `points` to relative gap `tol`.
pub fn mvee(points: &[Vec<f64>], tol: f64) -> Result<MveeResult> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::InvalidArgument(format!("tol must lie in (0, 1e-2], got {tol}")));
    }
    let d = points.first().map(Vec::len).unwrap_or(0);
    if d == 0 {
        return Err(Error::MveeDegenerate("no points".into()));
    }
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::MveeDegenerate("non-finite coordinate".into()));
    }
    let n = points.len();
    if n < d + 1 {
        return Err(Error::MveeDegenerate(format!("{n} points cannot span dimension {d}")));
    }

    // work in centred, unit-scaled coordinates for conditioning
    let shift: Vec<f64> = (0..d).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
    let scale = points
        .iter()
        .flat_map(|p| p.iter().zip(&shift).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::MveeDegenerate("all points coincide".into()));
    }
    let lifted: Vec<DVector<f64>> = points
        .iter()
        .map(|p| {
            DVector::from_iterator(
                d + 1,
                p.iter().zip(&shift).map(|(a, b)| (a - b) / scale).chain(std::iter::once(1.0)),
            )
        })
        .collect();

    let m = (d + 1) as f64;
    let mut u = vec![1.0 / n as f64; n];
    let (mut xinv, mut kappa) = refresh(&lifted, &u)?;
    let mut iterations = 0;
    let mut gap;
    loop {
        let (jp, kmax) = argmax(&kappa);
        let (jm, kmin) = kappa
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .fold((0, f64::INFINITY), |best, (i, k)| if *k < best.1 { (i, *k) } else { best });
        let eps_plus = kmax / m - 1.0;
        let eps_minus = 1.0 - kmin / m;
        gap = eps_plus.max(eps_minus);
        if gap <= tol {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::MveeNoConvergence { iterations, gap });
        }
        iterations += 1;

        let (j, mut tau) = if eps_plus >= eps_minus {
            (jp, (kmax - m) / (m * (kmax - 1.0)))
        } else {
            (jm, (kmin - m) / (m * (kmin - 1.0)))
        };
        if tau < 0.0 {
            tau = tau.max(-u[j] / (1.0 - u[j]));
        }
        if tau == 0.0 || !tau.is_finite() {
            break;
        }
        for w in u.iter_mut() {
            *w *= 1.0 - tau;
        }
        u[j] += tau;
        if u[j] < 1e-300 {
            u[j] = 0.0;
        }

        if iterations % REFRESH_EVERY == 0 {
            (xinv, kappa) = refresh(&lifted, &u)?;
        } else {
            // Sherman–Morrison for X' = (1−τ)X + τ q_j q_jᵀ
            let kj = kappa[j];
            let xq = &xinv * &lifted[j];
            let denom = (1.0 - tau) + tau * kj;
            let inv1 = 1.0 / (1.0 - tau);
            for (ki, qi) in kappa.iter_mut().zip(&lifted) {
                let s = qi.dot(&xq);
                *ki = inv1 * (*ki - tau * s * s / denom);
            }
            xinv = (&xinv - (&xq * xq.transpose()) * (tau / denom)) * inv1;
        }
    }

    // centre and covariance in working coordinates
    let mut c = vec![0.0; d];
    for (w, q) in u.iter().zip(&lifted) {
        for k in 0..d {
            c[k] += w * q[k];
        }
    }
    let mut sigma = DMatrix::<f64>::zeros(d, d);
    for (w, q) in u.iter().zip(&lifted) {
        if *w == 0.0 {
            continue;
        }
        let y = DVector::from_iterator(d, (0..d).map(|k| q[k] - c[k]));
        sigma += (&y * y.transpose()) * *w;
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::MveeDegenerate("points do not span the space".into()))?;
    let sigma_inv = chol.inverse();
    let r2 = lifted
        .iter()
        .map(|q| {
            let y = DVector::from_iterator(d, (0..d).map(|k| q[k] - c[k]));
            y.dot(&(&sigma_inv * &y))
        })
        .fold(0.0, f64::max);

    let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| sigma[(i, j)]).collect()).collect();
    let (eig, vecs) = symmetric_eigen(&rows);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|a, b| eig[*b].total_cmp(&eig[*a]));
    if eig[order[d - 1]] <= 0.0 {
        return Err(Error::MveeDegenerate("covariance is singular".into()));
    }
    let axes: Vec<f64> = order.iter().map(|&k| scale * (r2 * eig[k]).sqrt()).collect();
    let principal_axes: Vec<Vec<f64>> = order.iter().map(|&k| (0..d).map(|i| vecs[i][k]).collect()).collect();
    let s2 = scale * scale;
    let shape_matrix = (0..d)
        .map(|i| (0..d).map(|j| sigma_inv[(i, j)] / (r2 * s2)).collect())
        .collect();
    let center = c.iter().zip(&shift).map(|(ci, si)| ci * scale + si).collect();

    Ok(MveeResult {
        center,
        shape_matrix,
        semi_axes: AxisVector::new(axes)?,
        principal_axes,
        inner_factor: 1.0 / r2,
        iterations,
        gap,
    })
}

fn refresh(lifted: &[DVector<f64>], u: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let dim = lifted[0].len();
    let mut x = DMatrix::<f64>::zeros(dim, dim);
    for (w, q) in u.iter().zip(lifted) {
        if *w > 0.0 {
            x += (q * q.transpose()) * *w;
        }
    }
    let chol = x
        .cholesky()
        .ok_or_else(|| Error::MveeDegenerate("affine hull has dimension below d".into()))?;
    let xinv = chol.inverse();
    let kappa: Vec<f64> = lifted.iter().map(|q| q.dot(&(&xinv * q))).collect();
    if kappa.iter().any(|k| !k.is_finite()) || kappa.iter().fold(0.0f64, |a, k| a.max(*k)) > 1e14 {
        return Err(Error::MveeDegenerate("affine hull has dimension below d".into()));
    }
    Ok((xinv, kappa))
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if *x > best.1 { (i, *x) } else { best })
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi sweeps.
/// Returns eigenvalues and the matrix whose columns are eigenvectors.
pub fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Certified `(inner, outer)` semi-axes of the John sandwich of the hull of
/// `points`. Position and orientation are dropped.
pub fn sandwich_axes(points: &[Vec<f64>], tol: f64) -> Result<(AxisVector, AxisVector)> {
    let r = mvee(points, tol)?;
    Ok((r.inner_axes(), r.semi_axes))
}
