//! Euclidean distance from a point to the boundary of an axis-aligned ellipsoid.

/// Distance from `y` (local coordinates) to the boundary of the ellipsoid
/// with semi-axes `axes` (sorted descending), valid for points on either side.
///
/// The closest boundary point is `x_i = a_i² y_i / (a_i² + t)` where `t`
/// solves `Σ (a_i y_i / (a_i² + t))² = 1`. We solve in `s = t + a_min²`, on
/// which the secular function is convex and decreasing, by Newton iteration
/// started from a point where it is non-negative, so iterates increase
/// monotonically to the root; a bracketing bisection guards the steps.
///
/// Coordinates are clamped away from zero by `1e-12·a_1`; the result is
/// reduced by the induced perturbation so it stays a lower bound.
pub fn ellipsoid_boundary_distance(axes: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(axes.len(), y.len());
    let a_max = axes[0];
    let a_min = *axes.last().unwrap();
    let floor = 1e-12 * a_max;
    let mut clamped = false;
    let z: Vec<f64> = y
        .iter()
        .map(|v| {
            let v = v.abs();
            if v < floor {
                clamped = true;
                floor
            } else {
                v
            }
        })
        .collect();
    // gaps g_i = a_i² − a_min², computed without cancellation
    let gaps: Vec<f64> = axes.iter().map(|a| (a - a_min) * (a + a_min)).collect();
    let weighted: Vec<f64> = axes.iter().zip(&z).map(|(a, v)| a * v).collect();

    let secular = |s: f64| -> (f64, f64) {
        let mut f = -1.0;
        let mut df = 0.0;
        for (w, g) in weighted.iter().zip(&gaps) {
            let q = w / (s + g);
            f += q * q;
            df -= 2.0 * q * q / (s + g);
        }
        (f, df)
    };

    let z_last = *z.last().unwrap();
    let mut lo = a_min * z_last;
    let mut hi = weighted.iter().map(|w| w * w).sum::<f64>().sqrt();
    if hi < lo {
        hi = lo;
    }
    let mut s = lo;
    for _ in 0..200 {
        let (f, df) = secular(s);
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
        let mut next = s - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-15 * next.abs().max(f64::MIN_POSITIVE) {
            s = next;
            break;
        }
        s = next;
    }

    let t = s - a_min * a_min;
    let scaled: f64 = z
        .iter()
        .zip(&gaps)
        .map(|(v, g)| {
            let q = v / (s + g);
            q * q
        })
        .sum::<f64>()
        .sqrt();
    let mut dist = t.abs() * scaled;
    if clamped {
        dist -= (y.len() as f64).sqrt() * floor;
    }
    dist.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_reduces_to_radial_distance() {
        let axes = [2.0, 2.0, 2.0];
        let d = ellipsoid_boundary_distance(&axes, &[0.3, -0.4, 1.2]);
        let r = (0.09f64 + 0.16 + 1.44).sqrt();
        assert!((d - (2.0 - r)).abs() < 1e-12);
        let d = ellipsoid_boundary_distance(&axes, &[3.0, 4.0, 0.0]);
        assert!((d - 3.0).abs() < 1e-9);
    }

    #[test]
    fn center_of_ellipsoid_is_smallest_axis_away() {
        let d = ellipsoid_boundary_distance(&[3.0, 2.0, 1.0], &[0.0, 0.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn points_on_axes() {
        let axes = [3.0, 2.0, 1.0];
        // outside along the long axis
        let d = ellipsoid_boundary_distance(&axes, &[5.0, 0.0, 0.0]);
        assert!((d - 2.0).abs() < 1e-9, "{d}");
        // inside along the short axis
        let d = ellipsoid_boundary_distance(&axes, &[0.0, 0.0, 0.25]);
        assert!((d - 0.75).abs() < 1e-9, "{d}");
    }

    /// Brute-force oracle: minimise over a dense parametrisation of the boundary (d = 2).
    #[test]
    fn ellipse_matches_dense_boundary_search() {
        let axes = [2.5, 0.7];
        let pts = [[0.1, 0.2], [1.9, 0.3], [3.0, 1.0], [-0.5, 0.65], [0.0, 0.1], [2.4, -0.05]];
        for p in pts {
            let n = 400_000;
            let mut best = f64::INFINITY;
            for k in 0..n {
                let th = std::f64::consts::TAU * k as f64 / n as f64;
                let bx = axes[0] * th.cos();
                let by = axes[1] * th.sin();
                best = best.min(((bx - p[0]).powi(2) + (by - p[1]).powi(2)).sqrt());
            }
            let d = ellipsoid_boundary_distance(&axes, &p);
            assert!((d - best).abs() < 1e-6, "p={p:?}: {d} vs {best}");
        }
    }
}
