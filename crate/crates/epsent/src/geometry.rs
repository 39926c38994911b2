//! Minimum enclosing ball (smallest enclosing circle/sphere) of finite point
//! sets in R^d.
//!
//! The solver is Welzl's randomized incremental algorithm, generalized to
//! d dimensions by solving the circumcenter of up to d+1 boundary points in
//! their affine hull. It is exact at desk scale and
//! deterministic: the internal shuffle is seeded from a hash of the input
//! coordinates, so a fixed input always yields the same ball. Supported up
//! to d = 8.
//!
//! `ball_oracle_bruteforce` is an independent 2-D reference that enumerates
//! every pair-diameter ball and every triple circumcircle; it exists so the
//! incremental solver can be cross-checked.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::model::{euclidean_distance, GEOM_TOL};

/// A d-dimensional ball.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &[f64], tol: f64) -> bool {
        euclidean_distance(&self.center, p) <= self.radius + tol
    }
}

/// The unique minimum enclosing ball of a nonempty point set.
pub fn min_enclosing_ball(points: &[Vec<f64>]) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let dim = points[0].len();
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
    }
    if dim == 1 {
        // Interval case: exact min/max midpoint.
        let mut lo = points[0][0];
        let mut hi = lo;
        for p in points {
            lo = lo.min(p[0]);
            hi = hi.max(p[0]);
        }
        return Ok(Ball { center: vec![(lo + hi) / 2.0], radius: (hi - lo) / 2.0 });
    }

    // Drop exact duplicates; they only slow the recursion down.
    let mut unique: Vec<&[f64]> = Vec::with_capacity(points.len());
    for p in points {
        if !unique.iter().any(|q| q.iter().zip(p).all(|(a, b)| a == b)) {
            unique.push(p);
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(coordinate_hash(points));
    unique.shuffle(&mut rng);

    let mut boundary = Vec::with_capacity(dim + 1);
    Ok(welzl(&mut unique, &mut boundary, dim))
}

/// Order-insensitive FNV-1a hash of the coordinate bit patterns.
fn coordinate_hash(points: &[Vec<f64>]) -> u64 {
    let mut acc = 0u64;
    for p in points {
        let mut h = 0xcbf29ce484222325u64;
        for c in p {
            for b in c.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        acc = acc.wrapping_add(h);
    }
    acc
}

fn welzl(points: &mut [&[f64]], boundary: &mut Vec<Vec<f64>>, dim: usize) -> Ball {
    if points.is_empty() || boundary.len() == dim + 1 {
        return ball_of_boundary(boundary, dim);
    }
    let p = points[0].to_vec();
    let ball = welzl(&mut points[1..], boundary, dim);
    if ball.radius >= 0.0 && ball.contains(&p, 1e-10) {
        return ball;
    }
    boundary.push(p);
    let ball = welzl(&mut points[1..], boundary, dim);
    boundary.pop();
    ball
}

/// Smallest ball with all of `boundary` on its surface, or an invalid
/// sentinel (radius -1) when the set is empty or affinely degenerate.
/// Degenerate boundary sets cannot support a minimal ball, so rejecting
/// them only reroutes the recursion through other supports.
fn ball_of_boundary(boundary: &[Vec<f64>], dim: usize) -> Ball {
    match boundary.len() {
        0 => Ball { center: vec![0.0; dim], radius: -1.0 },
        1 => Ball { center: boundary[0].clone(), radius: 0.0 },
        _ => {
            let b0 = &boundary[0];
            let k = boundary.len() - 1;
            // Solve 2 G mu = h with G the Gram matrix of (b_i - b_0).
            let diffs: Vec<Vec<f64>> = boundary[1..]
                .iter()
                .map(|b| b.iter().zip(b0).map(|(a, c)| a - c).collect())
                .collect();
            let mut mat = vec![vec![0.0; k + 1]; k];
            let mut scale = 0.0f64;
            for i in 0..k {
                for j in 0..k {
                    let g: f64 = diffs[i].iter().zip(&diffs[j]).map(|(a, b)| a * b).sum();
                    mat[i][j] = 2.0 * g;
                    scale = scale.max(g.abs());
                }
                mat[i][k] = diffs[i].iter().map(|v| v * v).sum();
            }
            let mu = match solve_linear(&mut mat, k, scale.max(1.0)) {
                Some(mu) => mu,
                None => return Ball { center: vec![0.0; dim], radius: -1.0 },
            };
            let mut center = b0.clone();
            for (i, m) in mu.iter().enumerate() {
                for (c, d) in center.iter_mut().zip(&diffs[i]) {
                    *c += m * d;
                }
            }
            let radius = euclidean_distance(&center, b0);
            Ball { center, radius }
        }
    }
}

/// Gaussian elimination with partial pivoting on a k x (k+1) augmented
/// matrix. Returns None when a pivot is negligible relative to `scale`.
fn solve_linear(mat: &mut [Vec<f64>], k: usize, scale: f64) -> Option<Vec<f64>> {
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&a, &b| mat[a][col].abs().partial_cmp(&mat[b][col].abs()).unwrap())?;
        if mat[pivot_row][col].abs() < 1e-12 * scale {
            return None;
        }
        mat.swap(col, pivot_row);
        for row in (col + 1)..k {
            let factor = mat[row][col] / mat[col][col];
            for c in col..=k {
                mat[row][c] -= factor * mat[col][c];
            }
        }
    }
    let mut sol = vec![0.0; k];
    for row in (0..k).rev() {
        let mut acc = mat[row][k];
        for c in (row + 1)..k {
            acc -= mat[row][c] * sol[c];
        }
        sol[row] = acc / mat[row][row];
    }
    Some(sol)
}

/// Exact 2-D reference: enumerates every pair-diameter ball and every
/// triple circumcircle and keeps the smallest one covering all points.
/// Quadratic-to-cubic, so capped at 12 points.
pub fn ball_oracle_bruteforce(points: &[Vec<f64>]) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for p in points {
        if p.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
        }
    }
    if points.len() > 12 {
        return Err(Error::PreconditionViolated(format!(
            "brute-force ball oracle caps at 12 points, got {}",
            points.len()
        )));
    }
    if points.len() == 1 {
        return Ok(Ball { center: points[0].clone(), radius: 0.0 });
    }
    let mut best: Option<Ball> = None;
    let mut consider = |ball: Ball| {
        if points.iter().all(|p| ball.contains(p, GEOM_TOL)) {
            match &best {
                Some(b) if b.radius <= ball.radius => {}
                _ => best = Some(ball),
            }
        }
    };
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let center = vec![
                (points[i][0] + points[j][0]) / 2.0,
                (points[i][1] + points[j][1]) / 2.0,
            ];
            let radius = euclidean_distance(&center, &points[i]);
            consider(Ball { center, radius });
        }
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            for l in (j + 1)..points.len() {
                if let Some(ball) = circumcircle(&points[i], &points[j], &points[l]) {
                    consider(ball);
                }
            }
        }
    }
    best.ok_or_else(|| Error::PreconditionViolated("no covering candidate ball".into()))
}

/// Circumcircle of a triangle; None when the triangle is degenerate
/// (area below 1e-12), in which case a pair-diameter ball wins anyway.
fn circumcircle(a: &[f64], b: &[f64], c: &[f64]) -> Option<Ball> {
    let (ax, ay) = (a[0], a[1]);
    let (bx, by) = (b[0], b[1]);
    let (cx, cy) = (c[0], c[1]);
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if d.abs() < 4.0 * 1e-12 {
        return None;
    }
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    let center = vec![ux, uy];
    let radius = euclidean_distance(&center, a);
    Some(Ball { center, radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn pts(v: &[(f64, f64)]) -> Vec<Vec<f64>> {
        v.iter().map(|&(x, y)| vec![x, y]).collect()
    }

    #[test]
    fn single_point_has_zero_radius() {
        let b = min_enclosing_ball(&pts(&[(0.0, 0.0)])).unwrap();
        assert_eq!(b.center, vec![0.0, 0.0]);
        assert_eq!(b.radius, 0.0);
    }

    #[test]
    fn pair_ball_matches_reference_values() {
        let b = min_enclosing_ball(&pts(&[(1.0, 1.0), (2.0, 2.5)])).unwrap();
        assert!((b.center[0] - 1.5).abs() < 1e-12);
        assert!((b.center[1] - 1.75).abs() < 1e-12);
        assert!((b.radius - 13f64.sqrt() / 4.0).abs() < 1e-12);

        let b = min_enclosing_ball(&pts(&[(1.0, 1.0), (3.0, 1.0)])).unwrap();
        assert!((b.center[0] - 2.0).abs() < 1e-12);
        assert!((b.center[1] - 1.0).abs() < 1e-12);
        assert!((b.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_ball_is_circumcircle() {
        let b = min_enclosing_ball(&pts(&[(1.0, 1.0), (2.0, 2.5), (3.0, 1.0)])).unwrap();
        assert!((b.radius - 13.0 / 12.0).abs() < 1e-12, "radius {}", b.radius);
        assert!((b.center[0] - 2.0).abs() < 1e-12);
        assert!((b.center[1] - 17.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_reference_values() {
        let b = ball_oracle_bruteforce(&pts(&[(5.0, -2.0)])).unwrap();
        assert_eq!(b.radius, 0.0);
        let b = ball_oracle_bruteforce(&pts(&[(1.0, 1.0), (2.0, 2.5), (3.0, 1.0)])).unwrap();
        assert!((b.radius - 13.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_wrong_dimension() {
        let err = ball_oracle_bruteforce(&[vec![0.0, 0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn welzl_agrees_with_oracle_on_random_sets() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let points: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]).collect();
            let fast = min_enclosing_ball(&points).unwrap();
            let exact = ball_oracle_bruteforce(&points).unwrap();
            assert!(
                (fast.radius - exact.radius).abs() < 1e-9,
                "radii diverge: {} vs {} on {:?}",
                fast.radius,
                exact.radius,
                points
            );
        }
    }

    #[test]
    fn collinear_points_fall_back_to_diameter() {
        let b = min_enclosing_ball(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])).unwrap();
        assert!((b.radius - 2f64.sqrt()).abs() < 1e-9);
        assert!((b.center[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duplicates_are_harmless() {
        let b = min_enclosing_ball(&pts(&[(1.0, 2.0), (1.0, 2.0), (1.0, 2.0)])).unwrap();
        assert_eq!(b.radius, 0.0);
    }

    #[test]
    fn dimension_one_is_exact_interval() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(1..=10);
            let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-9.0..9.0)]).collect();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in &points {
                lo = lo.min(p[0]);
                hi = hi.max(p[0]);
            }
            let b = min_enclosing_ball(&points).unwrap();
            assert_eq!(b.radius, (hi - lo) / 2.0);
        }
    }

    #[test]
    fn subset_monotonicity_and_translation() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(2..=10);
            let points: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]).collect();
            let full = min_enclosing_ball(&points).unwrap();
            let k = rng.gen_range(1..=n);
            let subset: Vec<Vec<f64>> = points[..k].to_vec();
            let sub = min_enclosing_ball(&subset).unwrap();
            assert!(sub.radius <= full.radius + 1e-12);

            let t = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let shifted: Vec<Vec<f64>> =
                points.iter().map(|p| vec![p[0] + t[0], p[1] + t[1]]).collect();
            let moved = min_enclosing_ball(&shifted).unwrap();
            assert!((moved.radius - full.radius).abs() < 1e-9);
            assert!((moved.center[0] - full.center[0] - t[0]).abs() < 1e-9);
            assert!((moved.center[1] - full.center[1] - t[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn higher_dimensions_cover_all_points_minimally() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for dim in 3..=8 {
            for _ in 0..40 {
                let n = rng.gen_range(1..=dim + 4);
                let points: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
                    .collect();
                let ball = min_enclosing_ball(&points).unwrap();
                for p in &points {
                    assert!(ball.contains(p, 1e-9), "dim {dim}: point outside ball");
                }
                // Minimality: some point must sit near the boundary.
                let max_dist = points
                    .iter()
                    .map(|p| euclidean_distance(p, &ball.center))
                    .fold(0.0f64, f64::max);
                assert!(max_dist >= ball.radius - 1e-6, "ball too large in dim {dim}");
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_input() {
        let points = pts(&[(0.3, 1.2), (4.0, -2.0), (1.0, 1.0), (2.2, 0.4), (3.1, 2.8)]);
        let a = min_enclosing_ball(&points).unwrap();
        let b = min_enclosing_ball(&points).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(min_enclosing_ball(&[]), Err(Error::EmptyPointSet)));
        assert!(matches!(ball_oracle_bruteforce(&[]), Err(Error::EmptyPointSet)));
    }
}
