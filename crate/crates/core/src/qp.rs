//! Small convex quadratic programs over point sets: nearest point of a convex
//! hull (Wolfe's min-norm-point method, a Frank-Wolfe variant with exact
//! affine corrections) and the minimum enclosing ball (away-step Frank-Wolfe
//! on the dual, followed by an exact circumcenter polish).

use nalgebra::{DMatrix, DVector};

use crate::linalg::Vector;

const GAP_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 100_000;

/// Nearest point of `conv(points)` to `p`, returned with its distance.
pub fn nearest_point(p: &Vector, points: &[Vector]) -> (Vector, f64) {
    let q: Vec<Vector> = points.iter().map(|v| v - p).collect();
    let scale = q.iter().map(|v| v.norm_squared()).fold(0.0, f64::max).max(1e-300);

    let start = (0..q.len()).min_by(|&a, &b| q[a].norm_squared().total_cmp(&q[b].norm_squared())).unwrap();
    let mut active: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut x = q[start].clone();

    for _ in 0..MAX_ITERS {
        let (j, xq) = (0..q.len())
            .map(|j| (j, x.dot(&q[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_squared() - xq <= GAP_TOL * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let mu = affine_min_norm(&active, &q);
            if mu.iter().all(|&m| m > 1e-14) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0_f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= 1e-14 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let mut i = 0;
            while i < active.len() {
                if lambda[i] <= 1e-14 {
                    active.remove(i);
                    lambda.remove(i);
                } else {
                    i += 1;
                }
            }
            if active.len() == 1 {
                lambda = vec![1.0];
                break;
            }
        }
        let total: f64 = lambda.iter().sum();
        x = Vector::zeros(p.len());
        for (&i, l) in active.iter().zip(&lambda) {
            x.axpy(l / total, &q[i], 1.0);
        }
    }
    let d = x.norm();
    (x + p, d)
}

/// Minimizer of `|Σ μ_i q_i|` subject to `Σ μ_i = 1` over the active set.
fn affine_min_norm(active: &[usize], q: &[Vector]) -> Vec<f64> {
    let m = active.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            a[(r, c)] = q[i].dot(&q[j]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    let mut b = DVector::zeros(m + 1);
    b[m] = 1.0;
    let sol = a.clone().lu().solve(&b).unwrap_or_else(|| {
        a.svd(true, true).solve(&b, 1e-14).expect("SVD solve of a symmetric system")
    });
    sol.iter().take(m).copied().collect()
}

/// Euclidean distance from `p` to `conv(points)`.
pub fn distance_to_hull(p: &Vector, points: &[Vector]) -> f64 {
    nearest_point(p, points).1
}

/// Smallest enclosing ball of a finite point set: `(radius, center)`.
pub fn min_enclosing_ball(points: &[Vector]) -> (f64, Vector) {
    let m = points.len();
    if m == 1 {
        return (0.0, points[0].clone());
    }
    let dim = points[0].len();
    let mut lambda = vec![1.0 / m as f64; m];
    let mut center = Vector::zeros(dim);
    for p in points {
        center += p / m as f64;
    }
    let scale = points.iter().map(|p| (p - &center).norm_squared()).fold(0.0, f64::max).max(1e-300);

    for _ in 0..MAX_ITERS {
        let d2: Vec<f64> = points.iter().map(|p| (p - &center).norm_squared()).collect();
        let f: f64 = lambda.iter().zip(&d2).map(|(l, d)| l * d).sum();
        let far = (0..m).max_by(|&a, &b| d2[a].total_cmp(&d2[b])).unwrap();
        if d2[far] - f <= GAP_TOL * scale {
            break;
        }
        let near = (0..m)
            .filter(|&i| lambda[i] > 0.0)
            .min_by(|&a, &b| d2[a].total_cmp(&d2[b]))
            .unwrap();
        // toward step to the farthest point, or away step from the nearest active one
        let (i, s) = if d2[far] - f >= f - d2[near] || lambda[near] >= 1.0 {
            (far, ((d2[far] - f) / (2.0 * d2[far])).clamp(0.0, 1.0))
        } else {
            let lo = -lambda[near] / (1.0 - lambda[near]);
            (near, ((d2[near] - f) / (2.0 * d2[near].max(1e-300))).max(lo))
        };
        for l in lambda.iter_mut() {
            *l *= 1.0 - s;
        }
        lambda[i] += s;
        if lambda[i] < 1e-15 {
            lambda[i] = 0.0;
        }
        center = Vector::zeros(dim);
        for (p, l) in points.iter().zip(&lambda) {
            center.axpy(*l, p, 1.0);
        }
    }
    let radius = points.iter().map(|p| (p - &center).norm()).fold(0.0, f64::max);
    if let Some((r, c)) = polish_ball(points, &lambda, radius) {
        return (r, c);
    }
    (radius, center)
}

/// Circumcenter of the active support points, accepted when it is a valid
/// enclosing ball with positive barycentric weights.
fn polish_ball(points: &[Vector], lambda: &[f64], approx: f64) -> Option<(f64, Vector)> {
    let active: Vec<usize> = (0..points.len()).filter(|&i| lambda[i] > 1e-9).collect();
    let m = active.len();
    if m < 2 {
        return None;
    }
    // center = p_0 + Σ_k c_k (p_k − p_0) with |center − p_k| equal for all k
    let p0 = &points[active[0]];
    let e: Vec<Vector> = active[1..].iter().map(|&i| &points[i] - p0).collect();
    let g = DMatrix::from_fn(m - 1, m - 1, |r, c| e[r].dot(&e[c]));
    let rhs = DVector::from_iterator(m - 1, e.iter().map(|v| 0.5 * v.norm_squared()));
    let coef = g.lu().solve(&rhs)?;
    let w0 = 1.0 - coef.sum();
    if w0 < -1e-12 || coef.iter().any(|c| *c < -1e-12) {
        return None;
    }
    let mut center = p0.clone();
    for (c, v) in coef.iter().zip(&e) {
        center.axpy(*c, v, 1.0);
    }
    let radius = points.iter().map(|p| (p - &center).norm()).fold(0.0, f64::max);
    (radius <= approx * (1.0 + 1e-9)).then_some((radius, center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn cube() -> Vec<Vector> {
        (0..8).map(|m| vector(&[(m & 1) as f64, ((m >> 1) & 1) as f64, ((m >> 2) & 1) as f64])).collect()
    }

    #[test]
    fn distance_to_cube_face() {
        let d = distance_to_hull(&vector(&[2.0, 0.5, 0.5]), &cube());
        assert!((d - 1.0).abs() < 1e-9);
        assert!(distance_to_hull(&vector(&[0.3, 0.4, 0.5]), &cube()) < 1e-9);
    }

    #[test]
    fn distance_to_cube_corner() {
        let d = distance_to_hull(&vector(&[2.0, 2.0, 2.0]), &cube());
        assert!((d - 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn enclosing_ball_of_cube() {
        let (r, c) = min_enclosing_ball(&cube());
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((c - vector(&[0.5, 0.5, 0.5])).norm() < 1e-9);
    }

    #[test]
    fn enclosing_ball_ignores_interior_points() {
        let pts = vec![vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.0, 0.5]), vector(&[0.2, -0.3])];
        let (r, c) = min_enclosing_ball(&pts);
        assert!((r - 1.0).abs() < 1e-12);
        assert!(c.norm() < 1e-12);
    }
}
