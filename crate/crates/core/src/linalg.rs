//! Small dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub fn vector(coords: &[f64]) -> Vector {
    DVector::from_column_slice(coords)
}

pub fn unit(dim: usize, axis: usize) -> Vector {
    let mut v = DVector::zeros(dim);
    v[axis] = 1.0;
    v
}

/// Orthonormalizes `vectors` by modified Gram-Schmidt with one
/// re-orthogonalization pass, dropping vectors whose residual norm falls
/// below `tol`.
pub fn orthonormalize(vectors: &[Vector], tol: f64) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
        }
        let norm = r.norm();
        if norm > tol {
            basis.push(r / norm);
        }
    }
    basis
}

/// Orthonormal frame of the affine hull of `points`: returns the origin
/// (first point) and a basis of the direction space.
pub fn affine_frame(points: &[Vector], tol: f64) -> (Vector, Vec<Vector>) {
    let origin = points[0].clone();
    let dim = origin.len();
    let mut basis: Vec<Vector> = Vec::new();
    // Greedy choice of the farthest residual keeps the basis well conditioned.
    loop {
        if basis.len() == dim {
            break;
        }
        let mut best: Option<(f64, Vector)> = None;
        for p in points {
            let mut r = p - &origin;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
            }
            let n = r.norm();
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, r));
            }
        }
        match best {
            Some((n, r)) if n > tol => basis.push(r / n),
            _ => break,
        }
    }
    (origin, basis)
}

/// Unit normal of the hyperplane through `d` points in R^d, computed from
/// signed cofactors of the edge matrix. Returns the unnormalized vector.
pub fn hyperplane_normal(points: &[&Vector]) -> Vector {
    let d = points[0].len();
    debug_assert_eq!(points.len(), d);
    if d == 1 {
        return vector(&[1.0]);
    }
    let rows = d - 1;
    let mut edges = DMatrix::zeros(rows, d);
    for i in 0..rows {
        let e = points[i + 1] - points[0];
        edges.set_row(i, &e.transpose());
    }
    let mut normal = DVector::zeros(d);
    for j in 0..d {
        let minor = edges.clone().remove_column(j);
        let det = if rows == 1 { minor[(0, 0)] } else { minor.determinant() };
        normal[j] = if j % 2 == 0 { det } else { -det };
    }
    normal
}

/// (k)-dimensional volume of the simplex spanned by `k + 1` points in any
/// ambient dimension, via the Gram determinant.
pub fn simplex_volume(points: &[&Vector]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let edges: Vec<Vector> = points[1..].iter().map(|p| *p - points[0]).collect();
    let gram = DMatrix::from_fn(k, k, |i, j| edges[i].dot(&edges[j]));
    let det = gram.determinant().max(0.0);
    det.sqrt() / factorial(k)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    // kappa_n = pi^{n/2} / Gamma(n/2 + 1), via the recurrence kappa_n = 2 pi / n kappa_{n-2}
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Matrix with the given vectors as columns.
pub fn columns(vectors: &[Vector], rows: usize) -> Matrix {
    let mut m = DMatrix::zeros(rows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Matrix with the given vectors as rows.
pub fn rows(vectors: &[Vector], cols: usize) -> Matrix {
    let mut m = DMatrix::zeros(vectors.len(), cols);
    for (i, v) in vectors.iter().enumerate() {
        m.set_row(i, &v.transpose());
    }
    m
}

/// Numerical rank of a set of vectors.
pub fn rank(vectors: &[Vector], tol: f64) -> usize {
    orthonormalize(vectors, tol).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        let k4 = std::f64::consts::PI.powi(2) / 2.0;
        assert!((unit_ball_volume(4) - k4).abs() < 1e-14);
    }

    #[test]
    fn normal_is_orthogonal_to_edges() {
        let a = vector(&[1.0, 0.0, 0.0]);
        let b = vector(&[0.0, 1.0, 0.0]);
        let c = vector(&[0.0, 0.0, 1.0]);
        let n = hyperplane_normal(&[&a, &b, &c]);
        assert!(n.dot(&(&b - &a)).abs() < 1e-15);
        assert!(n.dot(&(&c - &a)).abs() < 1e-15);
        assert!(n.norm() > 0.0);
    }

    #[test]
    fn gram_simplex_volume_matches_det() {
        let o = vector(&[0.0, 0.0, 0.0]);
        let a = vector(&[2.0, 0.0, 0.0]);
        let b = vector(&[0.0, 3.0, 0.0]);
        let c = vector(&[0.0, 0.0, 1.0]);
        assert!((simplex_volume(&[&o, &a, &b, &c]) - 1.0).abs() < 1e-14);
        assert!((simplex_volume(&[&o, &a, &b]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
    }
}
