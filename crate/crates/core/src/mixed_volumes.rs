//! First mixed volumes, Steiner polynomials, intrinsic volumes and a
//! Monte Carlo volume oracle for body expressions without a closed form.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::convex_core::{BodyExpr, Hull, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::{binomial, unit, unit_ball_volume, Matrix, Vector};
use crate::projections::{random_direction, sphere_search};
use crate::qp::distance_to_hull;
use crate::rng::stream;

/// `V_{n-1,1}(P, K) = (1/n) Σ_F h_K(u_F) · vol_{n-1}(F)`.
pub fn mixed_vol_first(p: &VPolytope, k: &BodyExpr) -> Result<f64> {
    if !p.is_full_dimensional() {
        return Err(Error::DegenerateBody);
    }
    if k.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: k.dim() });
    }
    let s: f64 = p.hull().facets.iter().map(|f| k.support(&f.normal) * f.area).sum();
    Ok(s / p.dim() as f64)
}

/// Coefficients of the Steiner polynomial `V(K + tB) = Σ_j coeffs[j] t^{n-j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerCoeffs {
    pub dim: usize,
    pub coeffs: Vec<f64>,
}

impl SteinerCoeffs {
    /// Coefficient of `t^power`.
    pub fn of_power(&self, power: usize) -> f64 {
        self.coeffs[self.dim - power]
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        (0..=self.dim).map(|p| self.of_power(p) * t.powi(p as i32)).sum()
    }

    pub fn from_intrinsic(iv: &IntrinsicVolumes) -> Self {
        let n = iv.dim;
        SteinerCoeffs { dim: n, coeffs: (0..=n).map(|j| unit_ball_volume(n - j) * iv.values[j]).collect() }
    }

    pub fn to_intrinsic(&self) -> IntrinsicVolumes {
        let n = self.dim;
        IntrinsicVolumes { dim: n, values: (0..=n).map(|j| self.coeffs[j] / unit_ball_volume(n - j)).collect() }
    }

    /// Coefficients of the body grown by `ρB`: substitutes `t ↦ t + ρ`.
    pub fn shifted(&self, rho: f64) -> Self {
        let n = self.dim;
        let mut by_power = vec![0.0; n + 1];
        for p in 0..=n {
            let c = self.of_power(p);
            for q in 0..=p {
                by_power[q] += c * binomial(p, q) * rho.powi((p - q) as i32);
            }
        }
        SteinerCoeffs { dim: n, coeffs: (0..=n).map(|j| by_power[n - j]).collect() }
    }
}

/// `V_0 .. V_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicVolumes {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl IntrinsicVolumes {
    /// Same body viewed in a larger ambient space (intrinsic volumes do not
    /// depend on the ambient dimension).
    pub fn padded(&self, dim: usize) -> Self {
        let mut values = self.values.clone();
        values.resize(dim + 1, 0.0);
        IntrinsicVolumes { dim, values }
    }
}

/// Intrinsic volumes of a Cartesian product: `V_m(A × B) = Σ_{i+j=m} V_i(A) V_j(B)`.
pub fn cartesian_intrinsic(a: &IntrinsicVolumes, b: &IntrinsicVolumes) -> IntrinsicVolumes {
    let dim = a.dim + b.dim;
    let mut values = vec![0.0; dim + 1];
    for (i, x) in a.values.iter().enumerate() {
        for (j, y) in b.values.iter().enumerate() {
            values[i + j] += x * y;
        }
    }
    IntrinsicVolumes { dim, values }
}

/// Exact intrinsic volumes of a full-dimensional polytope in `ℝ³`:
/// `V₁ = Σ_e ℓ_e (π − θ_e) / (2π)` with `θ_e` the interior dihedral angle.
pub fn intrinsic_volumes_3d(p: &VPolytope) -> Result<IntrinsicVolumes> {
    if p.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: p.dim() });
    }
    if !p.is_full_dimensional() {
        return Err(Error::DegenerateBody);
    }
    Ok(hull_intrinsic(p.hull()).expect("three-dimensional hull"))
}

fn hull_intrinsic(h: &Hull) -> Option<IntrinsicVolumes> {
    if let Some(flat) = &h.flat {
        return hull_intrinsic(&flat.inner).map(|iv| iv.padded(h.dim));
    }
    let values = match h.dim {
        0 => vec![1.0],
        1 => vec![1.0, h.volume],
        2 => vec![1.0, 0.5 * h.facets.iter().map(|f| f.area).sum::<f64>(), h.volume],
        3 => {
            let mut v1 = 0.0;
            for (i, f) in h.facets.iter().enumerate() {
                for g in &h.facets[i + 1..] {
                    let shared: Vec<usize> = f.vertices.iter().copied().filter(|v| g.vertices.contains(v)).collect();
                    if shared.len() == 2 {
                        let len = (&h.vertices[shared[0]] - &h.vertices[shared[1]]).norm();
                        let ext = f.normal.dot(&g.normal).clamp(-1.0, 1.0).acos();
                        v1 += len * ext;
                    }
                }
            }
            let s: f64 = h.facets.iter().map(|f| f.area).sum();
            vec![1.0, v1 / (2.0 * std::f64::consts::PI), 0.5 * s, h.volume]
        }
        _ => return None,
    };
    Some(IntrinsicVolumes { dim: h.dim, values })
}

fn orthogonal_frames(parts: &[crate::convex_core::DirectPart]) -> bool {
    let cols: Vec<Vector> = parts.iter().flat_map(|p| p.frame.column_iter().map(|c| c.into_owned())).collect();
    for (i, a) in cols.iter().enumerate() {
        if (a.norm() - 1.0).abs() > 1e-12 {
            return false;
        }
        for b in &cols[i + 1..] {
            if a.dot(b).abs() > 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Exact intrinsic volumes when the expression allows it: `P + ρB` with the
/// polytope of affine dimension at most three, and orthogonal direct sums of
/// such bodies (via the Cartesian product formula).
pub fn intrinsic_volumes_exact(b: &BodyExpr) -> Option<IntrinsicVolumes> {
    if let BodyExpr::DirectSum(parts) = b {
        if !orthogonal_frames(parts) {
            return None;
        }
        let mut acc = IntrinsicVolumes { dim: 0, values: vec![1.0] };
        for p in parts {
            acc = cartesian_intrinsic(&acc, &intrinsic_volumes_exact(&p.body)?);
        }
        return Some(acc);
    }
    let pb = b.split_ball()?;
    let iv = hull_intrinsic(pb.poly.hull())?;
    if pb.radius == 0.0 {
        return Some(iv);
    }
    Some(SteinerCoeffs::from_intrinsic(&iv).shifted(pb.radius).to_intrinsic())
}

/// Exact Steiner coefficients where [`intrinsic_volumes_exact`] applies.
pub fn steiner_exact(b: &BodyExpr) -> Option<SteinerCoeffs> {
    intrinsic_volumes_exact(b).map(|iv| SteinerCoeffs::from_intrinsic(&iv))
}

/// Exact volume when the expression admits one.
pub fn volume_exact(b: &BodyExpr) -> Option<f64> {
    let n = b.dim();
    match b {
        BodyExpr::Polytope(p) => Some(p.volume()),
        BodyExpr::Ball { radius, .. } => Some(unit_ball_volume(n) * radius.powi(n as i32)),
        BodyExpr::Scale { coef, body } => volume_exact(body).map(|v| v * coef.powi(n as i32)),
        BodyExpr::Reflect(body) => volume_exact(body),
        BodyExpr::DirectSum(parts) => {
            let mut v = crate::convex_core::body::frame_determinant(parts).abs();
            for p in parts {
                v *= volume_exact(&p.body)?;
            }
            Some(v)
        }
        BodyExpr::Affine { matrix, body, .. } if matrix.is_square() => volume_exact(body).map(|v| v * matrix.determinant().abs()),
        BodyExpr::Affine { matrix, .. } if matrix.nrows() > matrix.ncols() => Some(0.0),
        _ => {
            let pb = b.split_ball()?;
            if pb.radius == 0.0 {
                return Some(pb.poly.volume());
            }
            let iv = intrinsic_volumes_exact(b)?;
            Some(iv.values[n])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

impl VolumeEstimate {
    pub fn exact(value: f64) -> Self {
        VolumeEstimate { value, std_error: 0.0, exact: true }
    }
}

enum Membership {
    Halfspaces { normals: Vec<Vector>, offsets: Vec<f64>, tol: f64 },
    PolyBall { normals: Vec<Vector>, offsets: Vec<f64>, vertices: Vec<Vector>, radius: f64 },
    Ball { center: Vector, radius: f64 },
    Linear { inverse: Matrix, shift: Vector, inner: Box<Membership> },
    DirectSum { inverse: Matrix, ranges: Vec<(usize, usize)>, inner: Vec<Membership> },
    Support { body: BodyExpr },
}

impl Membership {
    fn compile(b: &BodyExpr) -> Membership {
        if let Some(pb) = b.split_ball() {
            let (normals, offsets): (Vec<Vector>, Vec<f64>) = pb
                .poly
                .hull()
                .facets
                .iter()
                .map(|f| (f.normal.clone(), f.offset))
                .unzip();
            if pb.poly.vertices().len() == 1 {
                return Membership::Ball { center: pb.poly.vertices()[0].clone(), radius: pb.radius };
            }
            if pb.radius == 0.0 && pb.poly.is_full_dimensional() {
                return Membership::Halfspaces { normals, offsets, tol: 0.0 };
            }
            return Membership::PolyBall { normals, offsets, vertices: pb.poly.vertices().to_vec(), radius: pb.radius };
        }
        match b {
            BodyExpr::Scale { coef, body } if *coef > 0.0 => Membership::Linear {
                inverse: Matrix::identity(b.dim(), b.dim()) / *coef,
                shift: Vector::zeros(b.dim()),
                inner: Box::new(Membership::compile(body)),
            },
            BodyExpr::Reflect(body) => Membership::Linear {
                inverse: -Matrix::identity(b.dim(), b.dim()),
                shift: Vector::zeros(b.dim()),
                inner: Box::new(Membership::compile(body)),
            },
            BodyExpr::Affine { matrix, shift, body } if matrix.is_square() => match matrix.clone().try_inverse() {
                Some(inverse) => Membership::Linear { inverse, shift: shift.clone(), inner: Box::new(Membership::compile(body)) },
                None => Membership::Support { body: b.clone() },
            },
            BodyExpr::DirectSum(parts) => {
                let n = b.dim();
                let mut joined = Matrix::zeros(n, n);
                let mut ranges = vec![];
                let mut col = 0;
                for p in parts {
                    for c in p.frame.column_iter() {
                        joined.set_column(col, &c);
                        col += 1;
                    }
                    ranges.push((col - p.frame.ncols(), col));
                }
                match joined.try_inverse() {
                    Some(inverse) => Membership::DirectSum {
                        inverse,
                        ranges,
                        inner: parts.iter().map(|p| Membership::compile(&p.body)).collect(),
                    },
                    None => Membership::Support { body: b.clone() },
                }
            }
            _ => Membership::Support { body: b.clone() },
        }
    }

    fn contains(&self, p: &Vector) -> bool {
        match self {
            Membership::Halfspaces { normals, offsets, tol } => normals.iter().zip(offsets).all(|(a, b)| a.dot(p) <= b + tol),
            Membership::PolyBall { normals, offsets, vertices, radius } => {
                if !normals.is_empty() {
                    let viol = normals.iter().zip(offsets).map(|(a, b)| a.dot(p) - b).fold(f64::NEG_INFINITY, f64::max);
                    if viol <= 0.0 {
                        return true;
                    }
                    if viol > *radius {
                        return false;
                    }
                }
                let r2 = radius * radius;
                if vertices.iter().any(|v| (v - p).norm_squared() <= r2) {
                    return true;
                }
                distance_to_hull(p, vertices) <= *radius
            }
            Membership::Ball { center, radius } => (p - center).norm_squared() <= radius * radius,
            Membership::Linear { inverse, shift, inner } => inner.contains(&(inverse * (p - shift))),
            Membership::DirectSum { inverse, ranges, inner } => {
                let x = inverse * p;
                ranges
                    .iter()
                    .zip(inner)
                    .all(|(&(a, b), m)| m.contains(&Vector::from_iterator(b - a, x.iter().skip(a).take(b - a).copied())))
            }
            Membership::Support { body } => body_contains_by_support(body, p),
        }
    }
}

/// `p ∈ B` iff `h_B(u) − p·u ≥ 0` on the sphere; minimized by sampling plus
/// local search.
fn body_contains_by_support(body: &BodyExpr, p: &Vector) -> bool {
    let n = p.len();
    let g = |u: &Vector| body.support(u) - p.dot(u);
    let mut rng = stream(0x5a, 0);
    let mut dirs: Vec<Vector> = (0..n).flat_map(|i| [unit(n, i), -unit(n, i)]).collect();
    if n > 1 {
        dirs.extend((0..64 * n * n).map(|_| random_direction(&mut rng, n)));
    }
    let mut scored: Vec<(f64, usize)> = dirs.iter().enumerate().map(|(i, u)| (g(u), i)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if scored[0].0 < 0.0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    scored.iter().take(3).all(|&(_, i)| sphere_search(&g, &dirs[i], 0.02, 1e-10).1 >= 0.0)
}

const CHUNK: usize = 1 << 16;

/// Hit-or-miss Monte Carlo volume over the bounding box of the body.
///
/// Samples are drawn in fixed chunks, chunk `c` from stream `c` of `seed`, so
/// the estimate does not depend on the number of worker threads.
pub fn volume_mc(b: &BodyExpr, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let n = b.dim();
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let lo: Vec<f64> = (0..n).map(|i| -b.support(&-unit(n, i))).collect();
    let hi: Vec<f64> = (0..n).map(|i| b.support(&unit(n, i))).collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, c)| (c - a).max(0.0)).product();
    if box_volume <= 0.0 {
        return Ok(VolumeEstimate { value: 0.0, std_error: 0.0, exact: false });
    }
    let oracle = Membership::compile(b);
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut p = Vector::zeros(n);
            let mut h = 0u64;
            for _ in 0..count {
                for i in 0..n {
                    p[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
                }
                if oracle.contains(&p) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let phat = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        value: box_volume * phat,
        std_error: box_volume * (phat * (1.0 - phat) / samples as f64).sqrt(),
        exact: false,
    })
}

/// Exact volume where available, Monte Carlo otherwise.
pub fn volume(b: &BodyExpr, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    match volume_exact(b) {
        Some(v) => Ok(VolumeEstimate::exact(v)),
        None => volume_mc(b, samples, seed),
    }
}

/// Euclidean distance from `p` to the polytope (zero inside).
pub fn dist_to_polytope(p: &Vector, poly: &VPolytope) -> f64 {
    if poly.is_full_dimensional() && poly.hull().facets.iter().all(|f| f.normal.dot(p) <= f.offset) {
        return 0.0;
    }
    distance_to_hull(p, poly.vertices())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinerFit {
    pub coeffs: SteinerCoeffs,
    /// Standard errors of `coeffs`, same indexing.
    pub std_errors: Vec<f64>,
    /// Covariance of `coeffs`, same indexing.
    pub covariance: Vec<Vec<f64>>,
    /// Largest standardized residual of the fit.
    pub residual: f64,
}

/// Fits `V(B + tB) = Σ_j c_j t^{n-j}` to volumes supplied by `oracle`,
/// weighting each radius by its standard error.
pub fn steiner_fit_with(b: &BodyExpr, radii: &[f64], oracle: &(dyn Fn(&BodyExpr, usize) -> Result<VolumeEstimate> + Sync)) -> Result<SteinerFit> {
    let n = b.dim();
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < n + 1 {
        return Err(Error::IllConditionedFit(format!("need {} distinct radii, got {}", n + 1, sorted.len())));
    }
    let spread = sorted[sorted.len() - 1] - sorted[0];
    if spread < 10.0 * f64::EPSILON * sorted[sorted.len() - 1].abs().max(1.0) {
        return Err(Error::IllConditionedFit("radii are numerically identical".into()));
    }
    if sorted[0] < 0.0 {
        return Err(Error::IllConditionedFit("radii must be nonnegative".into()));
    }
    let vols: Vec<VolumeEstimate> = radii
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let grown = BodyExpr::sum(vec![b.clone(), BodyExpr::ball(Vector::zeros(n), t)?])?;
            oracle(&grown, i)
        })
        .collect::<Result<_>>()?;
    let floor = vols.iter().map(|v| v.std_error).filter(|s| *s > 0.0).fold(f64::INFINITY, f64::min);
    let sigma: Vec<f64> = vols.iter().map(|v| if v.std_error > 0.0 { v.std_error } else if floor.is_finite() { floor } else { 1.0 }).collect();
    // columns are powers 0..=n
    let a = DMatrix::from_fn(radii.len(), n + 1, |i, p| radii[i].powi(p as i32) / sigma[i]);
    let y = DVector::from_iterator(radii.len(), vols.iter().zip(&sigma).map(|(v, s)| v.value / s));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= smax * 1e-13 {
        return Err(Error::IllConditionedFit(format!("condition number {:.3e}", smax / smin)));
    }
    let x = svd.solve(&y, 0.0).map_err(|e| Error::IllConditionedFit(e.to_string()))?;
    let cov = (a.transpose() * &a).try_inverse().ok_or_else(|| Error::IllConditionedFit("singular normal equations".into()))?;
    let resid = &a * &x - &y;
    let residual = resid.amax();
    let coeffs = SteinerCoeffs { dim: n, coeffs: (0..=n).map(|j| x[n - j]).collect() };
    let std_errors = (0..=n).map(|j| cov[(n - j, n - j)].max(0.0).sqrt()).collect();
    let covariance = (0..=n).map(|i| (0..=n).map(|j| cov[(n - i, n - j)]).collect()).collect();
    Ok(SteinerFit { coeffs, std_errors, covariance, residual })
}

/// Steiner fit against the Monte Carlo oracle with `samples` points per radius.
pub fn steiner_fit(b: &BodyExpr, radii: &[f64], samples: usize, seed: u64) -> Result<SteinerFit> {
    steiner_fit_with(b, radii, &|body, i| volume_mc(body, samples, crate::rng::derive_seed(seed, &format!("radius{i}"))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;
    use std::f64::consts::PI;

    #[test]
    fn cube_and_ball_mixed_volume() {
        let cube = VPolytope::unit_cube(3);
        let v = mixed_vol_first(&cube, &BodyExpr::unit_ball(3)).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = mixed_vol_first(&cube, &cube.clone().into()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_intrinsic_volumes() {
        let iv = intrinsic_volumes_3d(&VPolytope::unit_cube(3)).unwrap();
        for (a, b) in iv.values.iter().zip([1.0, 3.0, 3.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let s = SteinerCoeffs::from_intrinsic(&iv);
        for (p, want) in [(0, 1.0), (1, 6.0), (2, 3.0 * PI), (3, 4.0 * PI / 3.0)] {
            assert!((s.of_power(p) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn square_times_segment_is_cube() {
        let sq = IntrinsicVolumes { dim: 2, values: vec![1.0, 2.0, 1.0] };
        let seg = IntrinsicVolumes { dim: 1, values: vec![1.0, 1.0] };
        assert_eq!(cartesian_intrinsic(&sq, &seg).values, vec![1.0, 3.0, 3.0, 1.0]);
        let pt = IntrinsicVolumes { dim: 0, values: vec![1.0] };
        assert_eq!(cartesian_intrinsic(&sq, &pt), sq);
    }

    #[test]
    fn ball_steiner_shift() {
        let b = BodyExpr::unit_ball(3);
        let s = steiner_exact(&b).unwrap();
        let k = 4.0 * PI / 3.0;
        for (p, c) in [(0, 1.0), (1, 3.0), (2, 3.0), (3, 1.0)] {
            assert!((s.of_power(p) - k * c).abs() < 1e-12);
        }
    }

    #[test]
    fn mc_cube_volume() {
        let cube = BodyExpr::Polytope(VPolytope::unit_cube(3));
        let shifted = cube.scale(2.0).unwrap();
        let est = volume_mc(&shifted, 200_000, 1).unwrap();
        assert!((est.value - 8.0).abs() <= 4.0 * est.std_error.max(1e-12));
    }

    #[test]
    fn mc_polyball_matches_exact() {
        let cube = VPolytope::unit_cube(3);
        let b = BodyExpr::sum(vec![cube.into(), BodyExpr::ball(vector(&[0.0; 3]), 0.3).unwrap()]).unwrap();
        let exact = volume_exact(&b).unwrap();
        let want = 1.0 + 6.0 * 0.3 + 3.0 * PI * 0.09 + 4.0 * PI / 3.0 * 0.027;
        assert!((exact - want).abs() < 1e-12);
        let est = volume_mc(&b, 300_000, 2).unwrap();
        assert!((est.value - exact).abs() <= 4.0 * est.std_error);
    }

    #[test]
    fn distance_examples() {
        let cube = VPolytope::unit_cube(3);
        assert_eq!(dist_to_polytope(&vector(&[0.5, 0.5, 0.5]), &cube), 0.0);
        assert!((dist_to_polytope(&vector(&[2.0, 0.5, 0.5]), &cube) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_too_few_radii() {
        let b = BodyExpr::unit_ball(2);
        assert!(matches!(steiner_fit(&b, &[0.1, 0.2], 10, 0), Err(Error::IllConditionedFit(_))));
        assert!(matches!(steiner_fit(&b, &[0.1, 0.1, 0.1], 10, 0), Err(Error::IllConditionedFit(_))));
    }
}
