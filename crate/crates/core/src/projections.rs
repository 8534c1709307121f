//! Orthogonal projections onto linear subspaces, Haar-random frames, and the
//! metric radii of convex bodies (inradius, minimal width, diameter,
//! circumradius).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::containment;
use crate::convex_core::{BodyExpr, HPolytope, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, unit, Matrix, Vector};
use crate::qp::min_enclosing_ball;
use crate::rng::stream;

/// Orthonormal basis of a `k`-dimensional subspace of `ℝ^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub k: usize,
    pub basis: Vec<Vector>,
}

impl Frame {
    pub fn new(basis: Vec<Vector>) -> Result<Self> {
        let k = basis.len();
        let dim = basis.first().map(|b| b.len()).ok_or_else(|| Error::InvalidInput("empty frame".into()))?;
        if k > dim {
            return Err(Error::InvalidInput(format!("{k} vectors cannot be orthonormal in dimension {dim}")));
        }
        for (i, a) in basis.iter().enumerate() {
            if a.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.len() });
            }
            if (a.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput("frame vectors must be unit length".into()));
            }
            for b in &basis[i + 1..] {
                if a.dot(b).abs() > 1e-12 {
                    return Err(Error::InvalidInput("frame vectors must be orthogonal".into()));
                }
            }
        }
        Ok(Frame { dim, k, basis })
    }

    /// Frame spanned by coordinate axes.
    pub fn coordinate(dim: usize, axes: &[usize]) -> Self {
        Frame { dim, k: axes.len(), basis: axes.iter().map(|&a| unit(dim, a)).collect() }
    }

    /// Orthonormalizes arbitrary spanning vectors into a frame.
    pub fn from_span(vectors: &[Vector]) -> Result<Self> {
        let basis = orthonormalize(vectors, 1e-10);
        if basis.len() != vectors.len() {
            return Err(Error::InvalidInput("frame vectors are linearly dependent".into()));
        }
        Self::new(basis)
    }

    /// `k × dim` matrix whose rows are the basis vectors (the projection map).
    pub fn matrix(&self) -> Matrix {
        crate::linalg::rows(&self.basis, self.dim)
    }

    /// Maps subspace coordinates back into the ambient space.
    pub fn embed(&self, y: &Vector) -> Vector {
        let mut x = Vector::zeros(self.dim);
        for (b, c) in self.basis.iter().zip(y.iter()) {
            x.axpy(*c, b, 1.0);
        }
        x
    }

    pub fn coordinates(&self, x: &Vector) -> Vector {
        Vector::from_iterator(self.k, self.basis.iter().map(|b| b.dot(x)))
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Frame {
        let mut vs = self.basis.clone();
        vs.extend((0..self.dim).map(|i| unit(self.dim, i)));
        let full = orthonormalize(&vs, 1e-8);
        Frame { dim: self.dim, k: self.dim - self.k, basis: full[self.k..].to_vec() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "k": self.k,
            "basis": self.basis.iter().map(|b| b.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let basis = v
            .get("basis")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("frame needs a \"basis\" array".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .and_then(|r| r.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
                    .map(Vector::from_vec)
                    .ok_or_else(|| Error::InvalidInput("frame basis rows must be numeric arrays".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis)
    }
}

/// Haar-uniform random frames: frame `i` is the orthonormalized Gaussian
/// `n × k` matrix drawn from stream `i` of `seed`.
pub fn sample_grassmannian(n: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Frame>> {
    if k < 1 || k >= n {
        return Err(Error::ParameterOutOfRange(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    Ok((0..count).into_par_iter().map(|i| random_frame(n, k, seed, i as u64)).collect())
}

pub fn random_frame(n: usize, k: usize, seed: u64, index: u64) -> Frame {
    let mut rng = stream(seed, index);
    loop {
        let g: Vec<Vector> = (0..k)
            .map(|_| Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal))))
            .collect();
        let basis = orthonormalize(&g, 1e-8);
        if basis.len() == k {
            return Frame { dim: n, k, basis };
        }
    }
}

/// Uniform random unit vector.
pub fn random_direction<R: Rng>(rng: &mut R, n: usize) -> Vector {
    loop {
        let g = Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let norm = g.norm();
        if norm > 1e-12 {
            return g / norm;
        }
    }
}

/// Orthogonal projection of a body onto the subspace, in frame coordinates.
pub fn project(body: &BodyExpr, frame: &Frame) -> Result<BodyExpr> {
    if body.dim() != frame.dim {
        return Err(Error::DimensionMismatch { expected: frame.dim, found: body.dim() });
    }
    body.linear_image(&frame.matrix())
}

pub fn project_polytope(p: &VPolytope, frame: &Frame) -> Result<VPolytope> {
    p.linear_image(&frame.matrix(), &Vector::zeros(frame.k))
}

/// Largest inscribed ball of a halfspace system: `(radius, center)`.
pub fn inradius(h: &HPolytope) -> Result<(f64, Vector)> {
    let (c, r) = h.chebyshev_ball()?;
    Ok((r, c))
}

/// Inradius of an arbitrary body. Exact for `P + ρB` (where it equals
/// `r_P + ρ`); otherwise a cutting-plane estimate over sampled directions.
pub fn inradius_body(body: &BodyExpr) -> Result<(f64, Vector)> {
    if let Some(pb) = body.split_ball() {
        if pb.poly.is_full_dimensional() {
            let (r, c) = inradius(&pb.poly.to_hrep()?)?;
            return Ok((r + pb.radius, c));
        }
        return Ok((pb.radius, pb.poly.centroid().clone()));
    }
    let point = BodyExpr::Polytope(VPolytope::point(Vector::zeros(body.dim())));
    let fit = containment::translate_into_support(&point, body, 0, 0)?;
    Ok((fit.slack.max(0.0), fit.translation))
}

/// Minimizes `f` over the unit sphere by pattern search in tangent
/// directions, starting from `u`. Returns the local minimizer and value.
pub fn sphere_search(f: &dyn Fn(&Vector) -> f64, u: &Vector, step: f64, tol: f64) -> (Vector, f64) {
    let n = u.len();
    let mut u = u.normalize();
    let mut best = f(&u);
    let mut step = step;
    while step > tol {
        let tangents = Frame { dim: n, k: 1, basis: vec![u.clone()] }.complement();
        let mut improved = false;
        for t in &tangents.basis {
            for s in [step, -step] {
                let cand = (&u + t * s).normalize();
                let v = f(&cand);
                if v < best {
                    best = v;
                    u = cand;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (u, best)
}

/// Number of directions used when a radius has to be found by sampling.
pub fn sampling_directions(n: usize) -> usize {
    10_000 * n * n / 9
}

fn sampled_extreme(body: &BodyExpr, f: &(dyn Fn(&Vector) -> f64 + Sync), count: usize, seed: u64) -> (Vector, f64) {
    let n = body.dim();
    let mut rng = stream(seed, 0);
    let mut dirs: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
    dirs.extend((0..count).map(|_| random_direction(&mut rng, n)));
    let mut scored: Vec<(f64, usize)> = dirs.par_iter().enumerate().map(|(i, u)| (f(u), i)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored
        .iter()
        .take(8)
        .map(|&(_, i)| sphere_search(f, &dirs[i], 0.05, 1e-8))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one direction")
}

/// Minimal width and a direction attaining it.
///
/// For `P + ρB` the answer is exact: the width function is the support
/// function of the difference body `P − P` (plus `2ρ`), whose minimum over
/// the sphere is its smallest facet offset. Other bodies fall back to dense
/// direction sampling with local refinement.
pub fn min_width(body: &BodyExpr) -> Result<(f64, Vector)> {
    if let Some(pb) = body.split_ball() {
        let p = &pb.poly;
        if !p.is_full_dimensional() {
            let flat = p.hull().flat.as_ref().expect("flat hull carries its frame");
            let span = Frame { dim: p.dim(), k: flat.basis.len(), basis: flat.basis.clone() };
            let u = span.complement().basis[0].clone();
            return Ok((2.0 * pb.radius, u));
        }
        let diff = p.minkowski_sum(&p.reflect())?;
        let f = diff
            .hull()
            .facets
            .iter()
            .min_by(|a, b| a.offset.total_cmp(&b.offset))
            .expect("full-dimensional polytope has facets");
        return Ok((f.offset + 2.0 * pb.radius, f.normal.clone()));
    }
    let w = |u: &Vector| body.width(u);
    let (u, d) = sampled_extreme(body, &w, sampling_directions(body.dim()), 0x5eed);
    Ok((d, u))
}

/// Largest distance between two points of the body.
pub fn diameter(body: &BodyExpr) -> f64 {
    if let Some(pb) = body.split_ball() {
        return pb.poly.diameter() + 2.0 * pb.radius;
    }
    let w = |u: &Vector| -body.width(u);
    let (_, d) = sampled_extreme(body, &w, sampling_directions(body.dim()), 0xd1a);
    -d
}

/// Circumradius and center of the smallest enclosing ball.
pub fn circumradius(p: &VPolytope) -> (f64, Vector) {
    min_enclosing_ball(p.vertices())
}

fn circumradius_body(body: &BodyExpr) -> Result<(f64, Vector)> {
    let pb = body
        .split_ball()
        .ok_or_else(|| Error::PreconditionNotMet("circumradius needs a polytope plus ball".into()))?;
    let (r, c) = circumradius(&pb.poly);
    Ok((r + pb.radius, c))
}

#[derive(Debug, Clone)]
pub struct RadiiReport {
    pub inradius: f64,
    pub incenter: Vector,
    pub min_width: f64,
    pub width_direction: Vector,
    pub diameter: f64,
    pub circumradius: f64,
}

pub fn radii(body: &BodyExpr) -> Result<RadiiReport> {
    let (inradius, incenter) = inradius_body(body)?;
    let (min_width, width_direction) = min_width(body)?;
    let (circumradius, _) = circumradius_body(body)?;
    Ok(RadiiReport { inradius, incenter, min_width, width_direction, diameter: diameter(body), circumradius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn cube_shadow_on_coordinate_plane() {
        let cube = BodyExpr::Polytope(VPolytope::unit_cube(3));
        let sq = project(&cube, &Frame::coordinate(3, &[0, 1])).unwrap().to_polytope().unwrap();
        assert_eq!(sq.vertices().len(), 4);
        assert!((sq.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_projects_to_ball() {
        let b = BodyExpr::ball(vector(&[1.0, 2.0, 3.0]), 0.7).unwrap();
        let f = random_frame(3, 2, 1, 0);
        match project(&b, &f).unwrap() {
            BodyExpr::Ball { radius, center } => {
                assert!((radius - 0.7).abs() < 1e-12);
                assert!((center - f.coordinates(&vector(&[1.0, 2.0, 3.0]))).norm() < 1e-12);
            }
            other => panic!("expected a ball, got {other:?}"),
        }
    }

    #[test]
    fn frames_are_orthonormal_and_reproducible() {
        let a = sample_grassmannian(5, 3, 4, 42).unwrap();
        let b = sample_grassmannian(5, 3, 4, 42).unwrap();
        assert_eq!(a, b);
        for f in &a {
            assert!(Frame::new(f.basis.clone()).is_ok());
        }
        assert!(sample_grassmannian(3, 3, 1, 0).is_err());
    }

    #[test]
    fn cube_radii() {
        let r = radii(&VPolytope::unit_cube(3).into()).unwrap();
        assert!((r.inradius - 0.5).abs() < 1e-12);
        assert!((r.min_width - 1.0).abs() < 1e-12);
        assert!((r.width_direction.amax() - 1.0).abs() < 1e-12);
        assert!((r.diameter - 3f64.sqrt()).abs() < 1e-12);
        assert!((r.circumradius - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_search_finds_axis_minimum() {
        // width of a box [0,1]x[0,2]x[0,3] is smallest along e1
        let b = BodyExpr::Polytope(VPolytope::cuboid(&[0.0; 3], &[1.0, 2.0, 3.0]).unwrap());
        let (u, w) = sphere_search(&|u| b.width(u), &vector(&[0.6, 0.5, 0.62]), 0.05, 1e-9);
        assert!((w - 1.0).abs() < 1e-6, "{w}");
        assert!(u[0].abs() > 0.999);
    }
}
