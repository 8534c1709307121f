use std::sync::Arc;

use crate::convex_core::hull::{Hull, MAX_DIM};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::lp;

/// Convex polytope given by its vertices. Construction canonicalizes the
/// vertex list (duplicates and non-extreme points are removed) and caches the
/// facet structure.
#[derive(Debug, Clone)]
pub struct VPolytope {
    dim: usize,
    hull: Arc<Hull>,
}

impl VPolytope {
    pub fn new(dim: usize, points: Vec<Vector>) -> Result<Self> {
        let hull = Hull::compute(&points, dim)?;
        Ok(VPolytope { dim, hull: Arc::new(hull) })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        Self::new(dim, rows.iter().map(|r| Vector::from_column_slice(r)).collect())
    }

    pub fn point(p: Vector) -> Self {
        let dim = p.len();
        Self::new(dim, vec![p]).expect("a single finite point is a valid polytope")
    }

    /// Segment `[a, b]`.
    pub fn segment(a: Vector, b: Vector) -> Result<Self> {
        let dim = a.len();
        Self::new(dim, vec![a, b])
    }

    /// Axis-parallel box `[lo, hi]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = lo.len();
        let pts = (0..1usize << dim)
            .map(|m| Vector::from_iterator(dim, (0..dim).map(|i| if (m >> i) & 1 == 1 { hi[i] } else { lo[i] })))
            .collect();
        Self::new(dim, pts)
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self::cuboid(&vec![0.0; dim], &vec![1.0; dim]).expect("unit cube")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.hull.vertices
    }

    pub fn hull(&self) -> &Hull {
        &self.hull
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.hull.is_full_dimensional()
    }

    /// Dimension of the affine hull; less than `dim` flags a degenerate hull.
    pub fn affine_dim(&self) -> usize {
        self.hull.affine_dim()
    }

    pub fn volume(&self) -> f64 {
        self.hull.volume
    }

    pub fn centroid(&self) -> &Vector {
        &self.hull.centroid
    }

    pub fn support(&self, u: &Vector) -> f64 {
        self.vertices().iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn width(&self, u: &Vector) -> f64 {
        self.support(u) + self.support(&-u)
    }

    pub fn surface_area(&self) -> f64 {
        self.hull.facets.iter().map(|f| f.area).sum()
    }

    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut best = 0.0_f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max((&v[i] - &v[j]).norm());
            }
        }
        best
    }

    pub fn to_hrep(&self) -> Result<HPolytope> {
        if !self.is_full_dimensional() {
            return Err(Error::DegenerateBody);
        }
        Ok(HPolytope {
            dim: self.dim,
            facets: self
                .hull
                .facets
                .iter()
                .map(|f| Halfspace { normal: f.normal.clone(), offset: f.offset })
                .collect(),
        })
    }

    pub fn surface_measure(&self) -> Result<SurfaceMeasure> {
        if !self.is_full_dimensional() {
            return Err(Error::DegenerateBody);
        }
        Ok(SurfaceMeasure {
            dim: self.dim,
            atoms: self
                .hull
                .facets
                .iter()
                .map(|f| Atom { normal: f.normal.clone(), mass: f.area })
                .collect(),
        })
    }

    pub fn map_points(&self, f: impl Fn(&Vector) -> Vector, dim: usize) -> Result<Self> {
        Self::new(dim, self.vertices().iter().map(f).collect())
    }

    pub fn translate(&self, v: &Vector) -> Self {
        self.map_points(|p| p + v, self.dim).expect("translation keeps points finite")
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        if a < 0.0 {
            return Err(Error::NegativeScale(a));
        }
        self.map_points(|p| p * a, self.dim)
    }

    pub fn reflect(&self) -> Self {
        self.map_points(|p| -p, self.dim).expect("reflection keeps points finite")
    }

    /// Image under `x ↦ M x + t`.
    pub fn linear_image(&self, m: &Matrix, shift: &Vector) -> Result<Self> {
        if m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.ncols() });
        }
        self.map_points(|p| m * p + shift, m.nrows())
    }

    pub fn minkowski_sum(&self, other: &VPolytope) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut pts = Vec::with_capacity(self.vertices().len() * other.vertices().len());
        for p in self.vertices() {
            for q in other.vertices() {
                pts.push(p + q);
            }
        }
        Self::new(self.dim, pts)
    }

    /// Symmetric Hausdorff distance between the two vertex sets.
    pub fn vertex_hausdorff(&self, other: &VPolytope) -> f64 {
        let one_way = |a: &[Vector], b: &[Vector]| {
            a.iter()
                .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(self.vertices(), other.vertices()).max(one_way(other.vertices(), self.vertices()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

/// Bounded polytope `{x : normal_i · x ≤ offset_i}` with unit normals.
#[derive(Debug, Clone)]
pub struct HPolytope {
    dim: usize,
    facets: Vec<Halfspace>,
}

impl HPolytope {
    /// Normals are rescaled to unit length (offsets accordingly).
    pub fn new(dim: usize, halfspaces: Vec<(Vector, f64)>) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        let mut facets = Vec::with_capacity(halfspaces.len());
        for (n, b) in halfspaces {
            if n.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: n.len() });
            }
            let norm = n.norm();
            if norm == 0.0 || !norm.is_finite() || !b.is_finite() {
                return Err(Error::InvalidInput("halfspace normal must be nonzero and finite".into()));
            }
            facets.push(Halfspace { normal: n / norm, offset: b / norm });
        }
        Ok(HPolytope { dim, facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn contains(&self, p: &Vector, tol: f64) -> bool {
        self.facets.iter().all(|h| h.normal.dot(p) <= h.offset + tol)
    }

    /// Center and radius of the largest inscribed ball.
    pub fn chebyshev_ball(&self) -> Result<(Vector, f64)> {
        let d = self.dim;
        let rows: Vec<Vec<f64>> = self
            .facets
            .iter()
            .map(|h| {
                let mut r: Vec<f64> = h.normal.iter().copied().collect();
                r.push(1.0);
                r
            })
            .collect();
        let rhs: Vec<f64> = self.facets.iter().map(|h| h.offset).collect();
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        match lp::maximize(&c, &rows, &rhs) {
            lp::LpOutcome::Optimal { x, .. } => {
                let center = Vector::from_column_slice(&x[..d]);
                // recompute the radius from the recovered center
                let r = self
                    .facets
                    .iter()
                    .map(|h| h.offset - h.normal.dot(&center))
                    .fold(f64::INFINITY, f64::min);
                if r < 0.0 {
                    Err(Error::InfeasibleLP)
                } else {
                    Ok((center, r))
                }
            }
            lp::LpOutcome::Infeasible => Err(Error::InfeasibleLP),
            lp::LpOutcome::Unbounded => Err(Error::UnboundedInput),
        }
    }

    /// Vertex enumeration through the polar body around the Chebyshev center.
    pub fn to_vrep(&self) -> Result<VPolytope> {
        let (center, r) = self.chebyshev_ball()?;
        let scale = self.facets.iter().map(|h| (h.offset - h.normal.dot(&center)).abs()).fold(0.0, f64::max);
        if r <= 1e-12 * scale.max(1e-300) {
            return Err(Error::InfeasibleLP);
        }
        let dual: Vec<Vector> = self
            .facets
            .iter()
            .map(|h| &h.normal / (h.offset - h.normal.dot(&center)))
            .collect();
        let hull = Hull::compute(&dual, self.dim)?;
        if !hull.is_full_dimensional() {
            return Err(Error::UnboundedInput);
        }
        let mut vertices = Vec::with_capacity(hull.facets.len());
        for f in &hull.facets {
            if f.offset <= hull.tol {
                return Err(Error::UnboundedInput);
            }
            vertices.push(&center + &f.normal / f.offset);
        }
        VPolytope::new(self.dim, vertices)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub normal: Vector,
    pub mass: f64,
}

/// Discrete surface area measure: facet normals with facet areas.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMeasure {
    pub dim: usize,
    pub atoms: Vec<Atom>,
}

impl SurfaceMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if a.normal.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.normal.len() });
            }
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::InvalidInput(format!("atom mass must be positive, got {}", a.mass)));
            }
        }
        let atoms = atoms
            .into_iter()
            .map(|a| {
                let n = a.normal.norm();
                Atom { normal: a.normal / n, mass: a.mass }
            })
            .collect();
        Ok(SurfaceMeasure { dim, atoms })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `Σ mass · normal`, zero for every surface area measure.
    pub fn centroid(&self) -> Vector {
        let mut c = Vector::zeros(self.dim);
        for a in &self.atoms {
            c.axpy(a.mass, &a.normal, 1.0);
        }
        c
    }

    pub fn spans(&self) -> bool {
        let normals: Vec<Vector> = self.atoms.iter().map(|a| a.normal.clone()).collect();
        crate::linalg::rank(&normals, 1e-9) == self.dim
    }

    /// `a·self + b·other`, merging atoms whose normals agree within `1e-9`.
    pub fn combine(&self, a: f64, other: &SurfaceMeasure, b: f64) -> Result<SurfaceMeasure> {
        if a < 0.0 {
            return Err(Error::NegativeScale(a));
        }
        if b < 0.0 {
            return Err(Error::NegativeScale(b));
        }
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut atoms: Vec<Atom> = Vec::new();
        for (coef, m) in [(a, self), (b, other)] {
            if coef == 0.0 {
                continue;
            }
            for at in &m.atoms {
                match atoms.iter_mut().find(|x| (&x.normal - &at.normal).norm() <= 1e-9) {
                    Some(x) => x.mass += coef * at.mass,
                    None => atoms.push(Atom { normal: at.normal.clone(), mass: coef * at.mass }),
                }
            }
        }
        Ok(SurfaceMeasure { dim: self.dim, atoms })
    }

    /// Largest relative mass difference against another measure on matching normals.
    pub fn relative_distance(&self, other: &SurfaceMeasure) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.atoms {
            let m = other
                .atoms
                .iter()
                .find(|b| (&b.normal - &a.normal).norm() <= 1e-7)
                .map_or(0.0, |b| b.mass);
            worst = worst.max((m - a.mass).abs() / a.mass);
        }
        for b in &other.atoms {
            if !self.atoms.iter().any(|a| (&b.normal - &a.normal).norm() <= 1e-7) {
                worst = worst.max(1.0);
            }
        }
        worst
    }
}
