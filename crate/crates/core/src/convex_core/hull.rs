//! Incremental (beneath-beyond) convex hull in dimensions 1 through 6.
//!
//! The boundary is maintained as a simplicial complex: every facet is a
//! simplex on `d` input points. Each inserted point replaces the facets it
//! sees by cones over the horizon ridges. Once all points are inserted,
//! coplanar simplicial facets are merged into true facets and points are kept
//! as vertices only when the normals of the true facets through them span
//! the whole space.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{affine_frame, hyperplane_normal, orthonormalize, simplex_volume, Vector};

pub const MAX_DIM: usize = 6;
/// Relative tolerance used for deduplication and coplanarity.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Facet {
    /// Outer unit normal.
    pub normal: Vector,
    pub offset: f64,
    /// Indices into the owning hull's vertex list.
    pub vertices: Vec<usize>,
    /// (d-1)-dimensional volume.
    pub area: f64,
}

#[derive(Debug, Clone)]
pub struct FlatHull {
    pub origin: Vector,
    /// Orthonormal basis of the affine hull's direction space.
    pub basis: Vec<Vector>,
    /// Hull of the points expressed in `basis` coordinates.
    pub inner: Box<Hull>,
}

#[derive(Debug, Clone)]
pub struct Hull {
    pub dim: usize,
    pub vertices: Vec<Vector>,
    /// Empty unless the hull is full-dimensional.
    pub facets: Vec<Facet>,
    /// Ambient-dimensional volume (zero for flat hulls).
    pub volume: f64,
    /// Centroid of the relative interior.
    pub centroid: Vector,
    pub flat: Option<FlatHull>,
    /// Absolute tolerance the hull was built with.
    pub tol: f64,
}

impl Hull {
    pub fn compute(points: &[Vector], dim: usize) -> Result<Hull> {
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("hull of an empty point set".into()));
        }
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput("non-finite coordinate".into()));
            }
        }
        let scale = bounding_diagonal(points);
        let tol = REL_TOL * scale.max(1e-300);
        let pts = dedupe(points, tol);
        Ok(hull_of(&pts, dim, tol))
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.flat.is_none()
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        match &self.flat {
            None => self.dim,
            Some(f) => f.basis.len(),
        }
    }

    /// Volume measured inside the affine hull (`1` for a single point).
    pub fn relative_volume(&self) -> f64 {
        match &self.flat {
            None => self.volume,
            Some(f) => f.inner.relative_volume(),
        }
    }
}

fn bounding_diagonal(points: &[Vector]) -> f64 {
    let dim = points[0].len();
    let mut s = 0.0;
    for i in 0..dim {
        let lo = points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
        s += (hi - lo).powi(2);
    }
    s.sqrt()
}

fn dedupe(points: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (q - p).norm() <= tol) {
            out.push(p.clone());
        }
    }
    out
}

fn hull_of(pts: &[Vector], dim: usize, tol: f64) -> Hull {
    let (origin, basis) = affine_frame(pts, tol);
    if basis.len() == dim {
        return match dim {
            0 => point_hull(&pts[0], tol),
            1 => interval_hull(pts, tol),
            _ => full_hull(pts, dim, tol),
        };
    }
    let r = basis.len();
    let local: Vec<Vector> = pts
        .iter()
        .map(|p| {
            let d = p - &origin;
            Vector::from_iterator(r, basis.iter().map(|b| b.dot(&d)))
        })
        .collect();
    let inner = if r == 0 {
        point_hull(&Vector::zeros(0), tol)
    } else {
        hull_of(&local, r, tol)
    };
    // Map inner vertices back onto the original points they came from.
    let vertices: Vec<Vector> = inner
        .vertices
        .iter()
        .map(|y| {
            let idx = local
                .iter()
                .position(|l| (l - y).norm() <= tol)
                .expect("inner hull vertex comes from the input");
            pts[idx].clone()
        })
        .collect();
    let mut centroid = origin.clone();
    for (b, c) in basis.iter().zip(inner.centroid.iter()) {
        centroid.axpy(*c, b, 1.0);
    }
    let vertices = if r == 0 { vec![pts[0].clone()] } else { vertices };
    Hull {
        dim,
        vertices,
        facets: vec![],
        volume: 0.0,
        centroid,
        flat: Some(FlatHull { origin, basis, inner: Box::new(inner) }),
        tol,
    }
}

fn point_hull(p: &Vector, tol: f64) -> Hull {
    Hull {
        dim: p.len(),
        vertices: vec![p.clone()],
        facets: vec![],
        volume: if p.is_empty() { 1.0 } else { 0.0 },
        centroid: p.clone(),
        flat: None,
        tol,
    }
}

fn interval_hull(pts: &[Vector], tol: f64) -> Hull {
    let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    Hull {
        dim: 1,
        vertices: vec![Vector::from_element(1, lo), Vector::from_element(1, hi)],
        facets: vec![
            Facet { normal: Vector::from_element(1, -1.0), offset: -lo, vertices: vec![0], area: 1.0 },
            Facet { normal: Vector::from_element(1, 1.0), offset: hi, vertices: vec![1], area: 1.0 },
        ],
        volume: hi - lo,
        centroid: Vector::from_element(1, 0.5 * (lo + hi)),
        flat: None,
        tol,
    }
}

struct Simplex {
    verts: Vec<usize>,
    normal: Vector,
    offset: f64,
    alive: bool,
}

fn make_simplex(verts: Vec<usize>, pts: &[Vector], interior: &Vector) -> Simplex {
    let refs: Vec<&Vector> = verts.iter().map(|&i| &pts[i]).collect();
    let mut normal = hyperplane_normal(&refs);
    let norm = normal.norm();
    normal /= norm;
    let mut offset = normal.dot(&pts[verts[0]]);
    if normal.dot(interior) > offset {
        normal = -normal;
        offset = -offset;
    }
    Simplex { verts, normal, offset, alive: true }
}

fn initial_simplex(pts: &[Vector], dim: usize) -> Vec<usize> {
    let mut chosen = vec![0usize];
    for (i, p) in pts.iter().enumerate() {
        let q = &pts[chosen[0]];
        if p.iter().zip(q.iter()).find(|(a, b)| a != b).is_some_and(|(a, b)| a < b) {
            chosen[0] = i;
        }
    }
    let mut basis: Vec<Vector> = vec![];
    while chosen.len() < dim + 1 {
        let o = &pts[chosen[0]];
        let mut best = (f64::NEG_INFINITY, 0usize, Vector::zeros(dim));
        for (i, p) in pts.iter().enumerate() {
            let mut r = p - o;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
            }
            let n = r.norm();
            if n > best.0 {
                best = (n, i, r);
            }
        }
        chosen.push(best.1);
        basis.push(&best.2 / best.0);
    }
    chosen
}

fn full_hull(pts: &[Vector], dim: usize, tol: f64) -> Hull {
    let init = initial_simplex(pts, dim);
    let mut interior = Vector::zeros(dim);
    for &i in &init {
        interior += &pts[i];
    }
    interior /= (dim + 1) as f64;

    let mut simplices: Vec<Simplex> = Vec::new();
    for skip in 0..=dim {
        let verts: Vec<usize> = init.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
        let mut verts = verts;
        verts.sort_unstable();
        simplices.push(make_simplex(verts, pts, &interior));
    }

    let mut order: Vec<usize> = (0..pts.len()).filter(|i| !init.contains(i)).collect();
    let dist: Vec<f64> = pts.iter().map(|p| (p - &interior).norm()).collect();
    order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));

    for &pi in &order {
        let p = &pts[pi];
        let visible: Vec<usize> = simplices
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive && s.normal.dot(p) - s.offset > tol)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &f in &visible {
            let verts = &simplices[f].verts;
            for skip in 0..verts.len() {
                let ridge: Vec<usize> = verts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }
        for &f in &visible {
            simplices[f].alive = false;
        }
        let mut horizon: Vec<Vec<usize>> = ridges.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        for mut ridge in horizon {
            ridge.push(pi);
            ridge.sort_unstable();
            simplices.push(make_simplex(ridge, pts, &interior));
        }
        if simplices.len() > 4 * simplices.iter().filter(|s| s.alive).count() + 64 {
            simplices.retain(|s| s.alive);
        }
    }
    simplices.retain(|s| s.alive);
    finish_full(pts, dim, tol, &simplices, &interior)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn finish_full(pts: &[Vector], dim: usize, tol: f64, simplices: &[Simplex], interior: &Vector) -> Hull {
    let m = simplices.len();
    let areas: Vec<f64> = simplices
        .iter()
        .map(|s| {
            let refs: Vec<&Vector> = s.verts.iter().map(|&i| &pts[i]).collect();
            simplex_volume(&refs)
        })
        .collect();

    // Merge coplanar neighbours.
    let mut parent: Vec<usize> = (0..m).collect();
    let mut ridge_owner: HashMap<Vec<usize>, usize> = HashMap::new();
    for (f, s) in simplices.iter().enumerate() {
        for skip in 0..s.verts.len() {
            let ridge: Vec<usize> = s.verts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
            if let Some(&g) = ridge_owner.get(&ridge) {
                let apex_g = simplices[g].verts.iter().find(|v| !ridge.contains(v)).copied().unwrap();
                let apex_f = s.verts[skip];
                let coplanar = (s.normal.dot(&pts[apex_g]) - s.offset).abs() <= tol
                    && (simplices[g].normal.dot(&pts[apex_f]) - simplices[g].offset).abs() <= tol
                    && s.normal.dot(&simplices[g].normal) > 0.0;
                if coplanar {
                    let (a, b) = (find(&mut parent, f), find(&mut parent, g));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            } else {
                ridge_owner.insert(ridge, f);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    for f in 0..m {
        let r = find(&mut parent, f);
        let g = *group_of.entry(r).or_insert_with(|| {
            groups.push(vec![]);
            groups.len() - 1
        });
        groups[g].push(f);
    }

    struct Group {
        normal: Vector,
        area: f64,
        points: Vec<usize>,
    }
    let mut merged: Vec<Group> = groups
        .iter()
        .map(|members| {
            let mut normal = Vector::zeros(dim);
            let mut area = 0.0;
            let mut points: Vec<usize> = vec![];
            for &f in members {
                normal.axpy(areas[f].max(1e-300), &simplices[f].normal, 1.0);
                area += areas[f];
                points.extend(simplices[f].verts.iter().copied());
            }
            points.sort_unstable();
            points.dedup();
            let n = normal.norm();
            Group { normal: normal / n, area, points }
        })
        .collect();
    merged.retain(|g| g.area > 0.0);

    // A point is a vertex iff the facet normals through it have full rank.
    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for (g, grp) in merged.iter().enumerate() {
        for &p in &grp.points {
            incident.entry(p).or_default().push(g);
        }
    }
    let mut extreme: Vec<usize> = incident
        .iter()
        .filter(|(_, gs)| {
            let normals: Vec<Vector> = gs.iter().map(|&g| merged[g].normal.clone()).collect();
            orthonormalize(&normals, 1e-7).len() == dim
        })
        .map(|(&p, _)| p)
        .collect();
    extreme.sort_unstable();
    let index_of: HashMap<usize, usize> = extreme.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    let facets: Vec<Facet> = merged
        .iter()
        .map(|g| {
            let vertices: Vec<usize> = g.points.iter().filter_map(|p| index_of.get(p).copied()).collect();
            let offset = vertices
                .iter()
                .map(|&v| g.normal.dot(&pts[extreme[v]]))
                .fold(f64::NEG_INFINITY, f64::max);
            Facet { normal: g.normal.clone(), offset, vertices, area: g.area }
        })
        .collect();

    let mut volume = 0.0;
    let mut centroid = Vector::zeros(dim);
    for (s, area) in simplices.iter().zip(&areas) {
        let h = s.offset - s.normal.dot(interior);
        let v = area * h / dim as f64;
        volume += v;
        let mut c = interior.clone();
        for &i in &s.verts {
            c += &pts[i];
        }
        centroid.axpy(v / (dim + 1) as f64, &c, 1.0);
    }
    if volume > 0.0 {
        centroid /= volume;
    } else {
        centroid = interior.clone();
    }

    Hull {
        dim,
        vertices: extreme.iter().map(|&i| pts[i].clone()).collect(),
        facets,
        volume,
        centroid,
        flat: None,
        tol,
    }
}
