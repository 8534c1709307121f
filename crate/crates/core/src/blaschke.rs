//! Blaschke addition and the discrete Minkowski problem: reconstructs a
//! polytope from facet normals and areas, and assembles cylinder bodies
//! from decomposable pieces.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::convex_core::{Atom, BodyExpr, DirectPart, SurfaceMeasure, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::{affine_frame, columns, Matrix, Vector};
use crate::projections::{random_direction, Frame};
use crate::rng::stream;

impl SurfaceMeasure {
    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "atoms": self.atoms.iter().map(|a| json!({"normal": a.normal.as_slice(), "mass": a.mass})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::InvalidInput(format!("surface measure: {what}"));
        let dim = v["dim"].as_u64().ok_or_else(|| bad("missing dim"))? as usize;
        let atoms = v["atoms"]
            .as_array()
            .ok_or_else(|| bad("missing atoms"))?
            .iter()
            .map(|a| {
                let normal: Vec<f64> = a["normal"]
                    .as_array()
                    .ok_or_else(|| bad("atom without normal"))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| bad("non-numeric normal")))
                    .collect::<Result<_>>()?;
                let mass = a["mass"].as_f64().ok_or_else(|| bad("atom without mass"))?;
                Ok(Atom { normal: Vector::from_vec(normal), mass })
            })
            .collect::<Result<Vec<_>>>()?;
        SurfaceMeasure::new(dim, atoms)
    }
}

/// Relative facet-area tolerance used by the Blaschke constructions.
pub const SOLVER_TOL: f64 = 1e-8;

/// `a·S₁ + b·S₂` with coincident normals merged.
pub fn measure_add(a: f64, s1: &SurfaceMeasure, b: f64, s2: &SurfaceMeasure) -> Result<SurfaceMeasure> {
    s1.combine(a, s2, b)
}

#[derive(Debug, Clone)]
pub struct MinkowskiSolution {
    /// Solution centered at its centroid.
    pub polytope: VPolytope,
    /// Support numbers `h_i` of the centered solution, one per atom.
    pub support: Vec<f64>,
    /// Largest relative facet-area error.
    pub residual: f64,
    pub iterations: usize,
}

struct Evaluation {
    vertices: Vec<Vector>,
    tol: f64,
    volume: f64,
    areas: Vec<f64>,
    /// vertex indices on each supporting hyperplane
    incident: Vec<Vec<usize>>,
}

/// `d`-dimensional content of the face with vertex set `ids`, by the cone
/// decomposition `vol(F) = (1/d) Σ dist(c, G) vol(G)` over its facets `G`,
/// which are read off the plane incidences.
fn face_content(vs: &[Vector], ids: &[usize], d: usize, incident: &[Vec<usize>], tol: f64) -> f64 {
    if ids.len() < d + 1 {
        return 0.0;
    }
    match d {
        0 => 1.0,
        1 => {
            let mut best: f64 = 0.0;
            for (x, &i) in ids.iter().enumerate() {
                for &j in &ids[x + 1..] {
                    best = best.max((&vs[i] - &vs[j]).norm());
                }
            }
            best
        }
        _ => {
            let mut c = Vector::zeros(vs[0].len());
            for &i in ids {
                c += &vs[i];
            }
            c /= ids.len() as f64;
            let mut seen: Vec<Vec<usize>> = Vec::new();
            let mut total = 0.0;
            for inc in incident {
                let sub: Vec<usize> = ids.iter().copied().filter(|v| inc.binary_search(v).is_ok()).collect();
                if sub.len() < d || sub.len() == ids.len() || seen.contains(&sub) {
                    continue;
                }
                let pts: Vec<Vector> = sub.iter().map(|&v| vs[v].clone()).collect();
                let (origin, basis) = affine_frame(&pts, tol);
                if basis.len() != d - 1 {
                    continue;
                }
                let mut r = &c - &origin;
                for b in &basis {
                    let t = b.dot(&r);
                    r.axpy(-t, b, 1.0);
                }
                total += r.norm() * face_content(vs, &sub, d - 1, incident, tol);
                seen.push(sub);
            }
            total / d as f64
        }
    }
}

/// Content of a face whose affine hull must have dimension `d`.
fn spanning_content(vs: &[Vector], ids: &[usize], d: usize, incident: &[Vec<usize>], tol: f64) -> f64 {
    if ids.len() < d + 1 {
        return 0.0;
    }
    if d > 0 {
        let pts: Vec<Vector> = ids.iter().map(|&v| vs[v].clone()).collect();
        if affine_frame(&pts, tol).1.len() != d {
            return 0.0;
        }
    }
    face_content(vs, ids, d, incident, tol)
}

/// Vertices of `{x : u_i·x ≤ h_i}` from all nonsingular `n`-subsets of the
/// planes, each with a roundoff bound from the conditioning of its subset.
/// Exhaustive, which is affordable at the facet counts the solver sees and
/// does not depend on the conditioning of a dual hull.
fn plane_vertices(normals: &[Vector], h: &[f64], tol: f64) -> Vec<(Vector, f64)> {
    let n = normals[0].len();
    let m = normals.len();
    let mut out: Vec<(Vector, f64)> = Vec::new();
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let a = Matrix::from_fn(n, n, |r, c| normals[subset[r]][c]);
        if let Some(inv) = a.try_inverse() {
            let v = &inv * Vector::from_iterator(n, subset.iter().map(|&i| h[i]));
            // nearly dependent planes amplify roundoff by ‖A⁻¹‖; the cap keeps
            // far-off solutions of near-singular subsets infeasible
            let bound = 64.0 * f64::EPSILON * inv.norm() * (v.norm() + h.iter().fold(0.0f64, |a, x| a.max(x.abs())));
            let err = bound.clamp(tol, 1e4 * tol);
            if (0..m).all(|w| normals[w].dot(&v) <= h[w] + err) {
                match out.iter().position(|(q, e)| (q - &v).norm() <= tol.max(*e + err)) {
                    Some(i) if out[i].1 > err => out[i] = (v, err),
                    Some(_) => {}
                    None => out.push((v, err)),
                }
            }
        }
        // next n-subset in lexicographic order
        let mut i = n;
        while i > 0 && subset[i - 1] == m - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        subset[i - 1] += 1;
        for j in i..n {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

fn evaluate(normals: &[Vector], h: &[f64]) -> Option<Evaluation> {
    let n = normals[0].len();
    let scale = h.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let found = plane_vertices(normals, h, 1e-13 * scale);
    let incident: Vec<Vec<usize>> = normals
        .iter()
        .zip(h)
        .map(|(u, &hi)| (0..found.len()).filter(|&v| (u.dot(&found[v].0) - hi).abs() <= (1e-12 * scale).max(found[v].1)).collect())
        .collect();
    let vs: Vec<Vector> = found.into_iter().map(|(v, _)| v).collect();
    let tol = 1e-9 * scale;
    let areas: Vec<f64> = incident.iter().map(|ix| spanning_content(&vs, ix, n - 1, &incident, tol)).collect();
    let volume = areas.iter().zip(h).map(|(a, x)| a * x).sum::<f64>() / n as f64;
    if !(volume > 0.0) {
        return None;
    }
    Some(Evaluation { vertices: vs, tol, volume, areas, incident })
}

/// Hessian of the volume in the support numbers: `∂A_i/∂h_j`.
fn area_jacobian(normals: &[Vector], ev: &Evaluation) -> Matrix {
    let m = normals.len();
    let n = normals[0].len();
    let vs = &ev.vertices;
    let mut jac = DMatrix::zeros(m, m);
    for i in 0..m {
        if ev.areas[i] == 0.0 {
            continue;
        }
        for j in i + 1..m {
            if ev.areas[j] == 0.0 {
                continue;
            }
            let shared: Vec<usize> =
                ev.incident[i].iter().copied().filter(|v| ev.incident[j].binary_search(v).is_ok()).collect();
            let ridge = spanning_content(vs, &shared, n - 2, &ev.incident, ev.tol);
            if ridge == 0.0 {
                continue;
            }
            let cos = normals[i].dot(&normals[j]).clamp(-1.0, 1.0);
            let sin = (1.0 - cos * cos).sqrt();
            if sin < 1e-12 {
                continue;
            }
            let d = ridge / sin;
            jac[(i, j)] = d;
            jac[(j, i)] = d;
            jac[(i, i)] -= cos * d;
            jac[(j, j)] -= cos * d;
        }
    }
    jac
}

fn max_rel(areas: &[f64], target: &[f64]) -> f64 {
    areas.iter().zip(target).map(|(a, t)| ((a - t) / t).abs()).fold(0.0, f64::max)
}

fn merit(areas: &[f64], target: &[f64]) -> f64 {
    areas.iter().zip(target).map(|(a, t)| ((a - t) / t).powi(2)).sum::<f64>().sqrt()
}

/// Newton iteration on `A(h) = m` with a line search on the relative
/// residual norm. Keeps the best iterate.
fn polish(normals: &[Vector], target: &[f64], mut h: Vec<f64>, tol: f64, max_iter: usize) -> (Vec<f64>, usize) {
    let Some(mut ev) = evaluate(normals, &h) else { return (h, 0) };
    let mut phi = merit(&ev.areas, target);
    for iter in 0..max_iter {
        if max_rel(&ev.areas, target) <= tol {
            return (h, iter);
        }
        let jac = area_jacobian(normals, &ev);
        let rhs = Vector::from_iterator(target.len(), ev.areas.iter().zip(target).map(|(a, t)| t - a));
        let svd = jac.svd(true, true);
        let cutoff = svd.singular_values.max() * 1e-11;
        let Ok(step) = svd.solve(&rhs, cutoff) else { return (h, iter) };
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-3 {
            let trial: Vec<f64> = h.iter().zip(step.iter()).map(|(x, d)| x + alpha * d).collect();
            if let Some(tev) = evaluate(normals, &trial) {
                let tphi = merit(&tev.areas, target);
                if tphi < phi {
                    h = trial;
                    ev = tev;
                    phi = tphi;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return (h, iter);
        }
    }
    (h, max_iter)
}

/// Maximizes the concave functional `log V(h) − Σ m_i h_i / c`, whose
/// maximizer has facet areas proportional to `m`.
fn maximize_log_volume(normals: &[Vector], m: &[f64], mut h: Vec<f64>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let k = m.len();
    let Some(mut ev) = evaluate(normals, &h) else { return Err(Error::DegenerateBody) };
    let c = m.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() / normals[0].len() as f64;
    let objective = |ev: &Evaluation, h: &[f64]| ev.volume.ln() - m.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / c;
    let mut psi = objective(&ev, &h);
    let proportional = |ev: &Evaluation| {
        let v = ev.volume;
        ev.areas.iter().zip(m).map(|(a, t)| (a * c / (v * t) - 1.0).abs()).fold(0.0, f64::max)
    };
    for iter in 0..max_iter {
        if proportional(&ev) <= tol {
            return Ok((h, iter));
        }
        // an inactive plane can move in to the body for free, which only raises ψ
        let mut tightened = false;
        for i in 0..k {
            let s = ev.vertices.iter().map(|x| normals[i].dot(x)).fold(f64::NEG_INFINITY, f64::max);
            if ev.areas[i] == 0.0 && h[i] > s {
                h[i] = s;
                tightened = true;
            }
        }
        if tightened {
            ev = evaluate(normals, &h).ok_or(Error::DegenerateBody)?;
            psi = objective(&ev, &h);
        }
        let v = ev.volume;
        let grad = Vector::from_iterator(k, ev.areas.iter().zip(m).map(|(a, t)| a / v - t / c));
        let areas = Vector::from_column_slice(&ev.areas);
        let mut hess = area_jacobian(normals, &ev) / v - &areas * areas.transpose() / (v * v);
        // zero-area facets have no curvature; a proxy makes their step a push of
        // a tenth of the mean inradius scale
        let reach = 0.1 * normals[0].len() as f64 * v / ev.areas.iter().sum::<f64>();
        for i in (0..k).filter(|&i| ev.areas[i] == 0.0) {
            hess[(i, i)] = -m[i] / (c * reach);
        }
        let scale = hess.amax().max(1e-300);
        let mut mu = 1e-12 * scale;
        let mut accepted = false;
        while mu < 1e6 * scale {
            let sys = -&hess + Matrix::identity(k, k) * mu;
            let Some(step) = sys.cholesky().map(|ch| ch.solve(&grad)) else {
                mu *= 100.0;
                continue;
            };
            let slope = grad.dot(&step);
            let mut alpha = 1.0;
            while alpha > 1e-4 {
                let trial: Vec<f64> = h.iter().zip(step.iter()).map(|(x, d)| x + alpha * d).collect();
                if let Some(tev) = evaluate(normals, &trial) {
                    let tpsi = objective(&tev, &trial);
                    if tpsi >= psi + 1e-4 * alpha * slope || (tpsi - psi).abs() <= 1e-11 * psi.abs().max(1.0) && proportional(&tev) < proportional(&ev) {
                        h = trial;
                        ev = tev;
                        psi = tpsi;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if accepted {
                break;
            }
            mu *= 100.0;
        }
        if !accepted {
            return Ok((h, iter));
        }
    }
    Ok((h, max_iter))
}

/// Reconstructs the polytope (centered at its centroid) whose facet normals
/// and areas are the atoms of `s`.
///
/// The support numbers maximize `log V(h) − Σ m_i h_i / c`, which is concave
/// by Brunn–Minkowski; damped Newton steps start from the circumscribed
/// polytope of the unit ball and the maximizer is rescaled to the target
/// total area.
pub fn minkowski_solve(s: &SurfaceMeasure, tol: f64) -> Result<MinkowskiSolution> {
    let n = s.dim;
    if n < 2 {
        return Err(Error::InvalidInput("the Minkowski problem needs dimension at least 2".into()));
    }
    if s.atoms.len() < n + 1 || !s.spans() {
        return Err(Error::NonSpanningMeasure);
    }
    let total = s.total_mass();
    if s.centroid().norm() > 1e-9 * total {
        return Err(Error::InvalidInput(format!("measure is not balanced: |Σ m u| = {:.3e}", s.centroid().norm())));
    }
    let tol = tol.max(1e-13);
    let normals: Vec<Vector> = s.atoms.iter().map(|a| a.normal.clone()).collect();
    let target: Vec<f64> = s.atoms.iter().map(|a| a.mass).collect();

    let mut h = vec![1.0; normals.len()];
    let start = evaluate(&normals, &h).ok_or(Error::DegenerateBody)?;
    let lam = (total / start.areas.iter().sum::<f64>()).powf(1.0 / (n - 1) as f64);
    h.iter_mut().for_each(|x| *x *= lam);

    let (h, it1) = maximize_log_volume(&normals, &target, h, 1e-7, 200)?;
    let ev = evaluate(&normals, &h).ok_or(Error::DegenerateBody)?;
    let t = (total / ev.areas.iter().sum::<f64>()).powf(1.0 / (n - 1) as f64);
    let h: Vec<f64> = h.iter().map(|x| x * t).collect();
    let (h, it2) = polish(&normals, &target, h, tol.min(1e-13), 50);
    let iterations = it1 + it2;
    let ev = evaluate(&normals, &h).ok_or(Error::DegenerateBody)?;
    let residual = max_rel(&ev.areas, &target);
    if residual > tol {
        return Err(Error::MaxIterations { residual });
    }
    let poly = VPolytope::new(n, ev.vertices)?;
    let c = poly.centroid().clone();
    let polytope = poly.translate(&-&c);
    let support = normals.iter().zip(&h).map(|(u, x)| x - u.dot(&c)).collect();
    Ok(MinkowskiSolution { polytope, support, residual, iterations })
}

/// Blaschke combination `a·K # b·L`, the body with measure `a S_K + b S_L`.
pub fn blaschke_sum(k: &VPolytope, l: &VPolytope, a: f64, b: f64) -> Result<MinkowskiSolution> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: l.dim() });
    }
    let s = measure_add(a, &k.surface_measure()?, b, &l.surface_measure()?)?;
    minkowski_solve(&s, SOLVER_TOL)
}

/// `a·K` in the Blaschke sense, which is `a^{1/(n−1)} K`.
pub fn scalar_blaschke(a: f64, k: &VPolytope) -> Result<VPolytope> {
    if a < 0.0 {
        return Err(Error::NegativeScale(a));
    }
    let n = k.dim();
    if n < 2 {
        return Err(Error::InvalidInput("Blaschke scaling needs dimension at least 2".into()));
    }
    k.scale(a.powf(1.0 / (n - 1) as f64))
}

/// Integer partition with parts in nonincreasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidInput("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn largest(&self) -> usize {
        self.0[0]
    }

    /// Admissible for the `k`-cylinder class: every part at most `k`.
    pub fn admissible(&self, k: usize) -> bool {
        self.largest() <= k
    }
}

/// Direct sum of the parts along their frames, optionally pushed through a
/// unit-determinant linear map (the oblique case).
pub fn lambda_decomposable(parts: Vec<(VPolytope, Frame)>, oblique: Option<Matrix>) -> Result<BodyExpr> {
    let n = parts.first().map(|(_, f)| f.dim).ok_or_else(|| Error::InvalidInput("no parts".into()))?;
    let mut all: Vec<Vector> = Vec::new();
    for (p, f) in &parts {
        if f.dim != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.dim });
        }
        if p.dim() != f.k {
            return Err(Error::DimensionMismatch { expected: f.k, found: p.dim() });
        }
        for b in &f.basis {
            if all.iter().any(|a| a.dot(b).abs() > 1e-9) {
                return Err(Error::FrameOverlap);
            }
            all.push(b.clone());
        }
    }
    if all.len() != n {
        return Err(Error::FrameOverlap);
    }
    let body = BodyExpr::direct_sum(
        parts.into_iter().map(|(p, f)| DirectPart { body: p.into(), frame: columns(&f.basis, n) }).collect(),
    )?;
    match oblique {
        None => Ok(body),
        Some(m) => {
            let det = m.determinant();
            if (det.abs() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("oblique map must have unit determinant, got {det}")));
            }
            BodyExpr::affine(m, Vector::zeros(n), body)
        }
    }
}

/// A finite Blaschke combination of random λ-decomposable polytopes.
#[derive(Debug, Clone)]
pub struct CylinderSample {
    pub polytope: VPolytope,
    pub partitions: Vec<Partition>,
    pub weights: Vec<f64>,
    pub residual: f64,
}

fn random_partition<R: Rng>(rng: &mut R, n: usize, k: usize) -> Partition {
    let mut parts = Vec::new();
    let mut rest = n;
    while rest > 0 {
        let p = rng.random_range(1..=k.min(rest));
        parts.push(p);
        rest -= p;
    }
    Partition::new(parts).expect("parts are positive")
}

fn random_part<R: Rng>(rng: &mut R, d: usize) -> VPolytope {
    if d == 1 {
        let len = rng.random_range(0.5..1.5);
        return VPolytope::segment(Vector::zeros(1), Vector::from_element(1, len)).expect("segment in one dimension");
    }
    loop {
        let count = d + 1 + rng.random_range(0..=3);
        let pts: Vec<Vector> = (0..count)
            .map(|_| Vector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal))))
            .collect();
        if let Ok(p) = VPolytope::new(d, pts) {
            if p.is_full_dimensional() && p.volume() > 1e-3 {
                return p;
            }
        }
    }
}

fn random_rotation<R: Rng>(rng: &mut R, n: usize) -> Vec<Vector> {
    loop {
        let g: Vec<Vector> = (0..n)
            .map(|_| Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal))))
            .collect();
        let q = crate::linalg::orthonormalize(&g, 1e-8);
        if q.len() == n {
            return q;
        }
    }
}

fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let mut m = Matrix::identity(n, n);
        for v in m.iter_mut() {
            *v += 0.3 * rng.sample::<f64, _>(StandardNormal);
        }
        let det = m.determinant();
        if det.abs() < 0.2 {
            continue;
        }
        if det < 0.0 {
            let mut row = m.row_mut(0);
            row *= -1.0;
        }
        return m / det.abs().powf(1.0 / n as f64);
    }
}

/// Random element of the `k`-cylinder class in `ℝ^n`: a Blaschke
/// combination of `terms` λ-decomposable polytopes with `λ₁ ≤ k`, each on
/// random orthonormal frames and pushed through a random unimodular map.
pub fn cylinder_body_sample(n: usize, k: usize, terms: usize, seed: u64) -> Result<CylinderSample> {
    if !(2..=6).contains(&n) || k < 1 || k > n {
        return Err(Error::ParameterOutOfRange(format!("need 1 <= k <= n in [2, 6], got k = {k}, n = {n}")));
    }
    if terms == 0 {
        return Err(Error::ParameterOutOfRange("need at least one term".into()));
    }
    let mut measure: Option<SurfaceMeasure> = None;
    let mut partitions = Vec::with_capacity(terms);
    let mut weights = Vec::with_capacity(terms);
    for t in 0..terms {
        let mut rng = stream(seed, t as u64);
        let partition = random_partition(&mut rng, n, k);
        let q = random_rotation(&mut rng, n);
        let mut offset = 0;
        let mut parts = Vec::new();
        for &d in partition.parts() {
            let frame = Frame::new(q[offset..offset + d].to_vec())?;
            offset += d;
            parts.push((random_part(&mut rng, d), frame));
        }
        let oblique = random_unimodular(&mut rng, n);
        let body = lambda_decomposable(parts, Some(oblique))?;
        let poly = body.to_polytope().ok_or(Error::DegenerateBody)?;
        let w = rng.random_range(0.5..1.5);
        let sm = poly.surface_measure()?;
        measure = Some(match measure {
            None => measure_add(w, &sm, 0.0, &sm)?,
            Some(acc) => measure_add(1.0, &acc, w, &sm)?,
        });
        partitions.push(partition);
        weights.push(w);
    }
    let sol = minkowski_solve(&measure.expect("at least one term"), SOLVER_TOL)?;
    Ok(CylinderSample { polytope: sol.polytope, partitions, weights, residual: sol.residual })
}

/// Random balanced measure on `atoms` directions, for solver stress tests.
pub fn random_measure(n: usize, atoms: usize, seed: u64) -> Result<SurfaceMeasure> {
    let mut rng = stream(seed, 0);
    let mut list: Vec<Atom> = (0..atoms)
        .map(|_| Atom { normal: random_direction(&mut rng, n), mass: rng.random_range(0.5..1.5) })
        .collect();
    let mut c = Vector::zeros(n);
    for a in &list {
        c.axpy(a.mass, &a.normal, 1.0);
    }
    let norm = c.norm();
    if norm > 0.0 {
        list.push(Atom { normal: -&c / norm, mass: norm });
    }
    SurfaceMeasure::new(n, list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_measure_round_trips() {
        let cube = VPolytope::unit_cube(3);
        let sol = minkowski_solve(&cube.surface_measure().unwrap(), 1e-12).unwrap();
        assert!(sol.residual <= 1e-12);
        assert!((sol.polytope.volume() - 1.0).abs() < 1e-10);
        let centered = cube.translate(&-cube.centroid());
        assert!(sol.polytope.vertex_hausdorff(&centered) < 1e-9);
    }

    #[test]
    fn scalar_blaschke_scales_areas() {
        let cube = VPolytope::unit_cube(3);
        let c4 = scalar_blaschke(4.0, &cube).unwrap();
        assert!((c4.surface_area() - 24.0).abs() < 1e-9);
    }

    #[test]
    fn measure_json_round_trip() {
        let m = VPolytope::unit_cube(2).surface_measure().unwrap();
        let back = SurfaceMeasure::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn unbalanced_measure_is_rejected() {
        let m = SurfaceMeasure::new(2, vec![
            Atom { normal: Vector::from_column_slice(&[1.0, 0.0]), mass: 1.0 },
            Atom { normal: Vector::from_column_slice(&[0.0, 1.0]), mass: 1.0 },
            Atom { normal: Vector::from_column_slice(&[-1.0, -1.0]), mass: 1.0 },
        ])
        .unwrap();
        assert!(matches!(minkowski_solve(&m, 1e-10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn partitions_sort_and_bound() {
        let p = Partition::new(vec![1, 2, 1]).unwrap();
        assert_eq!(p.parts(), &[2, 1, 1]);
        assert!(p.admissible(2) && !p.admissible(1));
    }

    #[test]
    fn overlapping_frames_are_rejected() {
        let seg = VPolytope::segment(Vector::zeros(1), Vector::from_element(1, 1.0)).unwrap();
        let f = Frame::coordinate(2, &[0]);
        let r = lambda_decomposable(vec![(seg.clone(), f.clone()), (seg, f)], None);
        assert!(matches!(r, Err(Error::FrameOverlap)));
    }
}

