//! Translate containment and shadow covering.
//!
//! `K + v ⊆ L` holds iff `h_K(u) + v·u ≤ h_L(u)` for every direction `u`.
//! When `L` is a polytope only its facet normals matter, which turns the
//! question into a small linear program in `(v, t)`:
//! maximize `t` subject to `a_j·v + t ≤ b_j − h_K(a_j)`. The optimum `t` is
//! the containment slack and the maximizer is the Chebyshev-style translation.
//! Other targets use the same program over sampled directions, refined by
//! cutting planes.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::convex_core::{BodyExpr, HPolytope, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::{unit, Matrix, Vector};
use crate::lp::{maximize, LpOutcome};
use crate::mixed_volumes::mixed_vol_first;
use crate::projections::{self, project, random_direction, sample_grassmannian, sphere_search, Frame};
use crate::rng::stream;

/// Covering tolerance relative to the diameter of the target body.
pub const COVER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub feasible: bool,
    /// Minimum over directions of `h_L(u) − h_K(u) − v·u` at `v = translation`.
    pub slack: f64,
    pub translation: Vector,
    /// Number of directions in the final program; zero for the exact path.
    pub directions: usize,
}

/// Exact slack-maximizing translation of any body `K` into a polytope `L`.
pub fn max_slack_into_hpolytope(k: &BodyExpr, l: &HPolytope, tol: f64) -> Result<Containment> {
    let n = l.dim();
    if k.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: k.dim() });
    }
    let rows: Vec<Vec<f64>> = l
        .facets()
        .iter()
        .map(|h| {
            let mut r: Vec<f64> = h.normal.iter().copied().collect();
            r.push(1.0);
            r
        })
        .collect();
    let rhs: Vec<f64> = l.facets().iter().map(|h| h.offset - k.support(&h.normal)).collect();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let v = match maximize(&c, &rows, &rhs) {
        LpOutcome::Optimal { x, .. } => Vector::from_column_slice(&x[..n]),
        LpOutcome::Unbounded => return Err(Error::UnboundedInput),
        LpOutcome::Infeasible => return Err(Error::InfeasibleLP),
    };
    let slack = l
        .facets()
        .iter()
        .zip(&rhs)
        .map(|(h, r)| r - h.normal.dot(&v))
        .fold(f64::INFINITY, f64::min);
    Ok(Containment { feasible: slack >= -tol, slack, translation: v, directions: 0 })
}

/// Translation `v` with `K + v ⊆ L` maximizing the minimum slack, if any.
pub fn translate_into_polytopes(k: &VPolytope, l: &HPolytope) -> Option<Vector> {
    let scale = l.facets().iter().map(|h| h.offset.abs()).fold(1.0, f64::max);
    let c = max_slack_into_hpolytope(&BodyExpr::Polytope(k.clone()), l, 1e-12 * scale).ok()?;
    c.feasible.then_some(c.translation)
}

fn slack_program(dirs: &[Vector], gap: &[f64]) -> Result<(Vector, f64)> {
    let n = dirs[0].len();
    let rows: Vec<Vec<f64>> = dirs
        .iter()
        .map(|u| {
            let mut r: Vec<f64> = u.iter().copied().collect();
            r.push(1.0);
            r
        })
        .collect();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    match maximize(&c, &rows, gap) {
        LpOutcome::Optimal { x, .. } => Ok((Vector::from_column_slice(&x[..n]), x[n])),
        LpOutcome::Unbounded => Err(Error::UnboundedInput),
        LpOutcome::Infeasible => Err(Error::InfeasibleLP),
    }
}

fn facet_normals(b: &BodyExpr) -> Vec<Vector> {
    match b.split_ball() {
        Some(pb) if pb.poly.is_full_dimensional() => pb.poly.hull().facets.iter().map(|f| f.normal.clone()).collect(),
        _ => vec![],
    }
}

/// Support-function containment by cutting planes. `n_dirs = 0` selects a
/// default that grows with the dimension.
pub fn translate_into_support(k: &BodyExpr, l: &BodyExpr, n_dirs: usize, seed: u64) -> Result<Containment> {
    let n = l.dim();
    if k.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: k.dim() });
    }
    let n_dirs = if n_dirs == 0 { 64 * n * n } else { n_dirs };
    let gap = |u: &Vector| l.support(u) - k.support(u);

    let mut rng = stream(seed, 0);
    let mut dirs: Vec<Vector> = Vec::new();
    for i in 0..n {
        dirs.push(unit(n, i));
        dirs.push(-unit(n, i));
    }
    dirs.extend(facet_normals(l));
    dirs.extend(facet_normals(k));
    if n > 1 {
        dirs.extend((0..n_dirs).map(|_| random_direction(&mut rng, n)));
    }
    let probes: Vec<Vector> = if n > 1 { (0..4 * n_dirs).map(|_| random_direction(&mut rng, n)).collect() } else { vec![] };
    let mut gaps: Vec<f64> = dirs.iter().map(gap).collect();
    let scale = gaps.iter().fold(0.0_f64, |a, g| a.max(g.abs())).max(l.width(&unit(n, 0))).max(1e-300);

    let mut best = (Vector::zeros(n), f64::NEG_INFINITY);
    for _round in 0..60 {
        let (v, t) = slack_program(&dirs, &gaps)?;
        let phi = |u: &Vector| gap(u) - v.dot(u);
        let mut scored: Vec<(f64, usize)> = probes.iter().enumerate().map(|(i, u)| (phi(u), i)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut found: Vec<(Vector, f64)> = scored.iter().take(4).map(|&(_, i)| sphere_search(&phi, &probes[i], 0.02, 1e-9)).collect();
        // the program's own tight directions are local minima candidates too
        let mut tight: Vec<(f64, usize)> = dirs.iter().enumerate().map(|(i, u)| (phi(u), i)).collect();
        tight.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if n > 1 {
            found.extend(tight.iter().take(n + 1).map(|&(_, i)| sphere_search(&phi, &dirs[i], 0.02, 1e-9)));
        } else {
            found.extend(tight.iter().take(2).map(|&(val, i)| (dirs[i].clone(), val)));
        }
        let m = found.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
        let m = m.min(tight[0].0);
        if m > best.1 {
            best = (v.clone(), m);
        }
        if m >= t - 1e-10 * scale {
            break;
        }
        for (u, _) in found {
            if dirs.iter().all(|d| (d - &u).norm() > 1e-12) {
                gaps.push(gap(&u));
                dirs.push(u);
            }
        }
    }
    let diam = dirs.iter().map(|u| l.width(u)).fold(0.0, f64::max);
    let tol = COVER_TOL * diam.max(1e-300);
    Ok(Containment { feasible: best.1 >= -tol, slack: best.1, translation: best.0, directions: dirs.len() })
}

/// Dispatches to the exact program when `L` is a full-dimensional polytope.
pub fn translate_into(k: &BodyExpr, l: &BodyExpr, tol: f64, seed: u64) -> Result<Containment> {
    if let Some(p) = l.to_polytope() {
        if p.is_full_dimensional() {
            return max_slack_into_hpolytope(k, &p.to_hrep()?, tol);
        }
    }
    let mut c = translate_into_support(k, l, 0, seed)?;
    c.feasible = c.slack >= -tol;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_id: usize,
    pub feasible: bool,
    pub slack: f64,
    pub translation: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub k: usize,
    pub frames: usize,
    pub seed: u64,
    pub tol: f64,
    pub records: Vec<FrameRecord>,
    pub min_slack: f64,
    pub verdict: bool,
}

impl CoverReport {
    /// First frame whose shadow cannot be covered.
    pub fn witness(&self) -> Option<&FrameRecord> {
        self.records.iter().find(|r| !r.feasible)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "frames": self.frames,
            "seed": self.seed,
            "tol": self.tol,
            "min_slack": self.min_slack,
            "verdict": self.verdict,
            "witness_frame": self.witness().map(|r| r.frame_id),
            "records": self.records.iter().map(|r| json!({
                "frame_id": r.frame_id,
                "feasible": r.feasible,
                "slack": r.slack,
                "v": r.translation.iter().copied().collect::<Vec<f64>>(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame_id,feasible,slack");
        for i in 0..self.k {
            out.push_str(&format!(",v{i}"));
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!("{},{},{}", r.frame_id, r.feasible, crate::report::fmt_real(r.slack)));
            for x in r.translation.iter() {
                out.push(',');
                out.push_str(&crate::report::fmt_real(*x));
            }
            out.push('\n');
        }
        out
    }
}

/// Absolute covering tolerance for a target body.
pub fn cover_tolerance(l: &BodyExpr) -> f64 {
    COVER_TOL * projections::diameter(l).max(1e-300)
}

/// Covering test over an explicit set of frames.
pub fn shadows_cover_frames(k: &BodyExpr, l: &BodyExpr, frames: &[Frame], seed: u64) -> Result<CoverReport> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: k.dim() });
    }
    let sub = frames.first().map_or(0, |f| f.k);
    let tol = cover_tolerance(l);
    let records: Vec<FrameRecord> = frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let ks = project(k, f)?;
            let ls = project(l, f)?;
            let c = translate_into(&ks, &ls, tol, crate::rng::derive_seed(seed, &format!("frame{i}")))?;
            Ok(FrameRecord { frame_id: i, feasible: c.feasible, slack: c.slack, translation: c.translation })
        })
        .collect::<Result<_>>()?;
    let min_slack = records.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let verdict = records.iter().all(|r| r.feasible);
    Ok(CoverReport { k: sub, frames: frames.len(), seed, tol, records, min_slack, verdict })
}

/// Tests whether every sampled `k`-shadow of `K` translates into the
/// corresponding shadow of `L`. Frames are Haar-random and seed-determined.
pub fn shadows_cover(k: &BodyExpr, l: &BodyExpr, sub: usize, n_frames: usize, seed: u64) -> Result<CoverReport> {
    let frames = sample_grassmannian(l.dim(), sub, n_frames, seed)?;
    shadows_cover_frames(k, l, &frames, seed)
}

/// Whether covering verdicts agree before and after applying `x ↦ ψx + t`.
pub fn covering_invariance_affine(
    k: &BodyExpr,
    l: &BodyExpr,
    sub: usize,
    psi: &Matrix,
    shift: &Vector,
    n_frames: usize,
    seed: u64,
) -> Result<bool> {
    if psi.determinant().abs() < 1e-12 {
        return Err(Error::InvalidInput("affine map must be nonsingular".into()));
    }
    let before = shadows_cover(k, l, sub, n_frames, seed)?.verdict;
    let pk = BodyExpr::affine(psi.clone(), shift.clone(), k.clone())?;
    let pl = BodyExpr::affine(psi.clone(), shift.clone(), l.clone())?;
    let after = shadows_cover(&pk, &pl, sub, n_frames, seed)?.verdict;
    Ok(before == after)
}

/// `ℝ^j → ℝ^n` zero-padding embedding.
pub fn pad_embedding(j: usize, n: usize) -> Matrix {
    Matrix::from_fn(n, j, |r, c| if r == c { 1.0 } else { 0.0 })
}

/// Embeds both bodies into `ℝ^n` by zero padding and tests covering there.
pub fn embedding_preserves_cover(k: &BodyExpr, l: &BodyExpr, n: usize, sub: usize, n_frames: usize, seed: u64) -> Result<bool> {
    let j = l.dim();
    if n <= j || sub > j {
        return Err(Error::ParameterOutOfRange(format!("need n > j >= k, got n = {n}, j = {j}, k = {sub}")));
    }
    let m = pad_embedding(j, n);
    let ek = BodyExpr::affine(m.clone(), Vector::zeros(n), k.clone())?;
    let el = BodyExpr::affine(m, Vector::zeros(n), l.clone())?;
    Ok(shadows_cover(&ek, &el, sub, n_frames, seed)?.verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexCriterionReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest value of `V(Δ, K) − V(Δ, L)` relative to `V(Δ, L)`.
    pub worst_excess: f64,
    pub first_violation: Option<usize>,
}

/// Samples random simplices `Δ` and compares `V_{n-1,1}(Δ, K)` with
/// `V_{n-1,1}(Δ, L)`. A violation proves that no translate of `K` fits in `L`.
pub fn simplex_mixed_criterion(k: &BodyExpr, l: &BodyExpr, n_simplices: usize, seed: u64) -> Result<SimplexCriterionReport> {
    let n = l.dim();
    let excess: Vec<f64> = (0..n_simplices)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            loop {
                let pts: Vec<Vector> = (0..=n).map(|_| random_direction(&mut rng, n)).collect();
                let s = VPolytope::new(n, pts)?;
                if s.is_full_dimensional() && s.volume() > 1e-6 {
                    let a = mixed_vol_first(&s, k)?;
                    let b = mixed_vol_first(&s, l)?;
                    return Ok((a - b) / b.abs().max(1e-300));
                }
            }
        })
        .collect::<Result<_>>()?;
    let bad: Vec<usize> = (0..excess.len()).filter(|&i| excess[i] > 1e-9).collect();
    Ok(SimplexCriterionReport {
        samples: n_simplices,
        violations: bad.len(),
        worst_excess: excess.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        first_violation: bad.first().copied(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn cube() -> VPolytope {
        VPolytope::unit_cube(3)
    }

    #[test]
    fn cube_into_itself() {
        let h = cube().to_hrep().unwrap();
        let v = translate_into_polytopes(&cube(), &h).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn half_cube_centered() {
        let h = cube().to_hrep().unwrap();
        let c = max_slack_into_hpolytope(&cube().scale(0.5).unwrap().into(), &h, 1e-9).unwrap();
        assert!((c.slack - 0.25).abs() < 1e-12);
        assert!((c.translation - vector(&[0.25, 0.25, 0.25])).norm() < 1e-12);
    }

    #[test]
    fn ball_into_larger_ball() {
        let k = BodyExpr::unit_ball(3);
        let l = BodyExpr::ball(vector(&[0.5, 0.0, 0.0]), 2.0).unwrap();
        let c = translate_into_support(&k, &l, 0, 1).unwrap();
        assert!(c.feasible);
        assert!((c.slack - 1.0).abs() < 1e-6, "{}", c.slack);
        assert!((c.translation - vector(&[0.5, 0.0, 0.0])).norm() < 1e-4);
    }

    #[test]
    fn one_dimensional_support_path_is_exact() {
        let k = BodyExpr::Polytope(VPolytope::segment(vector(&[0.0]), vector(&[1.0])).unwrap());
        let l = BodyExpr::ball(vector(&[3.0]), 1.0).unwrap();
        let c = translate_into_support(&k, &l, 0, 0).unwrap();
        assert!((c.slack - 0.5).abs() < 1e-12);
        assert!((c.translation[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_frame() {
        let b = BodyExpr::Polytope(cube());
        let r = shadows_cover(&b, &b, 2, 5, 3).unwrap();
        assert!(r.verdict);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("frame_id,feasible,slack,v0,v1"));
    }
}
