//! Builders for the named bodies: regular simplices, the rounded simplices
//! `K^ε = εΔ + ρB`, counterexample pairs in higher dimension, difference
//! bodies, bounding cylinders and Reuleaux polygons.

use serde_json::{json, Value};

use crate::convex_core::{BodyExpr, DirectPart, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::{binomial, columns, unit, unit_ball_volume, Vector};
use crate::mixed_volumes::{
    cartesian_intrinsic, intrinsic_volumes_exact, steiner_fit, IntrinsicVolumes, SteinerFit,
};
use crate::projections::{project_polytope, Frame};

fn check_dim(n: usize) -> Result<()> {
    if !(2..=6).contains(&n) {
        return Err(Error::ParameterOutOfRange(format!("dimension must lie in [2, 6], got {n}")));
    }
    Ok(())
}

/// Regular simplex with the given edge length, centered at the origin.
///
/// Built from the scaled standard basis of `ℝ^{n+1}` and expressed in the
/// Helmert basis of the hyperplane `Σ x_i = 0`.
pub fn regular_simplex(n: usize, edge: f64) -> Result<VPolytope> {
    if n == 0 || n > 6 {
        return Err(Error::ParameterOutOfRange(format!("dimension must lie in [1, 6], got {n}")));
    }
    if !(edge > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("edge must be positive, got {edge}")));
    }
    let s = edge / std::f64::consts::SQRT_2;
    let c = s / (n + 1) as f64;
    let helmert: Vec<Vector> = (1..=n)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            Vector::from_iterator(n + 1, (0..=n).map(|i| if i < k { 1.0 / norm } else if i == k { -(k as f64) / norm } else { 0.0 }))
        })
        .collect();
    let pts = (0..=n)
        .map(|i| {
            let mut p = Vector::from_element(n + 1, -c);
            p[i] += s;
            Vector::from_iterator(n, helmert.iter().map(|b| b.dot(&p)))
        })
        .collect();
    VPolytope::new(n, pts)
}

/// Radius of the ball term of `K^ε`.
pub fn k_epsilon_radius(n: usize, eps: f64) -> f64 {
    (1.0 - eps) / (n as f64 * std::f64::consts::SQRT_2)
}

/// `K^ε = εΔ + ((1 − ε)/(n√2)) B` with `Δ` the unit-edge regular simplex.
pub fn k_epsilon_body(n: usize, eps: f64) -> Result<BodyExpr> {
    check_dim(n)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::ParameterOutOfRange(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    BodyExpr::sum(vec![
        BodyExpr::scaled(eps, regular_simplex(n, 1.0)?.into())?,
        BodyExpr::ball(Vector::zeros(n), k_epsilon_radius(n, eps))?,
    ])
}

/// `V(K^ε)` from the intrinsic volumes of the simplex:
/// `Σ_j κ_{n−j} ε^j V_j(Δ) ρ^{n−j}`.
pub fn k_epsilon_volume(simplex: &IntrinsicVolumes, eps: f64) -> f64 {
    let n = simplex.dim;
    let rho = k_epsilon_radius(n, eps);
    (0..=n).map(|j| unit_ball_volume(n - j) * eps.powi(j as i32) * simplex.values[j] * rho.powi((n - j) as i32)).sum()
}

/// Intrinsic volumes of the unit regular simplex: exact for `n ≤ 3`,
/// otherwise fitted from Monte Carlo volumes with the exactly known entries
/// (`V_0`, `V_{n-1}`, `V_n`) substituted.
pub fn simplex_intrinsic(n: usize, samples: usize, seed: u64) -> Result<(IntrinsicVolumes, Option<SteinerFit>)> {
    let delta = regular_simplex(n, 1.0)?;
    let body = BodyExpr::Polytope(delta.clone());
    if let Some(iv) = intrinsic_volumes_exact(&body) {
        return Ok((iv, None));
    }
    let radii: Vec<f64> = (1..=2 * n + 2).map(|i| 0.08 * i as f64).collect();
    let fit = steiner_fit(&body, &radii, samples, seed)?;
    let mut iv = fit.coeffs.to_intrinsic();
    iv.values[0] = 1.0;
    iv.values[n - 1] = 0.5 * delta.surface_area();
    iv.values[n] = delta.volume();
    Ok((iv, Some(fit)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalEpsilon {
    pub epsilon: f64,
    /// `|V(K^ε) − V(Δ)|` at the returned point.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub exact: bool,
}

/// Threshold where `V(K^ε)` crosses `V(Δ)`, by bisection on the Steiner
/// polynomial of the simplex. `g(1) = 0` trivially, so the bracket is the
/// first sign change on a grid over `[0, 1)`.
pub fn critical_epsilon(n: usize, tol: f64, samples: usize, seed: u64) -> Result<CriticalEpsilon> {
    check_dim(n)?;
    let (iv, fit) = simplex_intrinsic(n, samples, seed)?;
    let vd = iv.values[n];
    let g = |e: f64| k_epsilon_volume(&iv, e) - vd;
    let grid = 200;
    let mut bracket = None;
    for i in 0..grid {
        let (a, b) = (i as f64 / grid as f64, (i + 1) as f64 / grid as f64);
        if b >= 1.0 {
            break;
        }
        if g(a) < 0.0 && g(b) > 0.0 {
            bracket = Some((a, b));
            break;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::BracketFailure { lo: 0.0, hi: 1.0 })?;
    let original = (lo, hi);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v.abs() <= tol * 1e-3 || hi - lo < 1e-15 {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = g(mid).abs();
    if residual > tol {
        return Err(Error::BracketFailure { lo: original.0, hi: original.1 });
    }
    Ok(CriticalEpsilon { epsilon: mid, residual, bracket: original, exact: fit.is_none() })
}

pub fn difference_body(k: &VPolytope) -> Result<VPolytope> {
    k.minkowski_sum(&k.reflect())?.scale(0.5)
}

#[derive(Debug, Clone)]
pub struct CounterexamplePair {
    pub n: usize,
    pub k: usize,
    pub big: BodyExpr,
    pub small: BodyExpr,
    pub epsilon: f64,
    pub params: Value,
}

impl CounterexamplePair {
    pub fn to_json(&self) -> Value {
        json!({"K": self.big.to_json(), "L": self.small.to_json(), "n": self.n, "k": self.k, "params": self.params})
    }
}

/// The rounded-simplex pair in `ℝ^n`: every `(n−1)`-shadow of `K^ε` fits in
/// the corresponding shadow of `Δ`.
pub fn simplex_pair(n: usize, eps: f64) -> Result<CounterexamplePair> {
    Ok(CounterexamplePair {
        n,
        k: n - 1,
        big: k_epsilon_body(n, eps)?,
        small: regular_simplex(n, 1.0)?.into(),
        epsilon: eps,
        params: json!({"construction": "rounded_simplex", "epsilon": eps, "ball_radius": k_epsilon_radius(n, eps)}),
    })
}

/// Base pair `(K̂, L̂)` in `ℝ^{k+1}`: the rounded simplex for `k ≥ 2`, the
/// planar difference body against its triangle for `k = 1`.
fn base_pair(k: usize, eps_pair: f64) -> Result<(BodyExpr, BodyExpr, &'static str)> {
    if k == 1 {
        let tri = regular_simplex(2, 1.0)?;
        return Ok((difference_body(&tri)?.into(), tri.into(), "difference_body"));
    }
    Ok((k_epsilon_body(k + 1, eps_pair)?, regular_simplex(k + 1, 1.0)?.into(), "rounded_simplex"))
}

/// `K = K̂ ⊕ εC`, `L = L̂ ⊕ εC` with `C` the unit cube of the orthogonal
/// complement of `ℝ^{k+1}` in `ℝ^n`.
pub fn general_counterexample(n: usize, k: usize, eps_pair: f64, eps_cube: f64) -> Result<CounterexamplePair> {
    if n > 6 || k < 1 || k >= n {
        return Err(Error::ParameterOutOfRange(format!("need 1 <= k < n <= 6, got k = {k}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&eps_pair) || eps_cube < 0.0 || !eps_cube.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("bad parameters eps_pair = {eps_pair}, eps_cube = {eps_cube}")));
    }
    let (kh, lh, name) = base_pair(k, eps_pair)?;
    let base = k + 1;
    let params = json!({
        "construction": name,
        "epsilon": eps_pair,
        "eps_cube": eps_cube,
        "base_dim": base,
        "degenerate": base < n && eps_cube == 0.0,
    });
    if base == n {
        return Ok(CounterexamplePair { n, k, big: kh, small: lh, epsilon: eps_pair, params });
    }
    let rest = n - base;
    let cube = VPolytope::cuboid(&vec![0.0; rest], &vec![eps_cube; rest])?;
    let f1 = columns(&(0..base).map(|i| unit(n, i)).collect::<Vec<_>>(), n);
    let f2 = columns(&(base..n).map(|i| unit(n, i)).collect::<Vec<_>>(), n);
    let embed = |b: BodyExpr| {
        BodyExpr::direct_sum(vec![
            DirectPart { body: b, frame: f1.clone() },
            DirectPart { body: cube.clone().into(), frame: f2.clone() },
        ])
    };
    Ok(CounterexamplePair { n, k, big: embed(kh)?, small: embed(lh)?, epsilon: eps_pair, params })
}

/// Intrinsic volumes of `εC` for the unit cube `C` of dimension `d`.
pub fn cube_intrinsic(d: usize, eps: f64) -> IntrinsicVolumes {
    IntrinsicVolumes { dim: d, values: (0..=d).map(|j| binomial(d, j) * eps.powi(j as i32)).collect() }
}

/// Estimated intrinsic volumes of a base body with a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicEstimate {
    pub values: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl IntrinsicEstimate {
    pub fn exact(iv: &IntrinsicVolumes) -> Self {
        let m = iv.values.len();
        IntrinsicEstimate { values: iv.values.clone(), covariance: vec![vec![0.0; m]; m] }
    }

    pub fn from_fit(fit: &SteinerFit) -> Self {
        let n = fit.coeffs.dim;
        let iv = fit.coeffs.to_intrinsic();
        let scale: Vec<f64> = (0..=n).map(|j| 1.0 / unit_ball_volume(n - j)).collect();
        let covariance = (0..=n)
            .map(|i| (0..=n).map(|j| fit.covariance[i][j] * scale[i] * scale[j]).collect())
            .collect();
        IntrinsicEstimate { values: iv.values, covariance }
    }

    /// Product with an exactly known body, propagating the covariance.
    pub fn times(&self, other: &IntrinsicVolumes) -> IntrinsicEstimate {
        let a = self.values.len();
        let m = a + other.values.len() - 1;
        // V_m = Σ_i W[m][i] · self_i with W[m][i] = other_{m−i}
        let w = |r: usize, i: usize| if r >= i && r - i < other.values.len() { other.values[r - i] } else { 0.0 };
        let values = (0..m).map(|r| (0..a).map(|i| w(r, i) * self.values[i]).sum()).collect();
        let covariance = (0..m)
            .map(|r| {
                (0..m)
                    .map(|s| {
                        let mut v = 0.0;
                        for i in 0..a {
                            for j in 0..a {
                                v += w(r, i) * self.covariance[i][j] * w(s, j);
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        IntrinsicEstimate { values, covariance }
    }

    pub fn std_error(&self, m: usize) -> f64 {
        self.covariance[m][m].max(0.0).sqrt()
    }
}

/// One intrinsic-volume comparison `V_m(K) − V_m(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGap {
    pub m: usize,
    pub big: f64,
    pub small: f64,
    pub gap: f64,
    pub sigma: f64,
    pub exact_gap: Option<f64>,
}

/// Intrinsic-volume estimates of the base pair `(K̂, L̂)` in `ℝ^{k+1}`.
/// Polytopes with an exact formula are exact; other bodies go through a
/// Monte Carlo Steiner fit, so their values carry a covariance.
#[derive(Debug, Clone)]
pub struct BaseEstimates {
    pub k: usize,
    pub big: IntrinsicEstimate,
    pub small: IntrinsicEstimate,
    pub exact_big: Option<IntrinsicVolumes>,
    pub exact_small: Option<IntrinsicVolumes>,
}

pub fn base_estimates(k: usize, eps_pair: f64, samples: usize, seed: u64) -> Result<BaseEstimates> {
    let (kh, lh, _) = base_pair(k, eps_pair)?;
    let est = |b: &BodyExpr, tag: &str| -> Result<IntrinsicEstimate> {
        if b.to_polytope().is_some() {
            if let Some(iv) = intrinsic_volumes_exact(b) {
                return Ok(IntrinsicEstimate::exact(&iv));
            }
        }
        let scale = crate::projections::diameter(b);
        let radii: Vec<f64> = [0.0, 0.1, 0.2, 0.4, 0.8, 1.2].iter().map(|r| r * scale).collect();
        let fit = steiner_fit(b, &radii, samples, crate::rng::derive_seed(seed, tag))?;
        Ok(IntrinsicEstimate::from_fit(&fit))
    };
    Ok(BaseEstimates {
        k,
        big: est(&kh, "big")?,
        small: est(&lh, "small")?,
        exact_big: intrinsic_volumes_exact(&kh),
        exact_small: intrinsic_volumes_exact(&lh),
    })
}

impl BaseEstimates {
    /// Gaps `V_m(K) − V_m(L)` for `m > k` after padding with `εC` in `ℝ^n`.
    pub fn gaps(&self, n: usize, eps_cube: f64) -> Vec<VolumeGap> {
        let cube = cube_intrinsic(n - self.k - 1, eps_cube);
        let big = self.big.times(&cube);
        let small = self.small.times(&cube);
        let exact = match (&self.exact_big, &self.exact_small) {
            (Some(a), Some(b)) => Some((cartesian_intrinsic(a, &cube), cartesian_intrinsic(b, &cube))),
            _ => None,
        };
        ((self.k + 1)..=n)
            .map(|m| VolumeGap {
                m,
                big: big.values[m],
                small: small.values[m],
                gap: big.values[m] - small.values[m],
                sigma: (big.covariance[m][m] + small.covariance[m][m]).max(0.0).sqrt(),
                exact_gap: exact.as_ref().map(|(a, b)| a.values[m] - b.values[m]),
            })
            .collect()
    }
}

/// Gap report for `V_m`, `m > k`, of a generated pair.
pub fn counterexample_gaps(pair: &CounterexamplePair, samples: usize, seed: u64) -> Result<Vec<VolumeGap>> {
    let eps_cube = pair.params["eps_cube"].as_f64().unwrap_or(0.0);
    Ok(base_estimates(pair.k, pair.epsilon, samples, seed)?.gaps(pair.n, eps_cube))
}

/// Halves the cube scale, starting from `1/2`, until every gap `V_m(K) − V_m(L)`,
/// `m > k`, exceeds three standard errors.
pub fn auto_eps_cube(n: usize, k: usize, eps_pair: f64, samples: usize, seed: u64) -> Result<(f64, Vec<VolumeGap>)> {
    let base = base_estimates(k, eps_pair, samples, seed)?;
    let mut eps = 0.5;
    for _ in 0..30 {
        let gaps = base.gaps(n, eps);
        if gaps.iter().all(|g| g.gap > 0.0 && g.gap > 3.0 * g.sigma) {
            return Ok((eps, gaps));
        }
        eps *= 0.5;
    }
    Err(Error::ParameterOutOfRange("no cube scale separates the intrinsic volumes".into()))
}

/// Orthogonal cylinder `L_v ⊕ [m, m + D] v` around `L`, with `v` the
/// direction of a diameter (first maximal vertex pair in index order).
pub fn bounding_cylinder(l: &VPolytope) -> Result<(BodyExpr, Vector)> {
    if !l.is_full_dimensional() {
        return Err(Error::DegenerateBody);
    }
    let n = l.dim();
    let vs = l.vertices();
    let mut best = (0.0, 0, 0);
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let d = (&vs[i] - &vs[j]).norm();
            if d > best.0 * (1.0 + 1e-12) {
                best = (d, i, j);
            }
        }
    }
    let (diam, i, j) = best;
    let v = (&vs[j] - &vs[i]) / diam;
    let axis = Frame::from_span(&[v.clone()])?;
    let perp = axis.complement();
    let shadow = project_polytope(l, &perp)?;
    let lo = -l.support(&-&v);
    let segment = VPolytope::segment(Vector::from_element(1, lo), Vector::from_element(1, lo + diam))?;
    let body = BodyExpr::direct_sum(vec![
        DirectPart { body: shadow.into(), frame: columns(&perp.basis, n) },
        DirectPart { body: segment.into(), frame: columns(&[v.clone()], n) },
    ])?;
    Ok((body, v))
}

/// Reuleaux triangle of the given width, approximated by `arc_points`
/// points on each of its three arcs.
pub fn reuleaux_triangle(width: f64, arc_points: usize) -> Result<BodyExpr> {
    if !(width > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("width must be positive, got {width}")));
    }
    let arc_points = arc_points.max(2);
    let r = width / 3f64.sqrt();
    let corners: Vec<(f64, f64)> = (0..3)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / 3.0;
            (r * a.cos(), r * a.sin())
        })
        .collect();
    let mut pts = Vec::with_capacity(3 * arc_points);
    for (i, &(cx, cy)) in corners.iter().enumerate() {
        // arc opposite to corner i, centered at the corner, spanning 60°
        let mid = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / 3.0 + std::f64::consts::PI;
        for s in 0..arc_points {
            let t = mid - std::f64::consts::PI / 6.0 + (std::f64::consts::PI / 3.0) * s as f64 / (arc_points - 1) as f64;
            pts.push(Vector::from_column_slice(&[cx + width * t.cos(), cy + width * t.sin()]));
        }
    }
    Ok(VPolytope::new(2, pts)?.into())
}
