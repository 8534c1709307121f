//! Checkers for the classical inequalities around shadow covering: slack
//! reports for Steinhagen, Brunn–Minkowski, Minkowski's mixed volume
//! inequality, the cylinder-body inequality and the covering volume bounds.

use rand::Rng;
use serde_json::{json, Value};

use crate::blaschke::{cylinder_body_sample, CylinderSample};
use crate::constructions::difference_body;
use crate::containment::{max_slack_into_hpolytope, shadows_cover, shadows_cover_frames};
use crate::convex_core::{BodyExpr, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::lp::maximize;
use crate::mixed_volumes::{intrinsic_volumes_exact, mixed_vol_first, volume, VolumeEstimate};
use crate::projections::{inradius_body, min_width, project_polytope, sample_grassmannian};
use crate::report::fmt_real;
use crate::rng::stream;

/// Absolute tolerance of closed-form comparisons.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub verdict: bool,
    pub tol: f64,
    pub seed: Option<u64>,
    /// `|slack| ≤ tol`.
    pub equality: bool,
    /// Homothety (or translate) flag for the equality cases, when decidable.
    pub homothetic: Option<bool>,
    pub context: Value,
}

impl InequalityReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, tol: f64, seed: Option<u64>, context: Value) -> Self {
        let slack = rhs - lhs;
        InequalityReport {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            verdict: slack >= -tol,
            tol,
            seed,
            equality: slack.abs() <= tol,
            homothetic: None,
            context,
        }
    }

    fn with_homothety(mut self, flag: Option<bool>) -> Self {
        self.homothetic = flag;
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "verdict": self.verdict,
            "tol": self.tol,
            "seed": self.seed,
            "equality": self.equality,
            "homothetic": self.homothetic,
            "context": self.context,
        })
    }

    pub const CSV_HEADER: &'static str = "name,lhs,rhs,slack,verdict,tol,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.name,
            fmt_real(self.lhs),
            fmt_real(self.rhs),
            fmt_real(self.slack),
            self.verdict,
            fmt_real(self.tol),
            self.seed.map_or(String::new(), |s| s.to_string())
        )
    }
}

pub fn reports_to_csv(reports: &[InequalityReport]) -> String {
    let mut out = String::from(InequalityReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Steinhagen's constant: `√(i+2)/(2i+2)` for even `i`, `1/(2√i)` for odd.
pub fn sigma(i: usize) -> f64 {
    assert!(i >= 1, "sigma is defined for i >= 1");
    let x = i as f64;
    if i % 2 == 0 {
        (x + 2.0).sqrt() / (2.0 * x + 2.0)
    } else {
        1.0 / (2.0 * x.sqrt())
    }
}

fn radii_tol(k: &BodyExpr) -> f64 {
    // inradius and width are exact for polytopes plus balls, approximate otherwise
    if k.split_ball().is_some() {
        EXACT_TOL
    } else {
        1e-6 * crate::projections::diameter(k)
    }
}

/// `r_K ≥ σ_n d_K`.
pub fn steinhagen_check(k: &BodyExpr) -> Result<InequalityReport> {
    let n = k.dim();
    let (r, _) = inradius_body(k)?;
    let (d, _) = min_width(k)?;
    Ok(InequalityReport::new("steinhagen", sigma(n) * d, r, radii_tol(k), None, json!({"n": n, "inradius": r, "min_width": d})))
}

/// Surface area and volume when a closed form is available.
pub fn exact_surface_and_volume(k: &BodyExpr) -> Option<(f64, f64)> {
    if let Some(p) = k.to_polytope() {
        if p.is_full_dimensional() {
            return Some((p.surface_area(), p.volume()));
        }
    }
    let iv = intrinsic_volumes_exact(k)?;
    let n = k.dim();
    Some((2.0 * iv.values[n - 1], iv.values[n]))
}

/// `σ_i d_K S(K) ≤ n V(K)`, necessary for membership in the `i`-cylinder class.
pub fn cylinder_inequality_check(k: &BodyExpr, i: usize) -> Result<InequalityReport> {
    let n = k.dim();
    if i < 1 || i > n {
        return Err(Error::ParameterOutOfRange(format!("need 1 <= i <= n = {n}, got {i}")));
    }
    let (s, v) = exact_surface_and_volume(k)
        .ok_or_else(|| Error::PreconditionNotMet("surface area and volume need a closed form".into()))?;
    let (d, _) = min_width(k)?;
    let lhs = sigma(i) * d * s;
    let rhs = n as f64 * v;
    Ok(InequalityReport::new(
        &format!("cylinder_inequality_i{i}"),
        lhs,
        rhs,
        radii_tol(k).max(EXACT_TOL) * s.max(1.0),
        None,
        json!({"n": n, "i": i, "sigma": sigma(i), "min_width": d, "surface_area": s, "volume": v}),
    ))
}

/// Volume with the tolerance it contributes: `EXACT_TOL` relative when
/// exact, three standard errors otherwise.
fn volume_with_tol(b: &BodyExpr, samples: usize, seed: u64) -> Result<(VolumeEstimate, f64)> {
    let v = volume(b, samples, seed)?;
    let tol = if v.exact { EXACT_TOL * v.value.abs().max(1.0) } else { 3.0 * v.std_error };
    Ok((v, tol))
}

/// Whether two polytopes agree after normalizing volume and centroid.
pub fn homothetic(k: &VPolytope, l: &VPolytope) -> bool {
    let n = k.dim();
    let norm = |p: &VPolytope| {
        let s = p.volume().powf(-1.0 / n as f64);
        p.translate(&-p.centroid()).scale(s)
    };
    match (norm(k), norm(l)) {
        (Ok(a), Ok(b)) => a.vertex_hausdorff(&b) <= 1e-6,
        _ => false,
    }
}

fn polytope_pair(k: &BodyExpr, l: &BodyExpr) -> Option<(VPolytope, VPolytope)> {
    let (a, b) = (k.to_polytope()?, l.to_polytope()?);
    (a.is_full_dimensional() && b.is_full_dimensional()).then_some((a, b))
}

/// `V((1−λ)K + λL)^{1/n} ≥ (1−λ)V(K)^{1/n} + λV(L)^{1/n}`.
pub fn brunn_minkowski_check(k: &BodyExpr, l: &BodyExpr, lambda: f64, samples: usize, seed: u64) -> Result<InequalityReport> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParameterOutOfRange(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let n = k.dim() as f64;
    let mix = BodyExpr::sum(vec![BodyExpr::scaled(1.0 - lambda, k.clone())?, BodyExpr::scaled(lambda, l.clone())?])?;
    let (vk, tk) = volume_with_tol(k, samples, crate::rng::derive_seed(seed, "K"))?;
    let (vl, tl) = volume_with_tol(l, samples, crate::rng::derive_seed(seed, "L"))?;
    let (vm, tm) = volume_with_tol(&mix, samples, crate::rng::derive_seed(seed, "M"))?;
    let root = |v: f64| v.max(0.0).powf(1.0 / n);
    // first-order propagation of each volume tolerance through the n-th root
    let dr = |v: f64, t: f64| if v > 0.0 { root(v) / (n * v) * t } else { t.powf(1.0 / n) };
    let lhs = (1.0 - lambda) * root(vk.value) + lambda * root(vl.value);
    let rhs = root(vm.value);
    let tol = (1.0 - lambda) * dr(vk.value, tk) + lambda * dr(vl.value, tl) + dr(vm.value, tm);
    let exact = vk.exact && vl.exact && vm.exact;
    let flag = polytope_pair(k, l).map(|(a, b)| homothetic(&a, &b));
    Ok(InequalityReport::new(
        "brunn_minkowski",
        lhs,
        rhs,
        tol,
        (!exact).then_some(seed),
        json!({"lambda": lambda, "volume_K": vk.value, "volume_L": vl.value, "volume_mix": vm.value, "exact": exact}),
    )
    .with_homothety(flag))
}

/// `V_{n−1,1}(K, L)^n ≥ V(K)^{n−1} V(L)`.
pub fn minkowski_mixed_check(k: &VPolytope, l: &BodyExpr, samples: usize, seed: u64) -> Result<InequalityReport> {
    let n = k.dim();
    let mixed = mixed_vol_first(k, l)?;
    let vk = k.volume();
    let (vl, tl) = volume_with_tol(l, samples, seed)?;
    let lhs = vk.powi(n as i32 - 1) * vl.value;
    let rhs = mixed.powi(n as i32);
    let tol = EXACT_TOL * lhs.abs().max(rhs.abs()).max(1.0) + vk.powi(n as i32 - 1) * if vl.exact { 0.0 } else { tl };
    let flag = l.to_polytope().filter(|p| p.is_full_dimensional()).map(|p| homothetic(k, &p));
    Ok(InequalityReport::new(
        "minkowski_mixed",
        lhs,
        rhs,
        tol,
        (!vl.exact).then_some(seed),
        json!({"mixed_volume": mixed, "volume_K": vk, "volume_L": vl.value}),
    )
    .with_homothety(flag))
}

fn require_cover(k: &BodyExpr, l: &BodyExpr, sub: usize, frames: usize, seed: u64) -> Result<crate::containment::CoverReport> {
    let cover = shadows_cover(k, l, sub, frames, seed)?;
    if !cover.verdict {
        return Err(Error::PreconditionNotMet(format!(
            "shadows do not cover at k = {sub}: min slack {:.3e} at frame {}",
            cover.min_slack,
            cover.witness().map_or(0, |w| w.frame_id)
        )));
    }
    Ok(cover)
}

fn translates(k: &BodyExpr, l: &VPolytope) -> Option<bool> {
    let p = k.to_polytope()?;
    Some(p.translate(&-p.centroid()).vertex_hausdorff(&l.translate(&-l.centroid())) <= 1e-6)
}

/// `V(K) ≤ V(L)` for a cylinder body `L` whose `k`-shadows cover those of `K`.
pub fn cylvol_harness(l: &VPolytope, k: &BodyExpr, sub: usize, frames: usize, seed: u64, samples: usize) -> Result<InequalityReport> {
    let lb: BodyExpr = l.clone().into();
    let cover = require_cover(k, &lb, sub, frames, seed)?;
    let (vk, tk) = volume_with_tol(k, samples, seed)?;
    let vl = l.volume();
    let tol = tk + EXACT_TOL * vl.max(1.0);
    let report = InequalityReport::new(
        "cylinder_volume",
        vk.value,
        vl,
        tol,
        Some(seed),
        json!({"k": sub, "frames": frames, "min_slack": cover.min_slack, "exact": vk.exact}),
    );
    let flag = if report.equality { translates(k, l) } else { None };
    Ok(report.with_homothety(flag))
}

/// `V(K) ≤ n V(L)` when the `(n−1)`-shadows of `L` cover those of `K`.
pub fn volume_ratio_check(k: &BodyExpr, l: &BodyExpr, frames: usize, seed: u64, samples: usize) -> Result<InequalityReport> {
    let n = l.dim();
    let cover = require_cover(k, l, n - 1, frames, seed)?;
    let (vk, tk) = volume_with_tol(k, samples, crate::rng::derive_seed(seed, "K"))?;
    let (vl, tl) = volume_with_tol(l, samples, crate::rng::derive_seed(seed, "L"))?;
    Ok(InequalityReport::new(
        "volume_ratio",
        vk.value,
        n as f64 * vl.value,
        tk + n as f64 * tl,
        Some(seed),
        json!({"ratio": vk.value / vl.value, "n": n, "min_slack": cover.min_slack}),
    ))
}

/// Whether the vertex set of `L` is symmetric about its centroid.
pub fn centrally_symmetric(l: &VPolytope) -> bool {
    let c = l.centroid();
    let tol = 1e-9 * l.diameter().max(1e-300);
    l.vertices().iter().all(|v| {
        let w = 2.0 * c - v;
        l.vertices().iter().any(|x| (x - &w).norm() <= tol)
    })
}

/// `V(K) ≤ V(L)` for centrally symmetric `L` covering `K` at `k = n − 1`,
/// together with the direct check that `½K + ½(−K)` translates into `L`.
pub fn symmetric_covering_volume_check(k: &BodyExpr, l: &VPolytope, frames: usize, seed: u64, samples: usize) -> Result<InequalityReport> {
    if !centrally_symmetric(l) {
        return Err(Error::PreconditionNotMet("L is not centrally symmetric".into()));
    }
    let n = l.dim();
    let lb: BodyExpr = l.clone().into();
    let cover = require_cover(k, &lb, n - 1, frames, seed)?;
    let diff: BodyExpr = match k.to_polytope() {
        Some(p) => difference_body(&p)?.into(),
        None => BodyExpr::sum(vec![BodyExpr::scaled(0.5, k.clone())?, BodyExpr::scaled(0.5, k.reflect())?])?,
    };
    let tol_c = crate::containment::cover_tolerance(&lb);
    let fits = max_slack_into_hpolytope(&diff, &l.to_hrep()?, tol_c)?;
    let (vk, tk) = volume_with_tol(k, samples, seed)?;
    let vl = l.volume();
    Ok(InequalityReport::new(
        "symmetric_covering_volume",
        vk.value,
        vl,
        tk + EXACT_TOL * vl.max(1.0),
        Some(seed),
        json!({"difference_body_fits": fits.feasible, "difference_body_slack": fits.slack, "min_slack": cover.min_slack}),
    ))
}

/// Largest `s` such that every sampled `k`-shadow of `sK` translates into
/// the shadow of `L`; one LP in `(s, v)` per frame.
pub fn covering_scale(k: &VPolytope, l: &VPolytope, sub: usize, frames: usize, seed: u64) -> Result<f64> {
    let n = l.dim();
    let mut best = f64::INFINITY;
    for f in sample_grassmannian(n, sub, frames, seed)? {
        let ks = project_polytope(k, &f)?;
        let ls = project_polytope(l, &f)?.to_hrep()?;
        let rows: Vec<Vec<f64>> = ls
            .facets()
            .iter()
            .map(|h| std::iter::once(ks.support(&h.normal)).chain(h.normal.iter().copied()).collect())
            .collect();
        let rhs: Vec<f64> = ls.facets().iter().map(|h| h.offset).collect();
        let mut c = vec![0.0; sub + 1];
        c[0] = 1.0;
        let (x, _) = maximize(&c, &rows, &rhs).optimal().map(|(x, v)| (x.to_vec(), v)).ok_or(Error::InfeasibleLP)?;
        best = best.min(x[0]);
    }
    if !(best > 0.0) {
        return Err(Error::DegenerateBody);
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct CylinderTrial {
    pub sample: CylinderSample,
    pub scale: f64,
    pub report: InequalityReport,
}

/// One randomized volume trial: a cylinder body `L`, a random polytope `K`
/// shrunk until its shadows fit, then `V(K) ≤ V(L)`.
pub fn cylinder_volume_trial(n: usize, sub: usize, frames: usize, seed: u64) -> Result<CylinderTrial> {
    let sample = cylinder_body_sample(n, sub, 2, crate::rng::derive_seed(seed, "L"))?;
    let mut rng = stream(crate::rng::derive_seed(seed, "K"), 0);
    let k = loop {
        let count = n + 1 + rng.random_range(0..6);
        let pts: Vec<Vector> = (0..count).map(|_| Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)))).collect();
        if let Ok(p) = VPolytope::new(n, pts) {
            if p.is_full_dimensional() && p.volume() > 1e-3 {
                break p;
            }
        }
    };
    let s = covering_scale(&k, &sample.polytope, sub, frames, seed)?;
    let shrunk = k.scale(s * (1.0 - 1e-9))?;
    let report = cylvol_harness(&sample.polytope, &shrunk.into(), sub, frames, seed, 0)?;
    Ok(CylinderTrial { sample, scale: s, report })
}

/// Covering test on explicit frames, for callers that reuse a frame set.
pub fn cover_on(k: &BodyExpr, l: &BodyExpr, frames: &[crate::projections::Frame], seed: u64) -> Result<bool> {
    Ok(shadows_cover_frames(k, l, frames, seed)?.verdict)
}
