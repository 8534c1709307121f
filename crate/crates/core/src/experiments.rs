//! Reproducible experiment drivers: the counterexample verification and the
//! columned data behind the plots. All randomness derives from one root seed.

use serde_json::{json, Value};

use crate::constructions::{
    auto_eps_cube, counterexample_gaps, general_counterexample, k_epsilon_volume, simplex_intrinsic, simplex_pair, CounterexamplePair,
    VolumeGap,
};
use crate::containment::{shadows_cover, CoverReport};
use crate::error::{Error, Result};
use crate::mixed_volumes::intrinsic_volumes_exact;
use crate::report::fmt_real;
use crate::rng::derive_seed;

#[derive(Debug, Clone)]
pub struct CounterexampleRun {
    pub pair: CounterexamplePair,
    pub cover: CoverReport,
    pub gaps: Vec<VolumeGap>,
    /// Every gap `V_m(K) − V_m(L)`, `m > k`, is positive beyond its margin.
    pub volumes_ok: bool,
    pub verdict: bool,
}

fn gap_margin(g: &VolumeGap) -> f64 {
    if g.sigma > 0.0 {
        3.0 * g.sigma
    } else {
        1e-12 * g.small.abs().max(1.0)
    }
}

/// Exact gaps when both bodies have closed-form intrinsic volumes.
fn exact_gaps(pair: &CounterexamplePair) -> Option<Vec<VolumeGap>> {
    let a = intrinsic_volumes_exact(&pair.big)?;
    let b = intrinsic_volumes_exact(&pair.small)?;
    Some(
        ((pair.k + 1)..=pair.n)
            .map(|m| VolumeGap {
                m,
                big: a.values[m],
                small: b.values[m],
                gap: a.values[m] - b.values[m],
                sigma: 0.0,
                exact_gap: Some(a.values[m] - b.values[m]),
            })
            .collect(),
    )
}

/// Builds the pair, tests covering of the `k`-shadows on `frames` Haar frames
/// and compares the intrinsic volumes `V_m`, `m > k`.
///
/// `k = n − 1` gives the rounded-simplex pair; smaller `k` pads the base pair
/// with a cube whose scale is chosen so every gap clears three standard errors.
pub fn verify_counterexample(n: usize, k: usize, epsilon: f64, frames: usize, samples: usize, seed: u64) -> Result<CounterexampleRun> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::ParameterOutOfRange(format!("need 1 <= k < n, got n = {n}, k = {k}")));
    }
    let (pair, mc_gaps) = if k == n - 1 {
        (simplex_pair(n, epsilon)?, None)
    } else {
        let (eps_cube, gaps) = auto_eps_cube(n, k, epsilon, samples, derive_seed(seed, "volumes"))?;
        (general_counterexample(n, k, epsilon, eps_cube)?, Some(gaps))
    };
    let cover = shadows_cover(&pair.big, &pair.small, k, frames, derive_seed(seed, "frames"))?;
    // the padded pair is judged by its Monte Carlo margins; exact values ride along
    let gaps = match (mc_gaps, exact_gaps(&pair)) {
        (Some(g), _) => g,
        (None, Some(g)) => g,
        (None, None) => counterexample_gaps(&pair, samples, derive_seed(seed, "volumes"))?,
    };
    let volumes_ok = gaps.iter().all(|g| g.gap > gap_margin(g));
    let verdict = cover.verdict && volumes_ok;
    Ok(CounterexampleRun { pair, cover, gaps, volumes_ok, verdict })
}

impl CounterexampleRun {
    pub fn to_json(&self) -> Value {
        let mut cover = self.cover.to_json();
        cover.as_object_mut().expect("cover report is an object").remove("records");
        json!({
            "pair": self.pair.to_json(),
            "cover": cover,
            "frame_slacks": self.cover.records.iter().map(|r| r.slack).collect::<Vec<f64>>(),
            "gaps": self.gaps.iter().map(|g| json!({
                "m": g.m,
                "K": g.big,
                "L": g.small,
                "gap": g.gap,
                "sigma": g.sigma,
                "exact_gap": g.exact_gap,
            })).collect::<Vec<_>>(),
            "volumes_ok": self.volumes_ok,
            "verdict": self.verdict,
        })
    }
}

/// Columned text: a `#` header line, then whitespace-separated rows.
pub fn columns(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!("# {}\n", header.join(" "));
    for r in rows {
        let cell = |x: &f64| if x.fract() == 0.0 && x.abs() < 1e15 { format!("{}", *x as i64) } else { fmt_real(*x) };
        out.push_str(&r.iter().map(cell).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    out
}

/// `V(K^ε) − V(Δ)` on `ε = 0, 1/steps, …, 1` in `ℝ^n`.
pub fn epsilon_sweep(n: usize, steps: usize, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if steps == 0 {
        return Err(Error::ParameterOutOfRange("need at least one step".into()));
    }
    let (iv, _) = simplex_intrinsic(n, samples, derive_seed(seed, "simplex"))?;
    let vd = iv.values[n];
    Ok((0..=steps)
        .map(|i| {
            let e = i as f64 / steps as f64;
            let vk = k_epsilon_volume(&iv, e);
            vec![e, vk, vd, vk - vd]
        })
        .collect())
}

/// Histogram of per-frame covering slacks: rows `lo hi count`.
pub fn slack_histogram(cover: &CoverReport, bins: usize) -> Vec<Vec<f64>> {
    let slacks: Vec<f64> = cover.records.iter().map(|r| r.slack).collect();
    if slacks.is_empty() || bins == 0 {
        return vec![];
    }
    let lo = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slacks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for s in &slacks {
        let b = (((s - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts.iter().enumerate().map(|(b, &c)| vec![lo + b as f64 * width, lo + (b + 1) as f64 * width, c as f64]).collect()
}

/// `V(K^ε)/V(Δ)` for `n = 2..=max_n`: rows `n ratio`.
pub fn ratio_vs_n(max_n: usize, epsilon: f64, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (2..=max_n)
        .map(|n| {
            let (iv, _) = simplex_intrinsic(n, samples, derive_seed(seed, &format!("simplex{n}")))?;
            Ok(vec![n as f64, k_epsilon_volume(&iv, epsilon) / iv.values[n]])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_changes_sign_once() {
        let rows = epsilon_sweep(3, 100, 0, 1).unwrap();
        assert_eq!(rows.len(), 101);
        assert!(rows[0][3] < 0.0 && rows[90][3] > 0.0);
        let flips = rows[..100].windows(2).filter(|w| (w[0][3] < 0.0) != (w[1][3] < 0.0)).count();
        assert_eq!(flips, 1);
        assert!(rows[100][3].abs() < 1e-12);
    }

    #[test]
    fn verify_small_run() {
        let run = verify_counterexample(3, 2, 0.9, 20, 0, 5).unwrap();
        assert!(run.verdict, "{:?}", run.gaps);
        assert_eq!(run.gaps.len(), 1);
        let same = verify_counterexample(3, 2, 1.0, 20, 0, 5).unwrap();
        assert!(!same.volumes_ok);
    }

    #[test]
    fn histogram_counts_every_frame() {
        let run = verify_counterexample(3, 2, 0.9, 30, 0, 2).unwrap();
        let h = slack_histogram(&run.cover, 7);
        assert_eq!(h.iter().map(|r| r[2]).sum::<f64>(), 30.0);
    }
}
