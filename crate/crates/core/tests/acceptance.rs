//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Independent oracles (closed forms, Monte Carlo, direct sums) are
//! computed here rather than taken from the code under test.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use shadowcover::blaschke::{blaschke_sum, cylinder_body_sample, minkowski_solve, SOLVER_TOL};
use shadowcover::constructions::{critical_epsilon, k_epsilon_body, k_epsilon_volume, regular_simplex, simplex_intrinsic, simplex_pair};
use shadowcover::containment::shadows_cover;
use shadowcover::convex_core::{BodyExpr, VPolytope};
use shadowcover::experiments::verify_counterexample;
use shadowcover::inequalities::{cylinder_inequality_check, cylinder_volume_trial};
use shadowcover::linalg::Vector;
use shadowcover::mixed_volumes::{mixed_vol_first, steiner_exact, steiner_fit, volume_exact, volume_mc};
use shadowcover::projections::{inradius_body, min_width, project, sample_grassmannian};
use shadowcover::report::to_json_string;
use shadowcover::rng::{derive_seed, stream};

const SEED: u64 = 20_240_917;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn random_polytope(n: usize, seed: u64, max_facets: usize) -> VPolytope {
    let mut rng = stream(seed, 0);
    loop {
        let count = n + 1 + rng.random_range(0..12);
        let pts: Vec<Vector> = (0..count)
            .map(|_| Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal))))
            .collect();
        if let Ok(p) = VPolytope::new(n, pts) {
            if p.is_full_dimensional() && p.volume() > 1e-2 && p.hull().facets.len() <= max_facets {
                return p;
            }
        }
    }
}

fn centered(p: &VPolytope) -> VPolytope {
    p.translate(&-p.centroid())
}

fn counterexample_report(seed: u64) -> String {
    let run = verify_counterexample(3, 2, 0.9, 1000, 1, seed).unwrap();
    to_json_string(&run.to_json())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let run = single_thread(|| verify_counterexample(3, 2, 0.9, 1000, 1, SEED)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let vk = run.gaps[0].big;
    let vd = run.gaps[0].small;
    let closed = 1.0 / (6.0 * 2f64.sqrt());
    // Monte Carlo oracle for the rounded simplex
    let mc = volume_mc(&run.pair.big, 2_000_000, derive_seed(SEED, "c1-mc")).unwrap();
    let ok = (0.1214..=0.1224).contains(&vk)
        && (vd - closed).abs() <= 1e-9
        && vk > vd
        && (mc.value - vk).abs() <= 4.0 * mc.std_error
        && run.cover.verdict
        && run.cover.min_slack >= -1e-6
        && elapsed <= 60.0;
    outcome(
        ok,
        format!(
            "V(K) = {vk:.6} (mc {:.6} ± {:.1e}), V(simplex) = {vd:.9}, cover {} min slack {:.3e}, {elapsed:.2} s",
            mc.value, mc.std_error, run.cover.verdict, run.cover.min_slack
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=5usize {
        let tau = |m: usize| ((m + 1) as f64).sqrt() / (2f64.powf(m as f64 / 2.0) * (1..=m).product::<usize>() as f64);
        let s = regular_simplex(n, 1.0).unwrap();
        let body: BodyExpr = s.clone().into();
        let r_closed = 1.0 / ((2 * n * (n + 1)) as f64).sqrt();
        let nf = n as f64;
        let d_closed = if n % 2 == 1 { 2.0 * nf.sqrt() * r_closed } else { 2.0 * (nf + 1.0) / (nf + 2.0).sqrt() * r_closed };
        let (r, _) = inradius_body(&body).unwrap();
        let (d, _) = min_width(&body).unwrap();
        for (got, want) in [(s.volume(), tau(n)), (s.surface_area(), (n + 1) as f64 * tau(n - 1)), (r, r_closed), (d, d_closed)] {
            worst = worst.max(rel(got, want));
        }
    }
    outcome(worst <= 1e-8, format!("worst relative error {worst:.2e} over n = 2..5"))
}

fn criterion_3() -> Outcome {
    let delta: BodyExpr = regular_simplex(3, 1.0).unwrap().into();
    let bound = 1.0 / (3.0 * 2f64.sqrt());
    let frames = sample_grassmannian(3, 2, 1000, derive_seed(SEED, "c3")).unwrap();
    let min = frames
        .iter()
        .map(|f| inradius_body(&project(&delta, f).unwrap()).unwrap().0)
        .fold(f64::INFINITY, f64::min);
    outcome(min >= bound - 1e-6, format!("min projected inradius {min:.6} vs bound {bound:.6}"))
}

fn criterion_4() -> Outcome {
    let mut worst_self: f64 = 0.0;
    let mut worst_ball: f64 = 0.0;
    for n in [3usize, 4] {
        for j in 0..50u64 {
            let p = random_polytope(n, derive_seed(SEED, &format!("c4-{n}-{j}")), usize::MAX);
            let v = mixed_vol_first(&p, &p.clone().into()).unwrap();
            worst_self = worst_self.max(rel(v, p.volume()));
            if n == 3 {
                let b = mixed_vol_first(&p, &BodyExpr::unit_ball(3)).unwrap();
                worst_ball = worst_ball.max(rel(b, p.surface_area() / 3.0));
            }
        }
    }
    outcome(
        worst_self <= 1e-9 && worst_ball <= 1e-9,
        format!("V(P,P) vs V(P) {worst_self:.2e}, V(P,B) vs S/3 {worst_ball:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let cube: BodyExpr = VPolytope::unit_cube(3).into();
    let truth = [1.0, 6.0, 3.0 * PI, 4.0 * PI / 3.0];
    let radii = [0.0, 0.5, 1.0, 1.5, 2.0];
    // 10^7 samples in total across the radii
    let fit = steiner_fit(&cube, &radii, 10_000_000 / radii.len(), derive_seed(SEED, "c5")).unwrap();
    let exact = steiner_exact(&cube).unwrap();
    let mc_err = (0..4).map(|p| rel(fit.coeffs.of_power(p), truth[p])).fold(0.0, f64::max);
    let exact_err = (0..4).map(|p| (exact.of_power(p) - truth[p]).abs()).fold(0.0, f64::max);
    outcome(mc_err <= 0.01 && exact_err <= 1e-9, format!("fit relative error {mc_err:.2e}, exact error {exact_err:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut worst_h: f64 = 0.0;
    let mut worst_r: f64 = 0.0;
    let mut failures = 0;
    for j in 0..50u64 {
        let p = random_polytope(3, derive_seed(SEED, &format!("c6-{j}")), 20);
        match minkowski_solve(&p.surface_measure().unwrap(), SOLVER_TOL) {
            Ok(s) => {
                worst_h = worst_h.max(s.polytope.vertex_hausdorff(&centered(&p)));
                worst_r = worst_r.max(s.residual);
            }
            Err(_) => failures += 1,
        }
    }
    let mut worst_2d: f64 = 0.0;
    for j in 0..10u64 {
        let a = random_polytope(2, derive_seed(SEED, &format!("c6a-{j}")), usize::MAX);
        let b = random_polytope(2, derive_seed(SEED, &format!("c6b-{j}")), usize::MAX);
        let sum = blaschke_sum(&a, &b, 1.0, 1.0).unwrap();
        let mink = a.minkowski_sum(&b).unwrap();
        worst_2d = worst_2d.max(sum.polytope.vertex_hausdorff(&centered(&mink)));
    }
    outcome(
        failures == 0 && worst_h <= 1e-6 && worst_r <= 1e-8 && worst_2d <= 1e-6,
        format!("3D round trip Hausdorff {worst_h:.2e}, residual {worst_r:.2e}, {failures} failures; 2D Blaschke vs Minkowski {worst_2d:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let cube: BodyExpr = VPolytope::unit_cube(3).into();
    let delta: BodyExpr = regular_simplex(3, 1.0).unwrap().into();
    let c1 = cylinder_inequality_check(&cube, 1).unwrap();
    let d3 = cylinder_inequality_check(&delta, 3).unwrap();
    let d2 = cylinder_inequality_check(&delta, 2).unwrap();
    // closed forms: cube 3 = 3, simplex at 3 is 1/(2√2) on both sides
    let closed = (c1.lhs - 3.0).abs() <= 1e-9 && (d3.lhs - 1.0 / (2.0 * 2f64.sqrt())).abs() <= 1e-9;
    let mut samples_ok = 0;
    let mut worst = f64::INFINITY;
    for j in 0..100u64 {
        let s = cylinder_body_sample(3, 2, 3, derive_seed(SEED, &format!("c7-{j}"))).unwrap();
        let r = cylinder_inequality_check(&s.polytope.into(), 2).unwrap();
        if r.verdict {
            samples_ok += 1;
        }
        worst = worst.min(r.slack / r.rhs);
    }
    let ok = closed && c1.slack.abs() <= 1e-9 && d3.slack.abs() <= 1e-9 && d2.slack <= -0.05 && samples_ok == 100;
    outcome(
        ok,
        format!(
            "cube i=1 slack {:.1e}, simplex i=3 slack {:.1e}, simplex i=2 slack {:.5}, C(3,2) samples {samples_ok}/100 (min relative slack {worst:.3})",
            c1.slack, d3.slack, d2.slack
        ),
    )
}

struct TrialSummary {
    passed: usize,
    total: usize,
    ratios: Vec<(usize, f64)>,
}

fn theorem_trials() -> TrialSummary {
    let mut passed = 0;
    let mut total = 0;
    let mut ratios = vec![];
    for n in [3usize, 4] {
        for j in 0..50u64 {
            total += 1;
            if let Ok(t) = cylinder_volume_trial(n, n - 1, 200, derive_seed(SEED, &format!("c8-{n}-{j}"))) {
                if t.report.verdict {
                    passed += 1;
                }
                ratios.push((n, t.report.lhs / t.report.rhs));
            }
        }
    }
    TrialSummary { passed, total, ratios }
}

fn criterion_8(trials: &TrialSummary) -> Outcome {
    let max = trials.ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    outcome(
        trials.passed == trials.total && trials.total == 100,
        format!("{}/{} trials with V(K) <= V(L), largest V(K)/V(L) {max:.4}", trials.passed, trials.total),
    )
}

fn criterion_9(trials: &TrialSummary) -> Outcome {
    let pair = simplex_pair(3, 0.9).unwrap();
    let cover = shadows_cover(&pair.big, &pair.small, 2, 1000, derive_seed(SEED, "c9")).unwrap();
    let ratio = volume_exact(&pair.big).unwrap() / volume_exact(&pair.small).unwrap();
    let mut ok = cover.verdict && ratio <= 3.0 && (ratio - 1.034).abs() < 1e-3;
    // K = L covers trivially
    let cube: BodyExpr = VPolytope::unit_cube(3).into();
    ok &= shadows_cover(&cube, &cube, 2, 50, SEED).unwrap().verdict;
    let worst = trials.ratios.iter().map(|&(n, r)| r / n as f64).fold(0.0, f64::max);
    ok &= trials.ratios.len() == trials.total && worst <= 1.0;
    outcome(ok, format!("counterexample ratio {ratio:.4} <= 3, trial pairs max V(K)/(n V(L)) {worst:.4}, K = L ratio 1"))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let run = verify_counterexample(4, 2, 0.9, 500, 4_000_000, derive_seed(SEED, "c10")).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut ok = run.cover.verdict && elapsed <= 600.0 && run.gaps.len() == 2;
    let mut parts = vec![];
    for g in &run.gaps {
        let exact = g.exact_gap.unwrap_or(f64::NAN);
        // the exact gap is an independent check on the Monte Carlo estimate
        ok &= g.gap > 3.0 * g.sigma && (g.gap - exact).abs() <= 4.0 * g.sigma;
        parts.push(format!("V_{} gap {:.3e} ± {:.1e} (exact {:.3e})", g.m, g.gap, g.sigma, exact));
    }
    outcome(ok, format!("cover {} min slack {:.2e}, {}, {elapsed:.1} s", run.cover.verdict, run.cover.min_slack, parts.join(", ")))
}

fn criterion_11() -> Outcome {
    let c = critical_epsilon(3, 1e-6, 0, SEED).unwrap();
    let (iv, _) = simplex_intrinsic(3, 0, SEED).unwrap();
    let vd = 1.0 / (6.0 * 2f64.sqrt());
    let g = |e: f64| k_epsilon_volume(&iv, e) - vd;
    // the polyball volume route is independent of the Steiner polynomial
    let direct = |e: f64| volume_exact(&k_epsilon_body(3, e).unwrap()).unwrap() - vd;
    let ok = c.residual <= 1e-6 && g(0.0) < 0.0 && g(0.9) > 0.0 && direct(0.0) < 0.0 && direct(0.9) > 0.0 && direct(c.epsilon).abs() <= 1e-6;
    outcome(ok, format!("epsilon* = {:.9}, residual {:.1e}, g(0) = {:.4}, g(0.9) = {:.4}", c.epsilon, c.residual, g(0.0), g(0.9)))
}

fn criterion_12() -> Outcome {
    let one = single_thread(|| counterexample_report(SEED));
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| counterexample_report(SEED));
    outcome(one == many, format!("{} bytes, 1 vs 4 threads identical: {}", one.len(), one == many))
}

fn main() {
    let trials = theorem_trials();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("counterexample reproduction", Box::new(criterion_1)),
        ("simplex statistics", Box::new(criterion_2)),
        ("projected inradius bound", Box::new(criterion_3)),
        ("mixed-volume identities", Box::new(criterion_4)),
        ("Steiner consistency", Box::new(criterion_5)),
        ("Minkowski solver round trip", Box::new(criterion_6)),
        ("cylinder-body inequality", Box::new(criterion_7)),
        ("cylinder volume trials", Box::new(|| criterion_8(&trials))),
        ("volume ratio under covering", Box::new(|| criterion_9(&trials))),
        ("padded counterexample n=4 k=2", Box::new(criterion_10)),
        ("critical threshold", Box::new(criterion_11)),
        ("determinism across thread counts", Box::new(criterion_12)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1} s]",
            if o.ok { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
