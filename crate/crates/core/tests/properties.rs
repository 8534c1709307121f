use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use shadowcover::blaschke::{cylinder_body_sample, minkowski_solve};
use shadowcover::containment::translate_into_polytopes;
use shadowcover::inequalities::{cylinder_inequality_check, homothetic, InequalityReport};
use shadowcover::lp::maximize;
use shadowcover::report::fmt_real;
use shadowcover::rng::{derive_seed, stream};
use shadowcover::{BodyExpr, Vector, VPolytope};

fn gaussian_polytope(dim: usize, count: usize, seed: u64) -> VPolytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..count)
        .map(|_| Vector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal))))
        .collect();
    VPolytope::new(dim, pts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reals_round_trip_through_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn streams_repeat(seed in any::<u64>(), index in 0u64..1000) {
        let a: Vec<u64> = stream(seed, index).random_iter().take(4).collect();
        let b: Vec<u64> = stream(seed, index).random_iter().take(4).collect();
        prop_assert_eq!(&a, &b);
        let c: Vec<u64> = stream(seed, index + 1).random_iter().take(4).collect();
        prop_assert_ne!(a, c);
        prop_assert_ne!(derive_seed(seed, "a"), derive_seed(seed, "b"));
    }

    #[test]
    fn lp_box_optimum(c in prop::collection::vec(-5.0f64..5.0, 1..6), seed in any::<u64>()) {
        let n = c.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            rows.push(e.clone());
            rhs.push(a[i]);
            e[i] = -1.0;
            rows.push(e);
            rhs.push(a[i]);
        }
        let out = maximize(&c, &rows, &rhs);
        let (x, value) = out.optimal().expect("box LP is bounded and feasible");
        let expected: f64 = c.iter().zip(&a).map(|(ci, ai)| ci.abs() * ai).sum();
        prop_assert!((value - expected).abs() <= 1e-9 * (1.0 + expected));
        prop_assert!(x.iter().zip(&a).all(|(xi, ai)| xi.abs() <= ai + 1e-9));
    }

    #[test]
    fn volume_is_translation_and_scale_covariant(dim in 2usize..5, extra in 1usize..10, seed in any::<u64>(), t in 0.1f64..3.0) {
        let p = gaussian_polytope(dim, dim + extra, seed);
        prop_assume!(p.is_full_dimensional());
        let v = p.volume();
        let shift = Vector::from_element(dim, 1.7);
        prop_assert!((p.translate(&shift).volume() - v).abs() <= 1e-10 * v.max(1.0));
        let scaled = p.scale(t).unwrap().volume();
        prop_assert!((scaled - t.powi(dim as i32) * v).abs() <= 1e-10 * scaled.max(1.0));
    }

    #[test]
    fn brunn_minkowski_holds_for_polytope_sums(dim in 2usize..4, seed in any::<u64>()) {
        let k = gaussian_polytope(dim, dim + 4, seed);
        let l = gaussian_polytope(dim, dim + 4, seed ^ 0x9e37_79b9);
        prop_assume!(k.is_full_dimensional() && l.is_full_dimensional());
        let root = |v: f64| v.powf(1.0 / dim as f64);
        let sum = k.minkowski_sum(&l).unwrap();
        prop_assert!(root(sum.volume()) >= root(k.volume()) + root(l.volume()) - 1e-10);
    }

    #[test]
    fn surface_measure_is_balanced(dim in 2usize..5, seed in any::<u64>()) {
        let p = gaussian_polytope(dim, dim + 6, seed);
        prop_assume!(p.is_full_dimensional());
        let s = p.surface_measure().unwrap();
        prop_assert!(s.centroid().norm() <= 1e-10 * s.total_mass());
        prop_assert!((s.total_mass() - p.surface_area()).abs() <= 1e-10 * s.total_mass());
        prop_assert!(s.spans());
    }

    #[test]
    fn shrunken_copy_translates_inside(dim in 2usize..5, seed in any::<u64>(), t in 0.05f64..0.95) {
        let l = gaussian_polytope(dim, dim + 5, seed);
        prop_assume!(l.is_full_dimensional());
        let k = l.scale(t).unwrap().translate(&Vector::from_element(dim, 10.0));
        let v = translate_into_polytopes(&k, &l.to_hrep().unwrap());
        prop_assert!(v.is_some());
        let moved = k.translate(&v.unwrap());
        let h = l.to_hrep().unwrap();
        prop_assert!(moved.vertices().iter().all(|p| h.contains(p, 1e-9)));
    }

    #[test]
    fn report_rows_match_header(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0) {
        let r = InequalityReport::new("probe", lhs, rhs, 1e-9, None, serde_json::Value::Null);
        let row = r.csv_row();
        prop_assert_eq!(row.split(',').count(), InequalityReport::CSV_HEADER.split(',').count());
        prop_assert_eq!(r.verdict, lhs <= rhs + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn minkowski_solver_recovers_polytope(dim in 2usize..4, extra in 1usize..9, seed in any::<u64>()) {
        let p = gaussian_polytope(dim, dim + extra, seed);
        prop_assume!(p.is_full_dimensional() && p.volume() > 1e-2);
        let s = p.surface_measure().unwrap();
        let sol = minkowski_solve(&s, 1e-8).unwrap();
        prop_assert!(sol.residual <= 1e-6, "residual {}", sol.residual);
        prop_assert!(homothetic(&sol.polytope, &p));
        prop_assert!((sol.polytope.volume() - p.volume()).abs() <= 1e-6 * p.volume());
    }

    #[test]
    fn cylinder_samples_satisfy_every_index(seed in any::<u64>()) {
        let sample = cylinder_body_sample(3, 2, 2, seed).unwrap();
        let body = BodyExpr::Polytope(sample.polytope);
        for i in 1..=3 {
            let r = cylinder_inequality_check(&body, i).unwrap();
            prop_assert!(r.verdict, "i = {}: {} > {}", i, r.lhs, r.rhs);
        }
    }
}
