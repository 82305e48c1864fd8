//! Property tests over randomly drawn valid models. Models are built from a
//! generated seed so that every case is valid by construction.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use maxstable::angular::{
    bp_pickands_to_weights2, complete_vertex_masses, weights_to_pickands2, AngularBp,
};
use maxstable::maxstable::{exponent_v, neg_v_i};
use maxstable::metrics::{ks_angular2, l1_angular};
use maxstable::priors::{eb_frechet_scale, eb_gumbel_loc_scale, weights_sample, weights_sample_model, DegreePrior};
use maxstable::quad::{integrate, integrate_region};
use maxstable::simulation::{AngularSampler, SeededRng, MAX_ARRIVALS};

fn model(seed: u64, d: usize, k: usize) -> AngularBp<f64> {
    weights_sample_model(k, d, &mut SeededRng::new(seed, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn completion_then_validation_passes(seed in any::<u64>(), d in 2usize..=3, k in 4usize..=9) {
        let mut rng = SeededRng::new(seed, 1);
        let phi = weights_sample(k, d, &mut rng).unwrap();
        let vertex = complete_vertex_masses(&phi, k, d).unwrap();
        let m = AngularBp::new(d, k, vertex, phi).unwrap();
        prop_assert!(m.validate().passed());
        let total: f64 = m.full_weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn integrated_coordinate_means_are_one_over_d(seed in any::<u64>(), d in 2usize..=3, k in 4usize..=7) {
        let m = model(seed, d, k);
        for j in 0..d {
            let mean = if d == 2 {
                integrate(|t| {
                    let w = if j == 0 { t } else { 1.0 - t };
                    w * m.density(&[t]).unwrap()
                }, 0.0, 1.0, 1e-13, 1e-12).value
            } else {
                integrate_region(3, |t| {
                    let w = if j < 2 { t[j] } else { 1.0 - t[0] - t[1] };
                    w * m.density(t).unwrap_or(0.0)
                }, 1e-11).value
            } + m.vertex_mass()[j];
            prop_assert!((mean - 1.0 / d as f64).abs() <= 1e-8, "coordinate {j}: {mean}");
        }
    }

    #[test]
    fn degree_elevation_preserves_density(seed in any::<u64>(), d in 2usize..=3, k in 4usize..=10, u in 0.01f64..0.98, v in 0.01f64..0.98) {
        let m = model(seed, d, k);
        let e = m.degree_elevate();
        prop_assert_eq!(e.k(), k + 1);
        let t: Vec<f64> = if d == 2 { vec![u] } else { vec![u * (1.0 - v), v * (1.0 - u) * 0.5] };
        let a = m.density(&t).unwrap();
        let b = e.density(&t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
        for (x, y) in m.vertex_mass().iter().zip(e.vertex_mass()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn bp_conversion_round_trip(seed in any::<u64>(), k in 2usize..=20) {
        let m = model(seed, 2, k);
        let back = bp_pickands_to_weights2(&weights_to_pickands2(&m).unwrap()).unwrap();
        for (a, b) in m.full_weights().iter().zip(back.full_weights()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn exponent_homogeneity(seed in any::<u64>(), d in 2usize..=3, k in 3usize..=8, c in 0.05f64..20.0, mask in 1usize..8) {
        let m = model(seed, d, k.max(d));
        let mut rng = SeededRng::new(seed, 2);
        let y: Vec<f64> = (0..d).map(|_| (rng.random::<f64>() * 4.0 - 2.0).exp()).collect();
        let cy: Vec<f64> = y.iter().map(|v| v * c).collect();
        let v = exponent_v(&m, &y).unwrap();
        prop_assert!((exponent_v(&m, &cy).unwrap() - v / c).abs() <= 1e-10 * v / c);
        let idx: Vec<usize> = (0..d).filter(|j| mask & (1 << j) != 0).collect();
        prop_assume!(!idx.is_empty());
        let a = neg_v_i(&m, &y, &idx).unwrap();
        let b = neg_v_i(&m, &cy, &idx).unwrap();
        let expect = a * c.powi(-(idx.len() as i32) - 1);
        prop_assert!((b - expect).abs() <= 1e-10 * expect.abs().max(1e-300));
    }

    #[test]
    fn stopping_rule_is_safe(seed in any::<u64>(), d in 2usize..=3) {
        let m = model(seed, d, d + 2);
        let s = AngularSampler::new(&m).unwrap();
        let mut a = SeededRng::new(seed, 3);
        let mut b = SeededRng::new(seed, 3);
        for _ in 0..200 {
            let x = s.sample_simple_capped(&mut a, MAX_ARRIVALS).unwrap();
            let y = s.sample_simple_capped(&mut b, 2 * MAX_ARRIVALS).unwrap();
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn eb_estimators_ignore_row_order(seed in any::<u64>(), m in 2usize..20) {
        let mut rng = SeededRng::new(seed, 4);
        let mut raw: Vec<Vec<f64>> = (0..200).map(|_| vec![1.0 / rng.random::<f64>(), 1.0 + rng.random::<f64>()]).collect();
        let f = eb_frechet_scale(&raw, m).unwrap();
        let g = eb_gumbel_loc_scale(&raw, m).unwrap();
        raw.shuffle(&mut rng);
        prop_assert_eq!(f, eb_frechet_scale(&raw, m).unwrap());
        prop_assert_eq!(g, eb_gumbel_loc_scale(&raw, m).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pickands_is_convex_and_bounded(seed in any::<u64>(), k in 2usize..=12, s in 0.0f64..=1.0, t in 0.0f64..=1.0, lam in 0.0f64..=1.0) {
        let m = model(seed, 2, k);
        let a = |x: f64| m.pickands(&[x]).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let v = a(x);
            prop_assert!(v >= x.max(1.0 - x) - 1e-12 && v <= 1.0 + 1e-12, "A({x}) = {v}");
        }
        let mid = lam * s + (1.0 - lam) * t;
        prop_assert!(a(mid) <= lam * a(s) + (1.0 - lam) * a(t) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn angular_metrics_are_symmetric_and_triangular(seed in any::<u64>(), k1 in 2usize..=6, k2 in 2usize..=6, k3 in 2usize..=6) {
        let (a, b, c) = (model(seed, 2, k1), model(seed ^ 1, 2, k2), model(seed ^ 2, 2, k3));
        for f in [ks_angular2 as fn(&AngularBp<f64>, &AngularBp<f64>) -> maxstable::Result<f64>, l1_angular] {
            let ab = f(&a, &b).unwrap();
            prop_assert!((ab - f(&b, &a).unwrap()).abs() <= 1e-9);
            prop_assert!(ab <= f(&a, &c).unwrap() + f(&c, &b).unwrap() + 1e-6);
            prop_assert!(f(&a, &a).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn degree_tail_bound() {
    let p = DegreePrior::with_defaults(3, 0.2).unwrap();
    for k in p.k_min()..=p.k_cap() {
        let bound = 2.0 * (-0.2 * ((k - p.k_min()) as f64).powi(2)).exp();
        assert!(p.tail(k) <= bound, "k = {k}: {} > {bound}", p.tail(k));
    }
}
