use priorint::known_variance::{
    acceptance_region, critical_constant_bounds, pratt_interval, standard_interval,
};
use priorint::special::{normal_cdf, normal_quantile, t_quantile};
use priorint::spline::{MonotoneCubicB, SplineFile};
use priorint::unknown_variance::interval_from_data;
use priorint::{Interval, ProblemConfig};
use proptest::prelude::*;

const T: f64 = 2.068_657_610_419_041;

fn spline_strategy() -> impl Strategy<Value = MonotoneCubicB> {
    prop::collection::vec(-0.25f64..0.25, 15).prop_filter_map("shape", |dev| {
        let mut values = vec![-8.0 + T];
        values.extend(dev.iter().enumerate().map(|(i, d)| i as f64 - 7.0 + T + d));
        values.push(8.0 + T);
        MonotoneCubicB::build(&values, 8.0, T).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_cdf_symmetric_and_monotone(x in -30.0f64..30.0, dx in 1e-6f64..1.0) {
        prop_assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        prop_assert!(normal_cdf(x + dx) >= normal_cdf(x));
    }

    #[test]
    fn quantile_inverts_tail(a in 1e-12f64..0.999) {
        let z = normal_quantile(a).unwrap();
        prop_assert!((normal_cdf(-z) - a).abs() <= 1e-12 * a.max(1e-3));
    }

    #[test]
    fn t_quantile_exceeds_normal(a in 0.001f64..0.4, m in 1u64..200) {
        prop_assert!(t_quantile(a, m).unwrap() > normal_quantile(a).unwrap());
    }

    #[test]
    fn closed_form_intervals(x in -50.0f64..50.0, alpha in 0.001f64..0.5) {
        let s = standard_interval(x, alpha);
        prop_assert!(s.contains(x));
        let p = pratt_interval(x, alpha);
        prop_assert!(p.contains(0.0) && p.contains(x));
        let m = pratt_interval(-x, alpha);
        prop_assert!((p.lower + m.upper).abs() < 1e-12);
    }

    #[test]
    fn interval_scale_roundtrip(a in -10.0f64..10.0, len in 0.0f64..5.0, k in 0.01f64..100.0) {
        let i = Interval::new(a, a + len);
        let j = i.scale(k).scale(1.0 / k);
        prop_assert!((j.lower - i.lower).abs() < 1e-12 * (1.0 + a.abs()));
        prop_assert!((i.scale(k).length() - k * len).abs() < 1e-12 * (1.0 + k * len));
    }

    #[test]
    fn mixed_region_properties(theta in -9.0f64..9.0, w in prop::sample::select(vec![0.01, 0.1, 1.0])) {
        let cfg = ProblemConfig::default().with_w(w);
        let r = acceptance_region(theta, &cfg).unwrap();
        prop_assert!((r.coverage() - 0.95).abs() <= 1e-8);
        let (lo, hi) = critical_constant_bounds(w, cfg.z_half_alpha());
        let c = r.c.unwrap();
        prop_assert!(lo <= c && c <= hi);
        let m = acceptance_region(-theta, &cfg).unwrap();
        prop_assert!((r.lower + m.upper).abs() < 1e-9 && (r.upper + m.lower).abs() < 1e-9);
    }

    #[test]
    fn spline_inverse_roundtrip(b in spline_strategy(), v in -15.0f64..15.0) {
        let y = b.inverse(v);
        prop_assert!((b.eval(y) - v).abs() < 1e-9);
    }

    #[test]
    fn spline_intervals_ordered(b in spline_strategy(), xbar in -5.0f64..5.0, s in 0.01f64..4.0) {
        let i = interval_from_data(xbar, s, 24, &b).unwrap();
        prop_assert!(i.lower <= i.upper);
        // reflection: data −x̄ gives the mirrored interval
        let j = interval_from_data(-xbar, s, 24, &b).unwrap();
        prop_assert!((i.lower + j.upper).abs() < 1e-12 && (i.upper + j.lower).abs() < 1e-12);
    }

    #[test]
    fn spline_json_roundtrip(b in spline_strategy()) {
        let file = SplineFile::from_spline(&b, 24, 0.05, 0.1);
        let text = file.to_json();
        let again = SplineFile::from_json(&text).unwrap();
        prop_assert_eq!(again.to_json(), text);
        prop_assert_eq!(again.to_spline().unwrap(), b);
    }
}
