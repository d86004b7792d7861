use fluxgraph::timeseries::{difference, normal_quantile, Forecaster, Series};
use proptest::prelude::*;

fn series(min: usize, max: usize) -> impl Strategy<Value = Series> {
    prop::collection::vec(-50.0f64..50.0, min..max).prop_map(|v| Series::from_values(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn differencing_composes(s in series(3, 40)) {
        let twice = difference(&difference(&s, 1).unwrap(), 1).unwrap();
        let direct = difference(&s, 2).unwrap();
        prop_assert_eq!(twice.origin(), direct.origin());
        for (a, b) in twice.values().iter().zip(direct.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn normal_quantile_is_increasing(a in 1e-6f64..0.999999, b in 1e-6f64..0.999999) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(normal_quantile(lo) <= normal_quantile(hi));
        prop_assert!((normal_quantile(lo) + normal_quantile(1.0 - lo)).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn forecasts_are_deterministic_and_ordered(s in series(8, 20), h in 1usize..5) {
        let f = Forecaster::new(s.clone());
        let again = Forecaster::new(s);
        let fc = f.forecast(h).unwrap();
        prop_assert_eq!(&fc, &again.forecast(h).unwrap());
        prop_assert!(fc.std_errs.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        let qs: Vec<f64> = [0.05, 0.3, 0.5, 0.8, 0.99]
            .iter()
            .map(|&q| f.quantile(h, q).unwrap())
            .collect();
        prop_assert!(qs.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((qs[2] - fc.means[h - 1]).abs() < 1e-9);
    }
}
