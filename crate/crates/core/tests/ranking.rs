use approx::assert_relative_eq;
use macroplan::ranking::{sigmoid, RankingMode, RankingParams, WeightTable};
use macroplan::{RankingParamsF64, WeightTableF64};
use proptest::prelude::*;

fn params(alpha: f64) -> RankingParamsF64 {
    RankingParams { alpha, bonus: 10.0, c: 0.01 }
}

#[test]
fn sigmoid_landmarks() {
    assert_eq!(sigmoid(0.0f64), 0.0);
    assert_relative_eq!(sigmoid(1.0f64), (0.5f64).tanh(), epsilon = 1e-15);
    assert!(sigmoid(50.0f64) <= 1.0 && sigmoid(50.0f64) > 0.999_999);
    assert_relative_eq!(sigmoid(0.5f32), 0.244_918_66f32, epsilon = 1e-6);
}

#[test]
fn initial_weights_follow_mode() {
    let f: WeightTableF64<&str> = WeightTable::new(RankingMode::Frequency, params(0.001));
    let g: WeightTableF64<&str> = WeightTable::new(RankingMode::Gradient, params(0.001));
    assert_eq!(f.initial_weight(), 0.0);
    assert_eq!(g.initial_weight(), 1.0);
    assert_eq!(g.threshold, 1.0);
}

#[test]
fn frequency_adds_count_and_bonus() {
    let mut t: WeightTableF64<&str> = WeightTable::new(RankingMode::Frequency, params(0.001));
    for m in ["a", "b", "c"] {
        t.insert(m);
    }
    t.frequency_update([(&"a", 3), (&"b", 1), (&"c", 0)]);
    t.frequency_update([(&"b", 2)]);
    assert_eq!(t.weight(&"a"), Some(13.0));
    assert_eq!(t.weight(&"b"), Some(23.0));
    assert_eq!(t.weight(&"c"), Some(0.0));
    // Zero weights never rank; ties fall back to key order.
    t.frequency_update([(&"c", 3)]);
    let top: Vec<&str> = t.select_top_k(5).into_iter().map(|(k, _)| k).collect();
    assert_eq!(top, ["b", "a", "c"]);
    let mut tie: WeightTableF64<&str> = WeightTable::new(RankingMode::Frequency, params(0.001));
    tie.frequency_update([(&"z", 1), (&"y", 1), (&"x", 1)]);
    let top: Vec<&str> = tie.select_top_k(2).into_iter().map(|(k, _)| k).collect();
    assert_eq!(top, ["x", "y"]);
}

#[test]
fn failed_macro_runs_count_as_double_cost() {
    let mut a: WeightTableF64<&str> = WeightTable::new(RankingMode::Gradient, params(0.001));
    let mut b = a.clone();
    a.gradient_update(&"m", 40, None, 7);
    b.gradient_update(&"m", 40, Some(80), 7);
    assert_eq!(a.weight(&"m"), b.weight(&"m"));
    assert!(a.weight(&"m").unwrap() > 1.0);
}

#[test]
fn threshold_selection_orders_lightest_first() {
    let mut t: WeightTableF64<&str> = WeightTable::new(RankingMode::Gradient, params(0.001));
    t.gradient_update(&"good", 100, Some(20), 10);
    t.gradient_update(&"ok", 100, Some(90), 10);
    t.gradient_update(&"bad", 100, Some(150), 10);
    t.gradient_update(&"flat", 100, Some(100), 10);
    t.threshold_update(10);
    let sel: Vec<&str> = t.select_below_threshold().into_iter().map(|(k, _)| k).collect();
    assert_eq!(sel, ["good", "ok"]);
}

#[test]
fn single_precision_tables_work() {
    let mut t: WeightTable<f32, u8> = WeightTable::new(RankingMode::Gradient, RankingParams::default());
    t.gradient_update(&1, 100, Some(50), 9);
    assert_relative_eq!(t.weight(&1).unwrap(), 0.997_796, epsilon = 1e-5);
}

proptest! {
    #[test]
    fn sigmoid_is_odd_bounded_and_monotone(x in -30.0f64..30.0, d in 0.0001f64..5.0) {
        prop_assert!((sigmoid(x) + sigmoid(-x)).abs() < 1e-12);
        prop_assert!(sigmoid(x).abs() <= 1.0);
        prop_assert!(sigmoid(x + d) >= sigmoid(x));
    }

    #[test]
    fn saving_nodes_lowers_weight(n in 1u64..10_000, n_m in 0u64..20_000, l in 1usize..100) {
        let mut t: WeightTableF64<u8> = WeightTable::new(RankingMode::Gradient, params(0.001));
        t.gradient_update(&0, n, Some(n_m), l);
        let w = t.weight(&0).unwrap();
        prop_assert_eq!(w < 1.0, n_m < n);
        prop_assert_eq!(w > 1.0, n_m > n);
    }

    #[test]
    fn alpha_scales_weight_offsets(n in 1u64..1000, n_m in 0u64..2000, l in 1usize..50, alpha in 1e-4f64..1e-2, lambda in 0.1f64..10.0) {
        let offset = |a: f64| {
            let mut t: WeightTableF64<u8> = WeightTable::new(RankingMode::Gradient, params(a));
            t.gradient_update(&0, n, Some(n_m), l);
            t.threshold_update(l);
            (1.0 - t.weight(&0).unwrap(), 1.0 - t.threshold)
        };
        let (w1, t1) = offset(alpha);
        let (w2, t2) = offset(alpha * lambda);
        prop_assert!((w2 - lambda * w1).abs() <= 1e-9 * (1.0 + w2.abs()));
        prop_assert!((t2 - lambda * t1).abs() <= 1e-9 * (1.0 + t2.abs()));
    }
}
