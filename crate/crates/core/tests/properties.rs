use fst_core::analysis::{moment_curve, ClockTag};
use fst_core::ks::{ks_distance, rescaled_ks, EmpiricalCdf};
use fst_core::moment_clock::moment_time;
use fst_core::{detrend, raw_returns, DayGrid, IntervalClass, PriceSeries, ReturnSample, TradingDay};
use chrono::{NaiveDate, NaiveTime};
use proptest::prelude::*;

fn sample(v: Vec<f64>) -> ReturnSample {
    ReturnSample::from_values(v).unwrap()
}

/// Direct `sup |F_x - F_y|` over the merged support.
fn brute_sup(x: &[f64], y: &[f64]) -> f64 {
    let fx = EmpiricalCdf::new(x).unwrap();
    let fy = EmpiricalCdf::new(y).unwrap();
    x.iter().chain(y).map(|&z| (fx.eval(z) - fy.eval(z)).abs()).fold(0.0, f64::max)
}

fn values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-5.0f64..5.0, 1..max_len),
        // Small integer lattice: many ties.
        prop::collection::vec((-4i32..4).prop_map(f64::from), 1..max_len),
    ]
}

proptest! {
    #[test]
    fn ks_matches_direct_evaluation(x in values(40), y in values(40)) {
        let r = ks_distance(&sample(x.clone()), &sample(y.clone()));
        prop_assert_eq!(r.raw_sup, brute_sup(&x, &y));
        prop_assert!(r.raw_sup >= 0.0 && r.raw_sup <= 1.0);
    }

    #[test]
    fn ks_is_symmetric(x in values(40), y in values(40)) {
        let a = ks_distance(&sample(x.clone()), &sample(y.clone()));
        let b = ks_distance(&sample(y), &sample(x));
        prop_assert_eq!(a.raw_sup, b.raw_sup);
        prop_assert_eq!(a.d, b.d);
    }

    #[test]
    fn ks_invariant_under_monotone_relabeling(x in values(30), y in values(30), k in -3i32..4) {
        // Powers of two and a cube keep the order and are exact.
        let c = 2f64.powi(k);
        let f = |v: &f64| c * v * v * v + c * v;
        let a = ks_distance(&sample(x.clone()), &sample(y.clone()));
        let b = ks_distance(&sample(x.iter().map(f).collect()), &sample(y.iter().map(f).collect()));
        prop_assert_eq!(a.raw_sup, b.raw_sup);
    }

    #[test]
    fn rescaled_ks_is_scale_free(x in values(30), y in values(30), k in -4i32..5) {
        // y -> 2^k y and dtau -> 4^k dtau leave y / sqrt(dtau) unchanged.
        let c = 2f64.powi(k);
        let a = rescaled_ks(&sample(x.clone()), &sample(y.clone()), 0.5).unwrap();
        let b = rescaled_ks(&sample(x), &sample(y).scaled(c), 0.5 * c * c).unwrap();
        prop_assert_eq!(a.raw_sup, b.raw_sup);
    }

    #[test]
    fn detrend_is_idempotent(x in prop::collection::vec(-1.0f64..1.0, 1..60)) {
        let once = detrend(&sample(x));
        let twice = detrend(&once);
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
        prop_assert!(once.mean().abs() <= 1e-14);
    }

    #[test]
    fn moments_ignore_order_and_sign(x in prop::collection::vec(-1.0f64..1.0, 2..60), flips in prop::collection::vec(any::<bool>(), 60)) {
        let mut y: Vec<f64> = x.iter().zip(&flips).map(|(v, f)| if *f { -v } else { *v }).collect();
        y.reverse();
        let orders = [0.5, 1.0, 2.0, 3.0];
        let a = moment_curve(&[(1.0, sample(x))], &orders, ClockTag::Physical).unwrap();
        let b = moment_curve(&[(1.0, sample(y))], &orders, ClockTag::Physical).unwrap();
        for (p, q) in a.moments[0].iter().zip(&b.moments[0]) {
            prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(1e-300));
        }
    }

    #[test]
    fn moment_clock_scales_quadratically(x in prop::collection::vec(0.01f64..1.0, 2..40), c in 0.05f64..20.0, q in 0.5f64..4.0) {
        let x = sample(x);
        let y = x.scaled(1.7);
        let base = moment_time(&y, &x, q).unwrap().delta_tau_q;
        let scaled = moment_time(&y.scaled(c), &x, q).unwrap().delta_tau_q;
        prop_assert!((scaled / (c * c * base) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn contiguous_intraday_returns_telescope(
        steps in prop::collection::vec(prop::collection::vec(-0.01f64..0.01, 12), 1..8),
        a in 0usize..4, b in 4usize..8, c in 8usize..13,
    ) {
        let grid = DayGrid::new(NaiveTime::from_hms_opt(9, 30, 0).unwrap(), 60, 13).unwrap();
        let start = NaiveDate::from_ymd_opt(2011, 3, 1).unwrap();
        let days = steps
            .iter()
            .enumerate()
            .map(|(l, inc)| {
                let mut lp = vec![4.6];
                for d in inc {
                    lp.push(lp.last().unwrap() + d);
                }
                TradingDay { date: start + chrono::Days::new(l as u64), log_prices: lp }
            })
            .collect();
        let series = PriceSeries::new(grid, days).unwrap();
        let left = raw_returns(&series, &IntervalClass::intraday(a, b)).unwrap();
        let right = raw_returns(&series, &IntervalClass::intraday(b, c)).unwrap();
        let union = raw_returns(&series, &IntervalClass::intraday(a, c)).unwrap();
        for ((l, r), u) in left.values().iter().zip(right.values()).zip(union.values()) {
            prop_assert!((l + r - u).abs() <= 1e-12);
        }
    }
}
