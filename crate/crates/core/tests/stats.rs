mod common;

use common::{t_sf_fixture, PINNED_P, PINNED_T};
use proptest::prelude::*;
use rotalign::stats::{ln_gamma, regularized_incomplete_beta, t_two_tailed};
use rotalign::{t_sf, two_sample_ttest, Error, TTestVariant};

#[test]
fn survival_matches_high_precision_table() {
    let rows = t_sf_fixture();
    assert_eq!(rows.len(), 1000);
    let worst = rows
        .iter()
        .map(|&(t, df, sf)| (t_sf(t, df).unwrap() - sf).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "worst error {worst:e}");
}

#[test]
fn pinned_examples() {
    let r = two_sample_ttest(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], TTestVariant::Student).unwrap();
    assert!((r.t_statistic - PINNED_T).abs() < 1e-12);
    assert_eq!(r.degrees_of_freedom, 4.0);
    assert!((r.p_value_two_tailed - PINNED_P).abs() < 1e-12);
    assert!((t_sf(2.5, 10.0).unwrap() - 0.015_723_422_118_304_41).abs() < 1e-12);
    assert_eq!(t_sf(0.0, 7.0).unwrap(), 0.5);
}

#[test]
fn known_closed_forms() {
    // df = 1 is the Cauchy distribution; df = 2 has sf = (1 - t/sqrt(2+t^2))/2
    for t in [-5.0, -0.3, 0.7, 2.0, 40.0] {
        let cauchy = 0.5 - f64::atan(t) / std::f64::consts::PI;
        assert!((t_sf(t, 1.0).unwrap() - cauchy).abs() < 1e-13);
        let two = 0.5 * (1.0 - t / (2.0 + t * t).sqrt());
        assert!((t_sf(t, 2.0).unwrap() - two).abs() < 1e-13);
    }
    assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    // I_x(1, 1) = x
    assert!((regularized_incomplete_beta(0.3, 1.0, 1.0).unwrap() - 0.3).abs() < 1e-14);
}

#[test]
fn welch_matches_student_for_equal_spread() {
    let a = [1.0, 2.0, 3.0, 4.0];
    let b = [3.0, 4.0, 5.0, 6.0];
    let s = two_sample_ttest(&a, &b, TTestVariant::Student).unwrap();
    let w = two_sample_ttest(&a, &b, TTestVariant::Welch).unwrap();
    assert!((s.t_statistic - w.t_statistic).abs() < 1e-12);
    assert!((s.degrees_of_freedom - w.degrees_of_freedom).abs() < 1e-12);
    assert!((s.p_value_two_tailed - w.p_value_two_tailed).abs() < 1e-12);
}

#[test]
fn degenerate_inputs() {
    assert!(matches!(
        two_sample_ttest(&[1.0], &[1.0, 2.0], TTestVariant::Student),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        two_sample_ttest(&[1.0, 1.0], &[1.0, 1.0], TTestVariant::Student),
        Err(Error::Degenerate(_))
    ));
    assert!(t_sf(1.0, 0.0).is_err());
    assert!(t_sf(f64::NAN, 3.0).is_err());
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 2..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn survival_is_antisymmetric(t in -30.0f64..30.0, df in 0.5f64..500.0) {
        let s = t_sf(t, df).unwrap() + t_sf(-t, df).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
        let p = t_two_tailed(t, df).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn swapping_groups_negates_t(a in sample(), b in sample()) {
        for v in [TTestVariant::Student, TTestVariant::Welch] {
            let (Ok(x), Ok(y)) = (two_sample_ttest(&a, &b, v), two_sample_ttest(&b, &a, v)) else {
                continue;
            };
            prop_assert!((x.t_statistic + y.t_statistic).abs() <= 1e-12 * x.t_statistic.abs().max(1.0));
            prop_assert!((x.p_value_two_tailed - y.p_value_two_tailed).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_and_scale_leave_test_unchanged(
        a in sample(), b in sample(), shift in -100.0f64..100.0, e in -4i32..5,
    ) {
        // power-of-two scales keep the arithmetic exact up to the shift
        let scale = 2f64.powi(e);
        let f = |x: &Vec<f64>| -> Vec<f64> { x.iter().map(|v| v * scale + shift).collect() };
        for v in [TTestVariant::Student, TTestVariant::Welch] {
            let (Ok(x), Ok(y)) = (two_sample_ttest(&a, &b, v), two_sample_ttest(&f(&a), &f(&b), v)) else {
                continue;
            };
            prop_assert!((x.t_statistic - y.t_statistic).abs() <= 1e-12 * x.t_statistic.abs().max(1.0));
            prop_assert!((x.p_value_two_tailed - y.p_value_two_tailed).abs() < 1e-12);
        }
    }
}
