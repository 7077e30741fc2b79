use rou_core::stats::*;

#[test]
fn median_odd_even() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    assert!(median(&[]).is_nan());
}

#[test]
fn eigenvalues_of_known_matrix() {
    let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
    let ev = symmetric_eigenvalues3(&a);
    assert!((ev[0] - 1.0).abs() < 1e-12);
    assert!((ev[1] - 3.0).abs() < 1e-12);
    assert!((ev[2] - 5.0).abs() < 1e-12);
}

#[test]
fn anderson_darling_on_normal_scores_accepts() {
    // exact normal quantiles at plotting positions are as normal as it gets
    let n = 200;
    let xs: Vec<f64> = (0..n)
        .map(|i| rou_core::specfun::normal_quantile((i as f64 + 0.5) / n as f64))
        .collect();
    let ad = anderson_darling_normal(&xs);
    assert!(ad.adjusted < 0.2, "{ad:?}");
    assert!(!ad.rejects_at_1pct());
}

#[test]
fn anderson_darling_rejects_exponential() {
    let n = 200;
    let xs: Vec<f64> = (0..n)
        .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
        .collect();
    let ad = anderson_darling_normal(&xs);
    assert!(ad.rejects_at_1pct(), "{ad:?}");
    assert!(ad.p_value < 0.01);
}
