use rou_core::specfun::*;
use rou_core::Error;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}

/// Classical (physicists') Hermite polynomial by recurrence.
fn hermite_poly(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

#[test]
fn gamma_values() {
    assert!(close(gamma(1.0).unwrap(), 1.0, 1e-14));
    assert!(close(gamma(0.5).unwrap(), 1.772_453_850_9, 1e-10));
    assert!(close(gamma(5.0).unwrap(), 24.0, 1e-14));
    assert!(close(
        gamma(-0.5).unwrap(),
        -2.0 * std::f64::consts::PI.sqrt(),
        1e-13
    ));
}

#[test]
fn gamma_poles() {
    for x in [0.0, -1.0, -7.0] {
        assert_eq!(gamma(x), Err(Error::GammaPole(x)));
        assert_eq!(rgamma(x), 0.0);
    }
}

#[test]
fn rgamma_is_smooth_through_poles() {
    // 1/Γ(x) ≈ (-1)^n n! (x + n) near x = -n
    for n in 0..5 {
        let eps = 1e-7;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let got = rgamma(-(n as f64) + eps);
        assert!(close(got, sign * fact * eps, 1e-5), "n={n}: {got}");
    }
}

#[test]
fn kummer_closed_forms() {
    assert_eq!(kummer_m(0.0, 1.5, 3.7).unwrap(), 1.0);
    assert!(close(
        kummer_m(2.0, 2.0, 1.0).unwrap(),
        std::f64::consts::E,
        1e-10
    ));
    assert!(close(
        kummer_m(1.0, 2.0, 1.0).unwrap(),
        std::f64::consts::E - 1.0,
        1e-10
    ));
    // M(a, a, z) = e^z also for negative z
    assert!(close(
        kummer_m(0.7, 0.7, -3.0).unwrap(),
        (-3.0f64).exp(),
        1e-10
    ));
}

#[test]
fn kummer_errors() {
    assert_eq!(kummer_m(1.0, -2.0, 1.0), Err(Error::KummerPole(-2.0)));
    assert!(matches!(
        kummer_m(1.0, 2.0, 40.0),
        Err(Error::KummerDomain { .. })
    ));
    let tight = Tolerance::new(1e-12, 1e-10, 3).unwrap();
    assert!(matches!(
        kummer_m_with(1.0, 2.0, 5.0, &tight),
        Err(Error::SeriesNonConvergence { terms: 3, .. })
    ));
    assert!(Tolerance::new(0.0, 1e-10, 5).is_err());
    assert!(Tolerance::new(1e-12, 1e-10, 0).is_err());
}

#[test]
fn kummer_partial_sums_increase_with_terms() {
    let (a, b, z) = (1.3, 0.8, 6.0);
    let mut last = 0.0;
    for terms in 1..60 {
        let tol = Tolerance::new(1e-12, 1e-10, terms).unwrap();
        let v = match kummer_m_with(a, b, z, &tol) {
            Ok(v) => v,
            Err(Error::SeriesNonConvergence { partial, .. }) => partial,
            Err(e) => panic!("{e}"),
        };
        assert!(v >= last, "terms={terms}: {v} < {last}");
        last = v;
    }
    assert!(close(last, kummer_m(a, b, z).unwrap(), 1e-10));
}

#[test]
fn hermite_low_orders() {
    assert!(close(hermite(0.0, 1.3).unwrap(), 1.0, 1e-13));
    assert!(close(hermite(1.0, 0.5).unwrap(), 1.0, 1e-13));
    assert!(close(hermite(0.0, -1.3).unwrap(), 1.0, 1e-13));
    assert!(close(hermite(2.0, -0.5).unwrap(), -1.0, 1e-13));
}

#[test]
fn hermite_matches_polynomials() {
    for n in 0..=10 {
        for k in 0..=40 {
            let x = -5.0 + 0.25 * k as f64;
            let want = hermite_poly(n, x);
            let scale = hermite_poly(n, x.abs() + 1.0).abs().max(1.0) * 1e-3;
            let got = hermite(n as f64, x).unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(scale),
                "n={n} x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn hermite_routes_agree_near_origin() {
    for &nu in &[-0.7, 0.3, 1.0182, 2.5, 7.9, 15.2] {
        for &x in &[1e-3, 0.2, 0.7, 1.1] {
            let a = hermite_kummer(nu, x).unwrap();
            let b = hermite_recurrence(nu, x).unwrap();
            let scale = a.abs().max(hermite_kummer(nu, -x).unwrap().abs() * 1e-6);
            assert!(
                (a - b).abs() <= 1e-10 * scale.max(1e-300),
                "nu={nu} x={x}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn hermite_is_continuous_at_zero() {
    for &nu in &[0.4, 3.3, 11.7] {
        let left = hermite(nu, -1e-13).unwrap();
        let right = hermite(nu, 1e-13).unwrap();
        assert!(close(left, right, 1e-11), "nu={nu}: {left} vs {right}");
    }
}

#[test]
fn hermite_negative_orders_are_positive() {
    for &nu in &[-0.3, -1.0, -2.5, -6.0] {
        for &x in &[-2.0, 0.5, 4.0] {
            assert!(hermite(nu, x).unwrap() > 0.0);
        }
    }
}

#[test]
fn hermite_order_derivative_changes_sign_transversally() {
    // H_ν(0) = 2^ν √π / Γ((1−ν)/2) has a simple root at ν = 1
    let d = hermite_dnu(1.0, 0.0).unwrap();
    assert!(d.abs() > 0.1, "{d}");
    assert!(hermite(1.0 - 0.01, 0.0).unwrap() * hermite(1.0 + 0.01, 0.0).unwrap() < 0.0);
}

#[test]
fn normal_values() {
    assert!(close(normal_pdf(0.0), 0.398_942_280_4, 1e-10));
    assert_eq!(normal_cdf(0.0), 0.5);
    for &x in &[0.1, 1.0, 2.5, 7.0, 12.0] {
        assert!((normal_cdf(-x) + normal_cdf(x) - 1.0).abs() < 1e-15);
        assert!((normal_sf(x) - normal_cdf(-x)).abs() < 1e-300_f64.max(1e-16 * normal_sf(x)));
    }
    // Φ(-1.96) ≈ 0.0249978951482204 (reference value)
    assert!(
        (normal_cdf(-1.96) - 0.024_997_895_148_220_4).abs() < 1e-15,
        "{}",
        normal_cdf(-1.96)
    );
}

#[test]
fn quantile_inverts_cdf() {
    for &p in &[
        1e-300,
        1e-12,
        1e-4,
        0.02,
        0.3,
        0.5,
        0.77,
        0.999,
        1.0 - 1e-12,
    ] {
        let x = normal_quantile(p);
        let back = normal_cdf(x);
        assert!(
            (back - p).abs() <= 1e-13 * p.min(1.0 - p).max(1e-300) + 1e-300,
            "p={p}: {back}"
        );
    }
    assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
}
