use rou_core::model::*;
use rou_core::specfun::{normal_cdf, normal_pdf};
use rou_core::Error;

const V0: f64 = 2.0 * std::f64::consts::SQRT_2;

#[test]
fn to_uv_examples() {
    let q = to_uv(&ROUParams::new(1.0, 1.0, 0.5).unwrap());
    assert_eq!(q.u, 1.0);
    assert!((q.v - V0).abs() < 1e-15);
    assert_eq!(q.sigma, 0.5);

    let q = to_uv(&ROUParams::new(0.5, 1.0, 1.0).unwrap());
    assert_eq!((q.u, q.v, q.sigma), (1.0, 1.0, 1.0));
}

#[test]
fn from_uv_examples() {
    let p = from_uv(&ReparamUV::new(1.0, V0, 0.5).unwrap());
    assert!((p.kappa - 1.0).abs() < 1e-15);
    assert_eq!((p.theta, p.sigma), (1.0, 0.5));
    let p = from_uv(&ReparamUV::new(1.0, 1.0, 1.0).unwrap());
    assert_eq!((p.kappa, p.theta, p.sigma), (0.5, 1.0, 1.0));
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ROUParams::new(0.0, 1.0, 1.0).is_err());
    assert!(ROUParams::new(1.0, -1.0, 1.0).is_err());
    assert!(ROUParams::new(1.0, 1.0, f64::NAN).is_err());
    assert!(ReparamUV::new(1.0, 0.0, 1.0).is_err());
}

#[test]
fn eta_jacobian_at_unit_point() {
    let j = eta_jacobian(&ReparamUV::new(1.0, 1.0, 1.0).unwrap());
    assert_eq!(j[1], [-1.0, 1.0, 1.0]);
    assert_eq!(j[0], [1.0, 0.0, 0.0]);
    assert_eq!(j[2], [0.0, 0.0, 1.0]);
}

#[test]
fn density_domain() {
    let q = ReparamUV::new(1.0, V0, 0.5).unwrap();
    assert_eq!(invariant_density(&q, -0.1), Err(Error::Domain(-0.1)));
    assert_eq!(speed_measure(&q, -1.0), Err(Error::Domain(-1.0)));
}

#[test]
fn density_at_mode() {
    let q = ReparamUV::new(1.3, 2.1, 0.7).unwrap();
    let want = (2.1 / 1.3) * normal_pdf(0.0) / (1.0 - normal_cdf(-2.1));
    assert!((invariant_density(&q, 1.3).unwrap() - want).abs() < 1e-14);
}

#[test]
fn speed_measure_at_origin() {
    let q = ReparamUV::new(1.0, V0, 0.5).unwrap();
    let want = 2.0 / 0.25 * (-V0 * V0 / 2.0).exp();
    assert!((speed_measure(&q, 0.0).unwrap() - want).abs() < 1e-15 * want.max(1.0));
}

#[test]
fn hazard_limits() {
    assert!(hazard(40.0) == 0.0 || hazard(40.0) < 1e-300);
    // for very negative v the ratio approaches −v
    assert!((hazard(-30.0) / 30.0 - 1.0).abs() < 1e-2);
    assert!(g1(2.0, 40.0) == 2.0);
    assert!((g2(2.0, 40.0) - (4.0 / 1600.0 + 4.0)).abs() < 1e-15);
}

#[test]
fn dg1_du_is_linear_coefficient() {
    for &v in &[0.3, 1.0, 2.8, 6.0] {
        let j = g12_jacobian(1.7, v);
        let want = 1.0 + normal_pdf(v) / (1.0 - normal_cdf(-v)) / v;
        assert!((j[0][0] - want).abs() < 1e-14);
    }
}
