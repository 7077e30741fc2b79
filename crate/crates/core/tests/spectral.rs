use std::f64::consts::SQRT_2;

use rou_core::model::{g1, invariant_density, speed_measure, ReparamUV};
use rou_core::quadrature::GaussLegendre;
use rou_core::simulate::simulate_pairs;
use rou_core::specfun::{hermite, hermite_dnu};
use rou_core::spectral::{self, boundary_roots, solve_eigenvalues, SpectralBasis};
use rou_core::ROUParams;

const V0: f64 = 2.0 * SQRT_2;
const SIGMA: f64 = 0.5;
const H: f64 = 0.5;

fn basis() -> SpectralBasis {
    SpectralBasis::new(1.0, V0, 12).unwrap()
}

fn nodes(upper: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    GaussLegendre::standard().composite(0.0, upper, panels)
}

/// Roots of H_μ(z0) by a 1e-3 scan followed by plain bisection.
fn dense_scan_roots(z0: f64, count: usize) -> Vec<f64> {
    let f = |mu: f64| hermite(mu, z0).unwrap();
    let mut out = Vec::new();
    let mut k = 0usize;
    let mut prev = f(0.0);
    while out.len() < count {
        k += 1;
        let (a, b) = ((k - 1) as f64 * 1e-3, k as f64 * 1e-3);
        let cur = f(b);
        if (prev < 0.0) != (cur < 0.0) {
            let (mut lo, mut hi, mut flo) = (a, b, prev);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    out
}

#[test]
fn roots_agree_with_dense_scan() {
    for &(u, v) in &[(1.0, 0.7), (1.0, V0), (2.0, 5.0)] {
        let lt = solve_eigenvalues(u, v, 12).unwrap();
        let oracle = dense_scan_roots(-v / SQRT_2, 12);
        for (l, mu) in lt.iter().zip(&oracle) {
            let want = (mu + 1.0) * v * v / (2.0 * u * u);
            assert!((l - want).abs() < 1e-8 * want, "v={v}: {l} vs {want}");
        }
    }
}

#[test]
fn first_roots_reference_values() {
    // arbitrary-precision roots of μ ↦ H_μ(−2)
    let (roots, _) = boundary_roots(V0, 12).unwrap();
    assert!((roots[0] - 0.017_881_697_302_753_2).abs() < 1e-10);
    assert!((roots[1] - 1.111_507_011_232_1).abs() < 1e-10);
    assert!((roots[11] - 15.864_981_408_180_2).abs() < 1e-9);
}

#[test]
fn eigenvalues_strict_simple_and_bracketed() {
    let lt = solve_eigenvalues(1.0, V0, 12).unwrap();
    assert_eq!(lt.len(), 12);
    assert!(lt[0] > 0.0);
    assert!(lt.windows(2).all(|w| w[0] < w[1]));

    let z0 = -V0 / SQRT_2;
    let (roots, _) = boundary_roots(V0, 12).unwrap();
    for mu in &roots {
        assert!(hermite_dnu(*mu, z0).unwrap().abs() > 1e-6);
    }
    // H changes sign between consecutive midpoints
    for w in roots.windows(3) {
        let left = hermite(0.5 * (w[0] + w[1]), z0).unwrap();
        let right = hermite(0.5 * (w[1] + w[2]), z0).unwrap();
        assert!(left * right < 0.0);
    }
    assert!(basis().residuals().iter().all(|r| *r < 1e-9));
}

#[test]
fn gram_matrix_is_identity() {
    let b = basis();
    let q = ReparamUV::new(1.0, V0, SIGMA).unwrap();
    let (xs, ws) = nodes(1.0 + 12.0 / V0, 64);
    let table: Vec<Vec<f64>> = (1..=12)
        .map(|i| {
            xs.iter()
                .map(|&x| b.eigenfunction(i, SIGMA, x).unwrap())
                .collect()
        })
        .collect();
    let m: Vec<f64> = xs.iter().map(|&x| speed_measure(&q, x).unwrap()).collect();
    for i in 0..12 {
        for j in 0..12 {
            let g: f64 = (0..xs.len())
                .map(|k| ws[k] * m[k] * table[i][k] * table[j][k])
                .sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-4, "G[{i}][{j}] = {g}");
        }
    }
}

#[test]
fn eigenfunctions_satisfy_neumann_condition() {
    let b = basis();
    let d = 1e-5;
    let z = |x: f64| (V0 * x - V0) / SQRT_2;
    for i in 0..12 {
        let f = |x: f64| b.norm_constants()[i] * hermite(b.orders()[i], z(x)).unwrap();
        let slope = (f(d) - f(-d)) / (2.0 * d);
        // natural scale of the slope: |φ(0)| times the argument's stretch
        let scale = f(0.0).abs() * V0;
        assert!(
            slope.abs() < 1e-3 * scale,
            "i={i}: slope {slope}, scale {scale}"
        );
        assert!(b.eigenfunction(i + 1, SIGMA, 0.0).unwrap() > 0.0);
    }
}

#[test]
fn detailed_balance() {
    let b = basis();
    let q = ReparamUV::new(1.0, V0, SIGMA).unwrap();
    let grid = [0.0, 0.3, 0.8, 1.0, 1.4, 2.1, 2.9];
    for &x in &grid {
        for &y in &grid {
            let l =
                invariant_density(&q, x).unwrap() * b.transition_density(SIGMA, H, x, y).unwrap();
            let r =
                invariant_density(&q, y).unwrap() * b.transition_density(SIGMA, H, y, x).unwrap();
            assert!(
                (l - r).abs() <= 1e-10 * l.abs().max(r.abs()),
                "({x}, {y}): {l} vs {r}"
            );
        }
    }
}

#[test]
fn kernel_integrates_to_one() {
    let b = basis();
    let (ys, ws) = nodes(1.0 + 12.0 / V0, 32);
    for k in 0..=14 {
        let x = 0.2 + 2.8 * k as f64 / 14.0;
        let total: f64 = ys
            .iter()
            .zip(&ws)
            .map(|(&y, &w)| w * b.transition_density(SIGMA, H, x, y).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 5e-3, "x={x}: {total}");
    }
}

#[test]
fn long_horizon_kernel_is_invariant_density() {
    let b = basis();
    let q = ReparamUV::new(1.0, V0, SIGMA).unwrap();
    for &x in &[0.0, 0.5, 1.0, 2.0] {
        for k in 0..=60 {
            let y = 4.0 * k as f64 / 60.0;
            let p = b.transition_density(SIGMA, 50.0, x, y).unwrap();
            assert!((p - invariant_density(&q, y).unwrap()).abs() < 1e-10);
        }
    }
    let m = g1(1.0, V0);
    assert!((b.g3(SIGMA, 50.0) - m * m).abs() < 1e-9);
}

#[test]
fn chapman_kolmogorov() {
    let b = basis();
    let (zs, ws) = nodes(1.0 + 12.0 / V0, 16);
    for &x in &[0.5, 1.0, 1.5] {
        for &y in &[0.5, 1.0, 1.5] {
            let two_step: f64 = zs
                .iter()
                .zip(&ws)
                .map(|(&z, &w)| {
                    w * b.transition_density(SIGMA, H, x, z).unwrap()
                        * b.transition_density(SIGMA, H, z, y).unwrap()
                })
                .sum();
            let direct = b.transition_density(SIGMA, 2.0 * H, x, y).unwrap();
            assert!(
                (two_step - direct).abs() < 1e-2,
                "({x}, {y}): {two_step} vs {direct}"
            );
        }
    }
}

#[test]
fn separable_g3_matches_double_quadrature() {
    let b = basis();
    let q = ReparamUV::new(1.0, V0, SIGMA).unwrap();
    let (xs, ws) = nodes(1.0 + 12.0 / V0, 12);
    let pis: Vec<f64> = xs
        .iter()
        .map(|&x| invariant_density(&q, x).unwrap())
        .collect();
    let mut total = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let mut inner = 0.0;
        for (j, &y) in xs.iter().enumerate() {
            inner += ws[j] * y * b.transition_density(SIGMA, H, x, y).unwrap();
        }
        total += ws[i] * x * pis[i] * inner;
    }
    let g3 = spectral::g3(1.0, V0, SIGMA, H, &b).unwrap();
    assert!((total - g3).abs() < 1e-8 * g3, "{total} vs {g3}");
    // 1.0787251930596105 from the same construction at the experiment point
    assert!((g3 - 1.078_725_193_059_610_5).abs() < 1e-9);
}

#[test]
fn g3_is_unchanged_by_eigenfunction_signs() {
    // recompute A_i and B_i by quadrature with alternating signs on φ_i
    let b = basis();
    let q = ReparamUV::new(1.0, V0, SIGMA).unwrap();
    let (xs, ws) = nodes(1.0 + 12.0 / V0, 64);
    let mut g = g1(1.0, V0).powi(2);
    for i in 1..=12 {
        let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
        let (mut a, mut bb) = (0.0, 0.0);
        for (&x, &w) in xs.iter().zip(&ws) {
            let phi = sign * b.eigenfunction(i, SIGMA, x).unwrap();
            a += w * x * invariant_density(&q, x).unwrap() * phi;
            bb += w * x * speed_measure(&q, x).unwrap() * phi;
        }
        g += (-b.lambdas_tilde()[i - 1] * SIGMA * SIGMA * H).exp() * a * bb;
    }
    let want = b.g3(SIGMA, H);
    assert!((g - want).abs() < 1e-10 * want, "{g} vs {want}");
}

#[test]
fn b_moments_match_boundary_identity() {
    // integrating y against the eigen-equation leaves only the boundary term:
    // (κ − λ_i) B_i = σ² m(0) φ_i(0) / 2
    let b = basis();
    let q = ReparamUV::new(1.0, V0, SIGMA).unwrap();
    let kappa = q.to_params().kappa;
    let m0 = speed_measure(&q, 0.0).unwrap();
    for i in 1..=12 {
        let lambda = b.lambdas_tilde()[i - 1] * SIGMA * SIGMA;
        let want =
            SIGMA * SIGMA * m0 * b.eigenfunction(i, SIGMA, 0.0).unwrap() / (2.0 * (kappa - lambda));
        let got = b.moment_b(i, SIGMA).unwrap();
        assert!(
            (got - want).abs() < 1e-8 * want.abs().max(1e-3),
            "i={i}: {got} vs {want}"
        );
    }
}

#[test]
fn derivative_matches_finite_difference() {
    let b = basis();
    for &sigma in &[0.1f64, 0.3, 0.5, 1.0, 1.7] {
        let s2 = sigma * sigma;
        let d = 1e-5 * s2;
        let fd = (b.g3((s2 + d).sqrt(), H) - b.g3((s2 - d).sqrt(), H)) / (2.0 * d);
        let got = spectral::dg3_dsigma2(1.0, V0, sigma, H, &b).unwrap();
        assert!(
            (got - fd).abs() < 1e-6 * got.abs(),
            "σ={sigma}: {got} vs {fd}"
        );
    }
}

#[test]
fn derivative_negative_on_plot_interval() {
    let b = basis();
    for k in 0..=190 {
        let sigma = 0.1 + 0.01 * k as f64;
        assert!(b.dg3_dsigma2(sigma, H) < 0.0, "σ={sigma}");
    }
}

#[test]
fn derivative_negative_across_parameters() {
    for &(u, v) in &[(0.5, 1.0), (1.0, V0), (2.0, 4.0), (1.0, 0.6)] {
        let b = SpectralBasis::new(u, v, 12).unwrap();
        for &h in &[0.1, 0.5, 2.0] {
            for k in 0..=20 {
                let sigma = 0.05 + (5.0 - 0.05) * k as f64 / 20.0;
                assert!(
                    b.dg3_dsigma2(sigma, h) <= 0.0,
                    "({u}, {v}, h={h}, σ={sigma})"
                );
            }
        }
    }
}

#[test]
fn mismatched_basis_is_rejected() {
    let b = basis();
    assert!(spectral::g3(1.1, V0, SIGMA, H, &b).is_err());
    assert!(spectral::dg3_dsigma2(1.0, V0, -1.0, H, &b).is_err());
    assert!(b.eigenfunction(13, SIGMA, 1.0).is_err());
    assert!(b.eigenfunction(1, SIGMA, -0.1).is_err());
    assert!(b.transition_density(SIGMA, H, -1.0, 1.0).is_err());
}

#[test]
fn g3_matches_simulated_pairs() {
    let p = ROUParams::new(1.0, 1.0, SIGMA).unwrap();
    let pairs = simulate_pairs(&p, H, 1_000_000, 200, 20_240_601).unwrap();
    let n = pairs.len() as f64;
    let prods: Vec<f64> = pairs.iter().map(|(a, b)| a * b).collect();
    let mean = prods.iter().sum::<f64>() / n;
    let var = prods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let g3 = basis().g3(SIGMA, H);
    assert!((mean - g3).abs() < 3.0 * se, "mc {mean} ± {se} vs {g3}");
}
