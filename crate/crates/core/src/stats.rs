//! Small descriptive statistics used by the Monte Carlo harness.

use crate::specfun::normal_cdf;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Median; NaN for an empty slice.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Unbiased covariance matrix of 3-vectors.
pub fn covariance3(rows: &[[f64; 3]]) -> [[f64; 3]; 3] {
    let n = rows.len() as f64;
    let mut m = [0.0; 3];
    for r in rows {
        for j in 0..3 {
            m[j] += r[j] / n;
        }
    }
    let mut c = [[0.0; 3]; 3];
    for r in rows {
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += (r[i] - m[i]) * (r[j] - m[j]) / (n - 1.0);
            }
        }
    }
    c
}

/// Eigenvalues of a symmetric 3×3 matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues3(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut m = *a;
    for _ in 0..100 {
        let off = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        let diag = m[0][0].powi(2) + m[1][1].powi(2) + m[2][2].powi(2);
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let mkp = m[k][p];
                let mkq = m[k][q];
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let mpk = m[p][k];
                let mqk = m[q][k];
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
        }
    }
    let mut ev = [m[0][0], m[1][1], m[2][2]];
    ev.sort_by(f64::total_cmp);
    ev
}

/// Anderson–Darling test of normality with mean and variance estimated from
/// the sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndersonDarling {
    /// Raw statistic A².
    pub statistic: f64,
    /// Small-sample adjusted A*² = A²(1 + 0.75/n + 2.25/n²).
    pub adjusted: f64,
    /// Approximate p-value of A*² (D'Agostino & Stephens).
    pub p_value: f64,
}

impl AndersonDarling {
    /// Critical value of A*² at the 1% level.
    pub const CRITICAL_1PCT: f64 = 1.035;

    pub fn rejects_at_1pct(&self) -> bool {
        self.adjusted > Self::CRITICAL_1PCT
    }
}

pub fn anderson_darling_normal(xs: &[f64]) -> AndersonDarling {
    let n = xs.len();
    let nf = n as f64;
    let m = mean(xs);
    let sd = variance(xs).sqrt();
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let mut s = 0.0;
    for i in 0..n {
        let lo = normal_cdf(z[i]).ln();
        let hi = normal_cdf(-z[n - 1 - i]).ln();
        s += (2.0 * i as f64 + 1.0) * (lo + hi);
    }
    let a2 = -nf - s / nf;
    let adj = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if adj >= 0.6 {
        (1.2937 - 5.709 * adj + 0.0186 * adj * adj).exp()
    } else if adj >= 0.34 {
        (0.9177 - 4.279 * adj - 1.38 * adj * adj).exp()
    } else if adj >= 0.2 {
        1.0 - (-8.318 + 42.796 * adj - 59.938 * adj * adj).exp()
    } else {
        1.0 - (-13.436 + 101.14 * adj - 223.73 * adj * adj).exp()
    };
    AndersonDarling {
        statistic: a2,
        adjusted: adj,
        p_value: p.clamp(0.0, 1.0),
    }
}
