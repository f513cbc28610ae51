//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use subgeo_core::field::metric_values;
use subgeo_core::{sample, BoxDomain, MetricField};

/// Fourth-order central difference of `f` along axis `i`.
pub fn central(f: impl Fn(&[f64]) -> f64, p: &[f64], i: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut q = p.to_vec();
        q[i] += s * h;
        f(&q)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

/// Levi-Civita coefficients `[k][i][j]` from finite differences of metric values.
pub fn koszul_fd(g: &dyn MetricField, p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let gv = |q: &[f64]| metric_values(g, q).unwrap();
    let dg: Vec<Vec<f64>> = (0..n)
        .map(|l| (0..n * n).map(|ab| central(|q| gv(q).data()[ab], p, l, 1e-3)).collect())
        .collect();
    let inv = gv(p).inverse().unwrap();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    let lowered = dg[i][j * n + l] + dg[j][i * n + l] - dg[l][i * n + j];
                    s += 0.5 * inv.get(k, l) * lowered;
                }
                out[(k * n + i) * n + j] = s;
            }
        }
    }
    out
}

/// Upper half-plane `δ/y²`: Levi-Civita coefficients `[k][i][j]` at `(x, y)`.
pub fn hyperbolic_plane_gamma(y: f64) -> Vec<f64> {
    // Γ^1_12 = Γ^1_21 = -1/y, Γ^2_11 = 1/y, Γ^2_22 = -1/y
    vec![0.0, -1.0 / y, -1.0 / y, 0.0, 1.0 / y, 0.0, 0.0, -1.0 / y]
}

/// Gaussian family on `(μ, σ)` with Fisher metric `diag(1/σ², 2/σ²)`:
/// `Γ^(α)k_ij = Γ^LC k_ij - (α/2) g^kk T_ijk` with skewness `T_112 = 2/σ³`,
/// `T_222 = 8/σ³` (moments of a standard normal).
pub fn gaussian_alpha_gamma(alpha: f64, sigma: f64) -> Vec<f64> {
    let s = sigma;
    let g12 = -(1.0 + alpha) / s;
    let g211 = (1.0 - alpha) / (2.0 * s);
    let g222 = -(1.0 + 2.0 * alpha) / s;
    vec![0.0, g12, g12, 0.0, g211, 0.0, 0.0, g222]
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn points(domain: &BoxDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    sample(domain, count, seed).unwrap().points
}
