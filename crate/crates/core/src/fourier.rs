//! Per-frequency reduction of the AP space-time system.
//!
//! Substituting `r_m = r̂ e^{iξx_m}`, `j_m = ĵ e^{iξx_m}` into one step of the
//! scheme and eliminating the starred values gives, per velocity node,
//!
//! ```text
//! r̂⁺ + c₁ r̂ + c₂ ĵ + γ c₁ Σ w_k r̂_k = 0,   ĵ⁺ + d₁ ĵ + d₂ r̂ + γ d₂ Σ w_k r̂_k = 0
//! ```
//!
//! (homogeneous part). Stacking the `Nt` levels with the shift `P` gives the
//! matrix `L̃_ε` of order `2 N Nt`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::GridConfig;
use crate::quadrature::QuadratureRule;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::Complex64;

/// Number of samples of `ξh` over `[0, π]`.
pub const FREQUENCY_SAMPLES: usize = 64;

/// Symbols at one velocity node and frequency, together with the
/// `γ`-weighted products that stay finite as ε → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierSymbols {
    pub c1: Complex64,
    pub c2: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    /// `γ c₁`.
    pub gamma_c1: Complex64,
    /// `γ d₂`.
    pub gamma_d2: Complex64,
    /// `γ₀ c₁,₀ = −base − (iλv sin ξh)² / τ`.
    pub gamma0_c1_0: Complex64,
    /// `γ₀ d₂,₀ = base · iλv sin ξh / τ + iλv sin ξh`.
    pub gamma0_d2_0: Complex64,
}

/// Symbols for squared scaling parameter `eps2` (zero allowed).
fn symbols_at(eps2: f64, tau: f64, lambda: f64, v: f64, xi_h: f64) -> FourierSymbols {
    let base = Complex64::new((1.0 - lambda * v) + lambda * v * xi_h.cos(), 0.0);
    let isn = Complex64::new(0.0, lambda * v * xi_h.sin());
    let denom = eps2 + tau;
    // 1/(1+γ), γ/(1+γ), (1−ε²)/ε² · 1/(1+γ)², γ (1−ε²)/ε² · 1/(1+γ)²
    let s = eps2 / denom;
    let gs = tau / denom;
    let q = (1.0 - eps2) * eps2 / (denom * denom);
    let gq = tau * (1.0 - eps2) / (denom * denom);

    // Same expressions at ε = 0, so that ε² = 0 reproduces them bit for bit.
    let gq0 = tau / (tau * tau);
    let gamma0_c1_0 = -base - isn * isn * gq0;
    let gamma0_d2_0 = base * isn * gq0 + isn;
    FourierSymbols {
        c1: -base * s - isn * isn * q,
        c2: isn * s,
        d1: -base * s,
        d2: base * isn * q + isn * s,
        gamma_c1: -base * gs - isn * isn * gq,
        gamma_d2: base * isn * gq + isn * gs,
        gamma0_c1_0,
        gamma0_d2_0,
    }
}

/// Symbols of the AP scheme at velocity `v` and frequency `xi`.
pub fn fourier_symbols(cfg: &GridConfig, v: f64, xi: f64) -> Result<FourierSymbols> {
    if !(cfg.epsilon > 0.0) || !(cfg.tau > 0.0) || !(cfg.h > 0.0) {
        return Err(Error::invalid("fourier symbols need epsilon, tau, h > 0"));
    }
    Ok(symbols_at(cfg.epsilon * cfg.epsilon, cfg.tau, cfg.lambda(), v, xi * cfg.h))
}

/// Frequencies `ξ` with `ξh` uniform on `[0, π]`.
pub fn frequency_samples(h: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| PI * i as f64 / ((count - 1) as f64 * h)).collect(),
    }
}

/// Subdiagonal shift of order `nt`.
pub fn shift_matrix<T: crate::Scalar>(nt: usize) -> CsrMatrix<T> {
    let mut t = TripletBuilder::new(nt, nt);
    for i in 1..nt {
        t.push(i, i - 1, T::one());
    }
    t.build()
}

#[derive(Debug, Clone)]
pub struct FourierMatrix {
    pub xi: f64,
    /// `L̃₀` when built at ε = 0, `L̃_ε` otherwise.
    pub ltilde: CsrMatrix<Complex64>,
    pub l0: CsrMatrix<Complex64>,
    /// `L̃_ε − L̃₀`.
    pub e: CsrMatrix<Complex64>,
    /// One entry per velocity node.
    pub symbols: Vec<FourierSymbols>,
}

fn build(
    rule: &QuadratureRule,
    nt: usize,
    tau: f64,
    syms: &[FourierSymbols],
    limit: bool,
) -> CsrMatrix<Complex64> {
    let n = rule.len();
    let half = n * nt;
    let mut t = TripletBuilder::new(2 * half, 2 * half);
    let tau_c = Complex64::new(tau, 0.0);
    for (i, s) in syms.iter().enumerate() {
        let (c1, c2, d1, d2, gc1, gd2) = if limit {
            let z = Complex64::new(0.0, 0.0);
            (z, z, z, z, s.gamma0_c1_0, s.gamma0_d2_0)
        } else {
            (s.c1, s.c2, s.d1, s.d2, s.gamma_c1, s.gamma_d2)
        };
        let ri = i * nt;
        let ji = half + i * nt;
        for l in 0..nt {
            t.push(ri + l, ri + l, Complex64::new(1.0, 0.0));
            t.push(ji + l, ji + l, Complex64::new(1.0, 0.0));
        }
        for l in 1..nt {
            t.push(ri + l, ri + l - 1, c1);
            t.push(ri + l, ji + l - 1, c2 / tau_c);
            t.push(ji + l, ri + l - 1, tau_c * d2);
            t.push(ji + l, ji + l - 1, d1);
            for (k, &w) in rule.weights().iter().enumerate() {
                let rk = k * nt;
                t.push(ri + l, rk + l - 1, gc1 * w);
                t.push(ji + l, rk + l - 1, tau_c * gd2 * w);
            }
        }
    }
    t.build()
}

/// `L̃_ε` (or `L̃₀` with `at_epsilon_zero`) at frequency `xi`, on the AP
/// velocity rule, with the perturbation `E = L̃_ε − L̃₀`.
pub fn assemble_fourier_matrix(
    cfg: &GridConfig,
    rule: &QuadratureRule,
    xi: f64,
    at_epsilon_zero: bool,
) -> Result<FourierMatrix> {
    if rule.len() != cfg.n {
        return Err(Error::invalid("rule size does not match N"));
    }
    let symbols = rule
        .nodes()
        .iter()
        .map(|&v| fourier_symbols(cfg, v, xi))
        .collect::<Result<Vec<_>>>()?;
    let l_eps = build(rule, cfg.nt, cfg.tau, &symbols, false);
    let l0 = build(rule, cfg.nt, cfg.tau, &symbols, true);
    let e = l_eps.sub(&l0);
    Ok(FourierMatrix {
        xi,
        ltilde: if at_epsilon_zero { l0.clone() } else { l_eps },
        l0,
        e,
        symbols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explicit::weight_matrix;
    use crate::linalg::norm2;
    use crate::quadrature::half_range_rule;
    use approx::assert_abs_diff_eq;

    fn cfg(eps: f64) -> GridConfig {
        GridConfig::ap(eps, 0.005, 0.1, 4, 9, 6)
    }

    /// Symbols straight from the displayed formulas in `γ`, for comparison.
    fn naive(eps: f64, tau: f64, h: f64, v: f64, xi: f64) -> [Complex64; 4] {
        let lam = tau / h;
        let g = tau / (eps * eps);
        let base = Complex64::new(1.0 - lam * v + lam * v * (xi * h).cos(), 0.0);
        let isn = Complex64::new(0.0, lam * v * (xi * h).sin());
        let q = (1.0 - eps * eps) / (eps * eps);
        [
            -base / (1.0 + g) - q * isn * isn / ((1.0 + g) * (1.0 + g)),
            isn / (1.0 + g),
            -base / (1.0 + g),
            q * base * isn / ((1.0 + g) * (1.0 + g)) + isn / (1.0 + g),
        ]
    }

    #[test]
    fn symbols_match_displayed_formulas() {
        for eps in [1.0, 0.3, 1e-2] {
            let c = cfg(eps);
            for v in [0.1, 0.5, 0.93] {
                for xi in [0.0, 3.0, 17.0, 31.4] {
                    let s = fourier_symbols(&c, v, xi).unwrap();
                    let n = naive(eps, c.tau, c.h, v, xi);
                    for (a, b) in [s.c1, s.c2, s.d1, s.d2].iter().zip(n) {
                        assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
                    }
                    assert!((s.gamma_c1 - s.c1 * c.gamma()).norm() <= 1e-12 * (1.0 + s.gamma_c1.norm()));
                    assert!((s.gamma_d2 - s.d2 * c.gamma()).norm() <= 1e-12 * (1.0 + s.gamma_d2.norm()));
                }
            }
        }
    }

    #[test]
    fn zero_frequency_examples() {
        let c = cfg(0.2);
        let s = fourier_symbols(&c, 0.7, 0.0).unwrap();
        let expect = -1.0 / (1.0 + c.gamma());
        assert_eq!(s.c2, Complex64::new(0.0, 0.0));
        assert_eq!(s.d2, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(s.c1.re, expect, epsilon = 1e-15);
        assert_abs_diff_eq!(s.d1.re, expect, epsilon = 1e-15);
        assert_abs_diff_eq!(s.gamma0_c1_0.re, -1.0, epsilon = 1e-15);
        assert_eq!(s.gamma0_d2_0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn symbols_vanish_and_products_converge_as_eps_shrinks() {
        let xi = 12.0;
        let mut prev = f64::INFINITY;
        for e in 1..=8 {
            let s = fourier_symbols(&cfg(10f64.powi(-e)), 0.6, xi).unwrap();
            let size = s.c1.norm() + s.c2.norm() + s.d1.norm() + s.d2.norm();
            assert!(size <= prev);
            prev = size;
            if e == 8 {
                assert!(size < 1e-10);
                assert!((s.gamma_c1 - s.gamma0_c1_0).norm() < 1e-8);
                assert!((s.gamma_d2 - s.gamma0_d2_0).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn limit_products_bounded_under_cfl() {
        let c = cfg(1e-3);
        assert!(c.lambda() + c.tau / (c.h * c.h) <= 1.0);
        let rule = half_range_rule(8).unwrap();
        for xi in frequency_samples(c.h, FREQUENCY_SAMPLES) {
            for v in rule.nodes().iter().copied().chain([0.0, 1.0]) {
                let s = fourier_symbols(&c, v, xi).unwrap();
                assert!(s.gamma0_c1_0.norm() <= 1.0 + 1e-12);
                assert!((s.gamma0_d2_0 * c.tau).norm() <= 1.0 + c.tau + 1e-12);
            }
        }
    }

    #[test]
    fn samples_cover_half_period() {
        let xs = frequency_samples(0.1, 64);
        assert_eq!(xs.len(), 64);
        assert_eq!(xs[0], 0.0);
        assert_abs_diff_eq!(xs[63] * 0.1, PI, epsilon = 1e-14);
    }

    #[test]
    fn shift_and_weight_norms() {
        for nt in [2, 5, 16] {
            let p: CsrMatrix<f64> = shift_matrix(nt);
            assert_abs_diff_eq!(norm2(&p).unwrap(), 1.0, epsilon = 1e-14);
        }
        for n in [1, 2, 4, 8, 16] {
            let rule = half_range_rule(n).unwrap();
            let w = weight_matrix(&rule);
            assert!(w.matmul(&w).sub(&w).max_abs() <= 1e-13);
            assert!(norm2(&w).unwrap() <= (n as f64).sqrt() + 1e-12);
        }
    }

    #[test]
    fn limit_matrix_structure() {
        let c = cfg(1e-2);
        let rule = half_range_rule(c.n).unwrap();
        let fm = assemble_fourier_matrix(&c, &rule, 20.0, true).unwrap();
        let nt = c.nt;
        let half = c.n * nt;
        let id = CsrMatrix::<Complex64>::identity(2 * half);
        let off = fm.ltilde.sub(&id);
        for (i, j, _) in off.iter() {
            // only coupling into the r unknowns, one level below
            assert!(j < half, "column {j} in the j block");
            let (li, lj) = (i % nt, j % nt);
            assert_eq!(li, lj + 1);
        }
        assert_eq!(fm.ltilde.sub(&fm.l0).max_abs(), 0.0);
    }

    #[test]
    fn perturbation_vanishes_with_eps() {
        let rule = half_range_rule(4).unwrap();
        let big = assemble_fourier_matrix(&cfg(1e-1), &rule, 10.0, false).unwrap();
        let small = assemble_fourier_matrix(&cfg(1e-5), &rule, 10.0, false).unwrap();
        assert!(small.e.max_abs() < 1e-6 * big.e.max_abs());
    }
}
