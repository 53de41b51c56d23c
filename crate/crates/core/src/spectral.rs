//! Singular-value extremes, condition numbers and the perturbation bound.

use faer::Mat;
use serde::Serialize;

use crate::assembly::DENSE_MAX_ORDER;
use crate::error::{Error, Result};
use crate::fourier::assemble_fourier_matrix;
use crate::linalg::{self, Field, SparseLu};
use crate::model::GridConfig;
use crate::quadrature::QuadratureRule;
use crate::sparse::CsrMatrix;
use crate::Complex64;

pub const ITERATIVE_TOL: f64 = 1e-10;
pub const ITERATIVE_MAX_ITER: usize = 10_000;
/// Slack allowed on each Weyl inequality.
pub const WEYL_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `σ_max / σ_min`, `+∞` for a singular matrix.
    pub kappa: f64,
    pub sparsity: usize,
    pub method: Method,
    /// Relative residual of the extreme singular pairs (an a-priori
    /// backward-error bound for the dense route).
    pub residual: f64,
    pub singular: bool,
}

impl SpectrumReport {
    fn new(sigma_min: f64, sigma_max: f64, sparsity: usize, method: Method, residual: f64, order: usize) -> Self {
        let singular = sigma_min <= sigma_max * order as f64 * f64::EPSILON;
        let (sigma_min, kappa) = if singular {
            (0.0, f64::INFINITY)
        } else {
            (sigma_min, sigma_max / sigma_min)
        };
        SpectrumReport {
            sigma_min,
            sigma_max,
            kappa,
            sparsity,
            method,
            residual,
            singular,
        }
    }
}

fn check_nonempty<T: Field>(m: &CsrMatrix<T>) -> Result<()> {
    if m.n_rows() == 0 || m.n_cols() == 0 {
        return Err(Error::invalid("singular values of an empty matrix"));
    }
    Ok(())
}

fn dense_extremes<T: Field>(m: &CsrMatrix<T>) -> Result<SpectrumReport> {
    check_nonempty(m)?;
    let s = linalg::singular_values(m)?;
    let order = m.n_rows().max(m.n_cols());
    let residual = order as f64 * f64::EPSILON;
    Ok(SpectrumReport::new(
        *s.last().expect("nonempty"),
        s[0],
        m.sparsity(),
        Method::Dense,
        residual,
        order,
    ))
}

/// Extreme singular values: a dense decomposition up to order 4096, Lanczos
/// with a sparse LU above.
pub fn singular_extremes(m: &CsrMatrix<f64>) -> Result<SpectrumReport> {
    if m.n_rows().max(m.n_cols()) <= DENSE_MAX_ORDER {
        dense_extremes(m)
    } else {
        singular_extremes_iterative(m)
    }
}

/// Dense-only variant for the complex Fourier matrices.
pub fn singular_extremes_complex(m: &CsrMatrix<Complex64>) -> Result<SpectrumReport> {
    if m.n_rows().max(m.n_cols()) > DENSE_MAX_ORDER {
        return Err(Error::TooLarge {
            order: m.n_rows().max(m.n_cols()),
            cap: DENSE_MAX_ORDER,
        });
    }
    dense_extremes(m)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lanczos vectors kept before an explicit restart.
const LANCZOS_CYCLE: usize = 120;

/// Dominant eigenpair of a symmetric positive semidefinite operator by
/// Lanczos with full reorthogonalization and explicit restarts, starting
/// from the normalised all-ones vector. Stops when the relative Ritz
/// residual drops below [`ITERATIVE_TOL`]; at most [`ITERATIVE_MAX_ITER`]
/// operator applications.
fn lanczos_max(
    n: usize,
    what: &'static str,
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<(f64, f64)> {
    let mut start = vec![1.0 / (n as f64).sqrt(); n];
    let mut applied = 0;
    while applied < ITERATIVE_MAX_ITER {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let (mut alphas, mut betas) = (Vec::new(), Vec::new());
        let cycle = LANCZOS_CYCLE.min(n);
        loop {
            let k = basis.len() - 1;
            let mut w = apply(&basis[k])?;
            applied += 1;
            alphas.push(dot(&w, &basis[k]));
            // two Gram-Schmidt passes against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
                }
            }
            let beta = norm(&w);
            let m = alphas.len();
            let t = Mat::<f64>::from_fn(m, m, |i, j| match i.abs_diff(j) {
                0 => alphas[i],
                1 => betas[i.min(j)],
                _ => 0.0,
            });
            let (values, vectors) = linalg::symmetric_eigen(&t)?;
            let top = (0..m).max_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty");
            let theta = values[top];
            if !(theta > 0.0) || !theta.is_finite() {
                return Ok((theta.max(0.0), 0.0));
            }
            let residual = beta * vectors[(m - 1, top)].abs() / theta;
            let exhausted = beta <= f64::EPSILON * theta || m == n;
            if residual <= ITERATIVE_TOL || exhausted {
                return Ok((theta, residual));
            }
            if m == cycle || applied >= ITERATIVE_MAX_ITER {
                let mut x = vec![0.0; n];
                for (i, v) in basis.iter().enumerate() {
                    let c = vectors[(i, top)];
                    x.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
                }
                let nx = norm(&x);
                start = x.into_iter().map(|v| v / nx).collect();
                break;
            }
            betas.push(beta);
            basis.push(w.into_iter().map(|v| v / beta).collect());
        }
    }
    Err(Error::NonConvergence {
        what,
        iterations: ITERATIVE_MAX_ITER,
    })
}

/// Lanczos on `MᵀM` for `σ_max` and on `(MᵀM)⁻¹`, through a sparse LU of
/// `M`, for `σ_min`.
pub fn singular_extremes_iterative(m: &CsrMatrix<f64>) -> Result<SpectrumReport> {
    check_nonempty(m)?;
    if !m.is_square() {
        return Err(Error::invalid("iterative singular values need a square matrix"));
    }
    let n = m.n_rows();
    let (lmax, res_max) = lanczos_max(n, "Lanczos for sigma_max", |x| {
        Ok(m.adjoint_matvec(&m.matvec(x)))
    })?;
    let sigma_max = lmax.sqrt();
    let lu = match SparseLu::new(m) {
        Ok(lu) => lu,
        Err(_) => return Ok(SpectrumReport::new(0.0, sigma_max, m.sparsity(), Method::Iterative, res_max, n)),
    };
    let inverse = lanczos_max(n, "inverse Lanczos for sigma_min", |x| {
        lu.solve(&lu.solve_transpose(x)?)
    });
    let (sigma_min, res_min) = match inverse {
        Ok((mu, r)) if mu > 0.0 => (1.0 / mu.sqrt(), r),
        Ok(_) | Err(Error::LinearAlgebra(_)) => (0.0, 0.0),
        Err(e) => return Err(e),
    };
    Ok(SpectrumReport::new(
        sigma_min,
        sigma_max,
        m.sparsity(),
        Method::Iterative,
        res_max.max(res_min),
        n,
    ))
}

/// Perturbation bound `α(ε)` on `‖L̃_ε − L̃₀‖`:
///
/// ```text
/// α = ε²/(τ+ε²) (√N τ + √N + τ + 1/τ)
///   + ε²(1−ε²)/(ε²+τ)² (1 + τ)
///   + ε²(ε² + 2τ + τ²)/(τ(ε²+τ)²) √N (1 + 1/τ)
/// ```
pub fn alpha_bound(epsilon: f64, tau: f64, n: usize) -> f64 {
    let e2 = epsilon * epsilon;
    let r = (n as f64).sqrt();
    let d = e2 + tau;
    e2 / d * (r * tau + r + tau + 1.0 / tau)
        + e2 * (1.0 - e2) / (d * d) * (1.0 + tau)
        + e2 * (e2 + 2.0 * tau + tau * tau) / (tau * d * d) * r * (1.0 + 1.0 / tau)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationSample {
    pub xi: f64,
    pub e_norm: f64,
    pub sigma_max_eps: f64,
    pub sigma_min_eps: f64,
    pub sigma_max_0: f64,
    pub sigma_min_0: f64,
    pub weyl_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub alpha: f64,
    pub samples: Vec<PerturbationSample>,
    /// `max_ξ ‖E‖ / α(ε)`.
    pub max_ratio: f64,
    pub weyl_holds: bool,
}

/// Compares `L̃_ε` and `L̃₀` at every frequency in `xi_samples`.
pub fn perturbation_check(cfg: &GridConfig, rule: &QuadratureRule, xi_samples: &[f64]) -> Result<PerturbationReport> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::invalid("perturbation check needs epsilon > 0"));
    }
    let alpha = alpha_bound(cfg.epsilon, cfg.tau, cfg.n);
    let mut samples = Vec::with_capacity(xi_samples.len());
    for &xi in xi_samples {
        let fm = assemble_fourier_matrix(cfg, rule, xi, false)?;
        let e_norm = linalg::norm2(&fm.e)?;
        let se = dense_extremes(&fm.ltilde)?;
        let s0 = dense_extremes(&fm.l0)?;
        let (min_e, min_0) = (raw_min(&se), raw_min(&s0));
        let weyl_holds = se.sigma_max <= s0.sigma_max + e_norm + WEYL_SLACK
            && min_e >= min_0 - e_norm - WEYL_SLACK
            && s0.sigma_max <= se.sigma_max + e_norm + WEYL_SLACK
            && min_0 >= min_e - e_norm - WEYL_SLACK;
        samples.push(PerturbationSample {
            xi,
            e_norm,
            sigma_max_eps: se.sigma_max,
            sigma_min_eps: min_e,
            sigma_max_0: s0.sigma_max,
            sigma_min_0: min_0,
            weyl_holds,
        });
    }
    let max_ratio = samples
        .iter()
        .map(|s| if alpha > 0.0 { s.e_norm / alpha } else { 0.0 })
        .fold(0.0, f64::max);
    let weyl_holds = samples.iter().all(|s| s.weyl_holds);
    Ok(PerturbationReport {
        alpha,
        samples,
        max_ratio,
        weyl_holds,
    })
}

fn raw_min(r: &SpectrumReport) -> f64 {
    if r.singular {
        0.0
    } else {
        r.sigma_min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r_squared: f64,
    /// Log-space residuals, one per point.
    pub residuals: Vec<f64>,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn scaling_regression(points: &[(f64, f64)]) -> Result<Regression> {
    if points.len() < 4 {
        return Err(Error::invalid(format!(
            "scaling regression needs at least 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::invalid("scaling regression needs positive finite data"));
    }
    let xmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if xmax < 4.0 * xmin * (1.0 - 1e-12) {
        return Err(Error::invalid("scaling regression needs points spanning at least 4x"));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = lx.iter().zip(&ly).map(|(x, y)| y - intercept - slope * x).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(Regression {
        slope,
        intercept,
        stderr,
        r_squared,
        residuals,
    })
}
