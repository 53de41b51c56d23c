//! Explicit upwind scheme on the `2N`-point velocity rule over `[-1, 1]`:
//!
//! ```text
//! f⁺_{k,m} = c_k f_{k,m} + (λ/ε) v_k⁺ f_{k,m−1} − (λ/ε) v_k⁻ f_{k,m+1}
//!          + (τ/(2ε²)) Σ_{k'} w_{k'} f_{k',m}
//! c_k = 1 − (λ/ε)(v_k⁺ − v_k⁻) − τ/ε²,   λ = τ/h
//! ```

use std::io::Write;

use crate::ap::Trajectory;
use crate::error::{Error, Result};
use crate::model::{GridConfig, KineticField, Scheme};
use crate::quadrature::QuadratureRule;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// One-step matrix `B` (so that `f⁺ = B f + b`) and its ingredients.
#[derive(Debug, Clone)]
pub struct ExplicitStepMatrix {
    pub b: CsrMatrix<f64>,
    /// `B` without the collision gain.
    pub b1: CsrMatrix<f64>,
    /// `½ blockdiag(W, …, W)`.
    pub b2: CsrMatrix<f64>,
    /// `τ / ε²`.
    pub alpha: f64,
    /// Diagonal of `C`.
    pub c: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
    /// `2N × 2N`, every row equal to the weight vector.
    pub w: CsrMatrix<f64>,
    /// `sqrt(‖B1‖₁ ‖B1‖_∞)`, an upper bound for `‖B1‖₂`.
    pub b1_norm_bound: f64,
}

impl ExplicitStepMatrix {
    pub fn order(&self) -> usize {
        self.b.n_rows()
    }
}

fn check_explicit(cfg: &GridConfig, rule: &QuadratureRule) -> Result<()> {
    cfg.ensure_scheme(Scheme::Explicit)?;
    if rule.len() != 2 * cfg.n || rule.interval() != (-1.0, 1.0) {
        return Err(Error::invalid(format!(
            "explicit scheme needs the 2N = {} point rule on [-1, 1], got {} points on {:?}",
            2 * cfg.n,
            rule.len(),
            rule.interval()
        )));
    }
    cfg.ensure_valid()?;
    Ok(())
}

/// `W`: every row is the weight vector.
pub fn weight_matrix(rule: &QuadratureRule) -> CsrMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..rule.len()).map(|_| rule.weights().to_vec()).collect();
    CsrMatrix::from_dense_rows(&rows)
}

pub fn explicit_matrix(cfg: &GridConfig, rule: &QuadratureRule) -> Result<ExplicitStepMatrix> {
    check_explicit(cfg, rule)?;
    let nv = rule.len();
    let nx = cfg.nx;
    let mu = cfg.lambda() / cfg.epsilon;
    let alpha = cfg.gamma();
    let v_plus: Vec<f64> = rule.nodes().iter().map(|&v| v.max(0.0)).collect();
    let v_minus: Vec<f64> = rule.nodes().iter().map(|&v| v.min(0.0)).collect();
    let c: Vec<f64> = (0..nv).map(|p| 1.0 - mu * (v_plus[p] - v_minus[p]) - alpha).collect();
    let w = weight_matrix(rule);

    let order = nv * nx;
    let mut t1 = TripletBuilder::new(order, order);
    for m in 0..nx {
        for p in 0..nv {
            let row = m * nv + p;
            t1.push(row, row, c[p]);
            if m > 0 {
                t1.push(row, row - nv, mu * v_plus[p]);
            }
            if m + 1 < nx {
                t1.push(row, row + nv, -mu * v_minus[p]);
            }
        }
    }
    let b1 = t1.build();
    let b2 = CsrMatrix::block_diag(&vec![w.scale(0.5); nx]);
    let b = b1.lin_comb(1.0, &b2, alpha);
    let b1_norm_bound = (b1.norm_one() * b1.norm_inf()).sqrt();
    if cfg.validate()?.passed() && b1_norm_bound > 1.0 - alpha + 1e-10 {
        return Err(Error::LinearAlgebra(format!(
            "Gershgorin bound on ||B1|| is {b1_norm_bound}, above 1 - tau/eps^2 = {}",
            1.0 - alpha
        )));
    }
    Ok(ExplicitStepMatrix {
        b,
        b1,
        b2,
        alpha,
        c,
        v_plus,
        v_minus,
        w,
        b1_norm_bound,
    })
}

/// Inflow vector `b = (λ/ε)[V⁺ f₀; 0; …; 0; −V⁻ f_{Nx+1}]`.
pub fn inflow_vector(cfg: &GridConfig, rule: &QuadratureRule, f: &KineticField) -> Vec<f64> {
    let nv = rule.len();
    let nx = cfg.nx;
    let mu = cfg.lambda() / cfg.epsilon;
    let mut b = vec![0.0; nv * nx];
    for (p, &v) in rule.nodes().iter().enumerate() {
        b[p] += mu * v.max(0.0) * f.left[p];
        b[(nx - 1) * nv + p] -= mu * v.min(0.0) * f.right[p];
    }
    b
}

pub fn explicit_step(f: &KineticField, cfg: &GridConfig, rule: &QuadratureRule) -> Result<KineticField> {
    check_explicit(cfg, rule)?;
    f.check_shape(rule.len(), cfg.nx)?;
    Ok(step_unchecked(f, cfg, rule, &mut 0))
}

fn step_unchecked(f: &KineticField, cfg: &GridConfig, rule: &QuadratureRule, work: &mut u64) -> KineticField {
    let nv = rule.len();
    let nx = cfg.nx;
    let mu = cfg.lambda() / cfg.epsilon;
    let alpha = cfg.gamma();
    let mut out = KineticField::zeros(nv, nx).with_ghosts_of(f);
    for m in 1..=nx {
        let gain: f64 = 0.5
            * alpha
            * rule
                .weights()
                .iter()
                .enumerate()
                .map(|(p, &w)| w * f.at(p, m))
                .sum::<f64>();
        for (p, &v) in rule.nodes().iter().enumerate() {
            let (vp, vm) = (v.max(0.0), v.min(0.0));
            let c = 1.0 - mu * (vp - vm) - alpha;
            let i = out.index(p, m);
            out.f[i] = c * f.at(p, m) + mu * vp * f.at(p, m - 1) - mu * vm * f.at(p, m + 1) + gain;
        }
    }
    *work += 4 * (nv * nx) as u64;
    out
}

pub fn explicit_evolve(initial: &KineticField, cfg: &GridConfig, rule: &QuadratureRule) -> Result<Trajectory<KineticField>> {
    check_explicit(cfg, rule)?;
    initial.check_shape(rule.len(), cfg.nx)?;
    let mut work = 0;
    let mut levels = Vec::with_capacity(cfg.nt + 1);
    levels.push(initial.clone());
    for step in 1..=cfg.nt {
        let next = step_unchecked(levels.last().expect("nonempty"), cfg, rule, &mut work);
        if !next.is_finite() {
            return Err(Error::Divergence { step });
        }
        levels.push(next);
    }
    Ok(Trajectory { levels, work })
}

/// `Nt` applications of `f ↦ B f + b`; work is `nnz(B)` per step, Θ(N² Nx).
pub fn explicit_evolve_matrix(
    initial: &KineticField,
    cfg: &GridConfig,
    rule: &QuadratureRule,
) -> Result<Trajectory<KineticField>> {
    let mats = explicit_matrix(cfg, rule)?;
    initial.check_shape(rule.len(), cfg.nx)?;
    let mut levels = Vec::with_capacity(cfg.nt + 1);
    levels.push(initial.clone());
    for step in 1..=cfg.nt {
        let prev = levels.last().expect("nonempty");
        let bf = mats.b.matvec(&prev.f);
        let inflow = inflow_vector(cfg, rule, prev);
        let f = bf.iter().zip(&inflow).map(|(a, b)| a + b).collect();
        let next = KineticField::from_values(rule.len(), cfg.nx, f)?.with_ghosts_of(prev);
        if !next.is_finite() {
            return Err(Error::Divergence { step });
        }
        levels.push(next);
    }
    Ok(Trajectory {
        levels,
        work: mats.b.nnz() as u64 * cfg.nt as u64,
    })
}

/// Writes `step,k,m,f` rows with the signed velocity index `k`.
pub fn write_trajectory_csv<W: Write>(
    traj: &Trajectory<KineticField>,
    rule: &QuadratureRule,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "step,k,m,f")?;
    for (step, level) in traj.levels.iter().enumerate() {
        for m in 1..=level.nx() {
            for p in 0..level.n_vel() {
                writeln!(out, "{step},{},{m},{:e}", rule.signed_index(p), level.at(p, m))?;
            }
        }
    }
    Ok(())
}
