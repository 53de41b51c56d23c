//! Even/odd parity diffusive relaxation scheme.
//!
//! One time step is a relaxation step
//!
//! ```text
//! r* = (r + γ ρ) / (1 + γ)
//! j* = (j − γ (1 − ε²) v D r*) / (1 + γ),     D = central difference
//! ```
//!
//! followed by an upwind transport step in the Riemann invariants, written
//! back in `(r, j)`:
//!
//! ```text
//! r⁺ = B r* − A j* + (λ/2) f_v,   j⁺ = B j* − A r* + (λ/2) g_v
//! ```
//!
//! with `A = (λ/2) M_v`, `B = I + (λ/2) L_v`. Only φ = 1 is supported.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{density, GridConfig, ParityField, Scheme};
use crate::quadrature::QuadratureRule;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Levels `0..=Nt` of an evolution plus the operation count spent producing
/// them (multiply-adds).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    pub levels: Vec<F>,
    pub work: u64,
}

impl<F> Trajectory<F> {
    pub fn last(&self) -> &F {
        self.levels.last().expect("a trajectory always holds its initial level")
    }
}

/// `M_h`: tridiagonal, `+1` above and `−1` below the diagonal.
pub fn m_h(nx: usize) -> CsrMatrix<f64> {
    let mut t = TripletBuilder::new(nx, nx);
    for m in 0..nx.saturating_sub(1) {
        t.push(m, m + 1, 1.0);
        t.push(m + 1, m, -1.0);
    }
    t.build()
}

/// `L_h`: tridiagonal, `−2` on the diagonal and `1` beside it.
pub fn l_h(nx: usize) -> CsrMatrix<f64> {
    let mut t = TripletBuilder::new(nx, nx);
    for m in 0..nx {
        t.push(m, m, -2.0);
        if m + 1 < nx {
            t.push(m, m + 1, 1.0);
            t.push(m + 1, m, 1.0);
        }
    }
    t.build()
}

/// `N × N` blocks, block `(i, j) = w_j I_{Nx}`.
pub fn g_matrix(rule: &QuadratureRule, nx: usize) -> CsrMatrix<f64> {
    let n = rule.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|_| rule.weights().to_vec()).collect();
    CsrMatrix::from_dense_rows(&rows).kron(&CsrMatrix::identity(nx))
}

/// `blockdiag(v_k M_h)`.
pub fn m_v(rule: &QuadratureRule, nx: usize) -> CsrMatrix<f64> {
    CsrMatrix::from_diagonal(rule.nodes()).kron(&m_h(nx))
}

/// `blockdiag(v_k L_h)`.
pub fn l_v(rule: &QuadratureRule, nx: usize) -> CsrMatrix<f64> {
    CsrMatrix::from_diagonal(rule.nodes()).kron(&l_h(nx))
}

/// One-step operators of the scheme, so that
/// `r⁺ = B1 r − A1 j + f̃` and `j⁺ = A2 j − B2 r + g̃`.
#[derive(Debug, Clone)]
pub struct ApStepMatrices {
    pub a: CsrMatrix<f64>,
    pub b: CsrMatrix<f64>,
    pub g: CsrMatrix<f64>,
    pub m_v: CsrMatrix<f64>,
    pub l_v: CsrMatrix<f64>,
    pub b1: CsrMatrix<f64>,
    pub a1: CsrMatrix<f64>,
    pub b2: CsrMatrix<f64>,
    pub a2: CsrMatrix<f64>,
    /// `(A + B A / τ) G`, the ε → 0 limit of `B2`.
    pub limit_b2: CsrMatrix<f64>,
}

impl ApStepMatrices {
    pub fn order(&self) -> usize {
        self.b1.n_rows()
    }

    /// Multiply-adds of one matrix-form step.
    pub fn step_work(&self) -> u64 {
        (self.b1.nnz() + self.a1.nnz() + self.b2.nnz() + self.a2.nnz()) as u64
    }
}

fn check_ap(cfg: &GridConfig, rule: &QuadratureRule) -> Result<()> {
    cfg.ensure_scheme(Scheme::Ap)?;
    if cfg.phi != 1.0 {
        return Err(Error::Unsupported(format!(
            "the AP scheme is implemented for phi = 1 only, got phi = {}",
            cfg.phi
        )));
    }
    if rule.len() != cfg.n {
        return Err(Error::invalid(format!(
            "AP scheme needs the N = {} point rule, got {} points",
            cfg.n,
            rule.len()
        )));
    }
    cfg.ensure_valid()?;
    Ok(())
}

pub fn ap_step_matrices(cfg: &GridConfig, rule: &QuadratureRule) -> Result<ApStepMatrices> {
    check_ap(cfg, rule)?;
    let nx = cfg.nx;
    let order = cfg.n * nx;
    let (lambda, gamma, tau) = (cfg.lambda(), cfg.gamma(), cfg.tau);
    let eps2 = cfg.epsilon * cfg.epsilon;
    let q = (1.0 - eps2) / (tau + eps2);
    let s = 1.0 / (1.0 + gamma);

    let id = CsrMatrix::identity(order);
    let m_v = m_v(rule, nx);
    let l_v = l_v(rule, nx);
    let g = g_matrix(rule, nx);
    let a = m_v.scale(0.5 * lambda);
    let b = id.lin_comb(1.0, &l_v, 0.5 * lambda);
    let relax = id.lin_comb(1.0, &g, gamma);
    let ba = b.matmul(&a);

    let b1 = b.lin_comb(1.0, &a.matmul(&a), q).matmul(&relax).scale(s);
    let a1 = a.scale(s);
    let b2 = a.lin_comb(1.0, &ba, q).matmul(&relax).scale(s);
    let a2 = b.scale(s);
    let limit_b2 = a.lin_comb(1.0, &ba, 1.0 / tau).matmul(&g);
    Ok(ApStepMatrices {
        a,
        b,
        g,
        m_v,
        l_v,
        b1,
        a1,
        b2,
        a2,
        limit_b2,
    })
}

/// Boundary forcing `(f̃, g̃)` built from the ghost values of `state`:
///
/// ```text
/// f̃ = λ(1−ε²)/(2(τ+ε²)) A b̃_v + (λ/2) f_v,   f_v = v (b − c̃)
/// g̃ = −λ(1−ε²)/(2(τ+ε²)) B b̃_v + (λ/2) g_v,  g_v = v (c − b̃)
/// ```
///
/// where per velocity `b = (r₀, 0, …, 0, r_{Nx+1})`, `b̃ = (−r₀, …, r_{Nx+1})`,
/// `c = (j₀, …, j_{Nx+1})`, `c̃ = (−j₀, …, j_{Nx+1})`.
pub fn boundary_forcing(
    cfg: &GridConfig,
    rule: &QuadratureRule,
    mats: &ApStepMatrices,
    state: &ParityField,
) -> (Vec<f64>, Vec<f64>) {
    let nx = cfg.nx;
    let order = cfg.n * nx;
    let lambda = cfg.lambda();
    let eps2 = cfg.epsilon * cfg.epsilon;
    let coef = lambda * (1.0 - eps2) / (2.0 * (cfg.tau + eps2));

    let mut bt_v = vec![0.0; order];
    let mut f_v = vec![0.0; order];
    let mut g_v = vec![0.0; order];
    for (k, &v) in rule.nodes().iter().enumerate() {
        let first = k * nx;
        let last = k * nx + nx - 1;
        let (r0, r1) = (state.r_left[k], state.r_right[k]);
        let (j0, j1) = (state.j_left[k], state.j_right[k]);
        bt_v[first] -= v * r0;
        bt_v[last] += v * r1;
        // b − c̃ and c − b̃
        f_v[first] += v * (r0 + j0);
        f_v[last] += v * (r1 - j1);
        g_v[first] += v * (j0 + r0);
        g_v[last] += v * (j1 - r1);
    }
    let a_bt = mats.a.matvec(&bt_v);
    let b_bt = mats.b.matvec(&bt_v);
    let ft = (0..order).map(|i| coef * a_bt[i] + 0.5 * lambda * f_v[i]).collect();
    let gt = (0..order).map(|i| -coef * b_bt[i] + 0.5 * lambda * g_v[i]).collect();
    (ft, gt)
}

/// The relaxation half step. Ghost values are carried over unchanged.
pub fn relaxation_step(state: &ParityField, cfg: &GridConfig, rule: &QuadratureRule) -> Result<ParityField> {
    check_ap(cfg, rule)?;
    state.check_shape(cfg.n, cfg.nx)?;
    Ok(relax_unchecked(state, cfg, rule, &mut 0))
}

fn relax_unchecked(state: &ParityField, cfg: &GridConfig, rule: &QuadratureRule, work: &mut u64) -> ParityField {
    let (n, nx) = (cfg.n, cfg.nx);
    let gamma = cfg.gamma();
    let s = 1.0 / (1.0 + gamma);
    let rho = density(state, rule).expect("shape checked by caller");
    let mut out = ParityField::zeros(n, nx).with_ghosts_of(state);
    for k in 0..n {
        for m in 1..=nx {
            let i = out.index(k, m);
            out.r[i] = (state.r[i] + gamma * rho[m - 1]) * s;
        }
    }
    let c = gamma * (1.0 - cfg.epsilon * cfg.epsilon) / (2.0 * cfg.h);
    for (k, &v) in rule.nodes().iter().enumerate() {
        for m in 1..=nx {
            let i = out.index(k, m);
            let dr = out.r_at(k, m + 1) - out.r_at(k, m - 1);
            out.j[i] = (state.j[i] - c * v * dr) * s;
        }
    }
    *work += 3 * (n * nx) as u64;
    out
}

/// The upwind transport half step, applied to the starred state.
pub fn transport_step(star: &ParityField, cfg: &GridConfig, rule: &QuadratureRule) -> Result<ParityField> {
    check_ap(cfg, rule)?;
    star.check_shape(cfg.n, cfg.nx)?;
    Ok(transport_unchecked(star, cfg, rule, &mut 0))
}

fn transport_unchecked(star: &ParityField, cfg: &GridConfig, rule: &QuadratureRule, work: &mut u64) -> ParityField {
    let (n, nx) = (cfg.n, cfg.nx);
    let lambda = cfg.lambda();
    let mut out = ParityField::zeros(n, nx).with_ghosts_of(star);
    for (k, &v) in rule.nodes().iter().enumerate() {
        let lv = lambda * v;
        for m in 1..=nx {
            let i = out.index(k, m);
            let (rp, rm) = (star.r_at(k, m + 1), star.r_at(k, m - 1));
            let (jp, jm) = (star.j_at(k, m + 1), star.j_at(k, m - 1));
            out.r[i] = (1.0 - lv) * star.r[i] + 0.5 * lv * (rp + rm) - 0.5 * lv * (jp - jm);
            out.j[i] = (1.0 - lv) * star.j[i] + 0.5 * lv * (jp + jm) - 0.5 * lv * (rp - rm);
        }
    }
    *work += 2 * (n * nx) as u64;
    out
}

/// One step through the one-step matrices.
pub fn matrix_step(
    state: &ParityField,
    cfg: &GridConfig,
    rule: &QuadratureRule,
    mats: &ApStepMatrices,
) -> Result<ParityField> {
    state.check_shape(cfg.n, cfg.nx)?;
    if mats.order() != cfg.n * cfg.nx {
        return Err(Error::invalid("step matrices do not match the configuration"));
    }
    let (ft, gt) = boundary_forcing(cfg, rule, mats, state);
    let b1r = mats.b1.matvec(&state.r);
    let a1j = mats.a1.matvec(&state.j);
    let a2j = mats.a2.matvec(&state.j);
    let b2r = mats.b2.matvec(&state.r);
    let r = (0..b1r.len()).map(|i| b1r[i] - a1j[i] + ft[i]).collect();
    let j = (0..b1r.len()).map(|i| a2j[i] - b2r[i] + gt[i]).collect();
    Ok(ParityField::from_parts(cfg.n, cfg.nx, r, j)?.with_ghosts_of(state))
}

/// `Nt` steps of relaxation followed by transport.
pub fn ap_evolve(initial: &ParityField, cfg: &GridConfig, rule: &QuadratureRule) -> Result<Trajectory<ParityField>> {
    check_ap(cfg, rule)?;
    initial.check_shape(cfg.n, cfg.nx)?;
    let mut work = 0;
    let mut levels = Vec::with_capacity(cfg.nt + 1);
    levels.push(initial.clone());
    for step in 1..=cfg.nt {
        let prev = levels.last().expect("nonempty");
        let star = relax_unchecked(prev, cfg, rule, &mut work);
        let next = transport_unchecked(&star, cfg, rule, &mut work);
        if !next.is_finite() {
            return Err(Error::Divergence { step });
        }
        levels.push(next);
    }
    Ok(Trajectory { levels, work })
}

/// `Nt` steps through the one-step matrices; the work counter grows by the
/// operator nonzero count, Θ(N² Nx) per step.
pub fn ap_evolve_matrix(
    initial: &ParityField,
    cfg: &GridConfig,
    rule: &QuadratureRule,
) -> Result<Trajectory<ParityField>> {
    let mats = ap_step_matrices(cfg, rule)?;
    initial.check_shape(cfg.n, cfg.nx)?;
    let mut levels = Vec::with_capacity(cfg.nt + 1);
    levels.push(initial.clone());
    for step in 1..=cfg.nt {
        let next = matrix_step(levels.last().expect("nonempty"), cfg, rule, &mats)?;
        if !next.is_finite() {
            return Err(Error::Divergence { step });
        }
        levels.push(next);
    }
    Ok(Trajectory {
        levels,
        work: mats.step_work() * cfg.nt as u64,
    })
}

/// Writes `step,k,m,r,j` rows (1-based `k`, interior `m`).
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory<ParityField>, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "step,k,m,r,j")?;
    for (step, level) in traj.levels.iter().enumerate() {
        for k in 0..level.n() {
            for m in 1..=level.nx() {
                let i = level.index(k, m);
                writeln!(out, "{step},{},{m},{:e},{:e}", k + 1, level.r[i], level.j[i])?;
            }
        }
    }
    Ok(())
}
