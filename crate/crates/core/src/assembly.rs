//! All-at-once space-time systems `L S = F`.
//!
//! AP: unknowns `S = [S₁; S₂]`, `S₁ = [r¹; …; r^{Nt}]`, `S₂ = [j¹; …; j^{Nt}]`,
//!
//! ```text
//! L = [ L₁₁  L₁₂ ]    L₁₁ = blkbidiag(I, −B₁)   L₁₂ = blksub(A₁)
//!     [ L₂₁  L₂₂ ]    L₂₁ = blksub(B₂)          L₂₂ = blkbidiag(I, −A₂)
//! ```
//!
//! The rescaled variant solves for `[τ⁻¹S₁; S₂]` with blocks
//! `[[L₁₁, τ⁻¹L₁₂], [τL₂₁, L₂₂]]`.
//!
//! Explicit: `L = blkbidiag(I, −B)`, `F = [b⁰ + B f⁰; b¹; …]`.

use crate::ap::{ap_step_matrices, boundary_forcing};
use crate::error::{Error, Result};
use crate::explicit::{explicit_matrix, inflow_vector};
use crate::linalg::{dense_solve, SparseLu};
use crate::model::{GridConfig, KineticField, ParityField, Scheme};
use crate::quadrature::QuadratureRule;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Default cap on the order of an assembled system.
pub const DEFAULT_MAX_ORDER: usize = 200_000;

/// Largest order the dense routes (solve, SVD) accept.
pub const DENSE_MAX_ORDER: usize = 4096;

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub l: CsrMatrix<f64>,
    pub f: Vec<f64>,
    pub scheme: Scheme,
    pub rescaled: bool,
    pub cfg: GridConfig,
    /// Unknowns per time level and component (`N Nx` or `2N Nx`).
    pub block: usize,
}

impl BlockSystem {
    pub fn order(&self) -> usize {
        self.l.n_rows()
    }

    /// Dense LU solve; refuses orders above [`DENSE_MAX_ORDER`].
    pub fn solve_dense(&self) -> Result<Vec<f64>> {
        if self.order() > DENSE_MAX_ORDER {
            return Err(Error::TooLarge {
                order: self.order(),
                cap: DENSE_MAX_ORDER,
            });
        }
        dense_solve(&self.l, &self.f)
    }

    /// Sparse LU solve.
    pub fn solve_sparse(&self) -> Result<Vec<f64>> {
        SparseLu::new(&self.l)?.solve(&self.f)
    }

    /// Splits an AP solution into levels `1..=Nt`, undoing the rescaling.
    /// Ghost values are copied from `initial`.
    pub fn unpack_ap(&self, solution: &[f64], initial: &ParityField) -> Result<Vec<ParityField>> {
        if self.scheme != Scheme::Ap || solution.len() != self.order() {
            return Err(Error::invalid("solution does not belong to an AP system"));
        }
        let (n, nt, b) = (self.cfg.n, self.cfg.nt, self.block);
        let scale = if self.rescaled { self.cfg.tau } else { 1.0 };
        (0..nt)
            .map(|l| {
                let r = solution[l * b..(l + 1) * b].iter().map(|x| x * scale).collect();
                let j = solution[(nt + l) * b..(nt + l + 1) * b].to_vec();
                Ok(ParityField::from_parts(n, self.cfg.nx, r, j)?.with_ghosts_of(initial))
            })
            .collect()
    }

    /// Splits an explicit solution into levels `1..=Nt`.
    pub fn unpack_explicit(&self, solution: &[f64], initial: &KineticField) -> Result<Vec<KineticField>> {
        if self.scheme != Scheme::Explicit || solution.len() != self.order() {
            return Err(Error::invalid("solution does not belong to an explicit system"));
        }
        let b = self.block;
        (0..self.cfg.nt)
            .map(|l| {
                Ok(KineticField::from_values(initial.n_vel(), self.cfg.nx, solution[l * b..(l + 1) * b].to_vec())?
                    .with_ghosts_of(initial))
            })
            .collect()
    }
}

fn check_cap(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        Err(Error::TooLarge { order, cap })
    } else {
        Ok(())
    }
}

pub fn assemble_ap_system(
    cfg: &GridConfig,
    rule: &QuadratureRule,
    rescaled: bool,
    initial: &ParityField,
) -> Result<BlockSystem> {
    assemble_ap_system_capped(cfg, rule, rescaled, initial, DEFAULT_MAX_ORDER)
}

pub fn assemble_ap_system_capped(
    cfg: &GridConfig,
    rule: &QuadratureRule,
    rescaled: bool,
    initial: &ParityField,
    max_order: usize,
) -> Result<BlockSystem> {
    cfg.ensure_scheme(Scheme::Ap)?;
    if cfg.nt == 0 {
        return Err(Error::invalid("the space-time system needs Nt >= 1"));
    }
    let block = cfg.n * cfg.nx;
    let order = 2 * block * cfg.nt;
    check_cap(order, max_order)?;
    let mats = ap_step_matrices(cfg, rule)?;
    initial.check_shape(cfg.n, cfg.nx)?;

    let nt = cfg.nt;
    let (s12, s21) = if rescaled { (1.0 / cfg.tau, cfg.tau) } else { (1.0, 1.0) };
    let j0 = nt * block;
    let mut t = TripletBuilder::new(order, order);
    for l in 0..order {
        t.push(l, l, 1.0);
    }
    for l in 1..nt {
        let (row, col) = (l * block, (l - 1) * block);
        t.add_block(row, col, &mats.b1, -1.0);
        t.add_block(row, j0 + col, &mats.a1, s12);
        t.add_block(j0 + row, col, &mats.b2, s21);
        t.add_block(j0 + row, j0 + col, &mats.a2, -1.0);
    }
    let l = t.build();

    let (ft, gt) = boundary_forcing(cfg, rule, &mats, initial);
    let mut f = vec![0.0; order];
    for lvl in 0..nt {
        f[lvl * block..(lvl + 1) * block].copy_from_slice(&ft);
        f[j0 + lvl * block..j0 + (lvl + 1) * block].copy_from_slice(&gt);
    }
    let b1r = mats.b1.matvec(&initial.r);
    let a1j = mats.a1.matvec(&initial.j);
    let b2r = mats.b2.matvec(&initial.r);
    let a2j = mats.a2.matvec(&initial.j);
    for i in 0..block {
        f[i] += b1r[i] - a1j[i];
        f[j0 + i] += a2j[i] - b2r[i];
    }
    if rescaled {
        for x in &mut f[..j0] {
            *x /= cfg.tau;
        }
    }
    Ok(BlockSystem {
        l,
        f,
        scheme: Scheme::Ap,
        rescaled,
        cfg: cfg.clone(),
        block,
    })
}

pub fn assemble_explicit_system(cfg: &GridConfig, rule: &QuadratureRule, initial: &KineticField) -> Result<BlockSystem> {
    assemble_explicit_system_capped(cfg, rule, initial, DEFAULT_MAX_ORDER)
}

pub fn assemble_explicit_system_capped(
    cfg: &GridConfig,
    rule: &QuadratureRule,
    initial: &KineticField,
    max_order: usize,
) -> Result<BlockSystem> {
    cfg.ensure_scheme(Scheme::Explicit)?;
    if cfg.nt == 0 {
        return Err(Error::invalid("the space-time system needs Nt >= 1"));
    }
    let block = 2 * cfg.n * cfg.nx;
    let order = block * cfg.nt;
    check_cap(order, max_order)?;
    let mats = explicit_matrix(cfg, rule)?;
    initial.check_shape(rule.len(), cfg.nx)?;

    let mut t = TripletBuilder::new(order, order);
    for l in 0..order {
        t.push(l, l, 1.0);
    }
    for l in 1..cfg.nt {
        t.add_block(l * block, (l - 1) * block, &mats.b, -1.0);
    }
    let l = t.build();

    let inflow = inflow_vector(cfg, rule, initial);
    let mut f: Vec<f64> = inflow.iter().copied().cycle().take(order).collect();
    for (fi, bf) in f.iter_mut().zip(mats.b.matvec(&initial.f)) {
        *fi += bf;
    }
    Ok(BlockSystem {
        l,
        f,
        scheme: Scheme::Explicit,
        rescaled: false,
        cfg: cfg.clone(),
        block,
    })
}

/// Exact sparsity of the assembled AP matrix for `Nx ≥ 5`, `Nt ≥ 2`.
/// The densest line is a column of the `r` unknowns: the identity, `5N`
/// entries of `B₁` (offsets `−2..=2` in every velocity block) and `4N` of
/// `B₂` (the diagonal of `BA` cancels).
pub fn ap_sparsity(n: usize) -> usize {
    9 * n + 1
}

/// Exact sparsity of the assembled explicit matrix for `Nx ≥ 2`, `Nt ≥ 2`:
/// `2N` collision entries, one upwind neighbour and the identity.
pub fn explicit_sparsity(n: usize) -> usize {
    2 * n + 2
}
