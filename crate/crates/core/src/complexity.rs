//! Cost estimates and ε sweeps.
//!
//! Big-O constants are fixed to 1 and logarithms are base 2 throughout.

use std::io::Write;
use std::sync::mpsc;

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{assemble_ap_system, assemble_explicit_system, DENSE_MAX_ORDER};
use crate::error::{Error, Result};
use crate::model::{GridConfig, KineticField, ParityField, Scheme};
use crate::quadrature::{full_range_rule, half_range_rule};
use crate::spectral::{alpha_bound, singular_extremes, SpectrumReport};

/// Exact CSV header of a sweep report.
pub const CSV_HEADER: &str =
    "scheme,epsilon,phi,tau,h,N,Nx,Nt,delta,sigma_min,sigma_max,kappa,sparsity,alpha,classical_cost,quantum_queries,status";

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_FINAL_TIME: f64 = 0.1;
/// Fraction of the largest stable step used by the resolution rule.
pub const CFL_FRACTION: f64 = 0.9;

/// QLSA query count `s κ log₂(1/δ)`.
pub fn qlsa_queries(sparsity: usize, kappa: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if sparsity == 0 || !(kappa >= 1.0) {
        return Err(Error::invalid(format!(
            "need sparsity >= 1 and kappa >= 1, got {sparsity} and {kappa}"
        )));
    }
    Ok(sparsity as f64 * kappa * (1.0 / delta).log2())
}

/// `N² Nt Nx` for the AP scheme, `(2N)² Nt Nx` for the explicit one.
pub fn classical_cost(cfg: &GridConfig) -> u64 {
    let v = cfg.velocity_count() as u64;
    v * v * cfg.nt as u64 * cfg.nx as u64
}

/// `N² ε⁻³ δ⁻¹`.
pub fn explicit_closed_form_cost(n: usize, epsilon: f64, delta: f64) -> f64 {
    (n * n) as f64 / (epsilon.powi(3) * delta)
}

/// `N² ε⁻² log₂(1/(εδ))`.
pub fn explicit_closed_form_queries(n: usize, epsilon: f64, delta: f64) -> f64 {
    (n * n) as f64 / (epsilon * epsilon) * (1.0 / (epsilon * delta)).log2()
}

/// `N² ε⁻³ δ⁻²`, from composing `h = εδ`, `τ ~ hε²/(ε+h)`, `Nt = T/τ`,
/// `Nx = 1/h` directly. Differs from [`explicit_closed_form_cost`] in the δ
/// exponent; both are reported.
pub fn explicit_composed_cost(n: usize, epsilon: f64, delta: f64) -> f64 {
    (n * n) as f64 / (epsilon.powi(3) * delta * delta)
}

/// `N² ε⁻² δ⁻¹ log₂(1/(εδ))`, the composed counterpart of
/// [`explicit_closed_form_queries`].
pub fn explicit_composed_queries(n: usize, epsilon: f64, delta: f64) -> f64 {
    explicit_closed_form_queries(n, epsilon, delta) / delta
}

/// Renders the closed-form estimates of the explicit rows, if any.
pub fn closed_forms_csv(rows: &[ComplexityRow]) -> Option<String> {
    let mut out = String::from("epsilon,N,delta,stated_cost,composed_cost,stated_queries,composed_queries\n");
    let mut any = false;
    for r in rows.iter().filter(|r| r.closed_form_cost.is_some()) {
        any = true;
        out.push_str(&format!(
            "{:e},{},{:e},{:e},{:e},{:e},{:e}\n",
            r.epsilon,
            r.n,
            r.delta,
            explicit_closed_form_cost(r.n, r.epsilon, r.delta),
            explicit_composed_cost(r.n, r.epsilon, r.delta),
            explicit_closed_form_queries(r.n, r.epsilon, r.delta),
            explicit_composed_queries(r.n, r.epsilon, r.delta),
        ));
    }
    any.then_some(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    /// Keep `(τ, h, Nx, Nt)` of the base configuration.
    FixedGrid,
    /// `h = εδ`, `τ = 0.9 h ε²/(ε + h)`, `Nt = ⌈T/τ⌉`, `Nx = ⌈L/h⌉ − 1` with
    /// `L` the base domain length.
    CflDriven { final_time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub delta: f64,
    /// Solve for the rescaled AP variables.
    pub rescaled: bool,
    /// Rows whose system exceeds this order carry counts only.
    pub max_spectrum_order: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            delta: DEFAULT_DELTA,
            rescaled: true,
            max_spectrum_order: DENSE_MAX_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub scheme: String,
    pub epsilon: f64,
    pub phi: f64,
    pub tau: f64,
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Nt")]
    pub nt: usize,
    pub delta: f64,
    pub sigma_min: Option<f64>,
    pub sigma_max: Option<f64>,
    pub kappa: Option<f64>,
    pub sparsity: Option<usize>,
    /// `α(ε)` for the AP scheme, the splitting weight `τ/ε²` for the
    /// explicit one.
    pub alpha: f64,
    pub classical_cost: u64,
    pub quantum_queries: Option<f64>,
    pub status: String,
    #[serde(skip)]
    pub closed_form_cost: Option<f64>,
    #[serde(skip)]
    pub closed_form_queries: Option<f64>,
}

impl ComplexityRow {
    fn from_config(cfg: &GridConfig, delta: f64) -> Self {
        let alpha = match cfg.scheme {
            Scheme::Ap => alpha_bound(cfg.epsilon, cfg.tau, cfg.n),
            Scheme::Explicit => cfg.gamma(),
        };
        let (closed_form_cost, closed_form_queries) = match cfg.scheme {
            Scheme::Ap => (None, None),
            Scheme::Explicit => (
                Some(explicit_closed_form_cost(cfg.n, cfg.epsilon, delta)),
                Some(explicit_closed_form_queries(cfg.n, cfg.epsilon, delta)),
            ),
        };
        ComplexityRow {
            scheme: cfg.scheme.as_str().to_string(),
            epsilon: cfg.epsilon,
            phi: cfg.phi,
            tau: cfg.tau,
            h: cfg.h,
            n: cfg.n,
            nx: cfg.nx,
            nt: cfg.nt,
            delta,
            sigma_min: None,
            sigma_max: None,
            kappa: None,
            sparsity: None,
            alpha,
            classical_cost: classical_cost(cfg),
            quantum_queries: None,
            status: "ok".into(),
            closed_form_cost,
            closed_form_queries,
        }
    }

    /// Replaces the cost formula with the instrumented work of a trajectory
    /// that was actually run.
    pub fn with_measured_cost(mut self, work: u64) -> Self {
        self.classical_cost = work;
        self
    }

    /// Fills the spectral columns and the query count.
    pub fn with_spectrum(mut self, report: &SpectrumReport) -> Self {
        self.sigma_min = Some(report.sigma_min);
        self.sigma_max = Some(report.sigma_max);
        self.kappa = Some(report.kappa);
        self.sparsity = Some(report.sparsity);
        match qlsa_queries(report.sparsity, report.kappa, self.delta) {
            Ok(q) => self.quantum_queries = Some(q),
            Err(e) => self.status = format!("error: {e}"),
        }
        if report.singular {
            self.status = "singular".into();
        }
        self
    }
}

/// Configuration a sweep uses at `epsilon`.
pub fn sweep_config(base: &GridConfig, epsilon: f64, mode: SweepMode, delta: f64) -> Result<GridConfig> {
    let mut cfg = base.clone();
    cfg.epsilon = epsilon;
    if let SweepMode::CflDriven { final_time } = mode {
        if !(final_time > 0.0 && delta > 0.0 && epsilon > 0.0) {
            return Err(Error::invalid("cfl-driven sweeps need positive T, delta and epsilon"));
        }
        let length = base.x_right - base.x_left;
        let h = epsilon * delta;
        cfg.h = h;
        cfg.tau = CFL_FRACTION * GridConfig::max_stable_tau(Scheme::Explicit, epsilon, h);
        cfg.nt = (final_time / cfg.tau).ceil() as usize;
        cfg.nx = ((length / h).ceil() as usize).saturating_sub(1).max(1);
        cfg.x_right = cfg.x_left + (cfg.nx as f64 + 1.0) * h;
    }
    Ok(cfg)
}

fn spectrum_of(cfg: &GridConfig, rescaled: bool) -> Result<SpectrumReport> {
    let sys = match cfg.scheme {
        Scheme::Ap => {
            let rule = half_range_rule(cfg.n)?;
            assemble_ap_system(cfg, &rule, rescaled, &ParityField::zeros(cfg.n, cfg.nx))?
        }
        Scheme::Explicit => {
            let rule = full_range_rule(cfg.n)?;
            assemble_explicit_system(cfg, &rule, &KineticField::zeros(2 * cfg.n, cfg.nx))?
        }
    };
    singular_extremes(&sys.l)
}

/// Order of the space-time system of `cfg`.
pub fn system_order(cfg: &GridConfig) -> usize {
    // N parity pairs or 2N kinetic unknowns per cell, per level
    2 * cfg.n * cfg.nx * cfg.nt
}

/// One sweep row. Failures end up in the status column.
pub fn complexity_row(cfg: &GridConfig, opts: &SweepOptions) -> ComplexityRow {
    let mut row = ComplexityRow::from_config(cfg, opts.delta);
    match cfg.ensure_valid() {
        Ok(_) => {}
        Err(Error::Unstable(v)) => {
            row.status = format!(
                "unstable: {}",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
            );
            return row;
        }
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    }
    if system_order(cfg) > opts.max_spectrum_order {
        row.status = "counts_only".into();
        return row;
    }
    match spectrum_of(cfg, opts.rescaled) {
        Ok(report) => row.with_spectrum(&report),
        Err(e) => {
            row.status = format!("error: {e}");
            row
        }
    }
}

/// Runs one row per ε concurrently and hands rows to `sink` in ε order as
/// soon as all earlier rows are done. Returns all rows in ε order.
pub fn sweep_epsilon_streaming(
    base: &GridConfig,
    epsilons: &[f64],
    mode: SweepMode,
    opts: &SweepOptions,
    mut sink: impl FnMut(&ComplexityRow) -> Result<()>,
) -> Result<Vec<ComplexityRow>> {
    let configs = epsilons
        .iter()
        .map(|&e| sweep_config(base, e, mode, opts.delta))
        .collect::<Result<Vec<_>>>()?;
    let (tx, rx) = mpsc::channel::<(usize, ComplexityRow)>();
    let mut slots: Vec<Option<ComplexityRow>> = vec![None; configs.len()];
    let mut next = 0;
    let mut sink_result = Ok(());
    std::thread::scope(|scope| {
        let configs = &configs;
        scope.spawn(move || {
            configs.par_iter().enumerate().for_each_with(tx, |tx, (i, cfg)| {
                let _ = tx.send((i, complexity_row(cfg, opts)));
            });
        });
        for (i, row) in rx {
            slots[i] = Some(row);
            while next < slots.len() {
                let Some(row) = slots[next].as_ref() else { break };
                if sink_result.is_ok() {
                    sink_result = sink(row);
                }
                next += 1;
            }
        }
    });
    sink_result?;
    Ok(slots.into_iter().map(|r| r.expect("every row is produced")).collect())
}

pub fn sweep_epsilon(base: &GridConfig, epsilons: &[f64], mode: SweepMode, opts: &SweepOptions) -> Result<Vec<ComplexityRow>> {
    sweep_epsilon_streaming(base, epsilons, mode, opts, |_| Ok(()))
}

/// Streaming CSV writer with the exact sweep header.
pub struct RowWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner
            .write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        Ok(RowWriter { inner })
    }

    pub fn write(&mut self, row: &ComplexityRow) -> Result<()> {
        self.inner
            .serialize(row)
            .and_then(|_| self.inner.flush().map_err(Into::into))
            .map_err(|e| Error::invalid(format!("csv: {e}")))
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::invalid(format!("csv: {}", e.error())))
    }
}

/// Renders rows (with header) as CSV text.
pub fn rows_to_csv(rows: &[ComplexityRow]) -> Result<String> {
    let mut w = RowWriter::new(Vec::new())?;
    for row in rows {
        w.write(row)?;
    }
    String::from_utf8(w.into_inner()?).map_err(|e| Error::invalid(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn query_examples() {
        assert_eq!(qlsa_queries(2, 1.0, 0.5).unwrap(), 2.0);
        assert_eq!(qlsa_queries(1, 10.0, 0.25).unwrap(), 20.0);
        let q1 = qlsa_queries(3, 7.5, 0.01).unwrap();
        let q2 = qlsa_queries(6, 7.5, 0.01).unwrap();
        assert_eq!(q2, 2.0 * q1);
        for d in [0.0, 1.0, -0.5, 2.0] {
            assert!(qlsa_queries(1, 1.0, d).is_err());
        }
    }

    #[test]
    fn classical_cost_examples() {
        let mut c = GridConfig::ap(0.1, 0.005, 0.1, 4, 8, 10);
        assert_eq!(classical_cost(&c), 1280);
        c.scheme = Scheme::Explicit;
        assert_eq!(classical_cost(&c), 5120);
        c.nt = 20;
        assert_eq!(classical_cost(&c), 10240);
    }

    #[test]
    fn measured_cost_replaces_formula() {
        let cfg = GridConfig::ap(1e-2, 0.005, 0.1, 2, 6, 3);
        let rule = half_range_rule(2).unwrap();
        let traj = crate::ap::ap_evolve(&crate::model::initial_parity(&cfg, &rule).unwrap(), &cfg, &rule).unwrap();
        let row = complexity_row(&cfg, &SweepOptions::default()).with_measured_cost(traj.work);
        assert_eq!(row.classical_cost, traj.work);
        assert!(rows_to_csv(&[row]).unwrap().contains(&format!(",{},", traj.work)));
    }

    #[test]
    fn closed_forms() {
        assert_abs_diff_eq!(explicit_closed_form_cost(2, 0.5, 0.1), 4.0 * 8.0 * 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(explicit_closed_form_queries(2, 0.5, 0.1), 4.0 * 4.0 * 20f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(explicit_composed_cost(2, 0.5, 0.1), 4.0 * 8.0 * 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(explicit_composed_queries(2, 0.5, 0.1), 160.0 * 20f64.log2(), epsilon = 1e-9);
        let base = GridConfig::explicit(0.5, 1e-3, 0.1, 2, 6, 2);
        let rows = sweep_epsilon(&base, &[0.5], SweepMode::FixedGrid, &SweepOptions::default()).unwrap();
        let text = closed_forms_csv(&rows).unwrap();
        assert_eq!(text.lines().count(), 2);
        let ap = sweep_epsilon(&GridConfig::ap(0.5, 0.005, 0.1, 2, 6, 2), &[0.5], SweepMode::FixedGrid, &SweepOptions::default()).unwrap();
        assert!(closed_forms_csv(&ap).is_none());
    }

    #[test]
    fn cfl_driven_grid_rule() {
        let base = GridConfig::explicit(1.0, 1e-3, 0.1, 2, 9, 1);
        let (t, delta) = (0.1, 0.1);
        let mut prev: Option<GridConfig> = None;
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let c = sweep_config(&base, eps, SweepMode::CflDriven { final_time: t }, delta).unwrap();
            let h = eps * delta;
            let tau = 0.9 * h * eps * eps / (eps + h);
            assert_abs_diff_eq!(c.h, h, epsilon = 1e-16);
            assert_abs_diff_eq!(c.tau, tau, epsilon = 1e-18);
            assert_eq!(c.nt, (t / tau).ceil() as usize);
            assert!(c.validate().unwrap().passed());
            if let Some(p) = &prev {
                // halving ε shrinks τ by more than 4x; the ceiling can lose up
                // to 3 steps against the exact ratio
                assert!(p.tau / c.tau >= 4.0);
                assert!(c.nt + 3 >= 4 * p.nt);
            }
            prev = Some(c);
        }
    }

    #[test]
    fn fixed_grid_ap_sweep_rows_and_determinism() {
        let base = GridConfig::ap(1.0, 0.005, 0.1, 2, 6, 4);
        let eps = [1.0, 1e-2, 1e-4, 1e-6];
        let opts = SweepOptions::default();
        let rows = sweep_epsilon(&base, &eps, SweepMode::FixedGrid, &opts).unwrap();
        assert_eq!(rows.len(), 4);
        for (row, e) in rows.iter().zip(eps) {
            assert_eq!(row.epsilon, e);
            assert_eq!(row.status, "ok");
            let q = row.sparsity.unwrap() as f64 * row.kappa.unwrap() * 10f64.log2();
            assert_eq!(row.quantum_queries.unwrap(), q);
        }
        let small: Vec<f64> = rows[1..].iter().map(|r| r.kappa.unwrap()).collect();
        let ratio = small.iter().cloned().fold(0.0, f64::max) / small.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(ratio <= 10.0, "{ratio}");
        let again = sweep_epsilon(&base, &eps, SweepMode::FixedGrid, &opts).unwrap();
        assert_eq!(rows_to_csv(&rows).unwrap(), rows_to_csv(&again).unwrap());
    }

    #[test]
    fn streaming_preserves_order_and_failures_are_rows() {
        let base = GridConfig::explicit(1.0, 1e-3, 0.1, 2, 6, 3);
        let eps = [1.0, 0.5, 0.01, 0.2];
        let mut seen = Vec::new();
        let rows = sweep_epsilon_streaming(&base, &eps, SweepMode::FixedGrid, &SweepOptions::default(), |r| {
            seen.push(r.epsilon);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, eps.to_vec());
        assert!(rows[2].status.starts_with("unstable: tau <= h*epsilon^2/(epsilon+h)"));
        assert_eq!(rows[0].status, "ok");
        assert!(rows[2].kappa.is_none());
    }

    #[test]
    fn large_rows_are_counts_only() {
        let base = GridConfig::ap(1e-2, 0.005, 0.1, 2, 6, 4);
        let opts = SweepOptions {
            max_spectrum_order: 10,
            ..SweepOptions::default()
        };
        let rows = sweep_epsilon(&base, &[1e-2], SweepMode::FixedGrid, &opts).unwrap();
        assert_eq!(rows[0].status, "counts_only");
        assert_eq!(rows[0].classical_cost, 4 * 6 * 4);
    }

    #[test]
    fn csv_header_is_exact() {
        let base = GridConfig::ap(1e-2, 0.005, 0.1, 2, 6, 2);
        let rows = sweep_epsilon(&base, &[1e-2], SweepMode::FixedGrid, &SweepOptions::default()).unwrap();
        let text = rows_to_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 17);
        assert_eq!(fields[0], "AP");
        assert_eq!(fields[16], "ok");
    }
}
