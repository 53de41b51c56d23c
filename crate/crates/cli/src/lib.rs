//! `mstlab`: config files in, CSV and Matrix Market out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use multiscale_transport::ap::{self, ap_evolve};
use multiscale_transport::assembly::{assemble_ap_system, assemble_explicit_system, BlockSystem, DEFAULT_MAX_ORDER};
use multiscale_transport::complexity::{
    closed_forms_csv, complexity_row, sweep_epsilon, ComplexityRow, RowWriter, SweepMode, SweepOptions, DEFAULT_DELTA,
    DEFAULT_FINAL_TIME,
};
use multiscale_transport::explicit::{self, explicit_evolve};
use multiscale_transport::fourier::{frequency_samples, fourier_symbols, FREQUENCY_SAMPLES};
use multiscale_transport::model::{
    density, initial_kinetic, initial_parity, kinetic_density, ConfigDocument, CONFIG_KEYS,
};
use multiscale_transport::mtx::write_system;
use multiscale_transport::output::write_atomic;
use multiscale_transport::quadrature::{full_range_rule, half_range_rule};
use multiscale_transport::spectral::perturbation_check;
use multiscale_transport::{Error, GridConfig, Scheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mstlab", version, about = "Multiscale transport lab: solvers, space-time systems, spectra and cost sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the time stepper and write the final density profile.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also write every time level.
        #[arg(long)]
        trajectory: bool,
    },
    /// Write the space-time system as L.mtx, F.mtx and system.json.
    Assemble {
        #[command(flatten)]
        common: Common,
        /// Assemble the AP system in rescaled variables.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        rescaled: bool,
    },
    /// Extreme singular values of the space-time system as one CSV row.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        rescaled: bool,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
    /// Per-frequency Fourier symbols and perturbation norms (AP only).
    Fourier {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = FREQUENCY_SAMPLES)]
        samples: usize,
    },
    /// One CSV row per epsilon.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma separated list of epsilon values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        epsilons: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Mode::FixedGrid)]
        mode: Mode,
        /// Final time of the cfl-driven grid rule.
        #[arg(long = "final-time", default_value_t = DEFAULT_FINAL_TIME)]
        final_time: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        rescaled: bool,
        /// Rows whose system order exceeds this carry counts only.
        #[arg(long = "max-order", default_value_t = multiscale_transport::assembly::DENSE_MAX_ORDER)]
        max_order: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    FixedGrid,
    CflDriven,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file with flat key/value pairs.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "output-dir", default_value = ".")]
    pub output_dir: PathBuf,
    /// Run even when a stability condition is violated.
    #[arg(long = "allow-unstable")]
    pub allow_unstable: bool,
    /// Generic override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long = "N")]
    pub n: Option<String>,
    #[arg(long = "Nx")]
    pub nx: Option<String>,
    #[arg(long = "Nt")]
    pub nt: Option<String>,
    #[arg(long = "x_left", allow_hyphen_values = true)]
    pub x_left: Option<String>,
    #[arg(long = "x_right", allow_hyphen_values = true)]
    pub x_right: Option<String>,
    #[arg(long = "bc_left", allow_hyphen_values = true)]
    pub bc_left: Option<String>,
    #[arg(long = "bc_right", allow_hyphen_values = true)]
    pub bc_right: Option<String>,
    #[arg(long)]
    pub init: Option<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, Failure> {
        let named = [
            ("scheme", &self.scheme),
            ("epsilon", &self.epsilon),
            ("phi", &self.phi),
            ("tau", &self.tau),
            ("h", &self.h),
            ("N", &self.n),
            ("Nx", &self.nx),
            ("Nt", &self.nt),
            ("x_left", &self.x_left),
            ("x_right", &self.x_right),
            ("bc_left", &self.bc_left),
            ("bc_right", &self.bc_right),
            ("init", &self.init),
        ];
        let mut out: Vec<(String, String)> = named
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("--set expects KEY=VALUE, got {pair:?}")))?;
            if !CONFIG_KEYS.contains(&k) {
                return Err(Failure::usage(format!(
                    "unknown config key {k:?}; valid keys: {}",
                    CONFIG_KEYS.join(", ")
                )));
            }
            out.push((k.to_string(), v.to_string()));
        }
        Ok(out)
    }
}

/// Diagnostic plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure { code: EXIT_USAGE, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::Unstable(_) | Error::Unsupported(_) | Error::Config(_) => EXIT_VALIDATION,
            Error::Divergence { .. }
            | Error::TooLarge { .. }
            | Error::NonConvergence { .. }
            | Error::LinearAlgebra(_) => EXIT_NUMERICAL,
            Error::Io { .. } => EXIT_IO,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Writes `rows` as CSV to `destination` atomically.
pub fn emit_report(rows: &[ComplexityRow], destination: &Path) -> multiscale_transport::Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to report".into()));
    }
    let mut w = RowWriter::new(Vec::new())?;
    for row in rows {
        w.write(row)?;
    }
    write_atomic(destination, &w.into_inner()?)
}

struct Context {
    cfg: GridConfig,
    inputs: Map<String, Value>,
    out_dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Context {
    fn load(common: &Common) -> Result<Self, Failure> {
        let overrides = common.overrides()?;
        let mut inputs = Map::new();
        let mut doc = match &common.config {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                inputs.insert(path.display().to_string(), Value::String(hex::encode(Sha256::digest(&bytes))));
                let text = String::from_utf8(bytes)
                    .map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
                ConfigDocument::parse(&text)?
            }
            None => ConfigDocument::default(),
        };
        for (k, v) in &overrides {
            doc.set(k, v)?;
        }
        let cfg = doc.resolve()?.with_allow_unstable(common.allow_unstable);
        cfg.ensure_valid()?;
        std::fs::create_dir_all(&common.output_dir)
            .map_err(|e| Error::Io { path: common.output_dir.clone(), source: e })?;
        Ok(Context {
            cfg,
            inputs,
            out_dir: common.output_dir.clone(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.out_dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `manifest.json` and prints every output path.
    fn finish(mut self, command: &str, options: Value, out: &mut impl std::io::Write) -> Result<(), Failure> {
        let mut config = self.cfg.to_document();
        config["allow_unstable"] = self.cfg.allow_unstable.into();
        let outputs: Vec<Value> = self
            .written
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default().into())
            .collect();
        let manifest = json!({
            "tool": "mstlab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
            "options": options,
            "inputs": self.inputs,
            "outputs": outputs,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("json value serializes") + "\n";
        self.write("manifest.json", text.as_bytes())?;
        for p in &self.written {
            writeln!(out, "{}", p.display()).map_err(|e| Error::Io { path: p.clone(), source: e })?;
        }
        Ok(())
    }
}

fn csv_error(e: std::fmt::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("formatting failed: {e}") }
}

fn solve(common: &Common, trajectory: bool, out: &mut impl std::io::Write) -> Result<(), Failure> {
    let mut ctx = Context::load(common)?;
    let cfg = ctx.cfg.clone();
    let mut profile = String::from("x,rho\n");
    let mut levels = Vec::new();
    match cfg.scheme {
        Scheme::Ap => {
            let rule = half_range_rule(cfg.n)?;
            let traj = ap_evolve(&initial_parity(&cfg, &rule)?, &cfg, &rule)?;
            for (m, rho) in density(traj.last(), &rule)?.iter().enumerate() {
                writeln!(profile, "{:e},{:e}", cfg.x(m + 1), rho).map_err(csv_error)?;
            }
            if trajectory {
                ap::write_trajectory_csv(&traj, &mut levels).map_err(|e| Error::Io { path: "trajectory.csv".into(), source: e })?;
            }
        }
        Scheme::Explicit => {
            let rule = full_range_rule(cfg.n)?;
            let traj = explicit_evolve(&initial_kinetic(&cfg, &rule)?, &cfg, &rule)?;
            for (m, rho) in kinetic_density(traj.last(), &rule)?.iter().enumerate() {
                writeln!(profile, "{:e},{:e}", cfg.x(m + 1), rho).map_err(csv_error)?;
            }
            if trajectory {
                explicit::write_trajectory_csv(&traj, &rule, &mut levels)
                    .map_err(|e| Error::Io { path: "trajectory.csv".into(), source: e })?;
            }
        }
    }
    ctx.write("density.csv", profile.as_bytes())?;
    if trajectory {
        ctx.write("trajectory.csv", &levels)?;
    }
    ctx.finish("solve", json!({ "trajectory": trajectory }), out)
}

fn assemble_system(cfg: &GridConfig, rescaled: bool) -> multiscale_transport::Result<BlockSystem> {
    match cfg.scheme {
        Scheme::Ap => {
            let rule = half_range_rule(cfg.n)?;
            assemble_ap_system(cfg, &rule, rescaled, &initial_parity(cfg, &rule)?)
        }
        Scheme::Explicit => {
            let rule = full_range_rule(cfg.n)?;
            assemble_explicit_system(cfg, &rule, &initial_kinetic(cfg, &rule)?)
        }
    }
}

fn assemble(common: &Common, rescaled: bool, out: &mut impl std::io::Write) -> Result<(), Failure> {
    let mut ctx = Context::load(common)?;
    let sys = assemble_system(&ctx.cfg, rescaled)?;
    write_system(&ctx.out_dir, &sys)?;
    for name in ["L.mtx", "F.mtx", "system.json"] {
        ctx.written.push(ctx.out_dir.join(name));
    }
    ctx.finish("assemble", json!({ "rescaled": rescaled }), out)
}

fn spectrum(common: &Common, rescaled: bool, delta: f64, out: &mut impl std::io::Write) -> Result<(), Failure> {
    let mut ctx = Context::load(common)?;
    let opts = SweepOptions {
        delta,
        rescaled,
        max_spectrum_order: DEFAULT_MAX_ORDER,
    };
    let row = complexity_row(&ctx.cfg, &opts);
    if let Some(msg) = row.status.strip_prefix("error: ") {
        return Err(Failure { code: EXIT_NUMERICAL, message: msg.to_string() });
    }
    let path = ctx.out_dir.join("spectrum.csv");
    emit_report(std::slice::from_ref(&row), &path)?;
    ctx.written.push(path);
    ctx.finish("spectrum", json!({ "rescaled": rescaled, "delta": delta }), out)
}

fn fourier(common: &Common, samples: usize, out: &mut impl std::io::Write) -> Result<(), Failure> {
    let mut ctx = Context::load(common)?;
    let cfg = ctx.cfg.clone();
    if cfg.scheme != Scheme::Ap {
        return Err(Error::Unsupported("fourier analysis is defined for the AP scheme".into()).into());
    }
    let rule = half_range_rule(cfg.n)?;
    let xis = frequency_samples(cfg.h, samples);
    let mut symbols = String::from(
        "xi,k,v,abs_c1,abs_c2_over_tau,abs_d1,abs_tau_d2,abs_gamma0_c1_0,abs_tau_gamma0_d2_0\n",
    );
    for &xi in &xis {
        for (k, &v) in rule.nodes().iter().enumerate() {
            let s = fourier_symbols(&cfg, v, xi)?;
            writeln!(
                symbols,
                "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                xi,
                k + 1,
                v,
                s.c1.norm(),
                s.c2.norm() / cfg.tau,
                s.d1.norm(),
                cfg.tau * s.d2.norm(),
                s.gamma0_c1_0.norm(),
                cfg.tau * s.gamma0_d2_0.norm()
            )
            .map_err(csv_error)?;
        }
    }
    let report = perturbation_check(&cfg, &rule, &xis)?;
    let mut norms = String::from("xi,e_norm,alpha,ratio,sigma_max_eps,sigma_min_eps,sigma_max_0,sigma_min_0,weyl_holds\n");
    for s in &report.samples {
        writeln!(
            norms,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            s.xi,
            s.e_norm,
            report.alpha,
            s.e_norm / report.alpha,
            s.sigma_max_eps,
            s.sigma_min_eps,
            s.sigma_max_0,
            s.sigma_min_0,
            s.weyl_holds
        )
        .map_err(csv_error)?;
    }
    ctx.write("fourier_symbols.csv", symbols.as_bytes())?;
    ctx.write("fourier_norms.csv", norms.as_bytes())?;
    ctx.finish("fourier", json!({ "samples": samples }), out)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    common: &Common,
    epsilons: &[f64],
    mode: Mode,
    final_time: f64,
    delta: f64,
    rescaled: bool,
    max_order: usize,
    out: &mut impl std::io::Write,
) -> Result<(), Failure> {
    let mut ctx = Context::load(common)?;
    let sweep_mode = match mode {
        Mode::FixedGrid => SweepMode::FixedGrid,
        Mode::CflDriven => SweepMode::CflDriven { final_time },
    };
    let opts = SweepOptions {
        delta,
        rescaled,
        max_spectrum_order: max_order,
    };
    let rows = sweep_epsilon(&ctx.cfg, epsilons, sweep_mode, &opts)?;
    let path = ctx.out_dir.join("sweep.csv");
    emit_report(&rows, &path)?;
    ctx.written.push(path);
    if let Some(text) = closed_forms_csv(&rows) {
        ctx.write("closed_forms.csv", text.as_bytes())?;
    }
    let mode_name = match mode {
        Mode::FixedGrid => "fixed-grid",
        Mode::CflDriven => "cfl-driven",
    };
    ctx.finish(
        "sweep",
        json!({
            "epsilons": epsilons,
            "mode": mode_name,
            "final_time": final_time,
            "delta": delta,
            "rescaled": rescaled,
            "max_order": max_order,
        }),
        out,
    )
}

fn dispatch(cli: &Cli, out: &mut impl std::io::Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve { common, trajectory } => solve(common, *trajectory, out),
        Command::Assemble { common, rescaled } => assemble(common, *rescaled, out),
        Command::Spectrum { common, rescaled, delta } => spectrum(common, *rescaled, *delta, out),
        Command::Fourier { common, samples } => fourier(common, *samples, out),
        Command::Sweep {
            common,
            epsilons,
            mode,
            final_time,
            delta,
            rescaled,
            max_order,
        } => sweep(common, epsilons, *mode, *final_time, *delta, *rescaled, *max_order, out),
    }
}

/// Parses `args` (program name first) and runs the subcommand. Output paths
/// go to `out`, diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl std::io::Write, err: &mut impl std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "mstlab: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::Unstable(vec![])).code, EXIT_VALIDATION);
        assert_eq!(Failure::from(Error::Divergence { step: 3 }).code, EXIT_NUMERICAL);
        let io = Error::Io {
            path: "x".into(),
            source: std::io::Error::other("boom"),
        };
        assert_eq!(Failure::from(io).code, EXIT_IO);
    }

    #[test]
    fn unknown_set_key_lists_valid_keys() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(["mstlab", "solve", "--set", "eps=0.1"], &mut out, &mut err);
        assert_eq!(code, EXIT_USAGE);
        let msg = String::from_utf8(err).unwrap();
        assert!(msg.contains("valid keys: scheme, epsilon"), "{msg}");
    }
}
