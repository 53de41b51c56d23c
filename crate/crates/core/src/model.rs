//! Problem configuration, grid, field layouts and boundary/initial data.

use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result, Violation};
use crate::quadrature::QuadratureRule;

/// Safety factor applied to the largest stable step when `tau = "auto"`.
pub const AUTO_TAU_FACTOR: f64 = 0.9;

/// Relative slack on the stability inequalities, so a step computed exactly
/// at the limit is not rejected by rounding.
const CFL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ap,
    Explicit,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Ap => "AP",
            Scheme::Explicit => "EXPLICIT",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AP" => Ok(Scheme::Ap),
            "EXPLICIT" => Ok(Scheme::Explicit),
            _ => Err(Error::Config(format!(
                "unknown scheme {s:?}, expected \"AP\" or \"EXPLICIT\""
            ))),
        }
    }
}

/// Initial profile, isotropic in velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitProfile {
    /// `exp(-100 (x - x_c)^2)` with `x_c` the domain midpoint.
    Gaussian,
    /// Identically one.
    Constant,
    /// One left of the midpoint, zero from it on.
    Step,
}

impl InitProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            InitProfile::Gaussian => "gaussian",
            InitProfile::Constant => "constant",
            InitProfile::Step => "step",
        }
    }

    pub fn eval(self, x: f64, center: f64) -> f64 {
        match self {
            InitProfile::Gaussian => (-100.0 * (x - center).powi(2)).exp(),
            InitProfile::Constant => 1.0,
            InitProfile::Step => {
                if x < center {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl FromStr for InitProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(InitProfile::Gaussian),
            "constant" => Ok(InitProfile::Constant),
            "step" => Ok(InitProfile::Step),
            _ => Err(Error::Config(format!(
                "unknown init profile {s:?}, expected gaussian, constant or step"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub scheme: Scheme,
    /// Scaling parameter ε.
    pub epsilon: f64,
    /// Relaxation parameter φ; the schemes here only support φ = 1.
    pub phi: f64,
    pub tau: f64,
    pub h: f64,
    /// Velocity nodes of the AP rule on [0, 1]; the explicit scheme uses 2N.
    pub n: usize,
    /// Interior spatial nodes x_1..x_{Nx}.
    pub nx: usize,
    pub nt: usize,
    pub x_left: f64,
    pub x_right: f64,
    /// Constant isotropic inflow value at each end (Dirichlet ghost data).
    pub bc_left: f64,
    pub bc_right: f64,
    pub init: InitProfile,
    /// Permit construction of configurations that violate the stability
    /// condition (used to probe unstable regimes on purpose).
    pub allow_unstable: bool,
}

impl GridConfig {
    /// Config on `[0, (nx + 1) h]` with zero inflow, φ = 1 and a gaussian
    /// initial profile.
    pub fn new(scheme: Scheme, epsilon: f64, tau: f64, h: f64, n: usize, nx: usize, nt: usize) -> Self {
        GridConfig {
            scheme,
            epsilon,
            phi: 1.0,
            tau,
            h,
            n,
            nx,
            nt,
            x_left: 0.0,
            x_right: (nx as f64 + 1.0) * h,
            bc_left: 0.0,
            bc_right: 0.0,
            init: InitProfile::Gaussian,
            allow_unstable: false,
        }
    }

    pub fn ap(epsilon: f64, tau: f64, h: f64, n: usize, nx: usize, nt: usize) -> Self {
        Self::new(Scheme::Ap, epsilon, tau, h, n, nx, nt)
    }

    pub fn explicit(epsilon: f64, tau: f64, h: f64, n: usize, nx: usize, nt: usize) -> Self {
        Self::new(Scheme::Explicit, epsilon, tau, h, n, nx, nt)
    }

    pub fn with_allow_unstable(mut self, allow: bool) -> Self {
        self.allow_unstable = allow;
        self
    }

    pub fn with_init(mut self, init: InitProfile) -> Self {
        self.init = init;
        self
    }

    pub fn with_boundary(mut self, left: f64, right: f64) -> Self {
        self.bc_left = left;
        self.bc_right = right;
        self
    }

    /// `λ = τ / h`.
    pub fn lambda(&self) -> f64 {
        self.tau / self.h
    }

    /// `γ = τ / ε²`.
    pub fn gamma(&self) -> f64 {
        self.tau / (self.epsilon * self.epsilon)
    }

    /// Number of velocity nodes actually carried by this scheme.
    pub fn velocity_count(&self) -> usize {
        match self.scheme {
            Scheme::Ap => self.n,
            Scheme::Explicit => 2 * self.n,
        }
    }

    pub fn x(&self, m: usize) -> f64 {
        self.x_left + m as f64 * self.h
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_left + self.x_right)
    }

    pub fn final_time(&self) -> f64 {
        self.nt as f64 * self.tau
    }

    /// Largest τ allowed by the stability condition of `scheme` at this ε, h.
    pub fn max_stable_tau(scheme: Scheme, epsilon: f64, h: f64) -> f64 {
        match scheme {
            Scheme::Ap => h * h / (1.0 + h),
            Scheme::Explicit => h * epsilon * epsilon / (epsilon + h),
        }
    }

    /// Checks the stability inequality of the scheme and the φ bound.
    ///
    /// Returns an error only for malformed input (non-finite or non-positive
    /// steps, zero sizes, inconsistent domain); a violated inequality is
    /// reported in the returned [`ValidationReport`].
    pub fn validate(&self) -> Result<ValidationReport> {
        for (name, v) in [("tau", self.tau), ("h", self.h), ("epsilon", self.epsilon)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if !self.phi.is_finite() {
            return Err(Error::invalid(format!("phi must be finite, got {}", self.phi)));
        }
        if self.n == 0 || self.nx == 0 {
            return Err(Error::invalid("N and Nx must be positive"));
        }
        let length = self.x_right - self.x_left;
        let expected = (self.nx as f64 + 1.0) * self.h;
        if !length.is_finite() || (length - expected).abs() > 1e-9 * expected.max(1.0) {
            return Err(Error::invalid(format!(
                "x_right - x_left = {length} must equal (Nx + 1) h = {expected}"
            )));
        }
        if !(self.bc_left.is_finite() && self.bc_right.is_finite()) {
            return Err(Error::invalid("boundary values must be finite"));
        }

        let mut violations = Vec::new();
        let phi_max = 1.0 / (self.epsilon * self.epsilon);
        if self.phi < 0.0 {
            violations.push(Violation {
                condition: "0 <= phi".into(),
                lhs: 0.0,
                rhs: self.phi,
            });
        }
        if self.phi > phi_max * (1.0 + CFL_SLACK) {
            violations.push(Violation {
                condition: "phi <= 1/epsilon^2".into(),
                lhs: self.phi,
                rhs: phi_max,
            });
        }
        let (condition, lhs, rhs) = match self.scheme {
            Scheme::Ap => ("tau/h^2 <= 1/(1+h)", self.tau / (self.h * self.h), 1.0 / (1.0 + self.h)),
            Scheme::Explicit => (
                "tau <= h*epsilon^2/(epsilon+h)",
                self.tau,
                Self::max_stable_tau(Scheme::Explicit, self.epsilon, self.h),
            ),
        };
        if lhs > rhs * (1.0 + CFL_SLACK) {
            violations.push(Violation {
                condition: condition.into(),
                lhs,
                rhs,
            });
        }
        Ok(ValidationReport { violations })
    }

    /// [`validate`](Self::validate), turning violations into an error unless
    /// `allow_unstable` is set.
    pub fn ensure_valid(&self) -> Result<ValidationReport> {
        let report = self.validate()?;
        if !report.passed() && !self.allow_unstable {
            return Err(Error::Unstable(report.violations));
        }
        Ok(report)
    }

    pub(crate) fn ensure_scheme(&self, scheme: Scheme) -> Result<()> {
        if self.scheme != scheme {
            return Err(Error::invalid(format!(
                "operation needs a {scheme} configuration, got {}",
                self.scheme
            )));
        }
        Ok(())
    }

    /// Every key of the config document with all defaults materialized.
    pub fn to_document(&self) -> Value {
        let mut m = Map::new();
        m.insert("scheme".into(), self.scheme.as_str().into());
        m.insert("epsilon".into(), self.epsilon.into());
        m.insert("phi".into(), self.phi.into());
        m.insert("tau".into(), self.tau.into());
        m.insert("h".into(), self.h.into());
        m.insert("N".into(), self.n.into());
        m.insert("Nx".into(), self.nx.into());
        m.insert("Nt".into(), self.nt.into());
        m.insert("x_left".into(), self.x_left.into());
        m.insert("x_right".into(), self.x_right.into());
        m.insert("bc_left".into(), self.bc_left.into());
        m.insert("bc_right".into(), self.bc_right.into());
        m.insert("init".into(), self.init.as_str().into());
        Value::Object(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validates `cfg` (see [`GridConfig::validate`]).
pub fn validate_config(cfg: &GridConfig) -> Result<ValidationReport> {
    cfg.validate()
}

/// Keys accepted in a config document, in canonical order.
pub const CONFIG_KEYS: [&str; 13] = [
    "scheme", "epsilon", "phi", "tau", "h", "N", "Nx", "Nt", "x_left", "x_right", "bc_left",
    "bc_right", "init",
];

/// Flat key/value config document (JSON syntax).
///
/// Required keys: `scheme`, `epsilon`, `h`, `N`, `Nx`, `Nt`. `tau` may be a
/// number or `"auto"` (also the default), meaning 0.9 times the largest
/// stable step. Other defaults: `phi = 1`, `x_left = 0`,
/// `x_right = x_left + (Nx + 1) h`, zero inflow, gaussian profile.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDocument {
    entries: Map<String, Value>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        let Value::Object(entries) = value else {
            return Err(Error::Config("config must be a flat key/value object".into()));
        };
        for (k, v) in &entries {
            check_key(k)?;
            if v.is_object() || v.is_array() {
                return Err(Error::Config(format!("config value for {k:?} must be a scalar")));
            }
        }
        Ok(ConfigDocument { entries })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    /// Applies `key=value` on top of the document. Numbers are recognised,
    /// anything else is kept as a string.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        check_key(key)?;
        let value = match serde_json::from_str::<Value>(raw) {
            Ok(v @ Value::Number(_)) => v,
            _ => Value::String(raw.to_string()),
        };
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    pub fn resolve(&self) -> Result<GridConfig> {
        let scheme: Scheme = self.string("scheme")?.parse()?;
        let epsilon = self.number("epsilon")?;
        let h = self.number("h")?;
        let n = self.count("N")?;
        let nx = self.count("Nx")?;
        let nt = self.count("Nt")?;
        let phi = self.optional_number("phi")?.unwrap_or(1.0);
        let tau = match self.entries.get("tau") {
            None => None,
            Some(Value::String(s)) if s == "auto" => None,
            Some(_) => Some(self.number("tau")?),
        }
        .unwrap_or_else(|| AUTO_TAU_FACTOR * GridConfig::max_stable_tau(scheme, epsilon, h));
        let x_left = self.optional_number("x_left")?.unwrap_or(0.0);
        let x_right = self
            .optional_number("x_right")?
            .unwrap_or(x_left + (nx as f64 + 1.0) * h);
        let init = match self.entries.get("init") {
            None => InitProfile::Gaussian,
            Some(_) => self.string("init")?.parse()?,
        };
        let cfg = GridConfig {
            scheme,
            epsilon,
            phi,
            tau,
            h,
            n,
            nx,
            nt,
            x_left,
            x_right,
            bc_left: self.optional_number("bc_left")?.unwrap_or(0.0),
            bc_right: self.optional_number("bc_right")?.unwrap_or(0.0),
            init,
            allow_unstable: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn string(&self, key: &str) -> Result<&str> {
        match self.entries.get(key) {
            Some(Value::String(s)) => Ok(s),
            Some(other) => Err(Error::Config(format!("{key} must be a string, got {other}"))),
            None => Err(Error::Config(format!("missing required key {key:?}"))),
        }
    }

    fn number(&self, key: &str) -> Result<f64> {
        self.optional_number(key)?
            .ok_or_else(|| Error::Config(format!("missing required key {key:?}")))
    }

    fn optional_number(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(x.as_f64()),
            Some(Value::String(s)) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config(format!("{key} must be a number, got {s:?}"))),
            Some(other) => Err(Error::Config(format!("{key} must be a number, got {other}"))),
        }
    }

    fn count(&self, key: &str) -> Result<usize> {
        let x = self.number(key)?;
        if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
            return Err(Error::Config(format!("{key} must be a non-negative integer, got {x}")));
        }
        Ok(x as usize)
    }
}

fn check_key(key: &str) -> Result<()> {
    if CONFIG_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "unknown config key {key:?}; valid keys: {}",
            CONFIG_KEYS.join(", ")
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `(f⁺, f⁻) → (r, j)`.
    Forward,
    /// `(r, j) → (f⁺, f⁻)`.
    Inverse,
}

/// Even/odd parity change of variables at one velocity pair `±v`:
/// `r = (f⁺ + f⁻)/2`, `j = (f⁺ − f⁻)/(2ε)`, inverse `f± = r ± ε j`.
pub fn parity_transform(a: f64, b: f64, epsilon: f64, direction: Direction) -> Result<(f64, f64)> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(match direction {
        Direction::Forward => (0.5 * (a + b), (a - b) / (2.0 * epsilon)),
        Direction::Inverse => (a + epsilon * b, a - epsilon * b),
    })
}

/// Even/odd parities on the AP grid. Velocity-major: block `k` of `r` holds
/// `r_{k,1..Nx}`. Ghost values at `m = 0` and `m = Nx + 1` are per velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityField {
    n: usize,
    nx: usize,
    pub r: Vec<f64>,
    pub j: Vec<f64>,
    pub r_left: Vec<f64>,
    pub r_right: Vec<f64>,
    pub j_left: Vec<f64>,
    pub j_right: Vec<f64>,
}

impl ParityField {
    pub fn zeros(n: usize, nx: usize) -> Self {
        ParityField {
            n,
            nx,
            r: vec![0.0; n * nx],
            j: vec![0.0; n * nx],
            r_left: vec![0.0; n],
            r_right: vec![0.0; n],
            j_left: vec![0.0; n],
            j_right: vec![0.0; n],
        }
    }

    pub fn from_parts(n: usize, nx: usize, r: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if r.len() != n * nx || j.len() != n * nx {
            return Err(Error::invalid(format!(
                "parity field needs {} entries per component, got r: {}, j: {}",
                n * nx,
                r.len(),
                j.len()
            )));
        }
        Ok(ParityField {
            r,
            j,
            ..Self::zeros(n, nx)
        })
    }

    /// Copies the ghost arrays from `other`.
    pub fn with_ghosts_of(mut self, other: &ParityField) -> Self {
        self.r_left.clone_from(&other.r_left);
        self.r_right.clone_from(&other.r_right);
        self.j_left.clone_from(&other.j_left);
        self.j_right.clone_from(&other.j_right);
        self
    }

    /// Sets every ghost value from isotropic inflow data (`r = value`, `j = 0`).
    pub fn with_isotropic_ghosts(mut self, left: f64, right: f64) -> Self {
        self.r_left.fill(left);
        self.r_right.fill(right);
        self.j_left.fill(0.0);
        self.j_right.fill(0.0);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Flat index of interior node `m ∈ 1..=Nx` at velocity `k ∈ 0..N`.
    #[inline]
    pub fn index(&self, k: usize, m: usize) -> usize {
        debug_assert!(m >= 1 && m <= self.nx);
        k * self.nx + (m - 1)
    }

    /// `r_{k,m}` for `m ∈ 0..=Nx+1`, ghosts included.
    #[inline]
    pub fn r_at(&self, k: usize, m: usize) -> f64 {
        if m == 0 {
            self.r_left[k]
        } else if m == self.nx + 1 {
            self.r_right[k]
        } else {
            self.r[self.index(k, m)]
        }
    }

    #[inline]
    pub fn j_at(&self, k: usize, m: usize) -> f64 {
        if m == 0 {
            self.j_left[k]
        } else if m == self.nx + 1 {
            self.j_right[k]
        } else {
            self.j[self.index(k, m)]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(&self.j).all(|v| v.is_finite())
    }

    pub(crate) fn check_shape(&self, n: usize, nx: usize) -> Result<()> {
        let ghosts_ok = [&self.r_left, &self.r_right, &self.j_left, &self.j_right]
            .iter()
            .all(|g| g.len() == n);
        if self.n != n || self.nx != nx || self.r.len() != n * nx || self.j.len() != n * nx || !ghosts_ok {
            return Err(Error::invalid(format!(
                "parity field shape (N={}, Nx={}) does not match expected (N={n}, Nx={nx})",
                self.n, self.nx
            )));
        }
        Ok(())
    }
}

/// Kinetic unknowns on the explicit grid. Space-major: block `m` holds
/// `f_{-N..-1, 1..N, m}` in increasing velocity order.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticField {
    n_vel: usize,
    nx: usize,
    pub f: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl KineticField {
    pub fn zeros(n_vel: usize, nx: usize) -> Self {
        KineticField {
            n_vel,
            nx,
            f: vec![0.0; n_vel * nx],
            left: vec![0.0; n_vel],
            right: vec![0.0; n_vel],
        }
    }

    pub fn from_values(n_vel: usize, nx: usize, f: Vec<f64>) -> Result<Self> {
        if f.len() != n_vel * nx {
            return Err(Error::invalid(format!(
                "kinetic field needs {} entries, got {}",
                n_vel * nx,
                f.len()
            )));
        }
        Ok(KineticField {
            f,
            ..Self::zeros(n_vel, nx)
        })
    }

    pub fn with_ghosts(mut self, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.len() != self.n_vel || right.len() != self.n_vel {
            return Err(Error::invalid("ghost blocks must have one entry per velocity"));
        }
        self.left = left;
        self.right = right;
        Ok(self)
    }

    pub fn with_ghosts_of(mut self, other: &KineticField) -> Self {
        self.left.clone_from(&other.left);
        self.right.clone_from(&other.right);
        self
    }

    pub fn n_vel(&self) -> usize {
        self.n_vel
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn index(&self, p: usize, m: usize) -> usize {
        debug_assert!(m >= 1 && m <= self.nx);
        (m - 1) * self.n_vel + p
    }

    /// `f` at storage velocity position `p` and node `m ∈ 0..=Nx+1`.
    #[inline]
    pub fn at(&self, p: usize, m: usize) -> f64 {
        if m == 0 {
            self.left[p]
        } else if m == self.nx + 1 {
            self.right[p]
        } else {
            self.f[self.index(p, m)]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.f.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_shape(&self, n_vel: usize, nx: usize) -> Result<()> {
        if self.n_vel != n_vel
            || self.nx != nx
            || self.f.len() != n_vel * nx
            || self.left.len() != n_vel
            || self.right.len() != n_vel
        {
            return Err(Error::invalid(format!(
                "kinetic field shape ({} velocities, Nx={}) does not match expected ({n_vel}, {nx})",
                self.n_vel, self.nx
            )));
        }
        Ok(())
    }
}

/// Discrete density `ρ_m = Σ_k w_k r_{k,m}` for the [0, 1] rule.
pub fn density(field: &ParityField, rule: &QuadratureRule) -> Result<Vec<f64>> {
    if rule.len() != field.n() {
        return Err(Error::invalid(format!(
            "rule has {} nodes but the field carries {} velocities",
            rule.len(),
            field.n()
        )));
    }
    let nx = field.nx();
    let mut rho = vec![0.0; nx];
    for (k, &w) in rule.weights().iter().enumerate() {
        for (m, rho_m) in rho.iter_mut().enumerate() {
            *rho_m += w * field.r[k * nx + m];
        }
    }
    Ok(rho)
}

/// Density of a kinetic field, `½ Σ_k w_k f_{k,m}` over the [-1, 1] rule
/// (the normalisation of the collision average).
pub fn kinetic_density(field: &KineticField, rule: &QuadratureRule) -> Result<Vec<f64>> {
    if rule.len() != field.n_vel() {
        return Err(Error::invalid("rule size does not match the kinetic field"));
    }
    Ok((1..=field.nx())
        .map(|m| {
            0.5 * rule
                .weights()
                .iter()
                .enumerate()
                .map(|(p, &w)| w * field.at(p, m))
                .sum::<f64>()
        })
        .collect())
}

/// Parity unknowns of the configured isotropic initial profile: `r = f`,
/// `j = 0`, ghosts from the inflow data.
pub fn initial_parity(cfg: &GridConfig, rule: &QuadratureRule) -> Result<ParityField> {
    let n = rule.len();
    let nx = cfg.nx;
    let center = cfg.center();
    let mut field = ParityField::zeros(n, nx);
    for k in 0..n {
        for m in 1..=nx {
            let f = cfg.init.eval(cfg.x(m), center);
            let (r, j) = parity_transform(f, f, cfg.epsilon, Direction::Forward)?;
            let idx = field.index(k, m);
            field.r[idx] = r;
            field.j[idx] = j;
        }
    }
    Ok(field.with_isotropic_ghosts(cfg.bc_left, cfg.bc_right))
}

/// Kinetic unknowns of the configured isotropic initial profile.
pub fn initial_kinetic(cfg: &GridConfig, rule: &QuadratureRule) -> Result<KineticField> {
    let n_vel = rule.len();
    let center = cfg.center();
    let mut field = KineticField::zeros(n_vel, cfg.nx);
    for m in 1..=cfg.nx {
        let f = cfg.init.eval(cfg.x(m), center);
        for p in 0..n_vel {
            let idx = field.index(p, m);
            field.f[idx] = f;
        }
    }
    field.with_ghosts(vec![cfg.bc_left; n_vel], vec![cfg.bc_right; n_vel])
}
