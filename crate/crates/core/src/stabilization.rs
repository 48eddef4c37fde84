//! Solver parameters and the face stabilization coefficients.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiemannSolver {
    /// Lax-Friedrichs: `max(2|û·n|, ξ)`.
    Lf,
    /// Harten-Lax-van Leer: `max(2 û·n, ξ)`.
    Hll,
}

impl fmt::Display for RiemannSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiemannSolver::Lf => "lf",
            RiemannSolver::Hll => "hll",
        })
    }
}

impl FromStr for RiemannSolver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lf" => Ok(RiemannSolver::Lf),
            "hll" => Ok(RiemannSolver::Hll),
            other => Err(Error::Config(format!("unknown Riemann solver '{other}' (expected lf or hll)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureConstraint {
    None,
    /// Lagrange multiplier enforcing `Σ |Ω_e| p_e = 0`.
    ZeroMean,
}

impl PressureConstraint {
    pub fn is_active(self) -> bool {
        self == PressureConstraint::ZeroMean
    }
}

impl FromStr for PressureConstraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PressureConstraint::None),
            "zero_mean" | "zero-mean" => Ok(PressureConstraint::ZeroMean),
            other => Err(Error::Config(format!("unknown pressure constraint '{other}'"))),
        }
    }
}

/// How the Newton Jacobian treats the convective stabilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JacobianMode {
    /// `τᵃ` frozen at the previous iterate and not differentiated.
    Lagged,
    /// Also differentiates `τᵃ(û)` (piecewise linear in `û`).
    #[default]
    Exact,
    /// Freezes the advecting velocity as well as `τᵃ`, so each linear
    /// solve is an Oseen (Picard) step.
    Picard,
}

impl FromStr for JacobianMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lagged" => Ok(JacobianMode::Lagged),
            "exact" => Ok(JacobianMode::Exact),
            "picard" => Ok(JacobianMode::Picard),
            other => Err(Error::Config(format!("unknown Jacobian mode '{other}' (expected lagged, exact or picard)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Kinematic viscosity, `1/Re`.
    pub nu: f64,
    pub beta: f64,
    /// Lower cut-off of the convective stabilization.
    pub xi: f64,
    pub tau_p: f64,
    /// Per-face replacement for `tau_p`, indexed by global face.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_p_faces: Option<Vec<f64>>,
    pub riemann: RiemannSolver,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub pressure_constraint: PressureConstraint,
    #[serde(default)]
    pub jacobian: JacobianMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu: 1.0,
            beta: 10.0,
            xi: 5e-2,
            tau_p: 1e-1,
            tau_p_faces: None,
            riemann: RiemannSolver::Hll,
            newton_tol: 1e-10,
            newton_max_iter: 30,
            pressure_constraint: PressureConstraint::None,
            jacobian: JacobianMode::Exact,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("nu", self.nu), ("beta", self.beta), ("xi", self.xi), ("tau_p", self.tau_p)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Config(format!("newton_tol must be positive, got {}", self.newton_tol)));
        }
        if let Some(t) = &self.tau_p_faces {
            if let Some(bad) = t.iter().find(|v| !(**v > 0.0)) {
                return Err(Error::Config(format!("per-face tau_p must be positive, got {bad}")));
            }
        }
        Ok(())
    }

    pub fn tau_p_at(&self, face: usize) -> f64 {
        match &self.tau_p_faces {
            Some(t) => t[face],
            None => self.tau_p,
        }
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored; values may be quoted.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected 'key = value', got '{line}'") })?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("{key}: {e}")));
            match key {
                "nu" => self.nu = num(value)?,
                "beta" => self.beta = num(value)?,
                "xi" => self.xi = num(value)?,
                "tau_p" => self.tau_p = num(value)?,
                "newton_tol" => self.newton_tol = num(value)?,
                "newton_max_iter" => self.newton_max_iter = value.parse().map_err(|e| bad(format!("{key}: {e}")))?,
                "riemann" => self.riemann = value.parse().map_err(|e: Error| bad(e.to_string()))?,
                "pressure_constraint" => {
                    self.pressure_constraint = value.parse().map_err(|e: Error| bad(e.to_string()))?
                }
                "jacobian" => self.jacobian = value.parse().map_err(|e: Error| bad(e.to_string()))?,
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        self.validate()
    }

    pub fn from_file(path: &Path) -> Result<SolverConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = SolverConfig::default();
        cfg.apply_overrides(&text)?;
        Ok(cfg)
    }
}

/// `τᵈ = βν`.
pub fn tau_diffusive(cfg: &SolverConfig) -> f64 {
    cfg.beta * cfg.nu
}

/// Convective stabilization for the face velocity `u_hat` and the normal
/// `n` of the cell being assembled.
pub fn tau_convective(cfg: &SolverConfig, u_hat: Vec2, n: Vec2) -> f64 {
    let un = u_hat.dot(n);
    match cfg.riemann {
        RiemannSolver::Lf => (2.0 * un.abs()).max(cfg.xi),
        RiemannSolver::Hll => (2.0 * un).max(cfg.xi),
    }
}

/// Gradient of `τᵃ` with respect to `û` (zero on the cut-off branch).
pub fn tau_convective_gradient(cfg: &SolverConfig, u_hat: Vec2, n: Vec2) -> Vec2 {
    let un = u_hat.dot(n);
    match cfg.riemann {
        RiemannSolver::Lf if 2.0 * un.abs() > cfg.xi => n * (2.0 * un.signum()),
        RiemannSolver::Hll if 2.0 * un > cfg.xi => n * 2.0,
        _ => Vec2::ZERO,
    }
}

/// `τᵈ + τᵃ`; only `τᵈ` when convection is off.
pub fn tau_total(cfg: &SolverConfig, u_hat: Vec2, n: Vec2, convection: bool) -> f64 {
    if convection {
        tau_diffusive(cfg) + tau_convective(cfg, u_hat, n)
    } else {
        tau_diffusive(cfg)
    }
}
