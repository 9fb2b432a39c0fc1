//! Parameter sweeps over temperature, coupling and loop time, with the
//! figure presets, CSV/JSON output and the command-line driver.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{markov_threshold, memory_time, rate_gamma, BathKind, BathParams};
use crate::dynamics::IntegratorConfig;
use crate::fidelity::{averaged_fidelity, sample_initial_states};
use crate::qsystem::SystemParams;
use crate::units::{internal_to_ps, ps_to_internal};

pub mod cli;
pub mod config;
pub mod output;

pub use cli::run_cli;
pub use config::{preset, Plan, PRESET_NAMES};

/// Gaussian suppression exp(−(ω/ω_c)²) below which a grid point is flagged:
/// the rates there are numerically zero and F carries no bath information.
const CUTOFF_FLAG: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SweepError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) => 2,
            SweepError::Numerical(_) => 3,
            SweepError::Io(_) => 1,
        }
    }

    fn config(field: &str, reason: impl std::fmt::Display) -> Self {
        SweepError::Config(format!("`{field}`: {reason}"))
    }
}

pub type SweepResult<T> = std::result::Result<T, SweepError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// T in meV.
    Temperature,
    /// T/Ω, resolved against the base Ω.
    TOverOmega,
    K1,
    K3,
    /// Loop time in ps.
    TAd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn validate(&self) -> SweepResult<()> {
        if self.count < 2 {
            return Err(SweepError::config("sweep.count", format!("need at least 2 points, got {}", self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(SweepError::config("sweep.min", "grid bounds must be finite"));
        }
        if !(self.min < self.max) {
            return Err(SweepError::config(
                "sweep.min",
                format!("min {} must be below max {}", self.min, self.max),
            ));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(SweepError::config("sweep.min", "log spacing needs min > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    return self.max;
                }
                let x = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * x,
                    Spacing::Log => self.min * (self.max / self.min).powf(x),
                }
            })
            .collect()
    }
}

/// One fully resolved sweep (one curve).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub label: String,
    pub system: SystemParams,
    pub bath: BathParams,
    pub variable: SweepVariable,
    pub grid: Grid,
    /// Held Ω·t_ad for loop-time sweeps.
    pub fixed_alpha: Option<f64>,
    pub samples: usize,
    pub eta_sq: f64,
    pub integrator: IntegratorConfig,
}

impl SweepConfig {
    pub fn validate(&self) -> SweepResult<()> {
        self.grid.validate()?;
        if self.fixed_alpha.is_some() && self.variable != SweepVariable::TAd {
            return Err(SweepError::config("sweep.fixed_alpha", "only valid for t_ad sweeps"));
        }
        if let Some(a) = self.fixed_alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(SweepError::config("sweep.alpha", format!("must be > 0, got {a}")));
            }
        }
        let kind = self.bath.spectral.kind;
        match (self.variable, kind) {
            (SweepVariable::K1, BathKind::Superohmic) | (SweepVariable::K3, BathKind::Ohmic) => {
                return Err(SweepError::config(
                    "sweep.variable",
                    format!("{:?} has no effect on a {kind:?} bath", self.variable),
                ))
            }
            _ => {}
        }
        for v in self.grid.values() {
            self.point(v)?;
        }
        Ok(())
    }

    /// System and bath at one grid value.
    pub fn point(&self, value: f64) -> SweepResult<(SystemParams, BathParams)> {
        let mut sys = self.system;
        let mut bath = self.bath;
        match self.variable {
            SweepVariable::Temperature => bath.temperature = value,
            SweepVariable::TOverOmega => bath.temperature = value * self.system.omega,
            SweepVariable::K1 => bath.spectral.k1 = value,
            SweepVariable::K3 => bath.spectral.k3 = value,
            SweepVariable::TAd => {
                sys.t_ad = ps_to_internal(value);
                if let Some(a) = self.fixed_alpha {
                    sys.omega = a / sys.t_ad;
                }
            }
        }
        sys.validate().map_err(|e| SweepError::Config(format!("grid value {value}: {e}")))?;
        bath.validate().map_err(|e| SweepError::Config(format!("grid value {value}: {e}")))?;
        Ok((sys, bath))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub series: String,
    pub index: usize,
    pub sweep_value: f64,
    pub temperature: f64,
    pub t_over_omega: f64,
    /// Couplings that enter J.
    pub k1: f64,
    pub k3: f64,
    pub omega: f64,
    pub t_ad_ps: f64,
    pub alpha: f64,
    /// Γ^± at ω = Ω²/ε.
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub t_m: Option<f64>,
    /// Memory time in ps.
    pub tau_e_ps: f64,
    pub fidelity_mean: f64,
    pub fidelity_min: f64,
    pub fidelity_max: f64,
    pub n_samples: usize,
    pub min_eigenvalue: f64,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

fn point_warnings(sys: &SystemParams, bath: &BathParams) -> Vec<String> {
    let mut w = sys.regime_warnings();
    let x = sys.omega_sq_over_epsilon() / bath.spectral.omega_c;
    if (-x * x).exp() < CUTOFF_FLAG {
        w.push(format!("Omega^2/epsilon is {x:.1} omega_c: rates are cut off"));
    }
    if !crate::bath::markov_check(sys, bath).valid {
        w.push("below the Markov threshold".into());
    }
    w
}

fn run_point(cfg: &SweepConfig, index: usize, value: f64) -> SweepResult<SweepRecord> {
    let start = Instant::now();
    let (sys, bath) = cfg.point(value)?;
    let samples = sample_initial_states(cfg.samples, cfg.eta_sq)?;
    let res = averaged_fidelity(&sys, &bath, &samples, &cfg.integrator)?;
    let (gamma_plus, gamma_minus) = rate_gamma(&bath, sys.omega_sq_over_epsilon());
    let (k1, k3) = bath.spectral.effective_couplings();
    let warnings = point_warnings(&sys, &bath);
    for w in &warnings {
        log::warn!("{} point {index} ({value}): {w}", cfg.label);
    }
    Ok(SweepRecord {
        series: cfg.label.clone(),
        index,
        sweep_value: value,
        temperature: bath.temperature,
        t_over_omega: bath.temperature / sys.omega,
        k1,
        k3,
        omega: sys.omega,
        t_ad_ps: internal_to_ps(sys.t_ad),
        alpha: sys.alpha(),
        gamma_plus,
        gamma_minus,
        t_m: markov_threshold(&sys, &bath.spectral).t_m(),
        tau_e_ps: memory_time(&bath).map(internal_to_ps).unwrap_or(f64::INFINITY),
        fidelity_mean: res.mean,
        fidelity_min: res.min,
        fidelity_max: res.max,
        n_samples: res.n_samples,
        min_eigenvalue: res.stats.min_eigenvalue,
        warnings,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs every grid point of every sweep on the current rayon pool. Records
/// come back in (sweep, grid index) order whatever the worker count.
pub fn run_sweeps(cfgs: &[SweepConfig]) -> SweepResult<Vec<SweepRecord>> {
    for cfg in cfgs {
        cfg.validate()?;
    }
    let jobs: Vec<(&SweepConfig, usize, f64)> = cfgs
        .iter()
        .flat_map(|cfg| cfg.grid.values().into_iter().enumerate().map(move |(i, v)| (cfg, i, v)))
        .collect();
    jobs.into_par_iter().map(|(cfg, i, v)| run_point(cfg, i, v)).collect()
}

fn require(cfg: &SweepConfig, ok: bool, what: &str) -> SweepResult<()> {
    if ok {
        Ok(())
    } else {
        Err(SweepError::config("sweep.variable", format!("{what}, got {:?}", cfg.variable)))
    }
}

pub fn sweep_temperature(cfg: &SweepConfig) -> SweepResult<Vec<SweepRecord>> {
    require(
        cfg,
        matches!(cfg.variable, SweepVariable::Temperature | SweepVariable::TOverOmega),
        "temperature sweep needs temperature or t_over_omega",
    )?;
    run_sweeps(std::slice::from_ref(cfg))
}

pub fn sweep_adiabatic_time(cfg: &SweepConfig) -> SweepResult<Vec<SweepRecord>> {
    require(cfg, cfg.variable == SweepVariable::TAd, "adiabatic sweep needs t_ad")?;
    if cfg.fixed_alpha.is_none() {
        return Err(SweepError::config("sweep.fixed_alpha", "adiabatic sweep holds alpha fixed"));
    }
    run_sweeps(std::slice::from_ref(cfg))
}

pub fn sweep_coupling(cfg: &SweepConfig) -> SweepResult<Vec<SweepRecord>> {
    require(
        cfg,
        matches!(cfg.variable, SweepVariable::K1 | SweepVariable::K3),
        "coupling sweep needs k1 or k3",
    )?;
    run_sweeps(std::slice::from_ref(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::SpectralDensity;
    use crate::qsystem::Gate;

    fn base(variable: SweepVariable, min: f64, max: f64) -> SweepConfig {
        SweepConfig {
            label: "t".into(),
            system: SystemParams::standard(Gate::Gate1),
            bath: BathParams::new(SpectralDensity::superohmic(0.1, 0.5), 0.2).unwrap(),
            variable,
            grid: Grid {
                min,
                max,
                count: 3,
                spacing: Spacing::Linear,
            },
            fixed_alpha: None,
            samples: 2,
            eta_sq: 0.1,
            integrator: IntegratorConfig::default(),
        }
    }

    #[test]
    fn grids() {
        let g = Grid {
            min: 1.0,
            max: 100.0,
            count: 3,
            spacing: Spacing::Log,
        };
        let v = g.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(v[2], 100.0);
        let bad = Grid { min: 2.0, max: 1.0, ..g };
        match bad.validate() {
            Err(SweepError::Config(m)) => assert!(m.contains("sweep.min")),
            other => panic!("{other:?}"),
        }
        assert!(Grid { count: 1, ..g }.validate().is_err());
        assert!(Grid { min: 0.0, ..g }.validate().is_err());
    }

    #[test]
    fn fixed_alpha_point() {
        let mut cfg = base(SweepVariable::TAd, 1.0, 20.0);
        cfg.fixed_alpha = Some(280.0);
        let (sys, _) = cfg.point(5.0).unwrap();
        assert!((sys.alpha() - 280.0).abs() < 1e-9);
        assert!((internal_to_ps(sys.t_ad) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let mut cfg = base(SweepVariable::Temperature, 0.1, 0.5);
        cfg.fixed_alpha = Some(280.0);
        assert!(matches!(cfg.validate(), Err(SweepError::Config(_))));
        let cfg = base(SweepVariable::K1, 0.0, 1e-3);
        assert!(matches!(cfg.validate(), Err(SweepError::Config(_))));
        let cfg = base(SweepVariable::Temperature, -0.1, 0.5);
        assert!(matches!(cfg.validate(), Err(SweepError::Config(_))));
        let cfg = base(SweepVariable::K3, 0.0, 0.1);
        assert!(matches!(sweep_temperature(&cfg), Err(SweepError::Config(_))));
    }

    #[test]
    fn zero_bath_is_flat() {
        let cfg = base(SweepVariable::K3, 0.0, 1e-3);
        let cfg = SweepConfig {
            grid: Grid {
                min: 0.0,
                max: 1e-12,
                count: 2,
                spacing: Spacing::Linear,
            },
            ..cfg
        };
        let recs = sweep_coupling(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        assert!((recs[0].fidelity_mean - 1.0).abs() < 1e-9);
    }
}
