//! Second-order memory-kernel solver in the interaction picture of the
//! bath-free evolution U(t):
//!
//! dρ̃/dt = −[Ã(t), S(t) − S(t)†],   S(t) = ∫₀^w k(τ) Ã(t−τ) ρ̃(t−τ) dτ
//!
//! with Ã = U†AU, k = g/π and w the memory window (capped at t). The history
//! integral uses the trapezoid rule on the integrator grid and time stepping
//! is Heun's method. Used to validate the Markov solver.

use serde::{Deserialize, Serialize};

use crate::bath::{memory_time, rate_kernel, BathParams};
use crate::error::{Error, Result};
use crate::linalg::{c, Mat4, C64};
use crate::quadrature::QuadratureConfig;
use crate::qsystem::{ideal_step, SystemParams};

use super::coupling_operator;
use super::integrator::IntegratorConfig;
use super::markov::{Trajectory, TrajectoryStats};
use super::DensityMatrix;

/// Memory windows shorter than this many τ_E are rejected.
pub const MIN_WINDOW_IN_TAU_E: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    /// ρ̃(t−τ) taken from the stored history.
    #[default]
    Full,
    /// ρ̃(t−τ) replaced by ρ̃(t): the time-local (TCL2) limit.
    TimeLocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonMarkovConfig {
    /// Memory window [ħ/meV]; `None` keeps the whole history. A window of
    /// zero switches the bath off.
    pub window: Option<f64>,
    pub memory: MemoryMode,
    pub quadrature: QuadratureConfig,
}

impl Default for NonMarkovConfig {
    fn default() -> Self {
        NonMarkovConfig {
            window: None,
            memory: MemoryMode::Full,
            quadrature: QuadratureConfig::default(),
        }
    }
}

fn commutator_term(a: &Mat4, s: &Mat4) -> Mat4 {
    let x = s - s.adjoint();
    -(a * x - x * a)
}

pub fn evolve_nonmarkov(
    rho0: &DensityMatrix,
    sys: &SystemParams,
    bath: &BathParams,
    cfg: &IntegratorConfig,
    nm: &NonMarkovConfig,
) -> Result<Trajectory> {
    rho0.validate()?;
    sys.validate()?;
    bath.validate()?;
    let (steps, h) = cfg.resolve(sys, bath)?;
    let (ep, em) = sys.bright_energies();
    if h * (ep - em) >= std::f64::consts::PI {
        return Err(Error::Integrator(format!(
            "step {h:.3e} aliases the spectral width {:.3e} in the memory integral",
            ep - em
        )));
    }
    let window_steps = match nm.window {
        None => steps,
        Some(w) if w == 0.0 => 0,
        Some(w) => {
            let need = MIN_WINDOW_IN_TAU_E * memory_time(bath)?;
            if !(w >= need) {
                return Err(Error::InvalidParameter {
                    field: "window",
                    reason: format!("memory window {w:.3e} shorter than {MIN_WINDOW_IN_TAU_E} tau_E = {need:.3e}"),
                });
            }
            ((w / h).round() as usize).min(steps)
        }
    };

    let kernel: Vec<C64> = (0..=window_steps)
        .map(|j| rate_kernel(bath, j as f64 * h, &nm.quadrature))
        .collect::<Result<_>>()?;

    let a = coupling_operator();
    let scheme = cfg.scheme.propagator_scheme();
    let mut u = Mat4::identity();
    let mut a_tilde = Vec::with_capacity(steps + 1);
    let mut props = Vec::with_capacity(steps + 1);
    a_tilde.push(a);
    props.push(u);
    for k in 0..steps {
        u = ideal_step(sys, k as f64 * h, h, scheme)? * u;
        a_tilde.push(u.adjoint() * a * u);
        props.push(u);
    }

    // S_n from the history B_j = Ã_j ρ̃_j, with `current` standing in for B_n
    let memory = |n: usize, history: &[Mat4], rho_n: &Mat4, current: &Mat4| -> Mat4 {
        let span = n.min(window_steps);
        let mut s = Mat4::zeros();
        for j in 0..=span {
            let weight = if j == 0 || j == span { 0.5 * h } else { h };
            let b = if j == 0 {
                *current
            } else {
                match nm.memory {
                    MemoryMode::Full => history[n - j],
                    MemoryMode::TimeLocal => a_tilde[n - j] * rho_n,
                }
            };
            s += b * (kernel[j] * weight);
        }
        if span == 0 {
            Mat4::zeros()
        } else {
            s
        }
    };

    let mut stats = TrajectoryStats {
        steps,
        step: h,
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    let mut rho = rho0.0;
    let mut history: Vec<Mat4> = Vec::with_capacity(steps + 1);
    history.push(a_tilde[0] * rho);
    for n in 0..steps {
        let f_n = commutator_term(&a_tilde[n], &memory(n, &history, &rho, &history[n]));
        let pred = rho + f_n * c(h, 0.0);
        let b_pred = a_tilde[n + 1] * pred;
        let f_pred = commutator_term(&a_tilde[n + 1], &memory(n + 1, &history, &pred, &b_pred));
        rho += (f_n + f_pred) * c(0.5 * h, 0.0);
        history.push(a_tilde[n + 1] * rho);

        let t = if n + 1 == steps { sys.t_ad } else { (n + 1) as f64 * h };
        let lab = DensityMatrix(props[n + 1] * rho * props[n + 1].adjoint());
        stats.max_trace_error = stats.max_trace_error.max(lab.trace_error());
        stats.max_hermiticity_error = stats.max_hermiticity_error.max(lab.hermiticity_error());
        if (n + 1) % cfg.positivity_cadence == 0 || n + 1 == steps {
            let min = lab.min_eigenvalue();
            if min < stats.min_eigenvalue {
                stats.min_eigenvalue = min;
                stats.min_eigenvalue_time = t;
            }
            if min < cfg.positivity_abort {
                return Err(Error::Positivity { t, min_eigenvalue: min });
            }
        }
        if n + 1 == steps || (cfg.record_cadence > 0 && (n + 1) % cfg.record_cadence == 0) {
            times.push(t);
            states.push(lab);
        }
    }
    Ok(Trajectory { times, states, stats })
}
