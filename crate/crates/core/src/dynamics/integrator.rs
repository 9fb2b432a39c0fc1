use serde::{Deserialize, Serialize};

use crate::bath::BathParams;
use crate::error::{Error, Result};
use crate::linalg::{c, sandwich, Mat4, Super, I};
use crate::quadrature::QuadratureConfig;
use crate::qsystem::{eigen_frame, hamiltonian, PropagatorScheme, SystemParams};

use super::{coupling_operator, INTEGRATOR_POSITIVITY_ABORT};
use super::redfield::{dissipator_generator, dissipator_generator_shifted, max_rate, shift_matrix};

/// Time-stepping rule for the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Explicit fourth-order Runge–Kutta on ρ. Must resolve the full
    /// spectral width of H, so it is only practical for small ε.
    Rk4,
    /// Exponential of the Liouvillian at the step midpoint.
    Midpoint,
    /// Fourth-order commutator-free Magnus on the Liouvillian.
    #[default]
    Magnus4,
}

impl Scheme {
    /// Matching unitary scheme for the bath-free reference.
    pub fn propagator_scheme(self) -> PropagatorScheme {
        match self {
            Scheme::Midpoint => PropagatorScheme::Midpoint,
            Scheme::Rk4 | Scheme::Magnus4 => PropagatorScheme::Magnus4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// Fixed step [ħ/meV]; `None` picks min(0.05/Ω, 0.05/Γ_max).
    pub step: Option<f64>,
    pub scheme: Scheme,
    /// Positivity is checked every this many steps (and at the end).
    pub positivity_cadence: usize,
    /// The dissipator is rebuilt every this many steps.
    pub tensor_cadence: usize,
    /// Record the state every this many steps; 0 records only the endpoints.
    pub record_cadence: usize,
    /// A checked eigenvalue below this aborts the evolution.
    pub positivity_abort: f64,
    /// Keep the imaginary (Lamb-shift) part of the bath transform. Off by
    /// default: the dissipator then uses the real rates only.
    pub lamb_shift: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: None,
            scheme: Scheme::Magnus4,
            positivity_cadence: 100,
            tensor_cadence: 1,
            record_cadence: 0,
            positivity_abort: INTEGRATOR_POSITIVITY_ABORT,
            lamb_shift: false,
        }
    }
}

/// Safety factor of the automatic step against the resolved scales.
const STEP_FACTOR: f64 = 0.05;
/// The configured step must satisfy h < STEP_LIMIT / max(Ω, Γ_max).
const STEP_LIMIT: f64 = 0.1;

impl IntegratorConfig {
    /// Resolves the step count and actual step for a loop of length t_ad.
    pub fn resolve(&self, sys: &SystemParams, bath: &BathParams) -> Result<(usize, f64)> {
        if self.positivity_cadence == 0 || self.tensor_cadence == 0 {
            return Err(Error::Integrator("cadences must be >= 1".into()));
        }
        if !(self.positivity_abort < 0.0) {
            return Err(Error::Integrator(format!(
                "positivity_abort must be negative, got {}",
                self.positivity_abort
            )));
        }
        let gamma_max = (0..=8)
            .map(|k| sys.t_ad * k as f64 / 8.0)
            .map(|t| hamiltonian(sys, t).map(|h| max_rate(bath, &eigen_frame(&h))))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let scale = sys.omega.max(gamma_max);
        let mut h = match self.step {
            Some(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::Integrator(format!("step must be > 0, got {h}")));
                }
                if h >= STEP_LIMIT / scale {
                    return Err(Error::Integrator(format!(
                        "step {h:.3e} does not resolve max(Omega, Gamma_max) = {scale:.3e}: need h < {:.3e}",
                        STEP_LIMIT / scale
                    )));
                }
                h
            }
            None => STEP_FACTOR / scale,
        };
        if self.scheme == Scheme::Rk4 {
            let (ep, em) = sys.bright_energies();
            let width = ep - em;
            if self.step.is_none() {
                h = h.min(STEP_FACTOR / width);
            } else if h * width > 1.0 {
                return Err(Error::Integrator(format!(
                    "rk4 step {h:.3e} does not resolve the spectral width {width:.3e}"
                )));
            }
        }
        let steps = (sys.t_ad / h).ceil().max(1.0) as usize;
        Ok((steps, sys.t_ad / steps as f64))
    }
}

/// Parts of the Liouvillian at one instant.
#[derive(Debug, Clone)]
pub(crate) struct LiouvillianParts {
    pub coherent: Super,
    pub dissipative: Super,
}

impl LiouvillianParts {
    pub fn total(&self) -> Super {
        self.coherent + self.dissipative
    }
}

pub(crate) fn coherent_super(h: &Mat4) -> Super {
    let id = Mat4::identity();
    (sandwich(h, &id) - sandwich(&id, h)) * (-I)
}

/// −L as a superoperator for the generator Λ.
pub(crate) fn dissipative_super(lambda: &Mat4) -> Super {
    let a = coupling_operator();
    let id = Mat4::identity();
    let ld = lambda.adjoint();
    let l = sandwich(&(a * lambda), &id) - sandwich(&a, &ld) - sandwich(lambda, &a) + sandwich(&id, &(ld * a));
    l * c(-1.0, 0.0)
}

/// Lamb-shift table for the (time-independent) spectrum of H.
pub(crate) fn loop_shifts(sys: &SystemParams, bath: &BathParams) -> Result<[[f64; 4]; 4]> {
    let frame = eigen_frame(&hamiltonian(sys, 0.0)?);
    shift_matrix(bath, &frame.energies, &QuadratureConfig::default())
}

pub(crate) fn liouvillian_parts(
    sys: &SystemParams,
    bath: &BathParams,
    t: f64,
    shifts: Option<&[[f64; 4]; 4]>,
) -> Result<LiouvillianParts> {
    let h = hamiltonian(sys, t)?;
    let frame = eigen_frame(&h);
    let lambda = match shifts {
        Some(s) => dissipator_generator_shifted(bath, &frame, s),
        None => dissipator_generator(bath, &frame),
    };
    Ok(LiouvillianParts {
        coherent: coherent_super(&h),
        dissipative: dissipative_super(&lambda),
    })
}

/// Superoperator of ρ ↦ −i[H(t), ρ] − L(ρ) on column-stacked ρ.
pub fn liouvillian(sys: &SystemParams, bath: &BathParams, t: f64) -> Result<Super> {
    Ok(liouvillian_parts(sys, bath, t, None)?.total())
}
