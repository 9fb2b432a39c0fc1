//! Phonon bath: spectral densities, the thermal correlation function, the
//! golden-rule transition rates and Markov-validity diagnostics.
//!
//! Rates follow Γ^±(ω) = J(|ω|)(coth(|ω|/2T) ∓ sign ω). For ω > 0, Γ^+ is
//! the (suppressed) absorption rate and Γ^− the (enhanced) emission rate, so
//! Γ^+(ω) = e^{−ω/T} Γ^−(ω). A negative frequency swaps the two.
//!
//! The correlation function is normalised exactly as
//! g(τ) = ∫₀^∞ J(ω)[coth(ω/2T) cos ωτ − i sin ωτ] dω. Its full Fourier
//! transform is π J(|ω|)(coth ± 1), i.e. π times the rates above; the
//! dynamics works with the rates, and [`rate_kernel`] provides g/π, the
//! correlation function that is consistent with them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::qsystem::SystemParams;
use crate::quadrature::{integrate, QuadratureConfig};

/// Upper integration limit in units of ω_c; the Gaussian cutoff is e^{−64} there.
pub const CUTOFF_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathKind {
    Ohmic,
    Superohmic,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub kind: BathKind,
    /// Ohmic coupling (dimensionless).
    pub k1: f64,
    /// Superohmic coupling [meV⁻²].
    pub k3: f64,
    /// Gaussian cutoff [meV].
    pub omega_c: f64,
}

impl SpectralDensity {
    pub fn superohmic(k3: f64, omega_c: f64) -> Self {
        SpectralDensity {
            kind: BathKind::Superohmic,
            k1: 0.0,
            k3,
            omega_c,
        }
    }

    pub fn ohmic(k1: f64, omega_c: f64) -> Self {
        SpectralDensity {
            kind: BathKind::Ohmic,
            k1,
            k3: 0.0,
            omega_c,
        }
    }

    pub fn mixed(k1: f64, k3: f64, omega_c: f64) -> Self {
        SpectralDensity {
            kind: BathKind::Mixed,
            k1,
            k3,
            omega_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidParameter { field, reason });
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return bad("k1", format!("must be >= 0, got {}", self.k1));
        }
        if !(self.k3 >= 0.0 && self.k3.is_finite()) {
            return bad("k3", format!("must be >= 0, got {}", self.k3));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return bad("omega_c", format!("must be > 0, got {}", self.omega_c));
        }
        if self.kind == BathKind::Mixed && !(self.k1 > 0.0 && self.k3 > 0.0) {
            return bad("kind", "mixed bath needs k1 > 0 and k3 > 0".into());
        }
        Ok(())
    }

    /// Couplings that actually enter J for this kind, (k1, k3).
    pub fn effective_couplings(&self) -> (f64, f64) {
        match self.kind {
            BathKind::Ohmic => (self.k1, 0.0),
            BathKind::Superohmic => (0.0, self.k3),
            BathKind::Mixed => (self.k1, self.k3),
        }
    }

    /// J(ω)/ω, finite at ω = 0.
    fn j_over_omega(&self, omega: f64) -> f64 {
        let (k1, k3) = self.effective_couplings();
        let x = omega / self.omega_c;
        (k1 + k3 * omega * omega) * (-x * x).exp()
    }

    /// J without the domain check, for internal callers with |ω|.
    fn j(&self, omega: f64) -> f64 {
        omega * self.j_over_omega(omega)
    }

    pub fn is_zero(&self) -> bool {
        let (k1, k3) = self.effective_couplings();
        k1 == 0.0 && k3 == 0.0
    }
}

pub fn spectral_density(sd: &SpectralDensity, omega: f64) -> Result<f64> {
    if omega < 0.0 {
        return Err(Error::NegativeFrequency(omega));
    }
    Ok(sd.j(omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub spectral: SpectralDensity,
    /// Temperature [meV]; 0 is the coth → 1 limit.
    pub temperature: f64,
}

impl BathParams {
    pub fn new(spectral: SpectralDensity, temperature: f64) -> Result<Self> {
        let b = BathParams { spectral, temperature };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        self.spectral.validate()?;
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "temperature",
                reason: format!("must be >= 0, got {}", self.temperature),
            });
        }
        Ok(())
    }
}

/// x / (eˣ − 1), finite at 0.
fn bose_factor_scaled(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// J(ω)·n(ω) with n the Bose occupation, for ω ≥ 0.
fn j_bose(bath: &BathParams, omega: f64) -> f64 {
    let t = bath.temperature;
    if t == 0.0 {
        return 0.0;
    }
    bath.spectral.j_over_omega(omega) * t * bose_factor_scaled(omega / t)
}

/// J(ω)·coth(ω/2T) for ω ≥ 0, finite as ω → 0.
pub fn j_coth(bath: &BathParams, omega: f64) -> f64 {
    bath.spectral.j(omega) + 2.0 * j_bose(bath, omega)
}

/// Transition rates (Γ^+, Γ^−) at a signed frequency.
pub fn rate_gamma(bath: &BathParams, omega_nk: f64) -> (f64, f64) {
    let w = omega_nk.abs();
    // J(coth − 1) = 2Jn and J(coth + 1) = 2J(n + 1)
    let up = 2.0 * j_bose(bath, w);
    let down = up + 2.0 * bath.spectral.j(w);
    if omega_nk >= 0.0 {
        (up, down)
    } else {
        (down, up)
    }
}

/// Symmetric spectrum S(ν) = J(|ν|)(coth(|ν|/2T) + sign ν): the rate for a
/// transition that hands energy ν to the bath.
pub fn emission_spectrum(bath: &BathParams, nu: f64) -> f64 {
    rate_gamma(bath, nu).1
}

fn correlation_integrand(bath: &BathParams, tau: f64, omega: f64) -> C64 {
    let (s, c) = (omega * tau).sin_cos();
    C64::new(j_coth(bath, omega) * c, -bath.spectral.j(omega) * s)
}

/// g(τ) by adaptive quadrature over [0, 8ω_c].
pub fn correlation(bath: &BathParams, tau: f64, quadrature: &QuadratureConfig) -> Result<C64> {
    bath.validate()?;
    if bath.spectral.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let upper = CUTOFF_SPAN * bath.spectral.omega_c;
    // tolerance relative to the peak integrand scale
    let peak = (0..=64)
        .map(|k| j_coth(bath, upper * k as f64 / 64.0))
        .fold(0.0, f64::max);
    let cfg = QuadratureConfig {
        abs_tol: quadrature.abs_tol * peak.max(f64::MIN_POSITIVE),
        ..*quadrature
    };
    Ok(integrate(|w| correlation_integrand(bath, tau, w), 0.0, upper, &cfg)?.value)
}

/// g(τ)/π: the correlation function whose half-Fourier transform gives the
/// rates of [`rate_gamma`], 2·Re∫₀^∞ (g/π)(τ) e^{iωτ} dτ = Γ^−(ω).
pub fn rate_kernel(bath: &BathParams, tau: f64, quadrature: &QuadratureConfig) -> Result<C64> {
    Ok(correlation(bath, tau, quadrature)? / PI)
}

/// Imaginary part of the one-sided transform ∫₀^∞ (g/π)(τ) e^{−iωτ} dτ,
///
/// S(ω) = (1/2π) PV∫₀^∞ [J(coth − 1)/(ν − ω) − J(coth + 1)/(ν + ω)] dν,
///
/// whose real part is ½Γ^+(ω). S drives the Lamb shift of the dissipator.
pub fn rate_shift(bath: &BathParams, omega: f64, quadrature: &QuadratureConfig) -> Result<f64> {
    bath.validate()?;
    if bath.spectral.is_zero() {
        return Ok(0.0);
    }
    let upper = CUTOFF_SPAN * bath.spectral.omega_c;
    let absorb = |nu: f64| 2.0 * j_bose(bath, nu);
    let emit = |nu: f64| 2.0 * j_bose(bath, nu) + 2.0 * bath.spectral.j(nu);
    let cfg = QuadratureConfig {
        abs_tol: quadrature.abs_tol * (0..=64).map(|k| emit(upper * k as f64 / 64.0)).fold(0.0, f64::max),
        ..*quadrature
    };
    let w = omega.abs();
    let value = if w < 1e-12 {
        // the two poles merge: (absorb − emit)/ν = −2J/ν
        integrate(|nu| C64::new(-2.0 * bath.spectral.j_over_omega(nu), 0.0), 0.0, upper, &cfg)?.value.re
    } else if w >= upper {
        integrate(|nu| C64::new(absorb(nu) / (nu - omega) - emit(nu) / (nu + omega), 0.0), 0.0, upper, &cfg)?
            .value
            .re
    } else {
        // subtract the simple pole at ν = |ω| and add its principal value back
        let (pole, sign) = if omega > 0.0 { (absorb(w), 1.0) } else { (emit(w), -1.0) };
        let f = |nu: f64| {
            let regular = absorb(nu) / (nu - omega) - emit(nu) / (nu + omega);
            C64::new(regular - sign * pole / (nu - w), 0.0)
        };
        let left = integrate(f, 0.0, w, &cfg)?.value.re;
        let right = integrate(f, w, upper, &cfg)?.value.re;
        left + right + sign * pole * ((upper - w) / w).ln()
    };
    Ok(value / (2.0 * PI))
}

/// τ_E ≈ 1/(2πT).
pub fn memory_time(bath: &BathParams) -> Result<f64> {
    if bath.temperature <= 0.0 {
        return Err(Error::InfiniteMemoryTime);
    }
    Ok(1.0 / (2.0 * PI * bath.temperature))
}

/// Markov threshold temperature and the density-matrix timescale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkovThreshold {
    Superohmic {
        /// T_M = k3 (Ω²/ε)³
        t_m: f64,
        /// τ_D = (ε/Ω²)³ / k3
        tau_d: f64,
    },
    /// No superohmic part; see [`markov_check`].
    NotApplicable,
}

impl MarkovThreshold {
    pub fn t_m(&self) -> Option<f64> {
        match self {
            MarkovThreshold::Superohmic { t_m, .. } => Some(*t_m),
            MarkovThreshold::NotApplicable => None,
        }
    }
}

pub fn markov_threshold(sys: &SystemParams, sd: &SpectralDensity) -> MarkovThreshold {
    let (_, k3) = sd.effective_couplings();
    if k3 <= 0.0 {
        return MarkovThreshold::NotApplicable;
    }
    let w = sys.omega_sq_over_epsilon();
    MarkovThreshold::Superohmic {
        t_m: k3 * w * w * w,
        tau_d: 1.0 / (k3 * w * w * w),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovCheck {
    pub tau_e: f64,
    pub tau_d: f64,
    pub valid: bool,
}

/// τ_E < τ_D. With a superohmic part this is T > T_M; a purely ohmic bath
/// uses τ_D = 1/Γ^−(Ω²/ε).
pub fn markov_check(sys: &SystemParams, bath: &BathParams) -> MarkovCheck {
    let tau_e = memory_time(bath).unwrap_or(f64::INFINITY);
    match markov_threshold(sys, &bath.spectral) {
        MarkovThreshold::Superohmic { t_m, tau_d } => MarkovCheck {
            tau_e,
            tau_d,
            valid: bath.temperature > t_m,
        },
        MarkovThreshold::NotApplicable => {
            let gamma = rate_gamma(bath, sys.omega_sq_over_epsilon()).1;
            let tau_d = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
            MarkovCheck {
                tau_e,
                tau_d,
                valid: tau_e < tau_d,
            }
        }
    }
}
