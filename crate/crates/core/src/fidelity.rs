//! Gate fidelity F = √⟨ψ_id|ρ|ψ_id⟩, its average over sampled initial
//! states, and the fit F = 1 − t_ad Σ_± η_± Γ^±(Ω²/ε).

use std::f64::consts::PI;

use log::warn;
use serde::Serialize;

use crate::bath::{rate_gamma, BathParams};
use crate::dynamics::{evolve_markov_batch, DensityMatrix, IntegratorConfig, TrajectoryStats};
use crate::error::{Error, Result};
use crate::linalg::{c, Vec4, C64};
use crate::qsystem::{SystemParams, IDX_MINUS, IDX_PLUS, IDX_ZERO};

/// Expectations at or above this are clamped to zero silently.
pub const CLAMP_SILENT: f64 = -1e-9;
/// Expectations between this and [`CLAMP_SILENT`] are clamped with a warning;
/// below it they are an error.
pub const CLAMP_LIMIT: f64 = -1e-4;
pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_ETA_SQ: f64 = 0.1;
/// Fits with a residual norm above this are flagged.
pub const FIT_RESIDUAL_FLAG: f64 = 1e-2;

/// α|+⟩ + β|−⟩ + η|0⟩
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub alpha: C64,
    pub beta: C64,
    pub eta: C64,
}

impl InitialState {
    pub fn vector(&self) -> Vec4 {
        let mut v = Vec4::zeros();
        v[IDX_PLUS] = self.alpha;
        v[IDX_MINUS] = self.beta;
        v[IDX_ZERO] = self.eta;
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr() + self.eta.norm_sqr()
    }
}

pub fn fidelity(rho_final: &DensityMatrix, psi_ideal: &Vec4) -> Result<f64> {
    let norm = psi_ideal.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            field: "psi_ideal",
            reason: format!("state not normalized (norm {norm})"),
        });
    }
    let p = rho_final.expectation(psi_ideal);
    if p >= CLAMP_SILENT {
        return Ok(p.max(0.0).sqrt());
    }
    if p >= CLAMP_LIMIT {
        warn!("negative overlap {p:.3e} clamped to zero");
        return Ok(0.0);
    }
    Err(Error::NegativeFidelity(p))
}

/// Fibonacci lattice on the logical Bloch sphere, scaled to leave |η|² on |0⟩.
pub fn sample_initial_states(n: usize, eta_sq: f64) -> Result<Vec<InitialState>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: "need at least one sample".into(),
        });
    }
    if !(0.0..1.0).contains(&eta_sq) {
        return Err(Error::InvalidParameter {
            field: "eta_sq",
            reason: format!("must lie in [0, 1), got {eta_sq}"),
        });
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let scale = (1.0 - eta_sq).sqrt();
    Ok((0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let phi = golden * i as f64;
            let a = ((1.0 + z) / 2.0).sqrt();
            let b = ((1.0 - z) / 2.0).sqrt();
            InitialState {
                alpha: c(scale * a, 0.0),
                beta: C64::from_polar(scale * b, phi),
                eta: c(eta_sq.sqrt(), 0.0),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityResult {
    pub mean: f64,
    pub samples: Vec<f64>,
    pub n_samples: usize,
    pub min: f64,
    pub max: f64,
    pub system: SystemParams,
    pub bath: BathParams,
    #[serde(skip)]
    pub stats: TrajectoryStats,
}

pub fn averaged_fidelity(
    sys: &SystemParams,
    bath: &BathParams,
    samples: &[InitialState],
    cfg: &IntegratorConfig,
) -> Result<FidelityResult> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter {
            field: "samples",
            reason: "empty sample list".into(),
        });
    }
    let psi0: Vec<Vec4> = samples.iter().map(|s| s.vector().unscale(s.norm_sqr().sqrt())).collect();
    let rho0: Vec<DensityMatrix> = psi0.iter().map(DensityMatrix::from_pure).collect();
    let batch = evolve_markov_batch(&rho0, sys, bath, cfg)?;
    let values = batch
        .finals
        .iter()
        .zip(&psi0)
        .map(|(rho, psi)| {
            let ideal = batch.ideal * psi;
            fidelity(rho, &ideal.unscale(ideal.norm()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(FidelityResult {
        mean,
        n_samples: values.len(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        samples: values,
        system: *sys,
        bath: *bath,
        stats: batch.summary(),
    })
}

/// One observation for the decay fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub t_ad: f64,
    pub fidelity: f64,
}

impl DecayPoint {
    /// Rates Γ^±(Ω²/ε) for the given system and bath.
    pub fn new(sys: &SystemParams, bath: &BathParams, fidelity: f64) -> Self {
        let (gamma_plus, gamma_minus) = rate_gamma(bath, sys.omega_sq_over_epsilon());
        DecayPoint {
            gamma_plus,
            gamma_minus,
            t_ad: sys.t_ad,
            fidelity,
        }
    }
}

/// Which bath parameter the abscissa of [`fit_decay`] sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitAxis {
    Temperature,
    K1,
    K3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub eta_plus: f64,
    pub eta_minus: f64,
    /// ‖F_fit − F‖₂
    pub residual: f64,
    pub max_abs_residual: f64,
    /// Covariance of (η_+, η_−) from the unconstrained normal equations.
    pub covariance: [[f64; 2]; 2],
    /// Residual norm above [`FIT_RESIDUAL_FLAG`].
    pub poor_fit: bool,
    pub n_points: usize,
}

/// Least-squares fit of (η_+, η_−) ≥ 0 to 1 − F = t_ad (η_+ Γ^+ + η_− Γ^−).
pub fn fit_decay_points(points: &[DecayPoint]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    let rows: Vec<([f64; 2], f64)> = points
        .iter()
        .map(|p| ([p.t_ad * p.gamma_plus, p.t_ad * p.gamma_minus], 1.0 - p.fidelity))
        .collect();
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in &rows {
        s11 += x[0] * x[0];
        s12 += x[0] * x[1];
        s22 += x[1] * x[1];
        b1 += x[0] * y;
        b2 += x[1] * y;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det > 1e-12 * s11 * s22) {
        return Err(Error::Fit("design matrix is singular: the rates do not vary independently".into()));
    }
    let rss = |e: [f64; 2]| -> f64 {
        rows.iter()
            .map(|(x, y)| {
                let r = y - x[0] * e[0] - x[1] * e[1];
                r * r
            })
            .sum()
    };
    let free = [(s22 * b1 - s12 * b2) / det, (s11 * b2 - s12 * b1) / det];
    let eta = if free[0] >= 0.0 && free[1] >= 0.0 {
        free
    } else {
        // active-set candidates on the boundary of the nonnegative quadrant
        let candidates = [[0.0, 0.0], [(b1 / s11).max(0.0), 0.0], [0.0, (b2 / s22).max(0.0)]];
        candidates
            .into_iter()
            .min_by(|a, b| rss(*a).total_cmp(&rss(*b)))
            .expect("non-empty")
    };
    let n = rows.len();
    let sigma2 = if n > 2 { rss(free) / (n - 2) as f64 } else { 0.0 };
    let covariance = [
        [sigma2 * s22 / det, -sigma2 * s12 / det],
        [-sigma2 * s12 / det, sigma2 * s11 / det],
    ];
    let max_abs_residual = rows
        .iter()
        .map(|(x, y)| (y - x[0] * eta[0] - x[1] * eta[1]).abs())
        .fold(0.0, f64::max);
    let residual = rss(eta).sqrt();
    Ok(FitResult {
        eta_plus: eta[0],
        eta_minus: eta[1],
        residual,
        max_abs_residual,
        covariance,
        poor_fit: residual > FIT_RESIDUAL_FLAG,
        n_points: n,
    })
}

/// Fit over `(x, F)` pairs where `x` sets the bath parameter named by `axis`.
pub fn fit_decay(points: &[(f64, f64)], sys: &SystemParams, bath: &BathParams, axis: FitAxis) -> Result<FitResult> {
    let data = points
        .iter()
        .map(|&(x, f)| {
            let mut b = *bath;
            match axis {
                FitAxis::Temperature => b.temperature = x,
                FitAxis::K1 => b.spectral.k1 = x,
                FitAxis::K3 => b.spectral.k3 = x,
            }
            b.validate()?;
            Ok(DecayPoint::new(sys, &b, f))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_decay_points(&data)
}
