//! Redfield rate tensor in the instantaneous eigenbasis and the dissipator
//! L(ρ) of the Markovian master equation ρ̇ = −i[H, ρ] − L(ρ).
//!
//! With A the coupling in the eigenbasis (energies E_n, ω_nk = E_n − E_k):
//!
//! Γ^+_{lmnk} = ½ Γ^+(ω_nk) A_lm A_nk,   Γ^−_{lmnk} = ½ Γ^−(ω_lm) A_lm A_nk
//!
//! L(ρ)_nm = Σ_kl [δ_lm Σ_r Γ^+_{nrrk} + δ_nk Σ_r Γ^−_{lrrm} − Γ^+_{lmnk} − Γ^−_{lmnk}] ρ_kl
//!
//! The Lamb shift is not included and no secular approximation is made.

use crate::bath::{rate_gamma, rate_shift, BathParams};
use crate::error::Result;
use crate::quadrature::QuadratureConfig;
use crate::linalg::{c, Mat4, C64};
use crate::qsystem::{eigen_frame, hamiltonian, DarkBrightBasis, EigenFrame, SystemParams};

use super::coupling_operator;

type Tensor4 = [[[[C64; 4]; 4]; 4]; 4];

/// A^{db} = V†AV for the basis matrix V.
pub fn coupling_in_darkbright(basis: &DarkBrightBasis) -> Mat4 {
    let v = basis.matrix();
    v.adjoint() * coupling_operator() * v
}

#[derive(Debug, Clone)]
pub struct RedfieldTensor {
    /// Γ^+_{lmnk}, indexed `[l][m][n][k]`.
    pub plus: Tensor4,
    /// Γ^−_{lmnk}, indexed `[l][m][n][k]`.
    pub minus: Tensor4,
    /// Basis the tensor is expressed in (columns) and its energies.
    pub frame: EigenFrame,
    /// A in that basis.
    pub coupling: Mat4,
    /// Whether T exceeds the Markov threshold at build time.
    pub markov_valid: bool,
}

impl RedfieldTensor {
    /// Largest |Γ^±_{lmnk}|.
    pub fn scale(&self) -> f64 {
        let mut m: f64 = 0.0;
        for l in 0..4 {
            for mm in 0..4 {
                for n in 0..4 {
                    for k in 0..4 {
                        m = m.max(self.plus[l][mm][n][k].norm()).max(self.minus[l][mm][n][k].norm());
                    }
                }
            }
        }
        m
    }
}

/// Half-rate matrix w_ab = ½ Γ^+(E_a − E_b).
fn half_rates(bath: &BathParams, energies: &[f64; 4]) -> [[f64; 4]; 4] {
    let mut w = [[0.0; 4]; 4];
    for (a, row) in w.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x = 0.5 * rate_gamma(bath, energies[a] - energies[b]).0;
        }
    }
    w
}

/// Tensor in an arbitrary eigenbasis of H.
pub fn build_redfield_tensor_in(bath: &BathParams, frame: &EigenFrame, markov_valid: bool) -> RedfieldTensor {
    let v = &frame.vectors;
    let a = v.adjoint() * coupling_operator() * v;
    let w = half_rates(bath, &frame.energies);
    let zero = c(0.0, 0.0);
    let mut plus = [[[[zero; 4]; 4]; 4]; 4];
    let mut minus = [[[[zero; 4]; 4]; 4]; 4];
    for l in 0..4 {
        for m in 0..4 {
            for n in 0..4 {
                for k in 0..4 {
                    let kk = a[(l, m)] * a[(n, k)];
                    plus[l][m][n][k] = kk * w[n][k];
                    // ½Γ^−(ω_lm) = ½Γ^+(ω_ml)
                    minus[l][m][n][k] = kk * w[m][l];
                }
            }
        }
    }
    RedfieldTensor {
        plus,
        minus,
        frame: frame.clone(),
        coupling: a,
        markov_valid,
    }
}

pub fn build_redfield_tensor(bath: &BathParams, sys: &SystemParams, t: f64) -> Result<RedfieldTensor> {
    bath.validate()?;
    let frame = eigen_frame(&hamiltonian(sys, t)?);
    let valid = crate::bath::markov_check(sys, bath).valid;
    Ok(build_redfield_tensor_in(bath, &frame, valid))
}

/// L(ρ) by the explicit tensor sum in the tensor's basis, rotated back.
pub fn dissipator(rho: &Mat4, tensor: &RedfieldTensor) -> Mat4 {
    let v = &tensor.frame.vectors;
    let r = v.adjoint() * rho * v;
    let (gp, gm) = (&tensor.plus, &tensor.minus);
    // contracted rates Σ_r Γ^+_{nrrk} and Σ_r Γ^−_{lrrm}
    let mut sum_plus = Mat4::zeros();
    let mut sum_minus = Mat4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            for x in 0..4 {
                sum_plus[(a, b)] += gp[a][x][x][b];
                sum_minus[(a, b)] += gm[a][x][x][b];
            }
        }
    }
    let mut out = Mat4::zeros();
    for n in 0..4 {
        for m in 0..4 {
            let mut acc = c(0.0, 0.0);
            for k in 0..4 {
                acc += sum_plus[(n, k)] * r[(k, m)];
            }
            for l in 0..4 {
                acc += sum_minus[(l, m)] * r[(n, l)];
            }
            for k in 0..4 {
                for l in 0..4 {
                    acc -= (gp[l][m][n][k] + gm[l][m][n][k]) * r[(k, l)];
                }
            }
            out[(n, m)] = acc;
        }
    }
    v * out * v.adjoint()
}

/// The operator Λ = Σ_nk ½Γ^+(ω_nk) A_nk |n⟩⟨k| in the lab basis, so that
/// L(ρ) = [A, Λρ − ρΛ†]. Equivalent to the tensor sum and much cheaper.
pub fn dissipator_generator(bath: &BathParams, frame: &EigenFrame) -> Mat4 {
    let v = &frame.vectors;
    let a = v.adjoint() * coupling_operator() * v;
    let w = half_rates(bath, &frame.energies);
    let lam = Mat4::from_fn(|n, k| a[(n, k)] * w[n][k]);
    v * lam * v.adjoint()
}

/// s_ab = S(E_a − E_b), the imaginary parts of the one-sided bath transform
/// that [`dissipator_generator`] drops.
pub fn shift_matrix(bath: &BathParams, energies: &[f64; 4], quadrature: &QuadratureConfig) -> Result<[[f64; 4]; 4]> {
    let mut s = [[0.0; 4]; 4];
    for (a, row) in s.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x = rate_shift(bath, energies[a] - energies[b], quadrature)?;
        }
    }
    Ok(s)
}

/// Λ including the Lamb shift: entries A_nk (½Γ^+(ω_nk) + i s_nk).
pub fn dissipator_generator_shifted(bath: &BathParams, frame: &EigenFrame, shifts: &[[f64; 4]; 4]) -> Mat4 {
    let v = &frame.vectors;
    let a = v.adjoint() * coupling_operator() * v;
    let w = half_rates(bath, &frame.energies);
    let lam = Mat4::from_fn(|n, k| a[(n, k)] * c(w[n][k], shifts[n][k]));
    v * lam * v.adjoint()
}

/// Largest Γ^± over the transition frequencies of H(t).
pub fn max_rate(bath: &BathParams, frame: &EigenFrame) -> f64 {
    let mut m: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let (up, down) = rate_gamma(bath, frame.energies[a] - frame.energies[b]);
            m = m.max(up).max(down);
        }
    }
    m
}
