//! Driven four-level system: Rabi loops, the time-dependent Hamiltonian, its
//! dark/bright eigenstructure, the ideal propagator and the holonomy it
//! implements on the logical qubit.
//!
//! Basis order is (|G⟩, |+⟩, |0⟩, |−⟩). The Hamiltonian is written in the
//! frame where the diagonal is (0, ε, ε, ε) and the couplings are the bare
//! Rabi amplitudes Ω_j(t), so the bright energies are static:
//! ε_± = (ε ± √(ε² + 4Ω²)) / 2, and the two dark states sit at ε.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, eigh4, expm_hermitian, frobenius2, polar_unitary2, Mat2, Mat4, Vec4, C64, I};

pub const IDX_G: usize = 0;
pub const IDX_PLUS: usize = 1;
pub const IDX_ZERO: usize = 2;
pub const IDX_MINUS: usize = 3;

/// Describes the Hamiltonian frame in output metadata.
pub const FRAME_DESCRIPTION: &str =
    "H0 = diag(0, eps, eps, eps) + sum_j Omega_j(t)|j><G| + h.c. in basis (G,+,0,-); e^{-i eps t} absorbed";

/// Below this adiabatic parameter a warning is emitted.
pub const MIN_ADIABATIC_PARAMETER: f64 = 50.0;
/// Above this Ω/ε ratio a warning is emitted.
pub const MAX_OMEGA_OVER_EPSILON: f64 = 0.5;
/// Maximal leakage out of the logical span accepted by [`holonomy`].
pub const HOLONOMY_LEAKAGE_LIMIT: f64 = 0.1;

pub type Hamiltonian4 = Mat4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    /// e^{iπ/4 |+⟩⟨+|}
    Gate1,
    /// e^{iπ/2 σ_y} with σ_y = i(|+⟩⟨−| − |−⟩⟨+|)
    Gate2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Energy of the degenerate excited levels [meV].
    pub epsilon: f64,
    /// Norm of the Rabi vector [meV].
    pub omega: f64,
    /// Loop (gate) time [ħ/meV].
    pub t_ad: f64,
    pub gate: Gate,
}

impl SystemParams {
    pub fn new(epsilon: f64, omega: f64, t_ad: f64, gate: Gate) -> Result<Self> {
        let p = SystemParams {
            epsilon,
            omega,
            t_ad,
            gate,
        };
        p.validate()?;
        p.warn_regime();
        Ok(p)
    }

    /// Reference parameters: ε = 1 eV,
    /// Ω = 25 meV, t_ad = 7.5 ps.
    pub fn standard(gate: Gate) -> Self {
        SystemParams {
            epsilon: 1000.0,
            omega: 25.0,
            t_ad: crate::units::ps_to_internal(7.5),
            gate,
        }
    }

    /// Hard invariants only; regime advisories go through [`Self::regime_warnings`].
    pub fn validate(&self) -> Result<()> {
        let check = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        };
        check("epsilon", self.epsilon)?;
        check("omega", self.omega)?;
        check("t_ad", self.t_ad)?;
        if self.omega >= self.epsilon {
            return Err(Error::InvalidParameter {
                field: "omega",
                reason: format!("need omega < epsilon, got {} >= {}", self.omega, self.epsilon),
            });
        }
        Ok(())
    }

    pub fn regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.alpha() < MIN_ADIABATIC_PARAMETER {
            w.push(format!(
                "adiabatic parameter Omega*t_ad = {:.1} is below {MIN_ADIABATIC_PARAMETER}",
                self.alpha()
            ));
        }
        if self.omega / self.epsilon >= MAX_OMEGA_OVER_EPSILON {
            w.push(format!(
                "Omega/epsilon = {:.3} is outside the eps >> Omega regime",
                self.omega / self.epsilon
            ));
        }
        w
    }

    fn warn_regime(&self) {
        for w in self.regime_warnings() {
            log::warn!("{w}");
        }
    }

    /// Adiabatic parameter α = Ω·t_ad.
    pub fn alpha(&self) -> f64 {
        self.omega * self.t_ad
    }

    /// Bright energies (ε_+, ε_−).
    pub fn bright_energies(&self) -> (f64, f64) {
        let root = (self.epsilon * self.epsilon + 4.0 * self.omega * self.omega).sqrt();
        ((self.epsilon + root) / 2.0, (self.epsilon - root) / 2.0)
    }

    /// Gap between the upper bright state and the dark level, ε_+ − ε
    /// (≈ Ω²/ε for ε ≫ Ω).
    pub fn dark_bright_gap(&self) -> f64 {
        // (√(ε²+4Ω²) − ε)/2 written without cancellation
        2.0 * self.omega * self.omega
            / (self.epsilon + (self.epsilon * self.epsilon + 4.0 * self.omega * self.omega).sqrt())
    }

    /// The asymptotic transition frequency Ω²/ε.
    pub fn omega_sq_over_epsilon(&self) -> f64 {
        self.omega * self.omega / self.epsilon
    }

    fn check_time(&self, t: f64) -> Result<()> {
        // rounding slack for grids that land on t_ad
        let slack = 1e-12 * self.t_ad;
        if !(t >= -slack && t <= self.t_ad + slack) {
            return Err(Error::TimeOutOfRange { t, t_ad: self.t_ad });
        }
        Ok(())
    }
}

/// Complex Rabi amplitudes at one instant [meV].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiVector {
    pub omega_plus: C64,
    pub omega_minus: C64,
    pub omega_zero: C64,
}

impl RabiVector {
    pub fn norm_sqr(&self) -> f64 {
        self.omega_plus.norm_sqr() + self.omega_minus.norm_sqr() + self.omega_zero.norm_sqr()
    }

    /// Amplitude on basis index `j` (|+⟩, |0⟩ or |−⟩).
    fn amplitude(&self, j: usize) -> C64 {
        match j {
            IDX_PLUS => self.omega_plus,
            IDX_ZERO => self.omega_zero,
            IDX_MINUS => self.omega_minus,
            _ => C64::new(0.0, 0.0),
        }
    }
}

/// Polar angles of the normalised Rabi vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPoint {
    pub theta: f64,
    pub phi: f64,
}

/// C¹ ramp on [0, 1] with vanishing end slopes.
fn ramp(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Loop turning points (θ_max, φ_max). Both gates run the same three legs:
/// θ: 0→θ_max at φ = 0, φ: 0→φ_max at θ = θ_max, θ: θ_max→0 at φ = φ_max.
fn loop_extent(gate: Gate) -> (f64, f64) {
    match gate {
        // enclosed solid angle φ_max(1 − cos θ_max) = π/4
        Gate::Gate1 => (FRAC_PI_2, FRAC_PI_4),
        Gate::Gate2 => (FRAC_PI_2, FRAC_PI_2),
    }
}

pub fn loop_point(params: &SystemParams, t: f64) -> Result<LoopPoint> {
    params.check_time(t)?;
    let (theta_max, phi_max) = loop_extent(params.gate);
    let s = 3.0 * (t / params.t_ad).clamp(0.0, 1.0);
    let point = if s < 1.0 {
        LoopPoint {
            theta: theta_max * ramp(s),
            phi: 0.0,
        }
    } else if s < 2.0 {
        LoopPoint {
            theta: theta_max,
            phi: phi_max * ramp(s - 1.0),
        }
    } else {
        LoopPoint {
            theta: theta_max * (1.0 - ramp(s - 2.0)),
            phi: phi_max,
        }
    };
    Ok(point)
}

pub fn rabi_vector(params: &SystemParams, t: f64) -> Result<RabiVector> {
    let LoopPoint { theta, phi } = loop_point(params, t)?;
    let w = params.omega;
    let (st, ct) = theta.sin_cos();
    let v = match params.gate {
        Gate::Gate1 => RabiVector {
            omega_zero: c(w * ct, 0.0),
            omega_plus: w * st * (I * phi).exp(),
            omega_minus: c(0.0, 0.0),
        },
        Gate::Gate2 => {
            let (sp, cp) = phi.sin_cos();
            RabiVector {
                omega_zero: c(w * ct, 0.0),
                omega_plus: c(w * st * cp, 0.0),
                omega_minus: c(w * st * sp, 0.0),
            }
        }
    };
    Ok(v)
}

/// Hamiltonian for an explicit Rabi vector.
pub fn hamiltonian_from_rabi(epsilon: f64, rabi: &RabiVector) -> Hamiltonian4 {
    let mut h = Mat4::zeros();
    for j in [IDX_PLUS, IDX_ZERO, IDX_MINUS] {
        h[(j, j)] = c(epsilon, 0.0);
        let a = rabi.amplitude(j);
        h[(j, IDX_G)] = a;
        h[(IDX_G, j)] = a.conj();
    }
    h
}

pub fn hamiltonian(params: &SystemParams, t: f64) -> Result<Hamiltonian4> {
    let rabi = rabi_vector(params, t)?;
    Ok(hamiltonian_from_rabi(params.epsilon, &rabi))
}

/// Eigenbasis of H(t) without any gauge fixing, energies ascending
/// (ε_−, ε, ε, ε_+). Enough for anything gauge-invariant.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    pub energies: [f64; 4],
    pub vectors: Mat4,
}

pub fn eigen_frame(h: &Hamiltonian4) -> EigenFrame {
    let (vals, vecs) = eigh4(h);
    EigenFrame {
        energies: [vals[0], vals[1], vals[2], vals[3]],
        vectors: vecs,
    }
}

/// Instantaneous dark/bright basis with a smooth gauge along the loop.
#[derive(Debug, Clone)]
pub struct DarkBrightBasis {
    pub bright_plus: Vec4,
    pub bright_minus: Vec4,
    pub dark: [Vec4; 2],
    /// (ε_+, ε_−, ε, ε) as obtained from the eigensolver.
    pub energies: [f64; 4],
}

impl DarkBrightBasis {
    /// Columns |B_+⟩, |B_−⟩, |D_1⟩, |D_2⟩.
    pub fn matrix(&self) -> Mat4 {
        Mat4::from_columns(&[self.bright_plus, self.bright_minus, self.dark[0], self.dark[1]])
    }
}

/// Number of alignment steps per loop used to carry the dark gauge.
const GAUGE_STEPS_PER_LOOP: usize = 512;

fn split_frame(frame: &EigenFrame) -> (Vec4, Vec4, [Vec4; 2]) {
    let v = &frame.vectors;
    let fix_phase = |col: Vec4| -> Vec4 {
        let g = col[IDX_G];
        if g.norm() > 0.0 {
            col * (g.conj() / g.norm())
        } else {
            col
        }
    };
    (
        fix_phase(v.column(3).into_owned()),
        fix_phase(v.column(0).into_owned()),
        [v.column(1).into_owned(), v.column(2).into_owned()],
    )
}

/// Rotates `raw` within its span to maximise overlap with `prev`
/// (successive-overlap alignment).
pub fn align_dark(prev: &[Vec4; 2], raw: &[Vec4; 2]) -> [Vec4; 2] {
    let overlap = Mat2::from_fn(|i, j| raw[i].dotc(&prev[j]));
    let w = polar_unitary2(&overlap);
    [
        raw[0] * w[(0, 0)] + raw[1] * w[(1, 0)],
        raw[0] * w[(0, 1)] + raw[1] * w[(1, 1)],
    ]
}

fn logical_pair() -> [Vec4; 2] {
    let mut plus = Vec4::zeros();
    plus[IDX_PLUS] = c(1.0, 0.0);
    let mut minus = Vec4::zeros();
    minus[IDX_MINUS] = c(1.0, 0.0);
    [plus, minus]
}

/// Carries the dark gauge from t = 0 (aligned with |+⟩, |−⟩) to `t`.
fn tracked_dark(params: &SystemParams, t: f64) -> Result<[Vec4; 2]> {
    let steps = ((GAUGE_STEPS_PER_LOOP as f64 * t / params.t_ad).ceil() as usize).max(1);
    let mut dark = logical_pair();
    let h0 = hamiltonian(params, 0.0)?;
    let (_, _, raw0) = split_frame(&eigen_frame(&h0));
    dark = align_dark(&dark, &raw0);
    for k in 1..=steps {
        let tk = t * k as f64 / steps as f64;
        let (_, _, raw) = split_frame(&eigen_frame(&hamiltonian(params, tk)?));
        dark = align_dark(&dark, &raw);
    }
    Ok(dark)
}

pub fn dark_bright_basis(params: &SystemParams, t: f64) -> Result<DarkBrightBasis> {
    if params.omega == 0.0 {
        return Err(Error::Degenerate(
            "Omega = 0: bright and dark levels coincide, gate undefined".into(),
        ));
    }
    params.validate()?;
    let frame = eigen_frame(&hamiltonian(params, t)?);
    let (bright_plus, bright_minus, _) = split_frame(&frame);
    let dark = tracked_dark(params, t)?;
    Ok(DarkBrightBasis {
        bright_plus,
        bright_minus,
        dark,
        energies: [frame.energies[3], frame.energies[0], frame.energies[1], frame.energies[2]],
    })
}

/// Step rule for the ideal propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorScheme {
    /// exp(−i h H(t + h/2)), second order.
    Midpoint,
    /// Fourth-order commutator-free Magnus with two Gauss points.
    #[default]
    Magnus4,
}

/// Gauss nodes and weights of the two-exponential commutator-free Magnus step.
pub(crate) const CF4_NODES: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];
/// Weight on the earlier node in the first applied exponential; the second
/// exponential swaps the weights.
pub(crate) const CF4_A: f64 = 0.25 + 0.288_675_134_594_812_9;
pub(crate) const CF4_B: f64 = 0.25 - 0.288_675_134_594_812_9;

#[derive(Debug, Clone)]
pub struct Propagator {
    pub matrix: Mat4,
    pub t1: f64,
    pub t2: f64,
}

impl Propagator {
    pub fn unitarity_error(&self) -> f64 {
        crate::linalg::frobenius4(&(self.matrix.adjoint() * self.matrix - Mat4::identity()))
    }
}

/// Steps giving 64 steps per Rabi period 2π/Ω.
pub fn default_propagator_steps(params: &SystemParams, duration: f64) -> usize {
    ((64.0 * params.omega * duration / (2.0 * PI)).ceil() as usize).max(1)
}

/// One ideal step from `t` to `t + h`.
pub(crate) fn ideal_step(params: &SystemParams, t: f64, h: f64, scheme: PropagatorScheme) -> Result<Mat4> {
    match scheme {
        PropagatorScheme::Midpoint => Ok(expm_hermitian(&hamiltonian(params, t + 0.5 * h)?, h)),
        PropagatorScheme::Magnus4 => {
            let h1 = hamiltonian(params, t + CF4_NODES[0] * h)?;
            let h2 = hamiltonian(params, t + CF4_NODES[1] * h)?;
            let first = expm_hermitian(&(h1 * c(CF4_A, 0.0) + h2 * c(CF4_B, 0.0)), h);
            let second = expm_hermitian(&(h1 * c(CF4_B, 0.0) + h2 * c(CF4_A, 0.0)), h);
            Ok(second * first)
        }
    }
}

pub fn ideal_propagator(params: &SystemParams, t1: f64, t2: f64, steps: usize) -> Result<Propagator> {
    ideal_propagator_with(params, t1, t2, steps, PropagatorScheme::default())
}

pub fn ideal_propagator_with(
    params: &SystemParams,
    t1: f64,
    t2: f64,
    steps: usize,
    scheme: PropagatorScheme,
) -> Result<Propagator> {
    params.validate()?;
    params.check_time(t1)?;
    params.check_time(t2)?;
    if t2 < t1 {
        return Err(Error::InvalidParameter {
            field: "t2",
            reason: format!("t2 = {t2} precedes t1 = {t1}"),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter {
            field: "steps",
            reason: "need at least one step".into(),
        });
    }
    let mut u = Mat4::identity();
    if t2 > t1 {
        let h = (t2 - t1) / steps as f64;
        for k in 0..steps {
            let t = t1 + k as f64 * h;
            u = ideal_step(params, t, h, scheme)? * u;
        }
    }
    Ok(Propagator { matrix: u, t1, t2 })
}

/// Logical-subspace action of a closed loop.
#[derive(Debug, Clone)]
pub struct Holonomy {
    /// Projected propagator on (|+⟩, |−⟩) with the dynamical phase removed.
    pub matrix: Mat2,
    /// Largest probability lost from the logical span, 1 − σ_min².
    pub leakage: f64,
}

fn logical_block(u: &Mat4) -> Mat2 {
    let idx = [IDX_PLUS, IDX_MINUS];
    Mat2::from_fn(|i, j| u[(idx[i], idx[j])])
}

pub fn holonomy(params: &SystemParams) -> Result<Holonomy> {
    holonomy_with_steps(params, default_propagator_steps(params, params.t_ad))
}

pub fn holonomy_with_steps(params: &SystemParams, steps: usize) -> Result<Holonomy> {
    let u = ideal_propagator(params, 0.0, params.t_ad, steps)?;
    let block = logical_block(&u.matrix) * (I * params.epsilon * params.t_ad).exp();
    let sv = block.singular_values();
    let smin = sv[0].min(sv[1]);
    let leakage = (1.0 - smin * smin).max(0.0);
    if leakage > HOLONOMY_LEAKAGE_LIMIT {
        return Err(Error::Adiabaticity {
            leakage,
            threshold: HOLONOMY_LEAKAGE_LIMIT,
        });
    }
    Ok(Holonomy {
        matrix: block,
        leakage,
    })
}

/// Purely geometric holonomy: the dark frame carried around the loop by
/// successive-overlap alignment, expressed in the logical basis. This is the
/// α → ∞ limit of [`holonomy`].
pub fn wilson_loop(params: &SystemParams) -> Result<Mat2> {
    let end = tracked_dark(params, params.t_ad)?;
    let start = logical_pair();
    Ok(Mat2::from_fn(|i, j| start[i].dotc(&end[j])))
}

/// Ideal gate in the logical basis (|+⟩, |−⟩).
pub fn target_gate(gate: Gate) -> Mat2 {
    match gate {
        Gate::Gate1 => Mat2::new((I * FRAC_PI_4).exp(), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        // exp(iπ/2 σ_y) = iσ_y
        Gate::Gate2 => Mat2::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
    }
}

/// Frobenius distance minimised over a global phase.
pub fn gate_distance(u: &Mat2, target: &Mat2) -> f64 {
    let overlap = (target.adjoint() * u).trace();
    let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { c(1.0, 0.0) };
    frobenius2(&(u * phase - target))
}
