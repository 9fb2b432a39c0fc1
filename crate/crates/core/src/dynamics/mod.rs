//! Reduced dynamics of the four-level system under the bath: the Redfield
//! rate tensor, the Markovian master equation, and a memory-kernel solver
//! used to validate the Markov approximation.

mod integrator;
mod markov;
mod nonmarkov;
mod redfield;

pub use integrator::{liouvillian, IntegratorConfig, Scheme};
pub use markov::{evolve_markov, evolve_markov_batch, BatchEvolution, Trajectory, TrajectoryStats};
pub use nonmarkov::{evolve_nonmarkov, MemoryMode, NonMarkovConfig};
pub use redfield::{
    build_redfield_tensor, build_redfield_tensor_in, coupling_in_darkbright, dissipator, dissipator_generator,
    dissipator_generator_shifted, max_rate, shift_matrix, RedfieldTensor,
};

use crate::error::{Error, Result};
use crate::linalg::{c, eigh4, frobenius4, hermiticity_error, outer, Mat4, Vec4};

/// Trace tolerance for a valid state.
pub const TRACE_TOLERANCE: f64 = 1e-9;
/// Hermiticity tolerance for a valid state.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below this are reported as positivity loss.
pub const POSITIVITY_WARN: f64 = -1e-7;
/// States with an eigenvalue below this are rejected as inputs.
pub const POSITIVITY_ABORT: f64 = -1e-4;
/// Default abort threshold while integrating. The Redfield generator is not
/// completely positive and pure initial states dip to about −4e−3 at the
/// strongest couplings of the figure presets, so the in-flight limit is looser
/// than the input check.
pub const INTEGRATOR_POSITIVITY_ABORT: f64 = -5e-2;

/// System-bath coupling A = diag(0, 1, 0, −1) in the (|G⟩, |+⟩, |0⟩, |−⟩) basis.
pub fn coupling_operator() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)))
}

/// Density matrix of the four-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub Mat4);

impl DensityMatrix {
    /// Checks hermiticity, unit trace and the positivity abort threshold.
    pub fn new(m: Mat4) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.validate()?;
        Ok(rho)
    }

    pub fn from_pure(psi: &Vec4) -> Self {
        DensityMatrix(outer(&psi.unscale(psi.norm())))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity() * c(0.25, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOLERANCE * frobenius4(&self.0).max(1.0) {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("not Hermitian (error {herm:.3e})"),
            });
        }
        let tr = self.trace_error();
        if tr > TRACE_TOLERANCE {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("trace differs from 1 by {tr:.3e}"),
            });
        }
        let min = self.min_eigenvalue();
        if min < POSITIVITY_ABORT {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("eigenvalue {min:.3e} below {POSITIVITY_ABORT:e}"),
            });
        }
        Ok(())
    }

    pub fn trace_error(&self) -> f64 {
        (self.0.trace() - c(1.0, 0.0)).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh4(&self.0).0[0]
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn expectation(&self, psi: &Vec4) -> f64 {
        psi.dotc(&(self.0 * psi)).re
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius4;

    #[test]
    fn coupling_is_traceless_with_norm_sqrt2() {
        let a = coupling_operator();
        assert_eq!(a.trace(), c(0.0, 0.0));
        assert!((frobenius4(&a) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(DensityMatrix::new(Mat4::identity()).is_err());
        let mut m = Mat4::zeros();
        m[(0, 1)] = c(0.5, 0.0);
        m[(0, 0)] = c(1.0, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed().0).is_ok());
    }

    #[test]
    fn pure_state_has_unit_purity() {
        let psi = Vec4::new(c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.8));
        let rho = DensityMatrix::from_pure(&psi);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert!((rho.expectation(&psi) - 1.0).abs() < 1e-14);
    }
}
