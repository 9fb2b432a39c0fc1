//! Fixed-step integration of ρ̇ = −i[H(t), ρ] − L(ρ) on the 16-dimensional
//! Liouville space. Each step is a 16×16 map; trajectories started from
//! different states share the maps.

use log::{debug, warn};

use crate::bath::{markov_check, BathParams};
use crate::error::{Error, Result};
use crate::linalg::{c, frobenius4, mat_of, vec_of, Mat4, Super, Vec16};
use crate::qsystem::{ideal_step, SystemParams, CF4_A, CF4_B, CF4_NODES};

use super::integrator::{liouvillian_parts, loop_shifts, IntegratorConfig, Scheme};
use super::{DensityMatrix, POSITIVITY_WARN};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryStats {
    pub steps: usize,
    pub step: f64,
    pub min_eigenvalue: f64,
    /// Loop time at which `min_eigenvalue` was seen.
    pub min_eigenvalue_time: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    /// Largest relative change of the dissipator between rebuilds; zero at
    /// tensor cadence 1.
    pub max_tensor_drift: f64,
}

impl TrajectoryStats {
    fn new(steps: usize, step: f64) -> Self {
        TrajectoryStats {
            steps,
            step,
            min_eigenvalue: f64::INFINITY,
            ..Default::default()
        }
    }

    fn merge(&mut self, other: &TrajectoryStats) {
        if other.min_eigenvalue < self.min_eigenvalue {
            self.min_eigenvalue = other.min_eigenvalue;
            self.min_eigenvalue_time = other.min_eigenvalue_time;
        }
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.max_tensor_drift = self.max_tensor_drift.max(other.max_tensor_drift);
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: TrajectoryStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds at least the endpoints")
    }
}

#[derive(Debug, Clone)]
pub struct BatchEvolution {
    pub finals: Vec<DensityMatrix>,
    /// Bath-free propagator over the loop on the same time grid.
    pub ideal: Mat4,
    pub stats: Vec<TrajectoryStats>,
}

/// Produces the per-step Liouville maps.
struct Stepper<'a> {
    sys: &'a SystemParams,
    bath: &'a BathParams,
    cfg: &'a IntegratorConfig,
    h: f64,
    /// Dissipative parts at the quadrature nodes, with the step they were built at.
    frozen: Option<(usize, Vec<Super>)>,
    max_drift: f64,
    shifts: Option<[[f64; 4]; 4]>,
}

impl<'a> Stepper<'a> {
    fn nodes(&self) -> &'static [f64] {
        match self.cfg.scheme {
            Scheme::Magnus4 => &CF4_NODES,
            Scheme::Midpoint => &[0.5],
            Scheme::Rk4 => &[0.0, 0.5, 1.0],
        }
    }

    fn generators(&mut self, k: usize) -> Result<Vec<Super>> {
        let t = k as f64 * self.h;
        let nodes = self.nodes();
        let mut coherent = Vec::with_capacity(nodes.len());
        let mut dissipative = Vec::with_capacity(nodes.len());
        for &x in nodes {
            let p = liouvillian_parts(self.sys, self.bath, (t + x * self.h).min(self.sys.t_ad), self.shifts.as_ref())?;
            coherent.push(p.coherent);
            dissipative.push(p.dissipative);
        }
        let cadence = self.cfg.tensor_cadence;
        let reuse = matches!(&self.frozen, Some((k0, _)) if cadence > 1 && k - k0 < cadence);
        if reuse {
            dissipative.clone_from(&self.frozen.as_ref().expect("checked").1);
        } else {
            if let (Some((_, old)), true) = (&self.frozen, cadence > 1) {
                let scale = dissipative[0].norm().max(old[0].norm());
                if scale > 0.0 {
                    self.max_drift = self.max_drift.max((dissipative[0] - old[0]).norm() / scale);
                }
            }
            self.frozen = Some((k, dissipative.clone()));
        }
        Ok(coherent.iter().zip(&dissipative).map(|(a, b)| a + b).collect())
    }

    fn map(&mut self, k: usize) -> Result<Super> {
        let g = self.generators(k)?;
        let h = c(self.h, 0.0);
        Ok(match self.cfg.scheme {
            Scheme::Midpoint => (g[0] * h).exp(),
            Scheme::Magnus4 => {
                let first = ((g[0] * c(CF4_A, 0.0) + g[1] * c(CF4_B, 0.0)) * h).exp();
                let second = ((g[0] * c(CF4_B, 0.0) + g[1] * c(CF4_A, 0.0)) * h).exp();
                second * first
            }
            Scheme::Rk4 => {
                let id = Super::identity();
                let half = c(0.5 * self.h, 0.0);
                let k1 = g[0];
                let k2 = g[1] * (id + k1 * half);
                let k3 = g[1] * (id + k2 * half);
                let k4 = g[2] * (id + k3 * h);
                id + (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * c(self.h / 6.0, 0.0)
            }
        })
    }
}

fn observe(rho: &Mat4, t: f64, check_positivity: Option<f64>, stats: &mut TrajectoryStats) -> Result<()> {
    let state = DensityMatrix(*rho);
    stats.max_trace_error = stats.max_trace_error.max(state.trace_error());
    stats.max_hermiticity_error = stats.max_hermiticity_error.max(state.hermiticity_error() / frobenius4(rho).max(1.0));
    if let Some(abort) = check_positivity {
        let min = state.min_eigenvalue();
        if min < stats.min_eigenvalue {
            stats.min_eigenvalue = min;
            stats.min_eigenvalue_time = t;
        }
        if min < abort {
            return Err(Error::Positivity { t, min_eigenvalue: min });
        }
    }
    Ok(())
}

/// Core driver: advances every state over [0, t_ad], calling `record` after
/// each step whose index is a multiple of the record cadence.
fn drive(
    states: &mut [Vec16],
    sys: &SystemParams,
    bath: &BathParams,
    cfg: &IntegratorConfig,
    mut record: impl FnMut(f64, &[Vec16]),
) -> Result<(Vec<TrajectoryStats>, Mat4)> {
    sys.validate()?;
    bath.validate()?;
    let (steps, h) = cfg.resolve(sys, bath)?;
    let check = markov_check(sys, bath);
    if !check.valid && !bath.spectral.is_zero() {
        debug!(
            "Markov condition not met: tau_E = {:.3e}, tau_D = {:.3e} (hbar/meV)",
            check.tau_e, check.tau_d
        );
    }
    let mut stepper = Stepper {
        sys,
        bath,
        cfg,
        h,
        frozen: None,
        max_drift: 0.0,
        shifts: if cfg.lamb_shift { Some(loop_shifts(sys, bath)?) } else { None },
    };
    let mut stats = vec![TrajectoryStats::new(steps, h); states.len()];
    for (v, s) in states.iter().zip(stats.iter_mut()) {
        observe(&mat_of(v), 0.0, Some(cfg.positivity_abort), s)?;
    }
    record(0.0, states);
    let mut ideal = Mat4::identity();
    let ideal_scheme = cfg.scheme.propagator_scheme();
    for k in 0..steps {
        let m = stepper.map(k)?;
        ideal = ideal_step(sys, k as f64 * h, h, ideal_scheme)? * ideal;
        let t = if k + 1 == steps { sys.t_ad } else { (k + 1) as f64 * h };
        let check_pos = ((k + 1) % cfg.positivity_cadence == 0 || k + 1 == steps).then_some(cfg.positivity_abort);
        for (v, s) in states.iter_mut().zip(stats.iter_mut()) {
            *v = m * *v;
            observe(&mat_of(v), t, check_pos, s)?;
        }
        if k + 1 == steps || (cfg.record_cadence > 0 && (k + 1) % cfg.record_cadence == 0) {
            record(t, states);
        }
    }
    for s in stats.iter_mut() {
        s.max_tensor_drift = stepper.max_drift;
        if s.min_eigenvalue < POSITIVITY_WARN {
            warn!(
                "positivity loss: eigenvalue {:.3e} at t = {:.4} (hbar/meV)",
                s.min_eigenvalue, s.min_eigenvalue_time
            );
        }
    }
    Ok((stats, ideal))
}

pub fn evolve_markov(
    rho0: &DensityMatrix,
    sys: &SystemParams,
    bath: &BathParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    rho0.validate()?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut v = [vec_of(&rho0.0)];
    let (mut stats, _) = drive(&mut v, sys, bath, cfg, |t, s| {
        times.push(t);
        states.push(DensityMatrix(mat_of(&s[0])));
    })?;
    Ok(Trajectory {
        times,
        states,
        stats: stats.remove(0),
    })
}

/// Evolves several initial states on one shared set of step maps and returns
/// the final states together with the ideal propagator on the same grid.
pub fn evolve_markov_batch(
    rho0: &[DensityMatrix],
    sys: &SystemParams,
    bath: &BathParams,
    cfg: &IntegratorConfig,
) -> Result<BatchEvolution> {
    for r in rho0 {
        r.validate()?;
    }
    let mut v: Vec<Vec16> = rho0.iter().map(|r| vec_of(&r.0)).collect();
    let (stats, ideal) = drive(&mut v, sys, bath, cfg, |_, _| {})?;
    Ok(BatchEvolution {
        finals: v.iter().map(|x| DensityMatrix(mat_of(x))).collect(),
        ideal,
        stats,
    })
}

impl BatchEvolution {
    /// Worst-case statistics over the batch.
    pub fn summary(&self) -> TrajectoryStats {
        let mut out = self.stats.first().cloned().unwrap_or_default();
        for s in &self.stats[1.min(self.stats.len())..] {
            out.merge(s);
        }
        out
    }
}
