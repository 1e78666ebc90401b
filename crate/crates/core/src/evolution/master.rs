//! Lindblad master equation on the full density operator.

use super::{ParsEvolution, QuantumState, StepReport, Trajectory, TrajectoryState, ONE, ZERO};
use crate::composite::Composite;
use crate::evolution::ode::OdeStepper;
use crate::qdata::{DensityOperator, StateVector};
use crate::qop::Direction;
use crate::{Error, Result, C64};

/// `dρ/dτ = −i(H_nh ρ − ρ H_nh†) + Σ_m J_m ρ J_m†` on a row-major matrix
/// whose ket legs come first. Assumes `ρ` Hermitian. `tensor` is the
/// system dims repeated twice; `tmp` is scratch of the same length.
fn derivative_raw(system: &Composite, tau: f64, tensor: &[usize], rho: &[C64], out: &mut [C64], tmp: &mut [C64]) {
    let n = system.total_dim();
    let r = system.rank();
    tmp.fill(ZERO);
    system.add_hamiltonian_raw(tau, tensor, 0, rho, tmp);
    // −iH_nh ρ plus its adjoint i ρ H_nh†
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = tmp[i * n + j] + tmp[j * n + i].conj();
        }
    }
    let mut map = Vec::new();
    for m in 0..system.channel_count() {
        let (ch, legs) = system.channel(m);
        tmp.fill(ZERO);
        ch.operator().apply_mapped_raw(tau, legs, tensor, rho, tmp, ONE);
        map.clear();
        map.extend(legs.iter().map(|l| l + r));
        ch.conjugate().apply_mapped_raw(tau, &map, tensor, tmp, out, ONE);
    }
}

/// Right-hand side of the master equation at dressing time `tau`.
pub fn master_derivative(system: &Composite, tau: f64, rho: &DensityOperator) -> Result<DensityOperator> {
    system.check_state(rho.dims())?;
    let tensor = rho.tensor_dims();
    let mut out = DensityOperator::zeros(rho.dims())?;
    let mut tmp = vec![ZERO; rho.elements().len()];
    derivative_raw(system, tau, &tensor, rho.elements(), out.elements_mut(), &mut tmp);
    Ok(out)
}

/// Deterministic evolution of the full density operator.
pub struct MasterTrajectory<'a> {
    system: &'a Composite,
    rho: DensityOperator,
    t: f64,
    dt_next: f64,
    stepper: OdeStepper,
    tensor: Vec<usize>,
    tmp: Vec<C64>,
}

impl<'a> MasterTrajectory<'a> {
    pub fn new(system: &'a Composite, rho0: DensityOperator, pars: &ParsEvolution) -> Result<Self> {
        system.check_state(rho0.dims())?;
        Self::restore(system, rho0.normalized()?, 0.0, pars.initial_dt(), pars)
    }

    /// Continues from a saved density operator, taken as is.
    pub fn restore(
        system: &'a Composite,
        rho: DensityOperator,
        t: f64,
        dt_next: f64,
        pars: &ParsEvolution,
    ) -> Result<Self> {
        if !system.is_unitary() {
            return Err(Error::NonUnitaryMaster);
        }
        system.check_state(rho.dims())?;
        if !(dt_next > 0.0 && dt_next.is_finite()) {
            return Err(Error::InvalidParameter(format!("stepsize must be positive, got {dt_next}")));
        }
        let len = rho.elements().len();
        Ok(MasterTrajectory {
            system,
            tensor: rho.tensor_dims(),
            rho,
            t,
            dt_next,
            stepper: OdeStepper::new(len, pars.eps, pars.eps_abs, pars.min_dt()),
            tmp: vec![ZERO; len],
        })
    }

    pub fn density_operator(&self) -> &DensityOperator {
        &self.rho
    }
}

impl Trajectory for MasterTrajectory<'_> {
    fn time(&self) -> f64 {
        self.t
    }

    fn dt_next(&self) -> f64 {
        self.dt_next
    }

    fn step(&mut self, target: f64) -> Result<StepReport> {
        let remaining = target - self.t;
        assert!(remaining > 0.0, "step target must lie ahead of the current time");
        let proposal = self.dt_next;
        let dt = proposal.min(remaining);
        let clamped = dt < proposal;
        let system = self.system;
        let tensor = &self.tensor;
        let tmp = &mut self.tmp;
        let mut f = |tau: f64, y: &[C64], dy: &mut [C64]| derivative_raw(system, tau, tensor, y, dy, tmp);
        let t_now = self.t;
        let step = self
            .stepper
            .step(&mut f, 0.0, self.rho.elements_mut(), dt)
            .map_err(|e| match e {
                Error::StepperStalled { dt, min, .. } => Error::StepperStalled { t: t_now, dt, min },
                e => e,
            })?;
        system.apply_propagators_density(step.dt_did, &mut self.rho, Direction::Forward)?;
        let full = step.dt_did == dt;
        self.t = if clamped && full { target } else { (self.t + step.dt_did).min(target) };
        self.dt_next = if clamped && full { step.dt_next.max(proposal) } else { step.dt_next };
        Ok(StepReport {
            dt_did: step.dt_did,
            jump_proximity: None,
            jump: None,
        })
    }

    fn display(&self) -> Result<Vec<Vec<f64>>> {
        self.system.display_density(&self.rho)
    }

    fn tracks_jumps(&self) -> bool {
        false
    }

    fn density(&self) -> Option<&DensityOperator> {
        Some(&self.rho)
    }

    fn pure(&self) -> Option<&StateVector> {
        None
    }

    fn snapshot(&self) -> TrajectoryState {
        TrajectoryState {
            t: self.t,
            state: QuantumState::Mixed(self.rho.clone()),
            rng: Vec::new(),
            dt_next: self.dt_next,
        }
    }
}
