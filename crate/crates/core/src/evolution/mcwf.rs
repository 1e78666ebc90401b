//! Monte Carlo wave-function trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ParsEvolution, QuantumState, StepReport, Trajectory, TrajectoryState, ZERO};
use crate::composite::Composite;
use crate::evolution::ode::OdeStepper;
use crate::qdata::{DensityOperator, StateVector};
use crate::qop::Direction;
use crate::{Error, Result};

const RNG_BLOB_LEN: usize = 56;

/// Serializes seed, stream and word position of the generator.
pub(crate) fn rng_to_bytes(rng: &ChaCha8Rng) -> Vec<u8> {
    let mut out = Vec::with_capacity(RNG_BLOB_LEN);
    out.extend_from_slice(&rng.get_seed());
    out.extend_from_slice(&rng.get_stream().to_le_bytes());
    out.extend_from_slice(&rng.get_word_pos().to_le_bytes());
    out
}

pub(crate) fn rng_from_bytes(bytes: &[u8]) -> Result<ChaCha8Rng> {
    if bytes.len() != RNG_BLOB_LEN {
        return Err(Error::InvalidParameter(format!(
            "random-generator state must be {RNG_BLOB_LEN} bytes, got {}",
            bytes.len()
        )));
    }
    let seed: [u8; 32] = bytes[..32].try_into().expect("length checked");
    let stream = u64::from_le_bytes(bytes[32..40].try_into().expect("length checked"));
    let pos = u128::from_le_bytes(bytes[40..56].try_into().expect("length checked"));
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(pos);
    Ok(rng)
}

/// A single stochastic trajectory of the non-Hermitian Schrödinger equation
/// interrupted by quantum jumps.
pub struct McwfTrajectory<'a> {
    system: &'a Composite,
    psi: StateVector,
    backup: Vec<crate::C64>,
    t: f64,
    dt_next: f64,
    dp_limit: f64,
    min_dt: f64,
    stepper: OdeStepper,
    rng: ChaCha8Rng,
    rates: Vec<f64>,
}

impl<'a> McwfTrajectory<'a> {
    pub fn new(system: &'a Composite, psi0: StateVector, pars: &ParsEvolution, seed: u64) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi0 = psi0;
        system.check_state(psi0.dims())?;
        psi0.renormalize()?;
        Self::build(system, psi0, 0.0, rng, pars.initial_dt(), pars)
    }

    /// Continues from a saved state, taken as is; the generator resumes
    /// where it stopped.
    pub fn restore(
        system: &'a Composite,
        psi: StateVector,
        t: f64,
        rng: &[u8],
        dt_next: f64,
        pars: &ParsEvolution,
    ) -> Result<Self> {
        Self::build(system, psi, t, rng_from_bytes(rng)?, dt_next, pars)
    }

    fn build(
        system: &'a Composite,
        psi: StateVector,
        t: f64,
        rng: ChaCha8Rng,
        dt_next: f64,
        pars: &ParsEvolution,
    ) -> Result<Self> {
        system.check_state(psi.dims())?;
        if !(dt_next > 0.0 && dt_next.is_finite()) {
            return Err(Error::InvalidParameter(format!("stepsize must be positive, got {dt_next}")));
        }
        let n = psi.len();
        Ok(McwfTrajectory {
            system,
            psi,
            backup: vec![ZERO; n],
            t,
            dt_next,
            dp_limit: pars.dp_limit,
            min_dt: pars.min_dt(),
            stepper: OdeStepper::new(n, pars.eps, pars.eps_abs, pars.min_dt()),
            rng,
            rates: Vec::new(),
        })
    }

    pub fn state_vector(&self) -> &StateVector {
        &self.psi
    }

    /// One step with the jump decision driven by `draw` instead of the
    /// generator. `draw` is called once for the jump test and, on a jump,
    /// once more for the channel choice.
    pub fn step_with_random(&mut self, target: f64, draw: &mut dyn FnMut() -> f64) -> Result<StepReport> {
        let remaining = target - self.t;
        assert!(remaining > 0.0, "step target must lie ahead of the current time");
        let proposal = self.dt_next;
        let mut dt = proposal.min(remaining);
        let mut clamped = dt < proposal;

        let has_channels = self.system.channel_count() > 0;
        if has_channels {
            self.system.rates_into(&self.psi, &mut self.rates);
            let total: f64 = self.rates.iter().sum();
            if total * dt > self.dp_limit {
                dt = self.dp_limit / total;
                clamped = true;
            }
        }

        self.backup.copy_from_slice(self.psi.amplitudes());
        let system = self.system;
        let t_now = self.t;
        let (step, dp) = loop {
            let dims = self.psi.dims().to_vec();
            let mut f = |tau: f64, y: &[crate::C64], dy: &mut [crate::C64]| {
                dy.fill(ZERO);
                system.add_hamiltonian_raw(tau, &dims, 0, y, dy);
            };
            let step = self
                .stepper
                .step(&mut f, 0.0, self.psi.amplitudes_mut(), dt)
                .map_err(|e| match e {
                    Error::StepperStalled { dt, min, .. } => Error::StepperStalled { t: t_now, dt, min },
                    e => e,
                })?;
            system.apply_propagators(step.dt_did, &mut self.psi, Direction::Forward)?;
            let dp = if has_channels { 1.0 - self.psi.norm_sqr() } else { 0.0 };
            if dp > self.dp_limit {
                self.psi.amplitudes_mut().copy_from_slice(&self.backup);
                dt = step.dt_did * 0.9 * self.dp_limit / dp;
                clamped = false;
                if dt < self.min_dt {
                    return Err(Error::StepperStalled {
                        t: self.t,
                        dt,
                        min: self.min_dt,
                    });
                }
                continue;
            }
            break (step, dp);
        };

        let full = step.dt_did == dt;
        if clamped && full && dt == remaining {
            self.t = target;
        } else {
            self.t += step.dt_did;
            if self.t > target {
                self.t = target;
            }
        }
        self.dt_next = if clamped && full { step.dt_next.max(proposal) } else { step.dt_next };

        if !has_channels {
            return Ok(StepReport {
                dt_did: step.dt_did,
                jump_proximity: Some(1.0),
                jump: None,
            });
        }
        let r = draw();
        let mut jump = None;
        if r < dp {
            self.system.rates_into(&self.psi, &mut self.rates);
            let total: f64 = self.rates.iter().sum();
            let pick = draw() * total;
            let mut acc = 0.0;
            let mut chosen = self.rates.len() - 1;
            for (i, w) in self.rates.iter().enumerate() {
                acc += w;
                if pick < acc {
                    chosen = i;
                    break;
                }
            }
            if total > 0.0 {
                self.psi = self.system.apply_jump(chosen, &self.psi)?;
                jump = Some(chosen);
            }
        }
        self.psi.renormalize()?;
        Ok(StepReport {
            dt_did: step.dt_did,
            jump_proximity: Some(r - dp),
            jump,
        })
    }
}

impl Trajectory for McwfTrajectory<'_> {
    fn time(&self) -> f64 {
        self.t
    }

    fn dt_next(&self) -> f64 {
        self.dt_next
    }

    fn step(&mut self, target: f64) -> Result<StepReport> {
        let mut rng = self.rng.clone();
        let rep = self.step_with_random(target, &mut || rng.random::<f64>());
        self.rng = rng;
        rep
    }

    fn display(&self) -> Result<Vec<Vec<f64>>> {
        self.system.display_pure(&self.psi)
    }

    fn tracks_jumps(&self) -> bool {
        true
    }

    fn density(&self) -> Option<&DensityOperator> {
        None
    }

    fn pure(&self) -> Option<&StateVector> {
        Some(&self.psi)
    }

    fn snapshot(&self) -> TrajectoryState {
        TrajectoryState {
            t: self.t,
            state: QuantumState::Pure(self.psi.clone()),
            rng: rng_to_bytes(&self.rng),
            dt_next: self.dt_next,
        }
    }
}
