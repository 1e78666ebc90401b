//! Ensembles of independent trajectories averaged into a density operator.
//!
//! Member `k` uses seed `seed + k`. Members are advanced concurrently, but
//! the average is always accumulated in member order, so the output does
//! not depend on scheduling.

use rayon::prelude::*;

use super::{McwfTrajectory, ParsEvolution, Trajectory};
use crate::composite::Composite;
use crate::qdata::{DensityOperator, PartySelector, StateVector};
use crate::trajio::{DisplayRow, RowSink};
use crate::{Error, Result};

/// Normalized member states at every display time.
#[derive(Clone, Debug)]
pub struct EnsembleTraces {
    pub times: Vec<f64>,
    /// `states[k][m]` is member `m` at `times[k]`.
    pub states: Vec<Vec<StateVector>>,
}

fn members<'a>(system: &'a Composite, psi0: &StateVector, pars: &ParsEvolution) -> Result<Vec<McwfTrajectory<'a>>> {
    if pars.dt_display <= 0.0 {
        return Err(Error::InvalidParameter("ensembles need Dt > 0".into()));
    }
    (0..pars.n_traj)
        .map(|k| McwfTrajectory::new(system, psi0.clone(), pars, pars.seed.wrapping_add(k as u64)))
        .collect()
}

fn advance(members: &mut [McwfTrajectory<'_>], target: f64, parallel: bool) -> Result<()> {
    let one = |m: &mut McwfTrajectory<'_>| -> Result<()> {
        while m.time() < target {
            m.step(target)?;
        }
        Ok(())
    };
    if parallel {
        members.par_iter_mut().try_for_each(one)
    } else {
        members.iter_mut().try_for_each(one)
    }
}

/// Display times `0, Dt, 2Dt, …` capped at `T`.
fn display_times(t_final: f64, dt_display: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let mut k = 1u64;
    while *times.last().expect("non-empty") < t_final {
        times.push((k as f64 * dt_display).min(t_final));
        k += 1;
    }
    times
}

fn average(members: &[McwfTrajectory<'_>]) -> Result<DensityOperator> {
    let dims = members[0].state_vector().dims();
    let mut rho = DensityOperator::zeros(dims)?;
    let w = 1.0 / members.len() as f64;
    for m in members {
        let psi = m.state_vector().clone().renormalized()?;
        rho.add_scaled(&psi.dyad(), w)?;
    }
    Ok(rho)
}

/// Runs the ensemble and writes one row per display time from the
/// averaged density operator.
pub fn ensemble_run(
    system: &Composite,
    psi0: &StateVector,
    pars: &ParsEvolution,
    sink: &mut dyn RowSink,
    negativity: Option<&PartySelector>,
    parallel: bool,
) -> Result<DensityOperator> {
    pars.validate()?;
    let mut members = members(system, psi0, pars)?;
    let mut rho = average(&members)?;
    for (k, &t) in display_times(pars.t_final, pars.dt_display).iter().enumerate() {
        if k > 0 {
            advance(&mut members, t, parallel)?;
            rho = average(&members)?;
        }
        let neg = negativity.map(|p| rho.negativity(p)).transpose()?;
        sink.row(&DisplayRow {
            t,
            dt_did: pars.dt_display,
            blocks: system.display_density(&rho)?,
            jump_proximity: None,
            negativity: neg,
        })?;
    }
    Ok(rho)
}

/// Same members as [`ensemble_run`], returning every member state instead
/// of the average.
pub fn ensemble_traces(
    system: &Composite,
    psi0: &StateVector,
    pars: &ParsEvolution,
    parallel: bool,
) -> Result<EnsembleTraces> {
    pars.validate()?;
    let mut members = members(system, psi0, pars)?;
    let times = display_times(pars.t_final, pars.dt_display);
    let mut states = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            advance(&mut members, t, parallel)?;
        }
        states.push(
            members
                .iter()
                .map(|m| m.state_vector().clone().renormalized())
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(EnsembleTraces { times, states })
}
